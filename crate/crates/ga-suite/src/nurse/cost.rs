//! Nurse-pattern cost construction from preferences, requests and history.

use super::model::{NurseRole, NurseSpec, PatternKind, PreferenceClass, ShiftPattern, DAYS};

/// Cost of violating a request of level 1..=5.
pub const REQUEST_COST: [u32; 5] = [3, 8, 12, 18, 90];
pub const IMPORTANT_COST: u32 = 12;
pub const PREFERRED_COST: u32 = 3;
pub const NIGHT_DAY_NIGHT_COST: u32 = 18;
pub const MAX_WORK_STRETCH: usize = 7;

fn bit(mask: u8, d: usize) -> bool {
    mask >> d & 1 == 1
}

/// True when a day shift sits between two night shifts somewhere in the week.
pub fn night_day_night(p: ShiftPattern) -> bool {
    let (days, nights) = (p.days(), p.nights());
    (0..DAYS).any(|b| bit(days, b) && (0..b).any(|a| bit(nights, a)) && (b + 1..DAYS).any(|c| bit(nights, c)))
}

/// Base cost 1..=4 of a seven-day working mask.
///
/// One block of days off scores 1. Each further block adds one, starting from 2,
/// and a lone working day between two days off inside the week adds one more.
pub fn base_cost_of_mask(mask: u8) -> u32 {
    let off_blocks = (0..DAYS)
        .filter(|&d| !bit(mask, d) && bit(mask, (d + DAYS - 1) % DAYS))
        .count() as u32;
    if off_blocks <= 1 {
        return 1;
    }
    let isolated = (1..DAYS - 1).any(|d| bit(mask, d) && !bit(mask, d - 1) && !bit(mask, d + 1));
    (2 + isolated as u32 + (off_blocks - 2)).min(4)
}

pub fn base_cost(p: ShiftPattern) -> u32 {
    match p.kind() {
        PatternKind::Day => base_cost_of_mask(p.days()),
        PatternKind::Night => base_cost_of_mask(p.nights()),
        PatternKind::Combined if night_day_night(p) => NIGHT_DAY_NIGHT_COST,
        PatternKind::Combined => base_cost_of_mask(p.calendar()),
    }
}

fn class_cost(class: PreferenceClass, p: ShiftPattern) -> u32 {
    let has_days = p.days() != 0;
    let has_nights = p.nights() != 0;
    match class {
        PreferenceClass::DaysImportant if has_nights => IMPORTANT_COST,
        PreferenceClass::NightsImportant if has_days => IMPORTANT_COST,
        PreferenceClass::DaysPreferred if has_nights => PREFERRED_COST,
        PreferenceClass::NightsPreferred if has_days => PREFERRED_COST,
        _ => 0,
    }
}

/// Days beyond the limit in every run of consecutive worked days that reaches into this week.
fn stretch_excess(last: u8, this: u8) -> u32 {
    let worked: Vec<bool> = (0..DAYS).map(|d| bit(last, d)).chain((0..DAYS).map(|d| bit(this, d))).collect();
    let mut excess = 0;
    let mut run = 0;
    for (i, &w) in worked.iter().enumerate() {
        if w {
            run += 1;
        }
        let ends = !w || i == worked.len() - 1;
        if ends && run > 0 {
            let last_day = if w { i } else { i - 1 };
            if last_day >= DAYS && run > MAX_WORK_STRETCH {
                excess += (run - MAX_WORK_STRETCH) as u32;
            }
            run = 0;
        }
    }
    excess
}

fn continuity_cost(last: u8, this: u8) -> u32 {
    let mut c = 0;
    if !bit(last, 5) && bit(last, 6) && !bit(this, 0) {
        c += 3;
    }
    if !bit(last, 6) && bit(this, 0) && !bit(this, 1) {
        c += 3;
    }
    c
}

/// Cost of one pattern for one nurse before the final clamp.
fn raw_cost(nurse: &NurseSpec, p: ShiftPattern, base_multiplier: u32) -> u32 {
    let mut cost = 1 + (base_cost(p) - 1) * base_multiplier;
    cost += class_cost(nurse.preference, p);
    for r in &nurse.requests {
        if p.works(r.shift as usize) {
            cost += REQUEST_COST[(r.level as usize).clamp(1, 5) - 1];
        }
    }
    let h = &nurse.history;
    let last = h.last_week.map(|l| l.calendar()).unwrap_or(0);
    if h.last_week.is_some() {
        cost += stretch_excess(last, p.calendar());
        cost += continuity_cost(last, p.calendar());
    }
    if p.nights() != 0 {
        if h.nights_last_week {
            cost += 10;
        }
        if h.nights_week_before {
            cost += 5;
        }
    }
    if h.weekend_last_week && (bit(p.calendar(), 0) || bit(p.calendar(), 6)) {
        cost += 1;
    }
    cost
}

/// Cost row of a nurse over the given patterns, each in `0..=100`.
pub fn build_pij(nurse: &NurseSpec, patterns: &[ShiftPattern], base_multiplier: u32) -> Vec<u32> {
    if nurse.role != NurseRole::Regular {
        return vec![0; patterns.len()];
    }
    patterns
        .iter()
        .map(|&p| {
            let mut c = raw_cost(nurse, p, base_multiplier) - 1;
            if c > 89 {
                c = 100;
            }
            if c != 0 {
                c = (c + nurse.history.last_week_cost).min(100);
            }
            c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nurse::model::{patterns_of_kind, Request};

    fn pat(s: &str) -> ShiftPattern {
        s.parse().unwrap()
    }

    #[test]
    fn perfect_pattern_costs_zero() {
        let n = NurseSpec::regular(1, 1, 5, 4);
        assert_eq!(build_pij(&n, &[pat("1111100|0000000")], 1), vec![0]);
    }

    #[test]
    fn grade_five_request_is_capped() {
        let mut n = NurseSpec::regular(1, 1, 5, 4);
        n.requests.push(Request { shift: 0, level: 5 });
        assert_eq!(build_pij(&n, &[pat("1111100|0000000")], 1), vec![100]);
        n.requests[0].level = 2;
        assert_eq!(build_pij(&n, &[pat("1111100|0000000")], 1), vec![8]);
    }

    #[test]
    fn preference_classes() {
        let mut n = NurseSpec::regular(1, 1, 5, 4);
        n.preference = PreferenceClass::DaysImportant;
        let night = pat("0000000|1111000");
        assert_eq!(build_pij(&n, &[night], 1), vec![12]);
        n.preference = PreferenceClass::DaysPreferred;
        assert_eq!(build_pij(&n, &[night], 1), vec![3]);
    }

    #[test]
    fn base_costs_of_five_day_patterns() {
        let costs: Vec<u32> = patterns_of_kind(PatternKind::Day, 5).iter().map(|&p| base_cost(p)).collect();
        assert_eq!(costs.len(), 21);
        assert!(costs.iter().all(|c| (1..=4).contains(c)));
        assert_eq!(base_cost(pat("1111100|0000000")), 1);
        assert_eq!(base_cost(pat("0111110|0000000")), 1);
        assert_eq!(base_cost(pat("1110110|0000000")), 2);
        assert_eq!(base_cost(pat("1101011|0000000")), 3);
        assert_eq!(base_cost(pat("1010101|0000000")), 4);
    }

    #[test]
    fn night_day_night_is_expensive() {
        assert!(night_day_night(pat("0010000|1000100")));
        assert!(!night_day_night(pat("1000000|0010100")));
        assert_eq!(base_cost(pat("0010000|1000100")), 18);
    }

    #[test]
    fn history_terms() {
        let mut n = NurseSpec::regular(1, 1, 5, 4);
        n.history.last_week = Some(pat("0111111|0000000"));
        // six worked days carried plus five this week: eleven in a row
        assert_eq!(build_pij(&n, &[pat("1111100|0000000")], 1), vec![4]);
        n.history.last_week = Some(pat("1111101|0000000"));
        assert_eq!(build_pij(&n, &[pat("0111110|0000000")], 1), vec![3]);
        n.history.last_week = Some(pat("1111100|0000000"));
        assert_eq!(build_pij(&n, &[pat("1011110|0000000")], 1), vec![1 + 3]);
        n.history = Default::default();
        n.history.nights_last_week = true;
        n.history.nights_week_before = true;
        assert_eq!(build_pij(&n, &[pat("0000000|0111100")], 1), vec![15]);
        n.history = Default::default();
        n.history.weekend_last_week = true;
        assert_eq!(build_pij(&n, &[pat("1111100|0000000")], 1), vec![1]);
    }

    #[test]
    fn last_week_cost_only_on_nonzero_entries() {
        let mut n = NurseSpec::regular(1, 1, 5, 4);
        n.history.last_week_cost = 99;
        let row = build_pij(&n, &[pat("1111100|0000000"), pat("1110110|0000000")], 1);
        assert_eq!(row, vec![0, 100]);
    }

    #[test]
    fn high_pattern_cost_multiplies_base() {
        let n = NurseSpec::regular(1, 1, 5, 4);
        let row = build_pij(&n, &patterns_of_kind(PatternKind::Day, 5), 20);
        assert!(row.iter().all(|c| [0, 20, 40, 60].contains(c)));
    }

    #[test]
    fn dummy_costs_zero() {
        let mut n = NurseSpec::regular(1, 3, 1, 0);
        n.role = NurseRole::Bank;
        n.requests.push(Request { shift: 0, level: 5 });
        assert_eq!(build_pij(&n, &[pat("1000000|0000000")], 1), vec![0]);
    }
}
