//! Demand smoothing: make day cover tight by raising demand and adding dummy or bank nurses.

use super::model::{Contract, Demand, NurseRole, NurseSpec, PreferenceClass, ShiftPattern, DAYS, GRADES, SHIFTS};

const TOTAL: usize = GRADES - 1;
const WEEKDAYS: std::ops::RangeInclusive<usize> = 1..=5;

#[derive(Clone, Debug, PartialEq)]
pub struct Smoothed {
    pub demand: Demand,
    /// Dummy and bank nurses to append to the instance.
    pub extra: Vec<NurseSpec>,
    /// Nurses chosen to cover the nights.
    pub night_nurses: Vec<usize>,
    /// Day units available minus day units required, before adjustment.
    pub day_surplus: i64,
}

fn extra_nurse(id: u32, role: NurseRole, patterns: Vec<ShiftPattern>) -> NurseSpec {
    let p0 = patterns[0];
    let mut n = NurseSpec::regular(id, 3, p0.day_count() as u8, p0.night_count() as u8);
    n.contract = Contract {
        days: p0.day_count() as u8,
        nights: p0.night_count() as u8,
        combined: None,
    };
    n.role = role;
    n.patterns = Some(patterns);
    n
}

/// Dummy working `shifts` day shifts between Monday and Friday.
pub fn weekday_dummy(id: u32, shifts: usize) -> NurseSpec {
    let patterns = super::model::patterns_of_kind(super::model::PatternKind::Day, shifts)
        .into_iter()
        .filter(|p| p.days() & 0b100_0001 == 0)
        .collect();
    extra_nurse(id, NurseRole::Dummy, patterns)
}

/// Dummy working one weekend day shift.
pub fn weekend_dummy(id: u32) -> NurseSpec {
    extra_nurse(
        id,
        NurseRole::Dummy,
        vec![ShiftPattern::from_shifts(&[0]), ShiftPattern::from_shifts(&[6])],
    )
}

/// Bank nurse working a single day shift (or night shift when `night`).
pub fn bank_nurse(id: u32, night: bool) -> NurseSpec {
    let offset = if night { DAYS } else { 0 };
    extra_nurse(
        id,
        NurseRole::Bank,
        (0..DAYS).map(|d| ShiftPattern::from_shifts(&[d + offset])).collect(),
    )
}

/// Apply the day ladder for `surplus` spare day units; returns the extra nurses.
pub fn smooth_days(demand: &mut Demand, surplus: i64, first_id: u32) -> Vec<NurseSpec> {
    let mut extra = Vec::new();
    let raise = |demand: &mut Demand, days: &mut dyn Iterator<Item = usize>| {
        for d in days {
            demand[d][TOTAL] += 1;
        }
    };
    if surplus < 0 {
        for i in 0..(-surplus) as u32 {
            extra.push(bank_nurse(first_id + i, false));
        }
        return extra;
    }
    let mut u = surplus;
    while u > 7 {
        raise(demand, &mut (0..DAYS));
        u -= 7;
    }
    match u {
        7 => raise(demand, &mut (0..DAYS)),
        6 => {
            raise(demand, &mut (0..DAYS));
            extra.push(weekend_dummy(first_id));
        }
        5 => raise(demand, &mut WEEKDAYS.clone()),
        1..=4 => {
            raise(demand, &mut WEEKDAYS.clone());
            extra.push(weekday_dummy(first_id, (5 - u) as usize));
        }
        _ => {}
    }
    extra
}

fn night_capable(n: &NurseSpec) -> bool {
    n.role == NurseRole::Regular && n.contract.nights > 0 && n.preference != PreferenceClass::DaysOnly
}

fn night_forced(n: &NurseSpec) -> bool {
    night_capable(n) && (n.preference == PreferenceClass::NightsOnly || n.contract.days == 0)
}

fn prefers_nights(n: &NurseSpec) -> bool {
    matches!(
        n.preference,
        PreferenceClass::NightsImportant | PreferenceClass::NightsPreferred
    )
}

/// Smallest subset of optional nurses whose night shifts reach `need`; earlier items win ties.
fn night_knapsack(items: &[(usize, u32)], need: u32) -> Vec<usize> {
    if need == 0 {
        return Vec::new();
    }
    let total: u32 = items.iter().map(|i| i.1).sum();
    if total <= need {
        return items.iter().map(|i| i.0).collect();
    }
    let cap = total as usize;
    // reached[s] = (item index, previous sum) that first reached s
    let mut reached: Vec<Option<(usize, usize)>> = vec![None; cap + 1];
    let mut seen = vec![false; cap + 1];
    seen[0] = true;
    for (idx, &(_, w)) in items.iter().enumerate() {
        for s in (0..=cap - w as usize).rev() {
            let t = s + w as usize;
            if seen[s] && !seen[t] {
                seen[t] = true;
                reached[t] = Some((idx, s));
            }
        }
    }
    let target = (need as usize..=cap).find(|&s| seen[s]).expect("total exceeds need");
    let mut chosen = Vec::new();
    let mut s = target;
    while s > 0 {
        let (idx, prev) = reached[s].expect("reachable sum has a predecessor");
        chosen.push(items[idx].0);
        s = prev;
    }
    chosen.sort_unstable();
    chosen
}

/// Split nurses between nights and days, then make day cover tight.
pub fn knapsack_smooth(demand: &Demand, nurses: &[NurseSpec]) -> Smoothed {
    let mut demand = *demand;
    let night_need: u32 = (DAYS..SHIFTS).map(|k| demand[k][TOTAL]).sum();
    let day_need: u32 = (0..DAYS).map(|k| demand[k][TOTAL]).sum();

    let mut night_nurses: Vec<usize> = (0..nurses.len()).filter(|&i| night_forced(&nurses[i])).collect();
    let forced: u32 = night_nurses.iter().map(|&i| nurses[i].contract.nights as u32).sum();
    let mut optional: Vec<(usize, u32)> = (0..nurses.len())
        .filter(|&i| night_capable(&nurses[i]) && !night_forced(&nurses[i]))
        .map(|i| (i, nurses[i].contract.nights as u32))
        .collect();
    optional.sort_by_key(|&(i, _)| !prefers_nights(&nurses[i]));
    night_nurses.extend(night_knapsack(&optional, night_need.saturating_sub(forced)));
    night_nurses.sort_unstable();

    let night_supply: u32 = night_nurses.iter().map(|&i| nurses[i].contract.nights as u32).sum();
    let day_supply: i64 = (0..nurses.len())
        .filter(|i| !night_nurses.contains(i))
        .filter(|&i| {
            let n = &nurses[i];
            n.role == NurseRole::Regular && n.preference != PreferenceClass::NightsOnly
        })
        .map(|i| nurses[i].contract.days as i64)
        .sum();
    let surplus = day_supply - day_need as i64;
    let first_id = nurses.iter().map(|n| n.id).max().map_or(0, |m| m + 1);
    let mut extra = smooth_days(&mut demand, surplus, first_id);
    let next = first_id + extra.len() as u32;
    for i in 0..night_need.saturating_sub(night_supply) {
        extra.push(bank_nurse(next + i, true));
    }
    Smoothed {
        demand,
        extra,
        night_nurses,
        day_surplus: surplus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day_demand(per_day: [u32; 7]) -> Demand {
        let mut d = [[0; GRADES]; SHIFTS];
        for k in 0..DAYS {
            d[k] = [0, 0, per_day[k]];
        }
        d
    }

    fn totals(d: &Demand) -> Vec<u32> {
        (0..DAYS).map(|k| d[k][TOTAL]).collect()
    }

    #[test]
    fn ladder_cases() {
        let base = day_demand([10; 7]);

        let mut d = base;
        let extra = smooth_days(&mut d, 5, 100);
        assert_eq!(totals(&d), vec![10, 11, 11, 11, 11, 11, 10]);
        assert!(extra.is_empty());

        let mut d = base;
        let extra = smooth_days(&mut d, 4, 100);
        assert_eq!(totals(&d), vec![10, 11, 11, 11, 11, 11, 10]);
        assert_eq!(extra.len(), 1);
        assert_eq!(extra[0].role, NurseRole::Dummy);
        assert_eq!(extra[0].contract.days, 1);
        assert!(extra[0].patterns.as_ref().unwrap().iter().all(|p| p.days() & 0b100_0001 == 0));

        let mut d = base;
        let extra = smooth_days(&mut d, 7, 100);
        assert_eq!(totals(&d), vec![11; 7]);
        assert!(extra.is_empty());

        let mut d = base;
        let extra = smooth_days(&mut d, 6, 100);
        assert_eq!(totals(&d), vec![11; 7]);
        assert_eq!(extra.len(), 1);
        assert_eq!(extra[0].patterns.as_ref().unwrap().len(), 2);

        let mut d = base;
        let extra = smooth_days(&mut d, 19, 100);
        assert_eq!(totals(&d), vec![12, 13, 13, 13, 13, 13, 12]);
        assert!(extra.is_empty());

        let mut d = base;
        assert!(smooth_days(&mut d, 0, 100).is_empty());
        assert_eq!(d, base);

        let mut d = base;
        let extra = smooth_days(&mut d, -3, 100);
        assert_eq!(d, base);
        assert_eq!(extra.len(), 3);
        assert!(extra.iter().all(|n| n.role == NurseRole::Bank && n.contract.days == 1));
    }

    #[test]
    fn knapsack_picks_tight_night_set() {
        let nurses: Vec<NurseSpec> = (0..6).map(|i| NurseSpec::regular(i, 3, 5, 4)).collect();
        let mut d = day_demand([2; 7]);
        for k in DAYS..SHIFTS {
            d[k] = [0, 0, 1];
        }
        // nights need 7 units: two nurses give 8; four nurses left on days give 20 for 14 needed
        let s = knapsack_smooth(&d, &nurses);
        assert_eq!(s.night_nurses.len(), 2);
        assert_eq!(s.day_surplus, 6);
        assert_eq!(s.extra.len(), 1);
    }

    #[test]
    fn seventy_five_for_seventy() {
        let nurses: Vec<NurseSpec> = (0..15).map(|i| NurseSpec::regular(i, 3, 5, 0)).collect();
        let d = day_demand([10; 7]);
        let s = knapsack_smooth(&d, &nurses);
        assert_eq!(s.day_surplus, 5);
        assert_eq!(totals(&s.demand), vec![10, 11, 11, 11, 11, 11, 10]);
        assert!(s.extra.is_empty());
    }
}
