//! Roster evaluation: cover, penalised fitness, pseudo demand, balance classes and extensions.

use serde::{Deserialize, Serialize};

use super::model::{Demand, NurseError, NurseInstance, PatternKind, ShiftPattern, DAYS, GRADES, SHIFTS};
use crate::ga::Evaluation;

/// Cover provided and missing per shift and grade level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverState {
    /// Nurses of grade `s + 1` or better working shift `k`.
    pub provided: Demand,
    pub shortfall: Demand,
    /// Provided minus required at the aggregate level, per shift.
    pub surplus: [i32; SHIFTS],
}

impl CoverState {
    pub fn violation(&self) -> u32 {
        self.shortfall.iter().flatten().sum()
    }
}

pub fn cover(roster: &[usize], inst: &NurseInstance) -> CoverState {
    let mut provided = [[0u32; GRADES]; SHIFTS];
    for (i, &j) in roster.iter().enumerate() {
        let g = inst.grades[i] as usize - 1;
        for k in inst.pattern(i, j).shifts() {
            for cell in &mut provided[k][g..] {
                *cell += 1;
            }
        }
    }
    cover_from_provided(provided, &inst.demand)
}

pub fn cover_from_provided(provided: Demand, demand: &Demand) -> CoverState {
    let mut shortfall = [[0u32; GRADES]; SHIFTS];
    let mut surplus = [0i32; SHIFTS];
    for k in 0..SHIFTS {
        for s in 0..GRADES {
            shortfall[k][s] = demand[k][s].saturating_sub(provided[k][s]);
        }
        surplus[k] = provided[k][GRADES - 1] as i32 - demand[k][GRADES - 1] as i32;
    }
    CoverState {
        provided,
        shortfall,
        surplus,
    }
}

pub fn objective(roster: &[usize], inst: &NurseInstance) -> u32 {
    roster.iter().enumerate().map(|(i, &j)| inst.costs[i][j]).sum()
}

/// Penalty weights of the head-nurse and team extensions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extensions {
    pub w_head: f64,
    pub w_team: f64,
}

impl Default for Extensions {
    fn default() -> Self {
        Extensions { w_head: 5.0, w_team: 5.0 }
    }
}

/// Objective, undercover and fitness of a roster.
pub fn evaluate(roster: &[usize], inst: &NurseInstance, w: f64) -> Result<(u32, u32, f64), NurseError> {
    inst.check_roster(roster)?;
    let obj = objective(roster, inst);
    let viol = cover(roster, inst).violation();
    Ok((obj, viol, obj as f64 + w * viol as f64))
}

/// Engine view of a roster, with optional extension penalties folded into the objective.
pub fn evaluation(roster: &[usize], inst: &NurseInstance, ext: Option<&Extensions>) -> Evaluation {
    let obj = objective(roster, inst) as f64;
    let viol = cover(roster, inst).violation() as f64;
    let extra = ext.map_or(0.0, |e| extended_penalty(roster, inst, e.w_head, e.w_team));
    Evaluation {
        objective: obj + extra,
        violation: viol,
        bonus: 0.0,
        feasible: viol == 0.0,
        report: obj,
    }
}

/// Per-grade demand split from the cumulative demand, clamped at zero.
pub fn pseudo_demand(demand: &Demand) -> Demand {
    let mut s = [[0u32; GRADES]; SHIFTS];
    for k in 0..SHIFTS {
        s[k][0] = demand[k][0];
        for g in 1..GRADES {
            s[k][g] = demand[k][g].saturating_sub(demand[k][g - 1]);
        }
    }
    s
}

/// Set of grades (bit `s` for grade `s + 1`).
pub type GradeSet = u8;

pub fn grade_set(grades: &[u8]) -> GradeSet {
    grades.iter().fold(0, |acc, &g| acc | 1 << (g - 1))
}

/// Objective and pseudo undercover restricted to the grades in `set`, using exact-grade cover.
pub fn sub_parts(roster: &[usize], set: GradeSet, inst: &NurseInstance, pseudo: &Demand) -> (u32, u32) {
    let mut exact = [[0u32; GRADES]; SHIFTS];
    let mut obj = 0;
    for (i, &j) in roster.iter().enumerate() {
        let g = inst.grades[i] as usize - 1;
        if set >> g & 1 == 0 {
            continue;
        }
        obj += inst.costs[i][j];
        for k in inst.pattern(i, j).shifts() {
            exact[k][g] += 1;
        }
    }
    let mut viol = 0;
    for k in 0..SHIFTS {
        for g in 0..GRADES {
            if set >> g & 1 == 1 {
                viol += pseudo[k][g].saturating_sub(exact[k][g]);
            }
        }
    }
    (obj, viol)
}

pub fn sub_fitness(roster: &[usize], set: GradeSet, inst: &NurseInstance, w: f64) -> f64 {
    let (obj, viol) = sub_parts(roster, set, inst, &pseudo_demand(&inst.demand));
    obj as f64 + w * viol as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Balance {
    Feasible,
    Balanced,
    Unbalanced,
    Undecided,
}

/// Classify an infeasible roster by where its aggregate shortages and surpluses lie.
pub fn classify_surplus(surplus: &[i32; SHIFTS], violation: u32) -> Balance {
    if violation == 0 {
        return Balance::Feasible;
    }
    let c1 = surplus[..DAYS].iter().any(|&d| d < 0);
    let c2 = surplus[..DAYS].iter().any(|&d| d > 0);
    let c3 = surplus[DAYS..].iter().any(|&d| d < 0);
    let c4 = surplus[DAYS..].iter().any(|&d| d > 0);
    if (c1 && c2 && !c3 && !c4) || (c3 && c4 && !c1 && !c2) {
        Balance::Balanced
    } else if (c1 && !c2 && !c3) || (c3 && !c1 && !c4) {
        Balance::Unbalanced
    } else {
        Balance::Undecided
    }
}

pub fn classify_balance(roster: &[usize], inst: &NurseInstance) -> Balance {
    let c = cover(roster, inst);
    classify_surplus(&c.surplus, c.violation())
}

/// Weekend head-nurse and team-presence penalties.
pub fn extended_penalty(roster: &[usize], inst: &NurseInstance, w_head: f64, w_team: f64) -> f64 {
    let mut heads = [0u32; SHIFTS];
    let teams: Vec<u32> = {
        let mut t: Vec<u32> = inst.file.nurses.iter().filter_map(|n| n.team).collect();
        t.sort_unstable();
        t.dedup();
        t
    };
    let mut team_cover = vec![[0u32; SHIFTS]; teams.len()];
    for (i, &j) in roster.iter().enumerate() {
        let nurse = inst.nurse(i);
        let p = inst.pattern(i, j);
        for k in p.shifts() {
            if nurse.head {
                heads[k] += 1;
            }
            if let Some(t) = nurse.team {
                let h = teams.binary_search(&t).expect("team listed");
                team_cover[h][k] += 1;
            }
        }
    }
    let weekend = [0, DAYS - 1, DAYS, SHIFTS - 1];
    let head_excess: u32 = weekend.iter().map(|&k| heads[k].saturating_sub(1)).sum();
    let team_missing: u32 = team_cover
        .iter()
        .map(|c| {
            (0..SHIFTS)
                .map(|k| if k < DAYS { 2u32.saturating_sub(c[k]) } else { 1u32.saturating_sub(c[k]) })
                .sum::<u32>()
        })
        .sum();
    w_head * head_excess as f64 + w_team * team_missing as f64
}

/// Number of working shifts that must move to turn `a` into `b`.
pub fn adjacency_degree(a: ShiftPattern, b: ShiftPattern) -> Result<u32, NurseError> {
    let (ka, kb) = (a.kind(), b.kind());
    if ka != kb && ka != PatternKind::Combined && kb != PatternKind::Combined {
        let day = if ka == PatternKind::Day { a } else { b };
        return Ok(day.count());
    }
    if a.count() != b.count() {
        return Err(NurseError::Incompatible(format!("{a} and {b} work different numbers of shifts")));
    }
    Ok((a.0 & !b.0).count_ones())
}
