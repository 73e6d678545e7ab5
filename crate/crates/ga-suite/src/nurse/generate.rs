//! Seeded nurse instance generators: full-size structured/random-cost/high-cost weeks and micro instances.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::eval::cover;
use super::model::{
    feasible_patterns, Contract, History, NurseError, NurseInstance, NurseInstanceFile, NurseSpec, PreferenceClass,
    Request, ShiftPattern, GRADES, SHIFTS,
};
use super::smoothing::knapsack_smooth;
use crate::ga::{seeded, Rng64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NurseVariant {
    /// Costs from the preference and history rules.
    Structured,
    /// Every cost drawn uniformly from 0..=100.
    Random,
    /// Structured with the base pattern cost scaled by twenty.
    HighCost,
}

impl std::str::FromStr for NurseVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structured" => Ok(NurseVariant::Structured),
            "random" => Ok(NurseVariant::Random),
            "highcost" => Ok(NurseVariant::HighCost),
            _ => Err(format!("unknown nurse variant {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NurseGenSpec {
    pub nurses: usize,
    pub variant: NurseVariant,
    /// Share of grades 1, 2 and 3.
    pub grade_mix: [f64; 3],
    /// Contracts (days, nights) with their weights.
    pub contract_mix: Vec<((u8, u8), f64)>,
}

impl NurseGenSpec {
    pub fn new(nurses: usize, variant: NurseVariant) -> Self {
        NurseGenSpec {
            nurses,
            variant,
            grade_mix: [0.2, 0.3, 0.5],
            contract_mix: vec![((5, 4), 0.55), ((4, 4), 0.1), ((4, 3), 0.2), ((3, 3), 0.15)],
        }
    }
}

fn weighted<T: Copy>(items: &[(T, f64)], rng: &mut Rng64) -> T {
    items.choose_weighted(rng, |i| i.1).expect("non-empty weights").0
}

fn random_class(rng: &mut Rng64) -> PreferenceClass {
    use PreferenceClass::*;
    weighted(
        &[
            (Neutral, 0.40),
            (DaysOnly, 0.10),
            (NightsOnly, 0.05),
            (DaysImportant, 0.10),
            (NightsImportant, 0.05),
            (DaysPreferred, 0.20),
            (NightsPreferred, 0.10),
        ],
        rng,
    )
}

fn random_nurse(id: u32, grade: u8, contract: (u8, u8), rng: &mut Rng64) -> NurseSpec {
    let mut n = NurseSpec::regular(id, grade, contract.0, contract.1);
    n.preference = random_class(rng);
    let requests = weighted(&[(0usize, 0.4), (1, 0.3), (2, 0.2), (3, 0.1)], rng);
    let mut shifts: Vec<u8> = (0..SHIFTS as u8).collect();
    shifts.shuffle(rng);
    for &shift in shifts.iter().take(requests) {
        let level = weighted(&[(1u8, 0.35), (2, 0.3), (3, 0.2), (4, 0.12), (5, 0.03)], rng);
        n.requests.push(Request { shift, level });
    }
    n.requests.sort_by_key(|r| r.shift);
    let own = feasible_patterns(&n).expect("regular contract");
    let last = *own.choose(rng).expect("non-empty");
    n.history = History {
        last_week: Some(last),
        nights_last_week: last.nights() != 0,
        nights_week_before: rng.gen_bool(0.2),
        weekend_last_week: last.works(0) || last.works(6),
        last_week_cost: weighted(&[(0u32, 0.7), (1, 0.15), (2, 0.1), (5, 0.05)], rng),
    };
    n.head = grade == 1 && rng.gen_bool(0.5);
    n.team = Some(rng.gen_range(0..3));
    n
}

/// Planted assignment: each nurse on a pattern of the preferred kind where possible.
fn plant(nurses: &[NurseSpec], rng: &mut Rng64) -> Vec<ShiftPattern> {
    nurses
        .iter()
        .map(|n| {
            let own = feasible_patterns(n).expect("generated contract");
            let nights: Vec<_> = own.iter().copied().filter(|p| p.nights() != 0).collect();
            let days: Vec<_> = own.iter().copied().filter(|p| p.nights() == 0).collect();
            let night_bias = match n.preference {
                PreferenceClass::NightsImportant | PreferenceClass::NightsPreferred => 0.8,
                PreferenceClass::Neutral => 0.3,
                _ => 0.1,
            };
            let pool = if !nights.is_empty() && (days.is_empty() || rng.gen_bool(night_bias)) {
                nights
            } else {
                days
            };
            *pool.choose(rng).expect("non-empty pool")
        })
        .collect()
}

/// Full-size week with demand derived from a planted roster, then smoothed.
pub fn generate_nurse_instance(spec: &NurseGenSpec, seed: u64) -> Result<NurseInstanceFile, NurseError> {
    if spec.nurses == 0 {
        return Err(NurseError::Invalid("no nurses requested".into()));
    }
    let mut rng = seeded(seed);
    let grades = [1u8, 2, 3];
    let mut grade_list: Vec<u8> = (0..spec.nurses)
        .map(|_| *grades.choose_weighted(&mut rng, |g| spec.grade_mix[*g as usize - 1]).expect("grades"))
        .collect();
    grade_list.sort_unstable();
    let mut nurses: Vec<NurseSpec> = grade_list
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let c = weighted(&spec.contract_mix, &mut rng);
            random_nurse(i as u32 + 1, g, c, &mut rng)
        })
        .collect();

    let planted = plant(&nurses, &mut rng);
    let mut provided = [[0u32; GRADES]; SHIFTS];
    for (n, p) in nurses.iter().zip(&planted) {
        for k in p.shifts() {
            for cell in &mut provided[k][n.grade as usize - 1..] {
                *cell += 1;
            }
        }
    }
    let mut demand = [[0u32; GRADES]; SHIFTS];
    for k in 0..SHIFTS {
        let total = provided[k][2];
        let slack = if k < 7 && total > 1 && rng.gen_bool(0.4) { 1 } else { 0 };
        let r3 = total - slack;
        let r1 = ((provided[k][0] as f64) * rng.gen_range(0.4..=1.0)).floor() as u32;
        let r2 = (((provided[k][1] as f64) * rng.gen_range(0.5..=1.0)).floor() as u32).max(r1);
        demand[k] = [r1.min(r3), r2.min(r3), r3];
    }

    let smoothed = knapsack_smooth(&demand, &nurses);
    nurses.extend(smoothed.extra);
    let mut file = NurseInstanceFile {
        name: None,
        nurses,
        demand: smoothed.demand.to_vec(),
        pij: None,
        base_cost_multiplier: 1,
    };
    match spec.variant {
        NurseVariant::Structured => {}
        NurseVariant::HighCost => file.base_cost_multiplier = 20,
        NurseVariant::Random => {
            let rows = file
                .nurses
                .iter()
                .map(|n| {
                    let len = feasible_patterns(n).map(|p| p.len()).unwrap_or(0);
                    if n.role == super::model::NurseRole::Regular {
                        (0..len).map(|_| rng.gen_range(0..=100)).collect()
                    } else {
                        vec![0; len]
                    }
                })
                .collect();
            file.pij = Some(rows);
        }
    }
    NurseInstance::build(file.clone())?;
    Ok(file)
}

/// Tiny instance: 3 or 4 nurses with at most `max_patterns` explicit patterns each and
/// demand equal to the cover of a planted roster.
pub fn generate_micro_instance(seed: u64, max_patterns: usize) -> NurseInstanceFile {
    let mut rng = seeded(seed);
    let count = rng.gen_range(3..=4);
    let mut nurses = Vec::new();
    let mut pij = Vec::new();
    let mut planted = Vec::new();
    for i in 0..count {
        let grade = rng.gen_range(1..=3);
        let (d, n) = *[(5u8, 4u8), (4, 3), (3, 3)].choose(&mut rng).expect("contracts");
        let mut spec = NurseSpec::regular(i as u32 + 1, grade, d, n);
        let mut all = feasible_patterns(&spec).expect("contract");
        all.shuffle(&mut rng);
        let k = rng.gen_range(4..=max_patterns.max(4));
        let mut own: Vec<ShiftPattern> = all.into_iter().take(k).collect();
        own.sort();
        planted.push(*own.choose(&mut rng).expect("non-empty"));
        pij.push((0..own.len()).map(|_| rng.gen_range(0..=30)).collect());
        spec.patterns = Some(own);
        spec.contract = Contract {
            days: d,
            nights: n,
            combined: None,
        };
        nurses.push(spec);
    }
    let mut file = NurseInstanceFile {
        name: Some(format!("micro-{seed}")),
        nurses,
        demand: vec![[0; GRADES]; SHIFTS],
        pij: Some(pij),
        base_cost_multiplier: 1,
    };
    let probe = NurseInstance::build(file.clone()).expect("micro instance");
    let roster: Vec<usize> = planted
        .iter()
        .enumerate()
        .map(|(i, p)| probe.option_of_pattern(i, *p).expect("planted pattern"))
        .collect();
    let c = cover(&roster, &probe);
    file.demand = c.provided.to_vec();
    file
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nurse::model::NurseRole;

    #[test]
    fn variants_build() {
        for (variant, seed) in [(NurseVariant::Structured, 1), (NurseVariant::Random, 2), (NurseVariant::HighCost, 3)] {
            let file = generate_nurse_instance(&NurseGenSpec::new(25, variant), seed).unwrap();
            let inst = NurseInstance::build(file).unwrap();
            assert!(inst.costs.iter().flatten().all(|&c| c <= 100));
            assert!(inst.grades.windows(2).all(|w| w[0] <= w[1]) || inst.file.nurses.iter().any(|n| n.role != NurseRole::Regular));
        }
    }

    #[test]
    fn generation_is_seeded() {
        let spec = NurseGenSpec::new(20, NurseVariant::Structured);
        assert_eq!(generate_nurse_instance(&spec, 5).unwrap(), generate_nurse_instance(&spec, 5).unwrap());
        assert_ne!(generate_nurse_instance(&spec, 5).unwrap(), generate_nurse_instance(&spec, 6).unwrap());
    }

    #[test]
    fn micro_instances_are_small_and_feasible() {
        for seed in 0..20 {
            let file = generate_micro_instance(seed, 8);
            let inst = NurseInstance::build(file).unwrap();
            assert!((3..=4).contains(&inst.len()));
            assert!(inst.options.iter().all(|o| o.len() <= 8));
        }
    }
}
