//! Static and adaptive penalty weights for constraint violations.
//!
//! Fitness is `objective + w * violation` (minimised). Each population owns one
//! [`PenaltyState`] and updates it once per generation.

use serde::{Deserialize, Serialize};

/// Penalty strategy with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum PenaltySpec {
    Static { weight: f64 },
    /// Gap between best feasible and best overall, halved; `nu` when no gap exists.
    Smith { nu: f64 },
    /// Weight proportional to the best solution's violation.
    ReverseHadj { alpha: f64 },
    /// Weight proportional to `ceiling - violation` of the best solution.
    Hadj { alpha: f64, ceiling: f64 },
    /// `high` until a feasible solution is known, `low` afterwards.
    Dual { high: f64, low: f64 },
}

impl PenaltySpec {
    pub fn smith() -> Self {
        PenaltySpec::Smith { nu: 5.0 }
    }

    pub fn reverse_hadj() -> Self {
        PenaltySpec::ReverseHadj { alpha: 8.0 }
    }

    pub fn hadj() -> Self {
        PenaltySpec::Hadj {
            alpha: 10.0,
            ceiling: 10.0,
        }
    }

    pub fn dual() -> Self {
        PenaltySpec::Dual {
            high: 50.0,
            low: 5.0,
        }
    }

    /// Weight used before any generation has been observed.
    pub fn initial_weight(&self) -> f64 {
        match *self {
            PenaltySpec::Static { weight } => weight,
            PenaltySpec::Smith { nu } => nu,
            PenaltySpec::ReverseHadj { alpha } => alpha / 2.0,
            PenaltySpec::Hadj { alpha, ceiling } => {
                let w = alpha * ceiling;
                if w > 0.0 {
                    w
                } else {
                    alpha / 2.0
                }
            }
            PenaltySpec::Dual { high, .. } => high,
        }
    }
}

/// Live penalty weight of one population.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyState {
    pub spec: PenaltySpec,
    pub w: f64,
    /// Best feasible objective found so far.
    pub v_feas: Option<f64>,
    /// Best overall fitness found so far.
    pub v_all: Option<f64>,
    /// Violation of the current best solution.
    pub q: f64,
}

impl PenaltyState {
    pub fn new(spec: PenaltySpec) -> Self {
        PenaltyState {
            spec,
            w: spec.initial_weight(),
            v_feas: None,
            v_all: None,
            q: 0.0,
        }
    }

    /// Record the current generation's best values. Best-so-far values only improve.
    pub fn observe(&mut self, best_feasible: Option<f64>, best_overall: f64, q: f64) {
        if let Some(f) = best_feasible {
            self.v_feas = Some(self.v_feas.map_or(f, |v| v.min(f)));
        }
        self.v_all = Some(self.v_all.map_or(best_overall, |v| v.min(best_overall)));
        self.q = q;
    }

    /// Recompute the weight from the observed state.
    pub fn update_weight(&mut self) -> f64 {
        self.w = match self.spec {
            PenaltySpec::Static { weight } => weight,
            PenaltySpec::Smith { nu } => match (self.v_feas, self.v_all) {
                (Some(f), Some(a)) if f > a => (f - a) / 2.0,
                _ => nu,
            },
            PenaltySpec::ReverseHadj { alpha } => {
                if self.q > 0.0 {
                    alpha * self.q
                } else {
                    alpha / 2.0
                }
            }
            PenaltySpec::Hadj { alpha, ceiling } => {
                let w = alpha * (ceiling - self.q).max(0.0);
                if w > 0.0 {
                    w
                } else {
                    alpha / 2.0
                }
            }
            PenaltySpec::Dual { high, low } => {
                if self.v_feas.is_some() {
                    low
                } else {
                    high
                }
            }
        };
        self.w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weight(spec: PenaltySpec, feas: Option<f64>, all: f64, q: f64) -> f64 {
        let mut s = PenaltyState::new(spec);
        s.observe(feas, all, q);
        s.update_weight()
    }

    #[test]
    fn smith_gap_and_floor() {
        assert_eq!(weight(PenaltySpec::smith(), Some(30.0), 20.0, 2.0), 5.0);
        assert_eq!(weight(PenaltySpec::smith(), Some(40.0), 20.0, 2.0), 10.0);
        assert_eq!(weight(PenaltySpec::smith(), Some(20.0), 20.0, 0.0), 5.0);
        assert_eq!(weight(PenaltySpec::smith(), None, 20.0, 3.0), 5.0);
    }

    #[test]
    fn smith_edges_up_as_overall_improves() {
        let mut s = PenaltyState::new(PenaltySpec::smith());
        s.observe(Some(40.0), 30.0, 1.0);
        let w1 = s.update_weight();
        s.observe(None, 25.0, 1.0);
        let w2 = s.update_weight();
        assert!(w2 > w1);
        s.observe(Some(28.0), 25.0, 1.0);
        assert!(s.update_weight() < w2);
    }

    #[test]
    fn hadj_variants() {
        assert_eq!(weight(PenaltySpec::reverse_hadj(), None, 0.0, 3.0), 24.0);
        assert_eq!(weight(PenaltySpec::reverse_hadj(), None, 0.0, 0.0), 4.0);
        assert_eq!(weight(PenaltySpec::hadj(), None, 0.0, 3.0), 70.0);
        assert_eq!(weight(PenaltySpec::hadj(), None, 0.0, 12.0), 5.0);
    }

    #[test]
    fn dual_phases() {
        assert_eq!(weight(PenaltySpec::dual(), None, 10.0, 2.0), 50.0);
        assert_eq!(weight(PenaltySpec::dual(), Some(12.0), 10.0, 2.0), 5.0);
    }

    #[test]
    fn weight_stays_positive() {
        for q in 0..20 {
            let q = q as f64;
            for spec in [
                PenaltySpec::smith(),
                PenaltySpec::reverse_hadj(),
                PenaltySpec::hadj(),
                PenaltySpec::dual(),
            ] {
                assert!(weight(spec, Some(10.0 + q), 10.0, q) > 0.0);
            }
        }
    }
}
