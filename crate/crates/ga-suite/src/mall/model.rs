//! Mall layout and tenant selection: instance data, layout statistics and rent.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ga::Evaluation;

/// Group factor for zero, one and two complete groups.
pub const BONUS_FACTORS: [f64; 3] = [10.0, 12.0, 14.4];
pub const SMALL_FACTOR: f64 = 10.0;
pub const MEDIUM_FACTOR: f64 = 11.5;
pub const LARGE_FACTOR: f64 = 13.0;
pub const LARGEST_GROUP: usize = 10;

#[derive(Debug, Error)]
pub enum MallError {
    #[error("invalid mall instance: {0}")]
    Invalid(String),
    #[error("layout mismatch: {0}")]
    Layout(String),
    #[error("instance generation failed: {0}")]
    Generation(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShopBounds {
    pub min: u32,
    pub ideal: u32,
    pub max: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeCaps {
    pub small: u32,
    pub medium: u32,
    pub large: u32,
}

impl SizeCaps {
    pub fn get(&self, size: ShopSize) -> u32 {
        match size {
            ShopSize::Small => self.small,
            ShopSize::Medium => self.medium,
            ShopSize::Large => self.large,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShopSize {
    Small,
    Medium,
    Large,
}

impl ShopSize {
    /// Size of the shop a type's `n`-th unit in an area completes.
    pub fn created_by(n: u32) -> Self {
        match n % 3 {
            0 => ShopSize::Large,
            2 => ShopSize::Medium,
            _ => ShopSize::Small,
        }
    }
}

/// On-disk mall instance. Areas are inclusive 1-based location ranges in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MallInstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub locations: usize,
    pub area_bounds: Vec<[usize; 2]>,
    /// `membership[j][l]` is 1 when shop type `j` belongs to group `l`.
    pub membership: Vec<Vec<u8>>,
    /// Absent means any number of shops of each size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_caps: Option<SizeCaps>,
    /// Optional replacement for the size efficiency factors, indexed by unit count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<Vec<f64>>,
    pub attractiveness: Vec<f64>,
    pub shop_bounds: Vec<ShopBounds>,
    /// `fixed_rent[j][k]` per location unit of type `j` in area `k`.
    pub fixed_rent: Vec<Vec<f64>>,
    #[serde(default = "default_bonus")]
    pub bonus_factors: [f64; 3],
}

fn default_bonus() -> [f64; 3] {
    BONUS_FACTORS
}

#[derive(Clone, Debug, PartialEq)]
pub struct MallInstance {
    pub file: MallInstanceFile,
    pub area_of: Vec<usize>,
    pub area_ranges: Vec<Range<usize>>,
    pub group_members: Vec<Vec<usize>>,
    pub groups_of: Vec<Vec<usize>>,
}

impl MallInstance {
    pub fn build(file: MallInstanceFile) -> Result<Self, MallError> {
        let n = file.locations;
        let s = file.shop_bounds.len();
        let a = file.area_bounds.len();
        let bad = |m: String| Err(MallError::Invalid(m));
        if n == 0 || s == 0 || a == 0 {
            return bad("empty dimensions".into());
        }
        let mut area_ranges = Vec::with_capacity(a);
        let mut next = 1;
        for (k, &[lo, hi]) in file.area_bounds.iter().enumerate() {
            if lo != next || hi < lo {
                return bad(format!("area {} bounds {lo}-{hi} do not continue the partition", k + 1));
            }
            area_ranges.push(lo - 1..hi);
            next = hi + 1;
        }
        if next != n + 1 {
            return bad(format!("areas cover {} of {n} locations", next - 1));
        }
        let mut area_of = vec![0; n];
        for (k, r) in area_ranges.iter().enumerate() {
            for i in r.clone() {
                area_of[i] = k;
            }
        }
        if file.membership.len() != s {
            return bad("membership rows differ from shop types".into());
        }
        let g = file.membership.first().map_or(0, |r| r.len());
        if file.membership.iter().any(|r| r.len() != g) {
            return bad("ragged membership matrix".into());
        }
        let group_members: Vec<Vec<usize>> = (0..g).map(|l| (0..s).filter(|&j| file.membership[j][l] != 0).collect()).collect();
        let groups_of: Vec<Vec<usize>> = (0..s).map(|j| (0..g).filter(|&l| file.membership[j][l] != 0).collect()).collect();
        if file.attractiveness.len() != a {
            return bad("attractiveness length differs from areas".into());
        }
        if file.fixed_rent.len() != s || file.fixed_rent.iter().any(|r| r.len() != a) {
            return bad("fixed rent must be types x areas".into());
        }
        for (j, b) in file.shop_bounds.iter().enumerate() {
            if !(b.min <= b.ideal && b.ideal <= b.max) {
                return bad(format!("type {} bounds not ordered", j + 1));
            }
        }
        let total_max: u32 = file.shop_bounds.iter().map(|b| b.max).sum();
        if (total_max as usize) < n {
            return bad(format!("maxima sum to {total_max} below {n} locations"));
        }
        Ok(MallInstance {
            file,
            area_of,
            area_ranges,
            group_members,
            groups_of,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, MallError> {
        Self::build(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("serialisable")
    }

    pub fn locations(&self) -> usize {
        self.file.locations
    }

    pub fn types(&self) -> usize {
        self.file.shop_bounds.len()
    }

    pub fn areas(&self) -> usize {
        self.area_ranges.len()
    }

    pub fn groups(&self) -> usize {
        self.group_members.len()
    }

    pub fn efficiency(&self, n: u32) -> f64 {
        match &self.file.efficiency {
            Some(t) if (n as usize) < t.len() => t[n as usize],
            _ => size_efficiency(n),
        }
    }

    pub fn check_layout(&self, layout: &[usize]) -> Result<(), MallError> {
        if layout.len() != self.locations() {
            return Err(MallError::Layout(format!("{} genes for {} locations", layout.len(), self.locations())));
        }
        if let Some(i) = layout.iter().position(|&j| j >= self.types()) {
            return Err(MallError::Layout(format!("location {} has unknown type {}", i + 1, layout[i] + 1)));
        }
        Ok(())
    }
}

/// Weighted mean unit factor of `n` units split into large, medium and small shops.
pub fn size_efficiency(n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let rest = match n % 3 {
        2 => 2.0 * MEDIUM_FACTOR,
        1 => SMALL_FACTOR,
        _ => 0.0,
    };
    ((n / 3) as f64 * 3.0 * LARGE_FACTOR + rest) / n as f64
}

pub fn count_efficiency(total: u32, ideal: u32) -> f64 {
    (10.0 - (total as f64 - ideal as f64).abs()).max(0.0)
}

/// Sales-dependent rent of one location unit.
pub fn unit_rent(size: f64, attractiveness: f64, group: f64, count: f64) -> f64 {
    size * attractiveness * group * count
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayoutStats {
    /// `counts[j][k]` units of type `j` in area `k`.
    pub counts: Vec<Vec<u32>>,
    pub totals: Vec<u32>,
    pub small: Vec<u32>,
    pub medium: Vec<u32>,
    pub large: Vec<u32>,
    /// `complete[k][l]` when every member of group `l` is present in area `k`.
    pub complete: Vec<Vec<bool>>,
}

impl LayoutStats {
    pub fn size_totals(&self) -> (u32, u32, u32) {
        (self.small.iter().sum(), self.medium.iter().sum(), self.large.iter().sum())
    }

    /// Number of the type's groups complete in an area, at most two.
    pub fn complete_groups(&self, inst: &MallInstance, j: usize, k: usize) -> usize {
        inst.groups_of[j].iter().filter(|&&l| self.complete[k][l]).count().min(2)
    }
}

pub fn counts_of(layout: &[usize], inst: &MallInstance) -> Vec<Vec<u32>> {
    let mut counts = vec![vec![0u32; inst.areas()]; inst.types()];
    for (i, &j) in layout.iter().enumerate() {
        counts[j][inst.area_of[i]] += 1;
    }
    counts
}

pub fn group_complete(counts: &[Vec<u32>], members: &[usize], k: usize) -> bool {
    !members.is_empty() && members.iter().all(|&j| counts[j][k] > 0)
}

pub fn layout_stats(layout: &[usize], inst: &MallInstance) -> LayoutStats {
    let counts = counts_of(layout, inst);
    let totals = counts.iter().map(|r| r.iter().sum()).collect();
    let per_type = |f: &dyn Fn(u32) -> u32| -> Vec<u32> { counts.iter().map(|r| r.iter().map(|&n| f(n)).sum()).collect() };
    let large = per_type(&|n| n / 3);
    let medium = per_type(&|n| (n % 3 == 2) as u32);
    let small = per_type(&|n| (n % 3 == 1) as u32);
    let complete = (0..inst.areas())
        .map(|k| inst.group_members.iter().map(|m| group_complete(&counts, m, k)).collect())
        .collect();
    LayoutStats {
        counts,
        totals,
        small,
        medium,
        large,
        complete,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MallEval {
    pub rent: f64,
    pub violation: u32,
    pub fitness: f64,
}

pub fn violation_of(stats: &LayoutStats, inst: &MallInstance) -> u32 {
    let mut v = 0;
    for (b, &t) in inst.file.shop_bounds.iter().zip(&stats.totals) {
        v += b.min.saturating_sub(t) + t.saturating_sub(b.max);
    }
    if let Some(caps) = inst.file.size_caps {
        let (s, m, l) = stats.size_totals();
        v += s.saturating_sub(caps.small) + m.saturating_sub(caps.medium) + l.saturating_sub(caps.large);
    }
    v
}

pub fn rent_of(stats: &LayoutStats, layout: &[usize], inst: &MallInstance) -> f64 {
    let f = &inst.file;
    layout
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let k = inst.area_of[i];
            let b = f.shop_bounds[j];
            unit_rent(
                inst.efficiency(stats.counts[j][k]),
                f.attractiveness[k],
                f.bonus_factors[stats.complete_groups(inst, j, k)],
                count_efficiency(stats.totals[j], b.ideal),
            ) + f.fixed_rent[j][k]
        })
        .sum()
}

/// Rent, constraint violation and `rent - w * violation`.
pub fn evaluate_layout(layout: &[usize], inst: &MallInstance, w: f64) -> MallEval {
    let stats = layout_stats(layout, inst);
    let rent = rent_of(&stats, layout, inst);
    let violation = violation_of(&stats, inst);
    MallEval {
        rent,
        violation,
        fitness: rent / 1000.0 - w * violation as f64,
    }
}

/// Engine evaluation: minimised objective is minus the rent in thousands.
pub fn mall_evaluation(layout: &[usize], inst: &MallInstance) -> Evaluation {
    let e = evaluate_layout(layout, inst, 0.0);
    Evaluation {
        objective: -e.rent / 1000.0,
        violation: e.violation as f64,
        bonus: 0.0,
        feasible: e.violation == 0,
        report: e.rent,
    }
}

/// Area-local rent of area `k`, without the count factor and constraints.
pub fn area_pseudo_fitness(layout: &[usize], k: usize, inst: &MallInstance) -> f64 {
    let f = &inst.file;
    let range = inst.area_ranges[k].clone();
    let mut counts = vec![0u32; inst.types()];
    for &j in &layout[range.clone()] {
        counts[j] += 1;
    }
    let complete: Vec<bool> = inst
        .group_members
        .iter()
        .map(|m| !m.is_empty() && m.iter().all(|&j| counts[j] > 0))
        .collect();
    layout[range]
        .iter()
        .map(|&j| {
            let groups = inst.groups_of[j].iter().filter(|&&l| complete[l]).count().min(2);
            f.attractiveness[k] * f.bonus_factors[groups] * inst.efficiency(counts[j]) + f.fixed_rent[j][k]
        })
        .sum()
}

/// Optimistic rent ceiling: every unit large, grouped, ideally counted, average area, top fixed rent.
pub fn upper_bound(inst: &MallInstance) -> f64 {
    inst.locations() as f64 * (unit_rent(LARGE_FACTOR, 15.0, inst.file.bonus_factors[1], 10.0) + 3000.0)
}

/// Layout file contents: 1-based types per location with the evaluated breakdown.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MallSolution {
    pub types: Vec<usize>,
    pub rent: f64,
    pub violation: u32,
    pub totals: Vec<u32>,
    pub sizes: [u32; 3],
}

impl MallSolution {
    pub fn new(layout: &[usize], inst: &MallInstance) -> Self {
        let stats = layout_stats(layout, inst);
        let (s, m, l) = stats.size_totals();
        MallSolution {
            types: layout.iter().map(|j| j + 1).collect(),
            rent: rent_of(&stats, layout, inst),
            violation: violation_of(&stats, inst),
            totals: stats.totals,
            sizes: [s, m, l],
        }
    }

    pub fn layout(&self) -> Vec<usize> {
        self.types.iter().map(|j| j.saturating_sub(1)).collect()
    }
}
