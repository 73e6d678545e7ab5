//! Crossover and mutation for value strings and permutations, plus adaptive-gene inheritance.

use std::ops::Range;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ga::Rng64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error("parents differ in length")]
    LengthMismatch,
    #[error("invalid cut points {0:?} for length {1}")]
    InvalidCuts(Vec<usize>, usize),
    #[error("probability {0} outside [{1}, {2}]")]
    Probability(f64, f64, f64),
    #[error("need {0} parents, got {1}")]
    ParentCount(&'static str, usize),
    #[error("segments do not partition the string: {0}")]
    Segments(String),
    #[error("empty domain at position {0}")]
    EmptyDomain(usize),
    #[error("parent has no adaptive genes")]
    MissingAdaptive,
}

pub fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &v in p {
        if v >= p.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

fn same_len<T>(a: &[T], b: &[T]) -> Result<(), OperatorError> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(OperatorError::LengthMismatch)
    }
}

/// `k` distinct cut positions in `1..len`, sorted.
pub fn random_cuts(len: usize, k: usize, rng: &mut Rng64) -> Result<Vec<usize>, OperatorError> {
    if k == 0 || k >= len {
        return Err(OperatorError::InvalidCuts(vec![k], len));
    }
    let mut cuts = rand::seq::index::sample(rng, len - 1, k).into_vec();
    for c in cuts.iter_mut() {
        *c += 1;
    }
    cuts.sort_unstable();
    Ok(cuts)
}

/// Children alternate parent segments at the given cuts. A cut `c` splits before position `c`.
pub fn kpoint_with_cuts<T: Copy>(p1: &[T], p2: &[T], cuts: &[usize]) -> Result<(Vec<T>, Vec<T>), OperatorError> {
    same_len(p1, p2)?;
    let n = p1.len();
    if cuts.windows(2).any(|w| w[0] >= w[1]) || cuts.iter().any(|&c| c == 0 || c >= n) {
        return Err(OperatorError::InvalidCuts(cuts.to_vec(), n));
    }
    let mut c1 = Vec::with_capacity(n);
    let mut c2 = Vec::with_capacity(n);
    let mut swap = false;
    let mut next = cuts.iter().peekable();
    for i in 0..n {
        if next.peek() == Some(&&i) {
            swap = !swap;
            next.next();
        }
        let (a, b) = if swap { (p2[i], p1[i]) } else { (p1[i], p2[i]) };
        c1.push(a);
        c2.push(b);
    }
    Ok((c1, c2))
}

pub fn kpoint_crossover<T: Copy>(p1: &[T], p2: &[T], k: usize, rng: &mut Rng64) -> Result<(Vec<T>, Vec<T>), OperatorError> {
    same_len(p1, p2)?;
    let cuts = random_cuts(p1.len(), k, rng)?;
    kpoint_with_cuts(p1, p2, &cuts)
}

/// Each gene from the first parent with probability `p`, otherwise from one of the others.
pub fn param_uniform_crossover<T: Copy>(parents: &[&[T]], p: f64, rng: &mut Rng64) -> Result<Vec<T>, OperatorError> {
    if !(2..=4).contains(&parents.len()) {
        return Err(OperatorError::ParentCount("2 to 4", parents.len()));
    }
    if !(0.5..=1.0).contains(&p) {
        return Err(OperatorError::Probability(p, 0.5, 1.0));
    }
    let first = parents[0];
    for other in &parents[1..] {
        same_len(first, other)?;
    }
    let rest = parents.len() - 1;
    Ok((0..first.len())
        .map(|i| {
            if rng.gen_bool(p) {
                first[i]
            } else {
                parents[1 + rng.gen_range(0..rest)][i]
            }
        })
        .collect())
}

/// Concatenate each source's genes over its segment. Segments must tile the string.
pub fn fixed_point_crossover<T: Copy>(parts: &[(&[T], Range<usize>)]) -> Result<Vec<T>, OperatorError> {
    let Some(len) = parts.first().map(|(s, _)| s.len()) else {
        return Err(OperatorError::Segments("no parts".into()));
    };
    let mut order: Vec<usize> = (0..parts.len()).collect();
    order.sort_by_key(|&i| parts[i].1.start);
    let mut child = Vec::with_capacity(len);
    let mut at = 0;
    for i in order {
        let (src, range) = &parts[i];
        if src.len() != len {
            return Err(OperatorError::LengthMismatch);
        }
        if range.start != at || range.end < range.start || range.end > len {
            return Err(OperatorError::Segments(format!("segment {range:?} at position {at}")));
        }
        child.extend_from_slice(&src[range.clone()]);
        at = range.end;
    }
    if at != len {
        return Err(OperatorError::Segments(format!("covered {at} of {len}")));
    }
    Ok(child)
}

/// Gene `i` comes from `sources[labels[i]]`. Generalises the fixed-point crossover to
/// non-contiguous groups such as the nurses of one grade.
pub fn label_crossover<T: Copy>(sources: &[&[T]], labels: &[usize]) -> Result<Vec<T>, OperatorError> {
    for s in sources {
        if s.len() != labels.len() {
            return Err(OperatorError::LengthMismatch);
        }
    }
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            sources
                .get(l)
                .map(|s| s[i])
                .ok_or_else(|| OperatorError::Segments(format!("label {l} has no source")))
        })
        .collect()
}

fn check_perms(p1: &[usize], p2: &[usize]) -> Result<(), OperatorError> {
    same_len(p1, p2)
}

/// Keep `keep[i]` positions of `base`; fill the rest left to right with the missing values in `order`'s order.
fn keep_and_fill(base: &[usize], keep: &[bool], order: &[usize]) -> Vec<usize> {
    let n = base.len();
    let mut used = vec![false; n];
    let mut child = vec![usize::MAX; n];
    for i in 0..n {
        if keep[i] {
            child[i] = base[i];
            used[base[i]] = true;
        }
    }
    let mut fill = order.iter().filter(|&&v| !used[v]);
    for slot in child.iter_mut() {
        if *slot == usize::MAX {
            *slot = *fill.next().expect("parents are permutations of the same values");
        }
    }
    child
}

fn check_segment(n: usize, cut1: usize, cut2: usize) -> Result<(), OperatorError> {
    if cut1 < cut2 && cut2 <= n {
        Ok(())
    } else {
        Err(OperatorError::InvalidCuts(vec![cut1, cut2], n))
    }
}

/// Order-based crossover: `c1` keeps `p1[cut1..cut2]` in place, the rest follows `p2`'s order.
pub fn order_based_crossover(
    p1: &[usize],
    p2: &[usize],
    cut1: usize,
    cut2: usize,
) -> Result<(Vec<usize>, Vec<usize>), OperatorError> {
    check_perms(p1, p2)?;
    check_segment(p1.len(), cut1, cut2)?;
    let keep: Vec<bool> = (0..p1.len()).map(|i| (cut1..cut2).contains(&i)).collect();
    Ok((keep_and_fill(p1, &keep, p2), keep_and_fill(p2, &keep, p1)))
}

/// C1: prefix of one parent, remainder in the other's order.
pub fn c1_crossover(p1: &[usize], p2: &[usize], cut: usize) -> Result<(Vec<usize>, Vec<usize>), OperatorError> {
    check_perms(p1, p2)?;
    if cut == 0 || cut >= p1.len() {
        return Err(OperatorError::InvalidCuts(vec![cut], p1.len()));
    }
    let keep: Vec<bool> = (0..p1.len()).map(|i| i < cut).collect();
    Ok((keep_and_fill(p1, &keep, p2), keep_and_fill(p2, &keep, p1)))
}

fn pmx_child(base: &[usize], donor: &[usize], cut1: usize, cut2: usize) -> Vec<usize> {
    let n = base.len();
    // position of each value inside the donor's section
    let mut in_section = vec![usize::MAX; n];
    for i in cut1..cut2 {
        in_section[donor[i]] = i;
    }
    (0..n)
        .map(|i| {
            if (cut1..cut2).contains(&i) {
                return donor[i];
            }
            let mut v = base[i];
            while in_section[v] != usize::MAX {
                v = base[in_section[v]];
            }
            v
        })
        .collect()
}

/// Partially mapped crossover over the section `[cut1, cut2)`.
pub fn pmx_crossover(p1: &[usize], p2: &[usize], cut1: usize, cut2: usize) -> Result<(Vec<usize>, Vec<usize>), OperatorError> {
    check_perms(p1, p2)?;
    check_segment(p1.len(), cut1, cut2)?;
    Ok((pmx_child(p1, p2, cut1, cut2), pmx_child(p2, p1, cut1, cut2)))
}

/// Uniform order crossover with an explicit template.
pub fn pux_with_template(p1: &[usize], p2: &[usize], template: &[bool]) -> Result<(Vec<usize>, Vec<usize>), OperatorError> {
    check_perms(p1, p2)?;
    if template.len() != p1.len() {
        return Err(OperatorError::LengthMismatch);
    }
    let inverse: Vec<bool> = template.iter().map(|&t| !t).collect();
    Ok((keep_and_fill(p1, template, p2), keep_and_fill(p2, &inverse, p1)))
}

/// Parameterised uniform order crossover: template ones drawn with probability `p`.
pub fn pux_crossover(p1: &[usize], p2: &[usize], p: f64, rng: &mut Rng64) -> Result<(Vec<usize>, Vec<usize>), OperatorError> {
    if !(0.5..=1.0).contains(&p) {
        return Err(OperatorError::Probability(p, 0.5, 1.0));
    }
    let template: Vec<bool> = (0..p1.len()).map(|_| rng.gen_bool(p)).collect();
    pux_with_template(p1, p2, &template)
}

/// Two distinct cuts giving a non-empty segment `[cut1, cut2)`.
pub fn random_segment(n: usize, rng: &mut Rng64) -> (usize, usize) {
    let a = rng.gen_range(0..=n);
    let mut b = rng.gen_range(0..n);
    if b >= a {
        b += 1;
    }
    (a.min(b), a.max(b))
}

/// Resample a gene with probability `rate` from its domain `0..domains[i]`.
pub fn single_gene_mutation(genes: &mut [usize], rate: f64, domains: &[usize], rng: &mut Rng64) -> Result<usize, OperatorError> {
    if domains.len() != genes.len() {
        return Err(OperatorError::LengthMismatch);
    }
    if let Some(i) = domains.iter().position(|&d| d == 0) {
        return Err(OperatorError::EmptyDomain(i));
    }
    if !(0.0..=1.0).contains(&rate) {
        return Err(OperatorError::Probability(rate, 0.0, 1.0));
    }
    let mut changed = 0;
    for (g, &d) in genes.iter_mut().zip(domains) {
        if rate > 0.0 && rng.gen_bool(rate) {
            *g = rng.gen_range(0..d);
            changed += 1;
        }
    }
    Ok(changed)
}

/// Each position selected at `rate` swaps with a uniformly drawn partner. Returns the swap count.
pub fn swap_mutation(perm: &mut [usize], rate: f64, rng: &mut Rng64) -> usize {
    let n = perm.len();
    if n < 2 || rate <= 0.0 {
        return 0;
    }
    let rate = rate.min(1.0);
    let mut swaps = 0;
    for i in 0..n {
        if rng.gen_bool(rate) {
            let j = rng.gen_range(0..n);
            perm.swap(i, j);
            swaps += 1;
        }
    }
    swaps
}

/// With probability `rate`, shuffle the segment between two random points.
pub fn scramble_mutation(perm: &mut [usize], rate: f64, rng: &mut Rng64) -> bool {
    let n = perm.len();
    if n < 2 || rate <= 0.0 || !rng.gen_bool(rate.min(1.0)) {
        return false;
    }
    let (a, b) = random_segment(n, rng);
    perm[a..b].shuffle(rng);
    true
}

pub fn random_permutation(n: usize, rng: &mut Rng64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Permutation crossover named by an adaptive tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossoverTag {
    C1,
    Pmx,
    Pux66,
}

impl CrossoverTag {
    pub const ALL: [CrossoverTag; 3] = [CrossoverTag::C1, CrossoverTag::Pmx, CrossoverTag::Pux66];

    pub fn apply(self, p1: &[usize], p2: &[usize], rng: &mut Rng64) -> Result<(Vec<usize>, Vec<usize>), OperatorError> {
        let n = p1.len();
        if n < 2 {
            return Ok((p1.to_vec(), p2.to_vec()));
        }
        match self {
            CrossoverTag::C1 => c1_crossover(p1, p2, rng.gen_range(1..n)),
            CrossoverTag::Pmx => {
                let (a, b) = random_segment(n, rng);
                pmx_crossover(p1, p2, a, b)
            }
            CrossoverTag::Pux66 => pux_crossover(p1, p2, 0.66, rng),
        }
    }
}

/// Extra genes carried by individuals of self-adjusting solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveGenes {
    pub decoder_weights: Vec<f64>,
    pub crossover_tag: CrossoverTag,
    pub mutation_rate: f64,
}

/// Initialisation ranges and which genes actually adapt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveRanges {
    pub weight_ranges: Vec<(f64, f64)>,
    /// When false the tag is fixed to `fixed_tag`.
    pub adaptive_tag: bool,
    pub fixed_tag: CrossoverTag,
    pub adaptive_mutation: bool,
    pub fixed_mutation: f64,
    pub mutation_range: (f64, f64),
}

impl AdaptiveRanges {
    pub fn weights_only(weight_ranges: Vec<(f64, f64)>, tag: CrossoverTag, mutation: f64) -> Self {
        AdaptiveRanges {
            weight_ranges,
            adaptive_tag: false,
            fixed_tag: tag,
            adaptive_mutation: false,
            fixed_mutation: mutation,
            mutation_range: (0.0, 0.05),
        }
    }

    pub fn sample(&self, rng: &mut Rng64) -> AdaptiveGenes {
        let decoder_weights = self
            .weight_ranges
            .iter()
            .map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..=hi) } else { lo })
            .collect();
        let crossover_tag = if self.adaptive_tag {
            *CrossoverTag::ALL.choose(rng).expect("non-empty")
        } else {
            self.fixed_tag
        };
        let mutation_rate = if self.adaptive_mutation {
            let (lo, hi) = self.mutation_range;
            rng.gen_range(lo..=hi)
        } else {
            self.fixed_mutation
        };
        AdaptiveGenes {
            decoder_weights,
            crossover_tag,
            mutation_rate,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InheritStrategy {
    TakeRandomParent,
    RankWeightedAverage,
    UniformInRange,
}

/// Child adaptive genes from ranked parents `(genes, rank)`; a larger rank is better.
pub fn inherit_adaptive(
    parents: &[(Option<&AdaptiveGenes>, f64)],
    strategy: InheritStrategy,
    rng: &mut Rng64,
) -> Result<AdaptiveGenes, OperatorError> {
    if parents.is_empty() {
        return Err(OperatorError::ParentCount("at least 1", 0));
    }
    let genes: Vec<(&AdaptiveGenes, f64)> = parents
        .iter()
        .map(|(g, r)| g.map(|g| (g, *r)).ok_or(OperatorError::MissingAdaptive))
        .collect::<Result<_, _>>()?;
    let total_rank: f64 = genes.iter().map(|(_, r)| r).sum();
    let weighted = |f: &dyn Fn(&AdaptiveGenes) -> f64| -> f64 {
        if total_rank > 0.0 {
            genes.iter().map(|(g, r)| r * f(g)).sum::<f64>() / total_rank
        } else {
            genes.iter().map(|(g, _)| f(g)).sum::<f64>() / genes.len() as f64
        }
    };
    let n_weights = genes[0].0.decoder_weights.len();
    let decoder_weights = match strategy {
        InheritStrategy::TakeRandomParent => genes[rng.gen_range(0..genes.len())].0.decoder_weights.clone(),
        InheritStrategy::RankWeightedAverage => (0..n_weights).map(|i| weighted(&|g| g.decoder_weights[i])).collect(),
        InheritStrategy::UniformInRange => (0..n_weights)
            .map(|i| {
                let lo = genes.iter().map(|(g, _)| g.decoder_weights[i]).fold(f64::INFINITY, f64::min);
                let hi = genes.iter().map(|(g, _)| g.decoder_weights[i]).fold(f64::NEG_INFINITY, f64::max);
                if hi > lo {
                    rng.gen_range(lo..=hi)
                } else {
                    lo
                }
            })
            .collect(),
    };
    let mut best = 0;
    for (i, (_, r)) in genes.iter().enumerate() {
        if *r > genes[best].1 {
            best = i;
        }
    }
    Ok(AdaptiveGenes {
        decoder_weights,
        crossover_tag: genes[best].0.crossover_tag,
        mutation_rate: weighted(&|g| g.mutation_rate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ga::seeded;

    fn zero_based(v: &[usize]) -> Vec<usize> {
        v.iter().map(|x| x - 1).collect()
    }

    fn one_based(v: &[usize]) -> Vec<usize> {
        v.iter().map(|x| x + 1).collect()
    }

    const P2: [usize; 9] = [3, 4, 7, 1, 6, 8, 9, 2, 5];

    #[test]
    fn kpoint_example() {
        let (a, b) = kpoint_with_cuts(&[1, 2, 3, 4], &[5, 6, 7, 8], &[1]).unwrap();
        assert_eq!(a, vec![1, 6, 7, 8]);
        assert_eq!(b, vec![5, 2, 3, 4]);
        let mut rng = seeded(0);
        assert!(kpoint_crossover(&[1, 2], &[3, 4], 2, &mut rng).is_err());
    }

    #[test]
    fn order_based_known_children() {
        let p1: Vec<usize> = (0..9).collect();
        let (c1, c2) = order_based_crossover(&p1, &zero_based(&P2), 2, 7).unwrap();
        assert_eq!(one_based(&c1), vec![1, 8, 3, 4, 5, 6, 7, 9, 2]);
        assert_eq!(one_based(&c2), vec![2, 3, 7, 1, 6, 8, 9, 4, 5]);
    }

    #[test]
    fn pmx_known_children() {
        let p1: Vec<usize> = (0..9).collect();
        let (c1, c2) = pmx_crossover(&p1, &zero_based(&P2), 2, 5).unwrap();
        assert_eq!(one_based(&c1), vec![4, 2, 7, 1, 6, 5, 3, 8, 9]);
        assert_eq!(one_based(&c2), vec![7, 1, 3, 4, 5, 8, 9, 2, 6]);
    }

    #[test]
    fn uniform_order_known_children() {
        let p1: Vec<usize> = (0..9).collect();
        let t: Vec<bool> = [0, 0, 1, 0, 1, 1, 1, 0, 1].iter().map(|&b| b == 1).collect();
        let (c1, c2) = pux_with_template(&p1, &zero_based(&P2), &t).unwrap();
        assert_eq!(one_based(&c1), vec![4, 1, 3, 8, 5, 6, 7, 2, 9]);
        assert_eq!(one_based(&c2), vec![3, 4, 5, 1, 6, 7, 8, 2, 9]);
    }

    #[test]
    fn c1_known_children() {
        let p1: Vec<usize> = (0..6).collect();
        let p2 = zero_based(&[3, 4, 2, 1, 6, 5]);
        let (c1, c2) = c1_crossover(&p1, &p2, 2).unwrap();
        assert_eq!(one_based(&c1), vec![1, 2, 3, 4, 6, 5]);
        assert_eq!(one_based(&c2), vec![3, 4, 1, 2, 5, 6]);
    }

    #[test]
    fn invalid_cuts_rejected() {
        let p: Vec<usize> = (0..5).collect();
        assert!(order_based_crossover(&p, &p, 3, 3).is_err());
        assert!(pmx_crossover(&p, &p, 2, 6).is_err());
        assert!(c1_crossover(&p, &p, 0).is_err());
        assert!(c1_crossover(&p, &p, 5).is_err());
    }

    #[test]
    fn swap_positions_example() {
        let mut p = vec![1, 2, 3, 4, 5];
        p.swap(1, 4);
        assert_eq!(p, vec![1, 5, 3, 4, 2]);
    }

    #[test]
    fn pux_of_one_clones_first_parent() {
        let mut rng = seeded(3);
        let p1 = random_permutation(20, &mut rng);
        let p2 = random_permutation(20, &mut rng);
        let (c1, _) = pux_crossover(&p1, &p2, 1.0, &mut rng).unwrap();
        assert_eq!(c1, p1);
        assert!(pux_crossover(&p1, &p2, 0.4, &mut rng).is_err());
    }

    #[test]
    fn param_uniform_bounds() {
        let mut rng = seeded(5);
        let a = vec![0usize; 10];
        let b = vec![1usize; 10];
        assert_eq!(param_uniform_crossover(&[&a, &b], 1.0, &mut rng).unwrap(), a);
        assert!(param_uniform_crossover(&[&a, &b], 0.3, &mut rng).is_err());
        assert!(param_uniform_crossover(&[&a], 0.8, &mut rng).is_err());
    }

    #[test]
    fn param_uniform_share_from_first_parent() {
        let mut rng = seeded(9);
        let parents: Vec<Vec<usize>> = (0..4).map(|k| vec![k; 1000]).collect();
        let refs: Vec<&[usize]> = parents.iter().map(|v| v.as_slice()).collect();
        for _ in 0..50 {
            let child = param_uniform_crossover(&refs, 0.8, &mut rng).unwrap();
            let share = child.iter().filter(|&&g| g == 0).count() as f64 / 1000.0;
            assert!((0.75..=0.85).contains(&share), "share {share}");
        }
    }

    #[test]
    fn fixed_point_assembly() {
        let a = vec![1, 1, 1, 1];
        let b = vec![2, 2, 2, 2];
        assert_eq!(fixed_point_crossover(&[(&a[..], 0..1), (&b[..], 1..4)]).unwrap(), vec![1, 2, 2, 2]);
        assert_eq!(fixed_point_crossover(&[(&a[..], 0..4)]).unwrap(), a);
        assert!(fixed_point_crossover(&[(&a[..], 0..2), (&b[..], 1..4)]).is_err());
        assert!(fixed_point_crossover(&[(&a[..], 0..1), (&b[..], 2..4)]).is_err());
    }

    #[test]
    fn gene_mutation_rates() {
        let mut rng = seeded(1);
        let mut g = vec![0usize; 25];
        assert_eq!(single_gene_mutation(&mut g, 0.0, &[5; 25], &mut rng).unwrap(), 0);
        single_gene_mutation(&mut g, 1.0, &[1; 25], &mut rng).unwrap();
        assert!(g.iter().all(|&x| x == 0));
        assert!(single_gene_mutation(&mut g, 0.5, &[0; 25], &mut rng).is_err());
        let trials = 100_000;
        let mut total = 0;
        for _ in 0..trials {
            total += single_gene_mutation(&mut g, 0.015, &[4; 25], &mut rng).unwrap();
        }
        let mean = total as f64 / trials as f64;
        assert!((mean - 0.375).abs() < 0.0375, "mean {mean}");
    }

    #[test]
    fn inheritance_rules() {
        let mut rng = seeded(2);
        let a = AdaptiveGenes {
            decoder_weights: vec![10.0],
            crossover_tag: CrossoverTag::Pmx,
            mutation_rate: 0.01,
        };
        let b = AdaptiveGenes {
            decoder_weights: vec![20.0],
            crossover_tag: CrossoverTag::C1,
            mutation_rate: 0.03,
        };
        let avg = inherit_adaptive(&[(Some(&a), 5.0), (Some(&b), 5.0)], InheritStrategy::RankWeightedAverage, &mut rng).unwrap();
        assert_eq!(avg.decoder_weights, vec![15.0]);
        let skew = inherit_adaptive(&[(Some(&a), 100.0), (Some(&b), 50.0)], InheritStrategy::RankWeightedAverage, &mut rng).unwrap();
        assert!((skew.decoder_weights[0] - (100.0 * 10.0 + 50.0 * 20.0) / 150.0).abs() < 1e-12);
        assert_eq!(skew.crossover_tag, CrossoverTag::Pmx);
        let flipped = inherit_adaptive(&[(Some(&a), 1.0), (Some(&b), 2.0)], InheritStrategy::UniformInRange, &mut rng).unwrap();
        assert!((10.0..=20.0).contains(&flipped.decoder_weights[0]));
        assert_eq!(flipped.crossover_tag, CrossoverTag::C1);
        assert_eq!(
            inherit_adaptive(&[(None, 1.0)], InheritStrategy::TakeRandomParent, &mut rng).unwrap_err(),
            OperatorError::MissingAdaptive
        );
    }

    #[test]
    fn weights_only_mode_fixes_tag() {
        let mut rng = seeded(4);
        let ranges = AdaptiveRanges::weights_only(vec![(0.0, 10000.0); 6], CrossoverTag::Pux66, 0.015);
        for _ in 0..100 {
            let g = ranges.sample(&mut rng);
            assert_eq!(g.crossover_tag, CrossoverTag::Pux66);
            assert_eq!(g.mutation_rate, 0.015);
            assert!(g.decoder_weights.iter().all(|w| (0.0..=10000.0).contains(w)));
        }
    }
}
