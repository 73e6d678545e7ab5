//! Seeded mall instance generators for the standard data sets and micro instances.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{
    evaluate_layout, MallError, MallInstance, MallInstanceFile, ShopBounds, SizeCaps, BONUS_FACTORS,
};
use crate::ga::{seeded, Rng64};

pub const TIGHT_CAPS: SizeCaps = SizeCaps {
    small: 6,
    medium: 17,
    large: 22,
};
const MAX_PER_TYPE: u32 = 10;
const RETRIES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountTightness {
    Loose,
    Average,
    Tight,
}

impl CountTightness {
    /// Range of the summed minima as a share of the locations.
    fn share(self) -> (f64, f64) {
        match self {
            CountTightness::Loose => (0.0, 0.0),
            CountTightness::Average => (0.60, 0.80),
            CountTightness::Tight => (0.95, 0.98),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MallGenSpec {
    pub locations: usize,
    pub areas: usize,
    pub types: usize,
    pub groups: usize,
    pub tight_size: bool,
    pub count: CountTightness,
}

impl MallGenSpec {
    /// Dimensions of data sets 3 to 7.
    pub fn set(id: u32) -> Result<Self, MallError> {
        let base = MallGenSpec {
            locations: 100,
            areas: 5,
            types: 20,
            groups: 5,
            tight_size: false,
            count: CountTightness::Average,
        };
        Ok(match id {
            3 => MallGenSpec {
                types: 50,
                groups: 8,
                count: CountTightness::Loose,
                ..base
            },
            4 => base,
            5 => MallGenSpec {
                count: CountTightness::Tight,
                ..base
            },
            6 => MallGenSpec {
                tight_size: true,
                ..base
            },
            7 => MallGenSpec {
                tight_size: true,
                count: CountTightness::Tight,
                ..base
            },
            _ => return Err(MallError::Generation(format!("data set {id} is not one of 3..=7"))),
        })
    }
}

/// Area sizes between 5 and 30 that sum to the location count.
fn area_sizes(locations: usize, areas: usize, rng: &mut Rng64) -> Result<Vec<usize>, MallError> {
    let (lo, hi) = (5, 30);
    if locations < lo * areas || locations > hi * areas {
        return Err(MallError::Generation(format!("{locations} locations cannot form {areas} areas of 5 to 30")));
    }
    let mut sizes = vec![lo; areas];
    for _ in 0..locations - lo * areas {
        let open: Vec<usize> = (0..areas).filter(|&k| sizes[k] < hi).collect();
        sizes[*open.choose(rng).expect("capacity checked")] += 1;
    }
    Ok(sizes)
}

fn bounds_of(sizes: &[usize]) -> Vec<[usize; 2]> {
    let mut start = 1;
    sizes
        .iter()
        .map(|&s| {
            let b = [start, start + s - 1];
            start += s;
            b
        })
        .collect()
}

/// Membership matrix: each type in 0, 1 or 2 groups (mostly 1), group sizes within `[min, max]`.
fn memberships(types: usize, groups: usize, min: usize, max: usize, rng: &mut Rng64) -> Result<Vec<Vec<u8>>, MallError> {
    if groups == 0 {
        return Ok(vec![Vec::new(); types]);
    }
    for _ in 0..RETRIES {
        let mut m = vec![vec![0u8; groups]; types];
        for row in m.iter_mut() {
            let n = [(0usize, 0.15), (1, 0.7), (2, 0.15)]
                .choose_weighted(rng, |c| c.1)
                .expect("weights")
                .0;
            let mut ls: Vec<usize> = (0..groups).collect();
            ls.shuffle(rng);
            for &l in ls.iter().take(n.min(groups)) {
                row[l] = 1;
            }
        }
        let size = |m: &Vec<Vec<u8>>, l: usize| m.iter().filter(|r| r[l] == 1).count();
        // top up small groups from types with room for another group
        for l in 0..groups {
            let mut spare: Vec<usize> = (0..types)
                .filter(|&j| m[j][l] == 0 && m[j].iter().filter(|&&x| x == 1).count() < 2)
                .collect();
            spare.shuffle(rng);
            while size(&m, l) < min {
                match spare.pop() {
                    Some(j) => m[j][l] = 1,
                    None => break,
                }
            }
        }
        if (0..groups).all(|l| (min..=max).contains(&size(&m, l))) {
            return Ok(m);
        }
    }
    Err(MallError::Generation("no membership matrix within group size limits".into()))
}

/// Per-type bounds with minima summing to `min_total` and maxima summing to at least the locations.
///
/// Minima are spread evenly with small random transfers. With minima set, each maximum
/// sits up to six above its minimum; without, maxima are uniform up to the cap.
fn shop_bounds(types: usize, locations: usize, min_total: u32, rng: &mut Rng64) -> Result<Vec<ShopBounds>, MallError> {
    if types as u32 * MAX_PER_TYPE < locations as u32 || min_total > types as u32 * MAX_PER_TYPE {
        return Err(MallError::Generation(format!("{types} types cannot fill {locations} locations")));
    }
    let base = min_total / types as u32;
    let mut min = vec![base; types];
    let mut order: Vec<usize> = (0..types).collect();
    order.shuffle(rng);
    for &j in order.iter().take((min_total - base * types as u32) as usize) {
        min[j] += 1;
    }
    if min_total > 0 {
        for _ in 0..types {
            let (from, to) = (rng.gen_range(0..types), rng.gen_range(0..types));
            if from != to && min[from] + 2 > base && min[from] > 0 && min[to] < base + 2 && min[to] < MAX_PER_TYPE {
                min[from] -= 1;
                min[to] += 1;
            }
        }
    }
    let mut max: Vec<u32> = (0..types)
        .map(|j| {
            if min_total > 0 {
                (min[j] + rng.gen_range(0..=6)).min(MAX_PER_TYPE)
            } else {
                rng.gen_range(1..=MAX_PER_TYPE)
            }
        })
        .collect();
    while (max.iter().sum::<u32>() as usize) < locations {
        let open: Vec<usize> = (0..types).filter(|&j| max[j] < MAX_PER_TYPE).collect();
        max[*open.choose(rng).expect("capacity checked")] += 1;
    }
    Ok((0..types)
        .map(|j| ShopBounds {
            min: min[j],
            ideal: rng.gen_range(min[j]..=max[j]),
            max: max[j],
        })
        .collect())
}

/// Area attractiveness and fixed rents, both rising with the area index.
fn area_values(areas: usize, types: usize, rng: &mut Rng64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let tilt = |k: usize| if areas > 1 { k as f64 / (areas - 1) as f64 } else { 0.5 };
    let attractiveness = (0..areas)
        .map(|k| {
            let lo = 5 + (8.0 * tilt(k)).round() as u32;
            rng.gen_range(lo..=lo + 12) as f64
        })
        .collect();
    let fixed_rent = (0..types)
        .map(|_| {
            (0..areas)
                .map(|k| {
                    let lo = 1000 + (1000.0 * tilt(k)).round() as u32;
                    rng.gen_range(lo..=lo + 1000) as f64
                })
                .collect()
        })
        .collect();
    (attractiveness, fixed_rent)
}

fn min_total(spec: &MallGenSpec, rng: &mut Rng64) -> u32 {
    let (lo, hi) = spec.count.share();
    let n = spec.locations as f64;
    let (lo, hi) = ((lo * n).ceil() as u32, (hi * n).floor() as u32);
    if hi <= lo {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

pub fn generate_mall_instance(spec: &MallGenSpec, seed: u64) -> Result<MallInstanceFile, MallError> {
    let mut rng = seeded(seed);
    let sizes = area_sizes(spec.locations, spec.areas, &mut rng)?;
    let membership = memberships(spec.types, spec.groups, 3, 10, &mut rng)?;
    let total = min_total(spec, &mut rng);
    let shop_bounds = shop_bounds(spec.types, spec.locations, total, &mut rng)?;
    let (attractiveness, fixed_rent) = area_values(spec.areas, spec.types, &mut rng);
    let file = MallInstanceFile {
        name: None,
        locations: spec.locations,
        area_bounds: bounds_of(&sizes),
        membership,
        size_caps: spec.tight_size.then_some(TIGHT_CAPS),
        efficiency: None,
        attractiveness,
        shop_bounds,
        fixed_rent,
        bonus_factors: BONUS_FACTORS,
    };
    MallInstance::build(file.clone())?;
    Ok(file)
}

/// Files for sets 4 to 7 sharing areas, groups, ideal counts, attractiveness and fixed rents.
///
/// Set 5 minima dominate set 4 minima and sets 6 and 7 add the size caps, so any
/// layout feasible for set 7 is feasible for 5 and 6, and those for 4.
pub fn generate_linked(seed: u64) -> Result<[MallInstanceFile; 4], MallError> {
    let tight = MallGenSpec::set(5)?;
    let mut rng = seeded(seed);
    let sizes = area_sizes(tight.locations, tight.areas, &mut rng)?;
    let membership = memberships(tight.types, tight.groups, 3, 10, &mut rng)?;
    let total = min_total(&tight, &mut rng);
    let tight_bounds = shop_bounds(tight.types, tight.locations, total, &mut rng)?;
    let (attractiveness, fixed_rent) = area_values(tight.areas, tight.types, &mut rng);
    let average = min_total(&MallGenSpec::set(4)?, &mut rng);
    // scale minima down to the average share without moving ideals or maxima
    let mut loose_min: Vec<u32> = tight_bounds.iter().map(|b| b.min).collect();
    while loose_min.iter().sum::<u32>() > average {
        let open: Vec<usize> = (0..loose_min.len()).filter(|&j| loose_min[j] > 0).collect();
        loose_min[*open.choose(&mut rng).expect("positive sum")] -= 1;
    }
    let average_bounds: Vec<ShopBounds> = tight_bounds
        .iter()
        .zip(&loose_min)
        .map(|(b, &m)| ShopBounds { min: m, ..*b })
        .collect();
    let make = |bounds: &Vec<ShopBounds>, caps: Option<SizeCaps>, set: u32| MallInstanceFile {
        name: Some(format!("linked-{seed}-set{set}")),
        locations: tight.locations,
        area_bounds: bounds_of(&sizes),
        membership: membership.clone(),
        size_caps: caps,
        efficiency: None,
        attractiveness: attractiveness.clone(),
        shop_bounds: bounds.clone(),
        fixed_rent: fixed_rent.clone(),
        bonus_factors: BONUS_FACTORS,
    };
    let files = [
        make(&average_bounds, None, 4),
        make(&tight_bounds, None, 5),
        make(&average_bounds, Some(TIGHT_CAPS), 6),
        make(&tight_bounds, Some(TIGHT_CAPS), 7),
    ];
    for f in &files {
        MallInstance::build(f.clone())?;
    }
    Ok(files)
}

/// Eight locations, three types and two areas, with at least one feasible layout.
pub fn generate_micro_mall(seed: u64) -> MallInstanceFile {
    let mut rng = seeded(seed);
    loop {
        let first = rng.gen_range(3..=5);
        let membership = (0..3)
            .map(|_| vec![rng.gen_bool(0.7) as u8])
            .collect::<Vec<_>>();
        let mut bounds = Vec::new();
        for _ in 0..3 {
            let max = rng.gen_range(2..=6);
            let min = rng.gen_range(0..=max.min(3));
            bounds.push(ShopBounds {
                min,
                ideal: rng.gen_range(min..=max),
                max,
            });
        }
        let (attractiveness, fixed_rent) = area_values(2, 3, &mut rng);
        let file = MallInstanceFile {
            name: Some(format!("micro-mall-{seed}")),
            locations: 8,
            area_bounds: vec![[1, first], [first + 1, 8]],
            membership,
            size_caps: rng.gen_bool(0.5).then(|| SizeCaps {
                small: rng.gen_range(1..=3),
                medium: rng.gen_range(1..=3),
                large: rng.gen_range(1..=2),
            }),
            efficiency: None,
            attractiveness,
            shop_bounds: bounds,
            fixed_rent,
            bonus_factors: BONUS_FACTORS,
        };
        let Ok(inst) = MallInstance::build(file.clone()) else {
            continue;
        };
        if enumerate_layouts(&inst, |l| evaluate_layout(l, &inst, 0.0).violation == 0) {
            return file;
        }
    }
}

/// True when some layout satisfies `pred`; stops at the first one.
fn enumerate_layouts(inst: &MallInstance, mut pred: impl FnMut(&[usize]) -> bool) -> bool {
    let (n, s) = (inst.locations(), inst.types());
    let mut layout = vec![0; n];
    loop {
        if pred(&layout) {
            return true;
        }
        let mut p = 0;
        loop {
            if p == n {
                return false;
            }
            layout[p] += 1;
            if layout[p] < s {
                break;
            }
            layout[p] = 0;
            p += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_dimensions() {
        let s6 = MallGenSpec::set(6).unwrap();
        assert_eq!((s6.locations, s6.areas, s6.types, s6.groups), (100, 5, 20, 5));
        assert!(s6.tight_size);
        assert_eq!(s6.count, CountTightness::Average);
        let s3 = MallGenSpec::set(3).unwrap();
        assert_eq!(s3.types, 50);
        assert_eq!(s3.count, CountTightness::Loose);
        assert!(!s3.tight_size);
        assert!(MallGenSpec::set(2).is_err());
    }

    #[test]
    fn generated_instances_validate() {
        for set in 3..=7 {
            let spec = MallGenSpec::set(set).unwrap();
            for seed in 0..20 {
                let f = generate_mall_instance(&spec, seed).unwrap();
                let inst = MallInstance::build(f.clone()).unwrap();
                let sizes: Vec<usize> = inst.area_ranges.iter().map(|r| r.len()).collect();
                assert!(sizes.iter().all(|&s| (5..=30).contains(&s)));
                assert!(inst.group_members.iter().all(|m| (3..=10).contains(&m.len())));
                assert!(inst.groups_of.iter().all(|g| g.len() <= 2));
                let mins: u32 = f.shop_bounds.iter().map(|b| b.min).sum();
                let (lo, hi) = spec.count.share();
                assert!(mins as f64 >= (lo * 100.0).ceil() - 1e-9 && mins as f64 <= hi * 100.0 + 1e-9, "{mins}");
                assert!(f.shop_bounds.iter().all(|b| b.max <= 10));
                assert!(f.attractiveness.iter().all(|r| (5.0..=25.0).contains(r)));
                assert!(f.fixed_rent.iter().flatten().all(|r| (1000.0..=3000.0).contains(r)));
            }
        }
    }

    #[test]
    fn linked_files_nest() {
        let [s4, s5, s6, s7] = generate_linked(3).unwrap();
        assert_eq!(s4.membership, s7.membership);
        assert_eq!(s4.fixed_rent, s6.fixed_rent);
        for j in 0..20 {
            assert!(s4.shop_bounds[j].min <= s5.shop_bounds[j].min);
            assert_eq!(s4.shop_bounds[j].ideal, s7.shop_bounds[j].ideal);
            assert_eq!(s5.shop_bounds[j], s7.shop_bounds[j]);
        }
        assert!(s6.size_caps.is_some() && s4.size_caps.is_none());
    }

    #[test]
    fn generation_is_seeded() {
        let spec = MallGenSpec::set(4).unwrap();
        assert_eq!(generate_mall_instance(&spec, 1).unwrap(), generate_mall_instance(&spec, 1).unwrap());
        assert_ne!(generate_mall_instance(&spec, 1).unwrap(), generate_mall_instance(&spec, 2).unwrap());
    }

    #[test]
    fn micro_instances_have_feasible_layouts() {
        for seed in 0..10 {
            let inst = MallInstance::build(generate_micro_mall(seed)).unwrap();
            assert_eq!((inst.locations(), inst.types(), inst.areas()), (8, 3, 2));
        }
    }
}
