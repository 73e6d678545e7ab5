//! Nurse rostering data: shift patterns, nurse specifications and the built instance.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::cost::build_pij;

pub const DAYS: usize = 7;
pub const SHIFTS: usize = 14;
pub const GRADES: usize = 3;

/// Required nurses per shift; column `s` counts nurses of grade `s + 1` or better.
pub type Demand = [[u32; GRADES]; SHIFTS];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NurseError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("nurse works nothing")]
    EmptyContract,
    #[error("assignment of nurse {0} outside its feasible set")]
    Assignment(usize),
    #[error("incompatible patterns: {0}")]
    Incompatible(String),
    #[error("json: {0}")]
    Json(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternKind {
    Day,
    Night,
    Combined,
}

/// Fourteen working flags: bits 0..7 are day shifts Sunday to Saturday, 7..14 nights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ShiftPattern(pub u16);

impl ShiftPattern {
    pub fn from_shifts(shifts: &[usize]) -> Self {
        ShiftPattern(shifts.iter().fold(0u16, |acc, &k| acc | (1 << k)))
    }

    pub fn works(self, shift: usize) -> bool {
        self.0 >> shift & 1 == 1
    }

    pub fn days(self) -> u8 {
        (self.0 & 0x7f) as u8
    }

    pub fn nights(self) -> u8 {
        (self.0 >> 7 & 0x7f) as u8
    }

    pub fn day_count(self) -> u32 {
        self.days().count_ones()
    }

    pub fn night_count(self) -> u32 {
        self.nights().count_ones()
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    /// Calendar days with any shift worked.
    pub fn calendar(self) -> u8 {
        self.days() | self.nights()
    }

    pub fn kind(self) -> PatternKind {
        match (self.days() != 0, self.nights() != 0) {
            (true, true) => PatternKind::Combined,
            (false, true) => PatternKind::Night,
            _ => PatternKind::Day,
        }
    }

    pub fn shifts(self) -> impl Iterator<Item = usize> {
        (0..SHIFTS).filter(move |&k| self.works(k))
    }
}

impl fmt::Display for ShiftPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..SHIFTS {
            if k == DAYS {
                f.write_str("|")?;
            }
            f.write_str(if self.works(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for ShiftPattern {
    type Err = NurseError;

    /// Accepts `"1111100|0000000"`; separators `|` and spaces are ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits: Vec<char> = s.chars().filter(|c| !matches!(c, '|' | ' ')).collect();
        if bits.len() != SHIFTS || bits.iter().any(|c| !matches!(c, '0' | '1')) {
            return Err(NurseError::Invalid(format!("bad pattern {s:?}")));
        }
        Ok(ShiftPattern(
            bits.iter().enumerate().fold(0, |acc, (k, &c)| if c == '1' { acc | 1 << k } else { acc }),
        ))
    }
}

impl Serialize for ShiftPattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ShiftPattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contract {
    pub days: u8,
    pub nights: u8,
    /// Total shifts for nurses who may mix days and nights in one week.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combined: Option<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreferenceClass {
    DaysOnly,
    NightsOnly,
    DaysImportant,
    NightsImportant,
    DaysPreferred,
    NightsPreferred,
    #[default]
    Neutral,
}

/// A request not to work `shift`, with urgency level 1..=5.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub shift: u8,
    pub level: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct History {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_week: Option<ShiftPattern>,
    #[serde(default)]
    pub nights_last_week: bool,
    #[serde(default)]
    pub nights_week_before: bool,
    #[serde(default)]
    pub weekend_last_week: bool,
    /// Cost of the pattern worked last week, carried onto this week's non-zero costs.
    #[serde(default)]
    pub last_week_cost: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NurseRole {
    #[default]
    Regular,
    /// Absorbs over-cover after demand smoothing.
    Dummy,
    /// Agency nurse covering a shortage.
    Bank,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NurseSpec {
    pub id: u32,
    pub grade: u8,
    pub contract: Contract,
    #[serde(default)]
    pub preference: PreferenceClass,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub requests: Vec<Request>,
    #[serde(default)]
    pub history: History,
    #[serde(default, skip_serializing_if = "is_default")]
    pub head: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub team: Option<u32>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub special: bool,
    #[serde(default, skip_serializing_if = "is_default")]
    pub role: NurseRole,
    /// Explicit feasible patterns replacing the enumeration from the contract.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patterns: Option<Vec<ShiftPattern>>,
}

impl NurseSpec {
    pub fn regular(id: u32, grade: u8, days: u8, nights: u8) -> Self {
        NurseSpec {
            id,
            grade,
            contract: Contract {
                days,
                nights,
                combined: None,
            },
            preference: PreferenceClass::Neutral,
            requests: Vec::new(),
            history: History::default(),
            head: false,
            team: None,
            special: false,
            role: NurseRole::Regular,
            patterns: None,
        }
    }
}

fn one() -> u32 {
    1
}

fn is_one(v: &u32) -> bool {
    *v == 1
}

/// Serialized form of a nurse instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NurseInstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub nurses: Vec<NurseSpec>,
    pub demand: Vec<[u32; GRADES]>,
    /// Per-nurse costs aligned with each nurse's feasible pattern list; overrides the builder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pij: Option<Vec<Vec<u32>>>,
    /// Scale applied to the base pattern cost minus one (20 for the high-cost variant).
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub base_cost_multiplier: u32,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// All week patterns working `count` shifts of one kind.
pub fn patterns_of_kind(kind: PatternKind, count: usize) -> Vec<ShiftPattern> {
    let offset = if kind == PatternKind::Night { DAYS } else { 0 };
    combinations(DAYS, count)
        .into_iter()
        .map(|c| ShiftPattern::from_shifts(&c.iter().map(|d| d + offset).collect::<Vec<_>>()))
        .collect()
}

/// Day patterns, then night patterns, then mixed patterns for a combined contract.
///
/// Mixed patterns never put a day and a night shift on the same calendar day.
pub fn enumerate_patterns(contract: &Contract) -> Result<Vec<ShiftPattern>, NurseError> {
    let d = contract.days as usize;
    let n = contract.nights as usize;
    if d > DAYS || n > DAYS {
        return Err(NurseError::Invalid(format!("contract {contract:?} exceeds a week")));
    }
    if d == 0 && n == 0 && contract.combined.is_none() {
        return Err(NurseError::EmptyContract);
    }
    let mut out = Vec::new();
    if d > 0 {
        out.extend(patterns_of_kind(PatternKind::Day, d));
    }
    if n > 0 {
        out.extend(patterns_of_kind(PatternKind::Night, n));
    }
    if let Some(b) = contract.combined {
        let b = b as usize;
        for days in 1..b {
            let nights = b - days;
            if days > d || nights > n {
                continue;
            }
            for dp in patterns_of_kind(PatternKind::Day, days) {
                for np in patterns_of_kind(PatternKind::Night, nights) {
                    if dp.days() & np.nights() == 0 {
                        out.push(ShiftPattern(dp.0 | np.0));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Feasible patterns of a nurse after preference filtering.
pub fn feasible_patterns(nurse: &NurseSpec) -> Result<Vec<ShiftPattern>, NurseError> {
    if let Some(p) = &nurse.patterns {
        return Ok(p.clone());
    }
    let all = enumerate_patterns(&nurse.contract)?;
    Ok(all
        .into_iter()
        .filter(|p| match nurse.preference {
            PreferenceClass::DaysOnly => p.nights() == 0,
            PreferenceClass::NightsOnly => p.days() == 0,
            _ => true,
        })
        .collect())
}

/// A validated instance with feasible sets and costs materialised.
#[derive(Clone, Debug, PartialEq)]
pub struct NurseInstance {
    pub file: NurseInstanceFile,
    pub demand: Demand,
    /// Global pattern table.
    pub patterns: Vec<ShiftPattern>,
    /// Per nurse, indices into `patterns`.
    pub options: Vec<Vec<usize>>,
    /// Per nurse, cost of each option.
    pub costs: Vec<Vec<u32>>,
    pub grades: Vec<u8>,
    lookup: Vec<HashMap<usize, usize>>,
}

impl NurseInstance {
    pub fn build(file: NurseInstanceFile) -> Result<Self, NurseError> {
        if file.nurses.is_empty() {
            return Err(NurseError::Invalid("no nurses".into()));
        }
        if file.demand.len() != SHIFTS {
            return Err(NurseError::Invalid(format!("demand has {} rows, expected {SHIFTS}", file.demand.len())));
        }
        let mut demand = [[0u32; GRADES]; SHIFTS];
        for (k, row) in file.demand.iter().enumerate() {
            if row.windows(2).any(|w| w[0] > w[1]) {
                return Err(NurseError::Invalid(format!("demand row {k} decreases across grades")));
            }
            demand[k] = *row;
        }
        let mut table: HashMap<ShiftPattern, usize> = HashMap::new();
        let mut patterns = Vec::new();
        let mut options = Vec::new();
        let mut costs = Vec::new();
        for (i, nurse) in file.nurses.iter().enumerate() {
            if !(1..=3).contains(&nurse.grade) {
                return Err(NurseError::Invalid(format!("nurse {} has grade {}", nurse.id, nurse.grade)));
            }
            for r in &nurse.requests {
                if !(1..=5).contains(&r.level) || r.shift as usize >= SHIFTS {
                    return Err(NurseError::Invalid(format!("nurse {} has request {r:?}", nurse.id)));
                }
            }
            let own = feasible_patterns(nurse)?;
            if own.is_empty() {
                return Err(NurseError::Invalid(format!("nurse {} has no feasible pattern", nurse.id)));
            }
            let row = match &file.pij {
                Some(pij) => {
                    let row = pij
                        .get(i)
                        .ok_or_else(|| NurseError::Invalid(format!("pij has no row for nurse {i}")))?;
                    if row.len() != own.len() {
                        return Err(NurseError::Invalid(format!(
                            "pij row {i} has {} entries for {} patterns",
                            row.len(),
                            own.len()
                        )));
                    }
                    if row.iter().any(|&c| c > 100) {
                        return Err(NurseError::Invalid(format!("pij row {i} exceeds 100")));
                    }
                    row.clone()
                }
                None => build_pij(nurse, &own, file.base_cost_multiplier),
            };
            let idx: Vec<usize> = own
                .iter()
                .map(|p| {
                    *table.entry(*p).or_insert_with(|| {
                        patterns.push(*p);
                        patterns.len() - 1
                    })
                })
                .collect();
            options.push(idx);
            costs.push(row);
        }
        let lookup = options
            .iter()
            .map(|o| o.iter().enumerate().map(|(j, &g)| (g, j)).collect())
            .collect();
        let grades = file.nurses.iter().map(|n| n.grade).collect();
        Ok(NurseInstance {
            file,
            demand,
            patterns,
            options,
            costs,
            grades,
            lookup,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, NurseError> {
        let file: NurseInstanceFile = serde_json::from_str(text).map_err(|e| NurseError::Json(e.to_string()))?;
        Self::build(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("instance serializes")
    }

    pub fn len(&self) -> usize {
        self.options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.options.is_empty()
    }

    pub fn nurse(&self, i: usize) -> &NurseSpec {
        &self.file.nurses[i]
    }

    /// Pattern of option `j` of nurse `i`.
    pub fn pattern(&self, i: usize, j: usize) -> ShiftPattern {
        self.patterns[self.options[i][j]]
    }

    /// Option index of a global pattern for nurse `i`, if feasible for that nurse.
    pub fn option_of(&self, i: usize, pattern: usize) -> Option<usize> {
        self.lookup[i].get(&pattern).copied()
    }

    pub fn option_of_pattern(&self, i: usize, p: ShiftPattern) -> Option<usize> {
        self.options[i].iter().position(|&g| self.patterns[g] == p)
    }

    /// Domain sizes of the direct genotype.
    pub fn domains(&self) -> Vec<usize> {
        self.options.iter().map(|o| o.len()).collect()
    }

    pub fn check_roster(&self, roster: &[usize]) -> Result<(), NurseError> {
        if roster.len() != self.len() {
            return Err(NurseError::Invalid(format!("roster has {} genes for {} nurses", roster.len(), self.len())));
        }
        for (i, &j) in roster.iter().enumerate() {
            if j >= self.options[i].len() {
                return Err(NurseError::Assignment(i));
            }
        }
        Ok(())
    }
}
