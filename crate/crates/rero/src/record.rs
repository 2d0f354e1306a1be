//! Finite record universes and datasets.
//!
//! A record is a dense index into its universe; structured views (bits,
//! labels, integer coordinates) are derived on demand. Dense indexing keeps
//! the exact evaluators array-based.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest universe we are willing to construct.
const MAX_UNIVERSE_SIZE: u128 = 1 << 31;

/// A record's dense index within its universe, in `[0, size)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RecordId(pub u32);

impl RecordId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for RecordId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Shape of the record space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UniverseKind {
    /// Records are length-`k` bit vectors.
    Bitstring { k: u32 },
    /// Records are labels from a fixed list of distinct strings.
    Categorical { labels: Vec<String> },
    /// Records are `dims`-dimensional integer vectors with entries in `[lo, hi]`.
    IntVector { dims: u32, lo: i64, hi: i64 },
}

/// A finite record space with a dense index for every record.
///
/// Index/record conversion round-trips for every index in `[0, size)`:
/// bitstrings read their index as big-endian bits, integer vectors use a
/// big-endian mixed-radix encoding, and categorical records are positions
/// in the label list.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordUniverse {
    kind: UniverseKind,
    size: usize,
}

impl RecordUniverse {
    pub fn new(kind: UniverseKind) -> Result<Self> {
        let size: u128 = match &kind {
            UniverseKind::Bitstring { k } => {
                if *k == 0 || *k > 30 {
                    return Err(Error::config("bitstring k must be in 1..=30"));
                }
                1u128 << k
            }
            UniverseKind::Categorical { labels } => {
                if labels.is_empty() {
                    return Err(Error::config(
                        "categorical universe needs at least one label",
                    ));
                }
                let mut seen = HashSet::new();
                for l in labels {
                    if !seen.insert(l.as_str()) {
                        return Err(Error::config(format!("duplicate label {l:?}")));
                    }
                }
                labels.len() as u128
            }
            UniverseKind::IntVector { dims, lo, hi } => {
                if *dims == 0 {
                    return Err(Error::config("int_vector dims must be positive"));
                }
                if hi < lo {
                    return Err(Error::config("int_vector needs hi >= lo"));
                }
                let base = (*hi - *lo) as u128 + 1;
                base.checked_pow(*dims)
                    .ok_or_else(|| Error::config("int_vector universe overflows"))?
            }
        };
        if size > MAX_UNIVERSE_SIZE {
            return Err(Error::config(format!(
                "universe size {size} exceeds the supported maximum {MAX_UNIVERSE_SIZE}"
            )));
        }
        Ok(Self {
            kind,
            size: size as usize,
        })
    }

    pub fn bitstring(k: u32) -> Result<Self> {
        Self::new(UniverseKind::Bitstring { k })
    }

    pub fn categorical<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(UniverseKind::Categorical {
            labels: labels.into_iter().map(Into::into).collect(),
        })
    }

    pub fn int_vector(dims: u32, lo: i64, hi: i64) -> Result<Self> {
        Self::new(UniverseKind::IntVector { dims, lo, hi })
    }

    pub fn kind(&self) -> &UniverseKind {
        &self.kind
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn record(&self, index: usize) -> Result<RecordId> {
        if index < self.size {
            Ok(RecordId(index as u32))
        } else {
            Err(Error::config(format!(
                "record index {index} out of range for universe of size {}",
                self.size
            )))
        }
    }

    pub fn contains(&self, r: RecordId) -> bool {
        r.index() < self.size
    }

    pub fn records(&self) -> impl Iterator<Item = RecordId> {
        (0..self.size as u32).map(RecordId)
    }

    /// Number of coordinates in the coordinate view of a record.
    pub fn coord_len(&self) -> usize {
        match &self.kind {
            UniverseKind::Bitstring { k } => *k as usize,
            UniverseKind::Categorical { .. } => 1,
            UniverseKind::IntVector { dims, .. } => *dims as usize,
        }
    }

    /// Coordinate view of a record, used by the coordinate-wise losses.
    pub fn coords(&self, r: RecordId) -> Vec<i64> {
        debug_assert!(self.contains(r));
        match &self.kind {
            UniverseKind::Bitstring { k } => {
                let idx = r.0 as u64;
                (0..*k)
                    .map(|j| ((idx >> (*k - 1 - j)) & 1) as i64)
                    .collect()
            }
            UniverseKind::Categorical { .. } => vec![r.0 as i64],
            UniverseKind::IntVector { dims, lo, hi } => {
                let base = (*hi - *lo) as u64 + 1;
                let mut idx = r.0 as u64;
                let mut out = vec![0i64; *dims as usize];
                for j in (0..*dims as usize).rev() {
                    out[j] = *lo + (idx % base) as i64;
                    idx /= base;
                }
                out
            }
        }
    }

    /// Human-readable form of a record.
    pub fn label(&self, r: RecordId) -> String {
        match &self.kind {
            UniverseKind::Bitstring { k } => {
                format!("{:0width$b}", r.0, width = *k as usize)
            }
            UniverseKind::Categorical { labels } => labels[r.index()].clone(),
            UniverseKind::IntVector { dims, .. } => {
                let coords = self.coords(r);
                if *dims == 1 {
                    coords[0].to_string()
                } else {
                    let parts: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
                    format!("({})", parts.join(","))
                }
            }
        }
    }

    /// Parse the human-readable form back into a record.
    pub fn parse_label(&self, s: &str) -> Result<RecordId> {
        match &self.kind {
            UniverseKind::Bitstring { k } => {
                if s.len() != *k as usize || !s.bytes().all(|b| b == b'0' || b == b'1') {
                    return Err(Error::config(format!(
                        "{s:?} is not a length-{k} bitstring"
                    )));
                }
                let idx = u32::from_str_radix(s, 2)
                    .map_err(|e| Error::config(format!("bad bitstring {s:?}: {e}")))?;
                self.record(idx as usize)
            }
            UniverseKind::Categorical { labels } => labels
                .iter()
                .position(|l| l == s)
                .map(|i| RecordId(i as u32))
                .ok_or_else(|| Error::config(format!("unknown label {s:?}"))),
            UniverseKind::IntVector { dims, lo, hi } => {
                let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
                let coords: Vec<i64> = trimmed
                    .split(',')
                    .map(|p| p.trim().parse::<i64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::config(format!("bad int vector {s:?}: {e}")))?;
                if coords.len() != *dims as usize {
                    return Err(Error::config(format!(
                        "expected {dims} coordinates, got {}",
                        coords.len()
                    )));
                }
                let base = (*hi - *lo) as u64 + 1;
                let mut idx = 0u64;
                for c in &coords {
                    if c < lo || c > hi {
                        return Err(Error::config(format!(
                            "coordinate {c} outside [{lo}, {hi}]"
                        )));
                    }
                    idx = idx * base + (*c - *lo) as u64;
                }
                self.record(idx as usize)
            }
        }
    }

    /// The all-zero bit vector. Only defined for bitstring universes.
    pub fn all_zeros(&self) -> Result<RecordId> {
        match &self.kind {
            UniverseKind::Bitstring { .. } => Ok(RecordId(0)),
            _ => Err(Error::config(
                "all_zeros is only defined for bitstring universes",
            )),
        }
    }

    /// The all-one bit vector. Only defined for bitstring universes.
    pub fn all_ones(&self) -> Result<RecordId> {
        match &self.kind {
            UniverseKind::Bitstring { .. } => Ok(RecordId(self.size as u32 - 1)),
            _ => Err(Error::config(
                "all_ones is only defined for bitstring universes",
            )),
        }
    }
}

/// An ordered tuple of records. Order is significant: entry `i` is record
/// `x_i` of the dataset. A dataset may be empty (the known-records context
/// of an informed game with `n = 1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dataset {
    records: Vec<RecordId>,
}

impl Dataset {
    pub fn new(records: Vec<RecordId>) -> Self {
        Self { records }
    }

    pub fn validated(records: Vec<RecordId>, universe: &RecordUniverse) -> Result<Self> {
        for r in &records {
            if !universe.contains(*r) {
                return Err(Error::config(format!(
                    "record index {} out of range for universe of size {}",
                    r.0,
                    universe.size()
                )));
            }
        }
        Ok(Self { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[RecordId] {
        &self.records
    }

    pub fn get(&self, i: usize) -> RecordId {
        self.records[i]
    }

    /// A new dataset with `target` appended as the last record.
    pub fn with_appended(&self, target: RecordId) -> Dataset {
        let mut records = Vec::with_capacity(self.records.len() + 1);
        records.extend_from_slice(&self.records);
        records.push(target);
        Dataset { records }
    }

    pub fn label(&self, universe: &RecordUniverse) -> String {
        let parts: Vec<String> = self.records.iter().map(|r| universe.label(*r)).collect();
        format!("({})", parts.join(", "))
    }
}

/// Number of ordered datasets of length `n`, or `None` on overflow.
pub fn dataset_count(universe: &RecordUniverse, n: usize) -> Option<u128> {
    (universe.size() as u128).checked_pow(u32::try_from(n).ok()?)
}

/// Enumerate all `size^n` ordered datasets exactly once, lexicographically
/// by record index (first record varies slowest).
pub fn enumerate_datasets(
    universe: &RecordUniverse,
    n: usize,
    cap: u64,
) -> Result<DatasetEnumeration> {
    if n == 0 {
        return Err(Error::config("dataset enumeration needs n >= 1"));
    }
    let total = dataset_count(universe, n).unwrap_or(u128::MAX);
    if total > cap as u128 {
        return Err(Error::CapExceeded { needed: total, cap });
    }
    Ok(DatasetEnumeration {
        size: universe.size() as u64,
        n,
        next: 0,
        total: total as u64,
    })
}

/// Iterator over all ordered datasets of a universe.
#[derive(Debug, Clone)]
pub struct DatasetEnumeration {
    size: u64,
    n: usize,
    next: u64,
    total: u64,
}

impl Iterator for DatasetEnumeration {
    type Item = Dataset;

    fn next(&mut self) -> Option<Dataset> {
        if self.next >= self.total {
            return None;
        }
        let mut idx = self.next;
        self.next += 1;
        let mut records = vec![RecordId(0); self.n];
        for slot in records.iter_mut().rev() {
            *slot = RecordId((idx % self.size) as u32);
            idx /= self.size;
        }
        Some(Dataset::new(records))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for DatasetEnumeration {}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bitstring_labels_round_trip() {
        let u = RecordUniverse::bitstring(4).unwrap();
        assert_eq!(u.size(), 16);
        let r = u.parse_label("1011").unwrap();
        assert_eq!(r, RecordId(0b1011));
        assert_eq!(u.label(r), "1011");
        assert_eq!(u.coords(r), vec![1, 0, 1, 1]);
        assert_eq!(u.all_zeros().unwrap(), RecordId(0));
        assert_eq!(u.all_ones().unwrap(), RecordId(15));
    }

    #[test]
    fn categorical_universe() {
        let u = RecordUniverse::categorical(["a", "b", "c"]).unwrap();
        assert_eq!(u.size(), 3);
        assert_eq!(u.label(RecordId(1)), "b");
        assert_eq!(u.parse_label("c").unwrap(), RecordId(2));
        assert!(u.parse_label("d").is_err());
        assert!(RecordUniverse::categorical(["a", "a"]).is_err());
    }

    #[test]
    fn int_vector_universe() {
        let u = RecordUniverse::int_vector(2, -1, 1).unwrap();
        assert_eq!(u.size(), 9);
        let r = u.parse_label("(0,1)").unwrap();
        assert_eq!(u.coords(r), vec![0, 1]);
        assert_eq!(u.label(r), "(0,1)");
        let one_d = RecordUniverse::int_vector(1, 3, 7).unwrap();
        assert_eq!(one_d.parse_label("5").unwrap(), RecordId(2));
        assert_eq!(one_d.label(RecordId(2)), "5");
    }

    #[test]
    fn invalid_universes_are_rejected() {
        assert!(RecordUniverse::bitstring(0).is_err());
        assert!(RecordUniverse::bitstring(31).is_err());
        assert!(RecordUniverse::int_vector(0, 0, 1).is_err());
        assert!(RecordUniverse::int_vector(2, 1, 0).is_err());
        assert!(RecordUniverse::categorical(Vec::<String>::new()).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let u2 = RecordUniverse::bitstring(1).unwrap();
        assert_eq!(enumerate_datasets(&u2, 2, 100).unwrap().count(), 4);
        let u4 = RecordUniverse::bitstring(2).unwrap();
        assert_eq!(enumerate_datasets(&u4, 3, 100).unwrap().count(), 64);
    }

    #[test]
    fn enumeration_is_unique_and_ordered() {
        let u = RecordUniverse::bitstring(2).unwrap();
        let all: Vec<Dataset> = enumerate_datasets(&u, 2, 100).unwrap().collect();
        assert_eq!(all.len(), 16);
        let mut seen = std::collections::HashSet::new();
        for d in &all {
            assert!(seen.insert(d.clone()));
        }
        assert_eq!(all[0].records(), &[RecordId(0), RecordId(0)]);
        assert_eq!(all[1].records(), &[RecordId(0), RecordId(1)]);
        assert_eq!(all[15].records(), &[RecordId(3), RecordId(3)]);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let u = RecordUniverse::bitstring(4).unwrap();
        let err = enumerate_datasets(&u, 3, 100).unwrap_err();
        assert!(matches!(
            err,
            crate::error::Error::CapExceeded {
                needed: 4096,
                cap: 100
            }
        ));
    }

    #[test]
    fn dataset_validation() {
        let u = RecordUniverse::bitstring(2).unwrap();
        assert!(Dataset::validated(vec![RecordId(3)], &u).is_ok());
        assert!(Dataset::validated(vec![RecordId(4)], &u).is_err());
        let ctx = Dataset::new(vec![RecordId(0)]);
        let x = ctx.with_appended(RecordId(2));
        assert_eq!(x.records(), &[RecordId(0), RecordId(2)]);
    }

    fn arb_universe() -> impl Strategy<Value = RecordUniverse> {
        prop_oneof![
            (1u32..=6).prop_map(|k| RecordUniverse::bitstring(k).unwrap()),
            (1usize..=20).prop_map(|m| {
                RecordUniverse::categorical((0..m).map(|i| format!("v{i}"))).unwrap()
            }),
            (1u32..=3, -3i64..=0, 0i64..=3)
                .prop_map(|(d, lo, hi)| RecordUniverse::int_vector(d, lo, hi).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn label_round_trips(u in arb_universe(), raw in 0usize..4096) {
            let idx = raw % u.size();
            let r = u.record(idx).unwrap();
            let label = u.label(r);
            prop_assert_eq!(u.parse_label(&label).unwrap(), r);
        }

        #[test]
        fn coords_are_unique_per_record(u in arb_universe()) {
            let mut seen = std::collections::HashSet::new();
            for r in u.records() {
                prop_assert!(seen.insert(u.coords(r)));
            }
        }
    }
}
