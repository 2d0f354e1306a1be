//! Randomized mechanisms with finite output alphabets and exactly
//! computable output laws.
//!
//! Every mechanism exposes three equivalent views of its behavior on a
//! dataset: the exact output pmf ([`Mechanism::output_distribution`] /
//! [`Mechanism::fill_output_row`]), point likelihoods
//! ([`Mechanism::likelihood`]), and seeded sampling
//! ([`Mechanism::sample_output`]). Output symbols are dense indices into an
//! alphabet that depends only on the mechanism spec, never on the dataset.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{Dataset, RecordId, RecordUniverse, UniverseKind};
use crate::seed::{derive_rng, StreamDomain};
use crate::DEFAULT_ENUMERATION_CAP;

/// Differential privacy parameters. `epsilon` may be `+inf` for mechanisms
/// that are not differentially private at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpParameters {
    pub epsilon: f64,
    pub delta: f64,
}

impl DpParameters {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::config(format!(
                "epsilon must be >= 0, got {epsilon}"
            )));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::config(format!(
                "delta must be in [0, 1], got {delta}"
            )));
        }
        Ok(Self { epsilon, delta })
    }

    /// Pure DP: `delta = 0`.
    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn is_pure(&self) -> bool {
        self.delta == 0.0
    }
}

/// The mechanism library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MechanismKind {
    /// Ignores the dataset and always outputs bottom.
    Constant,
    /// Outputs the dataset itself.
    Identity,
    /// Each record is reported truthfully with probability
    /// `e^eps / (e^eps + size - 1)`, otherwise uniformly among the other
    /// `size - 1` records. The output is the vector of reported records.
    RandomizedResponse { epsilon: f64 },
    /// Per-cell two-sided geometric noise with parameter `eps / 2`
    /// (replace-one sensitivity 2), clamped to `[0, n]` with the tail mass
    /// folded onto the clamp endpoints. The output is a count vector on the
    /// grid `[0, n]^size`.
    NoisyHistogram { epsilon: f64 },
    /// Deterministic: when at least `n - 1` records equal the all-zero
    /// bitstring, outputs the remaining record; otherwise bottom. Not
    /// differentially private by design.
    Separation,
}

impl MechanismKind {
    pub fn name(&self) -> &'static str {
        match self {
            MechanismKind::Constant => "constant",
            MechanismKind::Identity => "identity",
            MechanismKind::RandomizedResponse { .. } => "randomized_response",
            MechanismKind::NoisyHistogram { .. } => "noisy_histogram",
            MechanismKind::Separation => "separation",
        }
    }
}

/// One symbol of a mechanism's output alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputSymbol {
    Bottom,
    Record(RecordId),
    ReportVector(Vec<RecordId>),
    Histogram(Vec<u32>),
}

impl OutputSymbol {
    /// Human-readable form using the universe's record labels.
    pub fn render(&self, universe: &RecordUniverse) -> String {
        match self {
            OutputSymbol::Bottom => "⊥".to_string(),
            OutputSymbol::Record(r) => universe.label(*r),
            OutputSymbol::ReportVector(rs) => {
                let parts: Vec<String> = rs.iter().map(|r| universe.label(*r)).collect();
                format!("({})", parts.join(", "))
            }
            OutputSymbol::Histogram(cs) => {
                let parts: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
                format!("[{}]", parts.join(","))
            }
        }
    }
}

/// Exact output law of a mechanism on one dataset.
#[derive(Debug, Clone)]
pub struct OutputDistribution {
    symbols: Vec<OutputSymbol>,
    pmf: Vec<f64>,
}

impl OutputDistribution {
    pub fn symbols(&self) -> &[OutputSymbol] {
        &self.symbols
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn prob_of(&self, symbol: &OutputSymbol) -> f64 {
        self.symbols
            .iter()
            .position(|s| s == symbol)
            .map(|i| self.pmf[i])
            .unwrap_or(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.pmf.iter().sum()
    }
}

/// The deterministic separation map: the remaining record when at least
/// `n - 1` records are the all-zero bitstring (the all-zero dataset maps to
/// the zero record), bottom otherwise.
pub fn separation_output(universe: &RecordUniverse, x: &Dataset) -> Result<OutputSymbol> {
    if !matches!(universe.kind(), UniverseKind::Bitstring { .. }) {
        return Err(Error::config(
            "the separation mechanism needs a bitstring universe",
        ));
    }
    if x.is_empty() {
        return Err(Error::config(
            "the separation mechanism needs a non-empty dataset",
        ));
    }
    let zero = universe.all_zeros()?;
    let zeros = x.records().iter().filter(|r| **r == zero).count();
    if zeros + 1 >= x.len() {
        let star = x
            .records()
            .iter()
            .copied()
            .find(|r| *r != zero)
            .unwrap_or(zero);
        Ok(OutputSymbol::Record(star))
    } else {
        Ok(OutputSymbol::Bottom)
    }
}

/// Randomized-response report channel for a single record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RrChannel {
    /// Probability of reporting the true record.
    pub truthful: f64,
    /// Probability of reporting one specific other record.
    pub other: f64,
}

/// Clamped discrete-Laplace count channel: `rows[h][y]` is the probability
/// of publishing count `y` when the true cell count is `h`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct NhChannel {
    pub rows: Vec<Vec<f64>>,
    cdf_rows: Vec<Vec<f64>>,
}

impl NhChannel {
    fn build(epsilon: f64, n: usize) -> Self {
        let alpha = (-epsilon / 2.0).exp();
        let norm = 1.0 + alpha;
        let mut rows = Vec::with_capacity(n + 1);
        for h in 0..=n {
            let mut row = vec![0.0; n + 1];
            row[0] = if h == 0 {
                1.0 / norm
            } else {
                alpha.powi(h as i32) / norm
            };
            row[n] = if h == n {
                1.0 / norm
            } else {
                alpha.powi((n - h) as i32) / norm
            };
            for (y, slot) in row.iter_mut().enumerate().take(n).skip(1) {
                let d = (y as i64 - h as i64).unsigned_abs() as i32;
                *slot = (1.0 - alpha) / norm * alpha.powi(d);
            }
            rows.push(row);
        }
        let cdf_rows = rows
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        Self { rows, cdf_rows }
    }

    fn sample(&self, h: usize, rng: &mut ChaCha8Rng) -> u32 {
        let u: f64 = rng.random();
        let cdf = &self.cdf_rows[h];
        let idx = cdf.partition_point(|&c| c <= u);
        idx.min(cdf.len() - 1) as u32
    }
}

/// A mechanism bound to a universe and a dataset size.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    kind: MechanismKind,
    universe: RecordUniverse,
    n: usize,
    alphabet_len: u128,
    rr: Option<RrChannel>,
    nh: Option<NhChannel>,
}

impl Mechanism {
    pub fn new(kind: MechanismKind, universe: RecordUniverse, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("mechanisms need dataset size n >= 1"));
        }
        let size = universe.size() as u128;
        let mut rr = None;
        let mut nh = None;
        let alphabet_len = match &kind {
            MechanismKind::Constant => 1,
            MechanismKind::Identity => pow_checked(size, n)?,
            MechanismKind::RandomizedResponse { epsilon } => {
                if !epsilon.is_finite() || *epsilon < 0.0 {
                    return Err(Error::config(
                        "randomized_response needs a finite epsilon >= 0",
                    ));
                }
                if universe.size() < 2 {
                    return Err(Error::config(
                        "randomized_response needs a universe with at least 2 records",
                    ));
                }
                let e = epsilon.exp();
                let truthful = e / (e + universe.size() as f64 - 1.0);
                let other = (1.0 - truthful) / (universe.size() as f64 - 1.0);
                rr = Some(RrChannel { truthful, other });
                pow_checked(size, n)?
            }
            MechanismKind::NoisyHistogram { epsilon } => {
                if !epsilon.is_finite() || *epsilon < 0.0 {
                    return Err(Error::config("noisy_histogram needs a finite epsilon >= 0"));
                }
                nh = Some(NhChannel::build(*epsilon, n));
                pow_checked(n as u128 + 1, universe.size())?
            }
            MechanismKind::Separation => {
                if !matches!(universe.kind(), UniverseKind::Bitstring { .. }) {
                    return Err(Error::config(
                        "the separation mechanism needs a bitstring universe",
                    ));
                }
                size + 1
            }
        };
        Ok(Self {
            kind,
            universe,
            n,
            alphabet_len,
            rr,
            nh,
        })
    }

    pub fn kind(&self) -> &MechanismKind {
        &self.kind
    }

    pub fn universe(&self) -> &RecordUniverse {
        &self.universe
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The epsilon the mechanism was configured with, when it has one.
    pub fn configured_epsilon(&self) -> Option<f64> {
        match &self.kind {
            MechanismKind::RandomizedResponse { epsilon }
            | MechanismKind::NoisyHistogram { epsilon } => Some(*epsilon),
            _ => None,
        }
    }

    /// Size of the output alphabet. Identical for every dataset.
    pub fn alphabet_len(&self) -> u128 {
        self.alphabet_len
    }

    pub(crate) fn rr_channel(&self) -> &RrChannel {
        self.rr.as_ref().expect("randomized-response channel")
    }

    pub(crate) fn nh_channel(&self) -> &NhChannel {
        self.nh.as_ref().expect("noisy-histogram channel")
    }

    fn check_input(&self, x: &Dataset) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::config(format!(
                "dataset has {} records, mechanism expects n = {}",
                x.len(),
                self.n
            )));
        }
        for r in x.records() {
            if !self.universe.contains(*r) {
                return Err(Error::config(
                    "dataset record outside the mechanism's universe",
                ));
            }
        }
        Ok(())
    }

    /// Decode a dense output index into its symbol.
    pub fn symbol(&self, y: u64) -> OutputSymbol {
        debug_assert!((y as u128) < self.alphabet_len);
        match &self.kind {
            MechanismKind::Constant => OutputSymbol::Bottom,
            MechanismKind::Identity | MechanismKind::RandomizedResponse { .. } => {
                let size = self.universe.size() as u64;
                let mut idx = y;
                let mut records = vec![RecordId(0); self.n];
                for slot in records.iter_mut().rev() {
                    *slot = RecordId((idx % size) as u32);
                    idx /= size;
                }
                OutputSymbol::ReportVector(records)
            }
            MechanismKind::NoisyHistogram { .. } => {
                let base = self.n as u64 + 1;
                let mut idx = y;
                let mut counts = vec![0u32; self.universe.size()];
                for slot in counts.iter_mut().rev() {
                    *slot = (idx % base) as u32;
                    idx /= base;
                }
                OutputSymbol::Histogram(counts)
            }
            MechanismKind::Separation => {
                if y == 0 {
                    OutputSymbol::Bottom
                } else {
                    OutputSymbol::Record(RecordId(y as u32 - 1))
                }
            }
        }
    }

    fn encode_report_vector(&self, records: &[RecordId]) -> u64 {
        let size = self.universe.size() as u64;
        records.iter().fold(0u64, |acc, r| acc * size + r.0 as u64)
    }

    fn encode_separation(&self, out: &OutputSymbol) -> u64 {
        match out {
            OutputSymbol::Bottom => 0,
            OutputSymbol::Record(r) => 1 + r.0 as u64,
            _ => unreachable!("separation outputs are records or bottom"),
        }
    }

    fn histogram(&self, x: &Dataset) -> Vec<usize> {
        let mut h = vec![0usize; self.universe.size()];
        for r in x.records() {
            h[r.index()] += 1;
        }
        h
    }

    /// Exact probability of the output index `y` on dataset `x`.
    pub fn likelihood(&self, x: &Dataset, y: u64) -> f64 {
        debug_assert!(self.check_input(x).is_ok());
        match &self.kind {
            MechanismKind::Constant => 1.0,
            MechanismKind::Identity => {
                if self.encode_report_vector(x.records()) == y {
                    1.0
                } else {
                    0.0
                }
            }
            MechanismKind::RandomizedResponse { .. } => {
                let chan = self.rr_channel();
                let size = self.universe.size() as u64;
                let mut idx = y;
                let mut p = 1.0;
                for i in (0..self.n).rev() {
                    let reported = (idx % size) as u32;
                    idx /= size;
                    p *= if reported == x.get(i).0 {
                        chan.truthful
                    } else {
                        chan.other
                    };
                }
                p
            }
            MechanismKind::NoisyHistogram { .. } => {
                let chan = self.nh_channel();
                let h = self.histogram(x);
                let base = self.n as u64 + 1;
                let mut idx = y;
                let mut p = 1.0;
                for c in (0..self.universe.size()).rev() {
                    let published = (idx % base) as usize;
                    idx /= base;
                    p *= chan.rows[h[c]][published];
                }
                p
            }
            MechanismKind::Separation => {
                let out = separation_output(&self.universe, x).expect("validated input");
                if self.encode_separation(&out) == y {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Fill `row` with the exact output pmf of `x`. `row.len()` must equal
    /// the alphabet length.
    pub fn fill_output_row(&self, x: &Dataset, row: &mut [f64]) {
        debug_assert_eq!(row.len() as u128, self.alphabet_len);
        debug_assert!(self.check_input(x).is_ok());
        match &self.kind {
            MechanismKind::Constant => row[0] = 1.0,
            MechanismKind::Identity => {
                row.fill(0.0);
                row[self.encode_report_vector(x.records()) as usize] = 1.0;
            }
            MechanismKind::RandomizedResponse { .. } => {
                let chan = *self.rr_channel();
                let size = self.universe.size();
                tensor_fill(row, self.n, size, |i, reported| {
                    if reported == x.get(i).index() {
                        chan.truthful
                    } else {
                        chan.other
                    }
                });
            }
            MechanismKind::NoisyHistogram { .. } => {
                let h = self.histogram(x);
                let rows: Vec<Vec<f64>> = self.nh_channel().rows.clone();
                tensor_fill(row, self.universe.size(), self.n + 1, |cell, published| {
                    rows[h[cell]][published]
                });
            }
            MechanismKind::Separation => {
                row.fill(0.0);
                let out = separation_output(&self.universe, x).expect("validated input");
                row[self.encode_separation(&out) as usize] = 1.0;
            }
        }
    }

    /// The exact output law of `x`, with decoded symbols. Errors when the
    /// alphabet is too large to materialize.
    pub fn output_distribution(&self, x: &Dataset) -> Result<OutputDistribution> {
        self.output_distribution_capped(x, DEFAULT_ENUMERATION_CAP)
    }

    pub fn output_distribution_capped(&self, x: &Dataset, cap: u64) -> Result<OutputDistribution> {
        self.check_input(x)?;
        if self.alphabet_len > cap as u128 {
            return Err(Error::CapExceeded {
                needed: self.alphabet_len,
                cap,
            });
        }
        let len = self.alphabet_len as usize;
        let mut pmf = vec![0.0; len];
        self.fill_output_row(x, &mut pmf);
        let symbols = (0..len as u64).map(|y| self.symbol(y)).collect();
        Ok(OutputDistribution { symbols, pmf })
    }

    /// One draw from the output law on the mechanism stream of
    /// `(seed, trial)`.
    pub fn sample_output(&self, x: &Dataset, seed: u64, trial: u64) -> Result<u64> {
        self.check_input(x)?;
        let mut rng = derive_rng(seed, trial, StreamDomain::Mechanism);
        Ok(self.sample_output_with(x, &mut rng))
    }

    /// One draw using an already-derived stream. The input must be valid.
    pub fn sample_output_with(&self, x: &Dataset, rng: &mut ChaCha8Rng) -> u64 {
        match &self.kind {
            MechanismKind::Constant => 0,
            MechanismKind::Identity => self.encode_report_vector(x.records()),
            MechanismKind::RandomizedResponse { .. } => {
                let chan = *self.rr_channel();
                let size = self.universe.size();
                let size_u64 = size as u64;
                let mut y = 0u64;
                for i in 0..self.n {
                    let truth = x.get(i).index();
                    let u: f64 = rng.random();
                    let reported = if u < chan.truthful {
                        truth
                    } else {
                        let j = rng.random_range(0..size - 1);
                        if j >= truth {
                            j + 1
                        } else {
                            j
                        }
                    };
                    y = y * size_u64 + reported as u64;
                }
                y
            }
            MechanismKind::NoisyHistogram { .. } => {
                let h = self.histogram(x);
                let base = self.n as u64 + 1;
                let mut y = 0u64;
                for &count in &h {
                    let published = self.nh_channel().sample(count, rng);
                    y = y * base + published as u64;
                }
                y
            }
            MechanismKind::Separation => {
                let out = separation_output(&self.universe, x).expect("validated input");
                self.encode_separation(&out)
            }
        }
    }
}

fn pow_checked(base: u128, exp: usize) -> Result<u128> {
    let exp = u32::try_from(exp).map_err(|_| Error::config("exponent too large"))?;
    base.checked_pow(exp)
        .ok_or_else(|| Error::config("output alphabet size overflows"))
}

/// Fill `row` with a product measure over `positions` digits of radix
/// `base`: `row[y] = prod_i factor(i, digit_i(y))` with digit 0 most
/// significant. Runs in `O(row.len())` by expanding one position at a time.
fn tensor_fill(
    row: &mut [f64],
    positions: usize,
    base: usize,
    factor: impl Fn(usize, usize) -> f64,
) {
    row[0] = 1.0;
    let mut len = 1usize;
    for pos in 0..positions {
        for i in (0..len).rev() {
            let v = row[i];
            for d in (0..base).rev() {
                row[i * base + d] = v * factor(pos, d);
            }
        }
        len *= base;
    }
    debug_assert_eq!(len, row.len());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::Distribution;

    fn bits(k: u32) -> RecordUniverse {
        RecordUniverse::bitstring(k).unwrap()
    }

    fn dataset(u: &RecordUniverse, labels: &[&str]) -> Dataset {
        Dataset::new(labels.iter().map(|l| u.parse_label(l).unwrap()).collect())
    }

    #[test]
    fn constant_is_a_point_mass_on_bottom() {
        let u = bits(2);
        let m = Mechanism::new(MechanismKind::Constant, u.clone(), 2).unwrap();
        let d = m.output_distribution(&dataset(&u, &["01", "10"])).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.pmf()[0], 1.0);
        assert_eq!(d.symbols()[0], OutputSymbol::Bottom);
    }

    #[test]
    fn identity_reveals_the_dataset() {
        let u = bits(2);
        let m = Mechanism::new(MechanismKind::Identity, u.clone(), 1).unwrap();
        let x = dataset(&u, &["10"]);
        let y = m.sample_output(&x, 0, 0).unwrap();
        assert_eq!(
            m.symbol(y),
            OutputSymbol::ReportVector(vec![u.parse_label("10").unwrap()])
        );
        let d = m.output_distribution(&x).unwrap();
        assert_eq!(d.prob_of(&m.symbol(y)), 1.0);
        assert!((d.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn randomized_response_truthful_probability() {
        // Size-2 universe with epsilon = ln 3 reports the truth with
        // probability 3/4.
        let u = bits(1);
        let m = Mechanism::new(
            MechanismKind::RandomizedResponse {
                epsilon: 3.0f64.ln(),
            },
            u.clone(),
            1,
        )
        .unwrap();
        let x = dataset(&u, &["0"]);
        let d = m.output_distribution(&x).unwrap();
        let truthful = d.prob_of(&OutputSymbol::ReportVector(vec![RecordId(0)]));
        assert!((truthful - 0.75).abs() < 1e-12);
        assert!((d.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn randomized_response_needs_two_records() {
        let u = RecordUniverse::categorical(["only"]).unwrap();
        assert!(Mechanism::new(MechanismKind::RandomizedResponse { epsilon: 1.0 }, u, 1).is_err());
    }

    #[test]
    fn noisy_histogram_rows_normalize() {
        let u = bits(2);
        let m =
            Mechanism::new(MechanismKind::NoisyHistogram { epsilon: 1.0 }, u.clone(), 3).unwrap();
        let x = dataset(&u, &["00", "01", "01"]);
        let d = m.output_distribution(&x).unwrap();
        assert_eq!(d.len(), 4usize.pow(4));
        assert!((d.sum() - 1.0).abs() < 1e-9);
        // Channel rows are themselves distributions.
        for row in &m.nh_channel().rows {
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn separation_output_examples() {
        let u = bits(4);
        let x = dataset(&u, &["0000", "0000", "1011"]);
        assert_eq!(
            separation_output(&u, &x).unwrap(),
            OutputSymbol::Record(u.parse_label("1011").unwrap())
        );
        let zeros = dataset(&u, &["0000", "0000", "0000"]);
        assert_eq!(
            separation_output(&u, &zeros).unwrap(),
            OutputSymbol::Record(u.parse_label("0000").unwrap())
        );
        let mixed = dataset(&u, &["0100", "0000", "1011"]);
        assert_eq!(separation_output(&u, &mixed).unwrap(), OutputSymbol::Bottom);
    }

    #[test]
    fn separation_needs_bitstrings() {
        let cat = RecordUniverse::categorical(["a", "b"]).unwrap();
        assert!(Mechanism::new(MechanismKind::Separation, cat, 2).is_err());
    }

    #[test]
    fn alphabet_is_dataset_independent() {
        let u = bits(2);
        for kind in [
            MechanismKind::Constant,
            MechanismKind::Identity,
            MechanismKind::RandomizedResponse { epsilon: 1.0 },
            MechanismKind::NoisyHistogram { epsilon: 0.5 },
            MechanismKind::Separation,
        ] {
            let m = Mechanism::new(kind, u.clone(), 2).unwrap();
            let len = m.alphabet_len();
            let d1 = m.output_distribution(&dataset(&u, &["00", "00"])).unwrap();
            let d2 = m.output_distribution(&dataset(&u, &["11", "01"])).unwrap();
            assert_eq!(d1.len() as u128, len);
            assert_eq!(d1.symbols(), d2.symbols());
            assert!((d1.sum() - 1.0).abs() < 1e-9);
            assert!((d2.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn likelihood_matches_row_fill() {
        let u = bits(2);
        for kind in [
            MechanismKind::Identity,
            MechanismKind::RandomizedResponse { epsilon: 0.7 },
            MechanismKind::NoisyHistogram { epsilon: 1.3 },
            MechanismKind::Separation,
        ] {
            let m = Mechanism::new(kind, u.clone(), 2).unwrap();
            let x = dataset(&u, &["10", "01"]);
            let mut row = vec![0.0; m.alphabet_len() as usize];
            m.fill_output_row(&x, &mut row);
            for (y, p) in row.iter().enumerate() {
                assert!(
                    (m.likelihood(&x, y as u64) - p).abs() < 1e-15,
                    "mismatch at output {y} for {:?}",
                    m.kind()
                );
            }
        }
    }

    #[test]
    fn sampling_matches_exact_law() {
        // Empirical frequencies over many trials stay within a generous
        // binomial band around the exact pmf.
        let u = bits(1);
        let m = Mechanism::new(
            MechanismKind::RandomizedResponse { epsilon: 1.0 },
            u.clone(),
            2,
        )
        .unwrap();
        let x = dataset(&u, &["0", "1"]);
        let exact = m.output_distribution(&x).unwrap();
        let trials = 100_000u64;
        let mut counts = vec![0u64; exact.len()];
        for t in 0..trials {
            counts[m.sample_output(&x, 3, t).unwrap() as usize] += 1;
        }
        for (y, c) in counts.iter().enumerate() {
            let p = exact.pmf()[y];
            let freq = *c as f64 / trials as f64;
            let sd = (p * (1.0 - p) / trials as f64).sqrt();
            assert!(
                (freq - p).abs() <= 5.0 * sd + 1e-4,
                "output {y}: frequency {freq} vs exact {p}"
            );
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let u = bits(2);
        let m =
            Mechanism::new(MechanismKind::NoisyHistogram { epsilon: 0.8 }, u.clone(), 2).unwrap();
        let x = dataset(&u, &["01", "11"]);
        assert_eq!(
            m.sample_output(&x, 9, 4).unwrap(),
            m.sample_output(&x, 9, 4).unwrap()
        );
    }

    #[test]
    fn point_mass_prior_and_constant_mechanism_compose() {
        let u = bits(2);
        let prior = Distribution::point_mass(u.clone(), RecordId(2)).unwrap();
        let m = Mechanism::new(MechanismKind::Constant, u, 3).unwrap();
        let x = prior.sample_dataset(3, 0, 0);
        assert_eq!(m.sample_output(&x, 0, 0).unwrap(), 0);
    }

    #[test]
    fn dp_parameters_validate() {
        assert!(DpParameters::pure(0.0).unwrap().is_pure());
        assert!(DpParameters::pure(f64::INFINITY).is_ok());
        assert!(DpParameters::new(-1.0, 0.0).is_err());
        assert!(DpParameters::new(1.0, 1.5).is_err());
    }
}
