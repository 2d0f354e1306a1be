//! Priors over a record universe, with deterministic seeded sampling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::record::{Dataset, RecordId, RecordUniverse};
use crate::seed::{derive_rng, StreamDomain};

/// How far a pmf may drift from summing to one.
pub const PMF_SUM_TOLERANCE: f64 = 1e-9;

/// A probability mass function over a record universe.
///
/// Immutable after construction; sampling takes explicit `(seed, trial)`
/// so there is no shared generator state.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    universe: RecordUniverse,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl Distribution {
    pub fn new(universe: RecordUniverse, pmf: Vec<f64>) -> Result<Self> {
        if pmf.len() != universe.size() {
            return Err(Error::config(format!(
                "pmf has {} entries for a universe of size {}",
                pmf.len(),
                universe.size()
            )));
        }
        let mut sum = 0.0;
        for (i, p) in pmf.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 || *p > 1.0 {
                return Err(Error::config(format!(
                    "pmf entry {i} is {p}, not in [0, 1]"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PMF_SUM_TOLERANCE {
            return Err(Error::config(format!("pmf sums to {sum}, expected 1")));
        }
        let mut cdf = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for p in &pmf {
            acc += p;
            cdf.push(acc);
        }
        Ok(Self { universe, pmf, cdf })
    }

    pub fn uniform(universe: RecordUniverse) -> Self {
        let p = 1.0 / universe.size() as f64;
        let pmf = vec![p; universe.size()];
        Self::new(universe, pmf).expect("uniform pmf is always valid")
    }

    pub fn point_mass(universe: RecordUniverse, r: RecordId) -> Result<Self> {
        if !universe.contains(r) {
            return Err(Error::config("point mass record outside universe"));
        }
        let mut pmf = vec![0.0; universe.size()];
        pmf[r.index()] = 1.0;
        Self::new(universe, pmf)
    }

    pub fn universe(&self) -> &RecordUniverse {
        &self.universe
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, r: RecordId) -> f64 {
        self.pmf[r.index()]
    }

    /// One draw using an already-derived stream.
    pub fn sample_record_with(&self, rng: &mut ChaCha8Rng) -> RecordId {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        RecordId(idx.min(self.universe.size() - 1) as u32)
    }

    /// One draw from the prior on the data stream of `(seed, trial)`.
    pub fn sample_record(&self, seed: u64, trial: u64) -> RecordId {
        let mut rng = derive_rng(seed, trial, StreamDomain::Data);
        self.sample_record_with(&mut rng)
    }

    /// `n` i.i.d. draws on the data stream of `(seed, trial)`. Bit-identical
    /// output for identical inputs regardless of execution order.
    pub fn sample_dataset(&self, n: usize, seed: u64, trial: u64) -> Dataset {
        let mut rng = derive_rng(seed, trial, StreamDomain::Data);
        self.sample_dataset_with(n, &mut rng)
    }

    pub fn sample_dataset_with(&self, n: usize, rng: &mut ChaCha8Rng) -> Dataset {
        Dataset::new((0..n).map(|_| self.sample_record_with(rng)).collect())
    }

    /// Product-measure probability of an ordered dataset.
    pub fn dataset_prob(&self, x: &Dataset) -> f64 {
        x.records().iter().map(|r| self.prob(*r)).product()
    }

    /// All ordered datasets of length `n` together with their prior
    /// probability. Errors if `size^n` exceeds `cap`.
    pub fn enumerate_datasets(
        &self,
        n: usize,
        cap: u64,
    ) -> Result<impl Iterator<Item = (Dataset, f64)> + '_> {
        let inner = crate::record::enumerate_datasets(&self.universe, n, cap)?;
        Ok(inner.map(move |d| {
            let p = self.dataset_prob(&d);
            (d, p)
        }))
    }
}
