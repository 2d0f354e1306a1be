//! Reconstruction error functions and the success threshold.
//!
//! A guess succeeds when its loss against the target is at most `eta`.
//! Exact match treats equal records as loss 0 and anything else as loss 1,
//! so `eta = 0` means an exact reconstruction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{RecordId, RecordUniverse, UniverseKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// 0 on equal records, 1 otherwise. Any universe.
    ExactMatch,
    /// Number of differing coordinates. Bitstring and int_vector universes.
    Hamming,
    /// |a - b| on the single coordinate. One-dimensional int_vector only.
    Absolute,
}

/// A reconstruction error function together with its success threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    pub eta: f64,
}

impl LossSpec {
    pub fn new(kind: LossKind, eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::config(format!(
                "eta must be a finite non-negative real, got {eta}"
            )));
        }
        Ok(Self { kind, eta })
    }

    /// Exact-match loss with `eta = 0`: success means exact reconstruction.
    pub fn exact_match() -> Self {
        Self {
            kind: LossKind::ExactMatch,
            eta: 0.0,
        }
    }

    /// The kinds a universe supports.
    pub fn check_universe(&self, universe: &RecordUniverse) -> Result<()> {
        match (self.kind, universe.kind()) {
            (LossKind::ExactMatch, _) => Ok(()),
            (LossKind::Hamming, UniverseKind::Bitstring { .. })
            | (LossKind::Hamming, UniverseKind::IntVector { .. }) => Ok(()),
            (LossKind::Hamming, _) => Err(Error::config(
                "hamming loss needs a bitstring or int_vector universe",
            )),
            (LossKind::Absolute, UniverseKind::IntVector { dims: 1, .. }) => Ok(()),
            (LossKind::Absolute, _) => Err(Error::config(
                "absolute loss needs an int_vector universe with dims = 1",
            )),
        }
    }

    /// Loss between two records of the same universe. Symmetric, non-negative,
    /// and zero on equal records.
    pub fn loss(&self, universe: &RecordUniverse, a: RecordId, b: RecordId) -> Result<f64> {
        self.check_universe(universe)?;
        if !universe.contains(a) || !universe.contains(b) {
            return Err(Error::config("loss arguments outside the universe"));
        }
        Ok(match self.kind {
            LossKind::ExactMatch => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
            LossKind::Hamming => {
                let ca = universe.coords(a);
                let cb = universe.coords(b);
                ca.iter().zip(&cb).filter(|(x, y)| x != y).count() as f64
            }
            LossKind::Absolute => {
                let ca = universe.coords(a);
                let cb = universe.coords(b);
                (ca[0] - cb[0]).abs() as f64
            }
        })
    }

    /// Whether a guess of `b` succeeds against target `a`.
    pub fn within_eta(&self, universe: &RecordUniverse, a: RecordId, b: RecordId) -> Result<bool> {
        Ok(self.loss(universe, a, b)? <= self.eta)
    }

    /// All records within `eta` of `z`. By symmetry this is both the set of
    /// targets a guess of `z` covers and the set of successful guesses for a
    /// target `z`.
    pub fn success_ball(&self, universe: &RecordUniverse, z: RecordId) -> Result<Vec<RecordId>> {
        self.check_universe(universe)?;
        let mut ball = Vec::new();
        for r in universe.records() {
            if self.loss(universe, z, r)? <= self.eta {
                ball.push(r);
            }
        }
        Ok(ball)
    }
}
