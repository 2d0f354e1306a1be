//! The JSON configuration schema shared by every command.
//!
//! One top-level discriminator selects the payload: `game` for a single
//! game, `grid` for an audit grid, `taxonomy` for selections and extra
//! attack specs. Canonical bytes are the compact serialization of the
//! parsed config, so formatting differences never change a config hash.

use serde::{Deserialize, Serialize};

use crate::adversary::AdversaryKind;
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::game::{GameConfig, GameVariant};
use crate::loss::LossSpec;
use crate::mechanism::{Mechanism, MechanismKind};
use crate::record::{Dataset, RecordId, RecordUniverse, UniverseKind};
use crate::DEFAULT_ENUMERATION_CAP;

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ConfigFile {
    Game(GameSpec),
    Grid(GridSpec),
    Taxonomy(TaxonomySpec),
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))
    }

    /// Compact canonical serialization of the parsed config.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("configs always serialize")
    }

    pub fn as_game(&self) -> Result<&GameSpec> {
        match self {
            ConfigFile::Game(g) => Ok(g),
            _ => Err(Error::config("this command needs a {\"game\": ...} config")),
        }
    }

    pub fn as_grid(&self) -> Result<&GridSpec> {
        match self {
            ConfigFile::Grid(g) => Ok(g),
            _ => Err(Error::config("this command needs a {\"grid\": ...} config")),
        }
    }

    pub fn as_taxonomy(&self) -> Result<&TaxonomySpec> {
        match self {
            ConfigFile::Taxonomy(t) => Ok(t),
            _ => Err(Error::config(
                "this command needs a {\"taxonomy\": ...} config",
            )),
        }
    }
}

/// A record referenced by dense index or by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecordRef {
    Index(u64),
    Label(String),
}

impl RecordRef {
    pub fn resolve(&self, universe: &RecordUniverse) -> Result<RecordId> {
        match self {
            RecordRef::Index(i) => universe.record(*i as usize),
            RecordRef::Label(s) => universe.parse_label(s),
        }
    }
}

/// The prior over records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Uniform,
    PointMass { record: RecordRef },
    Pmf { probs: Vec<f64> },
}

impl DistributionSpec {
    pub fn build(&self, universe: &RecordUniverse) -> Result<Distribution> {
        match self {
            DistributionSpec::Uniform => Ok(Distribution::uniform(universe.clone())),
            DistributionSpec::PointMass { record } => {
                Distribution::point_mass(universe.clone(), record.resolve(universe)?)
            }
            DistributionSpec::Pmf { probs } => Distribution::new(universe.clone(), probs.clone()),
        }
    }
}

/// A single fully specified game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub variant: GameVariant,
    pub universe: UniverseKind,
    pub distribution: DistributionSpec,
    pub n: usize,
    pub mechanism: MechanismKind,
    pub adversary: AdversaryKind,
    pub loss: LossSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_context: Option<Vec<RecordRef>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration_cap: Option<u64>,
}

impl GameSpec {
    pub fn build(&self) -> Result<GameConfig> {
        let universe = RecordUniverse::new(self.universe.clone())?;
        let prior = self.distribution.build(&universe)?;
        let mechanism = Mechanism::new(self.mechanism.clone(), universe.clone(), self.n)?;
        let loss = LossSpec::new(self.loss.kind, self.loss.eta)?;
        let fixed_context = match &self.fixed_context {
            None => None,
            Some(refs) => {
                let records: Vec<RecordId> = refs
                    .iter()
                    .map(|r| r.resolve(&universe))
                    .collect::<Result<_>>()?;
                Some(Dataset::new(records))
            }
        };
        let cfg = GameConfig::new(
            self.variant,
            prior,
            mechanism,
            self.adversary,
            loss,
            fixed_context,
        )?;
        Ok(cfg.with_cap(self.enumeration_cap.unwrap_or(DEFAULT_ENUMERATION_CAP)))
    }
}

/// Mechanism families available in audit grids; the parametric ones expand
/// over the grid's epsilon list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMechanism {
    Constant,
    Identity,
    RandomizedResponse,
    NoisyHistogram,
    Separation,
}

impl GridMechanism {
    pub fn is_parametric(&self) -> bool {
        matches!(
            self,
            GridMechanism::RandomizedResponse | GridMechanism::NoisyHistogram
        )
    }

    pub fn kind(&self, epsilon: Option<f64>) -> MechanismKind {
        match self {
            GridMechanism::Constant => MechanismKind::Constant,
            GridMechanism::Identity => MechanismKind::Identity,
            GridMechanism::RandomizedResponse => MechanismKind::RandomizedResponse {
                epsilon: epsilon.unwrap_or(1.0),
            },
            GridMechanism::NoisyHistogram => MechanismKind::NoisyHistogram {
                epsilon: epsilon.unwrap_or(1.0),
            },
            GridMechanism::Separation => MechanismKind::Separation,
        }
    }
}

/// An audit grid over mechanisms, universe sizes, dataset sizes, and
/// epsilons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub epsilons: Vec<f64>,
    pub universe_sizes: Vec<u32>,
    pub ns: Vec<usize>,
    pub mechanisms: Vec<GridMechanism>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_transfer: Option<bool>,
}

/// One grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub mechanism: GridMechanism,
    pub size: u32,
    pub n: usize,
    pub epsilon: Option<f64>,
}

impl GridSpec {
    /// The default audit grid: both parametric mechanisms over epsilon in
    /// {0.1, 0.5, 1, 2}, universe sizes {2, 4, 8}, and n in {1, 2, 3}, with
    /// exact-match loss at threshold zero. The cap covers the largest cell
    /// (the noisy histogram on 8 records with n = 3).
    pub fn default_grid() -> Self {
        Self {
            epsilons: vec![0.1, 0.5, 1.0, 2.0],
            universe_sizes: vec![2, 4, 8],
            ns: vec![1, 2, 3],
            mechanisms: vec![
                GridMechanism::RandomizedResponse,
                GridMechanism::NoisyHistogram,
            ],
            loss: Some(LossSpec::exact_match()),
            enumeration_cap: Some(100_000_000),
            include_transfer: Some(true),
        }
    }

    pub fn loss(&self) -> Result<LossSpec> {
        let spec = self.loss.unwrap_or_else(LossSpec::exact_match);
        LossSpec::new(spec.kind, spec.eta)
    }

    pub fn cap(&self) -> u64 {
        self.enumeration_cap.unwrap_or(DEFAULT_ENUMERATION_CAP)
    }

    pub fn include_transfer(&self) -> bool {
        self.include_transfer.unwrap_or(true)
    }

    /// Expand to cells in deterministic order: mechanism, size, n, epsilon.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut out = Vec::new();
        for mech in &self.mechanisms {
            for &size in &self.universe_sizes {
                for &n in &self.ns {
                    if mech.is_parametric() {
                        for &eps in &self.epsilons {
                            out.push(GridCell {
                                mechanism: *mech,
                                size,
                                n,
                                epsilon: Some(eps),
                            });
                        }
                    } else {
                        out.push(GridCell {
                            mechanism: *mech,
                            size,
                            n,
                            epsilon: None,
                        });
                    }
                }
            }
        }
        out
    }
}

/// A universe of the requested size: a bitstring universe when the size is
/// a power of two, a categorical universe otherwise.
pub fn universe_of_size(size: u32) -> Result<RecordUniverse> {
    if size == 0 {
        return Err(Error::config("universe size must be positive"));
    }
    if size.is_power_of_two() && size > 1 {
        RecordUniverse::bitstring(size.trailing_zeros())
    } else {
        RecordUniverse::categorical((0..size).map(|i| format!("v{i}")))
    }
}

/// Taxonomy selections and extra attack specs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxonomySpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub select: Vec<String>,
    /// Extra attack specs, kept raw so incomplete ones surface as
    /// validation findings rather than parse errors.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub specs: Vec<serde_json::Value>,
}
