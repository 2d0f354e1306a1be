//! Machine-readable model of the privacy-attack taxonomy.
//!
//! An attack is described by three roles — the crafter that sets up the
//! game, the attacker that plays it, and the evaluator that scores it —
//! each with a fixed set of dimensions. Every dimension takes exactly one
//! value. Closed dimensions carry a canonical option list ordered strongest
//! to weakest; values outside it are accepted but flagged as non-canonical,
//! since real deployments routinely need tuned options.

mod registry;
mod svg;

pub use registry::{builtin_registry, AttackRegistry, CitationStub};
pub use svg::render_parallel_coordinates;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// The role a dimension belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Crafter,
    Attacker,
    Evaluator,
}

impl Role {
    pub fn label(&self) -> &'static str {
        match self {
            Role::Crafter => "Crafter",
            Role::Attacker => "Attacker",
            Role::Evaluator => "Evaluator",
        }
    }
}

/// Static description of one taxonomy dimension.
#[derive(Debug, Clone, Copy)]
pub struct DimensionInfo {
    pub name: &'static str,
    pub label: &'static str,
    pub role: Role,
    /// Canonical options, strongest to weakest. Empty for the free-form
    /// evaluator dimensions.
    pub canonical: &'static [&'static str],
}

/// All dimensions in table order: crafter, attacker, evaluator.
pub const DIMENSIONS: [DimensionInfo; 9] = [
    DimensionInfo {
        name: "dataset_generation",
        label: "dataset generation",
        role: Role::Crafter,
        canonical: DatasetGeneration::CANONICAL,
    },
    DimensionInfo {
        name: "privacy_unit",
        label: "privacy unit",
        role: Role::Crafter,
        canonical: PrivacyUnit::CANONICAL,
    },
    DimensionInfo {
        name: "target_source",
        label: "target source",
        role: Role::Crafter,
        canonical: TargetSource::CANONICAL,
    },
    DimensionInfo {
        name: "access_to_mechanism",
        label: "mechanism access",
        role: Role::Attacker,
        canonical: MechanismAccess::CANONICAL,
    },
    DimensionInfo {
        name: "population_aux",
        label: "population aux",
        role: Role::Attacker,
        canonical: PopulationAux::CANONICAL,
    },
    DimensionInfo {
        name: "dataset_aux",
        label: "dataset aux",
        role: Role::Attacker,
        canonical: DatasetAuxKind::CANONICAL,
    },
    DimensionInfo {
        name: "attack_goal",
        label: "attack goal",
        role: Role::Attacker,
        canonical: AttackGoal::CANONICAL,
    },
    DimensionInfo {
        name: "baseline",
        label: "baseline",
        role: Role::Evaluator,
        canonical: &[],
    },
    DimensionInfo {
        name: "success_metric",
        label: "success metric",
        role: Role::Evaluator,
        canonical: &[],
    },
];

/// Metrics the tooling recognizes; the dimension itself is free-form.
pub const RECOGNIZED_METRICS: [&str; 3] = ["mse", "tpr_at_fpr", "exact_match_probability"];

macro_rules! option_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $s:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(from = "String", into = "String")]
        pub enum $name {
            $($variant,)+
            /// A value outside the canonical option set.
            Extension(String),
        }

        impl $name {
            /// Canonical options, strongest to weakest.
            pub const CANONICAL: &'static [&'static str] = &[$($s),+];

            pub fn as_str(&self) -> &str {
                match self {
                    $(Self::$variant => $s,)+
                    Self::Extension(s) => s.as_str(),
                }
            }

            pub fn is_extension(&self) -> bool {
                matches!(self, Self::Extension(_))
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                match s.as_str() {
                    $($s => Self::$variant,)+
                    _ => Self::Extension(s),
                }
            }
        }

        impl From<$name> for String {
            fn from(v: $name) -> String {
                v.as_str().to_string()
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

option_enum! {
    /// Is the input dataset constructed by the crafter or drawn from a
    /// distribution?
    DatasetGeneration { Chosen => "chosen", Drawn => "drawn" }
}

option_enum! {
    /// Whose contribution the guarantee protects.
    PrivacyUnit { Group => "group", Individual => "individual", Event => "event" }
}

option_enum! {
    /// Is the target constructed or drawn?
    TargetSource { Chosen => "chosen", Drawn => "drawn" }
}

option_enum! {
    /// How much of the mechanism's computation the attacker sees.
    MechanismAccess {
        Adaptive => "adaptive",
        Whitebox => "whitebox",
        Blackbox => "blackbox",
        Query => "query",
        NoAccess => "none",
    }
}

option_enum! {
    /// Prior knowledge about the data population.
    PopulationAux {
        DescriptionOfD => "description_of_D",
        SamplesFromD => "samples_from_D",
        DescriptionOfApproxD => "description_of_approx_D",
        Schema => "schema",
    }
}

option_enum! {
    /// How much of the input dataset the attacker holds.
    DatasetAuxKind {
        ChosenSubsample => "chosen_subsample",
        RandomSubsample => "random_subsample",
        NoAux => "none",
    }
}

option_enum! {
    /// The attacker's goal.
    AttackGoal {
        MembershipInference => "membership_inference",
        AttributeInference => "attribute_inference",
        SinglingOut => "singling_out",
        Reconstruction => "reconstruction",
    }
}

/// Whether the held records are complete rows or partial ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordScope {
    Full,
    Partial,
}

impl RecordScope {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecordScope::Full => "full",
            RecordScope::Partial => "partial",
        }
    }
}

/// Dataset-level auxiliary information, optionally qualified by how much of
/// each held record is known.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetAux {
    pub kind: DatasetAuxKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records: Option<RecordScope>,
}

impl DatasetAux {
    pub fn none() -> Self {
        Self {
            kind: DatasetAuxKind::NoAux,
            records: None,
        }
    }

    pub fn chosen(records: RecordScope) -> Self {
        Self {
            kind: DatasetAuxKind::ChosenSubsample,
            records: Some(records),
        }
    }
}

/// One fully specified attack: a single value per taxonomy dimension.
///
/// Serialization is canonical: fixed field order, sorted baseline keys,
/// optional fields omitted when absent. Round-trips are byte-stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
    /// Scenario tag: entries spanning several options of one real-world
    /// scenario share a group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub dataset_generation: DatasetGeneration,
    pub privacy_unit: PrivacyUnit,
    pub target_source: TargetSource,
    pub access_to_mechanism: MechanismAccess,
    pub population_aux: PopulationAux,
    pub dataset_aux: DatasetAux,
    pub attack_goal: AttackGoal,
    /// The baseline adversary, written as overrides of the informed
    /// attack's dimensions (commonly `access_to_mechanism: none`).
    pub baseline: BTreeMap<String, String>,
    pub success_metric: String,
}

impl AttackSpec {
    /// The value string of a named dimension, kind-level for dataset_aux.
    pub fn dimension_value(&self, dimension: &str) -> Option<String> {
        match dimension {
            "dataset_generation" => Some(self.dataset_generation.as_str().to_string()),
            "privacy_unit" => Some(self.privacy_unit.as_str().to_string()),
            "target_source" => Some(self.target_source.as_str().to_string()),
            "access_to_mechanism" => Some(self.access_to_mechanism.as_str().to_string()),
            "population_aux" => Some(self.population_aux.as_str().to_string()),
            "dataset_aux" => Some(self.dataset_aux.kind.as_str().to_string()),
            "attack_goal" => Some(self.attack_goal.as_str().to_string()),
            "baseline" => Some(self.baseline_rendered()),
            "success_metric" => Some(self.success_metric.clone()),
            _ => None,
        }
    }

    /// The baseline overrides as one display string.
    pub fn baseline_rendered(&self) -> String {
        let parts: Vec<String> = self
            .baseline
            .iter()
            .map(|(k, v)| format!("{k}: {v}"))
            .collect();
        parts.join("; ")
    }
}

/// Severity of a validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// One validation finding; findings are data, never panics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub dimension: Option<String>,
    pub message: String,
}

impl Finding {
    fn error(dimension: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            dimension: dimension.map(str::to_string),
            message: message.into(),
        }
    }

    fn warning(dimension: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            dimension: dimension.map(str::to_string),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &self.dimension {
            Some(d) => write!(f, "{sev} [{d}]: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

/// Validate a complete spec: non-canonical options are warnings, structural
/// problems (malformed qualifier, malformed baseline) are errors.
pub fn validate(spec: &AttackSpec) -> Vec<Finding> {
    let mut findings = Vec::new();
    if spec.name.trim().is_empty() {
        findings.push(Finding::error(None, "attack name is empty"));
    }

    let extension_checks: [(&str, bool, &str); 7] = [
        (
            "dataset_generation",
            spec.dataset_generation.is_extension(),
            spec.dataset_generation.as_str(),
        ),
        (
            "privacy_unit",
            spec.privacy_unit.is_extension(),
            spec.privacy_unit.as_str(),
        ),
        (
            "target_source",
            spec.target_source.is_extension(),
            spec.target_source.as_str(),
        ),
        (
            "access_to_mechanism",
            spec.access_to_mechanism.is_extension(),
            spec.access_to_mechanism.as_str(),
        ),
        (
            "population_aux",
            spec.population_aux.is_extension(),
            spec.population_aux.as_str(),
        ),
        (
            "dataset_aux",
            spec.dataset_aux.kind.is_extension(),
            spec.dataset_aux.kind.as_str(),
        ),
        (
            "attack_goal",
            spec.attack_goal.is_extension(),
            spec.attack_goal.as_str(),
        ),
    ];
    for (dim, is_ext, value) in extension_checks {
        if is_ext {
            findings.push(Finding::warning(
                Some(dim),
                format!("extension option {value:?} is outside the canonical set"),
            ));
        }
    }

    if spec.dataset_aux.records.is_some() && spec.dataset_aux.kind == DatasetAuxKind::NoAux {
        findings.push(Finding::error(
            Some("dataset_aux"),
            "a records qualifier needs a subsample kind",
        ));
    }

    if spec.success_metric.trim().is_empty() {
        findings.push(Finding::error(
            Some("success_metric"),
            "success metric is empty",
        ));
    }

    if spec.baseline.is_empty() {
        findings.push(Finding::error(
            Some("baseline"),
            "the baseline must override at least one dimension",
        ));
    } else {
        let mut differs = false;
        for (dim, value) in &spec.baseline {
            match spec.dimension_value(dim) {
                None => findings.push(Finding::error(
                    Some("baseline"),
                    format!("{dim:?} is not a taxonomy dimension"),
                )),
                Some(informed) => {
                    if &informed != value {
                        differs = true;
                    }
                    if let Some(info) = DIMENSIONS.iter().find(|d| d.name == dim) {
                        if !info.canonical.is_empty() && !info.canonical.contains(&value.as_str()) {
                            findings.push(Finding::warning(
                                Some("baseline"),
                                format!("override {dim} = {value:?} is outside the canonical set"),
                            ));
                        }
                    }
                }
            }
        }
        if !differs
            && spec
                .baseline
                .keys()
                .all(|d| spec.dimension_value(d).is_some())
        {
            findings.push(Finding::error(
                Some("baseline"),
                "the baseline does not differ from the informed attack in any dimension",
            ));
        }
    }

    findings
}

/// A possibly incomplete spec as read from JSON; every dimension is
/// optional so missing values surface as findings instead of parse errors.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAttackSpec {
    pub name: Option<String>,
    pub citation: Option<String>,
    pub group: Option<String>,
    pub dataset_generation: Option<String>,
    pub privacy_unit: Option<String>,
    pub target_source: Option<String>,
    pub access_to_mechanism: Option<String>,
    pub population_aux: Option<String>,
    pub dataset_aux: Option<RawDatasetAux>,
    pub attack_goal: Option<String>,
    pub baseline: Option<BTreeMap<String, String>>,
    pub success_metric: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDatasetAux {
    pub kind: Option<String>,
    pub records: Option<String>,
}

impl RawAttackSpec {
    /// Check completeness and, when complete, the assembled spec itself.
    pub fn validate(self) -> (Option<AttackSpec>, Vec<Finding>) {
        let mut findings = Vec::new();
        {
            let mut missing = |dim: &str| {
                findings.push(Finding::error(Some(dim), "dimension value is missing"));
            };
            if self.dataset_generation.is_none() {
                missing("dataset_generation");
            }
            if self.privacy_unit.is_none() {
                missing("privacy_unit");
            }
            if self.target_source.is_none() {
                missing("target_source");
            }
            if self.access_to_mechanism.is_none() {
                missing("access_to_mechanism");
            }
            if self.population_aux.is_none() {
                missing("population_aux");
            }
            if self.attack_goal.is_none() {
                missing("attack_goal");
            }
            if self.baseline.is_none() {
                missing("baseline");
            }
            if self.success_metric.is_none() {
                missing("success_metric");
            }
        }
        if self.name.is_none() {
            findings.push(Finding::error(None, "attack name is missing"));
        }
        let aux = match &self.dataset_aux {
            None => {
                findings.push(Finding::error(
                    Some("dataset_aux"),
                    "dimension value is missing",
                ));
                None
            }
            Some(raw) => match &raw.kind {
                None => {
                    findings.push(Finding::error(Some("dataset_aux"), "kind is missing"));
                    None
                }
                Some(kind) => {
                    let records = match raw.records.as_deref() {
                        None => None,
                        Some("full") => Some(RecordScope::Full),
                        Some("partial") => Some(RecordScope::Partial),
                        Some(other) => {
                            findings.push(Finding::error(
                                Some("dataset_aux"),
                                format!("records qualifier must be full or partial, got {other:?}"),
                            ));
                            None
                        }
                    };
                    Some(DatasetAux {
                        kind: DatasetAuxKind::from(kind.clone()),
                        records,
                    })
                }
            },
        };
        if findings.iter().any(Finding::is_error) {
            return (None, findings);
        }
        let spec = AttackSpec {
            name: self.name.unwrap(),
            citation: self.citation,
            group: self.group,
            dataset_generation: DatasetGeneration::from(self.dataset_generation.unwrap()),
            privacy_unit: PrivacyUnit::from(self.privacy_unit.unwrap()),
            target_source: TargetSource::from(self.target_source.unwrap()),
            access_to_mechanism: MechanismAccess::from(self.access_to_mechanism.unwrap()),
            population_aux: PopulationAux::from(self.population_aux.unwrap()),
            dataset_aux: aux.unwrap(),
            attack_goal: AttackGoal::from(self.attack_goal.unwrap()),
            baseline: self.baseline.unwrap(),
            success_metric: self.success_metric.unwrap(),
        };
        findings.extend(validate(&spec));
        (Some(spec), findings)
    }
}
