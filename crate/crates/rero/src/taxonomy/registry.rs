//! The shipped attack registry.
//!
//! Fully specified entries cover the two reconstruction games this crate
//! can execute and the three case-study actors of a national birth-data
//! release (each spanning its multi-valued crafter dimensions as separate
//! entries under one group tag). Externally published attacks whose
//! dimension values are not recoverable from their descriptions ship as
//! citation-only stubs.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::{
    AttackGoal, AttackSpec, DatasetAux, DatasetGeneration, MechanismAccess, PopulationAux,
    PrivacyUnit, RecordScope, TargetSource,
};
use crate::error::{Error, Result};

/// A named attack known only by its citation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CitationStub {
    pub name: String,
    pub citation: String,
}

/// A collection of attack specs plus citation stubs; names are unique
/// across both.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackRegistry {
    entries: Vec<AttackSpec>,
    stubs: Vec<CitationStub>,
}

impl AttackRegistry {
    pub fn new(entries: Vec<AttackSpec>, stubs: Vec<CitationStub>) -> Result<Self> {
        let mut seen = HashSet::new();
        for name in entries
            .iter()
            .map(|e| &e.name)
            .chain(stubs.iter().map(|s| &s.name))
        {
            if !seen.insert(name.clone()) {
                return Err(Error::config(format!("duplicate registry name {name:?}")));
            }
        }
        Ok(Self { entries, stubs })
    }

    pub fn entries(&self) -> &[AttackSpec] {
        &self.entries
    }

    pub fn stubs(&self) -> &[CitationStub] {
        &self.stubs
    }

    pub fn get(&self, name: &str) -> Option<&AttackSpec> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// The distinct group tags in first-appearance order.
    pub fn groups(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for e in &self.entries {
            if let Some(g) = e.group.as_deref() {
                if !out.contains(&g) {
                    out.push(g);
                }
            }
        }
        out
    }

    /// Resolve selectors to entries. A selector matches an entry name or a
    /// group tag (expanding to every entry of the group, in registry
    /// order). Order is preserved, duplicates are dropped, and an unknown
    /// selector is an error.
    pub fn select(&self, selectors: &[String]) -> Result<Vec<&AttackSpec>> {
        let mut out: Vec<&AttackSpec> = Vec::new();
        for sel in selectors {
            let mut matched = false;
            if let Some(spec) = self.get(sel) {
                if !out.iter().any(|e| e.name == spec.name) {
                    out.push(spec);
                }
                matched = true;
            } else {
                for spec in &self.entries {
                    if spec.group.as_deref() == Some(sel.as_str()) {
                        if !out.iter().any(|e| e.name == spec.name) {
                            out.push(spec);
                        }
                        matched = true;
                    }
                }
            }
            if !matched {
                return Err(Error::config(format!(
                    "unknown attack or group {sel:?} in selection"
                )));
            }
        }
        Ok(out)
    }

    /// Add extra entries (e.g. parsed from user files).
    pub fn with_entries(mut self, extra: Vec<AttackSpec>) -> Result<Self> {
        self.entries.extend(extra);
        Self::new(self.entries, self.stubs)
    }
}

fn baseline_no_access() -> BTreeMap<String, String> {
    BTreeMap::from([("access_to_mechanism".to_string(), "none".to_string())])
}

/// The informed reconstruction game: the attacker holds all but one record
/// and reconstructs the drawn remainder from a black-box output.
fn informed_reconstruction() -> AttackSpec {
    AttackSpec {
        name: "rero".to_string(),
        citation: Some("Balle, Cherubin & Hayes (2022)".to_string()),
        group: None,
        dataset_generation: DatasetGeneration::Chosen,
        privacy_unit: PrivacyUnit::Individual,
        target_source: TargetSource::Drawn,
        access_to_mechanism: MechanismAccess::Blackbox,
        population_aux: PopulationAux::DescriptionOfD,
        dataset_aux: DatasetAux::chosen(RecordScope::Full),
        attack_goal: AttackGoal::Reconstruction,
        baseline: baseline_no_access(),
        success_metric: "exact_match_probability".to_string(),
    }
}

/// The distributional reconstruction game: dataset drawn, target drawn, no
/// dataset-level knowledge at all.
fn distributional_reconstruction() -> AttackSpec {
    AttackSpec {
        name: "distrero".to_string(),
        citation: None,
        group: None,
        dataset_generation: DatasetGeneration::Drawn,
        privacy_unit: PrivacyUnit::Individual,
        target_source: TargetSource::Drawn,
        access_to_mechanism: MechanismAccess::Blackbox,
        population_aux: PopulationAux::DescriptionOfD,
        dataset_aux: DatasetAux::none(),
        attack_goal: AttackGoal::Reconstruction,
        baseline: baseline_no_access(),
        success_metric: "exact_match_probability".to_string(),
    }
}

/// Expand one case-study actor over the crafter dimensions the scenario
/// spans: both privacy units (birth event, mother) and both target sources,
/// times the actor's goals.
fn case_study_actor(
    group: &str,
    dataset_aux: DatasetAux,
    goals: &[AttackGoal],
    metric_for: impl Fn(&AttackGoal) -> &'static str,
) -> Vec<AttackSpec> {
    let mut out = Vec::new();
    for unit in [PrivacyUnit::Event, PrivacyUnit::Individual] {
        for target in [TargetSource::Chosen, TargetSource::Drawn] {
            for goal in goals {
                let mut name = format!("{group}-{}-{}", unit.as_str(), target.as_str());
                if goals.len() > 1 {
                    name = format!("{name}-{}", goal.as_str());
                }
                out.push(AttackSpec {
                    name,
                    citation: None,
                    group: Some(group.to_string()),
                    dataset_generation: DatasetGeneration::Drawn,
                    privacy_unit: unit.clone(),
                    target_source: target.clone(),
                    // The attacker only ever sees the released dataset and
                    // the published quality evaluations.
                    access_to_mechanism: MechanismAccess::Extension("released_dataset".to_string()),
                    population_aux: PopulationAux::Extension(
                        "published_statistical_queries".to_string(),
                    ),
                    dataset_aux: dataset_aux.clone(),
                    attack_goal: goal.clone(),
                    baseline: baseline_no_access(),
                    success_metric: metric_for(goal).to_string(),
                });
            }
        }
    }
    out
}

/// The shipped registry: the two executable reconstruction games, the
/// three case-study actors, and citation stubs for externally published
/// attacks whose dimension placements are only available graphically.
pub fn builtin_registry() -> AttackRegistry {
    let mut entries = vec![informed_reconstruction(), distributional_reconstruction()];

    // A health management organization holding complete medical records for
    // its members, aiming to reconstruct the rows it does not have.
    entries.extend(case_study_actor(
        "hmo",
        DatasetAux::chosen(RecordScope::Full),
        &[AttackGoal::Reconstruction],
        |_| "mse",
    ));
    // A baby and toddler retail chain that can infer some columns from
    // purchase histories and wants the opaque attributes of its customers.
    entries.extend(case_study_actor(
        "retailer",
        DatasetAux::chosen(RecordScope::Partial),
        &[AttackGoal::AttributeInference],
        |_| "exact_match_probability",
    ));
    // A curious onlooker with no dataset-level knowledge and several goals.
    entries.extend(case_study_actor(
        "curious_individual",
        DatasetAux::none(),
        &[
            AttackGoal::SinglingOut,
            AttackGoal::AttributeInference,
            AttackGoal::Reconstruction,
        ],
        |goal| match goal {
            AttackGoal::Reconstruction => "mse",
            _ => "exact_match_probability",
        },
    ));

    let stubs = vec![
        CitationStub {
            name: "intermediate_poison_attack".to_string(),
            citation: "Nasr, Song, Thakurta, Papernot & Carlini (2021)".to_string(),
        },
        CitationStub {
            name: "label_inference_attack".to_string(),
            citation: "Dick, Dwork, Kearns, Liu, Roth, Vietri & Wu (2023)".to_string(),
        },
        CitationStub {
            name: "predicate_singling_out".to_string(),
            citation: "Cohen & Nissim (2020)".to_string(),
        },
        CitationStub {
            name: "confidence_ranked_reconstruction".to_string(),
            citation: "Dick, Dwork, Kearns, Liu, Roth, Vietri & Wu (2022)".to_string(),
        },
        CitationStub {
            name: "gradient_based_reconstruction".to_string(),
            citation: "Hayes, Mahloujifar & Balle (2023)".to_string(),
        },
    ];

    AttackRegistry::new(entries, stubs).expect("builtin names are unique")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_registry_shape() {
        let reg = builtin_registry();
        assert!(reg.entries().len() >= 5, "entries: {}", reg.entries().len());
        assert_eq!(reg.stubs().len(), 5);
        assert_eq!(reg.groups(), vec!["hmo", "retailer", "curious_individual"]);
    }

    #[test]
    fn key_entry_values() {
        let reg = builtin_registry();
        assert_eq!(reg.get("distrero").unwrap().dataset_aux, DatasetAux::none());
        let hmo = reg.get("hmo-event-chosen").unwrap();
        assert_eq!(hmo.dataset_aux.kind.as_str(), "chosen_subsample");
        assert_eq!(hmo.dataset_aux.records, Some(RecordScope::Full));
        let retailer = reg.get("retailer-event-chosen").unwrap();
        assert_eq!(retailer.attack_goal, AttackGoal::AttributeInference);
        assert_eq!(retailer.dataset_aux.records, Some(RecordScope::Partial));
        let rero = reg.get("rero").unwrap();
        assert_eq!(rero.dataset_generation, DatasetGeneration::Chosen);
        assert_eq!(rero.target_source, TargetSource::Drawn);
    }

    #[test]
    fn selection_by_name_and_group() {
        let reg = builtin_registry();
        let one = reg.select(&["rero".to_string()]).unwrap();
        assert_eq!(one.len(), 1);
        let hmo = reg.select(&["hmo".to_string()]).unwrap();
        assert_eq!(hmo.len(), 4);
        assert!(hmo.iter().all(|e| e.group.as_deref() == Some("hmo")));
        // Duplicates collapse.
        let both = reg
            .select(&["hmo".to_string(), "hmo-event-chosen".to_string()])
            .unwrap();
        assert_eq!(both.len(), 4);
        assert!(reg.select(&["nope".to_string()]).is_err());
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let reg = builtin_registry();
        let dup = reg.entries()[0].clone();
        assert!(AttackRegistry::new(vec![dup.clone(), dup], vec![]).is_err());
    }

    #[test]
    fn curious_individual_spans_goals() {
        let reg = builtin_registry();
        let curious = reg.select(&["curious_individual".to_string()]).unwrap();
        assert_eq!(curious.len(), 12);
        let goals: HashSet<&str> = curious.iter().map(|e| e.attack_goal.as_str()).collect();
        assert_eq!(
            goals,
            HashSet::from(["singling_out", "attribute_inference", "reconstruction"])
        );
    }
}
