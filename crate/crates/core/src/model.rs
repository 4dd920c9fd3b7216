//! Belief models: named individuals carrying concept values, role
//! distributions, and learning configuration.
//!
//! A model is an ontological knowledge base. Concepts are probabilities in
//! [0, 1], supplied either as stored constants or as distribution
//! thresholds. Roles are mutually exclusive distributions over related
//! individuals, optionally including the null individual ("no relation").
//!
//! Models load from and save to a declarative JSON file; `templates` plus
//! `extends` provide inheritance without host-language subclassing. A
//! [`ModelBuilder`] mirrors the file format for programmatic construction.

use std::collections::BTreeMap;

use rand::Rng;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::ast::is_valid_symbol;
use crate::distributions::ContinuousDist;
use crate::learn::{RoleStatisticalState, StatisticalState};

/// Tolerance for role weight sums on load and after learning updates.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model file is not valid: {0}")]
    Schema(String),
    #[error("individual `{individual}` extends unknown template `{template}`")]
    UnknownTemplate {
        individual: String,
        template: String,
    },
    #[error("template inheritance cycle through `{template}`")]
    TemplateCycle { template: String },
    #[error("`{0}` is not a valid individual name")]
    InvalidIndividualName(String),
    #[error("`{symbol}` on `{individual}` is not a valid symbol")]
    InvalidSymbol { individual: String, symbol: String },
    #[error("concept `{individual}.{symbol}` is invalid: {reason}")]
    InvalidConcept {
        individual: String,
        symbol: String,
        reason: String,
    },
    #[error("role `{individual}.{role}` is invalid: {source}")]
    InvalidRole {
        individual: String,
        role: String,
        source: RoleError,
    },
    #[error("role `{individual}.{role}` targets unknown individual `{target}`")]
    DanglingTarget {
        individual: String,
        role: String,
        target: String,
    },
    #[error("unknown individual `{0}`")]
    UnknownIndividual(String),
    #[error("individual `{individual}` has no concept `{symbol}`")]
    UnknownConcept { individual: String, symbol: String },
    #[error("individual `{individual}` has no role `{symbol}`")]
    UnknownRole { individual: String, symbol: String },
    #[error("concept `{individual}.{symbol}` cannot be learnt: {reason}")]
    NotLearnable {
        individual: String,
        symbol: String,
        reason: String,
    },
    #[error("learning configuration for `{individual}.{symbol}` is invalid: {reason}")]
    InvalidStrategy {
        individual: String,
        symbol: String,
        reason: String,
    },
    #[error("probability {value} for `{context}` is outside [0, 1]")]
    ProbabilityRange { context: String, value: f64 },
}

/// Validation failures local to one role distribution.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoleError {
    #[error("weight {0} is not a probability")]
    WeightRange(f64),
    #[error("weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("target `{0}` appears more than once")]
    DuplicateTarget(String),
    #[error("more than one null entry")]
    MultipleNull,
}

/// One entry of a role distribution; `target: None` is the null individual.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleEntry {
    pub target: Option<String>,
    pub weight: f64,
}

impl RoleEntry {
    pub fn to(target: impl Into<String>, weight: f64) -> Self {
        RoleEntry {
            target: Some(target.into()),
            weight,
        }
    }

    pub fn null(weight: f64) -> Self {
        RoleEntry {
            target: None,
            weight,
        }
    }
}

/// A mutually exclusive probability distribution over related individuals
/// plus, optionally, the null individual.
///
/// Non-empty distributions sum to 1 within [`WEIGHT_SUM_TOLERANCE`]. An
/// empty distribution is legal and behaves vacuously under marginalisation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoleDistribution {
    entries: Vec<RoleEntry>,
}

impl RoleDistribution {
    pub fn try_new(entries: Vec<RoleEntry>) -> Result<Self, RoleError> {
        let dist = RoleDistribution { entries };
        dist.check()?;
        Ok(dist)
    }

    pub fn empty() -> Self {
        RoleDistribution::default()
    }

    fn check(&self) -> Result<(), RoleError> {
        let mut seen = Vec::new();
        let mut nulls = 0;
        let mut sum = 0.0;
        for entry in &self.entries {
            if !entry.weight.is_finite() || !(0.0..=1.0).contains(&entry.weight) {
                return Err(RoleError::WeightRange(entry.weight));
            }
            sum += entry.weight;
            match &entry.target {
                None => nulls += 1,
                Some(target) => {
                    if seen.contains(&target) {
                        return Err(RoleError::DuplicateTarget(target.clone()));
                    }
                    seen.push(target);
                }
            }
        }
        if nulls > 1 {
            return Err(RoleError::MultipleNull);
        }
        if !self.entries.is_empty() && (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(RoleError::WeightSum(sum));
        }
        Ok(())
    }

    pub fn entries(&self) -> &[RoleEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Weight of the null entry, 0 when absent.
    pub fn null_weight(&self) -> f64 {
        self.entries
            .iter()
            .find(|e| e.target.is_none())
            .map_or(0.0, |e| e.weight)
    }

    /// The non-null entries as `(target, weight)` pairs.
    pub fn non_null(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries
            .iter()
            .filter_map(|e| e.target.as_deref().map(|t| (t, e.weight)))
    }

    pub fn total_non_null_weight(&self) -> f64 {
        self.non_null().map(|(_, w)| w).sum()
    }

    /// True when marginalising over this role is vacuous: there is no
    /// non-null weight to select from.
    pub fn is_vacuous(&self) -> bool {
        self.total_non_null_weight() == 0.0
    }

    /// Weight of `target`, 0 when absent.
    pub fn weight_of(&self, target: &str) -> f64 {
        self.non_null()
            .find(|(t, _)| *t == target)
            .map_or(0.0, |(_, w)| w)
    }

    /// Draws a non-null target with probability proportional to its weight,
    /// or `None` when there is no non-null weight.
    pub fn sample_non_null<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&str> {
        let total = self.total_non_null_weight();
        if total <= 0.0 {
            return None;
        }
        let mut pick = rng.random::<f64>() * total;
        let mut last = None;
        for (target, weight) in self.non_null() {
            if weight == 0.0 {
                continue;
            }
            last = Some(target);
            if pick < weight {
                return Some(target);
            }
            pick -= weight;
        }
        last
    }

    /// Rescales weights to sum to exactly 1; used after learning updates to
    /// cancel floating-point drift.
    pub(crate) fn renormalize(&mut self) {
        let total: f64 = self.entries.iter().map(|e| e.weight).sum();
        if total > 0.0 {
            for entry in &mut self.entries {
                entry.weight /= total;
            }
        }
    }

    pub(crate) fn set_weights(&mut self, weights: &[f64]) {
        debug_assert_eq!(weights.len(), self.entries.len());
        for (entry, &w) in self.entries.iter_mut().zip(weights) {
            entry.weight = w;
        }
    }
}

/// Where a concept's value comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ConceptSource {
    /// A stored probability; learnable when a strategy is configured.
    Constant(f64),
    /// Tail probability `P(X > cutoff)` of a distribution; never learnable.
    Threshold { dist: ContinuousDist, cutoff: f64 },
}

impl ConceptSource {
    pub fn value(&self) -> f64 {
        match self {
            ConceptSource::Constant(p) => *p,
            ConceptSource::Threshold { dist, cutoff } => dist.prob_greater_than(*cutoff),
        }
    }

    pub fn is_learnable(&self) -> bool {
        matches!(self, ConceptSource::Constant(_))
    }
}

/// Learning strategy configured for a concept.
#[derive(Debug, Clone, PartialEq)]
pub enum ConceptStrategy {
    /// Weighted-sum update toward the likelihood. `learning_rate` is an
    /// extra multiplier in (0, 1] applied to the propagated rate.
    Direct { learning_rate: f64 },
    /// Decayed running mean of observed likelihoods.
    Statistical {
        decay_rate: f64,
        decay_rate_for_decay_rate: f64,
    },
}

/// Learning strategy configured for a role.
#[derive(Debug, Clone, PartialEq)]
pub enum RoleStrategy {
    /// Moves the distribution toward the selection posterior.
    Bayes,
    /// Decayed running mean of selection posteriors.
    Statistical {
        decay_rate: f64,
        decay_rate_for_decay_rate: f64,
    },
}

/// One individual: concept sources, role distributions, and the learning
/// configuration and state attached to them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Individual {
    concepts: BTreeMap<String, ConceptSource>,
    roles: BTreeMap<String, RoleDistribution>,
    concept_learning: BTreeMap<String, ConceptStrategy>,
    role_learning: BTreeMap<String, RoleStrategy>,
    concept_states: BTreeMap<String, StatisticalState>,
    role_states: BTreeMap<String, RoleStatisticalState>,
}

impl Individual {
    pub fn concepts(&self) -> impl Iterator<Item = (&str, &ConceptSource)> {
        self.concepts.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn roles(&self) -> impl Iterator<Item = (&str, &RoleDistribution)> {
        self.roles.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn concept(&self, symbol: &str) -> Option<&ConceptSource> {
        self.concepts.get(symbol)
    }

    pub fn role(&self, symbol: &str) -> Option<&RoleDistribution> {
        self.roles.get(symbol)
    }

    pub fn concept_strategy(&self, symbol: &str) -> Option<&ConceptStrategy> {
        self.concept_learning.get(symbol)
    }

    pub fn role_strategy(&self, symbol: &str) -> Option<&RoleStrategy> {
        self.role_learning.get(symbol)
    }
}

/// The knowledge base: a set of uniquely named individuals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BeliefModel {
    individuals: BTreeMap<String, Individual>,
}

impl BeliefModel {
    pub fn builder() -> ModelBuilder {
        ModelBuilder::default()
    }

    /// Parses and validates a JSON model file.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: file::FileModel =
            serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
        file::build(file)
    }

    /// Serialises the model back to the JSON file format. Loading the
    /// result reproduces the model.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&file::dump(self))
            .expect("model serialisation cannot fail");
        text.push('\n');
        text
    }

    pub fn individuals(&self) -> impl Iterator<Item = (&str, &Individual)> {
        self.individuals.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Individual names in sorted order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.individuals.keys().map(|k| k.as_str())
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.individuals.contains_key(name)
    }

    pub fn individual(&self, name: &str) -> Result<&Individual, ModelError> {
        self.individuals
            .get(name)
            .ok_or_else(|| ModelError::UnknownIndividual(name.to_string()))
    }

    /// The key owned by the map for `name`; lets contexts borrow names with
    /// the model's lifetime.
    pub(crate) fn name_key(&self, name: &str) -> Result<&str, ModelError> {
        self.individuals
            .get_key_value(name)
            .map(|(k, _)| k.as_str())
            .ok_or_else(|| ModelError::UnknownIndividual(name.to_string()))
    }

    /// Current value of a concept, whatever its source.
    pub fn concept_value(&self, individual: &str, symbol: &str) -> Result<f64, ModelError> {
        let source = self
            .individual(individual)?
            .concept(symbol)
            .ok_or_else(|| ModelError::UnknownConcept {
                individual: individual.to_string(),
                symbol: symbol.to_string(),
            })?;
        Ok(source.value())
    }

    pub fn role_distribution(
        &self,
        individual: &str,
        symbol: &str,
    ) -> Result<&RoleDistribution, ModelError> {
        self.individual(individual)?
            .role(symbol)
            .ok_or_else(|| ModelError::UnknownRole {
                individual: individual.to_string(),
                symbol: symbol.to_string(),
            })
    }

    pub fn concept_strategy(&self, individual: &str, symbol: &str) -> Option<&ConceptStrategy> {
        self.individuals.get(individual)?.concept_strategy(symbol)
    }

    pub fn role_strategy(&self, individual: &str, symbol: &str) -> Option<&RoleStrategy> {
        self.individuals.get(individual)?.role_strategy(symbol)
    }

    pub(crate) fn concept_state_mut(
        &mut self,
        individual: &str,
        symbol: &str,
    ) -> Option<&mut StatisticalState> {
        self.individuals
            .get_mut(individual)?
            .concept_states
            .get_mut(symbol)
    }

    pub(crate) fn role_state_mut(
        &mut self,
        individual: &str,
        symbol: &str,
    ) -> Option<&mut RoleStatisticalState> {
        self.individuals
            .get_mut(individual)?
            .role_states
            .get_mut(symbol)
    }

    /// Overwrites a stored constant concept value. Returns the old value.
    pub fn set_concept_value(
        &mut self,
        individual: &str,
        symbol: &str,
        value: f64,
    ) -> Result<f64, ModelError> {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(ModelError::ProbabilityRange {
                context: format!("{individual}.{symbol}"),
                value,
            });
        }
        let entry = self
            .individuals
            .get_mut(individual)
            .ok_or_else(|| ModelError::UnknownIndividual(individual.to_string()))?
            .concepts
            .get_mut(symbol)
            .ok_or_else(|| ModelError::UnknownConcept {
                individual: individual.to_string(),
                symbol: symbol.to_string(),
            })?;
        match entry {
            ConceptSource::Constant(current) => {
                let old = *current;
                *current = value;
                Ok(old)
            }
            ConceptSource::Threshold { .. } => Err(ModelError::NotLearnable {
                individual: individual.to_string(),
                symbol: symbol.to_string(),
                reason: "distribution-backed concepts are read-only".to_string(),
            }),
        }
    }

    /// Replaces a role distribution after validating it against the model.
    /// Returns the old distribution.
    pub fn set_role_distribution(
        &mut self,
        individual: &str,
        symbol: &str,
        dist: RoleDistribution,
    ) -> Result<RoleDistribution, ModelError> {
        dist.check().map_err(|source| ModelError::InvalidRole {
            individual: individual.to_string(),
            role: symbol.to_string(),
            source,
        })?;
        for (target, _) in dist.non_null() {
            if !self.contains(target) {
                return Err(ModelError::DanglingTarget {
                    individual: individual.to_string(),
                    role: symbol.to_string(),
                    target: target.to_string(),
                });
            }
        }
        let slot = self
            .individuals
            .get_mut(individual)
            .ok_or_else(|| ModelError::UnknownIndividual(individual.to_string()))?
            .roles
            .get_mut(symbol)
            .ok_or_else(|| ModelError::UnknownRole {
                individual: individual.to_string(),
                symbol: symbol.to_string(),
            })?;
        Ok(std::mem::replace(slot, dist))
    }

    /// Re-checks every model invariant; learning updates must preserve them.
    pub fn validate(&self) -> Result<(), ModelError> {
        validate_individuals(&self.individuals)
    }
}

fn probability_in_range(value: f64) -> bool {
    value.is_finite() && (0.0..=1.0).contains(&value)
}

fn validate_individuals(individuals: &BTreeMap<String, Individual>) -> Result<(), ModelError> {
    for (name, individual) in individuals {
        if name.is_empty() {
            return Err(ModelError::InvalidIndividualName(name.clone()));
        }
        for (symbol, source) in &individual.concepts {
            if !is_valid_symbol(symbol) {
                return Err(ModelError::InvalidSymbol {
                    individual: name.clone(),
                    symbol: symbol.clone(),
                });
            }
            match source {
                ConceptSource::Constant(p) => {
                    if !probability_in_range(*p) {
                        return Err(ModelError::ProbabilityRange {
                            context: format!("{name}.{symbol}"),
                            value: *p,
                        });
                    }
                }
                ConceptSource::Threshold { cutoff, .. } => {
                    if !cutoff.is_finite() {
                        return Err(ModelError::InvalidConcept {
                            individual: name.clone(),
                            symbol: symbol.clone(),
                            reason: format!("cutoff {cutoff} is not finite"),
                        });
                    }
                }
            }
        }
        for (symbol, role) in &individual.roles {
            if !is_valid_symbol(symbol) {
                return Err(ModelError::InvalidSymbol {
                    individual: name.clone(),
                    symbol: symbol.clone(),
                });
            }
            role.check().map_err(|source| ModelError::InvalidRole {
                individual: name.clone(),
                role: symbol.clone(),
                source,
            })?;
            for (target, _) in role.non_null() {
                if !individuals.contains_key(target) {
                    return Err(ModelError::DanglingTarget {
                        individual: name.clone(),
                        role: symbol.clone(),
                        target: target.to_string(),
                    });
                }
            }
        }
        for (symbol, strategy) in &individual.concept_learning {
            let source =
                individual
                    .concepts
                    .get(symbol)
                    .ok_or_else(|| ModelError::UnknownConcept {
                        individual: name.clone(),
                        symbol: symbol.clone(),
                    })?;
            if !source.is_learnable() {
                return Err(ModelError::NotLearnable {
                    individual: name.clone(),
                    symbol: symbol.clone(),
                    reason: "distribution-backed concepts are read-only".to_string(),
                });
            }
            let check = |label: &str, v: f64| -> Result<(), ModelError> {
                if !v.is_finite() || v <= 0.0 || v > 1.0 {
                    return Err(ModelError::InvalidStrategy {
                        individual: name.clone(),
                        symbol: symbol.clone(),
                        reason: format!("{label} must be in (0, 1], got {v}"),
                    });
                }
                Ok(())
            };
            match strategy {
                ConceptStrategy::Direct { learning_rate } => {
                    check("learning_rate", *learning_rate)?
                }
                ConceptStrategy::Statistical {
                    decay_rate,
                    decay_rate_for_decay_rate,
                } => {
                    check("decay_rate", *decay_rate)?;
                    check("decay_rate_for_decay_rate", *decay_rate_for_decay_rate)?;
                }
            }
        }
        for (symbol, strategy) in &individual.role_learning {
            if !individual.roles.contains_key(symbol) {
                return Err(ModelError::UnknownRole {
                    individual: name.clone(),
                    symbol: symbol.clone(),
                });
            }
            if let RoleStrategy::Statistical {
                decay_rate,
                decay_rate_for_decay_rate,
            } = strategy
            {
                for (label, v) in [
                    ("decay_rate", *decay_rate),
                    ("decay_rate_for_decay_rate", *decay_rate_for_decay_rate),
                ] {
                    if !v.is_finite() || v <= 0.0 || v > 1.0 {
                        return Err(ModelError::InvalidStrategy {
                            individual: name.clone(),
                            symbol: symbol.clone(),
                            reason: format!("{label} must be in (0, 1], got {v}"),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Validates the assembled individuals and seeds the mutable learning state
/// for every statistical strategy.
fn assemble(mut individuals: BTreeMap<String, Individual>) -> Result<BeliefModel, ModelError> {
    validate_individuals(&individuals)?;
    for individual in individuals.values_mut() {
        individual.concept_states.clear();
        individual.role_states.clear();
        for (symbol, strategy) in &individual.concept_learning {
            if let ConceptStrategy::Statistical {
                decay_rate,
                decay_rate_for_decay_rate,
            } = strategy
            {
                let initial = individual.concepts[symbol].value();
                individual.concept_states.insert(
                    symbol.clone(),
                    StatisticalState::seeded(initial, *decay_rate, *decay_rate_for_decay_rate),
                );
            }
        }
        for (symbol, strategy) in &individual.role_learning {
            if let RoleStrategy::Statistical {
                decay_rate,
                decay_rate_for_decay_rate,
            } = strategy
            {
                individual.role_states.insert(
                    symbol.clone(),
                    RoleStatisticalState::seeded(
                        &individual.roles[symbol],
                        *decay_rate,
                        *decay_rate_for_decay_rate,
                    ),
                );
            }
        }
    }
    Ok(BeliefModel { individuals })
}

/// Incrementally assembles a [`BeliefModel`]; validation runs at
/// [`ModelBuilder::build`] so declaration order does not matter.
#[derive(Debug, Default)]
pub struct ModelBuilder {
    individuals: BTreeMap<String, Individual>,
}

impl ModelBuilder {
    /// Creates the individual if needed and returns a builder scoped to it.
    pub fn individual(&mut self, name: impl Into<String>) -> IndividualBuilder<'_> {
        IndividualBuilder {
            draft: self.individuals.entry(name.into()).or_default(),
        }
    }

    pub fn build(self) -> Result<BeliefModel, ModelError> {
        assemble(self.individuals)
    }
}

pub struct IndividualBuilder<'a> {
    draft: &'a mut Individual,
}

impl IndividualBuilder<'_> {
    pub fn concept(&mut self, symbol: impl Into<String>, value: f64) -> &mut Self {
        self.draft
            .concepts
            .insert(symbol.into(), ConceptSource::Constant(value));
        self
    }

    pub fn threshold_concept(
        &mut self,
        symbol: impl Into<String>,
        dist: ContinuousDist,
        cutoff: f64,
    ) -> &mut Self {
        self.draft
            .concepts
            .insert(symbol.into(), ConceptSource::Threshold { dist, cutoff });
        self
    }

    pub fn role(&mut self, symbol: impl Into<String>, entries: Vec<RoleEntry>) -> &mut Self {
        self.draft
            .roles
            .insert(symbol.into(), RoleDistribution { entries });
        self
    }

    pub fn learn_concept(
        &mut self,
        symbol: impl Into<String>,
        strategy: ConceptStrategy,
    ) -> &mut Self {
        self.draft.concept_learning.insert(symbol.into(), strategy);
        self
    }

    pub fn learn_role(&mut self, symbol: impl Into<String>, strategy: RoleStrategy) -> &mut Self {
        self.draft.role_learning.insert(symbol.into(), strategy);
        self
    }
}

/// JSON file schema and the conversions to and from [`BeliefModel`].
mod file {
    use super::*;

    fn unique_string_map<'de, D, V>(deserializer: D) -> Result<BTreeMap<String, V>, D::Error>
    where
        D: Deserializer<'de>,
        V: Deserialize<'de>,
    {
        struct UniqueMapVisitor<V>(std::marker::PhantomData<V>);

        impl<'de, V: Deserialize<'de>> Visitor<'de> for UniqueMapVisitor<V> {
            type Value = BTreeMap<String, V>;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("an object with unique keys")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut out = BTreeMap::new();
                while let Some((key, value)) = access.next_entry::<String, V>()? {
                    if out.insert(key.clone(), value).is_some() {
                        return Err(serde::de::Error::custom(format!("duplicate key `{key}`")));
                    }
                }
                Ok(out)
            }
        }

        deserializer.deserialize_map(UniqueMapVisitor(std::marker::PhantomData))
    }

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub(super) struct FileModel {
        #[serde(
            default,
            deserialize_with = "unique_string_map",
            skip_serializing_if = "BTreeMap::is_empty"
        )]
        templates: BTreeMap<String, IndividualSpec>,
        #[serde(default, deserialize_with = "unique_string_map")]
        individuals: BTreeMap<String, IndividualSpec>,
    }

    #[derive(Serialize, Deserialize, Clone, Default)]
    #[serde(deny_unknown_fields)]
    struct IndividualSpec {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        extends: Option<String>,
        #[serde(
            default,
            deserialize_with = "unique_string_map",
            skip_serializing_if = "BTreeMap::is_empty"
        )]
        concepts: BTreeMap<String, ConceptSpec>,
        #[serde(
            default,
            deserialize_with = "unique_string_map",
            skip_serializing_if = "BTreeMap::is_empty"
        )]
        roles: BTreeMap<String, RoleSpec>,
        #[serde(
            default,
            deserialize_with = "unique_string_map",
            skip_serializing_if = "BTreeMap::is_empty"
        )]
        learn: BTreeMap<String, ConceptStrategySpec>,
    }

    #[derive(Serialize, Deserialize, Clone)]
    #[serde(untagged)]
    enum ConceptSpec {
        Value(f64),
        Threshold(ThresholdSpec),
    }

    #[derive(Serialize, Deserialize, Clone)]
    #[serde(tag = "type", rename_all = "snake_case")]
    enum ThresholdSpec {
        NormalGt { mean: f64, std: f64, cutoff: f64 },
        UniformGt { lo: f64, hi: f64, cutoff: f64 },
    }

    #[derive(Serialize, Deserialize, Clone)]
    #[serde(deny_unknown_fields)]
    struct RoleSpec {
        entries: Vec<RoleEntrySpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        learn: Option<RoleStrategySpec>,
    }

    #[derive(Serialize, Deserialize, Clone)]
    #[serde(deny_unknown_fields)]
    struct RoleEntrySpec {
        to: Option<String>,
        prob: f64,
    }

    fn default_rate() -> f64 {
        1.0
    }

    #[derive(Serialize, Deserialize, Clone)]
    #[serde(tag = "strategy", rename_all = "snake_case")]
    enum ConceptStrategySpec {
        Direct {
            #[serde(default = "default_rate")]
            learning_rate: f64,
        },
        Statistical {
            #[serde(default = "default_rate")]
            decay_rate: f64,
            #[serde(default = "default_rate")]
            decay_rate_for_decay_rate: f64,
        },
    }

    #[derive(Serialize, Deserialize, Clone)]
    #[serde(tag = "strategy", rename_all = "snake_case")]
    enum RoleStrategySpec {
        Bayes,
        Statistical {
            #[serde(default = "default_rate")]
            decay_rate: f64,
            #[serde(default = "default_rate")]
            decay_rate_for_decay_rate: f64,
        },
    }

    /// Merges `extends` chains; the child overrides the parent per symbol.
    fn resolve(
        owner: &str,
        spec: &IndividualSpec,
        templates: &BTreeMap<String, IndividualSpec>,
        chain: &mut Vec<String>,
    ) -> Result<IndividualSpec, ModelError> {
        let mut base = match &spec.extends {
            None => IndividualSpec::default(),
            Some(template) => {
                if chain.iter().any(|t| t == template) {
                    return Err(ModelError::TemplateCycle {
                        template: template.clone(),
                    });
                }
                let parent =
                    templates
                        .get(template)
                        .ok_or_else(|| ModelError::UnknownTemplate {
                            individual: owner.to_string(),
                            template: template.clone(),
                        })?;
                chain.push(template.clone());
                let resolved = resolve(owner, parent, templates, chain)?;
                chain.pop();
                resolved
            }
        };
        base.concepts.extend(spec.concepts.clone());
        base.roles.extend(spec.roles.clone());
        base.learn.extend(spec.learn.clone());
        base.extends = None;
        Ok(base)
    }

    fn concept_source(
        individual: &str,
        symbol: &str,
        spec: &ConceptSpec,
    ) -> Result<ConceptSource, ModelError> {
        let invalid = |reason: &dyn std::fmt::Display| ModelError::InvalidConcept {
            individual: individual.to_string(),
            symbol: symbol.to_string(),
            reason: reason.to_string(),
        };
        match spec {
            ConceptSpec::Value(p) => Ok(ConceptSource::Constant(*p)),
            ConceptSpec::Threshold(ThresholdSpec::NormalGt { mean, std, cutoff }) => {
                let dist = ContinuousDist::normal(*mean, *std).map_err(|e| invalid(&e))?;
                Ok(ConceptSource::Threshold {
                    dist,
                    cutoff: *cutoff,
                })
            }
            ConceptSpec::Threshold(ThresholdSpec::UniformGt { lo, hi, cutoff }) => {
                let dist = ContinuousDist::uniform(*lo, *hi).map_err(|e| invalid(&e))?;
                Ok(ConceptSource::Threshold {
                    dist,
                    cutoff: *cutoff,
                })
            }
        }
    }

    pub(super) fn build(file: FileModel) -> Result<BeliefModel, ModelError> {
        let mut individuals = BTreeMap::new();
        for (name, spec) in &file.individuals {
            let resolved = resolve(name, spec, &file.templates, &mut Vec::new())?;
            let mut individual = Individual::default();
            for (symbol, concept) in &resolved.concepts {
                individual
                    .concepts
                    .insert(symbol.clone(), concept_source(name, symbol, concept)?);
            }
            for (symbol, role) in &resolved.roles {
                let entries = role
                    .entries
                    .iter()
                    .map(|e| RoleEntry {
                        target: e.to.clone(),
                        weight: e.prob,
                    })
                    .collect();
                individual
                    .roles
                    .insert(symbol.clone(), RoleDistribution { entries });
                if let Some(learn) = &role.learn {
                    let strategy = match learn {
                        RoleStrategySpec::Bayes => RoleStrategy::Bayes,
                        RoleStrategySpec::Statistical {
                            decay_rate,
                            decay_rate_for_decay_rate,
                        } => RoleStrategy::Statistical {
                            decay_rate: *decay_rate,
                            decay_rate_for_decay_rate: *decay_rate_for_decay_rate,
                        },
                    };
                    individual.role_learning.insert(symbol.clone(), strategy);
                }
            }
            for (symbol, learn) in &resolved.learn {
                let strategy = match learn {
                    ConceptStrategySpec::Direct { learning_rate } => ConceptStrategy::Direct {
                        learning_rate: *learning_rate,
                    },
                    ConceptStrategySpec::Statistical {
                        decay_rate,
                        decay_rate_for_decay_rate,
                    } => ConceptStrategy::Statistical {
                        decay_rate: *decay_rate,
                        decay_rate_for_decay_rate: *decay_rate_for_decay_rate,
                    },
                };
                individual.concept_learning.insert(symbol.clone(), strategy);
            }
            individuals.insert(name.clone(), individual);
        }
        assemble(individuals)
    }

    pub(super) fn dump(model: &BeliefModel) -> FileModel {
        let mut individuals = BTreeMap::new();
        for (name, individual) in &model.individuals {
            let mut spec = IndividualSpec::default();
            for (symbol, source) in &individual.concepts {
                let concept = match source {
                    ConceptSource::Constant(p) => ConceptSpec::Value(*p),
                    ConceptSource::Threshold { dist, cutoff } => {
                        ConceptSpec::Threshold(match dist {
                            ContinuousDist::Normal { mean, std } => ThresholdSpec::NormalGt {
                                mean: *mean,
                                std: *std,
                                cutoff: *cutoff,
                            },
                            ContinuousDist::Uniform { lo, hi } => ThresholdSpec::UniformGt {
                                lo: *lo,
                                hi: *hi,
                                cutoff: *cutoff,
                            },
                        })
                    }
                };
                spec.concepts.insert(symbol.clone(), concept);
            }
            for (symbol, role) in &individual.roles {
                let entries = role
                    .entries
                    .iter()
                    .map(|e| RoleEntrySpec {
                        to: e.target.clone(),
                        prob: e.weight,
                    })
                    .collect();
                let learn = individual.role_learning.get(symbol).map(|s| match s {
                    RoleStrategy::Bayes => RoleStrategySpec::Bayes,
                    RoleStrategy::Statistical {
                        decay_rate,
                        decay_rate_for_decay_rate,
                    } => RoleStrategySpec::Statistical {
                        decay_rate: *decay_rate,
                        decay_rate_for_decay_rate: *decay_rate_for_decay_rate,
                    },
                });
                spec.roles
                    .insert(symbol.clone(), RoleSpec { entries, learn });
            }
            for (symbol, strategy) in &individual.concept_learning {
                let learn = match strategy {
                    ConceptStrategy::Direct { learning_rate } => ConceptStrategySpec::Direct {
                        learning_rate: *learning_rate,
                    },
                    ConceptStrategy::Statistical {
                        decay_rate,
                        decay_rate_for_decay_rate,
                    } => ConceptStrategySpec::Statistical {
                        decay_rate: *decay_rate,
                        decay_rate_for_decay_rate: *decay_rate_for_decay_rate,
                    },
                };
                spec.learn.insert(symbol.clone(), learn);
            }
            individuals.insert(name.clone(), spec);
        }
        FileModel {
            templates: BTreeMap::new(),
            individuals,
        }
    }
}
