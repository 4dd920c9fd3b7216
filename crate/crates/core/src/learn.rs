//! Learning concept and role values from observations.
//!
//! An observation is a sentence believed to have been sampled true (or true
//! with some likelihood). Two parameters propagate through the observation
//! tree:
//!
//! * `likelihood` — the chance that the current subterm was true, given the
//!   observation; derived from the parent by conditioning on uncertain
//!   evidence (a likelihood-weighted application of Bayes' rule).
//! * `learning_rate` — how strongly the subterm influenced the observation's
//!   truth; the parent's rate scaled by the swing the subterm causes in the
//!   parent's probability.
//!
//! Marginalisation nodes cut the Bayes-rule chain: there the selection
//! posterior over related individuals both feeds role learning and scales
//! the rate propagated into each related context.
//!
//! Strategies then turn per-node influences into new values. Influences are
//! computed against a snapshot of the model, depth-first left to right, and
//! the updates are applied afterwards.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ast::{substitute_at, AstError, Formula};
use crate::eval::{EvalContext, EvalError, ModelContext};
use crate::model::{BeliefModel, ConceptStrategy, ModelError, RoleDistribution, RoleStrategy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ast(#[from] AstError),
    #[error("{name} {value} is outside [0, 1]")]
    InfluenceRange { name: &'static str, value: f64 },
}

/// The `(likelihood, learning_rate)` pair propagated through an observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Influence {
    likelihood: f64,
    learning_rate: f64,
}

impl Influence {
    /// An observation held to be certainly true at full strength.
    pub const CERTAIN: Influence = Influence {
        likelihood: 1.0,
        learning_rate: 1.0,
    };

    pub fn new(likelihood: f64, learning_rate: f64) -> Result<Self, LearnError> {
        for (name, value) in [("likelihood", likelihood), ("learning rate", learning_rate)] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(LearnError::InfluenceRange { name, value });
            }
        }
        Ok(Influence {
            likelihood,
            learning_rate,
        })
    }

    fn clamped(likelihood: f64, learning_rate: f64) -> Self {
        Influence {
            likelihood: likelihood.clamp(0.0, 1.0),
            learning_rate: learning_rate.clamp(0.0, 1.0),
        }
    }

    pub fn likelihood(&self) -> f64 {
        self.likelihood
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }
}

/// One value change applied by an observation.
#[derive(Debug, Clone, PartialEq)]
pub enum Change {
    Concept {
        individual: String,
        symbol: String,
        old: f64,
        new: f64,
    },
    Role {
        individual: String,
        symbol: String,
        old: RoleDistribution,
        new: RoleDistribution,
    },
}

/// Every strategy invocation an observation produced, in application order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObserveReport {
    pub changes: Vec<Change>,
}

/// Observes `observation` as certainly true about `individual`.
pub fn observe(
    model: &mut BeliefModel,
    individual: &str,
    observation: &Formula,
) -> Result<ObserveReport, LearnError> {
    observe_with(model, individual, observation, Influence::CERTAIN)
}

/// Observes `observation` about `individual` with an explicit starting
/// influence, updating every concept and role that has a learning strategy.
///
/// Influences are computed against the pre-observation model; each strategy
/// invocation is then applied in depth-first, left-to-right order. Symbols
/// without a strategy are traversed but left unchanged.
pub fn observe_with(
    model: &mut BeliefModel,
    individual: &str,
    observation: &Formula,
    influence: Influence,
) -> Result<ObserveReport, LearnError> {
    let snapshot = model.clone();
    let ctx = ModelContext::new(&snapshot, individual)?;
    let mut events = Vec::new();
    propagate(&ctx, observation, influence, &mut events)?;

    let mut report = ObserveReport::default();
    for event in events {
        apply(model, event, &mut report)?;
    }
    debug_assert!(model.validate().is_ok());
    Ok(report)
}

enum Event {
    Concept {
        individual: String,
        symbol: String,
        influence: Influence,
    },
    Role {
        individual: String,
        symbol: String,
        posterior: Vec<(String, f64)>,
        learning_rate: f64,
    },
}

fn propagate(
    ctx: &ModelContext<'_>,
    node: &Formula,
    influence: Influence,
    events: &mut Vec<Event>,
) -> Result<(), LearnError> {
    match node {
        Formula::Always | Formula::Never | Formula::Prob(_) => Ok(()),
        Formula::Atom(symbol) => {
            // Resolve even without a strategy so typos surface.
            ctx.concept(symbol)?;
            if ctx
                .model()
                .concept_strategy(ctx.individual(), symbol)
                .is_some()
            {
                events.push(Event::Concept {
                    individual: ctx.individual().to_string(),
                    symbol: symbol.clone(),
                    influence,
                });
            }
            Ok(())
        }
        Formula::Conditional { .. } => {
            for index in 0..node.child_count() {
                let child_inf = child_influence(ctx, node, index, influence)?;
                propagate(
                    ctx,
                    node.child(index).expect("indexed child"),
                    child_inf,
                    events,
                )?;
            }
            Ok(())
        }
        Formula::Expectation {
            role,
            body,
            condition,
        } => {
            let dist = ctx.role(role)?;
            let posterior =
                role_selection_posterior(ctx, &dist, body, condition, influence.likelihood())?;
            if posterior.is_empty() {
                // Vacuous role: nothing was selected, nothing to learn.
                return Ok(());
            }
            if ctx.model().role_strategy(ctx.individual(), role).is_some() {
                events.push(Event::Role {
                    individual: ctx.individual().to_string(),
                    symbol: role.clone(),
                    posterior: posterior.clone(),
                    learning_rate: influence.learning_rate(),
                });
            }
            for (target, weight) in &posterior {
                let related = ctx.related(target)?;
                let rate = influence.learning_rate() * weight;
                // The body inherits the expectation's likelihood; the
                // condition was selected upon, so it propagates as true.
                propagate(
                    &related,
                    body,
                    Influence::clamped(influence.likelihood(), rate),
                    events,
                )?;
                propagate(&related, condition, Influence::clamped(1.0, rate), events)?;
            }
            Ok(())
        }
        Formula::Exists { role } => {
            // Resolved for error reporting; no strategy consumes it.
            ctx.role(role)?;
            Ok(())
        }
    }
}

/// Influence of the direct child at `child_index` of `parent`.
///
/// `P(parent | child)` is realised by substituting the child with `always`
/// (and with `never` for the complement) and evaluating the result. The
/// child's likelihood then weighs the true and false parent cases by the
/// parent's own likelihood; its rate is the parent's rate scaled by the
/// absolute swing the child causes. Degenerate denominators drop the
/// corresponding term, and a child that is already certain (probability 0
/// or 1) is frozen: its rate is forced to 0.
pub fn child_influence<C: EvalContext>(
    ctx: &C,
    parent: &Formula,
    child_index: usize,
    parent_influence: Influence,
) -> Result<Influence, LearnError> {
    let child = parent.child(child_index).ok_or(AstError::InvalidPath {
        step: 0,
        index: child_index,
    })?;
    let given_true = ctx.eval(&substitute_at(parent, &[child_index], Formula::Always)?)?;
    let given_false = ctx.eval(&substitute_at(parent, &[child_index], Formula::Never)?)?;
    let p_child = ctx.eval(child)?;
    let p_parent = ctx.eval(parent)?;
    let alpha = parent_influence.likelihood();

    let mut likelihood = 0.0;
    if p_parent > 0.0 {
        likelihood += alpha * given_true * p_child / p_parent;
    }
    if p_parent < 1.0 {
        likelihood += (1.0 - alpha) * (1.0 - given_true) * p_child / (1.0 - p_parent);
    }

    let mut rate = parent_influence.learning_rate() * (given_true - given_false).abs();
    if p_child == 0.0 || p_child == 1.0 {
        rate = 0.0;
    }
    Ok(Influence::clamped(likelihood, rate))
}

/// Posterior chance that each non-null individual was the one selected by
/// the role, for a marginalisation `[role](body given condition)` observed
/// with the given likelihood.
///
/// Each prior weight is scaled by the individual's probability of the
/// condition and the likelihood-weighted probability of the body. When the
/// normaliser vanishes the renormalised prior is returned (no information,
/// no update direction); a vacuous role yields an empty posterior.
pub fn role_selection_posterior<C: EvalContext>(
    ctx: &C,
    role: &RoleDistribution,
    body: &Formula,
    condition: &Formula,
    likelihood: f64,
) -> Result<Vec<(String, f64)>, LearnError> {
    let mut factors = Vec::new();
    let mut normaliser = 0.0;
    for (target, weight) in role.non_null() {
        let related = ctx.related(target)?;
        let p_condition = related.eval(condition)?;
        let p_body = related.eval(body)?;
        let factor =
            weight * p_condition * (likelihood * p_body + (1.0 - likelihood) * (1.0 - p_body));
        factors.push((target.to_string(), factor));
        normaliser += factor;
    }
    if normaliser > 0.0 {
        for (_, factor) in &mut factors {
            *factor /= normaliser;
        }
        return Ok(factors);
    }
    let prior_total = role.total_non_null_weight();
    if prior_total == 0.0 {
        return Ok(Vec::new());
    }
    Ok(role
        .non_null()
        .map(|(target, weight)| (target.to_string(), weight / prior_total))
        .collect())
}

/// Weighted-sum concept update: `v' = r * likelihood + (1 - r) * v` with
/// `r` the propagated rate times the strategy's multiplier.
pub fn direct_concept_update(current: f64, multiplier: f64, influence: Influence) -> f64 {
    let rate = influence.learning_rate() * multiplier;
    (rate * influence.likelihood() + (1.0 - rate) * current).clamp(0.0, 1.0)
}

/// Moves a role toward the selection posterior: each non-null weight becomes
/// `r * posterior * (1 - null) + (1 - r) * current`; the null weight is kept
/// and the result renormalised.
pub fn bayes_role_update(
    role: &RoleDistribution,
    posterior: &[(String, f64)],
    learning_rate: f64,
) -> RoleDistribution {
    if learning_rate == 0.0 {
        // A zero rate must be an exact no-op; renormalisation would
        // otherwise drift the weights by rounding.
        return role.clone();
    }
    let null_weight = role.null_weight();
    let posterior_of = |target: &str| {
        posterior
            .iter()
            .find(|(t, _)| t == target)
            .map_or(0.0, |(_, q)| *q)
    };
    let mut updated = role.clone();
    let weights: Vec<f64> = role
        .entries()
        .iter()
        .map(|entry| match &entry.target {
            None => entry.weight,
            Some(target) => {
                learning_rate * posterior_of(target) * (1.0 - null_weight)
                    + (1.0 - learning_rate) * entry.weight
            }
        })
        .collect();
    updated.set_weights(&weights);
    updated.renormalize();
    updated
}

/// Decayed running-mean state for one statistically learnt concept.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticalState {
    sum: f64,
    weight: f64,
    decay: f64,
    decay_growth: f64,
    initial: f64,
}

impl StatisticalState {
    /// Seeds the running mean with the current value at one observation's
    /// worth of weight, so the prior matters but is not sticky.
    pub fn seeded(initial: f64, decay_rate: f64, decay_rate_for_decay_rate: f64) -> Self {
        StatisticalState {
            sum: initial,
            weight: 1.0,
            decay: decay_rate,
            decay_growth: decay_rate_for_decay_rate,
            initial,
        }
    }

    pub fn value(&self) -> f64 {
        if self.weight > 0.0 {
            (self.sum / self.weight).clamp(0.0, 1.0)
        } else {
            self.initial
        }
    }
}

/// Folds one influence into the running mean and returns the new value.
/// The decay rate itself then decays toward 1, so early observations are
/// discounted more than later ones.
pub fn statistical_concept_update(state: &mut StatisticalState, influence: Influence) -> f64 {
    if influence.learning_rate() > 0.0 {
        // A weightless observation neither adds evidence nor discounts
        // history; skipping the fold keeps the value exactly unchanged.
        state.sum = state.decay * state.sum + influence.learning_rate() * influence.likelihood();
        state.weight = state.decay * state.weight + influence.learning_rate();
    }
    state.decay = 1.0 - (1.0 - state.decay) * state.decay_growth;
    state.value()
}

/// Decayed running mean of selection posteriors for one statistically
/// learnt role.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleStatisticalState {
    sums: BTreeMap<String, f64>,
    decay: f64,
    decay_growth: f64,
}

impl RoleStatisticalState {
    /// Seeds the per-target running sums with the renormalised prior.
    pub fn seeded(
        role: &RoleDistribution,
        decay_rate: f64,
        decay_rate_for_decay_rate: f64,
    ) -> Self {
        let total = role.total_non_null_weight();
        let sums = role
            .non_null()
            .map(|(target, weight)| {
                let seed = if total > 0.0 { weight / total } else { 0.0 };
                (target.to_string(), seed)
            })
            .collect();
        RoleStatisticalState {
            sums,
            decay: decay_rate,
            decay_growth: decay_rate_for_decay_rate,
        }
    }
}

/// Folds one posterior into the running role mean and returns the updated
/// distribution; the null weight is preserved.
pub fn statistical_role_update(
    state: &mut RoleStatisticalState,
    role: &RoleDistribution,
    posterior: &[(String, f64)],
    learning_rate: f64,
) -> RoleDistribution {
    if learning_rate == 0.0 {
        state.decay = 1.0 - (1.0 - state.decay) * state.decay_growth;
        return role.clone();
    }
    for sum in state.sums.values_mut() {
        *sum *= state.decay;
    }
    for (target, q) in posterior {
        *state.sums.entry(target.clone()).or_insert(0.0) += learning_rate * q;
    }
    state.decay = 1.0 - (1.0 - state.decay) * state.decay_growth;

    let total: f64 = state.sums.values().sum();
    if total <= 0.0 {
        return role.clone();
    }
    let null_weight = role.null_weight();
    let mut updated = role.clone();
    let weights: Vec<f64> = role
        .entries()
        .iter()
        .map(|entry| match &entry.target {
            None => entry.weight,
            Some(target) => {
                state.sums.get(target).copied().unwrap_or(0.0) / total * (1.0 - null_weight)
            }
        })
        .collect();
    updated.set_weights(&weights);
    updated.renormalize();
    updated
}

fn apply(
    model: &mut BeliefModel,
    event: Event,
    report: &mut ObserveReport,
) -> Result<(), LearnError> {
    match event {
        Event::Concept {
            individual,
            symbol,
            influence,
        } => {
            let strategy = model
                .concept_strategy(&individual, &symbol)
                .cloned()
                .expect("event only recorded for registered strategies");
            let old = model.concept_value(&individual, &symbol)?;
            let new = match strategy {
                ConceptStrategy::Direct { learning_rate } => {
                    direct_concept_update(old, learning_rate, influence)
                }
                ConceptStrategy::Statistical { .. } => {
                    let state = model
                        .concept_state_mut(&individual, &symbol)
                        .expect("statistical strategies carry state");
                    statistical_concept_update(state, influence)
                }
            };
            model.set_concept_value(&individual, &symbol, new)?;
            report.changes.push(Change::Concept {
                individual,
                symbol,
                old,
                new,
            });
        }
        Event::Role {
            individual,
            symbol,
            posterior,
            learning_rate,
        } => {
            let strategy = model
                .role_strategy(&individual, &symbol)
                .cloned()
                .expect("event only recorded for registered strategies");
            let old = model.role_distribution(&individual, &symbol)?.clone();
            let new = match strategy {
                RoleStrategy::Bayes => bayes_role_update(&old, &posterior, learning_rate),
                RoleStrategy::Statistical { .. } => {
                    let state = model
                        .role_state_mut(&individual, &symbol)
                        .expect("statistical strategies carry state");
                    statistical_role_update(state, &old, &posterior, learning_rate)
                }
            };
            model.set_role_distribution(&individual, &symbol, new.clone())?;
            report.changes.push(Change::Role {
                individual,
                symbol,
                old,
                new,
            });
        }
    }
    Ok(())
}
