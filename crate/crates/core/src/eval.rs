//! Exact recursive evaluation of sentence truth probabilities, plus a
//! Monte Carlo sampling estimator used to validate it.
//!
//! Every occurrence of a concept or role is an independent sampling, which
//! is what makes the recursion exact: subsentences never share draws, so
//! each node's probability follows from its children's probabilities alone.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ast::Formula;
use crate::model::{BeliefModel, ModelError, RoleDistribution};

/// Attempts at sampling a satisfying related individual before a
/// marginalisation falls back to vacuous truth.
const CONDITION_SAMPLING_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Model(#[from] ModelError),
    /// Failures from contexts not backed by a [`BeliefModel`].
    #[error("{0}")]
    Context(String),
}

/// Supplies concept and role values during evaluation.
///
/// A `(model, individual)` pair is the usual context ([`ModelContext`]), but
/// anything resolving symbols can serve. Evaluation dispatches through
/// [`EvalContext::eval`], so a context may intercept or redirect how
/// sentences are evaluated; the default method applies the standard rules.
pub trait EvalContext: Sized {
    /// The value of a named concept in this context.
    fn concept(&self, symbol: &str) -> Result<f64, EvalError>;

    /// The distribution of a named role in this context.
    fn role(&self, symbol: &str) -> Result<RoleDistribution, EvalError>;

    /// The context of a related individual, entered when a marginalisation
    /// selects it.
    fn related(&self, individual: &str) -> Result<Self, EvalError>;

    /// Probability that `formula` samples true in this context.
    fn eval(&self, formula: &Formula) -> Result<f64, EvalError> {
        eval_in(self, formula)
    }
}

/// Probability that `formula` samples true in `ctx`. Always in [0, 1].
pub fn evaluate<C: EvalContext>(ctx: &C, formula: &Formula) -> Result<f64, EvalError> {
    ctx.eval(formula)
}

fn eval_in<C: EvalContext>(ctx: &C, formula: &Formula) -> Result<f64, EvalError> {
    match formula {
        Formula::Always => Ok(1.0),
        Formula::Never => Ok(0.0),
        Formula::Prob(p) => Ok(*p),
        Formula::Atom(symbol) => ctx.concept(symbol),
        Formula::Conditional {
            cond,
            if_yes,
            if_no,
        } => {
            let p_cond = ctx.eval(cond)?;
            Ok(p_cond * ctx.eval(if_yes)? + (1.0 - p_cond) * ctx.eval(if_no)?)
        }
        Formula::Expectation {
            role,
            body,
            condition,
        } => {
            let dist = ctx.role(role)?;
            // P(body and condition), with the conjunction desugared as usual.
            let conjunction = (**body).clone().and((**condition).clone());
            let mut numerator = 0.0;
            let mut denominator = 0.0;
            for (target, weight) in dist.non_null() {
                let related = ctx.related(target)?;
                numerator += weight * related.eval(&conjunction)?;
                denominator += weight * related.eval(condition)?;
            }
            // No selectable individual satisfying the condition: vacuously
            // true. The zero test is exact on purpose; weights and concept
            // values are exact inputs.
            if denominator == 0.0 {
                Ok(1.0)
            } else {
                Ok((numerator / denominator).clamp(0.0, 1.0))
            }
        }
        Formula::Exists { role } => Ok(1.0 - ctx.role(role)?.null_weight()),
    }
}

/// Evaluation context for one individual of a [`BeliefModel`].
#[derive(Debug, Clone, Copy)]
pub struct ModelContext<'a> {
    model: &'a BeliefModel,
    individual: &'a str,
}

impl<'a> ModelContext<'a> {
    pub fn new(model: &'a BeliefModel, individual: &str) -> Result<Self, EvalError> {
        let individual = model.name_key(individual)?;
        Ok(ModelContext { model, individual })
    }

    pub fn model(&self) -> &'a BeliefModel {
        self.model
    }

    pub fn individual(&self) -> &'a str {
        self.individual
    }
}

impl<'a> EvalContext for ModelContext<'a> {
    fn concept(&self, symbol: &str) -> Result<f64, EvalError> {
        Ok(self.model.concept_value(self.individual, symbol)?)
    }

    fn role(&self, symbol: &str) -> Result<RoleDistribution, EvalError> {
        Ok(self
            .model
            .role_distribution(self.individual, symbol)?
            .clone())
    }

    fn related(&self, individual: &str) -> Result<Self, EvalError> {
        ModelContext::new(self.model, individual)
    }
}

/// Estimates the truth probability of `formula` from `samples` independent
/// boolean samplings. Deterministic for a fixed `seed`.
///
/// This is a genuinely independent implementation of the semantics: every
/// atom occurrence is its own Bernoulli draw, marginalisation draws a
/// related individual and rejection-samples its condition, and `exists`
/// samples against the null weight. It exists to cross-check [`evaluate`].
pub fn monte_carlo_estimate<C: EvalContext>(
    ctx: &C,
    formula: &Formula,
    samples: usize,
    seed: u64,
) -> Result<f64, EvalError> {
    assert!(samples >= 1, "need at least one sample");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        if sample_once(ctx, formula, &mut rng)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}

fn sample_once<C: EvalContext>(
    ctx: &C,
    formula: &Formula,
    rng: &mut ChaCha8Rng,
) -> Result<bool, EvalError> {
    match formula {
        Formula::Always => Ok(true),
        Formula::Never => Ok(false),
        Formula::Prob(p) => Ok(rng.random::<f64>() < *p),
        Formula::Atom(symbol) => Ok(rng.random::<f64>() < ctx.concept(symbol)?),
        Formula::Conditional {
            cond,
            if_yes,
            if_no,
        } => {
            if sample_once(ctx, cond, rng)? {
                sample_once(ctx, if_yes, rng)
            } else {
                sample_once(ctx, if_no, rng)
            }
        }
        Formula::Expectation {
            role,
            body,
            condition,
        } => {
            let dist = ctx.role(role)?;
            if dist.is_vacuous() {
                return Ok(true);
            }
            for _ in 0..CONDITION_SAMPLING_CAP {
                let target = dist
                    .sample_non_null(rng)
                    .expect("non-vacuous role has non-null weight");
                let related = ctx.related(target)?;
                if sample_once(&related, condition, rng)? {
                    return sample_once(&related, body, rng);
                }
            }
            // The condition essentially never holds; treat the expectation
            // as vacuously true, matching the exact semantics.
            Ok(true)
        }
        Formula::Exists { role } => Ok(rng.random::<f64>() >= ctx.role(role)?.null_weight()),
    }
}
