//! Aleatoric description logic: probabilistic sentences evaluated against
//! belief models, with learning from observations.
//!
//! Truth values are probabilities, and every occurrence of a concept or
//! role in a sentence is an independent sampling of it. That independence
//! is the load-bearing property: queries evaluate exactly by structural
//! recursion ([`eval`]), with no solver, and observations decompose into
//! per-symbol influences ([`learn`]) by the same recursion.
//!
//! * [`ast`] — sentence trees and the sugar connectives;
//! * [`parser`] — the text syntax;
//! * [`distributions`] — distribution-threshold concept sources;
//! * [`model`] — belief models (individuals, concepts, roles) and file I/O;
//! * [`eval`] — exact evaluation plus a Monte Carlo cross-check;
//! * [`learn`] — observation propagation and the learning strategies;
//! * [`demo`] — the anonymised-messages demonstration experiments.

pub mod ast;
pub mod demo;
pub mod distributions;
pub mod eval;
pub mod learn;
pub mod model;
pub mod parser;

pub use ast::{substitute_at, subterm_at, Formula, Path};
pub use eval::{evaluate, monte_carlo_estimate, EvalContext, EvalError, ModelContext};
pub use learn::{observe, observe_with, Influence, LearnError, ObserveReport};
pub use model::{BeliefModel, ModelBuilder, ModelError, RoleDistribution, RoleEntry};
pub use parser::{parse, ParseError};
