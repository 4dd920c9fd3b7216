//! Aleatoric description logic sentences as immutable trees.
//!
//! Sentences are built from seven primitive node kinds. The familiar logical
//! connectives (`and`, `or`, `not`, `implies`) are constructor-level sugar
//! that expands to ternary conditionals, so evaluation and learning only
//! ever see the primitives. Because every occurrence of a symbol is an
//! independent sampling, trees are not simplified beyond that desugaring.

use std::fmt;

use thiserror::Error;

/// Names reserved by the text syntax; not usable as concept or role symbols.
pub const KEYWORDS: [&str; 4] = ["always", "never", "given", "exists"];

/// True when `s` can name a concept or role: `[A-Za-z_][A-Za-z0-9_]*` and
/// not a reserved keyword.
pub fn is_valid_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !KEYWORDS.contains(&s)
}

/// A sequence of child indices addressing a subterm.
///
/// `Conditional` children are `[cond, if_yes, if_no]`; `Expectation`
/// children are `[body, condition]`. Role names are not children.
pub type Path = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AstError {
    #[error("`{kind}` takes {expected}")]
    Arity {
        kind: &'static str,
        expected: &'static str,
    },
    #[error("path step {step} addresses child {index}, which does not exist")]
    InvalidPath { step: usize, index: usize },
}

/// An aleatoric description logic sentence.
///
/// The `Display` form is the canonical text syntax accepted by
/// [`crate::parser::parse`]; printing and re-parsing yields a structurally
/// equal tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    /// The constant true (100%).
    Always,
    /// The constant false (0%).
    Never,
    /// A fixed probability, e.g. a coin flip at 0.5.
    Prob(f64),
    /// One independent sampling of a named concept in the current context.
    Atom(String),
    /// Ternary `(cond ? if_yes : if_no)`: samples `cond`, then behaves as
    /// `if_yes` or `if_no`.
    Conditional {
        cond: Box<Formula>,
        if_yes: Box<Formula>,
        if_no: Box<Formula>,
    },
    /// Marginalisation `[role](body given condition)` over the individuals
    /// related through `role`.
    Expectation {
        role: String,
        body: Box<Formula>,
        condition: Box<Formula>,
    },
    /// The chance that `role` selects a non-null individual.
    Exists { role: String },
}

impl Formula {
    /// A sampling of the named concept. Panics if `name` is not a valid
    /// symbol; use the parser for untrusted input.
    pub fn atom(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(is_valid_symbol(&name), "invalid concept symbol `{name}`");
        Formula::Atom(name)
    }

    /// A constant probability. Panics outside [0, 1]; use the parser for
    /// untrusted input.
    pub fn prob(p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
        Formula::Prob(p)
    }

    pub fn conditional(cond: Formula, if_yes: Formula, if_no: Formula) -> Self {
        Formula::Conditional {
            cond: Box::new(cond),
            if_yes: Box::new(if_yes),
            if_no: Box::new(if_no),
        }
    }

    pub fn expectation(role: impl Into<String>, body: Formula, condition: Formula) -> Self {
        let role = role.into();
        assert!(is_valid_symbol(&role), "invalid role symbol `{role}`");
        Formula::Expectation {
            role,
            body: Box::new(body),
            condition: Box::new(condition),
        }
    }

    /// `[role](body)`, the expectation with a vacuous condition.
    pub fn expect(role: impl Into<String>, body: Formula) -> Self {
        Formula::expectation(role, body, Formula::Always)
    }

    pub fn exists(role: impl Into<String>) -> Self {
        let role = role.into();
        assert!(is_valid_symbol(&role), "invalid role symbol `{role}`");
        Formula::Exists { role }
    }

    /// The existential written through expectation: `!([role](never given body))`.
    pub fn exists_via_expect(role: impl Into<String>, body: Formula) -> Self {
        Formula::expectation(role, Formula::Never, body).negate()
    }

    /// Conjunction, desugared to `(self ? other : never)`.
    pub fn and(self, other: Formula) -> Self {
        Formula::conditional(self, other, Formula::Never)
    }

    /// Disjunction, desugared to `(self ? always : other)`.
    pub fn or(self, other: Formula) -> Self {
        Formula::conditional(self, Formula::Always, other)
    }

    /// Implication, desugared to `(self ? other : always)`.
    pub fn implies(self, other: Formula) -> Self {
        Formula::conditional(self, other, Formula::Always)
    }

    /// Complement, desugared to `(self ? never : always)`.
    pub fn negate(self) -> Self {
        Formula::conditional(self, Formula::Never, Formula::Always)
    }

    pub fn child_count(&self) -> usize {
        match self {
            Formula::Conditional { .. } => 3,
            Formula::Expectation { .. } => 2,
            _ => 0,
        }
    }

    pub fn child(&self, index: usize) -> Option<&Formula> {
        match (self, index) {
            (Formula::Conditional { cond, .. }, 0) => Some(cond),
            (Formula::Conditional { if_yes, .. }, 1) => Some(if_yes),
            (Formula::Conditional { if_no, .. }, 2) => Some(if_no),
            (Formula::Expectation { body, .. }, 0) => Some(body),
            (Formula::Expectation { condition, .. }, 1) => Some(condition),
            _ => None,
        }
    }

    fn child_mut(&mut self, index: usize) -> Option<&mut Formula> {
        match (self, index) {
            (Formula::Conditional { cond, .. }, 0) => Some(cond),
            (Formula::Conditional { if_yes, .. }, 1) => Some(if_yes),
            (Formula::Conditional { if_no, .. }, 2) => Some(if_no),
            (Formula::Expectation { body, .. }, 0) => Some(body),
            (Formula::Expectation { condition, .. }, 1) => Some(condition),
            _ => None,
        }
    }
}

/// Sugar connectives recognised by [`build_abbreviation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abbreviation {
    And,
    Or,
    Not,
    Implies,
    Expect,
    ExistsViaExpect,
}

/// Builds an abbreviated connective from dynamic operands, checking arity.
///
/// `And`/`Or`/`Implies` take two formulas; `Not` takes one; `Expect` and
/// `ExistsViaExpect` take a role plus one formula.
pub fn build_abbreviation(
    kind: Abbreviation,
    role: Option<&str>,
    first: Formula,
    second: Option<Formula>,
) -> Result<Formula, AstError> {
    match (kind, role, second) {
        (Abbreviation::And, None, Some(b)) => Ok(first.and(b)),
        (Abbreviation::Or, None, Some(b)) => Ok(first.or(b)),
        (Abbreviation::Implies, None, Some(b)) => Ok(first.implies(b)),
        (Abbreviation::Not, None, None) => Ok(first.negate()),
        (Abbreviation::Expect, Some(role), None) => Ok(Formula::expect(role, first)),
        (Abbreviation::ExistsViaExpect, Some(role), None) => {
            Ok(Formula::exists_via_expect(role, first))
        }
        (Abbreviation::And, ..) => Err(AstError::Arity {
            kind: "and",
            expected: "two formulas and no role",
        }),
        (Abbreviation::Or, ..) => Err(AstError::Arity {
            kind: "or",
            expected: "two formulas and no role",
        }),
        (Abbreviation::Implies, ..) => Err(AstError::Arity {
            kind: "implies",
            expected: "two formulas and no role",
        }),
        (Abbreviation::Not, ..) => Err(AstError::Arity {
            kind: "not",
            expected: "one formula and no role",
        }),
        (Abbreviation::Expect, ..) => Err(AstError::Arity {
            kind: "expect",
            expected: "a role and one formula",
        }),
        (Abbreviation::ExistsViaExpect, ..) => Err(AstError::Arity {
            kind: "exists_via_expect",
            expected: "a role and one formula",
        }),
    }
}

/// The subterm of `f` addressed by `path`.
pub fn subterm_at<'a>(f: &'a Formula, path: &[usize]) -> Result<&'a Formula, AstError> {
    let mut current = f;
    for (step, &index) in path.iter().enumerate() {
        current = current
            .child(index)
            .ok_or(AstError::InvalidPath { step, index })?;
    }
    Ok(current)
}

/// A copy of `f` with the subterm at `path` replaced; `f` is unchanged.
pub fn substitute_at(
    f: &Formula,
    path: &[usize],
    replacement: Formula,
) -> Result<Formula, AstError> {
    let mut out = f.clone();
    let mut current = &mut out;
    for (step, &index) in path.iter().enumerate() {
        current = current
            .child_mut(index)
            .ok_or(AstError::InvalidPath { step, index })?;
    }
    *current = replacement;
    Ok(out)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Always => write!(f, "always"),
            Formula::Never => write!(f, "never"),
            Formula::Prob(p) => write!(f, "{p}"),
            Formula::Atom(name) => write!(f, "{name}"),
            Formula::Conditional {
                cond,
                if_yes,
                if_no,
            } => write!(f, "({cond} ? {if_yes} : {if_no})"),
            Formula::Expectation {
                role,
                body,
                condition,
            } => write!(f, "[{role}]({body} given {condition})"),
            Formula::Exists { role } => write!(f, "exists({role})"),
        }
    }
}
