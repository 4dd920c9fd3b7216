//! Shared helpers for the integration and acceptance suites: seeded random
//! model/formula generators and an independent normal-tail oracle.
#![allow(dead_code)]

use adl::ast::Formula;
use adl::model::{BeliefModel, ConceptStrategy, RoleEntry, RoleStrategy};
use rand::Rng;

pub const CONCEPTS: [&str; 4] = ["a", "b", "c", "d"];
pub const ROLES: [&str; 2] = ["r", "s"];

/// A random valid model over at most four individuals. Every individual
/// carries every concept and role symbol so generated formulas always
/// resolve. With `with_learning`, concepts and some roles get strategies.
pub fn random_model<R: Rng>(rng: &mut R, with_learning: bool) -> BeliefModel {
    let count = rng.random_range(1..=4);
    let names: Vec<String> = (0..count).map(|i| format!("x{i}")).collect();
    let mut builder = BeliefModel::builder();
    for name in &names {
        let mut individual = builder.individual(name);
        for concept in CONCEPTS {
            individual.concept(concept, rng.random::<f64>());
            if with_learning {
                let strategy = if rng.random_bool(0.5) {
                    ConceptStrategy::Direct {
                        learning_rate: rng.random_range(0.05..=1.0),
                    }
                } else {
                    ConceptStrategy::Statistical {
                        decay_rate: rng.random_range(0.5..=1.0),
                        decay_rate_for_decay_rate: rng.random_range(0.5..=1.0),
                    }
                };
                individual.learn_concept(concept, strategy);
            }
        }
        for role in ROLES {
            let entries = random_role_entries(rng, &names);
            individual.role(role, entries);
            if with_learning && rng.random_bool(0.5) {
                let strategy = if rng.random_bool(0.5) {
                    RoleStrategy::Bayes
                } else {
                    RoleStrategy::Statistical {
                        decay_rate: rng.random_range(0.5..=1.0),
                        decay_rate_for_decay_rate: rng.random_range(0.5..=1.0),
                    }
                };
                individual.learn_role(role, strategy);
            }
        }
    }
    builder.build().expect("generated models are valid")
}

fn random_role_entries<R: Rng>(rng: &mut R, names: &[String]) -> Vec<RoleEntry> {
    // Occasionally empty: marginalising over it is vacuous.
    if rng.random_bool(0.05) {
        return Vec::new();
    }
    let mut raw: Vec<(Option<String>, f64)> = Vec::new();
    for name in names {
        if rng.random_bool(0.7) {
            raw.push((Some(name.clone()), rng.random_range(0.05..1.0)));
        }
    }
    if raw.is_empty() || rng.random_bool(0.4) {
        raw.push((None, rng.random_range(0.05..1.0)));
    }
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    raw.into_iter()
        .map(|(target, weight)| RoleEntry {
            target,
            weight: weight / total,
        })
        .collect()
}

/// A random formula of at most the given depth, over the fixed symbol pool.
///
/// Expectation conditions are kept likely-to-hold so that rejection
/// sampling in the Monte Carlo oracle stays fast.
pub fn random_formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    if depth == 0 {
        return random_leaf(rng);
    }
    match rng.random_range(0..100) {
        0..45 => Formula::conditional(
            random_formula(rng, depth - 1),
            random_formula(rng, depth - 1),
            random_formula(rng, depth - 1),
        ),
        45..75 => {
            let role = ROLES[rng.random_range(0..ROLES.len())];
            let condition = match rng.random_range(0..4) {
                0 => Formula::atom(CONCEPTS[rng.random_range(0..CONCEPTS.len())]),
                1 => Formula::prob(rng.random_range(0.3..=1.0)),
                _ => Formula::Always,
            };
            Formula::expectation(role, random_formula(rng, depth - 1), condition)
        }
        75..85 => Formula::exists(ROLES[rng.random_range(0..ROLES.len())]),
        _ => random_leaf(rng),
    }
}

fn random_leaf<R: Rng>(rng: &mut R) -> Formula {
    match rng.random_range(0..8) {
        0 => Formula::Always,
        1 => Formula::Never,
        2 => Formula::prob(rng.random::<f64>()),
        3 => Formula::prob([0.0, 0.5, 1.0][rng.random_range(0..3)]),
        _ => Formula::atom(CONCEPTS[rng.random_range(0..CONCEPTS.len())]),
    }
}

/// Flat snapshot of every concept value and role weight, for exact
/// before/after comparisons.
pub fn value_snapshot(model: &BeliefModel) -> Vec<f64> {
    let mut values = Vec::new();
    for (_, individual) in model.individuals() {
        for (_, source) in individual.concepts() {
            values.push(source.value());
        }
        for (_, role) in individual.roles() {
            for entry in role.entries() {
                values.push(entry.weight);
            }
        }
    }
    values
}

/// Asserts the model invariants that learning must preserve.
pub fn assert_model_invariants(model: &BeliefModel) {
    for (name, individual) in model.individuals() {
        for (symbol, source) in individual.concepts() {
            let value = source.value();
            assert!(
                (0.0..=1.0).contains(&value),
                "{name}.{symbol} out of range: {value}"
            );
        }
        for (symbol, role) in individual.roles() {
            let mut total = 0.0;
            for entry in role.entries() {
                assert!(
                    (0.0..=1.0).contains(&entry.weight),
                    "{name}.{symbol} weight out of range: {}",
                    entry.weight
                );
                total += entry.weight;
            }
            if !role.is_empty() {
                assert!(
                    (total - 1.0).abs() <= 1e-9,
                    "{name}.{symbol} weights sum to {total}"
                );
            }
        }
    }
    model.validate().expect("model invariants hold");
}

/// `P(X > cutoff)` for a normal distribution by adaptive Simpson quadrature
/// of the density — independent of any library CDF.
pub fn normal_tail_oracle(mean: f64, std: f64, cutoff: f64) -> f64 {
    let z = (cutoff - mean) / std;
    if z < 0.0 {
        return 1.0 - standard_normal_upper_tail(-z);
    }
    standard_normal_upper_tail(z)
}

fn standard_normal_upper_tail(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let upper = 45.0f64.max(z + 1.0);
    adaptive_simpson(&pdf, z, upper, 1e-14, 60)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
