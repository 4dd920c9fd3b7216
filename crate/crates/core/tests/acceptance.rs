//! Acceptance suite. Each test checks one release criterion at a pinned
//! tolerance and prints a PASS/FAIL line (visible with `--nocapture`).
//!
//! Everything is seeded; a green run is reproducible bit for bit.

mod common;

use adl::ast::Formula;
use adl::demo::{self, LearningConfig};
use adl::distributions::ContinuousDist;
use adl::learn::{
    bayes_role_update, child_influence, direct_concept_update, observe_with,
    role_selection_posterior, statistical_concept_update, Influence, StatisticalState,
};
use adl::model::{BeliefModel, RoleDistribution, RoleEntry};
use adl::{evaluate, monte_carlo_estimate, ModelContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(number: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("[acceptance] criterion {number} ({name}): {verdict} — {detail}");
}

/// Criterion 1: over 200 random (model, formula) pairs the exact evaluator
/// agrees with the Monte Carlo estimator at 200k samples within 0.01.
#[test]
fn criterion_1_evaluator_matches_monte_carlo_oracle() {
    const PAIRS: usize = 200;
    const SAMPLES: usize = 200_000;
    const TOLERANCE: f64 = 0.01;

    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for pair in 0..PAIRS {
        let model = common::random_model(&mut rng, false);
        let depth = rng.random_range(1..=4);
        let formula = common::random_formula(&mut rng, depth);
        let individual = format!("x{}", rng.random_range(0..model.len()));
        let ctx = ModelContext::new(&model, &individual).unwrap();

        let exact = evaluate(&ctx, &formula).unwrap();
        let estimate = monte_carlo_estimate(&ctx, &formula, SAMPLES, 7_000 + pair as u64).unwrap();
        let diff = (exact - estimate).abs();
        worst = worst.max(diff);
        assert!(
            (0.0..=1.0).contains(&exact),
            "evaluation left [0, 1]: {exact}"
        );
        if diff > TOLERANCE {
            failures.push(format!(
                "pair {pair}: |{exact:.5} - {estimate:.5}| = {diff:.5}"
            ));
        }
    }

    let pass = failures.is_empty();
    report(
        1,
        "evaluator vs Monte Carlo oracle, 200 pairs at 2e5 samples, tol 0.01",
        pass,
        &format!("max |exact - estimate| = {worst:.5}"),
    );
    assert!(pass, "disagreements: {failures:?}");
}

const TABLE_ACCURACY: [(&str, [f64; 10]); 3] = [
    (
        "Bob",
        [76.5, 83.9, 86.3, 91.7, 92.6, 94.7, 95.9, 96.3, 97.5, 97.9],
    ),
    (
        "Alice",
        [71.9, 82.0, 86.4, 89.2, 92.5, 93.1, 94.3, 95.6, 96.6, 97.2],
    ),
    (
        "Jeff",
        [49.7, 56.2, 69.8, 74.7, 79.7, 84.9, 88.0, 90.7, 92.0, 93.6],
    ),
];

/// Criterion 2: the author-prediction sweep at 10k sets per cell lands
/// within 2 percentage points of the reference accuracies for every cell,
/// and accuracy is non-decreasing in the message count up to 1.5pp noise.
#[test]
fn criterion_2_author_prediction_accuracy_table() {
    const SETS_PER_CELL: usize = 10_000;
    const TOLERANCE_PP: f64 = 2.0;
    const MONOTONE_SLACK_PP: f64 = 1.5;

    let model = demo::ground_truth_model();
    let result = demo::run_prediction_experiment(&model, SETS_PER_CELL, 1..=10, 2024).unwrap();

    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (author, expected_row) in TABLE_ACCURACY {
        for (index, expected) in expected_row.iter().enumerate() {
            let k = index + 1;
            let actual = result.accuracy(author, k).unwrap();
            let diff = (actual - expected).abs();
            worst = worst.max(diff);
            if diff > TOLERANCE_PP {
                failures.push(format!("{author}/k={k}: {actual:.1} vs {expected:.1}"));
            }
        }
        for k in 1..10 {
            let here = result.accuracy(author, k).unwrap();
            let next = result.accuracy(author, k + 1).unwrap();
            if next < here - MONOTONE_SLACK_PP {
                failures.push(format!(
                    "{author}: accuracy drops {here:.1} -> {next:.1} from k={k}"
                ));
            }
        }
    }

    let pass = failures.is_empty();
    report(
        2,
        "author prediction accuracy, 30 cells at 10k sets, tol 2.0pp",
        pass,
        &format!("max |cell delta| = {worst:.2}pp"),
    );
    assert!(pass, "cells out of tolerance: {failures:?}");
}

const TABLE_TENDENCIES: [(&str, &str, f64, f64); 9] = [
    ("Bob", "capitalises_first_word", 41.1, 4.6),
    ("Bob", "is_positive", 16.5, 3.3),
    ("Bob", "uses_emoji", 87.3, 3.1),
    ("Alice", "capitalises_first_word", 77.9, 3.8),
    ("Alice", "is_positive", 40.1, 4.4),
    ("Alice", "uses_emoji", 13.7, 3.9),
    ("Jeff", "capitalises_first_word", 50.4, 5.0),
    ("Jeff", "is_positive", 46.6, 5.5),
    ("Jeff", "uses_emoji", 50.3, 7.0),
];

/// Criterion 3: 30 learning trials of 500 observations recover every
/// writing tendency within 5 percentage points of the reference means,
/// with standard deviations between half and twice the reference.
#[test]
fn criterion_3_tendency_learning_table() {
    const MEAN_TOLERANCE_PP: f64 = 5.0;

    let config = LearningConfig {
        trials: 30,
        observations_per_trial: 500,
        messages_per_observation: 2..=4,
        decay_rate: 0.95,
        decay_rate_for_decay_rate: 0.95,
    };
    let result = demo::run_learning_experiment(&config, 2024).unwrap();

    let mut worst_mean = 0.0f64;
    let mut failures = Vec::new();
    for (author, concept, expected_mean, expected_std) in TABLE_TENDENCIES {
        let row = result.row(author, concept).unwrap();
        let diff = (row.mean_pct - expected_mean).abs();
        worst_mean = worst_mean.max(diff);
        if diff > MEAN_TOLERANCE_PP {
            failures.push(format!(
                "{author}.{concept}: mean {:.1} vs {expected_mean:.1}",
                row.mean_pct
            ));
        }
        if row.std_pct < 0.5 * expected_std || row.std_pct > 2.0 * expected_std {
            failures.push(format!(
                "{author}.{concept}: std {:.1} outside [{:.2}, {:.1}]",
                row.std_pct,
                0.5 * expected_std,
                2.0 * expected_std
            ));
        }
    }

    let pass = failures.is_empty();
    report(
        3,
        "tendency learning, 30 trials x 500 observations, mean tol 5.0pp",
        pass,
        &format!("max |mean delta| = {worst_mean:.2}pp"),
    );
    assert!(pass, "tendencies out of tolerance: {failures:?}");
}

/// Criterion 4: the learning formulas reproduce hand-derived values to
/// 1e-12: influence propagation, selection posteriors, and all update rules.
#[test]
fn criterion_4_learning_formulas_match_hand_derived_values() {
    const TOL: f64 = 1e-12;
    let mut checks: Vec<(String, f64, f64)> = Vec::new();
    let mut check = |label: &str, actual: f64, expected: f64| {
        checks.push((label.to_string(), actual, expected));
    };

    // Conjunction a & b with P(a)=0.5, P(b)=0.8 in a two-concept model.
    let mut builder = BeliefModel::builder();
    builder.individual("X").concept("a", 0.5).concept("b", 0.8);
    let model = builder.build().unwrap();
    let ctx = ModelContext::new(&model, "X").unwrap();
    let conj = Formula::atom("a").and(Formula::atom("b"));

    let to_a = child_influence(&ctx, &conj, 0, Influence::CERTAIN).unwrap();
    check(
        "conj child a likelihood",
        to_a.likelihood(),
        0.8 * 0.5 / 0.4,
    );
    check("conj child a rate", to_a.learning_rate(), 0.8);
    let to_b = child_influence(&ctx, &conj, 1, Influence::CERTAIN).unwrap();
    check("conj child b rate", to_b.learning_rate(), 0.5);

    let uncertain = Influence::new(0.5, 0.5).unwrap();
    let mixed = child_influence(&ctx, &conj, 0, uncertain).unwrap();
    check(
        "uncertain parent likelihood",
        mixed.likelihood(),
        0.5 * 1.0 + 0.5 * ((1.0 - 0.8) * 0.5 / (1.0 - 0.4)),
    );
    check("uncertain parent rate", mixed.learning_rate(), 0.5 * 0.8);

    // Branch occurrence (a ? b : b): the if_yes copy matters through P(a).
    let branches = Formula::conditional(Formula::atom("a"), Formula::atom("b"), Formula::atom("b"));
    let to_yes = child_influence(&ctx, &branches, 1, Influence::CERTAIN).unwrap();
    check("branch occurrence rate", to_yes.learning_rate(), 0.5);

    // Selection posterior over {x: 0.5, y: 0.5} with P_x(a)=0.8, P_y(a)=0.2.
    let mut builder = BeliefModel::builder();
    builder
        .individual("owner")
        .role("r", vec![RoleEntry::to("x", 0.5), RoleEntry::to("y", 0.5)]);
    builder.individual("x").concept("a", 0.8);
    builder.individual("y").concept("a", 0.2);
    let role_model = builder.build().unwrap();
    let owner = ModelContext::new(&role_model, "owner").unwrap();
    let role = role_model.role_distribution("owner", "r").unwrap();
    let body = Formula::atom("a");

    let posterior = role_selection_posterior(&owner, role, &body, &Formula::Always, 1.0).unwrap();
    check("posterior x at likelihood 1", posterior[0].1, 0.8);
    check("posterior y at likelihood 1", posterior[1].1, 0.2);
    let complement = role_selection_posterior(&owner, role, &body, &Formula::Always, 0.0).unwrap();
    check("posterior x at likelihood 0", complement[0].1, 0.2);
    let sum: f64 = posterior.iter().map(|(_, q)| q).sum();
    check("posterior normalisation", sum, 1.0);

    // Direct updates.
    check(
        "direct update to certainty",
        direct_concept_update(0.4, 1.0, Influence::CERTAIN),
        1.0,
    );
    check(
        "direct update at half multiplier",
        direct_concept_update(0.5, 0.5, Influence::CERTAIN),
        0.75,
    );
    check(
        "direct update at zero rate",
        direct_concept_update(0.4, 1.0, Influence::new(1.0, 0.0).unwrap()),
        0.4,
    );

    // Bayes role updates.
    let pair =
        RoleDistribution::try_new(vec![RoleEntry::to("x", 0.5), RoleEntry::to("y", 0.5)]).unwrap();
    let q = vec![("x".to_string(), 0.8), ("y".to_string(), 0.2)];
    check(
        "bayes role full rate",
        bayes_role_update(&pair, &q, 1.0).weight_of("x"),
        0.8,
    );
    check(
        "bayes role zero rate",
        bayes_role_update(&pair, &q, 0.0).weight_of("x"),
        0.5,
    );
    check(
        "bayes role half rate",
        bayes_role_update(&pair, &q, 0.5).weight_of("x"),
        0.65,
    );

    // Statistical update from the seeded state.
    let mut state = StatisticalState::seeded(0.5, 0.95, 0.95);
    check(
        "statistical first update",
        statistical_concept_update(&mut state, Influence::CERTAIN),
        1.475 / 1.95,
    );

    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (label, actual, expected) in &checks {
        let diff = (actual - expected).abs();
        worst = worst.max(diff);
        if diff > TOL {
            failures.push(format!("{label}: {actual} vs {expected}"));
        }
    }
    let pass = failures.is_empty();
    report(
        4,
        "exact learning formulas vs hand-derived oracle, tol 1e-12",
        pass,
        &format!("{} checks, max |delta| = {worst:.2e}", checks.len()),
    );
    assert!(pass, "formula mismatches: {failures:?}");
}

/// Criterion 5: the property suites — parser round trip over 1000 random
/// trees, model invariants across 500 random observations, exact
/// non-idempotence, vacuous expectations, and zero-rate no-ops.
#[test]
fn criterion_5_property_suites() {
    let mut failures: Vec<String> = Vec::new();

    // (a) Round trip: parse(print(f)) is structurally identical.
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for case in 0..1_000 {
        let formula = common::random_formula(&mut rng, 6);
        let text = formula.to_string();
        match adl::parse(&text) {
            Ok(parsed) if parsed == formula => {}
            Ok(parsed) => failures.push(format!(
                "round trip {case} changed `{text}` into `{parsed}`"
            )),
            Err(error) => failures.push(format!("round trip {case} failed on `{text}`: {error}")),
        }
    }

    // (b) Influence bounds and model invariants across 500 observations.
    let mut observations = 0;
    while observations < 500 {
        let mut model = common::random_model(&mut rng, true);
        for _ in 0..20 {
            let depth = rng.random_range(1..=3);
            let formula = common::random_formula(&mut rng, depth);
            let individual = format!("x{}", rng.random_range(0..model.len()));
            let influence = Influence::new(rng.random::<f64>(), rng.random::<f64>()).unwrap();
            observe_with(&mut model, &individual, &formula, influence).unwrap();
            common::assert_model_invariants(&model);
            observations += 1;

            // Propagated influences stay within [0, 1] on every child.
            if formula.child_count() > 0 {
                let ctx = ModelContext::new(&model, &individual).unwrap();
                for index in 0..formula.child_count() {
                    let child = child_influence(&ctx, &formula, index, influence).unwrap();
                    if !(0.0..=1.0).contains(&child.likelihood())
                        || !(0.0..=1.0).contains(&child.learning_rate())
                    {
                        failures.push(format!("influence out of bounds on `{formula}`"));
                    }
                }
            }
        }
    }

    // (c) Non-idempotence under independent samplings, exactly.
    for _ in 0..200 {
        let p: f64 = rng.random();
        let mut builder = BeliefModel::builder();
        builder.individual("X").concept("a", p);
        let model = builder.build().unwrap();
        let ctx = ModelContext::new(&model, "X").unwrap();
        let a = || Formula::atom("a");
        let twice = evaluate(&ctx, &a().and(a())).unwrap();
        if twice != p * p {
            failures.push(format!("P(a & a) = {twice} but p*p = {}", p * p));
        }
        let contradiction = evaluate(&ctx, &a().negate().and(a())).unwrap();
        if contradiction != (1.0 - p) * p {
            failures.push(format!("P(!a & a) = {contradiction} for p = {p}"));
        }
    }

    // (d) Vacuous expectations evaluate to exactly 1.
    let mut builder = BeliefModel::builder();
    builder
        .individual("A")
        .concept("a", 0.3)
        .role("only_null", vec![RoleEntry::null(1.0)])
        .role("empty", vec![]);
    let vacuous_model = builder.build().unwrap();
    let ctx = ModelContext::new(&vacuous_model, "A").unwrap();
    for role in ["only_null", "empty"] {
        let f = Formula::expect(role, Formula::atom("a").negate());
        if evaluate(&ctx, &f).unwrap() != 1.0 {
            failures.push(format!("vacuous expectation over `{role}` is not 1"));
        }
    }

    // (e) Observing at learning rate zero changes no value.
    for _ in 0..50 {
        let mut model = common::random_model(&mut rng, true);
        let before = common::value_snapshot(&model);
        let formula = common::random_formula(&mut rng, 3);
        let individual = format!("x{}", rng.random_range(0..model.len()));
        observe_with(
            &mut model,
            &individual,
            &formula,
            Influence::new(1.0, 0.0).unwrap(),
        )
        .unwrap();
        if before != common::value_snapshot(&model) {
            failures.push(format!("zero learning rate changed values via `{formula}`"));
        }
    }

    let pass = failures.is_empty();
    report(
        5,
        "property suites: round trip, invariants, independence, vacuity, no-op",
        pass,
        &format!("{} issues", failures.len()),
    );
    assert!(pass, "property failures: {failures:?}");
}

/// Criterion 6: the normal tail probability matches an independent
/// quadrature oracle to 1e-9.
#[test]
fn criterion_6_normal_tail_against_quadrature_oracle() {
    const TOL: f64 = 1e-9;
    let dist = ContinuousDist::normal(175.0, 6.5).unwrap();
    let actual = dist.prob_greater_than(180.0);
    let expected = common::normal_tail_oracle(175.0, 6.5, 180.0);
    let diff = (actual - expected).abs();

    // The oracle itself must be sane: symmetric at the mean.
    let half = common::normal_tail_oracle(0.0, 1.0, 0.0);
    let oracle_ok = (half - 0.5).abs() < 1e-12;

    let pass = diff <= TOL && oracle_ok;
    report(
        6,
        "normal tail probability vs quadrature oracle, tol 1e-9",
        pass,
        &format!("P(X > 180) = {actual:.12}, oracle {expected:.12}, |delta| = {diff:.2e}"),
    );
    assert!(pass, "tail mismatch: {actual} vs {expected}");
}
