//! Acceptance suite: one test per verification criterion, each printing a
//! pass/fail line with the measured residuals.  The same batteries back
//! the `check` subcommand of the CLI.
//!
//! Run with `cargo test --release -p gkcp2-core --test acceptance`
//! (add `-- --nocapture` to see every line).

use gkcp2_core::check::{run_suite, CheckReport};
use std::collections::HashMap;

const SEED: u64 = 42;

fn report_lines(report: &CheckReport) -> String {
    report
        .items
        .iter()
        .map(|i| {
            format!(
                "[{}] {}  residual {:.3e}  tol {:.1e}  ({})",
                if i.pass { "PASS" } else { "FAIL" },
                i.id,
                i.residual,
                i.tolerance,
                i.detail
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn assert_items(report: &CheckReport, ids: &[&str]) {
    for id in ids {
        let item = report
            .items
            .iter()
            .find(|i| i.id == *id)
            .unwrap_or_else(|| panic!("missing check {id}"));
        println!(
            "[{}] {}  residual {:.3e}  tol {:.1e}",
            if item.pass { "PASS" } else { "FAIL" },
            item.id,
            item.residual,
            item.tolerance
        );
        assert!(
            item.pass,
            "criterion {id} failed: residual {:.3e} > tol {:.1e} ({})",
            item.residual, item.tolerance, item.detail
        );
    }
}

fn suite(name: &str) -> CheckReport {
    run_suite(name, SEED, &HashMap::new()).expect("suite must run")
}

#[test]
fn elliptic_identity_suite() {
    let report = suite("elliptic");
    assert_items(
        &report,
        &[
            "elliptic/legendre",
            "elliptic/wp-ode",
            "elliptic/tertiary-value",
            "elliptic/tertiary-closed-forms",
            "elliptic/special-point-product",
            "elliptic/zeta-special-values",
        ],
    );
}

#[test]
fn endpoint_limits() {
    let report = suite("elliptic");
    assert_items(&report, &["elliptic/limit-omega1", "elliptic/limit-omega2"]);
}

#[test]
fn period_ode() {
    let report = suite("elliptic");
    assert_items(
        &report,
        &[
            "elliptic/period-derivatives",
            "elliptic/omega1-second-order-ode",
        ],
    );
}

#[test]
fn flow_suite() {
    let report = suite("flow");
    assert_items(
        &report,
        &[
            "flow/dual-route",
            "flow/ode-residual",
            "flow/rk-oracle",
            "flow/dc3-sum-rule",
            "flow/dc3-product-rule",
            "flow/chart-jacobian",
        ],
    );
}

#[test]
fn gks_suite() {
    let report = suite("gks");
    assert_items(
        &report,
        &[
            "gks/almost-complex",
            "gks/structure-equation-i",
            "gks/structure-equation-ii",
            "gks/metric-symmetry",
            "gks/metric-hermitian",
            "gks/nijenhuis",
            "gks/f-closed",
            "gks/small-dt-law",
        ],
    );
}

#[test]
fn metric_positivity() {
    let report = suite("gks");
    assert_items(&report, &["gks/metric-positivity"]);
}

#[test]
fn groupoid_suite() {
    let report = suite("groupoid");
    assert_items(
        &report,
        &[
            "groupoid/omega-inverse",
            "groupoid/unit-law",
            "groupoid/associativity",
            "groupoid/bracket-orthogonality",
            "groupoid/source-target-poisson",
            "groupoid/toy-model-determinant",
        ],
    );
}

#[test]
fn gkp_suite() {
    let report = suite("gkp");
    assert_items(
        &report,
        &[
            "gkp/zero-normalisation",
            "gkp/slope-at-zero",
            "gkp/quadrature-vs-riemann",
            "gkp/t-form-vs-u-form",
            "gkp/face-approach",
        ],
    );
}

#[test]
fn area_identity() {
    let report = suite("elliptic");
    assert_items(&report, &["elliptic/area-identity"]);
}

#[test]
fn full_battery_passes() {
    let report = suite("all");
    println!("{}", report_lines(&report));
    assert!(
        report.overall_pass(),
        "failing checks:\n{}",
        report
            .items
            .iter()
            .filter(|i| !i.pass)
            .map(|i| format!("{} residual {:.3e} tol {:.1e}", i.id, i.residual, i.tolerance))
            .collect::<Vec<_>>()
            .join("\n")
    );
}
