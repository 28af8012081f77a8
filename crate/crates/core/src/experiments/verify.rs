//! Built-in self checks on fixed fixtures, as run by `qmht verify`.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fit::FitWindow;
use super::fixtures;
use super::sweep::{binary_sweep, multi_sweep, SweepOptions};
use crate::binary::{
    chernoff_distance, markov_chernoff_oracle, mean_chernoff_estimate, uniform_grid, TestBackend,
};
use crate::error::Result;
use crate::multi::{
    assign_mask, block_plan, build_voting_test, dense_test_matrices, exact_error_dense,
    exact_error_factorized, monte_carlo_error, pair_ordering, phi_factor, EvaluationMethod,
};
use crate::operator::{spectral_decompose, ComplexMatrix, HermitianOperator, DEFAULT_MAX_DIM};
use crate::states::StateModel;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {} {}: {}", self.id, self.name, self.detail)
    }
}

fn outcome(
    id: &'static str,
    name: &'static str,
    run: impl FnOnce() -> Result<(bool, String)>,
) -> CheckOutcome {
    match run() {
        Ok((passed, detail)) => CheckOutcome {
            id,
            name,
            passed,
            detail,
        },
        Err(e) => CheckOutcome {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn check_phi() -> Result<(bool, String)> {
    let phi = phi_factor(&[LN_2, LN_2, 2.0 * LN_2])?.phi;
    let mut ok = (phi - 0.4).abs() <= 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let m = rng.random_range(1..8usize);
        let xi: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..5.0)).collect();
        let p = phi_factor(&xi)?.phi;
        ok &= p >= 1.0 / m as f64 - 1e-12 && p <= 1.0 + 1e-12;
        let eq = phi_factor(&vec![xi[0]; m])?.phi;
        ok &= (eq - 1.0 / m as f64).abs() <= 1e-12;
    }
    Ok((ok, format!("phi(ln2, ln2, 2 ln2) = {phi:.15}")))
}

fn check_pure_chernoff() -> Result<(bool, String)> {
    let hs = fixtures::zero_plus_pair()?;
    let (a, b) = (hs.model(0).local_density(1)?, hs.model(1).local_density(1)?);
    let r = chernoff_distance(&a, &b)?;
    let (lo, hi) = r
        .q_curve
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &(_, q)| {
            (lo.min(q), hi.max(q))
        });
    let ok = (r.value - LN_2).abs() <= 1e-6 && hi - lo <= 1e-9;
    Ok((
        ok,
        format!("xi = {:.12}, Q spread = {:.1e}", r.value, hi - lo),
    ))
}

fn check_binary_attainment() -> Result<(bool, String)> {
    let hs = fixtures::zero_plus_pair()?;
    let ns: Vec<usize> = (8..=14).collect();
    let opts = SweepOptions {
        fit_window: FitWindow::All,
        ..SweepOptions::default()
    };
    let sweep = binary_sweep(&hs, &ns, &opts)?;
    let worst = sweep
        .rows
        .iter()
        .map(|r| {
            let x = 0.5f64.powi(r.n as i32);
            (r.error - 0.5 * (1.0 - (1.0 - x).sqrt())).abs()
        })
        .fold(0.0, f64::max);
    let slope = sweep.fit.as_ref().map_or(f64::NAN, |f| f.slope());
    let ok = worst <= 1e-10 && (slope - LN_2).abs() <= 0.15 * LN_2;
    Ok((
        ok,
        format!("slope = {slope:.6}, max closed-form deviation = {worst:.1e}"),
    ))
}

fn povm_fixture() -> Result<(crate::states::HypothesisSet, crate::multi::VotingTest)> {
    let hs = fixtures::random_qubit_triple(2024)?;
    let plan = block_plan(6, &[1.0 / 3.0; 3])?;
    let test = build_voting_test(&hs, &plan, TestBackend::Auto, DEFAULT_MAX_DIM)?;
    Ok((hs, test))
}

fn check_povm() -> Result<(bool, String)> {
    let (_, test) = povm_fixture()?;
    let e = dense_test_matrices(&test, 2, DEFAULT_MAX_DIM)?;
    let dim = e[0].dim();
    let mut total = HermitianOperator::zeros(dim);
    let mut worst_psd: f64 = 0.0;
    let mut worst_orth: f64 = 0.0;
    for (i, ei) in e.iter().enumerate() {
        total = total.add(ei)?;
        let ev = spectral_decompose(ei)?;
        for &l in ev.eigenvalues() {
            worst_psd = worst_psd.max(-l).max(l - 1.0);
        }
        for ej in e.iter().skip(i + 1) {
            worst_orth = worst_orth.max(ei.matmul(ej)?.max_abs_diff(&ComplexMatrix::zeros(dim))?);
        }
    }
    let completeness = total.max_abs_diff(&HermitianOperator::identity(dim))?;
    let ok = worst_psd <= 1e-9 && worst_orth <= 1e-9 && completeness <= 1e-10;
    Ok((
        ok,
        format!("completeness {completeness:.1e}, orthogonality {worst_orth:.1e}, eigenvalue excess {worst_psd:.1e}"),
    ))
}

fn check_factorized_dense() -> Result<(bool, String)> {
    let (hs, test) = povm_fixture()?;
    let f = exact_error_factorized(&hs, &test, DEFAULT_MAX_DIM)?;
    let d = exact_error_dense(&hs, &test, DEFAULT_MAX_DIM)?;
    let worst = f
        .per_hypothesis_error
        .iter()
        .zip(&d.per_hypothesis_error)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((
        worst <= 1e-9,
        format!("max |factorized - dense| = {worst:.1e}"),
    ))
}

fn triple_sweep() -> Result<super::sweep::MultiSweep> {
    let ns: Vec<usize> = (6..=30).step_by(3).collect();
    multi_sweep(&fixtures::pure_triple()?, &ns, &SweepOptions::default())
}

fn check_lower_bound(sweep: &super::sweep::MultiSweep) -> (bool, String) {
    let slope = sweep.fit.as_ref().map_or(f64::NAN, |f| f.slope());
    let target = 0.8 * sweep.lower_bound();
    (
        slope >= target,
        format!("slope {slope:.6} >= 0.8 xi*phi = {target:.6}"),
    )
}

fn check_trend(sweep: &super::sweep::MultiSweep) -> (bool, String) {
    let tail: Vec<f64> = sweep
        .rows
        .iter()
        .rev()
        .take(3)
        .rev()
        .map(|r| r.exponent)
        .collect();
    let ok = tail.windows(2).all(|w| w[1] >= w[0]);
    (ok, format!("last three -(1/n) ln Err = {tail:.6?}"))
}

fn check_upper_bound(sweep: &super::sweep::MultiSweep) -> (bool, String) {
    let slope = sweep.fit.as_ref().map_or(f64::NAN, |f| f.slope());
    let target = 1.1 * sweep.upper_bound();
    (
        slope <= target,
        format!("slope {slope:.6} <= 1.1 xi = {target:.6}"),
    )
}

fn check_markov() -> Result<(bool, String)> {
    let (a, b) = fixtures::markov_pair()?;
    let grid = uniform_grid(201);
    let oracle = markov_chernoff_oracle(&a, &b, &grid)?.value;
    let est = mean_chernoff_estimate(&StateModel::Markov(a), &StateModel::Markov(b), &[12], &grid)?;
    let rel = (est.extrapolated - oracle).abs() / oracle;
    Ok((
        rel <= 0.05,
        format!(
            "n=12 estimate {:.6} vs oracle {oracle:.6} ({:.2}%)",
            est.extrapolated,
            100.0 * rel
        ),
    ))
}

fn check_monte_carlo() -> Result<(bool, String)> {
    let hs = fixtures::pure_triple()?;
    let report = super::sweep::plan_report(&hs, 12, &SweepOptions::default())?;
    let test = build_voting_test(&hs, &report.plan, TestBackend::Auto, DEFAULT_MAX_DIM)?;
    let exact = exact_error_factorized(&hs, &test, DEFAULT_MAX_DIM)?;
    let a = monte_carlo_error(&hs, &test, 100_000, 7, DEFAULT_MAX_DIM)?;
    let b = monte_carlo_error(&hs, &test, 100_000, 7, DEFAULT_MAX_DIM)?;
    let se = a.averaged_standard_error.unwrap_or(f64::NAN);
    let dev = (a.averaged_error - exact.averaged_error).abs();
    let ok = dev <= 4.0 * se && a == b && a.method == EvaluationMethod::MonteCarlo;
    Ok((
        ok,
        format!("|MC - exact| = {dev:.2e}, 4 se = {:.2e}", 4.0 * se),
    ))
}

fn check_voting() -> Result<(bool, String)> {
    let mut checked = 0;
    let mut ok = true;
    for r in [3usize, 4] {
        let pairs = pair_ordering(r)?;
        for mask in 0..1u64 << pairs.len() {
            let mut counts = vec![0usize; r];
            for (k, &(i, j)) in pairs.pairs().iter().enumerate() {
                counts[if mask >> k & 1 == 0 { i } else { j }] += 1;
            }
            let members: Vec<usize> = (0..r)
                .filter(|&i| {
                    (0..r).all(|j| {
                        if j < i {
                            counts[i] > counts[j]
                        } else {
                            counts[i] >= counts[j]
                        }
                    })
                })
                .collect();
            ok &= members.len() == 1 && members[0] == assign_mask(mask, &pairs);
            checked += 1;
        }
    }
    Ok((ok, format!("{checked} vote vectors")))
}

/// Runs every check; failures are reported, not raised.
pub fn run_checks() -> Vec<CheckOutcome> {
    let mut out = vec![
        outcome("1", "phi closed form and bounds", check_phi),
        outcome("2", "pure-state Chernoff distance", check_pure_chernoff),
        outcome("3", "binary Helstrom exponent", check_binary_attainment),
        outcome("4", "voting POVM validity", check_povm),
        outcome("5", "factorized vs dense error", check_factorized_dense),
    ];
    match triple_sweep() {
        Ok(sweep) => {
            for (id, name, (passed, detail)) in [
                ("6", "lower bound at finite n", check_lower_bound(&sweep)),
                ("6t", "exponent trend, last three n", check_trend(&sweep)),
                ("7", "upper bound at finite n", check_upper_bound(&sweep)),
            ] {
                out.push(CheckOutcome {
                    id,
                    name,
                    passed,
                    detail,
                });
            }
        }
        Err(e) => {
            for (id, name) in [
                ("6", "lower bound at finite n"),
                ("6t", "exponent trend, last three n"),
                ("7", "upper bound at finite n"),
            ] {
                out.push(CheckOutcome {
                    id,
                    name,
                    passed: false,
                    detail: format!("error: {e}"),
                });
            }
        }
    }
    out.push(outcome("8", "Markov mean Chernoff estimate", check_markov));
    out.push(outcome("9", "Monte Carlo consistency", check_monte_carlo));
    out.push(outcome("10", "voting combinatorics", check_voting));
    out
}
