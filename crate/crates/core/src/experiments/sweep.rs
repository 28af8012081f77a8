use log::warn;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::fit::{fit_exponent, ExponentEstimate, FitWindow};
use crate::binary::{local_helstrom_error, TestBackend};
use crate::error::{Error, Result};
use crate::multi::{
    block_plan, build_voting_test, exact_error, monte_carlo_error, pairwise_distances,
    predicted_exponent, BlockPlan, DistanceOptions, DistanceSummary, EvaluationMethod, MultiResult,
    PairwiseDistances,
};
use crate::operator::DEFAULT_MAX_DIM;
use crate::states::HypothesisSet;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    pub method: EvaluationMethod,
    pub samples: usize,
    pub seed: u64,
    pub backend: TestBackend,
    pub cap: usize,
    pub fit_window: FitWindow,
    pub weights: Option<Vec<f64>>,
    pub distances: DistanceOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            method: EvaluationMethod::Factorized,
            samples: 100_000,
            seed: 0,
            backend: TestBackend::Auto,
            cap: DEFAULT_MAX_DIM,
            fit_window: FitWindow::UpperHalf,
            weights: None,
            distances: DistanceOptions::default(),
        }
    }
}

impl SweepOptions {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            method: cfg.method,
            samples: cfg.samples,
            seed: cfg.seed,
            backend: cfg.backend,
            cap: cfg.max_dim,
            fit_window: cfg.fit_window,
            weights: cfg.weights.clone(),
            distances: cfg.distance_options(),
        }
    }
}

/// `-(1/n) ln Err`, `+inf` for a zero error.
pub fn per_site_exponent(error: f64, n: usize) -> f64 {
    if error <= 0.0 {
        f64::INFINITY
    } else {
        -error.ln() / n as f64
    }
}

fn try_fit(rows: &[(usize, f64)], window: FitWindow) -> Option<ExponentEstimate> {
    match fit_exponent(rows, window) {
        Ok(f) => Some(f),
        Err(e) => {
            warn!("no exponent fit: {e}");
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinaryRow {
    pub n: usize,
    pub error: f64,
    pub exponent: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinarySweep {
    pub rows: Vec<BinaryRow>,
    pub fit: Option<ExponentEstimate>,
    pub distances: PairwiseDistances,
}

impl BinarySweep {
    pub fn chernoff_distance(&self) -> f64 {
        self.distances.xi[0]
    }
}

fn require_pair(hs: &HypothesisSet) -> Result<()> {
    if hs.len() != 2 {
        return Err(Error::Unsupported(format!(
            "binary sweep needs exactly two hypotheses, got {}",
            hs.len()
        )));
    }
    Ok(())
}

/// Helstrom error of the two hypotheses at every block size.
pub fn binary_sweep(
    hs: &HypothesisSet,
    n_range: &[usize],
    opts: &SweepOptions,
) -> Result<BinarySweep> {
    require_pair(hs)?;
    let (p1, p2) = (hs.priors()[0], hs.priors()[1]);
    let rows = n_range
        .par_iter()
        .map(|&n| {
            let error =
                local_helstrom_error(hs.model(0), hs.model(1), p1, p2, n, opts.backend, opts.cap)?;
            Ok(BinaryRow {
                n,
                error,
                exponent: per_site_exponent(error, n),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.error)).collect();
    Ok(BinarySweep {
        fit: try_fit(&points, opts.fit_window),
        distances: pairwise_distances(hs, &opts.distances)?,
        rows,
    })
}

/// Pairwise distances plus the quantities derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct ChernoffReport {
    pub distances: PairwiseDistances,
    pub summary: DistanceSummary,
}

pub fn chernoff_report(hs: &HypothesisSet, opts: &DistanceOptions) -> Result<ChernoffReport> {
    let distances = pairwise_distances(hs, opts)?;
    let summary = DistanceSummary::new(&distances.xi)?;
    Ok(ChernoffReport { distances, summary })
}

/// Weights in use: the manual override when given, else the equalizing ones.
fn plan_weights(report: &ChernoffReport, manual: Option<&[f64]>) -> Result<Vec<f64>> {
    match manual {
        Some(w) if w.len() != report.summary.weights.len() => Err(Error::InvalidWeights(format!(
            "{} weights given for {} pairs",
            w.len(),
            report.summary.weights.len()
        ))),
        Some(w) => Ok(w.to_vec()),
        None => Ok(report.summary.weights.clone()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanReport {
    pub chernoff: ChernoffReport,
    pub plan: BlockPlan,
    /// `min_k w_k ξ_k` for the weights in use.
    pub predicted_exponent: f64,
    pub manual_weights: bool,
}

pub fn plan_report(hs: &HypothesisSet, n: usize, opts: &SweepOptions) -> Result<PlanReport> {
    let chernoff = chernoff_report(hs, &opts.distances)?;
    let weights = plan_weights(&chernoff, opts.weights.as_deref())?;
    let plan = block_plan(n, &weights)?;
    Ok(PlanReport {
        predicted_exponent: plan.predicted_exponent(&chernoff.summary.xi)?,
        chernoff,
        plan,
        manual_weights: opts.weights.is_some(),
    })
}

/// Builds the voting test for `plan` and evaluates it.
pub fn evaluate_plan(
    hs: &HypothesisSet,
    plan: &BlockPlan,
    opts: &SweepOptions,
) -> Result<MultiResult> {
    let test = build_voting_test(hs, plan, opts.backend, opts.cap)?;
    match opts.method {
        EvaluationMethod::MonteCarlo => {
            monte_carlo_error(hs, &test, opts.samples, opts.seed, opts.cap)
        }
        exact => exact_error(hs, &test, exact, opts.cap),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiRow {
    pub n: usize,
    pub lengths: Vec<usize>,
    pub result: MultiResult,
    pub exponent: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiSweep {
    pub chernoff: ChernoffReport,
    pub weights: Vec<f64>,
    pub predicted_exponent: f64,
    pub method: EvaluationMethod,
    pub rows: Vec<MultiRow>,
    pub fit: Option<ExponentEstimate>,
}

impl MultiSweep {
    /// `ξ̄ φ`: what the equalizing plan guarantees asymptotically.
    pub fn lower_bound(&self) -> f64 {
        self.chernoff.summary.guaranteed_exponent()
    }

    /// `ξ̄`: no test sequence does better.
    pub fn upper_bound(&self) -> f64 {
        self.chernoff.summary.xi_min
    }
}

/// Voting-test error at every block size with a fixed weight vector.
pub fn multi_sweep(
    hs: &HypothesisSet,
    n_range: &[usize],
    opts: &SweepOptions,
) -> Result<MultiSweep> {
    let chernoff = chernoff_report(hs, &opts.distances)?;
    let weights = plan_weights(&chernoff, opts.weights.as_deref())?;
    let rows = n_range
        .par_iter()
        .map(|&n| {
            let plan = block_plan(n, &weights)?;
            let result = evaluate_plan(hs, &plan, opts)?;
            Ok(MultiRow {
                n,
                lengths: plan.lengths().to_vec(),
                exponent: per_site_exponent(result.averaged_error, n),
                result,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(usize, f64)> = rows
        .iter()
        .map(|r| (r.n, r.result.averaged_error))
        .collect();
    let predicted_exponent = predicted_exponent(&weights, &chernoff.summary.xi)?;
    Ok(MultiSweep {
        fit: try_fit(&points, opts.fit_window),
        predicted_exponent,
        method: opts.method,
        weights,
        chernoff,
        rows,
    })
}
