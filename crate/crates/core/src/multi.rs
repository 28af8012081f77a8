//! Multiple hypothesis testing by pairwise voting.
//!
//! The `n` sites are cut into one consecutive block per hypothesis pair. Each
//! block runs the Helstrom test of its pair, and the hypothesis with the most
//! votes wins, ties going to the smallest index. Hypotheses are 0-based here;
//! user-facing output adds one.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binary::{
    chernoff_distance, markov_chernoff_oracle, mean_chernoff_estimate, uniform_grid,
    LocalHelstromTest, PairRole, TestBackend,
};
use crate::error::{Error, Result};
use crate::operator::{trace_inner, HermitianOperator, DEFAULT_MAX_DIM};
use crate::states::{block_dimension, HypothesisSet, StateModel};

/// Largest pair count for which all `2^m` vote vectors are enumerated.
pub const MAX_ENUMERATED_PAIRS: usize = 20;
const WEIGHT_SUM_TOL: f64 = 1e-12;
const QUOTA_SNAP: f64 = 1e-9;
const MC_CHUNK: usize = 4096;

/// Lexicographic list of the `m = r(r-1)/2` pairs `(i, j)`, `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairIndex {
    r: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairIndex {
    pub fn new(r: usize) -> Result<Self> {
        if r < 2 {
            return Err(Error::TooFewHypotheses(r));
        }
        let pairs = (0..r)
            .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
            .collect();
        Ok(Self { r, pairs })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Number of pairs `m`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair(&self, k: usize) -> (usize, usize) {
        self.pairs[k]
    }

    /// Position of the unordered pair `{i, j}`.
    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if a == b || b >= self.r {
            return None;
        }
        // pairs starting below `a` come first
        Some(a * (2 * self.r - a - 1) / 2 + (b - a - 1))
    }
}

pub fn pair_ordering(r: usize) -> Result<PairIndex> {
    PairIndex::new(r)
}

fn check_distances(xi: &[f64], allow_infinite: bool) -> Result<()> {
    if xi.is_empty() {
        return Err(Error::InvalidDistances("no pairs".into()));
    }
    for (k, &x) in xi.iter().enumerate() {
        let ok = x > 0.0 && (x.is_finite() || (allow_infinite && x == f64::INFINITY));
        if !ok {
            return Err(Error::InvalidDistances(format!("pair {}: {x}", k + 1)));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiFactor {
    pub phi: f64,
    /// `min ξ_ij`
    pub xi_min: f64,
}

/// `φ = (Σ_k min ξ / ξ_k)^{-1}`, which lies in `[1/m, 1]`.
pub fn phi_factor(xi: &[f64]) -> Result<PhiFactor> {
    check_distances(xi, false)?;
    let xi_min = xi.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = xi.iter().map(|&x| xi_min / x).sum();
    Ok(PhiFactor {
        phi: 1.0 / sum,
        xi_min,
    })
}

/// Weights `w_k ∝ 1/ξ_k`, which make every `w_k ξ_k` equal.
pub fn optimal_weights(xi: &[f64]) -> Result<Vec<f64>> {
    check_distances(xi, false)?;
    let total: f64 = xi.iter().map(|&x| 1.0 / x).sum();
    Ok(xi.iter().map(|&x| 1.0 / x / total).collect())
}

/// Planning quantities for a distance vector that may contain `+inf`.
///
/// Infinite pairs get weight 0 (so one site in any plan) and are left out of `φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceSummary {
    pub xi: Vec<f64>,
    pub xi_min: f64,
    pub phi: f64,
    pub weights: Vec<f64>,
    /// Pair achieving `xi_min`; the first one on ties.
    pub least_favorable: usize,
    pub infinite_pairs: Vec<usize>,
}

impl DistanceSummary {
    pub fn new(xi: &[f64]) -> Result<Self> {
        check_distances(xi, true)?;
        let finite: Vec<usize> = (0..xi.len()).filter(|&k| xi[k].is_finite()).collect();
        let infinite_pairs: Vec<usize> = (0..xi.len()).filter(|&k| !xi[k].is_finite()).collect();
        if !infinite_pairs.is_empty() {
            warn!(
                "{} pair(s) have infinite distance; they get a single site and are left out of phi",
                infinite_pairs.len()
            );
        }
        let least_favorable = (0..xi.len())
            .min_by(|&a, &b| xi[a].total_cmp(&xi[b]))
            .expect("non-empty");
        if finite.is_empty() {
            let m = xi.len();
            return Ok(Self {
                xi: xi.to_vec(),
                xi_min: f64::INFINITY,
                phi: 1.0,
                weights: vec![1.0 / m as f64; m],
                least_favorable,
                infinite_pairs,
            });
        }
        let sub: Vec<f64> = finite.iter().map(|&k| xi[k]).collect();
        let PhiFactor { phi, xi_min } = phi_factor(&sub)?;
        let sub_w = optimal_weights(&sub)?;
        let mut weights = vec![0.0; xi.len()];
        for (&k, w) in finite.iter().zip(sub_w) {
            weights[k] = w;
        }
        Ok(Self {
            xi: xi.to_vec(),
            xi_min,
            phi,
            weights,
            least_favorable,
            infinite_pairs,
        })
    }

    /// `ξ̄ · φ`, the exponent guaranteed by the optimal plan.
    pub fn guaranteed_exponent(&self) -> f64 {
        self.xi_min * self.phi
    }
}

/// Integer block lengths for one total length `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPlan {
    n: usize,
    weights: Vec<f64>,
    lengths: Vec<usize>,
}

impl BlockPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn num_blocks(&self) -> usize {
        self.lengths.len()
    }

    /// `min_k w_k ξ_k` for this plan's weights.
    pub fn predicted_exponent(&self, xi: &[f64]) -> Result<f64> {
        predicted_exponent(&self.weights, xi)
    }
}

/// `min_k w_k ξ_k`; pairs with `ξ_k = +inf` never limit it.
pub fn predicted_exponent(weights: &[f64], xi: &[f64]) -> Result<f64> {
    if xi.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            left: xi.len(),
            right: weights.len(),
        });
    }
    Ok(weights
        .iter()
        .zip(xi)
        .map(|(&w, &x)| {
            if x.is_infinite() {
                f64::INFINITY
            } else {
                w * x
            }
        })
        .fold(f64::INFINITY, f64::min))
}

/// Largest-remainder apportionment of `w_k n` with every block at least one site.
///
/// Remainder ties go to the smaller `k`. When blocks have to be raised to one
/// site, the sites come from the currently longest block (smaller `k` on ties).
pub fn block_plan(n: usize, weights: &[f64]) -> Result<BlockPlan> {
    let m = weights.len();
    if m == 0 {
        return Err(Error::InvalidWeights("no weights".into()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidWeights(format!("{weights:?}")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
    }
    if n < m {
        return Err(Error::BlockTooShort { n, pairs: m });
    }
    let quotas: Vec<f64> = weights
        .iter()
        .map(|&w| {
            let q = w * n as f64;
            if (q - q.round()).abs() < QUOTA_SNAP {
                q.round()
            } else {
                q
            }
        })
        .collect();
    let mut lengths: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = lengths.iter().sum();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().take(n.saturating_sub(assigned)) {
        lengths[k] += 1;
    }
    for k in 0..m {
        if lengths[k] == 0 {
            let donor = (0..m)
                .max_by(|&a, &b| lengths[a].cmp(&lengths[b]).then(b.cmp(&a)))
                .expect("non-empty");
            lengths[donor] -= 1;
            lengths[k] = 1;
        }
    }
    debug_assert_eq!(lengths.iter().sum::<usize>(), n);
    Ok(BlockPlan {
        n,
        weights: weights.to_vec(),
        lengths,
    })
}

/// Hypothesis receiving the vote of block `k` under bit `b_k`.
fn vote_target(pair: (usize, usize), bit: bool) -> usize {
    if bit {
        pair.1
    } else {
        pair.0
    }
}

fn counts_from_bits(bits: impl Iterator<Item = bool>, pairs: &PairIndex) -> Vec<usize> {
    let mut counts = vec![0; pairs.r()];
    for (k, bit) in bits.enumerate() {
        counts[vote_target(pairs.pair(k), bit)] += 1;
    }
    counts
}

fn winner_from_counts(counts: &[usize]) -> usize {
    let best = counts.iter().copied().max().unwrap_or(0);
    counts.iter().position(|&c| c == best).unwrap_or(0)
}

fn check_vote_len(b: &[u8], pairs: &PairIndex) -> Result<()> {
    if b.len() != pairs.len() {
        return Err(Error::VoteLength {
            got: b.len(),
            expected: pairs.len(),
        });
    }
    Ok(())
}

/// Votes per hypothesis. `b[k] == 0` is a vote for the first member of pair `k`,
/// any other value for the second.
pub fn vote_counts(b: &[u8], pairs: &PairIndex) -> Result<Vec<usize>> {
    check_vote_len(b, pairs)?;
    Ok(counts_from_bits(b.iter().map(|&x| x != 0), pairs))
}

/// Smallest hypothesis index with the maximal vote count.
pub fn assign_block(b: &[u8], pairs: &PairIndex) -> Result<usize> {
    Ok(winner_from_counts(&vote_counts(b, pairs)?))
}

/// Winner for the vote vector whose bit `k` is `b_k`.
pub fn assign_mask(mask: u64, pairs: &PairIndex) -> usize {
    winner_from_counts(&counts_from_bits(
        (0..pairs.len()).map(|k| mask >> k & 1 == 1),
        pairs,
    ))
}

/// Block Helstrom tests plus the decision rule.
#[derive(Clone, Debug)]
pub struct VotingTest {
    plan: BlockPlan,
    pairs: PairIndex,
    blocks: Vec<LocalHelstromTest>,
    /// Winner per vote mask, present when `m ≤ MAX_ENUMERATED_PAIRS`.
    assignment: Option<Vec<u8>>,
}

impl VotingTest {
    pub fn plan(&self) -> &BlockPlan {
        &self.plan
    }

    pub fn pairs(&self) -> &PairIndex {
        &self.pairs
    }

    pub fn blocks(&self) -> &[LocalHelstromTest] {
        &self.blocks
    }

    pub fn assignment(&self) -> Option<&[u8]> {
        self.assignment.as_deref()
    }

    fn winner(&self, mask: u64) -> usize {
        match &self.assignment {
            Some(table) => table[mask as usize] as usize,
            None => assign_mask(mask, &self.pairs),
        }
    }
}

pub fn build_voting_test(
    hs: &HypothesisSet,
    plan: &BlockPlan,
    backend: TestBackend,
    cap: usize,
) -> Result<VotingTest> {
    let pairs = PairIndex::new(hs.len())?;
    if plan.num_blocks() != pairs.len() {
        return Err(Error::InvalidWeights(format!(
            "plan has {} blocks for {} pairs",
            plan.num_blocks(),
            pairs.len()
        )));
    }
    let blocks = pairs
        .pairs()
        .par_iter()
        .zip(plan.lengths().par_iter())
        .map(|(&(i, j), &len)| {
            LocalHelstromTest::build(hs.model(i), hs.model(j), len, backend, cap)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = pairs.len();
    let assignment = (m <= MAX_ENUMERATED_PAIRS).then(|| {
        (0..1u64 << m)
            .into_par_iter()
            .map(|mask| assign_mask(mask, &pairs) as u8)
            .collect()
    });
    Ok(VotingTest {
        plan: plan.clone(),
        pairs,
        blocks,
        assignment,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationMethod {
    /// Exact, using independence of the blocks for product states.
    #[default]
    Factorized,
    /// Exact, by materializing the full test operators.
    Dense,
    MonteCarlo,
}

impl EvaluationMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Factorized => "factorized",
            Self::Dense => "dense",
            Self::MonteCarlo => "monte_carlo",
        }
    }
}

impl std::str::FromStr for EvaluationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "factorized" => Ok(Self::Factorized),
            "dense" => Ok(Self::Dense),
            "monte-carlo" | "monte_carlo" => Ok(Self::MonteCarlo),
            other => Err(Error::Parse(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiResult {
    pub per_hypothesis_error: Vec<f64>,
    pub averaged_error: f64,
    pub n: usize,
    pub method: EvaluationMethod,
    /// Monte Carlo only.
    pub standard_errors: Option<Vec<f64>>,
    pub averaged_standard_error: Option<f64>,
}

fn averaged(priors: &[f64], values: &[f64]) -> f64 {
    priors.iter().zip(values).map(|(p, e)| p * e).sum()
}

fn require_product(hs: &HypothesisSet, method: EvaluationMethod) -> Result<()> {
    if !hs.all_product() {
        return Err(Error::Unsupported(format!(
            "{} evaluation needs product-state hypotheses; use the dense method",
            method.name()
        )));
    }
    Ok(())
}

/// `table[i][k] = [tr(ρ_i Π₁^k), tr(ρ_i Π₂^k)]` on block `k`'s sites.
pub fn vote_probability_table(
    hs: &HypothesisSet,
    test: &VotingTest,
    cap: usize,
) -> Result<Vec<Vec<[f64; 2]>>> {
    (0..hs.len())
        .into_par_iter()
        .map(|i| {
            test.blocks
                .iter()
                .zip(test.pairs.pairs())
                .map(|(block, &(a, b))| {
                    let role = if i == a {
                        Some(PairRole::First)
                    } else if i == b {
                        Some(PairRole::Second)
                    } else {
                        None
                    };
                    block.vote_probabilities(hs.model(i), role, cap)
                })
                .collect()
        })
        .collect()
}

/// Probability of every vote mask, given independent per-block vote laws.
fn mask_distribution(probs: &[[f64; 2]]) -> Vec<f64> {
    let mut dist = Vec::with_capacity(1 << probs.len());
    dist.push(1.0);
    for p in probs {
        let half = dist.len();
        dist.extend_from_within(..);
        for (mask, v) in dist.iter_mut().enumerate() {
            *v *= p[usize::from(mask >= half)];
        }
    }
    dist
}

/// `Err_i = Σ_{b ∉ B_i} Π_k p[i][k][b_k]`, for product states.
pub fn exact_error_factorized(
    hs: &HypothesisSet,
    test: &VotingTest,
    cap: usize,
) -> Result<MultiResult> {
    require_product(hs, EvaluationMethod::Factorized)?;
    let m = test.pairs.len();
    let table = test
        .assignment
        .as_ref()
        .ok_or(Error::TooManyPairs(m, MAX_ENUMERATED_PAIRS))?;
    let probs = vote_probability_table(hs, test, cap)?;
    let errors: Vec<f64> = probs
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            mask_distribution(p)
                .iter()
                .zip(table)
                .filter(|(_, &w)| w as usize != i)
                .map(|(q, _)| q)
                .sum::<f64>()
                .clamp(0.0, 1.0)
        })
        .collect();
    Ok(MultiResult {
        averaged_error: averaged(hs.priors(), &errors),
        per_hypothesis_error: errors,
        n: test.plan.n(),
        method: EvaluationMethod::Factorized,
        standard_errors: None,
        averaged_standard_error: None,
    })
}

/// Explicit `E_i = Σ_{b ∈ B_i} ⊗_k P_k^{b_k}` on all `n` sites.
pub fn dense_test_matrices(
    test: &VotingTest,
    site_dim: usize,
    cap: usize,
) -> Result<Vec<HermitianOperator>> {
    let m = test.pairs.len();
    let table = test
        .assignment
        .as_ref()
        .ok_or(Error::TooManyPairs(m, MAX_ENUMERATED_PAIRS))?;
    let dim = block_dimension(site_dim, test.plan.n(), cap)?;
    let projectors: Vec<[HermitianOperator; 2]> = test
        .blocks
        .iter()
        .map(|b| {
            let t = b.to_binary_test(cap)?;
            Ok([t.pi_1().operator().clone(), t.pi_2().operator().clone()])
        })
        .collect::<Result<_>>()?;
    let r = test.pairs.r();
    let mut out = vec![HermitianOperator::zeros(dim); r];
    for (mask, &winner) in table.iter().enumerate() {
        let mut p = projectors[0][mask & 1].clone();
        for (k, proj) in projectors.iter().enumerate().skip(1) {
            p = p.tensor(&proj[mask >> k & 1], cap)?;
        }
        let w = winner as usize;
        out[w] = out[w].add(&p)?;
    }
    Ok(out)
}

/// `Err_i = Σ_{j≠i} tr[ρ_i E_j]` with the full `n`-site densities; any model type.
pub fn exact_error_dense(hs: &HypothesisSet, test: &VotingTest, cap: usize) -> Result<MultiResult> {
    let n = test.plan.n();
    let e = dense_test_matrices(test, hs.site_dim(), cap)?;
    let errors = (0..hs.len())
        .into_par_iter()
        .map(|i| {
            let rho = hs.model(i).local_density_with_cap(n, cap)?;
            let mut err = 0.0;
            for (j, ej) in e.iter().enumerate() {
                if j != i {
                    err += trace_inner(rho.operator(), ej)?;
                }
            }
            Ok(err.clamp(0.0, 1.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MultiResult {
        averaged_error: averaged(hs.priors(), &errors),
        per_hypothesis_error: errors,
        n,
        method: EvaluationMethod::Dense,
        standard_errors: None,
        averaged_standard_error: None,
    })
}

/// Exact error by the requested exact method.
pub fn exact_error(
    hs: &HypothesisSet,
    test: &VotingTest,
    method: EvaluationMethod,
    cap: usize,
) -> Result<MultiResult> {
    match method {
        EvaluationMethod::Factorized => exact_error_factorized(hs, test, cap),
        EvaluationMethod::Dense => exact_error_dense(hs, test, cap),
        EvaluationMethod::MonteCarlo => Err(Error::Unsupported(
            "Monte Carlo is not an exact method".into(),
        )),
    }
}

/// Error estimate from sampled block votes.
///
/// Chunk `c` of hypothesis `i` uses the ChaCha8 stream `(i << 32) | c` of `seed`,
/// so results do not depend on thread scheduling.
pub fn monte_carlo_error(
    hs: &HypothesisSet,
    test: &VotingTest,
    samples: usize,
    seed: u64,
    cap: usize,
) -> Result<MultiResult> {
    require_product(hs, EvaluationMethod::MonteCarlo)?;
    if samples == 0 {
        return Err(Error::ZeroSamples);
    }
    let probs = vote_probability_table(hs, test, cap)?;
    let chunks = samples.div_ceil(MC_CHUNK);
    let mut errors = Vec::with_capacity(hs.len());
    let mut ses = Vec::with_capacity(hs.len());
    for (i, p) in probs.iter().enumerate() {
        let wrong: usize = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((i as u64) << 32) | c as u64);
                let count = MC_CHUNK.min(samples - c * MC_CHUNK);
                (0..count)
                    .filter(|_| {
                        let mut mask = 0u64;
                        for (k, pk) in p.iter().enumerate() {
                            if rng.random::<f64>() >= pk[0] {
                                mask |= 1 << k;
                            }
                        }
                        test.winner(mask) != i
                    })
                    .count()
            })
            .sum();
        let est = wrong as f64 / samples as f64;
        errors.push(est);
        ses.push((est * (1.0 - est) / samples as f64).sqrt());
    }
    let avg_se = hs
        .priors()
        .iter()
        .zip(&ses)
        .map(|(p, s)| (p * s).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(MultiResult {
        averaged_error: averaged(hs.priors(), &errors),
        per_hypothesis_error: errors,
        n: test.plan.n(),
        method: EvaluationMethod::MonteCarlo,
        standard_errors: Some(ses),
        averaged_standard_error: Some(avg_se),
    })
}

/// `Σ_{j≠i}` probability that the `(i, j)` block votes for `j`; bounds `Err_i` from above.
pub fn union_bound(hs: &HypothesisSet, test: &VotingTest, cap: usize) -> Result<Vec<f64>> {
    let probs = vote_probability_table(hs, test, cap)?;
    Ok((0..hs.len())
        .map(|i| {
            test.pairs
                .pairs()
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| {
                    if i == a {
                        probs[i][k][1]
                    } else if i == b {
                        probs[i][k][0]
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect())
}

/// How a pairwise distance was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceSource {
    /// Chernoff distance of the single-site densities.
    SingleLetter,
    /// Perron-root rate of two classical chains.
    MarkovOracle,
    /// Finite-`n` mean estimate at this block size.
    FiniteN(usize),
}

impl std::fmt::Display for DistanceSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::SingleLetter => write!(f, "single_letter"),
            Self::MarkovOracle => write!(f, "markov_oracle"),
            Self::FiniteN(n) => write!(f, "finite_n={n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceOptions {
    pub grid_points: usize,
    /// Block size used for finite-`n` estimates.
    pub finite_n: usize,
    pub cap: usize,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self {
            grid_points: 201,
            finite_n: 10,
            cap: DEFAULT_MAX_DIM,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseDistances {
    pub pairs: PairIndex,
    pub xi: Vec<f64>,
    pub s_star: Vec<f64>,
    pub sources: Vec<DistanceSource>,
}

fn finite_n_limit(model: &StateModel, wanted: usize, cap: usize) -> usize {
    let mut n = match model {
        StateModel::Explicit(e) => wanted.min(e.n_max()),
        _ => wanted,
    };
    while n > 1 && block_dimension(model.site_dim(), n, cap).is_err() {
        n -= 1;
    }
    n.max(1)
}

fn pair_distance(
    a: &StateModel,
    b: &StateModel,
    opts: &DistanceOptions,
) -> Result<(f64, f64, DistanceSource)> {
    if let (Some(pa), Some(pb)) = (a.as_product(), b.as_product()) {
        let r = chernoff_distance(pa.base(), pb.base())?;
        return Ok((r.value, r.s_star, DistanceSource::SingleLetter));
    }
    let grid = uniform_grid(opts.grid_points);
    if let (Some(ma), Some(mb)) = (a.as_markov(), b.as_markov()) {
        if ma.is_strictly_positive() && mb.is_strictly_positive() {
            let r = markov_chernoff_oracle(ma, mb, &grid)?;
            return Ok((r.value, r.s_star, DistanceSource::MarkovOracle));
        }
    }
    let n =
        finite_n_limit(a, opts.finite_n, opts.cap).min(finite_n_limit(b, opts.finite_n, opts.cap));
    let est = mean_chernoff_estimate(a, b, &[n], &grid)?;
    let p = &est.per_n[0];
    Ok((p.value, p.s_argmax, DistanceSource::FiniteN(n)))
}

/// `ξ_ij` for every pair, in pair order.
pub fn pairwise_distances(hs: &HypothesisSet, opts: &DistanceOptions) -> Result<PairwiseDistances> {
    let pairs = PairIndex::new(hs.len())?;
    let found = pairs
        .pairs()
        .par_iter()
        .map(|&(i, j)| pair_distance(hs.model(i), hs.model(j), opts))
        .collect::<Result<Vec<_>>>()?;
    let (mut xi, mut s_star, mut sources) = (Vec::new(), Vec::new(), Vec::new());
    for (x, s, src) in found {
        xi.push(x);
        s_star.push(s);
        sources.push(src);
    }
    Ok(PairwiseDistances {
        pairs,
        xi,
        s_star,
        sources,
    })
}
