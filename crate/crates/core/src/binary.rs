//! Binary discrimination: quantum Chernoff quantities and Helstrom tests.
//!
//! All logarithms are natural; exponents are in nats per site.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    hermitize, matrix_power, positive_support, trace_inner, ComplexMatrix, DensityMatrix,
    Eigenbasis, Projector, DEFAULT_MAX_DIM,
};
use crate::states::{block_dimension, ClassicalMarkovModel, StateModel};

/// Q values below this are treated as exactly zero (infinite distance).
pub const Q_ZERO: f64 = 1e-300;
/// State overlaps `|⟨u|v⟩|` at or below this are round-off and count as orthogonal.
pub const OVERLAP_FLOOR: f64 = 1e-14;
const Q_CLAMP: f64 = 1.0 + 1e-9;
const PRIOR_TOL: f64 = 1e-12;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn clamp_q(q: f64) -> f64 {
    q.clamp(0.0, Q_CLAMP)
}

/// `tr[ρ1^{1-s} ρ2^s]` with support-convention powers.
pub fn q_function(rho1: &DensityMatrix, rho2: &DensityMatrix, s: f64) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            left: rho1.dim(),
            right: rho2.dim(),
        });
    }
    let a = matrix_power(rho1, 1.0 - s)?;
    let b = matrix_power(rho2, s)?;
    Ok(clamp_q(trace_inner(&a, &b)?))
}

/// `s ↦ Q(s)` precomputed from both spectra.
///
/// With `ρ1 = Σ λ_a |u_a⟩⟨u_a|` and `ρ2 = Σ μ_b |v_b⟩⟨v_b|`,
/// `Q(s) = Σ_ab λ_a^{1-s} μ_b^s |⟨u_a|v_b⟩|²` over the two supports.
#[derive(Clone, Debug)]
pub struct ChernoffKernel {
    /// `(ln λ_a, ln μ_b, |⟨u_a|v_b⟩|²)`
    terms: Vec<(f64, f64, f64)>,
}

fn support_indices(rho: &DensityMatrix) -> Vec<usize> {
    let spec = rho.spectrum();
    let thr = spec.threshold();
    spec.eigenvalues()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > thr && l > 0.0)
        .map(|(k, _)| k)
        .collect()
}

impl ChernoffKernel {
    pub fn new(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<Self> {
        if rho1.dim() != rho2.dim() {
            return Err(Error::DimensionMismatch {
                left: rho1.dim(),
                right: rho2.dim(),
            });
        }
        let (s1, s2) = (rho1.spectrum(), rho2.spectrum());
        let (sup1, sup2) = (support_indices(rho1), support_indices(rho2));
        let (l1, l2) = (s1.eigenvalues(), s2.eigenvalues());
        let mut terms = Vec::new();
        match (s1.basis(), s2.basis()) {
            (Eigenbasis::Standard(p), Eigenbasis::Standard(q)) => {
                let pos: HashMap<usize, usize> = sup2.iter().map(|&b| (q[b], b)).collect();
                for &a in &sup1 {
                    if let Some(&b) = pos.get(&p[a]) {
                        terms.push((l1[a].ln(), l2[b].ln(), 1.0));
                    }
                }
            }
            _ => {
                let u = s1.eigenvector_matrix().select_columns(sup1.iter());
                let v = s2.eigenvector_matrix().select_columns(sup2.iter());
                let overlap = u.adjoint() * v;
                for (ia, &a) in sup1.iter().enumerate() {
                    for (ib, &b) in sup2.iter().enumerate() {
                        let w = overlap[(ia, ib)].norm_sqr();
                        if w > OVERLAP_FLOOR * OVERLAP_FLOOR {
                            terms.push((l1[a].ln(), l2[b].ln(), w));
                        }
                    }
                }
            }
        }
        Ok(Self { terms })
    }

    pub fn eval(&self, s: f64) -> f64 {
        let q: f64 = self
            .terms
            .iter()
            .map(|&(la, lb, w)| w * ((1.0 - s) * la + s * lb).exp())
            .sum();
        clamp_q(q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChernoffOptions {
    pub grid_points: usize,
    /// Final bracket width of the golden-section refinement.
    pub tolerance: f64,
}

impl Default for ChernoffOptions {
    fn default() -> Self {
        Self {
            grid_points: 201,
            tolerance: 1e-8,
        }
    }
}

/// `ξ = -ln min_s Q(s)` with its minimizer and the sampled curve.
#[derive(Clone, Debug, PartialEq)]
pub struct ChernoffResult {
    /// Nats; `+inf` when the supports are orthogonal.
    pub value: f64,
    pub s_star: f64,
    pub q_curve: Vec<(f64, f64)>,
}

/// `points` evenly spaced values covering `[0, 1]`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..points)
            .map(|i| i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Minimizes a unimodal `f` on `[lo, hi]` until the bracket is narrower than `tol`.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Minimizes `q` over the closed unit interval: coarse grid, then golden-section
/// refinement of `ln q` (convex) on the bracket around the best grid point.
pub fn minimize_q(q: impl Fn(f64) -> f64, opts: &ChernoffOptions) -> ChernoffResult {
    let grid = uniform_grid(opts.grid_points.max(3));
    let q_curve: Vec<(f64, f64)> = grid.iter().map(|&s| (s, q(s))).collect();
    let (best, &(s_grid, q_grid)) = q_curve
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty grid");
    if q_grid < Q_ZERO {
        return ChernoffResult {
            value: f64::INFINITY,
            s_star: s_grid,
            q_curve,
        };
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (s_ref, lq_ref) = golden_section(|s| q(s).max(Q_ZERO).ln(), lo, hi, opts.tolerance);
    let (s_star, q_min) = if lq_ref.exp() < q_grid {
        (s_ref, lq_ref.exp())
    } else {
        (s_grid, q_grid)
    };
    ChernoffResult {
        value: (-q_min.ln()).max(0.0),
        s_star,
        q_curve,
    }
}

pub fn chernoff_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<ChernoffResult> {
    chernoff_distance_with(rho1, rho2, &ChernoffOptions::default())
}

pub fn chernoff_distance_with(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    opts: &ChernoffOptions,
) -> Result<ChernoffResult> {
    let kernel = ChernoffKernel::new(rho1, rho2)?;
    Ok(minimize_q(|s| kernel.eval(s), opts))
}

/// Two-outcome projective test; `pi_1` accepts the first hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryTest {
    pi_1: Projector,
    pi_2: Projector,
}

impl BinaryTest {
    /// Test `{P, 1 - P}`.
    pub fn from_projector(pi_1: Projector) -> Self {
        let pi_2 = pi_1.complement();
        Self { pi_1, pi_2 }
    }

    pub fn pi_1(&self) -> &Projector {
        &self.pi_1
    }

    pub fn pi_2(&self) -> &Projector {
        &self.pi_2
    }

    pub fn dim(&self) -> usize {
        self.pi_1.dim()
    }
}

/// Holevo-Helstrom test: `Π₁ = supp(ρ1 - ρ2)₊`, `Π₂ = 1 - Π₁`.
pub fn helstrom_test(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<BinaryTest> {
    let diff = rho1.operator().sub(rho2.operator())?;
    Ok(BinaryTest::from_projector(positive_support(&diff)?))
}

pub(crate) fn check_binary_priors(p1: f64, p2: f64) -> Result<()> {
    let in_range = |p: f64| p > 0.0 && p < 1.0;
    if !in_range(p1) || !in_range(p2) || (p1 + p2 - 1.0).abs() > PRIOR_TOL {
        return Err(Error::InvalidPriors(format!(
            "need p1, p2 in (0,1) summing to 1, got {p1}, {p2}"
        )));
    }
    Ok(())
}

/// `p1 tr[ρ1 (1 - Π₁)] + p2 tr[ρ2 Π₁]`.
pub fn binary_error(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    p1: f64,
    p2: f64,
    test: &BinaryTest,
) -> Result<f64> {
    check_binary_priors(p1, p2)?;
    let miss1 = trace_inner(rho1.operator(), test.pi_2.operator())?;
    let miss2 = trace_inner(rho2.operator(), test.pi_1.operator())?;
    Ok(p1 * miss1.clamp(0.0, 1.0) + p2 * miss2.clamp(0.0, 1.0))
}

/// Helstrom test between `|a⟩^{⊗n}` and `|b⟩^{⊗n}`, solved on their two-dimensional span.
///
/// With `c = ⟨A|B⟩` and `s = √(1 - |c|²)` the difference `|A⟩⟨A| - |B⟩⟨B|`
/// has eigenvalues `±s`; the eigenvectors are kept as coefficient pairs on
/// `(A, B)`, so nothing of dimension `d^n` is ever formed.
#[derive(Clone, Debug)]
pub struct PureHelstromTest {
    first: DVector<Complex64>,
    second: DVector<Complex64>,
    sites: usize,
    overlap: Complex64,
    /// `s`; zero when the two states coincide and `Π₁ = 0`.
    gap: f64,
    /// `(α_A, α_B)` for the accepting eigenvector, `(β_A, β_B)` for the rejecting one.
    accept: [Complex64; 2],
    reject: [Complex64; 2],
}

/// Which member of a tested pair a state is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairRole {
    First,
    Second,
}

impl PureHelstromTest {
    pub fn new(
        first: &DVector<Complex64>,
        second: &DVector<Complex64>,
        sites: usize,
    ) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::DimensionMismatch {
                left: first.len(),
                right: second.len(),
            });
        }
        if sites == 0 {
            return Err(Error::BlockOutOfRange {
                n: 0,
                max: usize::MAX,
            });
        }
        let normalize = |v: &DVector<Complex64>| -> Result<DVector<Complex64>> {
            let n = v.norm();
            if n == 0.0 || !n.is_finite() {
                return Err(Error::ZeroVector);
            }
            Ok(v / Complex64::new(n, 0.0))
        };
        let (a, b) = (normalize(first)?, normalize(second)?);
        let single = a.dotc(&b);
        let overlap = if single.norm() <= OVERLAP_FLOOR {
            Complex64::default()
        } else {
            single.powu(sites as u32)
        };
        let gap2 = 1.0 - overlap.norm_sqr();
        let zero = Complex64::default();
        let (gap, accept, reject) = if gap2 <= f64::EPSILON {
            (0.0, [zero; 2], [zero; 2])
        } else {
            let s = gap2.sqrt();
            let k = 1.0 / (s * (2.0 * (1.0 + s)).sqrt());
            let one_plus = Complex64::new((1.0 + s) * k, 0.0);
            (s, [one_plus, -overlap.conj() * k], [-overlap * k, one_plus])
        };
        Ok(Self {
            first: a,
            second: b,
            sites,
            overlap,
            gap,
            accept,
            reject,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// `⟨A|B⟩ = ⟨a|b⟩^n`.
    pub fn overlap(&self) -> Complex64 {
        self.overlap
    }

    fn is_trivial(&self) -> bool {
        self.gap == 0.0
    }

    /// `[tr(ρ Π₁), tr(ρ Π₂)]` for the pair member itself, in closed form.
    pub fn member_vote_probabilities(&self, role: PairRole) -> [f64; 2] {
        if self.is_trivial() {
            return [0.0, 1.0];
        }
        let s = self.gap;
        let agree = 0.5 * (1.0 + s);
        let disagree = self.overlap.norm_sqr() / (2.0 * (1.0 + s));
        match role {
            PairRole::First => [agree, disagree],
            PairRole::Second => [disagree, agree],
        }
    }

    /// `[tr(σ^{⊗n} Π₁), tr(σ^{⊗n} Π₂)]` for a single-site density `σ`.
    pub fn vote_probabilities(&self, sigma: &DensityMatrix) -> Result<[f64; 2]> {
        if sigma.dim() != self.first.len() {
            return Err(Error::DimensionMismatch {
                left: sigma.dim(),
                right: self.first.len(),
            });
        }
        if self.is_trivial() {
            return Ok([0.0, 1.0]);
        }
        let m = sigma.operator().to_matrix().into_dmatrix();
        let vecs = [&self.first, &self.second];
        let n = self.sites as u32;
        let mut gram = [[Complex64::default(); 2]; 2];
        for (p, x) in vecs.iter().enumerate() {
            let mx: Vec<DVector<Complex64>> = vecs.iter().map(|y| &m * *y).collect();
            for q in 0..2 {
                gram[p][q] = x.dotc(&mx[q]).powu(n);
            }
        }
        let quad = |coef: &[Complex64; 2]| -> f64 {
            let mut acc = Complex64::default();
            for p in 0..2 {
                for q in 0..2 {
                    acc += coef[p].conj() * coef[q] * gram[p][q];
                }
            }
            acc.re.max(0.0)
        };
        let accept = quad(&self.accept).min(1.0);
        let reject_span = quad(&self.reject);
        let outside = (1.0 - accept - reject_span).max(0.0);
        Ok([accept, (reject_span + outside).min(1.0)])
    }

    /// Materializes `Π₁` and `Π₂` on the `d^n`-dimensional space.
    pub fn to_binary_test(&self, cap: usize) -> Result<BinaryTest> {
        let d = block_dimension(self.first.len(), self.sites, cap)?;
        if self.is_trivial() {
            return Ok(BinaryTest::from_projector(Projector::zero(d)));
        }
        let power = |v: &DVector<Complex64>| {
            let mut out = v.clone();
            for _ in 1..self.sites {
                out = out.kronecker(v);
            }
            out
        };
        let (big_a, big_b) = (power(&self.first), power(&self.second));
        let v: DVector<Complex64> = &big_a * self.accept[0] + &big_b * self.accept[1];
        let p = &v * v.adjoint();
        let pi_1 = Projector::from_trusted(hermitize(&ComplexMatrix::new(p)?));
        Ok(BinaryTest::from_projector(pi_1))
    }
}

/// How block Helstrom tests are represented.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestBackend {
    /// Exact two-dimensional reduction when both states are pure products, dense otherwise.
    #[default]
    Auto,
    /// Always materialize the projectors.
    Dense,
}

/// Helstrom test between the `n`-site restrictions of two state models.
#[derive(Clone, Debug)]
pub enum LocalHelstromTest {
    Dense { sites: usize, test: BinaryTest },
    PureProduct(PureHelstromTest),
}

impl LocalHelstromTest {
    pub fn build(
        first: &StateModel,
        second: &StateModel,
        sites: usize,
        backend: TestBackend,
        cap: usize,
    ) -> Result<Self> {
        if backend == TestBackend::Auto {
            if let (Some(a), Some(b)) = (first.pure_site_vector(), second.pure_site_vector()) {
                return Ok(Self::PureProduct(PureHelstromTest::new(a, b, sites)?));
            }
        }
        let rho1 = first.local_density_with_cap(sites, cap)?;
        let rho2 = second.local_density_with_cap(sites, cap)?;
        Ok(Self::Dense {
            sites,
            test: helstrom_test(&rho1, &rho2)?,
        })
    }

    pub fn sites(&self) -> usize {
        match self {
            Self::Dense { sites, .. } => *sites,
            Self::PureProduct(t) => t.sites(),
        }
    }

    /// `[tr(ρ Π₁), tr(ρ Π₂)]` where `ρ` is the block density of `model`.
    /// `role` marks the model as a member of the tested pair.
    pub fn vote_probabilities(
        &self,
        model: &StateModel,
        role: Option<PairRole>,
        cap: usize,
    ) -> Result<[f64; 2]> {
        match self {
            Self::Dense { sites, test } => {
                let rho = model.local_density_with_cap(*sites, cap)?;
                let acc = trace_inner(rho.operator(), test.pi_1().operator())?;
                let rej = trace_inner(rho.operator(), test.pi_2().operator())?;
                Ok([acc.clamp(0.0, 1.0), rej.clamp(0.0, 1.0)])
            }
            Self::PureProduct(t) => match (role, model.as_product()) {
                (Some(role), _) => Ok(t.member_vote_probabilities(role)),
                (None, Some(p)) => t.vote_probabilities(p.base()),
                (None, None) => Err(Error::Unsupported(
                    "pure-product block tests need product-state hypotheses".into(),
                )),
            },
        }
    }

    pub fn to_binary_test(&self, cap: usize) -> Result<BinaryTest> {
        match self {
            Self::Dense { sites, test } => {
                block_dimension(
                    (test.dim() as f64).powf(1.0 / *sites as f64).round() as usize,
                    *sites,
                    cap,
                )?;
                Ok(test.clone())
            }
            Self::PureProduct(t) => t.to_binary_test(cap),
        }
    }
}

/// Averaged Helstrom error for the `n`-site restrictions of two models.
pub fn local_helstrom_error(
    first: &StateModel,
    second: &StateModel,
    p1: f64,
    p2: f64,
    sites: usize,
    backend: TestBackend,
    cap: usize,
) -> Result<f64> {
    check_binary_priors(p1, p2)?;
    let test = LocalHelstromTest::build(first, second, sites, backend, cap)?;
    let v1 = test.vote_probabilities(first, Some(PairRole::First), cap)?;
    let v2 = test.vote_probabilities(second, Some(PairRole::Second), cap)?;
    Ok(p1 * v1[1] + p2 * v2[0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanChernoffPoint {
    pub n: usize,
    /// `sup_s -(1/n) ln Q_n(s)` over the grid; `+inf` for orthogonal supports.
    pub value: f64,
    pub s_argmax: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanChernoffEstimate {
    pub per_n: Vec<MeanChernoffPoint>,
    /// Value at the largest `n`.
    pub extrapolated: f64,
    /// Single-site Chernoff distance, for two product models.
    pub single_letter_reference: Option<f64>,
}

/// Finite-`n` estimates of the mean Chernoff distance over `s_grid`.
pub fn mean_chernoff_estimate(
    m1: &StateModel,
    m2: &StateModel,
    n_list: &[usize],
    s_grid: &[f64],
) -> Result<MeanChernoffEstimate> {
    if s_grid.is_empty() {
        return Err(Error::Unsupported("empty s grid".into()));
    }
    let mut per_n = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let rho1 = m1.local_density(n)?;
        let rho2 = m2.local_density(n)?;
        let kernel = ChernoffKernel::new(&rho1, &rho2)?;
        let mut best = (f64::NEG_INFINITY, s_grid[0]);
        for &s in s_grid {
            let q = kernel.eval(s);
            let v = if q < Q_ZERO {
                f64::INFINITY
            } else {
                (-q.ln() / n as f64).max(0.0)
            };
            if v > best.0 {
                best = (v, s);
            }
        }
        per_n.push(MeanChernoffPoint {
            n,
            value: best.0,
            s_argmax: best.1,
        });
    }
    let extrapolated = per_n
        .iter()
        .max_by_key(|p| p.n)
        .map(|p| p.value)
        .unwrap_or(f64::NAN);
    let single_letter_reference = match (m1.as_product(), m2.as_product()) {
        (Some(a), Some(b)) => Some(chernoff_distance(a.base(), b.base())?.value),
        _ => None,
    };
    Ok(MeanChernoffEstimate {
        per_n,
        extrapolated,
        single_letter_reference,
    })
}

/// Perron root of an entrywise positive matrix by power iteration.
pub fn perron_root(m: &DMatrix<f64>) -> Result<f64> {
    let d = m.nrows();
    let mut v = DVector::from_element(d, 1.0 / d as f64);
    let mut lambda = 0.0;
    for _ in 0..1_000_000 {
        let w = m * &v;
        let next_lambda: f64 = w.sum();
        let next = w / next_lambda;
        let moved = (&next - &v).amax();
        let converged = (next_lambda - lambda).abs() <= 1e-12 * next_lambda && moved <= 1e-14;
        v = next;
        lambda = next_lambda;
        if converged {
            return Ok(lambda);
        }
    }
    Err(Error::Unsupported(
        "power iteration did not converge".into(),
    ))
}

/// Per-site Chernoff rate of two classical Markov chains:
/// `sup_s -ln λ_max(M_s)` with `M_s[x,y] = P1[x,y]^{1-s} P2[x,y]^s`.
/// The curve holds `(s, λ_max(M_s))`.
pub fn markov_chernoff_oracle(
    m1: &ClassicalMarkovModel,
    m2: &ClassicalMarkovModel,
    s_grid: &[f64],
) -> Result<ChernoffResult> {
    if m1.site_dim() != m2.site_dim() {
        return Err(Error::DimensionMismatch {
            left: m1.site_dim(),
            right: m2.site_dim(),
        });
    }
    if !m1.is_strictly_positive() || !m2.is_strictly_positive() {
        return Err(Error::InvalidModel(
            "Perron-root oracle needs strictly positive transition matrices".into(),
        ));
    }
    if s_grid.is_empty() {
        return Err(Error::Unsupported("empty s grid".into()));
    }
    let d = m1.site_dim();
    let (t1, t2) = (m1.transition(), m2.transition());
    let mut curve = Vec::with_capacity(s_grid.len());
    let mut best = (f64::NEG_INFINITY, s_grid[0]);
    for &s in s_grid {
        let ms = DMatrix::from_fn(d, d, |x, y| t1[x][y].powf(1.0 - s) * t2[x][y].powf(s));
        let root = perron_root(&ms)?;
        curve.push((s, root));
        let v = -root.ln();
        if v > best.0 {
            best = (v, s);
        }
    }
    Ok(ChernoffResult {
        value: best.0.max(0.0),
        s_star: best.1,
        q_curve: curve,
    })
}

/// Densities of both models at `n` sites, checked against `DEFAULT_MAX_DIM`.
pub fn local_pair(
    m1: &StateModel,
    m2: &StateModel,
    n: usize,
) -> Result<(DensityMatrix, DensityMatrix)> {
    Ok((
        m1.local_density_with_cap(n, DEFAULT_MAX_DIM)?,
        m2.local_density_with_cap(n, DEFAULT_MAX_DIM)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{trace_norm, HermitianOperator};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    fn cplx(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ket0() -> DensityMatrix {
        DensityMatrix::from_pure(&[cplx(1.0), cplx(0.0)]).unwrap()
    }

    fn ket_plus() -> DensityMatrix {
        DensityMatrix::from_pure(&[cplx(FRAC_1_SQRT_2), cplx(FRAC_1_SQRT_2)]).unwrap()
    }

    fn classical(p: &[f64]) -> DensityMatrix {
        DensityMatrix::from_probabilities(p).unwrap()
    }

    fn qubit(theta: f64, phi: f64, purity: f64) -> DensityMatrix {
        // mixture of a Bloch-sphere pure state with the maximally mixed state
        let psi = [
            cplx((theta / 2.0).cos()),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ];
        let pure = DensityMatrix::from_pure(&psi).unwrap();
        let op = pure
            .operator()
            .scale(purity)
            .add(&HermitianOperator::identity(2).scale((1.0 - purity) / 2.0))
            .unwrap();
        DensityMatrix::new(op).unwrap()
    }

    fn random_qubit(seed: u64) -> DensityMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        qubit(
            rng.random_range(0.0..std::f64::consts::PI),
            rng.random_range(0.0..std::f64::consts::TAU),
            rng.random_range(0.05..0.95),
        )
    }

    #[test]
    fn q_function_examples() {
        let rho = random_qubit(1);
        assert_abs_diff_eq!(q_function(&rho, &rho, 0.5).unwrap(), 1.0, epsilon = 1e-12);
        let one = DensityMatrix::from_pure(&[cplx(0.0), cplx(1.0)]).unwrap();
        for s in [0.0, 0.3, 1.0] {
            assert_abs_diff_eq!(q_function(&ket0(), &one, s).unwrap(), 0.0, epsilon = 1e-15);
        }
        // pure powers are idempotent: Q = |⟨0|+⟩|² = 1/2
        assert_abs_diff_eq!(
            q_function(&ket0(), &ket_plus(), 0.5).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert!(q_function(&ket0(), &classical(&[0.2, 0.3, 0.5]), 0.5).is_err());
    }

    #[test]
    fn kernel_agrees_with_matrix_route() {
        for seed in 0..6 {
            let (a, b) = (random_qubit(seed), random_qubit(seed + 100));
            let k = ChernoffKernel::new(&a, &b).unwrap();
            for s in uniform_grid(11) {
                assert_abs_diff_eq!(k.eval(s), q_function(&a, &b, s).unwrap(), epsilon = 1e-12);
            }
        }
        let (a, b) = (classical(&[0.5, 0.0, 0.5]), classical(&[0.2, 0.3, 0.5]));
        let k = ChernoffKernel::new(&a, &b).unwrap();
        for s in uniform_grid(7) {
            assert_abs_diff_eq!(k.eval(s), q_function(&a, &b, s).unwrap(), epsilon = 1e-14);
        }
    }

    #[test]
    fn endpoint_semantics() {
        let a = classical(&[0.5, 0.5, 0.0]);
        let b = random_qubit(3);
        let b3 = DensityMatrix::new(
            HermitianOperator::new(
                ComplexMatrix::from_rows(&[
                    vec![
                        b.operator().entry(0, 0),
                        b.operator().entry(0, 1),
                        cplx(0.0),
                    ],
                    vec![
                        b.operator().entry(1, 0),
                        b.operator().entry(1, 1),
                        cplx(0.0),
                    ],
                    vec![cplx(0.0), cplx(0.0), cplx(0.0)],
                ])
                .unwrap(),
            )
            .unwrap(),
        )
        .unwrap();
        for (r1, r2) in [(&a, &b3), (&b3, &a), (&ket0(), &ket_plus())] {
            let supp2 = crate::operator::support(r2.operator()).unwrap();
            let supp1 = crate::operator::support(r1.operator()).unwrap();
            let q0 = trace_inner(r1.operator(), supp2.operator()).unwrap();
            let q1 = trace_inner(supp1.operator(), r2.operator()).unwrap();
            assert_abs_diff_eq!(q_function(r1, r2, 0.0).unwrap(), q0, epsilon = 1e-12);
            assert_abs_diff_eq!(q_function(r1, r2, 1.0).unwrap(), q1, epsilon = 1e-12);
        }
    }

    #[test]
    fn chernoff_identical_and_orthogonal() {
        let rho = random_qubit(4);
        let r = chernoff_distance(&rho, &rho).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-12);
        let one = DensityMatrix::from_pure(&[cplx(0.0), cplx(1.0)]).unwrap();
        let r = chernoff_distance(&ket0(), &one).unwrap();
        assert!(r.value.is_infinite());
        assert_eq!(r.q_curve.len(), 201);
    }

    #[test]
    fn chernoff_pure_pair_is_ln2() {
        let r = chernoff_distance(&ket0(), &ket_plus()).unwrap();
        assert_abs_diff_eq!(r.value, LN_2, epsilon = 1e-9);
        let (lo, hi) = r
            .q_curve
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), &(_, q)| {
                (lo.min(q), hi.max(q))
            });
        assert!(hi - lo < 1e-9);
    }

    #[test]
    fn chernoff_classical_against_dense_scan() {
        // oracle: 10^5-point scan of 0.5^{1-s}(0.9^s + 0.1^s)
        let q = |s: f64| 0.5f64.powf(1.0 - s) * (0.9f64.powf(s) + 0.1f64.powf(s));
        let (mut best_q, mut best_s) = (f64::MAX, 0.0);
        for i in 0..=100_000 {
            let s = i as f64 / 100_000.0;
            if q(s) < best_q {
                best_q = q(s);
                best_s = s;
            }
        }
        let r = chernoff_distance(&classical(&[0.5, 0.5]), &classical(&[0.9, 0.1])).unwrap();
        assert_abs_diff_eq!(r.value, -best_q.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(r.s_star, best_s, epsilon = 1e-4);
        assert_abs_diff_eq!(r.value, 0.112, epsilon = 5e-4);
        assert_abs_diff_eq!(r.s_star, 0.458, epsilon = 1e-3);
    }

    #[test]
    fn chernoff_result_invariants() {
        for seed in 0..8 {
            let (a, b) = (random_qubit(seed), random_qubit(seed + 50));
            let r = chernoff_distance(&a, &b).unwrap();
            let q_star = ChernoffKernel::new(&a, &b).unwrap().eval(r.s_star);
            assert_abs_diff_eq!(r.value, -q_star.ln(), epsilon = 1e-9);
            assert!(r.q_curve.iter().all(|&(_, q)| q_star <= q + 1e-9));
            // log-convexity along the grid
            for w in r.q_curve.windows(3) {
                assert!(w[1].1.ln() <= 0.5 * (w[0].1.ln() + w[2].1.ln()) + 1e-9);
            }
        }
    }

    #[test]
    fn helstrom_examples() {
        let t = helstrom_test(&classical(&[0.9, 0.1]), &classical(&[0.1, 0.9])).unwrap();
        assert_eq!(t.pi_1().operator().diagonal().unwrap(), &[1.0, 0.0]);

        let rho = random_qubit(7);
        let t = helstrom_test(&rho, &rho).unwrap();
        assert_eq!(t.pi_1().rank(), 0);
        assert!(
            t.pi_2()
                .operator()
                .max_abs_diff(&HermitianOperator::identity(2))
                .unwrap()
                < 1e-15
        );

        // |0⟩⟨0| - |+⟩⟨+| = [[1/2, -1/2], [-1/2, -1/2]]; positive eigenvector ∝ (1+√2, -1)
        let t = helstrom_test(&ket0(), &ket_plus()).unwrap();
        let (x, y) = (1.0 + 2f64.sqrt(), -1.0);
        let norm2 = x * x + y * y;
        let p = t.pi_1().operator();
        assert_abs_diff_eq!(p.entry(0, 0).re, x * x / norm2, epsilon = 1e-12);
        assert_abs_diff_eq!(p.entry(0, 1).re, x * y / norm2, epsilon = 1e-12);
        assert_abs_diff_eq!(p.entry(1, 1).re, y * y / norm2, epsilon = 1e-12);
        assert_eq!(t.pi_1().rank(), 1);
    }

    #[test]
    fn binary_error_examples() {
        let rho = random_qubit(8);
        let t = helstrom_test(&ket0(), &ket_plus()).unwrap();
        assert_abs_diff_eq!(
            binary_error(&rho, &rho, 0.5, 0.5, &t).unwrap(),
            0.5,
            epsilon = 1e-12
        );

        let e = binary_error(&ket0(), &ket_plus(), 0.5, 0.5, &t).unwrap();
        assert_abs_diff_eq!(e, (1.0 - FRAC_1_SQRT_2) / 2.0, epsilon = 1e-12);

        let one = DensityMatrix::from_pure(&[cplx(0.0), cplx(1.0)]).unwrap();
        let t = helstrom_test(&ket0(), &one).unwrap();
        assert_abs_diff_eq!(
            binary_error(&ket0(), &one, 0.5, 0.5, &t).unwrap(),
            0.0,
            epsilon = 1e-15
        );

        assert!(matches!(
            binary_error(&ket0(), &one, 0.7, 0.7, &t),
            Err(Error::InvalidPriors(_))
        ));
        assert!(binary_error(&ket0(), &one, 1.0, 0.0, &t).is_err());
    }

    #[test]
    fn helstrom_is_optimal_among_random_projective_tests() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for seed in 0..4 {
            let (a, b) = (random_qubit(seed), random_qubit(seed + 10));
            let eq = binary_error(&a, &b, 0.5, 0.5, &helstrom_test(&a, &b).unwrap()).unwrap();
            let half = a
                .operator()
                .scale(0.5)
                .sub(&b.operator().scale(0.5))
                .unwrap();
            assert_abs_diff_eq!(eq, 0.5 * (1.0 - trace_norm(&half).unwrap()), epsilon = 1e-9);
            for _ in 0..100 {
                let th = rng.random_range(0.0..std::f64::consts::PI);
                let ph = rng.random_range(0.0..std::f64::consts::TAU);
                let proj = DensityMatrix::from_pure(&[
                    cplx((th / 2.0).cos()),
                    Complex64::from_polar((th / 2.0).sin(), ph),
                ])
                .unwrap();
                let other =
                    BinaryTest::from_projector(Projector::new(proj.operator().clone()).unwrap());
                assert!(eq <= binary_error(&a, &b, 0.5, 0.5, &other).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn pure_test_matches_dense_route() {
        let a = StateModel::pure_qubit(0.4, 0.0).unwrap();
        let b = StateModel::pure_qubit(1.3, 0.9).unwrap();
        let c = StateModel::pure_qubit(2.2, 2.0).unwrap();
        let mixed = StateModel::product(random_qubit(12));
        for sites in 1..=5 {
            let pure = LocalHelstromTest::build(&a, &b, sites, TestBackend::Auto, DEFAULT_MAX_DIM)
                .unwrap();
            let dense =
                LocalHelstromTest::build(&a, &b, sites, TestBackend::Dense, DEFAULT_MAX_DIM)
                    .unwrap();
            assert!(matches!(pure, LocalHelstromTest::PureProduct(_)));
            for (model, role) in [
                (&a, Some(PairRole::First)),
                (&b, Some(PairRole::Second)),
                (&a, None),
                (&c, None),
                (&mixed, None),
            ] {
                let p = pure
                    .vote_probabilities(model, role, DEFAULT_MAX_DIM)
                    .unwrap();
                let d = dense
                    .vote_probabilities(model, role, DEFAULT_MAX_DIM)
                    .unwrap();
                assert_abs_diff_eq!(p[0], d[0], epsilon = 1e-10);
                assert_abs_diff_eq!(p[1], d[1], epsilon = 1e-10);
            }
            let materialized = pure.to_binary_test(DEFAULT_MAX_DIM).unwrap();
            let LocalHelstromTest::Dense { test, .. } = &dense else {
                unreachable!()
            };
            assert!(
                materialized
                    .pi_1()
                    .operator()
                    .max_abs_diff(test.pi_1().operator())
                    .unwrap()
                    < 1e-10
            );
        }
    }

    #[test]
    fn pure_pair_helstrom_closed_form() {
        let a = StateModel::pure_qubit(0.0, 0.0).unwrap();
        let b = StateModel::pure_qubit(std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        for n in 1..=40 {
            let e = local_helstrom_error(&a, &b, 0.5, 0.5, n, TestBackend::Auto, DEFAULT_MAX_DIM)
                .unwrap();
            let x = 2f64.powi(-(n as i32));
            // (1 - √(1 - x))/2 rewritten without cancellation
            let closed = x / (2.0 * (1.0 + (1.0 - x).sqrt()));
            assert!(
                (e - closed).abs() <= 1e-12 * closed,
                "n = {n}: {e} vs {closed}"
            );
        }
    }

    #[test]
    fn mean_estimate_product_matches_single_letter() {
        let a = StateModel::product(random_qubit(20));
        let b = StateModel::product(random_qubit(21));
        let grid = uniform_grid(101);
        let est = mean_chernoff_estimate(&a, &b, &[1, 2, 3, 4, 5], &grid).unwrap();
        // Q_n = Q_1^n exactly, so each per-n sup equals the grid sup at n = 1
        let single = est.per_n[0].value;
        for p in &est.per_n {
            assert_abs_diff_eq!(p.value, single, epsilon = 1e-8);
        }
        let reference = est.single_letter_reference.unwrap();
        // the refined minimum can only be at least as good as the grid maximum
        assert!(reference >= single - 1e-12);
        assert!(reference - single < 1e-4);

        let same = mean_chernoff_estimate(&a, &a, &[1, 3], &grid).unwrap();
        assert!(same.per_n.iter().all(|p| p.value.abs() < 1e-12));
    }

    #[test]
    fn markov_oracle_examples() {
        let grid = uniform_grid(101);
        let m = ClassicalMarkovModel::stationary(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
        assert_abs_diff_eq!(
            markov_chernoff_oracle(&m, &m, &grid).unwrap().value,
            0.0,
            epsilon = 1e-12
        );

        // i.i.d. chains: rows equal to the stationary law
        let p = [0.3, 0.7];
        let q = [0.8, 0.2];
        let iid = |r: [f64; 2]| {
            ClassicalMarkovModel::new(r.to_vec(), vec![r.to_vec(), r.to_vec()]).unwrap()
        };
        let oracle = markov_chernoff_oracle(&iid(p), &iid(q), &grid).unwrap();
        let scalar = grid
            .iter()
            .map(|&s| -(p[0].powf(1.0 - s) * q[0].powf(s) + p[1].powf(1.0 - s) * q[1].powf(s)).ln())
            .fold(f64::MIN, f64::max);
        assert_abs_diff_eq!(oracle.value, scalar, epsilon = 1e-12);

        let bad = ClassicalMarkovModel::new(vec![1.0, 0.0], vec![vec![1.0, 0.0], vec![0.5, 0.5]])
            .unwrap();
        assert!(matches!(
            markov_chernoff_oracle(&bad, &m, &grid),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn perron_root_matches_closed_form_2x2() {
        let t1: [[f64; 2]; 2] = [[0.9, 0.1], [0.2, 0.8]];
        let t2: [[f64; 2]; 2] = [[0.1, 0.9], [0.4, 0.6]];
        for s in uniform_grid(21) {
            let m = DMatrix::from_fn(2, 2, |x, y| t1[x][y].powf(1.0 - s) * t2[x][y].powf(s));
            let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            let tr = a + d;
            let det = a * d - b * c;
            let closed = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());
            assert_abs_diff_eq!(perron_root(&m).unwrap(), closed, epsilon = 1e-12);
        }
    }

    #[test]
    fn helstrom_error_obeys_chernoff_upper_bound() {
        // P_err ≤ p1^{1-s} p2^s Q(s)^n for every s, in particular s*
        let a = StateModel::product(qubit(0.3, 0.0, 0.9));
        let b = StateModel::product(qubit(1.6, 0.5, 0.9));
        let r = chernoff_distance(
            a.as_product().unwrap().base(),
            b.as_product().unwrap().base(),
        )
        .unwrap();
        for n in 1..=8 {
            let e = local_helstrom_error(&a, &b, 0.5, 0.5, n, TestBackend::Auto, DEFAULT_MAX_DIM)
                .unwrap();
            let bound = 0.5 * (-r.value * n as f64).exp();
            assert!(e <= bound * (1.0 + 1e-9), "n = {n}: {e} > {bound}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn chernoff_is_symmetric(s1 in 0u64..10_000, s2 in 0u64..10_000) {
            let (a, b) = (random_qubit(s1), random_qubit(s2 + 20_000));
            let ab = chernoff_distance(&a, &b).unwrap();
            let ba = chernoff_distance(&b, &a).unwrap();
            prop_assert!((ab.value - ba.value).abs() < 1e-8);
            if ab.value > 1e-6 {
                prop_assert!((ab.s_star - (1.0 - ba.s_star)).abs() < 1e-3);
            }
        }

        #[test]
        fn pure_states_have_flat_q(t1 in 0.0f64..3.1, p1 in 0.0f64..6.2, t2 in 0.0f64..3.1, p2 in 0.0f64..6.2) {
            let a = DensityMatrix::from_pure(&[cplx((t1 / 2.0).cos()), Complex64::from_polar((t1 / 2.0).sin(), p1)]).unwrap();
            let b = DensityMatrix::from_pure(&[cplx((t2 / 2.0).cos()), Complex64::from_polar((t2 / 2.0).sin(), p2)]).unwrap();
            let k = ChernoffKernel::new(&a, &b).unwrap();
            let q0 = k.eval(0.0);
            for s in uniform_grid(21) {
                prop_assert!((k.eval(s) - q0).abs() < 1e-9);
            }
        }

        #[test]
        fn helstrom_error_is_trace_norm_bound(s1 in 0u64..10_000, s2 in 0u64..10_000) {
            let (a, b) = (random_qubit(s1), random_qubit(s2 + 40_000));
            let t = helstrom_test(&a, &b).unwrap();
            let e = binary_error(&a, &b, 0.5, 0.5, &t).unwrap();
            let half = a.operator().scale(0.5).sub(&b.operator().scale(0.5)).unwrap();
            prop_assert!((e - 0.5 * (1.0 - trace_norm(&half).unwrap())).abs() < 1e-9);
        }
    }
}
