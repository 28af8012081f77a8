//! Shift-invariant state models and hypothesis sets.
//!
//! A model produces the local density on `n` consecutive sites. Product
//! models return `base^{⊗n}`, classical Markov models return the diagonal
//! path distribution of a stationary chain, and explicit models return a
//! stored sequence.

mod json;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{trace_norm, DensityMatrix, HermitianOperator, DEFAULT_MAX_DIM};

pub use json::{HypothesisSetFile, StateEntry};

const STOCHASTIC_TOL: f64 = 1e-10;
const PRIOR_SUM_TOL: f64 = 1e-12;
/// Minimum trace distance for two hypotheses to count as distinct.
pub const DISTINCTNESS_TOL: f64 = 1e-9;

/// `d^n`, or a cap error if it exceeds `cap`.
pub fn block_dimension(site_dim: usize, n: usize, cap: usize) -> Result<usize> {
    let exp = u32::try_from(n).unwrap_or(u32::MAX);
    match site_dim.checked_pow(exp) {
        Some(d) if d <= cap => Ok(d),
        Some(d) => Err(Error::DimensionCap { requested: d, cap }),
        None => Err(Error::DimensionCap {
            requested: usize::MAX,
            cap,
        }),
    }
}

/// I.i.d. state: `ρ^{(n)} = base^{⊗n}`.
#[derive(Clone, Debug)]
pub struct ProductModel {
    base: DensityMatrix,
    pure: Option<DVector<Complex64>>,
}

impl ProductModel {
    pub fn new(base: DensityMatrix) -> Self {
        let pure = base.pure_vector();
        Self { base, pure }
    }

    pub fn base(&self) -> &DensityMatrix {
        &self.base
    }

    /// Unit vector of the site state when it is pure.
    pub fn pure_vector(&self) -> Option<&DVector<Complex64>> {
        self.pure.as_ref()
    }

    fn local_density(&self, n: usize, cap: usize) -> Result<DensityMatrix> {
        block_dimension(self.base.dim(), n, cap)?;
        let mut rho = self.base.clone();
        for _ in 1..n {
            rho = rho.tensor(&self.base, cap)?;
        }
        Ok(rho)
    }
}

/// Stationary classical Markov chain embedded as diagonal densities.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalMarkovModel {
    initial: Vec<f64>,
    transition: Vec<Vec<f64>>,
}

impl ClassicalMarkovModel {
    pub fn new(initial: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let d = initial.len();
        if d == 0 {
            return Err(Error::InvalidModel("empty initial distribution".into()));
        }
        if transition.len() != d || transition.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidModel(format!(
                "transition matrix must be {d}x{d}"
            )));
        }
        let finite_nonneg = |x: &f64| x.is_finite() && *x >= 0.0;
        if !initial.iter().all(finite_nonneg) {
            return Err(Error::InvalidModel(
                "initial distribution has negative or non-finite entries".into(),
            ));
        }
        if (initial.iter().sum::<f64>() - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidModel(
                "initial distribution does not sum to 1".into(),
            ));
        }
        for (x, row) in transition.iter().enumerate() {
            if !row.iter().all(finite_nonneg) {
                return Err(Error::InvalidModel(format!(
                    "transition row {x} has negative or non-finite entries"
                )));
            }
            if (row.iter().sum::<f64>() - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidModel(format!(
                    "transition row {x} does not sum to 1"
                )));
            }
        }
        for y in 0..d {
            let flowed: f64 = (0..d).map(|x| initial[x] * transition[x][y]).sum();
            if (flowed - initial[y]).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidModel(
                    "initial distribution is not stationary for the transition matrix".into(),
                ));
            }
        }
        Ok(Self {
            initial,
            transition,
        })
    }

    /// Chain started in a stationary distribution of `transition`.
    pub fn stationary(transition: Vec<Vec<f64>>) -> Result<Self> {
        let d = transition.len();
        if d == 0 || transition.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidModel(
                "transition matrix must be square".into(),
            ));
        }
        // Solve π (P - I) = 0 with the last equation replaced by Σπ = 1.
        let mut a = DMatrix::<f64>::zeros(d, d);
        for y in 0..d {
            for x in 0..d {
                a[(y, x)] = transition[x][y] - if x == y { 1.0 } else { 0.0 };
            }
        }
        for x in 0..d {
            a[(d - 1, x)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(d);
        rhs[d - 1] = 1.0;
        let pi = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidModel("stationary distribution is not unique".into()))?;
        let initial = pi.iter().map(|v| v.max(0.0)).collect();
        Self::new(initial, transition)
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn site_dim(&self) -> usize {
        self.initial.len()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.transition.iter().flatten().all(|&p| p > 0.0)
    }

    /// Probabilities of all length-`n` paths, first site most significant.
    pub fn path_probabilities(&self, n: usize, cap: usize) -> Result<Vec<f64>> {
        let d = self.site_dim();
        block_dimension(d, n.max(1), cap)?;
        let mut probs = self.initial.clone();
        for _ in 1..n {
            let mut next = Vec::with_capacity(probs.len() * d);
            for (idx, p) in probs.iter().enumerate() {
                let last = idx % d;
                next.extend(self.transition[last].iter().map(|t| p * t));
            }
            probs = next;
        }
        Ok(probs)
    }
}

/// User-supplied densities for `n = 1..=n_max`.
#[derive(Clone, Debug)]
pub struct ExplicitSequenceModel {
    site_dim: usize,
    densities: Vec<DensityMatrix>,
}

impl ExplicitSequenceModel {
    pub fn new(densities: Vec<DensityMatrix>) -> Result<Self> {
        let first = densities.first().ok_or_else(|| {
            Error::InvalidModel("explicit model needs at least one density".into())
        })?;
        let d = first.dim();
        for (k, rho) in densities.iter().enumerate() {
            let expected = d.checked_pow(k as u32 + 1).unwrap_or(usize::MAX);
            if rho.dim() != expected {
                return Err(Error::InvalidModel(format!(
                    "density for n = {} has dimension {}, expected {}",
                    k + 1,
                    rho.dim(),
                    expected
                )));
            }
        }
        Ok(Self {
            site_dim: d,
            densities,
        })
    }

    pub fn n_max(&self) -> usize {
        self.densities.len()
    }
}

#[derive(Clone, Debug)]
pub enum StateModel {
    Product(ProductModel),
    Markov(ClassicalMarkovModel),
    Explicit(ExplicitSequenceModel),
}

impl StateModel {
    pub fn product(base: DensityMatrix) -> Self {
        StateModel::Product(ProductModel::new(base))
    }

    /// Pure qubit `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`, repeated on every site.
    pub fn pure_qubit(theta: f64, phi: f64) -> Result<Self> {
        let psi = [
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ];
        Ok(Self::product(DensityMatrix::from_pure(&psi)?))
    }

    pub fn site_dim(&self) -> usize {
        match self {
            StateModel::Product(p) => p.base.dim(),
            StateModel::Markov(m) => m.site_dim(),
            StateModel::Explicit(e) => e.site_dim,
        }
    }

    pub fn as_product(&self) -> Option<&ProductModel> {
        match self {
            StateModel::Product(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_markov(&self) -> Option<&ClassicalMarkovModel> {
        match self {
            StateModel::Markov(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, StateModel::Product(_))
    }

    /// Site vector if this is a product of a pure state.
    pub fn pure_site_vector(&self) -> Option<&DVector<Complex64>> {
        self.as_product().and_then(ProductModel::pure_vector)
    }

    pub fn local_density(&self, n: usize) -> Result<DensityMatrix> {
        self.local_density_with_cap(n, DEFAULT_MAX_DIM)
    }

    pub fn local_density_with_cap(&self, n: usize, cap: usize) -> Result<DensityMatrix> {
        if n == 0 {
            return Err(Error::BlockOutOfRange { n, max: usize::MAX });
        }
        match self {
            StateModel::Product(p) => p.local_density(n, cap),
            StateModel::Markov(m) => {
                let probs = m.path_probabilities(n, cap)?;
                DensityMatrix::new(HermitianOperator::from_diagonal(probs)?)
            }
            StateModel::Explicit(e) => {
                if n > e.n_max() {
                    return Err(Error::BlockOutOfRange { n, max: e.n_max() });
                }
                block_dimension(e.site_dim, n, cap)?;
                Ok(e.densities[n - 1].clone())
            }
        }
    }
}

/// Trace distance `½‖ρ - σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(0.5 * trace_norm(&rho.operator().sub(sigma.operator())?)?)
}

/// One violated constraint of a hypothesis set.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    TooFewHypotheses(usize),
    PriorCount {
        models: usize,
        priors: usize,
    },
    PriorOutOfRange {
        index: usize,
        value: f64,
    },
    PriorSum(f64),
    MixedSiteDims {
        index: usize,
        expected: usize,
        found: usize,
    },
    NotDistinct {
        i: usize,
        j: usize,
        n: usize,
        trace_distance: f64,
    },
    Model {
        index: usize,
        message: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewHypotheses(r) => write!(f, "need at least 2 hypotheses, got {r}"),
            Violation::PriorCount { models, priors } => {
                write!(f, "{priors} priors given for {models} hypotheses")
            }
            Violation::PriorOutOfRange { index, value } => {
                write!(f, "prior {} = {value} is not in (0,1)", index + 1)
            }
            Violation::PriorSum(s) => write!(f, "priors sum to {s}, not 1"),
            Violation::MixedSiteDims {
                index,
                expected,
                found,
            } => write!(
                f,
                "hypothesis {} has site dimension {found}, expected {expected}",
                index + 1
            ),
            Violation::NotDistinct {
                i,
                j,
                n,
                trace_distance,
            } => write!(
                f,
                "hypotheses {} and {} are not distinct at n = {n} (trace distance {trace_distance:e})",
                i + 1,
                j + 1
            ),
            Violation::Model { index, message } => {
                write!(f, "hypothesis {}: {message}", index + 1)
            }
        }
    }
}

/// Every constraint a hypothesis set violates; empty when valid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks priors, site dimensions, and pairwise distinctness at `n = 1`.
pub fn validate_hypothesis_set(models: &[StateModel], priors: &[f64]) -> ValidationReport {
    let mut violations = Vec::new();
    if models.len() < 2 {
        violations.push(Violation::TooFewHypotheses(models.len()));
    }
    if priors.len() != models.len() {
        violations.push(Violation::PriorCount {
            models: models.len(),
            priors: priors.len(),
        });
    }
    for (index, &value) in priors.iter().enumerate() {
        if !(value > 0.0 && value < 1.0) {
            violations.push(Violation::PriorOutOfRange { index, value });
        }
    }
    let sum: f64 = priors.iter().sum();
    if (sum - 1.0).abs() > PRIOR_SUM_TOL {
        violations.push(Violation::PriorSum(sum));
    }
    let mut dims_ok = true;
    if let Some(first) = models.first() {
        let expected = first.site_dim();
        for (index, m) in models.iter().enumerate().skip(1) {
            if m.site_dim() != expected {
                dims_ok = false;
                violations.push(Violation::MixedSiteDims {
                    index,
                    expected,
                    found: m.site_dim(),
                });
            }
        }
    }
    if dims_ok {
        violations.extend(distinctness_violations(models, 1));
    }
    ValidationReport { violations }
}

fn distinctness_violations(models: &[StateModel], n: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut densities = Vec::with_capacity(models.len());
    for (index, m) in models.iter().enumerate() {
        match m.local_density(n) {
            Ok(rho) => densities.push(Some(rho)),
            Err(e) => {
                out.push(Violation::Model {
                    index,
                    message: e.to_string(),
                });
                densities.push(None);
            }
        }
    }
    for i in 0..models.len() {
        for j in i + 1..models.len() {
            if let (Some(a), Some(b)) = (&densities[i], &densities[j]) {
                match trace_distance(a, b) {
                    Ok(td) if td > DISTINCTNESS_TOL => {}
                    Ok(td) => out.push(Violation::NotDistinct {
                        i,
                        j,
                        n,
                        trace_distance: td,
                    }),
                    Err(e) => out.push(Violation::Model {
                        index: j,
                        message: e.to_string(),
                    }),
                }
            }
        }
    }
    out
}

/// `r ≥ 2` pairwise distinct state models with strictly positive priors.
#[derive(Clone, Debug)]
pub struct HypothesisSet {
    models: Vec<StateModel>,
    priors: Vec<f64>,
}

impl HypothesisSet {
    pub fn new(models: Vec<StateModel>, priors: Vec<f64>) -> Result<Self> {
        let report = validate_hypothesis_set(&models, &priors);
        if !report.is_valid() {
            return Err(Error::InvalidHypotheses(report));
        }
        Ok(Self { models, priors })
    }

    /// Equal priors `1/r`.
    pub fn uniform(models: Vec<StateModel>) -> Result<Self> {
        let r = models.len().max(1);
        let priors = vec![1.0 / r as f64; models.len()];
        Self::new(models, priors)
    }

    /// Distinctness check at a larger block size.
    pub fn check_distinct_at(&self, n: usize) -> ValidationReport {
        ValidationReport {
            violations: distinctness_violations(&self.models, n),
        }
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn models(&self) -> &[StateModel] {
        &self.models
    }

    pub fn model(&self, i: usize) -> &StateModel {
        &self.models[i]
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn site_dim(&self) -> usize {
        self.models[0].site_dim()
    }

    pub fn all_product(&self) -> bool {
        self.models.iter().all(StateModel::is_product)
    }

    pub fn all_markov(&self) -> bool {
        self.models.iter().all(|m| m.as_markov().is_some())
    }

    pub fn all_pure_product(&self) -> bool {
        self.models.iter().all(|m| m.pure_site_vector().is_some())
    }
}
