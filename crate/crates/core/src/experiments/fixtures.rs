//! Hypothesis sets used by the built-in checks.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::operator::{DensityMatrix, HermitianOperator};
use crate::states::{ClassicalMarkovModel, HypothesisSet, StateModel};

/// Uniform set of pure qubits given by Bloch angles `(θ, φ)`.
pub fn bloch_set(angles: &[(f64, f64)]) -> Result<HypothesisSet> {
    let models = angles
        .iter()
        .map(|&(t, p)| StateModel::pure_qubit(t, p))
        .collect::<Result<Vec<_>>>()?;
    HypothesisSet::uniform(models)
}

/// `|0⟩` and `|+⟩`.
pub fn zero_plus_pair() -> Result<HypothesisSet> {
    bloch_set(&[(0.0, 0.0), (FRAC_PI_2, 0.0)])
}

/// Three pure qubits with unequal pairwise distances.
pub fn pure_triple() -> Result<HypothesisSet> {
    bloch_set(&[(0.0, 0.0), (FRAC_PI_3, 0.0), (2.0 * FRAC_PI_3, FRAC_PI_2)])
}

/// Random mixed qubit: Bloch vector of length in `[0.5, 0.95]`, uniform direction.
pub fn random_qubit(rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let cos_t: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let len: f64 = rng.random_range(0.5..0.95);
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    let (x, y, z) = (
        len * sin_t * phi.cos(),
        len * sin_t * phi.sin(),
        len * cos_t,
    );
    let m = crate::operator::ComplexMatrix::from_rows(&[
        vec![
            Complex64::new(0.5 * (1.0 + z), 0.0),
            Complex64::new(0.5 * x, -0.5 * y),
        ],
        vec![
            Complex64::new(0.5 * x, 0.5 * y),
            Complex64::new(0.5 * (1.0 - z), 0.0),
        ],
    ])?;
    DensityMatrix::new(HermitianOperator::new(m)?)
}

/// Three random mixed qubit product states with non-uniform priors.
pub fn random_qubit_triple(seed: u64) -> Result<HypothesisSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let models = (0..3)
        .map(|_| random_qubit(&mut rng).map(StateModel::product))
        .collect::<Result<Vec<_>>>()?;
    HypothesisSet::new(models, vec![0.25, 0.35, 0.4])
}

/// Two strictly positive two-state chains started in their stationary laws.
pub fn markov_pair() -> Result<(ClassicalMarkovModel, ClassicalMarkovModel)> {
    Ok((
        ClassicalMarkovModel::stationary(vec![vec![0.9, 0.1], vec![0.2, 0.8]])?,
        ClassicalMarkovModel::stationary(vec![vec![0.1, 0.9], vec![0.4, 0.6]])?,
    ))
}
