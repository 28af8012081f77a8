use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ClassicalMarkovModel, HypothesisSet, StateModel};
use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, DensityMatrix, HermitianOperator};

/// On-disk hypothesis set: `{"priors": [...], "states": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSetFile {
    pub priors: Vec<f64>,
    pub states: Vec<StateEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StateEntry {
    /// Site density given as rows of `[re, im]` pairs.
    Product { matrix: Vec<Vec<[f64; 2]>> },
    Markov {
        initial: Vec<f64>,
        transition: Vec<Vec<f64>>,
    },
    /// Bloch angles `[theta, phi]` in radians.
    PureQubit { bloch: [f64; 2] },
}

impl StateEntry {
    pub fn to_model(&self) -> Result<StateModel> {
        match self {
            StateEntry::Product { matrix } => {
                let rows: Vec<Vec<Complex64>> = matrix
                    .iter()
                    .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                    .collect();
                let m = ComplexMatrix::from_rows(&rows)?;
                let rho = DensityMatrix::new(HermitianOperator::new(m)?)?;
                Ok(StateModel::product(rho))
            }
            StateEntry::Markov {
                initial,
                transition,
            } => Ok(StateModel::Markov(ClassicalMarkovModel::new(
                initial.clone(),
                transition.clone(),
            )?)),
            StateEntry::PureQubit {
                bloch: [theta, phi],
            } => StateModel::pure_qubit(*theta, *phi),
        }
    }
}

impl HypothesisSetFile {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Builds and validates the hypothesis set.
    pub fn to_hypothesis_set(&self) -> Result<HypothesisSet> {
        let models = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.to_model()
                    .map_err(|e| Error::InvalidModel(format!("state {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        HypothesisSet::new(models, self.priors.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_all_state_kinds() {
        let text = r#"{
            "priors": [0.25, 0.25, 0.5],
            "states": [
                {"type": "product", "matrix": [[[0.75, 0.0], [0.0, 0.25]], [[0.0, -0.25], [0.25, 0.0]]]},
                {"type": "markov", "initial": [0.5, 0.5], "transition": [[0.9, 0.1], [0.1, 0.9]]},
                {"type": "pure_qubit", "bloch": [1.5707963267948966, 0.0]}
            ]
        }"#;
        let file = HypothesisSetFile::from_json_str(text).unwrap();
        assert_eq!(file.states.len(), 3);
        let hs = file.to_hypothesis_set().unwrap();
        assert_eq!(hs.len(), 3);
        assert!(hs.model(1).as_markov().is_some());
        let plus = hs.model(2).local_density(1).unwrap();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_abs_diff_eq!(plus.operator().entry(i, j).re, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn pure_qubit_phase_convention() {
        let entry = StateEntry::PureQubit {
            bloch: [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2],
        };
        let rho = entry.to_model().unwrap().local_density(1).unwrap();
        // |ψ⟩ = (1, i)/√2  ⇒  ρ_01 = ψ_0 conj(ψ_1) = -i/2
        assert_abs_diff_eq!(rho.operator().entry(0, 1).im, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(
            HypothesisSetFile::from_json_str(r#"{"priors": [1.0], "states": [{"type": "nope"}]}"#),
            Err(Error::Parse(_))
        ));
        let not_density = HypothesisSetFile {
            priors: vec![0.5, 0.5],
            states: vec![
                StateEntry::Product {
                    matrix: vec![vec![[2.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [0.0, 0.0]]],
                },
                StateEntry::PureQubit { bloch: [0.0, 0.0] },
            ],
        };
        assert!(matches!(
            not_density.to_hypothesis_set(),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn serializes_with_type_tag() {
        let entry = StateEntry::PureQubit { bloch: [0.5, 0.25] };
        let text = serde_json::to_string(&entry).unwrap();
        assert_eq!(text, r#"{"type":"pure_qubit","bloch":[0.5,0.25]}"#);
    }
}
