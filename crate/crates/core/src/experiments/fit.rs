use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which sweep points enter the exponent fit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWindow {
    /// The larger half of the `n` values, at least three of them.
    #[default]
    UpperHalf,
    All,
}

/// Least-squares line through `(n, -ln Err)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFit {
    /// Nats per site.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExponentEstimate {
    Fitted(ExponentFit),
    /// Every error in the window is zero.
    Infinite {
        window: Vec<usize>,
    },
}

impl ExponentEstimate {
    pub fn slope(&self) -> f64 {
        match self {
            Self::Fitted(f) => f.slope,
            Self::Infinite { .. } => f64::INFINITY,
        }
    }

    pub fn window(&self) -> &[usize] {
        match self {
            Self::Fitted(f) => &f.window,
            Self::Infinite { window } => window,
        }
    }
}

/// `(slope, intercept, r²)` of ordinary least squares.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}

/// Slope of `-ln Err` against `n` over the chosen window of `(n, Err)` rows.
pub fn fit_exponent(rows: &[(usize, f64)], window: FitWindow) -> Result<ExponentEstimate> {
    let mut sorted = rows.to_vec();
    sorted.sort_by_key(|r| r.0);
    let start = match window {
        FitWindow::All => 0,
        FitWindow::UpperHalf => (sorted.len() / 2).min(sorted.len().saturating_sub(3)),
    };
    let chosen = &sorted[start..];
    let ns: Vec<usize> = chosen.iter().map(|r| r.0).collect();
    if !chosen.is_empty() && chosen.iter().all(|r| r.1 == 0.0) {
        return Ok(ExponentEstimate::Infinite { window: ns });
    }
    let usable: Vec<(f64, f64)> = chosen
        .iter()
        .filter(|r| r.1 > 0.0 && r.1.is_finite())
        .map(|r| (r.0 as f64, -r.1.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 points with positive error, got {}",
            usable.len()
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
    let (slope, intercept, r_squared) = least_squares(&x, &y);
    Ok(ExponentEstimate::Fitted(ExponentFit {
        slope,
        intercept,
        r_squared,
        window: ns,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn synthetic(c: f64, a: f64) -> Vec<(usize, f64)> {
        (2..=20)
            .step_by(2)
            .map(|n| (n, a * (-c * n as f64).exp()))
            .collect()
    }

    #[test]
    fn exact_exponential() {
        let ExponentEstimate::Fitted(f) =
            fit_exponent(&synthetic(0.3, 1.0), FitWindow::All).unwrap()
        else {
            panic!("expected a fit")
        };
        assert_abs_diff_eq!(f.slope, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(f.intercept, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(f.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn prefactor_goes_to_intercept() {
        let est = fit_exponent(&synthetic(0.7, 0.25), FitWindow::UpperHalf).unwrap();
        assert_abs_diff_eq!(est.slope(), 0.7, epsilon = 1e-12);
        assert_eq!(est.window(), &[12, 14, 16, 18, 20]);
    }

    #[test]
    fn noisy_data_within_confidence() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let rows: Vec<(usize, f64)> = (1..=40)
            .map(|n| {
                let noise: f64 = rng.random_range(-0.05..0.05);
                (n, (-0.4 * n as f64 + noise).exp())
            })
            .collect();
        // |slope error| ≤ max|noise| · Σ|x - x̄| / Sxx for bounded noise
        let x: Vec<f64> = (1..=40).map(f64::from).collect();
        let mx = x.iter().sum::<f64>() / 40.0;
        let bound = 0.05 * x.iter().map(|a| (a - mx).abs()).sum::<f64>()
            / x.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
        let est = fit_exponent(&rows, FitWindow::All).unwrap();
        assert!((est.slope() - 0.4).abs() <= bound);
    }

    #[test]
    fn zero_errors_and_short_windows() {
        let zeros = vec![(1, 0.0), (2, 0.0), (3, 0.0), (4, 0.0)];
        let est = fit_exponent(&zeros, FitWindow::UpperHalf).unwrap();
        assert!(est.slope().is_infinite());
        assert_eq!(est.window(), &[2, 3, 4]);
        assert!(matches!(
            fit_exponent(&[(1, 0.1), (2, 0.01)], FitWindow::All),
            Err(Error::Fit(_))
        ));
        let flat = vec![(1, 0.5), (2, 0.5), (3, 0.5)];
        let est = fit_exponent(&flat, FitWindow::All).unwrap();
        assert_abs_diff_eq!(est.slope(), 0.0, epsilon = 1e-15);
    }
}
