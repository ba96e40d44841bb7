use serde::Serialize;

use super::DimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimEstimate {
    #[serde(rename = "M")]
    pub m: f64,
    pub epsilon: f64,
    pub k_est: f64,
    pub sample_factor_pct: f64,
}

/// Distortion `eps` solving `(1 + eps) / (1 - eps) = r^2` for the loss
/// ratio `r = sketch / full`.
///
/// The losses are relative (unsquared) errors, so the ratio is squared to
/// compare squared-norm distortions.
pub fn epsilon_from_losses(full_loss: f64, sketch_loss: f64) -> Result<f64, DimError> {
    if !(full_loss > 0.0 && full_loss.is_finite() && sketch_loss.is_finite()) {
        return Err(DimError::InvalidArgument(format!(
            "losses must be positive and finite, got full {full_loss}, sketch {sketch_loss}"
        )));
    }
    if sketch_loss < full_loss {
        return Err(DimError::NegativeDistortion {
            full: full_loss,
            sketch: sketch_loss,
        });
    }
    let r2 = (sketch_loss / full_loss).powi(2);
    Ok((r2 - 1.0) / (r2 + 1.0))
}

/// `100 (M / eps^2) / n`, in percent.
pub fn estimated_sample_factor(m: f64, epsilon: f64, n: usize) -> Result<f64, DimError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(DimError::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(m > 0.0) || n == 0 {
        return Err(DimError::InvalidArgument(format!("need M > 0 and n >= 1, got M={m}, n={n}")));
    }
    Ok(100.0 * (m / (epsilon * epsilon)) / n as f64)
}

pub fn estimate(m: f64, full_loss: f64, sketch_loss: f64, n: usize) -> Result<DimEstimate, DimError> {
    let epsilon = epsilon_from_losses(full_loss, sketch_loss)?;
    let sample_factor_pct = estimated_sample_factor(m, epsilon, n)?;
    Ok(DimEstimate {
        m,
        epsilon,
        k_est: m / (epsilon * epsilon),
        sample_factor_pct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_rows() {
        assert!((epsilon_from_losses(0.0262, 0.0485).unwrap() - 0.5482).abs() < 5e-5);
        assert!((epsilon_from_losses(0.0076, 0.0326).unwrap() - 0.8969).abs() < 5e-5);
        assert_eq!(epsilon_from_losses(0.1, 0.1).unwrap(), 0.0);
        assert!(matches!(
            epsilon_from_losses(0.2, 0.1),
            Err(DimError::NegativeDistortion { .. })
        ));
    }

    #[test]
    fn zero_epsilon_rejected() {
        assert!(estimate(11.0, 0.1, 0.1, 2500).is_err());
    }

    #[test]
    fn k_relation() {
        let e = estimate(11.0, 0.0262, 0.0485, 2500).unwrap();
        assert!((e.k_est * e.epsilon * e.epsilon - 11.0).abs() < 1e-9);
        assert!((e.sample_factor_pct - 100.0 * e.k_est / 2500.0).abs() < 1e-12);
    }
}
