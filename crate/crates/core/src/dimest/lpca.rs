use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use super::DimError;
use crate::model::CompressorModel;
use crate::numcore::Tensor;
use crate::sketch::{derive_seed, rng_from_seed, stream};

/// Fraction of variance the retained components must explain.
pub const DEFAULT_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpcaOptions {
    pub n_samples: usize,
    pub perturb_scale: f64,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for LpcaOptions {
    fn default() -> Self {
        Self {
            n_samples: 200,
            perturb_scale: 1e-5,
            threshold: DEFAULT_THRESHOLD,
            seed: 0,
        }
    }
}

/// Number of principal components explaining `threshold` of the variance of
/// `points` (one point per row).
///
/// Works on the `s x s` Gram matrix of centered points, so the cost does
/// not depend on the ambient dimension beyond forming it.
pub fn lpca_from_cloud(points: &DMatrix<f64>, threshold: f64) -> Result<usize, DimError> {
    let s = points.nrows();
    if s < 2 {
        return Err(DimError::InvalidArgument(format!("need at least 2 points, got {s}")));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(DimError::InvalidArgument(format!("threshold must lie in (0, 1], got {threshold}")));
    }
    let mean = points.row_mean();
    let mut centered = points.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let gram = &centered * centered.transpose();
    let mut eig: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().map(|v| v.max(0.0)).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = eig.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(DimError::Degenerate);
    }
    let mut acc = 0.0;
    for (i, v) in eig.iter().enumerate() {
        acc += v;
        // relative slack keeps a threshold of 1.0 reachable under rounding
        if acc >= threshold * total * (1.0 - 1e-12) {
            return Ok(i + 1);
        }
    }
    Ok(eig.len())
}

/// Intrinsic dimension of the reconstruction at time `t` under Gaussian
/// perturbations of the hypernetwork parameters.
pub fn lpca_dimension(
    model: &CompressorModel<f64>,
    coords: &Tensor<f64>,
    t: usize,
    options: &LpcaOptions,
) -> Result<usize, DimError> {
    if options.n_samples < 2 {
        return Err(DimError::InvalidArgument(format!("n_samples must be >= 2, got {}", options.n_samples)));
    }
    let mut rng = rng_from_seed(derive_seed(options.seed, stream::PERTURB));
    let base = model.params();
    let mut rows = Vec::with_capacity(options.n_samples);
    let mut probe = model.clone();
    for _ in 0..options.n_samples {
        let mut perturbed = base.clone();
        for v in perturbed.data_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += options.perturb_scale * z;
        }
        probe.set_params(perturbed)?;
        rows.push(probe.full_forward(coords, t)?.into_data());
    }
    let dim = rows[0].len();
    let cloud = DMatrix::from_row_iterator(rows.len(), dim, rows.into_iter().flatten());
    lpca_from_cloud(&cloud, options.threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use rand::Rng;

    /// Points `z B` with `z` standard normal in `R^m` and a fixed random
    /// `m x ambient` basis, plus a constant offset.
    fn linear_cloud(m: usize, ambient: usize, samples: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_from_seed(seed);
        let basis = DMatrix::<f64>::from_fn(m, ambient, |_, _| rng.random_range(-1.0..1.0));
        let z = DMatrix::<f64>::from_fn(samples, m, |_, _| StandardNormal.sample(&mut rng));
        let offset = DMatrix::from_fn(1, ambient, |_, _| 3.0);
        let mut cloud = z * basis;
        for mut row in cloud.row_iter_mut() {
            row += &offset;
        }
        cloud
    }

    #[test]
    fn recovers_linear_rank() {
        for m in [1, 3, 7] {
            let d = lpca_from_cloud(&linear_cloud(m, 100, 200, m as u64), DEFAULT_THRESHOLD).unwrap() as i64;
            assert!((d - m as i64).abs() <= 1, "m={m} got {d}");
        }
        assert_eq!(lpca_from_cloud(&linear_cloud(1, 100, 50, 9), 0.95).unwrap(), 1);
    }

    #[test]
    fn threshold_monotone_and_scale_invariant() {
        let cloud = linear_cloud(5, 40, 80, 2);
        let mut last = 0;
        for th in [0.5, 0.8, 0.9, 0.95, 0.99, 1.0] {
            let d = lpca_from_cloud(&cloud, th).unwrap();
            assert!(d >= last);
            last = d;
        }
        let scaled = &cloud * 1e3;
        assert_eq!(lpca_from_cloud(&cloud, 0.9).unwrap(), lpca_from_cloud(&scaled, 0.9).unwrap());
    }

    #[test]
    fn degenerate_inputs() {
        let same = DMatrix::from_element(10, 4, 1.0);
        assert!(matches!(lpca_from_cloud(&same, 0.95), Err(DimError::Degenerate)));
        assert!(lpca_from_cloud(&DMatrix::zeros(1, 4), 0.95).is_err());
    }

    #[test]
    fn model_cloud_dimension_is_bounded() {
        let spec = ModelSpec {
            hyper_width: 6,
            target_width: 6,
            ..ModelSpec::default()
        };
        let model = CompressorModel::<f64>::new(&spec, 2, 1, 4, 1).unwrap();
        let coords = Tensor::matrix(30, 2, (0..60).map(|i| i as f64 / 60.0).collect()).unwrap();
        let opts = LpcaOptions {
            n_samples: 40,
            ..LpcaOptions::default()
        };
        let d = lpca_dimension(&model, &coords, 0, &opts).unwrap();
        assert!((1..=30).contains(&d));
        assert_eq!(d, lpca_dimension(&model, &coords, 0, &opts).unwrap());
        let bad = LpcaOptions { n_samples: 1, ..opts };
        assert!(lpca_dimension(&model, &coords, 0, &bad).is_err());
    }
}
