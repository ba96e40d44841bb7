use super::{NumError, Tensor};

/// Central-difference gradient of a scalar function, evaluated in `f64`.
pub fn finite_diff_gradient<F>(mut f: F, params: &Tensor<f64>, h: f64) -> Result<Tensor<f64>, NumError>
where
    F: FnMut(&Tensor<f64>) -> Result<f64, NumError>,
{
    let indices: Vec<usize> = (0..params.len()).collect();
    let partials = finite_diff_partials(&mut f, params, h, &indices)?;
    Tensor::new(params.shape().to_vec(), partials)
}

/// Central differences for a subset of coordinates only.
pub fn finite_diff_partials<F>(
    mut f: F,
    params: &Tensor<f64>,
    h: f64,
    indices: &[usize],
) -> Result<Vec<f64>, NumError>
where
    F: FnMut(&Tensor<f64>) -> Result<f64, NumError>,
{
    if !(h > 0.0) {
        return Err(NumError::InvalidArgument(format!("finite difference step {h}")));
    }
    let mut probe = params.clone();
    let mut out = Vec::with_capacity(indices.len());
    for &i in indices {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + h;
        let fp = f(&probe)?;
        probe.data_mut()[i] = orig - h;
        let fm = f(&probe)?;
        probe.data_mut()[i] = orig;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(NumError::NonFinite {
                node: i,
                op: "finite_diff",
                pass: "forward",
            });
        }
        out.push((fp - fm) / (2.0 * h));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_three() {
        let g = finite_diff_gradient(|p| Ok(p.data()[0].powi(2)), &Tensor::vector(vec![3.0]), 1e-6).unwrap();
        assert!((g.data()[0] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn sine_at_one() {
        let g = finite_diff_gradient(|p| Ok(p.data()[0].sin()), &Tensor::vector(vec![1.0]), 1e-6).unwrap();
        assert!((g.data()[0] - 1f64.cos()).abs() < 1e-6);
    }

    #[test]
    fn constant_function() {
        let g = finite_diff_gradient(|_| Ok(4.2), &Tensor::vector(vec![1.0, 2.0]), 1e-6).unwrap();
        assert_eq!(g.data(), &[0.0, 0.0]);
    }

    #[test]
    fn non_finite_value_is_error() {
        let r = finite_diff_gradient(|_| Ok(f64::INFINITY), &Tensor::vector(vec![1.0]), 1e-6);
        assert!(r.is_err());
        assert!(finite_diff_gradient(|_| Ok(0.0), &Tensor::vector(vec![1.0]), 0.0).is_err());
    }
}
