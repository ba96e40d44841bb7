use serde::{Deserialize, Serialize};

use super::{NumError, Real, Tensor};

/// Rectification is applied only when the variance estimate is tractable.
pub const RHO_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RAdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for RAdamHyper {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Which branch of the rectified update the last step took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Variance not yet tractable; bias-corrected momentum only.
    Momentum,
    Rectified,
}

/// Moment estimates for one flat parameter tensor.
#[derive(Debug, Clone)]
pub struct RAdamState<T> {
    pub step: u64,
    pub m: Tensor<T>,
    pub v: Tensor<T>,
    pub hyper: RAdamHyper,
}

impl<T: Real> RAdamState<T> {
    pub fn new(param_shape: &[usize], hyper: RAdamHyper) -> Self {
        Self {
            step: 0,
            m: Tensor::zeros(param_shape),
            v: Tensor::zeros(param_shape),
            hyper,
        }
    }

    /// Length of the approximated simple moving average.
    pub fn rho(&self, step: u64) -> f64 {
        let b2 = self.hyper.beta2;
        let rho_inf = 2.0 / (1.0 - b2) - 1.0;
        let b2t = b2.powf(step as f64);
        rho_inf - 2.0 * step as f64 * b2t / (1.0 - b2t)
    }
}

/// One rectified-Adam update of `params` in place.
pub fn radam_step<T: Real>(
    params: &mut Tensor<T>,
    grads: &Tensor<T>,
    state: &mut RAdamState<T>,
) -> Result<StepKind, NumError> {
    if params.shape() != grads.shape() || params.shape() != state.m.shape() {
        return Err(NumError::ShapeMismatch(format!(
            "radam params {:?}, grads {:?}, state {:?}",
            params.shape(),
            grads.shape(),
            state.m.shape()
        )));
    }
    let h = state.hyper;
    let step = state.step + 1;
    let b1 = T::from_f64(h.beta1);
    let b2 = T::from_f64(h.beta2);
    let one = T::one();
    let bias1 = 1.0 - h.beta1.powf(step as f64);
    let bias2 = 1.0 - h.beta2.powf(step as f64);
    let rho = state.rho(step);

    let (kind, coef) = if rho > RHO_THRESHOLD {
        let rho_inf = 2.0 / (1.0 - h.beta2) - 1.0;
        let r = ((rho - 4.0) * (rho - 2.0) * rho_inf / ((rho_inf - 4.0) * (rho_inf - 2.0) * rho)).sqrt();
        (StepKind::Rectified, h.lr * r / bias1)
    } else {
        (StepKind::Momentum, h.lr / bias1)
    };
    let coef = T::from_f64(coef);
    let sqrt_bias2 = T::from_f64(bias2.sqrt());
    let eps = T::from_f64(h.eps);

    let mut next = params.data().to_vec();
    let mut m = state.m.data().to_vec();
    let mut v = state.v.data().to_vec();
    for (((p, &g), mi), vi) in next.iter_mut().zip(grads.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
        *mi = b1 * *mi + (one - b1) * g;
        *vi = b2 * *vi + (one - b2) * g * g;
        let delta = match kind {
            StepKind::Momentum => coef * *mi,
            StepKind::Rectified => coef * *mi / ((*vi).sqrt() / sqrt_bias2 + eps),
        };
        *p = *p - delta;
        if !p.is_finite() {
            return Err(NumError::NonFinite {
                node: 0,
                op: "radam",
                pass: "update",
            });
        }
    }
    params.data_mut().copy_from_slice(&next);
    state.m.data_mut().copy_from_slice(&m);
    state.v.data_mut().copy_from_slice(&v);
    state.step = step;
    Ok(kind)
}
