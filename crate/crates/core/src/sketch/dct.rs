//! Orthonormal DCT-II and its inverse (DCT-III) in O(n log n) for any length.
//!
//! Uses the even/odd reordering trick so a single complex FFT of length `n`
//! suffices; no padding to a power of two.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::numcore::{NumError, Real, Tensor};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn scale_factors(n: usize) -> (f64, f64) {
    ((1.0 / n as f64).sqrt(), (2.0 / n as f64).sqrt())
}

/// Orthonormal DCT-II of `x` in place.
pub fn dct2_inplace(x: &mut [f64]) {
    let n = x.len();
    if n == 0 {
        return;
    }
    let mut v: Vec<Complex64> = vec![Complex64::default(); n];
    let half = n.div_ceil(2);
    for p in 0..half {
        v[p] = Complex64::new(x[2 * p], 0.0);
    }
    for p in 0..n / 2 {
        v[n - 1 - p] = Complex64::new(x[2 * p + 1], 0.0);
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
    fft.process(&mut v);
    let (s0, s) = scale_factors(n);
    for (k, out) in x.iter_mut().enumerate() {
        let angle = -PI * k as f64 / (2.0 * n as f64);
        let tw = Complex64::new(angle.cos(), angle.sin());
        let re = (v[k] * tw).re;
        *out = re * if k == 0 { s0 } else { s };
    }
}

/// Inverse of [`dct2_inplace`] (orthonormal DCT-III) in place.
pub fn dct3_inplace(x: &mut [f64]) {
    let n = x.len();
    if n == 0 {
        return;
    }
    let (s0, s) = scale_factors(n);
    let unscaled = |k: usize| -> f64 {
        if k >= n {
            0.0
        } else if k == 0 {
            x[0] / s0
        } else {
            x[k] / s
        }
    };
    let mut v: Vec<Complex64> = (0..n)
        .map(|k| {
            let w = Complex64::new(unscaled(k), -unscaled(n - k));
            let w = if k == 0 { Complex64::new(unscaled(0), 0.0) } else { w };
            let angle = PI * k as f64 / (2.0 * n as f64);
            w * Complex64::new(angle.cos(), angle.sin())
        })
        .collect();
    let ifft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    ifft.process(&mut v);
    let inv_n = 1.0 / n as f64;
    let half = n.div_ceil(2);
    for p in 0..half {
        x[2 * p] = v[p].re * inv_n;
    }
    for p in 0..n / 2 {
        x[2 * p + 1] = v[n - 1 - p].re * inv_n;
    }
}

/// Orthonormal DCT-II of a length-`n` vector.
pub fn dct_orthonormal<T: Real>(x: &Tensor<T>) -> Result<Tensor<T>, NumError> {
    transform(x, dct2_inplace)
}

/// Orthonormal DCT-III, the exact inverse of [`dct_orthonormal`].
pub fn idct_orthonormal<T: Real>(x: &Tensor<T>) -> Result<Tensor<T>, NumError> {
    transform(x, dct3_inplace)
}

fn transform<T: Real>(x: &Tensor<T>, f: fn(&mut [f64])) -> Result<Tensor<T>, NumError> {
    if x.is_empty() {
        return Err(NumError::InvalidArgument("DCT of empty vector".into()));
    }
    if !x.is_finite() {
        return Err(NumError::NonFinite {
            node: 0,
            op: "dct",
            pass: "forward",
        });
    }
    let mut buf: Vec<f64> = x.data().iter().map(|v| v.as_f64()).collect();
    f(&mut buf);
    Tensor::new(x.shape().to_vec(), buf.into_iter().map(T::from_f64).collect())
}
