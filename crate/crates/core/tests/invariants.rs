use std::sync::Arc;

use inc_core::buffer::{BufferShape, FullRecord, ReplayBuffer, SketchRecord};
use inc_core::dataio::{gen_pulse2d, DatasetStream, SnapshotStream};
use inc_core::dimest::{epsilon_from_losses, lpca_from_cloud, DEFAULT_THRESHOLD};
use inc_core::model::{CompressorModel, ModelSpec};
use inc_core::numcore::{radam_step, RAdamHyper, RAdamState, StepKind, Tensor};
use inc_core::sketch::{dct_orthonormal, idct_orthonormal, SketchKind, SketchOperator};
use inc_core::trainer::{loss_insitu, FullTarget, SketchTarget};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = SketchKind> {
    prop_oneof![Just(SketchKind::Subsample), Just(SketchKind::Fjlt), Just(SketchKind::Gaussian)]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn small_spec() -> ModelSpec {
    ModelSpec {
        hyper_width: 6,
        hyper_blocks: 1,
        target_width: 5,
        target_blocks: 1,
        ..ModelSpec::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sketch_is_linear(kind in kind(), n in 2usize..80, kfrac in 0.05f64..1.0, seed: u64,
                        a in -3.0f64..3.0, b in -3.0f64..3.0,
                        xs in prop::collection::vec(-1.0f64..1.0, 160)) {
        let k = ((n as f64 * kfrac).ceil() as usize).clamp(1, n);
        let s = SketchOperator::new(kind, n, k, seed).unwrap();
        let x = Tensor::matrix(n, 1, xs[..n].to_vec()).unwrap();
        let y = Tensor::matrix(n, 1, xs[80..80 + n].to_vec()).unwrap();
        let combo = x.zip_map(&y, |p, q| a * p + b * q).unwrap();
        let lhs = s.apply(&combo).unwrap();
        let (sx, sy) = (s.apply(&x).unwrap(), s.apply(&y).unwrap());
        for i in 0..k {
            let rhs = a * sx.data()[i] + b * sy.data()[i];
            prop_assert!((lhs.data()[i] - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn sketch_seed_round_trip_and_adjoint(kind in kind(), n in 2usize..64, seed: u64,
                                          xs in prop::collection::vec(-1.0f64..1.0, 128)) {
        let k = (n / 3).max(1);
        let s = SketchOperator::new(kind, n, k, seed).unwrap();
        let rebuilt = SketchOperator::new(kind, n, k, seed).unwrap();
        let x = Tensor::matrix(n, 1, xs[..n].to_vec()).unwrap();
        let y = Tensor::matrix(k, 1, xs[64..64 + k].to_vec()).unwrap();
        let sx = s.apply(&x).unwrap();
        prop_assert_eq!(&sx, &rebuilt.apply(&x).unwrap());
        let sty = s.apply_transpose(&y).unwrap();
        let (l, r) = (dot(sx.data(), y.data()), dot(x.data(), sty.data()));
        prop_assert!((l - r).abs() <= 1e-10 * (1.0 + l.abs()));
    }

    #[test]
    fn dct_round_trip(xs in prop::collection::vec(-10.0f64..10.0, 1..200)) {
        let n = xs.len();
        let x = Tensor::matrix(n, 1, xs).unwrap();
        let y = dct_orthonormal(&x).unwrap();
        prop_assert!((y.norm() - x.norm()).abs() <= 1e-9 * (1.0 + x.norm()));
        let back = idct_orthonormal(&y).unwrap();
        for (a, b) in back.data().iter().zip(x.data()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn buffer_fifo_and_bound(full_cap in 1usize..5, sketch_cap in 0usize..6, pushes in 0usize..20) {
        let (n, k) = (6, 2);
        let shape = BufferShape { n, c: 1, k, kind: SketchKind::Subsample, full_capacity: full_cap, sketch_capacity: sketch_cap };
        let mut buf = ReplayBuffer::<f32>::new(shape).unwrap();
        for t in 0..pushes {
            buf.push_full(FullRecord { t, u: Tensor::matrix(n, 1, vec![t as f32; n]).unwrap() }).unwrap();
            let su = Tensor::matrix(k, 1, vec![t as f32; k]).unwrap();
            buf.push_sketch(SketchRecord { t, seed: t as u64, k, su }).unwrap();
            prop_assert!(buf.stored_values() <= shape.value_bound());
        }
        let full: Vec<usize> = buf.full_records().map(|r| r.t).collect();
        let sketch: Vec<usize> = buf.sketch_records().map(|r| r.t).collect();
        prop_assert_eq!(full, (pushes.saturating_sub(full_cap)..pushes).collect::<Vec<_>>());
        prop_assert_eq!(sketch, (pushes.saturating_sub(sketch_cap)..pushes).collect::<Vec<_>>());
    }

    #[test]
    fn lpca_is_scale_invariant(m in 1usize..5, scale in 1e-3f64..1e3, seed in 0u64..1000) {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let basis = DMatrix::<f64>::from_fn(m, 20, |_, _| next());
        let z = DMatrix::<f64>::from_fn(60, m, |_, _| next());
        let cloud = z * basis;
        let a = lpca_from_cloud(&cloud, DEFAULT_THRESHOLD).unwrap();
        let b = lpca_from_cloud(&(cloud * scale), DEFAULT_THRESHOLD).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a <= m);
    }

    #[test]
    fn epsilon_inverts_ratio(full in 1e-4f64..1.0, r in 1.0f64..10.0) {
        let eps = epsilon_from_losses(full, full * r).unwrap();
        let ratio = (1.0 + eps) / (1.0 - eps);
        prop_assert!((ratio - r * r).abs() <= 1e-9 * r * r);
    }

    #[test]
    fn radam_matches_scalar_simulation(x0 in -5.0f64..5.0, lr in 1e-4f64..1e-1) {
        // f(x) = x^2 / 2, gradient x
        let hyper = RAdamHyper { lr, ..RAdamHyper::default() };
        let mut p = Tensor::vector(vec![x0]);
        let mut state = RAdamState::new(&[1], hyper);
        let (b1, b2, eps) = (hyper.beta1, hyper.beta2, hyper.eps);
        let rho_inf = 2.0 / (1.0 - b2) - 1.0;
        let (mut x, mut m, mut v) = (x0, 0.0, 0.0);
        for t in 1..=100 {
            let g = x;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let m_hat = m / (1.0 - b1.powi(t));
            let rho = rho_inf - 2.0 * t as f64 * b2.powi(t) / (1.0 - b2.powi(t));
            let expected_kind = if rho > 4.0 {
                let v_hat = (v / (1.0 - b2.powi(t))).sqrt();
                let r = ((rho - 4.0) * (rho - 2.0) * rho_inf / ((rho_inf - 4.0) * (rho_inf - 2.0) * rho)).sqrt();
                x -= lr * r * m_hat / (v_hat + eps);
                StepKind::Rectified
            } else {
                x -= lr * m_hat;
                StepKind::Momentum
            };
            let grad = Tensor::vector(vec![p.data()[0]]);
            let kind = radam_step(&mut p, &grad, &mut state).unwrap();
            prop_assert_eq!(kind, expected_kind);
            prop_assert_eq!(kind == StepKind::Rectified, t >= 5);
            prop_assert!((p.data()[0] - x).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn loss_decomposes(lambda in 0.0f64..4.0, seed in 0u64..50) {
        let data = gen_pulse2d::<f64>(8, 4, seed).unwrap();
        let model = CompressorModel::<f64>::new(&small_spec(), 2, 1, 4, seed).unwrap();
        let op = Arc::new(SketchOperator::new(SketchKind::Fjlt, 64, 8, seed).unwrap());
        let su = op.apply(data.snapshot(1)).unwrap();
        let full = [FullTarget { t: 3, u: data.snapshot(3) }];
        let sketches = [SketchTarget { t: 1, su: &su, op }];
        let v = loss_insitu(&model, data.coords(), &full, &sketches, lambda).unwrap();
        prop_assert!((v.total - (v.full + lambda * v.sketch)).abs() <= 1e-12 * (1.0 + v.total));
        let only_full = loss_insitu(&model, data.coords(), &full, &[], lambda).unwrap();
        prop_assert!((only_full.total - v.full).abs() <= 1e-12 * (1.0 + v.full));
    }
}

#[test]
fn radam_is_deterministic() {
    let run = || {
        let mut p = Tensor::vector(vec![1.5f32, -0.25, 3.0]);
        let mut state = RAdamState::new(&[3], RAdamHyper::default());
        for _ in 0..50 {
            let g = p.map(|v| v.sin());
            radam_step(&mut p, &g, &mut state).unwrap();
        }
        p
    };
    assert_eq!(run(), run());
}

#[test]
fn stream_is_single_pass() {
    let data = gen_pulse2d::<f32>(8, 6, 2).unwrap();
    let mut stream = DatasetStream::new(&data);
    assert_eq!(stream.len(), 6);
    let mut seen = Vec::new();
    while let Some((t, u)) = stream.next_snapshot().unwrap() {
        assert_eq!(&u, data.snapshot(t));
        seen.push(t);
    }
    assert_eq!(seen, (0..6).collect::<Vec<_>>());
    assert!(stream.next_snapshot().is_err());
}
