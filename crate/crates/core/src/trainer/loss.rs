//! Differentiable training losses built on the gradient graph.

use std::collections::HashMap;
use std::sync::Arc;

use super::TrainError;
use crate::model::{CompressorModel, COORDS_INPUT, HYPER_INPUT};
use crate::numcore::{Graph, LinearMap, NodeId, Real, Tensor};
use crate::sketch::SketchOperator;

/// A full snapshot used as a training target.
#[derive(Debug, Clone, Copy)]
pub struct FullTarget<'a, T> {
    pub t: usize,
    pub u: &'a Tensor<T>,
}

/// A stored sketch `S_t U_t` and the operator that produced it.
#[derive(Clone)]
pub struct SketchTarget<'a, T> {
    pub t: usize,
    pub su: &'a Tensor<T>,
    pub op: Arc<SketchOperator>,
}

/// Loss value, its two parts and the gradient with respect to the
/// hypernetwork parameters. `sketch` is reported without the `lambda` weight.
#[derive(Debug, Clone)]
pub struct LossValue<T> {
    pub total: f64,
    pub full: f64,
    pub sketch: f64,
    pub grad: Tensor<T>,
}

/// Appends `mean_c ||pred[:, c] - target[:, c]|| / ||target[:, c]||`.
fn relative_term<T: Real>(g: &mut Graph<T>, pred: NodeId, target: &Tensor<T>) -> Result<NodeId, TrainError> {
    let c = target.cols();
    let mut norms = vec![T::zero(); c];
    for row in target.data().chunks(c) {
        for (n, &v) in norms.iter_mut().zip(row) {
            *n = *n + v * v;
        }
    }
    if let Some(channel) = norms.iter().position(|n| *n == T::zero()) {
        return Err(TrainError::ZeroNorm { channel });
    }
    let norms = Tensor::matrix(1, c, norms.into_iter().map(T::sqrt).collect())?;
    let target = g.constant(target.clone());
    let diff = g.sub(pred, target);
    let sq = g.square(diff);
    let col = g.sum_rows(sq);
    let dist = g.sqrt(col);
    let norms = g.constant(norms);
    let ratio = g.div(dist, norms);
    Ok(g.mean(ratio))
}

/// Mean of `terms`, or `None` for an empty list.
fn mean_of<T: Real>(g: &mut Graph<T>, terms: &[NodeId]) -> Option<NodeId> {
    let (&first, rest) = terms.split_first()?;
    let mut acc = first;
    for &t in rest {
        acc = g.add(acc, t);
    }
    Some(if terms.len() == 1 {
        acc
    } else {
        g.scale(acc, T::from_f64(1.0 / terms.len() as f64))
    })
}

/// `L_full + lambda * L_sketch` over the given batches.
///
/// Each part is the mean relative loss over its batch; the sketched part
/// compares the stored `S_t U_t` with `S_t` applied to the reconstruction.
/// An empty batch contributes zero.
pub fn loss_insitu<T: Real>(
    model: &CompressorModel<T>,
    coords: &Tensor<T>,
    full: &[FullTarget<'_, T>],
    sketches: &[SketchTarget<'_, T>],
    lambda: f64,
) -> Result<LossValue<T>, TrainError> {
    if full.is_empty() && sketches.is_empty() {
        return Err(TrainError::Config("loss needs at least one target".into()));
    }
    if !(lambda >= 0.0) {
        return Err(TrainError::Config(format!("lambda must be non-negative, got {lambda}")));
    }
    let n = coords.rows();
    let mut g = Graph::new();
    let hyper = g.param(HYPER_INPUT);
    let x = g.input(COORDS_INPUT);
    let mut recon: HashMap<usize, NodeId> = HashMap::new();
    let mut reconstruct = |g: &mut Graph<T>, t: usize| *recon.entry(t).or_insert_with(|| model.build_full(g, hyper, x, n, t));

    let mut full_terms = Vec::with_capacity(full.len());
    for f in full {
        let r = reconstruct(&mut g, f.t);
        full_terms.push(relative_term(&mut g, r, f.u)?);
    }
    let mut sketch_terms = Vec::with_capacity(sketches.len());
    for s in sketches {
        if s.op.n() != n {
            return Err(TrainError::Shape(format!("sketch for n={} applied to n={n}", s.op.n())));
        }
        let r = reconstruct(&mut g, s.t);
        let map: Arc<dyn LinearMap<T>> = s.op.clone();
        let sr = g.linear(r, map);
        sketch_terms.push(relative_term(&mut g, sr, s.su)?);
    }
    let full_node = mean_of(&mut g, &full_terms);
    let sketch_node = mean_of(&mut g, &sketch_terms);
    let total = match (full_node, sketch_node) {
        (Some(f), Some(s)) => {
            let weighted = g.scale(s, T::from_f64(lambda));
            g.add(f, weighted)
        }
        (Some(f), None) => f,
        (None, Some(s)) => g.scale(s, T::from_f64(lambda)),
        (None, None) => unreachable!("checked above"),
    };
    g.set_output(total);
    let value = g.forward(&HashMap::from([(HYPER_INPUT, model.params()), (COORDS_INPUT, coords)]))?;
    let read = |node: Option<NodeId>| node.and_then(|id| g.value(id)).map_or(0.0, |v| v.data()[0].as_f64());
    let (full_value, sketch_value) = (read(full_node), read(sketch_node));
    let mut grads = g.backward(&Tensor::filled(value.shape(), T::one()))?;
    let grad = grads.remove(HYPER_INPUT).expect("hyper is a parameter");
    Ok(LossValue {
        total: value.data()[0].as_f64(),
        full: full_value,
        sketch: sketch_value,
        grad,
    })
}

/// Mean frame loss over a time minibatch of full snapshots.
pub fn loss_ideal<T: Real>(
    model: &CompressorModel<T>,
    coords: &Tensor<T>,
    snapshots: &[FullTarget<'_, T>],
) -> Result<LossValue<T>, TrainError> {
    loss_insitu(model, coords, snapshots, &[], 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use crate::numcore::finite_diff_partials;
    use crate::sketch::SketchKind;
    use crate::trainer::loss_frame;

    fn setup() -> (CompressorModel<f64>, Tensor<f64>, Vec<Tensor<f64>>) {
        let spec = ModelSpec {
            hyper_width: 6,
            target_width: 5,
            omega0: 3.0,
            ..ModelSpec::default()
        };
        let model = CompressorModel::new(&spec, 2, 1, 4, 5).unwrap();
        let coords = Tensor::matrix(16, 2, (0..32).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let data = (0..4)
            .map(|t| Tensor::matrix(16, 1, (0..16).map(|i| 1.0 + ((i + t) as f64 * 0.5).cos()).collect()).unwrap())
            .collect();
        (model, coords, data)
    }

    #[test]
    fn full_part_matches_frame_loss() {
        let (model, coords, data) = setup();
        let v = loss_ideal(&model, &coords, &[FullTarget { t: 1, u: &data[1] }]).unwrap();
        let recon = model.full_forward(&coords, 1).unwrap();
        assert!((v.total - loss_frame(&data[1], &recon).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ideal_is_mean_of_frames() {
        let (model, coords, data) = setup();
        let targets: Vec<_> = [0, 2].iter().map(|&t| FullTarget { t, u: &data[t] }).collect();
        let v = loss_ideal(&model, &coords, &targets).unwrap();
        let expect: f64 = [0, 2]
            .iter()
            .map(|&t| loss_frame(&data[t], &model.full_forward(&coords, t).unwrap()).unwrap())
            .sum::<f64>()
            / 2.0;
        assert!((v.total - expect).abs() < 1e-12);
    }

    #[test]
    fn decomposition_and_degenerate_cases() {
        let (model, coords, data) = setup();
        let op = Arc::new(SketchOperator::new(SketchKind::Fjlt, 16, 6, 3).unwrap());
        let su = op.apply(&data[0]).unwrap();
        let full = [FullTarget { t: 2, u: &data[2] }];
        let sk = [SketchTarget { t: 0, su: &su, op: op.clone() }];
        let v = loss_insitu(&model, &coords, &full, &sk, 0.7).unwrap();
        assert!((v.total - (v.full + 0.7 * v.sketch)).abs() < 1e-12);
        let lam0 = loss_insitu(&model, &coords, &full, &sk, 0.0).unwrap();
        let only = loss_insitu(&model, &coords, &full, &[], 0.7).unwrap();
        assert!((lam0.total - only.total).abs() < 1e-15);
        assert_eq!(only.sketch, 0.0);
    }

    #[test]
    fn perfect_model_has_zero_loss() {
        let (model, coords, _) = setup();
        let recon: Vec<_> = (0..4).map(|t| model.full_forward(&coords, t).unwrap()).collect();
        let op = Arc::new(SketchOperator::new(SketchKind::Fjlt, 16, 5, 8).unwrap());
        let su = op.apply(&recon[3]).unwrap();
        let v = loss_insitu(
            &model,
            &coords,
            &[FullTarget { t: 1, u: &recon[1] }],
            &[SketchTarget { t: 3, su: &su, op }],
            1.0,
        )
        .unwrap();
        assert!(v.total.abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (model, coords, data) = setup();
        let op = Arc::new(SketchOperator::new(SketchKind::Fjlt, 16, 8, 1).unwrap());
        let su = op.apply(&data[3]).unwrap();
        let eval = |m: &CompressorModel<f64>| {
            loss_insitu(
                m,
                &coords,
                &[FullTarget { t: 0, u: &data[0] }],
                &[SketchTarget { t: 3, su: &su, op: op.clone() }],
                1.0,
            )
            .unwrap()
        };
        let grad = eval(&model).grad;
        let probes: Vec<usize> = (0..model.param_count()).step_by(97).collect();
        let fd = finite_diff_partials(
            |p: &Tensor<f64>| {
                let mut m = model.clone();
                m.set_params(p.clone()).unwrap();
                Ok(eval(&m).total)
            },
            model.params(),
            1e-6,
            &probes,
        )
        .unwrap();
        for (&i, f) in probes.iter().zip(fd) {
            let a = grad.data()[i];
            let scale = a.abs().max(f.abs()).max(1e-6);
            assert!((a - f).abs() / scale < 1e-5, "param {i}: {a} vs {f}");
        }
    }
}
