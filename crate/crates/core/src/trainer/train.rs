use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index::sample;

use super::loss::{loss_insitu, FullTarget, LossValue, SketchTarget};
use super::metrics::{psnr, rfe};
use super::report::{CycleRecord, Metrics, TestPoint, TrainReport};
use super::{TrainConfig, TrainError};
use crate::buffer::{BufferShape, FullRecord, ReplayBuffer, SketchRecord};
use crate::dataio::{MeshDataset, SnapshotStream};
use crate::model::{compression_rate, CompressorModel};
use crate::numcore::{radam_step, NumError, RAdamHyper, RAdamState, Real, Tensor};
use crate::sketch::{derive_seed, rng_from_seed, stream, SketchKind, SketchOperator};

/// Seed of the sketch applied to in-situ snapshot `t`.
pub fn insitu_sketch_seed(master: u64, t: usize) -> u64 {
    derive_seed(master, t as u64)
}

/// Seed of the fixed sketch of snapshot `t` in the offline sketched modes.
pub fn offline_sketch_seed(master: u64, t: usize) -> u64 {
    derive_seed(master, stream::OFFLINE_SKETCH + t as u64)
}

fn init_model<T: Real>(config: &TrainConfig, d: usize, c: usize, time_count: usize) -> Result<CompressorModel<T>, TrainError> {
    Ok(CompressorModel::new(
        &config.model,
        d,
        c,
        time_count,
        derive_seed(config.master_seed, stream::MODEL_INIT),
    )?)
}

fn optimizer<T: Real>(config: &TrainConfig, model: &CompressorModel<T>) -> RAdamState<T> {
    RAdamState::new(
        model.params().shape(),
        RAdamHyper {
            lr: config.lr,
            ..RAdamHyper::default()
        },
    )
}

fn is_divergence(e: &TrainError) -> bool {
    matches!(e, TrainError::Num(NumError::NonFinite { .. }))
}

/// Evaluates the loss and applies one update. Non-finite values surface as
/// [`TrainError::Num`] with [`NumError::NonFinite`].
fn step<T: Real>(
    model: &mut CompressorModel<T>,
    state: &mut RAdamState<T>,
    coords: &Tensor<T>,
    full: &[FullTarget<'_, T>],
    sketches: &[SketchTarget<'_, T>],
    lambda: f64,
) -> Result<LossValue<T>, TrainError> {
    let loss = loss_insitu(model, coords, full, sketches, lambda)?;
    if !loss.total.is_finite() {
        return Err(NumError::NonFinite {
            node: 0,
            op: "loss",
            pass: "forward",
        }
        .into());
    }
    radam_step(model.params_mut(), &loss.grad, state)?;
    Ok(loss)
}

/// Offline training with the whole dataset in memory.
///
/// Each step draws a minibatch of snapshot times. The sketched variants
/// sketch every snapshot once with a fixed seed and never see full data.
pub fn train_offline<T: Real>(
    config: &TrainConfig,
    dataset: &MeshDataset<T>,
) -> Result<(CompressorModel<T>, TrainReport), TrainError> {
    config.validate()?;
    if !config.mode.is_offline() {
        return Err(TrainError::Config(format!("{} is not an offline mode", config.mode)));
    }
    let start = Instant::now();
    let time_count = dataset.time_count();
    if time_count == 0 {
        return Err(TrainError::Shape("dataset has no snapshots".into()));
    }
    let n = dataset.nodes();
    let coords = dataset.coords();
    let mut model = init_model(config, dataset.spatial_dim(), dataset.channels(), time_count)?;
    let mut state = optimizer(config, &model);
    let mut rng = rng_from_seed(derive_seed(config.master_seed, stream::MINIBATCH));
    let mut report = TrainReport {
        mode: Some(config.mode),
        snapshots_read: time_count,
        ..Default::default()
    };

    let mut sketched: Vec<(Arc<SketchOperator>, Tensor<T>)> = Vec::new();
    if let Some(kind) = config.mode.sketch_kind() {
        let k = config.sketch_rows(n);
        report.sketch_rows = k;
        for (t, u) in dataset.snapshots().iter().enumerate() {
            let op = SketchOperator::new(kind, n, k, offline_sketch_seed(config.master_seed, t))?;
            let su = op.apply(u)?;
            report.sketch_seeds.push(op.seed());
            sketched.push((Arc::new(op), su));
        }
    }

    let batch = config.offline_batch().min(time_count);
    for cycle in 0..config.offline_steps(time_count) {
        let times = sample(&mut rng, time_count, batch).into_vec();
        let result = if sketched.is_empty() {
            let full: Vec<_> = times.iter().map(|&t| FullTarget { t, u: dataset.snapshot(t) }).collect();
            step(&mut model, &mut state, coords, &full, &[], config.lambda)
        } else {
            let sk: Vec<_> = times
                .iter()
                .map(|&t| SketchTarget {
                    t,
                    su: &sketched[t].1,
                    op: sketched[t].0.clone(),
                })
                .collect();
            step(&mut model, &mut state, coords, &[], &sk, 1.0)
        };
        let loss = match result {
            Ok(l) => l,
            Err(e) if is_divergence(&e) => {
                report.wall_clock_s = start.elapsed().as_secs_f64();
                return Err(TrainError::Diverged {
                    snapshot_t: None,
                    cycle,
                    report: Box::new(report),
                });
            }
            Err(e) => return Err(e),
        };
        let (l_full, l_sketch) = if sketched.is_empty() {
            (Some(loss.full), None)
        } else {
            (None, Some(loss.sketch))
        };
        report.cycles.push(CycleRecord {
            snapshot_t: None,
            cycle,
            l_full,
            l_sketch,
            lr: config.lr,
        });
    }
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok((model, report))
}

/// Single-pass training over a snapshot stream with a replay buffer.
pub fn train_insitu<T: Real, S: SnapshotStream<T>>(
    config: &TrainConfig,
    stream: &mut S,
    test: Option<&MeshDataset<T>>,
) -> Result<(CompressorModel<T>, TrainReport), TrainError> {
    train_insitu_observed(config, stream, test, |_, _| {})
}

/// [`train_insitu`] calling `observe(buffer, t)` after each arrival's pushes.
pub fn train_insitu_observed<T: Real, S: SnapshotStream<T>, F: FnMut(&ReplayBuffer<T>, usize)>(
    config: &TrainConfig,
    stream: &mut S,
    test: Option<&MeshDataset<T>>,
    mut observe: F,
) -> Result<(CompressorModel<T>, TrainReport), TrainError> {
    config.validate()?;
    if config.mode.is_offline() {
        return Err(TrainError::Config(format!("{} is not an in-situ mode", config.mode)));
    }
    let start = Instant::now();
    let time_count = stream.len();
    if time_count == 0 {
        return Err(TrainError::Shape("stream has no snapshots".into()));
    }
    let coords = stream.coords().clone();
    let (n, c) = (coords.rows(), stream.channels());
    if let Some(ds) = test {
        if ds.nodes() != n || ds.channels() != c || ds.time_count() != time_count {
            return Err(TrainError::Shape("test set does not match the stream".into()));
        }
    }
    let mut model = init_model(config, coords.cols(), c, time_count)?;
    let mut state = optimizer(config, &model);
    let mut rng = rng_from_seed(derive_seed(config.master_seed, stream::MINIBATCH));
    let kind = config.mode.sketch_kind();
    let k = config.sketch_rows(n);
    let shape = BufferShape {
        n,
        c,
        k,
        kind: kind.unwrap_or(SketchKind::Fjlt),
        full_capacity: config.full_capacity,
        sketch_capacity: config.sketch_capacity(time_count),
    };
    let mut buffer = ReplayBuffer::new(shape)?;
    let mut report = TrainReport {
        mode: Some(config.mode),
        sketch_rows: if kind.is_some() { k } else { 0 },
        value_bound: shape.value_bound(),
        ..Default::default()
    };
    let mut operators: HashMap<usize, Arc<SketchOperator>> = HashMap::new();

    let mut expected = 0;
    while let Some((t, u)) = stream.next_snapshot()? {
        if t != expected {
            return Err(TrainError::Shape(format!("stream yielded t={t}, expected {expected}")));
        }
        expected += 1;
        if u.shape() != [n, c] {
            return Err(TrainError::Shape(format!("snapshot {t} has shape {:?}, expected [{n}, {c}]", u.shape())));
        }
        report.snapshots_read += 1;

        let last = t + 1 == time_count;
        if let (Some(kind), false, true) = (kind, last, shape.sketch_capacity > 0) {
            let op = SketchOperator::new(kind, n, k, insitu_sketch_seed(config.master_seed, t))?;
            let su = op.apply(&u)?;
            report.sketch_seeds.push(op.seed());
            if let Some(old) = buffer.push_sketch(SketchRecord { t, seed: op.seed(), k, su })? {
                operators.remove(&old.t);
            }
            operators.insert(t, Arc::new(op));
        }
        buffer.push_full(FullRecord { t, u })?;
        report.max_stored_values = report.max_stored_values.max(buffer.stored_values());
        observe(&buffer, t);

        for cycle in 0..config.cycles_per_snapshot {
            let full: Vec<_> = buffer
                .sample_full_batch(config.batch_full, &mut rng)
                .into_iter()
                .map(|r| FullTarget { t: r.t, u: &r.u })
                .collect();
            let sketches: Vec<_> = buffer
                .sample_sketch_batch(config.batch_sketch, &mut rng)
                .into_iter()
                .map(|r| SketchTarget {
                    t: r.t,
                    su: &r.su,
                    op: operators[&r.t].clone(),
                })
                .collect();
            let loss = match step(&mut model, &mut state, &coords, &full, &sketches, config.lambda) {
                Ok(l) => l,
                Err(e) if is_divergence(&e) => {
                    report.buffer = Some(buffer.size_report());
                    report.wall_clock_s = start.elapsed().as_secs_f64();
                    return Err(TrainError::Diverged {
                        snapshot_t: Some(t),
                        cycle,
                        report: Box::new(report),
                    });
                }
                Err(e) => return Err(e),
            };
            report.cycles.push(CycleRecord {
                snapshot_t: Some(t),
                cycle,
                l_full: Some(loss.full),
                l_sketch: (!sketches.is_empty()).then_some(loss.sketch),
                lr: config.lr,
            });
        }

        if let Some(ds) = test {
            if config.test_every > 0 && (t % config.test_every == 0 || last) {
                let recon = reconstruct(&model, ds.coords(), &(0..=t).collect::<Vec<_>>())?;
                report.test.push(TestPoint {
                    snapshot_t: t,
                    rfe: rfe(&ds.snapshots()[..=t], &recon)?,
                });
            }
        }
    }
    report.buffer = Some(buffer.size_report());
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok((model, report))
}

/// Dispatches on the configured mode.
pub fn train<T: Real>(
    config: &TrainConfig,
    dataset: &MeshDataset<T>,
    test: Option<&MeshDataset<T>>,
) -> Result<(CompressorModel<T>, TrainReport), TrainError> {
    if config.mode.is_offline() {
        train_offline(config, dataset)
    } else {
        train_insitu(config, &mut crate::dataio::DatasetStream::new(dataset), test)
    }
}

/// Reconstructions at the given snapshot times.
pub fn reconstruct<T: Real>(
    model: &CompressorModel<T>,
    coords: &Tensor<T>,
    times: &[usize],
) -> Result<Vec<Tensor<T>>, TrainError> {
    times
        .iter()
        .map(|&t| {
            if t >= model.time_count() {
                return Err(TrainError::Shape(format!("time {t} beyond {} snapshots", model.time_count())));
            }
            Ok(model.full_forward(coords, t)?)
        })
        .collect()
}

/// Whole-dataset RFE, per-snapshot PSNR and compression rate.
///
/// A snapshot whose reconstruction has no positive peak gets a NaN PSNR.
pub fn evaluate<T: Real>(model: &CompressorModel<T>, dataset: &MeshDataset<T>) -> Result<Metrics, TrainError> {
    let times: Vec<usize> = (0..dataset.time_count()).collect();
    let recon = reconstruct(model, dataset.coords(), &times)?;
    metrics_for(dataset.snapshots(), &recon, model.param_count())
}

/// Metrics of an arbitrary reconstruction against data.
pub fn metrics_for<T: Real>(data: &[Tensor<T>], recon: &[Tensor<T>], param_count: usize) -> Result<Metrics, TrainError> {
    let error = rfe(data, recon)?;
    let psnr_per_snapshot: Vec<f64> = data
        .iter()
        .zip(recon)
        .map(|(u, r)| match psnr(u, r) {
            Err(TrainError::PsnrUndefined { .. }) => Ok(f64::NAN),
            other => other,
        })
        .collect::<Result<_, _>>()?;
    let psnr_mean = psnr_per_snapshot.iter().sum::<f64>() / psnr_per_snapshot.len() as f64;
    let (n, c) = (data[0].rows(), data[0].cols());
    let rate = if param_count == 0 {
        f64::INFINITY
    } else {
        compression_rate(data.len(), n, c, param_count)?
    };
    Ok(Metrics {
        rfe: error,
        psnr: psnr_mean,
        psnr_per_snapshot,
        compression_rate: rate,
        param_count,
    })
}
