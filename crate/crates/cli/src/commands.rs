use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use inc_core::dataio::{file_size, gen_branch3d, gen_pulse2d, read_dataset, write_dataset, DatasetMeta, MeshDataset};
use inc_core::dimest::{estimate, lpca_dimension, LpcaOptions};
use inc_core::model::{artifact_precision, read_model, write_model, CompressorModel};
use inc_core::numcore::{Precision, Real};
use inc_core::trainer::{format_db, metrics_for, reconstruct as model_reconstruct, train, Summary, TrainConfig, TrainError};
use serde_json::json;

use crate::args::{CompressArgs, DimestArgs, EvalArgs, GenArgs, GenKind, ReconstructArgs, SweepArgs};

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Runtime = 1,
    Usage = 2,
    Mismatch = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: ExitKind,
    pub source: anyhow::Error,
}

impl Failure {
    pub fn runtime(source: anyhow::Error) -> Self {
        Self {
            kind: ExitKind::Runtime,
            source,
        }
    }

    fn usage(msg: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Usage,
            source: anyhow!(msg.into()),
        }
    }

    fn mismatch(source: impl Into<anyhow::Error>) -> Self {
        Self {
            kind: ExitKind::Mismatch,
            source: source.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn load<T: Real>(path: &Path) -> anyhow::Result<MeshDataset<T>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_dataset(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn save<T: Real>(path: &Path, ds: &MeshDataset<T>) -> anyhow::Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_dataset(ds, BufWriter::new(f)).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut f = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

pub fn gen(a: &GenArgs) -> CmdResult {
    let ds: MeshDataset<f32> = match a.kind {
        GenKind::Pulse2d => gen_pulse2d(a.side, a.time_count, a.seed),
        GenKind::Branch3d => gen_branch3d(a.points, a.time_count, a.seed),
    }
    .map_err(|e| Failure::usage(e.to_string()))?;
    save(&a.output, &ds)?;
    let (n, d, c, t) = (ds.nodes(), ds.spatial_dim(), ds.channels(), ds.time_count());
    let bytes = file_size(n, d, c, t);
    println!(
        "{}",
        json!({
            "path": a.output.display().to_string(),
            "n": n, "d": d, "c": c, "T": t,
            "values": ds.value_count(),
            "bytes": bytes,
            "megabytes": ds.value_count() as f64 * 4e-6,
        })
    );
    Ok(())
}

/// Trains in precision `T`, writing artifacts into `out`.
fn compress_with<T: Real>(a: &CompressArgs, config: &TrainConfig) -> CmdResult {
    let ds: MeshDataset<T> = load(&a.data)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let report_path = a.out.join("report.csv");
    match train(config, &ds, Some(&ds)) {
        Ok((model, report)) => {
            let metrics = inc_core::trainer::evaluate(&model, &ds).map_err(anyhow::Error::from)?;
            let f = File::create(a.out.join("model.incm")).context("creating model file")?;
            write_model(&model, BufWriter::new(f)).map_err(anyhow::Error::from)?;
            report.write_csv(BufWriter::new(File::create(&report_path).context("creating report")?))
                .context("writing report")?;
            if !report.test.is_empty() {
                let mut w = BufWriter::new(File::create(a.out.join("test.csv")).context("creating test trace")?);
                writeln!(w, "snapshot_t,rfe").map_err(anyhow::Error::from)?;
                for p in &report.test {
                    writeln!(w, "{},{:e}", p.snapshot_t, p.rfe).map_err(anyhow::Error::from)?;
                }
            }
            let mut summary = Summary::new(config, &report, &metrics, false);
            summary.extra = json!({ "data": a.data.display().to_string(), "dataset": ds.meta });
            write_json(&a.out.join("summary.json"), &summary)?;
            println!(
                "rfe {:.6} psnr {} compression {:.2}x params {}",
                metrics.rfe,
                metrics.psnr_label(),
                metrics.compression_rate,
                metrics.param_count
            );
            Ok(())
        }
        Err(TrainError::Diverged { snapshot_t, cycle, report }) => {
            report.write_csv(BufWriter::new(File::create(&report_path).context("creating report")?))
                .context("writing report")?;
            write_json(
                &a.out.join("summary.json"),
                &json!({ "diverged": true, "snapshot_t": snapshot_t, "cycle": cycle, "config": config }),
            )?;
            Err(Failure::runtime(anyhow!(
                "training diverged at {} cycle {cycle}; partial report in {}",
                snapshot_t.map_or("offline step".into(), |t| format!("snapshot {t}")),
                report_path.display()
            )))
        }
        Err(e @ (TrainError::Config(_) | TrainError::ZeroNorm { .. })) => Err(Failure::usage(e.to_string())),
        Err(e) => Err(Failure::runtime(e.into())),
    }
}

pub fn compress(a: &CompressArgs) -> CmdResult {
    let mut config = a.train.config(a.mode.into(), a.sample_factor, a.seed);
    config.test_every = a.test_every;
    config.validate().map_err(|e| Failure::usage(e.to_string()))?;
    match config.precision {
        Precision::F32 => compress_with::<f32>(a, &config),
        Precision::F64 => compress_with::<f64>(a, &config),
    }
}

fn reconstruct_with<T: Real>(a: &ReconstructArgs) -> CmdResult {
    let model: CompressorModel<T> = read_model(BufReader::new(File::open(&a.model).context("opening model")?))
        .map_err(anyhow::Error::from)?;
    let mesh: MeshDataset<T> = load(&a.mesh)?;
    if mesh.spatial_dim() != model.spatial_dim() {
        return Err(Failure::mismatch(anyhow!(
            "mesh has {} spatial dimensions, model expects {}",
            mesh.spatial_dim(),
            model.spatial_dim()
        )));
    }
    let times: Vec<usize> = a.times.clone().unwrap_or_else(|| (0..model.time_count()).collect());
    if let Some(&bad) = times.iter().find(|&&t| t >= model.time_count()) {
        return Err(Failure::usage(format!("time {bad} beyond the model's {} snapshots", model.time_count())));
    }
    let recon = model_reconstruct(&model, mesh.coords(), &times).map_err(anyhow::Error::from)?;
    let meta = DatasetMeta {
        name: format!("reconstruction of {}", a.model.display()),
        dt: mesh.meta.dt,
        generator: json!({ "times": times }),
    };
    let out = MeshDataset::new(mesh.coords().clone(), recon, model.channels(), meta).map_err(anyhow::Error::from)?;
    save(&a.output, &out)?;
    Ok(())
}

pub fn reconstruct(a: &ReconstructArgs) -> CmdResult {
    let mut header = [0u8; 7];
    let mut f = File::open(&a.model).with_context(|| format!("opening {}", a.model.display()))?;
    std::io::Read::read_exact(&mut f, &mut header).context("reading model header")?;
    match artifact_precision(&header).map_err(anyhow::Error::from)? {
        Precision::F32 => reconstruct_with::<f32>(a),
        Precision::F64 => reconstruct_with::<f64>(a),
    }
}

pub fn eval(a: &EvalArgs) -> CmdResult {
    let reference: MeshDataset<f32> = load(&a.reference)?;
    let candidate: MeshDataset<f32> = load(&a.candidate)?;
    if reference.nodes() != candidate.nodes()
        || reference.channels() != candidate.channels()
        || reference.time_count() != candidate.time_count()
    {
        return Err(Failure::mismatch(anyhow!(
            "shape mismatch: reference T={} n={} c={}, candidate T={} n={} c={}",
            reference.time_count(),
            reference.nodes(),
            reference.channels(),
            candidate.time_count(),
            candidate.nodes(),
            candidate.channels()
        )));
    }
    let m = metrics_for(reference.snapshots(), candidate.snapshots(), 0).map_err(|e| match e {
        TrainError::ZeroNorm { .. } => Failure::mismatch(e),
        other => Failure::runtime(other.into()),
    })?;
    let psnr: Vec<String> = m.psnr_per_snapshot.iter().map(|&v| format_db(v)).collect();
    let out = json!({
        "rfe": m.rfe,
        "psnr_mean": format_db(m.psnr),
        "psnr": psnr,
    });
    println!("{out}");
    if let Some(path) = &a.output {
        write_json(path, &out)?;
    }
    Ok(())
}

pub fn dimest(a: &DimestArgs) -> CmdResult {
    let mesh: Option<MeshDataset<f64>> = a.mesh.as_deref().map(load).transpose()?;
    let n = match (a.n, &mesh) {
        (Some(n), _) => n,
        (None, Some(ds)) => ds.nodes(),
        (None, None) => return Err(Failure::usage("either --n or --mesh is required")),
    };
    let m = match (a.m, &a.model, &mesh) {
        (Some(m), _, _) => m,
        (None, Some(path), Some(ds)) => {
            let model: CompressorModel<f64> =
                read_model(BufReader::new(File::open(path).context("opening model")?)).map_err(anyhow::Error::from)?;
            let options = LpcaOptions {
                n_samples: a.samples,
                perturb_scale: a.perturb,
                threshold: a.threshold,
                seed: a.seed,
            };
            lpca_dimension(&model, ds.coords(), a.t, &options).map_err(|e| Failure::usage(e.to_string()))? as f64
        }
        _ => return Err(Failure::usage("either --M or both --model and --mesh are required")),
    };
    let est = estimate(m, a.full_loss, a.sketch_loss, n).map_err(|e| Failure::usage(e.to_string()))?;
    println!("{}", serde_json::to_string(&est).map_err(anyhow::Error::from)?);
    Ok(())
}

fn sweep_with<T: Real>(a: &SweepArgs) -> CmdResult {
    let ds: MeshDataset<T> = load(&a.data)?;
    let mut rows = Vec::new();
    for &factor in &a.factors {
        for trial in 0..a.trials {
            let seed = a.seed + trial as u64;
            let config = a.train.config(a.mode.into(), factor, seed);
            config.validate().map_err(|e| Failure::usage(e.to_string()))?;
            let (model, _) = match train(&config, &ds, None) {
                Ok(r) => r,
                Err(e @ TrainError::Diverged { .. }) => return Err(Failure::runtime(e.into())),
                Err(e) => return Err(Failure::runtime(e.into())),
            };
            let m = inc_core::trainer::evaluate(&model, &ds).map_err(anyhow::Error::from)?;
            eprintln!("factor {factor} seed {seed}: rfe {:.6}", m.rfe);
            rows.push((factor, seed, m.rfe, m.psnr));
        }
    }
    let mut w = BufWriter::new(File::create(&a.output).with_context(|| format!("creating {}", a.output.display()))?);
    writeln!(w, "sample_factor,seed,rfe,psnr").map_err(anyhow::Error::from)?;
    for (f, s, r, p) in &rows {
        writeln!(w, "{f},{s},{r:e},{}", format_db(*p)).map_err(anyhow::Error::from)?;
    }
    w.flush().map_err(anyhow::Error::from)?;
    println!("sample_factor,mean_rfe,std_rfe");
    for &factor in &a.factors {
        let v: Vec<f64> = rows.iter().filter(|r| r.0 == factor).map(|r| r.2).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = if v.len() > 1 {
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        } else {
            0.0
        };
        println!("{factor},{mean:e},{:e}", var.sqrt());
    }
    Ok(())
}

pub fn sweep(a: &SweepArgs) -> CmdResult {
    if a.factors.is_empty() {
        return Err(Failure::usage("--factors must list at least one sample factor"));
    }
    if a.trials == 0 {
        return Err(Failure::usage("--trials must be >= 1"));
    }
    match a.train.config(a.mode.into(), a.factors[0], a.seed).precision {
        Precision::F32 => sweep_with::<f32>(a),
        Precision::F64 => sweep_with::<f64>(a),
    }
}
