//! Trains several modes on one generated dataset and prints their errors.
//!
//! Configured through environment variables, e.g.
//! `MODES=insitu-fjlt,offline-baseline C=50 cargo run --release --example compare_modes`.

use std::env;

use inc_core::dataio::{gen_branch3d, gen_pulse2d};
use inc_core::model::ModelSpec;
use inc_core::trainer::{evaluate, train, Mode, TrainConfig};

fn arg<T: std::str::FromStr>(name: &str, default: T) -> T {
    env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn main() {
    let side: usize = arg("SIDE", 32);
    let tc: usize = arg("T", 64);
    let ds = if arg("KIND", "pulse2d".to_string()) == "branch3d" {
        gen_branch3d::<f32>(arg("N", 1000), tc, arg("DSEED", 1)).unwrap()
    } else {
        gen_pulse2d::<f32>(side, tc, arg("DSEED", 1)).unwrap()
    };
    let modes: String = arg("MODES", "insitu-fjlt,insitu-baseline,offline-baseline".to_string());
    for m in modes.split(',') {
        let cfg = TrainConfig {
            mode: m.parse::<Mode>().unwrap(),
            lr: arg("LR", 1e-3),
            batch_sketch: arg("BS", 8),
            cycles_per_snapshot: arg("C", 100),
            sample_factor: arg("SF", 5.0),
            master_seed: arg("SEED", 0),
            model: ModelSpec {
                hyper_width: arg("HW", 12),
                target_width: arg("TW", 12),
                omega0: arg("W0", 30.0),
                hyper_scale: arg("HS", 0.01),
                ..ModelSpec::default()
            },
            ..TrainConfig::default()
        };
        let (model, report) = train(&cfg, &ds, None).unwrap();
        let metrics = evaluate(&model, &ds).unwrap();
        println!(
            "{m}: rfe {:.4} psnr {:.2} rate {:.1} params {} time {:.1}s final loss {:?}",
            metrics.rfe,
            metrics.psnr,
            metrics.compression_rate,
            metrics.param_count,
            report.wall_clock_s,
            report.final_loss(1.0)
        );
    }
}
