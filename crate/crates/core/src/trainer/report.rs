use std::io::Write;

use serde::Serialize;

use super::metrics::{format_db, serialize_db, serialize_db_list};
use super::{Mode, TrainConfig};
use crate::buffer::SizeReport;

/// One optimizer step. Offline runs leave `snapshot_t` empty; a part of the
/// loss that was not evaluated is `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleRecord {
    pub snapshot_t: Option<usize>,
    pub cycle: usize,
    pub l_full: Option<f64>,
    pub l_sketch: Option<f64>,
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestPoint {
    pub snapshot_t: usize,
    /// Error over the held-out snapshots `0..=snapshot_t`.
    pub rfe: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TrainReport {
    pub mode: Option<Mode>,
    pub cycles: Vec<CycleRecord>,
    pub test: Vec<TestPoint>,
    pub snapshots_read: usize,
    pub sketch_rows: usize,
    /// Largest number of field values held in the replay buffer.
    pub max_stored_values: usize,
    /// `(T_f n + T_s k) c`.
    pub value_bound: usize,
    pub buffer: Option<SizeReport>,
    pub sketch_seeds: Vec<u64>,
    pub wall_clock_s: f64,
}

impl TrainReport {
    pub const CSV_HEADER: &'static str = "snapshot_t,cycle,L_full,L_sketch,lr";

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.cycles {
            writeln!(
                w,
                "{},{},{},{},{:e}",
                r.snapshot_t.map(|t| t.to_string()).unwrap_or_default(),
                r.cycle,
                opt(r.l_full),
                opt(r.l_sketch),
                r.lr
            )?;
        }
        w.flush()
    }

    /// Training loss `L_full + lambda L_sketch` at the last step.
    pub fn final_loss(&self, lambda: f64) -> Option<f64> {
        self.cycles
            .last()
            .map(|r| r.l_full.unwrap_or(0.0) + lambda * r.l_sketch.unwrap_or(0.0))
    }
}

/// Reconstruction quality of a compressor against its data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub rfe: f64,
    #[serde(serialize_with = "serialize_db")]
    pub psnr: f64,
    #[serde(serialize_with = "serialize_db_list")]
    pub psnr_per_snapshot: Vec<f64>,
    pub compression_rate: f64,
    pub param_count: usize,
}

impl Metrics {
    pub fn psnr_label(&self) -> String {
        format_db(self.psnr)
    }
}

/// The JSON summary written next to a trained model.
#[derive(Debug, Clone, Serialize)]
pub struct Summary<'a> {
    pub mode: Mode,
    pub rfe: f64,
    #[serde(serialize_with = "serialize_db")]
    pub psnr: f64,
    pub compression_rate: f64,
    pub param_count: usize,
    pub metrics: &'a Metrics,
    pub config: &'a TrainConfig,
    pub master_seed: u64,
    pub sketch_rows: usize,
    pub sketch_seeds: &'a [u64],
    pub snapshots_read: usize,
    pub cycles_executed: usize,
    pub final_loss: Option<f64>,
    pub max_stored_values: usize,
    pub value_bound: usize,
    pub wall_clock_s: f64,
    pub diverged: bool,
    /// Free-form extra context such as the dataset description.
    pub extra: serde_json::Value,
}

impl<'a> Summary<'a> {
    pub fn new(config: &'a TrainConfig, report: &'a TrainReport, metrics: &'a Metrics, diverged: bool) -> Self {
        Self {
            mode: config.mode,
            rfe: metrics.rfe,
            psnr: metrics.psnr,
            compression_rate: metrics.compression_rate,
            param_count: metrics.param_count,
            metrics,
            config,
            master_seed: config.master_seed,
            sketch_rows: report.sketch_rows,
            sketch_seeds: &report.sketch_seeds,
            snapshots_read: report.snapshots_read,
            cycles_executed: report.cycles.len(),
            final_loss: report.final_loss(config.lambda),
            max_stored_values: report.max_stored_values,
            value_bound: report.value_bound,
            wall_clock_s: report.wall_clock_s,
            diverged,
            extra: serde_json::Value::Null,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rows() {
        let report = TrainReport {
            cycles: vec![
                CycleRecord {
                    snapshot_t: Some(0),
                    cycle: 0,
                    l_full: Some(0.5),
                    l_sketch: None,
                    lr: 1e-4,
                },
                CycleRecord {
                    snapshot_t: None,
                    cycle: 1,
                    l_full: None,
                    l_sketch: Some(0.25),
                    lr: 1e-4,
                },
            ],
            ..Default::default()
        };
        let mut out = Vec::new();
        report.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, ["snapshot_t,cycle,L_full,L_sketch,lr", "0,0,5e-1,,1e-4", ",1,,2.5e-1,1e-4"]);
        assert_eq!(report.final_loss(2.0), Some(0.5));
    }
}
