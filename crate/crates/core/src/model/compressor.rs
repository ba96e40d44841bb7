use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::layout::SirenLayout;
use super::siren::{build_siren, init_siren};
use super::ModelError;
use crate::numcore::{Graph, NodeId, Real, Tensor};
use crate::sketch::{derive_seed, stream};

/// Graph input names used by [`CompressorModel::build_full`].
pub const HYPER_INPUT: &str = "hyper";
pub const COORDS_INPUT: &str = "coords";

/// Architecture choices for a compressor, independent of the data shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub hyper_width: usize,
    pub hyper_blocks: usize,
    pub target_width: usize,
    pub target_blocks: usize,
    pub omega0: f64,
    pub omega_hidden: f64,
    /// Multiplier on the hypernetwork's last-layer weights at init.
    pub hyper_scale: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            hyper_width: 12,
            hyper_blocks: 1,
            target_width: 12,
            target_blocks: 1,
            omega0: SirenLayout::DEFAULT_OMEGA0,
            omega_hidden: SirenLayout::DEFAULT_OMEGA_HIDDEN,
            hyper_scale: 0.01,
        }
    }
}

impl ModelSpec {
    pub fn target_layout(&self, spatial_dim: usize, channels: usize) -> SirenLayout {
        SirenLayout {
            in_dim: spatial_dim + 1,
            out_dim: channels,
            width: self.target_width,
            blocks: self.target_blocks,
            omega0: self.omega0,
            omega_hidden: self.omega_hidden,
        }
    }

    pub fn hyper_layout(&self, target: &SirenLayout) -> SirenLayout {
        SirenLayout {
            in_dim: 1,
            out_dim: target.param_count(),
            width: self.hyper_width,
            blocks: self.hyper_blocks,
            omega0: self.omega0,
            omega_hidden: self.omega_hidden,
        }
    }

    /// Stored parameter count for data with the given shape.
    pub fn param_count(&self, spatial_dim: usize, channels: usize) -> usize {
        let target = self.target_layout(spatial_dim, channels);
        self.hyper_layout(&target).param_count()
    }
}

/// Hypernetwork parameters whose output layer reproduces a fresh target
/// initialization: the final bias holds `init_siren(target)` and the final
/// weights are multiplied by `scale`.
pub fn hyper_init<T: Real>(
    hyper: &SirenLayout,
    target: &SirenLayout,
    scale: f64,
    seed: u64,
) -> Result<Tensor<T>, ModelError> {
    if hyper.out_dim != target.param_count() {
        return Err(ModelError::InvalidLayout(format!(
            "hypernetwork emits {} values, target needs {}",
            hyper.out_dim,
            target.param_count()
        )));
    }
    let mut params = init_siren::<T>(hyper, derive_seed(seed, stream::MODEL_INIT));
    let target_init = init_siren::<T>(target, derive_seed(seed, stream::TARGET_INIT));
    let last = hyper.template().last;
    let s = T::from_f64(scale);
    let data = params.data_mut();
    for v in &mut data[last.weight.range()] {
        *v = *v * s;
    }
    data[last.bias.range()].copy_from_slice(target_init.data());
    Ok(params)
}

/// The target network's initial parameters implied by `seed`.
pub fn target_init<T: Real>(target: &SirenLayout, seed: u64) -> Tensor<T> {
    init_siren(target, derive_seed(seed, stream::TARGET_INIT))
}

/// Time-conditioned hypernetwork plus the layout of the target INR it drives.
///
/// Only `hyper_params` is stored; the target weights `theta(t)` are produced
/// on demand for every time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressorModel<T> {
    hyper_layout: SirenLayout,
    target_layout: SirenLayout,
    hyper_params: Tensor<T>,
    time_count: usize,
}

impl<T: Real> CompressorModel<T> {
    /// Fresh model for `time_count` snapshots of an `n x channels` field on a
    /// mesh in `spatial_dim` dimensions.
    pub fn new(
        spec: &ModelSpec,
        spatial_dim: usize,
        channels: usize,
        time_count: usize,
        seed: u64,
    ) -> Result<Self, ModelError> {
        let target = spec.target_layout(spatial_dim, channels);
        let hyper = spec.hyper_layout(&target);
        let params = hyper_init(&hyper, &target, spec.hyper_scale, seed)?;
        Self::from_parts(hyper, target, params, time_count)
    }

    pub fn from_parts(
        hyper_layout: SirenLayout,
        target_layout: SirenLayout,
        hyper_params: Tensor<T>,
        time_count: usize,
    ) -> Result<Self, ModelError> {
        hyper_layout.validate()?;
        target_layout.validate()?;
        if hyper_layout.in_dim != 1 {
            return Err(ModelError::InvalidLayout("hypernetwork input must be time only".into()));
        }
        if hyper_layout.out_dim != target_layout.param_count() {
            return Err(ModelError::InvalidLayout(format!(
                "hypernetwork emits {} values, target needs {}",
                hyper_layout.out_dim,
                target_layout.param_count()
            )));
        }
        if hyper_params.len() != hyper_layout.param_count() {
            return Err(ModelError::ShapeMismatch(format!(
                "expected {} hypernetwork parameters, got {}",
                hyper_layout.param_count(),
                hyper_params.len()
            )));
        }
        if time_count == 0 {
            return Err(ModelError::InvalidLayout("time_count must be >= 1".into()));
        }
        let hyper_params = hyper_params.reshape(&[hyper_layout.param_count()])?;
        Ok(Self {
            hyper_layout,
            target_layout,
            hyper_params,
            time_count,
        })
    }

    pub fn hyper_layout(&self) -> &SirenLayout {
        &self.hyper_layout
    }

    pub fn target_layout(&self) -> &SirenLayout {
        &self.target_layout
    }

    pub fn params(&self) -> &Tensor<T> {
        &self.hyper_params
    }

    pub fn params_mut(&mut self) -> &mut Tensor<T> {
        &mut self.hyper_params
    }

    pub fn set_params(&mut self, params: Tensor<T>) -> Result<(), ModelError> {
        if params.len() != self.hyper_params.len() {
            return Err(ModelError::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                self.hyper_params.len(),
                params.len()
            )));
        }
        self.hyper_params = params.reshape(&[self.hyper_layout.param_count()])?;
        Ok(())
    }

    /// Number of stored values (the compressed size).
    pub fn param_count(&self) -> usize {
        self.hyper_params.len()
    }

    pub fn time_count(&self) -> usize {
        self.time_count
    }

    pub fn spatial_dim(&self) -> usize {
        self.target_layout.in_dim - 1
    }

    pub fn channels(&self) -> usize {
        self.target_layout.out_dim
    }

    /// Snapshot index mapped onto `[-1, 1]`.
    pub fn time_input(&self, t: usize) -> f64 {
        if self.time_count <= 1 {
            0.0
        } else {
            2.0 * t as f64 / (self.time_count - 1) as f64 - 1.0
        }
    }

    pub fn cast<U: Real>(&self) -> CompressorModel<U> {
        CompressorModel {
            hyper_layout: self.hyper_layout,
            target_layout: self.target_layout,
            hyper_params: self.hyper_params.cast(),
            time_count: self.time_count,
        }
    }

    /// Appends `theta(t)` (shape `1 x P`) computed from the `hyper` node.
    pub fn build_hyper(&self, g: &mut Graph<T>, hyper: NodeId, t: usize) -> NodeId {
        let tin = g.constant(Tensor::scalar(T::from_f64(self.time_input(t))).reshape(&[1, 1]).expect("1x1"));
        build_siren(g, &self.hyper_layout, hyper, 0, tin)
    }

    /// Appends the target network evaluated at `(coords, t)` with weights `theta`.
    pub fn build_target(&self, g: &mut Graph<T>, theta: NodeId, coords: NodeId, rows: usize, t: usize) -> NodeId {
        let tcol = g.constant(Tensor::filled(&[rows, 1], T::from_f64(self.time_input(t))));
        let xin = g.concat(coords, tcol);
        build_siren(g, &self.target_layout, theta, 0, xin)
    }

    /// Appends the reconstruction at time `t` for `rows` mesh nodes.
    pub fn build_full(&self, g: &mut Graph<T>, hyper: NodeId, coords: NodeId, rows: usize, t: usize) -> NodeId {
        let theta = self.build_hyper(g, hyper, t);
        self.build_target(g, theta, coords, rows, t)
    }

    /// Target parameters `theta(t)` as a flat vector.
    pub fn hyper_forward(&self, t: usize) -> Result<Tensor<T>, ModelError> {
        let mut g = Graph::new();
        let hyper = g.input(HYPER_INPUT);
        self.build_hyper(&mut g, hyper, t);
        let theta = g.forward(&HashMap::from([(HYPER_INPUT, &self.hyper_params)]))?;
        Ok(theta.reshape(&[self.target_layout.param_count()])?)
    }

    /// Evaluates the target network with explicit weights.
    pub fn target_forward(&self, theta: &Tensor<T>, coords: &Tensor<T>, t: usize) -> Result<Tensor<T>, ModelError> {
        if theta.len() != self.target_layout.param_count() {
            return Err(ModelError::ShapeMismatch(format!(
                "theta has {} values, target needs {}",
                theta.len(),
                self.target_layout.param_count()
            )));
        }
        self.check_coords(coords)?;
        let mut g = Graph::new();
        let th = g.input("theta");
        let x = g.input(COORDS_INPUT);
        self.build_target(&mut g, th, x, coords.rows(), t);
        Ok(g.forward(&HashMap::from([("theta", theta), (COORDS_INPUT, coords)]))?)
    }

    /// Reconstruction `U~_t = f(X, t; theta(t))`, shape `n x channels`.
    pub fn full_forward(&self, coords: &Tensor<T>, t: usize) -> Result<Tensor<T>, ModelError> {
        self.check_coords(coords)?;
        let mut g = Graph::new();
        let hyper = g.input(HYPER_INPUT);
        let x = g.input(COORDS_INPUT);
        self.build_full(&mut g, hyper, x, coords.rows(), t);
        Ok(g.forward(&HashMap::from([(HYPER_INPUT, &self.hyper_params), (COORDS_INPUT, coords)]))?)
    }

    fn check_coords(&self, coords: &Tensor<T>) -> Result<(), ModelError> {
        if coords.shape().len() != 2 || coords.cols() != self.spatial_dim() {
            return Err(ModelError::ShapeMismatch(format!(
                "coordinates {:?} do not have {} columns",
                coords.shape(),
                self.spatial_dim()
            )));
        }
        Ok(())
    }
}

/// Data size over stored parameter count, `(T * n * c) / params`.
pub fn compression_rate(snapshots: usize, nodes: usize, channels: usize, param_count: usize) -> Result<f64, ModelError> {
    if param_count == 0 {
        return Err(ModelError::InvalidLayout("parameter count is zero".into()));
    }
    Ok((snapshots as f64 * nodes as f64 * channels as f64) / param_count as f64)
}
