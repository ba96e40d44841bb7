use serde::{Deserialize, Serialize};

use super::ModelError;

/// Shape of a residual sine network.
///
/// The network is a sine input layer `sin(omega0 * (W x + b))`, then `blocks`
/// residual blocks `h + sin(omega_hidden * (W2 sin(omega_hidden * (W1 h + b1)) + b2))`,
/// then an affine output layer with no activation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirenLayout {
    pub in_dim: usize,
    pub out_dim: usize,
    pub width: usize,
    pub blocks: usize,
    pub omega0: f64,
    pub omega_hidden: f64,
}

/// Where one weight or bias lives inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub offset: usize,
    pub shape: Vec<usize>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Weight/bias pair of one affine layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSlots {
    pub weight: Segment,
    pub bias: Segment,
}

impl LayerSlots {
    pub fn fan_in(&self) -> usize {
        self.weight.shape[1]
    }
}

/// Offsets of every layer, in flattening order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamTemplate {
    pub first: LayerSlots,
    /// `(inner, outer)` affine layers of each block.
    pub blocks: Vec<(LayerSlots, LayerSlots)>,
    pub last: LayerSlots,
    pub total: usize,
}

impl ParamTemplate {
    pub fn layers(&self) -> impl Iterator<Item = &LayerSlots> {
        std::iter::once(&self.first)
            .chain(self.blocks.iter().flat_map(|(a, b)| [a, b]))
            .chain(std::iter::once(&self.last))
    }
}

impl SirenLayout {
    pub const DEFAULT_OMEGA0: f64 = 30.0;
    pub const DEFAULT_OMEGA_HIDDEN: f64 = 1.0;

    pub fn new(in_dim: usize, out_dim: usize, width: usize, blocks: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            width,
            blocks,
            omega0: Self::DEFAULT_OMEGA0,
            omega_hidden: Self::DEFAULT_OMEGA_HIDDEN,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.in_dim == 0 || self.out_dim == 0 || self.width == 0 || self.blocks == 0 {
            return Err(ModelError::InvalidLayout(format!(
                "in_dim, out_dim, width and blocks must be >= 1: {self:?}"
            )));
        }
        if !self.omega0.is_finite() || !self.omega_hidden.is_finite() || self.omega0 <= 0.0 || self.omega_hidden <= 0.0 {
            return Err(ModelError::InvalidLayout(format!("frequency scales must be positive: {self:?}")));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        let w = self.width;
        (self.in_dim * w + w) + self.blocks * 2 * (w * w + w) + (w * self.out_dim + self.out_dim)
    }

    pub fn template(&self) -> ParamTemplate {
        let mut offset = 0;
        let mut layer = |fan_in: usize, fan_out: usize| {
            let weight = Segment {
                offset,
                shape: vec![fan_out, fan_in],
            };
            offset += fan_in * fan_out;
            let bias = Segment {
                offset,
                shape: vec![fan_out],
            };
            offset += fan_out;
            LayerSlots { weight, bias }
        };
        let first = layer(self.in_dim, self.width);
        let blocks = (0..self.blocks)
            .map(|_| (layer(self.width, self.width), layer(self.width, self.width)))
            .collect();
        let last = layer(self.width, self.out_dim);
        ParamTemplate {
            first,
            blocks,
            last,
            total: offset,
        }
    }
}
