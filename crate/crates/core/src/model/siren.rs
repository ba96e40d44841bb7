use rand::Rng;

use super::layout::{LayerSlots, SirenLayout};
use crate::numcore::{Graph, NodeId, Real, Tensor};
use crate::sketch::rng_from_seed;

/// Sine-network initialization: first-layer weights `U(-1/in, 1/in)`, later
/// weights `U(-sqrt(6/fan_in)/omega0, +sqrt(6/fan_in)/omega0)`, zero biases.
pub fn init_siren<T: Real>(layout: &SirenLayout, seed: u64) -> Tensor<T> {
    let template = layout.template();
    let mut rng = rng_from_seed(seed);
    let mut params = vec![T::zero(); template.total];
    let mut fill = |slots: &LayerSlots, bound: f64| {
        for v in &mut params[slots.weight.range()] {
            *v = T::from_f64(rng.random_range(-bound..=bound));
        }
    };
    fill(&template.first, 1.0 / layout.in_dim as f64);
    let hidden_bound = |fan_in: usize| (6.0 / fan_in as f64).sqrt() / layout.omega0;
    for (inner, outer) in &template.blocks {
        fill(inner, hidden_bound(inner.fan_in()));
        fill(outer, hidden_bound(outer.fan_in()));
    }
    fill(&template.last, hidden_bound(template.last.fan_in()));
    Tensor::vector(params)
}

/// Appends the network to `g`, reading weights from the flat vector `params`
/// starting at `base`. `x` is `rows x in_dim`; the result is `rows x out_dim`.
pub fn build_siren<T: Real>(
    g: &mut Graph<T>,
    layout: &SirenLayout,
    params: NodeId,
    base: usize,
    x: NodeId,
) -> NodeId {
    let template = layout.template();
    let layer = |g: &mut Graph<T>, slots: &LayerSlots, input: NodeId| {
        let w = g.slice(params, base + slots.weight.offset, &slots.weight.shape);
        let b = g.slice(params, base + slots.bias.offset, &slots.bias.shape);
        g.affine(input, w, b)
    };
    let sine = |g: &mut Graph<T>, pre: NodeId, omega: f64| {
        let scaled = if omega == 1.0 {
            pre
        } else {
            g.scale(pre, T::from_f64(omega))
        };
        g.sin(scaled)
    };

    let pre = layer(g, &template.first, x);
    let mut h = sine(g, pre, layout.omega0);
    for (inner, outer) in &template.blocks {
        let a = layer(g, inner, h);
        let a = sine(g, a, layout.omega_hidden);
        let b = layer(g, outer, a);
        let b = sine(g, b, layout.omega_hidden);
        h = g.add(h, b);
    }
    layer(g, &template.last, h)
}
