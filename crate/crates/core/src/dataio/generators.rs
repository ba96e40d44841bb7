//! Deterministic synthetic snapshot sets.
//!
//! `pulse2d` is a structured-grid analog of a propagating front;
//! `branch3d` is an unstructured point cloud along a branching tree with a
//! diffusion profile spreading from the root.

use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use super::{DataError, DatasetMeta, MeshDataset};
use crate::numcore::{Real, Tensor};
use crate::sketch::rng_from_seed;

/// Analytic description of a translating, spreading Gaussian pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse2d {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub sigma_start: f64,
    pub sigma_end: f64,
    pub time_count: usize,
}

impl Pulse2d {
    pub fn from_seed(time_count: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let mut jitter = || rng.random_range(-0.05..0.05);
        let start = [0.3 + jitter(), 0.3 + jitter()];
        let end = [0.7 + jitter(), 0.65 + jitter()];
        let sigma_start = 0.09 + 0.01 * (jitter() + 0.05) * 10.0;
        Self {
            start,
            end,
            sigma_start,
            sigma_end: sigma_start + 0.05,
            time_count,
        }
    }

    fn frac(&self, t: usize) -> f64 {
        if self.time_count <= 1 {
            0.0
        } else {
            t as f64 / (self.time_count - 1) as f64
        }
    }

    pub fn center(&self, t: usize) -> [f64; 2] {
        let s = self.frac(t);
        [
            self.start[0] + s * (self.end[0] - self.start[0]),
            self.start[1] + s * (self.end[1] - self.start[1]),
        ]
    }

    pub fn sigma(&self, t: usize) -> f64 {
        self.sigma_start + self.frac(t) * (self.sigma_end - self.sigma_start)
    }

    pub fn value(&self, x: [f64; 2], t: usize) -> f64 {
        let p = self.center(t);
        let s = self.sigma(t);
        let r2 = (x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2);
        (-r2 / (2.0 * s * s)).exp()
    }
}

/// Uniform `side x side` grid on `[0, 1]^2` carrying a moving Gaussian pulse.
pub fn gen_pulse2d<T: Real>(side: usize, time_count: usize, seed: u64) -> Result<MeshDataset<T>, DataError> {
    if side < 8 {
        return Err(DataError::Generator(format!("grid side {side} < 8")));
    }
    if time_count < 2 {
        return Err(DataError::Generator(format!("snapshot count {time_count} < 2")));
    }
    let pulse = Pulse2d::from_seed(time_count, seed);
    let h = 1.0 / (side - 1) as f64;
    let points: Vec<[f64; 2]> = (0..side)
        .flat_map(|i| (0..side).map(move |j| [i as f64 * h, j as f64 * h]))
        .collect();
    let coords = Tensor::<f64>::matrix(points.len(), 2, points.iter().flatten().copied().collect())?;
    let snapshots = (0..time_count)
        .map(|t| {
            let values = points.iter().map(|&x| pulse.value(x, t)).collect();
            Tensor::<f64>::matrix(points.len(), 1, values).map(|u| u.cast())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let meta = DatasetMeta {
        name: "pulse2d".into(),
        dt: 1.0,
        generator: json!({ "kind": "pulse2d", "side": side, "T": time_count, "seed": seed }),
    };
    MeshDataset::new(coords.cast(), snapshots, 1, meta)
}

/// One straight piece of the branching tree.
#[derive(Debug, Clone, Copy)]
struct Branch {
    start: [f64; 3],
    dir: [f64; 3],
    length: f64,
    /// Arc length from the root to `start`.
    offset: f64,
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Analytic description of the tree and its diffusion profile.
#[derive(Debug, Clone)]
pub struct Branch3d {
    branches: Vec<Branch>,
    pub diffusivity: f64,
    pub tau0: f64,
    pub time_count: usize,
}

impl Branch3d {
    pub const DEPTH: usize = 4;

    pub fn from_seed(time_count: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let mut branches = vec![Branch {
            start: [0.0; 3],
            dir: [0.0, 0.0, 1.0],
            length: 0.8,
            offset: 0.0,
        }];
        let mut frontier = vec![0usize];
        for _ in 1..Self::DEPTH {
            let mut next = Vec::new();
            for &p in &frontier {
                let parent = branches[p];
                let end = [
                    parent.start[0] + parent.length * parent.dir[0],
                    parent.start[1] + parent.length * parent.dir[1],
                    parent.start[2] + parent.length * parent.dir[2],
                ];
                for _ in 0..2 {
                    let mut g = || -> f64 { rng.sample::<f64, _>(StandardNormal) * 0.8 };
                    let dir = normalize([parent.dir[0] + g(), parent.dir[1] + g(), parent.dir[2] + g()]);
                    branches.push(Branch {
                        start: end,
                        dir,
                        length: parent.length * rng.random_range(0.6..0.8),
                        offset: parent.offset + parent.length,
                    });
                    next.push(branches.len() - 1);
                }
            }
            frontier = next;
        }
        Self {
            branches,
            diffusivity: 0.5,
            tau0: 0.3,
            time_count,
        }
    }

    fn tau(&self, t: usize) -> f64 {
        let s = if self.time_count <= 1 {
            0.0
        } else {
            t as f64 / (self.time_count - 1) as f64
        };
        self.tau0 + s
    }

    /// Field value at graph distance `s` from the root.
    pub fn value(&self, s: f64, t: usize) -> f64 {
        let tau = self.tau(t);
        (self.tau0 / tau).sqrt() * (-s * s / (4.0 * self.diffusivity * tau)).exp()
    }

    pub fn total_length(&self) -> f64 {
        self.branches.iter().map(|b| b.length).sum()
    }
}

/// Samples of the tree used by [`gen_branch3d`]: coordinates and graph distance.
pub fn branch3d_points(n_points: usize, seed: u64) -> (Branch3d, Vec<[f64; 3]>, Vec<f64>) {
    let tree = Branch3d::from_seed(2, seed);
    let mut rng = rng_from_seed(seed ^ 0x5EED_B4A7_C4E5);
    let total = tree.total_length();
    let mut coords = vec![[0.0; 3]];
    let mut dist = vec![0.0];
    while coords.len() < n_points {
        let mut pick = rng.random_range(0.0..total);
        let mut branch = tree.branches[tree.branches.len() - 1];
        for b in &tree.branches {
            if pick < b.length {
                branch = *b;
                break;
            }
            pick -= b.length;
        }
        let along = rng.random_range(0.0..branch.length);
        let mut p = [0.0; 3];
        for (k, v) in p.iter_mut().enumerate() {
            *v = branch.start[k] + along * branch.dir[k] + 0.01 * rng.sample::<f64, _>(StandardNormal);
        }
        coords.push(p);
        dist.push(branch.offset + along);
    }
    (tree, coords, dist)
}

/// Point cloud along a random 3D branching tree; node 0 is the root.
pub fn gen_branch3d<T: Real>(n_points: usize, time_count: usize, seed: u64) -> Result<MeshDataset<T>, DataError> {
    if n_points < 100 {
        return Err(DataError::Generator(format!("point count {n_points} < 100")));
    }
    if time_count < 2 {
        return Err(DataError::Generator(format!("snapshot count {time_count} < 2")));
    }
    let (mut tree, points, dist) = branch3d_points(n_points, seed);
    tree.time_count = time_count;
    let coords = Tensor::<f64>::matrix(n_points, 3, points.iter().flatten().copied().collect())?;
    let snapshots = (0..time_count)
        .map(|t| {
            let values = dist.iter().map(|&s| tree.value(s, t)).collect();
            Tensor::<f64>::matrix(n_points, 1, values).map(|u| u.cast())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let meta = DatasetMeta {
        name: "branch3d".into(),
        dt: 1.0,
        generator: json!({ "kind": "branch3d", "points": n_points, "T": time_count, "seed": seed }),
    };
    MeshDataset::new(coords.cast(), snapshots, 1, meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_peak_is_one_at_center() {
        let p = Pulse2d::from_seed(10, 3);
        assert_eq!(p.value(p.center(0), 0), 1.0);
        assert_eq!(p.value(p.center(9), 9), 1.0);
    }

    #[test]
    fn pulse_mass_grows_with_width() {
        // midpoint quadrature of the analytic field on [0,1]^2
        let p = Pulse2d::from_seed(16, 11);
        let m = 400;
        let mass = |t: usize| -> f64 {
            let h = 1.0 / m as f64;
            let mut acc = 0.0;
            for i in 0..m {
                for j in 0..m {
                    acc += p.value([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h], t);
                }
            }
            acc * h * h
        };
        let masses: Vec<f64> = (0..16).map(mass).collect();
        assert!(masses.windows(2).all(|w| w[1] > w[0]), "{masses:?}");
        let ds: MeshDataset<f64> = gen_pulse2d(32, 16, 11).unwrap();
        let sums: Vec<f64> = ds.snapshots().iter().map(|u| u.sum()).collect();
        assert!(sums.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn pulse_deterministic() {
        let a: MeshDataset<f32> = gen_pulse2d(16, 4, 7).unwrap();
        let b: MeshDataset<f32> = gen_pulse2d(16, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.nodes(), 256);
        let c: MeshDataset<f32> = gen_pulse2d(16, 4, 8).unwrap();
        assert_ne!(a.snapshots(), c.snapshots());
    }

    #[test]
    fn generator_preconditions() {
        assert!(gen_pulse2d::<f32>(7, 4, 0).is_err());
        assert!(gen_pulse2d::<f32>(8, 1, 0).is_err());
        assert!(gen_branch3d::<f32>(99, 4, 0).is_err());
    }

    #[test]
    fn branch_root_is_maximum() {
        let ds: MeshDataset<f64> = gen_branch3d(500, 5, 2).unwrap();
        for t in 0..5 {
            let u = ds.snapshot(t);
            let root = u.data()[0];
            assert!(u.data().iter().all(|&v| v <= root));
        }
        assert_eq!(ds.coords().row(0), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn branch_decays_with_graph_distance() {
        let (tree, _, dist) = branch3d_points(400, 9);
        let ds: MeshDataset<f64> = gen_branch3d(400, 6, 9).unwrap();
        let mut order: Vec<usize> = (0..400).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]));
        for t in 0..6 {
            let u = ds.snapshot(t);
            for w in order.windows(2) {
                assert!(u.data()[w[1]] <= u.data()[w[0]]);
            }
        }
        assert!(tree.total_length() > 0.8);
    }

    #[test]
    fn no_zero_norm_channels() {
        let a: MeshDataset<f32> = gen_branch3d(300, 20, 4).unwrap();
        let b: MeshDataset<f32> = gen_pulse2d(8, 20, 4).unwrap();
        for ds in [a, b] {
            assert!(ds.snapshots().iter().all(|u| u.norm() > 0.0));
        }
    }

    #[test]
    fn branch_deterministic() {
        let a: MeshDataset<f32> = gen_branch3d(200, 3, 1).unwrap();
        let b: MeshDataset<f32> = gen_branch3d(200, 3, 1).unwrap();
        assert_eq!(a, b);
    }
}
