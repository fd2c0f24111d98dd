//! Monte-Carlo cross-check of the analytic variances.
//!
//! Quadrature samples are drawn from the state's multivariate normal
//! distribution and the joint observable's variance is estimated the way a
//! spectrum analyser would, from the samples alone.
//!
//! Reproducibility contract: samples are generated in shards of
//! [`SHARD_SIZE`] draws. Shard `k` uses a ChaCha8 generator
//! (`rand_chacha` 0.9) seeded with `seed_from_u64(seed)` on stream `k`, and
//! standard normals come from `rand_distr::StandardNormal`. The covariance is
//! factored as `U sqrt(L)` from its symmetric eigendecomposition. Shard
//! statistics are merged in shard order, so results do not depend on the
//! number of threads.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{self, JointCombination};
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::scenario::{self, Arm, ScenarioConfig, MODE_1550, MODE_532};
use crate::trace::{Axis, Grid, PointSampling, TracePoint, TraceSeries};

pub const SHARD_SIZE: usize = 1 << 16;

/// Negative eigenvalues down to this magnitude are treated as round-off and
/// clamped to zero before factorisation.
pub const EIGEN_JITTER: f64 = 1e-12;

/// One variance estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRun {
    pub seed: u64,
    pub n_samples: u64,
    pub combo: JointCombination,
    pub estimate: f64,
    /// `estimate * sqrt(2 / n)`, the spread of a Gaussian sample variance.
    pub std_error: f64,
}

struct Factor {
    mean: DVector<f64>,
    root: DMatrix<f64>,
}

impl Factor {
    fn new(state: &GaussianState) -> Result<Self> {
        let eig = SymmetricEigen::new(state.cov().clone());
        let min_eigenvalue = eig.eigenvalues.min();
        if min_eigenvalue < -EIGEN_JITTER {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue });
        }
        let scale = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
        Ok(Self {
            mean: state.mean().clone(),
            root: eig.eigenvectors * scale,
        })
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Fills `out` with one sample per `dim` entries, `count` samples in total.
    fn fill_shard(&self, seed: u64, shard: usize, count: usize, out: &mut Vec<f64>) {
        let dim = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shard as u64);
        let mut z = vec![0.0; dim];
        out.clear();
        out.reserve(count * dim);
        for _ in 0..count {
            for zi in z.iter_mut() {
                *zi = rng.sample(StandardNormal);
            }
            for i in 0..dim {
                let mut v = self.mean[i];
                for (j, zj) in z.iter().enumerate() {
                    v += self.root[(i, j)] * zj;
                }
                out.push(v);
            }
        }
    }
}

fn shard_sizes(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n.div_ceil(SHARD_SIZE)).map(move |k| (k, SHARD_SIZE.min(n - k * SHARD_SIZE)))
}

/// `n x 2N` matrix of quadrature samples, one row per draw.
pub fn sample_quadratures(state: &GaussianState, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    let factor = Factor::new(state)?;
    let dim = factor.dim();
    let shards: Vec<(usize, usize)> = shard_sizes(n).collect();
    let blocks: Vec<Vec<f64>> = shards
        .par_iter()
        .map(|&(k, count)| {
            let mut buf = Vec::new();
            factor.fill_shard(seed, k, count, &mut buf);
            buf
        })
        .collect();
    let flat: Vec<f64> = blocks.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(n, dim, &flat))
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, y: f64) {
        self.count += 1.0;
        let delta = y - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (y - self.mean);
    }

    /// Pooled merge of two disjoint sample sets.
    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        if other.count == 0.0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }

    fn variance(&self) -> f64 {
        self.m2 / (self.count - 1.0)
    }
}

/// Estimates the variances of several combinations from one shared set of
/// `n` samples.
pub fn estimate_joint_variances(
    state: &GaussianState,
    combos: &[JointCombination],
    n: usize,
    seed: u64,
) -> Result<Vec<SampleRun>> {
    if n < 2 {
        return Err(Error::OutOfRange {
            name: "sample count",
            value: n as f64,
            range: "[2, inf)",
        });
    }
    let weights: Vec<DVector<f64>> = combos
        .iter()
        .map(|c| c.coefficient_vector(state.n_modes()))
        .collect::<Result<_>>()?;
    let factor = Factor::new(state)?;
    let dim = factor.dim();
    let shards: Vec<(usize, usize)> = shard_sizes(n).collect();
    let per_shard: Vec<Vec<Moments>> = shards
        .par_iter()
        .map(|&(k, count)| {
            let mut buf = Vec::new();
            factor.fill_shard(seed, k, count, &mut buf);
            let mut moments = vec![Moments::default(); weights.len()];
            for row in buf.chunks_exact(dim) {
                for (m, w) in moments.iter_mut().zip(&weights) {
                    let y: f64 = row.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                    m.push(y);
                }
            }
            moments
        })
        .collect();
    let merged = per_shard.into_iter().fold(
        vec![Moments::default(); weights.len()],
        |acc, shard| acc.into_iter().zip(shard).map(|(a, b)| a.merge(b)).collect(),
    );
    Ok(combos
        .iter()
        .zip(merged)
        .map(|(combo, m)| {
            let estimate = m.variance();
            SampleRun {
                seed,
                n_samples: n as u64,
                combo: combo.clone(),
                estimate,
                std_error: estimate * (2.0 / n as f64).sqrt(),
            }
        })
        .collect())
}

pub fn estimate_joint_variance(
    state: &GaussianState,
    combo: &JointCombination,
    n: usize,
    seed: u64,
) -> Result<SampleRun> {
    let mut runs = estimate_joint_variances(state, std::slice::from_ref(combo), n, seed)?;
    Ok(runs.pop().expect("one run per combination"))
}

/// SplitMix64 finaliser.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed used for the `index`-th point of a sampled scan.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Sampled version of [`scenario::phase_scan`]: every point is a variance
/// estimate from `n` draws, with a first-order error bar in dB.
pub fn scan_with_noise(
    config: &ScenarioConfig,
    grid: &Grid,
    scanned: Arm,
    n: usize,
    seed: u64,
) -> Result<TraceSeries> {
    grid.validate()?;
    let config = config.resolved()?;
    let combo = JointCombination::x_sum(MODE_1550, MODE_532);
    let points = grid
        .values()
        .enumerate()
        .map(|(i, phase)| {
            let cfg = match scanned {
                Arm::Nm532 => config.with_phases(config.phase_1550, phase),
                Arm::Nm1550 => config.with_phases(phase, config.phase_532),
            };
            let state = scenario::build_state(&cfg)?;
            let point_seed = derive_seed(seed, i as u64);
            let run = estimate_joint_variance(&state, &combo, n, point_seed)?;
            let reference = combo.reference_variance();
            let db = scenario::measured_level(run.estimate, reference, cfg.dark_floor_db)?;
            let stderr_db = 10.0 / std::f64::consts::LN_10 * run.std_error / run.estimate;
            Ok(TracePoint {
                x: phase,
                values_db: vec![db],
                sampling: Some(PointSampling {
                    stderr_db: vec![stderr_db],
                    n: n as u64,
                    seed: point_seed,
                }),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TraceSeries::new(Axis::PhaseRad, vec!["sum_db".into()], points))
}

/// Analytic variance of `combo`, for comparing against a [`SampleRun`].
pub fn analytic_reference(state: &GaussianState, combo: &JointCombination) -> Result<f64> {
    Ok(criteria::joint_variance(state, combo)?.variance)
}
