//! Monte Carlo for the limiting variance constant `A_γ`.
//!
//! One replicate draws five independent "odd" Poisson processes on `[0,1] × [-M,0]` and one
//! "even" master process on `[-1,6] × [-M,0]`. The even view of block `k` is the master
//! restricted to `(k-2, k+1]` and shifted left by `k-1`, so neighbouring blocks share
//! points. With `G_k` the functional of block `k`, `A_γ` is `Cov(G_3, G_1 + ... + G_5)`.
//!
//! Every process has intensity `γ/2`: odd (or even) design points are `2/(nh)` apart after
//! the `1/h` rescaling of the abscissa, and an error scaled by `nh` falls in `[-s, 0]` with
//! probability about `γ s/(nh)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::frontier::{fit_grid_points, fit_points};
use crate::hull::{integrate_squared, upper_hull};

pub const BLOCKS: usize = 5;
const MASTER_LO: f64 = -1.0;
const MASTER_HI: f64 = 6.0;

/// Finite point set on the strip `[x_lo, x_hi] × [-depth, 0]`, sorted by x.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarPointSet {
    pub points: Vec<(f64, f64)>,
    pub x_lo: f64,
    pub x_hi: f64,
    pub depth: f64,
}

impl PlanarPointSet {
    pub fn new(mut points: Vec<(f64, f64)>, x_lo: f64, x_hi: f64, depth: f64) -> Result<Self> {
        if points
            .iter()
            .any(|&(x, y)| !(x >= x_lo && x <= x_hi && y <= 0.0 && y >= -depth))
        {
            return Err(GofError::Domain("point outside the strip".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(PlanarPointSet {
            points,
            x_lo,
            x_hi,
            depth,
        })
    }

    /// Homogeneous Poisson process of the given intensity on the strip.
    pub fn poisson<R: Rng + ?Sized>(
        intensity: f64,
        x_lo: f64,
        x_hi: f64,
        depth: f64,
        rng: &mut R,
    ) -> Self {
        let mean = intensity * (x_hi - x_lo) * depth;
        let count = if mean > 0.0 {
            Poisson::new(mean).expect("positive mean").sample(rng) as usize
        } else {
            0
        };
        let mut points: Vec<(f64, f64)> = (0..count)
            .map(|_| {
                let x = x_lo + (x_hi - x_lo) * rng.random::<f64>();
                let y = -depth * rng.random::<f64>();
                (x, y)
            })
            .collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        PlanarPointSet {
            points,
            x_lo,
            x_hi,
            depth,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Multiplies every ordinate by `c > 0`.
    pub fn scale_y(&self, c: f64) -> Self {
        PlanarPointSet {
            points: self.points.iter().map(|&(x, y)| (x, c * y)).collect(),
            x_lo: self.x_lo,
            x_hi: self.x_hi,
            depth: self.depth * c,
        }
    }
}

/// One replicate's processes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessDraw {
    pub odd: Vec<PlanarPointSet>,
    pub even_master: PlanarPointSet,
}

impl ProcessDraw {
    /// Even view of block `k` (1-based): master points with `x ∈ (k-2, k+1]`, shifted by `-(k-1)`.
    pub fn window_e(&self, k: usize) -> PlanarPointSet {
        assert!((1..=BLOCKS).contains(&k), "block index out of range");
        let shift = (k - 1) as f64;
        let (lo, hi) = (shift - 1.0, shift + 2.0);
        let points = self
            .even_master
            .points
            .iter()
            .filter(|p| p.0 > lo && p.0 <= hi)
            .map(|&(x, y)| (x - shift, y))
            .collect();
        PlanarPointSet {
            points,
            x_lo: -1.0,
            x_hi: 2.0,
            depth: self.even_master.depth,
        }
    }
}

/// Limiting process intensity for tail scale `γ`.
pub fn intensity(gamma: f64) -> f64 {
    0.5 * gamma
}

/// Five independent odd processes and the even master, all of intensity `rate`.
pub fn sample_processes<R: Rng + ?Sized>(rate: f64, depth: f64, rng: &mut R) -> Result<ProcessDraw> {
    check_positive("intensity", rate)?;
    check_positive("depth", depth)?;
    let odd = (0..BLOCKS)
        .map(|_| PlanarPointSet::poisson(rate, 0.0, 1.0, depth, rng))
        .collect();
    let even_master = PlanarPointSet::poisson(rate, MASTER_LO, MASTER_HI, depth, rng);
    Ok(ProcessDraw { odd, even_master })
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(GofError::Domain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// How `∫₀¹ g̃²` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integration {
    /// Piecewise-exact: `g̃` is linear between window-change events and hull vertices.
    Exact,
    /// Composite Simpson on `grid_n + 1` nodes (`grid_n` even).
    Simpson { grid_n: usize },
}

fn empty_side(x: f64, side: &'static str) -> GofError {
    GofError::EmptySide { x, side }
}

/// Exact `∫₀¹ g̃(x)² dx` for the bandwidth-1 frontier of `even` (sorted by x).
fn integral_exact(even: &[(f64, f64)]) -> Result<f64> {
    let mut events: Vec<f64> = vec![0.0, 1.0];
    for &(x, _) in even {
        for e in [x - 1.0, x + 1.0] {
            if e > 0.0 && e < 1.0 {
                events.push(e);
            }
        }
    }
    events.sort_by(f64::total_cmp);
    events.dedup();

    let mut hull = Vec::new();
    let mut total = 0.0;
    for w in events.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let lo = even.partition_point(|p| mid - p.0 >= 1.0);
        let hi = even.partition_point(|p| p.0 - mid < 1.0);
        let win = &even[lo..hi];
        if win.is_empty() {
            return Err(GofError::EmptyWindow { x: mid, h: 1.0 });
        }
        upper_hull(win, &mut hull);
        if win[hull[0]].0 > a {
            return Err(empty_side(a, "left"));
        }
        if win[hull[hull.len() - 1]].0 < b {
            return Err(empty_side(b, "right"));
        }
        total += integrate_squared(win, &hull, a, b);
    }
    Ok(total)
}

fn integral_simpson(even: &[(f64, f64)], grid_n: usize) -> Result<f64> {
    if grid_n < 2 || grid_n % 2 == 1 {
        return Err(GofError::Domain(format!("Simpson grid must be even and >= 2, got {grid_n}")));
    }
    let step = 1.0 / grid_n as f64;
    let nodes: Vec<f64> = (0..=grid_n).map(|i| i as f64 * step).collect();
    let fit = fit_grid_points(even, &nodes, 1.0)?;
    let mut acc = 0.0;
    for (i, v) in fit.values.iter().enumerate() {
        let w = if i == 0 || i == grid_n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * v * v;
    }
    Ok(acc * step / 3.0)
}

/// `½ ∫₀¹ g̃² + (2/γ) Σ Y·1{Y ≥ g̃(X)}` over the odd points, `g̃` the bandwidth-1 frontier of
/// `phi_e`.
pub fn g_functional(
    phi_o: &PlanarPointSet,
    phi_e: &PlanarPointSet,
    gamma: f64,
    integration: Integration,
) -> Result<f64> {
    check_positive("gamma", gamma)?;
    let even = &phi_e.points;
    let integral = match integration {
        Integration::Exact => integral_exact(even)?,
        Integration::Simpson { grid_n } => integral_simpson(even, grid_n)?,
    };
    let mut exceed = 0.0;
    for &(x, y) in &phi_o.points {
        let g = fit_points(even, x, 1.0)?.value;
        if y >= g {
            exceed += y;
        }
    }
    Ok(0.5 * integral + 2.0 / gamma * exceed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A1Config {
    pub reps: usize,
    pub gamma: f64,
    pub depth: f64,
    pub integration: Integration,
    pub seed: u64,
}

impl A1Config {
    /// Depth defaults to `20 / γ`.
    pub fn new(reps: usize, gamma: f64, seed: u64) -> Self {
        A1Config {
            reps,
            gamma,
            depth: 20.0 / gamma,
            integration: Integration::Exact,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A1Estimate {
    pub value: f64,
    pub std_error: f64,
    pub reps: usize,
    pub gamma: f64,
    pub depth: f64,
    pub seed: u64,
    /// Draws discarded because some frontier window had an empty side.
    pub degenerate_draws: usize,
}

/// Per-replicate generator: stream `index` of the master seed.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draw budget per replicate before giving up.
const MAX_ATTEMPTS: usize = 100;

/// `(G_3, Σ_k G_k, degenerate draws)` for one replicate.
pub fn replicate(config: &A1Config, index: u64) -> Result<(f64, f64, usize)> {
    let mut rng = replicate_rng(config.seed, index);
    let mut failed = 0;
    'draw: for _ in 0..MAX_ATTEMPTS {
        let draw = sample_processes(intensity(config.gamma), config.depth, &mut rng)?;
        let mut gs = [0.0; BLOCKS];
        for (k, g) in gs.iter_mut().enumerate() {
            let e = draw.window_e(k + 1);
            match g_functional(&draw.odd[k], &e, config.gamma, config.integration) {
                Ok(v) => *g = v,
                Err(GofError::EmptySide { .. }) | Err(GofError::EmptyWindow { .. }) => {
                    failed += 1;
                    continue 'draw;
                }
                Err(e) => return Err(e),
            }
        }
        return Ok((gs[2], gs.iter().sum(), failed));
    }
    Err(GofError::DepthTooShallow {
        failed,
        reps: 1,
        depth: config.depth,
    })
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

pub fn estimate_a1(config: &A1Config) -> Result<A1Estimate> {
    if config.reps < 2 {
        return Err(GofError::TooFewReps {
            got: config.reps,
            min: 2,
        });
    }
    check_positive("gamma", config.gamma)?;
    check_positive("depth", config.depth)?;
    let results: Vec<Result<(f64, f64, usize)>> = (0..config.reps as u64)
        .into_par_iter()
        .map(|i| replicate(config, i))
        .collect();
    let mut xs = Vec::with_capacity(config.reps);
    let mut ys = Vec::with_capacity(config.reps);
    let mut degenerate = 0;
    for r in results {
        let (x, y, f) = r?;
        xs.push(x);
        ys.push(y);
        degenerate += f;
    }
    if degenerate * 100 > config.reps {
        return Err(GofError::DepthTooShallow {
            failed: degenerate,
            reps: config.reps,
            depth: config.depth,
        });
    }
    Ok(A1Estimate {
        value: covariance(&xs, &ys)?,
        std_error: cov_variance(&xs, &ys)?.max(0.0).sqrt(),
        reps: config.reps,
        gamma: config.gamma,
        depth: config.depth,
        seed: config.seed,
        degenerate_draws: degenerate,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Empirical covariance with denominator `n - 1`.
pub fn covariance(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(GofError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(GofError::TooFewReps { got: n, min: 2 });
    }
    let (mx, my) = (mean(xs), mean(ys));
    let s: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(s / (n - 1) as f64)
}

/// Plug-in variance of the empirical covariance:
/// `(1/n) (μ̃₄ - (n-2)/(n-1) η⁴ + σ²τ²/(n-1))`.
pub fn cov_variance(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let eta2 = covariance(xs, ys)?;
    let n = xs.len() as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let mu4 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx).powi(2) * (y - my).powi(2))
        .sum::<f64>()
        / n;
    let sigma2 = covariance(xs, xs)?;
    let tau2 = covariance(ys, ys)?;
    Ok((mu4 - (n - 2.0) / (n - 1.0) * eta2 * eta2 + sigma2 * tau2 / (n - 1.0)) / n)
}
