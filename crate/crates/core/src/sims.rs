//! Monte Carlo size and power experiments on equidistant designs with buffer points.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decision::{run_test, CxPolicy, GofConfig, GofOutcome, DEFAULT_A1};
use crate::error::{GofError, Result};
use crate::frontier::Sample;
use crate::poisson_mc::replicate_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Truth {
    Zero,
    /// `c sin(α π x)`
    Sin { c: f64, alpha: f64 },
    /// `c (x - x0)^p`
    Power { c: f64, p: i32, x0: f64 },
    /// `-c (x - x0)^p`
    NegPower { c: f64, p: i32, x0: f64 },
}

impl Truth {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Truth::Zero => 0.0,
            Truth::Sin { c, alpha } => c * (alpha * std::f64::consts::PI * x).sin(),
            Truth::Power { c, p, x0 } => c * (x - x0).powi(p),
            Truth::NegPower { c, p, x0 } => -c * (x - x0).powi(p),
        }
    }
}

pub fn truth_eval(truth: &Truth, x: f64) -> f64 {
    truth.eval(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorLaw {
    /// Uniform on `[-1, 0]`.
    UniformUnit,
    /// `-Exp(1)`.
    NegExponential,
}

impl ErrorLaw {
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            ErrorLaw::UniformUnit => -rng.random::<f64>(),
            ErrorLaw::NegExponential => {
                let e: f64 = Exp1.sample(rng);
                -e
            }
        }
    }
}

pub fn gen_errors<R: Rng + ?Sized>(law: ErrorLaw, count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| law.draw(rng)).collect()
}

/// Points `-h + j/n`, `j = 0, 1, ...`, up to `1 + h`.
pub fn gen_design(n: usize, h: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(GofError::Domain("n must be positive".into()));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(GofError::Domain(format!("bandwidth must be positive, got {h}")));
    }
    let nf = n as f64;
    let offset = h * nf;
    let last = ((1.0 + 2.0 * h) * nf + 1e-9).floor() as usize;
    Ok((0..=last).map(|j| (j as f64 - offset) / nf).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GammaMode {
    Known { gamma: f64 },
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub n: usize,
    pub h: f64,
    pub h1: f64,
    pub k: usize,
    pub level: f64,
    pub gamma_mode: GammaMode,
    pub truth: Truth,
    pub errors: ErrorLaw,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "default_a1")]
    pub a1: f64,
}

fn default_a1() -> f64 {
    DEFAULT_A1
}

impl ExperimentSpec {
    /// Size-study defaults: `h = h1 = 0.2`, `k = 20`, 5% level, uniform errors, zero truth.
    pub fn new(n: usize, reps: usize, seed: u64) -> Self {
        ExperimentSpec {
            n,
            h: 0.2,
            h1: 0.2,
            k: 20,
            level: 0.05,
            gamma_mode: GammaMode::Estimated,
            truth: Truth::Zero,
            errors: ErrorLaw::UniformUnit,
            reps,
            seed,
            a1: DEFAULT_A1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GofError::InvalidSpec(m));
        if self.n < 4 || self.n % 2 == 1 {
            return bad(format!("n must be even and at least 4, got {}", self.n));
        }
        if self.reps < 1 {
            return bad("reps must be at least 1".into());
        }
        if !(self.h > 0.0 && self.h1 > 0.0) {
            return bad("bandwidths must be positive".into());
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("level must lie in (0, 1), got {}", self.level));
        }
        if !(self.a1 > 0.0) {
            return bad("A1 must be positive".into());
        }
        match self.gamma_mode {
            GammaMode::Known { gamma } if !(gamma > 0.0) => bad("known gamma must be positive".into()),
            GammaMode::Estimated if self.k < 1 || self.k >= self.n / 2 => {
                bad(format!("k = {} must satisfy 1 <= k < n/2 = {}", self.k, self.n / 2))
            }
            _ => Ok(()),
        }
    }

    pub fn config(&self) -> GofConfig {
        GofConfig {
            h: self.h,
            h1: self.h1,
            k: self.k,
            level: self.level,
            gamma: match self.gamma_mode {
                GammaMode::Known { gamma } => Some(gamma),
                GammaMode::Estimated => None,
            },
            a1: self.a1,
            cx_policy: CxPolicy::Auto,
        }
    }
}

/// Design abscissae and error draws of replicate `index`.
pub fn replicate_draws(spec: &ExperimentSpec, index: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let xs = gen_design(spec.n, spec.h.max(spec.h1))?;
    let mut rng = replicate_rng(spec.seed, index);
    let errs = gen_errors(spec.errors, xs.len(), &mut rng);
    Ok((xs, errs))
}

/// Sample `y = g(x) + ε` for the given truth and draws.
pub fn build_sample(xs: &[f64], errs: &[f64], truth: impl Fn(f64) -> f64) -> Result<Sample<f64>> {
    Sample::new(xs.iter().zip(errs).map(|(&x, &e)| (x, truth(x) + e)).collect())
}

pub fn run_replicate(spec: &ExperimentSpec, index: u64) -> Result<GofOutcome> {
    let (xs, errs) = replicate_draws(spec, index)?;
    let sample = build_sample(&xs, &errs, |x| spec.truth.eval(x))?;
    run_test(&sample, &spec.config())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub rejection_rate_phi1: f64,
    pub rejection_rate_phi2: f64,
    /// `3 sqrt(p̂(1-p̂)/reps)` for each rate.
    pub ci_halfwidth_phi1: f64,
    pub ci_halfwidth_phi2: f64,
    pub reps_done: usize,
    pub reps_failed: usize,
    pub mean_t: f64,
    pub mean_gamma_used: f64,
    /// Per-replicate decisions in replicate order: `(phi1, phi2)`, `None` for failures.
    #[serde(skip)]
    pub decisions: Vec<Option<(bool, bool)>>,
}

fn halfwidth(p: f64, reps: usize) -> f64 {
    if reps == 0 {
        return 0.0;
    }
    3.0 * (p * (1.0 - p) / reps as f64).sqrt()
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let outcomes: Vec<Result<GofOutcome>> = (0..spec.reps as u64)
        .into_par_iter()
        .map(|i| run_replicate(spec, i))
        .collect();

    let mut decisions = Vec::with_capacity(spec.reps);
    let (mut r1, mut r2, mut done) = (0usize, 0usize, 0usize);
    let (mut sum_t, mut sum_g) = (0.0, 0.0);
    for o in &outcomes {
        match o {
            Ok(o) => {
                done += 1;
                r1 += o.phi1.reject as usize;
                r2 += o.phi2.reject as usize;
                sum_t += o.t();
                sum_g += o.gamma_used();
                decisions.push(Some((o.phi1.reject, o.phi2.reject)));
            }
            Err(e) => match e.root() {
                GofError::ZeroDenominator { .. }
                | GofError::EmptySide { .. }
                | GofError::EmptyWindow { .. } => decisions.push(None),
                _ => return Err(e.clone()),
            },
        }
    }
    let rate = |r: usize| if done == 0 { 0.0 } else { r as f64 / done as f64 };
    let (p1, p2) = (rate(r1), rate(r2));
    let avg = |s: f64| if done == 0 { f64::NAN } else { s / done as f64 };
    Ok(ExperimentReport {
        spec: *spec,
        rejection_rate_phi1: p1,
        rejection_rate_phi2: p2,
        ci_halfwidth_phi1: halfwidth(p1, done),
        ci_halfwidth_phi2: halfwidth(p2, done),
        reps_done: done,
        reps_failed: spec.reps - done,
        mean_t: avg(sum_t),
        mean_gamma_used: avg(sum_g),
        decisions,
    })
}
