//! Critical values, decisions and p-values for the two calibrations of the statistic.
//!
//! Both tests compare `T` with `z_{1-λ}` times a standard deviation of the form
//! `sqrt(κ n⁻² h⁻³ γ⁻⁴)`: `κ = 8 / C_x³` for the conservative test and `κ = A₁` for the
//! Poisson-calibrated one. p-values use the same Gaussian approximation.

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{GofError, Result};
use crate::frontier::{residuals_even, Sample};
use crate::statistic::{breakdown_from_inputs, c_x, window_count_range, OddInputs, StatBreakdown};
use crate::tail::{neg_hill, TailEstimate};

/// Monte Carlo value of the limiting variance constant at unit scale.
pub const DEFAULT_A1: f64 = 13.7;

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Upper tail `1 - Φ(z)`, accurate far into the tail.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile: rational starting point refined by Halley steps on the CDF.
pub fn normal_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(GofError::Domain(format!("quantile level must lie in (0, 1), got {q}")));
    }
    if q == 0.5 {
        return Ok(0.0);
    }
    // Acklam's rational approximation, |rel err| < 1.2e-9
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let lower = 0.02425;
    let mut z = if q < lower {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    } else if q <= 1.0 - lower {
        let u = q - 0.5;
        let r = u * u;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * u
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let r = (-2.0 * (1.0 - q).ln()).sqrt();
        -(((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    };
    for _ in 0..3 {
        // work in the smaller tail for accuracy
        let e = if z < 0.0 { normal_cdf(z) - q } else { (1.0 - q) - normal_sf(z) };
        let u = e / normal_pdf(z);
        let step = u / (1.0 + 0.5 * z * u);
        z -= step;
        if step.abs() < 1e-16 * (1.0 + z.abs()) {
            break;
        }
    }
    Ok(z)
}

/// One test's critical value, decision and p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestDecision {
    pub crit: f64,
    pub reject: bool,
    pub p: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(GofError::Domain(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn decide(t: f64, scale: f64, level: f64) -> Result<TestDecision> {
    if !(level > 0.0 && level < 1.0) {
        return Err(GofError::Domain(format!("level must lie in (0, 1), got {level}")));
    }
    let crit = normal_quantile(1.0 - level)? * scale;
    Ok(TestDecision {
        crit,
        reject: t >= crit,
        p: normal_sf(t / scale),
    })
}

/// `sqrt(n⁻² h⁻³ γ⁻⁴)`
fn base_scale(n: f64, h: f64, gamma: f64) -> f64 {
    (1.0 / (n * n * h * h * h * gamma.powi(4))).sqrt()
}

/// Conservative test with variance bound `8 C_x⁻³ n⁻² h⁻³ γ⁻⁴`.
pub fn phi1(t: f64, n: f64, h: f64, gamma: f64, cx: f64, level: f64) -> Result<TestDecision> {
    positive("n", n)?;
    positive("h", h)?;
    positive("gamma", gamma)?;
    positive("C_x", cx)?;
    decide(t, (8.0 / (cx * cx * cx)).sqrt() * base_scale(n, h, gamma), level)
}

/// Poisson-calibrated test with variance `A₁ n⁻² h⁻³ γ⁻⁴`.
pub fn phi2(t: f64, n: f64, h: f64, gamma: f64, a1: f64, level: f64) -> Result<TestDecision> {
    positive("n", n)?;
    positive("h", h)?;
    positive("gamma", gamma)?;
    positive("A1", a1)?;
    decide(t, a1.sqrt() * base_scale(n, h, gamma), level)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CxPolicy {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofConfig {
    pub h: f64,
    pub h1: f64,
    pub k: usize,
    pub level: f64,
    /// Known tail scale; estimated from the residuals when absent.
    pub gamma: Option<f64>,
    pub a1: f64,
    pub cx_policy: CxPolicy,
}

impl Default for GofConfig {
    fn default() -> Self {
        GofConfig {
            h: 0.2,
            h1: 0.2,
            k: 20,
            level: 0.05,
            gamma: None,
            a1: DEFAULT_A1,
            cx_policy: CxPolicy::Auto,
        }
    }
}

impl GofConfig {
    pub fn validate(&self) -> Result<()> {
        positive("h", self.h)?;
        positive("h1", self.h1)?;
        positive("A1", self.a1)?;
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(GofError::Domain(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if self.k < 1 {
            return Err(GofError::Domain("k must be at least 1".into()));
        }
        if let Some(g) = self.gamma {
            positive("gamma", g)?;
        }
        if let CxPolicy::Fixed(c) = self.cx_policy {
            positive("C_x", c)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofOutcome {
    pub breakdown: StatBreakdown<f64>,
    /// Sample size in the critical values (twice the number of statistic points).
    pub n_stat: usize,
    /// Design points inside `[0, 1]`, the normaliser of `C_x`.
    pub n_eligible: usize,
    pub cx: f64,
    pub phi1: TestDecision,
    pub phi2: TestDecision,
    /// Present when the scale was estimated.
    pub tail: Option<TailSummary>,
    pub dropped_last: bool,
    pub merged_ties: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSummary {
    pub gamma_hat: f64,
    pub k: usize,
    pub denominator: f64,
    pub m: usize,
}

impl From<TailEstimate<f64>> for TailSummary {
    fn from(t: TailEstimate<f64>) -> Self {
        TailSummary {
            gamma_hat: t.gamma_hat,
            k: t.k,
            denominator: t.denominator,
            m: t.m,
        }
    }
}

impl GofOutcome {
    pub fn t(&self) -> f64 {
        self.breakdown.t
    }

    pub fn gamma_used(&self) -> f64 {
        self.breakdown.gamma_used
    }

    pub fn any_reject(&self) -> bool {
        self.phi1.reject || self.phi2.reject
    }
}

/// Full pipeline: residual scale estimate, frontier at the statistic points, statistic,
/// design constant, both decisions.
pub fn run_test(sample: &Sample<f64>, config: &GofConfig) -> Result<GofOutcome> {
    config.validate()?;
    let mut sample = sample.clone();
    sample.make_even();

    let tail = match config.gamma {
        Some(_) => None,
        None => {
            let res = residuals_even(&sample, config.h1).map_err(|e| e.in_stage("residuals"))?;
            Some(neg_hill(&res, config.k).map_err(|e| e.in_stage("tail scale"))?)
        }
    };
    let gamma = config.gamma.or(tail.map(|t| t.gamma_hat)).expect("one of the two is set");

    let inputs = OddInputs::from_sample(&sample, config.h).map_err(|e| e.in_stage("frontier"))?;
    let breakdown = breakdown_from_inputs(&inputs, gamma).map_err(|e| e.in_stage("statistic"))?;

    let n_eligible = sample.eligible_count();
    let cx = match config.cx_policy {
        CxPolicy::Fixed(c) => c,
        CxPolicy::Auto => c_x(&sample.xs(), config.h, n_eligible).map_err(|e| e.in_stage("design"))?,
    };
    let n_stat = sample.n_stat();
    let n = n_stat as f64;
    let d1 = phi1(breakdown.t, n, config.h, gamma, cx, config.level).map_err(|e| e.in_stage("phi1"))?;
    let d2 = phi2(breakdown.t, n, config.h, gamma, config.a1, config.level)
        .map_err(|e| e.in_stage("phi2"))?;

    Ok(GofOutcome {
        breakdown,
        n_stat,
        n_eligible,
        cx,
        phi1: d1,
        phi2: d2,
        tail: tail.map(TailSummary::from),
        dropped_last: sample.dropped_last(),
        merged_ties: sample.merged_count(),
    })
}

/// Ratio of the largest to the smallest half-bandwidth window count; infinite if some
/// window is empty.
pub fn regularity_ratio(sample: &Sample<f64>, h: f64) -> Result<f64> {
    let (min, max) = window_count_range(&sample.xs(), h)?;
    Ok(if min == 0 { f64::INFINITY } else { max as f64 / min as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect_quantile(q: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0f64, 40.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        let z = normal_quantile(0.95).unwrap();
        assert!((z - 1.6448536269514722).abs() < 1e-12);
        assert!((z - bisect_quantile(0.95)).abs() < 1e-12);
        let z = normal_quantile(0.975).unwrap();
        assert!((z - 1.959963984540054).abs() < 1e-12);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
        assert!(normal_quantile(f64::NAN).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..1000 {
            let q = i as f64 / 1000.0;
            let z = normal_quantile(q).unwrap();
            assert!((normal_cdf(z) - q).abs() <= 1e-12, "q={q}");
        }
        for q in [1e-10, 1e-6, 0.001, 0.999, 1.0 - 1e-6] {
            let z = normal_quantile(q).unwrap();
            assert!((normal_cdf(z) - q).abs() <= 1e-12 * q.max(1e-3), "q={q}");
        }
    }

    #[test]
    fn phi_examples() {
        let d = phi1(0.0, 100.0, 0.2, 1.0, 0.5, 0.05).unwrap();
        assert!(!d.reject);
        assert_eq!(d.p, 0.5);
        let d = phi1(1.0, 100.0, 0.2, 1.0, 0.5, 0.05).unwrap();
        assert!((d.crit - 1.6448536269514722 * 0.8f64.sqrt()).abs() < 1e-12);
        assert!((d.crit - 1.4712).abs() < 1e-4);

        let d = phi2(0.0, 100.0, 0.2, 1.0, 13.7, 0.05).unwrap();
        assert_eq!(d.p, 0.5);
        assert!(!d.reject);
        assert!((d.crit - 1.6448536269514722 * (1e-4f64 * 125.0 * 13.7).sqrt()).abs() < 1e-12);
        assert!((d.crit - 0.6807).abs() < 1e-4);

        assert!(phi1(1.0, 100.0, 0.2, 0.0, 0.5, 0.05).is_err());
        assert!(phi2(1.0, 100.0, -0.2, 1.0, 13.7, 0.05).is_err());
        assert!(phi2(1.0, 100.0, 0.2, 1.0, 13.7, 1.0).is_err());
    }

    #[test]
    fn gamma_fourth_power_law() {
        for c in [0.5, 2.0, 3.7] {
            let a = phi2(1.0, 80.0, 0.15, 1.3, 13.7, 0.05).unwrap().crit;
            let b = phi2(1.0, 80.0, 0.15, 1.3 * c, 13.7, 0.05).unwrap().crit;
            assert!((b / a - c.powi(-2)).abs() < 1e-12);
            let a = phi1(1.0, 80.0, 0.15, 1.3, 0.4, 0.05).unwrap().crit;
            let b = phi1(1.0, 80.0, 0.15, 1.3 * c, 0.4, 0.05).unwrap().crit;
            assert!((b / a - c.powi(-2)).abs() < 1e-12);
        }
    }

    #[test]
    fn p_value_agrees_with_critical_value() {
        for i in 0..400 {
            let t = -1.0 + i as f64 * 0.01;
            for level in [0.01, 0.05, 0.1] {
                let d = phi2(t, 100.0, 0.2, 1.0, 13.7, level).unwrap();
                if (t - d.crit).abs() > 1e-9 {
                    assert_eq!(d.p <= level, d.reject, "t={t} level={level}");
                }
                let d = phi1(t, 100.0, 0.2, 1.0, 0.5, level).unwrap();
                if (t - d.crit).abs() > 1e-9 {
                    assert_eq!(d.p <= level, d.reject, "t={t} level={level}");
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        let c = GofConfig { level: 1.5, ..Default::default() };
        assert!(c.validate().is_err());
        let c = GofConfig { gamma: Some(0.0), ..Default::default() };
        assert!(c.validate().is_err());
        assert!(GofConfig::default().validate().is_ok());
    }
}
