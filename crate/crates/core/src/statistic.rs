//! Distance of the frontier estimate to the affine functions, with bias correction.
//!
//! Throughout, `m` is the number of statistic points and plays the role of `n/2`.

use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::frontier::{fit_grid, Sample};
use crate::scalar::Scalar;

/// `f(x) = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Affine<T> {
    pub slope: T,
    pub intercept: T,
}

impl<T: Scalar> Affine<T> {
    pub fn new(slope: T, intercept: T) -> Self {
        Affine { slope, intercept }
    }

    pub fn zero() -> Self {
        Affine::new(T::zero(), T::zero())
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        self.slope * x + self.intercept
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSums<T> {
    /// Sum of squared abscissae.
    pub r: T,
    /// Sum of abscissae.
    pub s: T,
    pub m: usize,
    /// `r * m - s²`
    pub denom: T,
}

impl<T: Scalar> DesignSums<T> {
    /// Centre of the abscissae, `s / m`.
    pub fn centre(&self) -> T {
        self.s / T::of_usize(self.m)
    }
}

/// Neumaier compensated sum.
fn compensated_sum<T: Scalar>(values: impl Iterator<Item = T>) -> T {
    let (mut sum, mut carry) = (T::zero(), T::zero());
    for v in values {
        let t = sum + v;
        carry = carry + if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}

pub fn design_sums<T: Scalar>(odd_xs: &[T]) -> Result<DesignSums<T>> {
    if odd_xs.is_empty() {
        return Err(GofError::EmptyDesign);
    }
    let r = compensated_sum(odd_xs.iter().map(|&x| x * x));
    let s = compensated_sum(odd_xs.iter().copied());
    let m = odd_xs.len();
    let denom = r * T::of_usize(m) - s * s;
    if !(denom > T::zero()) {
        return Err(GofError::DegenerateDesign);
    }
    Ok(DesignSums { r, s, m, denom })
}

/// Squared distance of `ghat` (at `xs`) to the affine functions, via the explicit
/// three-term form relative to the reference `f`. The value does not depend on `f`.
pub fn t1<T: Scalar>(ghat: &[T], xs: &[T], f: Affine<T>) -> Result<T> {
    if ghat.len() != xs.len() {
        return Err(GofError::LengthMismatch(ghat.len(), xs.len()));
    }
    if xs.len() < 3 {
        return Err(GofError::DegenerateDesign);
    }
    let d = design_sums(xs)?;
    let mf = T::of_usize(d.m);
    let c = d.centre();
    let mut sq = T::zero();
    let mut lin = T::zero();
    let mut proj = T::zero();
    for (&g, &x) in ghat.iter().zip(xs) {
        let e = g - f.eval(x);
        sq = sq + e * e;
        lin = lin + e;
        proj = proj + e * (x - c);
    }
    Ok(sq - lin * lin / mf - mf * proj * proj / d.denom)
}

/// Least-squares affine fit of `ys` on `xs`.
pub fn affine_fit<T: Scalar>(xs: &[T], ys: &[T]) -> Result<Affine<T>> {
    let d = design_sums(xs)?;
    let mf = T::of_usize(d.m);
    let k: T = ys.iter().fold(T::zero(), |a, &y| a + y);
    let l: T = xs.iter().zip(ys).fold(T::zero(), |a, (&x, &y)| a + x * y);
    let slope = (mf * l - d.s * k) / d.denom;
    let intercept = (d.r * k - d.s * l) / d.denom;
    Ok(Affine { slope, intercept })
}

/// Statistic points with the frontier evaluated at their abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct OddInputs<T> {
    pub xs: Vec<T>,
    pub ys: Vec<T>,
    pub ghat: Vec<T>,
}

impl<T: Scalar> OddInputs<T> {
    pub fn from_sample(sample: &Sample<T>, h: T) -> Result<Self> {
        let odd = sample.odd_eligible();
        let xs: Vec<T> = odd.iter().map(|p| p.0).collect();
        let ys: Vec<T> = odd.iter().map(|p| p.1).collect();
        let ghat = fit_grid(sample, &xs, h)?.values;
        Ok(OddInputs { xs, ys, ghat })
    }

    fn exceeds(&self, i: usize) -> bool {
        self.ys[i] >= self.ghat[i]
    }
}

/// The statistic with its diagnostic decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatBreakdown<T> {
    pub t: T,
    pub t1: T,
    pub s1: T,
    pub s2: T,
    pub s3: T,
    pub gamma_used: T,
    /// Sum of squared frontier values at the statistic points.
    pub sum_sq: T,
    /// Statistic points on or above the frontier.
    pub correction_count: usize,
    pub m: usize,
    /// Affine reference of the decomposition (least-squares fit of the frontier values).
    pub reference: Affine<T>,
}

fn check_gamma<T: Scalar>(g: T) -> Result<()> {
    if !(g > T::zero()) || !g.is_finite() {
        return Err(GofError::Domain(format!("gamma' must be positive, got {g:?}")));
    }
    Ok(())
}

/// Bias-corrected statistic, evaluated term by term:
/// `Σ ĝ² + (2/γ') Σ Y·1{Y≥ĝ} - (1/m)(Σ ĝ + (1/γ') Σ 1{Y≥ĝ})² - m (Σ (ĝ + 1{Y≥ĝ}/γ')(x - S/m))² / denom`.
pub fn t_from_inputs<T: Scalar>(inp: &OddInputs<T>, gamma_prime: T) -> Result<T> {
    t_f_from_inputs(inp, gamma_prime, Affine::zero())
}

/// The statistic written relative to an affine reference `f`. Equal to
/// [`t_from_inputs`] for every affine `f`.
pub fn t_f_from_inputs<T: Scalar>(inp: &OddInputs<T>, gamma_prime: T, f: Affine<T>) -> Result<T> {
    check_gamma(gamma_prime)?;
    let d = design_sums(&inp.xs)?;
    let mf = T::of_usize(d.m);
    let c = d.centre();
    let inv = T::one() / gamma_prime;
    let two = T::of(2.0);
    let (mut sq, mut exc, mut lin, mut proj) = (T::zero(), T::zero(), T::zero(), T::zero());
    for i in 0..inp.xs.len() {
        let x = inp.xs[i];
        let fx = f.eval(x);
        let e = inp.ghat[i] - fx;
        let delta = if inp.exceeds(i) { inv } else { T::zero() };
        sq = sq + e * e;
        if inp.exceeds(i) {
            exc = exc + (inp.ys[i] - fx);
        }
        lin = lin + e + delta;
        proj = proj + (e + delta) * (x - c);
    }
    Ok(sq + two * inv * exc - lin * lin / mf - mf * proj * proj / d.denom)
}

pub fn breakdown_from_inputs<T: Scalar>(inp: &OddInputs<T>, gamma_prime: T) -> Result<StatBreakdown<T>> {
    let t = t_from_inputs(inp, gamma_prime)?;
    let t1v = t1(&inp.ghat, &inp.xs, Affine::zero())?;
    let d = design_sums(&inp.xs)?;
    let reference = affine_fit(&inp.xs, &inp.ghat)?;
    let mf = T::of_usize(d.m);
    let c = d.centre();
    let inv = T::one() / gamma_prime;
    let two = T::of(2.0);
    let (mut sq_ref, mut exc_ref, mut lin, mut proj) = (T::zero(), T::zero(), T::zero(), T::zero());
    let mut sum_sq = T::zero();
    let mut count = 0usize;
    for i in 0..inp.xs.len() {
        let x = inp.xs[i];
        let fx = reference.eval(x);
        let e = inp.ghat[i] - fx;
        sum_sq = sum_sq + inp.ghat[i] * inp.ghat[i];
        sq_ref = sq_ref + e * e;
        let delta = if inp.exceeds(i) {
            count += 1;
            exc_ref = exc_ref + (inp.ys[i] - fx);
            inv
        } else {
            T::zero()
        };
        lin = lin + e + delta;
        proj = proj + (e + delta) * (x - c);
    }
    Ok(StatBreakdown {
        t,
        t1: t1v,
        s1: sq_ref + two * inv * exc_ref,
        s2: lin * lin / mf,
        s3: mf * proj * proj / d.denom,
        gamma_used: gamma_prime,
        sum_sq,
        correction_count: count,
        m: d.m,
        reference,
    })
}

pub fn t_statistic<T: Scalar>(sample: &Sample<T>, h: T, gamma_prime: T) -> Result<StatBreakdown<T>> {
    let inp = OddInputs::from_sample(sample, h)?;
    breakdown_from_inputs(&inp, gamma_prime)
}

pub fn t_f<T: Scalar>(sample: &Sample<T>, h: T, gamma_prime: T, f: Affine<T>) -> Result<T> {
    let inp = OddInputs::from_sample(sample, h)?;
    t_f_from_inputs(&inp, gamma_prime, f)
}

/// Smallest and largest number of design points in a half-open window `[x, x + h/2)` over
/// starts `x` in the open range `(-h, 1 + h/2)`.
///
/// The count is a left-continuous step function of `x` that only changes at `x_i` and
/// `x_i - h/2`, so evaluating it once inside every gap between consecutive events is exact.
/// Events closer than `1e-9 * (1 + h)` are treated as coincident.
pub fn window_count_range<T: Scalar>(xs: &[T], h: T) -> Result<(usize, usize)> {
    if xs.is_empty() {
        return Err(GofError::EmptyDesign);
    }
    if !(h > T::zero()) {
        return Err(GofError::Domain("bandwidth must be positive".into()));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite abscissae"));
    let half = h / T::of(2.0);
    let lo = -h;
    let hi = T::one() + half;
    let eps = T::of(1e-9) * (T::one() + h);

    let mut events: Vec<T> = sorted
        .iter()
        .flat_map(|&x| [x, x - half])
        .filter(|&e| e > lo && e < hi)
        .collect();
    events.push(lo);
    events.push(hi);
    events.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    events.dedup_by(|b, a| *b - *a < eps);

    let count = |x: T| {
        let a = sorted.partition_point(|&v| v < x);
        let b = sorted.partition_point(|&v| v - x < half);
        b.saturating_sub(a)
    };
    let mut min = usize::MAX;
    let mut max = 0usize;
    for w in events.windows(2) {
        let mid = (w[0] + w[1]) / T::of(2.0);
        let c = count(mid);
        min = min.min(c);
        max = max.max(c);
    }
    if min == usize::MAX {
        let c = count((lo + hi) / T::of(2.0));
        min = c;
        max = c;
    }
    Ok((min, max))
}

/// Design-regularity constant: the minimal half-bandwidth window count divided by `n h`.
pub fn c_x<T: Scalar>(all_xs: &[T], h: T, n: usize) -> Result<T> {
    if n == 0 {
        return Err(GofError::EmptyDesign);
    }
    let (min, _) = window_count_range(all_xs, h)?;
    Ok(T::of_usize(min) / (T::of_usize(n) * h))
}
