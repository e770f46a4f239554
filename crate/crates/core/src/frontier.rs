//! Local-linear frontier estimator.
//!
//! At each abscissa `x` the estimate is the smallest intercept `p0` for which some slope `p1`
//! makes the line `p0 + p1 (t - x)` lie on or above every estimation (even-indexed) point with
//! `|t - x| < h`. Equivalently it is the least concave majorant of the windowed points
//! evaluated at `x`, which is what is computed here.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::hull::{self, HullPos};
use crate::scalar::Scalar;

/// Observations sorted by abscissa, split by 1-based position parity.
///
/// Odd positions (1st, 3rd, ...) form the statistic sample, even positions the estimation
/// sample. Only points inside the eligible interval (default `[0, 1]`) enter the statistic
/// and the residuals; points outside act as buffer for the estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    points: Vec<(T, T)>,
    even: Vec<(T, T)>,
    merged: usize,
    dropped_last: bool,
    eligible: (T, T),
}

impl<T: Scalar> Sample<T> {
    /// Sorts by x and merges tied abscissae, keeping the largest response.
    pub fn new(mut points: Vec<(T, T)>) -> Result<Self> {
        if points.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(GofError::Domain("non-finite observation".into()));
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let before = points.len();
        let mut merged: Vec<(T, T)> = Vec::with_capacity(points.len());
        for p in points {
            match merged.last_mut() {
                Some(last) if last.0 == p.0 => {
                    if p.1 > last.1 {
                        last.1 = p.1;
                    }
                }
                _ => merged.push(p),
            }
        }
        let merged_count = before - merged.len();
        let mut s = Sample {
            points: merged,
            even: Vec::new(),
            merged: merged_count,
            dropped_last: false,
            eligible: (T::zero(), T::one()),
        };
        s.rebuild();
        Ok(s)
    }

    fn rebuild(&mut self) {
        self.even = self.points.iter().skip(1).step_by(2).copied().collect();
    }

    pub fn with_eligible(mut self, lo: T, hi: T) -> Self {
        self.eligible = (lo, hi);
        self
    }

    /// Drops the last point if the total count is odd. Returns whether a point was dropped.
    pub fn make_even(&mut self) -> bool {
        if self.points.len() % 2 == 1 {
            self.points.pop();
            self.rebuild();
            self.dropped_last = true;
        }
        self.dropped_last
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn xs(&self) -> Vec<T> {
        self.points.iter().map(|p| p.0).collect()
    }

    /// Estimation (even-position) points in x order.
    pub fn even_points(&self) -> &[(T, T)] {
        &self.even
    }

    pub fn merged_count(&self) -> usize {
        self.merged
    }

    pub fn dropped_last(&self) -> bool {
        self.dropped_last
    }

    pub fn eligible(&self) -> (T, T) {
        self.eligible
    }

    pub fn is_eligible(&self, x: T) -> bool {
        x >= self.eligible.0 && x <= self.eligible.1
    }

    /// Statistic (odd-position) points inside the eligible interval.
    pub fn odd_eligible(&self) -> Vec<(T, T)> {
        self.points
            .iter()
            .step_by(2)
            .copied()
            .filter(|p| self.is_eligible(p.0))
            .collect()
    }

    /// Estimation (even-position) points inside the eligible interval.
    pub fn even_eligible(&self) -> Vec<(T, T)> {
        self.even
            .iter()
            .copied()
            .filter(|p| self.is_eligible(p.0))
            .collect()
    }

    /// All points inside the eligible interval, regardless of parity.
    pub fn eligible_count(&self) -> usize {
        self.points.iter().filter(|p| self.is_eligible(p.0)).count()
    }

    /// Sample size entering the statistic's normalisations: twice the eligible odd count.
    pub fn n_stat(&self) -> usize {
        2 * self.odd_eligible().len()
    }
}

/// Which windowed points pin the optimal line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    /// One point strictly left and one strictly right of `x`.
    Pair(usize, usize),
    /// A single point at `x` itself.
    Single(usize),
}

/// Optimal line at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<T> {
    pub value: T,
    pub slope: T,
    /// Indices into the point slice the fit was computed from.
    pub support: Support,
    pub left: usize,
    pub right: usize,
}

/// Frontier evaluated on a grid of abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierFit<T> {
    pub eval_x: Vec<T>,
    pub values: Vec<T>,
    pub slopes: Vec<T>,
    pub support_pairs: Vec<Support>,
    /// Windowed point counts strictly left and strictly right of each abscissa.
    pub window_counts: Vec<(usize, usize)>,
}

#[inline]
fn window_lo<T: Scalar>(pts: &[(T, T)], x: T, h: T) -> usize {
    pts.partition_point(|p| x - p.0 >= h)
}

#[inline]
fn window_hi<T: Scalar>(pts: &[(T, T)], x: T, h: T) -> usize {
    pts.partition_point(|p| p.0 - x < h)
}

/// Solves the window LP for `pts[lo..hi]`; reported indices are absolute into `pts`.
fn fit_window<T: Scalar>(
    pts: &[(T, T)],
    lo: usize,
    hi: usize,
    x: T,
    h: T,
    scratch: &mut Vec<usize>,
) -> Result<LineFit<T>> {
    if lo >= hi {
        return Err(GofError::EmptyWindow {
            x: x.as_f64(),
            h: h.as_f64(),
        });
    }
    let win = &pts[lo..hi];
    hull::upper_hull(win, scratch);
    let left = win.partition_point(|p| p.0 < x);
    let right = win.len() - win.partition_point(|p| p.0 <= x);
    match hull::locate(win, scratch, x) {
        HullPos::LeftOf => Err(GofError::EmptySide {
            x: x.as_f64(),
            side: "left",
        }),
        HullPos::RightOf => Err(GofError::EmptySide {
            x: x.as_f64(),
            side: "right",
        }),
        HullPos::Vertex(k) => {
            let v = win[scratch[k]];
            let slope = if k + 1 < scratch.len() {
                hull::slope(v, win[scratch[k + 1]])
            } else if k > 0 {
                hull::slope(win[scratch[k - 1]], v)
            } else {
                T::zero()
            };
            Ok(LineFit {
                value: v.1,
                slope,
                support: Support::Single(lo + scratch[k]),
                left,
                right,
            })
        }
        HullPos::Segment(k) => {
            let a = win[scratch[k - 1]];
            let b = win[scratch[k]];
            Ok(LineFit {
                value: hull::interpolate(a, b, x),
                slope: hull::slope(a, b),
                support: Support::Pair(lo + scratch[k - 1], lo + scratch[k]),
                left,
                right,
            })
        }
    }
}

fn check_bandwidth<T: Scalar>(h: T) -> Result<()> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(GofError::Domain(format!(
            "bandwidth must be positive, got {:?}",
            h
        )));
    }
    Ok(())
}

/// Frontier at `x` from an arbitrary point set sorted by strictly increasing x.
pub fn fit_points<T: Scalar>(pts: &[(T, T)], x: T, h: T) -> Result<LineFit<T>> {
    check_bandwidth(h)?;
    let lo = window_lo(pts, x, h);
    let hi = window_hi(pts, x, h);
    fit_window(pts, lo, hi, x, h, &mut Vec::new())
}

/// Frontier at `x` from the sample's estimation points. Support indices refer to
/// [`Sample::even_points`].
pub fn fit_line<T: Scalar>(sample: &Sample<T>, x: T, h: T) -> Result<LineFit<T>> {
    fit_points(sample.even_points(), x, h)
}

pub fn fit_at<T: Scalar>(sample: &Sample<T>, x: T, h: T) -> Result<T> {
    fit_line(sample, x, h).map(|f| f.value)
}

/// Batch evaluation on ascending abscissae with a sliding window.
pub fn fit_grid_points<T: Scalar>(pts: &[(T, T)], xs: &[T], h: T) -> Result<FrontierFit<T>> {
    check_bandwidth(h)?;
    if xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(GofError::Domain("evaluation abscissae must be ascending".into()));
    }
    let mut out = FrontierFit {
        eval_x: xs.to_vec(),
        values: Vec::with_capacity(xs.len()),
        slopes: Vec::with_capacity(xs.len()),
        support_pairs: Vec::with_capacity(xs.len()),
        window_counts: Vec::with_capacity(xs.len()),
    };
    let mut scratch = Vec::new();
    let (mut lo, mut hi) = (0usize, 0usize);
    for &x in xs {
        while lo < pts.len() && x - pts[lo].0 >= h {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi < pts.len() && pts[hi].0 - x < h {
            hi += 1;
        }
        let f = fit_window(pts, lo, hi, x, h, &mut scratch).map_err(|e| e.at(x.as_f64()))?;
        out.values.push(f.value);
        out.slopes.push(f.slope);
        out.support_pairs.push(f.support);
        out.window_counts.push((f.left, f.right));
    }
    Ok(out)
}

pub fn fit_grid<T: Scalar>(sample: &Sample<T>, xs: &[T], h: T) -> Result<FrontierFit<T>> {
    fit_grid_points(sample.even_points(), xs, h)
}

/// Residuals `y - ĝ(x)` of the eligible estimation points, with the frontier at bandwidth
/// `h1` fitted on all estimation points (each point sits in its own window).
pub fn residuals_even<T: Scalar>(sample: &Sample<T>, h1: T) -> Result<Vec<T>> {
    let pts = sample.even_eligible();
    let xs: Vec<T> = pts.iter().map(|p| p.0).collect();
    let fit = fit_grid(sample, &xs, h1)?;
    Ok(pts
        .iter()
        .zip(&fit.values)
        .map(|(p, &g)| p.1 - g)
        .collect())
}
