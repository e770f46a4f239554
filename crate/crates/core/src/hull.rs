//! Upper convex hull (least concave majorant) of points sorted by abscissa.

use crate::scalar::Scalar;

/// Indices (into `pts`) of the upper hull vertices, left to right.
///
/// `pts` must be sorted by strictly increasing x. Collinear interior points are dropped.
pub fn upper_hull<T: Scalar>(pts: &[(T, T)], out: &mut Vec<usize>) {
    out.clear();
    for (i, &(px, py)) in pts.iter().enumerate() {
        while out.len() >= 2 {
            let (ox, oy) = pts[out[out.len() - 2]];
            let (ax, ay) = pts[out[out.len() - 1]];
            let cross = (ax - ox) * (py - oy) - (ay - oy) * (px - ox);
            if cross >= T::zero() {
                out.pop();
            } else {
                break;
            }
        }
        out.push(i);
    }
}

/// Where `x` falls relative to a hull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum HullPos {
    LeftOf,
    RightOf,
    /// On vertex `hull[k]`.
    Vertex(usize),
    /// Strictly inside segment `hull[k-1]..hull[k]`.
    Segment(usize),
}

pub(crate) fn locate<T: Scalar>(pts: &[(T, T)], hull: &[usize], x: T) -> HullPos {
    let first = pts[hull[0]].0;
    let last = pts[hull[hull.len() - 1]].0;
    if x < first {
        return HullPos::LeftOf;
    }
    if x > last {
        return HullPos::RightOf;
    }
    let k = hull.partition_point(|&i| pts[i].0 < x);
    if pts[hull[k]].0 == x {
        HullPos::Vertex(k)
    } else {
        HullPos::Segment(k)
    }
}

#[inline]
pub(crate) fn slope<T: Scalar>(a: (T, T), b: (T, T)) -> T {
    (b.1 - a.1) / (b.0 - a.0)
}

#[inline]
pub(crate) fn interpolate<T: Scalar>(a: (T, T), b: (T, T), x: T) -> T {
    a.1 + (b.1 - a.1) * ((x - a.0) / (b.0 - a.0))
}

/// Exact integral over `[lo, hi]` of the square of the hull's piecewise-linear function.
///
/// `[lo, hi]` must lie within the hull's abscissa range.
pub(crate) fn integrate_squared<T: Scalar>(pts: &[(T, T)], hull: &[usize], lo: T, hi: T) -> T {
    let mut acc = T::zero();
    if hi <= lo {
        return acc;
    }
    let eval = |x: T| -> T {
        match locate(pts, hull, x) {
            HullPos::Vertex(k) => pts[hull[k]].1,
            HullPos::Segment(k) => interpolate(pts[hull[k - 1]], pts[hull[k]], x),
            _ => T::nan(),
        }
    };
    let three = T::of(3.0);
    let mut a = lo;
    let mut fa = eval(lo);
    for &vi in hull {
        let vx = pts[vi].0;
        if vx <= lo {
            continue;
        }
        let b = if vx < hi { vx } else { hi };
        let fb = if vx < hi { pts[vi].1 } else { eval(hi) };
        // integral of a linear function squared: (b-a)(fa² + fa·fb + fb²)/3
        acc = acc + (b - a) * (fa * fa + fa * fb + fb * fb) / three;
        a = b;
        fa = fb;
        if vx >= hi {
            break;
        }
    }
    acc
}
