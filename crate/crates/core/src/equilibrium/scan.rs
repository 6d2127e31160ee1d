//! Sign-change scanning, bisection and golden-section search on a grid.

use crate::scalar::Real;

use super::Stability;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Crossing<T> {
    pub x: T,
    pub stability: Stability,
}

const MAX_BISECTIONS: usize = 200;

/// Values within this distance of zero carry no sign. Far in the tails both
/// response curves underflow to zero together, which must not read as a
/// crossing.
const DEADBAND: f64 = 1e-12;

/// Roots of `f` bracketed by grid points whose values have opposite signs,
/// skipping points where `|f|` is within the dead band. Points where `f` is
/// undefined break the scan. Each bracket is bisected to width `tol`.
///
/// A crossing from positive to negative is labeled stable.
pub(crate) fn sign_changes<T: Real>(grid: &[T], f: impl Fn(T) -> Option<T>, tol: T) -> Vec<Crossing<T>> {
    let dead = T::lit(DEADBAND);
    let mut out = Vec::new();
    let mut last: Option<(T, bool)> = None;
    for &x in grid {
        let Some(v) = f(x) else {
            last = None;
            continue;
        };
        if v.abs() <= dead {
            continue;
        }
        let pos = v > T::zero();
        if let Some((lx, lpos)) = last {
            if lpos != pos {
                if let Some(r) = bisect(&f, lx, x, lpos, tol) {
                    let stability = if lpos { Stability::Stable } else { Stability::Unstable };
                    out.push(Crossing { x: r, stability });
                }
            }
        }
        last = Some((x, pos));
    }
    out
}

/// Bisection keeping `f(lo) >= 0 == lo_nonneg`. Returns `None` if `f` becomes
/// undefined inside the bracket.
fn bisect<T: Real>(f: &impl Fn(T) -> Option<T>, mut lo: T, mut hi: T, lo_nonneg: bool, tol: T) -> Option<T> {
    let half = T::lit(0.5);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + half * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid)? >= T::zero()) == lo_nonneg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo + half * (hi - lo))
}

/// Merges crossings closer than `radius`, keeping the first of each cluster.
pub(crate) fn dedup_crossings<T: Real>(mut xs: Vec<Crossing<T>>, radius: T) -> Vec<Crossing<T>> {
    xs.sort_by(|a, b| a.x.partial_cmp(&b.x).expect("finite roots"));
    let mut out: Vec<Crossing<T>> = Vec::with_capacity(xs.len());
    for c in xs {
        match out.last() {
            Some(last) if (c.x - last.x).abs() <= radius => {}
            _ => out.push(c),
        }
    }
    out
}

/// Solves `g(x) = target` for a nonincreasing `g` on `[lo, hi]` to width
/// `tol`; clamps to the end points when the target is out of range.
pub(crate) fn invert_nonincreasing<T: Real>(g: impl Fn(T) -> T, target: T, mut lo: T, mut hi: T, tol: T) -> T {
    if g(lo) <= target {
        return lo;
    }
    if g(hi) >= target {
        return hi;
    }
    let half = T::lit(0.5);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + half * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + half * (hi - lo)
}

/// Golden-section maximization of a unimodal `f` on `[a, b]`.
pub(crate) fn golden_max<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..MAX_BISECTIONS {
        if b - a <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
