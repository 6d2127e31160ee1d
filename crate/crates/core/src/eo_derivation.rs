//! Post-processing toward equalized odds: per-group feasible regions of
//! derived predictors, the shared frontier both groups can reach, and
//! randomized threshold mixtures realizing a chosen operating point.
//!
//! The frontier is turned into a pseudo-signal over `p = 1 - fp`, so a
//! threshold `p` on the pseudo-score accepts with rates `(fp, tp)` read off
//! the frontier. Equilibrium thresholds of derived-predictor policies are
//! reported in this coordinate.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{linspace, unit, Real};
use crate::signal_model::{cross, Distribution1D, GridSpec, Group, OperatingPoint, RocCurve, SignalModel, Tabulated};

/// Convex region spanned by an ROC curve and the diagonal segment.
#[derive(Clone, Debug, Serialize)]
pub struct FeasibleRegion<T: Real> {
    pub group: Option<Group>,
    /// Upper-left boundary (the concave envelope of the ROC curve).
    upper: RocCurve<T>,
    /// Lower-right boundary from (0,0) to (1,1).
    lower: Vec<OperatingPoint<T>>,
}

impl<T: Real> FeasibleRegion<T> {
    pub fn upper(&self) -> &RocCurve<T> {
        &self.upper
    }

    pub fn lower(&self) -> &[OperatingPoint<T>] {
        &self.lower
    }

    pub fn for_group(mut self, group: Group) -> Self {
        self.group = Some(group);
        self
    }

    /// Hull vertices in counter-clockwise order starting at (0,0).
    pub fn vertices(&self) -> Vec<OperatingPoint<T>> {
        let mut v: Vec<_> = self.lower.clone();
        let up = self.upper.points();
        v.extend(up.iter().rev().skip(1).take(up.len().saturating_sub(2)).copied());
        v
    }

    /// Lowest tp of the region at `fp`.
    pub fn lower_at(&self, fp: T) -> T {
        let pts = &self.lower;
        let k = pts.partition_point(|p| p.fp < fp);
        if k == pts.len() {
            return pts[k - 1].tp;
        }
        if pts[k].fp == fp || k == 0 {
            return pts[k].tp;
        }
        let (a, b) = (&pts[k - 1], &pts[k]);
        a.tp + (fp - a.fp) / (b.fp - a.fp) * (b.tp - a.tp)
    }

    /// `Ok(())` if `point` lies in the region up to `slack`; otherwise the
    /// violated half-plane.
    pub fn check_contains(&self, point: OperatingPoint<T>, slack: T) -> std::result::Result<(), String> {
        let x = point.fp;
        if x < -slack {
            return Err("fp >= 0".into());
        }
        if x > T::one() + slack {
            return Err("fp <= 1".into());
        }
        let xc = unit(x);
        let up = self.upper.tp_at(xc);
        if point.tp > up + slack {
            return Err(edge_description("tp <=", self.upper.points(), xc));
        }
        let lo = self.lower_at(xc);
        if point.tp < lo - slack {
            return Err(edge_description("tp >=", &self.lower, xc));
        }
        Ok(())
    }

    pub fn contains(&self, point: OperatingPoint<T>, slack: T) -> bool {
        self.check_contains(point, slack).is_ok()
    }

    pub fn is_convex(&self, tol: T) -> bool {
        let v = self.vertices();
        if v.len() < 3 {
            return true;
        }
        (0..v.len()).all(|i| cross(&v[i], &v[(i + 1) % v.len()], &v[(i + 2) % v.len()]) >= -tol)
    }
}

fn edge_description<T: Real>(op: &str, pts: &[OperatingPoint<T>], x: T) -> String {
    let k = pts.partition_point(|p| p.fp <= x).clamp(1, pts.len() - 1);
    let (a, b) = (pts[k - 1], pts[k]);
    format!("{op} segment ({}, {})-({}, {})", a.fp, a.tp, b.fp, b.tp)
}

/// Convex hull of the ROC curve and the diagonal endpoints.
pub fn feasible_region<T: Real>(roc: &RocCurve<T>) -> FeasibleRegion<T> {
    let upper = roc.concavify();
    let mut lower: Vec<OperatingPoint<T>> = Vec::with_capacity(4);
    for p in roc.points() {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= T::zero() {
            lower.pop();
        }
        lower.push(*p);
    }
    FeasibleRegion { group: None, upper, lower }
}

/// Upper boundary of the intersection of both regions:
/// `tp(fp) = min(upper_0(fp), upper_1(fp))`, sampled at `n_points` evenly
/// spaced false positive rates plus every envelope vertex, so the curve stays
/// exact where the envelopes are finely resolved (near fp = 0).
pub fn shared_frontier<T: Real>(r0: &FeasibleRegion<T>, r1: &FeasibleRegion<T>, n_points: usize) -> RocCurve<T> {
    let n = n_points.max(2);
    let mut fps: Vec<T> = linspace(T::zero(), T::one(), n);
    fps.extend(r0.upper.points().iter().chain(r1.upper.points()).map(|p| p.fp));
    fps.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));
    let resolution = T::lit(1e-12);
    fps.dedup_by(|b, a| *b - *a <= resolution);
    let mut points: Vec<OperatingPoint<T>> = fps
        .into_iter()
        .map(|fp| OperatingPoint { fp, tp: r0.upper.tp_at(fp).min(r1.upper.tp_at(fp)) })
        .collect();
    if points[0].tp > T::zero() {
        points.insert(0, OperatingPoint::origin());
    }
    let last = points.len() - 1;
    points[last] = OperatingPoint::corner();
    RocCurve::new(points, None).expect("pointwise minimum of two concave envelopes is a valid roc curve")
}

/// CSV with columns `p, fp, tp`, where `p = 1 - fp` is the pseudo-score.
pub fn write_frontier_csv<T: Real, W: Write>(frontier: &RocCurve<T>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["p", "fp", "tp"])?;
    for (p, pt) in pseudo_scores(frontier).into_iter().zip(frontier.points().iter().rev()) {
        w.write_record([p.to_string(), pt.fp.to_string(), pt.tp.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Pseudo-scores of the frontier vertices in ascending order (reverse of the
/// curve). A vertical segment at fp = 0 is given one extra step past 1.
fn pseudo_scores<T: Real>(frontier: &RocCurve<T>) -> Vec<T> {
    let pts = frontier.points();
    let min_gap = pts
        .windows(2)
        .map(|w| w[1].fp - w[0].fp)
        .filter(|g| *g > T::zero())
        .fold(T::one(), T::min);
    let mut out: Vec<T> = Vec::with_capacity(pts.len());
    for pt in pts.iter().rev() {
        let mut p = T::one() - pt.fp;
        if let Some(&prev) = out.last() {
            if p <= prev {
                p = prev + min_gap;
            }
        }
        out.push(p);
    }
    out
}

/// Pseudo-signal whose threshold rule at `p` reproduces the frontier point
/// `(fp(p), tp(p))`: `F_u(p) = 1 - fp(p)`, `F_q(p) = 1 - tp(p)`, identical for
/// both groups. Nodal densities are centered differences (one-sided at the
/// ends).
pub fn derived_signal_model<T: Real>(frontier: &RocCurve<T>) -> Result<SignalModel<T>> {
    let grid = pseudo_scores(frontier);
    let rev: Vec<OperatingPoint<T>> = frontier.points().iter().rev().copied().collect();
    let cdf_u: Vec<T> = rev.iter().map(|p| unit(T::one() - p.fp)).collect();
    let cdf_q: Vec<T> = rev.iter().map(|p| unit(T::one() - p.tp)).collect();
    let pdf_u = nodal_slopes(&grid, &cdf_u);
    let pdf_q = nodal_slopes(&grid, &cdf_q);
    let fu = Distribution1D::Tabulated(Tabulated::from_parts(grid.clone(), pdf_u, cdf_u)?);
    let fq = Distribution1D::Tabulated(Tabulated::from_parts(grid.clone(), pdf_q, cdf_q)?);
    let spec = GridSpec::new(grid[0], grid[grid.len() - 1], grid.len())?;
    Ok(SignalModel::new([[fq.clone(), fq], [fu.clone(), fu]], spec))
}

fn nodal_slopes<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            ((y[b] - y[a]) / (x[b] - x[a])).max(T::zero())
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    /// Accept iff score > value.
    Threshold,
    /// Accept with probability value, ignoring the score.
    Coin,
}

#[derive(Clone, Debug, Serialize)]
pub struct MixtureComponent<T: Real> {
    pub kind: ComponentKind,
    /// Threshold or acceptance probability. `None` for a threshold vertex of
    /// a curve that carries no thresholds.
    pub value: Option<T>,
    pub weight: T,
    #[serde(skip)]
    pub rates: OperatingPoint<T>,
}

/// Randomized post-processing that hits `target` in expectation.
#[derive(Clone, Debug, Serialize)]
pub struct DerivedPredictor<T: Real> {
    pub target: OperatingPoint<T>,
    pub components: Vec<MixtureComponent<T>>,
}

impl<T: Real> DerivedPredictor<T> {
    /// Expected (fp, tp) of the mixture.
    pub fn expected(&self) -> OperatingPoint<T> {
        self.components.iter().fold(OperatingPoint::origin(), |acc, c| OperatingPoint {
            fp: acc.fp + c.weight * c.rates.fp,
            tp: acc.tp + c.weight * c.rates.tp,
        })
    }
}

const REALIZE_SLACK: f64 = 1e-9;

/// Writes `target` as a mixture of at most two hull vertices of `roc` and one
/// coin flip on the diagonal: first the boundary point above (or below) the
/// target at the same fp, then the diagonal point `(fp, fp)`.
pub fn realize<T: Real>(roc: &RocCurve<T>, target: OperatingPoint<T>) -> Result<DerivedPredictor<T>> {
    let region = feasible_region(roc);
    region.check_contains(target, T::lit(REALIZE_SLACK)).map_err(|half_plane| Error::Infeasible {
        fp: target.fp.to_f64_lossy(),
        tp: target.tp.to_f64_lossy(),
        half_plane,
    })?;
    let x = unit(target.fp);
    let y = target.tp;
    let (boundary, thresholds): (&[OperatingPoint<T>], Option<&[T]>) = if y >= x {
        (region.upper.points(), region.upper.thresholds())
    } else {
        (&region.lower, None)
    };
    let boundary_tp = if y >= x { region.upper.tp_at(x) } else { region.lower_at(x) };
    let alpha = if (boundary_tp - x).abs() > T::zero() { unit((y - x) / (boundary_tp - x)) } else { T::zero() };

    // Segment (a, b) of the boundary containing x.
    let k = boundary.partition_point(|p| p.fp <= x).clamp(1, boundary.len() - 1);
    let (ia, ib) = if boundary[k - 1].fp == x { (k - 1, k - 1) } else { (k - 1, k) };
    let (a, b) = (boundary[ia], boundary[ib]);
    let wa = if ia == ib { T::one() } else { (b.fp - x) / (b.fp - a.fp) };

    let vertex = |i: usize, weight: T| -> MixtureComponent<T> {
        let p = boundary[i];
        if p == OperatingPoint::origin() || p == OperatingPoint::corner() {
            MixtureComponent { kind: ComponentKind::Coin, value: Some(p.fp), weight, rates: p }
        } else {
            let value = if y >= x { thresholds.map(|t| t[i]) } else { None };
            MixtureComponent { kind: ComponentKind::Threshold, value, weight, rates: p }
        }
    };
    let mut parts = vec![
        vertex(ia, alpha * wa),
        vertex(ib, alpha * (T::one() - wa)),
        MixtureComponent {
            kind: ComponentKind::Coin,
            value: Some(x),
            weight: T::one() - alpha,
            rates: OperatingPoint { fp: x, tp: x },
        },
    ];
    if ia == ib {
        parts.remove(1);
    }
    let mut components: Vec<MixtureComponent<T>> = Vec::with_capacity(3);
    for c in parts.into_iter().filter(|c| c.weight > T::zero()) {
        match components.iter_mut().find(|d| d.kind == c.kind && d.rates == c.rates) {
            Some(d) => d.weight = d.weight + c.weight,
            None => components.push(c),
        }
    }
    Ok(DerivedPredictor { target, components })
}
