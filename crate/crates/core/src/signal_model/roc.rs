use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{unit, Real};

/// A (false positive rate, true positive rate) pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint<T> {
    pub fp: T,
    pub tp: T,
}

impl<T: Real> OperatingPoint<T> {
    pub fn new(fp: T, tp: T) -> Result<Self> {
        let ok = |x: T| x >= T::zero() && x <= T::one();
        if ok(fp) && ok(tp) {
            Ok(Self { fp, tp })
        } else {
            Err(Error::Config(format!("operating point ({fp}, {tp}) outside the unit square")))
        }
    }

    pub(crate) fn clamped(fp: T, tp: T) -> Self {
        Self { fp: unit(fp), tp: unit(tp) }
    }

    pub fn origin() -> Self {
        Self { fp: T::zero(), tp: T::zero() }
    }

    pub fn corner() -> Self {
        Self { fp: T::one(), tp: T::one() }
    }

    /// Youden index `tp - fp`.
    pub fn youden(&self) -> T {
        self.tp - self.fp
    }
}

/// Twice the signed area of triangle (o, a, b); positive for a left turn.
pub(crate) fn cross<T: Real>(o: &OperatingPoint<T>, a: &OperatingPoint<T>, b: &OperatingPoint<T>) -> T {
    (a.fp - o.fp) * (b.tp - o.tp) - (a.tp - o.tp) * (b.fp - o.fp)
}

/// ROC curve from (0,0) to (1,1), monotone in both coordinates.
///
/// `thresholds[i]` is the score threshold producing `points[i]` when the curve
/// comes from a scored signal. The anchors carry `+inf` (reject all) and
/// `-inf` (accept all). Derived curves have no thresholds.
#[derive(Clone, Debug, Serialize)]
pub struct RocCurve<T: Real> {
    points: Vec<OperatingPoint<T>>,
    thresholds: Option<Vec<T>>,
}

impl<T: Real> RocCurve<T> {
    pub fn new(points: Vec<OperatingPoint<T>>, thresholds: Option<Vec<T>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Config("roc curve needs at least the two anchors".into()));
        }
        if let Some(t) = &thresholds {
            if t.len() != points.len() {
                return Err(Error::Config("one threshold per roc point required".into()));
            }
        }
        for p in &points {
            OperatingPoint::new(p.fp, p.tp)?;
        }
        if points[0] != OperatingPoint::origin() || points[points.len() - 1] != OperatingPoint::corner() {
            return Err(Error::Config("roc curve must start at (0,0) and end at (1,1)".into()));
        }
        if points.windows(2).any(|w| w[1].fp < w[0].fp || w[1].tp < w[0].tp) {
            return Err(Error::Config("roc curve must be nondecreasing in fp and tp".into()));
        }
        Ok(Self { points, thresholds })
    }

    /// Builds a curve from raw rates, anchoring it and forcing monotonicity
    /// by running maxima (absorbs rounding noise of the CDF evaluations).
    pub(crate) fn from_rates(rates: Vec<(Option<T>, OperatingPoint<T>)>, with_thresholds: bool) -> Self {
        let mut points = Vec::with_capacity(rates.len() + 2);
        let mut thresholds = Vec::with_capacity(rates.len() + 2);
        points.push(OperatingPoint::origin());
        thresholds.push(T::infinity());
        let (mut fp_max, mut tp_max) = (T::zero(), T::zero());
        for (t, p) in rates {
            fp_max = fp_max.max(unit(p.fp));
            tp_max = tp_max.max(unit(p.tp));
            points.push(OperatingPoint { fp: fp_max, tp: tp_max });
            thresholds.push(t.unwrap_or(T::nan()));
        }
        points.push(OperatingPoint::corner());
        thresholds.push(T::neg_infinity());
        Self { points, thresholds: with_thresholds.then_some(thresholds) }
    }

    /// The diagonal `tp = fp`: an uninformative signal.
    pub fn diagonal() -> Self {
        Self { points: vec![OperatingPoint::origin(), OperatingPoint::corner()], thresholds: None }
    }

    pub fn points(&self) -> &[OperatingPoint<T>] {
        &self.points
    }

    pub fn thresholds(&self) -> Option<&[T]> {
        self.thresholds.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Highest tp reached at false positive rate `fp` (piecewise-linear).
    pub fn tp_at(&self, fp: T) -> T {
        let pts = &self.points;
        let k = pts.partition_point(|p| p.fp <= fp);
        if k == 0 {
            return pts[0].tp;
        }
        if k == pts.len() {
            return pts[k - 1].tp;
        }
        let (a, b) = (&pts[k - 1], &pts[k]);
        if a.fp == fp {
            return a.tp;
        }
        a.tp + (fp - a.fp) / (b.fp - a.fp) * (b.tp - a.tp)
    }

    /// Smallest fp at which the curve reaches true positive rate `tp`.
    pub fn fp_at_tp(&self, tp: T) -> T {
        let pts = &self.points;
        let k = pts.partition_point(|p| p.tp < tp);
        if k == 0 {
            return pts[0].fp;
        }
        if k == pts.len() {
            return pts[k - 1].fp;
        }
        let (a, b) = (&pts[k - 1], &pts[k]);
        a.fp + (tp - a.tp) / (b.tp - a.tp) * (b.fp - a.fp)
    }

    /// Sup-norm distance between two curves viewed as functions tp(fp).
    pub fn sup_distance(&self, other: &Self) -> T {
        self.points
            .iter()
            .chain(other.points.iter())
            .map(|p| (self.tp_at(p.fp) - other.tp_at(p.fp)).abs())
            .fold(T::zero(), T::max)
    }

    /// True when no vertex lies strictly above the chord of its neighbours'
    /// hull, i.e. slopes are nonincreasing up to `tol`.
    pub fn is_concave(&self, tol: T) -> bool {
        self.points
            .windows(3)
            .all(|w| cross(&w[0], &w[1], &w[2]) <= tol)
    }

    /// Upper concave envelope: the upper-left boundary of the convex hull of
    /// the curve. Collinear vertices are dropped.
    pub fn concavify(&self) -> Self {
        let mut hull: Vec<usize> = Vec::with_capacity(self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            while hull.len() >= 2 {
                let a = &self.points[hull[hull.len() - 2]];
                let b = &self.points[hull[hull.len() - 1]];
                if cross(a, b, p) >= T::zero() {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(i);
        }
        let points = hull.iter().map(|&i| self.points[i]).collect();
        let thresholds = self
            .thresholds
            .as_ref()
            .map(|t| hull.iter().map(|&i| t[i]).collect());
        Self { points, thresholds }
    }

    /// CSV with columns `threshold, fp, tp`. Missing thresholds are left blank.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["threshold", "fp", "tp"])?;
        for (i, p) in self.points.iter().enumerate() {
            let t = self
                .thresholds
                .as_ref()
                .map(|t| t[i])
                .filter(|t| !t.is_nan())
                .map(|t| t.to_string())
                .unwrap_or_default();
            w.write_record([t, p.fp.to_string(), p.tp.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
