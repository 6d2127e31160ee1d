//! Test-side oracles, written independently of the library's numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `erf` by its Maclaurin series for |x| <= 3 and a Lentz continued fraction
/// for `erfc` beyond.
pub fn erf(x: f64) -> f64 {
    if x.abs() > 3.0 {
        let c = erfc_cf(x.abs());
        return x.signum() * (1.0 - c);
    }
    let mut term = x;
    let mut sum = x;
    for n in 1..400 {
        let n = n as f64;
        term *= -x * x / n;
        let add = term / (2.0 * n + 1.0);
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    2.0 / PI.sqrt() * sum
}

/// `erfc(x)` for x > 0 by the continued fraction
/// `erfc x = exp(-x^2)/sqrt(pi) * 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))`.
pub fn erfc_cf(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + a / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / PI.sqrt() / f
}

pub fn norm_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / (sd * 2f64.sqrt());
    if z < -3.0 {
        0.5 * erfc_cf(-z)
    } else {
        0.5 * (1.0 + erf(z))
    }
}

pub fn norm_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
}

/// One group's Gaussian signal and the unit-width uniform-cost economics.
#[derive(Clone, Copy, Debug)]
pub struct GaussGroup {
    pub mean_q: f64,
    pub sd_q: f64,
    pub mean_u: f64,
    pub sd_u: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Econ {
    pub r: f64,
    pub omega: f64,
    pub cost_lo: f64,
    pub cost_hi: f64,
}

impl Econ {
    pub fn unit() -> Self {
        Self { r: 1.0, omega: 1.0, cost_lo: 0.0, cost_hi: 0.2 }
    }
}

impl GaussGroup {
    pub fn g1() -> Self {
        Self { mean_q: 1.0, sd_q: 1.0, mean_u: 0.0, sd_u: 1.0 }
    }

    pub fn ar(&self, e: &Econ, theta: f64) -> f64 {
        let gap = norm_cdf(theta, self.mean_u, self.sd_u) - norm_cdf(theta, self.mean_q, self.sd_q);
        ((e.omega * gap - e.cost_lo) / (e.cost_hi - e.cost_lo)).clamp(0.0, 1.0)
    }

    /// FR through the log ratio, so the tails stay finite.
    pub fn fr(&self, e: &Econ, theta: f64) -> f64 {
        let lq = -0.5 * ((theta - self.mean_q) / self.sd_q).powi(2) - self.sd_q.ln();
        let lu = -0.5 * ((theta - self.mean_u) / self.sd_u).powi(2) - self.sd_u.ln();
        // phi / (r + phi) = 1 / (1 + r / phi)
        1.0 / (1.0 + e.r * (lq - lu).exp())
    }
}

/// Beliefs below this are outside what [`brute_force_lf`] resolves.
pub const BELIEF_FLOOR: f64 = 1e-8;

/// Dense scan of `AR - FR` without refinement: every sign change between
/// consecutive nodes is reported at the bracket midpoint as `(theta, pi)`.
/// Crossings where both curves are below `1e-9` are skipped: the oracle's
/// plain subtraction cannot tell them from rounding there. Compare against it
/// only above [`BELIEF_FLOOR`].
pub fn brute_force_lf(g: &GaussGroup, e: &Econ, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let step = (hi - lo) / (n - 1) as f64;
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..n {
        let t = lo + step * i as f64;
        let (a, f) = (g.ar(e, t), g.fr(e, t));
        let h = a - f;
        if let Some((pt, ph)) = prev {
            if (ph > 0.0) != (h > 0.0) && h != 0.0 && a.max(f) > 1e-9 {
                let m = 0.5 * (pt + t);
                out.push((m, g.ar(e, m)));
            }
        }
        if h != 0.0 {
            prev = Some((t, h));
        }
    }
    out
}

/// Height of the upper convex hull of `points` at `x`, by checking every
/// chord through a pair of points.
pub fn upper_hull_at(points: &[(f64, f64)], x: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for a in points {
        for b in points {
            if a.0 <= x && x <= b.0 {
                let y = if b.0 == a.0 { a.1.max(b.1) } else { a.1 + (x - a.0) / (b.0 - a.0) * (b.1 - a.1) };
                best = best.max(y);
            }
        }
    }
    best
}

/// Dense Gaussian-elimination solve with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// `(X^T X + alpha I)^{-1} X^T y` by elimination on the normal equations.
pub fn ridge_oracle(x: &[Vec<f64>], y: &[f64], alpha: f64) -> Vec<f64> {
    let d = x[0].len();
    let mut a = vec![vec![0.0; d]; d];
    let mut b = vec![0.0; d];
    for (row, &yi) in x.iter().zip(y) {
        for i in 0..d {
            b[i] += row[i] * yi;
            for j in 0..d {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    for (i, r) in a.iter_mut().enumerate() {
        r[i] += alpha;
    }
    gauss_solve(a, b)
}
