use serde::{Deserialize, Serialize};

use super::{Distribution1D, Effort, GridSpec, Group, SignalModel, Tabulated};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One scored observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample<T> {
    pub group: Group,
    pub effort: Effort,
    pub theta: T,
}

pub const DEFAULT_FIT_GRID: usize = 2001;

/// Kernel cut-off in bandwidths.
const KERNEL_REACH: f64 = 8.0;

/// Silverman's rule of thumb `1.06 * sd * n^(-1/5)`. Falls back to a small
/// positive width when all samples coincide.
pub fn silverman_bandwidth<T: Real>(samples: &[T]) -> T {
    let n = T::from_usize_lossy(samples.len());
    let mean = samples.iter().fold(T::zero(), |a, &x| a + x) / n;
    let var = samples.iter().fold(T::zero(), |a, &x| a + (x - mean) * (x - mean))
        / T::from_usize_lossy(samples.len().saturating_sub(1).max(1));
    let h = T::lit(1.06) * var.sqrt() * n.powf(T::lit(-0.2));
    if h > T::zero() {
        h
    } else {
        T::lit(1e-3) * mean.abs().max(T::one())
    }
}

/// Gaussian-kernel density estimate of every (effort, group) cell on a shared
/// grid, renormalized to unit mass with the CDF cumulated from it.
///
/// `bandwidth = None` picks Silverman's rule per cell. `grid = None` spans the
/// samples padded by three (largest) bandwidths with 2001 nodes.
pub fn fit_empirical<T: Real>(
    samples: &[ScoredSample<T>],
    bandwidth: Option<T>,
    grid: Option<GridSpec<T>>,
) -> Result<SignalModel<T>> {
    if let Some(h) = bandwidth {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::Config(format!("bandwidth must be positive, got {h}")));
        }
    }
    let mut by_cell: [[Vec<T>; 2]; 2] = Default::default();
    for s in samples {
        if !s.theta.is_finite() {
            return Err(Error::Estimation(format!("non-finite score in cell (e={}, s={})", s.effort, s.group)));
        }
        by_cell[s.effort.index()][s.group.index()].push(s.theta);
    }
    for e in Effort::ALL {
        for g in Group::ALL {
            let n = by_cell[e.index()][g.index()].len();
            if n < 2 {
                return Err(Error::Estimation(format!(
                    "cell (e={e}, s={g}) has {n} samples; at least 2 are required"
                )));
            }
        }
    }
    for cell in by_cell.iter_mut().flatten() {
        cell.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    }
    let widths: [[T; 2]; 2] =
        std::array::from_fn(|e| std::array::from_fn(|g| bandwidth.unwrap_or_else(|| silverman_bandwidth(&by_cell[e][g]))));

    let grid = match grid {
        Some(g) => g,
        None => {
            let h_max = widths.iter().flatten().fold(T::zero(), |a, &h| a.max(h));
            let lo = by_cell.iter().flatten().map(|c| c[0]).fold(T::infinity(), T::min);
            let hi = by_cell.iter().flatten().map(|c| c[c.len() - 1]).fold(T::neg_infinity(), T::max);
            let pad = T::lit(3.0) * h_max;
            GridSpec::new(lo - pad, hi + pad, DEFAULT_FIT_GRID)?
        }
    };
    let nodes = grid.points();

    let mut cells: Vec<Distribution1D<T>> = Vec::with_capacity(4);
    for e in Effort::ALL {
        for g in Group::ALL {
            let data = std::mem::take(&mut by_cell[e.index()][g.index()]);
            let h = widths[e.index()][g.index()];
            let pdf = kde_on_grid(&data, h, &nodes);
            let table = Tabulated::from_pdf(nodes.clone(), pdf).map_err(|_| {
                Error::Estimation(format!("cell (e={e}, s={g}) has no mass on the evaluation grid"))
            })?;
            cells.push(Distribution1D::Empirical { samples: data, bandwidth: h, table });
        }
    }
    let mut it = cells.into_iter();
    let mut next = || it.next().expect("four cells");
    let cells = [[next(), next()], [next(), next()]];
    Ok(SignalModel::new(cells, grid))
}

/// Unnormalized-safe KDE: `(1/(n h)) sum K((x - x_i)/h)` with samples sorted.
fn kde_on_grid<T: Real>(sorted: &[T], h: T, nodes: &[T]) -> Vec<T> {
    let reach = T::lit(KERNEL_REACH) * h;
    let norm = T::one() / (T::from_usize_lossy(sorted.len()) * h);
    nodes
        .iter()
        .map(|&x| {
            let lo = sorted.partition_point(|&v| v < x - reach);
            let hi = sorted.partition_point(|&v| v <= x + reach);
            sorted[lo..hi]
                .iter()
                .fold(T::zero(), |acc, &v| acc + ((x - v) / h).std_normal_pdf())
                * norm
        })
        .collect()
}
