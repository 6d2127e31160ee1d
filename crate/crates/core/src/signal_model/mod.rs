//! Score distributions `f_{e,s}` / `F_{e,s}` per effort and group, their
//! likelihood ratio and ROC curves.

mod distribution;
mod fit;
mod roc;

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use distribution::{Distribution1D, Tabulated};
pub use fit::{fit_empirical, silverman_bandwidth, ScoredSample, DEFAULT_FIT_GRID};
pub use roc::{OperatingPoint, RocCurve};
pub(crate) use roc::cross;

use crate::error::{Error, Result};
use crate::scalar::{linspace, Real};

/// Applicant effort: qualified (`q`, invested) or unqualified (`u`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Effort {
    #[serde(rename = "q")]
    Qualified,
    #[serde(rename = "u")]
    Unqualified,
}

impl Effort {
    pub const ALL: [Effort; 2] = [Effort::Qualified, Effort::Unqualified];

    pub fn index(self) -> usize {
        match self {
            Effort::Qualified => 0,
            Effort::Unqualified => 1,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "q" | "Q" | "1" => Ok(Effort::Qualified),
            "u" | "U" | "0" => Ok(Effort::Unqualified),
            other => Err(Error::Config(format!("unknown effort key {other:?} (expected q or u)"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Effort::Qualified => "q",
            Effort::Unqualified => "u",
        }
    }
}

impl fmt::Display for Effort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sensitive attribute `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Group {
    Zero,
    One,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::Zero, Group::One];

    pub fn index(self) -> usize {
        match self {
            Group::Zero => 0,
            Group::One => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Group::Zero => Group::One,
            Group::One => Group::Zero,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(Group::Zero),
            "1" => Ok(Group::One),
            other => Err(Error::Config(format!("unknown group key {other:?} (expected 0 or 1)"))),
        }
    }
}

impl TryFrom<u8> for Group {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Group::Zero),
            1 => Ok(Group::One),
            _ => Err(Error::Config(format!("unknown group key {v}"))),
        }
    }
}

impl From<Group> for u8 {
    fn from(g: Group) -> u8 {
        g.index() as u8
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Uniform evaluation grid `[min, max]` with `n` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub min: T,
    pub max: T,
    pub n: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(min: T, max: T, n: usize) -> Result<Self> {
        if n < 2 || !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::Config(format!("invalid grid [{min}, {max}] with {n} points")));
        }
        Ok(Self { min, max, n })
    }

    pub fn points(&self) -> Vec<T> {
        linspace(self.min, self.max, self.n)
    }

    pub fn step(&self) -> T {
        (self.max - self.min) / T::from_usize_lossy(self.n - 1)
    }

    pub fn with_len(&self, n: usize) -> Self {
        Self { n, ..*self }
    }
}

/// Density and CDF value at one score.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation<T> {
    pub pdf: T,
    pub cdf: T,
}

/// Result of a monotone-likelihood-ratio scan.
#[derive(Clone, Debug, PartialEq)]
pub struct MlrpReport<T> {
    pub holds: bool,
    /// Consecutive grid pairs `(a, b)` where `f_q/f_u` failed to increase.
    pub violations: Vec<(T, T)>,
}

/// Score model: one [`Distribution1D`] per (effort, group) plus the grid the
/// model is evaluated on.
#[derive(Clone, Debug, Serialize)]
pub struct SignalModel<T: Real> {
    /// Indexed `[effort][group]`.
    cells: [[Distribution1D<T>; 2]; 2],
    grid: GridSpec<T>,
}

pub const DEFAULT_GRID_POINTS: usize = 2001;

impl<T: Real> SignalModel<T> {
    pub fn new(cells: [[Distribution1D<T>; 2]; 2], grid: GridSpec<T>) -> Self {
        Self { cells, grid }
    }

    /// Builds a model from `(mean, sd)` for each cell, indexed `[effort][group]`.
    /// The grid spans eight standard deviations around every cell.
    pub fn gaussian(params: [[(T, T); 2]; 2]) -> Result<Self> {
        let cell = |e: usize, s: usize| Distribution1D::gaussian(params[e][s].0, params[e][s].1);
        let cells = [[cell(0, 0)?, cell(0, 1)?], [cell(1, 0)?, cell(1, 1)?]];
        let grid = Self::covering_grid(&cells, DEFAULT_GRID_POINTS)?;
        Ok(Self { cells, grid })
    }

    /// Same signal for both groups: `f_q = N(mean_q, sd_q)`, `f_u = N(mean_u, sd_u)`.
    pub fn symmetric_gaussian(mean_q: T, sd_q: T, mean_u: T, sd_u: T) -> Result<Self> {
        Self::gaussian([[(mean_q, sd_q), (mean_q, sd_q)], [(mean_u, sd_u), (mean_u, sd_u)]])
    }

    fn covering_grid(cells: &[[Distribution1D<T>; 2]; 2], n: usize) -> Result<GridSpec<T>> {
        let (lo, hi) = cells
            .iter()
            .flatten()
            .map(Distribution1D::effective_support)
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)));
        GridSpec::new(lo, hi, n)
    }

    pub fn cell(&self, effort: Effort, group: Group) -> &Distribution1D<T> {
        &self.cells[effort.index()][group.index()]
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn with_grid(mut self, grid: GridSpec<T>) -> Self {
        self.grid = grid;
        self
    }

    pub fn eval(&self, effort: Effort, group: Group, theta: T) -> Result<Evaluation<T>> {
        if !theta.is_finite() {
            return Err(Error::Config(format!("score must be finite, got {theta}")));
        }
        let d = self.cell(effort, group);
        Ok(Evaluation { pdf: d.pdf(theta), cdf: d.cdf(theta) })
    }

    pub fn pdf(&self, effort: Effort, group: Group, theta: T) -> T {
        self.cell(effort, group).pdf(theta)
    }

    pub fn cdf(&self, effort: Effort, group: Group, theta: T) -> T {
        self.cell(effort, group).cdf(theta)
    }

    /// `P[score > theta | e, s]`.
    pub fn sf(&self, effort: Effort, group: Group, theta: T) -> T {
        self.cell(effort, group).sf(theta)
    }

    /// Rates of the rule "accept iff score > theta" for group `s`.
    pub fn rates(&self, group: Group, theta: T) -> OperatingPoint<T> {
        OperatingPoint::clamped(
            self.sf(Effort::Unqualified, group, theta),
            self.sf(Effort::Qualified, group, theta),
        )
    }

    /// `phi_s(theta) = f_{u,s}(theta) / f_{q,s}(theta)`; `+inf` where only
    /// `f_q` vanishes.
    pub fn likelihood_ratio(&self, group: Group, theta: T) -> Result<T> {
        ratio(
            self.pdf(Effort::Unqualified, group, theta),
            self.pdf(Effort::Qualified, group, theta),
            theta,
        )
    }

    /// Checks that `f_q/f_u` strictly increases across consecutive grid points.
    /// Points outside the joint support are skipped. A step counts as an
    /// increase only if it exceeds `1e-9` relative to the previous value.
    pub fn check_mlrp(&self, group: Group, grid: &[T]) -> MlrpReport<T> {
        let rel = T::lit(1e-9);
        let mut violations = Vec::new();
        let mut prev: Option<(T, T)> = None;
        for &theta in grid {
            let fq = self.pdf(Effort::Qualified, group, theta);
            let fu = self.pdf(Effort::Unqualified, group, theta);
            if !(fq > T::zero() && fu > T::zero()) {
                continue;
            }
            let r = fq / fu;
            if let Some((t0, r0)) = prev {
                if !(r - r0 > rel * r0.abs()) {
                    violations.push((t0, theta));
                }
            }
            prev = Some((theta, r));
        }
        MlrpReport { holds: violations.is_empty() && prev.is_some(), violations }
    }

    /// ROC curve of group `s` over `thresholds` (descending), anchored at
    /// (0,0) and (1,1).
    pub fn roc(&self, group: Group, thresholds: &[T]) -> RocCurve<T> {
        let rates = thresholds.iter().map(|&t| (Some(t), self.rates(group, t))).collect();
        RocCurve::from_rates(rates, true)
    }

    /// ROC over this model's own grid.
    pub fn roc_on_grid(&self, group: Group) -> RocCurve<T> {
        let mut t = self.grid.points();
        t.reverse();
        self.roc(group, &t)
    }

    /// CSV with columns `theta, pdf_q0, pdf_u0, pdf_q1, pdf_u1` on the model grid.
    pub fn write_tabulated_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["theta", "pdf_q0", "pdf_u0", "pdf_q1", "pdf_u1"])?;
        for theta in self.grid.points() {
            let mut row = vec![theta.to_string()];
            for g in Group::ALL {
                for e in Effort::ALL {
                    row.push(self.pdf(e, g, theta).to_string());
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the layout produced by [`SignalModel::write_tabulated_csv`].
    pub fn read_tabulated_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
        if header != ["theta", "pdf_q0", "pdf_u0", "pdf_q1", "pdf_u1"] {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header theta,pdf_q0,pdf_u0,pdf_q1,pdf_u1, got {}", header.join(",")),
            });
        }
        let mut grid = Vec::new();
        let mut cols: [Vec<T>; 4] = Default::default();
        for rec in r.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let parse = |i: usize| -> Result<T> {
                rec.get(i)
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .map(T::lit)
                    .ok_or_else(|| Error::Parse { line, message: format!("bad number in column {}", i + 1) })
            };
            grid.push(parse(0)?);
            for (k, col) in cols.iter_mut().enumerate() {
                col.push(parse(k + 1)?);
            }
        }
        let [q0, u0, q1, u1] = cols;
        let tab = |pdf: Vec<T>| Tabulated::from_pdf(grid.clone(), pdf).map(Distribution1D::Tabulated);
        let cells = [[tab(q0)?, tab(q1)?], [tab(u0)?, tab(u1)?]];
        let spec = GridSpec::new(grid[0], grid[grid.len() - 1], grid.len())?;
        Ok(Self { cells, grid: spec })
    }
}

pub(crate) fn ratio<T: Real>(num: T, den: T, theta: T) -> Result<T> {
    if den > T::zero() {
        Ok(num / den)
    } else if num > T::zero() {
        Ok(T::infinity())
    } else {
        Err(Error::UndefinedRatio { theta: theta.to_f64_lossy() })
    }
}
