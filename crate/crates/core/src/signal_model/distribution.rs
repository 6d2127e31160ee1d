use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Score density of a single (effort, group) cell.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution1D<T: Real> {
    Gaussian { mean: T, sd: T },
    /// Kernel-smoothed sample. `table` caches the smoothed density on the fit grid;
    /// evaluation goes through it.
    Empirical {
        samples: Vec<T>,
        bandwidth: T,
        #[serde(skip)]
        table: Tabulated<T>,
    },
    Tabulated(Tabulated<T>),
}

impl<T: Real> Distribution1D<T> {
    pub fn gaussian(mean: T, sd: T) -> Result<Self> {
        if !(sd > T::zero()) || !mean.is_finite() || !sd.is_finite() {
            return Err(Error::Config(format!(
                "gaussian requires finite mean and sd > 0 (mean = {mean}, sd = {sd})"
            )));
        }
        Ok(Self::Gaussian { mean, sd })
    }

    pub fn pdf(&self, theta: T) -> T {
        match self {
            Self::Gaussian { mean, sd } => ((theta - *mean) / *sd).std_normal_pdf() / *sd,
            Self::Empirical { table, .. } | Self::Tabulated(table) => table.pdf(theta),
        }
    }

    pub fn cdf(&self, theta: T) -> T {
        match self {
            Self::Gaussian { mean, sd } => ((theta - *mean) / *sd).std_normal_cdf(),
            Self::Empirical { table, .. } | Self::Tabulated(table) => table.cdf(theta),
        }
    }

    /// `1 - cdf`, accurate in the upper tail.
    pub fn sf(&self, theta: T) -> T {
        match self {
            Self::Gaussian { mean, sd } => (-(theta - *mean) / *sd).std_normal_cdf(),
            Self::Empirical { table, .. } | Self::Tabulated(table) => T::one() - table.cdf(theta),
        }
    }

    /// Interval outside of which the mass is negligible (< 1e-6).
    pub fn effective_support(&self) -> (T, T) {
        match self {
            Self::Gaussian { mean, sd } => {
                let k = T::lit(8.0);
                (*mean - k * *sd, *mean + k * *sd)
            }
            Self::Empirical { table, .. } | Self::Tabulated(table) => table.range(),
        }
    }
}

/// Piecewise-linear density with a CDF tabulated on the same nodes.
///
/// Between nodes the pdf and the CDF are both interpolated linearly. Outside
/// the grid the pdf is zero and the CDF is 0 or 1.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Tabulated<T: Real> {
    grid: Vec<T>,
    pdf: Vec<T>,
    cdf: Vec<T>,
}

impl<T: Real> Tabulated<T> {
    /// Normalizes `pdf` to unit mass (trapezoid rule) and cumulates it into a CDF.
    pub fn from_pdf(grid: Vec<T>, pdf: Vec<T>) -> Result<Self> {
        check_grid(&grid, pdf.len())?;
        if pdf.iter().any(|p| !(*p >= T::zero()) || !p.is_finite()) {
            return Err(Error::Config("tabulated pdf must be finite and nonnegative".into()));
        }
        let mut cdf = Vec::with_capacity(grid.len());
        let mut acc = T::zero();
        cdf.push(acc);
        for i in 1..grid.len() {
            acc = acc + T::lit(0.5) * (pdf[i] + pdf[i - 1]) * (grid[i] - grid[i - 1]);
            cdf.push(acc);
        }
        if !(acc > T::zero()) {
            return Err(Error::Estimation("tabulated density has zero mass on its grid".into()));
        }
        let pdf = pdf.into_iter().map(|p| p / acc).collect();
        let mut cdf: Vec<T> = cdf.into_iter().map(|c| c / acc).collect();
        *cdf.last_mut().expect("nonempty grid") = T::one();
        Ok(Self { grid, pdf, cdf })
    }

    /// Builds a table from explicit pdf and CDF node values. The CDF must be
    /// nondecreasing from 0 to 1; it is not re-derived from the pdf.
    pub fn from_parts(grid: Vec<T>, pdf: Vec<T>, cdf: Vec<T>) -> Result<Self> {
        check_grid(&grid, pdf.len())?;
        if cdf.len() != grid.len() {
            return Err(Error::Config("cdf and grid lengths differ".into()));
        }
        let eps = T::lit(1e-9);
        let monotone = cdf.windows(2).all(|w| w[1] >= w[0]);
        let first = cdf[0];
        let last = cdf[cdf.len() - 1];
        if !monotone || first.abs() > eps || (last - T::one()).abs() > eps {
            return Err(Error::Config("tabulated cdf must rise monotonically from 0 to 1".into()));
        }
        if pdf.iter().any(|p| !(*p >= T::zero())) {
            return Err(Error::Config("tabulated pdf must be nonnegative".into()));
        }
        Ok(Self { grid, pdf, cdf })
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn pdf_values(&self) -> &[T] {
        &self.pdf
    }

    pub fn cdf_values(&self) -> &[T] {
        &self.cdf
    }

    pub fn range(&self) -> (T, T) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    fn locate(&self, theta: T) -> Option<(usize, T)> {
        let (lo, hi) = self.range();
        if theta.is_nan() || theta < lo || theta > hi {
            return None;
        }
        let i = self.grid.partition_point(|g| *g <= theta).saturating_sub(1);
        let i = i.min(self.grid.len() - 2);
        let w = (theta - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
        Some((i, w))
    }

    pub fn pdf(&self, theta: T) -> T {
        match self.locate(theta) {
            Some((i, w)) => self.pdf[i] + w * (self.pdf[i + 1] - self.pdf[i]),
            None => T::zero(),
        }
    }

    pub fn cdf(&self, theta: T) -> T {
        match self.locate(theta) {
            Some((i, w)) => self.cdf[i] + w * (self.cdf[i + 1] - self.cdf[i]),
            None if theta < self.grid[0] => T::zero(),
            None => T::one(),
        }
    }
}

fn check_grid<T: Real>(grid: &[T], values: usize) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::Config("tabulated grid needs at least 2 nodes".into()));
    }
    if grid.len() != values {
        return Err(Error::Config(format!(
            "grid has {} nodes but {} pdf values were given",
            grid.len(),
            values
        )));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("tabulated grid must be strictly increasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::linspace;

    #[test]
    fn gaussian_rejects_bad_sd() {
        assert!(Distribution1D::gaussian(0.0f64, 0.0).is_err());
        assert!(Distribution1D::gaussian(0.0f64, -1.0).is_err());
        assert!(Distribution1D::gaussian(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn uniform_table_has_linear_cdf() {
        let grid = linspace(0.0f64, 1.0, 11);
        let t = Tabulated::from_pdf(grid, vec![1.0; 11]).unwrap();
        assert!((t.cdf(0.25) - 0.25).abs() < 1e-12);
        assert_eq!(t.cdf(-1.0), 0.0);
        assert_eq!(t.cdf(2.0), 1.0);
        assert_eq!(t.pdf(2.0), 0.0);
        assert!((t.pdf(0.37) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn from_pdf_normalizes() {
        let grid = linspace(0.0f64, 2.0, 5);
        let t = Tabulated::from_pdf(grid, vec![3.0; 5]).unwrap();
        assert!((t.pdf(1.0) - 0.5).abs() < 1e-12);
        assert_eq!(t.cdf(2.0), 1.0);
    }

    #[test]
    fn table_validation() {
        assert!(Tabulated::from_pdf(vec![0.0f64], vec![1.0]).is_err());
        assert!(Tabulated::from_pdf(vec![0.0f64, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Tabulated::from_pdf(vec![0.0f64, 1.0], vec![-1.0, 1.0]).is_err());
        assert!(Tabulated::from_pdf(vec![0.0f64, 1.0], vec![0.0, 0.0]).is_err());
        assert!(Tabulated::from_parts(vec![0.0f64, 1.0], vec![1.0, 1.0], vec![0.0, 0.5]).is_err());
        assert!(Tabulated::from_parts(vec![0.0f64, 1.0], vec![1.0, 1.0], vec![0.0, 1.0]).is_ok());
    }
}
