//! Closed-form ridge regression scorer.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, Payload, SampleRecord, Schema};
use crate::error::{Error, Result};
use crate::signal_model::Effort;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScorerSpec {
    pub penalties: Vec<f64>,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for ScorerSpec {
    fn default() -> Self {
        Self { penalties: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0], train_fraction: 2.0 / 3.0, seed: 0 }
    }
}

impl ScorerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.penalties.is_empty() || self.penalties.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::Config("ridge penalties must be a nonempty list of positive numbers".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!("train fraction {} outside (0, 1)", self.train_fraction)));
        }
        Ok(())
    }
}

/// `w = (X'X + alpha I)^-1 X'y`, no intercept.
pub fn ridge_weights(x: &DMatrix<f64>, y: &DVector<f64>, alpha: f64) -> Result<DVector<f64>> {
    let chol = normal_matrix(x, alpha)?;
    Ok(chol.solve(&(x.transpose() * y)))
}

fn normal_matrix(x: &DMatrix<f64>, alpha: f64) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let d = x.ncols();
    let a = x.transpose() * x + DMatrix::identity(d, d) * alpha;
    a.cholesky()
        .ok_or_else(|| Error::Numeric(format!("ridge system is singular at penalty {alpha}")))
}

/// Mean squared leave-one-out residual, `e_i / (1 - h_ii)`, in closed form.
fn loo_error(x: &DMatrix<f64>, y: &DVector<f64>, alpha: f64) -> Result<f64> {
    let chol = normal_matrix(x, alpha)?;
    let w = chol.solve(&(x.transpose() * y));
    let resid = y - x * &w;
    let proj = chol.solve(&x.transpose());
    let mut total = 0.0;
    for i in 0..x.nrows() {
        let h = x.row(i).dot(&proj.column(i).transpose());
        let denom = 1.0 - h;
        if denom <= 1e-12 {
            return Ok(f64::INFINITY);
        }
        total += (resid[i] / denom).powi(2);
    }
    Ok(total / x.nrows() as f64)
}

/// Result of [`ridge_score`].
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeFit {
    pub weights: Vec<f64>,
    pub alpha: f64,
    /// Row indices of the training split, ascending.
    pub train: Vec<usize>,
    /// Row indices of the held-out split, ascending.
    pub test: Vec<usize>,
    /// Held-out rows with `theta = x . w`, in file order.
    pub scored: Dataset,
}

/// Seeded train/held-out split, ridge fit on the training rows with the
/// penalty of smallest leave-one-out error (first on ties), scores for the
/// held-out rows.
pub fn ridge_score(dataset: &Dataset, spec: &ScorerSpec) -> Result<RidgeFit> {
    spec.validate()?;
    let Schema::Featured { dim } = dataset.schema() else {
        return Err(Error::Config("ridge scoring needs a featured dataset".into()));
    };
    let n = dataset.len();
    let n_train = ((n as f64) * spec.train_fraction).round() as usize;
    if n_train < dim + 2 || n_train >= n {
        return Err(Error::Estimation(format!(
            "{n} rows give {n_train} training rows; need at least {} and one held-out row",
            dim + 2
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();

    let features = |i: usize| match &dataset.records()[i].payload {
        Payload::Features(x) => x.as_slice(),
        Payload::Score(_) => unreachable!("schema checked"),
    };
    let x = DMatrix::from_fn(train.len(), dim, |r, c| features(train[r])[c]);
    let y = DVector::from_fn(train.len(), |r, _| {
        if dataset.records()[train[r]].effort == Effort::Qualified {
            1.0
        } else {
            0.0
        }
    });

    let mut best: Option<(f64, f64)> = None;
    for &alpha in &spec.penalties {
        let err = loo_error(&x, &y, alpha)?;
        if best.is_none_or(|(_, e)| err < e) {
            best = Some((alpha, err));
        }
    }
    let (alpha, _) = best.expect("penalties nonempty");
    let w = ridge_weights(&x, &y, alpha)?;
    let weights: Vec<f64> = w.iter().copied().collect();

    let records = test
        .iter()
        .map(|&i| {
            let r = &dataset.records()[i];
            let theta: f64 = features(i).iter().zip(&weights).map(|(a, b)| a * b).sum();
            SampleRecord { group: r.group, effort: r.effort, payload: Payload::Score(theta) }
        })
        .collect();
    let scored = Dataset::new(Schema::Scored, records)?;
    Ok(RidgeFit { weights, alpha, train, test, scored })
}
