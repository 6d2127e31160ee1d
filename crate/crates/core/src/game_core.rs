//! Economic constants and both sides' best responses: the firm-response (FR)
//! and applicant-response (AR) curves.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_model::{ratio, Effort, Group, SignalModel};
use crate::scalar::{unit, Real};

/// Economic constants of the game.
///
/// `v_u` is the magnitude of the firm's loss on an accepted unqualified
/// applicant; the firm earns `-v_u` in that case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameParams<T> {
    pub v_q: T,
    pub v_u: T,
    pub omega: T,
    pub lambda1: T,
    pub cost_lo: T,
    pub cost_hi: T,
}

impl<T: Real> GameParams<T> {
    pub fn new(v_q: T, v_u: T, omega: T, lambda1: T, cost_lo: T, cost_hi: T) -> Result<Self> {
        let p = Self { v_q, v_u, omega, lambda1, cost_lo, cost_hi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: T| x > T::zero() && x.is_finite();
        if !pos(self.v_q) || !pos(self.v_u) || !pos(self.omega) {
            return Err(Error::Config("v_q, v_u and omega must be positive".into()));
        }
        if !(self.lambda1 >= T::zero() && self.lambda1 <= T::one()) {
            return Err(Error::Config(format!("lambda1 = {} outside [0, 1]", self.lambda1)));
        }
        if !(self.cost_lo >= T::zero()) || !(self.cost_hi > self.cost_lo) || !self.cost_hi.is_finite() {
            return Err(Error::Config(format!(
                "cost support [{}, {}] must satisfy 0 <= lo < hi",
                self.cost_lo, self.cost_hi
            )));
        }
        Ok(())
    }

    /// Unit economics: `v_q = v_u = omega = 1`, equal groups, cost `U[0, 0.2]`.
    pub fn unit() -> Self {
        Self {
            v_q: T::one(),
            v_u: T::one(),
            omega: T::one(),
            lambda1: T::lit(0.5),
            cost_lo: T::zero(),
            cost_hi: T::lit(0.2),
        }
    }

    /// `r = v_q / v_u`.
    pub fn r(&self) -> T {
        self.v_q / self.v_u
    }

    pub fn lambda0(&self) -> T {
        T::one() - self.lambda1
    }

    pub fn lambda(&self, group: Group) -> T {
        match group {
            Group::Zero => self.lambda0(),
            Group::One => self.lambda1,
        }
    }

    pub fn cost(&self) -> CostModel<T> {
        CostModel { lo: self.cost_lo, hi: self.cost_hi }
    }
}

/// Investment cost, uniform on `[lo, hi]` and shared by both groups.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostModel<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> CostModel<T> {
    /// `G(c)`, clamped to `[0, 1]`.
    pub fn cdf(&self, c: T) -> T {
        unit((c - self.lo) / (self.hi - self.lo))
    }
}

/// Expected reward gain from investing at threshold `theta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Incentive<T> {
    pub value: T,
    /// Set when `F_u < F_q` at this threshold (CDFs cross, incentive negative).
    pub crossed: bool,
}

/// `omega * (F_u(theta) - F_q(theta))`.
pub fn incentive<T: Real>(model: &SignalModel<T>, params: &GameParams<T>, group: Group, theta: T) -> Incentive<T> {
    let value = params.omega
        * (model.cdf(Effort::Unqualified, group, theta) - model.cdf(Effort::Qualified, group, theta));
    Incentive { value, crossed: value < T::zero() }
}

/// Share of applicants whose cost is below the incentive: `G(incentive)`.
pub fn applicant_response<T: Real>(params: &GameParams<T>, incentive: T) -> T {
    params.cost().cdf(incentive)
}

/// Belief `pi` for which `theta` is the firm's optimal threshold:
/// `phi / (r + phi)`.
pub fn firm_response<T: Real>(model: &SignalModel<T>, params: &GameParams<T>, group: Group, theta: T) -> Result<T> {
    Ok(belief_from_ratio(model.likelihood_ratio(group, theta)?, params.r()))
}

pub(crate) fn belief_from_ratio<T: Real>(phi: T, r: T) -> T {
    if phi.is_infinite() {
        T::one()
    } else {
        phi / (r + phi)
    }
}

/// Likelihood ratio of the group mixture `lambda_0 f_{.,0} + lambda_1 f_{.,1}`.
pub fn pooled_likelihood_ratio<T: Real>(model: &SignalModel<T>, params: &GameParams<T>, theta: T) -> Result<T> {
    let mix = |e: Effort| {
        params.lambda0() * model.pdf(e, Group::Zero, theta) + params.lambda1 * model.pdf(e, Group::One, theta)
    };
    ratio(mix(Effort::Unqualified), mix(Effort::Qualified), theta)
}

/// FR and AR curves of one group sampled on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct ResponseCurveTable<T: Real> {
    pub group: Group,
    pub theta: Vec<T>,
    pub fr: Vec<T>,
    pub ar: Vec<T>,
    /// Grid point maximizing AR (lowest on ties).
    pub ar_mode: T,
}

pub fn response_curves<T: Real>(
    model: &SignalModel<T>,
    params: &GameParams<T>,
    group: Group,
    grid: &[T],
) -> Result<ResponseCurveTable<T>> {
    if grid.is_empty() {
        return Err(Error::Config("response curves need a nonempty grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("response-curve grid must be sorted ascending".into()));
    }
    let fr = grid
        .iter()
        .map(|&t| firm_response(model, params, group, t))
        .collect::<Result<Vec<_>>>()?;
    let ar: Vec<T> = grid
        .iter()
        .map(|&t| applicant_response(params, incentive(model, params, group, t).value))
        .collect();
    let mode = ar
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > ar[best] { i } else { best });
    Ok(ResponseCurveTable { group, theta: grid.to_vec(), fr, ar, ar_mode: grid[mode] })
}

impl<T: Real> ResponseCurveTable<T> {
    /// CSV with columns `theta, fr, ar`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["theta", "fr", "ar"])?;
        for i in 0..self.theta.len() {
            w.write_record([self.theta[i].to_string(), self.fr[i].to_string(), self.ar[i].to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
