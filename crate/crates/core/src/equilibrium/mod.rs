//! Equilibria of the game under each policy, found by scanning the best
//! responses on a discretized score grid.

mod constrained;
mod scan;
mod threshold;

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use constrained::{solve_dp, solve_eopp};
pub use threshold::{solve_cb, solve_eo, solve_lf};

use crate::eo_derivation::{derived_signal_model, feasible_region, shared_frontier};
use crate::error::{Error, Result};
use crate::game_core::{applicant_response, belief_from_ratio, incentive, pooled_likelihood_ratio, GameParams};
use crate::scalar::{linspace, Real};
use crate::signal_model::{Effort, Group, OperatingPoint, RocCurve, SignalModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Laissez-faire: group-specific thresholds, no constraint.
    Lf,
    /// Color-blind: one threshold for the pooled population.
    Cb,
    /// Demographic parity: equal acceptance rates.
    Dp,
    /// Equalized odds: shared (fp, tp) through a derived predictor.
    Eo,
    /// Equalized opportunity: shared tp only.
    Eopp,
}

impl Policy {
    pub const ALL: [Policy; 5] = [Policy::Lf, Policy::Cb, Policy::Dp, Policy::Eo, Policy::Eopp];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Lf => "lf",
            Policy::Cb => "cb",
            Policy::Dp => "dp",
            Policy::Eo => "eo",
            Policy::Eopp => "eopp",
        }
    }

    /// Policies whose thresholds are pseudo-scores `1 - fp` of a derived predictor.
    pub fn uses_derived_predictor(self) -> bool {
        matches!(self, Policy::Eo | Policy::Eopp)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown policy {s:?} (expected lf, cb, dp, eo or eopp)")))
    }
}

/// Local crossing direction of AR - FR; diagnostic only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Boundary,
}

/// Equilibrium quadruple with its residual diagnostics.
///
/// For `Eo` and `Eopp` the thresholds are pseudo-scores `1 - fp` of the
/// derived predictor rather than scores of the original signal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equilibrium<T: Real> {
    pub policy: Policy,
    pub theta0: T,
    pub theta1: T,
    pub pi0: T,
    pub pi1: T,
    pub residuals: BTreeMap<String, T>,
    pub stability: Stability,
    /// Firm's (fp, tp) in each group at this equilibrium.
    pub operating_points: [OperatingPoint<T>; 2],
}

impl<T: Real> Equilibrium<T> {
    pub fn theta(&self, g: Group) -> T {
        match g {
            Group::Zero => self.theta0,
            Group::One => self.theta1,
        }
    }

    pub fn pi(&self, g: Group) -> T {
        match g {
            Group::Zero => self.pi0,
            Group::One => self.pi1,
        }
    }

    pub fn disparity(&self) -> T {
        (self.pi0 - self.pi1).abs()
    }

    pub fn max_residual(&self) -> T {
        self.residuals.values().fold(T::zero(), |a, &r| a.max(r))
    }

    fn order(&self, other: &Self) -> std::cmp::Ordering {
        let key = |e: &Self| [-e.pi0, -e.pi1, e.theta0, e.theta1];
        let (a, b) = (key(self), key(other));
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Solver knobs. Damping, iteration cap and start count apply to the
/// constrained (DP, EOPP) fixed-point solver only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig<T> {
    pub grid_size: usize,
    /// Residual tolerance in belief units.
    pub tolerance: T,
    /// Root refinement width in score units.
    pub root_tolerance: T,
    /// Deduplication radius in grid steps.
    pub dedup_steps: T,
    pub damping: T,
    pub max_iterations: usize,
    pub starts: usize,
    pub seed: u64,
    /// Sample count of the equalized-odds frontier and of the tp sweep.
    pub frontier_points: usize,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            grid_size: 2001,
            tolerance: T::lit(1e-3),
            root_tolerance: T::lit(1e-6),
            dedup_steps: T::lit(2.0),
            damping: T::lit(0.5),
            max_iterations: 500,
            starts: 32,
            seed: 0,
            frontier_points: 1001,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: T| x > T::zero() && x.is_finite();
        if self.grid_size < 3 || self.frontier_points < 3 {
            return Err(Error::Config("grid_size and frontier_points must be at least 3".into()));
        }
        if !pos(self.tolerance) || !pos(self.root_tolerance) || !pos(self.dedup_steps) {
            return Err(Error::Config("tolerances and dedup radius must be positive".into()));
        }
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(Error::Config(format!("damping {} outside (0, 1]", self.damping)));
        }
        if self.max_iterations == 0 || self.starts == 0 {
            return Err(Error::Config("max_iterations and starts must be positive".into()));
        }
        Ok(())
    }
}

/// Output of one solver run.
#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumSet<T: Real> {
    pub policy: Policy,
    pub equilibria: Vec<Equilibrium<T>>,
    pub diagnostics: Vec<String>,
}

/// Residual report from [`verify`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport<T> {
    pub residuals: BTreeMap<String, T>,
    pub tolerance: T,
    pub pass: bool,
}

pub fn solve<T: Real>(
    policy: Policy,
    model: &SignalModel<T>,
    params: &GameParams<T>,
    cfg: &SolverConfig<T>,
) -> Result<EquilibriumSet<T>> {
    match policy {
        Policy::Lf => solve_lf(model, params, cfg),
        Policy::Cb => solve_cb(model, params, cfg),
        Policy::Dp => solve_dp(model, params, cfg),
        Policy::Eo => solve_eo(model, params, cfg),
        Policy::Eopp => solve_eopp(model, params, cfg),
    }
}

/// Recomputes every defining equation of the candidate's policy.
pub fn verify<T: Real>(
    model: &SignalModel<T>,
    params: &GameParams<T>,
    candidate: &Equilibrium<T>,
    cfg: &SolverConfig<T>,
) -> Result<ResidualReport<T>> {
    let ctx = Context::new(model, params, cfg)?;
    let residuals = ctx.residuals(candidate)?;
    let pass = residuals.values().all(|r| *r <= cfg.tolerance);
    Ok(ResidualReport { residuals, tolerance: cfg.tolerance, pass })
}

/// Pseudo-signal built from the equalized-odds frontier.
pub(crate) struct EoPseudo<T: Real> {
    pub model: SignalModel<T>,
}

/// Shared precomputation for one (model, params, cfg) triple.
pub(crate) struct Context<'a, T: Real> {
    pub model: &'a SignalModel<T>,
    pub params: &'a GameParams<T>,
    pub cfg: &'a SolverConfig<T>,
    pub grid: Vec<T>,
    envelopes: OnceCell<[RocCurve<T>; 2]>,
    eo: OnceCell<EoPseudo<T>>,
    tails: OnceCell<[[Vec<T>; 2]; 2]>,
}

impl<'a, T: Real> Context<'a, T> {
    pub fn new(model: &'a SignalModel<T>, params: &'a GameParams<T>, cfg: &'a SolverConfig<T>) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        let g = model.grid();
        let grid = linspace(g.min, g.max, cfg.grid_size);
        Ok(Self {
            model,
            params,
            cfg,
            grid,
            envelopes: OnceCell::new(),
            eo: OnceCell::new(),
            tails: OnceCell::new(),
        })
    }

    pub fn step(&self) -> T {
        self.grid[1] - self.grid[0]
    }

    pub fn theta_max(&self) -> T {
        self.grid[self.grid.len() - 1]
    }

    pub fn is_edge(&self, theta: T) -> bool {
        theta >= self.theta_max()
    }

    /// Concave envelopes of both groups' ROC curves over the solver grid.
    pub fn envelopes(&self) -> &[RocCurve<T>; 2] {
        self.envelopes.get_or_init(|| {
            let mut t = self.grid.clone();
            t.reverse();
            Group::ALL.map(|g| self.model.roc(g, &t).concavify())
        })
    }

    pub fn eo(&self) -> Result<&EoPseudo<T>> {
        if let Some(e) = self.eo.get() {
            return Ok(e);
        }
        let mut t = self.grid.clone();
        t.reverse();
        let r0 = feasible_region(&self.model.roc(Group::Zero, &t));
        let r1 = feasible_region(&self.model.roc(Group::One, &t));
        let frontier = shared_frontier(&r0, &r1, self.cfg.frontier_points);
        let model = derived_signal_model(&frontier)?;
        Ok(self.eo.get_or_init(|| EoPseudo { model }))
    }

    /// `P[score > grid_i | e, s]`, indexed `[effort][group][i]`.
    pub fn tails(&self) -> &[[Vec<T>; 2]; 2] {
        self.tails.get_or_init(|| {
            Effort::ALL.map(|e| Group::ALL.map(|g| self.grid.iter().map(|&t| self.model.sf(e, g, t)).collect()))
        })
    }

    pub fn ar(&self, rates: OperatingPoint<T>) -> T {
        applicant_response(self.params, self.params.omega * rates.youden())
    }

    /// Firm's expected surplus per applicant of a group with belief `pi`.
    pub fn firm_value(&self, rates: OperatingPoint<T>, pi: T) -> T {
        pi * rates.tp * self.params.v_q - (T::one() - pi) * rates.fp * self.params.v_u
    }

    pub fn residuals(&self, e: &Equilibrium<T>) -> Result<BTreeMap<String, T>> {
        let mut out = BTreeMap::new();
        let mut put = |k: &str, v: T| {
            out.insert(k.to_string(), if v.is_nan() { T::infinity() } else { v });
        };
        let (m, p) = (self.model, self.params);
        match e.policy {
            Policy::Lf => {
                for g in Group::ALL {
                    let th = e.theta(g);
                    let pi = e.pi(g);
                    let ar = applicant_response(p, incentive(m, p, g, th).value);
                    let fr = m.likelihood_ratio(g, th).map(|phi| belief_from_ratio(phi, p.r()));
                    put(&format!("ar{g}"), (pi - ar).abs());
                    put(&format!("fr{g}"), self.fr_defect(th, pi, fr.ok()));
                }
            }
            Policy::Cb => {
                let th = e.theta0;
                for g in Group::ALL {
                    let ar = applicant_response(p, incentive(m, p, g, th).value);
                    put(&format!("ar{g}"), (e.pi(g) - ar).abs());
                }
                let mix = p.lambda0() * e.pi0 + p.lambda1 * e.pi1;
                let fr = pooled_likelihood_ratio(m, p, th).map(|phi| belief_from_ratio(phi, p.r()));
                put("fr_pool", self.fr_defect(th, mix, fr.ok()));
                put("theta_gap", (e.theta0 - e.theta1).abs());
            }
            Policy::Eo => {
                let eo = self.eo()?;
                let th = e.theta0;
                let rates = eo.model.rates(Group::Zero, th);
                let ar = self.ar(rates);
                let fr = eo.model.likelihood_ratio(Group::Zero, th).map(|phi| belief_from_ratio(phi, p.r()));
                let fr = match (th >= eo.model.grid().max, fr.ok()) {
                    (true, Some(fr)) => (e.pi0 - fr).max(T::zero()),
                    (true, None) => T::zero(),
                    (false, Some(fr)) => (e.pi0 - fr).abs(),
                    (false, None) => T::infinity(),
                };
                put("ar", (e.pi0 - ar).abs());
                put("fr", fr);
                put("pi_gap", (e.pi0 - e.pi1).abs());
                put("theta_gap", (e.theta0 - e.theta1).abs());
            }
            Policy::Dp => {
                let br = constrained::dp_best_response(self, [e.pi0, e.pi1]);
                let rates = Group::ALL.map(|g| m.rates(g, e.theta(g)));
                let accept = |g: Group| {
                    let pi = e.pi(g);
                    pi * rates[g.index()].tp + (T::one() - pi) * rates[g.index()].fp
                };
                for g in Group::ALL {
                    put(&format!("ar{g}"), (e.pi(g) - self.ar(rates[g.index()])).abs());
                }
                put("acceptance_gap", (accept(Group::Zero) - accept(Group::One)).abs());
                put("optimality_gap", self.optimality_gap(br.value, &rates, e));
            }
            Policy::Eopp => {
                let br = constrained::eopp_best_response(self, [e.pi0, e.pi1]);
                let rates = e.operating_points;
                let env = self.envelopes();
                let mut infeasible = T::zero();
                for g in Group::ALL {
                    let r = rates[g.index()];
                    put(&format!("ar{g}"), (e.pi(g) - self.ar(r)).abs());
                    infeasible = infeasible.max(r.tp - env[g.index()].tp_at(r.fp));
                    infeasible = infeasible.max((T::one() - r.fp - e.theta(g)).abs());
                }
                put("feasibility", infeasible.max(T::zero()));
                put("tp_gap", (rates[0].tp - rates[1].tp).abs());
                put("optimality_gap", self.optimality_gap(br.value, &rates, e));
            }
        }
        Ok(out)
    }

    /// FR defect. At the upper grid edge the firm rejects everyone, which is
    /// a best response whenever the belief does not exceed the FR value, and
    /// trivially so when no density is left there.
    fn fr_defect(&self, theta: T, pi: T, fr: Option<T>) -> T {
        match (self.is_edge(theta), fr) {
            (true, Some(fr)) => (pi - fr).max(T::zero()),
            (true, None) => T::zero(),
            (false, Some(fr)) => (pi - fr).abs(),
            (false, None) => T::infinity(),
        }
    }

    fn optimality_gap(&self, best: T, rates: &[OperatingPoint<T>; 2], e: &Equilibrium<T>) -> T {
        let p = self.params;
        let value = p.lambda0() * self.firm_value(rates[0], e.pi0) + p.lambda1 * self.firm_value(rates[1], e.pi1);
        ((best - value) / (p.v_q + p.v_u)).max(T::zero())
    }

    /// Attaches residuals and sorts: descending `pi0`, then `pi1`.
    pub fn finish(&self, policy: Policy, mut eqs: Vec<Equilibrium<T>>, diagnostics: Vec<String>) -> Result<EquilibriumSet<T>> {
        for e in eqs.iter_mut() {
            e.residuals = self.residuals(e)?;
        }
        eqs.sort_by(|a, b| a.order(b));
        Ok(EquilibriumSet { policy, equilibria: eqs, diagnostics })
    }
}
