//! Firm, applicant and social welfare at an equilibrium, and the policy
//! comparison table.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::equilibrium::{solve, verify, Equilibrium, Policy, SolverConfig};
use crate::error::Result;
use crate::game_core::GameParams;
use crate::scalar::Real;
use crate::signal_model::{Group, OperatingPoint, SignalModel};

/// How the investment cost enters applicant welfare.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AwMode {
    /// Expected cost under the uniform density, subtracted.
    #[default]
    Expected,
    /// Raw `integral c dc` over the investing range, added.
    Literal,
}

/// `pi * tp * v_q - (1 - pi) * fp * v_u`.
pub fn firm_welfare_at<T: Real>(params: &GameParams<T>, rates: OperatingPoint<T>, pi: T) -> T {
    pi * rates.tp * params.v_q - (T::one() - pi) * rates.fp * params.v_u
}

/// Acceptance reward minus the investment cost of the `pi` share with the
/// lowest costs.
pub fn applicant_welfare_at<T: Real>(params: &GameParams<T>, rates: OperatingPoint<T>, pi: T, mode: AwMode) -> T {
    let reward = params.omega * (pi * rates.tp + (T::one() - pi) * rates.fp);
    let (lo, width) = (params.cost_lo, params.cost_hi - params.cost_lo);
    let top = lo + pi * width;
    let integral = (top * top - lo * lo) * T::lit(0.5);
    match mode {
        AwMode::Expected => reward - integral / width,
        AwMode::Literal => reward + integral,
    }
}

pub fn firm_welfare<T: Real>(model: &SignalModel<T>, params: &GameParams<T>, group: Group, theta: T, pi: T) -> T {
    firm_welfare_at(params, model.rates(group, theta), pi)
}

pub fn applicant_welfare<T: Real>(
    model: &SignalModel<T>,
    params: &GameParams<T>,
    group: Group,
    theta: T,
    pi: T,
    mode: AwMode,
) -> T {
    applicant_welfare_at(params, model.rates(group, theta), pi, mode)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroupWelfare<T> {
    pub fw: T,
    pub aw: T,
    pub sw: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WelfareReport<T: Real> {
    pub groups: [GroupWelfare<T>; 2],
    /// Lambda-weighted aggregates per applicant.
    pub fw: T,
    pub aw: T,
    pub sw: T,
    pub disparity: T,
    pub equilibrium: Equilibrium<T>,
}

/// Welfare at an equilibrium, evaluated at its stored operating points (for
/// derived-predictor policies these differ from plain threshold rules).
pub fn social_welfare<T: Real>(params: &GameParams<T>, equilibrium: &Equilibrium<T>, mode: AwMode) -> WelfareReport<T> {
    let groups = Group::ALL.map(|g| {
        let (rates, pi) = (equilibrium.operating_points[g.index()], equilibrium.pi(g));
        let fw = firm_welfare_at(params, rates, pi);
        let aw = applicant_welfare_at(params, rates, pi, mode);
        GroupWelfare { fw, aw, sw: fw + aw }
    });
    let weighted = |f: fn(&GroupWelfare<T>) -> T| params.lambda0() * f(&groups[0]) + params.lambda1 * f(&groups[1]);
    WelfareReport {
        fw: weighted(|g| g.fw),
        aw: weighted(|g| g.aw),
        sw: weighted(|g| g.sw),
        disparity: equilibrium.disparity(),
        groups,
        equilibrium: equilibrium.clone(),
    }
}

/// Which equilibria of each policy enter the comparison table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// Highest aggregate social welfare.
    #[default]
    Best,
    /// Lowest aggregate social welfare.
    Worst,
    All,
}

impl std::str::FromStr for Selection {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "best" | "max" => Ok(Selection::Best),
            "worst" | "min" => Ok(Selection::Worst),
            "all" => Ok(Selection::All),
            _ => Err(crate::Error::Config(format!("unknown selection {s:?} (expected best, worst or all)"))),
        }
    }
}

/// One table row; all numeric fields are `None` when the policy has no
/// equilibrium.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow<T> {
    pub policy: Policy,
    pub disparity: Option<T>,
    pub sw: Option<T>,
    pub fw: Option<T>,
    pub aw: Option<T>,
    pub theta0: Option<T>,
    pub theta1: Option<T>,
    pub pi0: Option<T>,
    pub pi1: Option<T>,
}

impl<T: Real> ComparisonRow<T> {
    fn empty(policy: Policy) -> Self {
        Self { policy, disparity: None, sw: None, fw: None, aw: None, theta0: None, theta1: None, pi0: None, pi1: None }
    }

    fn from_report(r: &WelfareReport<T>) -> Self {
        let e = &r.equilibrium;
        Self {
            policy: e.policy,
            disparity: Some(r.disparity),
            sw: Some(r.sw),
            fw: Some(r.fw),
            aw: Some(r.aw),
            theta0: Some(e.theta0),
            theta1: Some(e.theta1),
            pi0: Some(e.pi0),
            pi1: Some(e.pi1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sw.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonTable<T> {
    pub rows: Vec<ComparisonRow<T>>,
    /// Number of reported equilibria that failed verification.
    #[serde(skip)]
    pub verify_failures: usize,
}

impl<T: Real> ComparisonTable<T> {
    pub fn row(&self, policy: Policy) -> Option<&ComparisonRow<T>> {
        self.rows.iter().find(|r| r.policy == policy)
    }

    /// Columns `policy, disparity, sw, fw, aw, theta0, theta1, pi0, pi1`;
    /// empty rows leave the numeric cells blank.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["policy", "disparity", "sw", "fw", "aw", "theta0", "theta1", "pi0", "pi1"])?;
        let cell = |x: Option<T>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.policy.to_string(),
                cell(r.disparity),
                cell(r.sw),
                cell(r.fw),
                cell(r.aw),
                cell(r.theta0),
                cell(r.theta1),
                cell(r.pi0),
                cell(r.pi1),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Picks equilibria from a solved list by aggregate social welfare. Ties keep
/// the earlier entry.
pub fn select<T: Real>(
    params: &GameParams<T>,
    equilibria: &[Equilibrium<T>],
    selection: Selection,
    mode: AwMode,
) -> Vec<WelfareReport<T>> {
    let reports: Vec<WelfareReport<T>> = equilibria.iter().map(|e| social_welfare(params, e, mode)).collect();
    let pick = |better: fn(T, T) -> bool| {
        reports
            .iter()
            .fold(None::<&WelfareReport<T>>, |acc, r| match acc {
                Some(a) if !better(r.sw, a.sw) => Some(a),
                _ => Some(r),
            })
            .cloned()
            .into_iter()
            .collect()
    };
    match selection {
        Selection::All => reports,
        Selection::Best => pick(|x, y| x > y),
        Selection::Worst => pick(|x, y| x < y),
    }
}

/// Solves every policy and tabulates the selected equilibria.
pub fn compare_policies<T: Real>(
    model: &SignalModel<T>,
    params: &GameParams<T>,
    cfg: &SolverConfig<T>,
    policies: &[Policy],
    selection: Selection,
    mode: AwMode,
) -> Result<ComparisonTable<T>> {
    let mut rows = Vec::new();
    let mut verify_failures = 0;
    for &policy in policies {
        let set = solve(policy, model, params, cfg)?;
        let chosen = select(params, &set.equilibria, selection, mode);
        if chosen.is_empty() {
            rows.push(ComparisonRow::empty(policy));
        }
        for r in &chosen {
            if !verify(model, params, &r.equilibrium, cfg)?.pass {
                verify_failures += 1;
            }
            rows.push(ComparisonRow::from_report(r));
        }
    }
    Ok(ComparisonTable { rows, verify_failures })
}
