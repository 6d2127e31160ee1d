//! One-dimensional threshold scans: laissez-faire, color-blind and
//! equalized odds.

use log::warn;

use super::scan::{dedup_crossings, sign_changes, Crossing};
use super::{Context, Equilibrium, EquilibriumSet, Policy, SolverConfig, Stability};
use crate::error::Result;
use crate::game_core::{applicant_response, belief_from_ratio, incentive, pooled_likelihood_ratio, GameParams};
use crate::scalar::{linspace, Real};
use crate::signal_model::{Group, SignalModel};

/// Per-group solution `(theta, pi, stability)`.
type Branch<T> = (T, T, Stability);

/// Crossings of `h` on `grid`, refined and deduplicated; crossings where
/// `|h|` exceeds `tol` after refinement are jumps, not roots, and are dropped.
fn roots<T: Real>(grid: &[T], h: impl Fn(T) -> Option<T>, cfg: &SolverConfig<T>) -> Vec<Crossing<T>> {
    let step = grid[1] - grid[0];
    let found = sign_changes(grid, &h, cfg.root_tolerance);
    let found = found
        .into_iter()
        .filter(|c| h(c.x).is_some_and(|v| v.abs() <= cfg.tolerance))
        .collect();
    dedup_crossings(found, cfg.dedup_steps * step)
}

fn lf_branches<T: Real>(ctx: &Context<'_, T>, g: Group) -> Vec<Branch<T>> {
    let (m, p) = (ctx.model, ctx.params);
    let ar = |th: T| applicant_response(p, incentive(m, p, g, th).value);
    let h = |th: T| m.likelihood_ratio(g, th).ok().map(|phi| ar(th) - belief_from_ratio(phi, p.r()));
    let found = roots(&ctx.grid, h, ctx.cfg);
    if found.is_empty() {
        let th = ctx.theta_max();
        return vec![(th, ar(th), Stability::Boundary)];
    }
    found.into_iter().map(|c| (c.x, ar(c.x), c.stability)).collect()
}

fn combined(a: Stability, b: Stability) -> Stability {
    match (a, b) {
        (Stability::Boundary, _) | (_, Stability::Boundary) => Stability::Boundary,
        (Stability::Stable, Stability::Stable) => Stability::Stable,
        _ => Stability::Unstable,
    }
}

fn warn_mlrp<T: Real>(ctx: &Context<'_, T>, diagnostics: &mut Vec<String>) {
    for g in Group::ALL {
        let report = ctx.model.check_mlrp(g, &ctx.grid);
        if !report.holds {
            let msg = format!("group {g}: likelihood ratio not strictly monotone at {} grid points", report.violations.len());
            warn!("{msg}");
            diagnostics.push(msg);
        }
    }
}

/// Laissez-faire: groups solved independently, every pairing of group
/// solutions returned.
pub fn solve_lf<T: Real>(model: &SignalModel<T>, params: &GameParams<T>, cfg: &SolverConfig<T>) -> Result<EquilibriumSet<T>> {
    let ctx = Context::new(model, params, cfg)?;
    let mut diagnostics = Vec::new();
    warn_mlrp(&ctx, &mut diagnostics);
    let b0 = lf_branches(&ctx, Group::Zero);
    let b1 = lf_branches(&ctx, Group::One);
    let mut eqs = Vec::with_capacity(b0.len() * b1.len());
    for &(theta0, pi0, s0) in &b0 {
        for &(theta1, pi1, s1) in &b1 {
            eqs.push(Equilibrium {
                policy: Policy::Lf,
                theta0,
                theta1,
                pi0,
                pi1,
                residuals: Default::default(),
                stability: combined(s0, s1),
                operating_points: [model.rates(Group::Zero, theta0), model.rates(Group::One, theta1)],
            });
        }
    }
    ctx.finish(Policy::Lf, eqs, diagnostics)
}

/// Color-blind: one threshold against the lambda-pooled likelihood ratio.
pub fn solve_cb<T: Real>(model: &SignalModel<T>, params: &GameParams<T>, cfg: &SolverConfig<T>) -> Result<EquilibriumSet<T>> {
    let ctx = Context::new(model, params, cfg)?;
    let p = params;
    let ar = |g: Group, th: T| applicant_response(p, incentive(model, p, g, th).value);
    let h = |th: T| {
        let mix = p.lambda0() * ar(Group::Zero, th) + p.lambda1 * ar(Group::One, th);
        pooled_likelihood_ratio(model, p, th).ok().map(|phi| mix - belief_from_ratio(phi, p.r()))
    };
    let mut found: Vec<Branch<T>> = roots(&ctx.grid, h, cfg).into_iter().map(|c| (c.x, T::zero(), c.stability)).collect();
    if found.is_empty() {
        found.push((ctx.theta_max(), T::zero(), Stability::Boundary));
    }
    let eqs = found
        .into_iter()
        .map(|(th, _, stability)| Equilibrium {
            policy: Policy::Cb,
            theta0: th,
            theta1: th,
            pi0: ar(Group::Zero, th),
            pi1: ar(Group::One, th),
            residuals: Default::default(),
            stability,
            operating_points: [model.rates(Group::Zero, th), model.rates(Group::One, th)],
        })
        .collect();
    ctx.finish(Policy::Cb, eqs, Vec::new())
}

/// Equalized odds: laissez-faire scan of the pseudo-signal derived from the
/// shared frontier. Thresholds are pseudo-scores `p = 1 - fp`.
pub fn solve_eo<T: Real>(model: &SignalModel<T>, params: &GameParams<T>, cfg: &SolverConfig<T>) -> Result<EquilibriumSet<T>> {
    let ctx = Context::new(model, params, cfg)?;
    let eo = ctx.eo()?;
    let pm = &eo.model;
    let g = pm.grid();
    let grid = linspace(g.min, g.max, cfg.grid_size);
    let ar = |x: T| ctx.ar(pm.rates(Group::Zero, x));
    let h = |x: T| pm.likelihood_ratio(Group::Zero, x).ok().map(|phi| ar(x) - belief_from_ratio(phi, params.r()));
    let mut found: Vec<Branch<T>> = roots(&grid, h, cfg).into_iter().map(|c| (c.x, ar(c.x), c.stability)).collect();
    let mut diagnostics = Vec::new();
    if found.is_empty() {
        diagnostics.push("no interior crossing on the equalized-odds frontier".to_string());
        found.push((g.max, ar(g.max), Stability::Boundary));
    }
    let eqs = found
        .into_iter()
        .map(|(x, pi, stability)| {
            let op = pm.rates(Group::Zero, x);
            Equilibrium {
                policy: Policy::Eo,
                theta0: x,
                theta1: x,
                pi0: pi,
                pi1: pi,
                residuals: Default::default(),
                stability,
                operating_points: [op, op],
            }
        })
        .collect();
    ctx.finish(Policy::Eo, eqs, diagnostics)
}
