//! Damped multi-start fixed point for policies whose firm problem couples
//! the groups: demographic parity and equalized opportunity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scan::{golden_max, invert_nonincreasing};
use super::{Context, Equilibrium, EquilibriumSet, Policy, SolverConfig, Stability};
use crate::error::Result;
use crate::game_core::GameParams;
use crate::scalar::{linspace, unit, Real};
use crate::signal_model::{Effort, Group, OperatingPoint, SignalModel};

const MIN_DAMPING: f64 = 1.0 / 1024.0;

/// Firm's constrained optimum for fixed beliefs.
#[derive(Clone, Copy, Debug)]
pub(crate) struct BestResponse<T> {
    pub value: T,
    pub thetas: [T; 2],
    pub rates: [OperatingPoint<T>; 2],
}

struct Dp<'c, 'a, T: Real> {
    ctx: &'c Context<'a, T>,
    pi: [T; 2],
    /// Acceptance rate of group 1 on the grid (nonincreasing).
    acc1: Vec<T>,
}

impl<T: Real> Dp<'_, '_, T> {
    fn acceptance(&self, g: Group, r: OperatingPoint<T>) -> T {
        let pi = self.pi[g.index()];
        pi * r.tp + (T::one() - pi) * r.fp
    }

    /// Grid cell `[k-1, k]` of the group-1 threshold with acceptance rate
    /// `target`; `None` when out of range.
    fn bracket(&self, target: T) -> Option<usize> {
        let acc = &self.acc1;
        let n = acc.len();
        let slack = T::lit(1e-12);
        if target > acc[0] + slack || target < acc[n - 1] - slack {
            return None;
        }
        Some(acc.partition_point(|&a| a >= target).clamp(1, n - 1))
    }

    fn value(&self, r: [OperatingPoint<T>; 2]) -> T {
        let p = self.ctx.params;
        p.lambda0() * self.ctx.firm_value(r[0], self.pi[0]) + p.lambda1 * self.ctx.firm_value(r[1], self.pi[1])
    }

    /// Sweep point at grid node `i`, with the group-1 side linearly interpolated.
    fn coarse(&self, i: usize) -> Option<T> {
        let t = self.ctx.tails();
        let (u, q) = (Effort::Unqualified.index(), Effort::Qualified.index());
        let r0 = OperatingPoint::clamped(t[u][0][i], t[q][0][i]);
        let target = self.acceptance(Group::Zero, r0);
        let k = self.bracket(target)?;
        let (a, b) = (self.acc1[k - 1], self.acc1[k]);
        let w = if a > b { unit((a - target) / (a - b)) } else { T::zero() };
        let lerp = |ys: &[T]| ys[k - 1] + w * (ys[k] - ys[k - 1]);
        let r1 = OperatingPoint::clamped(lerp(&t[u][1]), lerp(&t[q][1]));
        Some(self.value([r0, r1]))
    }

    /// Exact sweep point at group-0 threshold `theta0`.
    fn exact(&self, theta0: T) -> Option<BestResponse<T>> {
        let m = self.ctx.model;
        let r0 = m.rates(Group::Zero, theta0);
        let target = self.acceptance(Group::Zero, r0);
        let k = self.bracket(target)?;
        let grid = &self.ctx.grid;
        let acc = |th: T| self.acceptance(Group::One, m.rates(Group::One, th));
        let theta1 = invert_nonincreasing(acc, target, grid[k - 1], grid[k], T::zero());
        let r1 = m.rates(Group::One, theta1);
        Some(BestResponse { value: self.value([r0, r1]), thetas: [theta0, theta1], rates: [r0, r1] })
    }
}

/// Demographic-parity best response: sweep the constraint curve over the
/// group-0 threshold, then refine the best cell by golden section.
pub(crate) fn dp_best_response<T: Real>(ctx: &Context<'_, T>, pi: [T; 2]) -> BestResponse<T> {
    let t = ctx.tails();
    let (u, q) = (Effort::Unqualified.index(), Effort::Qualified.index());
    let acc1 = (0..ctx.grid.len()).map(|i| pi[1] * t[q][1][i] + (T::one() - pi[1]) * t[u][1][i]).collect();
    let dp = Dp { ctx, pi, acc1 };
    let mut best: Option<(usize, T)> = None;
    for i in 0..ctx.grid.len() {
        if let Some(v) = dp.coarse(i) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    let (i, _) = best.expect("constraint curve contains the accept-all and reject-all ends");
    let n = ctx.grid.len();
    let (a, b) = (ctx.grid[i.saturating_sub(1)], ctx.grid[(i + 1).min(n - 1)]);
    let f = |th: T| dp.exact(th).map_or(T::neg_infinity(), |br| br.value);
    let (th, _) = golden_max(f, a, b, ctx.cfg.root_tolerance);
    let node = dp.exact(ctx.grid[i]).expect("node is feasible");
    match dp.exact(th) {
        Some(br) if br.value > node.value => br,
        _ => node,
    }
}

/// Smallest fp at which group `g`'s concave envelope reaches `tp`. Between
/// envelope vertices from adjacent grid thresholds the curve itself is
/// concave, so the exact rates are used; hull chords are linear.
fn envelope_fp<T: Real>(ctx: &Context<'_, T>, g: Group, tp: T, exact: bool) -> T {
    let env = &ctx.envelopes()[g.index()];
    if !exact {
        return env.fp_at_tp(tp);
    }
    let pts = env.points();
    let k = pts.partition_point(|p| p.tp < tp);
    if k == 0 || k == pts.len() {
        return env.fp_at_tp(tp);
    }
    let th = env.thresholds().expect("envelopes keep thresholds");
    let (hi, lo) = (th[k - 1], th[k]);
    let adjacent = hi.is_finite() && lo.is_finite() && hi - lo <= T::lit(1.5) * ctx.step();
    if !adjacent {
        return env.fp_at_tp(tp);
    }
    let m = ctx.model;
    let sf_q = |x: T| m.sf(Effort::Qualified, g, x);
    let theta = invert_nonincreasing(sf_q, tp, lo, hi, T::zero());
    m.sf(Effort::Unqualified, g, theta).max(pts[k - 1].fp).min(pts[k].fp)
}

/// Equalized-opportunity best response: shared tp swept over `[0, 1]`, each
/// group at the smallest fp its concave envelope allows.
pub(crate) fn eopp_best_response<T: Real>(ctx: &Context<'_, T>, pi: [T; 2]) -> BestResponse<T> {
    let p = ctx.params;
    let at = |tp: T, exact: bool| {
        let rates = Group::ALL.map(|g| OperatingPoint::clamped(envelope_fp(ctx, g, tp, exact), tp));
        let value = p.lambda0() * ctx.firm_value(rates[0], pi[0]) + p.lambda1 * ctx.firm_value(rates[1], pi[1]);
        let thetas = rates.map(|r| T::one() - r.fp);
        BestResponse { value, thetas, rates }
    };
    let ts = linspace(T::zero(), T::one(), ctx.cfg.frontier_points);
    let (mut bi, mut best) = (0, at(ts[0], false).value);
    for (i, &tp) in ts.iter().enumerate().skip(1) {
        let v = at(tp, false).value;
        if v > best {
            (bi, best) = (i, v);
        }
    }
    let (a, b) = (ts[bi.saturating_sub(1)], ts[(bi + 1).min(ts.len() - 1)]);
    let (tp, _) = golden_max(|x| at(x, true).value, a, b, ctx.cfg.root_tolerance);
    let (node, refined) = (at(ts[bi], true), at(tp, true));
    if refined.value > node.value {
        refined
    } else {
        node
    }
}

/// Damped iteration of `pi -> AR(BR(pi))` from one start. The damping factor
/// is halved whenever the residual fails to shrink and otherwise recovers
/// gradually towards the configured value.
fn iterate<T: Real>(
    ctx: &Context<'_, T>,
    br: &impl Fn([T; 2]) -> BestResponse<T>,
    start: [T; 2],
) -> Option<([T; 2], BestResponse<T>)> {
    let cfg = ctx.cfg;
    let target = cfg.tolerance * T::lit(0.1);
    let floor = T::lit(MIN_DAMPING);
    let mut damping = cfg.damping;
    let mut pi = start;
    let mut last = T::infinity();
    for _ in 0..cfg.max_iterations {
        let resp = br(pi);
        let next = resp.rates.map(|r| ctx.ar(r));
        let residual = (next[0] - pi[0]).abs().max((next[1] - pi[1]).abs());
        if residual <= target {
            return Some((pi, resp));
        }
        if residual >= last {
            damping = (damping * T::lit(0.5)).max(floor);
        } else {
            damping = (damping * T::lit(1.25)).min(cfg.damping);
        }
        last = residual;
        for s in 0..2 {
            pi[s] = pi[s] + damping * (next[s] - pi[s]);
        }
    }
    None
}

fn starts<T: Real>(cfg: &SolverConfig<T>) -> Vec<[T; 2]> {
    let hi = T::lit(0.9);
    let lo = T::lit(0.1);
    let mut out = vec![[hi, lo], [lo, hi], [hi, hi], [lo, lo]];
    out.truncate(cfg.starts);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while out.len() < cfg.starts {
        out.push([T::lit(rng.random::<f64>()), T::lit(rng.random::<f64>())]);
    }
    out
}

fn solve_fixed_point<T: Real>(
    policy: Policy,
    model: &SignalModel<T>,
    params: &GameParams<T>,
    cfg: &SolverConfig<T>,
) -> Result<EquilibriumSet<T>> {
    let ctx = Context::new(model, params, cfg)?;
    let br = |pi: [T; 2]| match policy {
        Policy::Dp => dp_best_response(&ctx, pi),
        _ => eopp_best_response(&ctx, pi),
    };
    let theta_radius = match policy {
        Policy::Dp => cfg.dedup_steps * ctx.step(),
        _ => cfg.dedup_steps / T::from_usize_lossy(cfg.frontier_points - 1),
    };
    let pi_radius = cfg.tolerance * T::lit(10.0);
    let rate_radius = cfg.tolerance;
    let mut eqs: Vec<Equilibrium<T>> = Vec::new();
    let mut failed = 0usize;
    for start in starts(cfg) {
        let Some((pi, resp)) = iterate(&ctx, &br, start) else {
            failed += 1;
            continue;
        };
        let e = Equilibrium {
            policy,
            theta0: resp.thetas[0],
            theta1: resp.thetas[1],
            pi0: pi[0],
            pi1: pi[1],
            residuals: Default::default(),
            stability: Stability::Stable,
            operating_points: resp.rates,
        };
        // Where the firm's objective is flat (beliefs near zero) the
        // thresholds are arbitrary, so matching operating points also count.
        let duplicate = eqs.iter().any(|o| {
            let close_pi = (o.pi0 - e.pi0).abs() <= pi_radius && (o.pi1 - e.pi1).abs() <= pi_radius;
            let close_theta =
                (o.theta0 - e.theta0).abs() <= theta_radius && (o.theta1 - e.theta1).abs() <= theta_radius;
            let close_rates = o.operating_points.iter().zip(&e.operating_points).all(|(a, b)| {
                (a.fp - b.fp).abs() <= rate_radius && (a.tp - b.tp).abs() <= rate_radius
            });
            close_pi && (close_theta || close_rates)
        });
        if !duplicate {
            eqs.push(e);
        }
    }
    let mut diagnostics = Vec::new();
    if failed > 0 {
        diagnostics.push(format!("{failed} of {} starts did not converge", cfg.starts));
    }
    if eqs.is_empty() {
        log::warn!("{policy}: no start converged");
    }
    ctx.finish(policy, eqs, diagnostics)
}

/// Demographic parity: equal acceptance rates, thresholds chosen to maximize
/// the lambda-weighted firm surplus.
pub fn solve_dp<T: Real>(model: &SignalModel<T>, params: &GameParams<T>, cfg: &SolverConfig<T>) -> Result<EquilibriumSet<T>> {
    solve_fixed_point(Policy::Dp, model, params, cfg)
}

/// Equalized opportunity: shared tp, per-group operating points on the
/// concave envelopes. Thresholds are pseudo-scores `1 - fp`.
pub fn solve_eopp<T: Real>(model: &SignalModel<T>, params: &GameParams<T>, cfg: &SolverConfig<T>) -> Result<EquilibriumSet<T>> {
    solve_fixed_point(Policy::Eopp, model, params, cfg)
}
