mod common;

use std::collections::BTreeMap;

use common::{brute_force_lf, norm_cdf, Econ, GaussGroup, BELIEF_FLOOR};
use fairgame::equilibrium::{Equilibrium, EquilibriumSet, SolverConfig};
use fairgame::game_core::{applicant_response, firm_response, incentive, GameParams};
use fairgame::signal_model::{OperatingPoint, SignalModel};
use fairgame::{solve, verify, Group, Policy, Stability};
use proptest::prelude::*;

fn g1() -> SignalModel<f64> {
    SignalModel::symmetric_gaussian(1.0, 1.0, 0.0, 1.0).unwrap()
}

fn cfg() -> SolverConfig<f64> {
    SolverConfig::default()
}

fn run(policy: Policy, m: &SignalModel<f64>, p: &GameParams<f64>) -> EquilibriumSet<f64> {
    let set = solve(policy, m, p, &cfg()).unwrap();
    for e in &set.equilibria {
        let rep = verify(m, p, e, &cfg()).unwrap();
        assert!(rep.pass, "{policy} equilibrium fails verification: {e:?}");
    }
    set
}

/// Distinct interior `(theta_s, pi_s)` of one group across LF quadruples.
fn group_roots(set: &EquilibriumSet<f64>, m: &SignalModel<f64>, g: Group) -> Vec<(f64, f64)> {
    let top = m.grid().max;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for e in &set.equilibria {
        let (t, pi) = (e.theta(g), e.pi(g));
        if t < top && !out.iter().any(|&(u, _)| u == t) {
            out.push((t, pi));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn step(m: &SignalModel<f64>) -> f64 {
    (m.grid().max - m.grid().min) / (cfg().grid_size - 1) as f64
}

fn assert_matches_oracle(m: &SignalModel<f64>, p: &GameParams<f64>, groups: [GaussGroup; 2]) {
    let set = run(Policy::Lf, m, p);
    let econ = Econ { r: p.r(), omega: p.omega, cost_lo: p.cost_lo, cost_hi: p.cost_hi };
    for g in Group::ALL {
        let above = |v: Vec<(f64, f64)>| v.into_iter().filter(|r| r.1 > BELIEF_FLOOR).collect::<Vec<_>>();
        let ours = above(group_roots(&set, m, g));
        let oracle = above(brute_force_lf(&groups[g.index()], &econ, m.grid().min, m.grid().max, 100_000));
        assert_eq!(ours.len(), oracle.len(), "s={g}: {ours:?} vs {oracle:?}");
        for (a, b) in ours.iter().zip(&oracle) {
            assert!((a.0 - b.0).abs() <= 3.0 * step(m), "s={g}: theta {a:?} vs {b:?}");
            assert!((a.1 - b.1).abs() <= 0.01, "s={g}: pi {a:?} vs {b:?}");
        }
    }
}

#[test]
fn lf_on_g1_has_two_interior_equilibria_per_group() {
    let (m, p) = (g1(), GameParams::unit());
    let set = run(Policy::Lf, &m, &p);
    for g in Group::ALL {
        let roots = group_roots(&set, &m, g);
        assert!(roots.len() >= 2, "{roots:?}");
        let (t_hi, pi_hi) = roots[0];
        assert!((t_hi + 0.875).abs() < 0.02 && (pi_hi - 0.80).abs() < 0.02, "{roots:?}");
        let (t_lo, pi_lo) = roots[roots.len() - 1];
        assert!((t_lo - 3.25).abs() < 0.05 && pi_lo < 0.1, "{roots:?}");
    }
    assert_eq!(group_roots(&set, &m, Group::Zero), group_roots(&set, &m, Group::One));
    assert_matches_oracle(&m, &p, [GaussGroup::g1(); 2]);
}

#[test]
fn lf_on_an_uninformative_signal_is_boundary_only() {
    let m = SignalModel::symmetric_gaussian(0.0, 1.0, 0.0, 1.0).unwrap();
    let set = run(Policy::Lf, &m, &GameParams::unit());
    assert!(!set.equilibria.is_empty());
    for e in &set.equilibria {
        assert_eq!(e.stability, Stability::Boundary);
        assert_eq!((e.pi0, e.pi1), (0.0, 0.0));
    }
}

/// Multiplicity holds exactly when AR rises above FR somewhere.
#[test]
fn multiplicity_iff_ar_exceeds_fr_somewhere() {
    let p = GameParams::unit();
    for (m, expect) in [(g1(), true), (SignalModel::symmetric_gaussian(0.0, 1.0, 0.0, 1.0).unwrap(), false)] {
        for g in Group::ALL {
            let above = m.grid().points().iter().any(|&t| {
                applicant_response(&p, incentive(&m, &p, g, t).value) > firm_response(&m, &p, g, t).unwrap()
            });
            let interior = group_roots(&run(Policy::Lf, &m, &p), &m, g).len();
            assert_eq!(above, expect);
            assert_eq!(interior >= 2, expect);
        }
    }
}

#[test]
fn lf_matches_the_brute_force_scan_on_mixed_scenarios() {
    let cases = [
        ([GaussGroup { mean_q: 1.5, sd_q: 0.7, mean_u: 0.0, sd_u: 0.7 }, GaussGroup::g1()], 0.4, 0.3, 1.5),
        ([GaussGroup { mean_q: 2.0, sd_q: 1.5, mean_u: 0.5, sd_u: 1.5 }, GaussGroup { mean_q: 0.8, sd_q: 0.6, mean_u: 0.0, sd_u: 0.6 }], 0.1, 0.15, 0.7),
    ];
    for (groups, lambda1, cost_hi, r) in cases {
        let cells = [
            [(groups[0].mean_q, groups[0].sd_q), (groups[1].mean_q, groups[1].sd_q)],
            [(groups[0].mean_u, groups[0].sd_u), (groups[1].mean_u, groups[1].sd_u)],
        ];
        let m = SignalModel::gaussian(cells).unwrap();
        let p = GameParams { v_q: r, lambda1, cost_hi, ..GameParams::unit() };
        assert_matches_oracle(&m, &p, groups);
    }
}

#[test]
fn cb_on_symmetric_groups_equals_lf() {
    let (m, p) = (g1(), GameParams::unit());
    let cb = run(Policy::Cb, &m, &p);
    let lf = group_roots(&run(Policy::Lf, &m, &p), &m, Group::Zero);
    let interior: Vec<_> = cb.equilibria.iter().filter(|e| e.stability != Stability::Boundary).collect();
    assert_eq!(interior.len(), lf.len());
    for (e, (t, pi)) in interior.iter().zip(&lf) {
        assert_eq!(e.pi0, e.pi1);
        assert!((e.theta0 - t).abs() < 1e-6 && (e.pi0 - pi).abs() < 1e-6, "{e:?} vs {t} {pi}");
    }
}

#[test]
fn cb_example1_leaves_the_minority_uninvested() {
    let m = SignalModel::gaussian([[(1.0, 1.0), (11.0, 1.0)], [(0.0, 1.0), (10.0, 1.0)]]).unwrap();
    let p = GameParams { lambda1: 0.01, ..GameParams::unit() };
    let set = run(Policy::Cb, &m, &p);
    let hit = set.equilibria.iter().find(|e| e.pi1 < 0.05 && e.pi0 > 0.3).expect("insufficient identification");
    assert!((hit.pi0 - 0.8057).abs() < 2e-3, "{hit:?}");
    assert_eq!(hit.theta0, hit.theta1);
}

#[test]
fn cb_example2_favors_the_accurate_group() {
    let m = SignalModel::gaussian([[(0.5, 1.0), (0.5, 10.0)], [(-0.5, 1.0), (-0.5, 10.0)]]).unwrap();
    let set = run(Policy::Cb, &m, &GameParams::unit());
    let best = set.equilibria.iter().map(|e| e.pi0 - e.pi1).fold(f64::MIN, f64::max);
    assert!(best > 0.5, "{:?}", set.equilibria);
}

#[test]
fn dp_patronizing_instance_has_unequal_investment() {
    let (m, p) = (g1(), GameParams { lambda1: 0.05, ..GameParams::unit() });
    let set = run(Policy::Dp, &m, &p);
    let e = set.equilibria.iter().find(|e| e.disparity() > 0.05).expect("unequal DP equilibrium");
    assert!(e.residuals["acceptance_gap"] <= 1e-3);
    assert!(e.max_residual() <= 1e-3);
    // pinned values
    assert!((e.pi0 - 0.8093).abs() < 5e-3 && (e.pi1 - 0.4630).abs() < 5e-3, "{e:?}");
}

#[test]
fn dp_on_symmetric_groups_contains_the_lf_equilibrium() {
    let (m, p) = (g1(), GameParams::unit());
    let dp = run(Policy::Dp, &m, &p);
    let lf = group_roots(&run(Policy::Lf, &m, &p), &m, Group::Zero);
    let (t, pi) = lf[0];
    assert!(dp.equilibria.iter().any(|e| (e.pi0 - pi).abs() < 2e-3
        && (e.pi1 - pi).abs() < 2e-3
        && (e.theta0 - t).abs() < 0.02
        && (e.theta1 - t).abs() < 0.02));
    for e in &dp.equilibria {
        assert!(e.residuals["acceptance_gap"] <= cfg().tolerance);
    }
}

#[test]
fn dp_is_deterministic() {
    let (m, p) = (g1(), GameParams { lambda1: 0.05, ..GameParams::unit() });
    let a = solve(Policy::Dp, &m, &p, &cfg()).unwrap();
    let b = solve(Policy::Dp, &m, &p, &cfg()).unwrap();
    assert_eq!(a.equilibria, b.equilibria);
    assert_eq!(a.diagnostics, b.diagnostics);
}

/// Threshold of the original G1 score with unqualified tail mass `fp`.
fn g1_threshold_for_fp(fp: f64) -> f64 {
    let (mut lo, mut hi) = (-12.0, 12.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - norm_cdf(mid, 0.0, 1.0) > fp {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn eo_on_g1_matches_lf() {
    let (m, p) = (g1(), GameParams::unit());
    let eo = run(Policy::Eo, &m, &p);
    let lf = group_roots(&run(Policy::Lf, &m, &p), &m, Group::Zero);
    let interior: Vec<_> = eo.equilibria.iter().filter(|e| e.stability != Stability::Boundary).collect();
    assert_eq!(interior.len(), lf.len());
    for (e, (t, pi)) in interior.iter().zip(&lf) {
        assert_eq!(e.pi0.to_bits(), e.pi1.to_bits());
        let theta = g1_threshold_for_fp(1.0 - e.theta0);
        assert!((theta - t).abs() <= 2.0 * step(&m), "{theta} vs {t}");
        assert!((e.pi0 - pi).abs() <= 2e-3, "{} vs {pi}", e.pi0);
    }
}

#[test]
fn eo_example2_has_equal_investment() {
    let m = SignalModel::gaussian([[(0.5, 1.0), (0.5, 10.0)], [(-0.5, 1.0), (-0.5, 10.0)]]).unwrap();
    let set = run(Policy::Eo, &m, &GameParams::unit());
    assert!(!set.equilibria.is_empty());
    for e in &set.equilibria {
        assert_eq!(e.pi0.to_bits(), e.pi1.to_bits());
        assert_eq!(e.residuals["pi_gap"], 0.0);
    }
}

#[test]
fn eopp_matches_lf_on_symmetric_groups_and_splits_on_example2() {
    let (m, p) = (g1(), GameParams::unit());
    let eopp = run(Policy::Eopp, &m, &p);
    let (_, pi) = group_roots(&run(Policy::Lf, &m, &p), &m, Group::Zero)[0];
    assert!(eopp.equilibria.iter().any(|e| (e.pi0 - pi).abs() < 2e-3 && (e.pi1 - pi).abs() < 2e-3));

    let m = SignalModel::gaussian([[(0.5, 1.0), (0.5, 10.0)], [(-0.5, 1.0), (-0.5, 10.0)]]).unwrap();
    let set = run(Policy::Eopp, &m, &p);
    assert!(set.equilibria.iter().any(|e| e.disparity() > 0.1), "{:?}", set.equilibria);
    for e in &set.equilibria {
        assert!(e.residuals["tp_gap"] <= cfg().tolerance);
    }
}

fn candidate(policy: Policy, theta: f64, pi: f64) -> Equilibrium<f64> {
    Equilibrium {
        policy,
        theta0: theta,
        theta1: theta,
        pi0: pi,
        pi1: pi,
        residuals: BTreeMap::new(),
        stability: Stability::Stable,
        operating_points: [OperatingPoint::origin(); 2],
    }
}

#[test]
fn verify_rejects_a_non_equilibrium() {
    let rep = verify(&g1(), &GameParams::unit(), &candidate(Policy::Lf, 0.5, 0.5), &cfg()).unwrap();
    assert!(!rep.pass);
    assert!((rep.residuals["ar0"] - 0.5).abs() < 1e-12);
    assert!(rep.residuals["fr0"] < 1e-12);
}

#[test]
fn verify_rejects_perturbed_equilibria() {
    let (m, p) = (g1(), GameParams::unit());
    let c = cfg();
    for policy in [Policy::Lf, Policy::Cb, Policy::Eo] {
        for e in &run(policy, &m, &p).equilibria {
            if e.stability == Stability::Boundary {
                continue;
            }
            let mut bad = e.clone();
            bad.pi0 += 10.0 * c.tolerance;
            if policy == Policy::Eo {
                bad.pi1 = bad.pi0;
            }
            assert!(!verify(&m, &p, &bad, &c).unwrap().pass, "{policy}: {bad:?}");
        }
    }
}

#[test]
fn mismatched_thresholds_fail_cb_verification() {
    let (m, p) = (g1(), GameParams::unit());
    let mut e = run(Policy::Cb, &m, &p).equilibria[0].clone();
    e.theta1 += 0.1;
    let rep = verify(&m, &p, &e, &cfg()).unwrap();
    assert!(!rep.pass && rep.residuals["theta_gap"] > 0.05);
}

#[test]
fn f32_solver_agrees_with_f64() {
    let m32 = SignalModel::<f32>::symmetric_gaussian(1.0, 1.0, 0.0, 1.0).unwrap();
    let set = solve(Policy::Lf, &m32, &GameParams::<f32>::unit(), &SolverConfig::default()).unwrap();
    let ours: Vec<(f32, f32)> = set.equilibria.iter().map(|e| (e.theta0, e.pi0)).collect();
    let want = group_roots(&run(Policy::Lf, &g1(), &GameParams::unit()), &g1(), Group::Zero);
    for (t, pi) in want {
        assert!(
            ours.iter().any(|&(a, b)| (a as f64 - t).abs() < 1e-3 && (b as f64 - pi).abs() < 1e-3),
            "{ours:?} lacks ({t}, {pi})"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lf_roots_agree_with_the_dense_scan(gap in 0.5..3.0f64, sd in 0.5..2.0f64, cost_hi in 0.1..0.5f64, r in 0.5..2.0f64) {
        let g = GaussGroup { mean_q: gap, sd_q: sd, mean_u: 0.0, sd_u: sd };
        let m = SignalModel::symmetric_gaussian(gap, sd, 0.0, sd).unwrap();
        let p = GameParams { v_q: r, cost_hi, ..GameParams::unit() };
        assert_matches_oracle(&m, &p, [g, g]);
    }

    #[test]
    fn eo_beliefs_are_identical(gap0 in 0.5..3.0f64, gap1 in 0.5..3.0f64, sd1 in 0.5..2.0f64, lambda1 in 0.05..0.5f64) {
        let m = SignalModel::gaussian([[(gap0, 1.0), (gap1, sd1)], [(0.0, 1.0), (0.0, sd1)]]).unwrap();
        let p = GameParams { lambda1, ..GameParams::unit() };
        let set = solve(Policy::Eo, &m, &p, &cfg()).unwrap();
        for e in &set.equilibria {
            prop_assert_eq!(e.pi0.to_bits(), e.pi1.to_bits());
            prop_assert!(verify(&m, &p, e, &cfg()).unwrap().pass);
        }
    }
}
