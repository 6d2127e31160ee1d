mod common;

use common::{norm_cdf, Econ, GaussGroup};
use fairgame::game_core::{applicant_response, firm_response, incentive, response_curves, GameParams};
use fairgame::scalar::linspace;
use fairgame::signal_model::{Distribution1D, GridSpec, SignalModel, Tabulated};
use fairgame::Group;
use proptest::prelude::*;

fn g1() -> SignalModel<f64> {
    SignalModel::symmetric_gaussian(1.0, 1.0, 0.0, 1.0).unwrap()
}

#[test]
fn incentive_examples() {
    let p = GameParams::unit();
    let c = incentive(&g1(), &p, Group::Zero, 0.5).value;
    assert!((c - 0.382_925).abs() < 1e-6);
    assert!((c - (norm_cdf(0.5, 0.0, 1.0) - norm_cdf(0.5, 1.0, 1.0))).abs() < 1e-13);

    let flat = SignalModel::symmetric_gaussian(0.0, 1.0, 0.0, 1.0).unwrap();
    for t in linspace(-4.0, 4.0, 17) {
        assert_eq!(incentive(&flat, &p, Group::One, t).value, 0.0);
    }
    let top = g1().grid().max;
    assert!(incentive(&g1(), &p, Group::Zero, top).value < 1e-12);
}

#[test]
fn firm_response_examples() {
    let p = GameParams::unit();
    assert!((firm_response(&g1(), &p, Group::Zero, 0.5).unwrap() - 0.5).abs() < 1e-15);
    let want = (-1.0f64).exp() / (1.0 + (-1.0f64).exp());
    assert!((firm_response(&g1(), &p, Group::Zero, 1.5).unwrap() - 0.268_941).abs() < 1e-6);
    assert!((firm_response(&g1(), &p, Group::One, 1.5).unwrap() - want).abs() < 1e-12);
}

#[test]
fn response_curves_match_the_oracle() {
    let (p, e) = (GameParams::unit(), Econ::unit());
    let grid = g1().grid().points();
    let t = response_curves(&g1(), &p, Group::Zero, &grid).unwrap();
    let step = g1().grid().step();
    // AR saturates at 1 on a plateau around 0.5; ties go to the lowest score
    let mode = grid.iter().position(|&x| x == t.ar_mode).unwrap();
    assert_eq!(t.ar[mode], 1.0);
    assert!(mode > 0 && t.ar[mode - 1] < 1.0 && t.ar_mode < 0.5);
    // without saturation the mode is the maximizer of F_u - F_q
    let wide = GameParams { cost_hi: 1.0, ..p };
    let t_wide = response_curves(&g1(), &wide, Group::Zero, &grid).unwrap();
    assert!((t_wide.ar_mode - 0.5).abs() <= 0.5 * step + 1e-12, "mode {}", t_wide.ar_mode);
    assert!(t.fr.windows(2).all(|w| w[0] - w[1] > 1e-12 || w[0] < 1e-12));
    for i in (0..grid.len()).step_by(50) {
        assert!((t.ar[i] - GaussGroup::g1().ar(&e, grid[i])).abs() < 1e-12);
        assert!((t.fr[i] - GaussGroup::g1().fr(&e, grid[i])).abs() < 1e-12);
    }
}

#[test]
fn fr_strictly_decreasing_in_the_interior() {
    // Every consecutive pair decreases where the curve is resolvable in f64.
    let grid = linspace(-6.0, 7.0, 2001);
    let t = response_curves(&g1(), &GameParams::unit(), Group::Zero, &grid).unwrap();
    for w in t.fr.windows(2) {
        if w[0] > 1e-9 && w[0] < 1.0 - 1e-9 {
            assert!(w[0] - w[1] > 1e-12);
        }
    }
}

/// The G1 group-0 signal tabulated in the coordinate `psi = theta^3 + theta`.
fn reparametrized(n: usize) -> (Vec<f64>, SignalModel<f64>) {
    let theta = linspace(-6.0, 7.0, n);
    let psi: Vec<f64> = theta.iter().map(|t| t * t * t + t).collect();
    let jac: Vec<f64> = theta.iter().map(|t| 3.0 * t * t + 1.0).collect();
    let cell = |mean: f64| {
        let pdf = theta.iter().zip(&jac).map(|(t, j)| common::norm_pdf(*t, mean, 1.0) / j).collect();
        Distribution1D::Tabulated(Tabulated::from_pdf(psi.clone(), pdf).unwrap())
    };
    let (q, u) = (cell(1.0), cell(0.0));
    let spec = GridSpec::new(psi[0], psi[n - 1], n).unwrap();
    (theta, SignalModel::new([[q.clone(), q], [u.clone(), u]], spec))
}

#[test]
fn incentive_is_invariant_under_reparametrization() {
    let p = GameParams::unit();
    let mut errs = Vec::new();
    for n in [2001, 20001, 80001] {
        let (theta, m) = reparametrized(n);
        let err = theta
            .iter()
            .step_by(n / 200)
            .map(|&t| (incentive(&m, &p, Group::Zero, t * t * t + t).value - incentive(&g1(), &p, Group::Zero, t).value).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    assert!(errs[2] <= 1e-6, "{errs:?}");
}

proptest! {
    #[test]
    fn firm_response_inverts_the_threshold_rule(t in -4.0..5.0f64, vq in 0.1..10.0f64, vu in 0.1..10.0f64) {
        let p = GameParams { v_q: vq, v_u: vu, ..GameParams::unit() };
        let pi = firm_response(&g1(), &p, Group::Zero, t).unwrap();
        let phi = g1().likelihood_ratio(Group::Zero, t).unwrap();
        let r = (1.0 - pi) / pi * phi;
        prop_assert!((r - p.r()).abs() <= 1e-9 * p.r().max(1.0));
    }

    #[test]
    fn applicant_response_is_a_clamped_cdf(a in -1.0..2.0f64, b in -1.0..2.0f64, lo in 0.0..0.5f64, w in 0.01..1.0f64) {
        let p = GameParams { cost_lo: lo, cost_hi: lo + w, ..GameParams::unit() };
        let (x, y) = (a.min(b), a.max(b));
        prop_assert!(applicant_response(&p, x) <= applicant_response(&p, y));
        if y <= lo {
            prop_assert_eq!(applicant_response(&p, y), 0.0);
        }
        if x >= lo + w {
            prop_assert_eq!(applicant_response(&p, x), 1.0);
        }
    }

    #[test]
    fn mlrp_models_have_decreasing_fr(gap in 0.3..3.0f64, sd in 0.5..2.0f64, r in 0.2..5.0f64) {
        let m = SignalModel::symmetric_gaussian(gap, sd, 0.0, sd).unwrap();
        let p = GameParams { v_q: r, ..GameParams::unit() };
        let grid = linspace(-2.0 * sd, gap + 2.0 * sd, 401);
        prop_assert!(m.check_mlrp(Group::Zero, &grid).holds);
        let t = response_curves(&m, &p, Group::Zero, &grid).unwrap();
        // strict decrease, except where the belief has saturated at 1 in f64
        prop_assert!(t.fr.windows(2).all(|w| w[0] > w[1] || w[1] > 1.0 - 1e-12));
    }
}
