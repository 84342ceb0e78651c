use std::f64::consts::{FRAC_1_SQRT_2, PI};

use approx::assert_abs_diff_eq;
use cylab::connections::{
    abelian_solution, curvature, decay_report, gauge_rotate, BundleExtension, ConnectionState,
};
use cylab::geometry::{Geometry, GeometrySpec};
use cylab::Error;
use proptest::prelude::*;

fn zero(t: f64) -> ConnectionState {
    ConnectionState {
        t,
        ..Default::default()
    }
}

#[test]
fn flat_connection_has_zero_curvature() {
    let s = ConnectionState::gauge_fixed(1.0, 1.0, 1.0, 0.0, 0.0);
    let r = curvature(&s, &zero(1.0), 1.0);
    assert!(r.is_flat(0.0), "{r:?}");
    assert_eq!(r.sup_t2f, 0.0);
    let s2 = ConnectionState::gauge_fixed(1.0, -1.0, 0.0, 1.0, 0.0);
    assert!(curvature(&s2, &zero(1.0), 1.0).is_flat(0.0));
    assert!(curvature(&s.gauge_flip(), &zero(1.0), 1.0).is_flat(0.0));
    assert!(curvature(&s2.gauge_flip(), &zero(1.0), 1.0).is_flat(0.0));
}

#[test]
fn canonical_connection_curvature() {
    let r = curvature(&zero(2.0), &zero(2.0), 2.0);
    assert_eq!(r.omega0, -1.5);
    assert_eq!((r.omega1, r.omega2, r.omega3), (0.0, 0.0, 0.0));
    assert_eq!((r.eta1, r.eta2), ([0.0; 2], [0.0; 2]));
    assert_abs_diff_eq!(r.sup_t2f, 1.5);
}

#[test]
fn balanced_state_curvature() {
    let s = ConnectionState::gauge_fixed(1.0, 0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0);
    let r = curvature(&s, &zero(1.0), 1.0);
    assert_abs_diff_eq!(r.omega0, 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(r.omega3, 1.5, epsilon = 1e-15);
}

#[test]
fn only_the_flat_states_are_flat() {
    let candidates = [
        (0.0, 0.0, 0.0),
        (1.0, 0.0, 1.0),
        (-1.0, 1.0, 0.0),
        (0.5, 0.5, 0.5),
        (1.0, 1.0, 0.1),
    ];
    for (a0, a1, a2) in candidates {
        let s = ConnectionState::gauge_fixed(1.0, a0, a1, a2, 0.0);
        assert!(
            !curvature(&s, &zero(1.0), 1.0).is_flat(1e-12),
            "{a0},{a1},{a2}"
        );
    }
}

#[test]
fn gauge_rotation_examples() {
    let s = ConnectionState::gauge_fixed(0.3, 0.2, 1.0, 1.0, 0.7);
    let r = gauge_rotate(&s, PI);
    assert_eq!((r.a1, r.a2, r.b1, r.b2), (-1.0, -1.0, 0.0, 0.0));
    assert_eq!((r.a0, r.phi), (0.2, 0.7));
    assert_eq!(gauge_rotate(&s, 0.0), s);
    let q = gauge_rotate(
        &ConnectionState::gauge_fixed(0.0, 0.0, 1.0, 0.0, 0.0),
        PI / 2.0,
    );
    assert_eq!((q.a1, q.b1), (0.0, 1.0));
}

proptest! {
    #[test]
    fn curvature_norm_is_gauge_invariant(
        a0 in -2.0..2.0f64, a1 in -2.0..2.0f64, a2 in -2.0..2.0f64,
        b1 in -2.0..2.0f64, b2 in -2.0..2.0f64, theta in 0.0..6.3f64,
        d in proptest::array::uniform5(-3.0..3.0f64), t in 0.01..50.0f64,
    ) {
        let s = ConnectionState { t, a0, a1, a2, b1, b2, phi: 0.0 };
        let ds = ConnectionState { t, a0: d[0], a1: d[1], a2: d[2], b1: d[3], b2: d[4], phi: 0.0 };
        let r = curvature(&s, &ds, t);
        let g = curvature(&gauge_rotate(&s, theta), &gauge_rotate(&ds, theta), t);
        let scale = 1.0 + r.sup_t2f;
        prop_assert!((r.sup_t2f - g.sup_t2f).abs() < 1e-12 * scale);
        prop_assert!((r.link_norm() - g.link_norm()).abs() < 1e-12 * scale);
        prop_assert!((r.dt_norm() - g.dt_norm()).abs() < 1e-12 * scale);
        prop_assert!((r.omega0 - g.omega0).abs() < 1e-12 * scale);
        prop_assert!((r.omega1 - g.omega1).abs() < 1e-12 * scale);
    }

    #[test]
    fn rotation_composes(theta in -7.0..7.0f64, phi in -7.0..7.0f64, a1 in -1.0..1.0f64, b2 in -1.0..1.0f64) {
        let s = ConnectionState { t: 1.0, a0: 0.1, a1, a2: 0.4, b1: -0.3, b2, phi: 0.2 };
        let a = gauge_rotate(&gauge_rotate(&s, theta), phi);
        let b = gauge_rotate(&s, theta + phi);
        for (x, y) in a.as_array().iter().zip(b.as_array()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((a.static_constraint() - s.static_constraint()).abs() < 1e-12);
    }
}

#[test]
fn abelian_small_resolution_regular_solution() {
    let g = Geometry::build(&GeometrySpec::small_resolution()).unwrap();
    let near = abelian_solution(&g, -2.0, 0.0, 1e-4).a0;
    assert!(near.abs() < 2.0, "a0(1e-4) = {near}");
    let far = abelian_solution(&g, -2.0, 0.0, 1e3).a0;
    assert!(far.abs() < 1e-2, "a0(1e3) = {far}");
    for t in [0.01, 0.3, 2.0] {
        let h = g.sample(t);
        let s = abelian_solution(&g, -2.0, 0.0, t);
        assert_abs_diff_eq!(s.a0, 2.0 * (h.u1 - 1.0) / (h.mu * h.mu), epsilon = 1e-12);
        assert_eq!(s.phi, 0.0);
    }
}

#[test]
fn abelian_small_resolution_singular_solution() {
    let g = Geometry::build(&GeometrySpec::small_resolution()).unwrap();
    let a = abelian_solution(&g, 0.0, 0.0, 1e-3).a0;
    let b = abelian_solution(&g, 0.0, 0.0, 1e-4).a0;
    assert!(b > 1e6, "a0(1e-4) = {b}");
    assert!((b / a - 100.0).abs() < 1.0, "a0 ~ 2/μ² growth: {a} {b}");
}

#[test]
fn abelian_on_cone_is_zero() {
    let g = Geometry::build(&GeometrySpec::cone()).unwrap();
    for t in [0.1, 1.0, 10.0] {
        assert_eq!(abelian_solution(&g, 0.0, 0.0, t).a0, 0.0);
    }
}

#[test]
fn abelian_satisfies_the_a0_equation() {
    let backgrounds = [
        (GeometrySpec::small_resolution(), -2.0),
        (GeometrySpec::canonical_bundle(0.3, 1.0), 0.7),
        (GeometrySpec::smoothing(), 1.3),
    ];
    for (spec, c) in backgrounds {
        let g = Geometry::build(&spec).unwrap();
        for t in [0.02, 0.1, 0.7, 3.0, 20.0] {
            let h = g.sample(t);
            let s = abelian_solution(&g, c, 0.0, t);
            // ȧ0 = (4λ/μ²)(−u0 − a0 u1) with a1 = a2 = 0; differentiate a0 μ² = C − 2u0u1.
            let rhs = 4.0 * h.lambda / (h.mu * h.mu) * (-h.u0 - s.a0 * h.u1);
            let d = (-4.0 * h.lambda * h.u0 - 2.0 * s.a0 * h.mu * h.d_mu) / (h.mu * h.mu);
            assert!(
                (d - rhs).abs() < 1e-8 * (1.0 + rhs.abs()),
                "{spec:?} t={t}: {d} vs {rhs}"
            );
        }
    }
}

#[test]
fn abelian_higgs_field_on_smoothing() {
    let g = Geometry::build(&GeometrySpec::smoothing()).unwrap();
    for t in [0.005, 0.05, 0.5, 5.0] {
        let dt = 1e-5 * t;
        let d = (abelian_solution(&g, 0.0, 1.0, t + dt).phi
            - abelian_solution(&g, 0.0, 1.0, t - dt).phi)
            / (2.0 * dt);
        let h = g.sample(t);
        let expect = -3.0 * h.v0 / (h.mu * h.mu);
        assert!(
            (d - expect).abs() < 1e-6 * (1.0 + expect.abs()),
            "t={t}: {d} vs {expect}"
        );
    }
    // I is odd at the singular orbit: φ − φ0 = −1/(2t) + O(t) with no constant term.
    for t in [1e-3, 2e-3] {
        let rest = abelian_solution(&g, 0.0, 0.0, t).phi + 0.5 / t;
        assert!(rest.abs() < t, "t={t}: {rest}");
    }
}

#[test]
fn decay_needs_ten_samples() {
    let s: Vec<ConnectionState> = (1..10).map(|k| zero(k as f64)).collect();
    assert!(matches!(
        decay_report(&s, 1e6),
        Err(Error::InsufficientData(_))
    ));
}

#[test]
fn decay_report_flat_trajectory_is_bounded() {
    let s: Vec<ConnectionState> = (0..50)
        .map(|k| ConnectionState::gauge_fixed(1.0 + k as f64, 1.0, 1.0, 0.0, 0.0))
        .collect();
    let r = decay_report(&s, 1e6).unwrap();
    assert!(r.bounded && r.witness.is_none());
}

#[test]
fn decay_report_flags_singular_abelian() {
    let g = Geometry::build(&GeometrySpec::small_resolution()).unwrap();
    let s: Vec<ConnectionState> = (0..200)
        .map(|k| 1e-4 * 1e4f64.powf(k as f64 / 199.0))
        .map(|t| abelian_solution(&g, 0.0, 0.0, t))
        .collect();
    let r = decay_report(&s, 1e6).unwrap();
    assert!(!r.bounded);
    let w = r.witness.unwrap();
    assert_eq!(w.quantity, "a0");
    assert!(w.t < 1e-3, "{w:?}");
}

#[test]
fn decay_report_flags_growth() {
    let s: Vec<ConnectionState> = (1..=40)
        .map(|k| ConnectionState::gauge_fixed(k as f64, 0.0, 0.1 * k as f64, 0.0, 0.0))
        .collect();
    let r = decay_report(&s, 1e6).unwrap();
    assert!(!r.bounded);
    assert_eq!(r.witness.unwrap().quantity, "a1");
}

#[test]
fn boundary_tables_match_extensions() {
    let t = BundleExtension::P0Id.boundary_conditions();
    let order = |f: &str| t.fields.iter().find(|r| r.field == f).unwrap().order;
    assert_eq!(
        (order("a1"), order("b1"), order("b2"), order("phi")),
        (2, 2, 4, 2)
    );
    let t = BundleExtension::P1MinusLL(3).boundary_conditions();
    let order = |f: &str| t.fields.iter().find(|r| r.field == f).unwrap().order;
    assert_eq!((order("a1"), order("a2")), (3, 2));
    let t = BundleExtension::P1MinusLL(-2).boundary_conditions();
    let order = |f: &str| t.fields.iter().find(|r| r.field == f).unwrap().order;
    assert_eq!((order("a1"), order("a2")), (2, 3));
    assert_eq!(BundleExtension::PId.param_names(), ["xi", "chi"]);
    assert_eq!(
        serde_json::to_string(&BundleExtension::P1Bold0).unwrap(),
        "\"P_1bold0\""
    );
}
