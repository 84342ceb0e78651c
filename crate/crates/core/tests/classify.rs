use cylab::classify::{
    classify_family, comparison_test, decide_side, find_critical, flux_suite, halton,
    normalise_gauge, region_flux_test, ClassifyConfig, CriticalOptions, Distances, FluxOptions,
    Outcome, Region, Side,
};
use cylab::connections::{abelian_solution, BundleExtension as B, ConnectionState};
use cylab::flows::{IntegratorConfig, SmoothingInstanton};
use cylab::geometry::{Geometry, GeometrySpec};
use cylab::local_families::{Launcher, LocalFamily, DEFAULT_ORDER, DEFAULT_T0};
use cylab::oracle::{fixture, load_fixtures};
use proptest::prelude::*;

fn verdict(f: &LocalFamily) -> cylab::classify::TrajectoryVerdict {
    classify_family(
        f,
        &f.default_geometry(),
        DEFAULT_T0,
        DEFAULT_ORDER,
        &IntegratorConfig::default(),
        &ClassifyConfig::default(),
    )
    .unwrap()
    .1
}

fn fixtures() -> Vec<cylab::oracle::Fixture> {
    load_fixtures(std::path::Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/oracle.json"
    )))
    .unwrap()
}

#[test]
fn distances_and_gauge() {
    let d = Distances::of(&ConnectionState::gauge_fixed(1.0, 0.0, 0.0, 0.0, 0.0));
    assert_eq!((d.canonical, d.flat1, d.flat2), (0.0, 1.0, 1.0));
    let s = normalise_gauge(&ConnectionState::gauge_fixed(1.0, 0.2, -0.3, 0.4, 0.0));
    assert!(s.a1 >= 0.0);
    assert_eq!(halton(1, 2), 0.5);
    assert!((halton(5, 3) - 7.0 / 9.0).abs() < 1e-15);
}

#[test]
fn smoothing_instantons_split_at_one() {
    for xi in [0.0, 0.5, -0.5, 0.99, -0.99] {
        let v = verdict(&LocalFamily::instanton(B::PId, xi));
        assert!(v.outcome.is_canonical(), "ξ={xi}: {:?}", v.outcome);
    }
    for xi in [1.0, -1.0] {
        let v = verdict(&LocalFamily::instanton(B::PId, xi));
        assert!(v.outcome.is_flat(), "ξ={xi}: {:?}", v.outcome);
    }
    for xi in [1.01, -1.01] {
        let v = verdict(&LocalFamily::instanton(B::PId, xi));
        assert!(v.outcome.is_unbounded(), "ξ={xi}: {:?}", v.outcome);
    }
}

#[test]
fn critical_parameters_equal_to_one() {
    let opts = CriticalOptions::default();
    let cb = GeometrySpec::canonical_bundle(0.0, 1.0);
    for (ext, spec) in [
        (B::PId, GeometrySpec::smoothing()),
        (B::P1Bold0, GeometrySpec::small_resolution()),
        (B::P1MinusLL(0), cb.clone()),
        (B::P1MinusLL(1), cb.clone()),
    ] {
        let r = find_critical(ext, &spec, (0.5, 1.7), 1e-3, &opts).unwrap();
        assert!((r.value - 1.0).abs() < 1e-3, "{ext}: {}", r.value);
        assert!(r.hi - r.lo < 1e-3);
    }
}

#[test]
fn higher_canonical_bundle_criticals_match_the_oracle() {
    let fx = fixtures();
    let cb = GeometrySpec::canonical_bundle(0.0, 1.0);
    for l in [2, 3] {
        let want = fixture(&fx, &format!("alpha{l}_crit")).unwrap();
        let r = find_critical(
            B::P1MinusLL(l),
            &cb,
            (1.0, 8.0),
            1e-3,
            &CriticalOptions::default(),
        )
        .unwrap();
        assert!(
            (r.value - want.value).abs() < want.tolerance,
            "l={l}: {} vs {}",
            r.value,
            want.value
        );
        assert!(r.hi - r.lo < 1e-3);
        assert!(
            r.lo_verdict.outcome.is_canonical(),
            "l={l}: {:?}",
            r.lo_verdict.outcome
        );
        assert!(
            r.hi_verdict.outcome.is_unbounded(),
            "l={l}: {:?}",
            r.hi_verdict.outcome
        );
    }
}

#[test]
fn bad_brackets_are_rejected() {
    let opts = CriticalOptions::default();
    let s = GeometrySpec::smoothing();
    assert!(find_critical(B::PId, &s, (1.5, 2.0), 1e-3, &opts).is_err());
    assert!(find_critical(B::PId, &s, (1.0, 0.5), 1e-3, &opts).is_err());
    assert_eq!(
        decide_side(B::PId, &s, 0.3, &opts).unwrap(),
        Some(Side::Canonical)
    );
    assert_eq!(
        decide_side(B::PId, &s, 1.3, &opts).unwrap(),
        Some(Side::Unbounded)
    );
}

#[test]
fn small_resolution_members() {
    for eps in [0.1, 1.0, 10.0] {
        let v = verdict(&LocalFamily::instanton(B::P0Id, eps));
        assert!(v.outcome.is_canonical(), "ε={eps}: {:?}", v.outcome);
    }
    let v = verdict(&LocalFamily::instanton(B::P0Id, 0.0));
    assert_eq!(v.outcome, Outcome::Flat2);
    let f = LocalFamily::instanton(B::P1Bold0, 0.0);
    let spec = f.default_geometry();
    let l = Launcher::for_family(&f, &spec).unwrap();
    let run = l
        .run(
            &f,
            DEFAULT_T0,
            DEFAULT_ORDER,
            &IntegratorConfig {
                t_max: 20.0,
                ..Default::default()
            },
            &[],
        )
        .unwrap();
    let geo = Geometry::build(&spec).unwrap();
    let m = l.model(&f);
    let mut worst: f64 = 0.0;
    for t in [0.01, 0.1, 1.0, 5.0, 20.0] {
        let s = run.state_at(m.as_ref(), t).unwrap();
        let a = abelian_solution(&geo, -2.0, 0.0, t);
        worst = worst.max(
            (s.a0 - a.a0)
                .abs()
                .max((s.a1.abs() - a.a1.abs()).abs())
                .max((s.a2.abs() - a.a2.abs()).abs()),
        );
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn oracle_state_and_masses() {
    let fx = fixtures();
    let f = LocalFamily::instanton(B::P0Id, 0.5);
    let spec = f.default_geometry();
    let cfg = IntegratorConfig {
        t_max: 10.0,
        ..Default::default()
    };
    let run = Launcher::for_family(&f, &spec)
        .unwrap()
        .run(&f, DEFAULT_T0, DEFAULT_ORDER, &cfg, &[])
        .unwrap();
    let s = *run.states().last().unwrap();
    for (name, v) in [("r_half_a0_t10", s.a0), ("r_half_a2_t10", s.a2)] {
        let w = fixture(&fx, name).unwrap();
        assert!(
            (v - w.value).abs() < w.tolerance,
            "{name}: {v} vs {}",
            w.value
        );
    }
    for chi in [0.5, 1.0] {
        let v = verdict(&LocalFamily::monopole(B::PId, 0.0, chi));
        let w = fixture(&fx, &format!("monopole_mass_chi{chi}")).unwrap();
        let m = v.outcome.mass().unwrap();
        assert!(
            (m - w.value).abs() < w.tolerance,
            "χ={chi}: {m} vs {}",
            w.value
        );
    }
}

#[test]
fn monopoles_with_positive_higgs_field() {
    for chi in [0.1, 1.0, 10.0] {
        let v = verdict(&LocalFamily::monopole(B::PId, 0.0, chi));
        assert!(v.outcome.is_canonical(), "χ={chi}: {:?}", v.outcome);
        assert!(v.outcome.mass().unwrap() > 0.0);
        assert!(v.decay, "χ={chi}");
    }
}

#[test]
fn monopoles_that_do_not_decay() {
    let fams = [
        LocalFamily::monopole(B::PId, 0.0, -1.0),
        LocalFamily::monopole(B::PId, 0.5, -0.5),
        LocalFamily::monopole(B::P0Id, 0.5, 0.5),
        LocalFamily::monopole(B::P1Bold0, 0.5, 0.5),
        LocalFamily::monopole(B::P1MinusLL(2), 0.1, 0.2),
    ];
    for f in fams {
        assert!(!verdict(&f).decay, "{f:?}");
    }
}

#[test]
fn regions_are_forward_invariant() {
    for (r, m, spec) in flux_suite() {
        let geo = Geometry::build(&spec).unwrap();
        let rep = region_flux_test(r, m.as_ref(), &geo, &FluxOptions::default()).unwrap();
        assert_eq!(rep.n_checked, 1000);
        assert!(
            rep.pass,
            "{} on {:?}: {:?}",
            rep.region, spec.kind, rep.worst
        );
    }
}

#[test]
fn flux_test_rejects_mismatched_models() {
    let geo = Geometry::build(&GeometrySpec::smoothing()).unwrap();
    assert!(region_flux_test(
        Region::R0,
        &SmoothingInstanton,
        &geo,
        &FluxOptions::default()
    )
    .is_err());
    let bad = FluxOptions {
        margin: 0.0,
        ..Default::default()
    };
    assert!(region_flux_test(Region::S0, &SmoothingInstanton, &geo, &bad).is_err());
}

#[test]
fn comparison_rejects_unordered_pairs() {
    let geo = Geometry::build(&GeometrySpec::small_resolution()).unwrap();
    let cfg = IntegratorConfig::default();
    assert!(comparison_test(&geo, [0.0, 0.5], [-0.5, 0.2], (0.1, 10.0), &cfg).is_err());
    assert!(comparison_test(&geo, [-0.5, 0.1], [0.0, 0.5], (0.1, 10.0), &cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn comparison_order_is_preserved(
        a0 in -3.0..1.0f64, da in 0.01..1.0f64, b2 in 0.0..1.5f64, db in 0.01..1.0f64, t in 0.05..5.0f64,
    ) {
        let geo = Geometry::build(&GeometrySpec::small_resolution()).unwrap();
        let rep = comparison_test(&geo, [a0, b2 + db], [a0 + da, b2], (t, 50.0 * t), &IntegratorConfig::default()).unwrap();
        prop_assert!(rep.order_ok, "{:?}", rep);
    }

    #[test]
    fn masses_are_positive_for_positive_chi(chi in 0.05..5.0f64) {
        let v = verdict(&LocalFamily::monopole(B::PId, 0.0, chi));
        prop_assert!(v.outcome.mass().unwrap() > 0.0);
    }

    #[test]
    fn negative_chi_never_decays(chi in -5.0..-0.05f64) {
        prop_assert!(!verdict(&LocalFamily::monopole(B::PId, 0.0, chi)).decay);
    }
}
