use cylab::bubbling::{
    body_limit_check, bubble_metric, eh_state, eh_state_deriv, rescaled_state, AsdModel,
    BubbleFamily, EhProfile, RescaleMode, RescaleSpec,
};
use cylab::connections::{BundleExtension as B, ConnectionState};
use cylab::flows::{eh_profile, rhs, EguchiHansonAsd, IntegratorConfig};
use cylab::geometry::{Geometry, GeometrySpec};
use cylab::local_families::{Launcher, LocalFamily, DEFAULT_ORDER};

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

#[test]
fn eh_profile_solves_the_asd_system() {
    let eh = eh_profile();
    let cone = Geometry::build(&GeometrySpec::cone()).unwrap();
    for l in [1, 2, 3] {
        let m = EguchiHansonAsd {
            l,
            profile: eh.clone(),
        };
        for kappa in [0.0, 0.5, 1.0] {
            for t in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0] {
                let sigma = eh.sigma(t);
                let (a0, a2) = eh_state(l, kappa, sigma);
                let (d0, d2) = eh_state_deriv(l, kappa, sigma);
                let ds = 1.0 / (2.0 * sigma).cosh().sqrt();
                let f = rhs(&m, &[a0, a2], &cone, t).unwrap();
                let res = (f[0] - ds * d0).abs().max((f[1] - ds * d2).abs());
                assert!(res < 1e-8, "l={l} κ={kappa} t={t}: {res}");
            }
        }
    }
}

#[test]
fn eh_profile_matches_the_varphi_form() {
    for (l, kappa, varphi) in [(1, 0.5, 1.3), (2, 0.9, 2.0), (3, 0.2, 4.0)] {
        let sigma = EhProfile::sigma_of_varphi(varphi);
        let x = ((varphi * varphi - 1.0) / (varphi * varphi + 1.0)).powi(l);
        let lf = l as f64;
        let a0 = lf / (varphi * varphi) * (1.0 + kappa * x) / (1.0 - kappa * x);
        let a2 = 2.0 * lf / (1.0 - kappa * x) * (kappa * x / (varphi.powi(4) - 1.0)).sqrt();
        let (b0, b2) = eh_state(l, kappa, sigma);
        assert!((a0 - b0).abs() < 1e-12 && (a2 - b2).abs() < 1e-12);
    }
}

#[test]
fn eh_radial_function_solves_its_equation() {
    let eh = EhProfile::new();
    for t in [0.05, 0.5, 3.0, 40.0] {
        let h = 1e-5 * t;
        let v = |t: f64| EhProfile::varphi(eh.sigma(t));
        let d = (v(t + h) - v(t - h)) / (2.0 * h);
        let p = v(t);
        assert!((d * d - (1.0 - p.powi(-4))).abs() < 1e-8, "t={t}");
    }
    assert_eq!(EhProfile::varphi(eh.sigma(0.0)), 1.0);
}

#[test]
fn eh_special_members() {
    let sigma = EhProfile::sigma_of_varphi(1e3);
    for l in [1, 2, 3] {
        for s in [0.0, 0.3, 2.0] {
            assert_eq!(eh_state(l, 0.0, s).1, 0.0);
        }
    }
    let (a0, a2) = eh_state(1, 1.0, sigma);
    assert!(
        (a0 - 1.0).abs() < 1e-2 && (a2 - 1.0).abs() < 1e-2,
        "{a0} {a2}"
    );
    for kappa in [0.25, 0.5, 1.0] {
        let (a0, a2) = eh_state(1, kappa, 0.0);
        assert_eq!(a0, 1.0);
        assert!((a2 - f64::sqrt(kappa)).abs() < 1e-15);
    }
}

#[test]
fn flat_profile_blows_up_for_negative_kappa() {
    let eh = eh_profile();
    let m = AsdModel::FlatC2 { kappa: -4.0 };
    assert!(m.profile(&eh, 0.49).is_some());
    assert!(m.profile(&eh, 0.51).is_none());
    let (a, _) = AsdModel::FlatC2 { kappa: 1.0 }.profile(&eh, 2.0).unwrap();
    assert_eq!(a, 0.2);
}

#[test]
fn rescaling_the_flat_trajectory_is_constant() {
    let flat = |t: f64| Some(ConnectionState::gauge_fixed(t, -1.0, 0.0, 1.0, 0.0));
    let pts = rescaled_state(flat, RescaleSpec::adiabatic(1.0), &[0.0, 0.5, 3.0]).unwrap();
    assert!(pts.iter().all(|p| p.a0 == 1.0 && p.a2 == 1.0));
    let spec = RescaleSpec {
        delta: 2.0,
        mode: RescaleMode::FibreOnly,
    };
    let pts = rescaled_state(flat, spec, &[1.0]).unwrap();
    assert_eq!((pts[0].a0, pts[0].a2), (-1.0, 1.0));
    assert!(rescaled_state(|_| None, spec, &[1.0]).is_err());
    assert!(rescaled_state(flat, RescaleSpec::adiabatic(0.0), &[1.0]).is_err());
}

#[test]
fn fibre_only_limit_of_canonical_bundle_members() {
    let spec = GeometrySpec::canonical_bundle(0.0, 1.0);
    let cfg = IntegratorConfig {
        t_max: 2e-3,
        ..Default::default()
    };
    for l in [1, 2, 3] {
        let delta: f64 = 1e-3;
        let f = LocalFamily::instanton(B::P1MinusLL(l), delta.powi(1 - l));
        let launcher = Launcher::for_family(&f, &spec).unwrap();
        let run = launcher
            .run(&f, 1e-2 * delta, DEFAULT_ORDER, &cfg, &[])
            .unwrap();
        let m = launcher.model(&f);
        let ts = [0.0, 0.25, 0.5, 1.0];
        let spec = RescaleSpec {
            delta,
            mode: RescaleMode::FibreOnly,
        };
        let pts = rescaled_state(|t| run.state_at(m.as_ref(), t), spec, &ts).unwrap();
        for p in pts {
            let want = (1.0 - 2.0 * l as f64, p.t.powi(l - 1));
            assert!(
                (p.a0 - want.0).abs() < 1e-4 && (p.a2 - want.1).abs() < 1e-4,
                "l={l}: {p:?}"
            );
        }
    }
}

#[test]
fn small_resolution_bubbles_to_the_flat_instanton() {
    let cfg = IntegratorConfig::default();
    let rows = bubble_metric(
        BubbleFamily::SmallResolution,
        AsdModel::FlatC2 { kappa: 1.0 },
        (0.0, 5.0),
        &[10.0, 1e2, 1e3],
        &cfg,
    )
    .unwrap();
    let d: Vec<f64> = rows.iter().map(|r| r.sup_distance).collect();
    assert!(strictly_decreasing(&d), "{d:?}");
    assert!(d[2] < 0.05, "{d:?}");
    assert!((rows[2].delta - (2.0f64 / 1e3).sqrt()).abs() < 1e-15);
}

#[test]
fn canonical_bundle_bubbles_to_eguchi_hanson() {
    let cfg = IntegratorConfig::default();
    for l in [1, 2] {
        let fam = BubbleFamily::CanonicalBundle { l, kappa: 0.5 };
        let rows = bubble_metric(fam, fam.model(), (0.0, 5.0), &[0.3, 0.1, 0.03], &cfg).unwrap();
        let d: Vec<f64> = rows.iter().map(|r| r.sup_distance).collect();
        assert!(strictly_decreasing(&d), "l={l}: {d:?}");
    }
}

#[test]
fn negative_members_track_the_divergent_flat_profile() {
    // κ = −1 after rescaling: the flat profile escapes at t = 1.
    for eps in [-10.0f64, -100.0] {
        let f = LocalFamily::instanton(B::P0Id, eps);
        let l = Launcher::for_family(&f, &f.default_geometry()).unwrap();
        let delta = (2.0 / -eps).sqrt();
        let cfg = IntegratorConfig {
            t_max: 10.0 * delta,
            ..Default::default()
        };
        let run = l.run(&f, 1e-3 * delta, DEFAULT_ORDER, &cfg, &[]).unwrap();
        let t = run.traj.t_escape().expect("blow-up") / delta;
        assert!((t - 1.0).abs() < 0.35, "eps={eps}: rescaled escape at {t}");
    }
}

#[test]
fn body_converges_to_the_abelian_member() {
    let cfg = IntegratorConfig::default();
    let rows = body_limit_check(&[10.0, 1e2, 1e3], (1.0, 10.0), &cfg).unwrap();
    let d: Vec<f64> = rows.iter().map(|r| r.sup_distance).collect();
    assert!(strictly_decreasing(&d) && d[2] < 0.05, "{d:?}");
    for r in &rows {
        assert!(r.reconstruction_gap < 1e-6, "{r:?}");
    }
    let inner = body_limit_check(&[1e2], (2.0, 5.0), &cfg).unwrap();
    assert!(inner[0].sup_distance <= rows[1].sup_distance);
    assert!(body_limit_check(&[1e2], (0.0, 5.0), &cfg).is_err());
}
