use cylab::connections::{abelian_solution, explicit_instanton, BundleExtension as B};
use cylab::flows::IntegratorConfig;
use cylab::geometry::{Geometry, GeometrySpec};
use cylab::local_families::{catalogue, Launcher, LocalFamily, DEFAULT_ORDER};
use proptest::prelude::*;

fn launcher(f: &LocalFamily) -> Launcher {
    Launcher::for_family(f, &f.default_geometry()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn smoothing_series_matches_printed_terms() {
    for xi in [-0.7, 0.0, 0.5, 1.3] {
        let f = LocalFamily::instanton(B::PId, xi);
        let d = launcher(&f).taylor(&f, 6).unwrap();
        let c = &d.coefficients;
        let ap = |k: usize| c[1][k] + c[2][k];
        let am = |k: usize| c[1][k] - c[2][k];
        assert!(close(c[0][0], xi, 1e-12) && close(ap(0), 1.0, 1e-12) && close(am(0), xi, 1e-12));
        assert!(
            close(c[0][2], 0.9 * xi * (xi * xi - 1.0), 1e-10),
            "a0: {:?}",
            c[0]
        );
        assert!(close(ap(2), 9.0 / 8.0 * (xi * xi - 1.0), 1e-10));
        assert!(close(am(2), 27.0 / 40.0 * xi * (xi * xi - 1.0), 1e-10));
        assert!(c[5].iter().all(|&v| v == 0.0));
    }
}

#[test]
fn small_resolution_series_matches_printed_terms() {
    let (eps, delta) = (0.4, 0.3);
    let f = LocalFamily::monopole(B::P0Id, eps, delta);
    let c = launcher(&f).taylor(&f, 6).unwrap().coefficients;
    let s3 = 3f64.sqrt();
    assert!(close(c[0][0], -1.0, 1e-12) && close(c[0][2], eps, 1e-10));
    assert!(close(c[1][0], 0.0, 1e-12) && close(c[1][2], -delta / s3, 1e-10));
    assert!(close(c[2][0], 1.0, 1e-12) && close(c[2][2], -eps / 2.0, 1e-10));
    assert!(close(c[5][0], 0.0, 1e-12) && close(c[5][2], delta, 1e-10));
}

#[test]
fn p1bold0_series_matches_printed_terms() {
    let (e, d) = (0.6, 0.5);
    let f = LocalFamily::monopole(B::P1Bold0, e, d);
    let c = launcher(&f).taylor(&f, 6).unwrap().coefficients;
    assert!(close(c[0][0], 1.0, 1e-12) && close(c[1][0], e, 1e-12));
    assert!(
        close(c[2][2], -3f64.sqrt() / 4.0 * e * d, 1e-10),
        "a2: {:?}",
        c[2]
    );
    // Pulled back by the metric symmetry, the instanton member reads a0 ↦ −a0.
    let f = LocalFamily::instanton(B::P1Bold0, e);
    let c = launcher(&f).taylor(&f, 6).unwrap().coefficients;
    assert!(
        close(-c[0][2], -0.75 * (e * e - 1.0), 1e-10),
        "a0: {:?}",
        c[0]
    );
    assert!(
        close(c[1][2], 3.0 / 8.0 * e * (e * e - 1.0), 1e-10),
        "a1: {:?}",
        c[1]
    );
}

#[test]
fn canonical_bundle_l1_series_matches_printed_terms() {
    let spec = GeometrySpec::canonical_bundle(0.2, 1.0);
    let s = 1.2;
    for alpha in [0.3, 0.7, 1.0, 1.8] {
        let f = LocalFamily::instanton(B::P1MinusLL(1), alpha);
        let c = Launcher::new(f.extension, &spec)
            .unwrap()
            .taylor(&f, 6)
            .unwrap()
            .coefficients;
        assert!(close(c[0][0], -1.0, 1e-12) && close(c[2][0], alpha, 1e-12));
        assert!(
            close(c[0][2], -6.0 / s * (alpha * alpha - 1.0), 1e-9),
            "a0: {:?}",
            c[0]
        );
        assert!(
            close(c[2][2], 1.5 / s * alpha * (alpha * alpha - 1.0), 1e-9),
            "a2: {:?}",
            c[2]
        );
    }
}

#[test]
fn canonical_bundle_higher_l_leading_terms() {
    let f = LocalFamily::monopole(B::P1MinusLL(2), 0.7, 0.4);
    let c = launcher(&f).taylor(&f, 6).unwrap().coefficients;
    assert!(close(c[0][0], -3.0, 1e-12));
    assert!(close(c[2][0], 0.0, 1e-14) && close(c[2][1], 0.7, 1e-12));
    assert!(close(c[1][2], -0.7 * 0.4 / 2.0, 1e-10), "a1: {:?}", c[1]);
    assert!(close(c[5][0], 0.4, 1e-12));
}

#[test]
fn canonical_bundle_deviation_from_abelian() {
    let spec = GeometrySpec::canonical_bundle(0.3, 1.0);
    let g = Geometry::build(&spec).unwrap();
    let mu0 = (1.0f64 - 0.09).sqrt();
    for (l, alpha) in [(2, 0.8), (3, 1.5)] {
        let f = LocalFamily::instanton(B::P1MinusLL(l), alpha);
        let t = 1e-2;
        let s = Launcher::new(f.extension, &spec)
            .unwrap()
            .launch(&f, t, DEFAULT_ORDER)
            .unwrap()
            .state;
        let c = (1.0 - 2.0 * l as f64) * mu0 * mu0 + 2.0 * 0.3 * 1.0;
        let ab = abelian_solution(&g, c, 0.0, t).a0;
        let lead = -6.0 * alpha * alpha / (l as f64 * 1.3);
        let ratio = (s.a0 - ab) / t.powi(2 * l);
        assert!(
            close(ratio, lead, 1e-2 * lead.abs()),
            "l={l}: {ratio} vs {lead}"
        );
    }
}

#[test]
fn characteristic_polynomials_match_printed_determinants() {
    for e in catalogue([0.4, 0.3], &[1, 2, 3, 5]).unwrap() {
        let ivp = &e.ivp;
        assert_eq!(ivp.char_poly.len(), 5);
        for (a, b) in ivp.char_poly.iter().zip(&ivp.printed_char_poly) {
            assert!(
                close(*a, *b, 1e-9),
                "{}: {:?} vs {:?}",
                e.extension,
                ivp.char_poly,
                ivp.printed_char_poly
            );
        }
        for (a, b) in ivp.computed_char_poly.iter().zip(&ivp.printed_char_poly) {
            assert!(
                close(*a, *b, 1e-8),
                "{} computed: {:?}",
                e.extension,
                ivp.computed_char_poly
            );
        }
        assert!(ivp.eigen_ok);
    }
}

#[test]
fn printed_determinants_for_each_extension() {
    let expand = |roots: [f64; 4]| {
        let mut p = vec![1.0];
        for r in roots {
            let mut q = vec![0.0; p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                q[i] += c;
                q[i + 1] += c * r;
            }
            p = q;
        }
        p
    };
    let cases = [
        (B::PId, expand([3.0, 3.0, 0.0, 0.0])),
        (B::P0Id, expand([6.0, 6.0, 0.0, 0.0])),
        (B::P1Bold0, expand([2.0, 2.0, 0.0, 0.0])),
        (B::P1MinusLL(4), expand([8.0, 0.0, 0.0, 0.0])),
    ];
    for (ext, want) in cases {
        let f = LocalFamily::monopole(ext, 0.3, 0.2);
        let ivp = launcher(&f).build_ivp(&f).unwrap();
        assert_eq!(ivp.printed_char_poly.len(), want.len());
        for (a, b) in ivp.char_poly.iter().zip(&want) {
            assert!(
                close(*a, *b, 1e-9),
                "{ext}: {:?} vs {want:?}",
                ivp.char_poly
            );
        }
    }
}

#[test]
fn ivp_data_for_smoothing() {
    let f = LocalFamily::monopole(B::PId, 0.5, 0.2);
    let ivp = launcher(&f).build_ivp(&f).unwrap();
    let want = [0.5, 9.0 / 8.0 * (0.25 - 1.0) - 0.2, 0.5, 0.2];
    for (a, b) in ivp.y0.iter().zip(want) {
        assert!(close(*a, b, 1e-15));
    }
}

#[test]
fn boundary_tables_hold_for_taylor_data() {
    let fams = [
        LocalFamily::monopole(B::PId, 0.3, 0.7),
        LocalFamily::monopole(B::P0Id, 0.4, 0.3),
        LocalFamily::monopole(B::P1Bold0, 0.6, 0.5),
        LocalFamily::monopole(B::P1MinusLL(1), 0.7, 0.2),
        LocalFamily::monopole(B::P1MinusLL(3), 0.7, 0.2),
        LocalFamily::monopole(B::P1MinusLL(0), 0.7, 0.2),
        LocalFamily::monopole(B::P1MinusLL(-2), 0.7, 0.2),
    ];
    for f in fams {
        let d = launcher(&f).taylor(&f, 8).unwrap();
        f.extension
            .boundary_conditions()
            .check(&d.coefficients, 1e-9)
            .unwrap_or_else(|e| panic!("{}: {e}", f.extension));
    }
}

#[test]
fn smoothing_higgs_field_is_odd() {
    let f = LocalFamily::monopole(B::PId, 0.3, 0.7);
    let c = launcher(&f).taylor(&f, 8).unwrap().coefficients;
    for k in (0..=8).step_by(2) {
        assert!(c[5][k].abs() < 1e-12, "φ t^{k}: {}", c[5][k]);
    }
    assert!(close(c[5][1], 0.7, 1e-12));
}

#[test]
fn nonpositive_l_uses_the_swapped_frame() {
    let f = LocalFamily::instanton(B::P1MinusLL(0), 0.6);
    let l = launcher(&f);
    assert!(l.flip);
    assert_eq!(l.frame_extension, B::P1MinusLL(1));
    let c = l.taylor(&f, 4).unwrap().coefficients;
    assert!(close(c[0][0], 1.0, 1e-12) && close(c[1][0], 0.6, 1e-12) && c[2][0].abs() < 1e-14);
}

#[test]
fn explicit_instanton_launch() {
    let f = LocalFamily::instanton(B::PId, 0.0);
    let l = launcher(&f);
    let s = l.launch(&f, 1e-3, DEFAULT_ORDER).unwrap();
    let e = explicit_instanton(&l.geometry, s.t0);
    for (a, b) in s.state.as_array().iter().zip(e.as_array()) {
        assert!(close(*a, b, 1e-9), "{:?} vs {:?}", s.state, e);
    }
}

#[test]
fn critical_p1bold0_launch_is_flat() {
    let f = LocalFamily::instanton(B::P1Bold0, 1.0);
    let s = launcher(&f).launch(&f, 1e-3, DEFAULT_ORDER).unwrap().state;
    assert!(close(s.a0, 1.0, 1e-6) && close(s.a1, 1.0, 1e-6) && s.a2.abs() < 1e-6 && s.phi == 0.0);
}

#[test]
fn critical_l1_launch_is_flat() {
    let f = LocalFamily::instanton(B::P1MinusLL(1), 1.0);
    let t0: f64 = 1e-3;
    let s = launcher(&f).launch(&f, t0, DEFAULT_ORDER).unwrap().state;
    assert!(
        close(s.a0, -1.0, 10.0 * t0.powi(4)) && close(s.a2, 1.0, 10.0 * t0.powi(4)),
        "{s:?}"
    );
}

#[test]
fn launch_error_estimate_is_small() {
    for f in [
        LocalFamily::monopole(B::PId, 0.5, 0.5),
        LocalFamily::monopole(B::P0Id, 1.0, 1.0),
        LocalFamily::monopole(B::P1MinusLL(2), 1.0, 1.0),
    ] {
        let s = launcher(&f).launch(&f, 1e-3, DEFAULT_ORDER).unwrap();
        assert!(s.error < 1e-12, "{}: {}", f.extension, s.error);
    }
}

#[test]
fn launch_refuses_times_beyond_the_series_range() {
    let f = LocalFamily::instanton(B::PId, 0.2);
    assert!(launcher(&f).launch(&f, 0.5, DEFAULT_ORDER).is_err());
    assert!(launcher(&f).launch(&f, -1e-3, DEFAULT_ORDER).is_err());
}

#[test]
fn instanton_families_reject_a_second_parameter() {
    let mut f = LocalFamily::instanton(B::P0Id, 0.2);
    f.params[1] = 0.1;
    assert!(f.validate().is_err());
    let f = LocalFamily::instanton(B::P0Id, 0.2);
    assert!(Launcher::for_family(&f, &GeometrySpec::smoothing()).is_err());
}

fn launch_robustness(f: LocalFamily) {
    let l = launcher(&f);
    let cfg = IntegratorConfig {
        rtol: 1e-13,
        atol: 1e-15,
        t_max: 1.0,
        ..Default::default()
    };
    let a = l.run(&f, 1e-3, DEFAULT_ORDER, &cfg, &[]).unwrap();
    let b = l.run(&f, 5e-4, DEFAULT_ORDER, &cfg, &[]).unwrap();
    let (sa, sb) = (
        a.states().last().copied().unwrap(),
        b.states().last().copied().unwrap(),
    );
    // Launch truncation plus the integrator's own error budget over the run.
    let budget = a.launch.error + b.launch.error + 1e-9;
    for (x, y) in sa.as_array().iter().zip(sb.as_array()) {
        assert!(
            (x - y).abs() < 10.0 * budget,
            "{}: {sa:?} vs {sb:?}",
            f.extension
        );
    }
}

#[test]
fn launches_at_different_times_agree() {
    launch_robustness(LocalFamily::instanton(B::PId, 0.5));
    launch_robustness(LocalFamily::monopole(B::PId, 0.2, 0.4));
    launch_robustness(LocalFamily::instanton(B::P0Id, 0.5));
    launch_robustness(LocalFamily::instanton(B::P1Bold0, 0.7));
    launch_robustness(LocalFamily::instanton(B::P1MinusLL(2), 0.5));
    launch_robustness(LocalFamily::instanton(B::P1MinusLL(-1), 0.5));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn instanton_series_have_no_higgs_component(p in -2.0..2.0f64, which in 0usize..4) {
        let ext = [B::PId, B::P0Id, B::P1Bold0, B::P1MinusLL(2)][which];
        let f = LocalFamily::instanton(ext, p);
        let d = launcher(&f).taylor(&f, 6).unwrap();
        prop_assert!(d.coefficients[5].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn small_resolution_series_are_even(e in -2.0..2.0f64, d in -2.0..2.0f64) {
        let f = LocalFamily::monopole(B::P0Id, e, d);
        let c = launcher(&f).taylor(&f, 7).unwrap().coefficients;
        for field in [0, 1, 2, 5] {
            for k in (1..=7).step_by(2) {
                prop_assert!(c[field][k].abs() < 1e-9, "field {field} t^{k}: {}", c[field][k]);
            }
        }
    }
}
