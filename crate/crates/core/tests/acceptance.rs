//! Acceptance gate: one PASS/FAIL line per criterion; exits non-zero if any fail.

use std::time::Instant;

use cylab::bubbling::{body_limit_check, bubble_metric, AsdModel, BubbleFamily};
use cylab::classify::{
    classify_family, comparison_suite, find_critical, flux_suite, region_flux_test, ClassifyConfig,
    CriticalOptions, FluxOptions, TrajectoryVerdict,
};
use cylab::connections::{abelian_solution, explicit_instanton, BundleExtension as B};
use cylab::flows::IntegratorConfig;
use cylab::geometry::{Geometry, GeometrySpec};
use cylab::local_families::{catalogue, Launcher, LocalFamily, DEFAULT_ORDER, DEFAULT_T0};
use cylab::oracle::{fixture, load_fixtures};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn verdict(f: &LocalFamily) -> Result<TrajectoryVerdict, String> {
    classify_family(
        f,
        &f.default_geometry(),
        DEFAULT_T0,
        DEFAULT_ORDER,
        &IntegratorConfig::default(),
        &ClassifyConfig::default(),
    )
    .map(|r| r.1)
    .map_err(|e| format!("{f:?}: {e}"))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn critical(
    ext: B,
    spec: &GeometrySpec,
    bracket: (f64, f64),
) -> Result<cylab::classify::CriticalResult, String> {
    find_critical(ext, spec, bracket, 1e-3, &CriticalOptions::default())
        .map_err(|e| format!("{ext}: {e}"))
}

fn explicit_instanton_reproduction() -> Outcome {
    let start = Instant::now();
    let f = LocalFamily::instanton(B::PId, 0.0);
    let spec = f.default_geometry();
    let l = Launcher::for_family(&f, &spec).map_err(|e| e.to_string())?;
    let cfg = IntegratorConfig {
        t_max: 20.0,
        ..Default::default()
    };
    let run = l
        .run(&f, DEFAULT_T0, DEFAULT_ORDER, &cfg, &[])
        .map_err(|e| e.to_string())?;
    let geo = Geometry::build(&spec).map_err(|e| e.to_string())?;
    let m = l.model(&f);
    let mut worst = 0.0f64;
    for t in log_grid(1e-2, 20.0, 400) {
        let s = run
            .state_at(m.as_ref(), t)
            .ok_or(format!("no state at {t}"))?;
        let e = explicit_instanton(&geo, t);
        worst = worst
            .max((s.a0 - e.a0).abs())
            .max((s.a1 - e.a1).abs())
            .max((s.a2 - e.a2).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-6 && secs < 1.0,
        format!("sup difference {worst:.2e} on [1e-2, 20], {secs:.3} s"),
    )
}

fn stenzel_boundary() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for (xis, want) in [
        (&[0.0, 0.5, -0.5, 0.99, -0.99][..], "Canonical"),
        (&[1.0, -1.0][..], "Flat"),
        (&[1.01, -1.01][..], "Unbounded"),
    ] {
        for &xi in xis {
            let o = verdict(&LocalFamily::instanton(B::PId, xi))?.outcome;
            let ok = match want {
                "Canonical" => o.is_canonical(),
                "Flat" => o.is_flat(),
                _ => o.is_unbounded(),
            };
            if !ok {
                bad.push(format!("ξ={xi}: {}", o.label()));
            }
        }
    }
    let r = critical(B::PId, &GeometrySpec::smoothing(), (0.5, 2.0))?;
    let secs = start.elapsed().as_secs_f64();
    let ok = bad.is_empty() && (r.value - 1.0).abs() <= 1e-3 && secs < 30.0;
    check(
        ok,
        format!(
            "misclassified {bad:?}; ξ_crit = {:.5}; {secs:.2} s",
            r.value
        ),
    )
}

fn small_resolution_families() -> Outcome {
    let mut bad = Vec::new();
    for eps in [0.1, 1.0, 10.0] {
        let o = verdict(&LocalFamily::instanton(B::P0Id, eps))?.outcome;
        if !o.is_canonical() {
            bad.push(format!("ε={eps}: {}", o.label()));
        }
    }
    let spec = GeometrySpec::small_resolution();
    let r = critical(B::P1Bold0, &spec, (0.5, 2.0))?;
    let f = LocalFamily::instanton(B::P1Bold0, 0.0);
    let l = Launcher::for_family(&f, &spec).map_err(|e| e.to_string())?;
    let cfg = IntegratorConfig {
        t_max: 100.0,
        ..Default::default()
    };
    let run = l
        .run(&f, DEFAULT_T0, DEFAULT_ORDER, &cfg, &[])
        .map_err(|e| e.to_string())?;
    let geo = Geometry::build(&spec).map_err(|e| e.to_string())?;
    let m = l.model(&f);
    let mut worst = 0.0f64;
    for t in log_grid(1e-2, 100.0, 200) {
        let s = run
            .state_at(m.as_ref(), t)
            .ok_or(format!("no state at {t}"))?;
        let a = abelian_solution(&geo, -2.0, 0.0, t);
        worst = worst
            .max((s.a0 - a.a0).abs())
            .max((s.a1.abs() - a.a1.abs()).abs())
            .max((s.a2.abs() - a.a2.abs()).abs());
    }
    let ok = bad.is_empty() && (r.value - 1.0).abs() <= 1e-3 && worst < 1e-8;
    check(
        ok,
        format!(
            "non-canonical {bad:?}; ε'_crit = {:.5}; R'_0 vs abelian C=-2 {worst:.2e}",
            r.value
        ),
    )
}

fn canonical_bundle_dichotomies() -> Outcome {
    let cb = GeometrySpec::canonical_bundle(0.0, 1.0);
    let mut notes = Vec::new();
    let mut ok = true;
    for l in [0, 1] {
        let r = critical(B::P1MinusLL(l), &cb, (0.5, 2.0))?;
        ok &= (r.value - 1.0).abs() <= 1e-3;
        notes.push(format!("l={l}: {:.5}", r.value));
    }
    let fx = load_fixtures(std::path::Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/oracle.json"
    )))
    .map_err(|e| e.to_string())?;
    for l in [2, 3] {
        let r = critical(B::P1MinusLL(l), &cb, (1.0, 8.0))?;
        let want = fixture(&fx, &format!("alpha{l}_crit")).map_err(|e| e.to_string())?;
        ok &= r.value > 0.0
            && r.hi - r.lo <= 1e-3
            && r.lo_verdict.outcome.is_canonical()
            && r.hi_verdict.outcome.is_unbounded()
            && (r.value - want.value).abs() < want.tolerance;
        notes.push(format!(
            "l={l}: ({:.5}, {:.5}) {}/{} vs oracle {:.6}",
            r.lo,
            r.hi,
            r.lo_verdict.outcome.label(),
            r.hi_verdict.outcome.label(),
            want.value
        ));
    }
    check(ok, notes.join("; "))
}

fn bubbling() -> Outcome {
    let cfg = IntegratorConfig::default();
    let rows = bubble_metric(
        BubbleFamily::SmallResolution,
        AsdModel::FlatC2 { kappa: 1.0 },
        (0.0, 5.0),
        &[10.0, 1e2, 1e3],
        &cfg,
    )
    .map_err(|e| e.to_string())?;
    let d: Vec<f64> = rows.iter().map(|r| r.sup_distance).collect();
    let body = body_limit_check(&[10.0, 1e2, 1e3], (1.0, 10.0), &cfg).map_err(|e| e.to_string())?;
    let b: Vec<f64> = body.iter().map(|r| r.sup_distance).collect();
    let dec = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let ok = dec(&d) && d[2] < 0.05 && dec(&b) && b[2] < 0.05;
    check(ok, format!("bubble {d:.3?}; body {b:.3?}"))
}

fn monopole_moduli() -> Outcome {
    let mut bad = Vec::new();
    for chi in [0.1, 1.0, 10.0] {
        let v = verdict(&LocalFamily::monopole(B::PId, 0.0, chi))?;
        if !(v.outcome.is_canonical() && v.outcome.mass().is_some_and(|m| m > 0.0) && v.decay) {
            bad.push(format!("χ={chi}: {} decay={}", v.outcome.label(), v.decay));
        }
    }
    let mut others = vec![];
    for chi in [-0.1, -1.0, -10.0] {
        others.push(LocalFamily::monopole(B::PId, 0.0, chi));
    }
    let mut reducible = vec![];
    for p in [0.0, 0.5, -0.5] {
        for q in [0.2, -0.2, 1.0] {
            others.push(LocalFamily::monopole(B::P0Id, p, q));
            let mut v = vec![LocalFamily::monopole(B::P1Bold0, p, q)];
            v.extend([1, 2, 3].map(|l| LocalFamily::monopole(B::P1MinusLL(l), p, q)));
            // With a vanishing connection parameter these members are abelian.
            if p == 0.0 {
                reducible.extend(v)
            } else {
                others.extend(v)
            }
        }
    }
    for f in &others {
        let v = verdict(f)?;
        if v.decay {
            bad.push(format!("{} {:?}: decays", f.extension, f.params));
        }
    }
    for f in &reducible {
        let (run, _) = classify_family(
            f,
            &f.default_geometry(),
            DEFAULT_T0,
            DEFAULT_ORDER,
            &IntegratorConfig::default(),
            &ClassifyConfig::default(),
        )
        .map_err(|e| format!("{f:?}: {e}"))?;
        let irreducible = run
            .states()
            .iter()
            .any(|s| s.a1 * s.a2 != 0.0 || s.phi != f.params[1]);
        if irreducible {
            bad.push(format!("{} {:?}: not abelian", f.extension, f.params));
        }
    }
    check(
        bad.is_empty(),
        format!(
            "{} irreducible launches non-decaying, {} abelian; failures {bad:?}",
            others.len(),
            reducible.len()
        ),
    )
}

fn structure_residuals() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, spec) in [
        ("cone", GeometrySpec::cone()),
        ("smoothing", GeometrySpec::smoothing()),
        ("small_resolution", GeometrySpec::small_resolution()),
        ("canonical_bundle", GeometrySpec::canonical_bundle(0.3, 1.0)),
    ] {
        let g = Geometry::build(&spec).map_err(|e| e.to_string())?;
        let res = log_grid(1e-2, 100.0, 400)
            .into_iter()
            .map(|t| g.hypo_residual(t))
            .fold(0.0, f64::max);
        let h1 = g.sample(1.0);
        let (mut du0, mut dlv0) = (0.0f64, 0.0f64);
        for t in log_grid(1e-2, 100.0, 400) {
            let h = g.sample(t);
            du0 = du0.max((h.u0 - h1.u0).abs());
            dlv0 = dlv0.max((h.lambda * h.v0 - h1.lambda * h1.v0).abs());
        }
        ok &= res < 1e-8 && du0 < 1e-10 && dlv0 < 1e-10;
        notes.push(format!("{name}: {res:.1e}/{du0:.1e}/{dlv0:.1e}"));
    }
    check(
        ok,
        format!("residual/u0 drift/λv0 drift: {}", notes.join(", ")),
    )
}

fn region_flux() -> Outcome {
    let opts = FluxOptions::default();
    let mut bad = Vec::new();
    let mut n = 0;
    for (region, model, spec) in flux_suite() {
        let geo = Geometry::build(&spec).map_err(|e| e.to_string())?;
        let rep =
            region_flux_test(region, model.as_ref(), &geo, &opts).map_err(|e| e.to_string())?;
        n += 1;
        if !rep.pass || rep.n_checked != 1000 {
            bad.push(format!(
                "{} on {:?}: {:?}",
                rep.region, spec.kind, rep.worst
            ));
        }
    }
    check(
        bad.is_empty(),
        format!("{n} region/background pairs at 1000 samples, margin 1e-3; failures {bad:?}"),
    )
}

fn characteristic_polynomials() -> Outcome {
    let mut bad = Vec::new();
    let entries = catalogue([0.4, 0.3], &[1, 2, 3]).map_err(|e| e.to_string())?;
    for e in &entries {
        let ivp = &e.ivp;
        let same = |p: &[f64], tol: f64| {
            p.len() == ivp.printed_char_poly.len()
                && p.iter()
                    .zip(&ivp.printed_char_poly)
                    .all(|(a, b)| (a - b).abs() <= tol * (1.0 + b.abs()))
        };
        if !(same(&ivp.char_poly, 1e-9) && same(&ivp.computed_char_poly, 1e-8)) {
            bad.push(e.extension.to_string());
        }
    }
    check(
        bad.is_empty(),
        format!("{} extensions; mismatches {bad:?}", entries.len()),
    )
}

fn comparison_property() -> Outcome {
    let reps = comparison_suite(200, &IntegratorConfig::default()).map_err(|e| e.to_string())?;
    let bad: Vec<_> = reps
        .iter()
        .filter(|r| !r.order_ok)
        .map(|r| r.first_violation)
        .collect();
    check(
        reps.len() == 200 && bad.is_empty(),
        format!("{} pairs; violations at {bad:?}", reps.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        (
            "explicit instanton reproduction",
            explicit_instanton_reproduction,
        ),
        ("smoothing instanton boundary", stenzel_boundary),
        ("small-resolution families", small_resolution_families),
        ("canonical bundle dichotomies", canonical_bundle_dichotomies),
        ("bubbling", bubbling),
        ("monopole moduli", monopole_moduli),
        ("structure-equation residuals", structure_residuals),
        ("region flux suite", region_flux),
        ("characteristic polynomials", characteristic_polynomials),
        ("comparison property", comparison_property),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match &r {
            Ok(d) => println!("PASS {:>2} {name} ({secs:.2} s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2} s): {d}", i + 1)
            }
        }
    }
    println!(
        "{}/{} criteria passed in {:.1} s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
