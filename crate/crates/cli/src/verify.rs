//! Invariant suites behind `cylab verify`.

use cylab::classify::{comparison_suite, flux_suite, region_flux_test, FluxOptions};
use cylab::connections::ConnectionState;
use cylab::flows::{integrate, FullMonopole, IntegratorConfig, Model};
use cylab::geometry::{Geometry, GeometrySpec};
use serde::Serialize;

use crate::config::Suite;

pub const RESIDUAL_TOL: f64 = 1e-8;
pub const DRIFT_TOL: f64 = 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-8;
pub const COMPARISON_PAIRS: usize = 200;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value < tolerance`.
    fn below(suite: &'static str, name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            suite,
            name: name.into(),
            value,
            tolerance,
            pass: value < tolerance,
        }
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
}

fn backgrounds() -> Vec<(&'static str, GeometrySpec)> {
    vec![
        ("cone", GeometrySpec::cone()),
        ("smoothing", GeometrySpec::smoothing()),
        ("small_resolution", GeometrySpec::small_resolution()),
        ("canonical_bundle", GeometrySpec::canonical_bundle(0.3, 1.0)),
    ]
}

fn geometry_suite() -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    for (name, spec) in backgrounds() {
        let g = Geometry::build(&spec)?;
        let res = log_grid(1e-2, 100.0, 400)
            .map(|t| g.hypo_residual(t))
            .fold(0.0, f64::max);
        out.push(Check::below(
            "geometry",
            format!("{name}: hypo_residual on [1e-2, 100]"),
            res,
            RESIDUAL_TOL,
        ));
        let at1 = g.sample(1.0);
        let (u0, lv0) = (at1.u0, at1.lambda * at1.v0);
        let (mut du0, mut dlv0) = (0.0f64, 0.0f64);
        for t in log_grid(1e-4, 1e4, 200) {
            let h = g.sample(t);
            du0 = du0.max((h.u0 - u0).abs());
            dlv0 = dlv0.max((h.lambda * h.v0 - lv0).abs());
        }
        out.push(Check::below(
            "geometry",
            format!("{name}: u0 drift"),
            du0,
            DRIFT_TOL,
        ));
        out.push(Check::below(
            "geometry",
            format!("{name}: lambda*v0 drift"),
            dlv0,
            DRIFT_TOL,
        ));
    }
    Ok(out)
}

/// Relative sup-distance between the image of a solution under `map` and
/// the solution launched from the mapped initial state.
fn symmetry_defect(
    g: &Geometry,
    map: fn(&ConnectionState) -> ConnectionState,
) -> anyhow::Result<f64> {
    let m = FullMonopole;
    let cfg = IntegratorConfig {
        t_max: 30.0,
        ..Default::default()
    };
    let (t0, x0) = (0.4, [0.1, 0.4, 0.2, 0.3]);
    let a = integrate(&m, g, t0, &x0, &cfg, &[])?;
    let y0 = m.from_state(&map(&m.to_state(t0, &x0)));
    let b = integrate(&m, g, t0, &y0, &cfg, &[])?;
    let t_end = a.t_end().min(b.t_end());
    let mut worst = 0.0f64;
    for k in 0..200 {
        let t = (t0 + (t_end - t0) * k as f64 / 199.0).min(t_end);
        let (Some(xa), Some(xb)) = (a.interp(t), b.interp(t)) else {
            continue;
        };
        let sa = map(&m.to_state(t, &xa)).as_array();
        let sb = m.to_state(t, &xb).as_array();
        let size = sb.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        // Past 10³ the comparison measures rounding growth near the escape.
        if size <= 1e3 {
            let d = sa
                .iter()
                .zip(&sb)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
            worst = worst.max(d / size);
        }
    }
    Ok(worst)
}

fn symmetry_suite() -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    for (name, spec) in [
        ("smoothing", GeometrySpec::smoothing()),
        ("small_resolution", GeometrySpec::small_resolution()),
        (
            "canonical_bundle(0.3,1)",
            GeometrySpec::canonical_bundle(0.3, 1.0),
        ),
    ] {
        let d = symmetry_defect(&Geometry::build(&spec)?, |s| s.gauge_flip())?;
        out.push(Check::below(
            "symmetry",
            format!("{name}: gauge flip"),
            d,
            SYMMETRY_TOL,
        ));
    }
    for (name, spec) in [
        ("cone", GeometrySpec::cone()),
        ("smoothing", GeometrySpec::smoothing()),
        (
            "canonical_bundle(0,1)",
            GeometrySpec::canonical_bundle(0.0, 1.0),
        ),
    ] {
        let d = symmetry_defect(&Geometry::build(&spec)?, |s| s.metric_flip())?;
        out.push(Check::below(
            "symmetry",
            format!("{name}: metric flip"),
            d,
            SYMMETRY_TOL,
        ));
    }
    Ok(out)
}

fn regions_suite(samples: usize) -> anyhow::Result<Vec<Check>> {
    let opts = FluxOptions {
        n_samples: samples,
        ..Default::default()
    };
    let mut out = Vec::new();
    for (region, model, spec) in flux_suite() {
        let rep = region_flux_test(region, model.as_ref(), &Geometry::build(&spec)?, &opts)?;
        out.push(Check {
            suite: "regions",
            name: format!(
                "{} / {} on {:?} ({} samples)",
                rep.region, rep.model, spec.kind, rep.n_checked
            ),
            value: rep.worst.map_or(f64::NAN, |w| w.value),
            tolerance: opts.margin,
            pass: rep.pass,
        });
    }
    Ok(out)
}

fn comparison_checks(cfg: &IntegratorConfig) -> anyhow::Result<Vec<Check>> {
    let reps = comparison_suite(COMPARISON_PAIRS, cfg)?;
    let failed = reps.iter().filter(|r| !r.order_ok).count();
    Ok(vec![Check {
        suite: "comparison",
        name: format!("order preserved for {} pairs", reps.len()),
        value: failed as f64,
        tolerance: 0.0,
        pass: failed == 0,
    }])
}

pub fn run(suite: Suite, samples: usize, cfg: &IntegratorConfig) -> anyhow::Result<Vec<Check>> {
    Ok(match suite {
        Suite::Geometry => geometry_suite()?,
        Suite::Regions => regions_suite(samples)?,
        Suite::Symmetry => symmetry_suite()?,
        Suite::Comparison => comparison_checks(cfg)?,
        Suite::All => {
            let mut v = geometry_suite()?;
            v.extend(regions_suite(samples)?);
            v.extend(symmetry_suite()?);
            v.extend(comparison_checks(cfg)?);
            v
        }
    })
}
