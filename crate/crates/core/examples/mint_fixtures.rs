//! Mint the oracle fixtures consumed by the test suite.
//!
//! cargo run --release -p cylab --example mint_fixtures [-- <out.json>]

use cylab::classify::{find_critical, CriticalOptions};
use cylab::connections::BundleExtension as B;
use cylab::flows::IntegratorConfig;
use cylab::geometry::GeometrySpec;
use cylab::local_families::{Launcher, LocalFamily, DEFAULT_ORDER, DEFAULT_T0};
use cylab::oracle::{
    oracle_bisect, oracle_family, oracle_series, Fixture, OracleMethod, OracleResult, FINE_STEP,
};

fn admit(out: &mut Vec<Fixture>, r: OracleResult, tolerance: f64) {
    println!(
        "{:<28} {:>22.15e}  {:?}  resolution {:e}  discrepancy {:.2e}  tolerance {:e}",
        r.name, r.value, r.method, r.resolution, r.discrepancy, tolerance
    );
    assert!(
        r.discrepancy < tolerance,
        "{} disagrees with the main pipeline",
        r.name
    );
    out.push(Fixture {
        name: r.name,
        value: r.value,
        method: r.method,
        tolerance,
    });
}

fn main() -> cylab::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/oracle.json").to_string()
    });
    let mut out = Vec::new();
    let cfg = IntegratorConfig::default();

    // Critical parameters of the canonical-bundle families.
    let cb = GeometrySpec::canonical_bundle(0.0, 1.0);
    for (l, bracket) in [(2, (2.0, 4.0)), (3, (6.0, 9.0))] {
        let (lo, hi) = oracle_bisect(B::P1MinusLL(l), &cb, bracket, 1e-5, FINE_STEP, 1e4)?;
        let value = 0.5 * (lo + hi);
        let main = find_critical(
            B::P1MinusLL(l),
            &cb,
            (1.0, 8.0),
            1e-4,
            &CriticalOptions::default(),
        )?;
        admit(
            &mut out,
            OracleResult {
                name: format!("alpha{l}_crit"),
                value,
                method: OracleMethod::GridBisect,
                resolution: hi - lo,
                discrepancy: (main.value - value).abs(),
            },
            1e-3,
        );
    }

    // R_ε at ε = 1/2, state at t = 10.
    let f = LocalFamily::instanton(B::P0Id, 0.5);
    let spec = f.default_geometry();
    let (_, s) = oracle_family(
        &f,
        &spec,
        DEFAULT_T0,
        DEFAULT_ORDER,
        FINE_STEP,
        10.0,
        |_| false,
    )?;
    let main = Launcher::for_family(&f, &spec)?.run(
        &f,
        DEFAULT_T0,
        DEFAULT_ORDER,
        &IntegratorConfig {
            t_max: 10.0,
            ..cfg.clone()
        },
        &[],
    )?;
    let m = main.states().last().copied().expect("samples");
    for (name, v, w) in [("r_half_a0_t10", s.a0, m.a0), ("r_half_a2_t10", s.a2, m.a2)] {
        admit(
            &mut out,
            OracleResult {
                name: name.into(),
                value: v,
                method: OracleMethod::FixedStepRK,
                resolution: FINE_STEP,
                discrepancy: (v - w).abs(),
            },
            1e-7,
        );
    }

    // Monopole masses of (S, Φ)_{0,χ} by two-point extrapolation at T = 10³.
    for chi in [0.5, 1.0] {
        let f = LocalFamily::monopole(B::PId, 0.0, chi);
        let spec = f.default_geometry();
        let phi = |t: f64| -> cylab::Result<f64> {
            Ok(
                oracle_family(&f, &spec, DEFAULT_T0, DEFAULT_ORDER, FINE_STEP, t, |_| {
                    false
                })?
                .1
                .phi,
            )
        };
        let value = 2.0 * phi(1e3)? - phi(5e2)?;
        let (_, v) = cylab::classify::classify_family(
            &f,
            &spec,
            DEFAULT_T0,
            DEFAULT_ORDER,
            &cfg,
            &Default::default(),
        )?;
        let main = v.outcome.mass().expect("canonical");
        admit(
            &mut out,
            OracleResult {
                name: format!("monopole_mass_chi{chi}"),
                value,
                method: OracleMethod::FixedStepRK,
                resolution: FINE_STEP,
                discrepancy: (main - value).abs(),
            },
            1e-6,
        );
    }

    // Stenzel expansions in time.
    let geo = cylab::geometry::Geometry::build(&GeometrySpec::smoothing())?;
    let data = geo.series_data(6)?;
    for (id, key, orders) in [
        ("lambda_stenzel_t", "lambda", [2, 4, 6]),
        ("mu_stenzel_t", "mu", [1, 3, 5]),
    ] {
        let c = oracle_series(id, 6)?;
        for k in orders {
            let main = data.coefficients[key][k];
            admit(
                &mut out,
                OracleResult {
                    name: format!("{key}_stenzel_t{k}"),
                    value: c[k],
                    method: OracleMethod::SeriesExpansion,
                    resolution: 6.0,
                    discrepancy: (main - c[k]).abs(),
                },
                1e-10,
            );
        }
    }

    if let Some(dir) = std::path::Path::new(&path).parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&path, serde_json::to_string_pretty(&out)? + "\n")?;
    println!("wrote {} fixtures to {path}", out.len());
    Ok(())
}
