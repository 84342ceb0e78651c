//! Subcommand implementations. Each returns whether its checks passed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use cylab::bubbling::{body_limit_check, bubble_metric};
use cylab::classify::{
    classify_family, classify_with_horizon, find_critical, CriticalOptions, Evidence, VerdictRecord,
};
use cylab::connections::ConnectionState;
use cylab::flows::{build_model, integrate, ModelSelector};
use cylab::geometry::Geometry;
use cylab::local_families::catalogue;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BubbleStudy, Command, RunConfig, Source};
use crate::verify;

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn write_states(path: &Path, states: &[ConnectionState]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "a0", "a1", "a2", "b1", "b2", "phi"])?;
    for s in states {
        w.write_record([s.t, s.a0, s.a1, s.a2, s.b1, s.b2, s.phi].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn pool(workers: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

pub fn execute(cfg: &RunConfig) -> anyhow::Result<bool> {
    let out = cfg.out_dir.as_path();
    match &cfg.command {
        Command::Geometry {
            geometry,
            t_min,
            t_max,
            points,
        } => {
            if !(*t_min >= 0.0 && t_max > t_min && *points >= 2) {
                anyhow::bail!(crate::UsageError(
                    "geometry grid needs 0 <= t_min < t_max and at least 2 points".into()
                ));
            }
            let g = Geometry::build(geometry)?;
            let mut w = csv::Writer::from_path(out.join("geometry.csv"))?;
            w.write_record(["t", "lambda", "mu", "u0", "u1", "v0", "v3"])?;
            let mut worst = 0.0f64;
            for k in 0..*points {
                let t = t_min + (t_max - t_min) * k as f64 / (*points - 1) as f64;
                let h = g.sample(t);
                if t > 0.0 {
                    worst = worst.max(g.hypo_residual(t));
                }
                w.write_record([t, h.lambda, h.mu, h.u0, h.u1, h.v0, h.v3].map(|v| v.to_string()))?;
            }
            w.flush()?;
            #[derive(Serialize)]
            struct Summary<'a> {
                geometry: &'a cylab::geometry::GeometrySpec,
                points: usize,
                max_hypo_residual: f64,
            }
            write_json(
                &out.join("geometry_summary.json"),
                &Summary {
                    geometry,
                    points: *points,
                    max_hypo_residual: worst,
                },
            )?;
            println!(
                "{:?}: max hypo_residual {worst:.3e} over {points} points",
                geometry.kind
            );
            Ok(true)
        }
        Command::Trajectory { geometry, source } => {
            let (states, record) = match source {
                Source::Family(f) => {
                    let spec = geometry.clone().unwrap_or_else(|| f.default_geometry());
                    let (run, v) = classify_family(
                        f,
                        &spec,
                        cfg.t0,
                        cfg.order,
                        &cfg.integrator,
                        &cfg.classify,
                    )?;
                    (
                        run.states(),
                        serde_json::to_value(VerdictRecord::new(f, &v))?,
                    )
                }
                Source::Raw { model, x0 } => {
                    let spec = geometry.clone().ok_or_else(|| {
                        crate::UsageError("a raw initial state needs --kind".into())
                    })?;
                    let m = build_model(model)?;
                    let g = Geometry::build(&spec)?;
                    let mut traj = integrate(m.as_ref(), &g, cfg.t0, x0, &cfg.integrator, &[])?;
                    let v = classify_with_horizon(
                        &mut traj,
                        m.as_ref(),
                        &g,
                        &cfg.integrator,
                        &cfg.classify,
                        |t| t.states(),
                    )?;
                    #[derive(Serialize)]
                    struct RawVerdict<'a> {
                        model: &'a ModelSelector,
                        x0: &'a [f64],
                        outcome: &'static str,
                        mass: Option<f64>,
                        t_escape: Option<f64>,
                        evidence: Evidence,
                        decay: bool,
                    }
                    let r = RawVerdict {
                        model,
                        x0,
                        outcome: v.outcome.label(),
                        mass: v.outcome.mass(),
                        t_escape: v.outcome.t_escape(),
                        evidence: v.evidence.clone(),
                        decay: v.decay,
                    };
                    (traj.states(), serde_json::to_value(r)?)
                }
            };
            write_states(&out.join("trajectory.csv"), &states)?;
            write_json(&out.join("verdict.json"), &record)?;
            let mass = record["mass"]
                .as_f64()
                .map(|m| format!("({m})"))
                .unwrap_or_default();
            println!(
                "{}{mass} decay={}",
                record["outcome"].as_str().unwrap_or("?"),
                record["decay"]
            );
            Ok(true)
        }
        Command::Sweep {
            extension,
            param_grid,
        } => {
            let members = param_grid.members(*extension);
            let results: Vec<_> = pool(cfg.workers)?.install(|| {
                members
                    .par_iter()
                    .map(|f| {
                        classify_family(
                            f,
                            &f.default_geometry(),
                            cfg.t0,
                            cfg.order,
                            &cfg.integrator,
                            &cfg.classify,
                        )
                        .map(|(_, v)| VerdictRecord::new(f, &v))
                    })
                    .collect::<cylab::Result<_>>()
            })?;
            let mut w = BufWriter::new(File::create(out.join("verdicts.jsonl"))?);
            for r in &results {
                serde_json::to_writer(&mut w, r)?;
                writeln!(w)?;
            }
            w.flush()?;
            println!("{} members of {extension} classified", results.len());
            Ok(true)
        }
        Command::Critical {
            extension,
            geometry,
            bracket,
            tol,
        } => {
            let spec = geometry.clone().unwrap_or_else(|| {
                cylab::local_families::LocalFamily::instanton(*extension, 0.0).default_geometry()
            });
            let opts = CriticalOptions {
                t0: cfg.t0,
                order: cfg.order,
                integrator: cfg.integrator.clone(),
                classify: cfg.classify.clone(),
                ..Default::default()
            };
            let r = find_critical(*extension, &spec, *bracket, *tol, &opts)?;
            write_json(&out.join("critical.json"), &r)?;
            println!(
                "{extension}: critical {:.6} in ({:.6}, {:.6}); below {}, above {}",
                r.value,
                r.lo,
                r.hi,
                r.lo_verdict.outcome.label(),
                r.hi_verdict.outcome.label()
            );
            Ok(true)
        }
        Command::Bubble {
            study,
            params,
            window,
        } => {
            let p = pool(cfg.workers)?;
            match study {
                BubbleStudy::Bubble(fam) => {
                    let rows = p.install(|| {
                        bubble_metric(*fam, fam.model(), *window, params, &cfg.integrator)
                    })?;
                    let mut w = csv::Writer::from_path(out.join("bubble.csv"))?;
                    for r in &rows {
                        w.serialize(r)?;
                    }
                    w.flush()?;
                    let d: Vec<f64> = rows.iter().map(|r| r.sup_distance).collect();
                    println!(
                        "sup distances {d:?}; strictly decreasing: {}",
                        strictly_decreasing(&d)
                    );
                }
                BubbleStudy::Body => {
                    let rows = p.install(|| body_limit_check(params, *window, &cfg.integrator))?;
                    let mut w = csv::Writer::from_path(out.join("body.csv"))?;
                    for r in &rows {
                        w.serialize(r)?;
                    }
                    w.flush()?;
                    let d: Vec<f64> = rows.iter().map(|r| r.sup_distance).collect();
                    println!(
                        "sup distances {d:?}; strictly decreasing: {}",
                        strictly_decreasing(&d)
                    );
                }
            }
            Ok(true)
        }
        Command::Verify { suite, samples } => {
            let checks =
                pool(cfg.workers)?.install(|| verify::run(*suite, *samples, &cfg.integrator))?;
            for c in &checks {
                println!(
                    "{} [{}] {}: {:.3e} (tol {:e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.suite,
                    c.name,
                    c.value,
                    c.tolerance
                );
            }
            write_json(&out.join("verify.json"), &checks)?;
            Ok(checks.iter().all(|c| c.pass))
        }
        Command::Catalogue { params, ls } => {
            let c = catalogue(*params, ls)?;
            write_json(&out.join("catalogue.json"), &c)?;
            println!("{} extensions catalogued", c.len());
            Ok(true)
        }
    }
}
