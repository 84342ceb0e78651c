//! `cylab`: command-line front end for the instanton and monopole laboratory.

mod commands;
mod config;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cylab::bubbling::BubbleFamily;
use cylab::classify::ClassifyConfig;
use cylab::connections::BundleExtension;
use cylab::flows::{IntegratorConfig, ModelSelector};
use cylab::geometry::{GeometryKind, GeometrySpec};
use cylab::local_families::{DEFAULT_ORDER, DEFAULT_T0};
use serde_json::{Map, Value};

use config::{BubbleStudy, Command, ParamGrid, RunConfig, Source, Suite, CONFIG_FILE};

/// Invalid flags, specs or configuration files (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(
    name = "cylab",
    version,
    about = "Invariant instantons and monopoles on Calabi-Yau cones and their smoothings"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Args)]
struct Global {
    /// Relative tolerance of the integrator.
    #[arg(long, global = true)]
    rtol: Option<f64>,
    /// Absolute tolerance of the integrator.
    #[arg(long, global = true)]
    atol: Option<f64>,
    /// Integration horizon (grid end for `geometry`).
    #[arg(long, global = true)]
    t_max: Option<f64>,
    /// Launch time (start time for raw initial states).
    #[arg(long, global = true)]
    t0: Option<f64>,
    /// Taylor order of the launch.
    #[arg(long, global = true)]
    order: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for sweeps and suites.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// JSON run configuration; its entries override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GeometryArgs {
    /// cone, smoothing, small_resolution or canonical_bundle.
    #[arg(long)]
    kind: Option<GeometryKind>,
    #[arg(long, requires = "u1")]
    u0: Option<f64>,
    #[arg(long, requires = "u0")]
    u1: Option<f64>,
    /// Homothety factor.
    #[arg(long)]
    scale: Option<f64>,
}

impl GeometryArgs {
    fn spec(&self) -> anyhow::Result<Option<GeometrySpec>> {
        let Some(kind) = self.kind else {
            if self.u0.is_some() || self.scale.is_some() {
                anyhow::bail!(UsageError("--u0/--u1/--scale need --kind".into()));
            }
            return Ok(None);
        };
        let mut spec = match kind {
            GeometryKind::Cone => GeometrySpec::cone(),
            GeometryKind::Smoothing => GeometrySpec::smoothing(),
            GeometryKind::SmallResolution => GeometrySpec::small_resolution(),
            GeometryKind::CanonicalBundle => {
                GeometrySpec::canonical_bundle(self.u0.unwrap_or(0.0), self.u1.unwrap_or(1.0))
            }
        };
        if kind != GeometryKind::CanonicalBundle && self.u0.is_some() {
            anyhow::bail!(UsageError(
                "--u0/--u1 only apply to the canonical bundle".into()
            ));
        }
        if let Some(s) = self.scale {
            spec = spec.with_scale(s);
        }
        Ok(Some(spec))
    }
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// P_Id, P_0Id, P_1bold0 or P_1minusL_L.
    #[arg(long)]
    family: Option<String>,
    /// Index of P_1minusL_L.
    #[arg(long, allow_negative_numbers = true)]
    l: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    xi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    chi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    eps_prime: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta_prime: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
}

impl FamilyArgs {
    fn extension(&self) -> anyhow::Result<BundleExtension> {
        let name = self
            .family
            .as_deref()
            .ok_or_else(|| UsageError("--family is required".into()))?;
        BundleExtension::parse(name, self.l).map_err(|e| UsageError(e.to_string()).into())
    }

    /// The two parameters, rejecting flags that belong to other families.
    fn params(&self, ext: BundleExtension) -> anyhow::Result<[f64; 2]> {
        let given = [
            ("xi", self.xi),
            ("chi", self.chi),
            ("eps", self.eps),
            ("delta", self.delta),
            ("eps_prime", self.eps_prime),
            ("delta_prime", self.delta_prime),
            ("alpha", self.alpha),
            ("beta", self.beta),
        ];
        let names = ext.param_names();
        let mut out = [0.0; 2];
        for (name, v) in given {
            let Some(v) = v else { continue };
            match names.iter().position(|n| *n == name) {
                Some(i) => out[i] = v,
                None => anyhow::bail!(UsageError(format!(
                    "--{} does not apply to {ext}",
                    name.replace('_', "-")
                ))),
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyKind {
    SmallResolution,
    CanonicalBundle,
    Body,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dump the structure functions of a background on a grid.
    Geometry {
        #[command(flatten)]
        geo: GeometryArgs,
        #[arg(long, default_value_t = 1e-2)]
        t_min: f64,
        #[arg(long, default_value_t = 1001)]
        points: usize,
    },
    /// Launch one family member (or a raw state) and classify it.
    Trajectory {
        #[command(flatten)]
        fam: FamilyArgs,
        #[command(flatten)]
        geo: GeometryArgs,
        /// Registry model for a raw initial state.
        #[arg(long, conflicts_with = "family", requires = "x0")]
        model: Option<String>,
        /// Raw initial state, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x0: Vec<f64>,
        /// Model parameter `key=value`.
        #[arg(long = "model-param")]
        model_params: Vec<String>,
    },
    /// Classify a parameter grid on a worker pool.
    Sweep {
        /// Sweep file `{extension, param_grid: {p, q}, integrator}`.
        #[arg(long, conflicts_with_all = ["family", "p"])]
        spec: Option<PathBuf>,
        #[command(flatten)]
        fam: FamilyArgs,
        /// First-parameter values, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        p: Vec<f64>,
        /// Second-parameter values, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        q: Vec<f64>,
    },
    /// Bisect the canonical/unbounded boundary of an instanton family.
    Critical {
        #[command(flatten)]
        fam: FamilyArgs,
        #[command(flatten)]
        geo: GeometryArgs,
        #[arg(long, default_value_t = 0.5)]
        lo: f64,
        #[arg(long, default_value_t = 2.0)]
        hi: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Rescaled-profile distances along a bubbling sequence.
    Bubble {
        #[arg(long, value_enum)]
        study: StudyKind,
        #[arg(long)]
        l: Option<i32>,
        #[arg(long, default_value_t = 0.5)]
        kappa: f64,
        /// Sequence parameters, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        params: Vec<f64>,
        #[arg(long)]
        window_lo: Option<f64>,
        #[arg(long)]
        window_hi: Option<f64>,
    },
    /// Run an invariant suite; exits 1 if any check fails.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Boundary samples per region.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Singular initial value problems of every extension.
    Catalogue {
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        p: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        q: f64,
        /// Indices of P_1minusL_L, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3], allow_negative_numbers = true)]
        ls: Vec<i32>,
    },
}

fn to_command(cmd: Cmd, t_max: f64) -> anyhow::Result<Value> {
    let c = match cmd {
        Cmd::Geometry { geo, t_min, points } => Command::Geometry {
            geometry: geo
                .spec()?
                .ok_or_else(|| UsageError("--kind is required".into()))?,
            t_min,
            t_max,
            points,
        },
        Cmd::Trajectory {
            fam,
            geo,
            model,
            x0,
            model_params,
        } => {
            let source = match model {
                Some(name) => {
                    let mut sel = ModelSelector::new(&name);
                    for kv in model_params {
                        let (k, v) = kv
                            .split_once('=')
                            .ok_or_else(|| UsageError(format!("bad --model-param `{kv}`")))?;
                        let v: f64 = v
                            .parse()
                            .map_err(|_| UsageError(format!("bad --model-param `{kv}`")))?;
                        sel = sel.with(k, v);
                    }
                    Source::Raw { model: sel, x0 }
                }
                None => {
                    let ext = fam.extension()?;
                    let [p, q] = fam.params(ext)?;
                    Source::Family(config::family(ext, p, q))
                }
            };
            Command::Trajectory {
                geometry: geo.spec()?,
                source,
            }
        }
        Cmd::Sweep {
            spec: Some(path), ..
        } => {
            // The integrator overrides of a sweep file land at top level.
            let v: Value = read_json(&path)?;
            let mut obj = v
                .as_object()
                .cloned()
                .ok_or_else(|| UsageError("sweep file must be an object".into()))?;
            let integrator = obj.remove("integrator");
            obj.insert("kind".into(), "sweep".into());
            let mut out = Map::new();
            out.insert("command".into(), Value::Object(obj));
            if let Some(i) = integrator {
                out.insert("integrator".into(), i);
            }
            return Ok(Value::Object(out));
        }
        Cmd::Sweep { fam, p, q, .. } => {
            if p.is_empty() {
                anyhow::bail!(UsageError("sweep needs --spec or --p".into()));
            }
            Command::Sweep {
                extension: fam.extension()?,
                param_grid: ParamGrid {
                    p,
                    q: if q.is_empty() { vec![0.0] } else { q },
                },
            }
        }
        Cmd::Critical {
            fam,
            geo,
            lo,
            hi,
            tol,
        } => Command::Critical {
            extension: fam.extension()?,
            geometry: geo.spec()?,
            bracket: (lo, hi),
            tol,
        },
        Cmd::Bubble {
            study,
            l,
            kappa,
            params,
            window_lo,
            window_hi,
        } => {
            let (study, window) = match study {
                StudyKind::SmallResolution => (
                    BubbleStudy::Bubble(BubbleFamily::SmallResolution),
                    (0.0, 5.0),
                ),
                StudyKind::CanonicalBundle => {
                    let l =
                        l.ok_or_else(|| UsageError("canonical bundle bubbling needs --l".into()))?;
                    (
                        BubbleStudy::Bubble(BubbleFamily::CanonicalBundle { l, kappa }),
                        (0.0, 5.0),
                    )
                }
                StudyKind::Body => (BubbleStudy::Body, (1.0, 10.0)),
            };
            Command::Bubble {
                study,
                params,
                window: (window_lo.unwrap_or(window.0), window_hi.unwrap_or(window.1)),
            }
        }
        Cmd::Verify { suite, samples } => Command::Verify { suite, samples },
        Cmd::Catalogue { p, q, ls } => Command::Catalogue { params: [p, q], ls },
    };
    let mut out = Map::new();
    out.insert("command".into(), serde_json::to_value(c)?);
    Ok(Value::Object(out))
}

fn read_json(path: &PathBuf) -> anyhow::Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("reading {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)
        .map_err(|e| UsageError(format!("parsing {}: {e}", path.display())))?)
}

fn resolve(cli: Cli) -> anyhow::Result<RunConfig> {
    let g = cli.global;
    let defaults = IntegratorConfig::default();
    let integrator = IntegratorConfig {
        rtol: g.rtol.unwrap_or(defaults.rtol),
        atol: g.atol.unwrap_or(defaults.atol),
        t_max: g.t_max.unwrap_or(defaults.t_max),
        ..defaults
    };
    let mut base = serde_json::json!({
        "integrator": integrator,
        "classify": ClassifyConfig::default(),
        "t0": g.t0.unwrap_or(DEFAULT_T0),
        "order": g.order.unwrap_or(DEFAULT_ORDER),
        "out_dir": g.out_dir.unwrap_or_else(|| "out".into()),
        "workers": g.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    });
    if let Some(cmd) = cli.command {
        config::overlay(&mut base, to_command(cmd, integrator.t_max)?);
    }
    if let Some(path) = &g.config {
        config::overlay(&mut base, read_json(path)?);
    }
    if base.get("command").is_none() {
        anyhow::bail!(UsageError(
            "a subcommand or a --config with a command is required".into()
        ));
    }
    let cfg: RunConfig = serde_json::from_value(base)
        .map_err(|e| UsageError(format!("invalid configuration: {e}")))?;
    cfg.integrator
        .validate()
        .map_err(|e| UsageError(e.to_string()))?;
    if cfg.workers == 0 {
        anyhow::bail!(UsageError("--workers must be positive".into()));
    }
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let cfg = resolve(cli)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let text = serde_json::to_string_pretty(&cfg)? + "\n";
    std::fs::write(cfg.out_dir.join(CONFIG_FILE), text)?;
    commands::execute(&cfg)
}

/// Usage errors and invalid specifications exit with 2.
fn is_usage(e: &anyhow::Error) -> bool {
    if e.is::<UsageError>() {
        return true;
    }
    matches!(
        e.downcast_ref::<cylab::Error>(),
        Some(
            cylab::Error::Domain(_)
                | cylab::Error::Unknown { .. }
                | cylab::Error::Json(_)
                | cylab::Error::Launch(_)
        )
    )
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}
