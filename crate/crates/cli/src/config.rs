//! Resolved run configuration and the flag/config-file merge.

use std::path::PathBuf;

use cylab::bubbling::BubbleFamily;
use cylab::classify::ClassifyConfig;
use cylab::connections::BundleExtension;
use cylab::flows::{IntegratorConfig, ModelSelector};
use cylab::geometry::GeometrySpec;
use cylab::local_families::LocalFamily;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const CONFIG_FILE: &str = "run_config.json";

/// Everything needed to re-execute a command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub integrator: IntegratorConfig,
    pub classify: ClassifyConfig,
    /// Launch time of singular initial value problems.
    pub t0: f64,
    /// Taylor order of the launch.
    pub order: usize,
    pub out_dir: PathBuf,
    /// Worker threads for sweeps and suites.
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    Geometry {
        geometry: GeometrySpec,
        t_min: f64,
        t_max: f64,
        points: usize,
    },
    Trajectory {
        geometry: Option<GeometrySpec>,
        source: Source,
    },
    Sweep {
        extension: BundleExtension,
        param_grid: ParamGrid,
    },
    Critical {
        extension: BundleExtension,
        geometry: Option<GeometrySpec>,
        bracket: (f64, f64),
        tol: f64,
    },
    Bubble {
        study: BubbleStudy,
        params: Vec<f64>,
        window: (f64, f64),
    },
    Verify {
        suite: Suite,
        samples: usize,
    },
    Catalogue {
        params: [f64; 2],
        ls: Vec<i32>,
    },
}

/// Initial data of a trajectory run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Family(LocalFamily),
    Raw { model: ModelSelector, x0: Vec<f64> },
}

/// Cartesian grid over the two family parameters; members with a zero
/// second parameter are run as instantons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub p: Vec<f64>,
    #[serde(default = "zero_grid")]
    pub q: Vec<f64>,
}

fn zero_grid() -> Vec<f64> {
    vec![0.0]
}

impl ParamGrid {
    pub fn members(&self, extension: BundleExtension) -> Vec<LocalFamily> {
        self.p
            .iter()
            .flat_map(|&p| self.q.iter().map(move |&q| family(extension, p, q)))
            .collect()
    }
}

/// Family member, run as an instanton when the Higgs parameter vanishes.
pub fn family(extension: BundleExtension, p: f64, q: f64) -> LocalFamily {
    if q == 0.0 {
        LocalFamily::instanton(extension, p)
    } else {
        LocalFamily::monopole(extension, p, q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BubbleStudy {
    Bubble(BubbleFamily),
    /// Body limit of the small-resolution family.
    Body,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Geometry,
    Regions,
    Symmetry,
    Comparison,
    All,
}

/// Overlay `top` onto `base`: objects merge key by key, a tagged object
/// whose tag changes is replaced, anything else is overwritten.
pub fn overlay(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            let retagged = matches!((b.get("kind"), t.get("kind")), (Some(x), Some(y)) if x != y);
            if retagged {
                *b = t;
                return;
            }
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => overlay(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}
