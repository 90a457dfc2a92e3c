use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::guidance::{GuidanceMode, ProductConfig, SymLossConfig, ThetaMode};
use crate::harness::config::ExperimentConfig;
use crate::harness::run::run_tagged;

pub const THETA_CONSTANTS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
pub const EPSILON_F_VALUES: [f64; 3] = [0.0, 0.2, 0.4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationParam {
    Theta,
    EpsilonF,
}

impl AblationParam {
    pub fn id(self) -> &'static str {
        match self {
            AblationParam::Theta => "theta",
            AblationParam::EpsilonF => "epsilon_f",
        }
    }
}

impl FromStr for AblationParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theta" => Ok(AblationParam::Theta),
            "epsilon_f" => Ok(AblationParam::EpsilonF),
            _ => Err(Error::Config(format!("cannot sweep `{s}` (expected theta or epsilon_f)"))),
        }
    }
}

/// One grid point: the swept value as a tag plus the derived config.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub value: String,
    pub config: ExperimentConfig,
}

/// Configs for a sweep. Theta runs SymLoss at four constant weights and the
/// default decay; epsilon_f runs Product with three terminal values.
pub fn ablation_grid(base: &ExperimentConfig, param: AblationParam) -> Result<Vec<GridPoint>> {
    base.validate()?;
    let task = base.task().id();
    let point = |value: String, mode: GuidanceMode, edit: &dyn Fn(&mut ExperimentConfig)| {
        let mut config = base.clone();
        config.guidance.mode = mode;
        edit(&mut config);
        config.name = format!("{task}_{}_{}_{value}", mode.id(), param.id());
        GridPoint { value, config }
    };
    let mut out = Vec::new();
    match param {
        AblationParam::Theta => {
            for c in THETA_CONSTANTS {
                out.push(point(c.to_string(), GuidanceMode::SymLoss, &|cfg| {
                    cfg.guidance.symloss.theta = ThetaMode::Constant(c)
                }));
            }
            out.push(point("schedule".into(), GuidanceMode::SymLoss, &|cfg| {
                cfg.guidance.symloss.theta = SymLossConfig::default().theta
            }));
        }
        AblationParam::EpsilonF => {
            for f in EPSILON_F_VALUES {
                out.push(point(f.to_string(), GuidanceMode::Product, &|cfg| {
                    cfg.guidance.product = ProductConfig {
                        epsilon_f: f,
                        ..cfg.guidance.product
                    }
                }));
            }
        }
    }
    for p in &out {
        p.config.validate()?;
    }
    Ok(out)
}

/// Runs every grid point, tagging manifests with the swept value.
pub fn run_ablation(base: &ExperimentConfig, param: AblationParam) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for p in ablation_grid(base, param)? {
        let tags = BTreeMap::from([(param.id().to_string(), p.value.clone())]);
        dirs.extend(run_tagged(&p.config, &tags)?);
    }
    Ok(dirs)
}
