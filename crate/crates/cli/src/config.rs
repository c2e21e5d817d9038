//! TOML problem configuration.
//!
//! ```toml
//! k = 1
//! d = 1
//! p = 2            # or "inf"
//! target = [1.0]
//!
//! [weight]
//! kind = "axis"    # or "radial_power" (with theta) or "tabulated" (with path)
//!
//! [[nodes]]
//! alpha = [0.0]
//! delta = 0.1
//! kind = "observed"   # or "class"
//!
//! [options]           # all optional
//! eta_range = 20.0
//! eta_points = 81
//! seed = 0
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use optrec_core::recovery::VariationScale;
use optrec_core::{
    AlphaVec, InfoNode, NodeKind, NoiseMode, NormIndex, RecoveryProblem, TabulatedLevels,
    WeightFamily,
};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    k: usize,
    d: usize,
    p: RawNorm,
    target: Vec<f64>,
    weight: RawWeight,
    nodes: Vec<RawNode>,
    #[serde(default)]
    options: RawOptions,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawNorm {
    Number(f64),
    Token(String),
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawWeight {
    Axis,
    RadialPower { theta: f64 },
    Tabulated { path: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    alpha: Vec<f64>,
    delta: f64,
    kind: RawKind,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawKind {
    Observed,
    Class,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    eta_range: Option<f64>,
    eta_points: Option<usize>,
    seed: Option<u64>,
    trials: Option<usize>,
    epsilon: Option<f64>,
    grid_points: Option<usize>,
    grid_half_width: Option<f64>,
    interpolation_samples: Option<usize>,
    bump_points: Option<usize>,
    bump_variation: Option<String>,
    noise: Option<String>,
}

/// Run options with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub eta_range: f64,
    pub eta_points: usize,
    pub seed: u64,
    pub trials: usize,
    pub epsilon: f64,
    /// Cells per axis of the frequency grid used by `simulate`.
    pub grid_points: usize,
    pub grid_half_width: f64,
    pub interpolation_samples: usize,
    pub bump_points: Option<usize>,
    pub bump_variation: VariationScale,
    pub noise: NoiseMode,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            eta_range: 20.0,
            eta_points: 81,
            seed: 0,
            trials: 100,
            epsilon: 1e-3,
            grid_points: 128,
            grid_half_width: 8.0,
            interpolation_samples: 500,
            bump_points: None,
            bump_variation: VariationScale::Absolute,
            noise: NoiseMode::RandomBall,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub problem: RecoveryProblem,
    pub options: RunOptions,
    /// Weight description for report headers.
    pub weight_label: String,
}

pub fn noise_label(mode: NoiseMode) -> &'static str {
    match mode {
        NoiseMode::Exact => "exact",
        NoiseMode::RandomBall => "random_ball",
        NoiseMode::AdversarialAligned => "adversarial",
    }
}

pub fn variation_label(v: VariationScale) -> &'static str {
    match v {
        VariationScale::Absolute => "absolute",
        VariationScale::Relative => "relative",
    }
}

/// Parses a configuration; relative tabulated paths resolve against `base_dir`.
pub fn parse_problem_config(text: &str, base_dir: &Path) -> Result<ProblemConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)
        .map_err(|e| ConfigError::Parse(e.to_string().trim().replace('\n', " ")))?;
    let invalid = |msg: String| ConfigError::Validation(msg);

    let p = match raw.p {
        RawNorm::Number(v) => NormIndex::finite(v).map_err(|e| invalid(format!("p: {e}")))?,
        RawNorm::Token(t) if t == "inf" => NormIndex::Infinity,
        RawNorm::Token(t) => {
            return Err(invalid(format!(
                "p: expected a number >= 1 or \"inf\", got {t:?}"
            )))
        }
    };
    if raw.target.len() != raw.k {
        return Err(invalid(format!(
            "target has {} components but k = {}",
            raw.target.len(),
            raw.k
        )));
    }
    let (weight, weight_label) = match raw.weight {
        RawWeight::Axis => (WeightFamily::Axis, "axis".to_string()),
        RawWeight::RadialPower { theta } => (
            WeightFamily::RadialPower { theta },
            format!("radial_power(theta = {theta})"),
        ),
        RawWeight::Tabulated { path } => {
            let full = if path.is_absolute() {
                path.clone()
            } else {
                base_dir.join(&path)
            };
            let table = TabulatedLevels::from_path(&full, raw.d, raw.k)
                .map_err(|e| invalid(format!("weight.path: {e}")))?;
            (
                WeightFamily::Tabulated(table),
                format!("tabulated({})", path.display()),
            )
        }
    };
    let mut nodes = Vec::with_capacity(raw.nodes.len());
    for (j, n) in raw.nodes.into_iter().enumerate() {
        if n.alpha.len() != raw.k {
            return Err(invalid(format!(
                "nodes[{j}].alpha has {} components but k = {}",
                n.alpha.len(),
                raw.k
            )));
        }
        let alpha =
            AlphaVec::new(n.alpha).map_err(|e| invalid(format!("nodes[{j}].alpha: {e}")))?;
        let kind = match n.kind {
            RawKind::Observed => NodeKind::Observed,
            RawKind::Class => NodeKind::ClassConstraint,
        };
        nodes.push(
            InfoNode::new(alpha, n.delta, kind).map_err(|e| invalid(format!("nodes[{j}]: {e}")))?,
        );
    }
    let target = AlphaVec::new(raw.target).map_err(|e| invalid(format!("target: {e}")))?;
    let problem = RecoveryProblem::new(raw.d, p, weight, target, nodes)
        .map_err(|e| invalid(e.to_string()))?;

    let defaults = RunOptions::default();
    let o = raw.options;
    let options = RunOptions {
        eta_range: o.eta_range.unwrap_or(defaults.eta_range),
        eta_points: o.eta_points.unwrap_or(defaults.eta_points),
        seed: o.seed.unwrap_or(defaults.seed),
        trials: o.trials.unwrap_or(defaults.trials),
        epsilon: o.epsilon.unwrap_or(defaults.epsilon),
        grid_points: o.grid_points.unwrap_or(defaults.grid_points),
        grid_half_width: o.grid_half_width.unwrap_or(defaults.grid_half_width),
        interpolation_samples: o
            .interpolation_samples
            .unwrap_or(defaults.interpolation_samples),
        bump_points: o.bump_points,
        bump_variation: match o.bump_variation.as_deref() {
            None | Some("absolute") => VariationScale::Absolute,
            Some("relative") => VariationScale::Relative,
            Some(other) => {
                return Err(invalid(format!(
                    "options.bump_variation: unknown value {other:?}"
                )))
            }
        },
        noise: match o.noise.as_deref() {
            None | Some("random_ball") => NoiseMode::RandomBall,
            Some("adversarial") => NoiseMode::AdversarialAligned,
            Some("exact") => NoiseMode::Exact,
            Some(other) => return Err(invalid(format!("options.noise: unknown value {other:?}"))),
        },
    };
    options.validate().map_err(invalid)?;
    Ok(ProblemConfig {
        problem,
        options,
        weight_label,
    })
}

impl RunOptions {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.eta_range.is_finite() && self.eta_range > 0.0) {
            return Err(format!(
                "eta_range must be positive, got {}",
                self.eta_range
            ));
        }
        if self.eta_points == 0 || self.grid_points == 0 || self.trials == 0 {
            return Err("eta_points, grid_points and trials must be positive".into());
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.grid_half_width.is_finite() && self.grid_half_width > 0.0) {
            return Err(format!(
                "grid_half_width must be positive, got {}",
                self.grid_half_width
            ));
        }
        Ok(())
    }
}

fn vec_str(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for ProblemConfig {
    /// Provenance header: the fully resolved configuration as comment lines.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.problem;
        let o = &self.options;
        writeln!(f, "# k = {}", p.k())?;
        writeln!(f, "# d = {}", p.d())?;
        writeln!(f, "# p = {}", p.p())?;
        writeln!(f, "# weight = {}", self.weight_label)?;
        writeln!(f, "# target = {}", vec_str(p.target().as_slice()))?;
        for (j, n) in p.nodes().iter().enumerate() {
            writeln!(
                f,
                "# node {j} = alpha {} delta {} kind {}",
                vec_str(n.alpha.as_slice()),
                n.delta,
                n.kind
            )?;
        }
        writeln!(f, "# eta_range = {}", o.eta_range)?;
        writeln!(f, "# eta_points = {}", o.eta_points)?;
        writeln!(f, "# seed = {}", o.seed)?;
        writeln!(f, "# trials = {}", o.trials)?;
        writeln!(f, "# epsilon = {}", o.epsilon)?;
        writeln!(f, "# grid_points = {}", o.grid_points)?;
        writeln!(f, "# grid_half_width = {}", o.grid_half_width)?;
        writeln!(f, "# interpolation_samples = {}", o.interpolation_samples)?;
        match o.bump_points {
            Some(n) => writeln!(f, "# bump_points = {n}")?,
            None => writeln!(f, "# bump_points = default")?,
        }
        writeln!(
            f,
            "# bump_variation = {}",
            variation_label(o.bump_variation)
        )?;
        write!(f, "# noise = {}", noise_label(o.noise))
    }
}
