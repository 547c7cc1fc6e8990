use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifySchroder,
    PeriodicPoints,
    Linearize,
    Infspace,
    ChainRule,
    InverseRule,
    Conjugacy,
    RenderJulia,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifySchroder => "verify-schroder",
            Command::PeriodicPoints => "periodic-points",
            Command::Linearize => "linearize",
            Command::Infspace => "infspace",
            Command::ChainRule => "chain-rule",
            Command::InverseRule => "inverse-rule",
            Command::Conjugacy => "conjugacy",
            Command::RenderJulia => "render-julia",
        }
    }
}

/// Which `(h, f)` pair a command works on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    /// `h = exp`; `f = z^λ` when `M = λ Id` with integer `λ`.
    #[default]
    Power,
    /// `h = cos`; `f = T_λ` when `M = λ Id` with integer `λ`.
    Chebyshev,
    /// `h = ℘` on the configured lattice.
    Lattes,
    Zorich,
}

/// Every acceptance threshold in one place.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub schroder: f64,
    pub automorphy: f64,
    pub well_defined: f64,
    pub periodic: f64,
    pub linearizer: f64,
    pub multiplier: f64,
    pub homogeneity: f64,
    pub mean_radius: f64,
    pub chain: f64,
    pub measure: f64,
    pub inverse: f64,
    pub inverse_d: f64,
    pub conjugacy: f64,
    pub lattice: f64,
    pub step_ratio: f64,
    pub linear_part: f64,
    /// Distance from the expected Julia set, in pixels.
    pub julia_px: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            schroder: 1e-8,
            automorphy: 1e-6,
            well_defined: 1e-6,
            periodic: 1e-8,
            linearizer: 1e-10,
            multiplier: 1e-6,
            homogeneity: 1e-3,
            mean_radius: 0.02,
            chain: 1e-3,
            measure: 0.02,
            inverse: 2e-3,
            inverse_d: 1e-3,
            conjugacy: 1e-8,
            lattice: 1e-10,
            step_ratio: 0.55,
            linear_part: 1e-12,
            julia_px: 2.0,
        }
    }
}

impl Tolerances {
    fn entries(&self) -> [(&'static str, f64); 17] {
        [
            ("schroder", self.schroder),
            ("automorphy", self.automorphy),
            ("well_defined", self.well_defined),
            ("periodic", self.periodic),
            ("linearizer", self.linearizer),
            ("multiplier", self.multiplier),
            ("homogeneity", self.homogeneity),
            ("mean_radius", self.mean_radius),
            ("chain", self.chain),
            ("measure", self.measure),
            ("inverse", self.inverse),
            ("inverse_d", self.inverse_d),
            ("conjugacy", self.conjugacy),
            ("lattice", self.lattice),
            ("step_ratio", self.step_ratio),
            ("linear_part", self.linear_part),
            ("julia_px", self.julia_px),
        ]
    }
}

/// The `[command]` table. Fields a command does not use are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommandTable {
    pub name: Option<Command>,
    pub family: FamilyName,
    /// `M = λ O`.
    pub lambda: f64,
    /// Rotation angle of `O`; in 3-D about `axis`.
    pub angle: f64,
    pub axis: [f64; 3],
    /// Lattice basis for the Lattès family, rows are basis vectors.
    pub lattice: Option<Vec<Vec<f64>>>,
    /// Truncation radius of the ℘ lattice sum.
    pub wp_radius: f64,
    /// Period.
    pub m: u32,
    /// Search radius for `v`; derived from `M` when absent.
    pub search_radius: Option<f64>,
    /// Half-width of the sampling cube or window.
    pub radius: f64,
    pub samples: usize,
    pub point: Option<Vec<f64>>,
    pub expected_d: Option<f64>,
    pub t0: f64,
    pub levels: usize,
    pub nodes: usize,
    /// Model maps for chain-rule and inverse-rule: `power:d`, `diag:a,b[,c]`,
    /// `stretch:α` (the map `x |x|^α`).
    pub f: String,
    pub h: String,
    pub twist_center: Vec<f64>,
    pub twist_radius: f64,
    pub twist_angle: f64,
    pub grid_per_axis: usize,
    pub kmax: usize,
    pub tol: f64,
    pub resolution: [usize; 2],
    pub iterations: u32,
    pub slice: f64,
}

impl Default for CommandTable {
    fn default() -> Self {
        CommandTable {
            name: None,
            family: FamilyName::Power,
            lambda: 2.0,
            angle: 0.0,
            axis: [0.0, 0.0, 1.0],
            lattice: None,
            wp_radius: 200.0,
            m: 1,
            search_radius: None,
            radius: 1.0,
            samples: 441,
            point: None,
            expected_d: None,
            t0: 0.5,
            levels: 6,
            nodes: 256,
            f: "stretch:0.5".into(),
            h: "power:2".into(),
            twist_center: vec![0.5, 0.5],
            twist_radius: 0.1,
            twist_angle: 1.0,
            grid_per_axis: 101,
            kmax: 80,
            tol: 1e-10,
            resolution: [512, 512],
            iterations: 60,
            slice: 0.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandTable,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub output: Option<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in self.tolerances.entries() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }
        let c = &self.command;
        let positive = [
            ("lambda", c.lambda),
            ("radius", c.radius),
            ("t0", c.t0),
            ("twist_radius", c.twist_radius),
            ("tol", c.tol),
            ("wp_radius", c.wp_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if c.m == 0 {
            return Err(CliError::Config("period m must be at least 1".into()));
        }
        if c.samples == 0 || c.nodes < 8 || c.levels < 4 || c.grid_per_axis < 2 || c.iterations == 0
        {
            return Err(CliError::Config("sample counts are too small".into()));
        }
        if c.resolution.iter().any(|&r| r < 2) {
            return Err(CliError::Config("resolution must be at least 2x2".into()));
        }
        Ok(())
    }

    /// The command to run: the CLI argument, else `[command] name`.
    pub fn resolve_command(&self, arg: Option<Command>) -> Result<Command, CliError> {
        match (arg, self.command.name) {
            (Some(a), Some(b)) if a != b => Err(CliError::Config(format!(
                "command {} on the command line, {} in the config",
                a.name(),
                b.name()
            ))),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Err(CliError::Config("no command given".into())),
        }
    }
}
