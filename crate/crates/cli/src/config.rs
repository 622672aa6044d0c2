//! Run configuration: TOML file with `[gas]`, `[scenario]`, `[check]`,
//! `[nslimit]` and `[output]` sections. Every key is optional.

use std::path::{Path, PathBuf};

use et6_core::{Boundary, GasSpec, InitialCondition, Model, Scenario, Scheme, State6};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub gas: GasConfig,
    pub scenario: ScenarioConfig,
    pub check: CheckConfig,
    pub nslimit: NsLimitConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GasConfig {
    #[serde(rename = "D")]
    pub dof: f64,
    pub m: f64,
    #[serde(rename = "kB")]
    pub kb: f64,
    pub tau: f64,
}

impl Default for GasConfig {
    fn default() -> Self {
        Self {
            dof: 5.0,
            m: 1.0,
            kb: 1.0,
            tau: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Acoustic,
    Riemann,
    Uniform,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryName {
    Periodic,
    Outflow,
    Reflective,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Rusanov,
    Muscl,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Et6,
    Euler,
}

/// Primitive state in pressure form.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct StateConfig {
    pub rho: f64,
    pub vx: f64,
    pub p: f64,
    #[serde(rename = "Pi_over_p")]
    pub pi_over_p: f64,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            vx: 0.0,
            p: 1.0,
            pi_over_p: 0.0,
        }
    }
}

impl StateConfig {
    fn build(&self, key: &str, gas: &GasSpec) -> Result<State6, ConfigError> {
        if !(self.rho > 0.0 && self.p > 0.0) {
            return Err(invalid(key, format!("rho and p must be positive, got rho = {}, p = {}", self.rho, self.p)));
        }
        State6::from_pressure(self.rho, [self.vx, 0.0, 0.0], self.p, self.pi_over_p * self.p, gas)
            .map_err(|e| invalid(&format!("{key}.Pi_over_p"), e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(rename = "N")]
    pub cells: usize,
    pub x_left: f64,
    pub x_right: f64,
    #[serde(rename = "CFL")]
    pub cfl: f64,
    pub t_end: f64,
    /// Defaults to outflow for Riemann problems and periodic otherwise.
    pub boundary: Option<BoundaryName>,
    pub scheme: SchemeName,
    pub model: ModelName,
    pub max_steps: Option<usize>,
    /// Background of the acoustic wave and the uniform state.
    pub background: StateConfig,
    pub amplitude: f64,
    pub modes: u32,
    pub left: StateConfig,
    pub right: StateConfig,
    pub x0: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::Acoustic,
            cells: 200,
            x_left: 0.0,
            x_right: 1.0,
            cfl: 0.45,
            t_end: 0.2,
            boundary: None,
            scheme: SchemeName::Muscl,
            model: ModelName::Et6,
            max_steps: None,
            background: StateConfig::default(),
            amplitude: 1e-3,
            modes: 1,
            left: StateConfig::default(),
            right: StateConfig {
                rho: 0.125,
                p: 0.1,
                ..StateConfig::default()
            },
            x0: 0.5,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub velocity_order: usize,
    pub internal_order: usize,
    pub adaptive_tol: f64,
    pub moment_tol: f64,
    pub flux_tol: f64,
    pub entropy_tol: f64,
    pub hyperbolicity_tol: f64,
    pub speed_tol: f64,
    pub gradient_tol: f64,
    pub k_tol: f64,
    pub relax_tol: f64,
    pub conservation_tol: f64,
    pub entropy_step_tol: f64,
    /// Require the coupling condition on every eigenvector rather than only
    /// on the sound branches.
    pub strict_k: bool,
    /// State used by `check`.
    pub rho: f64,
    #[serde(rename = "T")]
    pub temp: f64,
    pub v: [f64; 3],
    /// Values of `Pi/p` checked by `check`.
    #[serde(rename = "Z")]
    pub z: Vec<f64>,
    /// Degrees of freedom of the `sweep` grid.
    #[serde(rename = "sweep_D")]
    pub sweep_dof: Vec<f64>,
    /// Number of `Pi/p` values across the window in `sweep`.
    #[serde(rename = "sweep_Z_points")]
    pub sweep_z_points: usize,
    /// Fraction of the admissibility window covered by `sweep`.
    pub sweep_window: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            velocity_order: 64,
            internal_order: 128,
            adaptive_tol: 1e-10,
            moment_tol: 1e-10,
            flux_tol: 1e-8,
            entropy_tol: 1e-8,
            hyperbolicity_tol: 1e-7,
            speed_tol: 1e-10,
            gradient_tol: 1e-6,
            k_tol: 1e-10,
            relax_tol: 1e-12,
            conservation_tol: 1e-13,
            entropy_step_tol: 1e-10,
            strict_k: false,
            rho: 1.0,
            temp: 1.0,
            v: [0.0; 3],
            z: vec![0.0],
            sweep_dof: vec![3.5, 4.0, 5.0, 6.0, 7.0, 9.0, 12.0],
            sweep_z_points: 7,
            sweep_window: 0.95,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct NsLimitConfig {
    pub tau: f64,
    #[serde(rename = "N")]
    pub cells: usize,
    pub length: f64,
    pub amplitude: f64,
    pub t_end: f64,
    #[serde(rename = "CFL")]
    pub cfl: f64,
    pub margin: usize,
    /// Pass when the deviation is at most `factor * tau`.
    pub factor: f64,
}

impl Default for NsLimitConfig {
    fn default() -> Self {
        Self {
            tau: 1e-3,
            cells: 400,
            length: 2.0,
            amplitude: 1e-3,
            t_end: 0.2,
            cfl: 0.05,
            margin: 2,
            factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Time between snapshots of `run` and `relax`.
    pub cadence: Option<f64>,
    pub format: Option<String>,
}

pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig, ConfigError> {
    let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::Parse {
        path: origin.to_string(),
        message: e.message().to_string(),
    })?;
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
        path: e.path().to_string(),
        message: e.inner().message().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, &path.display().to_string())
}

fn positive(key: &str, x: f64) -> Result<(), ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive, got {x}")))
    }
}

fn cfl(key: &str, x: f64) -> Result<(), ConfigError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must lie in (0, 1), got {x}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.gas;
        if !(g.dof > 3.0) {
            return Err(invalid("gas.D", format!("must be > 3, got {}", g.dof)));
        }
        positive("gas.m", g.m)?;
        positive("gas.kB", g.kb)?;
        positive("gas.tau", g.tau)?;
        let gas = self.gas_spec()?;

        let s = &self.scenario;
        cfl("scenario.CFL", s.cfl)?;
        positive("scenario.t_end", s.t_end)?;
        if s.cells < 4 {
            return Err(invalid("scenario.N", format!("need at least 4 cells, got {}", s.cells)));
        }
        if !(s.x_right > s.x_left) {
            return Err(invalid("scenario.x_right", "must exceed scenario.x_left"));
        }
        if !(s.x0 > s.x_left && s.x0 < s.x_right) {
            return Err(invalid("scenario.x0", "must lie inside the domain"));
        }
        positive("scenario.amplitude", s.amplitude)?;
        if s.modes == 0 {
            return Err(invalid("scenario.modes", "must be at least 1"));
        }
        s.background.build("scenario.background", &gas)?;
        s.left.build("scenario.left", &gas)?;
        s.right.build("scenario.right", &gas)?;

        let c = &self.check;
        for (key, order) in [("check.velocity_order", c.velocity_order), ("check.internal_order", c.internal_order)] {
            if order < 8 {
                return Err(invalid(key, format!("must be at least 8, got {order}")));
            }
        }
        for (key, x) in [
            ("check.adaptive_tol", c.adaptive_tol),
            ("check.moment_tol", c.moment_tol),
            ("check.flux_tol", c.flux_tol),
            ("check.entropy_tol", c.entropy_tol),
            ("check.hyperbolicity_tol", c.hyperbolicity_tol),
            ("check.speed_tol", c.speed_tol),
            ("check.gradient_tol", c.gradient_tol),
            ("check.k_tol", c.k_tol),
            ("check.relax_tol", c.relax_tol),
            ("check.conservation_tol", c.conservation_tol),
            ("check.entropy_step_tol", c.entropy_step_tol),
            ("check.rho", c.rho),
            ("check.T", c.temp),
        ] {
            positive(key, x)?;
        }
        let zmax = gas.z_max();
        if let Some(z) = c.z.iter().find(|z| !(**z > -1.0 && **z < zmax)) {
            return Err(invalid("check.Z", format!("{z} lies outside the admissibility window (-1, {zmax})")));
        }
        if c.z.is_empty() {
            return Err(invalid("check.Z", "needs at least one value"));
        }
        if let Some(d) = c.sweep_dof.iter().find(|d| !(**d > 3.0)) {
            return Err(invalid("check.sweep_D", format!("must be > 3, got {d}")));
        }
        if c.sweep_dof.is_empty() {
            return Err(invalid("check.sweep_D", "needs at least one value"));
        }
        if c.sweep_z_points < 1 {
            return Err(invalid("check.sweep_Z_points", "must be at least 1"));
        }
        if !(c.sweep_window > 0.0 && c.sweep_window < 1.0) {
            return Err(invalid("check.sweep_window", format!("must lie in (0, 1), got {}", c.sweep_window)));
        }

        let n = &self.nslimit;
        positive("nslimit.tau", n.tau)?;
        positive("nslimit.length", n.length)?;
        positive("nslimit.amplitude", n.amplitude)?;
        positive("nslimit.t_end", n.t_end)?;
        positive("nslimit.factor", n.factor)?;
        cfl("nslimit.CFL", n.cfl)?;
        if n.cells < 2 * n.margin + 4 {
            return Err(invalid("nslimit.N", format!("{} cells leave nothing inside a margin of {}", n.cells, n.margin)));
        }

        if let Some(c) = self.output.cadence {
            positive("output.cadence", c)?;
        }
        if let Some(f) = &self.output.format {
            if f != "csv" {
                return Err(invalid("output.format", format!("only \"csv\" is supported, got {f:?}")));
            }
        }
        Ok(())
    }

    pub fn gas_spec(&self) -> Result<GasSpec, ConfigError> {
        let g = &self.gas;
        GasSpec::new(g.dof, g.m, g.kb, g.tau).map_err(|e| invalid("gas", e.to_string()))
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let gas = self.gas_spec()?;
        let s = &self.scenario;
        let initial = match s.kind {
            ScenarioKind::Acoustic => InitialCondition::AcousticWave {
                background: s.background.build("scenario.background", &gas)?,
                amplitude: s.amplitude,
                modes: s.modes,
            },
            ScenarioKind::Uniform => InitialCondition::Uniform {
                state: s.background.build("scenario.background", &gas)?,
            },
            ScenarioKind::Riemann => InitialCondition::Riemann {
                left: s.left.build("scenario.left", &gas)?,
                right: s.right.build("scenario.right", &gas)?,
                x0: s.x0,
            },
        };
        let mut sc = Scenario::new(gas, initial, s.cells);
        sc.x_left = s.x_left;
        sc.x_right = s.x_right;
        sc.cfl = s.cfl;
        sc.t_end = s.t_end;
        sc.max_steps = s.max_steps;
        sc.output_interval = self.output.cadence;
        sc.boundary = match s.boundary {
            Some(BoundaryName::Periodic) => Boundary::Periodic,
            Some(BoundaryName::Outflow) => Boundary::Outflow,
            Some(BoundaryName::Reflective) => Boundary::Reflective,
            None if s.kind == ScenarioKind::Riemann => Boundary::Outflow,
            None => Boundary::Periodic,
        };
        sc.scheme = match s.scheme {
            SchemeName::Rusanov => Scheme::Rusanov,
            SchemeName::Muscl => Scheme::Muscl,
        };
        sc.model = match s.model {
            ModelName::Et6 => Model::Et6,
            ModelName::Euler => Model::Euler,
        };
        Ok(sc)
    }

    /// Coarser quadrature and sweep grids for fast runs.
    pub fn quick(&mut self) {
        let c = &mut self.check;
        c.velocity_order = (c.velocity_order / 2).max(8);
        c.internal_order = (c.internal_order / 2).max(8);
        c.sweep_z_points = (c.sweep_z_points / 2).max(1);
        let keep = (c.sweep_dof.len() / 4).max(2).min(c.sweep_dof.len());
        let stride = c.sweep_dof.len().div_ceil(keep);
        c.sweep_dof = c.sweep_dof.iter().step_by(stride).copied().collect();
    }

    /// `--output-dir`, then `[output] dir`, then `ET6_OUTPUT_DIR`, then
    /// `et6-output`.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output.dir.clone())
            .or_else(|| std::env::var_os("ET6_OUTPUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("et6-output"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_takes_defaults() {
        let cfg = parse_config("[gas]\nD = 5\n", "t").unwrap();
        assert_eq!(cfg.gas, GasConfig::default());
        assert_eq!(cfg.check, CheckConfig::default());
        let cfg = parse_config("", "t").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn out_of_range_values_name_the_key() {
        let err = parse_config("[gas]\nD = 3\n", "t").unwrap_err().to_string();
        assert!(err.starts_with("gas.D:"), "{err}");
        let err = parse_config("[scenario]\nCFL = 1.5\n", "t").unwrap_err().to_string();
        assert!(err.starts_with("scenario.CFL:"), "{err}");
        let err = parse_config("[check]\nZ = [0.0, 0.9]\n", "t").unwrap_err().to_string();
        assert!(err.starts_with("check.Z:"), "{err}");
    }

    #[test]
    fn unknown_keys_and_bad_types_are_rejected() {
        let err = parse_config("[gas]\nDx = 5\n", "t").unwrap_err().to_string();
        assert!(err.contains("gas") && err.contains("Dx"), "{err}");
        let err = parse_config("[scenario]\nN = \"many\"\n", "t").unwrap_err().to_string();
        assert!(err.starts_with("scenario.N:"), "{err}");
        let err = parse_config("[scenario]\nkind = \"vortex\"\n", "t").unwrap_err().to_string();
        assert!(err.starts_with("scenario.kind:"), "{err}");
        assert!(parse_config("[extra]\n", "t").is_err());
    }

    #[test]
    fn scenario_boundary_follows_kind() {
        let cfg = parse_config("[scenario]\nkind = \"riemann\"\n", "t").unwrap();
        assert_eq!(cfg.scenario().unwrap().boundary, Boundary::Outflow);
        let cfg = parse_config("[scenario]\nkind = \"riemann\"\nboundary = \"reflective\"\n", "t").unwrap();
        assert_eq!(cfg.scenario().unwrap().boundary, Boundary::Reflective);
        assert_eq!(RunConfig::default().scenario().unwrap().boundary, Boundary::Periodic);
    }

    #[test]
    fn quick_shrinks_the_grids() {
        let mut cfg = RunConfig::default();
        cfg.quick();
        assert_eq!(cfg.check.velocity_order, 32);
        assert_eq!(cfg.check.sweep_z_points, 3);
        assert!(cfg.check.sweep_dof.len() < 7);
    }
}
