//! Project configuration: a sectioned key/value file (TOML) with every field
//! defaulting to the bundled reference rig.
//!
//! Unknown keys are rejected, all values are validated against the owning
//! module's invariants at load time, and `dump` emits a file that reparses
//! to an identical configuration.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use flexlink::fixture;
use flexlink::modal::Normalization;

/// Configuration errors, split by exit-code class.
#[derive(Debug)]
pub enum ConfigError {
    /// Unreadable or unparseable file.
    Syntax(String),
    /// Parsed but violates an invariant; the message names the field.
    Semantic(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax(msg) => write!(out, "config syntax error: {msg}"),
            ConfigError::Semantic(msg) => write!(out, "config error: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectConfig {
    pub beam: BeamSection,
    pub modes: ModesSection,
    pub controller: ControllerSection,
    pub observer: ObserverSection,
    pub simulation: SimulationSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamSection {
    pub rho: f64,
    pub length: f64,
    pub ei: f64,
    pub hub_inertia: f64,
    pub payload_mass: f64,
    pub payload_inertia: f64,
    pub damping_ratio: f64,
}

impl Default for BeamSection {
    fn default() -> Self {
        let beam = fixture::beam::<f64>();
        Self {
            rho: beam.rho,
            length: beam.length,
            ei: beam.ei,
            hub_inertia: beam.hub_inertia,
            payload_mass: beam.payload_mass,
            payload_inertia: beam.payload_inertia,
            damping_ratio: beam.damping_ratio,
        }
    }
}

/// Where the modal data driving the plant matrices comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModalSource {
    /// Bundled data-sheet values (the coordinates the default sliding row
    /// vector and observer matrices are expressed in).
    Catalog,
    /// Full modal analysis from the beam parameters under the configured
    /// normalization.
    Computed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesSection {
    /// Mode count of the controller/observer design model.
    pub n_design: usize,
    /// Mode count of the simulated plant (>= n_design; the mismatch is the
    /// spillover experiment).
    pub n_plant: usize,
    /// Shape scaling convention for the computed path.
    pub normalization: String,
    pub source: ModalSource,
}

impl Default for ModesSection {
    fn default() -> Self {
        Self {
            n_design: 2,
            n_plant: 5,
            normalization: Normalization::MeanSquare.tag().to_string(),
            source: ModalSource::Catalog,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerSection {
    /// Sliding row vector, length `2 n_design + 2`.
    pub gamma: Vec<f64>,
    pub k1: f64,
    pub k2: f64,
    /// Optional boundary-layer width; absent means pure switching.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_layer: Option<f64>,
}

impl Default for ControllerSection {
    fn default() -> Self {
        Self {
            gamma: fixture::GAMMA.to_vec(),
            k1: fixture::K1,
            k2: fixture::K2,
            boundary_layer: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RealizationChoice {
    /// Require the functional to be exactly realizable.
    Exact,
    /// Accept the minimal-norm least-squares output maps and report the
    /// residual.
    LeastSquares,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObserverSection {
    pub order: usize,
    /// Observer dynamics, `order x order`.
    pub n: Vec<Vec<f64>>,
    /// Output injection, `order x 2`.
    pub l: Vec<Vec<f64>>,
    pub realization: RealizationChoice,
}

impl Default for ObserverSection {
    fn default() -> Self {
        Self {
            order: 2,
            n: fixture::OBSERVER_N.iter().map(|r| r.to_vec()).collect(),
            l: fixture::OBSERVER_L.iter().map(|r| r.to_vec()).collect(),
            realization: RealizationChoice::LeastSquares,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Regulation,
    Tracking,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Regulation => "regulation",
            Scenario::Tracking => "tracking",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    FullState,
    ObserverFed,
}

impl ControlMode {
    pub fn name(self) -> &'static str {
        match self {
            ControlMode::FullState => "full_state",
            ControlMode::ObserverFed => "observer_fed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub dt: f64,
    pub t_final: f64,
    pub scenario: Scenario,
    pub mode: ControlMode,
    /// Regulation setpoint (rad); the tracking trajectory is fixed.
    pub theta_d: f64,
    /// Initial plant state; absent means the bundled initial state
    /// truncated/padded to the plant order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// Initial observer state; absent means zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta0: Option<Vec<f64>>,
    pub band_sigma: f64,
    pub settle_tol: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            t_final: 15.0,
            scenario: Scenario::Regulation,
            mode: ControlMode::ObserverFed,
            theta_d: fixture::THETA_D_REGULATION,
            x0: None,
            eta0: None,
            band_sigma: flexlink::sim::DEFAULT_SIGMA_BAND,
            settle_tol: flexlink::sim::DEFAULT_SETTLE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
    pub emit_plot_data: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".to_string(),
            emit_plot_data: true,
        }
    }
}

impl ProjectConfig {
    /// Loads and validates a configuration file. An empty file yields the
    /// full reference defaults.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Syntax(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: ProjectConfig =
            toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Serializes every field explicitly; `load(dump(c)) == c`.
    pub fn dump(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn normalization(&self) -> Result<Normalization, ConfigError> {
        match self.modes.normalization.as_str() {
            "mean-square" => Ok(Normalization::MeanSquare),
            "unit-hub-slope" => Ok(Normalization::UnitHubSlope),
            "unit-tip" => Ok(Normalization::UnitTip),
            other => Err(ConfigError::Semantic(format!(
                "modes.normalization: unknown tag `{other}` \
                 (expected mean-square, unit-hub-slope or unit-tip)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let semantic = |msg: String| Err(ConfigError::Semantic(msg));

        let b = &self.beam;
        for (field, value, strict) in [
            ("beam.rho", b.rho, true),
            ("beam.length", b.length, true),
            ("beam.ei", b.ei, true),
            ("beam.hub_inertia", b.hub_inertia, false),
            ("beam.payload_mass", b.payload_mass, false),
            ("beam.payload_inertia", b.payload_inertia, false),
            ("beam.damping_ratio", b.damping_ratio, false),
        ] {
            if !value.is_finite() || (strict && value <= 0.0) || (!strict && value < 0.0) {
                return semantic(format!(
                    "{field}: must be {} and finite, got {value}",
                    if strict { "> 0" } else { ">= 0" }
                ));
            }
        }

        if self.modes.n_design == 0 {
            return semantic("modes.n_design: at least one mode is required".into());
        }
        if self.modes.n_plant < self.modes.n_design {
            return semantic(format!(
                "modes.n_plant: must be >= n_design ({}), got {}",
                self.modes.n_design, self.modes.n_plant
            ));
        }
        if self.modes.source == ModalSource::Catalog && self.modes.n_plant > fixture::OMEGA.len() {
            return semantic(format!(
                "modes.n_plant: catalog data covers {} modes, got {}",
                fixture::OMEGA.len(),
                self.modes.n_plant
            ));
        }
        self.normalization()?;

        let expected_gamma = 2 * self.modes.n_design + 2;
        if self.controller.gamma.len() != expected_gamma {
            return semantic(format!(
                "controller.gamma: expected {} entries for n_design = {}, got {}",
                expected_gamma,
                self.modes.n_design,
                self.controller.gamma.len()
            ));
        }
        if !self.controller.k1.is_finite() || self.controller.k1 <= 0.0 {
            return semantic(format!(
                "controller.k1: must be > 0, got {}",
                self.controller.k1
            ));
        }
        if !self.controller.k2.is_finite() || self.controller.k2 < 0.0 {
            return semantic(format!(
                "controller.k2: must be >= 0, got {}",
                self.controller.k2
            ));
        }
        if let Some(eps) = self.controller.boundary_layer {
            if !eps.is_finite() || eps <= 0.0 {
                return semantic(format!(
                    "controller.boundary_layer: must be > 0 when present, got {eps}"
                ));
            }
        }

        let v = self.observer.order;
        if v == 0 {
            return semantic("observer.order: must be >= 1".into());
        }
        if self.observer.n.len() != v || self.observer.n.iter().any(|row| row.len() != v) {
            return semantic(format!("observer.n: expected a {v} x {v} matrix"));
        }
        if self.observer.l.len() != v || self.observer.l.iter().any(|row| row.len() != 2) {
            return semantic(format!("observer.l: expected a {v} x 2 matrix"));
        }

        let s = &self.simulation;
        if !s.dt.is_finite() || s.dt <= 0.0 {
            return semantic(format!("simulation.dt: must be > 0, got {}", s.dt));
        }
        if s.t_final < s.dt {
            return semantic(format!(
                "simulation.t_final: must be >= dt ({}), got {}",
                s.dt, s.t_final
            ));
        }
        if !s.theta_d.is_finite() {
            return semantic("simulation.theta_d: must be finite".into());
        }
        if let Some(x0) = &s.x0 {
            let expected = 2 * self.modes.n_plant + 2;
            if x0.len() != expected {
                return semantic(format!(
                    "simulation.x0: expected {expected} entries for n_plant = {}, got {}",
                    self.modes.n_plant,
                    x0.len()
                ));
            }
        }
        if let Some(eta0) = &s.eta0 {
            if eta0.len() != v {
                return semantic(format!(
                    "simulation.eta0: expected {v} entries, got {}",
                    eta0.len()
                ));
            }
        }
        if !s.band_sigma.is_finite() || s.band_sigma <= 0.0 {
            return semantic(format!(
                "simulation.band_sigma: must be > 0, got {}",
                s.band_sigma
            ));
        }
        if !s.settle_tol.is_finite() || s.settle_tol <= 0.0 {
            return semantic(format!(
                "simulation.settle_tol: must be > 0, got {}",
                s.settle_tol
            ));
        }
        if self.output.directory.is_empty() {
            return semantic("output.directory: must not be empty".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_yields_reference_defaults() {
        let config = ProjectConfig::parse("").unwrap();
        assert_eq!(config, ProjectConfig::default());
        assert_eq!(config.beam.rho, 0.5);
        assert_eq!(config.modes.n_plant, 5);
        assert_eq!(config.controller.k1, 67.71);
        assert_eq!(config.simulation.mode, ControlMode::ObserverFed);
    }

    #[test]
    fn negative_damping_names_the_field() {
        let err = ProjectConfig::parse("[beam]\ndamping_ratio = -0.1\n").unwrap_err();
        match err {
            ConfigError::Semantic(msg) => assert!(msg.contains("beam.damping_ratio"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            ProjectConfig::parse("[beam]\nrho = 0.5\nfoo = 1\n"),
            Err(ConfigError::Syntax(_))
        ));
        assert!(matches!(
            ProjectConfig::parse("[not_a_section]\nx = 1\n"),
            Err(ConfigError::Syntax(_))
        ));
    }

    #[test]
    fn dump_round_trips_identically() {
        let mut config = ProjectConfig::default();
        config.simulation.theta_d = std::f64::consts::FRAC_PI_4;
        config.controller.boundary_layer = Some(0.0125);
        config.simulation.x0 = Some(vec![0.1; 12]);
        let reparsed = ProjectConfig::parse(&config.dump()).unwrap();
        assert_eq!(reparsed, config);
    }

    #[test]
    fn gamma_length_is_checked_against_design_order() {
        let err = ProjectConfig::parse("[modes]\nn_design = 3\nn_plant = 5\n").unwrap_err();
        match err {
            ConfigError::Semantic(msg) => assert!(msg.contains("controller.gamma"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn x0_length_is_checked_against_plant_order() {
        let err = ProjectConfig::parse("[simulation]\nx0 = [0.1, 0.2]\n").unwrap_err();
        match err {
            ConfigError::Semantic(msg) => assert!(msg.contains("simulation.x0"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
