//! Scenario files: one JSON document per run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slope_nav::slope_metric::{convexity_bound, scenario_gravity_bound};
use slope_nav::{NavigationSetup, SurfaceChart, Vec2};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum SurfaceConfig {
    /// `z = slope * x` in Cartesian coordinates.
    Plane { slope: f64 },
    /// `z = amplitude * exp(-(x² + y²))` in polar coordinates `(ρ, φ)`.
    Gaussian { amplitude: f64 },
}

impl SurfaceConfig {
    pub fn chart(&self) -> SurfaceChart {
        match *self {
            SurfaceConfig::Plane { slope } => SurfaceChart::inclined_plane(slope),
            SurfaceConfig::Gaussian { amplitude } => SurfaceChart::gaussian_bell_polar(amplitude),
        }
    }

    fn parameter(&self) -> (&'static str, f64) {
        match *self {
            SurfaceConfig::Plane { slope } => ("slope", slope),
            SurfaceConfig::Gaussian { amplitude } => ("amplitude", amplitude),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    Single(f64),
    List(Vec<f64>),
}

impl EtaSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            EtaSpec::Single(v) => vec![*v],
            EtaSpec::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory, overridden by `--out`.
    #[serde(default = "default_output_path")]
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: default_output_path(),
            format: OutputFormat::Csv,
        }
    }
}

fn default_output_path() -> PathBuf {
    PathBuf::from("out")
}

fn default_directions() -> usize {
    8
}

fn default_horizon() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gbar: Option<f64>,
    pub eta_tilde: EtaSpec,
    /// Chart coordinates; `(ρ, φ)` on the Gaussian bell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<[f64; 2]>,
    /// Wind norm for indicatrix and speed runs detached from a surface.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wind_norm_override: Option<f64>,
    /// Sample count for curves, number of fan directions for geodesics.
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Emit Riemannian, Zermelo and Matsumoto reference curves with the indicatrix.
    #[serde(default)]
    pub comparisons: bool,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub strict_convexity: bool,
}

/// Where indicatrix commands take the wind from.
#[derive(Debug, Clone)]
pub enum WindSource {
    Override(f64),
    Surface {
        chart: Box<SurfaceChart>,
        origin: Vec2,
        wind_norm: f64,
    },
}

impl WindSource {
    pub fn wind_norm(&self) -> f64 {
        match self {
            WindSource::Override(w) => *w,
            WindSource::Surface { wind_norm, .. } => *wind_norm,
        }
    }
}

fn finite_nonnegative(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(CliError::config(format!(
            "{name} = {v} must be finite and nonnegative"
        )))
    }
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> CliResult<Self> {
        let config: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        let etas = self.etas();
        if etas.is_empty() {
            return Err(CliError::config("eta_tilde list is empty"));
        }
        for eta in etas {
            if !(0.0..=1.0).contains(&eta) {
                return Err(CliError::config(format!(
                    "eta_tilde = {eta} outside [0, 1]"
                )));
            }
        }
        if self.surface.is_some() != self.gbar.is_some() {
            return Err(CliError::config("surface and gbar must be given together"));
        }
        if let Some(g) = self.gbar {
            finite_nonnegative("gbar", g)?;
        }
        if let Some(w) = self.wind_norm_override {
            finite_nonnegative("wind_norm_override", w)?;
        }
        if let Some(surface) = &self.surface {
            let (name, v) = surface.parameter();
            if !v.is_finite() {
                return Err(CliError::config(format!(
                    "surface {name} = {v} is not finite"
                )));
            }
        }
        if self.surface.is_none() && self.wind_norm_override.is_none() {
            return Err(CliError::config(
                "either surface + gbar or wind_norm_override is required",
            ));
        }
        if self.directions == 0 {
            return Err(CliError::config("directions must be positive"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(CliError::config(format!(
                "horizon = {} must be positive",
                self.horizon
            )));
        }
        if let (Some(surface), Some(origin)) = (&self.surface, self.origin) {
            if !surface.chart().in_domain(Vec2::new(origin[0], origin[1])) {
                return Err(CliError::config(format!(
                    "origin ({}, {}) lies outside the chart domain",
                    origin[0], origin[1]
                )));
            }
        }
        Ok(())
    }

    pub fn etas(&self) -> Vec<f64> {
        self.eta_tilde.values()
    }

    pub fn origin_point(&self) -> CliResult<Vec2> {
        self.origin
            .map(|o| Vec2::new(o[0], o[1]))
            .ok_or_else(|| CliError::config("origin is required"))
    }

    /// The override wins when both are present, so one file can drive both
    /// surface geodesics and detached indicatrix plots.
    pub fn wind_source(&self) -> CliResult<WindSource> {
        if let Some(w) = self.wind_norm_override {
            return Ok(WindSource::Override(w));
        }
        let (surface, gbar) = self.surface_and_gbar()?;
        let chart = surface.chart();
        let origin = self.origin_point()?;
        let wind_norm = chart.gravitational_wind(gbar, origin)?.norm;
        Ok(WindSource::Surface {
            chart: Box::new(chart),
            origin,
            wind_norm,
        })
    }

    pub fn surface_and_gbar(&self) -> CliResult<(SurfaceConfig, f64)> {
        match (self.surface, self.gbar) {
            (Some(s), Some(g)) => Ok((s, g)),
            _ => Err(CliError::config("this command needs a surface and gbar")),
        }
    }

    pub fn navigation(&self, eta_tilde: f64) -> CliResult<NavigationSetup> {
        let (surface, gbar) = self.surface_and_gbar()?;
        Ok(NavigationSetup::new(surface.chart(), gbar, eta_tilde)?)
    }

    /// Whether the configured wind stays strictly below `b̃0(η̃)`: the
    /// override itself, or `ḡ` against the surface-wide bound.
    pub fn admissible(&self, eta_tilde: f64) -> CliResult<Admissibility> {
        let b0 = convexity_bound(eta_tilde)?;
        if let Some(w) = self.wind_norm_override {
            return Ok(Admissibility {
                eta_tilde,
                b0,
                gravity_bound: None,
                admissible: w < b0,
            });
        }
        let (surface, gbar) = self.surface_and_gbar()?;
        let bound = scenario_gravity_bound(surface.chart().surface(), eta_tilde)?;
        Ok(Admissibility {
            eta_tilde,
            b0,
            gravity_bound: Some(bound),
            admissible: gbar < bound,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    pub eta_tilde: f64,
    pub b0: f64,
    /// Largest admissible `ḡ` on the configured surface.
    pub gravity_bound: Option<f64>,
    pub admissible: bool,
}
