//! Run configuration files.
//!
//! ```toml
//! [geometry]
//! earth_radius_m = 6371000.0   # optional
//! av_altitude_m = 1000.0
//! sat_altitude_m = 600000.0
//!
//! [ground_users]
//! density_per_km2 = 50.0
//! tx_probability = 0.1
//!
//! [aerial]
//! parent_density_per_km2 = 5.0
//! hardcore_distance_m = 100.0
//!
//! [hop1]   # and [hop2], which also takes beamwidth_coeff
//! power_w = 0.1
//! freq_hz = 2e9
//! illumination = 0.6
//! antenna_diameter_m = 0.3
//! extra_loss = 0.5
//! nakagami_m = 3
//! nakagami_omega = 1.0
//! noise_w = 1e-12
//! sinr_threshold_db = 0.0
//!
//! [sim]    # optional
//! trials = 10000
//! seed = 1
//! mode = "cap_approx"
//!
//! [sweep]  # optional
//! variable = "av_parent_density"
//! values = [1.0, 2.0, 3.0]
//! ```
//!
//! Values are kept in file units (per km², dB) so an emitted config parses
//! back to bit-identical values; [`RunConfig::scenario`] converts to SI.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, HopConfig};
use crate::error::{Error, Result};
use crate::geom3d::{ShellGeometry, DEFAULT_EARTH_RADIUS_M};
use crate::pointproc::DeploymentConfig;
use crate::presets::per_km2;
use crate::scenario::Scenario;
use crate::simcore::{HopSelection, SimMode, TrialPlan};
use crate::sweep::{SweepSpec, SweepVariable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    #[serde(default = "default_earth_radius")]
    pub earth_radius_m: f64,
    pub av_altitude_m: f64,
    pub sat_altitude_m: f64,
}

fn default_earth_radius() -> f64 {
    DEFAULT_EARTH_RADIUS_M
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundUserSection {
    pub density_per_km2: f64,
    pub tx_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AerialSection {
    pub parent_density_per_km2: f64,
    pub hardcore_distance_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopSection {
    pub power_w: f64,
    pub freq_hz: f64,
    pub illumination: f64,
    pub antenna_diameter_m: f64,
    pub extra_loss: f64,
    /// Parsed as a float so a fractional value gets a targeted message.
    pub nakagami_m: f64,
    pub nakagami_omega: f64,
    pub noise_w: f64,
    pub sinr_threshold_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beamwidth_coeff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub out_of_cell_interference: bool,
}

fn default_trials() -> u64 {
    10_000
}

fn default_mode() -> String {
    SimMode::CapApprox.name().to_string()
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            trials: default_trials(),
            seed: 0,
            mode: default_mode(),
            out_of_cell_interference: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    pub ground_users: GroundUserSection,
    pub aerial: AerialSection,
    pub hop1: HopSection,
    pub hop2: HopSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn check(ok: bool, key: &str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(key, message))
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    check(
        v > 0.0 && v.is_finite(),
        key,
        format!("must be positive and finite (got {v})"),
    )
}

fn non_negative(key: &str, v: f64) -> Result<()> {
    check(
        v >= 0.0 && v.is_finite(),
        key,
        format!("must be non-negative and finite (got {v})"),
    )
}

impl HopSection {
    fn validate(&self, section: &str, needs_beam: bool) -> Result<()> {
        let key = |k: &str| format!("{section}.{k}");
        positive(&key("power_w"), self.power_w)?;
        positive(&key("freq_hz"), self.freq_hz)?;
        positive(&key("illumination"), self.illumination)?;
        positive(&key("antenna_diameter_m"), self.antenna_diameter_m)?;
        check(
            self.extra_loss > 0.0 && self.extra_loss <= 1.0,
            &key("extra_loss"),
            format!("must lie in (0, 1] (got {})", self.extra_loss),
        )?;
        check(
            self.nakagami_m >= 1.0 && self.nakagami_m.fract() == 0.0 && self.nakagami_m <= 64.0,
            &key("nakagami_m"),
            format!(
                "must be an integer between 1 and 64 (got {}); the closed form sums a \
                 finite series that exists only for integer m",
                self.nakagami_m
            ),
        )?;
        positive(&key("nakagami_omega"), self.nakagami_omega)?;
        non_negative(&key("noise_w"), self.noise_w)?;
        check(
            self.sinr_threshold_db.is_finite(),
            &key("sinr_threshold_db"),
            "must be finite",
        )?;
        match (needs_beam, self.beamwidth_coeff) {
            (true, None) => Err(Error::config(key("beamwidth_coeff"), "is required for hop2")),
            (true, Some(k)) => positive(&key("beamwidth_coeff"), k),
            (false, Some(_)) => Err(Error::config(key("beamwidth_coeff"), "only applies to hop2")),
            (false, None) => Ok(()),
        }
    }

    fn radio(&self) -> HopConfig<f64> {
        HopConfig {
            tx_power: self.power_w,
            carrier_freq: self.freq_hz,
            illumination_coeff: self.illumination,
            dish_diameter: self.antenna_diameter_m,
            extra_loss: self.extra_loss,
            nakagami_m: self.nakagami_m as u32,
            nakagami_omega: self.nakagami_omega,
            noise_power: self.noise_w,
            sinr_threshold: db_to_linear(self.sinr_threshold_db),
            beamwidth_coeff: self.beamwidth_coeff.unwrap_or(0.0),
        }
    }
}

impl RunConfig {
    /// Parses and validates a config file's text.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            // toml does not expose the key path of a type error; recover it from the span
            let key = e
                .span()
                .map(|span| key_at(text, span.start))
                .unwrap_or_else(|| "<file>".to_string());
            Error::config(key, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        positive("geometry.earth_radius_m", g.earth_radius_m)?;
        positive("geometry.av_altitude_m", g.av_altitude_m)?;
        positive("geometry.sat_altitude_m", g.sat_altitude_m)?;
        check(
            g.av_altitude_m < g.sat_altitude_m,
            "geometry.sat_altitude_m",
            format!(
                "must exceed av_altitude_m ({} <= {})",
                g.sat_altitude_m, g.av_altitude_m
            ),
        )?;
        non_negative("ground_users.density_per_km2", self.ground_users.density_per_km2)?;
        let p = self.ground_users.tx_probability;
        check(
            (0.0..=1.0).contains(&p),
            "ground_users.tx_probability",
            format!("must lie in [0, 1] (got {p})"),
        )?;
        positive(
            "aerial.parent_density_per_km2",
            self.aerial.parent_density_per_km2,
        )?;
        non_negative("aerial.hardcore_distance_m", self.aerial.hardcore_distance_m)?;
        self.hop1.validate("hop1", false)?;
        self.hop2.validate("hop2", true)?;
        check(self.sim.trials >= 1, "sim.trials", "must be at least 1")?;
        check(
            SimMode::parse(&self.sim.mode).is_some(),
            "sim.mode",
            format!(
                "must be \"cap_approx\" or \"full_voronoi\" (got \"{}\")",
                self.sim.mode
            ),
        )?;
        if let Some(sweep) = &self.sweep {
            let variable = SweepVariable::parse(&sweep.variable).ok_or_else(|| {
                Error::config(
                    "sweep.variable",
                    format!("unknown sweep variable \"{}\"", sweep.variable),
                )
            })?;
            SweepSpec::new(variable, sweep.values.clone()).map_err(|e| match e {
                Error::Domain(m) => Error::config("sweep.values", m),
                other => other,
            })?;
        }
        let scenario = self.scenario();
        scenario.validate()?;
        // the satellite beam has to hit the AV shell
        scenario
            .cap(crate::geom3d::Hop::AirToSatellite)
            .map_err(|e| Error::config("hop2.beamwidth_coeff", e.to_string()))?;
        Ok(())
    }

    /// The configuration in SI units.
    pub fn scenario(&self) -> Scenario<f64> {
        Scenario {
            shell: ShellGeometry {
                earth_radius: self.geometry.earth_radius_m,
                av_altitude: self.geometry.av_altitude_m,
                sat_altitude: self.geometry.sat_altitude_m,
            },
            deployment: DeploymentConfig {
                gu_density: per_km2(self.ground_users.density_per_km2),
                gu_tx_probability: self.ground_users.tx_probability,
                av_parent_density: per_km2(self.aerial.parent_density_per_km2),
                hardcore_distance: self.aerial.hardcore_distance_m,
            },
            hop1: self.hop1.radio(),
            hop2: self.hop2.radio(),
        }
    }

    pub fn trial_plan(&self) -> TrialPlan {
        TrialPlan {
            trials: self.sim.trials,
            master_seed: self.sim.seed,
            mode: SimMode::parse(&self.sim.mode).unwrap_or(SimMode::CapApprox),
            hops: HopSelection::Both,
            out_of_cell_interference: self.sim.out_of_cell_interference,
        }
    }

    pub fn sweep_spec(&self) -> Option<SweepSpec> {
        let s = self.sweep.as_ref()?;
        SweepSpec::new(SweepVariable::parse(&s.variable)?, s.values.clone()).ok()
    }

    /// Returns a copy with one sweep variable set, in file units.
    pub fn with_value(&self, variable: SweepVariable, value: f64) -> RunConfig {
        let mut cfg = self.clone();
        match variable {
            SweepVariable::AvParentDensity => cfg.aerial.parent_density_per_km2 = value,
            SweepVariable::HardcoreDistance => cfg.aerial.hardcore_distance_m = value,
            SweepVariable::GuDensity => cfg.ground_users.density_per_km2 = value,
            SweepVariable::SinrThreshold1 => cfg.hop1.sinr_threshold_db = value,
            SweepVariable::SinrThreshold2 => cfg.hop2.sinr_threshold_db = value,
        }
        cfg
    }

    /// Serializes back to the config file format.
    pub fn to_toml_string(&self) -> String {
        let mut out = String::new();
        let f = |v: f64| format!("{v:?}");
        let g = &self.geometry;
        let _ = writeln!(out, "[geometry]");
        let _ = writeln!(out, "earth_radius_m = {}", f(g.earth_radius_m));
        let _ = writeln!(out, "av_altitude_m = {}", f(g.av_altitude_m));
        let _ = writeln!(out, "sat_altitude_m = {}", f(g.sat_altitude_m));
        let _ = writeln!(out, "\n[ground_users]");
        let _ = writeln!(out, "density_per_km2 = {}", f(self.ground_users.density_per_km2));
        let _ = writeln!(out, "tx_probability = {}", f(self.ground_users.tx_probability));
        let _ = writeln!(out, "\n[aerial]");
        let _ = writeln!(
            out,
            "parent_density_per_km2 = {}",
            f(self.aerial.parent_density_per_km2)
        );
        let _ = writeln!(
            out,
            "hardcore_distance_m = {}",
            f(self.aerial.hardcore_distance_m)
        );
        for (name, hop) in [("hop1", &self.hop1), ("hop2", &self.hop2)] {
            let _ = writeln!(out, "\n[{name}]");
            let _ = writeln!(out, "power_w = {}", f(hop.power_w));
            let _ = writeln!(out, "freq_hz = {}", f(hop.freq_hz));
            let _ = writeln!(out, "illumination = {}", f(hop.illumination));
            let _ = writeln!(out, "antenna_diameter_m = {}", f(hop.antenna_diameter_m));
            let _ = writeln!(out, "extra_loss = {}", f(hop.extra_loss));
            let _ = writeln!(out, "nakagami_m = {}", hop.nakagami_m as u32);
            let _ = writeln!(out, "nakagami_omega = {}", f(hop.nakagami_omega));
            let _ = writeln!(out, "noise_w = {}", f(hop.noise_w));
            let _ = writeln!(out, "sinr_threshold_db = {}", f(hop.sinr_threshold_db));
            if let Some(k) = hop.beamwidth_coeff {
                let _ = writeln!(out, "beamwidth_coeff = {}", f(k));
            }
        }
        let _ = writeln!(out, "\n[sim]");
        let _ = writeln!(out, "trials = {}", self.sim.trials);
        let _ = writeln!(out, "seed = {}", self.sim.seed);
        let _ = writeln!(out, "mode = \"{}\"", self.sim.mode);
        if self.sim.out_of_cell_interference {
            let _ = writeln!(out, "out_of_cell_interference = true");
        }
        if let Some(sweep) = &self.sweep {
            let values: Vec<String> = sweep.values.iter().map(|&v| f(v)).collect();
            let _ = writeln!(out, "\n[sweep]");
            let _ = writeln!(out, "variable = \"{}\"", sweep.variable);
            let _ = writeln!(out, "values = [{}]", values.join(", "));
        }
        out
    }
}

/// Best-effort `section.key` for the byte offset of a parse error.
fn key_at(text: &str, offset: usize) -> String {
    let mut section = String::new();
    let mut key = String::new();
    let mut pos = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            section = trimmed.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            key.clear();
        } else if let Some((k, _)) = trimmed.split_once('=') {
            key = k.trim().to_string();
        }
        pos += line.len();
        if pos > offset {
            break;
        }
    }
    match (section.is_empty(), key.is_empty()) {
        (true, true) => "<file>".to_string(),
        (false, true) => section,
        (true, false) => key,
        (false, false) => format!("{section}.{key}"),
    }
}

/// Config text for the reference scenario with hard-core distance `hardcore_m`.
pub fn reference_config_text(hardcore_m: f64) -> String {
    format!(
        r#"[geometry]
earth_radius_m = 6371000.0
av_altitude_m = 1000.0
sat_altitude_m = 600000.0

[ground_users]
density_per_km2 = 50.0
tx_probability = 0.1

[aerial]
parent_density_per_km2 = 5.0
hardcore_distance_m = {hardcore_m:?}

[hop1]
power_w = 0.1
freq_hz = 2e9
illumination = 0.6
antenna_diameter_m = 0.3
extra_loss = 0.5
nakagami_m = 3
nakagami_omega = 1.0
noise_w = 1e-12
sinr_threshold_db = 0.0

[hop2]
power_w = 10.0
freq_hz = 30e9
illumination = 0.6
antenna_diameter_m = 15.0
extra_loss = 0.5
nakagami_m = 3
nakagami_omega = 1.0
noise_w = 1e-12
sinr_threshold_db = -5.0
beamwidth_coeff = 55.0

[sim]
trials = 10000
seed = 2024
mode = "cap_approx"
"#
    )
}
