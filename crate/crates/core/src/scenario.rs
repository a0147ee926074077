//! The full two-hop configuration and the per-hop quantities derived from it.

use serde::{Deserialize, Serialize};

use crate::channel::HopConfig;
use crate::error::{Error, Result};
use crate::geom3d::{beamwidth, hop1_cap, hop2_cap, CapAnnulus, Hop, ShellGeometry};
use crate::pointproc::DeploymentConfig;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario<T> {
    pub shell: ShellGeometry<T>,
    pub deployment: DeploymentConfig<T>,
    pub hop1: HopConfig<T>,
    pub hop2: HopConfig<T>,
}

/// Everything the closed-form model needs for one hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopModel<T> {
    pub hop: Hop,
    pub radio: HopConfig<T>,
    pub cap: CapAnnulus<T>,
    /// Density of co-channel interferers on the transmitter shell.
    pub interferer_density: T,
    /// Scaled interferer density Ṙ multiplying the exclusion integral.
    pub r_dot: T,
}

impl<T: Scalar> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        self.shell.validate()?;
        self.deployment.validate()?;
        for (name, hop) in [("hop1", &self.hop1), ("hop2", &self.hop2)] {
            hop.validate().map_err(|e| match e {
                Error::Config { key, message } => Error::Config {
                    key: format!("{name}.{key}"),
                    message,
                },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn radio(&self, hop: Hop) -> &HopConfig<T> {
        match hop {
            Hop::GroundToAir => &self.hop1,
            Hop::AirToSatellite => &self.hop2,
        }
    }

    pub fn radio_mut(&mut self, hop: Hop) -> &mut HopConfig<T> {
        match hop {
            Hop::GroundToAir => &mut self.hop1,
            Hop::AirToSatellite => &mut self.hop2,
        }
    }

    /// Satellite 3 dB beam half-angle in radians.
    pub fn satellite_beamwidth(&self) -> Result<T> {
        beamwidth(
            self.hop2.carrier_freq,
            self.hop2.dish_diameter,
            self.hop2.beamwidth_coeff,
        )
    }

    pub fn cap(&self, hop: Hop) -> Result<CapAnnulus<T>> {
        match hop {
            Hop::GroundToAir => hop1_cap(&self.shell, self.deployment.effective_av_density()),
            Hop::AirToSatellite => hop2_cap(&self.shell, self.satellite_beamwidth()?),
        }
    }

    /// Interferer density λ_i: active GUs for hop 1, retained AVs for hop 2.
    pub fn interferer_density(&self, hop: Hop) -> T {
        match hop {
            Hop::GroundToAir => self.deployment.active_gu_density(),
            Hop::AirToSatellite => self.deployment.effective_av_density(),
        }
    }

    pub fn hop_model(&self, hop: Hop) -> Result<HopModel<T>> {
        let density = self.interferer_density(hop);
        Ok(HopModel {
            hop,
            radio: *self.radio(hop),
            cap: self.cap(hop)?,
            interferer_density: density,
            r_dot: r_dot(hop, &self.shell, density),
        })
    }

    /// Converts every field to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Scenario<U> {
        let c = |v: T| U::lit(v.to_f64_lossy());
        let hop = |h: &HopConfig<T>| HopConfig {
            tx_power: c(h.tx_power),
            carrier_freq: c(h.carrier_freq),
            illumination_coeff: c(h.illumination_coeff),
            dish_diameter: c(h.dish_diameter),
            extra_loss: c(h.extra_loss),
            nakagami_m: h.nakagami_m,
            nakagami_omega: c(h.nakagami_omega),
            noise_power: c(h.noise_power),
            sinr_threshold: c(h.sinr_threshold),
            beamwidth_coeff: c(h.beamwidth_coeff),
        };
        Scenario {
            shell: ShellGeometry {
                earth_radius: c(self.shell.earth_radius),
                av_altitude: c(self.shell.av_altitude),
                sat_altitude: c(self.shell.sat_altitude),
            },
            deployment: DeploymentConfig {
                gu_density: c(self.deployment.gu_density),
                gu_tx_probability: c(self.deployment.gu_tx_probability),
                av_parent_density: c(self.deployment.av_parent_density),
                hardcore_distance: c(self.deployment.hardcore_distance),
            },
            hop1: hop(&self.hop1),
            hop2: hop(&self.hop2),
        }
    }
}

/// Ṙ: interferer density scaled by `R_tx / R_rx`, the Jacobian of the
/// polar-angle to squared-distance change of variables.
pub fn r_dot<T: Scalar>(hop: Hop, shell: &ShellGeometry<T>, density: T) -> T {
    let ratio = match hop {
        Hop::GroundToAir => shell.earth_radius / shell.av_radius(),
        Hop::AirToSatellite => shell.av_radius() / shell.sat_radius(),
    };
    T::PI() * density * ratio
}
