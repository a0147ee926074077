//! Reference configuration: 600 km satellites, 1 km AV altitude,
//! m = 3 and Ω = 1 on both hops, λ_u = 50 /km², λ_a⁰ = 5 /km²,
//! θ₁ = 0 dB and θ₂ = -5 dB.
//!
//! Transmit powers, carrier frequencies, antenna sizes, losses, noise
//! powers, the satellite beamwidth coefficient and the GU activity
//! probability have no published values. The placeholders below are
//! chosen so that both hops operate in an interference-limited regime
//! where the AV density trade-off between the hops is visible.

use crate::channel::{db_to_linear, HopConfig};
use crate::geom3d::{ShellGeometry, DEFAULT_EARTH_RADIUS_M};
use crate::pointproc::DeploymentConfig;
use crate::scenario::Scenario;

/// Converts a density per km² to per m².
pub fn per_km2(v: f64) -> f64 {
    v * 1e-6
}

pub const REFERENCE_HARDCORE_DISTANCES_M: [f64; 3] = [0.0, 100.0, 200.0];

/// Ground-to-AV radio placeholders.
pub fn reference_hop1() -> HopConfig<f64> {
    HopConfig {
        tx_power: 0.1,
        carrier_freq: 2e9,
        illumination_coeff: 0.6,
        dish_diameter: 0.3,
        extra_loss: 0.5,
        nakagami_m: 3,
        nakagami_omega: 1.0,
        noise_power: 1e-12,
        sinr_threshold: db_to_linear(0.0),
        beamwidth_coeff: 0.0,
    }
}

/// AV-to-satellite radio placeholders; κ_s = 55 with a 15 m reflector at
/// 30 GHz gives a ~0.037° beam and a cap about 380 m in radius.
pub fn reference_hop2() -> HopConfig<f64> {
    HopConfig {
        tx_power: 10.0,
        carrier_freq: 30e9,
        illumination_coeff: 0.6,
        dish_diameter: 15.0,
        extra_loss: 0.5,
        nakagami_m: 3,
        nakagami_omega: 1.0,
        noise_power: 1e-12,
        sinr_threshold: db_to_linear(-5.0),
        beamwidth_coeff: 55.0,
    }
}

pub fn reference_scenario(hardcore_distance_m: f64) -> Scenario<f64> {
    Scenario {
        shell: ShellGeometry {
            earth_radius: DEFAULT_EARTH_RADIUS_M,
            av_altitude: 1_000.0,
            sat_altitude: 600_000.0,
        },
        deployment: DeploymentConfig {
            gu_density: per_km2(50.0),
            gu_tx_probability: 0.1,
            av_parent_density: per_km2(5.0),
            hardcore_distance: hardcore_distance_m,
        },
        hop1: reference_hop1(),
        hop2: reference_hop2(),
    }
}
