//! Radio-link primitives: receive antenna gain, free-space path loss,
//! Nakagami-m power gains and SINR assembly.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{light_speed, Scalar};

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Radio parameters of one hop. All quantities linear (W, Hz, m, ratios).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopConfig<T> {
    pub tx_power: T,
    pub carrier_freq: T,
    /// Receive antenna illumination coefficient.
    pub illumination_coeff: T,
    /// Receive reflector diameter.
    pub dish_diameter: T,
    /// Extra atmospheric/rain loss factor in (0, 1].
    pub extra_loss: T,
    pub nakagami_m: u32,
    pub nakagami_omega: T,
    pub noise_power: T,
    pub sinr_threshold: T,
    /// Beamwidth coefficient of the receive antenna; only the satellite hop uses it.
    pub beamwidth_coeff: T,
}

impl<T: Scalar> HopConfig<T> {
    /// Checks the parameter invariants. Errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        fn positive<T: Scalar>(name: &str, v: T) -> Result<()> {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(
                    name,
                    format!("must be positive and finite (got {v})"),
                ))
            }
        }
        positive("tx_power", self.tx_power)?;
        positive("carrier_freq", self.carrier_freq)?;
        positive("illumination_coeff", self.illumination_coeff)?;
        positive("dish_diameter", self.dish_diameter)?;
        positive("nakagami_omega", self.nakagami_omega)?;
        positive("sinr_threshold", self.sinr_threshold)?;
        if !(self.extra_loss > T::zero() && self.extra_loss <= T::one()) {
            return Err(Error::config(
                "extra_loss",
                format!("must lie in (0, 1] (got {})", self.extra_loss),
            ));
        }
        if self.nakagami_m < 1 {
            return Err(Error::config("nakagami_m", "must be an integer >= 1"));
        }
        if !(self.noise_power >= T::zero()) || !self.noise_power.is_finite() {
            return Err(Error::config(
                "noise_power",
                format!("must be non-negative (got {})", self.noise_power),
            ));
        }
        if !(self.beamwidth_coeff >= T::zero()) || !self.beamwidth_coeff.is_finite() {
            return Err(Error::config(
                "beamwidth_coeff",
                format!("must be non-negative (got {})", self.beamwidth_coeff),
            ));
        }
        Ok(())
    }

    pub fn m(&self) -> T {
        T::from_u32(self.nakagami_m).expect("small integer")
    }

    /// Receive antenna gain `ι (π D f / c)²`.
    pub fn antenna_gain(&self) -> T {
        let x = T::PI() * self.dish_diameter * self.carrier_freq / light_speed::<T>();
        self.illumination_coeff * x * x
    }

    /// Path loss factor `l (c / (4 π f))² r⁻²`.
    pub fn path_loss(&self, distance: T) -> Result<T> {
        if !(distance > T::zero()) {
            return Err(Error::Domain(format!(
                "path loss needs a positive distance (got {distance})"
            )));
        }
        let k = light_speed::<T>() / (T::lit(4.0) * T::PI() * self.carrier_freq);
        Ok(self.extra_loss * k * k / (distance * distance))
    }

    /// `G L(r) r²`, which equals `ι l D² / 16` and is independent of frequency.
    pub fn gain_loss_constant(&self) -> T {
        self.illumination_coeff * self.extra_loss * self.dish_diameter * self.dish_diameter / T::lit(16.0)
    }

    /// Mean received power `P G Ω L(r)` from a transmitter at `distance`.
    pub fn mean_received_power(&self, distance: T) -> Result<T> {
        Ok(self.tx_power * self.antenna_gain() * self.nakagami_omega * self.path_loss(distance)?)
    }

    /// SINR `P G h L(r0) / (Σ P G h_t L(r_t) + σ²)` at the receiver.
    pub fn sinr(&self, signal_distance: T, signal_gain: T, interferers: &[(T, T)]) -> Result<T> {
        let pg = self.tx_power * self.antenna_gain();
        let signal = pg * signal_gain * self.path_loss(signal_distance)?;
        let mut interference = T::zero();
        for &(r, h) in interferers {
            interference = interference + pg * h * self.path_loss(r)?;
        }
        Ok(signal / (interference + self.noise_power))
    }
}

/// Thermal noise power `k_B T B` in watts.
pub fn thermal_noise_power(temperature_k: f64, bandwidth_hz: f64) -> f64 {
    BOLTZMANN * temperature_k * bandwidth_hz
}

/// Converts a ratio in dB to linear scale.
pub fn db_to_linear<T: Scalar>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

pub fn linear_to_db<T: Scalar>(linear: T) -> T {
    T::lit(10.0) * linear.log10()
}

/// Sampler for Nakagami-m channel power gains: `Gamma(shape = m, scale = Ω / m)`.
#[derive(Debug, Clone, Copy)]
pub struct NakagamiPower {
    gamma: Gamma<f64>,
}

impl NakagamiPower {
    pub fn new(m: u32, omega: f64) -> Result<Self> {
        if m < 1 || !(omega > 0.0) {
            return Err(Error::Domain(format!(
                "Nakagami parameters need m >= 1 and omega > 0 (got m = {m}, omega = {omega})"
            )));
        }
        let gamma = Gamma::new(f64::from(m), omega / f64::from(m))
            .map_err(|e| Error::Domain(format!("gamma distribution: {e}")))?;
        Ok(NakagamiPower { gamma })
    }
}

impl Distribution<f64> for NakagamiPower {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.gamma.sample(rng)
    }
}

/// Draws one Nakagami-m power gain.
pub fn sample_nakagami_power<R: Rng + ?Sized>(m: u32, omega: f64, rng: &mut R) -> Result<f64> {
    Ok(NakagamiPower::new(m, omega)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn sample_hop() -> HopConfig<f64> {
        HopConfig {
            tx_power: 0.1,
            carrier_freq: 2e9,
            illumination_coeff: 0.6,
            dish_diameter: 0.3,
            extra_loss: 0.5,
            nakagami_m: 3,
            nakagami_omega: 1.0,
            noise_power: 1e-12,
            sinr_threshold: 1.0,
            beamwidth_coeff: 0.0,
        }
    }

    #[test]
    fn antenna_gain_values() {
        let mut cfg = sample_hop();
        cfg.illumination_coeff = 1.0;
        cfg.dish_diameter = 1.0;
        cfg.carrier_freq = SPEED_OF_LIGHT_OVER_PI;
        assert!((cfg.antenna_gain() - 1.0).abs() < 1e-12);

        let mut cfg = sample_hop();
        let g = cfg.antenna_gain();
        cfg.carrier_freq *= 2.0;
        assert!((cfg.antenna_gain() / g - 4.0).abs() < 1e-12);

        cfg.illumination_coeff = 0.6;
        cfg.dish_diameter = 0.5;
        cfg.carrier_freq = 20e9;
        // 40-digit reference value
        assert!((cfg.antenna_gain() - 6_588.849_534_059_468).abs() < 1e-8);
    }

    const SPEED_OF_LIGHT_OVER_PI: f64 = crate::scalar::SPEED_OF_LIGHT / std::f64::consts::PI;

    #[test]
    fn path_loss_values() {
        let mut cfg = sample_hop();
        let l1 = cfg.path_loss(100.0).unwrap();
        let l4 = cfg.path_loss(400.0).unwrap();
        assert!((l1 / l4 - 16.0).abs() < 1e-12);

        cfg.extra_loss = 1.0;
        let unit = crate::scalar::SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * cfg.carrier_freq);
        assert!((cfg.path_loss(unit).unwrap() - 1.0).abs() < 1e-12);
        assert!(cfg.path_loss(0.0).is_err());
        assert!(cfg.path_loss(-3.0).is_err());
    }

    #[test]
    fn gain_times_loss_cancels_frequency() {
        let mut cfg = sample_hop();
        for f in [1e8, 2e9, 3.3e10, 1e12] {
            cfg.carrier_freq = f;
            let r = 1234.5;
            let product = cfg.antenna_gain() * cfg.path_loss(r).unwrap();
            let expected =
                cfg.illumination_coeff * cfg.extra_loss * cfg.dish_diameter.powi(2) / (16.0 * r * r);
            assert!((product / expected - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sinr_cases() {
        let cfg = sample_hop();
        let snr = cfg.sinr(1000.0, 0.8, &[]).unwrap();
        let signal = cfg.tx_power * cfg.antenna_gain() * 0.8 * cfg.path_loss(1000.0).unwrap();
        assert!((snr - signal / cfg.noise_power).abs() / snr < 1e-12);

        let with = cfg.sinr(1000.0, 0.8, &[(1500.0, 0.1)]).unwrap();
        assert!(with < snr);

        let mut quiet = cfg;
        quiet.noise_power = 0.0;
        let sir = quiet.sinr(1000.0, 0.8, &[(1000.0, 0.8)]).unwrap();
        assert!((sir - 1.0).abs() < 1e-12);

        assert!(cfg.sinr(0.0, 1.0, &[]).is_err());
        assert!(cfg.sinr(10.0, 1.0, &[(0.0, 1.0)]).is_err());
    }

    #[test]
    fn sir_is_power_scale_invariant() {
        let mut cfg = sample_hop();
        cfg.noise_power = 0.0;
        let interferers = [(1200.0, 0.4), (900.0, 1.7)];
        let base = cfg.sinr(1000.0, 1.1, &interferers).unwrap();
        cfg.tx_power *= 37.0;
        let scaled = cfg.sinr(1000.0, 1.1, &interferers).unwrap();
        assert!((base / scaled - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_names_field() {
        let mut cfg = sample_hop();
        assert!(cfg.validate().is_ok());
        cfg.extra_loss = 1.5;
        match cfg.validate().unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "extra_loss"),
            other => panic!("unexpected {other:?}"),
        }
        let mut cfg = sample_hop();
        cfg.nakagami_m = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn nakagami_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let omega = 1.7;
        let dist = NakagamiPower::new(3, omega).unwrap();
        let mean = (0..n).map(|_| dist.sample(&mut rng)).sum::<f64>() / n as f64;
        let se = omega / 3f64.sqrt() / (n as f64).sqrt();
        assert!((mean - omega).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn nakagami_m1_is_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let omega = 2.0;
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_nakagami_power(1, omega, &mut rng).unwrap())
            .collect();
        // P(h > Ω) = e^{-1} for an exponential with mean Ω
        let tail = draws.iter().filter(|&&h| h > omega).count() as f64 / n as f64;
        let p = (-1f64).exp();
        assert!((tail - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn nakagami_rejects_bad_parameters() {
        assert!(NakagamiPower::new(0, 1.0).is_err());
        assert!(NakagamiPower::new(2, 0.0).is_err());
    }

    #[test]
    fn db_conversions() {
        assert!((db_to_linear(-5.0f64) - 0.316_227_766_016_837_94).abs() < 1e-15);
        assert_eq!(db_to_linear(0.0f64), 1.0);
        assert!((linear_to_db(db_to_linear(3.7f64)) - 3.7).abs() < 1e-12);
    }

    #[test]
    fn thermal_noise() {
        let n = thermal_noise_power(290.0, 1e6);
        assert!((n - 4.003_882_1e-15).abs() < 1e-21);
    }
}
