//! Spherical geometry of the two hops: coverage caps, link-distance bounds
//! and distributions, and chord/polar-angle conversions.
//!
//! Every coverage region is a spherical cap on a transmitter shell seen
//! from a receiver on the cap axis. With `R_tx` the shell radius, `R_rx`
//! the receiver radius and `phi` the polar angle at Earth's center, the
//! squared link distance is `R_tx² + R_rx² - 2 R_tx R_rx cos(phi)`, so
//! uniformly placed transmitters have squared distances uniform on
//! `[r_min², r_max²]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{light_speed, Scalar};

/// Mean Earth radius used when a configuration does not set one, in meters.
pub const DEFAULT_EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Earth radius and the altitudes of the AV and satellite shells, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellGeometry<T> {
    pub earth_radius: T,
    pub av_altitude: T,
    pub sat_altitude: T,
}

impl<T: Scalar> ShellGeometry<T> {
    pub fn new(earth_radius: T, av_altitude: T, sat_altitude: T) -> Result<Self> {
        let shell = ShellGeometry {
            earth_radius,
            av_altitude,
            sat_altitude,
        };
        shell.validate()?;
        Ok(shell)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.earth_radius > T::zero()) || !self.earth_radius.is_finite() {
            return Err(Error::Geometry(format!(
                "earth radius must be positive (got {})",
                self.earth_radius
            )));
        }
        if !(self.av_altitude > T::zero() && self.av_altitude < self.sat_altitude)
            || !self.sat_altitude.is_finite()
        {
            return Err(Error::Geometry(format!(
                "altitudes must satisfy 0 < av_altitude < sat_altitude (got {} and {})",
                self.av_altitude, self.sat_altitude
            )));
        }
        Ok(())
    }

    /// Distance of the AV shell from Earth's center.
    pub fn av_radius(&self) -> T {
        self.earth_radius + self.av_altitude
    }

    /// Distance of the satellite from Earth's center.
    pub fn sat_radius(&self) -> T {
        self.earth_radius + self.sat_altitude
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hop {
    /// Ground user to aerial vehicle.
    GroundToAir,
    /// Aerial vehicle to satellite.
    AirToSatellite,
}

impl Hop {
    pub const BOTH: [Hop; 2] = [Hop::GroundToAir, Hop::AirToSatellite];

    /// 1 for the ground-to-air hop, 2 for the air-to-satellite hop.
    pub fn index(self) -> usize {
        match self {
            Hop::GroundToAir => 1,
            Hop::AirToSatellite => 2,
        }
    }
}

/// Coverage cap of one receiver, parameterized by link distance `[r_min, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapAnnulus<T> {
    r_min: T,
    r_max: T,
    // r_max² - r_min², kept separately since for the satellite hop it is
    // ~1e-6 of r_min² and cannot be recovered from the endpoints accurately
    span_sq: T,
    transmitter_shell_radius: T,
    receiver_radius: T,
    hop: Hop,
}

impl<T: Scalar> CapAnnulus<T> {
    fn from_span(
        r_min: T,
        span_sq: T,
        transmitter_shell_radius: T,
        receiver_radius: T,
        hop: Hop,
    ) -> Result<Self> {
        let r_max = (r_min * r_min + span_sq).sqrt();
        if !(span_sq > T::zero()) || !(r_max > r_min) || !r_max.is_finite() {
            return Err(Error::Geometry(format!(
                "degenerate coverage cap for hop {} (r_min = {r_min}, r_max = {r_max})",
                hop.index()
            )));
        }
        Ok(CapAnnulus {
            r_min,
            r_max,
            span_sq,
            transmitter_shell_radius,
            receiver_radius,
            hop,
        })
    }

    pub fn r_min(&self) -> T {
        self.r_min
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    /// `r_max² - r_min²`.
    pub fn span_sq(&self) -> T {
        self.span_sq
    }

    /// Radius of the sphere the transmitters sit on.
    pub fn transmitter_shell_radius(&self) -> T {
        self.transmitter_shell_radius
    }

    /// Distance of the receiver from Earth's center.
    pub fn receiver_radius(&self) -> T {
        self.receiver_radius
    }

    pub fn hop(&self) -> Hop {
        self.hop
    }

    /// Cap height on the transmitter shell, `span / (2 R_rx)`.
    pub fn cap_height(&self) -> T {
        self.span_sq / (T::lit(2.0) * self.receiver_radius)
    }

    /// Cap area on the transmitter shell (Archimedes: `2 pi R_tx h`).
    pub fn area(&self) -> T {
        T::lit(2.0) * T::PI() * self.transmitter_shell_radius * self.cap_height()
    }

    /// Polar angle of the cap boundary measured at Earth's center.
    pub fn boundary_angle(&self) -> T {
        // 1 - cos(phi) = h / R_tx, and 1 - cos(phi) = 2 sin²(phi / 2)
        let half_sin = (self.cap_height() / (T::lit(2.0) * self.transmitter_shell_radius)).sqrt();
        T::lit(2.0) * half_sin.min(T::one()).asin()
    }

    fn check_range(&self, r: T) -> Result<()> {
        if r >= self.r_min && r <= self.r_max {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "distance {r} outside [{}, {}]",
                self.r_min, self.r_max
            )))
        }
    }

    /// Link-distance density `2 r / (r_max² - r_min²)`.
    pub fn distance_pdf(&self, r: T) -> Result<T> {
        self.check_range(r)?;
        Ok(T::lit(2.0) * r / self.span_sq)
    }

    /// Link-distance CDF `(r² - r_min²) / (r_max² - r_min²)`.
    pub fn distance_cdf(&self, r: T) -> Result<T> {
        self.check_range(r)?;
        let cdf = (r - self.r_min) * (r + self.r_min) / self.span_sq;
        Ok(cdf.max(T::zero()).min(T::one()))
    }

    /// Inverse-CDF draw of a link distance from a uniform variate in `[0, 1)`.
    pub fn sample_distance(&self, uniform01: T) -> T {
        self.distance_at_fraction(uniform01)
    }

    /// Distance whose CDF value is `u`.
    pub fn distance_at_fraction(&self, u: T) -> T {
        (self.r_min * self.r_min + u * self.span_sq).sqrt()
    }
}

/// Coverage cap of a reference AV for its ground users.
///
/// The mean Voronoi cell area `1 / av_density` is taken as a cap on the
/// ground of height `H1 = 1 / (2 pi λ_a R_e)`.
pub fn hop1_cap<T: Scalar>(shell: &ShellGeometry<T>, av_density: T) -> Result<CapAnnulus<T>> {
    shell.validate()?;
    if !(av_density > T::zero()) || !av_density.is_finite() {
        return Err(Error::Domain(format!(
            "effective AV density must be positive (got {av_density})"
        )));
    }
    let two = T::lit(2.0);
    let h1 = T::one() / (two * T::PI() * av_density * shell.earth_radius);
    let span_sq = two * h1 * shell.av_radius();
    CapAnnulus::from_span(
        shell.av_altitude,
        span_sq,
        shell.earth_radius,
        shell.av_radius(),
        Hop::GroundToAir,
    )
}

/// Coverage cap of the reference satellite on the AV shell for a beam of
/// half-angle `beamwidth_rad` around nadir.
pub fn hop2_cap<T: Scalar>(shell: &ShellGeometry<T>, beamwidth_rad: T) -> Result<CapAnnulus<T>> {
    shell.validate()?;
    let r_tx = shell.av_radius();
    let r_rx = shell.sat_radius();
    let max_beam = (r_tx / r_rx).asin();
    if !(beamwidth_rad > T::zero()) || !(beamwidth_rad < max_beam) {
        return Err(Error::Geometry(format!(
            "satellite beamwidth {beamwidth_rad} rad does not intersect the AV shell; \
             it must lie in (0, {max_beam}) rad"
        )));
    }
    // Near-side intersection of the beam edge with the AV shell. Law of sines
    // gives the central angle as asin(R_rx sin(ϑ) / R_tx) - ϑ; this avoids the
    // cancellation in (R_rx cos ϑ - sqrt(...)) for narrow beams.
    let phi = (r_rx * beamwidth_rad.sin() / r_tx).asin() - beamwidth_rad;
    let half = (phi / T::lit(2.0)).sin();
    let span_sq = T::lit(4.0) * r_tx * r_rx * half * half;
    CapAnnulus::from_span(
        shell.sat_altitude - shell.av_altitude,
        span_sq,
        r_tx,
        r_rx,
        Hop::AirToSatellite,
    )
}

/// Satellite 3 dB beamwidth `c κ_s / (f D)`, a value in degrees, returned in radians.
pub fn beamwidth<T: Scalar>(freq_hz: T, dish_diameter_m: T, kappa_s: T) -> Result<T> {
    if !(freq_hz > T::zero()) || !(dish_diameter_m > T::zero()) || kappa_s < T::zero() {
        return Err(Error::Domain(format!(
            "beamwidth needs positive frequency and diameter and non-negative κ_s \
             (got f = {freq_hz}, D = {dish_diameter_m}, κ_s = {kappa_s})"
        )));
    }
    let degrees = light_speed::<T>() * kappa_s / (freq_hz * dish_diameter_m);
    Ok(degrees.to_radians())
}

/// Chord distance between points at radii `r_tx`, `r_rx` separated by polar angle `phi`.
pub fn polar_angle_to_distance<T: Scalar>(r_tx: T, r_rx: T, phi: T) -> T {
    // |r_tx - r_rx|² + 4 r_tx r_rx sin²(phi/2) is the cancellation-free form
    let half = (phi / T::lit(2.0)).sin();
    let d = r_tx - r_rx;
    (d * d + T::lit(4.0) * r_tx * r_rx * half * half).sqrt()
}

/// Inverse of [`polar_angle_to_distance`] on `[0, pi]`.
pub fn distance_to_polar_angle<T: Scalar>(r_tx: T, r_rx: T, distance: T) -> Result<T> {
    let d = r_tx - r_rx;
    let lo = d.abs();
    let hi = r_tx + r_rx;
    if !(distance >= lo && distance <= hi) {
        return Err(Error::Domain(format!(
            "distance {distance} unreachable between radii {r_tx} and {r_rx}"
        )));
    }
    let s = ((distance - lo) * (distance + lo) / (T::lit(4.0) * r_tx * r_rx)).sqrt();
    Ok(T::lit(2.0) * s.min(T::one()).asin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2_shell() -> ShellGeometry<f64> {
        ShellGeometry::new(DEFAULT_EARTH_RADIUS_M, 1_000.0, 600_000.0).unwrap()
    }

    #[test]
    fn shell_invariants() {
        assert!(ShellGeometry::new(0.0, 1.0, 2.0).is_err());
        assert!(ShellGeometry::new(1.0, 0.0, 2.0).is_err());
        assert!(ShellGeometry::new(1.0, 3.0, 2.0).is_err());
        assert!(ShellGeometry::new(1.0f32, 1.0, 2.0).is_ok());
    }

    #[test]
    fn hop1_bounds_match_closed_form() {
        let cap = hop1_cap(&fig2_shell(), 4.6272e-6).unwrap();
        assert_eq!(cap.r_min(), 1_000.0);
        // frozen from a 40-digit evaluation of sqrt(H_a² + 2 H_1 (R_e + H_a))
        assert!((cap.r_max() - 1_033.828_725_891_142_8).abs() < 1e-9);
        assert_eq!(cap.transmitter_shell_radius(), DEFAULT_EARTH_RADIUS_M);
        assert_eq!(cap.receiver_radius(), DEFAULT_EARTH_RADIUS_M + 1_000.0);
    }

    #[test]
    fn hop1_cap_shrinks_to_nadir() {
        let shell = fig2_shell();
        let mut prev = f64::INFINITY;
        for density in [1e-6, 1e-4, 1e-2, 1.0, 1e4] {
            let r_max = hop1_cap(&shell, density).unwrap().r_max();
            assert!(r_max < prev);
            prev = r_max;
        }
        assert!(prev - 1_000.0 < 1e-3);
    }

    #[test]
    fn hop1_rejects_bad_density() {
        assert!(matches!(hop1_cap(&fig2_shell(), 0.0), Err(Error::Domain(_))));
        assert!(matches!(hop1_cap(&fig2_shell(), -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn hop1_cap_area_is_mean_cell_area() {
        let density = 3.7e-6;
        let cap = hop1_cap(&fig2_shell(), density).unwrap();
        assert!((cap.area() * density - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hop1_pdf_forms_agree() {
        // both published forms of the hop-1 density at r = 1016 m
        let shell = fig2_shell();
        let density = 4.6272e-6;
        let cap = hop1_cap(&shell, density).unwrap();
        let generic = cap.distance_pdf(1016.0).unwrap();
        let published = 2.0 * std::f64::consts::PI * density * shell.earth_radius * 1016.0
            / (shell.earth_radius + cap.r_min());
        assert!((generic / published - 1.0).abs() < 1e-12);
        assert!((generic - 0.029_534_096_226_147_877).abs() < 1e-15);
    }

    #[test]
    fn hop1_normalization_identity() {
        let shell = fig2_shell();
        for density in [1e-7, 4.6e-6, 3e-5, 1e-3] {
            let cap = hop1_cap(&shell, density).unwrap();
            let lhs = 2.0 * std::f64::consts::PI * density * shell.earth_radius / shell.av_radius();
            let rhs = 2.0 / (cap.r_max().powi(2) - cap.r_min().powi(2));
            assert!((lhs / rhs - 1.0).abs() < 1e-9, "{density}: {lhs} vs {rhs}");
            assert!((lhs * cap.span_sq() / 2.0 - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn hop2_bounds() {
        let shell = fig2_shell();
        let beam = 0.02f64.to_radians();
        let cap = hop2_cap(&shell, beam).unwrap();
        assert_eq!(cap.r_min(), 599_000.0);
        let (rt, rr) = (shell.av_radius(), shell.sat_radius());
        let closed = rr * beam.cos() - (rt * rt - rr * rr * beam.sin().powi(2)).sqrt();
        assert!((cap.r_max() - closed).abs() < 1e-6, "{} vs {closed}", cap.r_max());
        // Archimedes identity
        let h2 = cap.span_sq() / (2.0 * rr);
        let area = 2.0 * std::f64::consts::PI * rt * h2;
        assert!((cap.area() / area - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hop2_wide_beam_matches_closed_form_tightly() {
        let shell = fig2_shell();
        let beam = 20f64.to_radians();
        let cap = hop2_cap(&shell, beam).unwrap();
        let (rt, rr) = (shell.av_radius(), shell.sat_radius());
        let closed = rr * beam.cos() - (rt * rt - rr * rr * beam.sin().powi(2)).sqrt();
        assert!((cap.r_max() / closed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hop2_degenerates_for_narrow_beam() {
        let shell = fig2_shell();
        let cap = hop2_cap(&shell, 1e-7).unwrap();
        assert!(cap.r_max() - cap.r_min() < 1e-3);
    }

    #[test]
    fn hop2_rejects_wide_beam() {
        let shell = fig2_shell();
        let err = hop2_cap(&shell, 1.2).unwrap_err();
        match err {
            Error::Geometry(msg) => assert!(msg.contains("must lie in")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(hop2_cap(&shell, 0.0).is_err());
    }

    #[test]
    fn hop2_rmax_monotone_in_beamwidth() {
        let shell = fig2_shell();
        let mut prev = 0.0;
        for k in 1..60 {
            let r = hop2_cap(&shell, k as f64 * 0.01).unwrap().r_max();
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn beamwidth_values() {
        let b: f64 = beamwidth(20e9, 0.5, 70.0).unwrap();
        assert!((b - 0.036_626_558_253_227_7).abs() < 1e-15);
        let b2: f64 = beamwidth(20e9, 1.0, 70.0).unwrap();
        assert!((b / b2 - 2.0).abs() < 1e-14);
        assert_eq!(beamwidth(20e9, 1.0, 0.0).unwrap(), 0.0);
        assert!(beamwidth(0.0, 1.0, 70.0).is_err());
    }

    #[test]
    fn pdf_and_cdf_edges() {
        let cap = hop1_cap(&fig2_shell(), 5e-6).unwrap();
        assert_eq!(cap.distance_cdf(cap.r_min()).unwrap(), 0.0);
        assert!((cap.distance_cdf(cap.r_max()).unwrap() - 1.0).abs() < 1e-12);
        let ratio = cap.distance_pdf(cap.r_min()).unwrap() / cap.distance_pdf(cap.r_max()).unwrap();
        assert!((ratio - cap.r_min() / cap.r_max()).abs() < 1e-14);
        assert!(cap.distance_pdf(cap.r_min() - 1.0).is_err());
        assert!(cap.distance_pdf(cap.r_max() + 1.0).is_err());
    }

    #[test]
    fn sample_distance_endpoints() {
        let cap = hop1_cap(&fig2_shell(), 5e-6).unwrap();
        assert_eq!(cap.sample_distance(0.0), cap.r_min());
        assert!((cap.sample_distance(1.0 - 1e-16) - cap.r_max()).abs() < 1e-9);
    }

    #[test]
    fn boundary_angle_is_consistent() {
        let shell = fig2_shell();
        for cap in [hop1_cap(&shell, 5e-6).unwrap(), hop2_cap(&shell, 0.001).unwrap()] {
            let r = polar_angle_to_distance(
                cap.transmitter_shell_radius(),
                cap.receiver_radius(),
                cap.boundary_angle(),
            );
            assert!((r / cap.r_max() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn polar_angle_special_cases() {
        let re = DEFAULT_EARTH_RADIUS_M;
        assert!((polar_angle_to_distance(re, re + 1_000.0, 0.0) - 1_000.0).abs() < 1e-9);
        let anti = polar_angle_to_distance(re, re + 1_000.0, std::f64::consts::PI);
        assert!((anti - (2.0 * re + 1_000.0)).abs() < 1e-6);
        assert!(distance_to_polar_angle(re, re + 1.0, 0.5).is_err());
    }

    #[test]
    fn single_precision_geometry() {
        let shell = ShellGeometry::new(6_371_000.0f32, 1_000.0, 600_000.0).unwrap();
        let cap = hop2_cap(&shell, 0.0008f32).unwrap();
        let reference = hop2_cap(&fig2_shell(), 0.0008f64).unwrap();
        assert!(((cap.span_sq() as f64) / reference.span_sq() - 1.0).abs() < 1e-4);
    }
}
