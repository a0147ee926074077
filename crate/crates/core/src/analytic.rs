//! Closed-form connectivity.
//!
//! For a reference link of length `r0` with Nakagami-m fading (integer `m`)
//! and Poisson interferers of density `λ` on the coverage cap, the success
//! probability is
//!
//! ```text
//! P(r0) = exp(-Ṡ - Ṙ ε) · Σ_{k<m} Σ_{partitions c of k} Π_l x_l^{c_l} / c_l!
//! x_1 = Ṡ + Ṙ ε̇⁽¹⁾,  x_l = Ṙ ε̇⁽ˡ⁾ (l ≥ 2)
//! ```
//!
//! where the partition sum is the normalized complete Bell polynomial that
//! arises from `Σ_k (-s)^k/k! · d^k/ds^k [exp(-s σ²) L_I(s)]` at
//! `s = m θ / (Ω P G L(r0))`. The exclusion integrals run over squared
//! distance `γ ∈ [r_min², r_max²]`:
//!
//! ```text
//! ε     = ∫ 1 - (1 + θ r0²/γ)^-m dγ
//! ε̇⁽ˡ⁾ = C(m+l-1, l) ∫ (θ r0²/γ)^l (1 + θ r0²/γ)^-(m+l) dγ
//! ```
//!
//! Every γ integral is evaluated on `v ∈ [0, 1]` with `γ = r_min² + v·span`,
//! which keeps the satellite hop (span ≈ 1e-6 · r_min²) well conditioned.

use serde::{Deserialize, Serialize};

use crate::channel::HopConfig;
use crate::error::{Error, Result};
use crate::geom3d::{CapAnnulus, Hop};
use crate::numerics::{binom, factorial, integrate, partitions_of, QuadratureSpec};
use crate::scalar::Scalar;
use crate::scenario::{HopModel, Scenario};

/// `Ṡ = 16 m θ σ² r0² / (Ω P ι l D²)`, the noise term `s σ²`.
pub fn s_dot<T: Scalar>(cfg: &HopConfig<T>, r0: T) -> T {
    T::lit(16.0) * cfg.m() * cfg.sinr_threshold * cfg.noise_power * r0 * r0
        / (cfg.nakagami_omega
            * cfg.tx_power
            * cfg.illumination_coeff
            * cfg.extra_loss
            * cfg.dish_diameter
            * cfg.dish_diameter)
}

/// Laplace variable `s = m θ / (Ω P G L(r0))` of the reference link.
pub fn laplace_variable<T: Scalar>(cfg: &HopConfig<T>, r0: T) -> T {
    cfg.m() * cfg.sinr_threshold * r0 * r0 / (cfg.nakagami_omega * cfg.tx_power * cfg.gain_loss_constant())
}

// 1 - (1 + x)^-m without cancellation for small x
fn one_minus_pow<T: Scalar>(x: T, m: T) -> T {
    -(-(m * x.ln_1p())).exp_m1()
}

/// `∫ 1 - (1 + a/γ)^-m dγ` over the cap's squared-distance range.
pub fn exclusion_integral<T: Scalar>(
    a: T,
    m: u32,
    cap: &CapAnnulus<T>,
    quad: &QuadratureSpec<T>,
) -> Result<T> {
    if a <= T::zero() {
        return Ok(T::zero());
    }
    let mf = T::from_u32(m).expect("small integer");
    let lo = cap.r_min() * cap.r_min();
    let span = cap.span_sq();
    let integral = integrate(
        |v| one_minus_pow(a / (lo + v * span), mf),
        T::zero(),
        T::one(),
        quad,
    )?;
    Ok(span * integral)
}

/// ε for threshold `theta`, reference distance `r0` and fading order `m`.
pub fn epsilon<T: Scalar>(
    theta: T,
    r0: T,
    m: u32,
    cap: &CapAnnulus<T>,
    quad: &QuadratureSpec<T>,
) -> Result<T> {
    exclusion_integral(theta * r0 * r0, m, cap, quad)
}

/// ε̇⁽ˡ⁾ for `l ≥ 1`.
pub fn epsilon_deriv<T: Scalar>(
    l: u32,
    theta: T,
    r0: T,
    m: u32,
    cap: &CapAnnulus<T>,
    quad: &QuadratureSpec<T>,
) -> Result<T> {
    if l == 0 {
        return Err(Error::Domain("ε̇ is defined for l >= 1".into()));
    }
    let a = theta * r0 * r0;
    if a <= T::zero() {
        return Ok(T::zero());
    }
    let coeff: T = binom(u64::from(m + l - 1), u64::from(l))?;
    let lo = cap.r_min() * cap.r_min();
    let span = cap.span_sq();
    let order = T::from_u32(m + l).expect("small integer");
    let li = l as i32;
    let integral = integrate(
        |v| {
            let x = a / (lo + v * span);
            x.powi(li) * (-(order * x.ln_1p())).exp()
        },
        T::zero(),
        T::one(),
        quad,
    )?;
    Ok(coeff * span * integral)
}

/// Laplace transform of the aggregate interference, `exp(-Ṙ ε(s))`.
pub fn laplace_interference<T: Scalar>(s: T, model: &HopModel<T>, quad: &QuadratureSpec<T>) -> Result<T> {
    if s < T::zero() {
        return Err(Error::Domain(format!(
            "Laplace variable must be non-negative (got {s})"
        )));
    }
    let radio = &model.radio;
    // s Q L(γ) = a / γ with a = s P Ω (G L r²) / m
    let a = s * radio.tx_power * radio.nakagami_omega * radio.gain_loss_constant() / radio.m();
    let eps = exclusion_integral(a, radio.nakagami_m, &model.cap, quad)?;
    Ok((-(model.r_dot * eps)).exp())
}

/// The terms of the closed form at one reference distance.
#[derive(Debug, Clone, PartialEq)]
pub struct PropositionTerms<T> {
    pub s_dot: T,
    pub r_dot: T,
    pub epsilon: T,
    /// ε̇⁽ˡ⁾ for l = 1..m-1 (index 0 holds l = 1).
    pub epsilon_l: Vec<T>,
    pub reference_distance: T,
    pub m: u32,
}

impl<T: Scalar> PropositionTerms<T> {
    pub fn new(model: &HopModel<T>, r0: T, quad: &QuadratureSpec<T>) -> Result<Self> {
        let cap = &model.cap;
        let slack = cap.r_max() * T::epsilon() * T::lit(16.0);
        if !(r0 >= cap.r_min() - slack && r0 <= cap.r_max() + slack) {
            return Err(Error::Domain(format!(
                "reference distance {r0} outside [{}, {}]",
                cap.r_min(),
                cap.r_max()
            )));
        }
        let radio = &model.radio;
        let m = radio.nakagami_m;
        let theta = radio.sinr_threshold;
        let epsilon_l = (1..m)
            .map(|l| epsilon_deriv(l, theta, r0, m, cap, quad))
            .collect::<Result<Vec<_>>>()?;
        Ok(PropositionTerms {
            s_dot: s_dot(radio, r0),
            r_dot: model.r_dot,
            epsilon: epsilon(theta, r0, m, cap, quad)?,
            epsilon_l,
            reference_distance: r0,
            m,
        })
    }

    /// Bell-polynomial arguments `x_1 .. x_{m-1}` (index 0 holds `x_1`).
    pub fn bell_arguments(&self) -> Vec<T> {
        self.epsilon_l
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let x = self.r_dot * e;
                if i == 0 {
                    self.s_dot + x
                } else {
                    x
                }
            })
            .collect()
    }

    /// `Σ_{k<m} Σ_{partitions of k} Π_l x_l^{c_l} / c_l!`.
    pub fn partition_sum(&self) -> T {
        let x = self.bell_arguments();
        let mut total = T::zero();
        for k in 0..self.m as usize {
            for partition in partitions_of(k) {
                let term = partition.iter().fold(T::one(), |acc, (l, c)| {
                    acc * x[l - 1].powi(c as i32) / factorial::<T>(c)
                });
                total = total + term;
            }
        }
        total
    }

    /// Conditional success probability; errors if rounding cannot explain
    /// a value outside [0, 1].
    pub fn success_probability(&self) -> Result<T> {
        let p = (-(self.s_dot + self.r_dot * self.epsilon)).exp() * self.partition_sum();
        let tol = T::lit(1e-9).max(T::epsilon() * T::lit(128.0));
        if !p.is_finite() || p < -tol || p > T::one() + tol {
            return Err(Error::Consistency(format!(
                "conditional success probability {p} outside [0, 1] at r0 = {}",
                self.reference_distance
            )));
        }
        Ok(p.max(T::zero()).min(T::one()))
    }
}

/// Probability that the SINR of a link of length `r0` exceeds its threshold.
pub fn conditional_success<T: Scalar>(model: &HopModel<T>, r0: T, quad: &QuadratureSpec<T>) -> Result<T> {
    PropositionTerms::new(model, r0, quad)?.success_probability()
}

/// Average success probability: conditional success averaged over the
/// link-distance distribution of the cap.
///
/// Integrated over the CDF value `u` (`f(r) dr = du`), which is the same
/// integral as over `r` with the distance density.
pub fn asp<T: Scalar>(model: &HopModel<T>, quad: &QuadratureSpec<T>) -> Result<T> {
    let mut failure = None;
    let value = integrate(
        |u| {
            let r0 = model.cap.distance_at_fraction(u);
            match conditional_success(model, r0, quad) {
                Ok(p) => p,
                Err(e) => {
                    failure.get_or_insert(e);
                    T::zero()
                }
            }
        },
        T::zero(),
        T::one(),
        quad,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(value.max(T::zero()).min(T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    Simulation,
}

/// Monte Carlo uncertainty attached to a simulated [`ConnectivityResult`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uncertainty {
    pub p1_stderr: f64,
    pub p2_stderr: f64,
    pub p_overall_stderr: f64,
    pub p1_ci95: (f64, f64),
    pub p2_ci95: (f64, f64),
    pub p_overall_ci95: (f64, f64),
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityResult<T> {
    pub method: Method,
    pub p1: T,
    pub p2: T,
    pub p_overall: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<Uncertainty>,
}

impl<T: Scalar> ConnectivityResult<T> {
    pub fn hop(&self, hop: Hop) -> T {
        match hop {
            Hop::GroundToAir => self.p1,
            Hop::AirToSatellite => self.p2,
        }
    }
}

/// Per-hop average success probabilities and their product.
pub fn overall_connectivity<T: Scalar>(
    scenario: &Scenario<T>,
    quad: &QuadratureSpec<T>,
) -> Result<ConnectivityResult<T>> {
    scenario.validate()?;
    let p1 = asp(&scenario.hop_model(Hop::GroundToAir)?, quad)?;
    let p2 = asp(&scenario.hop_model(Hop::AirToSatellite)?, quad)?;
    Ok(ConnectivityResult {
        method: Method::Analytic,
        p1,
        p2,
        p_overall: p1 * p2,
        uncertainty: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom3d::{hop1_cap, ShellGeometry};
    use crate::presets;

    fn quad() -> QuadratureSpec<f64> {
        QuadratureSpec::default()
    }

    fn hop1_model() -> HopModel<f64> {
        presets::reference_scenario(100.0)
            .hop_model(Hop::GroundToAir)
            .unwrap()
    }

    #[test]
    fn s_dot_cases() {
        let mut cfg = presets::reference_scenario(0.0).hop1;
        let a = s_dot(&cfg, 1_000.0);
        assert!((s_dot(&cfg, 2_000.0) / a - 4.0).abs() < 1e-12);
        cfg.noise_power = 0.0;
        assert_eq!(s_dot(&cfg, 1_000.0), 0.0);
    }

    #[test]
    fn s_dot_matches_channel_composition() {
        let cfg = presets::reference_scenario(0.0).hop2;
        let r0 = 599_000.2;
        let via_channel = cfg.m() * cfg.sinr_threshold * cfg.noise_power
            / (cfg.nakagami_omega * cfg.tx_power * cfg.antenna_gain() * cfg.path_loss(r0).unwrap());
        assert!((s_dot(&cfg, r0) / via_channel - 1.0).abs() < 1e-12);
        assert!((laplace_variable(&cfg, r0) * cfg.noise_power / via_channel - 1.0).abs() < 1e-12);
    }

    #[test]
    fn epsilon_bounds_and_limits() {
        let model = hop1_model();
        let cap = &model.cap;
        let r0 = 1_050.0;
        let e = epsilon(1.0, r0, 3, cap, &quad()).unwrap();
        assert!(e > 0.0 && e <= cap.span_sq());
        let tiny = epsilon(1e-12, r0, 3, cap, &quad()).unwrap();
        assert!(tiny < 1e-6 * e);
    }

    #[test]
    fn epsilon_m1_closed_form() {
        let cap: CapAnnulus<f64> = hop1_cap(
            &ShellGeometry::new(6_371_000.0, 1_000.0, 600_000.0).unwrap(),
            3e-6,
        )
        .unwrap();
        for (theta, r0) in [(1.0, 1_000.0), (0.3, 1_100.0), (5.0, 1_150.0)] {
            let a = theta * r0 * r0;
            let (lo, hi) = (cap.r_min().powi(2), cap.r_max().powi(2));
            let exact = a * ((hi + a) / (lo + a)).ln();
            let got = epsilon(theta, r0, 1, &cap, &quad()).unwrap();
            assert!((got / exact - 1.0).abs() < 1e-8, "{got} vs {exact}");
        }
    }

    #[test]
    fn epsilon_deriv_m1_l1_closed_form() {
        let cap: CapAnnulus<f64> = hop1_cap(
            &ShellGeometry::new(6_371_000.0, 1_000.0, 600_000.0).unwrap(),
            3e-6,
        )
        .unwrap();
        let (theta, r0) = (0.8, 1_020.0);
        let a = theta * r0 * r0;
        let anti = |g: f64| a * ((g + a).ln() + a / (g + a));
        let exact = anti(cap.r_max().powi(2)) - anti(cap.r_min().powi(2));
        let got = epsilon_deriv(1, theta, r0, 1, &cap, &quad()).unwrap();
        assert!((got / exact - 1.0).abs() < 1e-8, "{got} vs {exact}");
        assert!(epsilon_deriv(0, theta, r0, 1, &cap, &quad()).is_err());
    }

    #[test]
    fn rayleigh_case_is_plain_exponential() {
        let mut model = hop1_model();
        model.radio.nakagami_m = 1;
        let r0 = 1_020.0;
        let terms = PropositionTerms::new(&model, r0, &quad()).unwrap();
        assert!(terms.epsilon_l.is_empty());
        let expected = (-(terms.s_dot + terms.r_dot * terms.epsilon)).exp();
        assert_eq!(terms.success_probability().unwrap(), expected);
    }

    #[test]
    fn partition_sum_matches_exponential_recurrence() {
        // Σ b_k z^k = exp(Σ x_l z^l) gives k b_k = Σ_l l x_l b_{k-l}
        let terms = PropositionTerms {
            s_dot: 0.0,
            r_dot: 0.0,
            epsilon: 0.0,
            epsilon_l: vec![],
            reference_distance: 1.0,
            m: 6,
        };
        let x = [0.7, 0.25, 1.3, 0.05, 0.4];
        let mut t = terms.clone();
        t.s_dot = x[0];
        t.r_dot = 1.0;
        t.epsilon_l = vec![0.0, x[1], x[2], x[3], x[4]];
        let mut b = vec![1.0f64];
        for k in 1..6 {
            let s: f64 = (1..=k).map(|l| l as f64 * x[l - 1] * b[k - l]).sum();
            b.push(s / k as f64);
        }
        let expected: f64 = b.iter().sum();
        assert!((t.partition_sum() - expected).abs() < 1e-13);
    }

    #[test]
    fn threshold_limits() {
        let mut model = hop1_model();
        let r0 = 1_030.0;
        model.radio.sinr_threshold = 1e-9;
        assert!(conditional_success(&model, r0, &quad()).unwrap() > 0.999_999);
        model.radio.sinr_threshold = 1e9;
        assert!(conditional_success(&model, r0, &quad()).unwrap() < 1e-6);
    }

    #[test]
    fn conditional_success_rejects_out_of_cap_distance() {
        let model = hop1_model();
        assert!(matches!(
            conditional_success(&model, 10.0, &quad()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn consistency_violation_is_an_error() {
        let terms = PropositionTerms {
            s_dot: -1.0,
            r_dot: 0.0,
            epsilon: 0.0,
            epsilon_l: vec![],
            reference_distance: 1.0,
            m: 1,
        };
        assert!(matches!(terms.success_probability(), Err(Error::Consistency(_))));
    }

    #[test]
    fn laplace_limits() {
        let model = hop1_model();
        assert_eq!(laplace_interference(0.0, &model, &quad()).unwrap(), 1.0);
        let s0 = laplace_variable(&model.radio, 1_030.0);
        let mut prev = 1.0;
        for k in 1..10 {
            let v = laplace_interference(s0 * k as f64 * 0.5, &model, &quad()).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(laplace_interference(-1.0, &model, &quad()).is_err());
    }

    #[test]
    fn asp_of_sure_success_is_one() {
        let mut model = hop1_model();
        model.r_dot = 0.0;
        model.radio.noise_power = 0.0;
        assert!((asp(&model, &quad()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asp_between_extremes() {
        let model = hop1_model();
        let p = asp(&model, &quad()).unwrap();
        let lo = conditional_success(&model, model.cap.r_max(), &quad()).unwrap();
        let hi = conditional_success(&model, model.cap.r_min(), &quad()).unwrap();
        assert!(lo <= p && p <= hi, "{lo} {p} {hi}");
    }

    #[test]
    fn asp_matches_distance_domain_quadrature() {
        let scenario = presets::reference_scenario(200.0);
        for hop in Hop::BOTH {
            let model = scenario.hop_model(hop).unwrap();
            let cap = model.cap;
            let direct = integrate(
                |r| conditional_success(&model, r, &quad()).unwrap() * cap.distance_pdf(r).unwrap(),
                cap.r_min(),
                cap.r_max(),
                &quad(),
            )
            .unwrap();
            let p = asp(&model, &quad()).unwrap();
            assert!((p - direct).abs() < 1e-7, "hop {}: {p} vs {direct}", hop.index());
        }
    }

    #[test]
    fn overall_is_product() {
        let r = overall_connectivity(&presets::reference_scenario(100.0), &quad()).unwrap();
        assert_eq!(r.p_overall, r.p1 * r.p2);
        assert!(r.p_overall <= r.p1.min(r.p2));
        assert_eq!(r.method, Method::Analytic);
    }

    #[test]
    fn single_precision_agrees_with_double() {
        let s64 = presets::reference_scenario(100.0);
        let s32: Scenario<f32> = s64.cast();
        let a = overall_connectivity(&s64, &quad()).unwrap();
        let b = overall_connectivity(&s32, &QuadratureSpec::default()).unwrap();
        assert!((a.p1 - b.p1 as f64).abs() < 1e-3, "{} vs {}", a.p1, b.p1);
        assert!((a.p2 - b.p2 as f64).abs() < 1e-3, "{} vs {}", a.p2, b.p2);
    }
}
