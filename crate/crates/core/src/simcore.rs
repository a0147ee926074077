//! Monte Carlo estimation of per-hop success probabilities.
//!
//! Every trial draws its randomness from its own ChaCha stream selected by
//! `(master_seed, stream tag, trial index)`, so estimates depend only on the
//! scenario and the plan, never on worker count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{ConnectivityResult, Method, Uncertainty};
use crate::channel::{HopConfig, NakagamiPower};
use crate::error::{Error, Result};
use crate::geom3d::{CapAnnulus, Hop};
use crate::pointproc::{
    chord, nearest_association, nearest_index, sample_hppp_on_cap, sample_matern_on_cap, CapPointSet,
};
use crate::scenario::Scenario;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Mean number of AV cells covered by the full-Voronoi simulation window.
const VORONOI_WINDOW_CELLS: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// Reference link drawn from the cap distance law, interferers on the cap.
    CapApprox,
    /// Hop 1 with explicit AV and GU placement and nearest-AV cells; a
    /// diagnostic of the cell-as-cap approximation. Hop 2 is unchanged.
    FullVoronoi,
}

impl SimMode {
    pub fn name(self) -> &'static str {
        match self {
            SimMode::CapApprox => "cap_approx",
            SimMode::FullVoronoi => "full_voronoi",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cap_approx" => Some(SimMode::CapApprox),
            "full_voronoi" => Some(SimMode::FullVoronoi),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HopSelection {
    Hop1,
    Hop2,
    Both,
}

impl HopSelection {
    pub fn includes(self, hop: Hop) -> bool {
        matches!(
            (self, hop),
            (HopSelection::Both, _)
                | (HopSelection::Hop1, Hop::GroundToAir)
                | (HopSelection::Hop2, Hop::AirToSatellite)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub trials: u64,
    pub master_seed: u64,
    pub mode: SimMode,
    pub hops: HopSelection,
    /// Full-Voronoi only: let active GUs of every cell interfere, not just
    /// those sharing the reference AV.
    pub out_of_cell_interference: bool,
}

impl Default for TrialPlan {
    fn default() -> Self {
        TrialPlan {
            trials: 10_000,
            master_seed: 0x5eed,
            mode: SimMode::CapApprox,
            hops: HopSelection::Both,
            out_of_cell_interference: false,
        }
    }
}

impl TrialPlan {
    pub fn with_trials(trials: u64, master_seed: u64) -> Self {
        TrialPlan {
            trials,
            master_seed,
            ..TrialPlan::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("sim.trials", "must be at least 1"));
        }
        Ok(())
    }
}

/// Bernoulli success-rate estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub trials: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let n = trials as f64;
        let mean = successes as f64 / n;
        let stderr = (mean * (1.0 - mean) / n).sqrt();
        Estimate {
            mean,
            stderr,
            ci95: normal_interval(mean, stderr),
            trials,
        }
    }

    pub fn ci95_halfwidth(&self) -> f64 {
        Z95 * self.stderr
    }

    /// True if the two 95% intervals intersect.
    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci95.0 <= other.ci95.1 && other.ci95.0 <= self.ci95.1
    }
}

fn normal_interval(mean: f64, stderr: f64) -> (f64, f64) {
    ((mean - Z95 * stderr).max(0.0), (mean + Z95 * stderr).min(1.0))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream tags separating the experiments that share a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    Hop1 = 1,
    Hop2 = 2,
    FixedDistance = 3,
    LaplaceOracle = 4,
}

/// Independent random stream for one trial.
pub fn trial_rng(master_seed: u64, tag: StreamTag, trial: u64) -> ChaCha8Rng {
    let key = splitmix64(master_seed ^ splitmix64(tag as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(trial);
    rng
}

fn count_successes<F>(plan: &TrialPlan, tag: StreamTag, trial: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<bool> + Sync,
{
    plan.validate()?;
    let successes = (0..plan.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(plan.master_seed, tag, t);
            trial(&mut rng).map(u64::from)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(Estimate::from_counts(successes, plan.trials))
}

/// Receiver on the cap axis at `radius` from Earth's center.
fn axis_point(radius: f64) -> [f64; 3] {
    [0.0, 0.0, radius]
}

/// Everything one trial needs to decide success for a reference link.
struct LinkTrial<'a> {
    radio: &'a HopConfig<f64>,
    fading: NakagamiPower,
}

impl<'a> LinkTrial<'a> {
    fn new(radio: &'a HopConfig<f64>) -> Result<Self> {
        Ok(LinkTrial {
            radio,
            fading: NakagamiPower::new(radio.nakagami_m, radio.nakagami_omega)?,
        })
    }

    fn succeeds<R: Rng + ?Sized, I>(&self, r0: f64, interferer_distances: I, rng: &mut R) -> Result<bool>
    where
        I: IntoIterator<Item = f64>,
    {
        let h0 = self.fading.sample(rng);
        let interferers: Vec<(f64, f64)> = interferer_distances
            .into_iter()
            .map(|r| (r, self.fading.sample(rng)))
            .collect();
        Ok(self.radio.sinr(r0, h0, &interferers)? > self.radio.sinr_threshold)
    }
}

fn distances_to(points: &CapPointSet, receiver: [f64; 3]) -> impl Iterator<Item = f64> + '_ {
    points.positions().map(move |p| chord(p, receiver))
}

fn hop1_interferers<R: Rng + ?Sized>(
    scenario: &Scenario<f64>,
    cap: &CapAnnulus<f64>,
    rng: &mut R,
) -> Result<CapPointSet> {
    sample_hppp_on_cap(
        scenario.deployment.active_gu_density(),
        scenario.shell.earth_radius,
        cap.boundary_angle(),
        rng,
    )
}

fn hop2_interferers<R: Rng + ?Sized>(
    scenario: &Scenario<f64>,
    cap: &CapAnnulus<f64>,
    rng: &mut R,
) -> Result<CapPointSet> {
    let d = &scenario.deployment;
    sample_matern_on_cap(
        d.av_parent_density,
        d.hardcore_distance,
        scenario.shell.av_radius(),
        cap.boundary_angle(),
        rng,
    )
}

fn interferers_for<R: Rng + ?Sized>(
    hop: Hop,
    scenario: &Scenario<f64>,
    cap: &CapAnnulus<f64>,
    rng: &mut R,
) -> Result<CapPointSet> {
    match hop {
        Hop::GroundToAir => hop1_interferers(scenario, cap, rng),
        Hop::AirToSatellite => hop2_interferers(scenario, cap, rng),
    }
}

fn cap_trial<R: Rng + ?Sized>(
    hop: Hop,
    scenario: &Scenario<f64>,
    cap: &CapAnnulus<f64>,
    link: &LinkTrial<'_>,
    fixed_r0: Option<f64>,
    rng: &mut R,
) -> Result<bool> {
    let r0 = match fixed_r0 {
        Some(r) => r,
        None => cap.sample_distance(rng.random::<f64>()),
    };
    let interferers = interferers_for(hop, scenario, cap, rng)?;
    let receiver = axis_point(cap.receiver_radius());
    link.succeeds(r0, distances_to(&interferers, receiver), rng)
}

fn voronoi_trial<R: Rng + ?Sized>(
    scenario: &Scenario<f64>,
    link: &LinkTrial<'_>,
    out_of_cell: bool,
    rng: &mut R,
) -> Result<bool> {
    let shell = &scenario.shell;
    let d = &scenario.deployment;
    let av_radius = shell.av_radius();
    // window angle from the cap-area relation 4πR² sin²(φ/2) = A
    let window_area = VORONOI_WINDOW_CELLS / d.effective_av_density();
    let half = (window_area / (4.0 * std::f64::consts::PI * av_radius * av_radius))
        .sqrt()
        .min(1.0);
    let window = 2.0 * half.asin();

    let avs = sample_matern_on_cap(d.av_parent_density, d.hardcore_distance, av_radius, window, rng)?;
    if avs.is_empty() {
        return Err(Error::NoAerialVehicles);
    }
    let av_positions: Vec<[f64; 3]> = avs.positions().collect();
    let typical = axis_point(shell.earth_radius);
    let serving = nearest_index(typical, &av_positions);
    let receiver = av_positions[serving];
    let r0 = chord(typical, receiver);

    let gus = sample_hppp_on_cap(d.active_gu_density(), shell.earth_radius, window, rng)?;
    let assignment = nearest_association(&gus, &avs)?;
    let distances: Vec<f64> = gus
        .positions()
        .zip(&assignment)
        .filter(|(_, &a)| out_of_cell || a == serving)
        .map(|(p, _)| chord(p, receiver))
        .collect();
    link.succeeds(r0, distances, rng)
}

fn simulate_hop(scenario: &Scenario<f64>, hop: Hop, plan: &TrialPlan) -> Result<Estimate> {
    scenario.validate()?;
    let cap = scenario.cap(hop)?;
    let link = LinkTrial::new(scenario.radio(hop))?;
    let tag = match hop {
        Hop::GroundToAir => StreamTag::Hop1,
        Hop::AirToSatellite => StreamTag::Hop2,
    };
    match (hop, plan.mode) {
        (Hop::GroundToAir, SimMode::FullVoronoi) => count_successes(plan, tag, |rng| {
            voronoi_trial(scenario, &link, plan.out_of_cell_interference, rng)
        }),
        _ => count_successes(plan, tag, |rng| cap_trial(hop, scenario, &cap, &link, None, rng)),
    }
}

/// Ground-to-AV success rate.
pub fn simulate_hop1(scenario: &Scenario<f64>, plan: &TrialPlan) -> Result<Estimate> {
    simulate_hop(scenario, Hop::GroundToAir, plan)
}

/// AV-to-satellite success rate with Matérn type-II interferers.
pub fn simulate_hop2(scenario: &Scenario<f64>, plan: &TrialPlan) -> Result<Estimate> {
    simulate_hop(scenario, Hop::AirToSatellite, plan)
}

/// Success rate of a cap-model link with the reference distance held at `r0`.
pub fn simulate_at_distance(
    scenario: &Scenario<f64>,
    hop: Hop,
    r0: f64,
    plan: &TrialPlan,
) -> Result<Estimate> {
    scenario.validate()?;
    let cap = scenario.cap(hop)?;
    cap.distance_pdf(r0)?;
    let link = LinkTrial::new(scenario.radio(hop))?;
    count_successes(plan, StreamTag::FixedDistance, |rng| {
        cap_trial(hop, scenario, &cap, &link, Some(r0), rng)
    })
}

/// Aggregate interference power `Σ P G h L(r)` of one cap realization.
pub fn sample_interference<R: Rng + ?Sized>(scenario: &Scenario<f64>, hop: Hop, rng: &mut R) -> Result<f64> {
    let cap = scenario.cap(hop)?;
    let radio = scenario.radio(hop);
    let fading = NakagamiPower::new(radio.nakagami_m, radio.nakagami_omega)?;
    let points = interferers_for(hop, scenario, &cap, rng)?;
    let receiver = axis_point(cap.receiver_radius());
    let pg = radio.tx_power * radio.antenna_gain();
    let mut total = 0.0;
    for r in distances_to(&points, receiver) {
        total += pg * fading.sample(rng) * radio.path_loss(r)?;
    }
    Ok(total)
}

/// Both hops on independent streams; the overall rate is their product.
pub fn simulate_overall(scenario: &Scenario<f64>, plan: &TrialPlan) -> Result<ConnectivityResult<f64>> {
    let e1 = simulate_hop1(scenario, plan)?;
    let e2 = simulate_hop2(scenario, plan)?;
    Ok(combine(&e1, &e2))
}

/// Product of two independent hop estimates with first-order error propagation.
pub fn combine(e1: &Estimate, e2: &Estimate) -> ConnectivityResult<f64> {
    let p = e1.mean * e2.mean;
    let se = (e2.mean.powi(2) * e1.stderr.powi(2) + e1.mean.powi(2) * e2.stderr.powi(2)).sqrt();
    ConnectivityResult {
        method: Method::Simulation,
        p1: e1.mean,
        p2: e2.mean,
        p_overall: p,
        uncertainty: Some(Uncertainty {
            p1_stderr: e1.stderr,
            p2_stderr: e2.stderr,
            p_overall_stderr: se,
            p1_ci95: e1.ci95,
            p2_ci95: e2.ci95,
            p_overall_ci95: normal_interval(p, se),
            trials: e1.trials.min(e2.trials),
        }),
    }
}

/// Per-hop estimates for the hops selected in the plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub mode: SimMode,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hop1: Option<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hop2: Option<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overall: Option<ConnectivityResult<f64>>,
}

pub fn simulate(scenario: &Scenario<f64>, plan: &TrialPlan) -> Result<SimulationReport> {
    let hop1 = plan
        .hops
        .includes(Hop::GroundToAir)
        .then(|| simulate_hop1(scenario, plan))
        .transpose()?;
    let hop2 = plan
        .hops
        .includes(Hop::AirToSatellite)
        .then(|| simulate_hop2(scenario, plan))
        .transpose()?;
    let overall = match (&hop1, &hop2) {
        (Some(a), Some(b)) => Some(combine(a, b)),
        _ => None,
    };
    Ok(SimulationReport {
        mode: plan.mode,
        seed: plan.master_seed,
        hop1,
        hop2,
        overall,
    })
}
