//! Parameter sweeps and analytic-versus-simulation validation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analytic::{overall_connectivity, ConnectivityResult};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::numerics::QuadratureSpec;
use crate::simcore::{simulate_hop1, simulate_hop2, Estimate, TrialPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// λ_a⁰ in AVs per km².
    AvParentDensity,
    /// ď in meters.
    HardcoreDistance,
    /// λ_u in GUs per km².
    GuDensity,
    /// θ₁ in dB.
    #[serde(rename = "sinr_threshold_1")]
    SinrThreshold1,
    /// θ₂ in dB.
    #[serde(rename = "sinr_threshold_2")]
    SinrThreshold2,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] = [
        SweepVariable::AvParentDensity,
        SweepVariable::HardcoreDistance,
        SweepVariable::GuDensity,
        SweepVariable::SinrThreshold1,
        SweepVariable::SinrThreshold2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::AvParentDensity => "av_parent_density",
            SweepVariable::HardcoreDistance => "hardcore_distance",
            SweepVariable::GuDensity => "gu_density",
            SweepVariable::SinrThreshold1 => "sinr_threshold_1",
            SweepVariable::SinrThreshold2 => "sinr_threshold_2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// Values must be nonempty, finite and strictly monotone.
    pub fn new(variable: SweepVariable, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("sweep needs at least one value".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sweep values must be finite".into()));
        }
        let increasing = values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = values.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(Error::Domain("sweep values must be strictly monotone".into()));
        }
        Ok(SweepSpec { variable, values })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub variable: SweepVariable,
    pub value: f64,
    pub analytic: ConnectivityResult<f64>,
    pub hop1: Estimate,
    pub hop2: Estimate,
    pub simulated: ConnectivityResult<f64>,
}

pub const CSV_HEADER: &str =
    "sweep_var,value,p1_ana,p2_ana,pov_ana,p1_sim,p1_ci95_halfwidth,p2_sim,p2_ci95_halfwidth,pov_sim";

/// Analytic and simulated connectivity at every sweep value.
pub fn run_sweep(
    config: &RunConfig,
    spec: &SweepSpec,
    plan: &TrialPlan,
    quad: &QuadratureSpec<f64>,
) -> Result<Vec<SweepRow>> {
    spec.values
        .iter()
        .map(|&value| {
            let point = config.with_value(spec.variable, value);
            point.validate()?;
            let scenario = point.scenario();
            let analytic = overall_connectivity(&scenario, quad)?;
            let hop1 = simulate_hop1(&scenario, plan)?;
            let hop2 = simulate_hop2(&scenario, plan)?;
            Ok(SweepRow {
                variable: spec.variable,
                value,
                analytic,
                hop1,
                hop2,
                simulated: crate::simcore::combine(&hop1, &hop2),
            })
        })
        .collect()
}

/// Sweep rows as CSV with a header line; LF line endings, shortest
/// round-trip float formatting.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            r.variable.name(),
            r.value,
            r.analytic.p1,
            r.analytic.p2,
            r.analytic.p_overall,
            r.hop1.mean,
            r.hop1.ci95_halfwidth(),
            r.hop2.mean,
            r.hop2.ci95_halfwidth(),
            r.simulated.p_overall,
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub tolerance: f64,
    pub points: usize,
    pub max_abs_diff_hop1: f64,
    pub max_abs_diff_hop2: f64,
    pub passed: bool,
    pub rows: Vec<SweepRow>,
}

/// Largest per-hop gap between analytic and simulated success probabilities.
pub fn validate_rows(rows: Vec<SweepRow>, tolerance: f64) -> ValidationReport {
    let max_gap = |f: fn(&SweepRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let d1 = max_gap(|r| (r.analytic.p1 - r.hop1.mean).abs());
    let d2 = max_gap(|r| (r.analytic.p2 - r.hop2.mean).abs());
    ValidationReport {
        tolerance,
        points: rows.len(),
        max_abs_diff_hop1: d1,
        max_abs_diff_hop2: d2,
        passed: d1 <= tolerance && d2 <= tolerance,
        rows,
    }
}

/// Runs `f` on a dedicated rayon pool of `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::reference_config_text;

    #[test]
    fn names_round_trip() {
        for v in SweepVariable::ALL {
            assert_eq!(SweepVariable::parse(v.name()), Some(v));
        }
        assert_eq!(SweepVariable::parse("nope"), None);
        for v in SweepVariable::ALL {
            let json = serde_json::to_string(&v).unwrap();
            assert_eq!(json, format!("\"{}\"", v.name()));
        }
    }

    #[test]
    fn spec_rules() {
        assert!(SweepSpec::new(SweepVariable::GuDensity, vec![]).is_err());
        assert!(SweepSpec::new(SweepVariable::GuDensity, vec![1.0, 1.0]).is_err());
        assert!(SweepSpec::new(SweepVariable::GuDensity, vec![1.0, 3.0, 2.0]).is_err());
        assert!(SweepSpec::new(SweepVariable::GuDensity, vec![3.0, 2.0]).is_ok());
        assert!(SweepSpec::new(SweepVariable::GuDensity, vec![4.0]).is_ok());
    }

    #[test]
    fn csv_shape() {
        let cfg = RunConfig::parse(&reference_config_text(0.0)).unwrap();
        let spec = SweepSpec::new(SweepVariable::HardcoreDistance, vec![0.0, 100.0, 200.0]).unwrap();
        let rows = run_sweep(
            &cfg,
            &spec,
            &TrialPlan::with_trials(200, 1),
            &QuadratureSpec::default(),
        )
        .unwrap();
        let csv = to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER);
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 10);
            assert!(line.starts_with("hardcore_distance,"));
        }
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn validation_thresholds() {
        let cfg = RunConfig::parse(&reference_config_text(0.0)).unwrap();
        let spec = SweepSpec::new(SweepVariable::SinrThreshold1, vec![0.0]).unwrap();
        let rows = run_sweep(
            &cfg,
            &spec,
            &TrialPlan::with_trials(100, 1),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(validate_rows(rows.clone(), 1.0).passed);
        assert!(!validate_rows(rows, 0.0).passed);
    }
}
