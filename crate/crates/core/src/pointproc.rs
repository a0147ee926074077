//! Point processes on spherical caps: homogeneous Poisson sampling,
//! Matérn type-II hard-core thinning of AVs, independent activity thinning
//! of ground users, and nearest-AV association.
//!
//! Caps are centered on the +z axis. Points are stored as unit directions;
//! all distances are 3D chord distances.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Densities (per m²) and hard-core distance (m) of the two node populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeploymentConfig<T> {
    /// Ground user density λ_u.
    pub gu_density: T,
    /// Probability a ground user transmits, p_u^t.
    pub gu_tx_probability: T,
    /// Density of the parent Poisson process of AVs, λ_a⁰.
    pub av_parent_density: T,
    /// Minimum AV separation ď.
    pub hardcore_distance: T,
}

impl<T: Scalar> DeploymentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: T| {
            if v >= T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(
                    name,
                    format!("must be non-negative and finite (got {v})"),
                ))
            }
        };
        nonneg("gu_density", self.gu_density)?;
        nonneg("av_parent_density", self.av_parent_density)?;
        nonneg("hardcore_distance", self.hardcore_distance)?;
        if !(self.gu_tx_probability >= T::zero() && self.gu_tx_probability <= T::one()) {
            return Err(Error::config(
                "gu_tx_probability",
                format!("must lie in [0, 1] (got {})", self.gu_tx_probability),
            ));
        }
        Ok(())
    }

    /// Density of transmitting ground users, `p_u^t λ_u`.
    pub fn active_gu_density(&self) -> T {
        self.gu_tx_probability * self.gu_density
    }

    /// Density of retained AVs, `λ_a⁰ p_a(ď)`.
    pub fn effective_av_density(&self) -> T {
        self.av_parent_density * retention_probability(self.av_parent_density, self.hardcore_distance)
    }
}

/// Probability that a parent point survives Matérn type-II thinning,
/// `(1 - exp(-λ π ď²)) / (λ π ď²)`, and 1 when `ď = 0`.
pub fn retention_probability<T: Scalar>(parent_density: T, hardcore: T) -> T {
    let x = parent_density * T::PI() * hardcore * hardcore;
    if x <= T::zero() {
        return T::one();
    }
    // -expm1(-x) / x keeps full precision as x -> 0
    -(-x).exp_m1() / x
}

/// Points on a spherical cap of a shell, stored as unit directions.
#[derive(Debug, Clone, PartialEq)]
pub struct CapPointSet {
    directions: Vec<[f64; 3]>,
    shell_radius: f64,
    boundary_angle: f64,
}

impl CapPointSet {
    pub fn empty(shell_radius: f64, boundary_angle: f64) -> Self {
        CapPointSet {
            directions: Vec::new(),
            shell_radius,
            boundary_angle,
        }
    }

    /// Builds a set from explicit directions; each is normalized.
    pub fn from_directions(directions: Vec<[f64; 3]>, shell_radius: f64, boundary_angle: f64) -> Self {
        let directions = directions.into_iter().map(normalize).collect();
        CapPointSet {
            directions,
            shell_radius,
            boundary_angle,
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn shell_radius(&self) -> f64 {
        self.shell_radius
    }

    pub fn boundary_angle(&self) -> f64 {
        self.boundary_angle
    }

    pub fn directions(&self) -> &[[f64; 3]] {
        &self.directions
    }

    pub fn position(&self, i: usize) -> [f64; 3] {
        scale(self.directions[i], self.shell_radius)
    }

    pub fn positions(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.directions.iter().map(|&d| scale(d, self.shell_radius))
    }

    /// Polar angle of point `i` from the cap axis.
    pub fn polar_angle(&self, i: usize) -> f64 {
        polar_angle(self.directions[i])
    }

    /// Cap area on the shell.
    pub fn area(&self) -> f64 {
        cap_area(self.shell_radius, self.boundary_angle)
    }

    /// Keeps only points within `angle` of the axis and sets the boundary to `angle`.
    pub fn clip(mut self, angle: f64) -> Self {
        self.directions.retain(|&d| polar_angle(d) <= angle);
        self.boundary_angle = angle;
        self
    }

    fn select(&self, keep: &[bool]) -> Self {
        let directions = self
            .directions
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(&d, _)| d)
            .collect();
        CapPointSet {
            directions,
            shell_radius: self.shell_radius,
            boundary_angle: self.boundary_angle,
        }
    }
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn scale(v: [f64; 3], s: f64) -> [f64; 3] {
    [v[0] * s, v[1] * s, v[2] * s]
}

pub(crate) fn polar_angle(d: [f64; 3]) -> f64 {
    let horizontal = (d[0] * d[0] + d[1] * d[1]).sqrt();
    horizontal.atan2(d[2])
}

/// Euclidean distance between two 3D points.
pub fn chord(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Area of a cap of polar angle `angle` on a sphere of radius `radius`.
pub fn cap_area(radius: f64, angle: f64) -> f64 {
    let half = (angle / 2.0).sin();
    // 2π R² (1 - cos φ) with 1 - cos φ = 2 sin²(φ/2)
    4.0 * std::f64::consts::PI * radius * radius * half * half
}

/// Samples a homogeneous Poisson process of `density` (per m²) on the cap
/// of polar angle `cap_boundary_angle` of a shell of radius `shell_radius`.
pub fn sample_hppp_on_cap<R: Rng + ?Sized>(
    density: f64,
    shell_radius: f64,
    cap_boundary_angle: f64,
    rng: &mut R,
) -> Result<CapPointSet> {
    if !(density >= 0.0) || !density.is_finite() {
        return Err(Error::Domain(format!(
            "point density must be non-negative (got {density})"
        )));
    }
    let mut set = CapPointSet::empty(shell_radius, cap_boundary_angle);
    let mean = density * set.area();
    if mean <= 0.0 {
        return Ok(set);
    }
    let count = Poisson::new(mean)
        .map_err(|e| Error::Domain(format!("poisson mean {mean}: {e}")))?
        .sample(rng) as usize;

    // 1 - cos φ is uniform on [0, 1 - cos φ_max]
    let half = (cap_boundary_angle / 2.0).sin();
    let max_versine = 2.0 * half * half;
    set.directions.reserve(count);
    for _ in 0..count {
        let v = rng.random::<f64>() * max_versine;
        let azimuth = rng.random::<f64>() * std::f64::consts::TAU;
        let sin_polar = (v * (2.0 - v)).sqrt();
        set.directions
            .push([sin_polar * azimuth.cos(), sin_polar * azimuth.sin(), 1.0 - v]);
    }
    Ok(set)
}

/// Survivor mask of Matérn type-II thinning for explicit marks.
///
/// A point survives iff no other point closer than `hardcore` has a smaller
/// mark; equal marks are resolved by index (lower index wins).
pub fn matern_type2_survivors(positions: &[[f64; 3]], marks: &[f64], hardcore: f64) -> Vec<bool> {
    assert_eq!(positions.len(), marks.len(), "one mark per point");
    let n = positions.len();
    let mut keep = vec![true; n];
    if hardcore <= 0.0 || n < 2 {
        return keep;
    }
    let beats = |j: usize, i: usize| marks[j] < marks[i] || (marks[j] == marks[i] && j < i);

    // sweep along x; only pairs with |dx| < ď can conflict
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| positions[a][0].total_cmp(&positions[b][0]));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if positions[j][0] - positions[i][0] >= hardcore {
                break;
            }
            if chord(positions[i], positions[j]) < hardcore {
                if beats(j, i) {
                    keep[i] = false;
                } else {
                    keep[j] = false;
                }
            }
        }
    }
    keep
}

/// Matérn type-II thinning with independent uniform marks.
pub fn matern_type2_thin<R: Rng + ?Sized>(parents: &CapPointSet, hardcore: f64, rng: &mut R) -> CapPointSet {
    if hardcore <= 0.0 {
        return parents.clone();
    }
    let marks: Vec<f64> = (0..parents.len()).map(|_| rng.random::<f64>()).collect();
    let positions: Vec<[f64; 3]> = parents.positions().collect();
    parents.select(&matern_type2_survivors(&positions, &marks, hardcore))
}

/// Samples a Matérn type-II process restricted to a cap.
///
/// Parents are drawn on a cap widened by `hardcore / shell_radius` so points
/// near the boundary see their full neighborhood, thinned, then clipped.
pub fn sample_matern_on_cap<R: Rng + ?Sized>(
    parent_density: f64,
    hardcore: f64,
    shell_radius: f64,
    cap_boundary_angle: f64,
    rng: &mut R,
) -> Result<CapPointSet> {
    let guard = if hardcore > 0.0 {
        hardcore / shell_radius
    } else {
        0.0
    };
    let widened = (cap_boundary_angle + guard).min(std::f64::consts::PI);
    let parents = sample_hppp_on_cap(parent_density, shell_radius, widened, rng)?;
    Ok(matern_type2_thin(&parents, hardcore, rng).clip(cap_boundary_angle))
}

/// Keeps each point independently with probability `p`.
pub fn thin_by_activity<R: Rng + ?Sized>(points: &CapPointSet, p: f64, rng: &mut R) -> Result<CapPointSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "activity probability must lie in [0, 1] (got {p})"
        )));
    }
    let keep: Vec<bool> = (0..points.len()).map(|_| rng.random::<f64>() < p).collect();
    Ok(points.select(&keep))
}

/// Index of the AV nearest (by chord distance) to every ground user. Ties go
/// to the lowest AV index.
pub fn nearest_association(gus: &CapPointSet, avs: &CapPointSet) -> Result<Vec<usize>> {
    if avs.is_empty() {
        return Err(Error::NoAerialVehicles);
    }
    let av_positions: Vec<[f64; 3]> = avs.positions().collect();
    Ok(gus.positions().map(|g| nearest_index(g, &av_positions)).collect())
}

pub(crate) fn nearest_index(point: [f64; 3], candidates: &[[f64; 3]]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, &c) in candidates.iter().enumerate() {
        let d = chord(point, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const RE: f64 = 6_371_000.0;

    #[test]
    fn retention_values() {
        assert_eq!(retention_probability(5e-6f64, 0.0), 1.0);
        // 40-digit reference: λπď² = 0.15707963...
        let p = retention_probability(5e-6f64, 100.0);
        assert!((p - 0.925_415_971_295_094_4).abs() < 1e-15);
        let tiny = retention_probability(5e-6f64, 1e-9);
        assert!((tiny - 1.0).abs() < 1e-15);
    }

    #[test]
    fn retention_decreases_to_zero() {
        let mut prev = 1.0;
        for k in 1..200 {
            let p = retention_probability(5e-6f64, k as f64 * 25.0);
            assert!(p < prev && p > 0.0);
            prev = p;
        }
        assert!(retention_probability(5e-6f64, 1e6) < 1e-3);
    }

    #[test]
    fn deployment_validation_and_densities() {
        let d: DeploymentConfig<f64> = DeploymentConfig {
            gu_density: 50e-6,
            gu_tx_probability: 0.1,
            av_parent_density: 5e-6,
            hardcore_distance: 100.0,
        };
        d.validate().unwrap();
        assert!((d.active_gu_density() - 5e-6).abs() < 1e-20);
        assert!(d.effective_av_density() < d.av_parent_density);

        let mut bad = d;
        bad.av_parent_density = -1.0;
        match bad.validate().unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "av_parent_density"),
            e => panic!("{e:?}"),
        }
        let mut bad = d;
        bad.gu_tx_probability = 1.5;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn empty_process_for_zero_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let set = sample_hppp_on_cap(0.0, RE, 0.01, &mut rng).unwrap();
        assert!(set.is_empty());
        assert!(sample_hppp_on_cap(-1.0, RE, 0.01, &mut rng).is_err());
    }

    #[test]
    fn points_stay_inside_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let angle = 2e-3;
        let set = sample_hppp_on_cap(1e-5, RE, angle, &mut rng).unwrap();
        assert!(set.len() > 1000);
        for i in 0..set.len() {
            assert!(set.polar_angle(i) <= angle + 1e-12);
        }
    }

    #[test]
    fn matern_zero_hardcore_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let parents = sample_hppp_on_cap(5e-6, RE, 1e-3, &mut rng).unwrap();
        let thinned = matern_type2_thin(&parents, 0.0, &mut rng);
        assert_eq!(thinned, parents);
    }

    #[test]
    fn matern_has_no_close_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let parents = sample_hppp_on_cap(2e-5, RE + 1_000.0, 1.5e-3, &mut rng).unwrap();
        let thinned = matern_type2_thin(&parents, 150.0, &mut rng);
        assert!(thinned.len() < parents.len());
        let pos: Vec<_> = thinned.positions().collect();
        for i in 0..pos.len() {
            for j in i + 1..pos.len() {
                assert!(chord(pos[i], pos[j]) >= 150.0);
            }
        }
    }

    #[test]
    fn matern_sweep_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let parents = sample_hppp_on_cap(3e-5, RE, 1e-3, &mut rng).unwrap();
        let pos: Vec<_> = parents.positions().collect();
        let marks: Vec<f64> = (0..pos.len()).map(|_| rng.random()).collect();
        let fast = matern_type2_survivors(&pos, &marks, 120.0);
        let brute: Vec<bool> = (0..pos.len())
            .map(|i| !(0..pos.len()).any(|j| j != i && chord(pos[i], pos[j]) < 120.0 && marks[j] < marks[i]))
            .collect();
        assert_eq!(fast, brute);
    }

    #[test]
    fn matern_marks_tie_goes_to_lower_index() {
        let pos = [[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]];
        assert_eq!(matern_type2_survivors(&pos, &[0.5, 0.5], 20.0), vec![true, false]);
    }

    #[test]
    fn activity_thinning_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let set = sample_hppp_on_cap(1e-5, RE, 1e-3, &mut rng).unwrap();
        assert_eq!(thin_by_activity(&set, 1.0, &mut rng).unwrap(), set);
        assert!(thin_by_activity(&set, 0.0, &mut rng).unwrap().is_empty());
        assert!(thin_by_activity(&set, 1.1, &mut rng).is_err());
    }

    #[test]
    fn activity_thinning_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dirs: Vec<[f64; 3]> = (0..10_000).map(|_| [0.0, 0.0, 1.0]).collect();
        let set = CapPointSet::from_directions(dirs, RE, 0.1);
        let p = 0.3;
        let kept = thin_by_activity(&set, p, &mut rng).unwrap().len() as f64 / 10_000.0;
        let sigma = (p * (1.0 - p) / 10_000.0).sqrt();
        assert!((kept - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn association_rules() {
        let gus = CapPointSet::from_directions(
            vec![[0.0, 0.0, 1.0], [1e-4, 0.0, 1.0], [-1e-4, 0.0, 1.0]],
            RE,
            1e-3,
        );
        let one = CapPointSet::from_directions(vec![[1e-5, 1e-5, 1.0]], RE + 1_000.0, 1e-3);
        assert_eq!(nearest_association(&gus, &one).unwrap(), vec![0, 0, 0]);

        // a GU right under an AV; the other AV is ~1.3 km away
        let two = CapPointSet::from_directions(vec![[2e-4, 0.0, 1.0], [0.0, 0.0, 1.0]], RE + 1_000.0, 1e-3);
        assert_eq!(nearest_association(&gus, &two).unwrap(), vec![1, 0, 1]);

        let none = CapPointSet::empty(RE + 1_000.0, 1e-3);
        assert_eq!(nearest_association(&gus, &none), Err(Error::NoAerialVehicles));
    }

    #[test]
    fn association_ties_pick_lowest_index() {
        let gus = CapPointSet::from_directions(vec![[0.0, 0.0, 1.0]], RE, 1e-3);
        let avs = CapPointSet::from_directions(vec![[1e-4, 0.0, 1.0], [-1e-4, 0.0, 1.0]], RE + 1_000.0, 1e-3);
        assert_eq!(nearest_association(&gus, &avs).unwrap(), vec![0]);
    }

    #[test]
    fn same_seed_same_points() {
        let a = sample_hppp_on_cap(1e-5, RE, 1e-3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_hppp_on_cap(1e-5, RE, 1e-3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cap_area_small_angle() {
        let a = cap_area(RE, 1e-4);
        let planar = std::f64::consts::PI * (RE * 1e-4).powi(2);
        assert!((a / planar - 1.0).abs() < 1e-8);
    }
}
