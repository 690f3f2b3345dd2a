//! Point-process generators: homogeneous Poisson, stationary square lattice
//! and the radial (squared-modulus) representation of the β-Ginibre process.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::geometry::{Point, Window};

/// Master seed. Derived seeds are obtained by hashing `(seed, key)`, so
/// a realization's random stream depends only on its index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub fn derive(self, key: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(key.wrapping_add(0x632B_E59B_D9B4_E019))))
    }

    /// Seed of realization `index` under this master seed.
    pub fn realization(self, index: usize) -> Seed {
        self.derive(index as u64)
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Stream keys separating the independent ingredients of one realization.
pub mod stream {
    pub const BASE_STATIONS: u64 = 1;
    pub const USERS: u64 = 2;
    pub const POPULATION: u64 = 3;
    pub const THINNING: u64 = 4;
    pub const SELECTION: u64 = 5;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPattern {
    pub points: Vec<Point>,
    pub window: Window,
    pub nominal_intensity: f64,
}

impl PointPattern {
    pub fn new(points: Vec<Point>, window: Window, nominal_intensity: f64) -> Result<Self> {
        if !(nominal_intensity >= 0.0) {
            return domain(format!("intensity must be nonnegative, got {nominal_intensity}"));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite() || !window.contains(**p)) {
            return domain(format!("point ({}, {}) outside window", p.x, p.y));
        }
        Ok(PointPattern { points, window, nominal_intensity })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn realized_intensity(&self) -> f64 {
        self.points.len() as f64 / self.window.area()
    }

    /// Independent thinning with retention probability `keep`.
    pub fn thin(&self, keep: f64, seed: Seed) -> Result<PointPattern> {
        if !(0.0..=1.0).contains(&keep) {
            return domain(format!("retention probability {keep} outside [0,1]"));
        }
        let mut rng = seed.rng();
        let points = self.points.iter().copied().filter(|_| rng.random::<f64>() < keep).collect();
        Ok(PointPattern { points, window: self.window, nominal_intensity: self.nominal_intensity * keep })
    }
}

/// Homogeneous Poisson point process of the given intensity in `w`.
pub fn sample_ppp(intensity: f64, w: Window, seed: Seed) -> Result<PointPattern> {
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return domain(format!("intensity must be nonnegative, got {intensity}"));
    }
    let mean = intensity * w.area();
    let mut rng = seed.rng();
    let n = if mean > 0.0 {
        Poisson::new(mean).map_err(|e| crate::Error::Domain(e.to_string()))?.sample(&mut rng) as usize
    } else {
        0
    };
    let points = (0..n)
        .map(|_| Point::new(rng.random::<f64>() * w.width, rng.random::<f64>() * w.height))
        .collect();
    Ok(PointPattern { points, window: w, nominal_intensity: intensity })
}

/// Square lattice of spacing `1/sqrt(intensity)` shifted by a uniform vector
/// in one fundamental cell. The window sides must be multiples of the spacing.
pub fn sample_square_lattice(intensity: f64, w: Window, seed: Seed) -> Result<PointPattern> {
    if !(intensity > 0.0) || !intensity.is_finite() {
        return domain(format!("lattice intensity must be positive, got {intensity}"));
    }
    let spacing = intensity.sqrt().recip();
    let nx = (w.width / spacing).round();
    let ny = (w.height / spacing).round();
    if nx < 1.0 || ny < 1.0 || (nx * spacing - w.width).abs() > 1e-9 * w.width || (ny * spacing - w.height).abs() > 1e-9 * w.height {
        return config(format!(
            "window {} x {} is not a multiple of lattice spacing {spacing}",
            w.width, w.height
        ));
    }
    let mut rng = seed.rng();
    let ux = rng.random::<f64>() * spacing;
    let uy = rng.random::<f64>() * spacing;
    let (nx, ny) = (nx as usize, ny as usize);
    let mut points = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            points.push(w.wrap(Point::new(ux + i as f64 * spacing, uy + j as f64 * spacing)));
        }
    }
    Ok(PointPattern { points, window: w, nominal_intensity: intensity })
}

/// Retained distances from the origin of a β-Ginibre process, sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSample {
    pub radii: Vec<f64>,
    pub beta: f64,
    pub intensity: f64,
}

/// Smallest number of gamma shapes that covers `b(o, r_max)` with
/// negligible truncation.
pub fn default_ginibre_n_max(beta: f64, intensity: f64, r_max: f64) -> usize {
    (3.0 * intensity * std::f64::consts::PI * r_max * r_max / beta).ceil().max(1.0) as usize
}

/// Squared moduli indexed by gamma shape: entry `i` belongs to shape
/// `first_shape + i` and is `None` when thinned away.
///
/// Starting from the unit-intensity Ginibre process, whose squared moduli
/// are `G_k / π` with `G_k ~ Gamma(k, 1)` independent, each point is kept
/// with probability `beta` and the plane is rescaled by `sqrt(beta /
/// intensity)` so the thinned process has the requested intensity.
pub fn ginibre_squared_moduli<R: Rng>(
    beta: f64,
    intensity: f64,
    first_shape: usize,
    n_shapes: usize,
    rng: &mut R,
) -> Result<Vec<Option<f64>>> {
    if !(beta > 0.0 && beta <= 1.0) {
        return domain(format!("beta must lie in (0,1], got {beta}"));
    }
    if !(intensity > 0.0) || !intensity.is_finite() {
        return domain(format!("intensity must be positive, got {intensity}"));
    }
    if first_shape == 0 {
        return domain("gamma shapes start at 1");
    }
    let scale = beta / (std::f64::consts::PI * intensity);
    (first_shape..first_shape + n_shapes)
        .map(|k| {
            let g = Gamma::new(k as f64, 1.0).map_err(|e| crate::Error::Domain(e.to_string()))?.sample(rng);
            let keep = rng.random::<f64>() <= beta;
            Ok(keep.then_some(scale * g))
        })
        .collect()
}

fn radial_sample(beta: f64, intensity: f64, first_shape: usize, n_max: usize, seed: Seed) -> Result<RadialSample> {
    if n_max == 0 {
        return domain("n_max must be at least 1");
    }
    let mut rng = seed.rng();
    let mut radii: Vec<f64> = ginibre_squared_moduli(beta, intensity, first_shape, n_max, &mut rng)?
        .into_iter()
        .flatten()
        .map(f64::sqrt)
        .collect();
    radii.sort_by(f64::total_cmp);
    Ok(RadialSample { radii, beta, intensity })
}

/// Moduli of the stationary β-Ginibre process seen from the origin
/// (gamma shapes `1..=n_max`).
pub fn sample_ginibre_radii(beta: f64, intensity: f64, n_max: usize, seed: Seed) -> Result<RadialSample> {
    radial_sample(beta, intensity, 1, n_max, seed)
}

/// Moduli of the reduced Palm version, i.e. the distances from a typical
/// point to the other points (gamma shapes `2..=n_max+1`). Its radial
/// density is `intensity * (1 - exp(-π intensity r² / beta))`.
pub fn sample_ginibre_radii_palm(beta: f64, intensity: f64, n_max: usize, seed: Seed) -> Result<RadialSample> {
    radial_sample(beta, intensity, 2, n_max, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(side: f64) -> Window {
        Window::torus(side).unwrap()
    }

    #[test]
    fn ppp_is_deterministic_and_inside() {
        let a = sample_ppp(1.0, torus(10.0), Seed(7)).unwrap();
        let b = sample_ppp(1.0, torus(10.0), Seed(7)).unwrap();
        assert_eq!(a, b);
        assert!(a.points.iter().all(|p| a.window.contains(*p)));
        assert_ne!(a, sample_ppp(1.0, torus(10.0), Seed(8)).unwrap());
    }

    #[test]
    fn ppp_zero_and_negative_intensity() {
        assert!(sample_ppp(0.0, torus(10.0), Seed(1)).unwrap().is_empty());
        assert!(sample_ppp(-1.0, torus(10.0), Seed(1)).is_err());
    }

    #[test]
    fn ppp_count_mean_and_fano_factor() {
        let counts: Vec<f64> = (0..10_000)
            .map(|i| sample_ppp(1.0, torus(10.0), Seed(3).realization(i)).unwrap().len() as f64)
            .collect();
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / n;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 100.0).abs() < 0.3, "mean {mean}");
        assert!((var / mean - 1.0).abs() < 0.05, "fano {}", var / mean);
    }

    #[test]
    fn lattice_counts_and_spacing() {
        let p = sample_square_lattice(1.0, torus(10.0), Seed(1)).unwrap();
        assert_eq!(p.len(), 100);
        let q = sample_square_lattice(4.0, torus(10.0), Seed(1)).unwrap();
        assert_eq!(q.len(), 400);
        let w = q.window;
        for (i, a) in q.points.iter().enumerate() {
            let nn = q
                .points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| crate::geometry::torus_distance(*a, *b, &w))
                .fold(f64::INFINITY, f64::min);
            assert!((nn - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn lattice_rejects_incompatible_window() {
        assert!(matches!(
            sample_square_lattice(1.0, torus(10.5), Seed(1)),
            Err(crate::Error::Config(_))
        ));
    }

    #[test]
    fn lattice_shift_is_uniform_over_fundamental_cell() {
        // occupancy of a 4x4 grid over the fundamental cell, chi-square with 15 dof
        let bins = 4;
        let reps = 8000;
        let mut hist = vec![0usize; bins * bins];
        for i in 0..reps {
            let p = sample_square_lattice(1.0, torus(10.0), Seed(11).realization(i)).unwrap();
            let q = p.points[0];
            let (fx, fy) = (q.x.fract(), q.y.fract());
            hist[(fy * bins as f64) as usize * bins + (fx * bins as f64) as usize] += 1;
        }
        let expected = reps as f64 / (bins * bins) as f64;
        let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        // 99.9% quantile of chi-square(15) is 37.7
        assert!(chi2 < 37.7, "chi2 {chi2}");
    }

    #[test]
    fn ginibre_rejects_bad_beta() {
        assert!(sample_ginibre_radii(0.0, 1.0, 10, Seed(1)).is_err());
        assert!(sample_ginibre_radii(1.5, 1.0, 10, Seed(1)).is_err());
        assert!(sample_ginibre_radii(0.5, 1.0, 0, Seed(1)).is_err());
    }

    #[test]
    fn ginibre_radii_sorted() {
        let s = sample_ginibre_radii(5.0 / 12.0, 1.0, 200, Seed(5)).unwrap();
        assert!(s.radii.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.radii.len() < 200);
    }

    #[test]
    fn default_n_max_covers_radius() {
        assert_eq!(default_ginibre_n_max(1.0, 1.0, 1.0), 10);
        assert!(default_ginibre_n_max(0.5, 1.0, 1.0) > default_ginibre_n_max(1.0, 1.0, 1.0));
    }
}
