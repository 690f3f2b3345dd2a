//! Monte-Carlo estimators on the torus: Ripley's K and the pair correlation
//! function (box-kernel ring counts), their base-station-centred versions,
//! distance samples, and per-cell area statistics.

use serde::{Deserialize, Serialize};

use crate::csv::CsvTable;
use crate::error::{domain, Result};
use crate::exec::{map_slice, Execution};
use crate::geometry::{Point, Window};
use crate::grid::Grid;
use crate::sampling::PointPattern;
use crate::tessellation::{nucleus_nn_distances, Tessellation};
use crate::users::UserAssignment;

/// Default bandwidth `0.1/sqrt(λ)`.
pub fn default_bandwidth(lambda: f64) -> f64 {
    0.1 / lambda.sqrt()
}

/// Default grid `{0.05, 0.10, …, 4.0}/sqrt(λ)`.
pub fn default_r_grid(lambda: f64) -> Vec<f64> {
    linear_grid(0.05, 4.0, 0.05).into_iter().map(|r| r / lambda.sqrt()).collect()
}

/// `start, start+step, …` up to `stop` inclusive (computed as `start + k*step`).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|k| start + k as f64 * step).collect()
}

/// Rings `[r - h/2, r + h/2)` at every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct RingGrid {
    r: Vec<f64>,
    bandwidth: f64,
    areas: Vec<f64>,
}

impl RingGrid {
    pub fn new(r_grid: &[f64], bandwidth: f64) -> Result<Self> {
        if r_grid.is_empty() {
            return domain("empty r grid");
        }
        if r_grid.iter().any(|r| !(*r > 0.0)) || r_grid.windows(2).any(|w| w[1] <= w[0]) {
            return domain("r grid must be positive and increasing");
        }
        if !(bandwidth > 0.0) {
            return domain(format!("bandwidth must be positive, got {bandwidth}"));
        }
        let min_step = r_grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if bandwidth >= 5.0 * min_step {
            return domain(format!("bandwidth {bandwidth} must be below 5x the grid spacing {min_step}"));
        }
        let areas = r_grid
            .iter()
            .map(|&r| {
                let outer = r + 0.5 * bandwidth;
                let inner = (r - 0.5 * bandwidth).max(0.0);
                std::f64::consts::PI * (outer * outer - inner * inner)
            })
            .collect();
        Ok(RingGrid { r: r_grid.to_vec(), bandwidth, areas })
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Largest distance any ring or K value looks at.
    pub fn reach(&self) -> f64 {
        self.r[self.r.len() - 1] + 0.5 * self.bandwidth
    }

    pub fn check_window(&self, w: &Window) -> Result<()> {
        if !w.periodic {
            return domain("estimators require a periodic window");
        }
        if self.reach() >= 0.5 * w.width.min(w.height) {
            return domain(format!("r grid reaches {} but the window allows < {}", self.reach(), 0.5 * w.width.min(w.height)));
        }
        Ok(())
    }

    fn record(&self, d: f64, rings: &mut [u64], cumulative: &mut [u64]) {
        let h2 = 0.5 * self.bandwidth;
        // r - h/2 <= d < r + h/2  <=>  d - h/2 < r <= d + h/2
        let lo = self.r.partition_point(|&r| r <= d - h2);
        let hi = self.r.partition_point(|&r| r <= d + h2);
        for c in &mut rings[lo..hi] {
            *c += 1;
        }
        let k = self.r.partition_point(|&r| r < d);
        if k < cumulative.len() {
            cumulative[k] += 1;
        }
    }
}

/// Ring and cumulative counts of one realization with its normalization:
/// `g_k = norm * rings[k] / ring_area[k]` and `K_k = norm * cumulative[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcfPartial {
    pub rings: Vec<u64>,
    pub cumulative: Vec<u64>,
    pub norm: f64,
}

impl PcfPartial {
    fn new(n: usize) -> Self {
        PcfPartial { rings: vec![0; n], cumulative: vec![0; n], norm: 0.0 }
    }

    fn finish_cumulative(mut self) -> Self {
        for k in 1..self.cumulative.len() {
            self.cumulative[k] += self.cumulative[k - 1];
        }
        self
    }
}

/// Pair counts of a stationary pattern. `None` for fewer than two points.
pub fn pattern_partial(pattern: &PointPattern, rings: &RingGrid) -> Result<Option<PcfPartial>> {
    rings.check_window(&pattern.window)?;
    let n = pattern.len();
    if n < 2 {
        return Ok(None);
    }
    let grid = Grid::with_cell_size(&pattern.points, pattern.window, 0.5 * rings.reach());
    let mut part = PcfPartial::new(rings.r.len());
    let reach = rings.reach();
    for (i, p) in pattern.points.iter().enumerate() {
        grid.for_each_within(*p, reach, |j, d| {
            if j != i {
                rings.record(d.norm(), &mut part.rings, &mut part.cumulative);
            }
        });
    }
    part.norm = pattern.window.area() / (n as f64 * (n - 1) as f64);
    Ok(Some(part.finish_cumulative()))
}

/// Counts of users around base stations. `served[o]` is the user index
/// served by base station `o`, which is excluded from its interferers.
pub fn bs_partial(
    bs: &[Point],
    users: &[Point],
    served: &[Option<usize>],
    window: Window,
    rings: &RingGrid,
) -> Result<Option<PcfPartial>> {
    rings.check_window(&window)?;
    if bs.is_empty() || users.is_empty() {
        return Ok(None);
    }
    let grid = Grid::with_cell_size(users, window, 0.5 * rings.reach());
    let mut part = PcfPartial::new(rings.r.len());
    let reach = rings.reach();
    let mut interferer_mass = 0.0;
    for (o, p) in bs.iter().enumerate() {
        let own = served.get(o).copied().flatten();
        interferer_mass += (users.len() - usize::from(own.is_some())) as f64;
        grid.for_each_within(*p, reach, |j, d| {
            if Some(j) != own {
                rings.record(d.norm(), &mut part.rings, &mut part.cumulative);
            }
        });
    }
    if interferer_mass == 0.0 {
        return Ok(None);
    }
    // per base station, interferer density m_o/|W|
    part.norm = window.area() / interferer_mass;
    Ok(Some(part.finish_cumulative()))
}

/// Base stations, active users and the serving map of an assignment.
pub fn bs_user_view(assign: &UserAssignment) -> (Vec<Point>, Vec<Point>, Vec<Option<usize>>) {
    let bs = assign.tess.pattern.points.clone();
    let mut users = Vec::with_capacity(assign.entries.len());
    let mut served = vec![None; bs.len()];
    for e in &assign.entries {
        if let Some(u) = e.user {
            served[e.bs_index] = Some(users.len());
            users.push(u);
        }
    }
    (bs, users, served)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcfEstimate {
    pub r_grid: Vec<f64>,
    pub g_hat: Vec<f64>,
    pub k_hat: Vec<f64>,
    pub pair_counts: Vec<u64>,
    /// Standard error of `g_hat` across realizations.
    pub stderr: Vec<f64>,
    pub bandwidth: f64,
    pub n_realizations: usize,
    /// Realizations skipped because they had fewer than two points.
    pub n_skipped: usize,
}

impl PcfEstimate {
    /// Linear interpolation of `g_hat`, clamped to the grid ends.
    pub fn g_at(&self, r: f64) -> f64 {
        interpolate(&self.r_grid, &self.g_hat, r)
    }

    /// Maximum of `|g_hat - f|` over grid points in `[lo, hi]`.
    pub fn max_deviation(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.r_grid
            .iter()
            .zip(&self.g_hat)
            .filter(|(r, _)| **r >= lo - 1e-12 && **r <= hi + 1e-12)
            .map(|(r, g)| (g - f(*r)).abs())
            .fold(0.0, f64::max)
    }

    /// `r, g_hat, k_hat, pairs, stderr`.
    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["r", "g_hat", "k_hat", "pairs", "stderr"]);
        for k in 0..self.r_grid.len() {
            t.push_row(vec![
                crate::csv::fmt_sig(self.r_grid[k]),
                crate::csv::fmt_sig(self.g_hat[k]),
                crate::csv::fmt_sig(self.k_hat[k]),
                self.pair_counts[k].to_string(),
                crate::csv::fmt_sig(self.stderr[k]),
            ]);
        }
        t
    }
}

pub(crate) fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let k = xs.partition_point(|&v| v < x);
    if k >= xs.len() {
        return ys[ys.len() - 1];
    }
    let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

/// Order-preserving reduction of per-realization partials. Each realization
/// contributes its own normalized curve; the estimate is their mean.
#[derive(Debug, Clone)]
pub struct PcfAccumulator {
    rings: RingGrid,
    sum_g: Vec<f64>,
    sum_g2: Vec<f64>,
    sum_k: Vec<f64>,
    pairs: Vec<u64>,
    n: usize,
    skipped: usize,
}

impl PcfAccumulator {
    pub fn new(rings: RingGrid) -> Self {
        let m = rings.r.len();
        PcfAccumulator { rings, sum_g: vec![0.0; m], sum_g2: vec![0.0; m], sum_k: vec![0.0; m], pairs: vec![0; m], n: 0, skipped: 0 }
    }

    pub fn rings(&self) -> &RingGrid {
        &self.rings
    }

    pub fn add(&mut self, partial: Option<&PcfPartial>) {
        let Some(p) = partial else {
            self.skipped += 1;
            return;
        };
        for k in 0..self.rings.r.len() {
            let g = p.norm * p.rings[k] as f64 / self.rings.areas[k];
            self.sum_g[k] += g;
            self.sum_g2[k] += g * g;
            self.sum_k[k] += p.norm * p.cumulative[k] as f64;
            self.pairs[k] += p.rings[k];
        }
        self.n += 1;
    }

    pub fn finish(&self) -> PcfEstimate {
        let n = self.n.max(1) as f64;
        let g_hat: Vec<f64> = self.sum_g.iter().map(|s| s / n).collect();
        let stderr = self
            .sum_g2
            .iter()
            .zip(&g_hat)
            .map(|(s2, m)| if self.n > 1 { ((s2 / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt() } else { f64::NAN })
            .collect();
        PcfEstimate {
            r_grid: self.rings.r.clone(),
            g_hat,
            k_hat: self.sum_k.iter().map(|s| s / n).collect(),
            pair_counts: self.pairs.clone(),
            stderr,
            bandwidth: self.rings.bandwidth,
            n_realizations: self.n,
            n_skipped: self.skipped,
        }
    }
}

/// Pair correlation function and Ripley's K of stationary patterns,
/// averaged over realizations.
pub fn estimate_pcf(patterns: &[PointPattern], r_grid: &[f64], bandwidth: f64, exec: Execution) -> Result<PcfEstimate> {
    let rings = RingGrid::new(r_grid, bandwidth)?;
    let partials = map_slice(patterns, exec, |p| pattern_partial(p, &rings));
    let mut acc = PcfAccumulator::new(rings);
    for p in partials {
        acc.add(p?.as_ref());
    }
    Ok(acc.finish())
}

/// Base-station/user pair correlation: interferer ring counts around every
/// base station, normalized by the realized interferer density.
pub fn estimate_pcf_bs(assignments: &[UserAssignment], r_grid: &[f64], bandwidth: f64, exec: Execution) -> Result<PcfEstimate> {
    let rings = RingGrid::new(r_grid, bandwidth)?;
    let partials = map_slice(assignments, exec, |a| {
        let (bs, users, served) = bs_user_view(a);
        bs_partial(&bs, &users, &served, a.tess.pattern.window, &rings)
    });
    let mut acc = PcfAccumulator::new(rings);
    for p in partials {
        acc.add(p?.as_ref());
    }
    Ok(acc.finish())
}

/// Cross pair correlation between base stations and an unrelated user
/// pattern (no user is excluded).
pub fn estimate_pcf_cross(pairs: &[(PointPattern, PointPattern)], r_grid: &[f64], bandwidth: f64, exec: Execution) -> Result<PcfEstimate> {
    let rings = RingGrid::new(r_grid, bandwidth)?;
    let partials = map_slice(pairs, exec, |(bs, users)| bs_partial(&bs.points, &users.points, &[], bs.window, &rings));
    let mut acc = PcfAccumulator::new(rings);
    for p in partials {
        acc.add(p?.as_ref());
    }
    Ok(acc.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceKind {
    /// User to nearest other active user.
    NearestNeighbor,
    /// User to its serving base station.
    LinkDistance,
    /// Base station to nearest active user it does not serve.
    NearestInterferer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSample {
    pub values: Vec<f64>,
    pub kind: DistanceKind,
}

impl DistanceSample {
    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    pub fn mean_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    /// Kolmogorov-Smirnov distance to a continuous CDF.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        ks_distance(&self.values, cdf)
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// One-sample Kolmogorov-Smirnov statistic `sup |F_n - F|`.
pub fn ks_distance(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Distances of one kind for one assignment, in entry order.
pub fn assignment_distances(assign: &UserAssignment, kind: DistanceKind) -> Vec<f64> {
    let window = assign.tess.pattern.window;
    let (bs, users, served) = bs_user_view(assign);
    match kind {
        DistanceKind::LinkDistance => assign
            .entries
            .iter()
            .filter_map(|e| e.user.map(|u| window.displacement(bs[e.bs_index], u).norm()))
            .collect(),
        DistanceKind::NearestNeighbor => {
            if users.len() < 2 {
                return Vec::new();
            }
            let grid = Grid::new(&users, window, 2.0);
            (0..users.len()).filter_map(|i| grid.nearest(users[i], Some(i)).map(|(_, d)| d)).collect()
        }
        DistanceKind::NearestInterferer => {
            if users.is_empty() {
                return Vec::new();
            }
            let grid = Grid::new(&users, window, 2.0);
            bs.iter()
                .zip(&served)
                .filter_map(|(p, own)| grid.nearest(*p, *own).map(|(_, d)| d))
                .collect()
        }
    }
}

/// Pooled distances over assignments, in realization order.
pub fn distance_samples(assignments: &[UserAssignment], kind: DistanceKind, exec: Execution) -> DistanceSample {
    let parts = map_slice(assignments, exec, |a| assignment_distances(a, kind));
    DistanceSample { values: parts.concat(), kind }
}

/// Pooled per-cell sums, reducible across realizations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CellSums {
    pub n_cells: u64,
    pub n_vacant: u64,
    pub area_occ: f64,
    pub area_vac: f64,
    pub area_sq: f64,
    pub inv_area: f64,
    pub total_window_area: f64,
}

impl CellSums {
    pub fn from_assignment(assign: &UserAssignment) -> Self {
        let mut s = CellSums { total_window_area: assign.tess.pattern.window.area(), ..Default::default() };
        for e in &assign.entries {
            let a = assign.tess.cells[e.bs_index].area;
            s.n_cells += 1;
            s.area_sq += a * a;
            s.inv_area += 1.0 / a;
            if e.user.is_some() {
                s.area_occ += a;
            } else {
                s.n_vacant += 1;
                s.area_vac += a;
            }
        }
        s
    }

    pub fn merge(&mut self, o: &CellSums) {
        self.n_cells += o.n_cells;
        self.n_vacant += o.n_vacant;
        self.area_occ += o.area_occ;
        self.area_vac += o.area_vac;
        self.area_sq += o.area_sq;
        self.inv_area += o.inv_area;
        self.total_window_area += o.total_window_area;
    }

    pub fn stats(&self) -> CellStats {
        let n = self.n_cells as f64;
        let n_vac = self.n_vacant as f64;
        let n_occ = n - n_vac;
        let total = self.area_occ + self.area_vac;
        CellStats {
            vacancy_fraction: n_vac / n,
            mean_area_occ: (n_occ > 0.0).then(|| self.area_occ / n_occ),
            mean_area_vac: (n_vac > 0.0).then(|| self.area_vac / n_vac),
            mean_area_crofton: self.area_sq / total,
            mean_inv_area: self.inv_area / n,
            mean_area: total / n,
            n_cells: self.n_cells,
            realized_bs_intensity: n / self.total_window_area,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub vacancy_fraction: f64,
    pub mean_area_occ: Option<f64>,
    pub mean_area_vac: Option<f64>,
    /// Area-weighted mean `E(A²)/E(A)`.
    pub mean_area_crofton: f64,
    pub mean_inv_area: f64,
    pub mean_area: f64,
    pub n_cells: u64,
    pub realized_bs_intensity: f64,
}

impl CellStats {
    /// `ν E(A_vac) + (1-ν) E(A_occ)`, which equals the pooled mean cell
    /// area `1/λ̂_P` exactly.
    pub fn balance(&self) -> f64 {
        let nu = self.vacancy_fraction;
        nu * self.mean_area_vac.unwrap_or(0.0) + (1.0 - nu) * self.mean_area_occ.unwrap_or(0.0)
    }
}

pub fn cell_stats(assignments: &[UserAssignment]) -> CellStats {
    let mut sums = CellSums::default();
    for a in assignments {
        sums.merge(&CellSums::from_assignment(a));
    }
    sums.stats()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalArea {
    pub rho: f64,
    /// `None` when no nucleus has a neighbor within `rho`.
    pub mean_area: Option<f64>,
    pub n_cells: usize,
}

/// `(nucleus nearest-neighbor distance, cell area)` for every cell.
pub fn nn_area_pairs(tess: &Tessellation) -> Vec<(f64, f64)> {
    nucleus_nn_distances(tess).into_iter().zip(tess.areas()).collect()
}

/// Mean area of the cells whose nucleus has a neighbor within `ρ`
/// (cumulative in `ρ`).
pub fn conditional_cell_area_from_pairs(mut pairs: Vec<(f64, f64)>, rho_grid: &[f64]) -> Result<Vec<ConditionalArea>> {
    if rho_grid.iter().any(|r| !(*r > 0.0)) || rho_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("rho grid must be positive and increasing");
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::with_capacity(rho_grid.len());
    let (mut k, mut sum) = (0usize, 0.0);
    for &rho in rho_grid {
        while k < pairs.len() && pairs[k].0 <= rho {
            sum += pairs[k].1;
            k += 1;
        }
        out.push(ConditionalArea { rho, mean_area: (k > 0).then(|| sum / k as f64), n_cells: k });
    }
    Ok(out)
}

pub fn conditional_cell_area(tessellations: &[Tessellation], rho_grid: &[f64], exec: Execution) -> Result<Vec<ConditionalArea>> {
    let pairs = map_slice(tessellations, exec, nn_area_pairs).concat();
    conditional_cell_area_from_pairs(pairs, rho_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_ppp, Seed};
    use std::sync::Arc;

    #[test]
    fn ring_grid_validation() {
        assert!(RingGrid::new(&[], 0.1).is_err());
        assert!(RingGrid::new(&[0.2, 0.1], 0.1).is_err());
        assert!(RingGrid::new(&[0.1, 0.2], 0.0).is_err());
        assert!(RingGrid::new(&[0.1, 0.2], 0.5).is_err());
        let g = RingGrid::new(&[0.05, 0.1], 0.1).unwrap();
        // inner radius clamps at zero
        assert!((g.areas[0] - std::f64::consts::PI * 0.01).abs() < 1e-15);
    }

    #[test]
    fn ring_membership_is_half_open() {
        let g = RingGrid::new(&[1.0, 2.0, 3.0], 1.0).unwrap();
        let mut rings = vec![0; 3];
        let mut cum = vec![0; 3];
        g.record(1.5, &mut rings, &mut cum);
        assert_eq!(rings, vec![0, 1, 0]);
        g.record(0.5, &mut rings, &mut cum);
        assert_eq!(rings, vec![1, 1, 0]);
    }

    #[test]
    fn grid_helpers() {
        let g = default_r_grid(1.0);
        assert_eq!(g.len(), 80);
        assert!((g[79] - 4.0).abs() < 1e-12);
        assert!((default_r_grid(4.0)[0] - 0.025).abs() < 1e-15);
        assert_eq!(linear_grid(0.0, 1.0, 0.25), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn singleton_patterns_are_skipped() {
        let w = Window::torus(20.0).unwrap();
        let one = PointPattern::new(vec![Point::new(1.0, 1.0)], w, 1.0).unwrap();
        let est = estimate_pcf(&[one], &default_r_grid(1.0), 0.1, Execution::Sequential).unwrap();
        assert_eq!(est.n_skipped, 1);
        assert_eq!(est.n_realizations, 0);
    }

    #[test]
    fn reach_must_fit_the_window() {
        let w = Window::torus(6.0).unwrap();
        let p = sample_ppp(1.0, w, Seed(1)).unwrap();
        assert!(estimate_pcf(&[p], &default_r_grid(1.0), 0.1, Execution::Sequential).is_err());
    }

    #[test]
    fn pair_counts_match_brute_force() {
        let w = Window::torus(20.0).unwrap();
        let p = sample_ppp(1.0, w, Seed(3)).unwrap();
        let rings = RingGrid::new(&default_r_grid(1.0), 0.1).unwrap();
        let part = pattern_partial(&p, &rings).unwrap().unwrap();
        let mut want = vec![0u64; rings.r.len()];
        let mut want_cum = vec![0u64; rings.r.len()];
        for (i, a) in p.points.iter().enumerate() {
            for (j, b) in p.points.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = w.displacement(*a, *b).norm();
                for (k, r) in rings.r.iter().enumerate() {
                    if d >= r - 0.05 && d < r + 0.05 {
                        want[k] += 1;
                    }
                    if d <= *r {
                        want_cum[k] += 1;
                    }
                }
            }
        }
        assert_eq!(part.rings, want);
        assert_eq!(part.cumulative, want_cum);
    }

    #[test]
    fn conditional_area_is_cumulative_and_reports_missing() {
        let pairs = vec![(0.1, 0.4), (0.2, 0.6), (1.0, 2.0)];
        let out = conditional_cell_area_from_pairs(pairs, &[0.05, 0.15, 0.25, 3.0]).unwrap();
        assert_eq!(out[0].mean_area, None);
        assert_eq!(out[1].mean_area, Some(0.4));
        assert!((out[2].mean_area.unwrap() - 0.5).abs() < 1e-15);
        assert!((out[3].mean_area.unwrap() - 1.0).abs() < 1e-15);
        assert!(conditional_cell_area_from_pairs(vec![], &[0.2, 0.1]).is_err());
    }

    #[test]
    fn ks_distance_of_exact_quantiles_is_small() {
        let n = 1000;
        let values: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!(ks_distance(&values, |x| x.clamp(0.0, 1.0)) <= 0.5 / n as f64 + 1e-12);
        assert!((ks_distance(&values, |x| (x * x).clamp(0.0, 1.0)) - 0.25).abs() < 2e-3);
    }

    #[test]
    fn type1_cell_stats_have_no_vacancies() {
        let pat = sample_ppp(1.0, Window::torus(12.0).unwrap(), Seed(1)).unwrap();
        let tess = Arc::new(crate::build_voronoi(&pat).unwrap());
        let a = crate::type1_users(tess, Seed(2));
        let s = cell_stats(&[a]);
        assert_eq!(s.vacancy_fraction, 0.0);
        assert_eq!(s.mean_area_vac, None);
        assert!((s.balance() - 1.0 / s.realized_bs_intensity).abs() < 1e-12);
    }
}
