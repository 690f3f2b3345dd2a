//! User point processes built on a tessellation of base stations.
//!
//! * Type I: every cell gets one user placed uniformly in the cell.
//! * Type II: every cell picks one user uniformly among the points of an
//!   independent population process that fall inside it, or stays vacant.
//!
//! The interferer view of a base station is every active user except the one
//! it serves, re-centered so the base station sits at the origin.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::geometry::{ConvexPolygon, Point};
use crate::sampling::{stream, PointPattern, Seed};
use crate::tessellation::{locate_cell, Tessellation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UserModel {
    TypeI,
    TypeII,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserEntry {
    pub bs_index: usize,
    /// `None` for a vacant cell.
    pub user: Option<Point>,
}

#[derive(Debug, Clone)]
pub struct UserAssignment {
    pub tess: Arc<Tessellation>,
    pub entries: Vec<UserEntry>,
    pub model: UserModel,
    /// Population-to-base-station density ratio (type II only).
    pub eta: Option<f64>,
}

impl UserAssignment {
    pub fn active_users(&self) -> impl Iterator<Item = Point> + '_ {
        self.entries.iter().filter_map(|e| e.user)
    }

    pub fn n_active(&self) -> usize {
        self.entries.iter().filter(|e| e.user.is_some()).count()
    }

    pub fn n_vacant(&self) -> usize {
        self.entries.len() - self.n_active()
    }

    /// Active users as a pattern on the base-station window.
    pub fn users_pattern(&self) -> PointPattern {
        let window = self.tess.pattern.window;
        let points: Vec<Point> = self.active_users().collect();
        let intensity = points.len() as f64 / window.area();
        PointPattern { points, window, nominal_intensity: intensity }
    }

    /// Independent thinning of the active users; dropped users leave their
    /// cell vacant.
    pub fn thin(&self, keep: f64, seed: Seed) -> Result<UserAssignment> {
        if !(0.0..=1.0).contains(&keep) {
            return Err(Error::Domain(format!("retention probability {keep} outside [0,1]")));
        }
        let mut rng = seed.derive(stream::THINNING).rng();
        let entries = self
            .entries
            .iter()
            .map(|e| UserEntry { bs_index: e.bs_index, user: e.user.filter(|_| rng.random::<f64>() < keep) })
            .collect();
        Ok(UserAssignment { tess: Arc::clone(&self.tess), entries, model: self.model, eta: self.eta })
    }

    /// `bs_x,bs_y,user_x,user_y,vacant_flag,cell_area`; vacant cells leave
    /// the user columns empty.
    pub fn to_csv(&self) -> String {
        use crate::csv::fmt_sig;
        let mut out = String::from("bs_x,bs_y,user_x,user_y,vacant_flag,cell_area\n");
        for e in &self.entries {
            let bs = self.tess.nucleus(e.bs_index);
            let (ux, uy, flag) = match e.user {
                Some(u) => (fmt_sig(u.x), fmt_sig(u.y), 0),
                None => (String::new(), String::new(), 1),
            };
            out.push_str(&format!(
                "{},{},{ux},{uy},{flag},{}\n",
                fmt_sig(bs.x),
                fmt_sig(bs.y),
                fmt_sig(self.tess.cells[e.bs_index].area)
            ));
        }
        out
    }
}

/// Uniform point in a convex polygon: fan triangulation from the centroid,
/// area-weighted triangle choice, uniform point in the triangle.
pub fn uniform_in_polygon<R: Rng>(poly: &ConvexPolygon, rng: &mut R) -> Point {
    let c = poly.centroid();
    let tris: Vec<(Point, Point, f64)> = poly.edges().map(|(a, b)| (a, b, 0.5 * (a - c).cross(b - c))).collect();
    let total: f64 = tris.iter().map(|t| t.2).sum();
    let mut target = rng.random::<f64>() * total;
    let mut chosen = tris[tris.len() - 1];
    for t in &tris {
        if target < t.2 {
            chosen = *t;
            break;
        }
        target -= t.2;
    }
    let (a, b, _) = chosen;
    let (mut s, mut t) = (rng.random::<f64>(), rng.random::<f64>());
    if s + t > 1.0 {
        s = 1.0 - s;
        t = 1.0 - t;
    }
    c + (a - c) * s + (b - c) * t
}

/// One user uniformly distributed in every cell.
pub fn type1_users(tess: impl Into<Arc<Tessellation>>, seed: Seed) -> UserAssignment {
    let tess = tess.into();
    let mut rng = seed.derive(stream::USERS).rng();
    let window = tess.pattern.window;
    let entries = tess
        .cells
        .iter()
        .map(|cell| UserEntry {
            bs_index: cell.nucleus_index,
            user: Some(window.wrap(uniform_in_polygon(&cell.polygon, &mut rng))),
        })
        .collect();
    UserAssignment { tess, entries, model: UserModel::TypeI, eta: None }
}

/// One user per cell chosen uniformly among the population points inside
/// it; cells without population points are vacant.
pub fn type2_users(tess: impl Into<Arc<Tessellation>>, population: &PointPattern, seed: Seed) -> Result<UserAssignment> {
    let tess = tess.into();
    if population.window != tess.pattern.window {
        return config("population and base stations must share the window");
    }
    let mut candidates: Vec<Vec<usize>> = vec![Vec::new(); tess.len()];
    for (k, p) in population.points.iter().enumerate() {
        candidates[locate_cell(&tess, *p)].push(k);
    }
    let mut rng = seed.derive(stream::SELECTION).rng();
    let entries = candidates
        .iter()
        .enumerate()
        .map(|(i, cands)| UserEntry {
            bs_index: i,
            user: (!cands.is_empty()).then(|| population.points[cands[rng.random_range(0..cands.len())]]),
        })
        .collect();
    let bs_intensity = tess.pattern.nominal_intensity;
    let eta = (bs_intensity > 0.0).then(|| population.nominal_intensity / bs_intensity);
    Ok(UserAssignment { tess, entries, model: UserModel::TypeII, eta })
}

/// Active users other than the one served by `bs_index`, translated on the
/// torus so that the base station sits at the origin.
pub fn interferers_at_bs(assign: &UserAssignment, bs_index: usize) -> Result<PointPattern> {
    if bs_index >= assign.entries.len() {
        return Err(Error::Domain(format!("no base station with index {bs_index}")));
    }
    let window = assign.tess.pattern.window;
    let bs = assign.tess.nucleus(bs_index);
    let points: Vec<Point> = assign
        .entries
        .iter()
        .filter(|e| e.bs_index != bs_index)
        .filter_map(|e| e.user)
        .map(|u| window.wrap(window.displacement(bs, u)))
        .collect();
    let intensity = points.len() as f64 / window.area();
    Ok(PointPattern { points, window, nominal_intensity: intensity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use crate::sampling::{sample_ppp, Seed};
    use crate::tessellation::build_voronoi;

    fn tess(seed: u64) -> Arc<Tessellation> {
        let pat = sample_ppp(1.0, Window::torus(12.0).unwrap(), Seed(seed)).unwrap();
        Arc::new(build_voronoi(&pat).unwrap())
    }

    #[test]
    fn type1_places_one_user_inside_each_cell() {
        let t = tess(1);
        let a = type1_users(Arc::clone(&t), Seed(2));
        assert_eq!(a.entries.len(), t.len());
        assert_eq!(a.n_vacant(), 0);
        for e in &a.entries {
            let u = t.unwrap_near(e.bs_index, e.user.unwrap());
            assert!(t.cells[e.bs_index].polygon.contains(u));
            assert_eq!(locate_cell(&t, e.user.unwrap()), e.bs_index);
        }
    }

    #[test]
    fn uniform_in_square_has_uniform_moments() {
        let sq = ConvexPolygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let mut rng = Seed(3).rng();
        let n = 200_000;
        let (mut sx, mut sy, mut left) = (0.0, 0.0, 0usize);
        for _ in 0..n {
            let p = uniform_in_polygon(&sq, &mut rng);
            assert!(sq.contains(p));
            sx += p.x;
            sy += p.y;
            left += (p.x < 0.5) as usize;
        }
        assert!((sx / n as f64 - 1.0).abs() < 0.01);
        assert!((sy / n as f64 - 0.5).abs() < 0.005);
        assert!((left as f64 / n as f64 - 0.25).abs() < 0.005);
    }

    #[test]
    fn type2_empty_population_is_all_vacant() {
        let t = tess(4);
        let pop = PointPattern::new(vec![], t.pattern.window, 0.0).unwrap();
        let a = type2_users(Arc::clone(&t), &pop, Seed(1)).unwrap();
        assert_eq!(a.n_vacant(), t.len());
    }

    #[test]
    fn type2_rejects_other_window() {
        let t = tess(4);
        let pop = sample_ppp(1.0, Window::torus(13.0).unwrap(), Seed(1)).unwrap();
        assert!(matches!(type2_users(t, &pop, Seed(1)), Err(Error::Config(_))));
    }

    #[test]
    fn type2_selects_from_own_cell_and_density_identity() {
        let t = tess(5);
        let pop = sample_ppp(0.7, t.pattern.window, Seed(6)).unwrap();
        let a = type2_users(Arc::clone(&t), &pop, Seed(7)).unwrap();
        assert!((a.eta.unwrap() - 0.7).abs() < 1e-15);
        for e in a.entries.iter().filter(|e| e.user.is_some()) {
            let u = e.user.unwrap();
            assert_eq!(locate_cell(&t, u), e.bs_index);
            assert!(pop.points.contains(&u));
        }
        let area = t.pattern.window.area();
        let density = a.n_active() as f64 / area;
        let nu = a.n_vacant() as f64 / t.len() as f64;
        assert!((density - t.len() as f64 / area * (1.0 - nu)).abs() < 1e-12);
    }

    #[test]
    fn type2_choice_is_uniform_among_candidates() {
        // Fix one tessellation and population; replay the selection seed and
        // count how often each candidate of a multiply-occupied cell wins.
        let t = tess(8);
        let pop = sample_ppp(3.0, t.pattern.window, Seed(9)).unwrap();
        let cell = (0..t.len())
            .max_by_key(|&i| pop.points.iter().filter(|p| locate_cell(&t, **p) == i).count())
            .unwrap();
        let cands: Vec<Point> = pop.points.iter().copied().filter(|p| locate_cell(&t, *p) == cell).collect();
        let k = cands.len();
        assert!(k >= 3);
        let reps = 20_000;
        let mut hits = vec![0usize; k];
        for r in 0..reps {
            let a = type2_users(Arc::clone(&t), &pop, Seed(100).realization(r)).unwrap();
            let u = a.entries[cell].user.unwrap();
            hits[cands.iter().position(|c| *c == u).unwrap()] += 1;
        }
        let p = 1.0 / k as f64;
        let sigma = (reps as f64 * p * (1.0 - p)).sqrt();
        for h in hits {
            assert!((h as f64 - reps as f64 * p).abs() < 3.0 * sigma + 1.0, "{h} vs {}", reps as f64 * p);
        }
    }

    #[test]
    fn interferers_exclude_the_served_user() {
        let t = tess(10);
        let a = type1_users(Arc::clone(&t), Seed(11));
        let inter = interferers_at_bs(&a, 3).unwrap();
        assert_eq!(inter.len(), t.len() - 1);
        let w = t.pattern.window;
        let own = w.wrap(w.displacement(t.nucleus(3), a.entries[3].user.unwrap()));
        assert!(!inter.points.contains(&own));
        assert!(interferers_at_bs(&a, t.len()).is_err());
    }

    #[test]
    fn thinning_leaves_cells_vacant() {
        let t = tess(12);
        let a = type1_users(Arc::clone(&t), Seed(13));
        let thin = a.thin(0.5, Seed(14)).unwrap();
        assert!(thin.n_active() < a.n_active());
        assert_eq!(thin.entries.len(), a.entries.len());
        assert!(a.thin(1.5, Seed(1)).is_err());
    }

    #[test]
    fn csv_marks_vacant_cells() {
        let t = tess(4);
        let pop = PointPattern::new(vec![], t.pattern.window, 0.0).unwrap();
        let a = type2_users(Arc::clone(&t), &pop, Seed(1)).unwrap();
        let csv = a.to_csv();
        assert_eq!(csv.lines().count(), t.len() + 1);
        assert!(csv.lines().nth(1).unwrap().contains(",,,1,") || csv.lines().nth(1).unwrap().contains(",,1,"));
    }
}
