//! Periodic Voronoi tessellation and the cell-level quantities used by the
//! small-distance analysis (boundary distances, neighbors, nucleus
//! nearest-neighbor distances).
//!
//! Each cell is built independently by clipping a bounding square with the
//! bisectors of nearby nuclei, taken under the minimum-image convention.
//! This is the central copy of the Euclidean diagram of the 3x3 tiled
//! pattern as long as every cell stays well inside a quarter window, which
//! the minimum side `10/sqrt(λ)` guarantees in practice; any cell that
//! fails to close is reported as a configuration error.

use std::fmt::Write as _;

use crate::error::{config, domain, Error, Result};
use crate::geometry::{ConvexPolygon, Point, GEOM_TOL};
use crate::grid::Grid;
use crate::sampling::PointPattern;

/// Minimum window side in units of the mean nucleus spacing `1/sqrt(λ)`.
pub const MIN_SIDE_IN_SPACINGS: f64 = 10.0;

const NO_NEIGHBOR: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub nucleus_index: usize,
    /// Vertices in the plane around the nucleus (not wrapped), so the polygon
    /// is convex even when it straddles the window edge.
    pub polygon: ConvexPolygon,
    pub area: f64,
    pub perimeter: f64,
    /// Sorted indices of cells sharing an edge of positive length.
    pub neighbor_indices: Vec<usize>,
    // neighbor across edge k (vertex k to k+1)
    edge_neighbors: Vec<usize>,
}

impl Cell {
    /// Neighbor across edge `k` of the polygon.
    pub fn edge_neighbor(&self, k: usize) -> Option<usize> {
        self.edge_neighbors.get(k).copied().filter(|&j| j != NO_NEIGHBOR)
    }
}

#[derive(Debug, Clone)]
pub struct Tessellation {
    pub cells: Vec<Cell>,
    pub pattern: PointPattern,
    grid: Grid,
}

impl Tessellation {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn nucleus(&self, index: usize) -> Point {
        self.pattern.points[index]
    }

    pub fn areas(&self) -> impl Iterator<Item = f64> + '_ {
        self.cells.iter().map(|c| c.area)
    }

    /// Unwraps `p` to the image closest to the nucleus of `cell_index`.
    pub fn unwrap_near(&self, cell_index: usize, p: Point) -> Point {
        let nucleus = self.nucleus(cell_index);
        nucleus + self.pattern.window.displacement(nucleus, p)
    }
}

#[derive(Clone, Copy)]
struct Vertex {
    p: Point,
    // label of the edge starting at this vertex
    edge: usize,
}

/// Clips the polygon (relative to the nucleus at the origin) by the half
/// plane `{x : x·d <= |d|²/2}` of the bisector with a neighbor at `d`.
fn clip(poly: &[Vertex], d: Point, label: usize, out: &mut Vec<Vertex>) -> bool {
    let c = 0.5 * d.norm_sq();
    let slack = 1e-12 * d.norm_sq();
    let side = |p: Point| p.dot(d) - c;
    if poly.iter().all(|v| side(v.p) <= slack) {
        return false;
    }
    out.clear();
    let n = poly.len();
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let (sa, sb) = (side(a.p), side(b.p));
        let a_in = sa <= slack;
        let b_in = sb <= slack;
        let cut = || {
            let t = (sa / (sa - sb)).clamp(0.0, 1.0);
            a.p + (b.p - a.p) * t
        };
        match (a_in, b_in) {
            (true, true) => out.push(a),
            (true, false) => {
                out.push(a);
                out.push(Vertex { p: cut(), edge: label });
            }
            (false, true) => out.push(Vertex { p: cut(), edge: a.edge }),
            (false, false) => {}
        }
    }
    true
}

/// Drops vertices that coincide with their successor within `tol`, keeping
/// the label of the surviving (positive-length) edge.
fn merge_close(poly: &mut Vec<Vertex>, tol: f64) {
    let mut k = 0;
    while poly.len() > 3 && k < poly.len() {
        let next = (k + 1) % poly.len();
        if poly[k].p.dist(poly[next].p) < tol {
            let keep_edge = poly[next].edge;
            poly[k].edge = keep_edge;
            poly.remove(next);
            if next < k {
                k -= 1;
            }
        } else {
            k += 1;
        }
    }
}

fn build_cell(pattern: &PointPattern, grid: &Grid, index: usize, edge_tol: f64) -> Result<Cell> {
    let w = pattern.window;
    let nucleus = pattern.points[index];
    let half = 0.5 * w.width.min(w.height);
    let mut poly: Vec<Vertex> = [(-half, -half), (half, -half), (half, half), (-half, half)]
        .iter()
        .map(|&(x, y)| Vertex { p: Point::new(x, y), edge: NO_NEIGHBOR })
        .collect();
    let mut scratch = Vec::with_capacity(16);
    let side = grid.min_cell_side();
    let mut duplicate = None;
    let mut closed = false;
    for k in 0..=grid.max_ring() {
        grid.for_each_in_ring(nucleus, k, |j| {
            if j == index {
                return;
            }
            let d = w.displacement(nucleus, grid.points()[j]);
            if d.norm_sq() == 0.0 {
                duplicate = Some(j);
                return;
            }
            if clip(&poly, d, j, &mut scratch) {
                std::mem::swap(&mut poly, &mut scratch);
                merge_close(&mut poly, edge_tol);
            }
        });
        if let Some(j) = duplicate {
            return domain(format!("duplicate points {index} and {j}"));
        }
        let reach = poly.iter().map(|v| v.p.norm()).fold(0.0, f64::max);
        // unvisited nuclei are at least k*side away; their bisectors miss the cell
        if k as f64 * side >= 2.0 * reach {
            closed = true;
            break;
        }
    }
    if !closed || poly.iter().any(|v| v.edge == NO_NEIGHBOR) {
        return config(format!(
            "cell {index} does not close inside the window; the window is too small for the pattern"
        ));
    }

    let vertices: Vec<Point> = poly.iter().map(|v| nucleus + v.p).collect();
    let polygon = ConvexPolygon::from_trusted(vertices);
    let edge_neighbors: Vec<usize> = poly.iter().map(|v| v.edge).collect();
    let mut neighbor_indices: Vec<usize> = polygon
        .edges()
        .zip(&edge_neighbors)
        .filter(|((a, b), _)| a.dist(*b) >= edge_tol)
        .map(|(_, &j)| j)
        .collect();
    neighbor_indices.sort_unstable();
    neighbor_indices.dedup();
    let area = polygon.area();
    let perimeter = polygon.perimeter();
    if !(area > 0.0) {
        return Err(Error::Domain(format!("cell {index} is degenerate")));
    }
    Ok(Cell { nucleus_index: index, polygon, area, perimeter, neighbor_indices, edge_neighbors })
}

/// Periodic Voronoi tessellation of `pattern`.
pub fn build_voronoi(pattern: &PointPattern) -> Result<Tessellation> {
    let w = pattern.window;
    if !w.periodic {
        return config("tessellation requires a periodic window");
    }
    let n = pattern.len();
    if n < 3 {
        return config(format!("tessellation needs at least 3 points, got {n}"));
    }
    let lambda = if pattern.nominal_intensity > 0.0 { pattern.nominal_intensity } else { pattern.realized_intensity() };
    let min_side = MIN_SIDE_IN_SPACINGS / lambda.sqrt();
    if w.width.min(w.height) < min_side * (1.0 - 1e-9) {
        return config(format!(
            "window side {} is below the minimum {min_side} for intensity {lambda}",
            w.width.min(w.height)
        ));
    }
    let grid = Grid::new(&pattern.points, w, 1.0);
    let spacing = (w.area() / n as f64).sqrt();
    let edge_tol = GEOM_TOL * spacing;
    let cells = (0..n).map(|i| build_cell(pattern, &grid, i, edge_tol)).collect::<Result<Vec<_>>>()?;

    let total: f64 = cells.iter().map(|c| c.area).sum();
    if (total - w.area()).abs() > 1e-6 * w.area() {
        return config(format!("cell areas sum to {total}, window area is {}", w.area()));
    }
    Ok(Tessellation { cells, pattern: pattern.clone(), grid })
}

/// Index of the cell containing `p`: the nearest nucleus under the torus
/// metric, ties broken by lowest index.
pub fn locate_cell(tess: &Tessellation, p: Point) -> usize {
    tess.grid.nearest(tess.pattern.window.wrap(p), None).expect("tessellation has nuclei").0
}

/// Distance from `p` to the boundary of cell `cell_index`, and the cell on
/// the other side of the nearest edge.
pub fn boundary_distance(tess: &Tessellation, cell_index: usize, p: Point) -> Result<(f64, usize)> {
    let cell = tess
        .cells
        .get(cell_index)
        .ok_or_else(|| Error::Domain(format!("no cell with index {cell_index}")))?;
    let q = tess.unwrap_near(cell_index, p);
    if !cell.polygon.contains(q) {
        return domain(format!("point ({}, {}) is not in cell {cell_index}", p.x, p.y));
    }
    let (d, edge) = cell.polygon.nearest_edge(q);
    let neighbor = cell
        .edge_neighbor(edge)
        .ok_or_else(|| Error::Domain(format!("edge {edge} of cell {cell_index} has no neighbor")))?;
    Ok((d, neighbor))
}

/// Torus distance from every nucleus to its nearest other nucleus.
pub fn nucleus_nn_distances(tess: &Tessellation) -> Vec<f64> {
    tess.pattern
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| tess.grid.nearest(*p, Some(i)).map_or(f64::INFINITY, |(_, d)| d))
        .collect()
}

/// Debug dump: `nucleus_x,nucleus_y,area,perimeter,n_neighbors`.
pub fn cells_csv(tess: &Tessellation) -> String {
    let mut out = String::from("nucleus_x,nucleus_y,area,perimeter,n_neighbors\n");
    for c in &tess.cells {
        let p = tess.nucleus(c.nucleus_index);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            crate::csv::fmt_sig(p.x),
            crate::csv::fmt_sig(p.y),
            crate::csv::fmt_sig(c.area),
            crate::csv::fmt_sig(c.perimeter),
            c.neighbor_indices.len()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use crate::sampling::{sample_ppp, sample_square_lattice, Seed};

    #[test]
    fn lattice_cells_are_unit_squares() {
        let pat = sample_square_lattice(1.0, Window::torus(10.0).unwrap(), Seed(3)).unwrap();
        let tess = build_voronoi(&pat).unwrap();
        assert_eq!(tess.len(), 100);
        for c in &tess.cells {
            assert!((c.area - 1.0).abs() < 1e-9, "area {}", c.area);
            assert!((c.perimeter - 4.0).abs() < 1e-9);
            assert_eq!(c.neighbor_indices.len(), 4, "{:?}", c.neighbor_indices);
        }
    }

    #[test]
    fn ppp_cells_partition_the_window() {
        let pat = sample_ppp(1.0, Window::torus(20.0).unwrap(), Seed(1)).unwrap();
        let tess = build_voronoi(&pat).unwrap();
        let total: f64 = tess.areas().sum();
        assert!((total - 400.0).abs() < 1e-6 * 400.0);
        for c in &tess.cells {
            assert!((c.area - c.polygon.area()).abs() < 1e-9);
            for &j in &c.neighbor_indices {
                assert!(tess.cells[j].neighbor_indices.contains(&c.nucleus_index), "asymmetric {} {j}", c.nucleus_index);
            }
            assert!(ConvexPolygon::new(c.polygon.vertices().to_vec()).is_ok());
        }
    }

    #[test]
    fn rejects_small_inputs() {
        let w = Window::torus(20.0).unwrap();
        let two = PointPattern::new(vec![Point::new(1.0, 1.0), Point::new(2.0, 2.0)], w, 0.005).unwrap();
        assert!(matches!(build_voronoi(&two), Err(Error::Config(_))));
        let open = sample_ppp(1.0, Window::new(20.0, 20.0, false).unwrap(), Seed(1)).unwrap();
        assert!(matches!(build_voronoi(&open), Err(Error::Config(_))));
        let small = sample_ppp(1.0, Window::torus(8.0).unwrap(), Seed(1)).unwrap();
        assert!(matches!(build_voronoi(&small), Err(Error::Config(_))));
    }

    #[test]
    fn duplicates_are_domain_errors() {
        let w = Window::torus(10.0).unwrap();
        let mut pat = sample_ppp(1.0, w, Seed(4)).unwrap();
        let p = pat.points[0];
        pat.points.push(p);
        assert!(matches!(build_voronoi(&pat), Err(Error::Domain(_))));
    }

    #[test]
    fn locate_own_nucleus_and_lattice_center() {
        let pat = sample_ppp(1.0, Window::torus(12.0).unwrap(), Seed(2)).unwrap();
        let tess = build_voronoi(&pat).unwrap();
        for (i, p) in pat.points.iter().enumerate() {
            assert_eq!(locate_cell(&tess, *p), i);
        }
        let lat = sample_square_lattice(1.0, Window::torus(10.0).unwrap(), Seed(5)).unwrap();
        let lt = build_voronoi(&lat).unwrap();
        for (i, c) in lt.cells.iter().enumerate() {
            assert_eq!(locate_cell(&lt, lt.pattern.window.wrap(c.polygon.centroid())), i);
        }
    }

    #[test]
    fn lattice_boundary_distance() {
        let lat = sample_square_lattice(1.0, Window::torus(10.0).unwrap(), Seed(5)).unwrap();
        let tess = build_voronoi(&lat).unwrap();
        let c = &tess.cells[17];
        let center = tess.nucleus(17);
        let (d, nb) = boundary_distance(&tess, 17, center).unwrap();
        assert!((d - 0.5).abs() < 1e-9);
        assert!(c.neighbor_indices.contains(&nb));
        let v = c.polygon.vertices();
        let mid = tess.pattern.window.wrap((v[0] + v[1]) * 0.5);
        assert!(boundary_distance(&tess, 17, mid).unwrap().0 < 1e-9);
        let far = tess.pattern.window.wrap(center + Point::new(2.0, 0.0));
        assert!(boundary_distance(&tess, 17, far).is_err());
        assert!(boundary_distance(&tess, 1000, center).is_err());
    }

    #[test]
    fn lattice_nn_distances() {
        let lat = sample_square_lattice(1.0, Window::torus(10.0).unwrap(), Seed(5)).unwrap();
        let tess = build_voronoi(&lat).unwrap();
        assert!(nucleus_nn_distances(&tess).iter().all(|d| (d - 1.0).abs() < 1e-9));
    }

    #[test]
    fn csv_dump_has_one_row_per_cell() {
        let lat = sample_square_lattice(1.0, Window::torus(10.0).unwrap(), Seed(5)).unwrap();
        let tess = build_voronoi(&lat).unwrap();
        let csv = cells_csv(&tess);
        assert_eq!(csv.lines().count(), 101);
        assert!(csv.starts_with("nucleus_x,nucleus_y,area,perimeter,n_neighbors\n"));
    }
}
