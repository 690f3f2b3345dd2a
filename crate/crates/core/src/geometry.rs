//! Planar primitives: points, periodic windows, convex polygons and the
//! disk-segment area used by the small-distance analysis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quadrature;

/// Tolerance for convexity and containment tests.
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(&self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(&self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dist(&self, other: Point) -> f64 {
        (*self - other).norm()
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Rectangular observation window `[0, width) x [0, height)`, optionally a torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub width: f64,
    pub height: f64,
    pub periodic: bool,
}

impl Window {
    pub fn new(width: f64, height: f64, periodic: bool) -> Result<Self> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return domain(format!("window sides must be positive, got {width} x {height}"));
        }
        Ok(Window { width, height, periodic })
    }

    /// Square torus of side `side`.
    pub fn torus(side: f64) -> Result<Self> {
        Self::new(side, side, true)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x < self.width && p.y >= 0.0 && p.y < self.height
    }

    /// Maps a point back into the window (identity on non-periodic windows).
    pub fn wrap(&self, p: Point) -> Point {
        if !self.periodic {
            return p;
        }
        let mut x = p.x.rem_euclid(self.width);
        let mut y = p.y.rem_euclid(self.height);
        // rem_euclid can round up to the modulus itself
        if x >= self.width {
            x = 0.0;
        }
        if y >= self.height {
            y = 0.0;
        }
        Point::new(x, y)
    }

    /// Displacement `q - p`, taking the shortest image when periodic.
    pub fn displacement(&self, p: Point, q: Point) -> Point {
        let mut dx = q.x - p.x;
        let mut dy = q.y - p.y;
        if self.periodic {
            dx -= self.width * (dx / self.width).round();
            dy -= self.height * (dy / self.height).round();
        }
        Point::new(dx, dy)
    }

    /// Largest distance attainable between two points of a periodic window.
    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.width.hypot(self.height)
    }
}

/// Distance between `p` and `q`, with wraparound when `w` is periodic.
pub fn torus_distance(p: Point, q: Point, w: &Window) -> f64 {
    w.displacement(p, q).norm()
}

/// Area of the disk segment `b((-v,0), r) ∩ {x > 0}`, i.e. the part of a
/// disk of radius `r` cut off by a chord at distance `v` from its center.
pub fn disk_segment_area(v: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("segment radius must be positive, got {r}"));
    }
    if !(0.0..=r).contains(&v) {
        return domain(format!("chord distance {v} outside [0, {r}]"));
    }
    Ok(segment_unchecked(v, r))
}

fn segment_unchecked(v: f64, r: f64) -> f64 {
    let t = (v / r).clamp(-1.0, 1.0);
    (r * r * t.acos() - v * (r * r - v * v).max(0.0).sqrt()).max(0.0)
}

/// Average of `S(v, r)` over `v` uniform in `[0, r]`, which is `2r²/3`.
pub fn mean_segment_area(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("radius must be positive, got {r}"));
    }
    Ok(2.0 * r * r / 3.0)
}

/// Same average as [`mean_segment_area`], computed by adaptive quadrature.
pub fn mean_segment_area_quadrature(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("radius must be positive, got {r}"));
    }
    let q = quadrature::integrate(|v| segment_unchecked(v, r), 0.0, r, 1e-14, 1e-13);
    Ok(q.value / r)
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return domain(format!("polygon needs at least 3 vertices, got {}", vertices.len()));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return domain("polygon has non-finite vertex");
        }
        let poly = ConvexPolygon { vertices };
        if !(poly.area() > GEOM_TOL) {
            return domain("polygon is degenerate or clockwise");
        }
        let n = poly.vertices.len();
        for i in 0..n {
            let a = poly.vertices[i];
            let b = poly.vertices[(i + 1) % n];
            let c = poly.vertices[(i + 2) % n];
            if (b - a).cross(c - b) < -GEOM_TOL {
                return domain("polygon is not convex");
            }
        }
        Ok(poly)
    }

    pub(crate) fn from_trusted(vertices: Vec<Point>) -> Self {
        ConvexPolygon { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Signed shoelace area (positive for counter-clockwise order).
    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn centroid(&self) -> Point {
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut a2 = 0.0;
        for (p, q) in self.edges() {
            let w = p.cross(q);
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
            a2 += w;
        }
        Point::new(cx / (3.0 * a2), cy / (3.0 * a2))
    }

    /// Containment with tolerance; boundary points count as inside.
    pub fn contains(&self, p: Point) -> bool {
        self.edges().all(|(a, b)| (b - a).cross(p - a) >= -GEOM_TOL * (b - a).norm().max(1.0))
    }

    /// Distance from `p` to the nearest edge together with that edge's index.
    pub(crate) fn nearest_edge(&self, p: Point) -> (f64, usize) {
        self.edges()
            .enumerate()
            .map(|(i, (a, b))| (point_segment_distance(p, a, b), i))
            .min_by(|x, y| x.0.total_cmp(&y.0))
            .expect("polygon has edges")
    }
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Shoelace area and perimeter of a convex polygon.
pub fn polygon_area_perimeter(poly: &ConvexPolygon) -> Result<(f64, f64)> {
    let area = poly.area();
    if !(area > 0.0) {
        return domain("degenerate polygon");
    }
    Ok((area, poly.perimeter()))
}

/// Distance from an interior point to the polygon boundary.
pub fn distance_to_boundary(p: Point, poly: &ConvexPolygon) -> Result<f64> {
    if !poly.contains(p) {
        return domain(format!("point ({}, {}) is outside the polygon", p.x, p.y));
    }
    Ok(poly.nearest_edge(p).0)
}

/// Area of a half-disk; upper bound of `S(v, r)`.
pub fn half_disk_area(r: f64) -> f64 {
    0.5 * PI * r * r
}
