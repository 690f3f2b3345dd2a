//! Bucket grid over a (periodic) window for nearest-neighbor and
//! fixed-radius queries.

use crate::geometry::{Point, Window};

#[derive(Debug, Clone)]
pub(crate) struct Grid {
    window: Window,
    nx: usize,
    ny: usize,
    cell_w: f64,
    cell_h: f64,
    // CSR layout: indices of bucket b are items[starts[b]..starts[b+1]]
    starts: Vec<u32>,
    items: Vec<u32>,
    points: Vec<Point>,
}

impl Grid {
    /// Builds a grid whose buckets hold about `per_cell` points on average.
    pub fn new(points: &[Point], window: Window, per_cell: f64) -> Grid {
        let n = points.len().max(1) as f64;
        let side = (per_cell * window.area() / n).sqrt();
        Self::with_cell_size(points, window, side)
    }

    pub fn with_cell_size(points: &[Point], window: Window, side: f64) -> Grid {
        let nx = ((window.width / side).floor() as usize).clamp(1, 4096);
        let ny = ((window.height / side).floor() as usize).clamp(1, 4096);
        let cell_w = window.width / nx as f64;
        let cell_h = window.height / ny as f64;
        let mut counts = vec![0u32; nx * ny + 1];
        let bucket_of = |p: &Point| {
            let i = ((p.x / cell_w) as usize).min(nx - 1);
            let j = ((p.y / cell_h) as usize).min(ny - 1);
            j * nx + i
        };
        for p in points {
            counts[bucket_of(p) + 1] += 1;
        }
        for b in 0..nx * ny {
            counts[b + 1] += counts[b];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; points.len()];
        for (k, p) in points.iter().enumerate() {
            let b = bucket_of(p);
            items[fill[b] as usize] = k as u32;
            fill[b] += 1;
        }
        Grid { window, nx, ny, cell_w, cell_h, starts: counts, items, points: points.to_vec() }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn min_cell_side(&self) -> f64 {
        self.cell_w.min(self.cell_h)
    }

    /// Largest ring radius that visits no bucket twice.
    pub fn max_ring(&self) -> usize {
        if self.window.periodic {
            (self.nx.min(self.ny) - 1) / 2
        } else {
            self.nx.max(self.ny)
        }
    }

    fn cell_of(&self, p: Point) -> (isize, isize) {
        let i = ((p.x / self.cell_w).floor() as isize).clamp(0, self.nx as isize - 1);
        let j = ((p.y / self.cell_h).floor() as isize).clamp(0, self.ny as isize - 1);
        (i, j)
    }

    fn bucket(&self, i: isize, j: isize) -> Option<&[u32]> {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let (i, j) = if self.window.periodic {
            (i.rem_euclid(nx), j.rem_euclid(ny))
        } else if i < 0 || j < 0 || i >= nx || j >= ny {
            return None;
        } else {
            (i, j)
        };
        let b = (j * nx + i) as usize;
        Some(&self.items[self.starts[b] as usize..self.starts[b + 1] as usize])
    }

    /// Calls `f` for every point index in the buckets at Chebyshev ring `k`
    /// around the bucket containing `p`.
    pub fn for_each_in_ring(&self, p: Point, k: usize, mut f: impl FnMut(usize)) {
        let (ci, cj) = self.cell_of(p);
        let k = k as isize;
        let mut visit = |i: isize, j: isize| {
            if let Some(b) = self.bucket(i, j) {
                b.iter().for_each(|&ix| f(ix as usize));
            }
        };
        if k == 0 {
            visit(ci, cj);
            return;
        }
        for di in -k..=k {
            visit(ci + di, cj - k);
            visit(ci + di, cj + k);
        }
        for dj in -k + 1..k {
            visit(ci - k, cj + dj);
            visit(ci + k, cj + dj);
        }
    }

    /// Nearest indexed point to `p` other than `exclude`; ties go to the
    /// lowest index.
    pub fn nearest(&self, p: Point, exclude: Option<usize>) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let consider = |ix: usize, best: &mut Option<(usize, f64)>| {
            if Some(ix) == exclude {
                return;
            }
            let d2 = self.window.displacement(p, self.points[ix]).norm_sq();
            match *best {
                Some((bi, bd)) if d2 > bd || (d2 == bd && ix > bi) => {}
                _ => *best = Some((ix, d2)),
            }
        };
        let side = self.min_cell_side();
        for k in 0..=self.max_ring() {
            self.for_each_in_ring(p, k, |ix| consider(ix, &mut best));
            if let Some((_, bd)) = best {
                let reach = k as f64 * side;
                if bd < reach * reach {
                    return best.map(|(i, d2)| (i, d2.sqrt()));
                }
            }
        }
        // rings exhausted: the answer may lie beyond the unique-ring range
        let mut best = None;
        for ix in 0..self.points.len() {
            consider(ix, &mut best);
        }
        best.map(|(i, d2)| (i, d2.sqrt()))
    }

    /// Calls `f(index, displacement)` for every point within `radius` of
    /// `p` (minimum-image displacement from `p`).
    pub fn for_each_within(&self, p: Point, radius: f64, mut f: impl FnMut(usize, Point)) {
        let r2 = radius * radius;
        let rings = (radius / self.min_cell_side()).ceil() as usize;
        if rings <= self.max_ring() {
            for k in 0..=rings {
                self.for_each_in_ring(p, k, |ix| {
                    let d = self.window.displacement(p, self.points[ix]);
                    if d.norm_sq() <= r2 {
                        f(ix, d);
                    }
                });
            }
        } else {
            for (ix, q) in self.points.iter().enumerate() {
                let d = self.window.displacement(p, *q);
                if d.norm_sq() <= r2 {
                    f(ix, d);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_ppp, Seed};

    #[test]
    fn nearest_matches_brute_force() {
        let w = Window::torus(12.0).unwrap();
        let pat = sample_ppp(1.0, w, Seed(9)).unwrap();
        let grid = Grid::new(&pat.points, w, 2.0);
        let probes = sample_ppp(3.0, w, Seed(10)).unwrap();
        for q in &probes.points {
            let (ix, d) = grid.nearest(*q, None).unwrap();
            let brute = pat
                .points
                .iter()
                .map(|p| w.displacement(*q, *p).norm())
                .fold(f64::INFINITY, f64::min);
            assert!((d - brute).abs() < 1e-12);
            assert!((w.displacement(*q, pat.points[ix]).norm() - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn within_matches_brute_force() {
        let w = Window::torus(10.0).unwrap();
        let pat = sample_ppp(2.0, w, Seed(1)).unwrap();
        let grid = Grid::with_cell_size(&pat.points, w, 1.3);
        for r in [0.5, 2.0, 4.9] {
            for q in pat.points.iter().take(20) {
                let mut got = Vec::new();
                grid.for_each_within(*q, r, |ix, _| got.push(ix));
                got.sort_unstable();
                let want: Vec<usize> = (0..pat.len())
                    .filter(|&ix| w.displacement(*q, pat.points[ix]).norm() <= r)
                    .collect();
                assert_eq!(got, want);
            }
        }
    }
}
