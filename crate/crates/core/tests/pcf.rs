//! Calibration of the pair correlation estimators against processes whose
//! pcf is known exactly.

use std::f64::consts::PI;
use std::sync::Arc;

use cellpp::estimators::{default_bandwidth, default_r_grid, estimate_pcf, estimate_pcf_bs, estimate_pcf_cross, linear_grid, PcfEstimate};
use cellpp::sampling::{sample_ppp, sample_square_lattice, stream, PointPattern, Seed};
use cellpp::{build_voronoi, type1_users, Execution, UserAssignment, Window};

fn ppp_patterns(n: usize, master: u64) -> Vec<PointPattern> {
    let w = Window::torus(20.0).unwrap();
    (0..n).map(|i| sample_ppp(1.0, w, Seed(master).realization(i)).unwrap()).collect()
}

fn type1(n: usize, lattice: bool, master: u64) -> Vec<UserAssignment> {
    let w = Window::torus(20.0).unwrap();
    (0..n)
        .map(|i| {
            let seed = Seed(master).realization(i);
            let bs = if lattice {
                sample_square_lattice(1.0, w, seed.derive(stream::BASE_STATIONS)).unwrap()
            } else {
                sample_ppp(1.0, w, seed.derive(stream::BASE_STATIONS)).unwrap()
            };
            type1_users(Arc::new(build_voronoi(&bs).unwrap()), seed.derive(stream::USERS))
        })
        .collect()
}

fn max_dev_from_one(est: &PcfEstimate, lo: f64, hi: f64) -> f64 {
    est.max_deviation(lo, hi, |_| 1.0)
}

#[test]
fn poisson_pattern_has_unit_pcf() {
    let pats = ppp_patterns(200, 1);
    let est = estimate_pcf(&pats, &linear_grid(0.1, 2.0, 0.05), 0.1, Execution::Parallel).unwrap();
    let dev = max_dev_from_one(&est, 0.1, 2.0);
    assert!(dev < 0.05, "{dev}");
}

#[test]
fn independent_users_have_unit_cross_pcf() {
    let bs = ppp_patterns(200, 2);
    let users = ppp_patterns(200, 3);
    let pairs: Vec<_> = bs.into_iter().zip(users).collect();
    let est = estimate_pcf_cross(&pairs, &linear_grid(0.1, 3.0, 0.05), 0.1, Execution::Parallel).unwrap();
    let dev = max_dev_from_one(&est, 0.1, 3.0);
    assert!(dev < 0.05, "{dev}");
}

/// Ring average of the exact lattice type I pcf `(4r - r²)/π`, `r <= 1`.
fn lattice_ring_average(r: f64, h: f64) -> f64 {
    let (a, b) = ((r - 0.5 * h).max(0.0), r + 0.5 * h);
    let prim = |s: f64| 2.0 * (4.0 / 3.0 * s.powi(3) - 0.25 * s.powi(4));
    (prim(b) - prim(a)) / (PI * (b * b - a * a))
}

#[test]
fn lattice_users_match_exact_pcf() {
    let h = 0.04;
    let assign = type1(300, true, 4);
    let pats: Vec<_> = assign.iter().map(|a| a.users_pattern()).collect();
    let est = estimate_pcf(&pats, &linear_grid(0.04, 0.96, 0.02), h, Execution::Parallel).unwrap();
    for (r, g) in est.r_grid.iter().zip(&est.g_hat) {
        let exact = lattice_ring_average(*r, h);
        assert!((g - exact).abs() < 0.03, "r {r}: {g} vs {exact}");
    }
}

#[test]
fn k_function_agrees_with_integrated_pcf() {
    let assign = type1(100, false, 5);
    let pats: Vec<_> = assign.iter().map(|a| a.users_pattern()).collect();
    let h = default_bandwidth(1.0);
    let est = estimate_pcf(&pats, &default_r_grid(1.0), h, Execution::Parallel).unwrap();
    // trapezoid of 2πs ĝ(s) from 0, with ĝ(0) = 0
    let mut integral = 0.0;
    let (mut prev_r, mut prev_f) = (0.0, 0.0);
    for (k, (r, g)) in est.r_grid.iter().zip(&est.g_hat).enumerate() {
        let f = 2.0 * PI * r * g;
        integral += 0.5 * (f + prev_f) * (r - prev_r);
        (prev_r, prev_f) = (*r, f);
        if *r >= 5.0 * h {
            let rel = (est.k_hat[k] - integral).abs() / est.k_hat[k];
            assert!(rel < 0.02, "r {r}: K {} vs {integral}", est.k_hat[k]);
        }
    }
}

#[test]
fn pcf_is_invariant_under_independent_thinning() {
    let assign = type1(200, false, 6);
    let thinned: Vec<_> = assign.iter().enumerate().map(|(i, a)| a.thin(0.5, Seed(60).realization(i)).unwrap()).collect();
    let grid = linear_grid(0.1, 3.0, 0.05);
    let full = estimate_pcf(&assign.iter().map(|a| a.users_pattern()).collect::<Vec<_>>(), &grid, 0.1, Execution::Parallel).unwrap();
    let half = estimate_pcf(&thinned.iter().map(|a| a.users_pattern()).collect::<Vec<_>>(), &grid, 0.1, Execution::Parallel).unwrap();
    let dev = half.max_deviation(0.1, 3.0, |r| full.g_at(r));
    assert!(dev < 0.05, "user pcf {dev}");
    let full_bs = estimate_pcf_bs(&assign, &grid, 0.1, Execution::Parallel).unwrap();
    let half_bs = estimate_pcf_bs(&thinned, &grid, 0.1, Execution::Parallel).unwrap();
    let dev = half_bs.max_deviation(0.1, 3.0, |r| full_bs.g_at(r));
    assert!(dev < 0.05, "bs pcf {dev}");
}
