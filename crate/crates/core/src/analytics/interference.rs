use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::gamma;

use super::models::PcfModel;
use crate::error::{domain, Result};
use crate::estimators::PcfEstimate;
use crate::quadrature;

/// Radius beyond which a closed-form pcf is treated as 1.
const MODEL_CUTOFF: f64 = 20.0;
/// Number of leading grid points used to estimate the small-distance order
/// of an empirical pcf.
const ORDER_FIT_POINTS: usize = 6;

#[derive(Debug, Clone, Copy)]
pub enum PcfSource<'a> {
    Model(&'a PcfModel),
    Estimate(&'a PcfEstimate),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterferenceResult {
    pub alpha: f64,
    /// `2π ∫₀^∞ g(r) r^{1-α} dr`; infinite when the integral diverges at 0.
    pub value: f64,
    pub finite: bool,
    /// Small-distance order `k` of `g(r) = Θ(r^k)`; convergence needs `α < k + 2`.
    pub small_r_order: f64,
    /// `π^{α/2} a^{α/2-1} Γ(1-α/2)` for `g = 1 - e^{-aπr²}`, as written.
    pub closed_form: Option<f64>,
    /// Absolute value of `closed_form`.
    pub closed_form_magnitude: Option<f64>,
    /// Set when the literal closed form and the integral differ in sign.
    pub sign_disagrees: bool,
}

/// Mean interference `E I = 2π ∫₀^∞ g(r) r^{1-α} dr` from a unit-intensity
/// stationary process with pcf `g` and path loss `r^{-α}`, `α > 2`.
pub fn mean_interference(source: PcfSource<'_>, alpha: f64) -> Result<InterferenceResult> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return domain(format!("path-loss exponent must exceed 2, got {alpha}"));
    }
    let (value, order) = match source {
        PcfSource::Model(m) => {
            m.validate()?;
            let order = m.family().small_r_order();
            let value = if alpha < order + 2.0 { model_integral(m, alpha, order) } else { f64::INFINITY };
            (value, order)
        }
        PcfSource::Estimate(est) => estimate_integral(est, alpha)?,
    };
    let closed_form = match source {
        PcfSource::Model(m) => m.gaussian_rate_over_pi().map(|a| {
            PI.powf(alpha / 2.0) * a.powf(alpha / 2.0 - 1.0) * gamma(1.0 - alpha / 2.0)
        }),
        PcfSource::Estimate(_) => None,
    };
    let finite = value.is_finite();
    let sign_disagrees = finite && closed_form.is_some_and(|c| c.is_finite() && c.signum() != value.signum());
    Ok(InterferenceResult {
        alpha,
        value,
        finite,
        small_r_order: order,
        closed_form,
        closed_form_magnitude: closed_form.map(f64::abs),
        sign_disagrees,
    })
}

fn tail(from: f64, alpha: f64) -> f64 {
    2.0 * PI * from.powf(2.0 - alpha) / (alpha - 2.0)
}

fn model_integral(m: &PcfModel, alpha: f64, order: f64) -> f64 {
    // r = t^p makes the integrand bounded at t = 0 when g ~ r^order
    let p = (2.0 / (order + 2.0 - alpha)).ceil().max(1.0);
    let t_max = MODEL_CUTOFF.powf(1.0 / p);
    // g(r) r^{1-α} dr = (g(r)/r^k) p t^{p(k+2-α)-1} dt keeps every factor bounded
    let expo = p * (order + 2.0 - alpha) - 1.0;
    let f = |t: f64| {
        let r = t.powf(p).max(1e-100);
        m.value(r) / r.powf(order) * p * t.powf(expo)
    };
    let body = quadrature::integrate(f, 0.0, t_max, 1e-13, 1e-11).value;
    2.0 * PI * body + tail(MODEL_CUTOFF, alpha)
}

/// Least-squares slope of `log g` against `log r` over the leading points.
fn estimate_order(est: &PcfEstimate) -> Result<f64> {
    let pts: Vec<(f64, f64)> = est
        .r_grid
        .iter()
        .zip(&est.g_hat)
        .take(ORDER_FIT_POINTS)
        .filter(|(_, g)| **g > 0.0)
        .map(|(r, g)| (r.ln(), g.ln()))
        .collect();
    if pts.len() < 2 {
        return domain("too few positive pcf values near zero to estimate the small-distance order");
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Piecewise-linear interpolation on the grid, a power law `g(r₀)(r/r₀)^k`
/// below the first grid point and `g ≡ 1` beyond the last.
fn estimate_integral(est: &PcfEstimate, alpha: f64) -> Result<(f64, f64)> {
    if est.r_grid.len() < 2 || est.r_grid.len() != est.g_hat.len() {
        return domain("pcf estimate needs at least two grid points");
    }
    let order = estimate_order(est)?;
    if alpha >= order + 2.0 {
        return Ok((f64::INFINITY, order));
    }
    let r0 = est.r_grid[0];
    let g0 = est.g_hat[0].max(0.0);
    let mut total = g0 * r0.powf(2.0 - alpha) / (order + 2.0 - alpha);
    for w in est.r_grid.windows(2).zip(est.g_hat.windows(2)) {
        let ([ra, rb], [ga, gb]) = (w.0, w.1) else { unreachable!() };
        let (ra, rb, ga, gb) = (*ra, *rb, *ga, *gb);
        let seg = |r: f64| (ga + (gb - ga) * (r - ra) / (rb - ra)) * r.powf(1.0 - alpha);
        total += quadrature::integrate(seg, ra, rb, 1e-14, 1e-12).value;
    }
    let last = *est.r_grid.last().expect("nonempty grid");
    Ok((2.0 * PI * total + tail(last, alpha), order))
}
