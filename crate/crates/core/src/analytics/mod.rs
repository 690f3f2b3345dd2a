//! Closed-form approximations for the user processes and the tools that
//! compare them with simulation: pcf model families, the gamma cell-area
//! law, vacancy probability, distance densities, small-distance slope
//! constants, mean interference and least-squares fitting.

mod fit;
mod interference;
mod models;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, Result};
use crate::geometry::{disk_segment_area, mean_segment_area};
use crate::quadrature;

pub use fit::{fit_curve, fit_pcf, fit_pcf_from, FitResult};
pub use interference::{mean_interference, InterferenceResult, PcfSource};
pub use models::{ppp_replacement_intensity, PcfFamily, PcfModel, ReplacementVariant};

/// Shape (and rate) of the gamma approximation to the cell-area law.
pub const AREA_SHAPE: f64 = 3.5;

/// `γ^γ/Γ(γ) x^{γ-1} e^{-γx}` with `γ = 7/2`: unit-mean gamma density
/// approximating the area of the typical cell at unit intensity.
pub fn gamma_area_pdf(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("cell area must be positive, got {x}"));
    }
    let g = AREA_SHAPE;
    Ok((g * g.ln() - ln_gamma(g) + (g - 1.0) * x.ln() - g * x).exp())
}

/// `E(A^k)` under [`gamma_area_pdf`], for real `k > -γ`.
pub fn gamma_area_moment(k: f64) -> f64 {
    let g = AREA_SHAPE;
    (ln_gamma(g + k) - ln_gamma(g) - k * g.ln()).exp()
}

/// Fraction of vacant cells `(γ/(γ+η))^γ` for density ratio `η = λ₀/λ_P`.
pub fn vacancy_probability(eta: f64) -> Result<f64> {
    if !(eta >= 0.0) {
        return domain(format!("density ratio must be nonnegative, got {eta}"));
    }
    let g = AREA_SHAPE;
    Ok((g / (g + eta)).powf(g))
}

/// Mean area of the zero cell, `E(A²)/E(A)`, under the gamma law.
pub fn crofton_mean_area() -> f64 {
    gamma_area_moment(2.0) / gamma_area_moment(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeConstants {
    /// `E(4/sqrt(A))`: boundary-strip probability coefficient `P₁/r`.
    pub p1_coefficient: f64,
    /// Mean disk-segment area coefficient `(1/r³)∫₀^r S(v,r)dv = 2/3`.
    pub mean_segment_coefficient: f64,
    /// `E(1/A) = γ/(γ-1)`.
    pub mean_inv_area: f64,
    /// `P₂/r² = (2/3) E(1/A)`.
    pub p2_coefficient: f64,
    /// `K(r)/r³ ≈ P₁P₂/r³`.
    pub k_coefficient: f64,
    /// Slope of `g` at zero implied by the estimate, `3 K/(2π)`.
    pub g_slope_estimate: f64,
    /// Slope of the fitted prototype.
    pub g_slope_fitted: f64,
    /// `E(1/A_y)` for a cell whose nucleus is very close to a neighbor
    /// (gamma law with mean 1/2).
    pub mean_inv_area_close_pair: f64,
    /// `lim E S(R/2, r) / r⁴ = π²/2`.
    pub segment_nn_coefficient: f64,
    /// Coefficient of `r²` in `g_BS`.
    pub gbs_r2_coeff: f64,
    /// Slope of `g` at zero for users on the square lattice, `8/(2π)`.
    pub lattice_slope: f64,
}

/// Small-distance constants of both pair correlation functions, derived
/// from the gamma cell-area law.
pub fn slope_constants() -> SlopeConstants {
    let p1 = 4.0 * gamma_area_moment(-0.5);
    let seg = mean_segment_area(1.0).expect("unit radius");
    let inv = gamma_area_moment(-1.0);
    let p2 = seg * inv;
    let k = p1 * p2;
    let inv_close = 2.0 * inv;
    let seg_nn = 0.5 * PI * PI;
    let k_bs = seg_nn * inv_close;
    SlopeConstants {
        p1_coefficient: p1,
        mean_segment_coefficient: seg,
        mean_inv_area: inv,
        p2_coefficient: p2,
        k_coefficient: k,
        g_slope_estimate: 3.0 * k / (2.0 * PI),
        g_slope_fitted: 9.0 / 4.0,
        mean_inv_area_close_pair: inv_close,
        segment_nn_coefficient: seg_nn,
        gbs_r2_coeff: 4.0 * k_bs / (2.0 * PI),
        // K(r) ~ 4r · (2r²/3) for unit squares
        lattice_slope: 3.0 * (4.0 * seg) / (2.0 * PI),
    }
}

/// `E S(R/2, r)` for `R` Rayleigh-distributed at unit intensity,
/// `∫₀^{2r} S(u/2, r) 2πu e^{-πu²} du`, by quadrature.
pub fn expected_segment_area_nn(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    let f = |u: f64| disk_segment_area((0.5 * u).min(r), r).unwrap_or(0.0) * 2.0 * PI * u * (-PI * u * u).exp();
    Ok(quadrature::integrate(f, 0.0, 2.0 * r, 0.0, 1e-12).value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceLaw {
    /// Nearest user-to-user distance: `D²` gamma with shape 2 and scale `1/(5λ)`.
    NearestNeighborD,
    /// Link distance with the `13/10` rate correction.
    LinkDistanceR,
    /// Distance from a Poisson point to the nearest base station.
    RayleighStandard,
}

const LINK_CORRECTION: f64 = 13.0 / 10.0;

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return domain(format!("intensity must be positive, got {lambda}"));
    }
    Ok(())
}

/// Density of the named distance law at intensity `λ`.
pub fn distance_pdf(r: f64, kind: DistanceLaw, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(r >= 0.0) {
        return domain(format!("distance must be nonnegative, got {r}"));
    }
    let r2 = r * r;
    Ok(match kind {
        DistanceLaw::NearestNeighborD => 50.0 * lambda * lambda * r2 * r * (-5.0 * lambda * r2).exp(),
        DistanceLaw::LinkDistanceR => 2.0 * LINK_CORRECTION * PI * lambda * r * (-LINK_CORRECTION * lambda * PI * r2).exp(),
        DistanceLaw::RayleighStandard => 2.0 * PI * lambda * r * (-lambda * PI * r2).exp(),
    })
}

/// Distribution function matching [`distance_pdf`].
pub fn distance_cdf(r: f64, kind: DistanceLaw, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let r2 = r.max(0.0).powi(2);
    Ok(match kind {
        DistanceLaw::NearestNeighborD => {
            let t = 5.0 * lambda * r2;
            1.0 - (-t).exp() * (1.0 + t)
        }
        DistanceLaw::LinkDistanceR => -(-LINK_CORRECTION * lambda * PI * r2).exp_m1(),
        DistanceLaw::RayleighStandard => -(-lambda * PI * r2).exp_m1(),
    })
}

/// Mean of the named distance law.
pub fn distance_mean(kind: DistanceLaw, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(match kind {
        // E sqrt(X), X ~ Gamma(2, scale 1/(5λ))
        DistanceLaw::NearestNeighborD => gamma(2.5) / (5.0 * lambda).sqrt(),
        DistanceLaw::LinkDistanceR => 0.5 / (LINK_CORRECTION * lambda).sqrt(),
        DistanceLaw::RayleighStandard => 0.5 / lambda.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate_inf(f: impl Fn(f64) -> f64, upper: f64) -> f64 {
        quadrature::integrate(f, 0.0, upper, 1e-14, 1e-12).value
    }

    #[test]
    fn gamma_pdf_moments_by_quadrature() {
        let pdf = |x: f64| if x > 0.0 { gamma_area_pdf(x).unwrap() } else { 0.0 };
        assert!((integrate_inf(pdf, 40.0) - 1.0).abs() < 1e-8);
        assert!((integrate_inf(|x| x * pdf(x), 40.0) - 1.0).abs() < 1e-8);
        assert!((integrate_inf(|x| x * x * pdf(x), 40.0) - 9.0 / 7.0).abs() < 1e-8);
        assert!((integrate_inf(|x| if x > 0.0 { pdf(x) / x } else { 0.0 }, 40.0) - 7.0 / 5.0).abs() < 1e-8);
        assert!(gamma_area_pdf(0.0).is_err());
    }

    #[test]
    fn gamma_moments_closed_form() {
        assert!((gamma_area_moment(1.0) - 1.0).abs() < 1e-12);
        assert!((gamma_area_moment(-1.0) - 1.4).abs() < 1e-12);
        assert!((crofton_mean_area() - 9.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn vacancy_examples_and_shape() {
        assert_eq!(vacancy_probability(0.0).unwrap(), 1.0);
        assert!(vacancy_probability(1e9).unwrap() < 1e-20);
        assert!((vacancy_probability(1.0).unwrap() - (3.5f64 / 4.5).powf(3.5)).abs() < 1e-15);
        assert!((vacancy_probability(1.0).unwrap() - 0.41494).abs() < 1e-5);
        assert!(vacancy_probability(-0.1).is_err());
        // strictly decreasing and convex on [0, 100]
        let h = 1e-3;
        let mut eta = 0.0;
        while eta < 100.0 {
            let f = |e: f64| vacancy_probability(e).unwrap();
            assert!(f(eta + h) < f(eta));
            if eta >= h {
                assert!(f(eta + h) - 2.0 * f(eta) + f(eta - h) > 0.0, "eta {eta}");
            }
            eta += 0.25;
        }
    }

    #[test]
    fn slope_constant_chain() {
        let s = slope_constants();
        let p1_closed = 32.0 * 14f64.sqrt() / (15.0 * PI.sqrt());
        assert!((s.p1_coefficient - p1_closed).abs() < 1e-12);
        assert!((s.p1_coefficient - 4.50).abs() < 5e-3);
        assert!((s.p2_coefficient - 14.0 / 15.0).abs() < 1e-14);
        assert!((s.k_coefficient - 4.20).abs() < 5e-3);
        assert!((3.0 * 4.20 / (2.0 * PI) - 2.005).abs() < 1e-3);
        assert!((s.g_slope_estimate - 2.0).abs() < 0.01);
        assert_eq!(s.g_slope_fitted, 2.25);
        // the estimate is about 12% below the fitted slope
        assert!(((s.g_slope_fitted - s.g_slope_estimate) / s.g_slope_fitted - 0.12).abs() < 0.02);
        assert!((s.mean_inv_area_close_pair - 14.0 / 5.0).abs() < 1e-12);
        assert!((s.gbs_r2_coeff - 14.0 * PI / 5.0).abs() < 1e-12);
        assert!((s.gbs_r2_coeff - 8.8).abs() < 0.01);
        assert!((s.lattice_slope - 4.0 / PI).abs() < 1e-14);
        assert!((s.lattice_slope - 1.2732).abs() < 1e-4);
    }

    #[test]
    fn segment_nn_small_r_limit() {
        for r in [1e-3, 3e-3] {
            let ratio = expected_segment_area_nn(r).unwrap() / r.powi(4);
            assert!((ratio - 0.5 * PI * PI).abs() / (0.5 * PI * PI) < 1e-4, "{ratio}");
        }
        assert!(expected_segment_area_nn(0.0).is_err());
    }

    #[test]
    fn distance_laws_normalize_and_have_stated_means() {
        for kind in [DistanceLaw::NearestNeighborD, DistanceLaw::LinkDistanceR, DistanceLaw::RayleighStandard] {
            for lambda in [1.0, 3.0] {
                let pdf = |r: f64| distance_pdf(r, kind, lambda).unwrap();
                assert!((integrate_inf(pdf, 20.0) - 1.0).abs() < 1e-8, "{kind:?}");
                let m = integrate_inf(|r| r * pdf(r), 20.0);
                assert!((m - distance_mean(kind, lambda).unwrap()).abs() < 1e-8);
                let cdf_q = integrate_inf(pdf, 0.4);
                assert!((cdf_q - distance_cdf(0.4, kind, lambda).unwrap()).abs() < 1e-10);
            }
        }
        let md = distance_mean(DistanceLaw::NearestNeighborD, 1.0).unwrap();
        assert!((md - 0.594).abs() < 1e-3, "{md}");
        let mr = distance_mean(DistanceLaw::LinkDistanceR, 1.0).unwrap();
        assert!((mr - 0.5 / 1.3f64.sqrt()).abs() < 1e-15);
        assert!((mr - 0.43853).abs() < 1e-5);
        // E(D²) = 2/5 at unit intensity
        let ed2 = integrate_inf(|r| r * r * distance_pdf(r, DistanceLaw::NearestNeighborD, 1.0).unwrap(), 20.0);
        assert!((ed2 - 0.4).abs() < 1e-10);
        assert!(distance_pdf(1.0, DistanceLaw::RayleighStandard, 0.0).is_err());
    }
}
