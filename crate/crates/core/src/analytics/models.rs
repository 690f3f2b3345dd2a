use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PcfFamily {
    /// `1 - e^{-a r} + b r² e^{-c r²}`
    PrototypeUser,
    /// `1 - e^{-a r²} + b r² e^{-c r²}`
    PrototypeBs,
    /// `1 - e^{-a r}`
    Exponential,
    /// `1 - e^{-a r²}` (the rate `a` includes any factor π)
    ExponentialR2,
    /// β-Ginibre: `1 - e^{-π r²/β}`
    Ginibre,
    /// `1 - e^{-π r²}`, the lightly-loaded approximation
    SinghApprox,
}

impl PcfFamily {
    pub const ALL: [PcfFamily; 6] = [
        PcfFamily::PrototypeUser,
        PcfFamily::PrototypeBs,
        PcfFamily::Exponential,
        PcfFamily::ExponentialR2,
        PcfFamily::Ginibre,
        PcfFamily::SinghApprox,
    ];

    pub fn n_params(self) -> usize {
        match self {
            PcfFamily::PrototypeUser | PcfFamily::PrototypeBs => 3,
            PcfFamily::Exponential | PcfFamily::ExponentialR2 | PcfFamily::Ginibre => 1,
            PcfFamily::SinghApprox => 0,
        }
    }

    /// Exponent `k` in `g(r) = Θ(r^k)` as `r → 0`.
    pub fn small_r_order(self) -> f64 {
        match self {
            PcfFamily::PrototypeUser | PcfFamily::Exponential => 1.0,
            _ => 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PcfFamily::PrototypeUser => "PrototypeUser",
            PcfFamily::PrototypeBs => "PrototypeBS",
            PcfFamily::Exponential => "Exponential",
            PcfFamily::ExponentialR2 => "ExponentialR2",
            PcfFamily::Ginibre => "Ginibre",
            PcfFamily::SinghApprox => "SinghApprox",
        }
    }

    /// Published constants, used as fit starting points.
    pub fn published(self) -> PcfModel {
        match self {
            PcfFamily::PrototypeUser => PcfModel::USER_PROTOTYPE,
            PcfFamily::PrototypeBs => PcfModel::BS_PROTOTYPE,
            PcfFamily::Exponential => PcfModel::USER_EXPONENTIAL,
            PcfFamily::ExponentialR2 => PcfModel::BS_EXPONENTIAL,
            PcfFamily::Ginibre => PcfModel::GINIBRE,
            PcfFamily::SinghApprox => PcfModel::SinghApprox,
        }
    }
}

impl fmt::Display for PcfFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PcfFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PcfFamily::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown pcf family {s:?}")))
    }
}

/// A closed-form pair correlation function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PcfModel {
    PrototypeUser { a: f64, b: f64, c: f64 },
    PrototypeBs { a: f64, b: f64, c: f64 },
    Exponential { a: f64 },
    ExponentialR2 { a: f64 },
    Ginibre { beta: f64 },
    SinghApprox,
}

impl PcfModel {
    /// Fitted user prototype `(9/4, 1/2, 5/4)`.
    pub const USER_PROTOTYPE: PcfModel = PcfModel::PrototypeUser { a: 9.0 / 4.0, b: 0.5, c: 5.0 / 4.0 };
    /// Best single exponential for the user pcf, `1 - e^{-3r}`.
    pub const USER_EXPONENTIAL: PcfModel = PcfModel::Exponential { a: 3.0 };
    /// Fitted base-station prototype `(13/2, 2/7, 13/9)`.
    pub const BS_PROTOTYPE: PcfModel = PcfModel::PrototypeBs { a: 6.5, b: 2.0 / 7.0, c: 13.0 / 9.0 };
    /// Best exponential for the base-station pcf, `1 - e^{-12πr²/5}`.
    pub const BS_EXPONENTIAL: PcfModel = PcfModel::ExponentialR2 { a: 12.0 * PI / 5.0 };
    /// Small-distance analytical form `1 - e^{-14πr²/5}`.
    pub const BS_ANALYTICAL: PcfModel = PcfModel::ExponentialR2 { a: 14.0 * PI / 5.0 };
    /// β-Ginibre with `β = 5/12`.
    pub const GINIBRE: PcfModel = PcfModel::Ginibre { beta: 5.0 / 12.0 };

    pub fn family(&self) -> PcfFamily {
        match self {
            PcfModel::PrototypeUser { .. } => PcfFamily::PrototypeUser,
            PcfModel::PrototypeBs { .. } => PcfFamily::PrototypeBs,
            PcfModel::Exponential { .. } => PcfFamily::Exponential,
            PcfModel::ExponentialR2 { .. } => PcfFamily::ExponentialR2,
            PcfModel::Ginibre { .. } => PcfFamily::Ginibre,
            PcfModel::SinghApprox => PcfFamily::SinghApprox,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            PcfModel::PrototypeUser { a, b, c } | PcfModel::PrototypeBs { a, b, c } => vec![a, b, c],
            PcfModel::Exponential { a } | PcfModel::ExponentialR2 { a } => vec![a],
            PcfModel::Ginibre { beta } => vec![beta],
            PcfModel::SinghApprox => vec![],
        }
    }

    /// Builds a model from a family and its free parameters, checking
    /// positivity (and `β <= 1` for the Ginibre family).
    pub fn from_params(family: PcfFamily, p: &[f64]) -> Result<PcfModel> {
        if p.len() != family.n_params() {
            return domain(format!("{family} takes {} parameters, got {}", family.n_params(), p.len()));
        }
        if p.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return domain(format!("{family} parameters must be positive and finite, got {p:?}"));
        }
        Ok(match family {
            PcfFamily::PrototypeUser => PcfModel::PrototypeUser { a: p[0], b: p[1], c: p[2] },
            PcfFamily::PrototypeBs => PcfModel::PrototypeBs { a: p[0], b: p[1], c: p[2] },
            PcfFamily::Exponential => PcfModel::Exponential { a: p[0] },
            PcfFamily::ExponentialR2 => PcfModel::ExponentialR2 { a: p[0] },
            PcfFamily::Ginibre => {
                if p[0] > 1.0 {
                    return domain(format!("Ginibre beta must lie in (0,1], got {}", p[0]));
                }
                PcfModel::Ginibre { beta: p[0] }
            }
            PcfFamily::SinghApprox => PcfModel::SinghApprox,
        })
    }

    pub fn validate(&self) -> Result<()> {
        PcfModel::from_params(self.family(), &self.params()).map(|_| ())
    }

    /// Evaluation without argument checks.
    pub fn value(&self, r: f64) -> f64 {
        let r2 = r * r;
        match *self {
            PcfModel::PrototypeUser { a, b, c } => -(-a * r).exp_m1() + b * r2 * (-c * r2).exp(),
            PcfModel::PrototypeBs { a, b, c } => -(-a * r2).exp_m1() + b * r2 * (-c * r2).exp(),
            PcfModel::Exponential { a } => -(-a * r).exp_m1(),
            PcfModel::ExponentialR2 { a } => -(-a * r2).exp_m1(),
            PcfModel::Ginibre { beta } => -(-PI * r2 / beta).exp_m1(),
            PcfModel::SinghApprox => -(-PI * r2).exp_m1(),
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return domain(format!("pcf argument must be nonnegative, got {r}"));
        }
        self.validate()?;
        Ok(self.value(r))
    }

    /// Rate `a` of `1 - e^{-a π r²}` for the pure Gaussian-type families.
    pub fn gaussian_rate_over_pi(&self) -> Option<f64> {
        match *self {
            PcfModel::ExponentialR2 { a } => Some(a / PI),
            PcfModel::Ginibre { beta } => Some(1.0 / beta),
            PcfModel::SinghApprox => Some(1.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReplacementVariant {
    /// `λ g_p(r√λ)` with the fitted user prototype.
    UserFull,
    /// `λ (1 - e^{-3√λ r})`
    UserCoarse,
    /// `λ g_p,BS(r√λ)` with the fitted base-station prototype.
    BsFull,
    /// `λ (1 - e^{-(12/5)πλr²})`
    BsCoarse,
}

impl FromStr for ReplacementVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "userfull" => Ok(ReplacementVariant::UserFull),
            "usercoarse" => Ok(ReplacementVariant::UserCoarse),
            "bsfull" => Ok(ReplacementVariant::BsFull),
            "bscoarse" => Ok(ReplacementVariant::BsCoarse),
            _ => domain(format!("unknown replacement variant {s:?}")),
        }
    }
}

/// Intensity function `λ g(r√λ)` of the Poisson process that reproduces
/// the first moment measure seen from a typical user or base station.
pub fn ppp_replacement_intensity(r: f64, lambda: f64, variant: ReplacementVariant) -> Result<f64> {
    if !(r >= 0.0) {
        return domain(format!("distance must be nonnegative, got {r}"));
    }
    if !(lambda > 0.0) {
        return domain(format!("intensity must be positive, got {lambda}"));
    }
    let model = match variant {
        ReplacementVariant::UserFull => PcfModel::USER_PROTOTYPE,
        ReplacementVariant::UserCoarse => PcfModel::USER_EXPONENTIAL,
        ReplacementVariant::BsFull => PcfModel::BS_PROTOTYPE,
        ReplacementVariant::BsCoarse => PcfModel::BS_EXPONENTIAL,
    };
    Ok(lambda * model.value(r * lambda.sqrt()))
}
