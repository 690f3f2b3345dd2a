use serde::Serialize;

use super::models::{PcfFamily, PcfModel};
use crate::csv::{fmt_sig, CsvTable};
use crate::error::{domain, Result};
use crate::estimators::PcfEstimate;

const MIN_POINTS: usize = 10;
const MAX_ITER: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: PcfModel,
    pub sse: f64,
    /// Residual sum of squares at the starting parameters.
    pub initial_sse: f64,
    pub converged: bool,
    pub iterations: usize,
    pub n_points: usize,
    pub r_range: (f64, f64),
}

impl FitResult {
    pub const CSV_HEADER: [&'static str; 6] = ["family", "a", "b", "c", "sse", "converged"];

    pub fn csv_row(&self) -> Vec<String> {
        let p = self.model.params();
        let param = |i: usize| p.get(i).map_or_else(String::new, |v| fmt_sig(*v));
        vec![
            self.model.family().to_string(),
            param(0),
            param(1),
            param(2),
            fmt_sig(self.sse),
            u8::from(self.converged).to_string(),
        ]
    }

    pub fn to_table(fits: &[FitResult]) -> CsvTable {
        let mut t = CsvTable::new(&Self::CSV_HEADER);
        for f in fits {
            t.push_row(f.csv_row());
        }
        t
    }
}

/// Least-squares fit of `family` to the estimate on `r_range`, starting
/// from the published constants of that family.
pub fn fit_pcf(est: &PcfEstimate, family: PcfFamily, r_range: (f64, f64)) -> Result<FitResult> {
    fit_pcf_from(est, family.published(), r_range)
}

pub fn fit_pcf_from(est: &PcfEstimate, initial: PcfModel, r_range: (f64, f64)) -> Result<FitResult> {
    let (lo, hi) = r_range;
    let (rs, gs): (Vec<f64>, Vec<f64>) = est
        .r_grid
        .iter()
        .zip(&est.g_hat)
        .filter(|(r, g)| **r >= lo && **r <= hi && g.is_finite())
        .map(|(r, g)| (*r, *g))
        .unzip();
    let mut res = fit_curve(&rs, &gs, initial)?;
    res.r_range = r_range;
    Ok(res)
}

/// Levenberg–Marquardt on the log-parameters, so parameters stay positive.
/// Only improving steps are accepted, hence `sse <= initial_sse`.
pub fn fit_curve(rs: &[f64], gs: &[f64], initial: PcfModel) -> Result<FitResult> {
    initial.validate()?;
    if rs.len() != gs.len() {
        return domain("abscissae and values differ in length");
    }
    if rs.len() < MIN_POINTS {
        return domain(format!("fit needs at least {MIN_POINTS} points in range, got {}", rs.len()));
    }
    let family = initial.family();
    let sse_of = |theta: &[f64]| -> Option<f64> {
        let p: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
        let m = PcfModel::from_params(family, &p).ok()?;
        Some(rs.iter().zip(gs).map(|(r, g)| (g - m.value(*r)).powi(2)).sum())
    };
    let mut theta: Vec<f64> = initial.params().iter().map(|p| p.ln()).collect();
    let initial_sse = sse_of(&theta).expect("validated model");
    let mut sse = initial_sse;
    let n = theta.len();
    let mut converged = n == 0;
    let mut iterations = 0;
    let mut mu = 1e-3;

    while !converged && iterations < MAX_ITER {
        iterations += 1;
        let model = PcfModel::from_params(family, &theta.iter().map(|t| t.exp()).collect::<Vec<_>>())?;
        let resid: Vec<f64> = rs.iter().zip(gs).map(|(r, g)| g - model.value(*r)).collect();
        let jac = jacobian(family, &theta, rs);
        // normal equations: (JᵀJ + μ diag JᵀJ) δ = Jᵀ resid
        let mut jtj = vec![vec![0.0; n]; n];
        let mut jtr = vec![0.0; n];
        for (k, row) in jac.iter().enumerate() {
            for i in 0..n {
                jtr[i] += row[i] * resid[k];
                for j in 0..n {
                    jtj[i][j] += row[i] * row[j];
                }
            }
        }
        let grad_norm = jtr.iter().map(|v| v * v).sum::<f64>().sqrt();
        if grad_norm < 1e-14 * (1.0 + sse) {
            converged = true;
            break;
        }
        let mut improved = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[i][i] += mu * jtj[i][i].max(1e-12);
            }
            let Some(delta) = solve(a, jtr.clone()) else {
                mu *= 10.0;
                continue;
            };
            let cand: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + d).collect();
            match sse_of(&cand) {
                Some(s) if s < sse => {
                    let step = delta.iter().map(|d| d.abs()).fold(0.0, f64::max);
                    let rel = (sse - s) / sse.max(f64::MIN_POSITIVE);
                    theta = cand;
                    sse = s;
                    mu = (mu / 10.0).max(1e-12);
                    improved = true;
                    if step < 1e-12 || rel < 1e-14 {
                        converged = true;
                    }
                    break;
                }
                _ => mu *= 10.0,
            }
        }
        if !improved {
            // no descent direction left at machine precision
            converged = mu > 1e10 || grad_norm < 1e-8 * (1.0 + sse);
            break;
        }
    }
    let model = PcfModel::from_params(family, &theta.iter().map(|t| t.exp()).collect::<Vec<_>>())?;
    Ok(FitResult {
        model,
        sse,
        initial_sse,
        converged,
        iterations,
        n_points: rs.len(),
        r_range: (rs[0], rs[rs.len() - 1]),
    })
}

/// Residual Jacobian `∂g/∂θ` by central differences in log-parameters.
fn jacobian(family: PcfFamily, theta: &[f64], rs: &[f64]) -> Vec<Vec<f64>> {
    let n = theta.len();
    let h = 1e-6;
    let eval = |th: &[f64], r: f64| {
        let p: Vec<f64> = th.iter().map(|t| t.exp()).collect();
        PcfModel::from_params(family, &p).map_or(f64::NAN, |m| m.value(r))
    };
    rs.iter()
        .map(|&r| {
            (0..n)
                .map(|i| {
                    let mut up = theta.to_vec();
                    let mut dn = theta.to_vec();
                    up[i] += h;
                    dn[i] -= h;
                    (eval(&up, r) - eval(&dn, r)) / (2.0 * h)
                })
                .collect()
        })
        .collect()
}

/// Gaussian elimination with partial pivoting for the small normal system.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for (k, row) in lower.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[col + 1 + k] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
