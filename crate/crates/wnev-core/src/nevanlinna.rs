//! Nevanlinna functionals m, N, n, T on circles, first-fundamental-theorem
//! residuals, and the logarithmic Wilson difference proximity.

use crate::divisor::DivisorStream;
use crate::error::{Error, Result};
use crate::fit::{growth_exponent_with_band, ols_slope};
use crate::lattice::sqrt_with_cut;
use crate::logval::{log_sub, LogVal};
use crate::model::MeromorphicModel;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CharacteristicRow {
    pub r: f64,
    pub m: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub quadrature_error: f64,
}

/// Default proximity tolerance: absolute below r = 1e3, relative above.
pub fn default_tol(r: f64) -> f64 {
    if r <= 1e3 {
        1e-8
    } else {
        1e-6 * r
    }
}

/// Mean over the circle |x| = r of a sampled integrand; samples returning
/// None (poles, undefined strips) are excluded. Panel count doubles until
/// two successive estimates agree within tol.
fn circle_average<F>(integrand: &F, r: f64, tol: f64) -> (f64, f64)
where
    F: Fn(Complex64) -> Option<f64> + Sync,
{
    let mut n = 1024usize;
    let mut prev = f64::INFINITY;
    loop {
        let sums: Vec<f64> = (0..n)
            .into_par_iter()
            .filter_map(|j| {
                let theta = 2.0 * PI * (j as f64 + 0.5) / (n as f64);
                integrand(Complex64::from_polar(r, theta))
            })
            .collect();
        let avg = if sums.is_empty() {
            0.0
        } else {
            sums.iter().sum::<f64>() / (sums.len() as f64)
        };
        let err = (avg - prev).abs();
        prev = avg;
        if err < tol || n >= 65536 {
            return (avg, err);
        }
        n *= 2;
    }
}

/// Moves r off any divisor of the model lying within 1e-6 r of the circle.
pub fn nudged_radius(model: &MeromorphicModel, r: f64) -> Result<f64> {
    let mut radius = r;
    for _ in 0..3 {
        let reach = radius * (1.0 + 1e-5);
        let near = model
            .zeros
            .enumerate(reach + 1.0)
            .iter()
            .chain(model.poles.enumerate(reach + 1.0).iter())
            .any(|d| (d.location.norm() - radius).abs() < 1e-6 * radius);
        if !near {
            return Ok(radius);
        }
        radius *= 1.0 + 1e-5;
    }
    Err(Error::ContourThroughDivisor(Complex64::new(r, 0.0)))
}

/// ln+ |f - a| style integrand value from the log of f at a sample.
fn ln_plus_target(l: &LogVal, a: Option<Complex64>) -> Option<f64> {
    match a {
        // m(r, f)
        None => match l {
            LogVal::Finite(l) => Some(l.re.max(0.0)),
            LogVal::Zero { .. } => Some(0.0),
            _ => None,
        },
        // m(r, 1/f)
        Some(v) if v.norm() == 0.0 => match l {
            LogVal::Finite(l) => Some((-l.re).max(0.0)),
            LogVal::Pole { .. } => Some(0.0),
            _ => None,
        },
        // m(r, 1/(f-a))
        Some(v) => match l {
            LogVal::Finite(l) => {
                if l.re > 700.0 {
                    Some(0.0)
                } else {
                    let diff = l.exp() - v;
                    if diff.norm() == 0.0 {
                        None
                    } else {
                        Some((-diff.norm().ln()).max(0.0))
                    }
                }
            }
            LogVal::Zero { .. } => Some((-v.norm().ln()).max(0.0)),
            LogVal::Pole { .. } => Some(0.0),
            LogVal::Undefined => None,
        },
    }
}

/// m(r, f) for a = None, otherwise m(r, 1/(f-a)).
pub fn proximity_to(
    model: &MeromorphicModel,
    a: Option<Complex64>,
    r: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    if !model.has_evaluator() {
        return Err(Error::EvaluatorRequired(model.label.clone()));
    }
    let radius = nudged_radius(model, r)?;
    let integrand = |x: Complex64| ln_plus_target(&model.log_eval(x), a);
    Ok(circle_average(&integrand, radius, tol))
}

/// m(r, f).
pub fn proximity(model: &MeromorphicModel, r: f64, tol: f64) -> Result<(f64, f64)> {
    proximity_to(model, None, r, tol)
}

/// n(r): multiplicity count of the stream inside |x| <= r.
pub fn counting_unintegrated(stream: &DivisorStream, r: f64) -> u64 {
    stream.count(r)
}

/// N(r) = sum over 0 < |b| <= r of mult ln(r/|b|) + n(0) ln r.
pub fn counting_integrated(stream: &DivisorStream, r: f64) -> f64 {
    let mut total = 0.0;
    for d in stream.enumerate(r) {
        let b = d.location.norm();
        if b == 0.0 {
            total += (d.multiplicity as f64) * r.ln();
        } else {
            total += (d.multiplicity as f64) * (r / b).ln();
        }
    }
    total
}

/// T(r, f) for a = None, else T(r, 1/(f-a)); N comes from the declared
/// divisors of the corresponding function.
pub fn characteristic_row(
    model: &MeromorphicModel,
    a: Option<Complex64>,
    r: f64,
    tol: f64,
) -> Result<CharacteristicRow> {
    let (m, quadrature_error) = proximity_to(model, a, r, tol)?;
    let stream = model.a_points(a)?;
    let n = counting_integrated(&stream, r);
    Ok(CharacteristicRow {
        r,
        m,
        n,
        t: m + n,
        quadrature_error,
    })
}

/// Characteristic rows over a radius grid, in parallel.
pub fn characteristic_grid(
    model: &MeromorphicModel,
    a: Option<Complex64>,
    grid: &[f64],
) -> Result<Vec<CharacteristicRow>> {
    grid.par_iter()
        .map(|&r| characteristic_row(model, a, r, default_tol(r)))
        .collect()
}

/// First fundamental theorem residuals T(r, 1/(f-a)) - T(r, f) per radius.
pub fn fft_residual(
    model: &MeromorphicModel,
    a: Complex64,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    grid.par_iter()
        .map(|&r| {
            let tol = default_tol(r);
            let inv = characteristic_row(model, Some(a), r, tol)?;
            let dir = characteristic_row(model, None, r, tol)?;
            Ok((r, inv.t - dir.t))
        })
        .collect()
}

/// Fitted slope of the FFT residual against ln r (bounded residual => ~0).
pub fn fft_residual_slope(residuals: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = residuals
        .iter()
        .map(|&(r, v)| (r.ln(), v.abs().max(1e-12)))
        .collect();
    ols_slope(&pts).unwrap_or(0.0)
}

/// log of D_{W,c} f / f at x, all in log space.
pub fn log_wilson_diff(model: &MeromorphicModel, x: Complex64, c: Complex64) -> Option<Complex64> {
    let z = sqrt_with_cut(x, c);
    let lp = model.log_eval_z(z + c / 2.0);
    let lm = model.log_eval_z(z - c / 2.0);
    let l0 = model.log_eval_z(z);
    match (lp, lm, l0) {
        (LogVal::Finite(lp), LogVal::Finite(lm), LogVal::Finite(l0)) => {
            let denom = 2.0 * z * c;
            if denom.norm() == 0.0 {
                return None;
            }
            match log_sub(lp, lm) {
                Some(num) => Some(num - denom.ln() - l0),
                // exact cancellation: D_W f = 0
                None => Some(Complex64::new(f64::NEG_INFINITY, 0.0)),
            }
        }
        _ => None,
    }
}

/// m(r, D_{W,c} f / f).
pub fn log_wilson_proximity(
    model: &MeromorphicModel,
    r: f64,
    c: Complex64,
    tol: f64,
) -> Result<(f64, f64)> {
    if !model.has_evaluator() {
        return Err(Error::EvaluatorRequired(model.label.clone()));
    }
    let radius = nudged_radius(model, r)?;
    let integrand = |x: Complex64| {
        log_wilson_diff(model, x, c).map(|l| {
            if l.re == f64::NEG_INFINITY {
                0.0
            } else {
                l.re.max(0.0)
            }
        })
    };
    Ok(circle_average(&integrand, radius, tol))
}

/// Top-decade growth exponent of T(r, f) plus an OLS confidence band.
pub fn order_estimate(model: &MeromorphicModel, grid: &[f64]) -> Result<(f64, f64)> {
    let rows = characteristic_grid(model, None, grid)?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|row| (row.r, row.t)).collect();
    growth_exponent_with_band(&pts)
        .ok_or_else(|| Error::DegenerateGrid("order estimate needs a positive top decade".into()))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PointwiseProbe {
    pub total: usize,
    pub violations: usize,
    pub excluded: usize,
    pub fraction: f64,
}

/// Radial probe of |ln |f(x^+)/f(x)|| <= r^{sigma - 1/2 + eps} along a ray.
pub fn pointwise_logdiff_probe(
    model: &MeromorphicModel,
    theta: f64,
    grid: &[f64],
    eps: f64,
) -> Result<PointwiseProbe> {
    if !model.has_evaluator() {
        return Err(Error::EvaluatorRequired(model.label.clone()));
    }
    let sigma = model.declared_order;
    let i = Complex64::new(0.0, 1.0);
    let r_max = grid.iter().cloned().fold(0.0f64, f64::max);
    let divisors: Vec<Complex64> = model
        .zeros
        .enumerate(2.0 * r_max + 4.0)
        .iter()
        .chain(model.poles.enumerate(2.0 * r_max + 4.0).iter())
        .map(|d| d.location)
        .collect();
    let mut violations = 0;
    let mut excluded = 0;
    let mut total = 0;
    for &r in grid {
        let x = Complex64::from_polar(r, theta);
        let z = sqrt_with_cut(x, i);
        let xp = (z + i / 2.0) * (z + i / 2.0);
        let near_divisor = divisors
            .iter()
            .any(|&b| (b - x).norm() < 1e-3 * r || (b - xp).norm() < 1e-3 * r);
        if near_divisor {
            excluded += 1;
            continue;
        }
        let lp = model.log_eval_z(z + i / 2.0);
        let l0 = model.log_eval_z(z);
        let (lp, l0) = match (lp, l0) {
            (LogVal::Finite(a), LogVal::Finite(b)) => (a, b),
            _ => {
                excluded += 1;
                continue;
            }
        };
        total += 1;
        if (lp.re - l0.re).abs() > r.powf(sigma - 0.5 + eps) {
            violations += 1;
        }
    }
    let fraction = if total > 0 {
        violations as f64 / total as f64
    } else {
        0.0
    };
    Ok(PointwiseProbe {
        total,
        violations,
        excluded,
        fraction,
    })
}
