//! The tau basis, Wilson series expansion by node interpolation, and the
//! entire-growth gate ln M(r)/sqrt(r) < 2 ln 2.

use crate::error::{Error, Result};
use crate::fit::{log_grid, top_decade};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const DEFAULT_TRUNCATION: usize = 64;

pub const GATE: f64 = 2.0 * std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct ReIm {
    re: f64,
    im: f64,
}

impl From<Complex64> for ReIm {
    fn from(v: Complex64) -> Self {
        ReIm { re: v.re, im: v.im }
    }
}

impl From<ReIm> for Complex64 {
    fn from(v: ReIm) -> Self {
        Complex64::new(v.re, v.im)
    }
}

#[derive(Debug, Clone)]
pub struct WilsonSeries {
    pub a: Complex64,
    pub coefficients: Vec<Complex64>,
    /// 2 ln 2 minus the estimated limsup of ln M(r)/sqrt(r); positive when
    /// the expansion hypothesis is met.
    pub gate_margin: f64,
}

#[derive(Serialize, Deserialize)]
struct WilsonSeriesJson {
    a: ReIm,
    coeffs: Vec<ReIm>,
}

impl WilsonSeries {
    pub fn truncation(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn gate_passed(&self) -> bool {
        self.gate_margin > 0.0
    }

    pub fn to_json(&self) -> String {
        let j = WilsonSeriesJson {
            a: self.a.into(),
            coeffs: self.coefficients.iter().map(|&c| c.into()).collect(),
        };
        serde_json::to_string(&j).expect("series serialization")
    }

    pub fn from_json(text: &str) -> Result<WilsonSeries> {
        let j: WilsonSeriesJson = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("series JSON: {e}")))?;
        Ok(WilsonSeries {
            a: j.a.into(),
            coefficients: j.coeffs.into_iter().map(Complex64::from).collect(),
            gate_margin: 0.0,
        })
    }
}

fn node(a: Complex64, j: usize) -> Complex64 {
    let w = a + Complex64::new(0.0, j as f64);
    w * w
}

/// tau_k(x; a) = prod_{j<k} ((a + ji)^2 - x); tau_0 = 1.
pub fn tau(k: usize, a: Complex64, x: Complex64) -> Complex64 {
    let mut p = Complex64::new(1.0, 0.0);
    for j in 0..k {
        p *= node(a, j) - x;
    }
    p
}

/// Margin of the growth gate: 2 ln 2 - max over the top decade of
/// ln M(r)/sqrt(r), with M(r) the max modulus over 720 circle samples.
/// Negative margins are valid results, not errors.
pub fn growth_gate<F>(f: F, r_grid: &[f64]) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let mut worst = f64::NEG_INFINITY;
    for r in top_decade(r_grid) {
        let mut m: f64 = 0.0;
        for j in 0..720 {
            let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / 720.0;
            m = m.max(f(Complex64::from_polar(r, theta)).norm());
        }
        worst = worst.max(m.ln() / r.sqrt());
    }
    GATE - worst
}

/// Coefficients by forward substitution at the nodes x_j = (a + ji)^2,
/// where tau_k(x_m) = 0 for k > m makes the system lower triangular.
/// A failed gate flags the series (negative margin) but still expands.
pub fn expand<F>(f: F, a: Complex64, k_max: usize) -> Result<WilsonSeries>
where
    F: Fn(Complex64) -> Complex64,
{
    let gate_margin = growth_gate(&f, &log_grid(10.0, 1e4, 10));
    let mut coefficients = Vec::with_capacity(k_max + 1);
    for m in 0..=k_max {
        let xm = node(a, m);
        // diagonal entry in log magnitude first, to catch degeneracy
        let mut ln_diag = 0.0;
        for j in 0..m {
            let factor = node(a, j) - xm;
            if factor.norm() == 0.0 {
                return Err(Error::ParameterError(format!(
                    "coincident expansion nodes {j} and {m} for anchor {a}"
                )));
            }
            ln_diag += factor.norm().ln();
        }
        if !(-700.0..=700.0).contains(&ln_diag) {
            return Err(Error::ParameterError(format!(
                "expansion diagonal leaves double range at index {m} (ln |tau| = {ln_diag:.1})"
            )));
        }
        let mut acc = f(xm);
        let mut t = Complex64::new(1.0, 0.0);
        for (k, &c) in coefficients.iter().enumerate().take(m) {
            acc -= c * t;
            t *= node(a, k) - xm;
        }
        coefficients.push(acc / t);
    }
    Ok(WilsonSeries {
        a,
        coefficients,
        gate_margin,
    })
}

/// Sum a_k tau_k(x; a) with the running-product recurrence.
pub fn reconstruct(series: &WilsonSeries, x: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut t = Complex64::new(1.0, 0.0);
    for (k, &c) in series.coefficients.iter().enumerate() {
        sum += c * t;
        t *= node(series.a, k) - x;
    }
    sum
}
