//! Wilson difference polynomials, interpolation-equation residuals, the
//! Clunie growth check, and empirical order-bound reports.

use crate::error::{Error, Result};
use crate::fit::growth_exponent;
use crate::lattice::{apply_dw_iter, sqrt_with_cut, LatticeCoord, DEFAULT_SHIFT};
use crate::logval::{log_lincomb, LogVal};
use crate::model::MeromorphicModel;
use crate::nevanlinna::{log_wilson_diff, order_estimate};
use num_complex::Complex64;
use rayon::prelude::*;

/// One monomial P_j(x) prod_l (D_W^l f)^{d_{l,j}}; operator order l = 0
/// denotes f itself. The coefficient polynomial is stored by ascending
/// powers of x.
#[derive(Debug, Clone)]
pub struct WdpTerm {
    pub coeff: Vec<Complex64>,
    pub exponents: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct WilsonDifferencePolynomial {
    pub terms: Vec<WdpTerm>,
}

fn poly_eval(coeff: &[Complex64], x: Complex64) -> Complex64 {
    let mut v = Complex64::new(0.0, 0.0);
    for &c in coeff.iter().rev() {
        v = v * x + c;
    }
    v
}

impl WilsonDifferencePolynomial {
    pub fn degree_over_f(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.exponents.iter().sum())
            .max()
            .unwrap_or(0)
    }
}

/// Direct stencil evaluation of a Wilson difference polynomial at x.
pub fn wdp_evaluate<F>(p: &WilsonDifferencePolynomial, f: F, x: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let base = LatticeCoord::from_x_default(x);
    let max_order = p
        .terms
        .iter()
        .map(|t| t.exponents.len())
        .max()
        .unwrap_or(0);
    let mut derived = Vec::with_capacity(max_order);
    for l in 0..max_order {
        derived.push(apply_dw_iter(&f, base, l as u32)?);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for t in &p.terms {
        let mut v = poly_eval(&t.coeff, x);
        for (l, &d) in t.exponents.iter().enumerate() {
            for _ in 0..d {
                v *= derived[l];
            }
        }
        total += v;
    }
    Ok(total)
}

/// log of P(f)(x) for terms involving only f and D_W f, carried through
/// log-space so exponential-scale models never overflow. Higher operator
/// orders have no log form here and yield None.
fn wdp_log_eval(
    p: &WilsonDifferencePolynomial,
    model: &MeromorphicModel,
    x: Complex64,
    c: Complex64,
) -> Option<Complex64> {
    let lf = match model.log_eval(x) {
        LogVal::Finite(l) => l,
        _ => return None,
    };
    let mut ratio = None;
    let mut terms = Vec::with_capacity(p.terms.len());
    for t in &p.terms {
        if t.exponents.len() > 2 {
            return None;
        }
        let pj = poly_eval(&t.coeff, x);
        if pj.norm() == 0.0 {
            continue;
        }
        let mut lt = pj.ln();
        if let Some(&d0) = t.exponents.first() {
            lt += d0 as f64 * lf;
        }
        if let Some(&d1) = t.exponents.get(1) {
            if d1 > 0 {
                if ratio.is_none() {
                    ratio = Some(log_wilson_diff(model, x, c)?);
                }
                lt += d1 as f64 * (lf + ratio.unwrap());
            }
        }
        terms.push((Complex64::new(1.0, 0.0), lt));
    }
    if terms.is_empty() {
        return Some(Complex64::new(f64::NEG_INFINITY, 0.0));
    }
    log_lincomb(&terms)
}

#[derive(Debug, Clone)]
pub struct ClunieReport {
    /// (r, m(r, P)) over the grid.
    pub m_values: Vec<(f64, f64)>,
    pub exponent: Option<f64>,
    pub bound: f64,
    pub pass: bool,
}

/// Empirical check of the Clunie conclusion m(r, P) = O(r^{sigma-1/2+eps})
/// for f^n P(f) = Q(f). With `p` absent, P is taken as Q(f)/f^n itself.
/// A supplied `p` is first validated against the identity at 20 points.
pub fn clunie_growth_check(
    model: &MeromorphicModel,
    p: Option<&WilsonDifferencePolynomial>,
    q: &WilsonDifferencePolynomial,
    n: u32,
    r_grid: &[f64],
) -> Result<ClunieReport> {
    let c = DEFAULT_SHIFT;
    if let Some(p) = p {
        let f = |u: Complex64| match model.evaluate(u) {
            crate::model::Eval::Value(v) => v,
            _ => Complex64::new(f64::NAN, f64::NAN),
        };
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..20 {
            let x = Complex64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            let pv = wdp_evaluate(p, f, x)?;
            let qv = wdp_evaluate(q, f, x)?;
            let lhs = f(x).powu(n) * pv;
            let scale = lhs.norm().max(qv.norm()).max(1.0);
            if (lhs - qv).norm() > 1e-6 * scale {
                return Err(Error::IdentityViolation(format!(
                    "f^{n} P - Q = {} at x = {x}",
                    (lhs - qv).norm()
                )));
            }
        }
    }
    let log_p = |x: Complex64| -> Option<f64> {
        let lq = match p {
            Some(p) => wdp_log_eval(p, model, x, c)?,
            None => {
                let lf = match model.log_eval(x) {
                    LogVal::Finite(l) => l,
                    _ => return None,
                };
                wdp_log_eval(q, model, x, c)? - n as f64 * lf
            }
        };
        Some(lq.re.max(0.0))
    };
    let m_values: Vec<(f64, f64)> = r_grid
        .par_iter()
        .map(|&r| {
            let samples = 2048;
            let mut sum = 0.0;
            let mut used = 0usize;
            for j in 0..samples {
                let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / samples as f64;
                if let Some(v) = log_p(Complex64::from_polar(r, theta)) {
                    sum += v;
                    used += 1;
                }
            }
            (r, if used == 0 { 0.0 } else { sum / used as f64 })
        })
        .collect();
    let pts: Vec<(f64, f64)> = m_values.iter().map(|&(r, m)| (r, m)).collect();
    let exponent = growth_exponent(&pts);
    let bound = model.declared_order - 0.5 + 0.15;
    let bounded = m_values.iter().map(|&(_, m)| m).fold(0.0, f64::max) < 0.05;
    let pass = bounded || exponent.map(|e| e <= bound).unwrap_or(true);
    Ok(ClunieReport {
        m_values,
        exponent,
        bound,
        pass,
    })
}

/// A coefficient of an interpolation equation.
#[derive(Clone)]
pub enum InterpCoeff {
    Const(Complex64),
    Poly(Vec<Complex64>),
    /// scalar times a catalog model evaluated at the base point x.
    Scaled(Complex64, MeromorphicModel),
}

impl InterpCoeff {
    fn eval(&self, x: Complex64) -> Result<Complex64> {
        match self {
            InterpCoeff::Const(v) => Ok(*v),
            InterpCoeff::Poly(coeff) => Ok(poly_eval(coeff, x)),
            InterpCoeff::Scaled(s, m) => match m.evaluate(x) {
                crate::model::Eval::Value(v) => Ok(s * v),
                _ => Err(Error::SingularPoint(format!(
                    "coefficient {} undefined at {x}",
                    m.label
                ))),
            },
        }
    }

    fn order(&self) -> OrderSource {
        match self {
            InterpCoeff::Const(_) | InterpCoeff::Poly(_) => OrderSource::Zero,
            InterpCoeff::Scaled(_, m) => OrderSource::Model(m.clone()),
        }
    }
}

enum OrderSource {
    Zero,
    Model(MeromorphicModel),
}

/// sum_k A_k(x) y(x^{+(j_k)}) = 0, offsets j_k counted in half-shifts of
/// the lattice step c.
#[derive(Clone)]
pub struct InterpolationEquation {
    pub terms: Vec<(InterpCoeff, i32)>,
    pub shift_c: Complex64,
}

/// The two-term equation y(x^+) = 2 cosh(pi sqrt(x)) y(x^-).
pub fn c22_equation() -> InterpolationEquation {
    InterpolationEquation {
        terms: vec![
            (InterpCoeff::Const(Complex64::new(1.0, 0.0)), 1),
            (
                InterpCoeff::Scaled(
                    Complex64::new(-1.0, 0.0),
                    crate::model::model_cosh_pi_sqrt(),
                ),
                -1,
            ),
        ],
        shift_c: DEFAULT_SHIFT,
    }
}

/// The individual terms A_k(x) y(x^{+(j_k)}) at x.
pub fn interp_terms(
    eq: &InterpolationEquation,
    y: &MeromorphicModel,
    x: Complex64,
) -> Result<Vec<Complex64>> {
    let z = sqrt_with_cut(x, eq.shift_c);
    let mut out = Vec::with_capacity(eq.terms.len());
    for (coeff, offset) in &eq.terms {
        let zj = z + eq.shift_c * (*offset as f64) * 0.5;
        let yv = match y.log_eval_z(zj) {
            LogVal::Finite(l) => l.exp(),
            LogVal::Zero { .. } => Complex64::new(0.0, 0.0),
            _ => {
                return Err(Error::PoleOnStencil(zj * zj));
            }
        };
        out.push(coeff.eval(x)? * yv);
    }
    Ok(out)
}

pub fn interp_residual(
    eq: &InterpolationEquation,
    y: &MeromorphicModel,
    x: Complex64,
) -> Result<Complex64> {
    Ok(interp_terms(eq, y, x)?.into_iter().sum())
}

#[derive(Debug, Clone)]
pub struct OrderBoundReport {
    pub sigma_y: f64,
    pub sigma_coeff: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Empirical Wilson-interpolation order bound sigma_y >= sigma_coeff + 1/2.
/// Refuses models that do not actually solve the equation.
pub fn order_bound_report(
    eq: &InterpolationEquation,
    y: &MeromorphicModel,
    r_grid: &[f64],
) -> Result<OrderBoundReport> {
    for k in 0..20 {
        let x = Complex64::new(0.2 + 0.4 * k as f64, 0.0);
        let terms = interp_terms(eq, y, x)?;
        let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        let resid: Complex64 = terms.into_iter().sum();
        if scale > 0.0 && resid.norm() > 1e-6 * scale {
            return Err(Error::IdentityViolation(format!(
                "model {} does not solve the equation: residual {} at x = {x}",
                y.label,
                resid.norm() / scale
            )));
        }
    }
    let (sigma_y, _) = order_estimate(y, r_grid)?;
    let mut sigma_coeff: f64 = 0.0;
    for (coeff, _) in &eq.terms {
        if let OrderSource::Model(m) = coeff.order() {
            let (s, _) = order_estimate(&m, r_grid)?;
            sigma_coeff = sigma_coeff.max(s);
        }
    }
    let margin = sigma_y - sigma_coeff - 0.5;
    Ok(OrderBoundReport {
        sigma_y,
        sigma_coeff,
        margin,
        pass: margin >= -0.1,
    })
}
