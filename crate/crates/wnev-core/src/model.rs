//! The meromorphic-function data model and the catalog of example functions:
//! all evaluators work in log space so circle sweeps at |x| = 1e6 never
//! overflow.

use crate::divisor::{Divisor, DivisorKind, DivisorStream, MERGE_TOL};
use crate::error::{Error, Result};
use crate::lattice::{sqrt_with_cut, DEFAULT_SHIFT};
use crate::logval::{log_cosh, log_sinh, LogVal};
use crate::specfun::{log_gamma, phi11};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Plain evaluation result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eval {
    Value(Complex64),
    Pole,
    Undefined,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SyntheticDivisor {
    pub re: f64,
    pub im: f64,
    pub mult: u32,
    pub kind: DivisorKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SyntheticDivisorData {
    pub divisors: Vec<SyntheticDivisor>,
}

#[derive(Clone)]
enum ModelKind {
    Constant(Complex64),
    Exp,
    ProductI { b: Complex64 },
    PhiII { a: Complex64 },
    GIII { p: u32, q: u32 },
    HIV { u: u64, v: u64 },
    GhypSolution,
    CoshPiSqrt,
    Synthetic,
}

/// Evaluator plus declared divisor streams and growth order.
#[derive(Clone)]
pub struct MeromorphicModel {
    pub label: String,
    kind: ModelKind,
    pub zeros: DivisorStream,
    pub poles: DivisorStream,
    pub declared_order: f64,
}

fn near_nonpos_int(z: Complex64, tol: f64) -> bool {
    if z.im.abs() > tol {
        return false;
    }
    let r = z.re.round();
    r <= 0.0 && (z.re - r).abs() <= tol
}

fn lg(z: Complex64) -> Complex64 {
    log_gamma(z).expect("gamma argument checked before evaluation")
}

/// log of a ratio of gamma products, detecting zeros/poles where arguments
/// hit nonpositive integers.
fn gamma_ratio_log(num: &[Complex64], den: &[Complex64]) -> LogVal {
    let tol = 1e-9;
    let pole_hits = num.iter().filter(|&&a| near_nonpos_int(a, tol)).count() as u32;
    let zero_hits = den.iter().filter(|&&a| near_nonpos_int(a, tol)).count() as u32;
    if zero_hits > pole_hits {
        return LogVal::Zero {
            multiplicity: zero_hits - pole_hits,
        };
    }
    if pole_hits > zero_hits {
        return LogVal::Pole {
            multiplicity: pole_hits - zero_hits,
        };
    }
    let nudge = |a: Complex64| {
        if near_nonpos_int(a, tol) {
            a + Complex64::new(0.0, 1e-9)
        } else {
            a
        }
    };
    let mut l = Complex64::new(0.0, 0.0);
    for &a in num {
        l += lg(nudge(a));
    }
    for &a in den {
        l -= lg(nudge(a));
    }
    LogVal::Finite(l)
}

/// Distance of z to the point m*i (purely imaginary lattice), symmetric
/// in +-z.
fn near_imag_lattice(z: Complex64, m: f64, tol: f64) -> bool {
    let t = Complex64::new(0.0, m);
    (z - t).norm() < tol || (z + t).norm() < tol
}

/// Best rational approximation u/v of t in [0,1] with v <= max_den, by
/// continued fractions.
pub fn rational_approx(t: f64, max_den: u64) -> (u64, u64) {
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut x = t;
    for _ in 0..64 {
        let a = x.floor();
        let ai = a as u64;
        let p2 = ai.checked_mul(p1).and_then(|v| v.checked_add(p0));
        let q2 = ai.checked_mul(q1).and_then(|v| v.checked_add(q0));
        let (p2, q2) = match (p2, q2) {
            (Some(p), Some(q)) if q <= max_den => (p, q),
            _ => break,
        };
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = x - a;
        if frac < 1e-12 {
            break;
        }
        x = 1.0 / frac;
    }
    if q1 == 0 {
        (0, 1)
    } else {
        (p1, q1)
    }
}

impl MeromorphicModel {
    pub fn has_evaluator(&self) -> bool {
        !matches!(self.kind, ModelKind::Synthetic)
    }

    /// log f at the lattice coordinate z (f is a function of x = z^2, so
    /// this is symmetric in +-z).
    pub fn log_eval_z(&self, z: Complex64) -> LogVal {
        let i = Complex64::new(0.0, 1.0);
        let tol = 1e-9 * (1.0 + z.norm());
        match &self.kind {
            ModelKind::Constant(c) => {
                if c.norm() == 0.0 {
                    LogVal::Zero { multiplicity: 1 }
                } else {
                    LogVal::Finite(c.ln())
                }
            }
            ModelKind::Exp => LogVal::Finite(z * z),
            ModelKind::ProductI { b } => gamma_ratio_log(
                &[-i * b, -i * b],
                &[-i * b + i * z, -i * b - i * z],
            ),
            ModelKind::PhiII { a } => {
                let half = Complex64::new(0.5, 0.0);
                let one = Complex64::new(1.0, 0.0);
                gamma_ratio_log(
                    &[
                        a + half,
                        a + half,
                        one + a / 2.0 + i * z / 2.0,
                        one + a / 2.0 - i * z / 2.0,
                    ],
                    &[
                        one + a + i * z,
                        one + a - i * z,
                        half + a / 2.0 + i * z / 2.0,
                        half + a / 2.0 - i * z / 2.0,
                    ],
                )
            }
            ModelKind::GIII { p, q } => {
                // explicit zero lattice: -(2k)^2 with mult p, -(2k-1)^2 with
                // mult q
                let m = z.im.abs().round();
                if m >= 1.0 && near_imag_lattice(z, m, tol) {
                    let mi = m as i64;
                    let mult = if mi % 2 == 0 { *p } else { *q };
                    if mult > 0 {
                        return LogVal::Zero { multiplicity: mult };
                    }
                }
                let w = if z.re >= 0.0 { PI * z / 2.0 } else { -PI * z / 2.0 };
                let ls = if w.norm() < 1e-8 {
                    // sinh(w)/w -> 1 + w^2/6
                    let s = w * w / 6.0;
                    LogVal::Finite(s - s * s / 2.0)
                } else {
                    match log_sinh(w) {
                        LogVal::Finite(l) => LogVal::Finite(l - w.ln()),
                        other => other,
                    }
                };
                match (ls, log_cosh(w)) {
                    (LogVal::Finite(a), LogVal::Finite(b)) => {
                        LogVal::Finite((*p as f64) * a + (*q as f64) * b)
                    }
                    _ => LogVal::Zero { multiplicity: 1 },
                }
            }
            ModelKind::HIV { u, v } => {
                let period = (u + v) as f64;
                let mut num = Vec::with_capacity(2 * *v as usize);
                let mut den = Vec::with_capacity(2 * *v as usize);
                for r in 1..=*v {
                    let b = (r + u * r / v) as f64;
                    let base = Complex64::new(b / period, 0.0);
                    num.push(base);
                    num.push(base);
                    den.push(base - i * z / period);
                    den.push(base + i * z / period);
                }
                gamma_ratio_log(&num, &den)
            }
            ModelKind::GhypSolution => {
                let m = z.im.abs().round();
                if m >= 1.0 && near_imag_lattice(z, m, tol) {
                    return LogVal::Zero {
                        multiplicity: m as u32,
                    };
                }
                match phi11(z) {
                    Some(phi) => LogVal::Finite(i * phi),
                    None => LogVal::Undefined,
                }
            }
            ModelKind::CoshPiSqrt => {
                let m = z.im.abs() - 0.5;
                let k = m.round();
                if k >= 0.0 && near_imag_lattice(z, k + 0.5, tol) {
                    return LogVal::Zero { multiplicity: 1 };
                }
                let w = if z.re >= 0.0 { PI * z } else { -PI * z };
                match log_cosh(w) {
                    LogVal::Finite(l) => LogVal::Finite(l + Complex64::new(2.0f64.ln(), 0.0)),
                    other => other,
                }
            }
            ModelKind::Synthetic => LogVal::Undefined,
        }
    }

    pub fn log_eval(&self, x: Complex64) -> LogVal {
        self.log_eval_z(sqrt_with_cut(x, DEFAULT_SHIFT))
    }

    /// Plain evaluation (may overflow for very large |x|; the Nevanlinna
    /// functionals use `log_eval` instead).
    pub fn evaluate(&self, x: Complex64) -> Eval {
        match self.log_eval(x) {
            LogVal::Finite(l) => Eval::Value(l.exp()),
            LogVal::Zero { .. } => Eval::Value(Complex64::new(0.0, 0.0)),
            LogVal::Pole { .. } => Eval::Pole,
            LogVal::Undefined => Eval::Undefined,
        }
    }

    /// a-points of the model as a divisor stream: zeros for a = 0, poles
    /// for a = infinity (None); other values need declared divisors.
    pub fn a_points(&self, a: Option<Complex64>) -> Result<DivisorStream> {
        match a {
            None => Ok(self.poles.clone()),
            Some(v) if v.norm() == 0.0 => Ok(self.zeros.clone()),
            Some(v) => Err(Error::MissingDivisor(format!(
                "a-points of {} at a = {v}",
                self.label
            ))),
        }
    }
}

pub fn model_constant(c: Complex64) -> MeromorphicModel {
    MeromorphicModel {
        label: format!("const({c})"),
        kind: ModelKind::Constant(c),
        zeros: DivisorStream::empty(),
        poles: DivisorStream::empty(),
        declared_order: 0.0,
    }
}

/// f(x) = e^x: entire of order 1, no zeros.
pub fn model_exp() -> MeromorphicModel {
    MeromorphicModel {
        label: "exp".into(),
        kind: ModelKind::Exp,
        zeros: DivisorStream::empty(),
        poles: DivisorStream::empty(),
        declared_order: 1.0,
    }
}

/// f(x) = prod_{k>=0} [1 - x/(b+ki)^2]: simple zeros at (b+ki)^2, order 1/2.
pub fn model_product_i(b: Complex64) -> Result<MeromorphicModel> {
    if b.re.abs() < 1e-12 && b.im >= -1e-12 && (b.im - b.im.round()).abs() < 1e-12 {
        return Err(Error::ParameterError(format!(
            "product model requires b not in i*N0, got {b}"
        )));
    }
    let zeros = DivisorStream::new(0.5, move |r| {
        let i = Complex64::new(0.0, 1.0);
        let mut v = Vec::new();
        let mut k = 0u64;
        loop {
            let root = b + (k as f64) * i;
            let loc = root * root;
            if loc.norm() > r {
                if k as f64 > b.norm() + r.sqrt() + 2.0 {
                    break;
                }
                k += 1;
                continue;
            }
            v.push(Divisor {
                location: loc,
                multiplicity: 1,
                kind: DivisorKind::Zero,
            });
            k += 1;
        }
        v
    });
    Ok(MeromorphicModel {
        label: format!("product_i({b})"),
        kind: ModelKind::ProductI { b },
        zeros,
        poles: DivisorStream::empty(),
        declared_order: 0.5,
    })
}

/// Double zeros at -(a-1+2k)^2, k >= 1; gamma-ratio closed form.
pub fn model_phi_ii(a: Complex64) -> Result<MeromorphicModel> {
    if a.im.abs() < 1e-12 {
        let k = 0.5 - a.re;
        if k > 0.5 && (k - k.round()).abs() < 1e-12 {
            return Err(Error::ParameterError(format!(
                "phi model parameter a = {a} lies on the excluded set 1/2 - N"
            )));
        }
    }
    let zeros = DivisorStream::new(0.5, move |r| {
        let mut v = Vec::new();
        let mut k = 1u64;
        loop {
            let root = a - 1.0 + 2.0 * k as f64;
            let loc = -root * root;
            if loc.norm() > r {
                if 2.0 * k as f64 > a.norm() + r.sqrt() + 3.0 {
                    break;
                }
                k += 1;
                continue;
            }
            v.push(Divisor {
                location: loc,
                multiplicity: 2,
                kind: DivisorKind::Zero,
            });
            k += 1;
        }
        v
    });
    Ok(MeromorphicModel {
        label: format!("phi_ii({a})"),
        kind: ModelKind::PhiII { a },
        zeros,
        poles: DivisorStream::empty(),
        declared_order: 0.5,
    })
}

/// g(x) = [sinh(pi z/2)/(pi z/2)]^p [cosh(pi z/2)]^q with z = sqrt(x):
/// zeros at -(2k)^2 of multiplicity p and -(2k-1)^2 of multiplicity q.
pub fn model_g_iii(p: u32, q: u32) -> Result<MeromorphicModel> {
    if p < 1 || q > p {
        return Err(Error::ParameterError(format!(
            "g model requires p >= max(q, 1), got p = {p}, q = {q}"
        )));
    }
    let zeros = DivisorStream::new(0.5, move |r| {
        let mut v = Vec::new();
        let mut m = 1u64;
        while ((m * m) as f64) <= r {
            let mult = if m % 2 == 0 { p } else { q };
            if mult > 0 {
                v.push(Divisor {
                    location: Complex64::new(-((m * m) as f64), 0.0),
                    multiplicity: mult,
                    kind: DivisorKind::Zero,
                });
            }
            m += 1;
        }
        v
    });
    Ok(MeromorphicModel {
        label: format!("g_iii({p},{q})"),
        kind: ModelKind::GIII { p, q },
        zeros,
        poles: DivisorStream::empty(),
        declared_order: 0.5,
    })
}

/// h(x) = prod_{k>=1} [1 - x/((k+a_k)i)^2] with a_k = floor((1-s)k),
/// realized through the rational approximation (1-s) ~ u/v.
pub fn model_h_iv(s: f64) -> Result<MeromorphicModel> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::ParameterError(format!(
            "h model requires s in [0,1], got {s}"
        )));
    }
    let (u, v) = rational_approx(1.0 - s, 64);
    let zeros = DivisorStream::new(0.5, move |r| {
        let mut out = Vec::new();
        let mut k = 1u64;
        loop {
            let m = k + u * k / v;
            let loc = -((m * m) as f64);
            if loc.abs() > r {
                break;
            }
            out.push(Divisor {
                location: Complex64::new(loc, 0.0),
                multiplicity: 1,
                kind: DivisorKind::Zero,
            });
            k += 1;
        }
        out
    });
    Ok(MeromorphicModel {
        label: format!("h_iv({s})"),
        kind: ModelKind::HIV { u, v },
        zeros,
        poles: DivisorStream::empty(),
        declared_order: 0.5,
    })
}

/// Solution of the interpolation equation y(x^+) = 2 cosh(pi sqrt(x)) y(x^-)
/// given by the hyperbolic gamma function along the square-root branch:
/// log y = i Phi_{1,1}(sqrt(x)). Its a-points sit at -k^2 with order k
/// (realized as zeros of y; the reciprocal carries them as poles) and the
/// solution has order exactly 1.
pub fn model_ghyp_solution() -> MeromorphicModel {
    let zeros = DivisorStream::new(1.0, |r| {
        let mut v = Vec::new();
        let mut k = 1u64;
        while ((k * k) as f64) <= r {
            v.push(Divisor {
                location: Complex64::new(-((k * k) as f64), 0.0),
                multiplicity: k as u32,
                kind: DivisorKind::Zero,
            });
            k += 1;
        }
        v
    });
    MeromorphicModel {
        label: "ghyp".into(),
        kind: ModelKind::GhypSolution,
        zeros,
        poles: DivisorStream::empty(),
        declared_order: 1.0,
    }
}

/// The equation coefficient 2 cosh(pi sqrt(x)): entire of order 1/2.
pub fn model_cosh_pi_sqrt() -> MeromorphicModel {
    let zeros = DivisorStream::new(0.5, |r| {
        let mut v = Vec::new();
        let mut k = 0u64;
        loop {
            let m = k as f64 + 0.5;
            if m * m > r {
                break;
            }
            v.push(Divisor {
                location: Complex64::new(-m * m, 0.0),
                multiplicity: 1,
                kind: DivisorKind::Zero,
            });
            k += 1;
        }
        v
    });
    MeromorphicModel {
        label: "cosh_pi_sqrt".into(),
        kind: ModelKind::CoshPiSqrt,
        zeros,
        poles: DivisorStream::empty(),
        declared_order: 0.5,
    }
}

/// Pure divisor data without an evaluator; only divisor-based operations
/// are available.
pub fn model_from_synthetic(data: SyntheticDivisorData) -> MeromorphicModel {
    let (mut zs, mut ps) = (Vec::new(), Vec::new());
    for d in &data.divisors {
        let divisor = Divisor {
            location: Complex64::new(d.re, d.im),
            multiplicity: d.mult,
            kind: d.kind,
        };
        match d.kind {
            DivisorKind::Zero => zs.push(divisor),
            DivisorKind::Pole => ps.push(divisor),
        }
    }
    MeromorphicModel {
        label: "synthetic".into(),
        kind: ModelKind::Synthetic,
        zeros: DivisorStream::from_list(zs),
        poles: DivisorStream::from_list(ps),
        declared_order: f64::NAN,
    }
}

/// Build a catalog model from a CLI-style label such as "g_iii(2,1)".
pub fn model_by_label(label: &str) -> Result<MeromorphicModel> {
    let label = label.trim();
    let (name, args) = match label.find('(') {
        Some(idx) if label.ends_with(')') => (
            &label[..idx],
            label[idx + 1..label.len() - 1]
                .split(',')
                .map(|s| s.trim().to_string())
                .collect::<Vec<_>>(),
        ),
        _ => (label, Vec::new()),
    };
    let parse_f = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| Error::Config(format!("bad numeric argument '{s}' in model '{label}'")))
    };
    match name {
        "exp" => Ok(model_exp()),
        "product_i" => {
            let b = match args.len() {
                1 => Complex64::new(parse_f(&args[0])?, 0.0),
                2 => Complex64::new(parse_f(&args[0])?, parse_f(&args[1])?),
                _ => Complex64::new(1.0, 0.0),
            };
            model_product_i(b)
        }
        "phi_ii" => {
            let a = match args.len() {
                1 => Complex64::new(parse_f(&args[0])?, 0.0),
                2 => Complex64::new(parse_f(&args[0])?, parse_f(&args[1])?),
                _ => Complex64::new(1.0, 0.0),
            };
            model_phi_ii(a)
        }
        "g_iii" => {
            if args.len() != 2 {
                return Err(Error::Config("g_iii takes two integer arguments".into()));
            }
            model_g_iii(parse_f(&args[0])? as u32, parse_f(&args[1])? as u32)
        }
        "h_iv" => {
            if args.len() != 1 {
                return Err(Error::Config("h_iv takes one real argument".into()));
            }
            model_h_iv(parse_f(&args[0])?)
        }
        "ghyp" => Ok(model_ghyp_solution()),
        "cosh_pi_sqrt" => Ok(model_cosh_pi_sqrt()),
        "const" => Ok(model_constant(Complex64::new(
            parse_f(args.first().map(String::as_str).unwrap_or("1"))?,
            0.0,
        ))),
        _ => Err(Error::Config(format!("unknown model label '{label}'"))),
    }
}

/// Argument-principle consistency report for a disk.
#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub winding: f64,
    pub rounded: i64,
    pub declared: i64,
    pub pass: bool,
}

/// Winding number of f along |x - center| = radius, from log-space samples.
pub fn winding_number<F>(log_eval: F, center: Complex64, radius: f64, samples: usize) -> f64
where
    F: Fn(Complex64) -> LogVal,
{
    let mut total = 0.0;
    let mut prev: Option<Complex64> = None;
    let mut first: Option<Complex64> = None;
    for j in 0..=samples {
        let theta = 2.0 * PI * (j as f64) / (samples as f64);
        let x = center + Complex64::from_polar(radius, theta);
        let l = match log_eval(x) {
            LogVal::Finite(l) => l,
            _ => continue,
        };
        if let Some(p) = prev {
            let ratio = (l - p).exp();
            total += ratio.arg();
        } else {
            first = Some(l);
        }
        prev = Some(l);
    }
    // close the loop in case samples were skipped
    if let (Some(p), Some(f)) = (prev, first) {
        let ratio = (f - p).exp();
        total += ratio.arg();
    }
    total / (2.0 * PI)
}

/// Checks that the argument-principle count over a disk matches the declared
/// zero/pole multiplicities inside it.
pub fn consistency_check(
    model: &MeromorphicModel,
    center: Complex64,
    radius: f64,
) -> Result<ConsistencyReport> {
    if !model.has_evaluator() {
        return Err(Error::EvaluatorRequired(model.label.clone()));
    }
    let reach = center.norm() + radius * 1.5 + 1.0;
    let mut declared = 0i64;
    for d in model.zeros.enumerate(reach) {
        let dist = (d.location - center).norm();
        if (dist - radius).abs() < 1e-6 * radius.max(1.0) {
            return Err(Error::ContourThroughDivisor(d.location));
        }
        if dist < radius {
            declared += d.multiplicity as i64;
        }
    }
    for d in model.poles.enumerate(reach) {
        let dist = (d.location - center).norm();
        if (dist - radius).abs() < 1e-6 * radius.max(1.0) {
            return Err(Error::ContourThroughDivisor(d.location));
        }
        if dist < radius {
            declared -= d.multiplicity as i64;
        }
    }
    let winding = winding_number(|x| model.log_eval(x), center, radius, 1024);
    let rounded = winding.round() as i64;
    let pass = (winding - rounded as f64).abs() < 0.1 && rounded == declared;
    Ok(ConsistencyReport {
        winding,
        rounded,
        declared,
        pass,
    })
}

/// Finds the multiplicity declared at a location, merging within tolerance.
pub fn multiplicity_at(divisors: &[Divisor], location: Complex64) -> u32 {
    let scale = 1.0 + location.norm();
    divisors
        .iter()
        .filter(|d| (d.location - location).norm() < MERGE_TOL * scale * 10.0)
        .map(|d| d.multiplicity)
        .sum()
}
