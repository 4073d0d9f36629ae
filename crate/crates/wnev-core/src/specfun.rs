//! Complex special functions: gamma, log-gamma, hypergeometric series,
//! infinite products over divisor streams, and the hyperbolic gamma function.

use crate::divisor::DivisorStream;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Truncation bookkeeping for series and infinite products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub terms_used: usize,
    pub tail_estimate: f64,
    pub converged: bool,
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

fn is_near_nonpositive_integer(z: Complex64, tol: f64) -> bool {
    if z.im.abs() > tol {
        return false;
    }
    let r = z.re.round();
    r <= 0.0 && (z.re - r).abs() <= tol
}

/// Complex gamma function via the Lanczos approximation with reflection.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    if is_near_nonpositive_integer(z, 1e-13) {
        return Err(Error::GammaPole(z));
    }
    if z.re < 0.5 {
        // reflection: gamma(z) = pi / (sin(pi z) * gamma(1 - z))
        let s = (PI * z).sin();
        return Ok(PI / (s * gamma(Complex64::new(1.0, 0.0) - z)?));
    }
    let x = z - 1.0;
    let mut t = Complex64::new(LANCZOS_P[0], 0.0);
    for (i, &p) in LANCZOS_P.iter().enumerate().skip(1) {
        t += p / (x + i as f64);
    }
    let w = x + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * w.powc(x + 0.5) * (-w).exp() * t)
}

/// Stable log(sin(pi z)): factors out the dominant exponential so large
/// |Im z| does not overflow.
pub fn log_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let theta = PI * z;
    if z.im <= 0.0 {
        // |e^{i theta}| >= 1
        i * theta + (Complex64::new(1.0, 0.0) - (-2.0 * i * theta).exp()).ln()
            - Complex64::new(2.0, 0.0).ln()
            - i * PI / 2.0
    } else {
        -i * theta + (Complex64::new(1.0, 0.0) - (2.0 * i * theta).exp()).ln()
            - Complex64::new(2.0, 0.0).ln()
            + i * PI / 2.0
    }
}

/// Log-gamma, continuous on Re z >= 0.5 and extended by the reflection
/// formula elsewhere (branch may differ from the principal log of gamma by
/// multiples of 2*pi*i; exp(log_gamma) always equals gamma).
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if is_near_nonpositive_integer(z, 1e-13) {
        return Err(Error::GammaPole(z));
    }
    if z.re < 0.5 {
        let lp = Complex64::new(PI.ln(), 0.0);
        return Ok(lp - log_sin_pi(z) - log_gamma(Complex64::new(1.0, 0.0) - z)?);
    }
    let x = z - 1.0;
    let mut t = Complex64::new(LANCZOS_P[0], 0.0);
    for (i, &p) in LANCZOS_P.iter().enumerate().skip(1) {
        t += p / (x + i as f64);
    }
    let w = x + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (x + 0.5) * w.ln() - w + t.ln())
}

/// Gauss hypergeometric 2F1(a,b;c;z) by series for |z| < 1, by the Gauss
/// formula at z = 1 (Re(c-a-b) > 0), and by Kummer's formula at z = -1
/// (c = 1 + a - b).
pub fn hyp2f1(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    z: Complex64,
    tol: f64,
) -> Result<(Complex64, TailBound)> {
    if is_near_nonpositive_integer(c, 1e-13) {
        return Err(Error::ParameterError(format!(
            "2F1 lower parameter c = {c} is a nonpositive integer"
        )));
    }
    let exact = TailBound {
        terms_used: 0,
        tail_estimate: 0.0,
        converged: true,
    };
    if (z - 1.0).norm() < 1e-14 {
        if (c - a - b).re <= 0.0 {
            return Err(Error::Divergent(z));
        }
        let v = (log_gamma(c)? + log_gamma(c - a - b)? - log_gamma(c - a)? - log_gamma(c - b)?)
            .exp();
        return Ok((v, exact));
    }
    if (z + 1.0).norm() < 1e-14 && (c - (1.0 + a - b)).norm() < 1e-9 {
        let one = Complex64::new(1.0, 0.0);
        let v = (log_gamma(one + a - b)? + log_gamma(one + a / 2.0)?
            - log_gamma(one + a)?
            - log_gamma(one + a / 2.0 - b)?)
        .exp();
        return Ok((v, exact));
    }
    if z.norm() >= 1.0 {
        return Err(Error::Divergent(z));
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let max_terms = 100_000;
    for k in 0..max_terms {
        let kf = k as f64;
        let den = c + kf;
        if den.norm() < 1e-13 {
            return Err(Error::ParameterError(format!(
                "2F1 denominator Pochhammer vanishes at term {k}"
            )));
        }
        term *= (a + kf) * (b + kf) * z / (den * (kf + 1.0));
        sum += term;
        let floor = 1e-16 * sum.norm();
        if term.norm() < tol.max(floor) && term.norm() < tol {
            // geometric tail estimate from the asymptotic term ratio |z|
            let tail = term.norm() * z.norm() / (1.0 - z.norm());
            return Ok((
                sum,
                TailBound {
                    terms_used: k + 2,
                    tail_estimate: tail,
                    converged: tail <= tol,
                },
            ));
        }
    }
    Ok((
        sum,
        TailBound {
            terms_used: max_terms,
            tail_estimate: term.norm(),
            converged: false,
        },
    ))
}

/// Terminating 4F3 at the given argument: the first upper parameter is -n.
pub fn hyp4f3_terminating(
    n: u32,
    upper: [Complex64; 3],
    lower: [Complex64; 3],
    arg: Complex64,
) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..n {
        let kf = k as f64;
        let mut num = Complex64::new(-(n as f64) + kf, 0.0);
        for u in upper {
            num *= u + kf;
        }
        let mut den = Complex64::new(kf + 1.0, 0.0);
        for l in lower {
            let lk = l + kf;
            if lk.norm() < 1e-13 {
                return Err(Error::ParameterError(format!(
                    "4F3 lower Pochhammer vanishes at term {}",
                    k + 1
                )));
            }
            den *= lk;
        }
        term *= num * arg / den;
        sum += term;
    }
    Ok(sum)
}

/// Result of an infinite product evaluation: either a finite value or an
/// exact zero hit with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProductValue {
    Finite(Complex64),
    AtZero { multiplicity: u32 },
}

/// prod over the stream of (1 - x/x_k)^{m_k}. Partial log-sums taken at
/// radius-quadrupling checkpoints are Richardson-extrapolated in R^{-1/2},
/// so slowly convergent order-1/2 products still reach tight tolerances.
pub fn infinite_product(
    zeros: &DivisorStream,
    x: Complex64,
    tol: f64,
) -> (ProductValue, TailBound) {
    let r0 = (4.0 * x.norm()).max(64.0);
    let max_terms = 200_000usize;
    let mut table: Vec<Complex64> = Vec::new();
    let mut terms_used = 0usize;
    let mut best = Complex64::new(0.0, 0.0);
    let mut err = f64::INFINITY;
    let mut prev_count = usize::MAX;
    let mut exhausted = false;
    for level in 0..18usize {
        let radius = r0 * 4f64.powi(level as i32);
        let divisors = zeros.enumerate(radius);
        let mut log_sum = Complex64::new(0.0, 0.0);
        for d in &divisors {
            let ratio = x / d.location;
            let factor = Complex64::new(1.0, 0.0) - ratio;
            if factor.norm() < 1e-12 * (1.0 + ratio.norm()) {
                return (
                    ProductValue::AtZero {
                        multiplicity: d.multiplicity,
                    },
                    TailBound {
                        terms_used: divisors.len(),
                        tail_estimate: 0.0,
                        converged: true,
                    },
                );
            }
            log_sum += (d.multiplicity as f64) * factor.ln();
        }
        terms_used = divisors.len();
        if divisors.len() == prev_count {
            // stream exhausted inside the previous radius: the sum is exact
            exhausted = true;
            best = log_sum;
            err = 0.0;
            break;
        }
        prev_count = divisors.len();
        // Richardson in t = R^{-1/2}: t halves per level, so the k-th
        // column update divides by 2^k - 1
        let mut entry = log_sum;
        for (k, slot) in table.iter_mut().enumerate() {
            let corrected = entry + (entry - *slot) / (2f64.powi(k as i32 + 1) - 1.0);
            *slot = entry;
            entry = corrected;
        }
        table.push(entry);
        let previous_best = best;
        best = entry;
        if level > 0 {
            err = (best - previous_best).norm();
            if err <= tol / 4.0 {
                break;
            }
        }
        if divisors.len() > max_terms {
            break;
        }
    }
    (
        ProductValue::Finite(best.exp()),
        TailBound {
            terms_used,
            tail_estimate: err,
            converged: exhausted || err <= tol,
        },
    )
}

/// Phase integral Phi_{a,b}(z) = int_0^inf (sin 2tz / (2 sinh at sinh bt)
/// - z/(abt)) dt/t, for |Im 2z| < a + b.
pub fn hyperbolic_phase(a: f64, b: f64, z: Complex64, tol: f64) -> Result<Complex64> {
    if 2.0 * z.im.abs() >= a + b {
        return Err(Error::StripViolation(z));
    }
    if z.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let decay = a + b - 2.0 * z.im.abs();
    let t_max = (40.0 / decay).clamp(40.0, 400.0);
    // series switch point: below t0 the direct subtraction cancels
    let t0 = 1e-2 / (1.0 + z.norm());
    let p = (a * a + b * b) / 6.0;
    let q = (a.powi(4) + b.powi(4)) / 120.0 + a * a * b * b / 36.0;
    let series = |t: f64| -> Complex64 {
        let z2 = z * z;
        let c0 = -(4.0 * z2 / 6.0 + p);
        let c2 = 16.0 * z2 * z2 / 120.0 + p * 4.0 * z2 / 6.0 + p * p - q;
        z / (a * b) * (c0 + c2 * t * t)
    };
    let integrand = |t: f64| -> Complex64 {
        if t < t0 {
            return series(t);
        }
        let s = (2.0 * t * z).sin();
        let h = s / (2.0 * (a * t).sinh() * (b * t).sinh()) - z / (a * b * t);
        h / t
    };
    // composite Simpson with step tied to the oscillation wavelength
    let step = (0.02f64).min(0.25 / (1.0 + z.norm()));
    let mut n = ((t_max / step).ceil() as usize).max(64);
    if n % 2 == 1 {
        n += 1;
    }
    let mut result;
    let mut prev = Complex64::new(f64::INFINITY, 0.0);
    loop {
        let h = t_max / n as f64;
        let mut acc = integrand(0.0) + integrand(t_max);
        for j in 1..n {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * integrand(j as f64 * h);
        }
        result = acc * h / 3.0;
        if (result - prev).norm() < tol / 2.0 || n > 4_000_000 {
            break;
        }
        prev = result;
        n *= 2;
    }
    // analytic tail of the -z/(abt^2) part
    Ok(result - z / (a * b * t_max))
}

/// Hyperbolic gamma G_hyp(a,b;z) = exp(i Phi_{a,b}(z)) on its strip.
pub fn hyperbolic_gamma(a: f64, b: f64, z: Complex64, tol: f64) -> Result<Complex64> {
    let phi = hyperbolic_phase(a, b, z, tol)?;
    Ok((Complex64::new(0.0, 1.0) * phi).exp())
}

/// Phi_{1,1}(z) valid on |Im z| < 1 for small |Re z| and extended to
/// |Re z| >= 5 by the quadratic asymptotic (exponentially small error).
/// Returns None where neither representation applies.
pub fn phi11(z: Complex64) -> Option<Complex64> {
    if z.re >= 5.0 {
        return Some(-PI * z * z / 2.0 - PI / 12.0);
    }
    if z.re <= -5.0 {
        return Some(PI * z * z / 2.0 + PI / 12.0);
    }
    if z.im.abs() < 0.95 {
        return hyperbolic_phase(1.0, 1.0, z, 1e-11).ok();
    }
    None
}
