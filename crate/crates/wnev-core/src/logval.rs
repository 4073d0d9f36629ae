//! Log-space complex values: evaluations are carried as log f = ln|f| + i arg f
//! so circle sweeps at radii up to 1e6 never overflow.

use num_complex::Complex64;

/// A meromorphic evaluation in log space. The imaginary part of a `Finite`
/// log is an argument of f, consistent only up to multiples of 2*pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogVal {
    Finite(Complex64),
    Zero { multiplicity: u32 },
    Pole { multiplicity: u32 },
    /// Outside the evaluator's domain of validity.
    Undefined,
}

impl LogVal {
    pub fn ln_abs(self) -> Option<f64> {
        match self {
            LogVal::Finite(l) => Some(l.re),
            LogVal::Zero { .. } => Some(f64::NEG_INFINITY),
            LogVal::Pole { .. } => Some(f64::INFINITY),
            LogVal::Undefined => None,
        }
    }

    /// ln+ |f| with the convention ln+ 0 = 0; poles and undefined points
    /// yield None and must be handled by the caller (nudging / exclusion).
    pub fn ln_plus(self) -> Option<f64> {
        match self {
            LogVal::Finite(l) => Some(l.re.max(0.0)),
            LogVal::Zero { .. } => Some(0.0),
            LogVal::Pole { .. } | LogVal::Undefined => None,
        }
    }

    pub fn neg(self) -> LogVal {
        match self {
            LogVal::Finite(l) => LogVal::Finite(-l),
            LogVal::Zero { multiplicity } => LogVal::Pole { multiplicity },
            LogVal::Pole { multiplicity } => LogVal::Zero { multiplicity },
            LogVal::Undefined => LogVal::Undefined,
        }
    }

    /// The plain complex value; may overflow to infinity for large logs.
    pub fn value(self) -> Option<Complex64> {
        match self {
            LogVal::Finite(l) => Some(l.exp()),
            LogVal::Zero { .. } => Some(Complex64::new(0.0, 0.0)),
            _ => None,
        }
    }

    pub fn from_value(v: Complex64) -> LogVal {
        if v.norm() == 0.0 {
            LogVal::Zero { multiplicity: 1 }
        } else {
            LogVal::Finite(v.ln())
        }
    }
}

/// log(e^{l1} - e^{l2}) computed without overflow: factors out the larger
/// exponent. Returns None when the difference cancels to exact zero.
pub fn log_sub(l1: Complex64, l2: Complex64) -> Option<Complex64> {
    let (big, small, sign) = if l1.re >= l2.re {
        (l1, l2, 1.0)
    } else {
        (l2, l1, -1.0)
    };
    let q = (small - big).exp(); // |q| <= 1
    let rest = Complex64::new(sign, 0.0) - sign * q;
    if rest.norm() == 0.0 {
        return None;
    }
    Some(big + rest.ln())
}

/// log of a weighted sum sum_j w_j e^{L_j} (skipping zero weights); None for
/// an exactly cancelling sum.
pub fn log_lincomb(terms: &[(Complex64, Complex64)]) -> Option<Complex64> {
    let max_re = terms
        .iter()
        .filter(|(w, _)| w.norm() > 0.0)
        .map(|(_, l)| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_re == f64::NEG_INFINITY {
        return None;
    }
    let shift = Complex64::new(max_re, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (w, l) in terms {
        if w.norm() > 0.0 {
            acc += w * (l - shift).exp();
        }
    }
    if acc.norm() == 0.0 {
        return None;
    }
    Some(shift + acc.ln())
}

/// Stable log(sinh w) for Re w >= 0.
pub fn log_sinh(w: Complex64) -> LogVal {
    let rest = Complex64::new(1.0, 0.0) - (-2.0 * w).exp();
    if rest.norm() == 0.0 {
        return LogVal::Zero { multiplicity: 1 };
    }
    LogVal::Finite(w + rest.ln() - Complex64::new(2.0f64.ln(), 0.0))
}

/// Stable log(cosh w) for Re w >= 0.
pub fn log_cosh(w: Complex64) -> LogVal {
    let rest = Complex64::new(1.0, 0.0) + (-2.0 * w).exp();
    if rest.norm() == 0.0 {
        return LogVal::Zero { multiplicity: 1 };
    }
    LogVal::Finite(w + rest.ln() - Complex64::new(2.0f64.ln(), 0.0))
}

/// Stable log(cos w): factors out the dominant of e^{iw}, e^{-iw}.
pub fn log_cos(w: Complex64) -> LogVal {
    let i = Complex64::new(0.0, 1.0);
    let dominant = if w.im <= 0.0 { i * w } else { -i * w };
    let rest = Complex64::new(1.0, 0.0) + (-2.0 * dominant).exp();
    if rest.norm() == 0.0 {
        return LogVal::Zero { multiplicity: 1 };
    }
    LogVal::Finite(dominant + rest.ln() - Complex64::new(2.0f64.ln(), 0.0))
}
