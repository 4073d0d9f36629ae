//! The Wilson operator calculus: branch-consistent square-root lattice
//! shifts, D_W, A_W, iterates, and the c-shift generalization.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Square root of x with the branch cut along the line through 0 and c,
/// defaulting (c = i) to the classical choice Re z >= 0 with on-cut points
/// resolved by continuity: sqrt(-m^2) = +im.
pub fn sqrt_with_cut(x: Complex64, c: Complex64) -> Complex64 {
    let z0 = x.sqrt();
    if z0.norm() == 0.0 {
        return z0;
    }
    let u = c / c.norm();
    let s = (z0 * u).im;
    if s > 0.0 {
        z0
    } else if s < 0.0 {
        -z0
    } else if (z0 * u.conj()).re >= 0.0 {
        z0
    } else {
        -z0
    }
}

/// A point of the Wilson square-root lattice carried in z-coordinates so
/// that iterated shifts stay branch-consistent: x^{+(m)} is exactly
/// (z + m c/2)^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeCoord {
    pub z: Complex64,
    pub c: Complex64,
}

pub const DEFAULT_SHIFT: Complex64 = Complex64::new(0.0, 1.0);

impl LatticeCoord {
    pub fn new(z: Complex64, c: Complex64) -> Self {
        assert!(c.norm() > 0.0, "shift must be nonzero");
        LatticeCoord { z, c }
    }

    pub fn from_x(x: Complex64, c: Complex64) -> Self {
        LatticeCoord::new(sqrt_with_cut(x, c), c)
    }

    pub fn from_x_default(x: Complex64) -> Self {
        LatticeCoord::from_x(x, DEFAULT_SHIFT)
    }

    pub fn x(&self) -> Complex64 {
        self.z * self.z
    }

    /// m half-shifts: z -> z + m c/2 (exact translation, round trips are
    /// identities in z-coordinates).
    pub fn shift(&self, m: i64) -> LatticeCoord {
        LatticeCoord::new(self.z + (m as f64) * self.c / 2.0, self.c)
    }

    pub fn plus(&self) -> LatticeCoord {
        self.shift(1)
    }

    pub fn minus(&self) -> LatticeCoord {
        self.shift(-1)
    }
}

/// Diagnostics for a single operator application.
#[derive(Debug, Clone)]
pub struct WilsonEvaluation {
    pub value: Complex64,
    pub at: LatticeCoord,
    pub used_points: Vec<LatticeCoord>,
}

fn check_finite(v: Complex64, at: LatticeCoord) -> Result<Complex64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::PoleOnStencil(at.x()))
    }
}

/// Wilson divided difference (f(x^+) - f(x^-)) / (x^+ - x^-); the origin
/// (z = 0) is delegated to `apply_dw_origin`.
pub fn apply_dw<F>(f: F, p: LatticeCoord) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let (zp, zm) = (p.plus(), p.minus());
    let denom = zp.x() - zm.x(); // = 2 z c
    if denom.norm() == 0.0 {
        // z = 0: central stencil degenerates; fall back to the derivative
        return apply_dw_origin(&f, p.c);
    }
    let fp = check_finite(f(zp.x()), zp)?;
    let fm = check_finite(f(zm.x()), zm)?;
    Ok((fp - fm) / denom)
}

/// (D_W f)(0) := f'(-1/4) (general shift c: f'(c^2/4)), by Richardson-refined
/// central differences with a consistency check across step sizes.
pub fn apply_dw_origin<F>(f: F, c: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let x0 = c * c / 4.0;
    let estimate = |h: f64| -> Complex64 {
        let hh = Complex64::new(h, 0.0);
        (f(x0 + hh) - f(x0 - hh)) / (2.0 * hh)
    };
    let h = 1e-5;
    let d1 = estimate(h);
    let d2 = estimate(h / 2.0);
    // Richardson: error O(h^2)
    let refined = (4.0 * d2 - d1) / 3.0;
    let scale = refined.norm().max(1.0);
    if (d1 - d2).norm() > 1e-3 * scale {
        return Err(Error::NotDifferentiable(format!(
            "central differences disagree: {d1} vs {d2}"
        )));
    }
    Ok(refined)
}

/// Wilson averaging operator (f(x^+) + f(x^-)) / 2.
pub fn apply_aw<F>(f: F, p: LatticeCoord) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let (zp, zm) = (p.plus(), p.minus());
    let fp = check_finite(f(zp.x()), zp)?;
    let fm = check_finite(f(zm.x()), zm)?;
    Ok((fp + fm) / 2.0)
}

/// k-fold application of D_W, expanded recursively over the symmetric
/// (k+1)-point stencil z + j c/2, j = -k..k (parity of k).
pub fn apply_dw_iter<F>(f: &F, p: LatticeCoord, k: u32) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    if k == 0 {
        return check_finite(f(p.x()), p);
    }
    if k == 1 {
        return apply_dw(f, p);
    }
    let (zp, zm) = (p.plus(), p.minus());
    let denom = zp.x() - zm.x();
    if denom.norm() == 0.0 {
        // derivative of D_W^{k-1} f at the lattice origin
        let g = |x: Complex64| {
            apply_dw_iter(f, LatticeCoord::from_x(x, p.c), k - 1).unwrap_or(Complex64::new(
                f64::NAN,
                f64::NAN,
            ))
        };
        return apply_dw_origin(g, p.c);
    }
    let vp = apply_dw_iter(f, zp, k - 1)?;
    let vm = apply_dw_iter(f, zm, k - 1)?;
    Ok((vp - vm) / denom)
}

/// Convergence report for the c -> 0 limit of the c-shift operator.
#[derive(Debug, Clone)]
pub struct CshiftReport {
    pub errors: Vec<(f64, f64)>,
    pub fitted_order: f64,
}

/// Compares D_{W,c} f(x) against f'(x) over a sequence of real shifts
/// c -> 0 and fits the convergence order.
pub fn cshift_limit_check<F, G>(f: F, fprime: G, x: Complex64, c_sequence: &[f64]) -> CshiftReport
where
    F: Fn(Complex64) -> Complex64,
    G: Fn(Complex64) -> Complex64,
{
    let want = fprime(x);
    let mut errors = Vec::with_capacity(c_sequence.len());
    for &cv in c_sequence {
        let c = Complex64::new(cv, 0.0);
        let p = LatticeCoord::from_x(x, c);
        let got = apply_dw(&f, p).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        errors.push((cv, (got - want).norm()));
    }
    // least squares slope of ln err vs ln c over the points with nonzero error
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .filter(|(_, e)| *e > 1e-15)
        .map(|(c, e)| (c.ln(), e.ln()))
        .collect();
    let fitted_order = crate::fit::ols_slope(&pts).unwrap_or(f64::INFINITY);
    CshiftReport {
        errors,
        fitted_order,
    }
}

/// |D_W cosh(2 pi sqrt(x))| evaluated in 384-bit arithmetic. The value is
/// exactly 0 analytically; in f64 the cancellation error scales with
/// |cosh(2 pi sqrt(x))| (up to ~1e27 for |x| <= 100), so a meaningful
/// kernel check needs extended precision.
pub fn kernel_residual_hp(x: Complex64) -> f64 {
    use rug::float::Constant;
    use rug::Float;
    const PREC: u32 = 384;
    let new = |v: f64| Float::with_val(PREC, v);
    let pi = Float::with_val(PREC, Constant::Pi);

    // z = sqrt(x) with Re z >= 0, Im z following sign(Im x) (ties -> +)
    let (xr, xi) = (new(x.re), new(x.im));
    let r = Float::with_val(PREC, xr.hypot_ref(&xi));
    let za = Float::with_val(PREC, (Float::with_val(PREC, &r + &xr)) / 2u8).sqrt();
    let mut zb = Float::with_val(PREC, (Float::with_val(PREC, &r - &xr)) / 2u8).sqrt();
    if x.im < 0.0 {
        zb = -zb;
    }

    // cosh(2 pi (za + i(zb +- 1/2))) componentwise
    let cosh_at = |im_shift: f64| -> (Float, Float) {
        let p = Float::with_val(PREC, &pi * &za) * 2u8;
        let q = Float::with_val(PREC, &pi * &Float::with_val(PREC, &zb + &new(im_shift))) * 2u8;
        let (ch, sh) = (
            Float::with_val(PREC, p.cosh_ref()),
            Float::with_val(PREC, p.sinh_ref()),
        );
        let (cq, sq) = (
            Float::with_val(PREC, q.cos_ref()),
            Float::with_val(PREC, q.sin_ref()),
        );
        (
            Float::with_val(PREC, &ch * &cq),
            Float::with_val(PREC, &sh * &sq),
        )
    };
    let (pr, pi_) = cosh_at(0.5);
    let (mr, mi) = cosh_at(-0.5);
    let (nr, ni) = (
        Float::with_val(PREC, &pr - &mr),
        Float::with_val(PREC, &pi_ - &mi),
    );

    // divide by x^+ - x^- = 2 i z = -2 zb + 2 za i
    let (dr, di) = (
        Float::with_val(PREC, &zb * -2i8),
        Float::with_val(PREC, &za * 2u8),
    );
    let den = Float::with_val(PREC, &dr * &dr) + Float::with_val(PREC, &di * &di);
    let qr = (Float::with_val(PREC, &nr * &dr) + Float::with_val(PREC, &ni * &di)) / &den;
    let qi = (Float::with_val(PREC, &ni * &dr) - Float::with_val(PREC, &nr * &di)) / &den;
    Float::with_val(PREC, qr.hypot(&qi)).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    const I: C = C::new(0.0, 1.0);

    #[test]
    fn sqrt_cut_basics() {
        assert!((sqrt_with_cut(c(4.0, 0.0), I) - c(2.0, 0.0)).norm() < 1e-15);
        // on-cut continuity: documented output +i
        assert!((sqrt_with_cut(c(-1.0, 0.0), I) - I).norm() < 1e-15);
        let z = sqrt_with_cut(c(0.0, 2.0), I);
        assert!((z - c(1.0, 1.0)).norm() < 1e-15);
        assert!((z * z - c(0.0, 2.0)).norm() < 1e-14);
        // real shift: positive reals keep the positive root
        assert!((sqrt_with_cut(c(9.0, 0.0), c(1.0, 0.0)) - c(3.0, 0.0)).norm() < 1e-15);
        assert!((sqrt_with_cut(c(-4.0, 0.0), c(1.0, 0.0)) - c(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn shift_round_trips() {
        let p = LatticeCoord::from_x_default(c(0.0, 0.0));
        assert!((p.shift(1).x() - c(-0.25, 0.0)).norm() < 1e-15);
        let q = LatticeCoord::from_x_default(c(0.37, -2.1));
        assert_eq!(q.shift(1).shift(-1).z, q.z);
        // chain -1 -> -4 by a double shift
        let m = LatticeCoord::new(I, I);
        assert!((m.shift(2).x() - c(-4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn dw_on_polynomials() {
        let p = LatticeCoord::from_x_default(c(1.3, 0.4));
        let dw_x = apply_dw(|x| x, p).unwrap();
        assert!((dw_x - c(1.0, 0.0)).norm() < 1e-13);
        let x = p.x();
        let dw_x2 = apply_dw(|x| x * x, p).unwrap();
        assert!((dw_x2 - (2.0 * x - 0.5)).norm() < 1e-12);
    }

    #[test]
    fn dw_kernel_cosh_high_precision() {
        // exact kernel membership at the points where f64 cancellation fails
        for x in [c(0.0, 40.0), c(99.0, 7.0), c(-50.0, 3.0), c(100.0, 0.0), c(-64.0, 0.0)] {
            let v = kernel_residual_hp(x);
            assert!(v < 1e-30, "x = {x}, residual {v}");
        }
    }

    #[test]
    fn dw_kernel_cosh() {
        // cosh(2 pi sqrt(x)) lies in the kernel of D_W
        let f = |x: C| (2.0 * PI * x.sqrt()).cosh();
        for seed in 0..20 {
            let t = seed as f64;
            let x = c((t * 0.37).sin() * 40.0, (t * 0.71).cos() * 40.0);
            if x.im.abs() < 1e-3 && x.re < 0.0 {
                continue;
            }
            let v = apply_dw(f, LatticeCoord::from_x_default(x)).unwrap();
            // the cancellation is exact up to roundoff in f itself
            let scale = 1.0 + f(x).norm();
            assert!(v.norm() < 1e-12 * scale, "x = {x}, D_W = {v}");
        }
    }

    #[test]
    fn dw_origin_values() {
        assert!((apply_dw_origin(|x| x, DEFAULT_SHIFT).unwrap() - c(1.0, 0.0)).norm() < 1e-9);
        assert!(
            (apply_dw_origin(|x| x * x, DEFAULT_SHIFT).unwrap() - c(-0.5, 0.0)).norm() < 1e-8
        );
        let e = apply_dw_origin(|x| x.exp(), DEFAULT_SHIFT).unwrap();
        assert!((e - c((-0.25f64).exp(), 0.0)).norm() < 1e-8);
        // agrees with apply_dw at |x| = 1e-6
        let p = LatticeCoord::from_x_default(c(1e-6, 0.0));
        let near = apply_dw(|x| x.exp(), p).unwrap();
        assert!((near - e).norm() < 1e-4);
    }

    #[test]
    fn aw_values() {
        let p = LatticeCoord::from_x_default(c(0.8, -0.3));
        let x = p.x();
        assert!((apply_aw(|_| c(3.0, 1.0), p).unwrap() - c(3.0, 1.0)).norm() < 1e-15);
        assert!((apply_aw(|x| x, p).unwrap() - (x - 0.25)).norm() < 1e-13);
        // ((x^+)^2 + (x^-)^2)/2 = (x + c^2/4)^2 + c^2 x = x^2 - 3x/2 + 1/16
        let aw2 = apply_aw(|x| x * x, p).unwrap();
        assert!((aw2 - (x * x - 1.5 * x + 0.0625)).norm() < 1e-12);
    }

    #[test]
    fn dw_iterates() {
        let p = LatticeCoord::from_x_default(c(0.9, 1.1));
        let d2 = apply_dw_iter(&|x: C| x * x, p, 2).unwrap();
        assert!((d2 - c(2.0, 0.0)).norm() < 1e-11);
        let d3 = apply_dw_iter(&|x: C| x * x, p, 3).unwrap();
        assert!(d3.norm() < 1e-10);
        let d1 = apply_dw_iter(&|x: C| x * x * x, p, 1).unwrap();
        let direct = apply_dw(|x: C| x * x * x, p).unwrap();
        assert!((d1 - direct).norm() < 1e-13);
    }

    #[test]
    fn cshift_convergence() {
        // exact fixture: D_{W,c} x^2 - 2x = c^2/2, since the numerator is
        // (x + zc + c^2/4)^2 - (x - zc + c^2/4)^2 = 2 zc (2x + c^2/2)
        for cv in [1e-1, 1e-2, 1e-3] {
            let p = LatticeCoord::from_x(c(1.7, 0.0), c(cv, 0.0));
            let got = apply_dw(|x| x * x, p).unwrap();
            let x = p.x();
            assert!((got - (2.0 * x + cv * cv / 2.0)).norm() < 1e-12);
        }
        let report = cshift_limit_check(
            |x: C| x.exp(),
            |x: C| x.exp(),
            c(1.0, 0.0),
            &[1e-1, 1e-2, 1e-3],
        );
        assert!(report.fitted_order > 1.9, "order {}", report.fitted_order);
        let lin = cshift_limit_check(|x: C| x, |_| c(1.0, 0.0), c(0.3, 0.0), &[1e-2, 1e-3]);
        for (_, e) in lin.errors {
            assert!(e < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn branch_independence(re in -5.0f64..5.0, im in -5.0f64..5.0) {
            // D_W and A_W computed from z and -z agree exactly
            let z = c(re, im);
            if z.norm() < 1e-3 { return Ok(()); }
            let f = |x: C| x * x * x + c(0.3, 0.1) * x;
            let a = apply_dw(f, LatticeCoord::new(z, I)).unwrap();
            let b = apply_dw(f, LatticeCoord::new(-z, I)).unwrap();
            prop_assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
            let aa = apply_aw(f, LatticeCoord::new(z, I)).unwrap();
            let ab = apply_aw(f, LatticeCoord::new(-z, I)).unwrap();
            prop_assert!((aa - ab).norm() <= 1e-10 * (1.0 + aa.norm()));
        }

        #[test]
        fn product_and_quotient_rules(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let z = c(re, im);
            if z.norm() < 1e-2 { return Ok(()); }
            let p = LatticeCoord::new(z, I);
            let f = |x: C| x * x + c(1.0, 0.5);
            let g = |x: C| x.exp();
            let fg = |x: C| f(x) * g(x);
            let lhs = apply_dw(fg, p).unwrap();
            let rhs = apply_aw(f, p).unwrap() * apply_dw(g, p).unwrap()
                + apply_aw(g, p).unwrap() * apply_dw(f, p).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));

            // quotient rule: D_W(g/f) = (A_W f D_W g - A_W g D_W f) / (f(x^+) f(x^-))
            let fp = f(p.plus().x());
            let fm = f(p.minus().x());
            if fp.norm() > 1e-3 && fm.norm() > 1e-3 {
                let q = |x: C| g(x) / f(x);
                let lhs = apply_dw(q, p).unwrap();
                let rhs = (apply_aw(f, p).unwrap() * apply_dw(g, p).unwrap()
                    - apply_aw(g, p).unwrap() * apply_dw(f, p).unwrap())
                    / (fp * fm);
                prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
            }
        }

        #[test]
        fn linearity(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let z = c(re, im);
            if z.norm() < 1e-2 { return Ok(()); }
            let p = LatticeCoord::new(z, I);
            let alpha = c(1.3, -0.2);
            let beta = c(0.4, 0.9);
            let f = |x: C| x * x;
            let g = |x: C| x.exp();
            let combo = |x: C| alpha * f(x) + beta * g(x);
            let lhs = apply_dw(combo, p).unwrap();
            let rhs = alpha * apply_dw(f, p).unwrap() + beta * apply_dw(g, p).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn degree_lowering_by_interpolation() {
        // D_W of a degree-d polynomial is a polynomial of degree d-1:
        // finite differences of sampled values vanish at order d
        let coeffs = [c(0.3, 0.0), c(-1.0, 0.4), c(2.0, 0.0), c(0.7, -0.2)];
        let f = |x: C| {
            let mut acc = c(0.0, 0.0);
            for &a in coeffs.iter().rev() {
                acc = acc * x + a;
            }
            acc
        };
        let d = coeffs.len() - 1;
        let samples: Vec<C> = (0..=d)
            .map(|j| {
                let x = c(j as f64 + 0.5, 0.3);
                apply_dw(f, LatticeCoord::from_x_default(x)).unwrap()
            })
            .collect();
        // degree d-1 in x along this arithmetic progression: d-th finite
        // difference must vanish
        let mut diffs = samples;
        for _ in 0..d {
            diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
        }
        assert!(diffs[0].norm() < 1e-9);
    }
}
