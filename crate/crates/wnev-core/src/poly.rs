//! Wilson polynomials, the lowering identity, the weight mu, and the
//! Wilson-Sturm-Liouville operator with its eigen-equation residuals.

use crate::error::{Error, Result};
use crate::lattice::{apply_dw, sqrt_with_cut, LatticeCoord, DEFAULT_SHIFT};
use crate::specfun::{gamma, hyp4f3_terminating};
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy)]
pub struct WilsonParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl WilsonParams {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        WilsonParams { a, b, c, d }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        WilsonParams::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn list(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn sum(&self) -> Complex64 {
        self.a + self.b + self.c + self.d
    }

    pub fn shifted(&self, h: f64) -> Self {
        WilsonParams::new(self.a + h, self.b + h, self.c + h, self.d + h)
    }

    /// Weight-function admissibility: no pairwise sum (with repetition)
    /// may be a nonpositive integer.
    pub fn check_weight(&self) -> Result<()> {
        for p in self.list() {
            for q in self.list() {
                let s = p + q;
                if s.im.abs() < 1e-12 && s.re <= 1e-12 && (s.re - s.re.round()).abs() < 1e-12 {
                    return Err(Error::ParameterError(format!(
                        "pairwise parameter sum {s} is a nonpositive integer"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// W_n at a lattice coordinate: prefactor (a+b)_n (a+c)_n (a+d)_n times the
/// terminating 4F3 with upper parameters (-n, n+s-1, a+iz, a-iz).
pub(crate) fn wilson_poly_z(n: u32, params: &WilsonParams, z: Complex64) -> Result<Complex64> {
    let WilsonParams { a, b, c, d } = *params;
    let s = params.sum();
    let mut prefactor = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let kf = k as f64;
        prefactor *= (a + b + kf) * (a + c + kf) * (a + d + kf);
    }
    let f = hyp4f3_terminating(
        n,
        [s + (n as f64 - 1.0), a + I * z, a - I * z],
        [a + b, a + c, a + d],
        Complex64::new(1.0, 0.0),
    )?;
    Ok(prefactor * f)
}

pub fn wilson_poly(n: u32, params: &WilsonParams, x: Complex64) -> Result<Complex64> {
    wilson_poly_z(n, params, x.sqrt())
}

/// D_W W_n(x) - C_n W_{n-1}(x; a+1/2, ...) with C_n = -n(n+s-1).
pub fn lowering_residual(n: u32, params: &WilsonParams, x: Complex64) -> Result<Complex64> {
    let s = params.sum();
    let nf = n as f64;
    let cn = -nf * (nf + s - 1.0);
    let f = |u: Complex64| wilson_poly(n, params, u).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    let dw = apply_dw(f, LatticeCoord::from_x_default(x))?;
    let lowered = wilson_poly(n - 1, &params.shifted(0.5), x)?;
    Ok(dw - cn * lowered)
}

/// mu with gamma arguments p -+ w: for the i-shift weight w = iz, for the
/// 1-shift weight w = z.
fn weight_from_w(w: Complex64, params: &WilsonParams) -> Result<Complex64> {
    let mut num = Complex64::new(1.0, 0.0);
    for p in params.list() {
        num *= gamma(p - w)? * gamma(p + w)?;
    }
    Ok(num / (gamma(2.0 * w)? * gamma(-2.0 * w)?))
}

pub fn weight_mu(x: Complex64, params: &WilsonParams) -> Result<Complex64> {
    params.check_weight()?;
    let z = sqrt_with_cut(x, DEFAULT_SHIFT);
    weight_from_w(I * z, params)
}

/// Self-adjoint-form residual, relative to its largest term. The three terms live on
/// the exact 5-point z-stencil z, z +- i/2, z +- i; the shifted weight
/// carries denominators (2iz -+ 1)^2 so that the identity reduces to the
/// classical three-term difference equation for W_n.
pub fn sturm_liouville_residual(
    n: u32,
    params: &WilsonParams,
    x: Complex64,
) -> Result<Complex64> {
    let z = sqrt_with_cut(x, DEFAULT_SHIFT);
    let s = params.sum();
    let nf = n as f64;
    let shifted = params.shifted(0.5);
    let w_at = |zz: Complex64| wilson_poly_z(n, params, zz);
    let w0 = w_at(z)?;
    let wp = w_at(z + I)?;
    let wm = w_at(z - I)?;
    let two_iz = 2.0 * I * z;
    let t1 = weight_from_w(I * (z + 0.5 * I), &shifted)? * (wp - w0) / ((two_iz - 1.0) * (two_iz - 1.0));
    let t2 = weight_from_w(I * (z - 0.5 * I), &shifted)? * (w0 - wm) / ((two_iz + 1.0) * (two_iz + 1.0));
    let t3 = nf * (nf + s - 1.0) * weight_from_w(I * z, params)? * w0;
    let scale = t1.norm().max(t2.norm()).max(t3.norm());
    if scale == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok((t1 - t2 + t3) / scale)
}

/// L_W f = (1/mu) D_W(mu(.; shifted) D_W f) on the same exact z-stencil;
/// eigenfunctions W_n have eigenvalue -n(n+s-1).
pub fn lw_apply<F>(f: F, params: &WilsonParams, x: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let z = sqrt_with_cut(x, DEFAULT_SHIFT);
    let shifted = params.shifted(0.5);
    let f0 = f(z * z);
    let fp = f((z + I) * (z + I));
    let fm = f((z - I) * (z - I));
    let two_iz = 2.0 * I * z;
    let t1 = weight_from_w(I * (z + 0.5 * I), &shifted)? * (fp - f0) / ((two_iz - 1.0) * (two_iz - 1.0));
    let t2 = weight_from_w(I * (z - 0.5 * I), &shifted)? * (f0 - fm) / ((two_iz + 1.0) * (two_iz + 1.0));
    let mu = weight_from_w(I * z, params)?;
    Ok((t1 - t2) / mu)
}

/// Eigensolutions of the 1-shift equation: g_0 = 1 and
/// g_n(x) = (x - 1/4) (n+1)!/(2n)! W_{n-1}(-x; 1/2, 1/2, 3/2, 3/2).
pub fn physics_eigensolution(n: u32, x: Complex64) -> Result<Complex64> {
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut scale = 1.0;
    for k in (n + 2)..=(2 * n) {
        scale /= k as f64;
    }
    let w = wilson_poly(n - 1, &WilsonParams::real(0.5, 0.5, 1.5, 1.5), -x)?;
    Ok((x - 0.25) * scale * w)
}

/// Real-shift eigen-equation residual: eigenvalue l_1 = 2n + 1, base
/// parameters (-1/2, 1/2, 1/2, 3/2), relative to the largest term.
pub fn physics_eigen_check(n: u32, x: Complex64) -> Result<f64> {
    let base = WilsonParams::real(-0.5, 0.5, 0.5, 1.5);
    let shifted = base.shifted(0.5);
    let one = Complex64::new(1.0, 0.0);
    let z = sqrt_with_cut(x, one);
    let g = |zz: Complex64| physics_eigensolution(n, zz * zz);
    let g0 = g(z)?;
    let gp = g(z + 1.0)?;
    let gm = g(z - 1.0)?;
    let two_z = 2.0 * z;
    let t1 = weight_from_w(z + 0.5, &shifted)? * (gp - g0) / ((two_z + 1.0) * (two_z + 1.0));
    let t2 = weight_from_w(z - 0.5, &shifted)? * (g0 - gm) / ((two_z - 1.0) * (two_z - 1.0));
    let nf = n as f64;
    let t3 = nf * (nf + 1.0) * weight_from_w(z, &base)? * g0;
    let scale = t1.norm().max(t2.norm()).max(t3.norm());
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((t1 - t2 + t3).norm() / scale)
}
