//! C ABI wrapper around wnev-core. See include/wnev.h (generated).

use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use wnev_core::counting::{defect_estimates, wilson_counts};
use wnev_core::fit::log_grid;
use wnev_core::lattice::DEFAULT_SHIFT;
use wnev_core::model::{model_by_label, Eval, MeromorphicModel};
use wnev_core::nevanlinna::{characteristic_row, default_tol};

/// Status codes returned by every fallible entry point.
pub const WNEV_OK: i32 = 0;
/// The point is a pole of the model.
pub const WNEV_POLE: i32 = 1;
/// No finite value exists (undefined point or missing evaluator).
pub const WNEV_UNDEFINED: i32 = 2;
/// Null pointer or malformed argument.
pub const WNEV_BAD_ARGUMENT: i32 = 3;
/// Computation failed; wnev_last_error() has the reason.
pub const WNEV_COMPUTE_ERROR: i32 = 4;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&ch| ch != '\0').collect();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(sanitized).unwrap());
}

/// Opaque handle to a catalog model.
pub struct WnevModel {
    inner: MeromorphicModel,
}

/// Nevanlinna functionals at one radius.
#[repr(C)]
pub struct WnevCharacteristicRow {
    pub r: f64,
    pub m: f64,
    pub big_n: f64,
    pub t: f64,
    pub quadrature_error: f64,
}

/// Wilson counting functions at one radius.
#[repr(C)]
pub struct WnevCountRow {
    pub r: f64,
    pub n_w: u64,
    pub n_w_tilde: u64,
    pub big_n_w: f64,
    pub big_n_w_tilde: f64,
}

/// Wilson defect estimates over a log grid.
#[repr(C)]
pub struct WnevDefects {
    pub theta_w: f64,
    pub vartheta_w: f64,
    pub delta: f64,
}

/// The message from the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wnev_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Builds a model from a catalog label such as "exp", "product_i(1)",
/// "g_iii(2,1)" or "ghyp". Returns null on failure.
///
/// # Safety
/// `label` must point to a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn wnev_model_new(label: *const c_char) -> *mut WnevModel {
    if label.is_null() {
        set_error("label is null");
        return ptr::null_mut();
    }
    let label = match CStr::from_ptr(label).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("label is not valid UTF-8");
            return ptr::null_mut();
        }
    };
    match model_by_label(label) {
        Ok(inner) => Box::into_raw(Box::new(WnevModel { inner })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Frees a model handle; null is a no-op.
///
/// # Safety
/// `model` must be null or a live pointer from wnev_model_new, not freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn wnev_model_free(model: *mut WnevModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

unsafe fn model_ref<'a>(model: *const WnevModel) -> Option<&'a MeromorphicModel> {
    (model as *const WnevModel).as_ref().map(|m| &m.inner)
}

/// Evaluates the model at x = re + i im.
///
/// # Safety
/// `model` must be a live handle; `out_re` and `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wnev_model_eval(
    model: *const WnevModel,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> i32 {
    let Some(model) = model_ref(model) else {
        set_error("model handle is null");
        return WNEV_BAD_ARGUMENT;
    };
    if out_re.is_null() || out_im.is_null() {
        set_error("output pointer is null");
        return WNEV_BAD_ARGUMENT;
    }
    match model.evaluate(Complex64::new(re, im)) {
        Eval::Value(v) => {
            *out_re = v.re;
            *out_im = v.im;
            WNEV_OK
        }
        Eval::Pole => {
            set_error("pole of the model");
            WNEV_POLE
        }
        Eval::Undefined => {
            set_error("model has no finite value there");
            WNEV_UNDEFINED
        }
    }
}

fn opt_a(has_a: i32, a_re: f64, a_im: f64) -> Option<Complex64> {
    (has_a != 0).then(|| Complex64::new(a_re, a_im))
}

/// T(r, 1/(f-a)) decomposition at radius r; pass has_a = 0 for poles.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wnev_characteristic_row(
    model: *const WnevModel,
    has_a: i32,
    a_re: f64,
    a_im: f64,
    r: f64,
    out: *mut WnevCharacteristicRow,
) -> i32 {
    let Some(model) = model_ref(model) else {
        set_error("model handle is null");
        return WNEV_BAD_ARGUMENT;
    };
    if out.is_null() {
        set_error("output pointer is null");
        return WNEV_BAD_ARGUMENT;
    }
    if !(r > 0.0) {
        set_error("radius must be positive");
        return WNEV_BAD_ARGUMENT;
    }
    let a = opt_a(has_a, a_re, a_im);
    let result = catch_unwind(AssertUnwindSafe(|| {
        characteristic_row(model, a, r, default_tol(r))
    }));
    match result {
        Ok(Ok(row)) => {
            *out = WnevCharacteristicRow {
                r: row.r,
                m: row.m,
                big_n: row.n,
                t: row.t,
                quadrature_error: row.quadrature_error,
            };
            WNEV_OK
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            WNEV_COMPUTE_ERROR
        }
        Err(_) => {
            set_error("internal panic in characteristic_row");
            WNEV_COMPUTE_ERROR
        }
    }
}

/// Wilson counting functions n_W, n_W~, N_W, N_W~ at radius r with shift
/// c = c_re + i c_im (pass 0, 1 for the default shift).
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wnev_count_row(
    model: *const WnevModel,
    has_a: i32,
    a_re: f64,
    a_im: f64,
    r: f64,
    c_re: f64,
    c_im: f64,
    out: *mut WnevCountRow,
) -> i32 {
    let Some(model) = model_ref(model) else {
        set_error("model handle is null");
        return WNEV_BAD_ARGUMENT;
    };
    if out.is_null() {
        set_error("output pointer is null");
        return WNEV_BAD_ARGUMENT;
    }
    if !(r > 0.0) {
        set_error("radius must be positive");
        return WNEV_BAD_ARGUMENT;
    }
    let c = Complex64::new(c_re, c_im);
    if c.norm() == 0.0 {
        set_error("shift c must be nonzero");
        return WNEV_BAD_ARGUMENT;
    }
    let a = opt_a(has_a, a_re, a_im);
    let result = catch_unwind(AssertUnwindSafe(|| wilson_counts(model, a, r, c)));
    match result {
        Ok(Ok(row)) => {
            *out = WnevCountRow {
                r: row.r,
                n_w: row.n_w,
                n_w_tilde: row.n_w_tilde,
                big_n_w: row.big_n_w,
                big_n_w_tilde: row.big_n_w_tilde,
            };
            WNEV_OK
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            WNEV_COMPUTE_ERROR
        }
        Err(_) => {
            set_error("internal panic in wilson_counts");
            WNEV_COMPUTE_ERROR
        }
    }
}

/// Wilson defect estimates over the log grid [r_min, r_max] with
/// points_per_decade sample density.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wnev_defect_estimates(
    model: *const WnevModel,
    has_a: i32,
    a_re: f64,
    a_im: f64,
    r_min: f64,
    r_max: f64,
    points_per_decade: u32,
    out: *mut WnevDefects,
) -> i32 {
    let Some(model) = model_ref(model) else {
        set_error("model handle is null");
        return WNEV_BAD_ARGUMENT;
    };
    if out.is_null() {
        set_error("output pointer is null");
        return WNEV_BAD_ARGUMENT;
    }
    if !(r_min > 0.0 && r_min < r_max) || points_per_decade < 5 {
        set_error("need 0 < r_min < r_max and points_per_decade >= 5");
        return WNEV_BAD_ARGUMENT;
    }
    let a = opt_a(has_a, a_re, a_im);
    let grid = log_grid(r_min, r_max, points_per_decade as usize);
    let result = catch_unwind(AssertUnwindSafe(|| {
        defect_estimates(model, a, &grid, DEFAULT_SHIFT)
    }));
    match result {
        Ok(Ok(d)) => {
            *out = WnevDefects {
                theta_w: d.theta_w,
                vartheta_w: d.vartheta_w,
                delta: d.delta,
            };
            WNEV_OK
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            WNEV_COMPUTE_ERROR
        }
        Err(_) => {
            set_error("internal panic in defect_estimates");
            WNEV_COMPUTE_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    #[test]
    fn construct_eval_free() {
        unsafe {
            let label = CString::new("exp").unwrap();
            let model = wnev_model_new(label.as_ptr());
            assert!(!model.is_null());
            let (mut re, mut im) = (0.0, 0.0);
            let code = wnev_model_eval(model, 1.0, 0.0, &mut re, &mut im);
            assert_eq!(code, WNEV_OK);
            assert!((re - 1f64.exp()).abs() < 1e-12 && im.abs() < 1e-12);
            wnev_model_free(model);
        }
    }

    #[test]
    fn bad_label_sets_error() {
        unsafe {
            let label = CString::new("no_such_model").unwrap();
            let model = wnev_model_new(label.as_ptr());
            assert!(model.is_null());
            let msg = CStr::from_ptr(wnev_last_error()).to_str().unwrap();
            assert!(msg.contains("no_such_model"), "{msg}");
            assert!(wnev_model_new(ptr::null()).is_null());
        }
    }

    #[test]
    fn characteristic_and_counts() {
        unsafe {
            let label = CString::new("product_i(1)").unwrap();
            let model = wnev_model_new(label.as_ptr());
            assert!(!model.is_null());

            let mut row = std::mem::zeroed::<WnevCharacteristicRow>();
            let code = wnev_characteristic_row(model, 0, 0.0, 0.0, 100.0, &mut row);
            assert_eq!(code, WNEV_OK);
            assert!(row.t > 0.0 && (row.t - row.m - row.big_n).abs() < 1e-12);

            let mut counts = std::mem::zeroed::<WnevCountRow>();
            let code = wnev_count_row(model, 1, 0.0, 0.0, 100.0, 0.0, 1.0, &mut counts);
            assert_eq!(code, WNEV_OK);
            assert!(counts.n_w > 0);
            assert_eq!(counts.n_w_tilde, 0);

            assert_eq!(
                wnev_count_row(model, 0, 0.0, 0.0, -1.0, 0.0, 1.0, &mut counts),
                WNEV_BAD_ARGUMENT
            );
            assert_eq!(
                wnev_characteristic_row(ptr::null(), 0, 0.0, 0.0, 10.0, &mut row),
                WNEV_BAD_ARGUMENT
            );
            wnev_model_free(model);
        }
    }

    #[test]
    fn defect_estimates_roundtrip() {
        unsafe {
            let label = CString::new("product_i(1)").unwrap();
            let model = wnev_model_new(label.as_ptr());
            let mut d = std::mem::zeroed::<WnevDefects>();
            let code = wnev_defect_estimates(model, 1, 0.0, 0.0, 10.0, 1e3, 6, &mut d);
            assert_eq!(code, WNEV_OK);
            assert!(d.theta_w > 0.9, "theta_w = {}", d.theta_w);
            assert_eq!(
                wnev_defect_estimates(model, 1, 0.0, 0.0, 10.0, 1e3, 2, &mut d),
                WNEV_BAD_ARGUMENT
            );
            wnev_model_free(model);
        }
    }
}
