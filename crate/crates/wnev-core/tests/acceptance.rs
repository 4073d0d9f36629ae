//! End-to-end acceptance gate: one pass/fail line per criterion.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;
use wnev_core::counting::{
    defect_estimates, defect_sum_check, detect_chains, exceptional_value_verdict,
    sample_pole_field, wilson_count_grid,
};
use wnev_core::equations::{c22_equation, interp_terms};
use wnev_core::fit::{growth_exponent, log_grid, top_decade};
use wnev_core::lattice::{
    apply_dw, cshift_limit_check, kernel_residual_hp, LatticeCoord, DEFAULT_SHIFT,
};
use wnev_core::model::model_by_label;
use wnev_core::nevanlinna::{
    characteristic_row, counting_integrated, default_tol, fft_residual, fft_residual_slope,
    log_wilson_proximity, order_estimate,
};
use wnev_core::poly::{
    lowering_residual, physics_eigen_check, sturm_liouville_residual, wilson_poly, WilsonParams,
};
use wnev_core::series::{expand, growth_gate, reconstruct};
use wnev_core::specfun::hyperbolic_gamma;

const CATALOG: [&str; 7] = [
    "exp",
    "product_i(1)",
    "phi_ii(1)",
    "g_iii(2,1)",
    "h_iv(0.5)",
    "ghyp",
    "cosh_pi_sqrt",
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

type Outcome = Result<String, String>;

fn criterion_01_kernel() -> Outcome {
    let mut rng = StdRng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let mut drawn = 0;
    while drawn < 200 {
        let x = Complex64::from_polar(rng.gen_range(0.01..100.0), rng.gen_range(-PI..PI));
        if x.re < 0.0 && x.im.abs() < 1e-6 * x.re.abs() {
            continue;
        }
        drawn += 1;
        worst = worst.max(kernel_residual_hp(x));
    }
    if worst < 1e-9 {
        Ok(format!("max |D_W cosh 2pi sqrt(x)| = {worst:.3e} over 200 points"))
    } else {
        Err(format!("max kernel residual {worst:.3e} >= 1e-9"))
    }
}

fn criterion_02_best_constant() -> Outcome {
    let exp = model_by_label("exp").unwrap();
    let mut parts = Vec::new();
    for &r in &[1e4, 1e5, 1e6] {
        let (m, _) = log_wilson_proximity(&exp, r, DEFAULT_SHIFT, default_tol(r))
            .map_err(|e| e.to_string())?;
        let ratio = m * PI / (2.0 * r.sqrt());
        // limit constant is 1; at r = 1e4 the log correction
        // 1 - pi(ln 2 sqrt r + 1/4)/(2 sqrt r) still dominates, so the
        // check there is against the corrected prediction
        let predicted = 1.0 - PI * ((2.0 * r.sqrt()).ln() + 0.25) / (2.0 * r.sqrt());
        let ok = if r < 5e4 {
            (ratio - predicted).abs() <= 0.02
        } else {
            (0.95..=1.05).contains(&ratio)
        };
        if !ok {
            return Err(format!(
                "m pi/(2 sqrt r) = {ratio:.4} at r = {r:.0e} (prediction {predicted:.4})"
            ));
        }
        parts.push(format!("{ratio:.4} @ {r:.0e}"));
    }
    Ok(format!("m(r, D_W e^x/e^x) pi/(2 sqrt r) = {}", parts.join(", ")))
}

fn criterion_03_logdiff_lemma() -> Outcome {
    let grid = log_grid(1e2, 1e4, 6);
    let mut parts = Vec::new();
    for label in CATALOG {
        let model = model_by_label(label).unwrap();
        if model.declared_order < 0.5 {
            continue;
        }
        let mut pts = Vec::new();
        for &r in &grid {
            let (m, _) = log_wilson_proximity(&model, r, DEFAULT_SHIFT, default_tol(r))
                .map_err(|e| format!("{label}: {e}"))?;
            pts.push((r, m));
        }
        let bound = model.declared_order - 0.5 + 0.1;
        let top_max = pts
            .iter()
            .rev()
            .take(6)
            .map(|p| p.1)
            .fold(0.0f64, f64::max);
        match growth_exponent(&pts) {
            _ if top_max < 0.05 => parts.push(format!("{label}: m bounded ({top_max:.3})")),
            Some(e) if e <= bound => parts.push(format!("{label}: {e:.3} <= {bound:.2}")),
            Some(e) => return Err(format!("{label}: exponent {e:.3} > {bound:.2}")),
            None => parts.push(format!("{label}: m nonpositive")),
        }
    }
    Ok(parts.join("; "))
}

fn criterion_04_example_iii() -> Outcome {
    let g = model_by_label("g_iii(2,1)").unwrap();
    let grid = log_grid(10.0, 1e5, 8);
    let rows = wilson_count_grid(&g, Some(c(0.0, 0.0)), &grid, DEFAULT_SHIFT)
        .map_err(|e| e.to_string())?;
    for &r in &top_decade(&grid) {
        let row = characteristic_row(&g, None, r, default_tol(r)).map_err(|e| e.to_string())?;
        let t_ratio = row.t / r.sqrt();
        if !(2.85..=3.15).contains(&t_ratio) {
            return Err(format!("T/sqrt r = {t_ratio:.3} at r = {r:.3e}"));
        }
        let count = rows.iter().find(|w| w.r == r).unwrap();
        let n_ratio = count.n_w_tilde as f64 / r.sqrt();
        if !(0.45..=0.55).contains(&n_ratio) {
            return Err(format!("n_W~/sqrt r = {n_ratio:.3} at r = {r:.3e}"));
        }
    }
    let d = defect_estimates(&g, Some(c(0.0, 0.0)), &grid, DEFAULT_SHIFT)
        .map_err(|e| e.to_string())?;
    if !(0.61..=0.72).contains(&d.theta_w) {
        return Err(format!("Theta_W(0,g) = {:.4} outside [0.61, 0.72]", d.theta_w));
    }
    Ok(format!(
        "T/sqrt r and n_W~/sqrt r in window on top decade; Theta_W(0,g) = {:.4}",
        d.theta_w
    ))
}

fn criterion_05_example_i() -> Outcome {
    let f = model_by_label("product_i(1)").unwrap();
    let grid = log_grid(10.0, 1e4, 8);
    let zero = Some(c(0.0, 0.0));
    let d = defect_estimates(&f, zero, &grid, DEFAULT_SHIFT).map_err(|e| e.to_string())?;
    if d.theta_w < 0.95 {
        return Err(format!("Theta_W(0,f) = {:.4} < 0.95", d.theta_w));
    }
    let verdict =
        exceptional_value_verdict(&f, zero, 400.0, DEFAULT_SHIFT).map_err(|e| e.to_string())?;
    if !verdict.candidate {
        return Err(format!("not an exceptional candidate: {:?}", verdict.checkpoints));
    }
    let sums = defect_sum_check(&f, &[None, zero], &grid).map_err(|e| e.to_string())?;
    if !(1.9..=2.0).contains(&sums.theta_sum) {
        return Err(format!("sum Theta_W = {:.4} outside [1.9, 2.0]", sums.theta_sum));
    }
    Ok(format!(
        "Theta_W(0,f) = {:.4}, exceptional candidate, sum over {{0, inf}} = {:.4}",
        d.theta_w, sums.theta_sum
    ))
}

fn criterion_06_example_iv() -> Outcome {
    let grid = log_grid(10.0, 1e5, 6);
    let mut parts = Vec::new();
    for s in [0.0, 0.25, 0.5, 1.0] {
        let h = model_by_label(&format!("h_iv({s})")).unwrap();
        let d = defect_estimates(&h, Some(c(0.0, 0.0)), &grid, DEFAULT_SHIFT)
            .map_err(|e| e.to_string())?;
        if (d.theta_w - s).abs() > 0.07 {
            return Err(format!("Theta_W(0,h) = {:.4} vs s = {s}", d.theta_w));
        }
        parts.push(format!("s={s}: {:.3}", d.theta_w));
    }
    Ok(parts.join(", "))
}

fn criterion_07_fft() -> Outcome {
    let grid = log_grid(1e2, 1e4, 6);
    let mut parts = Vec::new();
    for label in ["product_i(1)", "g_iii(2,1)"] {
        let model = model_by_label(label).unwrap();
        let resid = fft_residual(&model, c(0.0, 0.0), &grid).map_err(|e| e.to_string())?;
        let slope = fft_residual_slope(&resid);
        if slope.abs() > 0.05 {
            return Err(format!("{label}: |T(r,1/f) - T(r,f)| slope {slope:.4}"));
        }
        parts.push(format!("{label}: {slope:.4}"));
    }
    Ok(format!("FFT residual slopes {}", parts.join(", ")))
}

fn criterion_08_figure() -> Outcome {
    let (divisors, radius) = sample_pole_field();
    let report = detect_chains(&divisors, None, DEFAULT_SHIFT, radius);
    if report.chains.len() == 3 && report.residual_points.len() == 5 {
        Ok("figure dataset: 3 chains, |E_W| = 5".into())
    } else {
        Err(format!(
            "{} chains, |E_W| = {}",
            report.chains.len(),
            report.residual_points.len()
        ))
    }
}

fn criterion_09_lowering() -> Outcome {
    let mut rng = StdRng::seed_from_u64(909);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(1..=8u32);
        let params = WilsonParams::real(
            rng.gen_range(0.3..1.5),
            rng.gen_range(0.3..1.5),
            rng.gen_range(0.3..1.5),
            rng.gen_range(0.3..1.5),
        );
        let x = c(rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0));
        let resid = lowering_residual(n, &params, x).map_err(|e| e.to_string())?;
        let scale = wilson_poly(n, &params, x)
            .map_err(|e| e.to_string())?
            .norm()
            .max(1.0);
        worst = worst.max(resid.norm() / scale);
    }
    if worst < 1e-8 {
        Ok(format!("max relative lowering residual = {worst:.3e}"))
    } else {
        Err(format!("lowering residual {worst:.3e} >= 1e-8"))
    }
}

fn criterion_10_sturm() -> Outcome {
    let params = WilsonParams::real(0.7, 1.1, 1.3, 2.4);
    let mut worst_sl: f64 = 0.0;
    for n in 0..=5u32 {
        for x in [c(1.4, 0.3), c(-0.5, 0.2), c(2.0, 0.0)] {
            let resid = sturm_liouville_residual(n, &params, x)
                .map_err(|e| e.to_string())?
                .norm();
            worst_sl = worst_sl.max(resid);
        }
    }
    let mut worst_ph: f64 = 0.0;
    for n in 1..=4u32 {
        for x in [c(0.8, 0.0), c(-0.3, 0.0), c(1.3, -0.4)] {
            worst_ph = worst_ph.max(physics_eigen_check(n, x).map_err(|e| e.to_string())?);
        }
    }
    if worst_sl < 1e-6 && worst_ph < 1e-6 {
        Ok(format!(
            "Sturm-Liouville residual {worst_sl:.3e}, physics eigen residual {worst_ph:.3e}"
        ))
    } else {
        Err(format!("residuals {worst_sl:.3e} / {worst_ph:.3e} >= 1e-6"))
    }
}

fn criterion_11_hyperbolic() -> Outcome {
    // shift equation G(z + i/2) = 2 cosh(pi z) G(z - i/2) on a strip grid
    let i = c(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for kx in 0..8 {
        for ky in -1..=1 {
            let z = c(0.05 + 0.2 * kx as f64, 0.3 * ky as f64);
            let lhs = hyperbolic_gamma(1.0, 1.0, z + i / 2.0, 1e-10).map_err(|e| e.to_string())?;
            let rhs = 2.0
                * (PI * z).cosh()
                * hyperbolic_gamma(1.0, 1.0, z - i / 2.0, 1e-10).map_err(|e| e.to_string())?;
            worst = worst.max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()));
        }
    }
    if worst >= 1e-6 {
        return Err(format!("shift-equation residual {worst:.3e} >= 1e-6"));
    }
    let y = model_by_label("ghyp").unwrap();
    let eq = c22_equation();
    let mut worst_eq: f64 = 0.0;
    for k in 0..10 {
        let x = c(0.3 + 0.8 * k as f64, 0.0);
        let terms = interp_terms(&eq, &y, x).map_err(|e| e.to_string())?;
        let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        let resid: Complex64 = terms.into_iter().sum();
        worst_eq = worst_eq.max(resid.norm() / scale);
    }
    if worst_eq >= 1e-6 {
        return Err(format!("shift-equation residual {worst_eq:.3e} >= 1e-6 for ghyp"));
    }
    let grid = log_grid(1e2, 1e4, 8);
    let (sigma_y, _) = order_estimate(&y, &grid).map_err(|e| e.to_string())?;
    if (sigma_y - 1.0).abs() > 0.1 {
        return Err(format!("ghyp fitted order {sigma_y:.3} outside 1 +- 0.1"));
    }
    let coeff = model_by_label("cosh_pi_sqrt").unwrap();
    let (sigma_c, _) = order_estimate(&coeff, &grid).map_err(|e| e.to_string())?;
    if (sigma_c - 0.5).abs() > 0.05 {
        return Err(format!("coefficient fitted order {sigma_c:.3} outside 0.5 +- 0.05"));
    }
    Ok(format!(
        "functional-equation residual {worst:.3e}; solution residual {worst_eq:.3e}; orders {sigma_y:.3} / {sigma_c:.3}"
    ))
}

fn criterion_12_climit() -> Outcome {
    let c_seq = [0.2, 0.1, 0.05, 0.025, 0.0125];
    let x = c(1.3, 0.4);
    let cases: [(&str, fn(Complex64) -> Complex64, fn(Complex64) -> Complex64); 3] = [
        ("x^3", |u| u * u * u, |u| 3.0 * u * u),
        ("e^x", |u| u.exp(), |u| u.exp()),
        (
            "cosh sqrt x",
            |u| u.sqrt().cosh(),
            |u| u.sqrt().sinh() / (2.0 * u.sqrt()),
        ),
    ];
    let mut parts = Vec::new();
    for (name, f, fp) in cases {
        let report = cshift_limit_check(f, fp, x, &c_seq);
        if report.fitted_order < 1.9 {
            return Err(format!("{name}: fitted order {:.3} < 1.9", report.fitted_order));
        }
        parts.push(format!("{name}: {:.2}", report.fitted_order));
    }
    // exact quadratic fixture: D_{W,c} x^2 - 2x = c^2/2 identically
    for shift in [DEFAULT_SHIFT, c(0.3, 0.0), c(0.2, -0.5)] {
        let x0 = c(1.7, -0.6);
        let got = apply_dw(|u| u * u, LatticeCoord::from_x(x0, shift)).map_err(|e| e.to_string())?;
        let err = (got - 2.0 * x0 - shift * shift / 2.0).norm();
        if err > 1e-13 {
            return Err(format!("D_W x^2 fixture off by {err:.3e} at c = {shift}"));
        }
    }
    Ok(format!("orders {}; quadratic fixture exact", parts.join(", ")))
}

fn criterion_13_series() -> Outcome {
    let f = |x: Complex64| x * x + c(0.0, 2.0) * x - 1.0;
    let series = expand(f, c(0.5, 0.0), 2).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let x = c(-4.0 + k as f64, 0.7);
        worst = worst.max((reconstruct(&series, x) - f(x)).norm());
    }
    if worst > 1e-10 {
        return Err(format!("polynomial round trip error {worst:.3e} > 1e-10"));
    }
    let grid = log_grid(10.0, 1e4, 10);
    let m_pass = growth_gate(|x: Complex64| x.sqrt().cosh(), &grid);
    let m_fail = growth_gate(|x: Complex64| (PI * x.sqrt()).cosh(), &grid);
    if m_pass > 0.0 && m_fail < 0.0 {
        Ok(format!(
            "round trip {worst:.3e}; gate margins {m_pass:.3} (cosh sqrt x) / {m_fail:.3} (cosh pi sqrt x)"
        ))
    } else {
        Err(format!("gate margins {m_pass:.3} / {m_fail:.3} have wrong signs"))
    }
}

fn criterion_14_counting_gap() -> Outcome {
    let radii: Vec<f64> = (0..25)
        .map(|k| 10f64.powf(1.0 + 2.0 * k as f64 / 24.0))
        .collect();
    let mut checked = 0;
    for label in CATALOG {
        let model = model_by_label(label).unwrap();
        for a in [None, Some(c(0.0, 0.0))] {
            let stream = match model.a_points(a) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let rows = wilson_count_grid(&model, a, &radii, DEFAULT_SHIFT)
                .map_err(|e| format!("{label}: {e}"))?;
            for row in &rows {
                let n_classic = counting_integrated(&stream, row.r);
                let gap = n_classic - row.big_n_w - row.big_n_w_tilde;
                if gap > 1e-9 {
                    return Err(format!(
                        "{label}, a = {a:?}: N - N_W - N_W~ = {gap:.3e} > 0 at r = {:.3e}",
                        row.r
                    ));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("N(r) - N_W(r) <= N_W~(r) at {checked} (model, a, r) samples"))
}

fn criterion_15_nsft() -> Outcome {
    let g = model_by_label("g_iii(2,1)").unwrap();
    let grid = log_grid(10.0, 1e4, 8);
    let report =
        defect_sum_check(&g, &[None, Some(c(0.0, 0.0))], &grid).map_err(|e| e.to_string())?;
    if report.pass_nsft {
        let worst = report
            .nsft_residuals
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(format!(
            "max NSFT residual = {worst:.3}, exponent = {:?}",
            report.nsft_exponent
        ))
    } else {
        Err(format!(
            "NSFT residual positive with exponent {:?}",
            report.nsft_exponent
        ))
    }
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("kernel of D_W", criterion_01_kernel),
        ("best possible constant", criterion_02_best_constant),
        ("log-difference lemma", criterion_03_logdiff_lemma),
        ("example (iii) growth and defect", criterion_04_example_iii),
        ("example (i) exceptional zero", criterion_05_example_i),
        ("example (iv) defect family", criterion_06_example_iv),
        ("first fundamental theorem", criterion_07_fft),
        ("figure chain detection", criterion_08_figure),
        ("polynomial lowering", criterion_09_lowering),
        ("Sturm-Liouville identities", criterion_10_sturm),
        ("hyperbolic gamma equation", criterion_11_hyperbolic),
        ("c -> 0 limit", criterion_12_climit),
        ("interpolation series", criterion_13_series),
        ("counting inequality", criterion_14_counting_gap),
        ("second main theorem residual", criterion_15_nsft),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:02} PASS {name}: {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:02} FAIL {name}: {detail}", k + 1);
            }
        }
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
