//! Log-log grids and least-squares exponent fitting.

/// Ordinary least squares slope of y against x; None for fewer than two
/// distinct abscissae.
pub fn ols_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// OLS slope with the residual standard deviation as a confidence band.
pub fn ols_slope_with_band(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let slope = ols_slope(pts)?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let intercept = my - slope * mx;
    let ss: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let span: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let band = if pts.len() > 2 && span > 0.0 {
        (ss / (n - 2.0) / span).sqrt()
    } else {
        0.0
    };
    Some((slope, band))
}

/// Log-spaced radius grid with the given points per decade.
pub fn log_grid(r_min: f64, r_max: f64, points_per_decade: usize) -> Vec<f64> {
    assert!(r_min > 0.0 && r_max > r_min);
    let decades = (r_max / r_min).log10();
    let n = ((decades * points_per_decade as f64).round() as usize).max(1);
    (0..=n)
        .map(|j| r_min * 10f64.powf(decades * j as f64 / n as f64))
        .collect()
}

/// The sub-grid covering the top decade [r_max/10, r_max].
pub fn top_decade(grid: &[f64]) -> Vec<f64> {
    let r_max = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    grid.iter()
        .copied()
        .filter(|&r| r >= r_max / 10.0 * (1.0 - 1e-12))
        .collect()
}

/// Fitted growth exponent of a positive quantity over the top decade of a
/// log grid: OLS on (ln r, ln value), dropping nonpositive values.
pub fn growth_exponent(rows: &[(f64, f64)]) -> Option<f64> {
    let r_max = rows.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|&&(r, v)| r >= r_max / 10.0 * (1.0 - 1e-12) && v > 0.0)
        .map(|&(r, v)| (r.ln(), v.ln()))
        .collect();
    ols_slope(&pts)
}

/// Top-decade ln-ln exponent together with its OLS standard-error band.
pub fn growth_exponent_with_band(rows: &[(f64, f64)]) -> Option<(f64, f64)> {
    let r_max = rows.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|&&(r, v)| r >= r_max / 10.0 * (1.0 - 1e-12) && v > 0.0)
        .map(|&(r, v)| (r.ln(), v.ln()))
        .collect();
    ols_slope_with_band(&pts)
}
