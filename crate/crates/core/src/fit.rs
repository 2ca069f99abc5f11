//! Small least-squares helpers shared by the report modules.

/// Ordinary least-squares line `y = slope * x + intercept`.
///
/// Returns `None` when fewer than two distinct abscissae are supplied.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Least-squares slope of `log y` against `log x`, ignoring non-positive
/// entries. This is the standard way the scan reports estimate scaling
/// exponents.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if x > 0.0 && y > 0.0 {
            lx.push(x.ln());
            ly.push(y.ln());
        }
    }
    linear_fit(&lx, &ly).map(|(s, _)| s)
}

/// Fit `y_n ~ C * r^n` on the index range `[lo, hi]` (inclusive) and return
/// the geometric rate `r`. Entries must be positive.
pub fn geometric_rate(ys: &[f64], lo: usize, hi: usize) -> Option<f64> {
    let hi = hi.min(ys.len().saturating_sub(1));
    if lo >= hi {
        return None;
    }
    let xs: Vec<f64> = (lo..=hi).map(|n| n as f64).collect();
    let lys: Vec<f64> = ys[lo..=hi]
        .iter()
        .map(|&y| if y > 0.0 { y.ln() } else { f64::NEG_INFINITY })
        .collect();
    if lys.iter().any(|v| !v.is_finite()) {
        return None;
    }
    linear_fit(&xs, &lys).map(|(s, _)| s.exp())
}
