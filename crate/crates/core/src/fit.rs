//! Least-squares slopes on log-log data.

use alloc::vec::Vec;

/// Least-squares slope of `ln y` against `ln x`. Nonpositive `y` are
/// clamped to the smallest positive float; constant data gives 0.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (libm::log(x), libm::log(y.max(f64::MIN_POSITIVE))))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 || sxy == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Slope over the last half of the points (at least two).
pub fn tail_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let start = (xs.len() / 2).min(xs.len().saturating_sub(2));
    loglog_slope(&xs[start..], &ys[start..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_laws() {
        let xs = [2.0, 4.0, 8.0, 16.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * libm::pow(*x, -1.5)).collect();
        assert!((loglog_slope(&xs, &ys) + 1.5).abs() < 1e-12);
        assert!((tail_slope(&xs, &ys) + 1.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&xs, &[0.0; 4]), 0.0);
    }
}
