use serde::Serialize;

use crate::error::{input, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(ln k, ln value)`.
///
/// Data lying exactly on a line (including constant data) give `r² = 1`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if let Some(&(k, v)) = points.iter().find(|&&(k, v)| !(k > 0.0 && v > 0.0 && v.is_finite())) {
        return input(format!("slope fit needs positive k and values, got ({k}, {v})"));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(k, v)| (k.ln(), v.ln())).collect();
    fit_line(&logs)
}

/// Ordinary least-squares line `y = slope·x + intercept`.
pub fn fit_line(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 4 {
        return input(format!("slope fit needs at least 4 points, got {}", points.len()));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return input("slope fit needs strictly increasing k");
    }
    if points.iter().any(|&(x, y)| !(x.is_finite() && y.is_finite())) {
        return input("slope fit needs finite data");
    }
    let xs: Vec<f64> = points.iter().map(|&(x, _)| x).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot <= f64::EPSILON * n * my.abs().max(1.0) { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(SlopeFit { slope, intercept, r_squared })
}
