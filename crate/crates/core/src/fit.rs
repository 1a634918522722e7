//! Ordinary least-squares line fits.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square of the vertical residuals.
    pub residual: f64,
    pub points: usize,
}

/// Fits `y = slope·x + intercept`. Fewer than two distinct `x` give NaN slope.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Line {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let nan = Line { slope: f64::NAN, intercept: f64::NAN, residual: f64::NAN, points: n };
    if n < 2 {
        return nan;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return nan;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Line { slope, intercept, residual: (ss / n as f64).sqrt(), points: n }
}
