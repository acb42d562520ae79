//! Small least-squares helpers for convergence diagnostics.

/// Ordinary least squares `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = r_squared(y, x.iter().map(|a| slope * a + intercept));
    LinearFit { slope, intercept, r_squared }
}

/// Least squares through the origin, `y ≈ c·x`. Returns `(c, R²)` with R²
/// measured against the mean of `y`.
pub fn proportional_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let c = x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / x.iter().map(|a| a * a).sum::<f64>();
    (c, r_squared(y, x.iter().map(|a| c * a)))
}

fn r_squared(y: &[f64], pred: impl Iterator<Item = f64>) -> f64 {
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(pred).map(|(b, p)| (b - p).powi(2)).sum();
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|a| 2.0 * a - 1.0).collect();
        let f = linear_fit(&x, &y);
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept + 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn through_origin() {
        let x = [0.5, 0.25, 0.125];
        let y = [1.5, 0.75, 0.375];
        let (c, r2) = proportional_fit(&x, &y);
        assert!((c - 3.0).abs() < 1e-14);
        assert!((r2 - 1.0).abs() < 1e-14);
        let (_, r2) = proportional_fit(&x, &[1.0, -1.0, 1.0]);
        assert!(r2 < 0.5);
    }
}
