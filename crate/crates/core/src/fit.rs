//! Log-linear decay fits for scan curves.

/// Result of fitting `value ~ prefactor * exp(rate * x)` on the points above
/// a floor. `rate < 0` indicates decay.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub prefactor: f64,
    /// Number of points used for the fit.
    pub used: usize,
    /// RMS residual of ln(value) against the fit.
    pub residual: f64,
}

/// Least-squares fit of `ln(value)` against `x`, ignoring points at or below
/// `floor`. Needs at least two usable points; otherwise the rate is 0 and the
/// prefactor the largest value seen (or 0).
pub fn fit_log_linear(points: &[(f64, f64)], floor: f64) -> DecayFit {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, v)| *v > floor)
        .map(|&(x, v)| (x, v.ln()))
        .collect();
    let used = usable.len();
    if used < 2 {
        let prefactor = points.iter().map(|&(_, v)| v).fold(0.0f64, f64::max);
        return DecayFit { rate: 0.0, prefactor, used, residual: 0.0 };
    }
    let n = used as f64;
    let sx: f64 = usable.iter().map(|p| p.0).sum();
    let sy: f64 = usable.iter().map(|p| p.1).sum();
    let sxx: f64 = usable.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = usable.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let (rate, intercept) = if denom.abs() < 1e-30 {
        (0.0, sy / n)
    } else {
        let a = (n * sxy - sx * sy) / denom;
        let b = (sy - a * sx) / n;
        (a, b)
    };
    let residual = (usable
        .iter()
        .map(|&(x, y)| {
            let r = y - (rate * x + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    DecayFit { rate, prefactor: intercept.exp(), used, residual }
}

/// Like [`fit_log_linear`], then raise the prefactor until the fitted curve
/// majorizes every usable point (an envelope rather than a regression line).
pub fn fit_envelope(points: &[(f64, f64)], floor: f64) -> DecayFit {
    let mut fit = fit_log_linear(points, floor);
    let mut factor: f64 = 1.0;
    for &(x, v) in points.iter().filter(|(_, v)| *v > floor) {
        let model = fit.prefactor * (fit.rate * x).exp();
        if model > 0.0 {
            factor = factor.max(v / model);
        }
    }
    fit.prefactor *= factor * (1.0 + 1e-9);
    fit
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn recovers_exact_exponential() {
        let pts: Vec<(f64, f64)> = (0..8).map(|k| (k as f64, 3.0 * (-0.7 * k as f64).exp())).collect();
        let fit = fit_log_linear(&pts, 0.0);
        assert_abs_diff_eq!(fit.rate, -0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.prefactor, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn envelope_majorizes() {
        let pts = vec![(0.0, 1.0), (1.0, 0.9), (2.0, 0.1), (3.0, 0.05)];
        let fit = fit_envelope(&pts, 0.0);
        for &(x, v) in &pts {
            assert!(fit.prefactor * (fit.rate * x).exp() >= v);
        }
    }

    #[test]
    fn floor_points_are_ignored() {
        let pts = vec![(0.0, 1.0), (1.0, 0.1), (2.0, 1e-15), (3.0, 1e-16)];
        let fit = fit_log_linear(&pts, 1e-12);
        assert_eq!(fit.used, 2);
    }
}
