//! Small statistics helpers shared by the Monte Carlo estimators.

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Sample mean and unbiased sample variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1) as f64)
}

/// Mean with its standard error `s / sqrt(n)`.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let (m, v) = mean_var(xs);
    (m, (v / xs.len() as f64).sqrt())
}

/// Standard error of a Bernoulli frequency evaluated at probability `p`.
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / n as f64).sqrt()
}

/// One-sided check `empirical <= bound + slack`, reported as a triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub bound: f64,
    pub empirical: f64,
    pub slack: f64,
}

impl BoundCheck {
    pub fn new(bound: f64, empirical: f64, slack: f64) -> Self {
        Self {
            bound,
            empirical,
            slack,
        }
    }

    /// Tail-probability check with `sigmas` binomial standard errors of slack,
    /// the standard error evaluated at the (clamped) bound.
    pub fn tail(bound: f64, empirical: f64, n: usize, sigmas: f64) -> Self {
        Self::new(
            bound,
            empirical,
            sigmas * binomial_stderr(bound.min(1.0), n),
        )
    }

    pub fn violated(&self) -> bool {
        self.empirical > self.bound + self.slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// Approximate 95% interval `slope +- 2 * slope_stderr`.
    pub slope_ci: (f64, f64),
    pub r_squared: f64,
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope_stderr = if n > 2 {
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_stderr,
        slope_ci: (slope - 2.0 * slope_stderr, slope + 2.0 * slope_stderr),
        r_squared: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
    })
}

/// Solves the 2x2 weighted least-squares problem `min sum w_i (a u_i + b v_i - y_i)^2`.
pub fn least_squares_2(u: &[f64], v: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    let (mut suu, mut suv, mut svv, mut suy, mut svy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..y.len() {
        let wi = w[i];
        suu += wi * u[i] * u[i];
        suv += wi * u[i] * v[i];
        svv += wi * v[i] * v[i];
        suy += wi * u[i] * y[i];
        svy += wi * v[i] * y[i];
    }
    let det = suu * svv - suv * suv;
    if det.abs() < 1e-300 {
        return None;
    }
    Some(((suy * svv - svy * suv) / det, (suu * svy - suv * suy) / det))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14);
        assert!((f.intercept - 2.0).abs() < 1e-14);
        assert!(f.slope_stderr < 1e-12);
    }

    #[test]
    fn mean_var_small_sample() {
        let (m, v) = mean_var(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((v - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn two_param_least_squares() {
        let u = [1.0, 2.0, 3.0];
        let v = [0.5, -1.0, 4.0];
        let y: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 3.0 * a - 2.0 * b).collect();
        let (a, b) = least_squares_2(&u, &v, &y, &[1.0; 3]).unwrap();
        assert!((a - 3.0).abs() < 1e-12 && (b + 2.0).abs() < 1e-12);
    }
}
