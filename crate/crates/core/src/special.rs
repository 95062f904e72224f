//! Special functions and adaptive quadrature.

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Ascending series is used for `|x| <= SERIES_CUTOFF`.
const SERIES_CUTOFF: f64 = 12.0;

/// Bessel function of the first kind, order one.
///
/// Ascending series for `|x| <= 12` (worst-case cancellation there costs
/// about three digits); Miller's backward recurrence normalized by
/// `J0 + 2 (J2 + J4 + ...) = 1` beyond.
pub fn bessel_j1(x: f64) -> f64 {
    if x < 0.0 {
        return -bessel_j1(-x);
    }
    if x <= SERIES_CUTOFF {
        0.5 * x * j1_over_x_series(0.25 * x * x)
    } else {
        j1_miller(x)
    }
}

/// `sum_k (-q)^k / (k! (k+1)!)` with `q = x^2 / 4`, which equals `2 J1(x) / x`.
fn j1_over_x_series(q: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + 1.0));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > q.sqrt() {
            break;
        }
        if k > 200.0 {
            break;
        }
    }
    sum
}

fn j1_miller(x: f64) -> f64 {
    let start = 2 * (((x + 20.0 + (40.0 * x).sqrt()) as usize) / 2 + 1);
    let two_over_x = 2.0 / x;
    let (mut jp, mut j) = (0.0f64, 1e-30f64);
    let mut norm = 0.0;
    let mut j1 = 0.0;
    for n in (1..=start).rev() {
        let jm = n as f64 * two_over_x * j - jp;
        jp = j;
        j = jm;
        // j now holds J_{n-1} (unnormalized).
        let idx = n - 1;
        if idx == 1 {
            j1 = j;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += j;
    j1 / norm
}

/// `J1(2t) / t`, continuous at `t = 0` with value 1.
pub fn j1_2t_over_t(t: f64) -> f64 {
    let x = 2.0 * t.abs();
    if x <= SERIES_CUTOFF {
        j1_over_x_series(t * t)
    } else {
        bessel_j1(2.0 * t) / t
    }
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // Pre-split into a few panels so narrow features are not skipped.
    let panels = 8;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = lo + h;
            let (flo, fhi) = (f(lo), f(hi));
            let mid = 0.5 * (lo + hi);
            let fmid = f(mid);
            let s = h / 6.0 * (flo + 4.0 * fmid + fhi);
            simpson_rec(f, lo, hi, flo, fmid, fhi, s, tol / panels as f64, 48)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Tensor-product adaptive Simpson over `[x0, x1] x [y0, y1]`; `f(x, y)`.
pub fn adaptive_simpson_2d<F: Fn(f64, f64) -> f64>(
    f: &F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    tol: f64,
) -> f64 {
    let inner_tol = tol / (4.0 * (x1 - x0).abs().max(1.0));
    let outer = |x: f64| adaptive_simpson(&|y: f64| f(x, y), y0, y1, inner_tol);
    adaptive_simpson(&outer, x0, x1, 0.5 * tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    /// Independent oracle: `J1(x) = (1/pi) int_0^pi cos(tau - x sin tau) d tau`.
    fn j1_integral(x: f64) -> f64 {
        adaptive_simpson(&|tau: f64| (tau - x * tau.sin()).cos(), 0.0, PI, 1e-13) / PI
    }

    #[test]
    fn j1_reference_values() {
        // J1(2) from the ascending series, truncated far below 1e-12.
        let mut s = 0.0;
        let mut fact_k = 1.0;
        for k in 0..30 {
            if k > 0 {
                fact_k *= k as f64;
            }
            let fact_k1 = fact_k * (k + 1) as f64;
            s += (-1.0f64).powi(k) / (fact_k * fact_k1);
        }
        assert!((bessel_j1(2.0) - s).abs() < 1e-15);
        assert!((bessel_j1(2.0) - 0.576_724_807_756_873_4).abs() < 1e-14);
        assert!((j1_2t_over_t(1.0) - 0.576_724_807_756_873_4).abs() < 1e-14);
        assert_eq!(j1_2t_over_t(0.0), 1.0);
    }

    #[test]
    fn j1_matches_integral_representation() {
        for i in 0..=400 {
            let x = i as f64 * 0.1;
            let got = bessel_j1(x);
            let want = j1_integral(x);
            assert!((got - want).abs() < 1e-11, "x = {x}: {got} vs {want}");
        }
        // both sides of the series / recurrence switch
        assert!((bessel_j1(11.999_999) - bessel_j1(12.000_001)).abs() < 1e-6);
    }

    #[test]
    fn j1_is_odd() {
        assert_eq!(bessel_j1(-3.7), -bessel_j1(3.7));
    }

    #[test]
    fn simpson_polynomial_and_gaussian() {
        let v = adaptive_simpson(&|x: f64| x * x * x - x, -1.0, 2.0, 1e-12);
        assert!((v - 2.25).abs() < 1e-12);
        let g = adaptive_simpson(&|x: f64| (-0.5 * x * x).exp(), -12.0, 12.0, 1e-12);
        assert!((g - (2.0 * PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn simpson_2d_product() {
        let v = adaptive_simpson_2d(
            &|x: f64, y: f64| x.sin() * y.cos(),
            (0.0, PI),
            (0.0, PI / 2.0),
            1e-10,
        );
        assert!((v - 2.0).abs() < 1e-9);
    }
}
