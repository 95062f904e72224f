//! Monte Carlo probes of the distance-to-torus and Haar concentration
//! statements, plus the Gaussian pair average used on the state side.

use core::f64::consts::PI;

use rand::Rng;

use crate::ensembles::{complex_normal, sample_haar_columns, sample_haar_unitary};
use crate::error::{Error, Result};
use crate::linalg::{qr_phase_fixed, ComplexMatrix, UnitaryMatrix};
use crate::metrics::{
    dist_to_diagonal_torus, distance_from_identity_op, hs_proj_distance, torus_overlap,
};
use crate::par::{map_trials, try_map_trials};
use crate::prelude::*;
use crate::rng::SeedStream;
use crate::special::adaptive_simpson_2d;
use crate::stats::{mean_stderr, mean_var, BoundCheck};

/// Relative floating slack on Lipschitz ratios.
const LIPSCHITZ_SLACK: f64 = 1e-9;

/// `dist(V G V^dag, T)`.
pub fn conjugated_torus_distance(v: &UnitaryMatrix, g: &UnitaryMatrix) -> Result<f64> {
    Ok(dist_to_diagonal_torus(&v.conjugate(g)?).0)
}

/// `2 || G - I ||_op`, the Lipschitz constant of `V -> dist(V G V^dag, T)`.
pub fn torus_lipschitz_bound(g: &UnitaryMatrix) -> Result<f64> {
    Ok(2.0 * distance_from_identity_op(g)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusDistanceStats {
    pub gate_label: String,
    pub dhs_g_i: f64,
    pub mc_mean: f64,
    pub mc_std: f64,
    pub n_samples: usize,
    pub lipschitz_bound: f64,
}

impl TorusDistanceStats {
    pub fn std_error(&self) -> f64 {
        self.mc_std / (self.n_samples as f64).sqrt()
    }

    /// `mc_mean + 3 se >= dhs / 3`.
    pub fn lower_bound_holds(&self) -> bool {
        self.mc_mean + 3.0 * self.std_error() >= self.dhs_g_i / 3.0
    }

    /// `mc_mean <= dhs`, with `slack` for rounding.
    pub fn upper_bound_holds(&self, slack: f64) -> bool {
        self.mc_mean <= self.dhs_g_i + slack
    }
}

/// Mean distance from `V G V^dag` to the diagonal torus over Haar `V`.
pub fn expected_torus_distance(
    g: &UnitaryMatrix,
    label: &str,
    n_samples: usize,
    seed: u64,
) -> Result<TorusDistanceStats> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let d = g.dim();
    let xs = try_map_trials(seed, n_samples, |_, rng| {
        conjugated_torus_distance(&sample_haar_unitary(d, rng), g)
    })?;
    let (mc_mean, var) = mean_var(&xs);
    Ok(TorusDistanceStats {
        gate_label: label.to_string(),
        dhs_g_i: hs_proj_distance(g, &UnitaryMatrix::identity(d))?,
        mc_mean,
        mc_std: var.sqrt(),
        n_samples,
        lipschitz_bound: torus_lipschitz_bound(g)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondMomentReport {
    pub index: usize,
    pub closed_form: f64,
    pub mc_mean: f64,
    pub std_error: f64,
}

impl SecondMomentReport {
    pub fn relative_error(&self) -> f64 {
        (self.mc_mean - self.closed_form).abs() / self.closed_form
    }

    pub fn within(&self, sigmas: f64) -> bool {
        (self.mc_mean - self.closed_form).abs() <= sigmas * self.std_error + 1e-12
    }
}

/// `(1 / (d + 1)) (1 + |tr G|^2 / d)`.
pub fn haar_second_moment(g: &UnitaryMatrix) -> f64 {
    let d = g.dim() as f64;
    (1.0 + g.matrix().trace().norm_sqr() / d) / (d + 1.0)
}

/// Monte Carlo estimate of `E_V |(V G V^dag)_ii|^2` for a zero-based index `i`.
pub fn haar_second_moment_check(
    g: &UnitaryMatrix,
    index: usize,
    n_samples: usize,
    seed: u64,
) -> Result<SecondMomentReport> {
    let d = g.dim();
    if index >= d {
        return Err(Error::InvalidArgument(alloc::format!(
            "index {index} out of range for d = {d}"
        )));
    }
    let gm = g.matrix();
    let xs = map_trials(seed, n_samples, |_, rng| {
        // Row i of V only: (V G V^dag)_ii = v G v^dag with v a Haar unit row.
        let v = &sample_haar_columns(d, 1, rng)[0];
        let gv = gm
            .matvec(&v.iter().map(|z| z.conj()).collect::<Vec<_>>())
            .expect("dims agree");
        v.iter()
            .zip(&gv)
            .map(|(a, b)| a * b)
            .sum::<C64>()
            .norm_sqr()
    });
    let (mc_mean, std_error) = mean_stderr(&xs);
    Ok(SecondMomentReport {
        index,
        closed_form: haar_second_moment(g),
        mc_mean,
        std_error,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzReport {
    pub bound: f64,
    pub n_pairs: usize,
    pub max_ratio: f64,
    pub violations: usize,
}

impl LipschitzReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Unitary within roughly `scale` of the identity.
fn near_identity<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> UnitaryMatrix {
    let s = scale / (d as f64).sqrt();
    let m = ComplexMatrix::from_fn(d, |i, j| {
        let z = complex_normal(rng) * s;
        if i == j {
            z + 1.0
        } else {
            z
        }
    });
    qr_phase_fixed(&m)
}

/// Pairs `(U, V)`: even indices are independent Haar pairs, odd indices are
/// `V = U W` with `W` near the identity at scales from `1e-3` to `1`.
fn probe_lipschitz<F>(
    d: usize,
    n_pairs: usize,
    seed: u64,
    bound: f64,
    f: F,
) -> Result<LipschitzReport>
where
    F: Fn(&UnitaryMatrix) -> Result<f64> + Sync + Send,
{
    const SCALES: [f64; 4] = [1e-3, 1e-2, 1e-1, 1.0];
    let ratios = try_map_trials(seed, n_pairs, |i, rng| {
        let u = sample_haar_unitary(d, rng);
        let v = if i % 2 == 0 {
            sample_haar_unitary(d, rng)
        } else {
            u.mul(&near_identity(d, SCALES[(i / 2) % SCALES.len()], rng))?
        };
        let dist = u.matrix().sub(v.matrix())?.frobenius_norm();
        let diff = (f(&u)? - f(&v)?).abs();
        Ok::<_, Error>(if dist > 0.0 { diff / dist } else { 0.0 })
    })?;
    let limit = bound * (1.0 + LIPSCHITZ_SLACK) + LIPSCHITZ_SLACK;
    Ok(LipschitzReport {
        bound,
        n_pairs,
        max_ratio: ratios.iter().cloned().fold(0.0, f64::max),
        violations: ratios.iter().filter(|&&r| r > limit).count(),
    })
}

/// Checks `|f(U) - f(V)| <= 2 ||G - I||_op ||U - V||_HS` for
/// `f(W) = dist(W G W^dag, T)`.
pub fn lipschitz_probe(g: &UnitaryMatrix, n_pairs: usize, seed: u64) -> Result<LipschitzReport> {
    let bound = torus_lipschitz_bound(g)?;
    probe_lipschitz(g.dim(), n_pairs, seed, bound, |w| {
        conjugated_torus_distance(w, g)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailProbeRow {
    pub a: f64,
    /// `P(f <= E f - a)`.
    pub lower: BoundCheck,
    /// `P(f >= E f + a)`.
    pub upper: BoundCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailProbeReport {
    pub dim: usize,
    pub lipschitz: f64,
    pub mean: f64,
    pub n_samples: usize,
    pub rows: Vec<TailProbeRow>,
}

impl TailProbeReport {
    pub fn all_within(&self) -> bool {
        self.rows
            .iter()
            .all(|r| !r.lower.violated() && !r.upper.violated())
    }
}

/// `exp(-(d - 2) a^2 / (12 L^2))`.
pub fn haar_concentration_bound(d: usize, a: f64, lipschitz: f64) -> f64 {
    (-(d as f64 - 2.0) * a * a / (12.0 * lipschitz * lipschitz)).exp()
}

fn tail_rows(xs: &[f64], mean: f64, grid: &[f64], bound: impl Fn(f64) -> f64) -> Vec<TailProbeRow> {
    let n = xs.len();
    grid.iter()
        .map(|&a| {
            let b = bound(a);
            let lo = xs.iter().filter(|&&x| x <= mean - a).count() as f64 / n as f64;
            let hi = xs.iter().filter(|&&x| x >= mean + a).count() as f64 / n as f64;
            TailProbeRow {
                a,
                lower: BoundCheck::tail(b, lo, n, 3.0),
                upper: BoundCheck::tail(b, hi, n, 3.0),
            }
        })
        .collect()
}

/// Two-sided empirical tails of `dist(V G V^dag, T)` about its sample mean.
pub fn concentration_tail_probe(
    g: &UnitaryMatrix,
    a_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<TailProbeReport> {
    let lipschitz = torus_lipschitz_bound(g)?;
    if !(lipschitz > 0.0) {
        return Err(Error::Precondition(
            "Lipschitz constant 2||G - I|| must be positive".into(),
        ));
    }
    if n_samples < 1 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let d = g.dim();
    let xs = try_map_trials(seed, n_samples, |_, rng| {
        conjugated_torus_distance(&sample_haar_unitary(d, rng), g)
    })?;
    let mean = xs.iter().sum::<f64>() / n_samples as f64;
    Ok(TailProbeReport {
        dim: d,
        lipschitz,
        mean,
        n_samples,
        rows: tail_rows(&xs, mean, a_grid, |a| {
            haar_concentration_bound(d, a, lipschitz)
        }),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallAvoidanceReport {
    pub epsilon: f64,
    pub dhs_g_i: f64,
    pub radius: f64,
    pub hits: usize,
    pub n_samples: usize,
    /// `exp(-eps^2 d^2 / 384)` against the hit frequency.
    pub check: BoundCheck,
}

/// `P_V(dist(V G V^dag, T) <= eps sqrt(d))`, valid when `dhs(G, I) > 6 eps sqrt(d)`.
pub fn ball_avoidance_estimate(
    g: &UnitaryMatrix,
    epsilon: f64,
    n_samples: usize,
    seed: u64,
) -> Result<BallAvoidanceReport> {
    let d = g.dim();
    let sd = (d as f64).sqrt();
    let dhs = hs_proj_distance(g, &UnitaryMatrix::identity(d))?;
    let threshold = 6.0 * epsilon * sd;
    if !(dhs > threshold) {
        return Err(Error::Precondition(alloc::format!(
            "need dhs(G, I) > 6 eps sqrt(d) = {threshold:.6}, got {dhs:.6}"
        )));
    }
    if n_samples < 1 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let radius = epsilon * sd;
    let hits = try_map_trials(seed, n_samples, |_, rng| {
        conjugated_torus_distance(&sample_haar_unitary(d, rng), g).map(|x| x <= radius)
    })?
    .into_iter()
    .filter(|&h| h)
    .count();
    let bound = (-epsilon * epsilon * (d * d) as f64 / 384.0).exp();
    Ok(BallAvoidanceReport {
        epsilon,
        dhs_g_i: dhs,
        radius,
        hits,
        n_samples,
        check: BoundCheck::tail(bound, hits as f64 / n_samples as f64, n_samples, 3.0),
    })
}

/// `A(beta) = E |X| |alpha X + beta Y|` for independent standard complex
/// Gaussians, `alpha = sqrt(1 - beta^2)`, by 2-d quadrature of the reduced
/// angular integral.
pub fn gaussian_pair_average(beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidArgument(alloc::format!(
            "beta = {beta} outside [0, 1]"
        )));
    }
    let alpha = (1.0 - beta * beta).sqrt();
    let f = |phi: f64, theta: f64| {
        let (s, c) = phi.sin_cos();
        let (a, b) = (alpha * c, beta * s);
        // a^2 + b^2 + 2ab cos(theta), written to stay non-negative near theta = pi.
        let r2 = (a - b) * (a - b) + 2.0 * a * b * (1.0 + theta.cos());
        c * c * s * r2.max(0.0).sqrt()
    };
    // The theta integrand is symmetric about pi; integrating [0, pi] puts the
    // kink of the a = b case at an endpoint.
    let tol = 1e-8 * PI / 4.0;
    Ok(4.0 / PI * adaptive_simpson_2d(&f, (0.0, PI / 2.0), (0.0, PI), tol))
}

/// Monte Carlo `E |X| |alpha X + beta Y|` with its standard error.
pub fn gaussian_pair_average_mc(beta: f64, n_samples: usize, seed: u64) -> (f64, f64) {
    let alpha = (1.0 - beta * beta).sqrt();
    let xs = map_trials(seed, n_samples, |_, rng| {
        let x = complex_normal(rng);
        let y = complex_normal(rng);
        x.norm() * (x * alpha + y * beta).norm()
    });
    mean_stderr(&xs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianAverageReport {
    pub beta_grid: Vec<f64>,
    pub a_values: Vec<f64>,
    /// Monte Carlo mean and standard error per grid point, when requested.
    pub mc_values: Vec<(f64, f64)>,
    /// `1 - A(beta)^2` per grid point.
    pub gaps: Vec<f64>,
    /// Largest `c` with `gap >= c min(beta^2, beta0^2)` on the grid, per candidate `beta0`.
    pub candidates: Vec<(f64, f64)>,
    pub c: f64,
    pub beta0: f64,
}

impl GaussianAverageReport {
    pub fn gaps_positive(&self) -> bool {
        self.gaps.iter().all(|&g| g > 0.0)
    }

    pub fn gaps_monotone(&self) -> bool {
        self.gaps.windows(2).all(|w| w[1] >= w[0] - 1e-9)
    }

    /// Largest `c` on the grid for a fixed `beta0`.
    pub fn c_at(&self, beta0: f64) -> Option<f64> {
        self.candidates
            .iter()
            .find(|(b, _)| (b - beta0).abs() < 1e-12)
            .map(|&(_, c)| c)
    }
}

pub const BETA0_CANDIDATES: [f64; 7] = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Quadrature of `A` on the grid, optional Monte Carlo with `mc_samples`
/// draws per point, and the `(c, beta0)` fit.
pub fn gaussian_average_fit(
    beta_grid: &[f64],
    mc_samples: usize,
    seed: u64,
) -> Result<GaussianAverageReport> {
    if beta_grid.is_empty() || beta_grid.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
        return Err(Error::InvalidArgument(
            "beta grid must lie in (0, 1]".into(),
        ));
    }
    let a_values = beta_grid
        .iter()
        .map(|&b| gaussian_pair_average(b))
        .collect::<Result<Vec<_>>>()?;
    let mc_values = if mc_samples > 0 {
        beta_grid
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                gaussian_pair_average_mc(b, mc_samples, SeedStream::derive(seed, i as u64))
            })
            .collect()
    } else {
        Vec::new()
    };
    let gaps: Vec<f64> = a_values.iter().map(|a| 1.0 - a * a).collect();
    let candidates: Vec<(f64, f64)> = BETA0_CANDIDATES
        .iter()
        .map(|&b0| {
            let c = beta_grid
                .iter()
                .zip(&gaps)
                .map(|(&b, &g)| g / (b * b).min(b0 * b0))
                .fold(f64::INFINITY, f64::min);
            (b0, c)
        })
        .collect();
    let &(beta0, c) = candidates
        .iter()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("candidate list is non-empty");
    Ok(GaussianAverageReport {
        beta_grid: beta_grid.to_vec(),
        a_values,
        mc_values,
        gaps,
        candidates,
        c,
        beta0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianApproximationReport {
    pub dim: usize,
    pub beta: f64,
    pub k_index: usize,
    /// `d E |<k|V|0>| |<k|V|phi>|`.
    pub mc_mean: f64,
    pub std_error: f64,
    pub quadrature: f64,
    /// `5 d^{-1/2}`.
    pub rate_allowance: f64,
}

impl GaussianApproximationReport {
    pub fn difference(&self) -> f64 {
        (self.mc_mean - self.quadrature).abs()
    }

    pub fn within(&self) -> bool {
        self.difference() <= self.rate_allowance + 3.0 * self.std_error
    }
}

/// `d E_V |<k|V|0>| |<k|V|phi>|` for `phi = alpha |0> + beta |1>`, against `A(beta)`.
pub fn gaussian_approximation_check(
    beta: f64,
    k_index: usize,
    d: usize,
    n_samples: usize,
    seed: u64,
) -> Result<GaussianApproximationReport> {
    if d < 2 || k_index >= d {
        return Err(Error::InvalidArgument("need d >= 2 and k < d".into()));
    }
    let quadrature = gaussian_pair_average(beta)?;
    let alpha = (1.0 - beta * beta).sqrt();
    let df = d as f64;
    let xs = map_trials(seed, n_samples, |_, rng| {
        let cols = sample_haar_columns(d, 2, rng);
        let (v0, v1) = (cols[0][k_index], cols[1][k_index]);
        df * v0.norm() * (v0 * alpha + v1 * beta).norm()
    });
    let (mc_mean, std_error) = mean_stderr(&xs);
    Ok(GaussianApproximationReport {
        dim: d,
        beta,
        k_index,
        mc_mean,
        std_error,
        quadrature,
        rate_allowance: 5.0 / df.sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateTailRow {
    pub epsilon: f64,
    /// Deviation `eps^2` above the mean.
    pub deviation: f64,
    /// `exp(-(d - 2) eps^4 / 12)`: the concentration inequality at `a = eps^2`, `L = 1`.
    pub concentration: BoundCheck,
    /// `exp(-eps^2 d / 6)`, the closed form used for ball avoidance.
    pub stated: BoundCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateTorusReport {
    pub dim: usize,
    /// `|<0|phi>|`.
    pub overlap_with_zero: f64,
    pub mc_mean: f64,
    pub mc_std: f64,
    pub n_samples: usize,
    /// Pair-average prediction `A(beta)` with `beta = ||phi - <0|phi> |0>||`.
    pub gaussian_limit: f64,
    pub lipschitz: LipschitzReport,
    pub tail: Vec<StateTailRow>,
}

/// `Z_d = sum_k |<k|V|0>| |<k|V|phi>|` over Haar `V`: mean, a Lipschitz probe
/// with constant 1 on `lipschitz_pairs` pairs, and upper tails at `eps_grid`.
pub fn state_torus_expected_distance(
    phi: &crate::linalg::PureState,
    eps_grid: &[f64],
    n_samples: usize,
    lipschitz_pairs: usize,
    seed: u64,
) -> Result<StateTorusReport> {
    let d = phi.dim();
    if d < 2 || n_samples < 2 {
        return Err(Error::InvalidArgument(
            "need d >= 2 and at least 2 samples".into(),
        ));
    }
    let amps = phi.amplitudes();
    let a0 = amps[0];
    let beta = crate::linalg::norm(&amps[1..]);
    // (V|0>, V|e>) with |e> the unit remainder is a Haar 2-frame.
    let xs = map_trials(SeedStream::derive(seed, 0), n_samples, |_, rng| {
        let cols = sample_haar_columns(d, 2, rng);
        let vphi: Vec<C64> = cols[0]
            .iter()
            .zip(&cols[1])
            .map(|(x, y)| x * a0 + y * beta)
            .collect();
        torus_overlap(&cols[0], &vphi)
    });
    let (mc_mean, var) = mean_var(&xs);
    let owned = amps.to_vec();
    let f = move |u: &UnitaryMatrix| -> Result<f64> {
        let col0 = u.matrix().column(0);
        let vphi = u.matrix().matvec(&owned)?;
        Ok(torus_overlap(&col0, &vphi))
    };
    let lipschitz = probe_lipschitz(d, lipschitz_pairs, SeedStream::derive(seed, 1), 1.0, f)?;
    let n = n_samples;
    let df = d as f64;
    let tail = eps_grid
        .iter()
        .map(|&eps| {
            let dev = eps * eps;
            let freq = xs.iter().filter(|&&x| x - mc_mean > dev).count() as f64 / n as f64;
            StateTailRow {
                epsilon: eps,
                deviation: dev,
                concentration: BoundCheck::tail(
                    haar_concentration_bound(d, dev, 1.0),
                    freq,
                    n,
                    3.0,
                ),
                stated: BoundCheck::tail((-eps * eps * df / 6.0).exp(), freq, n, 3.0),
            }
        })
        .collect();
    Ok(StateTorusReport {
        dim: d,
        overlap_with_zero: a0.norm(),
        mc_mean,
        mc_std: var.sqrt(),
        n_samples,
        gaussian_limit: gaussian_pair_average(beta.min(1.0))?,
        lipschitz,
        tail,
    })
}

/// Complete elliptic integral of the second kind, `E(m)` with parameter `m = k^2`.
#[cfg(test)]
fn elliptic_e(m: f64) -> f64 {
    if m >= 1.0 {
        return 1.0;
    }
    // Arithmetic-geometric mean with the Legendre correction sum.
    let (mut a, mut b) = (1.0f64, (1.0 - m).sqrt());
    let mut c2 = m;
    let mut sum = 0.5 * c2;
    let mut pow = 0.5;
    for _ in 0..40 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        let cn = 0.5 * (a - b);
        pow *= 2.0;
        c2 = cn * cn;
        sum += pow * c2;
        a = an;
        b = bn;
        if c2 < 1e-34 {
            break;
        }
    }
    PI / (2.0 * a) * (1.0 - sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PureState;

    fn roots_of_unity(d: usize) -> UnitaryMatrix {
        let phases: Vec<f64> = (0..d).map(|k| 2.0 * PI * k as f64 / d as f64).collect();
        UnitaryMatrix::diagonal_phases(&phases)
    }

    fn flip_one(d: usize) -> UnitaryMatrix {
        let mut phases = vec![0.0; d];
        phases[0] = PI;
        UnitaryMatrix::diagonal_phases(&phases)
    }

    /// `A` via `int_0^pi sqrt(a^2 + b^2 + 2ab cos) = 2 (a + b) E(4ab / (a + b)^2)`.
    fn pair_average_elliptic(beta: f64) -> f64 {
        let alpha = (1.0 - beta * beta).sqrt();
        let g = |phi: f64| {
            let (s, c) = phi.sin_cos();
            let (a, b) = (alpha * c, beta * s);
            if a + b == 0.0 {
                return 0.0;
            }
            let m = (4.0 * a * b / ((a + b) * (a + b))).min(1.0);
            c * c * s * 2.0 * (a + b) * elliptic_e(m)
        };
        4.0 / PI * crate::special::adaptive_simpson(&g, 0.0, PI / 2.0, 1e-12)
    }

    #[test]
    fn elliptic_oracle_sanity() {
        assert!((elliptic_e(0.0) - PI / 2.0).abs() < 1e-15);
        assert!((elliptic_e(1.0) - 1.0).abs() < 1e-12);
        assert!((elliptic_e(0.5) - 1.350_643_881_047_675_5).abs() < 1e-13);
    }

    #[test]
    fn pair_average_endpoints_and_oracle() {
        assert!((gaussian_pair_average(0.0).unwrap() - 1.0).abs() < 1e-8);
        assert!((gaussian_pair_average(1.0).unwrap() - PI / 4.0).abs() < 1e-8);
        for i in 0..=20 {
            let b = i as f64 / 20.0;
            let (q, e) = (gaussian_pair_average(b).unwrap(), pair_average_elliptic(b));
            assert!((q - e).abs() < 1e-8, "beta = {b}: {q} vs {e}");
            assert!((PI / 4.0 - 1e-8..=1.0 + 1e-8).contains(&q));
        }
        assert!(gaussian_pair_average(1.5).is_err());
    }

    #[test]
    fn pair_average_monte_carlo() {
        let (m, se) = gaussian_pair_average_mc(0.5, 400_000, 3);
        let q = gaussian_pair_average(0.5).unwrap();
        assert!(
            (m - q).abs() < 3e-3 && (m - q).abs() < 4.0 * se,
            "{m} {q} {se}"
        );
    }

    #[test]
    fn average_fit_reports() {
        let grid: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let r = gaussian_average_fit(&grid, 0, 0).unwrap();
        assert!(r.gaps_positive());
        assert!(r.gaps_monotone());
        assert!(r.c > 0.0);
        assert!(r.c_at(0.5).unwrap() >= 0.1);
        assert!(r.mc_values.is_empty());
        assert!(gaussian_average_fit(&[0.0], 0, 0).is_err());
    }

    #[test]
    fn torus_distance_of_scalar_gate_is_zero() {
        let g = UnitaryMatrix::identity(6).scale_phase(0.7);
        let s = expected_torus_distance(&g, "phase", 20, 1).unwrap();
        assert!(s.mc_mean < 1e-7, "{s:?}");
        assert!(s.dhs_g_i < 1e-7);
        assert!(s.lower_bound_holds() && s.upper_bound_holds(1e-9));
    }

    #[test]
    fn torus_distance_sandwich_small() {
        let g = flip_one(8);
        let s = expected_torus_distance(&g, "flip", 200, 2).unwrap();
        assert!((s.dhs_g_i - 2.0).abs() < 1e-12);
        assert!((s.lipschitz_bound - 4.0).abs() < 1e-9);
        assert!(s.lower_bound_holds() && s.upper_bound_holds(1e-9), "{s:?}");
    }

    #[test]
    fn second_moment_identity_and_traceless() {
        let r = haar_second_moment_check(&UnitaryMatrix::identity(5), 2, 50, 0).unwrap();
        assert!((r.mc_mean - 1.0).abs() < 1e-12 && r.closed_form == 1.0);
        let g = roots_of_unity(8);
        assert!((haar_second_moment(&g) - 1.0 / 9.0).abs() < 1e-12);
        let a = haar_second_moment_check(&g, 0, 20_000, 4).unwrap();
        let b = haar_second_moment_check(&g, 7, 20_000, 5).unwrap();
        assert!(a.within(4.0) && b.within(4.0), "{a:?} {b:?}");
        assert!((a.mc_mean - b.mc_mean).abs() < 4.0 * (a.std_error + b.std_error));
        assert!(haar_second_moment_check(&g, 8, 1, 0).is_err());
    }

    #[test]
    fn lipschitz_probe_identity_and_flip() {
        let r = lipschitz_probe(&UnitaryMatrix::identity(4), 20, 0).unwrap();
        assert_eq!(r.bound, 0.0);
        assert!(r.holds() && r.max_ratio < 1e-12);
        let r = lipschitz_probe(&roots_of_unity(6), 100, 1).unwrap();
        assert!(r.holds() && r.max_ratio <= r.bound, "{r:?}");
    }

    #[test]
    fn tail_probe_shape() {
        let g = flip_one(16);
        let r = concentration_tail_probe(&g, &[0.0, 0.25, 0.5, 1.0], 300, 6).unwrap();
        assert!(r.all_within());
        assert_eq!(r.rows[0].upper.bound, 1.0);
        for w in r.rows.windows(2) {
            assert!(w[1].upper.empirical <= w[0].upper.empirical);
            assert!(w[1].lower.empirical <= w[0].lower.empirical);
        }
        assert!(
            (haar_concentration_bound(64, 0.5, 4.0) - (-62.0 * 0.25 / 192.0f64).exp()).abs()
                < 1e-15
        );
        assert!(concentration_tail_probe(&UnitaryMatrix::identity(4), &[0.1], 10, 0).is_err());
    }

    #[test]
    fn ball_avoidance_far_gate() {
        let g = roots_of_unity(16);
        let r = ball_avoidance_estimate(&g, 0.2, 300, 7).unwrap();
        assert_eq!(r.hits, 0);
        assert!(!r.check.violated());
        let err = ball_avoidance_estimate(&g, 0.3, 10, 7).unwrap_err();
        assert!(alloc::format!("{err}").contains("6 eps sqrt(d)"));
    }

    #[test]
    fn gaussian_approximation_beta_zero_and_half() {
        let r = gaussian_approximation_check(0.0, 3, 32, 20_000, 1).unwrap();
        assert!((r.mc_mean - 1.0).abs() < 4.0 * r.std_error, "{r:?}");
        let r = gaussian_approximation_check(0.5, 0, 64, 20_000, 2).unwrap();
        assert!(r.within(), "{r:?}");
    }

    #[test]
    fn state_torus_basis_and_orthogonal() {
        let z = state_torus_expected_distance(&PureState::basis(8, 0), &[0.5], 50, 20, 0).unwrap();
        assert!((z.mc_mean - 1.0).abs() < 1e-12);
        let r = state_torus_expected_distance(&PureState::basis(64, 1), &[0.3, 0.5], 400, 100, 1)
            .unwrap();
        assert!((r.mc_mean - PI / 4.0).abs() < 0.05, "{r:?}");
        assert!((r.gaussian_limit - PI / 4.0).abs() < 1e-8);
        assert!(r.lipschitz.holds(), "{:?}", r.lipschitz);
    }
}
