//! Escape-time curves, torus equidistribution and the jump-figure bundle.

use core::f64::consts::{PI, TAU};

use crate::complexity::{
    complexity_jump_curve, union_bound_diagnostic, JumpCurveReport, WordTable,
};
use crate::ensembles::{normal, EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, wrap_phase};
use crate::metrics::{diamond_from_phases, Metric};
use crate::par::{map_trials, try_map_trials};
use crate::prelude::*;
use crate::rng::SeedStream;
use crate::stats::{binomial_stderr, linear_fit, LinearFit};

pub const MIN_ESCAPE_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeCurve {
    pub spec: EnsembleSpec,
    pub epsilon: f64,
    pub metric: Metric,
    pub seed: u64,
    pub n_samples: usize,
    pub t_grid: Vec<f64>,
    /// `P(D(U_t, I) < eps)` per grid point.
    pub stay: Vec<f64>,
    pub stderr: Vec<f64>,
    pub t_escape: Option<f64>,
}

/// Median crossing: the first grid point with `p < 0.5`, linearly
/// interpolated against the previous point.
pub fn median_crossing(t_grid: &[f64], p: &[f64]) -> Option<f64> {
    let k = p.iter().position(|&x| x < 0.5)?;
    if k == 0 {
        return Some(t_grid[0]);
    }
    let (t0, t1, p0, p1) = (t_grid[k - 1], t_grid[k], p[k - 1], p[k]);
    if p0 == p1 {
        return Some(t1);
    }
    Some(t0 + (p0 - 0.5) / (p0 - p1) * (t1 - t0))
}

/// Eigenvalues of `n` draws, kept so that many `t` and `eps` reuse them.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSamples {
    pub spec: EnsembleSpec,
    pub seed: u64,
    pub spectra: Vec<Vec<f64>>,
}

impl SpectrumSamples {
    pub fn draw(spec: &EnsembleSpec, n_samples: usize, seed: u64) -> Result<Self> {
        spec.validate()?;
        let spectra = try_map_trials(seed, n_samples, |_, rng| spec.sample_eigenvalues(rng))?;
        Ok(Self {
            spec: *spec,
            seed,
            spectra,
        })
    }

    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty()
    }

    /// `D(U_t, I)` for each draw; `U_t` has eigenphases `-lambda t`.
    pub fn distances(&self, metric: Metric, t: f64) -> Vec<f64> {
        let mut phases = Vec::new();
        self.spectra
            .iter()
            .map(|eigs| {
                phases.clear();
                phases.extend(eigs.iter().map(|&l| -l * t));
                metric.from_identity_phases(&phases)
            })
            .collect()
    }

    pub fn stay_probability(&self, metric: Metric, epsilon: f64, t: f64) -> f64 {
        let n = self.len().max(1) as f64;
        self.distances(metric, t)
            .iter()
            .filter(|&&x| x < epsilon)
            .count() as f64
            / n
    }

    pub fn escape_curve(&self, epsilon: f64, metric: Metric, t_grid: &[f64]) -> EscapeCurve {
        let n = self.len();
        let stay: Vec<f64> = t_grid
            .iter()
            .map(|&t| self.stay_probability(metric, epsilon, t))
            .collect();
        EscapeCurve {
            spec: self.spec,
            epsilon,
            metric,
            seed: self.seed,
            n_samples: n,
            t_grid: t_grid.to_vec(),
            stderr: stay.iter().map(|&p| binomial_stderr(p, n)).collect(),
            t_escape: median_crossing(t_grid, &stay),
            stay,
        }
    }

    /// Median crossing on the grid `k * eps / steps_per_eps`, extended until
    /// the stay probability drops below one half or `max_points` is reached.
    pub fn escape_time(
        &self,
        epsilon: f64,
        metric: Metric,
        steps_per_eps: usize,
        max_points: usize,
    ) -> Option<f64> {
        let h = epsilon / steps_per_eps.max(1) as f64;
        let mut grid = Vec::new();
        let mut stay = Vec::new();
        for k in 0..max_points {
            let t = h * k as f64;
            let p = self.stay_probability(metric, epsilon, t);
            grid.push(t);
            stay.push(p);
            if p < 0.5 {
                break;
            }
        }
        median_crossing(&grid, &stay)
    }
}

pub fn escape_curve(
    spec: &EnsembleSpec,
    epsilon: f64,
    metric: Metric,
    t_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<EscapeCurve> {
    if n_samples < MIN_ESCAPE_SAMPLES {
        return Err(Error::InvalidArgument(alloc::format!(
            "escape curves need at least {MIN_ESCAPE_SAMPLES} samples"
        )));
    }
    Ok(SpectrumSamples::draw(spec, n_samples, seed)?.escape_curve(epsilon, metric, t_grid))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeScalingReport {
    pub kind: EnsembleKind,
    pub metric: Metric,
    pub eps_grid: Vec<f64>,
    pub d_grid: Vec<usize>,
    /// `t_escape[i][j]` for `d_grid[i]`, `eps_grid[j]`.
    pub t_escape: Vec<Vec<Option<f64>>>,
    /// Fit of `ln t_escape` against `ln eps` per dimension.
    pub eps_slopes: Vec<Option<LinearFit>>,
    /// `t_escape sqrt(ln d)` per dimension and `eps`.
    pub collapsed: Vec<Vec<Option<f64>>>,
    /// `(max - min) / mean` of the collapsed values across `d`, per `eps`.
    pub collapse_spread: Vec<Option<f64>>,
}

/// Escape times over a grid of `eps` and `d`. The same spectra are used for
/// every `eps` at a given `d`, so `t_escape` is monotone in `eps`.
pub fn escape_scaling_fit(
    kind: EnsembleKind,
    metric: Metric,
    eps_grid: &[f64],
    d_grid: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<EscapeScalingReport> {
    if eps_grid.len() < 3 && d_grid.len() < 3 {
        return Err(Error::InvalidArgument(
            "need at least 3 points in the eps grid or the d grid".into(),
        ));
    }
    if eps_grid.is_empty() || d_grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    if n_samples < MIN_ESCAPE_SAMPLES {
        return Err(Error::InvalidArgument(alloc::format!(
            "escape curves need at least {MIN_ESCAPE_SAMPLES} samples"
        )));
    }
    let mut t_escape = Vec::new();
    for &d in d_grid {
        let spec = EnsembleSpec::new(kind, d, None)?;
        let samples = SpectrumSamples::draw(&spec, n_samples, SeedStream::derive(seed, d as u64))?;
        t_escape.push(
            eps_grid
                .iter()
                .map(|&eps| samples.escape_time(eps, metric, 40, 40_000))
                .collect::<Vec<_>>(),
        );
    }
    let eps_slopes = t_escape
        .iter()
        .map(|row| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = eps_grid
                .iter()
                .zip(row)
                .filter_map(|(&e, t)| t.filter(|&t| t > 0.0).map(|t| (e.ln(), t.ln())))
                .unzip();
            linear_fit(&xs, &ys)
        })
        .collect();
    let collapsed: Vec<Vec<Option<f64>>> = t_escape
        .iter()
        .zip(d_grid)
        .map(|(row, &d)| {
            row.iter()
                .map(|t| t.map(|t| t * (d as f64).ln().sqrt()))
                .collect()
        })
        .collect();
    let collapse_spread = (0..eps_grid.len())
        .map(|j| {
            let col: Option<Vec<f64>> = collapsed.iter().map(|r| r[j]).collect();
            let col = col?;
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let max = col.iter().cloned().fold(f64::MIN, f64::max);
            let min = col.iter().cloned().fold(f64::MAX, f64::min);
            Some((max - min) / mean)
        })
        .collect();
    Ok(EscapeScalingReport {
        kind,
        metric,
        eps_grid: eps_grid.to_vec(),
        d_grid: d_grid.to_vec(),
        t_escape,
        eps_slopes,
        collapsed,
        collapse_spread,
    })
}

/// Stay probability for `U_t |0>` in trace distance from `|0>`.
pub fn state_escape_curve(
    spec: &EnsembleSpec,
    epsilon: f64,
    t_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<EscapeCurve> {
    if n_samples < MIN_ESCAPE_SAMPLES {
        return Err(Error::InvalidArgument(alloc::format!(
            "escape curves need at least {MIN_ESCAPE_SAMPLES} samples"
        )));
    }
    spec.validate()?;
    // <0|U_t|0> = sum_k e^{-i lambda_k t} |<0|v_k>|^2.
    let stays: Vec<Vec<bool>> = try_map_trials(seed, n_samples, |_, rng| {
        let s = eig_hermitian(&spec.sample(rng)?)?;
        let v = s.eigenvectors().matrix();
        let weights: Vec<f64> = (0..spec.dim).map(|k| v[(0, k)].norm_sqr()).collect();
        Ok::<_, Error>(
            t_grid
                .iter()
                .map(|&t| {
                    let amp: C64 = s
                        .eigenvalues()
                        .iter()
                        .zip(&weights)
                        .map(|(&l, &w)| crate::linalg::cis(-l * t) * w)
                        .sum();
                    (1.0 - amp.norm_sqr()).max(0.0).sqrt() < epsilon
                })
                .collect(),
        )
    })?;
    let n = n_samples as f64;
    let stay: Vec<f64> = (0..t_grid.len())
        .map(|k| stays.iter().filter(|row| row[k]).count() as f64 / n)
        .collect();
    Ok(EscapeCurve {
        spec: *spec,
        epsilon,
        metric: Metric::Diamond,
        seed,
        n_samples,
        t_grid: t_grid.to_vec(),
        stderr: stay
            .iter()
            .map(|&p| binomial_stderr(p, n_samples))
            .collect(),
        t_escape: median_crossing(t_grid, &stay),
        stay,
    })
}

pub const MAX_TORUS_DIM: usize = 6;

/// Which ball is measured around the centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallKind {
    /// `max_i |e^{i phi_i} - e^{i x_i}|` on the torus.
    Torus,
    /// Diamond distance between the diagonal channels.
    Diamond,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallMeasureEstimate {
    pub d: usize,
    pub t: f64,
    pub center: Vec<f64>,
    pub epsilon: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// `max_i |e^{i a_i} - e^{i b_i}|`.
pub fn torus_chordal_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| 2.0 * (0.5 * (x - y)).sin().abs())
        .fold(0.0, f64::max)
}

/// Distances from `center` of the phase vectors `lambda t` with i.i.d.
/// standard normal `lambda`.
fn ball_distances(
    kind: BallKind,
    d: usize,
    t: f64,
    center: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if d == 0 || d > MAX_TORUS_DIM {
        return Err(Error::InvalidArgument(alloc::format!(
            "ball measures need 1 <= d <= {MAX_TORUS_DIM}"
        )));
    }
    crate::error::check_dims(d, center.len())?;
    Ok(map_trials(seed, n_samples, |_, rng| {
        let mut phases = [0.0; MAX_TORUS_DIM];
        for p in phases.iter_mut().take(d) {
            *p = normal(rng) * t;
        }
        match kind {
            BallKind::Torus => torus_chordal_distance(&phases[..d], center),
            BallKind::Diamond => {
                let rel: Vec<f64> = phases[..d]
                    .iter()
                    .zip(center)
                    .map(|(p, c)| wrap_phase(p - c))
                    .collect();
                diamond_from_phases(&rel)
            }
        }
    }))
}

fn estimates_from(
    dists: &[f64],
    d: usize,
    t: f64,
    center: &[f64],
    eps_grid: &[f64],
) -> Vec<BallMeasureEstimate> {
    let n = dists.len();
    eps_grid
        .iter()
        .map(|&eps| {
            let p = dists.iter().filter(|&&x| x <= eps).count() as f64 / n.max(1) as f64;
            BallMeasureEstimate {
                d,
                t,
                center: center.to_vec(),
                epsilon: eps,
                estimate: p,
                std_error: binomial_stderr(p, n),
                n_samples: n,
            }
        })
        .collect()
}

/// `nu_t(B(x, eps))` for i.i.d. standard normal eigenvalues.
pub fn torus_ball_measure(
    d: usize,
    t: f64,
    center: &[f64],
    epsilon: f64,
    n_samples: usize,
    seed: u64,
) -> Result<BallMeasureEstimate> {
    let dists = ball_distances(BallKind::Torus, d, t, center, n_samples, seed)?;
    Ok(estimates_from(&dists, d, t, center, &[epsilon]).remove(0))
}

/// Frequency of `U_t` inside the diamond ball around `diag(e^{i center})`.
pub fn diagonal_ball_diamond_probe(
    d: usize,
    t: f64,
    center: &[f64],
    epsilon: f64,
    n_samples: usize,
    seed: u64,
) -> Result<BallMeasureEstimate> {
    let dists = ball_distances(BallKind::Diamond, d, t, center, n_samples, seed)?;
    Ok(estimates_from(&dists, d, t, center, &[epsilon]).remove(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquidistributionReport {
    pub kind: BallKind,
    pub estimates: Vec<BallMeasureEstimate>,
    /// Fit of `ln estimate` against `ln eps` over points with hits.
    pub fit: Option<LinearFit>,
    /// Slope predicted by the volume argument: `d` on the torus, `d - 1` for diamond balls.
    pub expected_slope: f64,
}

/// Ball measures over `eps_grid` from one set of draws, with the log-log slope.
pub fn equidistribution_scan(
    kind: BallKind,
    d: usize,
    t: f64,
    center: &[f64],
    eps_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<EquidistributionReport> {
    let dists = ball_distances(kind, d, t, center, n_samples, seed)?;
    let estimates = estimates_from(&dists, d, t, center, eps_grid);
    let (xs, ys): (Vec<f64>, Vec<f64>) = estimates
        .iter()
        .filter(|e| e.estimate > 0.0)
        .map(|e| (e.epsilon.ln(), e.estimate.ln()))
        .unzip();
    Ok(EquidistributionReport {
        kind,
        estimates,
        fit: linear_fit(&xs, &ys),
        expected_slope: match kind {
            BallKind::Torus => d as f64,
            BallKind::Diamond => d as f64 - 1.0,
        },
    })
}

/// Exact `nu_t(B(x, eps))` for `d = 1`: wrapped-normal mass of the arc of
/// half-width `2 arcsin(eps / 2)` around `x`, by summing the normal CDF.
pub fn wrapped_gaussian_arc_measure(
    t: f64,
    center: f64,
    epsilon: f64,
    cdf: impl Fn(f64) -> f64,
) -> f64 {
    if epsilon >= 2.0 {
        return 1.0;
    }
    let a = 2.0 * (0.5 * epsilon).asin();
    let reach = (12.0 * t / TAU).ceil() as i64 + 2;
    (-reach..=reach)
        .map(|k| {
            let c = center + TAU * k as f64;
            cdf((c + a) / t) - cdf((c - a) / t)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AvoidanceRow {
    pub t: f64,
    /// Frequency of `U_t` within eps of the identity.
    pub identity: f64,
    /// Summed hit frequencies of the balls around non-identity words of length `< k`.
    pub other_words: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpFigure {
    pub escape: EscapeCurve,
    pub complexity: Option<JumpCurveReport>,
    pub avoidance: Vec<AvoidanceRow>,
    pub seed: u64,
}

pub const MAX_EXACT_COMPLEXITY_DIM: usize = 4;

/// Escape curve, exact complexity curve and ball avoidance frequencies on
/// one `t` grid. All panels draw their Hamiltonians from the same `seed`,
/// so sample `i` is the same matrix in every panel.
#[allow(clippy::too_many_arguments)]
pub fn jump_figure(
    spec: &EnsembleSpec,
    table: Option<&WordTable>,
    epsilon: f64,
    metric: Metric,
    t_grid: &[f64],
    avoidance_k: usize,
    n_samples: usize,
    seed: u64,
) -> Result<JumpFigure> {
    let escape = escape_curve(spec, epsilon, metric, t_grid, n_samples, seed)?;
    let (complexity, avoidance) = match table {
        Some(table) if spec.dim <= MAX_EXACT_COMPLEXITY_DIM => {
            let c = complexity_jump_curve(spec, table, epsilon, metric, t_grid, n_samples, seed)?;
            let rows = t_grid
                .iter()
                .map(|&t| {
                    let r = union_bound_diagnostic(
                        spec,
                        table,
                        epsilon,
                        metric,
                        t,
                        avoidance_k,
                        n_samples,
                        seed,
                    )?;
                    Ok(AvoidanceRow {
                        t,
                        identity: r.rows.first().map_or(0.0, |w| w.frequency),
                        other_words: r.rows.iter().skip(1).map(|w| w.frequency).sum(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            (Some(c), rows)
        }
        Some(_) => {
            return Err(Error::InvalidArgument(alloc::format!(
                "exact complexity needs d <= {MAX_EXACT_COMPLEXITY_DIM}"
            )))
        }
        None => (None, Vec::new()),
    };
    Ok(JumpFigure {
        escape,
        complexity,
        avoidance,
        seed,
    })
}

/// `2 arcsin(eps / 2) / pi`: the probability that a uniform relative phase
/// lands within chordal distance `eps` of zero.
pub fn uniform_arc_probability(epsilon: f64) -> f64 {
    if epsilon >= 2.0 {
        1.0
    } else {
        2.0 * (0.5 * epsilon).asin() / PI
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::GateSet;
    use crate::special::adaptive_simpson;

    fn normal_cdf_quadrature(x: f64) -> f64 {
        let pdf = |u: f64| (-0.5 * u * u).exp() / (TAU).sqrt();
        if x < -12.0 {
            return 0.0;
        }
        adaptive_simpson(&pdf, -12.0, x.min(12.0), 1e-13)
    }

    #[test]
    fn crossing_interpolation() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let x = median_crossing(&t, &[1.0, 0.9, 0.3, 0.1]).unwrap();
        assert!((x - (1.0 + 0.4 / 0.6)).abs() < 1e-12);
        assert_eq!(median_crossing(&t, &[1.0, 0.9, 0.8, 0.7]), None);
        assert_eq!(median_crossing(&t, &[0.2, 0.1, 0.0, 0.0]), Some(0.0));
    }

    #[test]
    fn escape_curve_basics() {
        for spec in [EnsembleSpec::gue(16), EnsembleSpec::diag_gaussian(16)] {
            let grid = [0.0, 0.05, 0.1, 0.3, 0.6, 1.0];
            let c = escape_curve(&spec, 0.4, Metric::Diamond, &grid, 200, 3).unwrap();
            assert_eq!(c.stay[0], 1.0);
            assert!(c.stay.iter().all(|p| (0.0..=1.0).contains(p)));
            let wider = escape_curve(&spec, 0.8, Metric::Diamond, &grid, 200, 3).unwrap();
            assert!(wider.stay.iter().zip(&c.stay).all(|(a, b)| a >= b));
        }
        assert!(escape_curve(&EnsembleSpec::gue(4), 0.4, Metric::Diamond, &[0.0], 10, 0).is_err());
    }

    #[test]
    fn gaussian_escapes_by_eps() {
        let c = escape_curve(
            &EnsembleSpec::diag_gaussian(64),
            0.4,
            Metric::Diamond,
            &[0.4],
            500,
            1,
        )
        .unwrap();
        assert!(c.stay[0] < 0.5, "{:?}", c.stay);
    }

    #[test]
    fn escape_times_monotone_in_eps() {
        let r = escape_scaling_fit(
            EnsembleKind::Gue,
            Metric::Diamond,
            &[0.1, 0.2, 0.4],
            &[16],
            200,
            4,
        )
        .unwrap();
        let row: Vec<f64> = r.t_escape[0].iter().map(|t| t.unwrap()).collect();
        assert!(row.windows(2).all(|w| w[0] <= w[1]));
        let fit = r.eps_slopes[0].unwrap();
        assert!((0.7..=1.3).contains(&fit.slope), "{fit:?}");
        assert!(
            escape_scaling_fit(EnsembleKind::Gue, Metric::Diamond, &[0.1], &[16], 200, 4).is_err()
        );
    }

    #[test]
    fn state_escape_basics() {
        let grid = [0.0, 0.1, 0.5, 2.0];
        let c = state_escape_curve(&EnsembleSpec::gue(16), 0.4, &grid, 100, 2).unwrap();
        assert_eq!(c.stay[0], 1.0);
        assert!(c.stay[3] < 0.5);
        // |0> is an eigenvector of every diagonal Hamiltonian.
        let d = state_escape_curve(&EnsembleSpec::diag_gaussian(8), 0.1, &grid, 100, 2).unwrap();
        assert!(d.stay.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn ball_measure_trivial_and_d1_oracle() {
        let e = torus_ball_measure(2, 1.0, &[0.3, -1.0], 2.0, 500, 0).unwrap();
        assert_eq!(e.estimate, 1.0);
        for &(t, c, eps) in &[(5.0, 0.7, 0.4), (2.0, 0.0, 0.9), (0.5, 0.2, 0.3)] {
            let exact = wrapped_gaussian_arc_measure(t, c, eps, normal_cdf_quadrature);
            let mc = torus_ball_measure(1, t, &[c], eps, 200_000, 9).unwrap();
            assert!(
                (mc.estimate - exact).abs() <= 3.0 * mc.std_error + 1e-12,
                "{mc:?} vs {exact}"
            );
        }
        assert!(torus_ball_measure(7, 1.0, &[0.0; 7], 0.5, 10, 0).is_err());
    }

    #[test]
    fn long_time_d1_tends_to_uniform() {
        let exact = wrapped_gaussian_arc_measure(80.0, 0.0, 0.5, normal_cdf_quadrature);
        assert!((exact - uniform_arc_probability(0.5)).abs() < 1e-9);
    }

    #[test]
    fn torus_slope_small() {
        let r = equidistribution_scan(
            BallKind::Torus,
            2,
            2.0,
            &[0.0, 0.0],
            &[0.4, 0.6, 0.8],
            200_000,
            5,
        )
        .unwrap();
        let s = r.fit.unwrap().slope;
        assert!((s - 2.0).abs() < 0.5, "{s}");
        let r = equidistribution_scan(
            BallKind::Diamond,
            3,
            2.0,
            &[0.0; 3],
            &[0.3, 0.5, 0.8],
            200_000,
            6,
        )
        .unwrap();
        assert!(r.estimates.iter().all(|e| e.estimate <= 1.0));
        assert!((r.fit.unwrap().slope - 2.0).abs() < 0.6, "{:?}", r.fit);
    }

    #[test]
    fn jump_figure_is_consistent_and_reproducible() {
        let gs = GateSet::default_pair();
        let table = WordTable::build(&gs, 5, 1e-6).unwrap();
        let spec = EnsembleSpec::gue(2);
        let grid = [0.0, 0.05, 0.5, 1.0, 2.0];
        let f = jump_figure(&spec, Some(&table), 0.2, Metric::Diamond, &grid, 3, 120, 11).unwrap();
        let again =
            jump_figure(&spec, Some(&table), 0.2, Metric::Diamond, &grid, 3, 120, 11).unwrap();
        assert_eq!(f, again);
        let c = f.complexity.as_ref().unwrap();
        for (k, &p) in f.escape.stay.iter().enumerate() {
            let zeros = c.curves.iter().filter(|cv| cv.values[k].is_zero()).count() as f64 / 120.0;
            assert!((zeros - p).abs() < 1e-12, "t = {}: {zeros} vs {p}", grid[k]);
            assert!((f.avoidance[k].identity - p).abs() < 1e-12);
        }
        assert!(jump_figure(
            &EnsembleSpec::gue(8),
            Some(&table),
            0.2,
            Metric::Diamond,
            &grid,
            3,
            120,
            1
        )
        .is_err());
    }
}
