//! Spectral measures and Monte Carlo statistics of `tr U_t`.

use crate::ensembles::{EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::linalg::cis;
use crate::par::try_map_trials;
use crate::prelude::*;
use crate::special::j1_2t_over_t;
use crate::stats::BoundCheck;

/// Semicircle density on `[-2, 2]`.
pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * core::f64::consts::PI)
    }
}

/// Characteristic function of the semicircle law, `J1(2t) / t`.
pub fn semicircle_charfn(t: f64) -> f64 {
    j1_2t_over_t(t)
}

pub fn gaussian_charfn(t: f64) -> f64 {
    (-0.5 * t * t).exp()
}

/// `Var tr U_t = d (1 - exp(-t^2))` for i.i.d. standard normal eigenvalues.
pub fn gaussian_trace_variance(t: f64, d: usize) -> f64 {
    d as f64 * -(-t * t).exp_m1()
}

/// Limiting value of `(1/d) E tr U_t` for the ensemble, if one is known.
///
/// GUE uses the semicircle of radius `2 sqrt(d sigma^2)`; the Gaussian models
/// are exact at every `d`.
pub fn theory_mean(spec: &EnsembleSpec, t: f64) -> f64 {
    match spec.kind {
        EnsembleKind::Gue => semicircle_charfn(0.5 * spec.semicircle_radius() * t),
        EnsembleKind::DiagGaussian | EnsembleKind::RandomBasisGaussian => gaussian_charfn(t),
    }
}

/// Exact `Var tr U_t` where available (Gaussian models only).
pub fn theory_variance(spec: &EnsembleSpec, t: f64) -> Option<f64> {
    match spec.kind {
        EnsembleKind::Gue => None,
        _ => Some(gaussian_trace_variance(t, spec.dim)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormFactorEstimate {
    pub t: f64,
    /// Estimate of `(1/d) E tr U_t`.
    pub mean: C64,
    /// Unbiased estimate of `Var tr U_t = E|tr U_t|^2 - |E tr U_t|^2`.
    pub variance: f64,
    pub n_samples: usize,
    /// Standard error of `mean`.
    pub std_error: f64,
    pub theory_mean: f64,
    pub theory_variance: Option<f64>,
}

/// Sample mean and variance of `tr U_t` on `t_grid` over `n_samples` draws.
pub fn estimate_form_factor(
    spec: &EnsembleSpec,
    t_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<FormFactorEstimate>> {
    spec.validate()?;
    if n_samples < 2 {
        return Err(Error::InvalidArgument(
            "form factor needs at least 2 samples".into(),
        ));
    }
    let traces: Vec<Vec<C64>> = try_map_trials(seed, n_samples, |_, rng| {
        let eigs = spec.sample_eigenvalues(rng)?;
        Ok::<_, Error>(
            t_grid
                .iter()
                .map(|&t| eigs.iter().map(|&l| cis(-l * t)).sum::<C64>())
                .collect(),
        )
    })?;
    Ok(reduce_traces(spec, t_grid, &traces))
}

fn reduce_traces(
    spec: &EnsembleSpec,
    t_grid: &[f64],
    traces: &[Vec<C64>],
) -> Vec<FormFactorEstimate> {
    let n = traces.len();
    let d = spec.dim as f64;
    t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let sum: C64 = traces.iter().map(|row| row[k]).sum();
            let mean_tr = sum / n as f64;
            let ss: f64 = traces.iter().map(|row| (row[k] - mean_tr).norm_sqr()).sum();
            let variance = ss / (n - 1) as f64;
            FormFactorEstimate {
                t,
                mean: mean_tr / d,
                variance,
                n_samples: n,
                std_error: (variance / n as f64).sqrt() / d,
                theory_mean: theory_mean(spec, t),
                theory_variance: theory_variance(spec, t),
            }
        })
        .collect()
}

/// Multipliers applied to each variance bound before flagging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceSlack {
    /// Flag when `variance > d * global_factor`.
    pub global_factor: f64,
    /// Flag when `variance > (4 t^2 / d) * small_t_factor` for GUE at `t <= small_t_max`.
    pub small_t_factor: f64,
    pub small_t_max: f64,
    /// Relative tolerance against the exact variance, where one exists.
    pub theory_rel_tol: f64,
}

impl VarianceSlack {
    /// Five relative standard errors of a variance estimate from `n` draws.
    pub fn for_samples(n: usize) -> Self {
        let rel = 5.0 / (n.max(1) as f64).sqrt();
        Self {
            global_factor: 1.0 + rel,
            small_t_factor: 1.0 + rel,
            small_t_max: 0.3,
            theory_rel_tol: rel,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceRow {
    pub t: f64,
    pub variance: f64,
    pub global: BoundCheck,
    /// GUE only, `t <= small_t_max`: the bound `4 t^2 / d` with its slack.
    pub small_t: Option<BoundCheck>,
    /// `4 t^2 d sigma^2`: the same gradient estimate keeping the factor `d`
    /// from `|grad tr f(H)|^2 = sum_i f'(lambda_i)^2`. Reported, never flagged.
    pub small_t_dimensional: Option<f64>,
    /// Exact variance and the relative error against it.
    pub theory: Option<(f64, f64)>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub dim: usize,
    pub kind: EnsembleKind,
    pub slack: VarianceSlack,
    pub rows: Vec<VarianceRow>,
}

impl VarianceReport {
    pub fn any_flag(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }

    pub fn global_ok(&self) -> bool {
        self.rows.iter().all(|r| !r.global.violated())
    }

    pub fn small_t_ok(&self) -> bool {
        self.rows
            .iter()
            .filter_map(|r| r.small_t)
            .all(|c| !c.violated())
    }

    pub fn theory_ok(&self) -> bool {
        self.rows
            .iter()
            .filter_map(|r| r.theory)
            .all(|(_, rel)| rel <= self.slack.theory_rel_tol)
    }
}

/// Compares each empirical variance with `Var tr U_t <= d` and the model
/// specific bounds.
pub fn check_variance_bounds(
    estimates: &[FormFactorEstimate],
    spec: &EnsembleSpec,
    slack: VarianceSlack,
) -> VarianceReport {
    let d = spec.dim as f64;
    let rows = estimates
        .iter()
        .map(|e| {
            let global = BoundCheck::new(d, e.variance, d * (slack.global_factor - 1.0));
            let small = spec.kind == EnsembleKind::Gue && e.t.abs() <= slack.small_t_max;
            let small_t = small.then(|| {
                let b = 4.0 * e.t * e.t * spec.variance;
                BoundCheck::new(b, e.variance, b * (slack.small_t_factor - 1.0))
            });
            let small_t_dimensional = small.then_some(4.0 * e.t * e.t * d * spec.variance);
            let theory = e.theory_variance.map(|v| {
                let rel = if v > 0.0 {
                    (e.variance - v).abs() / v
                } else {
                    e.variance.abs()
                };
                (v, rel)
            });
            let flagged = global.violated()
                || small_t.is_some_and(|c| c.violated())
                || theory.is_some_and(|(_, rel)| rel > slack.theory_rel_tol);
            VarianceRow {
                t: e.t,
                variance: e.variance,
                global,
                small_t,
                small_t_dimensional,
                theory,
                flagged,
            }
        })
        .collect();
    VarianceReport {
        dim: spec.dim,
        kind: spec.kind,
        slack,
        rows,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub delta: f64,
    /// `2 exp(-d^2 delta^2 / (4 t^2))` against `P(|tr cos(Ht) - E| >= delta d)`.
    pub check: BoundCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub dim: usize,
    pub t: f64,
    pub n_samples: usize,
    /// Sample mean of `tr cos(Ht)`, used as the centre.
    pub mean: f64,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    pub fn all_within(&self) -> bool {
        self.rows.iter().all(|r| !r.check.violated())
    }
}

/// Empirical tail of `tr cos(Ht)` about its mean at relative deviations
/// `delta`, with three binomial standard errors of slack.
pub fn trace_concentration_tail(
    spec: &EnsembleSpec,
    t: f64,
    deltas: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<TailReport> {
    spec.validate()?;
    if spec.kind != EnsembleKind::Gue {
        return Err(Error::InvalidArgument(
            "trace concentration is stated for GUE".into(),
        ));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(
            "trace concentration needs t > 0".into(),
        ));
    }
    if n_samples < 1 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let xs: Vec<f64> = try_map_trials(seed, n_samples, |_, rng| {
        let eigs = spec.sample_eigenvalues(rng)?;
        Ok::<_, Error>(eigs.iter().map(|&l| (l * t).cos()).sum())
    })?;
    let mean = xs.iter().sum::<f64>() / n_samples as f64;
    let d = spec.dim as f64;
    // Lipschitz constant of cos(. t) is t; the bound is written for sigma^2 = 1/d.
    let l2 = t * t * spec.variance * d;
    let rows = deltas
        .iter()
        .map(|&delta| {
            let hits = xs
                .iter()
                .filter(|&&x| (x - mean).abs() >= delta * d)
                .count();
            let bound = 2.0 * (-d * d * delta * delta / (4.0 * l2)).exp();
            TailRow {
                delta,
                check: BoundCheck::tail(bound, hits as f64 / n_samples as f64, n_samples, 3.0),
            }
        })
        .collect();
    Ok(TailReport {
        dim: spec.dim,
        t,
        n_samples,
        mean,
        rows,
    })
}

/// Histogram of eigenvalues pooled over many draws.
///
/// Values outside the edges are counted in the first or last bin, so the
/// counts always sum to `d` times the number of matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub matrices: usize,
    pub dim: usize,
}

impl SpectralHistogram {
    pub fn new(edges: Vec<f64>, dim: usize) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument(
                "histogram edges must increase".into(),
            ));
        }
        let bins = edges.len() - 1;
        Ok(Self {
            edges,
            counts: vec![0; bins],
            matrices: 0,
            dim,
        })
    }

    /// `bins` equal bins on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, bins: usize, dim: usize) -> Result<Self> {
        let w = (hi - lo) / bins.max(1) as f64;
        Self::new((0..=bins).map(|i| lo + w * i as f64).collect(), dim)
    }

    pub fn add(&mut self, eigenvalues: &[f64]) -> Result<()> {
        crate::error::check_dims(self.dim, eigenvalues.len())?;
        let last = self.counts.len() - 1;
        for &x in eigenvalues {
            let idx = self.edges[1..].partition_point(|&e| e <= x).min(last);
            self.counts[idx] += 1;
        }
        self.matrices += 1;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Empirical density per bin, normalized to integrate to 1.
    pub fn density(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, w)| c as f64 / total / (w[1] - w[0]))
            .collect()
    }
}

/// Pools the spectra of `n_matrices` draws into `hist`.
pub fn spectral_histogram(
    spec: &EnsembleSpec,
    mut hist: SpectralHistogram,
    n_matrices: usize,
    seed: u64,
) -> Result<SpectralHistogram> {
    crate::error::check_dims(spec.dim, hist.dim)?;
    let spectra = try_map_trials(seed, n_matrices, |_, rng| spec.sample_eigenvalues(rng))?;
    for eigs in &spectra {
        hist.add(eigs)?;
    }
    Ok(hist)
}
