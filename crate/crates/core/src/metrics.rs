//! Distances between unitary channels and between pure states, plus the
//! closed-form distances to the diagonal torus and to state tori.
//!
//! The closed forms all involve `sqrt(a - b)` with `a ~ b` near zero
//! distance. Each is evaluated through an algebraically equal expression
//! that avoids the cancellation, so distances of order 1e-14 come out as
//! such instead of as 1e-7.

use core::f64::consts::{PI, TAU};

use crate::error::{check_dims, Result};
use crate::linalg::{cis, wrap_phase, PureState, UnitaryMatrix, ONE};
use crate::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Diamond distance between the unitary channels.
    Diamond,
    /// Operator-norm distance minimized over a global phase.
    OpNormProj,
    /// Hilbert-Schmidt distance minimized over a global phase.
    HsProj,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Self::Diamond => "diamond",
            Self::OpNormProj => "opnorm",
            Self::HsProj => "hs",
        }
    }

    pub fn distance(self, u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
        match self {
            Self::Diamond => diamond_distance_unitary(u, v),
            Self::OpNormProj => opnorm_proj_distance(u, v),
            Self::HsProj => hs_proj_distance(u, v),
        }
    }

    /// Distance of `diag(e^{i phases})` from the identity channel.
    pub fn from_identity_phases(self, phases: &[f64]) -> f64 {
        match self {
            Self::Diamond => diamond_from_phases(phases),
            Self::OpNormProj => opnorm_from_phases(phases),
            Self::HsProj => hs_from_phases(phases),
        }
    }
}

impl core::fmt::Display for Metric {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Metric {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "diamond" => Ok(Self::Diamond),
            "opnorm" | "op" | "operator" => Ok(Self::OpNormProj),
            "hs" | "hilbert-schmidt" => Ok(Self::HsProj),
            other => Err(crate::Error::InvalidArgument(alloc::format!(
                "unknown metric `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDistanceReport {
    pub hs_proj: f64,
    pub opnorm_proj: f64,
    pub diamond: f64,
}

impl ChannelDistanceReport {
    pub fn compute(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<Self> {
        let phases = relative_phases(u, v)?;
        Ok(Self {
            hs_proj: hs_proj_distance(u, v)?,
            opnorm_proj: opnorm_from_phases(&phases),
            diamond: diamond_from_phases(&phases),
        })
    }

    /// `d_inf <= D <= 2 d_inf` and `d_inf <= d_hs <= sqrt(d) D`, each with `slack`.
    pub fn sandwich_holds(&self, dim: usize, slack: f64) -> bool {
        let sd = (dim as f64).sqrt();
        self.opnorm_proj <= self.diamond + slack
            && self.diamond <= 2.0 * self.opnorm_proj + slack
            && self.opnorm_proj <= self.hs_proj + slack
            && self.hs_proj <= sd * self.diamond + slack
    }
}

/// Eigenphases of `V^dag U`.
pub fn relative_phases(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<Vec<f64>> {
    check_dims(u.dim(), v.dim())?;
    let w = UnitaryMatrix::new_unchecked(v.matrix().adjoint_mul(u.matrix())?);
    w.eigenphases()
}

fn trace_adjoint_product(u: &UnitaryMatrix, v: &UnitaryMatrix) -> C64 {
    v.matrix()
        .as_slice()
        .iter()
        .zip(u.matrix().as_slice())
        .map(|(a, b)| a.conj() * b)
        .sum()
}

/// `sqrt(2d - 2 |tr(V^dag U)|)`, evaluated as `|| U - e^{i phi*} V ||_HS` at
/// the optimal phase `phi* = arg tr(V^dag U)`.
pub fn hs_proj_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    check_dims(u.dim(), v.dim())?;
    let tr = trace_adjoint_product(u, v);
    let rot = if tr.norm() > 0.0 { tr / tr.norm() } else { ONE };
    let s: f64 = u
        .matrix()
        .as_slice()
        .iter()
        .zip(v.matrix().as_slice())
        .map(|(a, b)| (a - rot * b).norm_sqr())
        .sum();
    Ok(s.sqrt())
}

fn hs_from_phases(phases: &[f64]) -> f64 {
    let tr: C64 = phases.iter().map(|&p| cis(p)).sum();
    let rot = if tr.norm() > 0.0 { tr / tr.norm() } else { ONE };
    phases
        .iter()
        .map(|&p| (cis(p) - rot).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Length of the smallest arc of the circle containing every phase.
pub fn covering_arc(phases: &[f64]) -> f64 {
    if phases.len() <= 1 {
        return 0.0;
    }
    let mut p: Vec<f64> = phases.iter().map(|x| wrap_phase(*x)).collect();
    p.sort_by(f64::total_cmp);
    let mut largest_gap = p[0] + TAU - p[p.len() - 1];
    for w in p.windows(2) {
        largest_gap = largest_gap.max(w[1] - w[0]);
    }
    (TAU - largest_gap).max(0.0)
}

/// Centre of the smallest covering arc, i.e. the optimal global phase.
pub fn covering_arc_center(phases: &[f64]) -> f64 {
    if phases.is_empty() {
        return 0.0;
    }
    let mut p: Vec<f64> = phases.iter().map(|x| wrap_phase(*x)).collect();
    p.sort_by(f64::total_cmp);
    let n = p.len();
    // Largest gap runs from p[gap_end - 1] to p[gap_end] (cyclically).
    let mut best = p[0] + TAU - p[n - 1];
    let mut gap_end = 0;
    for i in 1..n {
        let g = p[i] - p[i - 1];
        if g > best {
            best = g;
            gap_end = i;
        }
    }
    let start = p[gap_end];
    let arc = TAU - best;
    wrap_phase(start + arc / 2.0)
}

/// Projective operator-norm distance of `diag(e^{i phases})` from `I`:
/// `2 sin(arc / 4)`, attained at the centre of the smallest covering arc.
pub fn opnorm_from_phases(phases: &[f64]) -> f64 {
    2.0 * (covering_arc(phases) / 4.0).sin()
}

/// `inf_phi || U - e^{i phi} V ||_op`.
pub fn opnorm_proj_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    Ok(opnorm_from_phases(&relative_phases(u, v)?))
}

/// Diamond distance between the channels of `U` and `V`: with `nu` the
/// distance from the origin to the convex hull of the eigenvalues of
/// `V^dag U`, it is `2 sqrt(1 - nu^2)`.
pub fn diamond_distance_unitary(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    Ok(diamond_from_phases(&relative_phases(u, v)?))
}

pub fn diamond_from_phases(phases: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = phases.iter().map(|&p| (p.cos(), p.sin())).collect();
    match hull_nearest_to_origin(&pts) {
        HullNearest::ContainsOrigin => 2.0,
        HullNearest::Vertex(_) => 0.0,
        // For unit-modulus endpoints a, b the chord lies at distance
        // |a + b| / 2 from the origin, so 2 sqrt(1 - nu^2) = |a - b|.
        HullNearest::Edge(a, b) => ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt().min(2.0),
    }
}

/// Distance from the origin to the convex hull of `pts`.
pub fn hull_distance_from_origin(pts: &[(f64, f64)]) -> f64 {
    match hull_nearest_to_origin(pts) {
        HullNearest::ContainsOrigin => 0.0,
        HullNearest::Vertex(p) => (p.0 * p.0 + p.1 * p.1).sqrt(),
        HullNearest::Edge(a, b) => segment_distance(a, b),
    }
}

#[derive(Debug, Clone, Copy)]
enum HullNearest {
    ContainsOrigin,
    Vertex((f64, f64)),
    Edge((f64, f64), (f64, f64)),
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn segment_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let s = if len2 > 0.0 {
        (-(a.0 * dx + a.1 * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (px, py) = (a.0 + s * dx, a.1 + s * dy);
    (px * px + py * py).sqrt()
}

/// Andrew's monotone chain, then the nearest hull feature to the origin.
fn hull_nearest_to_origin(pts: &[(f64, f64)]) -> HullNearest {
    let mut p: Vec<(f64, f64)> = pts.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    p.dedup();
    if p.is_empty() {
        return HullNearest::ContainsOrigin;
    }
    if p.len() == 1 {
        return HullNearest::Vertex(p[0]);
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * p.len());
    for &q in &p {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    let lower_len = hull.len() + 1;
    for &q in p.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0
        {
            hull.pop();
        }
        hull.push(q);
    }
    hull.pop();

    let origin = (0.0, 0.0);
    if hull.len() >= 3 {
        let inside =
            (0..hull.len()).all(|i| cross(hull[i], hull[(i + 1) % hull.len()], origin) >= 0.0);
        if inside {
            return HullNearest::ContainsOrigin;
        }
    } else {
        // Collinear points: the hull is the segment hull[0]..hull[1].
        let (a, b) = (hull[0], hull[hull.len() - 1]);
        if cross(a, b, origin) == 0.0 && segment_distance(a, b) == 0.0 {
            return HullNearest::ContainsOrigin;
        }
    }
    let edges = if hull.len() >= 3 { hull.len() } else { 1 };
    let mut best = (f64::INFINITY, HullNearest::ContainsOrigin);
    for i in 0..edges {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        let dist = segment_distance(a, b);
        if dist < best.0 {
            best = (dist, HullNearest::Edge(a, b));
        }
    }
    best.1
}

/// `sqrt(1 - |<psi|phi>|^2)`.
pub fn trace_distance_states(psi: &PureState, phi: &PureState) -> Result<f64> {
    let ip = psi.inner(phi)?;
    // m = || psi - e^{i arg <psi|phi>} phi ||^2 = 2 - 2 |<psi|phi>|, and
    // 1 - s^2 = (m / 2) (2 - m / 2).
    let rot = if ip.norm() > 0.0 { ip / ip.norm() } else { ONE };
    let m: f64 = psi
        .amplitudes()
        .iter()
        .zip(phi.amplitudes())
        .map(|(a, b)| (a * rot - b).norm_sqr())
        .sum();
    let half = 0.5 * m;
    Ok((half * (2.0 - half)).max(0.0).sqrt().min(1.0))
}

/// Distance from `X` to the torus of diagonal unitaries, with the minimizer
/// `D_ii = X_ii / |X_ii|` (or 1 where `X_ii = 0`).
pub fn dist_to_diagonal_torus(x: &UnitaryMatrix) -> (f64, Vec<C64>) {
    let d = x.dim();
    let m = x.matrix();
    let minimizer: Vec<C64> = (0..d)
        .map(|i| {
            let z = m[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                ONE
            }
        })
        .collect();
    (torus_distance_with(x, &minimizer), minimizer)
}

/// `|| X - diag(phases) ||_HS`.
pub fn torus_distance_with(x: &UnitaryMatrix, diag: &[C64]) -> f64 {
    let d = x.dim();
    let m = x.matrix();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            let z = if i == j {
                m[(i, j)] - diag[i]
            } else {
                m[(i, j)]
            };
            s += z.norm_sqr();
        }
    }
    s.sqrt()
}

/// Closed form `sqrt(2d - 2 sum_i |X_ii|)` as written, without the
/// cancellation-free rearrangement. Kept for cross-checks.
pub fn dist_to_diagonal_torus_closed_form(x: &UnitaryMatrix) -> f64 {
    let d = x.dim() as f64;
    let s: f64 = x.matrix().diagonal().iter().map(|z| z.norm()).sum();
    (2.0 * d - 2.0 * s).max(0.0).sqrt()
}

/// Distance from `psi` to the torus `{ sum_k e^{i a_k} phi_k |k> }`:
/// `sqrt(1 - (sum_k |psi_k| |phi_k|)^2)`.
pub fn dist_to_state_torus(psi: &PureState, phi: &PureState) -> Result<f64> {
    check_dims(psi.dim(), phi.dim())?;
    let overlap = torus_overlap(psi.amplitudes(), phi.amplitudes());
    // 1 - S = sum_k (|psi_k| - |phi_k|)^2 / 2 for unit vectors.
    let one_minus: f64 = 0.5
        * psi
            .amplitudes()
            .iter()
            .zip(phi.amplitudes())
            .map(|(a, b)| (a.norm() - b.norm()).powi(2))
            .sum::<f64>();
    Ok((one_minus * (1.0 + overlap)).max(0.0).sqrt().min(1.0))
}

/// `sum_k |a_k| |b_k|`.
pub fn torus_overlap(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.norm() * y.norm()).sum()
}

/// `|| G - I ||_op` for a unitary `G`, from its eigenphases.
pub fn distance_from_identity_op(g: &UnitaryMatrix) -> Result<f64> {
    Ok(g.eigenphases()?
        .iter()
        .map(|&p| 2.0 * (p.abs().min(PI) / 2.0).sin())
        .fold(0.0, f64::max))
}
