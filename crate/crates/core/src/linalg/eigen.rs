//! Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit QL with Wilkinson-style shifts.

use super::{cis, ComplexMatrix, HermitianMatrix, Spectrum, UnitaryMatrix, ONE, ZERO};
use crate::error::{Error, Result};
use crate::prelude::*;

const MAX_QL_SWEEPS: usize = 60;

struct Tridiagonal {
    diag: Vec<f64>,
    /// `off[i]` couples `i` and `i + 1`; the last entry is zero.
    off: Vec<f64>,
    /// `A = Q T Q^dag`; only built when eigenvectors are wanted.
    q: Option<Vec<C64>>,
}

fn tridiagonalize(h: &HermitianMatrix, want_vectors: bool) -> Tridiagonal {
    let n = h.dim();
    let mut a: Vec<C64> = h.matrix().as_slice().to_vec();
    let mut q: Option<Vec<C64>> =
        want_vectors.then(|| ComplexMatrix::identity(n).as_slice().to_vec());
    let mut sub = vec![ZERO; n];

    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        if m == 1 {
            sub[k] = a[(k + 1) * n + k];
            break;
        }
        let mut xnorm2 = 0.0;
        for j in 0..m {
            xnorm2 += a[(k + 1 + j) * n + k].norm_sqr();
        }
        let tail2 = xnorm2 - a[(k + 1) * n + k].norm_sqr();
        if tail2 == 0.0 {
            sub[k] = a[(k + 1) * n + k];
            continue;
        }
        let xnorm = xnorm2.sqrt();
        let x0 = a[(k + 1) * n + k];
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        for j in 0..m {
            v[j] = a[(k + 1 + j) * n + k];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v[..m].iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // p = tau * B v on the trailing block.
        for i in 0..m {
            let row = &a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            p[i] = row.iter().zip(&v[..m]).map(|(b, x)| b * x).sum::<C64>() * tau;
        }
        let vp: C64 = v[..m].iter().zip(&p[..m]).map(|(x, y)| x.conj() * y).sum();
        let kk = vp * (0.5 * tau);
        for i in 0..m {
            p[i] -= kk * v[i];
        }
        for i in 0..m {
            let (vi, qi) = (v[i], p[i]);
            let row = &mut a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            for j in 0..m {
                row[j] -= vi * p[j].conj() + qi * v[j].conj();
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha.conj();
        for j in 1..m {
            a[(k + 1 + j) * n + k] = ZERO;
            a[k * n + k + 1 + j] = ZERO;
        }
        sub[k] = alpha;

        if let Some(q) = q.as_mut() {
            // Q[:, k+1..] <- Q[:, k+1..] (I - tau v v^dag)
            for r in 0..n {
                let row = &mut q[r * n + k + 1..r * n + n];
                let w: C64 = row.iter().zip(&v[..m]).map(|(x, y)| x * y).sum::<C64>() * tau;
                for j in 0..m {
                    row[j] -= w * v[j].conj();
                }
            }
        }
    }

    // Diagonal phase change making the subdiagonal real and nonnegative.
    let mut phase = ONE;
    let mut phases = vec![ONE; n];
    let mut off = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let e = sub[k];
        let r = e.norm();
        off[k] = r;
        if r > 0.0 {
            phase *= e / r;
        }
        phases[k + 1] = phase;
    }
    if let Some(q) = q.as_mut() {
        for r in 0..n {
            for c in 1..n {
                q[r * n + c] *= phases[c];
            }
        }
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    Tridiagonal { diag, off, q }
}

fn ql_implicit(t: &mut Tridiagonal, max_abs: f64) -> Result<()> {
    let n = t.diag.len();
    let d = &mut t.diag;
    let e = &mut t.off;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() + dd == dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_SWEEPS {
                return Err(Error::NonConvergence {
                    dim: n,
                    index: l,
                    iterations,
                    max_abs,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = t.q.as_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        let zi = z[k * n + i];
                        z[k * n + i + 1] = zi * s + f * c;
                        z[k * n + i] = zi * c - f * s;
                    }
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn check_finite(h: &HermitianMatrix) -> Result<()> {
    if h.matrix().is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian(h: &HermitianMatrix) -> Result<Vec<f64>> {
    check_finite(h)?;
    let mut t = tridiagonalize(h, false);
    ql_implicit(&mut t, h.matrix().max_abs())?;
    let mut vals = t.diag;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Full eigendecomposition with ascending eigenvalues. Each eigenvector is
/// phase-fixed so that its first non-negligible component is real positive.
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<Spectrum> {
    check_finite(h)?;
    let n = h.dim();
    let mut t = tridiagonalize(h, true);
    ql_implicit(&mut t, h.matrix().max_abs())?;
    let z = t.q.take().unwrap_or_default();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| t.diag[a].total_cmp(&t.diag[b]));

    let mut vecs = ComplexMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        let lead = (0..n)
            .map(|r| z[r * n + old_col])
            .find(|v| v.norm() > 1e-10)
            .unwrap_or(ONE);
        let fix = lead.conj() / lead.norm();
        for r in 0..n {
            vecs[(r, new_col)] = z[r * n + old_col] * fix;
        }
    }
    let vals = order.iter().map(|&i| t.diag[i]).collect();
    Ok(Spectrum::from_parts(
        vals,
        UnitaryMatrix::new_unchecked(vecs),
    ))
}

/// Eigenphases of a unitary in `(-pi, pi]` (unsorted).
///
/// A unitary `W` commutes with the Hermitian pencil
/// `K(phi) = Re(e^{-i phi} W)`, whose eigenvalues are `cos(theta_j - phi)`.
/// The eigenvectors of `K` diagonalize `W` except inside clusters where two
/// phases happen to be mirror images about `phi`; such clusters are resolved
/// recursively with a different `phi`.
pub fn unitary_eigenphases(w: &UnitaryMatrix) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(w.dim());
    phases_rec(w.matrix(), 0, &mut out)?;
    Ok(out)
}

const PENCIL_ANGLES: [f64; 6] = [0.377_1, 1.913_7, 2.604_9, 0.901_3, 2.236_1, 1.287_3];
const CLUSTER_GAP: f64 = 1e-7;

fn phases_rec(w: &ComplexMatrix, depth: usize, out: &mut Vec<f64>) -> Result<()> {
    let n = w.dim();
    if n == 1 {
        out.push(w[(0, 0)].arg());
        return Ok(());
    }
    let mean = w.trace() / n as f64;
    let spread = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let target = if i == j { mean } else { ZERO };
            (w[(i, j)] - target).norm()
        })
        .fold(0.0, f64::max);
    if spread < 1e-12 || depth >= PENCIL_ANGLES.len() {
        // Scalar block (a genuine degenerate eigenvalue), or out of angles.
        let phase = mean.arg();
        out.extend(core::iter::repeat_n(phase, n));
        return Ok(());
    }
    let rot = cis(-PENCIL_ANGLES[depth]);
    let k = HermitianMatrix::new(w.scale(rot));
    let spec = eig_hermitian(&k)?;
    let vals = spec.eigenvalues();
    let v = spec.eigenvectors().matrix();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end] - vals[end - 1] < CLUSTER_GAP {
            end += 1;
        }
        let cols: Vec<usize> = (start..end).collect();
        let block = ComplexMatrix::from_fn(cols.len(), |a, b| {
            let (ca, cb) = (cols[a], cols[b]);
            (0..n)
                .map(|r| {
                    let wv: C64 = (0..n).map(|s| w[(r, s)] * v[(s, cb)]).sum();
                    v[(r, ca)].conj() * wv
                })
                .sum()
        });
        if cols.len() == 1 {
            out.push(block[(0, 0)].arg());
        } else {
            phases_rec(&block, depth + 1, out)?;
        }
        start = end;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::evolve;

    fn op_rel_error(h: &HermitianMatrix, s: &Spectrum) -> f64 {
        let diff = s.reconstruct().matrix().sub(h.matrix()).unwrap();
        let scale = h.matrix().max_abs().max(1e-300);
        HermitianMatrix::new(diff).matrix().operator_norm().unwrap() / scale
    }

    #[test]
    fn zero_matrix() {
        let h = HermitianMatrix::zeros(4);
        let s = eig_hermitian(&h).unwrap();
        assert!(s.eigenvalues().iter().all(|&x| x == 0.0));
        assert!(s.reconstruct().matrix().max_abs() < 1e-15);
    }

    #[test]
    fn diagonal_matrix_gives_permuted_identity() {
        let h = HermitianMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]);
        let s = eig_hermitian(&h).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 2.0, 3.0]);
        let v = s.eigenvectors().matrix();
        let expected = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((v[(i, j)] - C64::new(expected[i][j], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn dense_reconstruction_and_group_law() {
        let h = HermitianMatrix::new(ComplexMatrix::from_fn(6, |i, j| {
            C64::new(
                ((i * 7 + j * 3) % 5) as f64 - 2.0,
                (i as f64 - j as f64) * 0.3,
            )
        }));
        let s = eig_hermitian(&h).unwrap();
        assert!(op_rel_error(&h, &s) < 1e-12);
        assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        let a = evolve(&s, 0.7);
        let b = evolve(&s, -1.9);
        let ab = a.mul(&b).unwrap();
        let direct = evolve(&s, 0.7 - 1.9);
        assert!(ab.matrix().sub(direct.matrix()).unwrap().max_abs() < 1e-12);
        assert!(a.matrix().unitarity_defect() < 1e-12);
        let vals = eigvals_hermitian(&h).unwrap();
        for (x, y) in vals.iter().zip(s.eigenvalues()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvector_leading_component_real_positive() {
        let h = HermitianMatrix::new(ComplexMatrix::from_fn(5, |i, j| {
            C64::new((i + j) as f64 * 0.1, (i as f64) * 0.2 - (j as f64) * 0.2)
        }));
        let s = eig_hermitian(&h).unwrap();
        let v = s.eigenvectors().matrix();
        for c in 0..5 {
            let lead = (0..5)
                .map(|r| v[(r, c)])
                .find(|z| z.norm() > 1e-10)
                .unwrap();
            assert!(lead.im.abs() < 1e-14 && lead.re > 0.0);
        }
    }

    #[test]
    fn nan_input_is_rejected() {
        let mut m = ComplexMatrix::identity(3);
        m[(1, 1)] = C64::new(f64::NAN, 0.0);
        let h = HermitianMatrix::new(m);
        assert_eq!(eig_hermitian(&h).unwrap_err(), Error::NonFinite);
    }

    #[test]
    fn eigenphases_of_diagonal_unitaries() {
        let phases = [0.1, -2.0, 3.0, 0.1, -0.1];
        let u = UnitaryMatrix::diagonal_phases(&phases);
        let mut got = unitary_eigenphases(&u).unwrap();
        got.sort_by(f64::total_cmp);
        let mut want = phases.to_vec();
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn eigenphases_mirror_pair_about_pencil_angle() {
        // Phases symmetric about the first pencil angle collide in K.
        let phi = PENCIL_ANGLES[0];
        let u = UnitaryMatrix::diagonal_phases(&[phi + 0.4, phi - 0.4, 1.0]);
        let h = HermitianMatrix::new(ComplexMatrix::from_fn(3, |i, j| {
            C64::new((i + 2 * j) as f64 * 0.3, i as f64 - j as f64)
        }));
        let v = evolve(&eig_hermitian(&h).unwrap(), 1.0);
        let w = v.conjugate(&u).unwrap();
        let mut got = unitary_eigenphases(&w).unwrap();
        got.sort_by(f64::total_cmp);
        let mut want = vec![phi + 0.4, phi - 0.4, 1.0];
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9, "{got:?} vs {want:?}");
        }
    }
}
