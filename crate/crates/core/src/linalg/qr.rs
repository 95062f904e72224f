use super::{ComplexMatrix, UnitaryMatrix, ONE, ZERO};
use crate::prelude::*;

/// Householder QR of a square matrix, returning `Q Lambda` where
/// `Lambda = diag(R_kk / |R_kk|)`. The corrected factor is the unique `Q`
/// whose `R` has a positive real diagonal, which is what makes QR of a
/// Ginibre matrix exactly Haar distributed.
pub fn qr_phase_fixed(a: &ComplexMatrix) -> UnitaryMatrix {
    let n = a.dim();
    let mut r: Vec<C64> = a.as_slice().to_vec();
    let mut q: Vec<C64> = ComplexMatrix::identity(n).as_slice().to_vec();
    let mut v = vec![ZERO; n];
    let mut r_diag_phase = vec![ONE; n];

    for k in 0..n {
        let m = n - k;
        let mut xnorm2 = 0.0;
        for i in 0..m {
            xnorm2 += r[(k + i) * n + k].norm_sqr();
        }
        if xnorm2 == 0.0 {
            continue;
        }
        let xnorm = xnorm2.sqrt();
        let x0 = r[k * n + k];
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        for i in 0..m {
            v[i] = r[(k + i) * n + k];
        }
        v[0] -= alpha;
        let tau = 2.0 / v[..m].iter().map(|z| z.norm_sqr()).sum::<f64>();

        for j in k..n {
            let w: C64 = (0..m)
                .map(|i| v[i].conj() * r[(k + i) * n + j])
                .sum::<C64>()
                * tau;
            for i in 0..m {
                r[(k + i) * n + j] -= w * v[i];
            }
        }
        for row in 0..n {
            let qr = &mut q[row * n + k..row * n + n];
            let w: C64 = qr.iter().zip(&v[..m]).map(|(x, y)| x * y).sum::<C64>() * tau;
            for i in 0..m {
                qr[i] -= w * v[i].conj();
            }
        }
        r_diag_phase[k] = -phase;
    }

    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = q[i * n + j] * r_diag_phase[j];
        }
    }
    UnitaryMatrix::new_unchecked(out)
}
