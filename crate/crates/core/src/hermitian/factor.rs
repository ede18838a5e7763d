use super::{re, ComplexMatrix, HermitianMatrix, C64};

/// Lower-triangular `L` with `M = L L^†`, or `None` when `M` is not positive definite.
pub fn cholesky(m: &HermitianMatrix) -> Option<ComplexMatrix> {
    let n = m.dim();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = m[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let ljj = diag.sqrt();
        l[(j, j)] = re(ljj);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// `log det M` for positive definite `M`.
pub fn logdet_pd(m: &HermitianMatrix) -> Option<f64> {
    let l = cholesky(m)?;
    Some((0..m.dim()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// Inverse of a positive definite matrix via its Cholesky factor.
pub fn inverse_pd(m: &HermitianMatrix) -> Option<HermitianMatrix> {
    let n = m.dim();
    let l = cholesky(m)?;
    // Solve L Y = I, then M^{-1} = Y^† Y.
    let mut y = ComplexMatrix::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let mut s: C64 = if i == col { re(1.0) } else { re(0.0) };
            for k in col..i {
                s -= l[(i, k)] * y[(k, col)];
            }
            y[(i, col)] = s / l[(i, i)];
        }
    }
    Some(y.adjoint().matmul(&y).hermitian_part())
}

/// Solves `A x = b` for a real symmetric positive definite `A` (row-major, `n x n`).
/// Falls back to a small diagonal shift when `A` is numerically semidefinite.
pub fn solve_spd(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max).max(1e-300);
    for shift in [0.0, 1e-14, 1e-12, 1e-10] {
        if let Some(l) = real_cholesky(a, n, shift * scale) {
            let mut y = vec![0.0; n];
            for i in 0..n {
                let mut s = b[i];
                for k in 0..i {
                    s -= l[i * n + k] * y[k];
                }
                y[i] = s / l[i * n + i];
            }
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                let mut s = y[i];
                for k in i + 1..n {
                    s -= l[k * n + i] * x[k];
                }
                x[i] = s / l[i * n + i];
            }
            return Some(x);
        }
    }
    None
}

fn real_cholesky(a: &[f64], n: usize, shift: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut diag = a[j * n + j] + shift;
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if !(diag > 0.0) {
            return None;
        }
        let ljj = diag.sqrt();
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::c64;

    #[test]
    fn cholesky_inverse_logdet() {
        let m = HermitianMatrix::new(
            ComplexMatrix::from_vec(
                2,
                2,
                vec![re(2.0), c64(0.5, 0.5), c64(0.5, -0.5), re(3.0)],
            )
            .unwrap(),
        )
        .unwrap();
        let l = cholesky(&m).unwrap();
        assert!(l.matmul(&l.adjoint()).max_abs_diff(&m) < 1e-14);
        let inv = inverse_pd(&m).unwrap();
        assert!(inv.matmul(&m).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
        let det = 2.0 * 3.0 - 0.5;
        assert!((logdet_pd(&m).unwrap() - f64::ln(det)).abs() < 1e-14);
        assert!(cholesky(&HermitianMatrix::from_real_diag(&[1.0, 0.0])).is_none());
    }

    #[test]
    fn spd_solve() {
        let a = [4.0, 1.0, 1.0, 3.0];
        let x = solve_spd(&a, &[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
    }
}
