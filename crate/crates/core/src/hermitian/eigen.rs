//! Hermitian eigensolver: Householder reduction to a Hermitian tridiagonal matrix, a
//! diagonal phase change making the off-diagonal real, then implicit QL iterations on
//! the real symmetric tridiagonal.

use super::{re, ComplexMatrix, HermitianMatrix, C64};
use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;

/// Spectral decomposition `M = V diag(values) V^†`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    /// `V diag(f(λ)) V^†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in fv.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += a * v[(j, k)].conj();
                }
            }
        }
        out.hermitian_part()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

struct Tridiagonal {
    diag: Vec<f64>,
    /// `off[i]` couples `i` and `i + 1`; last entry is zero.
    off: Vec<f64>,
    /// Unitary `Q D` with `M = (Q D) T (Q D)^†`, only when vectors were requested.
    transform: Option<ComplexMatrix>,
}

fn tridiagonalize(m: &HermitianMatrix, want_vectors: bool) -> Tridiagonal {
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    let mut q = want_vectors.then(|| ComplexMatrix::identity(n));

    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            re(1.0)
        };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v {
            *z /= vnorm;
        }
        // Trailing block update: A <- A - v w^† - w v^†, w = 2(p - (v^† p) v), p = A v.
        let m_len = v.len();
        let off = k + 1;
        let p: Vec<C64> = (0..m_len)
            .map(|i| (0..m_len).map(|j| a[(off + i, off + j)] * v[j]).sum())
            .collect();
        let r: C64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let w: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| (pi - r.re * vi) * 2.0).collect();
        for i in 0..m_len {
            for j in 0..m_len {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                a[(off + i, off + j)] -= upd;
            }
        }
        // Column k below the diagonal becomes (alpha, 0, ..., 0).
        a[(off, k)] = alpha;
        a[(k, off)] = alpha.conj();
        for i in off + 1..n {
            a[(i, k)] = re(0.0);
            a[(k, i)] = re(0.0);
        }
        if let Some(q) = q.as_mut() {
            // Q <- Q H on columns off.., H = I - 2 v v^†.
            for row in 0..n {
                let s: C64 = (0..m_len).map(|j| q[(row, off + j)] * v[j]).sum();
                for j in 0..m_len {
                    q[(row, off + j)] -= s * v[j].conj() * 2.0;
                }
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut off = vec![0.0; n];
    let mut phases = vec![re(1.0); n];
    for i in 0..n.saturating_sub(1) {
        let e = a[(i + 1, i)];
        let mag = e.norm();
        off[i] = mag;
        phases[i + 1] = if mag > 0.0 { phases[i] * (e / mag) } else { phases[i] };
    }
    let transform = q.map(|q| {
        ComplexMatrix::from_fn(n, n, |i, j| q[(i, j)] * phases[j])
    });
    Tridiagonal { diag, off, transform }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Implicit QL with Wilkinson-type shifts on a real symmetric tridiagonal matrix.
/// Rotations are accumulated into the columns of `z` when present.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut ComplexMatrix>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    // Global scale: neighbour-relative tests never deflate clusters of near-zero entries.
    let scale = d
        .iter()
        .zip(e.iter())
        .map(|(a, b)| a.abs() + b.abs())
        .fold(0.0, f64::max);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                if e[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + sign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..z.rows() {
                        let f = z[(k, i + 1)];
                        let zi = z[(k, i)];
                        z[(k, i + 1)] = zi * s + f * c;
                        z[(k, i)] = zi * c - f * s;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

pub(super) fn eig(m: &HermitianMatrix) -> Result<Eigen> {
    let n = m.dim();
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let Tridiagonal {
        mut diag,
        mut off,
        transform,
    } = tridiagonalize(m, true);
    let mut z = transform.expect("vectors requested");
    tql(&mut diag, &mut off, Some(&mut z))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let values = order.iter().map(|&k| diag[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| z[(i, order[j])]);
    Ok(Eigen { values, vectors })
}

pub(super) fn eigenvalues(m: &HermitianMatrix) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let Tridiagonal {
        mut diag, mut off, ..
    } = tridiagonalize(m, false);
    tql(&mut diag, &mut off, None)?;
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}
