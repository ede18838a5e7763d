//! Phase-1 simplex on a dense tableau with Bland's anti-cycling rule.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-11;
/// Tableau entries below this are rounding residue and are set to zero.
const ZERO_TOL: f64 = 1e-12;
/// Relative tolerance for ties in the ratio test.
const TIE_TOL: f64 = 1e-12;
/// Rows whose remainder after projection is below this fraction of their norm are dependent.
const DEPENDENT_TOL: f64 = 1e-9;
/// Right-hand-side remainder of a dependent row above which the system is inconsistent.
const INCONSISTENT_TOL: f64 = 1e-8;

/// Replaces `A x = b` by an equivalent system with orthonormal rows.
///
/// Dependent rows are dropped; the largest right-hand-side remainder among them is
/// returned as the inconsistency.
fn orthonormalize_rows(a: &[Vec<f64>], b: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut inconsistency: f64 = 0.0;
    for (row, &beta) in a.iter().zip(b) {
        let norm0 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut r = row.clone();
        let mut c = beta;
        for _ in 0..2 {
            for (q, &cq) in rows.iter().zip(&rhs) {
                let proj: f64 = r.iter().zip(q).map(|(x, y)| x * y).sum();
                for (x, y) in r.iter_mut().zip(q) {
                    *x -= proj * y;
                }
                c -= proj * cq;
            }
        }
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > DEPENDENT_TOL * norm0.max(1.0) {
            r.iter_mut().for_each(|x| *x /= norm);
            rows.push(r);
            rhs.push(c / norm);
        } else {
            inconsistency = inconsistency.max(c.abs());
        }
    }
    (rows, rhs, inconsistency)
}

#[derive(Clone, Debug)]
pub struct PhaseOne {
    /// A basic solution of the original variables.
    pub x: Vec<f64>,
    /// Sum of artificial variables at the optimum; zero iff feasible.
    pub objective: f64,
    pub iterations: usize,
}

/// Minimizes the total artificial slack for `A x = b, x >= 0`.
///
/// `a` has one row per constraint. Rows with negative right-hand side are negated first
/// so that the artificial basis is feasible.
pub fn phase_one(a: &[Vec<f64>], b: &[f64], max_iter: usize) -> Result<PhaseOne> {
    assert_eq!(b.len(), a.len());
    let n = a.first().map_or(0, |r| r.len());
    let (a, b, inconsistency) = orthonormalize_rows(a, b);
    if inconsistency > INCONSISTENT_TOL {
        return Ok(PhaseOne {
            x: vec![0.0; n],
            objective: inconsistency,
            iterations: 0,
        });
    }
    let m = a.len();
    let width = n + m + 1;
    let rhs = width - 1;

    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut t[i * width..(i + 1) * width];
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = 1.0;
        row[rhs] = sign * b[i];
    }
    // Objective row holds reduced costs of `min Σ artificials`: minus the column sums.
    for j in 0..width {
        if (n..n + m).contains(&j) {
            continue;
        }
        let s: f64 = (0..m).map(|i| t[i * width + j]).sum();
        t[m * width + j] = -s;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut iterations = 0;
    loop {
        let obj = &t[m * width..(m + 1) * width];
        let Some(enter) = (0..n + m).find(|&j| obj[j] < -COST_TOL) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let p = t[i * width + enter];
            if p > PIVOT_TOL {
                let ratio = t[i * width + rhs] / p;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        let tie = TIE_TOL * (1.0 + best.abs());
                        if ratio < best - tie || (ratio <= best + tie && basis[i] < basis[k]) {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
        }
        // The phase-1 objective is bounded below, so an improving column always has a pivot.
        let Some((row, _)) = leave else {
            break;
        };
        pivot(&mut t, width, m, row, enter);
        basis[row] = enter;
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::SolverStall(format!(
                "simplex exceeded {max_iter} pivots"
            )));
        }
    }

    let mut x = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i * width + rhs];
        }
    }
    Ok(PhaseOne {
        x,
        objective: -t[m * width + rhs],
        iterations,
    })
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    for i in 0..=m {
        if i == row {
            continue;
        }
        let f = t[i * width + col];
        if f == 0.0 {
            continue;
        }
        let r = &mut t[i * width..(i + 1) * width];
        for (v, pv) in r.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
            if v.abs() < ZERO_TOL {
                *v = 0.0;
            }
        }
        r[col] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_system() {
        // x + y = 1, x - y = 0.5
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let r = phase_one(&a, &[1.0, 0.5], 100).unwrap();
        assert!(r.objective.abs() < 1e-12);
        assert!((r.x[0] - 0.75).abs() < 1e-12 && (r.x[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn infeasible_system() {
        // x + y = 1, x + y = 2
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let r = phase_one(&a, &[1.0, 2.0], 100).unwrap();
        assert!((r.objective - 1.0).abs() < 1e-12);
        // x = -1 needs a negative variable
        let r = phase_one(&[vec![1.0]], &[-1.0], 100).unwrap();
        assert!(r.objective > 0.5);
    }

    #[test]
    fn redundant_rows() {
        let a = vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 1.0, 1.0]];
        let r = phase_one(&a, &[1.0, 2.0, 1.0], 100).unwrap();
        assert!(r.objective.abs() < 1e-12);
        assert!((r.x[0] + r.x[1] - 1.0).abs() < 1e-12);
        assert!((r.x[1] + r.x[2] - 1.0).abs() < 1e-12);
    }
}
