//! Log-barrier interior-point method for linear matrix inequalities:
//!
//! `minimize c·x  subject to  S_k(x) = S0_k + Σ_j x_j A_kj ≻ 0`.
//!
//! Each centering step minimizes `t c·x - Σ_k log det S_k(x)` by damped Newton steps
//! with the exact Hessian `H_jl = Σ_k tr(S_k⁻¹ A_kj S_k⁻¹ A_kl)`.

use crate::error::{Error, Result};
use crate::hermitian::{cholesky, inverse_pd, solve_spd, ComplexMatrix, HermitianMatrix, C64};

/// Sparse Hermitian matrix as `(row, col, value)` triples.
pub type Sparse = Vec<(usize, usize, C64)>;

#[derive(Clone, Debug)]
pub struct LmiBlock {
    pub constant: HermitianMatrix,
    /// `(variable index, A_kj)` for every variable that enters this block.
    pub terms: Vec<(usize, Sparse)>,
}

#[derive(Clone, Debug)]
pub struct LmiProblem {
    pub c: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
}

#[derive(Clone, Copy, Debug)]
pub struct BarrierOptions {
    /// Factor by which `t` grows after each centering (inverse of the μ-reduction).
    pub growth: f64,
    pub max_newton: usize,
    /// Centering stops when half the squared Newton decrement drops below this.
    pub center_tol: f64,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            growth: 5.0,
            max_newton: 400,
            center_tol: 1e-10,
        }
    }
}

/// A centered point of the barrier path.
#[derive(Clone, Debug)]
pub struct Iterate {
    pub x: Vec<f64>,
    pub t: f64,
    pub slacks: Vec<HermitianMatrix>,
    /// `S_k⁻¹ / t`: approximately dual feasible.
    pub duals: Vec<HermitianMatrix>,
    pub newton_steps: usize,
}

impl Iterate {
    /// Total barrier dimension over `t`: the duality gap on the exact central path.
    pub fn path_gap(&self) -> f64 {
        self.slacks.iter().map(|s| s.dim()).sum::<usize>() as f64 / self.t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Stopped,
    MaxIter,
}

fn add_sparse(m: &mut ComplexMatrix, a: &Sparse, w: f64) {
    for &(r, c, v) in a {
        m[(r, c)] += v * w;
    }
}

impl LmiProblem {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn slacks(&self, x: &[f64]) -> Vec<HermitianMatrix> {
        self.blocks
            .iter()
            .map(|b| {
                let mut m = b.constant.as_matrix().clone();
                for (j, a) in &b.terms {
                    if x[*j] != 0.0 {
                        add_sparse(&mut m, a, x[*j]);
                    }
                }
                m.hermitian_part()
            })
            .collect()
    }

    fn logdets(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.slacks(x)
            .iter()
            .map(|s| {
                let l = cholesky(s)?;
                Some((0..s.dim()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
            })
            .collect()
    }

    fn dot_c(&self, v: &[f64]) -> f64 {
        self.c.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Gradient and Hessian of the barrier objective at `x`.
    fn derivatives(&self, x: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<HermitianMatrix>)> {
        let n = self.num_vars();
        let mut grad: Vec<f64> = self.c.iter().map(|c| t * c).collect();
        let mut hess = vec![0.0; n * n];
        let mut inverses = Vec::with_capacity(self.blocks.len());
        for (b, s) in self.blocks.iter().zip(self.slacks(x)) {
            let sinv = inverse_pd(&s)
                .ok_or_else(|| Error::SolverStall("slack left the PSD cone".into()))?;
            let d = s.dim();
            // P_j = S⁻¹ A_j S⁻¹ for every term in the block.
            let ps: Vec<ComplexMatrix> = b
                .terms
                .iter()
                .map(|(_, a)| {
                    let mut left = ComplexMatrix::zeros(d, d);
                    for &(r, c, v) in a {
                        for i in 0..d {
                            left[(i, c)] += sinv[(i, r)] * v;
                        }
                    }
                    let cols: Vec<usize> = {
                        let mut cs: Vec<usize> = a.iter().map(|e| e.1).collect();
                        cs.sort_unstable();
                        cs.dedup();
                        cs
                    };
                    let mut p = ComplexMatrix::zeros(d, d);
                    for &c in &cols {
                        for i in 0..d {
                            let l = left[(i, c)];
                            if l == C64::new(0.0, 0.0) {
                                continue;
                            }
                            for k in 0..d {
                                p[(i, k)] += l * sinv[(c, k)];
                            }
                        }
                    }
                    p
                })
                .collect();
            for (ti, (j, a)) in b.terms.iter().enumerate() {
                let g: f64 = a.iter().map(|&(r, c, v)| (sinv[(c, r)] * v).re).sum();
                grad[*j] -= g;
                for (l, al) in &b.terms {
                    let h: f64 = al.iter().map(|&(r, c, v)| (ps[ti][(c, r)] * v).re).sum();
                    hess[j * n + l] += h;
                }
            }
            inverses.push(sinv);
        }
        Ok((grad, hess, inverses))
    }

    /// Follows the central path from the strictly feasible `x0`, calling `stop` after
    /// each centering. Returns the last centered iterate.
    pub fn solve(
        &self,
        x0: Vec<f64>,
        t0: f64,
        opts: BarrierOptions,
        mut stop: impl FnMut(&Iterate) -> bool,
    ) -> Result<(Iterate, Outcome)> {
        let n = self.num_vars();
        let mut x = x0;
        let mut logdet = self
            .logdets(&x)
            .ok_or_else(|| Error::SolverStall("starting point is not strictly feasible".into()))?;
        let mut t = t0;
        let mut steps = 0;
        loop {
            let mut inverses;
            // Centering.
            loop {
                let (grad, hess, inv) = self.derivatives(&x, t)?;
                inverses = inv;
                let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
                let dx = solve_spd(&hess, &neg)
                    .ok_or_else(|| Error::SolverStall("singular Newton system".into()))?;
                let slope: f64 = grad.iter().zip(&dx).map(|(g, d)| g * d).sum();
                if -slope / 2.0 <= opts.center_tol {
                    break;
                }
                let base: f64 = logdet.iter().sum();
                let mut alpha = 1.0;
                let mut moved = false;
                while alpha > 1e-12 {
                    let trial: Vec<f64> = (0..n).map(|i| x[i] + alpha * dx[i]).collect();
                    if let Some(ld) = self.logdets(&trial) {
                        let change = t * alpha * self.dot_c(&dx) - (ld.iter().sum::<f64>() - base);
                        if change <= 0.25 * alpha * slope {
                            x = trial;
                            logdet = ld;
                            moved = true;
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                steps += 1;
                if !moved {
                    // Rounding floor reached: treat the point as centered.
                    break;
                }
                if steps >= opts.max_newton {
                    let it = self.iterate(&x, t, inverses, steps);
                    return Ok((it, Outcome::MaxIter));
                }
            }
            let it = self.iterate(&x, t, inverses, steps);
            if stop(&it) {
                return Ok((it, Outcome::Stopped));
            }
            if steps >= opts.max_newton {
                return Ok((it, Outcome::MaxIter));
            }
            t *= opts.growth;
        }
    }

    fn iterate(&self, x: &[f64], t: f64, inverses: Vec<HermitianMatrix>, steps: usize) -> Iterate {
        Iterate {
            x: x.to_vec(),
            t,
            slacks: self.slacks(x),
            duals: inverses.into_iter().map(|m| m.scale(1.0 / t)).collect(),
            newton_steps: steps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::re;

    #[test]
    fn scalar_lp() {
        // minimize x subject to x - 1 > 0 and 3 - x > 0.
        let block = |c: f64, s: f64| LmiBlock {
            constant: HermitianMatrix::from_real_diag(&[c]),
            terms: vec![(0, vec![(0, 0, re(s))])],
        };
        let p = LmiProblem {
            c: vec![1.0],
            blocks: vec![block(-1.0, 1.0), block(3.0, -1.0)],
        };
        let (it, out) = p
            .solve(vec![2.0], 1.0, BarrierOptions::default(), |it| it.path_gap() < 1e-9)
            .unwrap();
        assert_eq!(out, Outcome::Stopped);
        assert!((it.x[0] - 1.0).abs() < 1e-8);
    }
}
