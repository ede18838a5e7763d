//! Joint-measurability oracle: does a measurement `C` on outcome tuples exist whose
//! marginals are the given measurements?
//!
//! Solved as `maximize λ` subject to `C_k - λI ⪰ 0`, where `C` ranges over the affine
//! space of operator families with the required marginals. The measurements are jointly
//! measurable iff the optimum is nonnegative.

use crate::dominance::barrier::{BarrierOptions, LmiBlock, LmiProblem, Sparse};
use crate::error::{Error, Result};
use crate::hermitian::{hermitian_basis, re, HermitianMatrix};
use crate::povm::{pair_labels, Povm};

/// Optimal `λ` at or above `-TOL_JOINT` counts as jointly measurable.
pub const TOL_JOINT: f64 = 1e-7;
const MAX_NEWTON: usize = 600;

#[derive(Clone, Debug)]
pub enum JointVerdict {
    /// A joint measurement, one effect per outcome tuple in lexicographic order.
    Feasible(Povm),
    /// Certified upper bound on the optimal `λ`, below `-TOL_JOINT`.
    Infeasible { upper_bound: f64 },
}

#[derive(Clone, Debug)]
pub struct JointResult {
    pub verdict: JointVerdict,
    pub lambda: f64,
    pub gap: f64,
    pub newton_steps: usize,
}

impl JointResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self.verdict, JointVerdict::Feasible(_))
    }
}

/// Outcome tuples in lexicographic order, last index fastest.
fn tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |a| {
                    let mut t = t.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

/// Orthonormal basis of the kernel of the marginal map `R^K -> R^{Σ n_i}`.
fn marginal_kernel(tups: &[Vec<usize>], sizes: &[usize]) -> Vec<Vec<f64>> {
    let k = tups.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        for a in 0..n {
            rows.push(tups.iter().map(|t| if t[i] == a { 1.0 } else { 0.0 }).collect());
        }
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let push = |mut v: Vec<f64>, basis: &mut Vec<Vec<f64>>| -> bool {
        for _ in 0..2 {
            for b in basis.iter() {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= dot * y;
                }
            }
        }
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-10 {
            v.iter_mut().for_each(|x| *x /= nrm);
            basis.push(v);
            true
        } else {
            false
        }
    };
    for r in rows {
        push(r, &mut basis);
    }
    let rank = basis.len();
    for e in 0..k {
        let mut v = vec![0.0; k];
        v[e] = 1.0;
        push(v, &mut basis);
    }
    basis.split_off(rank)
}

/// Decides joint measurability of `ms` (all on the same space).
pub fn joint_feasibility_many(ms: &[Povm]) -> Result<JointResult> {
    let first = ms.first().ok_or(Error::Empty)?;
    let d = first.dim();
    for m in ms {
        if m.dim() != d {
            return Err(Error::DimensionMismatch(m.dim(), d));
        }
    }
    let sizes: Vec<usize> = ms.iter().map(|m| m.len()).collect();
    let tups = tuples(&sizes);
    let total: usize = sizes.iter().product();
    let g = ms.len();

    // Particular solution with the right marginals.
    let id = HermitianMatrix::identity(d);
    let particular: Vec<HermitianMatrix> = tups
        .iter()
        .map(|t| {
            let mut c = id.scale(-((g - 1) as f64) / total as f64);
            for (i, &a) in t.iter().enumerate() {
                let others = total / sizes[i];
                c += &ms[i].effects()[a].scale(1.0 / others as f64);
            }
            c
        })
        .collect();

    let kernel = marginal_kernel(&tups, &sizes);
    let basis = hermitian_basis(d);
    let nb = basis.len();
    let lambda_var = kernel.len() * nb;
    let mut c = vec![0.0; lambda_var + 1];
    c[lambda_var] = -1.0;
    let minus_id: Sparse = (0..d).map(|i| (i, i, re(-1.0))).collect();
    let blocks = particular
        .iter()
        .enumerate()
        .map(|(k, cp)| {
            let mut terms = Vec::new();
            for (z, kv) in kernel.iter().enumerate() {
                let w = kv[k];
                if w.abs() < 1e-14 {
                    continue;
                }
                for (j, b) in basis.iter().enumerate() {
                    terms.push((z * nb + j, b.iter().map(|&(r, s, v)| (r, s, v * w)).collect()));
                }
            }
            terms.push((lambda_var, minus_id.clone()));
            LmiBlock {
                constant: cp.clone(),
                terms,
            }
        })
        .collect();
    let problem = LmiProblem { c, blocks };

    let mut lambda0 = f64::INFINITY;
    for cp in &particular {
        lambda0 = lambda0.min(cp.min_eigenvalue()?);
    }
    let mut x0 = vec![0.0; lambda_var + 1];
    x0[lambda_var] = lambda0 - 1.0;

    let (it, _) = problem.solve(
        x0,
        1.0,
        BarrierOptions {
            max_newton: MAX_NEWTON,
            ..BarrierOptions::default()
        },
        |it| {
            let lambda = it.x[lambda_var];
            let gap = it.path_gap();
            lambda >= 0.0 || lambda + gap < -TOL_JOINT || gap < 1e-11
        },
    )?;
    let lambda = it.x[lambda_var];
    let gap = it.path_gap();
    // The iterate attains `λ`, so `λ >= -TOL_JOINT` is itself a certificate.
    let verdict = if lambda >= -TOL_JOINT {
        let effects: Vec<HermitianMatrix> = it
            .slacks
            .iter()
            .map(|s| {
                let c = s + &id.scale(lambda);
                if lambda >= 0.0 {
                    c
                } else {
                    c.map_spectrum(|l| l.max(0.0)).unwrap_or(c)
                }
            })
            .collect();
        let labels = tups
            .iter()
            .map(|t| {
                t.iter()
                    .enumerate()
                    .skip(1)
                    .fold(ms[0].labels()[t[0]], |acc, (i, &a)| {
                        pair_labels(acc, ms[i].labels()[a])
                    })
            })
            .collect();
        JointVerdict::Feasible(Povm::from_parts_unchecked(d, effects, labels))
    } else if lambda + gap < -TOL_JOINT {
        JointVerdict::Infeasible {
            upper_bound: lambda + gap,
        }
    } else {
        return Err(Error::SolverStall(format!(
            "joint measurability undecided: λ = {lambda:.3e}, gap = {gap:.3e}"
        )));
    };
    Ok(JointResult {
        verdict,
        lambda,
        gap,
        newton_steps: it.newton_steps,
    })
}

/// Joint measurement of `a` and `b`, or `None` when a dual certificate rules it out.
pub fn joint_feasibility(a: &Povm, b: &Povm) -> Result<Option<Povm>> {
    Ok(match joint_feasibility_many(&[a.clone(), b.clone()])?.verdict {
        JointVerdict::Feasible(p) => Some(p),
        JointVerdict::Infeasible { .. } => None,
    })
}

/// Largest marginal residual of a joint measurement over tuples of `ms`.
pub fn marginal_residual(joint: &Povm, ms: &[Povm]) -> f64 {
    let sizes: Vec<usize> = ms.iter().map(|m| m.len()).collect();
    let tups = tuples(&sizes);
    let mut worst: f64 = 0.0;
    for (i, m) in ms.iter().enumerate() {
        for (a, e) in m.effects().iter().enumerate() {
            let mut acc = HermitianMatrix::zeros(m.dim());
            for (t, c) in tups.iter().zip(joint.effects()) {
                if t[i] == a {
                    acc += c;
                }
            }
            worst = worst.max(acc.max_abs_diff(e));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::make_qubit_dichotomic;

    #[test]
    fn kernel_dimension() {
        let t = tuples(&[2, 2]);
        assert_eq!(marginal_kernel(&t, &[2, 2]).len(), 1);
        let t = tuples(&[2, 2, 2]);
        assert_eq!(marginal_kernel(&t, &[2, 2, 2]).len(), 4);
    }

    #[test]
    fn commuting_sharp_pair_is_jointly_measurable() {
        let z = make_qubit_dichotomic(1.0, [0.0, 0.0, 1.0]).unwrap();
        let joint = joint_feasibility(&z, &z).unwrap().expect("commuting");
        assert!(marginal_residual(&joint, &[z.clone(), z.clone()]) < 1e-9);
        for e in joint.effects() {
            assert!(e.min_eigenvalue().unwrap() > -1e-9);
        }
    }

    #[test]
    fn pauli_pair_quarter_circle() {
        let x = |e| make_qubit_dichotomic(e, [1.0, 0.0, 0.0]).unwrap();
        let z = |e| make_qubit_dichotomic(e, [0.0, 0.0, 1.0]).unwrap();
        let ok = joint_feasibility(&x(0.5), &z(0.5)).unwrap();
        assert!(marginal_residual(&ok.unwrap(), &[x(0.5), z(0.5)]) < 1e-9);
        assert!(joint_feasibility(&x(0.9), &z(0.9)).unwrap().is_none());
    }
}
