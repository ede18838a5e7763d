//! The height function `h(X) = min { tr H : H ⪰ X_i for all i }` and its dual
//! `max { Σ_i tr(X_i Y_i) : Y a measurement }`.

pub mod barrier;

use barrier::{BarrierOptions, LmiBlock, LmiProblem, Outcome};

use crate::error::{Error, Result};
use crate::hermitian::{hermitian_basis, HermitianMatrix, TOL_PSD};

/// Relative certified gap at which the interior-point method stops.
pub const TOL_GAP: f64 = 1e-9;
/// Newton-step budget of the interior-point method.
pub const MAX_NEWTON: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    MaxIter,
}

#[derive(Clone, Debug)]
pub struct HeightResult {
    /// Primal value `tr H_opt`, an upper bound on `h`.
    pub value: f64,
    pub h_opt: HermitianMatrix,
    /// Dual measurement; `Σ_i tr(X_i Y_i)` is a lower bound on `h`.
    pub dual_y: Vec<HermitianMatrix>,
    pub dual_value: f64,
    /// `value - dual_value`.
    pub gap: f64,
    pub status: SolverStatus,
    pub iterations: usize,
}

fn check_dims(xs: &[HermitianMatrix]) -> Result<usize> {
    let d = xs.first().ok_or(Error::Empty)?.dim();
    for x in xs {
        if x.dim() != d {
            return Err(Error::DimensionMismatch(x.dim(), d));
        }
    }
    Ok(d)
}

fn dual_objective(xs: &[HermitianMatrix], ys: &[HermitianMatrix]) -> f64 {
    xs.iter().zip(ys).map(|(x, y)| x.trace_product(y)).sum()
}

/// `(tr X1 + tr X2 + ||X1 - X2||_1) / 2`.
pub fn height_two(x1: &HermitianMatrix, x2: &HermitianMatrix) -> Result<f64> {
    check_dims(&[x1.clone(), x2.clone()])?;
    Ok(0.5 * (x1.trace_re() + x2.trace_re() + (x1 - x2).trace_norm()?))
}

/// Closed-form optimum for two matrices: `H = (X1 + X2 + |X1 - X2|)/2` with dual
/// `Y1 = P_+`, `Y2 = I - P_+`, where `P_+` projects onto the positive part of `X1 - X2`.
pub fn height_two_certificate(x1: &HermitianMatrix, x2: &HermitianMatrix) -> Result<HeightResult> {
    let d = check_dims(&[x1.clone(), x2.clone()])?;
    let delta = x1 - x2;
    let eig = delta.eig()?;
    let abs = eig.reconstruct_with(f64::abs);
    let p_plus = eig.reconstruct_with(|l| if l > 0.0 { 1.0 } else { 0.0 });
    let h = (&(x1 + x2) + &abs).scale(0.5);
    let ys = vec![p_plus.clone(), &HermitianMatrix::identity(d) - &p_plus];
    let xs = [x1.clone(), x2.clone()];
    let dual_value = dual_objective(&xs, &ys);
    let value = h.trace_re();
    Ok(HeightResult {
        value,
        h_opt: h,
        dual_y: ys,
        dual_value,
        gap: value - dual_value,
        status: SolverStatus::Optimal,
        iterations: 0,
    })
}

/// Solves the dominance SDP with the interior-point method.
///
/// `H` is parametrized by its real Hermitian coordinates; the slack blocks are
/// `S_i = H - X_i`. At each centered point the barrier duals `S_i⁻¹/t` are normalized to
/// a measurement `Y_i = Z^{-1/2} (S_i⁻¹/t) Z^{-1/2}`, `Z = Σ_i S_i⁻¹/t`, which certifies
/// the gap `tr H - Σ_i tr(X_i Y_i)`.
pub fn height_sdp(xs: &[HermitianMatrix]) -> Result<HeightResult> {
    height_sdp_with(xs, TOL_GAP, MAX_NEWTON)
}

pub fn height_sdp_with(xs: &[HermitianMatrix], tol_gap: f64, max_newton: usize) -> Result<HeightResult> {
    let d = check_dims(xs)?;
    let basis = hermitian_basis(d);
    let c: Vec<f64> = (0..basis.len()).map(|j| if j < d { 1.0 } else { 0.0 }).collect();
    let blocks = xs
        .iter()
        .map(|x| LmiBlock {
            constant: -x,
            terms: basis.iter().cloned().enumerate().collect(),
        })
        .collect();
    let problem = LmiProblem { c, blocks };

    let mut top = f64::NEG_INFINITY;
    for x in xs {
        top = top.max(x.max_eigenvalue()?);
    }
    let mean_trace = xs.iter().map(|x| x.trace_re()).sum::<f64>() / d as f64;
    let alpha = mean_trace.abs() + top.abs() + 1.0;
    let mut x0 = vec![0.0; basis.len()];
    for v in x0.iter_mut().take(d) {
        *v = alpha;
    }
    let t0 = (xs.len() * d) as f64 / (d as f64 * alpha);

    let mut best: Option<HeightResult> = None;
    let (_, outcome) = problem.solve(
        x0,
        t0,
        BarrierOptions {
            max_newton,
            ..BarrierOptions::default()
        },
        |it| {
            let hm = &it.slacks[0] + &xs[0];
            let Ok(ys) = normalize_duals(&it.duals) else {
                return false;
            };
            let value = hm.trace_re();
            let dual_value = dual_objective(xs, &ys);
            let cand = HeightResult {
                value,
                h_opt: hm,
                dual_y: ys,
                dual_value,
                gap: value - dual_value,
                status: SolverStatus::Optimal,
                iterations: it.newton_steps,
            };
            let done = cand.gap <= tol_gap * (1.0 + value.abs());
            if best.as_ref().is_none_or(|b| cand.gap < b.gap) {
                best = Some(cand);
            }
            done
        },
    )?;
    let mut res = best.ok_or_else(|| Error::SolverStall("no centered point reached".into()))?;
    if outcome == Outcome::MaxIter && res.gap > tol_gap * (1.0 + res.value.abs()) {
        res.status = SolverStatus::MaxIter;
    }
    Ok(res)
}

fn normalize_duals(ys: &[HermitianMatrix]) -> Result<Vec<HermitianMatrix>> {
    let z: HermitianMatrix = ys.iter().cloned().sum();
    let w = z.pinv_sqrt()?;
    Ok(ys.iter().map(|y| y.conjugate_by(&w)).collect())
}

/// `h` by the closed form for two matrices and the interior-point method otherwise.
pub fn height(xs: &[HermitianMatrix]) -> Result<HeightResult> {
    match xs {
        [x1, x2] => height_two_certificate(x1, x2),
        _ => height_sdp(xs),
    }
}

/// Pretty-good-measurement dual point `Y_i = S^{-1/2} X_i S^{-1/2}`, `S = Σ X_i`.
#[derive(Clone, Debug)]
pub struct PgmBound {
    pub value: f64,
    /// One element per input, then `I - supp(S)` as a completing outcome.
    pub y: Vec<HermitianMatrix>,
}

pub fn pgm_lower_bound(xs: &[HermitianMatrix]) -> Result<PgmBound> {
    let d = check_dims(xs)?;
    for x in xs {
        let min = x.min_eigenvalue()?;
        if min < -TOL_PSD {
            return Err(Error::NotPsd(min));
        }
    }
    let s: HermitianMatrix = xs.iter().cloned().sum();
    let w = s.pinv_sqrt()?;
    let mut y: Vec<HermitianMatrix> = xs.iter().map(|x| x.conjugate_by(&w)).collect();
    let value = dual_objective(xs, &y);
    y.push(&HermitianMatrix::identity(d) - &s.support_projector()?);
    Ok(PgmBound { value, y })
}
