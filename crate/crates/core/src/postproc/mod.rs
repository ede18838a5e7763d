//! The post-processing preorder `A ⪯ B`: `A_x = Σ_y μ_xy B_y` for a column-stochastic
//! `μ`, decided by a phase-1 linear program.

mod simplex;

pub use simplex::{phase_one, PhaseOne};

use crate::error::{Error, Result};
use crate::hermitian::{hermitian_coordinates, HermitianMatrix};
use crate::povm::Povm;

/// Accept the LP when the phase-1 objective is at most this.
pub const TOL_LP: f64 = 1e-8;
/// Accept a witness when it reproduces `A` to this max-entry residual.
pub const TOL_RESIDUAL: f64 = 1e-7;

const MAX_PIVOTS: usize = 100_000;

/// Column-stochastic matrix with `rows = |Ω_A|`, `cols = |Ω_B|`.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    entries: Vec<Vec<f64>>,
}

impl StochasticMatrix {
    /// Checks nonnegativity (entries above `-1e-10` are clamped) and unit column sums.
    pub fn new(mut entries: Vec<Vec<f64>>) -> Result<Self> {
        let cols = entries.first().map_or(0, |r| r.len());
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::BadParameter("ragged stochastic matrix".into()));
        }
        for v in entries.iter_mut().flatten() {
            if *v < -1e-10 || !v.is_finite() {
                return Err(Error::BadParameter(format!("negative entry {v}")));
            }
            *v = v.max(0.0);
        }
        for y in 0..cols {
            let s: f64 = entries.iter().map(|r| r[y]).sum();
            if (s - 1.0).abs() > 1e-8 {
                return Err(Error::BadParameter(format!("column {y} sums to {s}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, |r| r.len())
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    /// Effects `Σ_y μ_xy B_y`, one per row.
    pub fn apply(&self, b: &Povm) -> Result<Vec<HermitianMatrix>> {
        if self.cols() != b.len() {
            return Err(Error::DimensionMismatch(self.cols(), b.len()));
        }
        Ok(self
            .entries
            .iter()
            .map(|row| {
                let mut acc = HermitianMatrix::zeros(b.dim());
                for (w, e) in row.iter().zip(b.effects()) {
                    if *w != 0.0 {
                        acc += &e.scale(*w);
                    }
                }
                acc
            })
            .collect())
    }

    /// Largest entry of `|A_x - Σ_y μ_xy B_y|`.
    pub fn residual(&self, a: &Povm, b: &Povm) -> Result<f64> {
        if self.rows() != a.len() {
            return Err(Error::DimensionMismatch(self.rows(), a.len()));
        }
        let rebuilt = self.apply(b)?;
        Ok(rebuilt
            .iter()
            .zip(a.effects())
            .map(|(r, e)| r.max_abs_diff(e))
            .fold(0.0, f64::max))
    }

    /// `self ∘ other`: if `A = self ∘ B` and `B = other ∘ C` then `A = (self·other) ∘ C`.
    pub fn compose(&self, other: &StochasticMatrix) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch(self.cols(), other.rows()));
        }
        let entries = self
            .entries
            .iter()
            .map(|row| {
                (0..other.cols())
                    .map(|z| row.iter().zip(&other.entries).map(|(a, r)| a * r[z]).sum())
                    .collect()
            })
            .collect();
        Self::new(entries)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OrderVerdict {
    /// `A ⪯ B`, witness `A = μ ∘ B`.
    LessEq(StochasticMatrix),
    /// `B ⪯ A`, witness `B = μ ∘ A`.
    GreaterEq(StochasticMatrix),
    Equivalent {
        forward: StochasticMatrix,
        backward: StochasticMatrix,
    },
    Incomparable,
}

impl OrderVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            Self::LessEq(_) => "less_eq",
            Self::GreaterEq(_) => "greater_eq",
            Self::Equivalent { .. } => "equivalent",
            Self::Incomparable => "incomparable",
        }
    }
}

/// Searches for `μ` with `A = μ ∘ B`.
///
/// Variables are the entries `μ_xy`; constraints are the column sums and the `d²` real
/// Hermitian coordinates of every `A_x`.
pub fn check_postprocessing(a: &Povm, b: &Povm) -> Result<Option<StochasticMatrix>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let (na, nb) = (a.len(), b.len());
    let var = |x: usize, y: usize| x * nb + y;
    let coords_b: Vec<Vec<f64>> = b.effects().iter().map(|e| hermitian_coordinates(e)).collect();
    let dd = coords_b[0].len();

    let mut rows = Vec::with_capacity(nb + na * dd);
    let mut rhs = Vec::with_capacity(nb + na * dd);
    for y in 0..nb {
        let mut r = vec![0.0; na * nb];
        for x in 0..na {
            r[var(x, y)] = 1.0;
        }
        rows.push(r);
        rhs.push(1.0);
    }
    for (x, ax) in a.effects().iter().enumerate() {
        let target = hermitian_coordinates(ax);
        for c in 0..dd {
            let mut r = vec![0.0; na * nb];
            for y in 0..nb {
                r[var(x, y)] = coords_b[y][c];
            }
            rows.push(r);
            rhs.push(target[c]);
        }
    }

    let sol = phase_one(&rows, &rhs, MAX_PIVOTS)?;
    if sol.objective > TOL_LP {
        return Ok(None);
    }
    let mut entries: Vec<Vec<f64>> = (0..na)
        .map(|x| (0..nb).map(|y| sol.x[var(x, y)].max(0.0)).collect())
        .collect();
    // Basic solutions carry rounding only; restore exact column sums.
    for y in 0..nb {
        let s: f64 = entries.iter().map(|r| r[y]).sum();
        if s > 0.0 {
            for r in entries.iter_mut() {
                r[y] /= s;
            }
        }
    }
    let Ok(mu) = StochasticMatrix::new(entries) else {
        return Ok(None);
    };
    if mu.residual(a, b)? > TOL_RESIDUAL {
        return Ok(None);
    }
    Ok(Some(mu))
}

pub fn classify_order(a: &Povm, b: &Povm) -> Result<OrderVerdict> {
    let fwd = check_postprocessing(a, b)?;
    let bwd = check_postprocessing(b, a)?;
    Ok(match (fwd, bwd) {
        (Some(forward), Some(backward)) => OrderVerdict::Equivalent { forward, backward },
        (Some(mu), None) => OrderVerdict::LessEq(mu),
        (None, Some(mu)) => OrderVerdict::GreaterEq(mu),
        (None, None) => OrderVerdict::Incomparable,
    })
}

/// Representative of `λ[A] + (1-λ)[B]`: the disjoint union `λA ⊔ (1-λ)B`.
///
/// Labels are `0..|A|` followed by `|A|..|A|+|B|`.
pub fn concat_mix(a: &Povm, b: &Povm, lambda: f64) -> Result<Povm> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::BadParameter(format!("λ = {lambda} outside [0,1]")));
    }
    if lambda == 1.0 {
        return Ok(a.clone());
    }
    if lambda == 0.0 {
        return Ok(b.clone());
    }
    let effects = a
        .effects()
        .iter()
        .map(|e| e.scale(lambda))
        .chain(b.effects().iter().map(|e| e.scale(1.0 - lambda)))
        .collect();
    Povm::new(effects)
}
