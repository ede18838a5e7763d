//! Incompatibility tests. A family `A^(1..g)` is certified incompatible when
//! `h(F_ρ(A^(1)), ..., F_ρ(A^(g))) > min(d, Π ℓ_i)`, with `ℓ_i` the outcome count of the
//! simple representative of `A^(i)`.

mod fermat;
mod joint;

pub use fermat::{fermat_point, ft_condition, ft_points, qubit_pair_compatible, FtAnalysis, FT_BOUND};
pub use joint::{
    joint_feasibility, joint_feasibility_many, marginal_residual, JointResult, JointVerdict,
    TOL_JOINT,
};

use crate::dominance::{height, height_sdp, height_two, pgm_lower_bound, HeightResult};
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::morphisms::{apply, MorphismSpec};
use crate::povm::{make_anticommuting_family, maximally_mixed, Povm};

/// Margins within this distance of zero are reported as inconclusive boundary cases.
pub const DEAD_BAND: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Incompatible,
    /// The criterion is silent; it never asserts compatibility.
    Inconclusive,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Incompatible => "incompatible",
            Self::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct IncompatVerdict {
    pub verdict: Verdict,
    /// `h - threshold` (or the PGM value minus the threshold).
    pub margin: f64,
    pub height: f64,
    pub threshold: f64,
    /// `|margin| <= DEAD_BAND`.
    pub boundary: bool,
    /// Simple-representative lengths `ℓ_i`.
    pub lengths: Vec<usize>,
    pub rho: HermitianMatrix,
    /// Present for the SDP criterion.
    pub certificate: Option<HeightResult>,
}

impl IncompatVerdict {
    pub fn is_incompatible(&self) -> bool {
        self.verdict == Verdict::Incompatible
    }
}

fn classify(value: f64, threshold: f64) -> (Verdict, f64, bool) {
    let margin = value - threshold;
    let boundary = margin.abs() <= DEAD_BAND;
    let verdict = if margin > DEAD_BAND {
        Verdict::Incompatible
    } else {
        Verdict::Inconclusive
    };
    (verdict, margin, boundary)
}

/// `F_ρ` images, simple lengths and the threshold `min(d, Π ℓ_i)`.
fn prepare(ms: &[Povm], rho: &HermitianMatrix) -> Result<(Vec<HermitianMatrix>, Vec<usize>, f64)> {
    let d = ms.first().ok_or(Error::Empty)?.dim();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch(rho.dim(), d));
    }
    let spec = MorphismSpec::fisher(rho)?;
    let mut images = Vec::with_capacity(ms.len());
    let mut lengths = Vec::with_capacity(ms.len());
    for m in ms {
        if m.dim() != d {
            return Err(Error::DimensionMismatch(m.dim(), d));
        }
        images.push(apply(&spec, m)?.matrix);
        lengths.push(m.simplify().length());
    }
    let product = lengths.iter().fold(1.0_f64, |acc, &l| acc * l as f64);
    Ok((images, lengths, product.min(d as f64)))
}

/// Height-function criterion: incompatible when `h(F_ρ(A)) > min(d, Π ℓ_i)`.
pub fn zhu_criterion(ms: &[Povm], rho: &HermitianMatrix) -> Result<IncompatVerdict> {
    let (images, lengths, threshold) = prepare(ms, rho)?;
    let cert = height(&images)?;
    let (verdict, margin, boundary) = classify(cert.value, threshold);
    Ok(IncompatVerdict {
        verdict,
        margin,
        height: cert.value,
        threshold,
        boundary,
        lengths,
        rho: rho.clone(),
        certificate: Some(cert),
    })
}

/// [`zhu_criterion`] without a certificate. Two measurements use the eigenvalue-only
/// closed form, which keeps large grid scans cheap.
pub fn zhu_criterion_value(ms: &[Povm], rho: &HermitianMatrix) -> Result<IncompatVerdict> {
    let (images, lengths, threshold) = prepare(ms, rho)?;
    let value = match images.as_slice() {
        [x1, x2] => height_two(x1, x2)?,
        _ => height_sdp(&images)?.value,
    };
    let (verdict, margin, boundary) = classify(value, threshold);
    Ok(IncompatVerdict {
        verdict,
        margin,
        height: value,
        threshold,
        boundary,
        lengths,
        rho: rho.clone(),
        certificate: None,
    })
}

/// [`zhu_criterion`] with `ρ = I/d`.
pub fn zhu_criterion_mixed(ms: &[Povm]) -> Result<IncompatVerdict> {
    let d = ms.first().ok_or(Error::Empty)?.dim();
    zhu_criterion(ms, &maximally_mixed(d))
}

/// Weaker criterion using the pretty-good-measurement lower bound on `h`.
pub fn pgm_criterion(ms: &[Povm], rho: &HermitianMatrix) -> Result<IncompatVerdict> {
    let (images, lengths, threshold) = prepare(ms, rho)?;
    let bound = pgm_lower_bound(&images)?;
    let (verdict, margin, boundary) = classify(bound.value, threshold);
    Ok(IncompatVerdict {
        verdict,
        margin,
        height: bound.value,
        threshold,
        boundary,
        lengths,
        rho: rho.clone(),
        certificate: None,
    })
}

/// Lower bound `h(F_ρ(A))` on the outcome count of any simple joint measurement.
pub fn joint_outcome_bound(ms: &[Povm], rho: &HermitianMatrix) -> Result<f64> {
    let (images, _, _) = prepare(ms, rho)?;
    Ok(height(&images)?.value)
}

/// Dimension `2^ceil((g-1)/2)` carrying `g` anticommuting unitaries.
pub fn anticommuting_dim(g: usize) -> usize {
    1 << g.saturating_sub(1).div_ceil(2).max(1)
}

#[derive(Clone, Debug)]
pub struct AnticommutingReport {
    pub dim: usize,
    /// `1 + Σ s_i²`.
    pub analytic_height: f64,
    /// `Σ s_i² > d - 1`.
    pub analytic_incompatible: bool,
    /// `g <= d - 1`: no noise vector can exceed the threshold.
    pub trivial: bool,
    /// SDP evaluation on the constructed family; skipped when trivial.
    pub sdp: Option<IncompatVerdict>,
    /// The SDP verdict and height agree with the analytic ones.
    pub agree: bool,
}

/// Criterion for `(I ± s_i T_i)/2` with pairwise anticommuting unitaries `T_i`.
pub fn anticommuting_criterion(g: usize, s: &[f64]) -> Result<AnticommutingReport> {
    if g < 2 || s.len() != g {
        return Err(Error::BadParameter(format!(
            "need g >= 2 noise values, got g = {g} with {} values",
            s.len()
        )));
    }
    if s.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::BadParameter("noise values must lie in [0,1]".into()));
    }
    let family = make_anticommuting_family(g)?;
    let d = family[0].dim();
    let sum_sq: f64 = s.iter().map(|v| v * v).sum();
    let analytic_height = 1.0 + sum_sq;
    let analytic_incompatible = sum_sq > (d - 1) as f64 + DEAD_BAND;
    let trivial = g + 1 <= d;
    let rho = maximally_mixed(d);
    let (sdp, agree) = if trivial {
        (None, !analytic_incompatible)
    } else {
        let noisy = family
            .iter()
            .zip(s)
            .map(|(p, &si)| p.noisy_mixture(si, &rho))
            .collect::<Result<Vec<_>>>()?;
        let v = zhu_criterion(&noisy, &rho)?;
        let agree = (v.height - analytic_height).abs() <= 1e-6
            && (v.is_incompatible() == analytic_incompatible || v.boundary);
        (Some(v), agree)
    };
    Ok(AnticommutingReport {
        dim: d,
        analytic_height,
        analytic_incompatible,
        trivial,
        sdp,
        agree,
    })
}
