//! Quadratic order morphisms `G(A) = Σ_x g(A_x)` with `g(E) = Φ(E)Φ(E)^* / τ(E)`.
//!
//! The generalized Fisher map uses `Φ(E) = |ρ^{1/2} E>` and `τ(E) = tr(ρE)`, so
//! `F_ρ(A) = Σ_x |ρ^{1/2} A_x><ρ^{1/2} A_x| / tr(ρ A_x)`. For `ρ = I/d` it equals the
//! plain map `F(A) = Σ_x |A_x><A_x| / tr(A_x)`.
//!
//! With column stacking, `|ρ^{1/2}> = (I ⊗ ρ^{1/2})|Ω>`. For real `ρ` this is the same
//! vector as `(ρ^{1/2} ⊗ I)|Ω>`; for complex `ρ` the two differ by complex conjugation
//! of `ρ`.

use crate::error::{Error, Result};
use crate::hermitian::{
    c64, max_entangled, partial_transpose, sym_projector, vectorize, ComplexMatrix,
    HermitianMatrix, C64,
};
use crate::povm::{validate_state, Povm};

/// Denominators at or below this are treated as zero.
pub const TOL_DENOMINATOR: f64 = 1e-12;
/// Minimal eigenvalue of `ρ` accepted by the Fisher kinds.
pub const TOL_RHO_MIN_EIG: f64 = 1e-10;
/// Dead-band for the sign pattern of `G(A) - G(B)`.
pub const TOL_SIGN: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum MorphismKind {
    /// `F_ρ`; stores `ρ` and `ρ^{1/2}`.
    Fisher {
        rho: HermitianMatrix,
        rho_sqrt: HermitianMatrix,
    },
    /// `F̄_ρ`: Fisher map of the centered effects `E - tr(ρE) I`.
    FisherTruncated {
        rho: HermitianMatrix,
        rho_sqrt: HermitianMatrix,
    },
    /// `E|ψ><ψ|E / <ψ|E|ψ>`.
    PsiMap(Vec<C64>),
    /// `diag(E)^2 / tr E`.
    DiagMap,
    /// `E^2 / tr E`.
    SquareMap,
    /// `tr E`; every measurement maps to `d`.
    TraceMap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MorphismSpec {
    kind: MorphismKind,
    dim: usize,
}

fn checked_state(rho: &HermitianMatrix) -> Result<HermitianMatrix> {
    validate_state(rho)?;
    let min = rho.min_eigenvalue()?;
    if min < TOL_RHO_MIN_EIG {
        return Err(Error::NotAState(format!(
            "state must be positive definite (min eigenvalue {min:.3e})"
        )));
    }
    rho.sqrt_psd()
}

impl MorphismSpec {
    pub fn fisher(rho: &HermitianMatrix) -> Result<Self> {
        let rho_sqrt = checked_state(rho)?;
        Ok(Self {
            dim: rho.dim(),
            kind: MorphismKind::Fisher {
                rho: rho.clone(),
                rho_sqrt,
            },
        })
    }

    /// The plain map `F`, i.e. `F_{I/d}`.
    pub fn fisher_plain(d: usize) -> Self {
        Self::fisher(&crate::povm::maximally_mixed(d)).expect("I/d is a valid state")
    }

    pub fn fisher_truncated(rho: &HermitianMatrix) -> Result<Self> {
        let rho_sqrt = checked_state(rho)?;
        Ok(Self {
            dim: rho.dim(),
            kind: MorphismKind::FisherTruncated {
                rho: rho.clone(),
                rho_sqrt,
            },
        })
    }

    pub fn psi_map(psi: Vec<C64>) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::BadParameter(format!("ψ has norm {norm}")));
        }
        Ok(Self {
            dim: psi.len(),
            kind: MorphismKind::PsiMap(psi),
        })
    }

    pub fn diag_map(d: usize) -> Self {
        Self {
            dim: d,
            kind: MorphismKind::DiagMap,
        }
    }

    pub fn square_map(d: usize) -> Self {
        Self {
            dim: d,
            kind: MorphismKind::SquareMap,
        }
    }

    pub fn trace_map(d: usize) -> Self {
        Self {
            dim: d,
            kind: MorphismKind::TraceMap,
        }
    }

    pub fn kind(&self) -> &MorphismKind {
        &self.kind
    }

    /// Hilbert-space dimension `d` of the measured system.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the image matrices.
    pub fn image_dim(&self) -> usize {
        match self.kind {
            MorphismKind::Fisher { .. } | MorphismKind::FisherTruncated { .. } => {
                self.dim * self.dim
            }
            MorphismKind::TraceMap => 1,
            _ => self.dim,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            MorphismKind::Fisher { .. } => "fisher",
            MorphismKind::FisherTruncated { .. } => "fisher_truncated",
            MorphismKind::PsiMap(_) => "psi",
            MorphismKind::DiagMap => "diag",
            MorphismKind::SquareMap => "square",
            MorphismKind::TraceMap => "trace",
        }
    }
}

/// Image `G(A)` of a measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct FisherMatrix {
    pub matrix: HermitianMatrix,
    pub spec: MorphismSpec,
    /// Number of outcomes of the source measurement.
    pub outcomes: usize,
    /// Effects skipped because their denominator vanished.
    pub skipped: usize,
}

impl FisherMatrix {
    pub fn trace(&self) -> f64 {
        self.matrix.trace_re()
    }
}

fn rho_weighted(rho_sqrt: &HermitianMatrix, e: &ComplexMatrix) -> Vec<C64> {
    vectorize(&rho_sqrt.matmul(e)).0
}

/// `g(E)` for one effect.
pub fn apply_effect(spec: &MorphismSpec, e: &HermitianMatrix) -> Result<HermitianMatrix> {
    if e.dim() != spec.dim {
        return Err(Error::DimensionMismatch(e.dim(), spec.dim));
    }
    let d = spec.dim;
    match &spec.kind {
        MorphismKind::Fisher { rho, rho_sqrt } => {
            let p = rho.trace_product(e);
            if p <= TOL_DENOMINATOR {
                return Err(Error::ZeroDenominator);
            }
            Ok(HermitianMatrix::outer(&rho_weighted(rho_sqrt, e)).scale(1.0 / p))
        }
        MorphismKind::FisherTruncated { rho, rho_sqrt } => {
            let p = rho.trace_product(e);
            if p <= TOL_DENOMINATOR {
                return Err(Error::ZeroDenominator);
            }
            let centered = e - &HermitianMatrix::identity(d).scale(p);
            Ok(HermitianMatrix::outer(&rho_weighted(rho_sqrt, &centered)).scale(1.0 / p))
        }
        MorphismKind::PsiMap(psi) => {
            let v = e.mul_vec(psi);
            let tau: f64 = psi.iter().zip(&v).map(|(a, b)| (a.conj() * b).re).sum();
            if tau <= TOL_DENOMINATOR {
                return Err(Error::ZeroDenominator);
            }
            Ok(HermitianMatrix::outer(&v).scale(1.0 / tau))
        }
        MorphismKind::DiagMap => {
            let tr = e.trace_re();
            if tr <= TOL_DENOMINATOR {
                return Err(Error::ZeroDenominator);
            }
            let diag: Vec<f64> = (0..d).map(|i| e[(i, i)].re.powi(2) / tr).collect();
            Ok(HermitianMatrix::from_real_diag(&diag))
        }
        MorphismKind::SquareMap => {
            let tr = e.trace_re();
            if tr <= TOL_DENOMINATOR {
                return Err(Error::ZeroDenominator);
            }
            Ok(e.matmul(e).hermitian_part().scale(1.0 / tr))
        }
        MorphismKind::TraceMap => {
            let tr = e.trace_re();
            if tr <= TOL_DENOMINATOR {
                return Err(Error::ZeroDenominator);
            }
            Ok(HermitianMatrix::from_real_diag(&[tr]))
        }
    }
}

/// `G(A) = Σ_x g(A_x)`, skipping effects with a vanishing denominator.
pub fn apply(spec: &MorphismSpec, a: &Povm) -> Result<FisherMatrix> {
    if a.dim() != spec.dim {
        return Err(Error::DimensionMismatch(a.dim(), spec.dim));
    }
    let mut acc = HermitianMatrix::zeros(spec.image_dim());
    let mut skipped = 0;
    for e in a.effects() {
        match apply_effect(spec, e) {
            Ok(g) => acc += &g,
            Err(Error::ZeroDenominator) => skipped += 1,
            Err(err) => return Err(err),
        }
    }
    Ok(FisherMatrix {
        matrix: acc,
        spec: spec.clone(),
        outcomes: a.len(),
        skipped,
    })
}

/// `F_ρ(A)`.
pub fn fisher(rho: &HermitianMatrix, a: &Povm) -> Result<FisherMatrix> {
    apply(&MorphismSpec::fisher(rho)?, a)
}

/// `F̄_ρ(A)`.
pub fn apply_truncated(rho: &HermitianMatrix, a: &Povm) -> Result<FisherMatrix> {
    apply(&MorphismSpec::fisher_truncated(rho)?, a)
}

/// `F_ρ` of the trivial measurement: `|ρ^{1/2}><ρ^{1/2}|`. It equals `F_ρ(A) - F̄_ρ(A)`
/// for every `A`.
pub fn trivial_image(rho: &HermitianMatrix) -> Result<HermitianMatrix> {
    Ok(fisher(rho, &Povm::trivial(rho.dim()))?.matrix)
}

/// `Σ_b J_b F_ρ(A) J_b^†`, where `J_b` are the `blocks` consecutive row blocks of `J`.
///
/// With `blocks = 1` this is `J F_ρ(A) J^†`. Otherwise it is the partial trace of
/// `J F_ρ(A) J^†` over the slow (block) index.
pub fn conjugate_relation(
    j: &ComplexMatrix,
    blocks: usize,
    a: &Povm,
    rho: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    let f = fisher(rho, a)?.matrix;
    if j.cols() != f.dim() {
        return Err(Error::DimensionMismatch(j.cols(), f.dim()));
    }
    if blocks == 0 || j.rows() % blocks != 0 {
        return Err(Error::BadParameter(format!(
            "{} rows do not split into {blocks} blocks",
            j.rows()
        )));
    }
    let k = j.rows() / blocks;
    let mut out = ComplexMatrix::zeros(k, k);
    for b in 0..blocks {
        let jb = j.row_block(b * k, k);
        out += &jb.matmul(&f).matmul(&jb.adjoint());
    }
    Ok(out.hermitian_part())
}

/// `J = Σ_i |ii><ii|` on `C^d ⊗ C^d`; with `d` blocks it reproduces the diagonal map.
pub fn diag_map_j(d: usize) -> ComplexMatrix {
    let mut j = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        j[(i * d + i, i * d + i)] = c64(1.0, 0.0);
    }
    j
}

/// `J = I_{d²}`; with `d` blocks it reproduces the square map.
pub fn square_map_j(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d * d)
}

/// Sign pattern of the spectrum of `G(A) - G(B)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignPattern {
    /// Indefinite: `A` and `B` are not ordered.
    BothSigns,
    OnlyNonneg,
    OnlyNonpos,
    Zero,
}

impl SignPattern {
    pub fn name(&self) -> &'static str {
        match self {
            Self::BothSigns => "both_signs",
            Self::OnlyNonneg => "only_nonneg",
            Self::OnlyNonpos => "only_nonpos",
            Self::Zero => "zero",
        }
    }
}

pub fn nonorder_witness(spec: &MorphismSpec, a: &Povm, b: &Povm) -> Result<SignPattern> {
    let diff = &apply(spec, a)?.matrix - &apply(spec, b)?.matrix;
    let vals = diff.eigenvalues()?;
    let pos = vals.iter().any(|&l| l > TOL_SIGN);
    let neg = vals.iter().any(|&l| l < -TOL_SIGN);
    Ok(match (pos, neg) {
        (true, true) => SignPattern::BothSigns,
        (true, false) => SignPattern::OnlyNonneg,
        (false, true) => SignPattern::OnlyNonpos,
        (false, false) => SignPattern::Zero,
    })
}

/// `F(P)` for a weighted rank-one measurement; for a 2-design it equals
/// [`two_design_target`].
pub fn two_design_image(p: &Povm) -> Result<HermitianMatrix> {
    Ok(apply(&MorphismSpec::fisher_plain(p.dim()), p)?.matrix)
}

/// `(2/(d+1)) P_sym^Γ`, which equals `(I + ω)/(d+1)`.
pub fn two_design_target(d: usize) -> HermitianMatrix {
    partial_transpose(&sym_projector(d))
        .expect("square dimension")
        .scale(2.0 / (d as f64 + 1.0))
}

/// `ω / d`, the plain-map image of the trivial measurement.
pub fn trivial_plain_image(d: usize) -> HermitianMatrix {
    max_entangled(d).scale(1.0 / d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::re;
    use crate::povm::{make_qubit_dichotomic, maximally_mixed, random_povm, random_state};

    #[test]
    fn fisher_of_identity_effect() {
        for d in 2..=4 {
            let spec = MorphismSpec::fisher(&maximally_mixed(d)).unwrap();
            let g = apply_effect(&spec, &HermitianMatrix::identity(d)).unwrap();
            assert!(g.max_abs_diff(&trivial_plain_image(d)) < 1e-14);
        }
    }

    #[test]
    fn fisher_of_projector_direct_arithmetic() {
        let spec = MorphismSpec::fisher(&maximally_mixed(2)).unwrap();
        let e = HermitianMatrix::from_real_diag(&[1.0, 0.0]);
        let g = apply_effect(&spec, &e).unwrap();
        // ρ^{1/2}E = E/√2, tr(ρE) = 1/2, so g = |E><E|, i.e. a single 1 at (0,0).
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 0)] = re(1.0);
        assert!(g.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn square_and_psi_maps_on_rank_one() {
        let p = random_povm(3, 1, 0).unwrap();
        let z = make_qubit_dichotomic(1.0, [0.0, 0.0, 1.0]).unwrap();
        let sq = apply(&MorphismSpec::square_map(2), &z).unwrap();
        assert!(sq.matrix.max_abs_diff(&HermitianMatrix::identity(2)) < 1e-14);
        let psi = vec![c64(0.6, 0.0), c64(0.0, 0.8)];
        let g = apply(&MorphismSpec::psi_map(psi).unwrap(), &z).unwrap();
        assert!(g.matrix.max_abs_diff(&HermitianMatrix::identity(2)) < 1e-14);
        let tr = apply(&MorphismSpec::trace_map(3), &p).unwrap();
        assert!((tr.trace() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_denominators_are_skipped() {
        let z = make_qubit_dichotomic(1.0, [0.0, 0.0, 1.0]).unwrap();
        let psi = vec![c64(1.0, 0.0), c64(0.0, 0.0)];
        let g = apply(&MorphismSpec::psi_map(psi).unwrap(), &z).unwrap();
        assert_eq!(g.skipped, 1);
        let spec = MorphismSpec::diag_map(2);
        assert_eq!(
            apply_effect(&spec, &HermitianMatrix::zeros(2)),
            Err(Error::ZeroDenominator)
        );
    }

    #[test]
    fn rejects_singular_states() {
        let pure = HermitianMatrix::from_real_diag(&[1.0, 0.0]);
        assert!(matches!(MorphismSpec::fisher(&pure), Err(Error::NotAState(_))));
    }

    #[test]
    fn truncated_difference_is_trivial_image() {
        for seed in 0..5 {
            let rho = random_state(3, seed);
            let a = random_povm(3, 4, seed + 50).unwrap();
            let diff = &fisher(&rho, &a).unwrap().matrix - &apply_truncated(&rho, &a).unwrap().matrix;
            assert!(diff.max_abs_diff(&trivial_image(&rho).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn homogeneity() {
        let rho = random_state(2, 3);
        let e = random_povm(2, 3, 4).unwrap().effects()[0].clone();
        let specs = [
            MorphismSpec::fisher(&rho).unwrap(),
            MorphismSpec::fisher_truncated(&rho).unwrap(),
            MorphismSpec::diag_map(2),
            MorphismSpec::square_map(2),
            MorphismSpec::trace_map(2),
            MorphismSpec::psi_map(vec![c64(0.6, 0.0), c64(0.0, 0.8)]).unwrap(),
        ];
        for spec in &specs {
            let g = apply_effect(spec, &e).unwrap();
            for lambda in [0.1, 0.5, 2.0, 10.0] {
                let gl = apply_effect(spec, &e.scale(lambda)).unwrap();
                assert!(gl.max_abs_diff(&g.scale(lambda)) < 1e-12 * lambda.max(1.0));
            }
        }
    }

    #[test]
    fn j_conjugation_matches_diag_and_square_maps() {
        let d = 3;
        let a = random_povm(d, 4, 17).unwrap();
        let rho = maximally_mixed(d);
        let diag = apply(&MorphismSpec::diag_map(d), &a).unwrap().matrix;
        let via_j = conjugate_relation(&diag_map_j(d), d, &a, &rho).unwrap();
        assert!(via_j.max_abs_diff(&diag) < 1e-12);
        let sq = apply(&MorphismSpec::square_map(d), &a).unwrap().matrix;
        let via_j = conjugate_relation(&square_map_j(d), d, &a, &rho).unwrap();
        assert!(via_j.max_abs_diff(&sq) < 1e-12);
        let f = fisher(&rho, &a).unwrap().matrix;
        let id = conjugate_relation(&ComplexMatrix::identity(d * d), 1, &a, &rho).unwrap();
        assert!(id.max_abs_diff(&f) < 1e-14);
    }

    #[test]
    fn two_design_target_closed_form() {
        for d in 2..=4 {
            let alt = (&HermitianMatrix::identity(d * d) + &max_entangled(d)).scale(1.0 / (d as f64 + 1.0));
            assert!(two_design_target(d).max_abs_diff(&alt) < 1e-14);
        }
    }
}
