//! Finite-outcome measurements: validation, simple representatives, noise models and
//! random generation.

mod constructors;
mod io;

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hermitian::{c64, tensor_herm, ComplexMatrix, HermitianMatrix, TOL_PSD};

pub use constructors::{
    anticommuting_generators, bloch_state, fourier_matrix, make_anticommuting_family,
    make_fourier_pair, make_mub_qubit_complete, make_planar, make_qubit_dichotomic,
    make_sic_qubit, make_trine, make_von_neumann, maximally_mixed, pauli, qutrit_triplet,
    trine_directions, QubitDichotomic,
};
pub use io::{matrix_from_json, matrix_to_json, PovmFile};

/// Tolerance on `||Σ A_x - I||_max`, multiplied by the dimension.
pub const TOL_SUM: f64 = 1e-9;

/// Tolerance for declaring two effects collinear.
pub const TOL_COLLINEAR: f64 = 1e-9;

/// A validated measurement: PSD effects summing to the identity, with distinct labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    effects: Vec<HermitianMatrix>,
    labels: Vec<i64>,
}

impl Povm {
    /// Validates effects, labelling them `0..n`.
    pub fn new(effects: Vec<HermitianMatrix>) -> Result<Self> {
        let labels = (0..effects.len() as i64).collect();
        Self::with_labels(effects, labels)
    }

    pub fn with_labels(effects: Vec<HermitianMatrix>, labels: Vec<i64>) -> Result<Self> {
        let first = effects.first().ok_or(Error::Empty)?;
        let dim = first.dim();
        if labels.len() != effects.len() {
            return Err(Error::DimensionMismatch(labels.len(), effects.len()));
        }
        let mut seen = HashSet::new();
        for &l in &labels {
            if !seen.insert(l) {
                return Err(Error::DuplicateLabel(l));
            }
        }
        let mut sum = HermitianMatrix::zeros(dim);
        for (index, e) in effects.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch(e.dim(), dim));
            }
            let min = e.min_eigenvalue()?;
            if min < -TOL_PSD {
                return Err(Error::EffectNotPsd {
                    index,
                    min_eigenvalue: min,
                });
            }
            sum += e;
        }
        let residual = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if residual > TOL_SUM * dim as f64 {
            return Err(Error::SumNotIdentity(residual));
        }
        Ok(Self {
            dim,
            effects,
            labels,
        })
    }

    /// Validates raw complex matrices: squareness, hermiticity, positivity, completeness.
    pub fn from_matrices(raw: Vec<ComplexMatrix>, labels: Option<Vec<i64>>) -> Result<Self> {
        let effects = raw
            .into_iter()
            .map(HermitianMatrix::new)
            .collect::<Result<Vec<_>>>()?;
        match labels {
            Some(l) => Self::with_labels(effects, l),
            None => Self::new(effects),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[HermitianMatrix] {
        &self.effects
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// The one-outcome measurement `{I}`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            effects: vec![HermitianMatrix::identity(dim)],
            labels: vec![0],
        }
    }

    /// Every effect is an orthogonal projection.
    pub fn is_sharp(&self, tol: f64) -> bool {
        self.effects
            .iter()
            .all(|e| e.matmul(e).max_abs_diff(e) <= tol)
    }

    /// Every effect is a multiple of the identity.
    pub fn is_trivial(&self, tol: f64) -> bool {
        self.effects.iter().all(|e| {
            let c = e.trace_re() / self.dim as f64;
            e.max_abs_diff(&HermitianMatrix::identity(self.dim).scale(c)) <= tol
        })
    }

    /// Every nonzero effect has rank one.
    pub fn is_rank_one(&self, tol: f64) -> Result<bool> {
        for e in &self.effects {
            let vals = e.eigenvalues()?;
            let big = vals.iter().filter(|&&l| l > tol).count();
            if big > 1 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Mixes every effect with noise: `λ A_i + (1 - λ) tr(ρ A_i) I`.
    pub fn noisy_mixture(&self, lambda: f64, rho: &HermitianMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::BadParameter(format!("mixing weight {lambda} outside [0,1]")));
        }
        validate_state(rho)?;
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch(rho.dim(), self.dim));
        }
        let id = HermitianMatrix::identity(self.dim);
        let effects = self
            .effects
            .iter()
            .map(|e| {
                let p = rho.trace_product(e);
                &e.scale(lambda) + &id.scale((1.0 - lambda) * p)
            })
            .collect();
        Self::with_labels(effects, self.labels.clone())
    }

    /// Product measurement with effects `A_x ⊗ B_y`, labels paired by [`pair_labels`].
    pub fn tensor(&self, other: &Povm) -> Result<Self> {
        let mut effects = Vec::with_capacity(self.len() * other.len());
        let mut labels = Vec::with_capacity(self.len() * other.len());
        for (a, &la) in self.effects.iter().zip(&self.labels) {
            for (b, &lb) in other.effects.iter().zip(&other.labels) {
                effects.push(tensor_herm(a, b));
                labels.push(pair_labels(la, lb));
            }
        }
        Self::with_labels(effects, labels)
    }

    /// Canonical simple representative of the post-processing class.
    pub fn simplify(&self) -> SimplePovm {
        simplify(self)
    }

    /// Builds a Povm without validation; callers guarantee the invariants.
    pub(crate) fn from_parts_unchecked(
        dim: usize,
        effects: Vec<HermitianMatrix>,
        labels: Vec<i64>,
    ) -> Self {
        Self {
            dim,
            effects,
            labels,
        }
    }
}

/// Bijection `Z x Z -> Z`: zigzag each coordinate onto `N`, Cantor-pair, zigzag back.
pub fn pair_labels(a: i64, b: i64) -> i64 {
    fn zig(z: i64) -> u128 {
        if z >= 0 {
            2 * z as u128
        } else {
            (-2 * z as i128 - 1) as u128
        }
    }
    let (x, y) = (zig(a), zig(b));
    let n = (x + y) * (x + y + 1) / 2 + y;
    if n % 2 == 0 {
        (n / 2) as i64
    } else {
        -(((n + 1) / 2) as i64)
    }
}

/// A measurement with no zero effects and no two collinear effects.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplePovm {
    povm: Povm,
}

impl SimplePovm {
    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn into_povm(self) -> Povm {
        self.povm
    }

    /// Number of outcomes of the simple representative.
    pub fn length(&self) -> usize {
        self.povm.len()
    }
}

/// Least-squares scalar `c` with `a ≈ c b`, if the fit is exact within tolerance and
/// `c` is nonnegative.
fn collinear_factor(a: &HermitianMatrix, b: &HermitianMatrix) -> Option<f64> {
    let bb = b.trace_product(b);
    if bb <= 0.0 {
        return None;
    }
    let c = a.trace_product(b) / bb;
    if c < -1e-12 {
        return None;
    }
    let c = c.max(0.0);
    (a.max_abs_diff(&b.scale(c)) <= TOL_COLLINEAR).then_some(c)
}

pub fn simplify(p: &Povm) -> SimplePovm {
    let mut items: Vec<(HermitianMatrix, i64)> = p
        .effects
        .iter()
        .cloned()
        .zip(p.labels.iter().copied())
        .filter(|(e, _)| e.max_abs() > 1e-12)
        .collect();
    if items.is_empty() {
        // Unreachable for a valid Povm (effects sum to I), kept total.
        return SimplePovm {
            povm: Povm::trivial(p.dim),
        };
    }
    'outer: loop {
        for x in 0..items.len() {
            for y in x + 1..items.len() {
                let (ex, ey) = (&items[x].0, &items[y].0);
                if collinear_factor(ex, ey).is_some() || collinear_factor(ey, ex).is_some() {
                    let merged = ex + ey;
                    let label = items[x].1.min(items[y].1);
                    items[x] = (merged, label);
                    items.remove(y);
                    continue 'outer;
                }
            }
        }
        break;
    }
    let (effects, labels) = items.into_iter().unzip();
    SimplePovm {
        povm: Povm::from_parts_unchecked(p.dim, effects, labels),
    }
}

pub fn validate(raw: Vec<ComplexMatrix>) -> Result<Povm> {
    Povm::from_matrices(raw, None)
}

pub fn noisy_mixture(p: &Povm, lambda: f64, rho: &HermitianMatrix) -> Result<Povm> {
    p.noisy_mixture(lambda, rho)
}

pub fn tensor_povm(a: &Povm, b: &Povm) -> Result<Povm> {
    a.tensor(b)
}

/// Checks that `rho` is a density matrix: Hermitian, PSD, unit trace.
pub fn validate_state(rho: &HermitianMatrix) -> Result<()> {
    let tr = rho.trace_re();
    if (tr - 1.0).abs() > 1e-9 {
        return Err(Error::NotAState(format!("trace {tr}")));
    }
    let min = rho.min_eigenvalue()?;
    if min < -TOL_PSD {
        return Err(Error::NotAState(format!("min eigenvalue {min}")));
    }
    Ok(())
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        c64(a, b)
    })
}

/// Random `n`-outcome measurement: `A_i = S^{-1/2} G_i G_i^† S^{-1/2}` with complex
/// Gaussian `G_i` and `S = Σ G_i G_i^†`. Deterministic for a given seed.
pub fn random_povm(d: usize, n: usize, seed: u64) -> Result<Povm> {
    if n == 0 || d == 0 {
        return Err(Error::BadParameter("need d >= 1 and n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ms: Vec<HermitianMatrix> = (0..n)
        .map(|_| {
            let g = gaussian_matrix(d, d, &mut rng);
            g.matmul(&g.adjoint()).hermitian_part()
        })
        .collect();
    let s: HermitianMatrix = ms.iter().cloned().sum();
    let s_inv_half = s.pinv_sqrt()?;
    let mut effects: Vec<HermitianMatrix> =
        ms.iter().map(|m| m.conjugate_by(&s_inv_half)).collect();
    // Absorb the rounding residual into the last effect so the sum is I to machine precision.
    let total: HermitianMatrix = effects.iter().cloned().sum();
    let fix = &HermitianMatrix::identity(d) - &total;
    let last = effects.len() - 1;
    effects[last] = &effects[last] + &fix;
    Povm::new(effects)
}

/// Random full-rank density matrix from a normalized Wishart sample.
pub fn random_state(d: usize, seed: u64) -> HermitianMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(d, d, &mut rng);
    let w = &g.matmul(&g.adjoint()).hermitian_part() + &HermitianMatrix::identity(d).scale(0.05);
    let tr = w.trace_re();
    w.scale(1.0 / tr)
}

/// Random column-stochastic `rows x cols` matrix.
pub fn random_stochastic(rows: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mu = vec![vec![0.0; cols]; rows];
    for y in 0..cols {
        let raw: Vec<f64> = (0..rows).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        for x in 0..rows {
            mu[x][y] = raw[x] / total;
        }
    }
    mu
}

/// Applies a column-stochastic matrix: `A_x = Σ_y μ_xy B_y`.
pub fn post_process(b: &Povm, mu: &[Vec<f64>]) -> Result<Povm> {
    let effects = mu
        .iter()
        .map(|row| {
            if row.len() != b.len() {
                return Err(Error::DimensionMismatch(row.len(), b.len()));
            }
            let mut acc = HermitianMatrix::zeros(b.dim());
            for (w, e) in row.iter().zip(b.effects()) {
                acc += &e.scale(*w);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects)
}

pub(crate) fn identity_scaled(d: usize, c: f64) -> HermitianMatrix {
    HermitianMatrix::from_real_diag(&vec![c; d])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_identity(d: usize) -> HermitianMatrix {
        identity_scaled(d, 0.5)
    }

    #[test]
    fn validate_trivial_and_rejects() {
        let p = Povm::new(vec![half_identity(2), half_identity(2)]).unwrap();
        assert_eq!(p.len(), 2);
        let bad = Povm::new(vec![
            HermitianMatrix::from_real_diag(&[1.2, 0.0]),
            HermitianMatrix::from_real_diag(&[-0.2, 1.0]),
        ]);
        assert!(matches!(bad, Err(Error::EffectNotPsd { index: 1, .. })));
        let bad = Povm::new(vec![half_identity(2)]);
        assert!(matches!(bad, Err(Error::SumNotIdentity(_))));
        let dup = Povm::with_labels(vec![half_identity(2), half_identity(2)], vec![3, 3]);
        assert!(matches!(dup, Err(Error::DuplicateLabel(3))));
        assert!(matches!(Povm::new(vec![]), Err(Error::Empty)));
    }

    #[test]
    fn validate_rejects_non_hermitian_raw_input() {
        let raw = vec![
            ComplexMatrix::from_real(2, 2, &[0.5, 0.1, 0.0, 0.5]).unwrap(),
            ComplexMatrix::from_real(2, 2, &[0.5, -0.1, 0.0, 0.5]).unwrap(),
        ];
        assert!(matches!(validate(raw), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn simplify_merges_collinear_effects() {
        let p = Povm::new(vec![identity_scaled(2, 1.0 / 3.0), identity_scaled(2, 2.0 / 3.0)])
            .unwrap();
        let s = p.simplify();
        assert_eq!(s.length(), 1);
        assert!(s.povm().effects()[0].max_abs_diff(&HermitianMatrix::identity(2)) < 1e-12);
        assert_eq!(s.povm().labels(), &[0]);

        // {P/2, P/4, I - 3P/4} with P a rank-one projector.
        let proj = HermitianMatrix::from_real_diag(&[1.0, 0.0, 0.0]);
        let third = &HermitianMatrix::identity(3) - &proj.scale(0.75);
        let p = Povm::with_labels(vec![proj.scale(0.5), proj.scale(0.25), third], vec![5, 2, 9])
            .unwrap();
        let s = p.simplify();
        assert_eq!(s.length(), 2);
        assert_eq!(s.povm().labels(), &[2, 9]);
        assert!(s.povm().effects()[0].max_abs_diff(&proj.scale(0.75)) < 1e-12);
    }

    #[test]
    fn simplify_drops_zero_effects_and_is_idempotent() {
        let z = HermitianMatrix::zeros(2);
        let p = Povm::new(vec![
            z,
            HermitianMatrix::from_real_diag(&[1.0, 0.0]),
            HermitianMatrix::from_real_diag(&[0.0, 1.0]),
        ])
        .unwrap();
        let s = p.simplify();
        assert_eq!(s.length(), 2);
        let again = s.povm().simplify();
        assert_eq!(&again, &s);
    }

    #[test]
    fn noisy_mixture_cases() {
        let z = make_qubit_dichotomic(1.0, [0.0, 0.0, 1.0]).unwrap();
        let rho = maximally_mixed(2);
        let same = z.noisy_mixture(1.0, &rho).unwrap();
        assert!(same.effects()[0].max_abs_diff(&z.effects()[0]) < 1e-15);
        let triv = z.noisy_mixture(0.0, &rho).unwrap();
        assert!(triv.is_trivial(1e-12));
        let half = z.noisy_mixture(0.5, &rho).unwrap();
        assert!(half.effects()[0].max_abs_diff(&HermitianMatrix::from_real_diag(&[0.75, 0.25])) < 1e-15);
        assert_eq!(half.labels(), z.labels());
        let not_state = HermitianMatrix::identity(2);
        assert!(matches!(z.noisy_mixture(0.5, &not_state), Err(Error::NotAState(_))));
    }

    #[test]
    fn tensor_products() {
        let t = Povm::trivial(2).tensor(&Povm::trivial(3)).unwrap();
        assert_eq!(t.dim(), 6);
        assert!(t.is_trivial(1e-14));
        let z = make_qubit_dichotomic(1.0, [0.0, 0.0, 1.0]).unwrap();
        let zz = z.tensor(&z).unwrap();
        assert_eq!(zz.len(), 4);
        assert!(zz.is_sharp(1e-14));
        assert!(zz.is_rank_one(1e-12).unwrap());
    }

    #[test]
    fn label_pairing_is_injective_on_a_box() {
        let mut seen = HashSet::new();
        for a in -20..=20 {
            for b in -20..=20 {
                assert!(seen.insert(pair_labels(a, b)));
            }
        }
    }

    #[test]
    fn random_povm_properties() {
        let p = random_povm(3, 4, 42).unwrap();
        assert_eq!(p.len(), 4);
        let q = random_povm(3, 4, 42).unwrap();
        assert_eq!(p, q);
        let one = random_povm(3, 1, 1).unwrap();
        assert!(one.effects()[0].max_abs_diff(&HermitianMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn random_state_is_full_rank_state() {
        let rho = random_state(3, 8);
        validate_state(&rho).unwrap();
        assert!(rho.min_eigenvalue().unwrap() > 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn random_povms_validate_and_simplify_shrinks(seed in 0u64..10_000, d in 1usize..5, n in 1usize..7) {
                let p = random_povm(d, n, seed).unwrap();
                for e in p.effects() {
                    prop_assert!(e.is_psd(1e-9).unwrap());
                }
                let s = p.simplify();
                prop_assert!(s.length() <= p.len());
                prop_assert_eq!(s.povm().simplify(), s.clone());
            }
        }
    }
}
