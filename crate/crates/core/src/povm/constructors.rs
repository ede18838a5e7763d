//! Standard measurement families.

use std::f64::consts::PI;

use super::{identity_scaled, Povm};
use crate::error::{Error, Result};
use crate::hermitian::{c64, re, tensor, ComplexMatrix, HermitianMatrix};

/// Pauli matrices `(σ_x, σ_y, σ_z)`.
pub fn pauli() -> [ComplexMatrix; 3] {
    let x = ComplexMatrix::from_vec(2, 2, vec![re(0.0), re(1.0), re(1.0), re(0.0)]).unwrap();
    let y = ComplexMatrix::from_vec(2, 2, vec![re(0.0), c64(0.0, -1.0), c64(0.0, 1.0), re(0.0)])
        .unwrap();
    let z = ComplexMatrix::from_vec(2, 2, vec![re(1.0), re(0.0), re(0.0), re(-1.0)]).unwrap();
    [x, y, z]
}

fn n_dot_sigma(n: [f64; 3]) -> ComplexMatrix {
    let [x, y, z] = pauli();
    &(&x.scale_real(n[0]) + &y.scale_real(n[1])) + &z.scale_real(n[2])
}

pub fn maximally_mixed(d: usize) -> HermitianMatrix {
    identity_scaled(d, 1.0 / d as f64)
}

/// Qubit state `(I + v·σ) / 2`.
pub fn bloch_state(v: [f64; 3]) -> Result<HermitianMatrix> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || norm > 1.0 + 1e-12 {
        return Err(Error::BadBloch(norm));
    }
    let m = &ComplexMatrix::identity(2) + &n_dot_sigma(v);
    Ok(m.scale_real(0.5).hermitian_part())
}

/// Unbiased dichotomic qubit measurement `(I ± η n·σ) / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitDichotomic {
    pub eta: f64,
    pub direction: [f64; 3],
}

impl QubitDichotomic {
    pub fn new(eta: f64, direction: [f64; 3]) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::BadParameter(format!("sharpness {eta} outside [0,1]")));
        }
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::BadParameter(format!("direction has norm {norm}")));
        }
        Ok(Self { eta, direction })
    }

    /// Effects ordered `[+1, -1]` with labels `1` and `-1`.
    pub fn to_povm(&self) -> Povm {
        let t = n_dot_sigma(self.direction).scale_real(self.eta);
        let id = ComplexMatrix::identity(2);
        let plus = (&id + &t).scale_real(0.5).hermitian_part();
        let minus = (&id - &t).scale_real(0.5).hermitian_part();
        Povm::with_labels(vec![plus, minus], vec![1, -1]).expect("valid for η in [0,1]")
    }
}

pub fn make_qubit_dichotomic(eta: f64, direction: [f64; 3]) -> Result<Povm> {
    Ok(QubitDichotomic::new(eta, direction)?.to_povm())
}

/// Rank-one projectors onto the columns of a unitary.
pub fn make_von_neumann(basis: &ComplexMatrix) -> Result<Povm> {
    if !basis.is_square() {
        return Err(Error::NotSquare(basis.rows(), basis.cols()));
    }
    let d = basis.rows();
    let defect = basis
        .adjoint()
        .matmul(basis)
        .max_abs_diff(&ComplexMatrix::identity(d));
    if defect > 1e-10 {
        return Err(Error::BadParameter(format!("basis not unitary (defect {defect:.2e})")));
    }
    let effects = (0..d)
        .map(|k| HermitianMatrix::outer(&basis.column(k)))
        .collect();
    Povm::new(effects)
}

/// `F_ab = ζ^{ab} / sqrt(d)` with `ζ = exp(2πi/d)`.
pub fn fourier_matrix(d: usize) -> ComplexMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |a, b| {
        let phase = 2.0 * PI * ((a * b) % d) as f64 / d as f64;
        c64(phase.cos() * norm, phase.sin() * norm)
    })
}

/// Noisy computational and Fourier bases: `A_i = s|e_i><e_i| + (1-s) I/d`,
/// `B_j = t F|e_j><e_j|F^† + (1-t) I/d`.
pub fn make_fourier_pair(d: usize, s: f64, t: f64) -> Result<(Povm, Povm)> {
    if d < 2 {
        return Err(Error::BadParameter("Fourier pair needs d >= 2".into()));
    }
    for (name, v) in [("s", s), ("t", t)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::BadParameter(format!("{name} = {v} outside [0,1]")));
        }
    }
    let comp = make_von_neumann(&ComplexMatrix::identity(d))?;
    let four = make_von_neumann(&fourier_matrix(d))?;
    let noise = |p: &Povm, w: f64| {
        let eff = p
            .effects()
            .iter()
            .map(|e| &e.scale(w) + &identity_scaled(d, (1.0 - w) / d as f64))
            .collect();
        Povm::new(eff)
    };
    Ok((noise(&comp, s)?, noise(&four, t)?))
}

/// Directions `(cos((k-1)π/3), sin((k-1)π/3), 0)`, `k = 1, 2, 3`.
pub fn trine_directions() -> [[f64; 3]; 3] {
    let dir = |k: usize| {
        let a = k as f64 * PI / 3.0;
        [a.cos(), a.sin(), 0.0]
    };
    [dir(0), dir(1), dir(2)]
}

pub fn make_trine(eta: f64) -> Result<Vec<Povm>> {
    trine_directions()
        .into_iter()
        .map(|n| make_qubit_dichotomic(eta, n))
        .collect()
}

/// `M` planar dichotomics along `cos(kπ/M) e_1 + sin(kπ/M) e_2`, `k = 0..M`.
pub fn make_planar(m: usize, lambda: f64) -> Result<Vec<Povm>> {
    if m < 1 {
        return Err(Error::BadParameter("need at least one direction".into()));
    }
    (0..m)
        .map(|k| {
            let a = k as f64 * PI / m as f64;
            make_qubit_dichotomic(lambda, [a.cos(), a.sin(), 0.0])
        })
        .collect()
}

/// Tetrahedral qubit SIC: `(I + n_k·σ) / 4`.
pub fn make_sic_qubit() -> Povm {
    let s = 1.0 / 3.0_f64.sqrt();
    let dirs = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
    let effects = dirs
        .iter()
        .map(|&n| {
            (&ComplexMatrix::identity(2) + &n_dot_sigma(n))
                .scale_real(0.25)
                .hermitian_part()
        })
        .collect();
    Povm::new(effects).expect("SIC is a valid measurement")
}

/// The six eigenprojectors of `σ_x, σ_y, σ_z`, each weighted `1/3`.
pub fn make_mub_qubit_complete() -> Povm {
    let mut effects = Vec::with_capacity(6);
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut n = [0.0; 3];
            n[axis] = sign;
            effects.push(
                (&ComplexMatrix::identity(2) + &n_dot_sigma(n))
                    .scale_real(1.0 / 6.0)
                    .hermitian_part(),
            );
        }
    }
    Povm::new(effects).expect("complete MUB measurement is valid")
}

/// `g` pairwise anticommuting Hermitian unitaries on `d = 2^ceil((g-1)/2)`.
///
/// Ladder: `{σ_x, σ_y, σ_z}` on one qubit; each doubling maps the previous family
/// `{T_i}` to `{σ_x ⊗ T_i} ∪ {σ_y ⊗ I, σ_z ⊗ I}`.
pub fn anticommuting_generators(g: usize) -> Result<Vec<ComplexMatrix>> {
    if g < 2 {
        return Err(Error::BadParameter("need g >= 2".into()));
    }
    let [x, y, z] = pauli();
    let mut family = vec![x.clone(), y.clone(), z.clone()];
    while family.len() < g {
        let d = family[0].rows();
        let id = ComplexMatrix::identity(d);
        let mut next: Vec<ComplexMatrix> = family.iter().map(|t| tensor(&x, t)).collect();
        next.push(tensor(&y, &id));
        next.push(tensor(&z, &id));
        family = next;
    }
    family.truncate(g);
    Ok(family)
}

/// Unbiased dichotomics `(I ± T_i) / 2` for the anticommuting generators.
pub fn make_anticommuting_family(g: usize) -> Result<Vec<Povm>> {
    anticommuting_generators(g)?
        .iter()
        .map(|t| {
            let id = ComplexMatrix::identity(t.rows());
            let plus = (&id + t).scale_real(0.5).hermitian_part();
            let minus = (&id - t).scale_real(0.5).hermitian_part();
            Povm::with_labels(vec![plus, minus], vec![1, -1])
        })
        .collect()
}

fn real_effect(scale: f64, rows: [[f64; 3]; 3]) -> HermitianMatrix {
    let flat: Vec<f64> = rows.iter().flatten().map(|v| v / scale).collect();
    HermitianMatrix::from_real(3, &flat).expect("symmetric")
}

/// Three pairwise incomparable qutrit measurements with two, three and four outcomes.
pub fn qutrit_triplet() -> [Povm; 3] {
    let a = Povm::new(vec![
        real_effect(6.0, [[5.0, 0.0, 1.0], [0.0, 4.0, -1.0], [1.0, -1.0, 3.0]]),
        real_effect(6.0, [[1.0, 0.0, -1.0], [0.0, 2.0, 1.0], [-1.0, 1.0, 3.0]]),
    ]);
    let b = Povm::new(vec![
        real_effect(12.0, [[2.0, 0.0, 1.0], [0.0, 1.0, -1.0], [1.0, -1.0, 3.0]]),
        real_effect(12.0, [[4.0, -2.0, 1.0], [-2.0, 7.0, 1.0], [1.0, 1.0, 7.0]]),
        real_effect(6.0, [[3.0, 1.0, -1.0], [1.0, 2.0, 0.0], [-1.0, 0.0, 1.0]]),
    ]);
    let c = Povm::new(vec![
        real_effect(12.0, [[7.0, 0.0, 2.0], [0.0, 5.0, -2.0], [2.0, -2.0, 6.0]]),
        real_effect(12.0, [[1.0, -1.0, 0.0], [-1.0, 3.0, 1.0], [0.0, 1.0, 2.0]]),
        real_effect(24.0, [[5.0, 2.0, -1.0], [2.0, 4.0, 0.0], [-1.0, 0.0, 1.0]]),
        real_effect(24.0, [[3.0, 0.0, -3.0], [0.0, 4.0, 2.0], [-3.0, 2.0, 7.0]]),
    ]);
    [
        a.expect("valid qutrit A"),
        b.expect("valid qutrit B"),
        c.expect("valid qutrit C"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharp_z_dichotomic() {
        let p = make_qubit_dichotomic(1.0, [0.0, 0.0, 1.0]).unwrap();
        assert!(p.effects()[0].max_abs_diff(&HermitianMatrix::from_real_diag(&[1.0, 0.0])) < 1e-15);
        assert!(p.effects()[1].max_abs_diff(&HermitianMatrix::from_real_diag(&[0.0, 1.0])) < 1e-15);
        assert!(make_qubit_dichotomic(1.2, [0.0, 0.0, 1.0]).is_err());
        assert!(make_qubit_dichotomic(0.5, [0.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn qubit_fourier_pair_is_z_and_x() {
        let (a, b) = make_fourier_pair(2, 1.0, 1.0).unwrap();
        let z = make_qubit_dichotomic(1.0, [0.0, 0.0, 1.0]).unwrap();
        let x = make_qubit_dichotomic(1.0, [1.0, 0.0, 0.0]).unwrap();
        for k in 0..2 {
            assert!(a.effects()[k].max_abs_diff(&z.effects()[k]) < 1e-15);
            assert!(b.effects()[k].max_abs_diff(&x.effects()[k]) < 1e-15);
        }
    }

    #[test]
    fn fourier_matrix_is_unitary() {
        for d in 2..=6 {
            let f = fourier_matrix(d);
            assert!(f.adjoint().matmul(&f).max_abs_diff(&ComplexMatrix::identity(d)) < 1e-14);
        }
    }

    #[test]
    fn anticommuting_family_relations() {
        for g in 2..=7 {
            let ts = anticommuting_generators(g).unwrap();
            assert_eq!(ts.len(), g);
            let d = ts[0].rows();
            assert_eq!(d, 1 << ((g - 1 + 1) / 2));
            let id = ComplexMatrix::identity(d);
            for i in 0..g {
                assert!(ts[i].matmul(&ts[i]).max_abs_diff(&id) < 1e-12);
                assert!(ts[i].hermiticity_defect() < 1e-15);
                for j in 0..g {
                    let tr = ts[i].matmul(&ts[j]).trace();
                    let expected = if i == j { d as f64 } else { 0.0 };
                    assert!((tr.re - expected).abs() < 1e-12 && tr.im.abs() < 1e-12);
                    if i != j {
                        let ac = &ts[i].matmul(&ts[j]) + &ts[j].matmul(&ts[i]);
                        assert!(ac.max_abs() < 1e-12);
                    }
                }
            }
        }
        let fam = make_anticommuting_family(3).unwrap();
        assert_eq!(fam[0].dim(), 2);
    }

    #[test]
    fn families_validate() {
        assert_eq!(make_trine(0.75).unwrap().len(), 3);
        assert_eq!(make_planar(5, 0.6).unwrap().len(), 5);
        assert_eq!(make_sic_qubit().len(), 4);
        assert_eq!(make_mub_qubit_complete().len(), 6);
        assert!(make_sic_qubit().is_rank_one(1e-12).unwrap());
    }

    #[test]
    fn qutrit_triplet_validates() {
        let [a, b, c] = qutrit_triplet();
        assert_eq!((a.len(), b.len(), c.len()), (2, 3, 4));
    }

    #[test]
    fn bloch_state_checks_norm() {
        let rho = bloch_state([0.0, 0.0, 0.5]).unwrap();
        assert!(rho.max_abs_diff(&HermitianMatrix::from_real_diag(&[0.75, 0.25])) < 1e-15);
        assert!(matches!(bloch_state([1.0, 1.0, 0.0]), Err(Error::BadBloch(_))));
    }
}
