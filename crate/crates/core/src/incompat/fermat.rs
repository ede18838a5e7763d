//! Exact compatibility test for three unbiased qubit dichotomics via the
//! Fermat-Torricelli point of four vectors in `R^3`.

use crate::povm::QubitDichotomic;

/// Upper limit on the summed distances for compatibility.
pub const FT_BOUND: f64 = 4.0;
const TOL_FT: f64 = 1e-9;
const WEISZFELD_TOL: f64 = 1e-12;
const WEISZFELD_MAX: usize = 10_000;
const COINCIDE: f64 = 1e-12;

pub type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FtAnalysis {
    /// `v_0 = -Σ η_k n_k`, `v_k = -2 η_k n_k - v_0`.
    pub points: [Vec3; 4],
    pub ft_point: Vec3,
    pub total_distance: f64,
    pub compatible: bool,
    pub iterations: usize,
}

pub fn total_distance(points: &[Vec3], x: Vec3) -> f64 {
    points.iter().map(|&p| norm(sub(x, p))).sum()
}

/// Whether data point `i` minimizes the summed distance: the unit vectors from the other
/// points sum to at most the multiplicity of `i`.
fn vertex_is_optimal(points: &[Vec3], i: usize) -> bool {
    let mut pull = [0.0; 3];
    let mut multiplicity = 0.0;
    for p in points {
        let diff = sub(points[i], *p);
        let r = norm(diff);
        if r <= COINCIDE {
            multiplicity += 1.0;
        } else {
            for k in 0..3 {
                pull[k] += diff[k] / r;
            }
        }
    }
    norm(pull) <= multiplicity
}

/// Geometric median by Weiszfeld's iteration, accepting an optimal data point directly.
pub fn fermat_point(points: &[Vec3]) -> (Vec3, usize) {
    let mut best_vertex: Option<Vec3> = None;
    for i in 0..points.len() {
        if vertex_is_optimal(points, i) {
            let better = best_vertex
                .is_none_or(|b| total_distance(points, points[i]) < total_distance(points, b));
            if better {
                best_vertex = Some(points[i]);
            }
        }
    }
    if let Some(v) = best_vertex {
        return (v, 0);
    }
    let n = points.len() as f64;
    let mut x = [0.0; 3];
    for p in points {
        for k in 0..3 {
            x[k] += p[k] / n;
        }
    }
    for it in 1..=WEISZFELD_MAX {
        let mut num = [0.0; 3];
        let mut den = 0.0;
        for p in points {
            let mut r = norm(sub(x, *p));
            if r <= COINCIDE {
                // No vertex is optimal, so step off the data point.
                r = COINCIDE;
            }
            for k in 0..3 {
                num[k] += p[k] / r;
            }
            den += 1.0 / r;
        }
        let next = [num[0] / den, num[1] / den, num[2] / den];
        let step = norm(sub(next, x));
        x = next;
        if step <= WEISZFELD_TOL {
            return (x, it);
        }
    }
    (x, WEISZFELD_MAX)
}

pub fn ft_points(ms: &[QubitDichotomic; 3]) -> [Vec3; 4] {
    let mut v0 = [0.0; 3];
    for m in ms {
        for k in 0..3 {
            v0[k] -= m.eta * m.direction[k];
        }
    }
    let vk = |m: &QubitDichotomic| {
        let mut v = [0.0; 3];
        for k in 0..3 {
            v[k] = -2.0 * m.eta * m.direction[k] - v0[k];
        }
        v
    };
    [v0, vk(&ms[0]), vk(&ms[1]), vk(&ms[2])]
}

/// Three unbiased qubit dichotomics are compatible iff the Fermat-Torricelli point of
/// their four characteristic points is within summed distance 4.
pub fn ft_condition(ms: &[QubitDichotomic; 3]) -> FtAnalysis {
    let points = ft_points(ms);
    let (ft_point, iterations) = fermat_point(&points);
    let total = total_distance(&points, ft_point);
    FtAnalysis {
        points,
        ft_point,
        total_distance: total,
        compatible: total <= FT_BOUND + TOL_FT,
        iterations,
    }
}

/// Exact compatibility of two unbiased qubit dichotomics:
/// `||η1 n1 + η2 n2|| + ||η1 n1 - η2 n2|| <= 2`.
pub fn qubit_pair_compatible(a: &QubitDichotomic, b: &QubitDichotomic) -> bool {
    let u: Vec3 = std::array::from_fn(|k| a.eta * a.direction[k]);
    let v: Vec3 = std::array::from_fn(|k| b.eta * b.direction[k]);
    let plus = [u[0] + v[0], u[1] + v[1], u[2] + v[2]];
    norm(plus) + norm(sub(u, v)) <= 2.0 + TOL_FT
}
