//! Parameter scans over the measurement families with closed-form compatibility
//! regions, emitted as CSV tables.
//!
//! CSV layout: one header row with the parameter names followed by
//! `height,zhu_verdict,analytic_flag,oracle_verdict`. Numbers carry 12 significant
//! digits, lines end with LF, and `oracle_verdict` is empty when the oracle was not run.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::incompat::{
    ft_condition, joint_feasibility_many, qubit_pair_compatible, zhu_criterion_value, Verdict,
    DEAD_BAND,
};
use crate::povm::{bloch_state, make_fourier_pair, make_planar, maximally_mixed, QubitDichotomic};

/// Bloch vectors at least this long are shortened to it so that `ρ` stays invertible.
pub const BLOCH_CLAMP: f64 = 1.0 - 1e-6;
/// Environment variable capping the scan thread pool.
pub const THREADS_ENV: &str = "POVM_ORDER_THREADS";
pub const DEFAULT_GRID: usize = 101;

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRecord {
    pub params: Vec<f64>,
    pub height: f64,
    pub zhu_verdict: Verdict,
    pub boundary: bool,
    /// The closed-form region says incompatible.
    pub analytic_incompatible: bool,
    /// `Some(true)` when the joint-measurement oracle found a joint measurement.
    pub oracle_compatible: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanMetadata {
    pub rho: String,
    pub dead_band: f64,
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub name: String,
    pub param_names: Vec<String>,
    pub records: Vec<ScanRecord>,
    pub metadata: ScanMetadata,
}

fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

impl ScanResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.param_names {
            out.push_str(p);
            out.push(',');
        }
        out.push_str("height,zhu_verdict,analytic_flag,oracle_verdict\n");
        for r in &self.records {
            for p in &r.params {
                out.push_str(&fmt_num(*p));
                out.push(',');
            }
            let oracle = match r.oracle_compatible {
                Some(true) => "compatible",
                Some(false) => "incompatible",
                None => "",
            };
            let analytic = if r.analytic_incompatible {
                "incompatible"
            } else {
                "compatible"
            };
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_num(r.height),
                r.zhu_verdict.name(),
                analytic,
                oracle
            );
        }
        out
    }

    pub fn incompatible_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.zhu_verdict == Verdict::Incompatible)
            .count()
    }

    pub fn analytic_incompatible_count(&self) -> usize {
        self.records.iter().filter(|r| r.analytic_incompatible).count()
    }
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Thread count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Evaluates `f` on every point, in parallel, returning results in input order.
fn par_map<T, R>(items: Vec<T>, f: impl Fn(T) -> Result<R> + Sync + Send) -> Result<Vec<R>>
where
    T: Send,
    R: Send,
{
    let run = || items.into_par_iter().map(&f).collect::<Result<Vec<R>>>();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

/// Qubit state with Bloch vector `v`; vectors of length at least [`BLOCH_CLAMP`] are
/// shortened to it.
pub fn clamped_bloch_state(v: [f64; 3]) -> Result<(HermitianMatrix, [f64; 3])> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || norm > 1.0 + 1e-12 {
        return Err(Error::BadBloch(norm));
    }
    let v = if norm >= BLOCH_CLAMP {
        v.map(|x| x * BLOCH_CLAMP / norm)
    } else {
        v
    };
    Ok((bloch_state(v)?, v))
}

/// Compatibility region of the noisy Fourier pair:
/// `s + t <= 1` or `s² + t² + 2(d-2)/d (1-s)(1-t) <= 1`.
pub fn fourier_analytic_compatible(d: usize, s: f64, t: f64) -> bool {
    let df = d as f64;
    s + t <= 1.0 || s * s + t * t + 2.0 * (df - 2.0) / df * (1.0 - s) * (1.0 - t) <= 1.0
}

/// Zhu verdicts of the noisy Fourier pair over `[0,1]²` with `ρ = I/d`; the
/// joint-measurement oracle runs when `oracle` is set.
pub fn scan_fourier(d: usize, grid_n: usize, oracle: bool) -> Result<ScanResult> {
    if d < 2 || grid_n < 2 {
        return Err(Error::BadParameter("need d >= 2 and grid >= 2".into()));
    }
    let grid = linspace(0.0, 1.0, grid_n);
    let points: Vec<(f64, f64)> = grid
        .iter()
        .flat_map(|&s| grid.iter().map(move |&t| (s, t)))
        .collect();
    let rho = maximally_mixed(d);
    let records = par_map(points, |(s, t)| {
        let (a, b) = make_fourier_pair(d, s, t)?;
        let v = zhu_criterion_value(&[a.clone(), b.clone()], &rho)?;
        let oracle_compatible = if oracle {
            Some(joint_feasibility_many(&[a, b])?.is_feasible())
        } else {
            None
        };
        Ok(ScanRecord {
            params: vec![s, t],
            height: v.height,
            zhu_verdict: v.verdict,
            boundary: v.boundary,
            analytic_incompatible: !fourier_analytic_compatible(d, s, t),
            oracle_compatible,
        })
    })?;
    Ok(ScanResult {
        name: format!("fourier_d{d}"),
        param_names: vec!["s".into(), "t".into()],
        records,
        metadata: ScanMetadata {
            rho: "maximally_mixed".into(),
            dead_band: DEAD_BAND,
            grid: grid_n,
        },
    })
}

fn bloch_label(v: [f64; 3]) -> String {
    format!("bloch({},{},{})", fmt_num(v[0]), fmt_num(v[1]), fmt_num(v[2]))
}

/// Two unbiased qubit dichotomics along `axes` with sharpness `(η1, η2)` over `[0,1]²`.
pub fn scan_qubit_pair(
    axes: [[f64; 3]; 2],
    bloch: [f64; 3],
    grid_n: usize,
    oracle: bool,
) -> Result<ScanResult> {
    let (rho, v) = clamped_bloch_state(bloch)?;
    for a in &axes {
        QubitDichotomic::new(1.0, *a)?;
    }
    let grid = linspace(0.0, 1.0, grid_n);
    let points: Vec<(f64, f64)> = grid
        .iter()
        .flat_map(|&x| grid.iter().map(move |&y| (x, y)))
        .collect();
    let records = par_map(points, |(e1, e2)| {
        let q1 = QubitDichotomic::new(e1, axes[0])?;
        let q2 = QubitDichotomic::new(e2, axes[1])?;
        let ms = [q1.to_povm(), q2.to_povm()];
        let z = zhu_criterion_value(&ms, &rho)?;
        let oracle_compatible = if oracle {
            Some(joint_feasibility_many(&ms)?.is_feasible())
        } else {
            None
        };
        Ok(ScanRecord {
            params: vec![e1, e2],
            height: z.height,
            zhu_verdict: z.verdict,
            boundary: z.boundary,
            analytic_incompatible: !qubit_pair_compatible(&q1, &q2),
            oracle_compatible,
        })
    })?;
    Ok(ScanResult {
        name: "qubit_pair".into(),
        param_names: vec!["eta1".into(), "eta2".into()],
        records,
        metadata: ScanMetadata {
            rho: bloch_label(v),
            dead_band: DEAD_BAND,
            grid: grid_n,
        },
    })
}

/// Which sharpness values a triple scan varies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TripleSweep {
    /// `η1 = η2 = η3 = η`.
    Equal,
    /// `η1 = η` with the other two fixed.
    First { eta2: f64, eta3: f64 },
}

/// Three unbiased qubit dichotomics; the analytic flag is the Fermat-Torricelli test.
pub fn scan_qubit_triple(
    axes: [[f64; 3]; 3],
    bloch: [f64; 3],
    sweep: TripleSweep,
    grid_n: usize,
    oracle: bool,
) -> Result<ScanResult> {
    let (rho, v) = clamped_bloch_state(bloch)?;
    let grid = linspace(0.0, 1.0, grid_n);
    let records = par_map(grid, |eta| {
        let etas = match sweep {
            TripleSweep::Equal => [eta; 3],
            TripleSweep::First { eta2, eta3 } => [eta, eta2, eta3],
        };
        let qs: Vec<QubitDichotomic> = (0..3)
            .map(|k| QubitDichotomic::new(etas[k], axes[k]))
            .collect::<Result<_>>()?;
        let ms: Vec<_> = qs.iter().map(|q| q.to_povm()).collect();
        let z = zhu_criterion_value(&ms, &rho)?;
        let ft = ft_condition(&[qs[0], qs[1], qs[2]]);
        let oracle_compatible = if oracle {
            Some(joint_feasibility_many(&ms)?.is_feasible())
        } else {
            None
        };
        Ok(ScanRecord {
            params: vec![eta],
            height: z.height,
            zhu_verdict: z.verdict,
            boundary: z.boundary,
            analytic_incompatible: !ft.compatible,
            oracle_compatible,
        })
    })?;
    Ok(ScanResult {
        name: "qubit_triple".into(),
        param_names: vec!["eta".into()],
        records,
        metadata: ScanMetadata {
            rho: bloch_label(v),
            dead_band: DEAD_BAND,
            grid: grid_n,
        },
    })
}

/// Optimal compatibility threshold `1/(M sin(π/(2M)))` for `M` planar directions.
pub fn planar_optimal_threshold(m: usize) -> f64 {
    1.0 / (m as f64 * (PI / (2.0 * m as f64)).sin())
}

/// `M` equally spaced planar dichotomics with common sharpness `λ` over `[0,1]`.
pub fn scan_planar(m: usize, grid_n: usize) -> Result<ScanResult> {
    if m < 2 {
        return Err(Error::BadParameter("need M >= 2".into()));
    }
    let rho = maximally_mixed(2);
    let limit = planar_optimal_threshold(m);
    let records = par_map(linspace(0.0, 1.0, grid_n), |lambda| {
        let ms = make_planar(m, lambda)?;
        let z = zhu_criterion_value(&ms, &rho)?;
        Ok(ScanRecord {
            params: vec![lambda],
            height: z.height,
            zhu_verdict: z.verdict,
            boundary: z.boundary,
            analytic_incompatible: lambda > limit,
            oracle_compatible: None,
        })
    })?;
    Ok(ScanResult {
        name: format!("planar_m{m}"),
        param_names: vec!["lambda".into()],
        records,
        metadata: ScanMetadata {
            rho: "maximally_mixed".into(),
            dead_band: DEAD_BAND,
            grid: grid_n,
        },
    })
}
