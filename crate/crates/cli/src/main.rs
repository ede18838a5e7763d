use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use povm_order::dominance::{height_sdp_with, height_two_certificate, HeightResult, SolverStatus, MAX_NEWTON, TOL_GAP};
use povm_order::hermitian::{HermitianMatrix, TOL_PSD};
use povm_order::incompat::{
    ft_condition, joint_feasibility_many, pgm_criterion, zhu_criterion, IncompatVerdict, JointVerdict, FT_BOUND,
};
use povm_order::morphisms::{apply, MorphismSpec};
use povm_order::postproc::{classify_order, OrderVerdict, StochasticMatrix};
use povm_order::povm::{
    bloch_state, matrix_from_json, matrix_to_json, maximally_mixed, trine_directions, validate_state, PovmFile,
    QubitDichotomic,
};
use povm_order::scenarios::{
    scan_fourier, scan_planar, scan_qubit_pair, scan_qubit_triple, ScanResult, TripleSweep, DEFAULT_GRID,
};
use povm_order::{Error, Povm};

const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "povm-order", version, about = "Post-processing order, Fisher information maps and incompatibility tests for POVMs")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Relative duality-gap target of the height SDP.
    #[arg(long, default_value_t = TOL_GAP, global = true)]
    sdp_gap: f64,

    /// Tolerance of the sharpness, rank and triviality checks.
    #[arg(long, default_value_t = TOL_PSD, global = true)]
    psd_tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a file holds a valid measurement.
    Validate { file: PathBuf },
    /// Print the simple representative as a measurement file.
    Simplify { file: PathBuf },
    /// Decide the post-processing relation between two measurements.
    Order { a: PathBuf, b: PathBuf },
    /// Fisher information matrix of a measurement.
    Fisher {
        file: PathBuf,
        #[arg(long, default_value = "maximally-mixed")]
        rho: String,
        /// Subtract the trivial part.
        #[arg(long)]
        truncated: bool,
    },
    /// Height of the Fisher information matrices of several measurements.
    Height {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value = "maximally-mixed")]
        rho: String,
        /// Include the optimal H and the dual measurement.
        #[arg(long)]
        certificate: bool,
    },
    /// Height-function incompatibility criterion.
    Incompat {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value = "maximally-mixed")]
        rho: String,
        /// Use the pretty-good-measurement lower bound instead of the SDP.
        #[arg(long)]
        pgm: bool,
        /// Include the optimal H and the dual measurement.
        #[arg(long)]
        certificate: bool,
    },
    /// Search for a joint measurement of two measurements.
    Joint { a: PathBuf, b: PathBuf },
    /// Exact compatibility of three unbiased qubit dichotomics.
    Ft {
        /// Sharpness values `a,b,c`.
        #[arg(long)]
        etas: String,
        /// `trine`, `orthogonal`, `xyz` or three vectors `x,y,z;x,y,z;x,y,z`.
        #[arg(long, default_value = "trine")]
        axes: String,
    },
    /// Grid scans producing verdict tables.
    Scan {
        #[command(subcommand)]
        scan: ScanCommand,
    },
    /// Lower bound on the outcome count of any joint measurement.
    OutcomeBound {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value = "maximally-mixed")]
        rho: String,
    },
}

#[derive(Subcommand, Debug)]
enum ScanCommand {
    /// Noisy Fourier-conjugate pair in dimension `d`.
    Fourier {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long)]
        oracle: bool,
    },
    /// Two qubit dichotomics along the given axes.
    QubitPair {
        /// Two axes, e.g. `x;z` or `1,0,0;0,0,1`.
        #[arg(long, default_value = "x;z")]
        axes: String,
        #[arg(long, default_value = "0,0,0")]
        bloch: String,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long)]
        oracle: bool,
    },
    /// Three qubit dichotomics along the given axes.
    QubitTriple {
        #[arg(long, default_value = "trine")]
        axes: String,
        #[arg(long, default_value = "0,0,0")]
        bloch: String,
        /// `equal` or `first:ETA2,ETA3`.
        #[arg(long, default_value = "equal")]
        sweep: String,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long)]
        oracle: bool,
    },
    /// `M` equally spaced planar dichotomics.
    Planar {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SolverStall(_) | Error::NoConvergence => EXIT_SOLVER,
            _ => EXIT_VALIDATION,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_VALIDATION,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

enum Output {
    Object(Value),
    Scan(ScanResult),
}

/// Rounds to 12 significant digits.
fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    json!(r)
}

fn matrix_value(m: &HermitianMatrix) -> Value {
    let rows = matrix_to_json(m.as_matrix());
    Value::Array(
        rows.into_iter()
            .map(|r| Value::Array(r.into_iter().map(|[a, b]| json!([num(a), num(b)])).collect()))
            .collect(),
    )
}

fn stochastic_value(m: &StochasticMatrix) -> Value {
    Value::Array(
        m.entries()
            .iter()
            .map(|r| Value::Array(r.iter().map(|&x| num(x)).collect()))
            .collect(),
    )
}

fn read_povm(path: &Path) -> CliResult<Povm> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let file = PovmFile::from_json(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    file.to_povm()
        .map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn read_all(paths: &[PathBuf]) -> CliResult<Vec<Povm>> {
    paths.iter().map(|p| read_povm(p)).collect()
}

fn parse_floats(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("not a number: {t:?}")))
        })
        .collect()
}

fn parse_triple(s: &str) -> CliResult<[f64; 3]> {
    let v = parse_floats(s)?;
    <[f64; 3]>::try_from(v).map_err(|_| invalid(format!("expected three comma-separated numbers, got {s:?}")))
}

fn parse_axis(s: &str) -> CliResult<[f64; 3]> {
    match s.trim() {
        "x" => Ok([1.0, 0.0, 0.0]),
        "y" => Ok([0.0, 1.0, 0.0]),
        "z" => Ok([0.0, 0.0, 1.0]),
        other => parse_triple(other),
    }
}

fn parse_axes<const N: usize>(s: &str) -> CliResult<[[f64; 3]; N]> {
    if N == 3 {
        let preset = match s {
            "trine" => Some(trine_directions()),
            "orthogonal" => {
                let t = trine_directions();
                Some([[0.0, 0.0, 1.0], t[1], t[2]])
            }
            "xyz" => Some([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
            _ => None,
        };
        if let Some(p) = preset {
            return Ok(std::array::from_fn(|k| p[k]));
        }
    }
    let axes = s.split(';').map(parse_axis).collect::<CliResult<Vec<_>>>()?;
    <[[f64; 3]; N]>::try_from(axes).map_err(|_| invalid(format!("expected {N} axes separated by ';', got {s:?}")))
}

/// `maximally-mixed`, a Bloch triple, or a JSON matrix file.
fn parse_rho(src: &str, d: usize) -> CliResult<HermitianMatrix> {
    if src == "maximally-mixed" {
        return Ok(maximally_mixed(d));
    }
    if src.contains(',') && !Path::new(src).exists() {
        if d != 2 {
            return Err(invalid(format!("Bloch vectors describe qubits, but the measurements have dim {d}")));
        }
        return Ok(bloch_state(parse_triple(src)?)?);
    }
    let text = fs::read_to_string(src).map_err(|e| invalid(format!("{src}: {e}")))?;
    let rows = serde_json::from_str(&text).map_err(|e| invalid(format!("{src}: {e}")))?;
    let rho = HermitianMatrix::new(matrix_from_json(&rows)?)?;
    if rho.dim() != d {
        return Err(Error::DimensionMismatch(rho.dim(), d).into());
    }
    validate_state(&rho)?;
    Ok(rho)
}

fn common_dim(ms: &[Povm]) -> CliResult<usize> {
    let d = ms[0].dim();
    if let Some(m) = ms.iter().find(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch(m.dim(), d).into());
    }
    Ok(d)
}

fn certificate_value(c: &HeightResult) -> Value {
    json!({
        "h_opt": matrix_value(&c.h_opt),
        "dual_y": c.dual_y.iter().map(matrix_value).collect::<Vec<_>>(),
        "dual_value": num(c.dual_value),
        "gap": num(c.gap),
    })
}

fn verdict_value(v: &IncompatVerdict, with_certificate: bool) -> Value {
    let mut out = json!({
        "verdict": v.verdict.name(),
        "height": num(v.height),
        "threshold": num(v.threshold),
        "margin": num(v.margin),
        "boundary": v.boundary,
        "lengths": v.lengths,
    });
    if with_certificate {
        if let Some(c) = &v.certificate {
            out["certificate"] = certificate_value(c);
        }
    }
    out
}

fn height_of(images: &[HermitianMatrix], sdp_gap: f64) -> CliResult<HeightResult> {
    let r = match images {
        [x1, x2] => height_two_certificate(x1, x2)?,
        _ => height_sdp_with(images, sdp_gap, MAX_NEWTON)?,
    };
    if r.status == SolverStatus::MaxIter {
        return Err(Failure {
            code: EXIT_SOLVER,
            message: format!("height SDP hit the iteration cap with gap {:.3e}", r.gap),
        });
    }
    Ok(r)
}

fn fisher_images(ms: &[Povm], rho: &HermitianMatrix) -> CliResult<Vec<HermitianMatrix>> {
    let spec = MorphismSpec::fisher(rho)?;
    ms.iter()
        .map(|m| Ok(apply(&spec, m)?.matrix))
        .collect()
}

fn run(cli: &Cli) -> CliResult<Output> {
    if !(cli.sdp_gap > 0.0 && cli.psd_tol > 0.0) {
        return Err(invalid("tolerances must be positive"));
    }
    let obj = match &cli.command {
        Command::Validate { file } => {
            let p = read_povm(file)?;
            let tol = cli.psd_tol;
            json!({
                "valid": true,
                "dim": p.dim(),
                "outcomes": p.len(),
                "labels": p.labels(),
                "sharp": p.is_sharp(tol),
                "rank_one": p.is_rank_one(tol)?,
                "trivial": p.is_trivial(tol),
                "simple_length": p.simplify().length(),
            })
        }
        Command::Simplify { file } => {
            let s = read_povm(file)?.simplify();
            serde_json::to_value(PovmFile::from_povm(s.povm())).expect("plain data serializes")
        }
        Command::Order { a, b } => {
            let (pa, pb) = (read_povm(a)?, read_povm(b)?);
            let v = classify_order(&pa, &pb)?;
            let mut out = json!({ "relation": v.name() });
            match &v {
                OrderVerdict::LessEq(mu) => out["witness"] = stochastic_value(mu),
                OrderVerdict::GreaterEq(mu) => out["witness"] = stochastic_value(mu),
                OrderVerdict::Equivalent { forward, backward } => {
                    out["forward"] = stochastic_value(forward);
                    out["backward"] = stochastic_value(backward);
                }
                OrderVerdict::Incomparable => {}
            }
            out
        }
        Command::Fisher { file, rho, truncated } => {
            let p = read_povm(file)?;
            let rho = parse_rho(rho, p.dim())?;
            let spec = if *truncated {
                MorphismSpec::fisher_truncated(&rho)?
            } else {
                MorphismSpec::fisher(&rho)?
            };
            let f = apply(&spec, &p)?;
            json!({
                "morphism": spec.name(),
                "trace": num(f.trace()),
                "outcomes": f.outcomes,
                "skipped": f.skipped,
                "matrix": matrix_value(&f.matrix),
            })
        }
        Command::Height { files, rho, certificate } => {
            let ms = read_all(files)?;
            let rho = parse_rho(rho, common_dim(&ms)?)?;
            let r = height_of(&fisher_images(&ms, &rho)?, cli.sdp_gap)?;
            let mut out = json!({
                "value": num(r.value),
                "dual_value": num(r.dual_value),
                "gap": num(r.gap),
                "iterations": r.iterations,
            });
            if *certificate {
                out["certificate"] = certificate_value(&r);
            }
            out
        }
        Command::Incompat { files, rho, pgm, certificate } => {
            let ms = read_all(files)?;
            let rho = parse_rho(rho, common_dim(&ms)?)?;
            let v = if *pgm {
                pgm_criterion(&ms, &rho)?
            } else {
                let v = zhu_criterion(&ms, &rho)?;
                if let Some(c) = &v.certificate {
                    if c.status == SolverStatus::MaxIter {
                        return Err(Failure {
                            code: EXIT_SOLVER,
                            message: format!("height SDP hit the iteration cap with gap {:.3e}", c.gap),
                        });
                    }
                }
                v
            };
            let mut out = verdict_value(&v, *certificate);
            out["criterion"] = json!(if *pgm { "pgm" } else { "height" });
            out
        }
        Command::Joint { a, b } => {
            let ms = [read_povm(a)?, read_povm(b)?];
            common_dim(&ms)?;
            let r = joint_feasibility_many(&ms)?;
            let mut out = json!({
                "feasible": r.is_feasible(),
                "lambda": num(r.lambda),
                "gap": num(r.gap),
            });
            match &r.verdict {
                JointVerdict::Feasible(j) => {
                    out["joint"] = serde_json::to_value(PovmFile::from_povm(j)).expect("plain data serializes")
                }
                JointVerdict::Infeasible { upper_bound } => out["upper_bound"] = num(*upper_bound),
            }
            out
        }
        Command::Ft { etas, axes } => {
            let etas = parse_triple(etas)?;
            let axes: [[f64; 3]; 3] = parse_axes(axes)?;
            let ms = [
                QubitDichotomic::new(etas[0], axes[0])?,
                QubitDichotomic::new(etas[1], axes[1])?,
                QubitDichotomic::new(etas[2], axes[2])?,
            ];
            let a = ft_condition(&ms);
            let vec3 = |v: [f64; 3]| json!([num(v[0]), num(v[1]), num(v[2])]);
            json!({
                "compatible": a.compatible,
                "total_distance": num(a.total_distance),
                "bound": num(FT_BOUND),
                "margin": num(a.total_distance - FT_BOUND),
                "ft_point": vec3(a.ft_point),
                "points": a.points.iter().map(|&p| vec3(p)).collect::<Vec<_>>(),
            })
        }
        Command::Scan { scan } => return run_scan(scan).map(Output::Scan),
        Command::OutcomeBound { files, rho } => {
            let ms = read_all(files)?;
            let rho = parse_rho(rho, common_dim(&ms)?)?;
            let r = height_of(&fisher_images(&ms, &rho)?, cli.sdp_gap)?;
            json!({
                "bound": num(r.value),
                "min_outcomes": (r.value - 1e-6).ceil().max(1.0) as u64,
            })
        }
    };
    Ok(Output::Object(obj))
}

fn run_scan(scan: &ScanCommand) -> CliResult<ScanResult> {
    let r = match scan {
        ScanCommand::Fourier { d, grid, oracle } => scan_fourier(*d, *grid, *oracle)?,
        ScanCommand::QubitPair { axes, bloch, grid, oracle } => {
            scan_qubit_pair(parse_axes(axes)?, parse_triple(bloch)?, *grid, *oracle)?
        }
        ScanCommand::QubitTriple { axes, bloch, sweep, grid, oracle } => {
            let sweep = match sweep.as_str() {
                "equal" => TripleSweep::Equal,
                s => match s.strip_prefix("first:").map(parse_floats) {
                    Some(Ok(v)) if v.len() == 2 => TripleSweep::First { eta2: v[0], eta3: v[1] },
                    _ => return Err(invalid(format!("sweep must be `equal` or `first:ETA2,ETA3`, got {s:?}"))),
                },
            };
            scan_qubit_triple(parse_axes(axes)?, parse_triple(bloch)?, sweep, *grid, *oracle)?
        }
        ScanCommand::Planar { m, grid } => scan_planar(*m, *grid)?,
    };
    Ok(r)
}

fn scan_json(r: &ScanResult) -> Value {
    let records: Vec<Value> = r
        .records
        .iter()
        .map(|rec| {
            let mut m = Map::new();
            for (name, &p) in r.param_names.iter().zip(&rec.params) {
                m.insert(name.clone(), num(p));
            }
            m.insert("height".into(), num(rec.height));
            m.insert("zhu_verdict".into(), json!(rec.zhu_verdict.name()));
            m.insert("boundary".into(), json!(rec.boundary));
            m.insert("analytic_incompatible".into(), json!(rec.analytic_incompatible));
            m.insert("oracle_compatible".into(), json!(rec.oracle_compatible));
            Value::Object(m)
        })
        .collect();
    json!({
        "scan": r.name,
        "rho": r.metadata.rho,
        "dead_band": num(r.metadata.dead_band),
        "grid": r.metadata.grid,
        "zhu_incompatible": r.incompatible_count(),
        "analytic_incompatible": r.analytic_incompatible_count(),
        "records": records,
    })
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Top-level fields as a two-row CSV; nested values are JSON-encoded and quoted.
fn object_csv(v: &Value) -> String {
    let Value::Object(m) = v else {
        return format!("{}\n", scalar_text(v));
    };
    let quote = |s: String| {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s
        }
    };
    let header: Vec<String> = m.keys().cloned().collect();
    let row: Vec<String> = m.values().map(|x| quote(scalar_text(x))).collect();
    format!("{}\n{}\n", header.join(","), row.join(","))
}

fn object_human(v: &Value) -> String {
    let Value::Object(m) = v else {
        return format!("{}\n", scalar_text(v));
    };
    let width = m.keys().map(|k| k.len()).max().unwrap_or(0);
    m.iter()
        .map(|(k, x)| format!("{k:width$}  {}\n", scalar_text(x)))
        .collect()
}

fn render(out: &Output, format: Format) -> String {
    match (out, format) {
        (Output::Object(v), Format::Json) => format!("{}\n", serde_json::to_string_pretty(v).expect("valid JSON")),
        (Output::Object(v), Format::Csv) => object_csv(v),
        (Output::Object(v), Format::Human) => object_human(v),
        (Output::Scan(r), Format::Csv) => r.to_csv(),
        (Output::Scan(r), Format::Json) => format!("{}\n", serde_json::to_string_pretty(&scan_json(r)).expect("valid JSON")),
        (Output::Scan(r), Format::Human) => {
            let mut v = scan_json(r);
            v.as_object_mut().expect("object").remove("records");
            object_human(&v)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", render(&out, cli.format));
            ExitCode::SUCCESS
        }
        Err(f) => {
            if cli.format == Format::Json {
                println!("{}", json!({ "error": f.message, "exit_code": f.code }));
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
