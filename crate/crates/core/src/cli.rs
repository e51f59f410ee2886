//! The `dipeps` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::circuit::{check_encoding, encode, CircuitFile, DuCircuit};
use crate::conditions::{check_di, check_generalized, ConditionReport, DEFAULT_TOL};
use crate::contraction::{dense_expectation, local_expectation, two_point, Evaluation, Lattice, Options};
use crate::error::{Error, Result};
use crate::families::{
    complexity_tensors, controlled_dual_unitary, dark_blue_tensor, grey_tensor, light_green_tensor, orange_tensor,
    permutation_phase, plumbing, random_di, random_dual_unitary, sgs_tensor, three_qubit_gate, toric_code, u1_spin1,
    w_parametrized, w_z2,
};
use crate::geometry::{count_di_params, count_normal_peps_params, count_state_params, tangent_dimension, DEFAULT_RANK_TOL};
use crate::io::{read_json, read_lattice, read_tensor, to_json, GaugeFile, MatrixFile};
use crate::linalg::{c, C64};
use crate::parent_ham::{check_annihilation, deformed_terms, Torus};
use crate::tensors::{vectorize, PepsTensor, Site};
use crate::transfer::{block_spectrum, build_transfer, linspace, scan, Flux, Parity, WTilde};

/// Agreement required between an efficient result and the dense oracle.
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "dipeps", version, about = "Dual-isometric PEPS toolkit")]
pub struct Cli {
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, env = "DIPEPS_THREADS", default_value_t = 1)]
    pub threads: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a tensor of one of the constructor families.
    Make {
        family: Family,
        /// Inline JSON object or path to a JSON file.
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the isometric and dual-isometric conditions.
    Verify {
        tensor: PathBuf,
        #[arg(long)]
        gauge: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Single-site expectation value through the 1D channel reduction.
    Expval {
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        op: PathBuf,
        #[arg(long, value_parser = parse_site)]
        site: Site,
        #[arg(long)]
        oracle: bool,
        /// Contract even if the DI precondition fails.
        #[arg(long)]
        force: bool,
    },
    /// Two-point function on the reduced network.
    Corr2 {
        #[arg(long)]
        lattice: PathBuf,
        /// JSON array of two matrices.
        #[arg(long)]
        ops: PathBuf,
        #[arg(long, value_parser = parse_sites)]
        sites: (Site, Site),
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        force: bool,
    },
    /// Block spectra of the Z2 transfer operator on a ring of M sites.
    Transfer {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(short = 'M', long = "ring")]
        m: usize,
        #[arg(long, default_value = "0")]
        flux: FluxArg,
    },
    /// Topological diagnostics on a k x k grid of [0, 1]^2, as CSV.
    ScanTopo {
        #[arg(long)]
        grid: usize,
        #[arg(short = 'M', long = "ring", default_value_t = 4)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerical tangent dimension of the DI variety at a tensor.
    TangentDim {
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
    /// Deformed toric-code terms annihilate the Z2 state on a torus.
    ParentCheck {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_parser = parse_pair, default_value = "2,2")]
        torus: (usize, usize),
        #[arg(long, default_value_t = ORACLE_TOL)]
        tol: f64,
    },
    /// Encode a dual-unitary circuit into a post-selected DI-PEPS.
    EncodeCircuit {
        #[arg(long)]
        circuit: PathBuf,
        /// Contract the encoding and compare against the circuit simulator.
        #[arg(long)]
        check: bool,
    },
    /// Parameter counts of the DI manifold, normal PEPS and states.
    Params {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        chi: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Family {
    PermutationPhase,
    ThreeQubit,
    ControlledDualUnitary,
    RandomDi,
    PlumbingZ2,
    Plumbing,
    ToricCode,
    Sgs,
    U1Spin1,
    Orange,
    LightGreen,
    DarkBlue,
    Grey,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FluxArg {
    #[value(name = "0")]
    Zero,
    #[value(name = "pi")]
    Pi,
}

fn parse_usizes(s: &str, n: usize) -> std::result::Result<Vec<usize>, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated integers, got {}", v.len()));
    }
    Ok(v)
}

fn parse_site(s: &str) -> std::result::Result<Site, String> {
    let v = parse_usizes(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    parse_site(s)
}

fn parse_sites(s: &str) -> std::result::Result<(Site, Site), String> {
    let v = parse_usizes(s, 4)?;
    Ok(((v[0], v[1]), (v[2], v[3])))
}

/// Outcome of a subcommand: text for stdout and whether a numerical check failed.
struct Output {
    text: String,
    failed: bool,
}

impl Output {
    fn json(v: &impl Serialize, failed: bool) -> Result<Self> {
        Ok(Self { text: to_json(v)?, failed })
    }
}

/// Parse `argv` (program name first), run, print, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{}", out.text.trim_end());
            if out.failed {
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn residuals(r: &ConditionReport) -> Value {
    json!({ "iso": r.residual_iso, "dual": r.residual_dual })
}

fn lattice_residuals(lat: &Lattice) -> Value {
    json!({ "di": lat.di_residual() })
}

fn evaluation_json(ev: &Evaluation, lat: &Lattice, oracle: Option<C64>) -> (Value, bool) {
    let mut v = json!({
        "value": [ev.value.re, ev.value.im],
        "method": ev.method,
        "trusted": ev.trusted,
        "residuals": lattice_residuals(lat),
        "cost": { "ops": ev.ops as f64, "max_intermediate": ev.max_intermediate as f64 },
    });
    let mut failed = false;
    if let Some(o) = oracle {
        let diff = (o - ev.value).norm();
        failed = !(diff <= ORACLE_TOL);
        v["oracle"] = json!({ "value": [o.re, o.im], "abs_diff": diff, "tol": ORACLE_TOL, "pass": !failed });
    }
    (v, failed)
}

fn read_op(path: &Path, lat: &Lattice, s: Site) -> Result<crate::tensors::ObservableVec> {
    let m = read_json::<MatrixFile>(path)?.to_mat()?;
    vectorize(&m, &[s], &[lat.phys_dim(s)?])
}

fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Params { d, chi } => {
            if *d == 0 || *chi == 0 {
                return Err(Error::InvalidParameter("d and chi must be positive".into()));
            }
            Output::json(
                &json!({
                    "di": count_di_params(*d, *chi),
                    "normal_peps": count_normal_peps_params(*d, *chi),
                    "state": count_state_params(*d, *chi),
                }),
                false,
            )
        }
        Command::Make { family, params, out } => {
            let p: Value = match params {
                None => json!({}),
                Some(s) if s.trim_start().starts_with('{') => serde_json::from_str(s)?,
                Some(path) => read_json(Path::new(path))?,
            };
            let t = make(*family, p, cli.seed)?;
            std::fs::write(out, to_json(&t.to_file())?)?;
            let rep = check_di(&t, DEFAULT_TOL);
            Output::json(
                &json!({ "d": t.d(), "chi": t.chi(), "out": out, "residuals": residuals(&rep), "pass": rep.pass }),
                false,
            )
        }
        Command::Verify { tensor, gauge, tol } => {
            if !(*tol > 0.0) {
                return Err(Error::InvalidParameter("tolerance must be positive".into()));
            }
            let t = read_tensor(tensor)?;
            let rep = match gauge {
                None => check_di(&t, *tol),
                Some(g) => check_generalized(&t, &read_json::<GaugeFile>(g)?.to_triple()?, *tol)?,
            };
            Output::json(
                &json!({
                    "residual_iso": rep.residual_iso,
                    "residual_dual": rep.residual_dual,
                    "tol": rep.tol,
                    "generalized": gauge.is_some(),
                    "pass": rep.pass,
                }),
                !rep.pass,
            )
        }
        Command::Expval { lattice, op, site, oracle, force } => {
            let lat = read_lattice(lattice)?;
            let o = read_op(op, &lat, *site)?;
            let ev = local_expectation(&lat, &o, &Options { force: *force, ..Options::default() })?;
            let reference = if *oracle { Some(dense_expectation(&lat, std::slice::from_ref(&o))?) } else { None };
            let (v, failed) = evaluation_json(&ev, &lat, reference);
            Output::json(&v, failed)
        }
        Command::Corr2 { lattice, ops, sites, oracle, force } => {
            let lat = read_lattice(lattice)?;
            let mats: Vec<MatrixFile> = read_json(ops)?;
            if mats.len() != 2 {
                return Err(Error::InvalidParameter(format!("expected two operators, got {}", mats.len())));
            }
            let o1 = vectorize(&mats[0].to_mat()?, &[sites.0], &[lat.phys_dim(sites.0)?])?;
            let o2 = vectorize(&mats[1].to_mat()?, &[sites.1], &[lat.phys_dim(sites.1)?])?;
            let ev = two_point(&lat, &o1, &o2, &Options { force: *force, ..Options::default() })?;
            let reference = if *oracle { Some(dense_expectation(&lat, &[o1, o2])?) } else { None };
            let (v, failed) = evaluation_json(&ev, &lat, reference);
            Output::json(&v, failed)
        }
        Command::Transfer { alpha, beta, m, flux } => {
            let flux = match flux {
                FluxArg::Zero => Flux::Zero,
                FluxArg::Pi => Flux::Pi,
            };
            let wt = WTilde::new(*alpha, *beta)?;
            let op = build_transfer(&wt, *m, flux)?;
            let rep = check_di(&plumbing(&w_z2(*alpha, *beta)?), DEFAULT_TOL);
            Output::json(
                &json!({
                    "alpha": alpha,
                    "beta": beta,
                    "m": m,
                    "flux": flux,
                    "residuals": residuals(&rep),
                    "even": block_spectrum(&op, Parity::Even, *m)?,
                    "odd": block_spectrum(&op, Parity::Odd, *m)?,
                }),
                false,
            )
        }
        Command::ScanTopo { grid, m, out } => {
            if *grid == 0 {
                return Err(Error::InvalidParameter("grid must be at least 1".into()));
            }
            let axis = linspace(0.0, 1.0, *grid);
            let rows = scan(&axis, &axis, *m)?;
            let mut w = csv::Writer::from_writer(vec![]);
            w.write_record(["alpha", "beta", "M", "lambda_same_flux", "lambda_flux_shift", "degeneracy", "class"])
                .map_err(csv_err)?;
            for r in &rows {
                let class = serde_json::to_value(r.class)?;
                w.write_record([
                    r.alpha.to_string(),
                    r.beta.to_string(),
                    r.m.to_string(),
                    r.lambda_even.max(r.lambda_odd).to_string(),
                    r.lambda_flux_shift.to_string(),
                    r.degeneracy.to_string(),
                    class.as_str().unwrap_or_default().to_string(),
                ])
                .map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
            let text = String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))?;
            match out {
                Some(p) => {
                    std::fs::write(p, &text)?;
                    Output::json(&json!({ "rows": rows.len(), "out": p }), false)
                }
                None => Ok(Output { text, failed: false }),
            }
        }
        Command::TangentDim { tensor, rank_tol } => {
            let t = read_tensor(tensor)?;
            let rep = tangent_dimension(&t, *rank_tol)?;
            let mut v = serde_json::to_value(&rep)?;
            v["residuals"] = residuals(&check_di(&t, DEFAULT_TOL));
            Output::json(&v, false)
        }
        Command::ParentCheck { alpha, beta, torus, tol } => {
            let torus = Torus::new(torus.0, torus.1)?;
            let terms = deformed_terms(*alpha, *beta, torus)?;
            let rep = check_annihilation(&terms, *alpha, *beta, torus)?;
            let locality: Vec<usize> = terms.iter().map(|t| t.locality()).collect();
            let di = check_di(&plumbing(&w_z2(*alpha, *beta)?), DEFAULT_TOL);
            let failed = !(rep.max_residual <= *tol);
            Output::json(
                &json!({
                    "max_residual": rep.max_residual,
                    "per_term": rep.per_term,
                    "overlap": rep.overlap,
                    "locality": locality,
                    "residuals": residuals(&di),
                    "pass": !failed,
                }),
                failed,
            )
        }
        Command::EncodeCircuit { circuit, check } => {
            let circ = DuCircuit::from_file(&read_json::<CircuitFile>(circuit)?)?;
            if *check {
                let chk = check_encoding(&circ, None)?;
                let failed = !(chk.fidelity >= 1.0 - ORACLE_TOL);
                let mut v = serde_json::to_value(&chk)?;
                v["pass"] = json!(!failed);
                Output::json(&v, failed)
            } else {
                let enc = encode(&circ, None)?;
                let pattern: Vec<Value> =
                    enc.pattern.allowed.iter().map(|(s, o)| json!({ "x": s.0, "y": s.1, "outcomes": o })).collect();
                Output::json(
                    &json!({
                        "n": enc.lattice.n(),
                        "m": enc.lattice.m(),
                        "layout": enc.layout,
                        "readout": enc.readout,
                        "postselect": pattern,
                        "residuals": lattice_residuals(&enc.lattice),
                    }),
                    false,
                )
            }
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PermutationParams {
    #[serde(default = "two")]
    chi: usize,
    /// [re, im] per phase; random unit phases when absent.
    phases: Option<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThreeQubitParams {
    q: [f64; 3],
    j: [f64; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CduParams {
    #[serde(default = "two")]
    d: usize,
    gates: Option<Vec<MatrixFile>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomDiParams {
    #[serde(default = "two")]
    d: usize,
    #[serde(default = "two")]
    chi: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaBeta {
    alpha: f64,
    beta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlumbingParams {
    alpha: f64,
    beta: f64,
    theta: [f64; 8],
    phi: [f64; 16],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SgsParams {
    d: usize,
    chi: usize,
    u: MatrixFile,
    v: MatrixFile,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct GateParams {
    gate: Option<MatrixFile>,
    isometry: Option<MatrixFile>,
}

fn two() -> usize {
    2
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

fn params<T: serde::de::DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::InvalidParameter(format!("params: {e}")))
}

/// Construct a family member; randomness, where a family needs it, comes from `seed`.
pub fn make(family: Family, p: Value, seed: u64) -> Result<PepsTensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match family {
        Family::PermutationPhase => {
            let pp: PermutationParams = params(p)?;
            let phases: Vec<C64> = match pp.phases {
                Some(v) => v.iter().map(|z| c(z[0], z[1])).collect(),
                None => {
                    use rand::Rng;
                    (0..pp.chi.pow(3)).map(|_| C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)).collect()
                }
            };
            permutation_phase(pp.chi, &phases, None)
        }
        Family::ThreeQubit => {
            let tq: ThreeQubitParams = params(p)?;
            three_qubit_gate(tq.q, tq.j, None)
        }
        Family::ControlledDualUnitary => {
            let cp: CduParams = params(p)?;
            let gates = match cp.gates {
                Some(g) => g.iter().map(|m| m.to_mat()).collect::<Result<Vec<_>>>()?,
                None => (0..cp.d).map(|_| random_dual_unitary(&mut rng)).collect(),
            };
            controlled_dual_unitary(&gates, None)
        }
        Family::RandomDi => {
            let rp: RandomDiParams = params(p)?;
            random_di(rp.d, rp.chi, seed)
        }
        Family::PlumbingZ2 => {
            let ab: AlphaBeta = params(p)?;
            Ok(plumbing(&w_z2(ab.alpha, ab.beta)?))
        }
        Family::Plumbing => {
            let pp: PlumbingParams = params(p)?;
            Ok(plumbing(&w_parametrized(pp.alpha, pp.beta, pp.theta, pp.phi)))
        }
        Family::ToricCode => {
            params::<NoParams>(p)?;
            Ok(toric_code())
        }
        Family::Sgs => {
            let sp: SgsParams = params(p)?;
            sgs_tensor(&sp.u.to_mat()?, &sp.v.to_mat()?, sp.d, sp.chi)
        }
        Family::U1Spin1 => {
            params::<NoParams>(p)?;
            let gates = std::array::from_fn(|_| random_dual_unitary(&mut rng));
            u1_spin1(&gates)
        }
        Family::Orange | Family::DarkBlue => {
            let gp: GateParams = params(p)?;
            if matches!(family, Family::Orange) {
                let g = match gp.gate {
                    Some(m) => m.to_mat()?,
                    None => random_dual_unitary(&mut rng),
                };
                orange_tensor(&g)
            } else {
                match gp.isometry {
                    Some(m) => dark_blue_tensor(&m.to_mat()?),
                    None => Ok(complexity_tensors(&crate::linalg::swap_gate(2), None)?.dark_blue),
                }
            }
        }
        Family::LightGreen => Ok(light_green_tensor()),
        Family::Grey => Ok(grey_tensor()),
    }
}
