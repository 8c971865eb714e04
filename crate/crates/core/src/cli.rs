//! Command-line front end: JSON tensors in, JSON reports and CSV point lists out.
//!
//! Exit codes: 0 on success, 2 for invalid input or arguments, 3 when a
//! numerical kernel fails.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::io::{self, fmt_f64, IoError};
use crate::numrange::{numerical_range, DEFAULT_THETAS};
use crate::spectral::{self, DEFAULT_TOL};
use crate::tensor::DenseTensor;
use crate::winverse::{
    mp_inverse, penrose_residuals, wmp_inverse, wmp_inverse_via_congruence, wmp_limit, wsvd, Side, Weight,
    WeightPair,
};
use crate::wnorms::norm_report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (kernels: jacobi-svd 1, jacobi-eigh 1, hessenberg-qr 1, householder-qr 1)"
);

#[derive(Debug, Parser)]
#[command(name = "einrange", version = VERSION, about = "Weighted Moore-Penrose inverses and numerical ranges of tensors")]
struct Cli {
    /// Seed for random sampling.
    #[arg(long, global = true, env = "EINRANGE_SEED", default_value_t = 0)]
    seed: u64,
    /// Record wall-clock time in reports (makes them run-dependent).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct WeightArgs {
    /// Row-group weight M (identity when omitted).
    #[arg(long = "weight-m")]
    weight_m: Option<PathBuf>,
    /// Column-group weight N (identity when omitted).
    #[arg(long = "weight-n")]
    weight_n: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weighted SVD; writes U.json, S.json, V.json and report.json.
    Wsvd {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Weighted Moore-Penrose inverse.
    Wpinv {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long)]
        out: PathBuf,
        /// Report the four Penrose residuals.
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = 1e-10)]
        check_tol: f64,
        /// algorithm2 | congruence | limit:LAMBDA
        #[arg(long, default_value = "algorithm2")]
        via: Route,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Moore-Penrose inverse.
    Pinv {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = 1e-10)]
        check_tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Eigenvalues of an even-order square tensor.
    Eig {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Spectral and weighted operator norms with the extreme (M,N) singular values.
    Norms {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        /// Tensor whose NM norm is reported (defaults to the weighted inverse).
        #[arg(long)]
        inverse: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Weighted self-conjugate / normal (weight N) and weighted EP (M, N) tests.
    Classify {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Numerical range boundary and samples as CSV.
    Numrange {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, value_enum, default_value_t = Operand::A)]
        of: Operand,
        #[arg(long, default_value_t = DEFAULT_THETAS)]
        thetas: usize,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        /// Output prefix; files are PREFIX_<operand>_boundary.csv and friends.
        #[arg(long)]
        csv: String,
        /// Distance from the boundary inside which zero containment is uncertified.
        #[arg(long, default_value_t = 1e-3)]
        band: f64,
        /// Dilation used for hull membership verdicts.
        #[arg(long, default_value_t = 1e-6)]
        contain_tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Operand {
    A,
    Wpinv,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Route {
    Algorithm2,
    Congruence,
    Limit(f64),
}

impl FromStr for Route {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "algorithm2" => Ok(Route::Algorithm2),
            "congruence" => Ok(Route::Congruence),
            _ => {
                let lam = s
                    .strip_prefix("limit:")
                    .ok_or_else(|| format!("unknown route {s:?}; expected algorithm2, congruence or limit:LAMBDA"))?;
                let v: f64 = lam.parse().map_err(|_| format!("invalid lambda {lam:?}"))?;
                if v > 0.0 && v.is_finite() {
                    Ok(Route::Limit(v))
                } else {
                    Err(format!("lambda must be positive, got {lam}"))
                }
            }
        }
    }
}

impl Route {
    fn label(self) -> String {
        match self {
            Route::Algorithm2 => "algorithm2".into(),
            Route::Congruence => "congruence".into(),
            Route::Limit(l) => format!("limit:{l:e}"),
        }
    }
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Numerical(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn lib_failure(context: &str, e: Error) -> Failure {
    let msg = format!("{context}: {e}");
    if e.is_numerical() {
        Failure::Numerical(msg)
    } else {
        Failure::Invalid(msg)
    }
}

trait Context<T> {
    fn ctx(self, context: &str) -> Result<T, Failure>;
}

impl<T> Context<T> for Result<T, Error> {
    fn ctx(self, context: &str) -> Result<T, Failure> {
        self.map_err(|e| lib_failure(context, e))
    }
}

#[derive(Debug, Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct RunReport {
    command: &'static str,
    version: &'static str,
    seed: u64,
    inputs: BTreeMap<&'static str, InputDigest>,
    tolerances: BTreeMap<&'static str, f64>,
    residuals: BTreeMap<String, f64>,
    outputs: Vec<String>,
    results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_s: Option<f64>,
}

struct Session {
    report: RunReport,
    started: Instant,
    timing: bool,
}

impl Session {
    fn new(command: &'static str, seed: u64, timing: bool) -> Self {
        Self {
            report: RunReport {
                command,
                version: VERSION,
                seed,
                inputs: BTreeMap::new(),
                tolerances: BTreeMap::new(),
                residuals: BTreeMap::new(),
                outputs: Vec::new(),
                results: Value::Null,
                wall_time_s: None,
            },
            started: Instant::now(),
            timing,
        }
    }

    fn load(&mut self, role: &'static str, path: &Path) -> Result<DenseTensor, Failure> {
        let (t, sha256) = io::read_tensor(path)?;
        self.report.inputs.insert(
            role,
            InputDigest {
                path: path.display().to_string(),
                sha256,
            },
        );
        Ok(t)
    }

    fn load_weight(&mut self, which: &'static str, path: Option<&Path>, shape: &[usize]) -> Result<Weight, Failure> {
        let Some(path) = path else {
            return Ok(Weight::identity(shape));
        };
        let t = self.load(which, path)?;
        if t.row_shape() != shape || t.col_shape() != shape {
            return Err(Failure::Invalid(format!(
                "{}: weight {which} has shape {:?}x{:?}, expected {shape:?}x{shape:?}",
                path.display(),
                t.row_shape(),
                t.col_shape()
            )));
        }
        Weight::new(which, t).ctx(&path.display().to_string())
    }

    fn load_weights(&mut self, args: &WeightArgs, a: &DenseTensor) -> Result<WeightPair, Failure> {
        let m = self.load_weight("M", args.weight_m.as_deref(), a.row_shape())?;
        let n = self.load_weight("N", args.weight_n.as_deref(), a.col_shape())?;
        Ok(WeightPair::from_weights(m, n))
    }

    fn write_tensor(&mut self, path: &Path, t: &DenseTensor) -> Result<(), Failure> {
        io::write_tensor(path, t)?;
        self.report.outputs.push(path.display().to_string());
        Ok(())
    }

    fn write_text(&mut self, path: &Path, text: &str) -> Result<(), Failure> {
        io::write_text(path, text)?;
        self.report.outputs.push(path.display().to_string());
        Ok(())
    }

    fn finish(mut self, path: Option<&Path>) -> Result<(), Failure> {
        if self.timing {
            self.report.wall_time_s = Some(self.started.elapsed().as_secs_f64());
        }
        if let Some(path) = path {
            io::write_text(path, &io::to_json(&self.report))?;
        }
        Ok(())
    }
}

/// Rounds to 12 significant digits and prints the shortest representation.
fn short(x: f64) -> String {
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r}")
}

fn format_complex(z: Complex64, scale: f64) -> String {
    let cutoff = 1e-12 * scale.max(1.0);
    let re = if z.re.abs() < cutoff { 0.0 } else { z.re };
    let im = if z.im.abs() < cutoff { 0.0 } else { z.im };
    let sign = if im < 0.0 { '-' } else { '+' };
    format!("{}{}{}i", short(re), sign, short(im.abs()))
}

fn complex_list(values: &[Complex64]) -> Value {
    Value::Array(values.iter().map(|z| json!([z.re, z.im])).collect())
}

fn penrose(session: &mut Session, a: &DenseTensor, x: &DenseTensor, w: &WeightPair, tol: f64) -> Result<bool, Failure> {
    let r = penrose_residuals(a, x, w).ctx("penrose residuals")?;
    for (k, v) in r.iter().enumerate() {
        session.report.residuals.insert(format!("penrose_{}", k + 1), *v);
    }
    session.report.tolerances.insert("check_tol", tol);
    Ok(r.iter().all(|&v| v <= tol))
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let seed = cli.seed;
    let timing = cli.timing;
    match cli.command {
        Command::Wsvd { input, weights, out_dir } => {
            let mut s = Session::new("wsvd", seed, timing);
            let a = s.load("A", &input)?;
            let w = s.load_weights(&weights, &a)?;
            let f = wsvd(&a, &w).ctx("wsvd")?;
            s.write_tensor(&out_dir.join("U.json"), &f.u)?;
            s.write_tensor(&out_dir.join("S.json"), &f.s_tensor())?;
            s.write_tensor(&out_dir.join("V.json"), &f.v)?;
            let (ou, ov) = f.orthogonality_residuals(&w);
            let recon = f.reconstruction_residual(&a);
            s.report.residuals.insert("reconstruction".into(), recon);
            s.report.residuals.insert("orthogonality_u".into(), ou);
            s.report.residuals.insert("orthogonality_v".into(), ov);
            s.report.results = json!({ "s": f.s, "rank": f.rank });
            let line: Vec<String> = f.s.iter().map(|&x| short(x)).collect();
            let _ = writeln!(out, "rank {}; s = [{}]", f.rank, line.join(", "));
            let _ = writeln!(
                out,
                "residuals: reconstruction {}, U^H M U - I {}, V^H N^-1 V - I {}",
                fmt_f64(recon),
                fmt_f64(ou),
                fmt_f64(ov)
            );
            let report = out_dir.join("report.json");
            s.report.outputs.push(report.display().to_string());
            s.finish(Some(&report))
        }
        Command::Wpinv {
            input,
            weights,
            out: out_path,
            check,
            check_tol,
            via,
            report,
        } => {
            let mut s = Session::new("wpinv", seed, timing);
            let a = s.load("A", &input)?;
            let w = s.load_weights(&weights, &a)?;
            let x = match via {
                Route::Algorithm2 => wmp_inverse(&a, &w).ctx("wmp_inverse")?,
                Route::Congruence => wmp_inverse_via_congruence(&a, &w).ctx("wmp_inverse")?,
                Route::Limit(lam) => wmp_limit(&a, &w, lam, Side::Left).ctx("wmp_limit")?,
            };
            let mut results = serde_json::Map::new();
            results.insert("route".into(), json!(via.label()));
            if via != Route::Algorithm2 {
                let reference = wmp_inverse(&a, &w).ctx("wmp_inverse")?;
                let dev = x.max_abs_diff(&reference);
                s.report.residuals.insert("route_deviation".into(), dev);
                let _ = writeln!(out, "max |difference| from algorithm2: {}", fmt_f64(dev));
            }
            if check {
                let ok = penrose(&mut s, &a, &x, &w, check_tol)?;
                results.insert("penrose_ok".into(), json!(ok));
                let r: Vec<String> = (1..=4).map(|k| fmt_f64(s.report.residuals[&format!("penrose_{k}")])).collect();
                let _ = writeln!(out, "penrose residuals: {}", r.join(", "));
            }
            s.write_tensor(&out_path, &x)?;
            s.report.results = Value::Object(results);
            let _ = writeln!(out, "wrote {}", out_path.display());
            s.finish(report.as_deref())
        }
        Command::Pinv {
            input,
            out: out_path,
            check,
            check_tol,
            report,
        } => {
            let mut s = Session::new("pinv", seed, timing);
            let a = s.load("A", &input)?;
            let x = mp_inverse(&a).ctx("mp_inverse")?;
            if check {
                let w = WeightPair::identity(a.row_shape(), a.col_shape());
                let ok = penrose(&mut s, &a, &x, &w, check_tol)?;
                s.report.results = json!({ "penrose_ok": ok });
            }
            s.write_tensor(&out_path, &x)?;
            let _ = writeln!(out, "wrote {}", out_path.display());
            s.finish(report.as_deref())
        }
        Command::Eig { input, report } => {
            let mut s = Session::new("eig", seed, timing);
            let a = s.load("A", &input)?;
            let spec = spectral::eigenvalues(&a).ctx(&input.display().to_string())?;
            let scale = spec.radius();
            let line: Vec<String> = spec.values.iter().map(|&z| format_complex(z, scale)).collect();
            let _ = writeln!(out, "{}", line.join(", "));
            s.report.results = json!({ "eigenvalues": complex_list(&spec.values), "spectral_radius": scale });
            s.finish(report.as_deref())
        }
        Command::Norms {
            input,
            weights,
            inverse,
            report,
        } => {
            let mut s = Session::new("norms", seed, timing);
            let a = s.load("A", &input)?;
            let w = s.load_weights(&weights, &a)?;
            let x = match inverse {
                Some(p) => s.load("inverse", &p)?,
                None => wmp_inverse(&a, &w).ctx("wmp_inverse")?,
            };
            let r = norm_report(&a, &x, &w).ctx("norms")?;
            let _ = writeln!(
                out,
                "spectral = {}, weighted_mn = {}, weighted_nm = {}, mu_max = {}, mu_min = {}",
                short(r.spectral),
                short(r.weighted_mn),
                short(r.weighted_nm),
                short(r.mu_max),
                short(r.mu_min)
            );
            s.report.results = serde_json::to_value(r).expect("plain struct");
            s.finish(report.as_deref())
        }
        Command::Classify {
            input,
            weights,
            tol,
            report,
        } => {
            let mut s = Session::new("classify", seed, timing);
            let a = s.load("A", &input)?;
            if !a.is_square() {
                return Err(Failure::Invalid(format!(
                    "{}: classify needs an even-order square tensor",
                    input.display()
                )));
            }
            let w = s.load_weights(&weights, &a)?;
            let sc = spectral::self_conjugate_residual(&a, w.n()).ctx("classify")?;
            let nr = spectral::normal_residual(&a, w.n()).ctx("classify")?;
            let ep = spectral::ep_residual(&a, &w).ctx("classify")?;
            s.report.tolerances.insert("tol", tol);
            s.report.residuals.insert("self_conjugate".into(), sc);
            s.report.residuals.insert("weighted_normal".into(), nr);
            s.report.residuals.insert("weighted_ep".into(), ep);
            s.report.results = json!({
                "self_conjugate": sc <= tol,
                "weighted_normal": nr <= tol,
                "weighted_ep": ep <= tol,
            });
            let _ = writeln!(
                out,
                "self_conjugate={} ({}), weighted_normal={} ({}), weighted_ep={} ({})",
                sc <= tol,
                fmt_f64(sc),
                nr <= tol,
                fmt_f64(nr),
                ep <= tol,
                fmt_f64(ep)
            );
            s.finish(report.as_deref())
        }
        Command::Numrange {
            input,
            weights,
            of,
            thetas,
            samples,
            csv,
            band,
            contain_tol,
        } => {
            let mut s = Session::new("numrange", seed, timing);
            let a = s.load("A", &input)?;
            if !a.is_square() {
                return Err(Failure::Invalid(format!(
                    "{}: numrange needs an even-order square tensor",
                    input.display()
                )));
            }
            let w = s.load_weights(&weights, &a)?;
            s.report.tolerances.insert("band", band);
            s.report.tolerances.insert("contain_tol", contain_tol);
            let mut operands: Vec<(&str, DenseTensor)> = Vec::new();
            if of != Operand::Wpinv {
                operands.push(("a", a.clone()));
            }
            if of == Operand::Both {
                operands.push(("pinv", mp_inverse(&a).ctx("mp_inverse")?));
            }
            if of != Operand::A {
                operands.push(("wpinv", wmp_inverse(&a, &w).ctx("wmp_inverse")?));
            }
            let mut results = serde_json::Map::new();
            let mut zero = BTreeMap::new();
            for (name, t) in &operands {
                let nr = numerical_range(t, thetas, samples, seed).ctx("numrange")?;
                let boundary_path = PathBuf::from(format!("{csv}_{name}_boundary.csv"));
                s.write_text(&boundary_path, &io::boundary_csv(&nr.boundary))?;
                if samples > 0 {
                    let samples_path = PathBuf::from(format!("{csv}_{name}_samples.csv"));
                    s.write_text(&samples_path, &io::samples_csv(&nr.samples))?;
                }
                let hull = nr.hull();
                let origin = Complex64::new(0.0, 0.0);
                let contains_zero = hull.contains(origin, contain_tol);
                let certified = nr.certified_contains(origin, band);
                let eig = spectral::eigenvalues(t).ctx("eigenvalues")?;
                let eig_distance = eig.values.iter().map(|&z| hull.distance(z)).fold(0.0, f64::max);
                zero.insert(*name, contains_zero);
                let _ = writeln!(
                    out,
                    "{name}: radius {}, contains 0: {contains_zero}, eigenvalues inside: {}",
                    short(nr.radius),
                    eig_distance <= contain_tol
                );
                results.insert(
                    (*name).to_string(),
                    json!({
                        "radius": nr.radius,
                        "contains_zero": contains_zero,
                        "zero_certified": certified,
                        "zero_support_margin": nr.support_margin(origin),
                        "eigenvalues": complex_list(&eig.values),
                        "eigenvalues_inside": eig_distance <= contain_tol,
                        "eigenvalue_hull_distance": eig_distance,
                    }),
                );
            }
            if of == Operand::Both {
                let agree = zero["a"] == zero["wpinv"] && zero["a"] == zero["pinv"];
                results.insert(
                    "zero_containment".into(),
                    json!({ "a": zero["a"], "pinv": zero["pinv"], "wpinv": zero["wpinv"], "agree": agree }),
                );
                let _ = writeln!(out, "zero containment agrees: {agree}");
            }
            results.insert("thetas".into(), json!(thetas));
            results.insert("samples".into(), json!(samples));
            s.report.results = Value::Object(results);
            let report = PathBuf::from(format!("{csv}_report.json"));
            s.report.outputs.push(report.display().to_string());
            s.finish(Some(&report))
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_INVALID
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(err, "numerical failure: {msg}");
            EXIT_NUMERICAL
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_formatting() {
        assert_eq!(format_complex(Complex64::new(2.0, 0.0), 2.0), "2+0i");
        assert_eq!(format_complex(Complex64::new(1e-17, -1e-16), 2.0), "0+0i");
        assert_eq!(format_complex(Complex64::new(0.5, -1.25), 1.0), "0.5-1.25i");
        assert_eq!(short(1.0000000000000002), "1");
        assert_eq!(short(-0.0), "0");
    }

    #[test]
    fn route_parsing() {
        assert_eq!("limit:1e-8".parse::<Route>().unwrap(), Route::Limit(1e-8));
        assert_eq!("congruence".parse::<Route>().unwrap(), Route::Congruence);
        assert!("limit:0".parse::<Route>().is_err());
        assert!("limit:x".parse::<Route>().is_err());
        assert!("svd".parse::<Route>().is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn version_and_usage_errors() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["einrange", "--version"], &mut out, &mut err), EXIT_OK);
        assert!(String::from_utf8(out).unwrap().contains("jacobi-svd"));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["einrange", "frobnicate"], &mut out, &mut err), EXIT_INVALID);
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["einrange", "eig", "--input", "/nonexistent/a.json"], &mut out, &mut err), EXIT_INVALID);
        assert!(String::from_utf8(err).unwrap().contains("/nonexistent/a.json"));
    }
}
