//! The `geninv` command line: generalized inverses and decompositions of
//! matrices read from CSV or JSON files, and the conformance report.

pub mod equations;
pub mod matrix_file;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use geninv::classical::{
    bt_inverse, core_ep, core_inverse, drazin, group_inverse, qbt_inverse,
};
use geninv::decomposition::{core_ep_decompose, weighted_core_ep_decompose};
use geninv::exact::{self, RationalMatrix};
use geninv::projectors::{matrix_index, pinv, spectral_norm};
use geninv::tolerance::{DEFAULT_RANK_RTOL, DEFAULT_RESIDUAL_ATOL};
use geninv::verifier::{run_random_corpus, run_reference_examples};
use geninv::weighted::{
    weighted_bt, weighted_core_ep, weighted_drazin, weighted_qbt, WeightedPair,
};
use geninv::{ComplexMatrix, ToleranceModel};

use crate::equations::{residuals, Exact, Float, Problem};
use crate::matrix_file::{
    exact_csv, exact_json, float_csv, float_json, format_f64, Format, MatrixFile, ParseError,
};

/// Environment variable overriding the default residual tolerance.
pub const TOL_ENV: &str = "GENINV_TOL";

#[derive(Debug, Parser)]
#[command(name = "geninv", version, about = "Generalized inverses of complex matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a generalized inverse and print it in the input's format.
    Inverse(InverseArgs),
    /// Print the blocks of a core-EP or weighted core-EP decomposition.
    Decompose(DecomposeArgs),
    /// Run the conformance checks; exits 5 if any fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InverseKind {
    Pinv,
    Drazin,
    Group,
    Core,
    CoreEp,
    Bt,
    Qbt,
    Wdrazin,
    WcoreEp,
    Wbt,
    Wqbt,
}

impl InverseKind {
    pub fn weighted(self) -> bool {
        matches!(
            self,
            InverseKind::Wdrazin | InverseKind::WcoreEp | InverseKind::Wbt | InverseKind::Wqbt
        )
    }

    pub fn takes_q(self) -> bool {
        matches!(self, InverseKind::Qbt | InverseKind::Wqbt)
    }

    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Args)]
pub struct InverseArgs {
    #[arg(value_enum)]
    pub kind: InverseKind,
    /// Matrix A (`.json` for JSON, CSV otherwise).
    pub a: PathBuf,
    /// Weight W, required by the weighted kinds.
    pub w: Option<PathBuf>,
    /// Projector power for qbt and wqbt.
    #[arg(long)]
    pub q: Option<usize>,
    /// Exact rational arithmetic; fractions in the input are kept exactly.
    #[arg(long)]
    pub exact: bool,
    /// Append the residuals of the defining equations.
    #[arg(long)]
    pub verify: bool,
    /// Residual tolerance (default from GENINV_TOL, else 1e-10).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecompositionKind {
    CoreEp,
    WeightedCoreEp,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(value_enum)]
    pub kind: DecompositionKind,
    pub a: PathBuf,
    /// Weight W, required by weighted-core-ep.
    pub w: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scope {
    /// The fixed fraction-valued examples and the two fixed pairs.
    Paper,
    /// A seeded random corpus of planted-index pairs.
    Corpus,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub scope: Scope,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Largest dimension of a corpus pair.
    #[arg(long, default_value_t = 8)]
    pub max_dim: usize,
    /// Also write the report as JSON to this file.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Compute(#[from] geninv::Error),
}

impl CliError {
    /// 2 usage, 3 unreadable or malformed input, 4 domain or numeric failure,
    /// 5 a decomposition that failed its own validation.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse { .. } | CliError::Io { .. } => 3,
            CliError::Compute(geninv::Error::Decomposition { .. }) => 5,
            CliError::Compute(_) => 4,
        }
    }
}

/// Text for stdout and whether every check passed.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub passed: bool,
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Inverse(args) => cmd_inverse(&args),
        Command::Decompose(args) => cmd_decompose(&args),
        Command::Verify(args) => cmd_verify(&args),
    }
}

/// `--tol`, else `GENINV_TOL`, else the default.
fn tolerance(flag: Option<f64>) -> Result<ToleranceModel, CliError> {
    let atol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{TOL_ENV}={s:?} is not a number")))?,
            Err(_) => DEFAULT_RESIDUAL_ATOL,
        },
    };
    ToleranceModel::new(DEFAULT_RANK_RTOL, atol).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn read_matrix(path: &Path) -> Result<MatrixFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    MatrixFile::parse(&text, Format::from_path(path)).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn weight_arg(path: Option<&PathBuf>, weighted: bool, what: &str) -> Result<Option<MatrixFile>, CliError> {
    match (path, weighted) {
        (Some(p), true) => Ok(Some(read_matrix(p)?)),
        (None, true) => Err(CliError::Usage(format!("{what} needs a weight file W"))),
        (Some(_), false) => Err(CliError::Usage(format!("{what} takes no weight file"))),
        (None, false) => Ok(None),
    }
}

fn cmd_inverse(args: &InverseArgs) -> Result<Output, CliError> {
    let kind = args.kind;
    let q = match (args.q, kind.takes_q()) {
        (Some(q), true) => q,
        (None, true) => return Err(CliError::Usage(format!("{} needs --q", kind.name()))),
        (Some(_), false) => return Err(CliError::Usage(format!("{} takes no --q", kind.name()))),
        (None, false) => 0,
    };
    let tol = tolerance(args.tol)?;
    let a = read_matrix(&args.a)?;
    let w = weight_arg(args.w.as_ref(), kind.weighted(), &kind.name())?;
    let format = a.format;
    let (mut text, checks) = if args.exact {
        let (ea, ew) = (a.exact(), w.as_ref().map(MatrixFile::exact));
        let (x, power) = exact_inverse(kind, &ea, ew.as_ref(), q)?;
        let text = match format {
            Format::Csv => exact_csv(&x),
            Format::Json => exact_json(&x, ""),
        };
        let checks = if args.verify {
            let problem = Problem { a: &ea, w: ew.as_ref(), x: &x, power };
            residuals(kind, &problem, &Exact)?
        } else {
            Vec::new()
        };
        (text, checks)
    } else {
        let (fa, fw) = (a.float(), w.as_ref().map(MatrixFile::float));
        let (x, power) = float_inverse(kind, &fa, fw.as_ref(), q, &tol)?;
        let text = match format {
            Format::Csv => float_csv(&x),
            Format::Json => float_json(&x, ""),
        };
        let checks = if args.verify {
            let problem = Problem { a: &fa, w: fw.as_ref(), x: &x, power };
            residuals(kind, &problem, &Float(&tol))?
        } else {
            Vec::new()
        };
        (text, checks)
    };
    let threshold = if args.exact { 0.0 } else { tol.residual_atol };
    let passed = checks.iter().all(|(_, r)| *r <= threshold);
    if args.verify {
        match format {
            Format::Csv => {
                for (name, r) in &checks {
                    let status = if *r <= threshold { "ok" } else { "FAIL" };
                    let _ = writeln!(text, "# {name} {} {status}", format_f64(*r));
                }
            }
            Format::Json => {
                text.pop();
                let fields: Vec<String> = checks
                    .iter()
                    .map(|(name, r)| format!("\"{name}\": {}", format_f64(*r)))
                    .collect();
                let _ = write!(text, ",\n  \"residuals\": {{{}}},\n", fields.join(", "));
                let _ = write!(text, "  \"threshold\": {}\n}}", format_f64(threshold));
            }
        }
    }
    if format == Format::Json {
        text.push('\n');
    }
    Ok(Output { text, passed })
}

/// The inverse and the power its defining equations refer to.
fn float_inverse(
    kind: InverseKind,
    a: &ComplexMatrix,
    w: Option<&ComplexMatrix>,
    q: usize,
    tol: &ToleranceModel,
) -> Result<(ComplexMatrix, usize), CliError> {
    if let Some(w) = w {
        let p = WeightedPair::new(a.clone(), w.clone(), tol)?;
        let x = match kind {
            InverseKind::Wdrazin => weighted_drazin(&p, tol)?,
            InverseKind::WcoreEp => weighted_core_ep(&p, tol)?,
            InverseKind::Wbt => weighted_bt(&p, tol)?,
            _ => weighted_qbt(&p, q.into(), tol)?,
        };
        let power = match kind {
            InverseKind::Wdrazin | InverseKind::WcoreEp => p.k(),
            InverseKind::Wbt => 1,
            _ => q,
        };
        return Ok((x, power));
    }
    let index = || -> Result<usize, CliError> { Ok(matrix_index(a, tol)?.index) };
    Ok(match kind {
        InverseKind::Pinv => (pinv(a, tol)?, 0),
        InverseKind::Drazin => (drazin(a, tol)?, index()?),
        InverseKind::Group => (group_inverse(a, tol)?, 1),
        InverseKind::Core => (core_inverse(a, tol)?, 1),
        InverseKind::CoreEp => (core_ep(a, tol)?, index()?),
        InverseKind::Bt => (bt_inverse(a, tol)?, 1),
        _ => (qbt_inverse(a, q.into(), tol)?, q),
    })
}

fn exact_inverse(
    kind: InverseKind,
    a: &RationalMatrix,
    w: Option<&RationalMatrix>,
    q: usize,
) -> Result<(RationalMatrix, usize), CliError> {
    if let Some(w) = w {
        let (_, _, k) = exact::exact_weighted_index(a, w)?;
        return Ok(match kind {
            InverseKind::Wdrazin => (exact::exact_weighted_drazin(a, w)?, k),
            InverseKind::WcoreEp => (exact::exact_weighted_qbt(a, w, k)?, k),
            InverseKind::Wbt => (exact::exact_weighted_qbt(a, w, 1)?, 1),
            _ => (exact::exact_weighted_qbt(a, w, q)?, q),
        });
    }
    let group = || -> Result<RationalMatrix, CliError> {
        let k = exact::exact_index(a)?;
        if k > 1 {
            return Err(geninv::Error::Domain(format!(
                "group inverse needs index at most 1, matrix has index {k}"
            ))
            .into());
        }
        Ok(exact::exact_drazin(a)?)
    };
    Ok(match kind {
        InverseKind::Pinv => (exact::exact_pinv(a)?, 0),
        InverseKind::Drazin => (exact::exact_drazin(a)?, exact::exact_index(a)?),
        InverseKind::Group => (group()?, 1),
        InverseKind::Core => (&(&group()? * a) * &exact::exact_pinv(a)?, 1),
        InverseKind::CoreEp => {
            let k = exact::exact_index(a)?;
            (exact::exact_qbt(a, k)?, k)
        }
        InverseKind::Bt => (exact::exact_qbt(a, 1)?, 1),
        _ => (exact::exact_qbt(a, q)?, q),
    })
}

fn unitary_residual(u: &ComplexMatrix) -> f64 {
    (&(&u.adjoint() * u) - &ComplexMatrix::identity(u.cols())).frobenius_norm()
}

fn cmd_decompose(args: &DecomposeArgs) -> Result<Output, CliError> {
    let tol = tolerance(args.tol)?;
    let weighted = args.kind == DecompositionKind::WeightedCoreEp;
    let name = if weighted { "weighted-core-ep" } else { "core-ep" };
    let a = read_matrix(&args.a)?;
    let w = weight_arg(args.w.as_ref(), weighted, name)?;
    let format = a.format;
    let fa = a.float();
    let (header, blocks, checks): (Vec<(&str, usize)>, Vec<(&str, ComplexMatrix)>, Vec<(&str, f64)>) =
        match w {
            None => {
                let d = core_ep_decompose(&fa, &tol)?;
                let k = d.index as i32;
                let nominal = spectral_norm(&fa)?.powi(k);
                let nil_k = d.nil.pow(d.index)?.frobenius_norm();
                let checks = vec![
                    ("unitary_u", unitary_residual(&d.u)),
                    ("reconstruct", d.reconstruct().relative_distance(&fa)),
                    ("nilpotent", if nominal > 0.0 { nil_k / nominal } else { nil_k }),
                ];
                let header = vec![("t", d.rank()), ("index", d.index)];
                let blocks = vec![("U", d.u), ("T", d.t), ("S", d.s), ("N", d.nil)];
                (header, blocks, checks)
            }
            Some(w) => {
                let p = WeightedPair::new(fa, w.float(), &tol)?;
                let d = weighted_core_ep_decompose(&p, &tol)?;
                let r = d.residuals;
                let checks = vec![
                    ("unitary_u", r.unitary_u),
                    ("unitary_v", r.unitary_v),
                    ("reconstruct_a", r.reconstruct_a),
                    ("reconstruct_w", r.reconstruct_w),
                    ("nilpotent_aw", r.nilpotent_aw),
                    ("nilpotent_wa", r.nilpotent_wa),
                    ("sigma_min_a1", r.sigma_min_a1),
                    ("sigma_min_w1", r.sigma_min_w1),
                ];
                let header = vec![("t", d.t_dim), ("ind_aw", d.ind_aw), ("ind_wa", d.ind_wa)];
                let blocks = vec![
                    ("U", d.u),
                    ("V", d.v),
                    ("A1", d.a1),
                    ("A2", d.a2),
                    ("A3", d.a3),
                    ("W1", d.w1),
                    ("W2", d.w2),
                    ("W3", d.w3),
                ];
                (header, blocks, checks)
            }
        };
    let mut text = String::new();
    match format {
        Format::Csv => {
            let fields: Vec<String> = header.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(text, "# {name} {}", fields.join(" "));
            for (label, m) in &blocks {
                let _ = writeln!(text, "# {label} {}x{}", m.rows(), m.cols());
                text.push_str(&float_csv(m));
            }
            for (label, r) in &checks {
                let _ = writeln!(text, "# {label} {}", format_f64(*r));
            }
        }
        Format::Json => {
            let _ = writeln!(text, "{{\n  \"kind\": \"{name}\",");
            for (k, v) in &header {
                let _ = writeln!(text, "  \"{k}\": {v},");
            }
            let _ = writeln!(text, "  \"blocks\": {{");
            for (i, (label, m)) in blocks.iter().enumerate() {
                let comma = if i + 1 < blocks.len() { "," } else { "" };
                let _ = writeln!(text, "    \"{label}\": {}{comma}", float_json(m, "    "));
            }
            let fields: Vec<String> = checks
                .iter()
                .map(|(k, r)| format!("\"{k}\": {}", format_f64(*r)))
                .collect();
            let _ = writeln!(text, "  }},\n  \"residuals\": {{{}}}\n}}", fields.join(", "));
        }
    }
    Ok(Output { text, passed: true })
}

fn cmd_verify(args: &VerifyArgs) -> Result<Output, CliError> {
    let tol = tolerance(args.tol)?;
    let corpus = || run_random_corpus(args.seed, args.count, args.max_dim, &tol);
    let report = match args.scope {
        Scope::Paper => run_reference_examples(&tol),
        Scope::Corpus => corpus()?,
        Scope::All => run_reference_examples(&tol).merge(corpus()?),
    };
    if let Some(path) = &args.json {
        std::fs::write(path, report.to_json() + "\n").map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(Output {
        text: report.to_text(),
        passed: report.passed(),
    })
}
