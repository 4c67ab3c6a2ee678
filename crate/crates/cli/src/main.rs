use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use grandlp::gnorm::{boyd_indices, fundamental_phi, g_norm};
use grandlp::measure::{RadialFunction, WeightedSpace};
use grandlp::verify::{run_suite, CheckSpec, SuiteConfig, SuiteReport};
use grandlp::{Error, PsiFunction, PsiSpec};

#[derive(Parser)]
#[command(name = "grandlp", version, about = "Norms and operator checks in two-sided grand Lebesgue spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SpaceArgs {
    /// Dimension of R^n.
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Power weight |x|^sigma.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
}

impl SpaceArgs {
    fn space(&self) -> Result<WeightedSpace, Failure> {
        Ok(WeightedSpace::new(self.n, self.sigma)?)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Op {
    Product,
    PowerScale,
    MultInf,
    ConvInf,
    SobolevNu,
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    Lemma1,
    Th1,
    Th2,
    Th3,
    Th4,
    Th5,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Gamma,
    Convolution,
    Sobolev,
}

#[derive(Subcommand)]
enum Command {
    /// G(psi) norm of a radial function.
    Norm {
        #[arg(short = 'f', long = "function")]
        function: PathBuf,
        #[arg(long)]
        psi: PathBuf,
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Evaluates a derived psi-function.
    Psi {
        #[arg(long, value_enum)]
        op: Op,
        #[arg(long)]
        lhs: PathBuf,
        #[arg(long)]
        rhs: Option<PathBuf>,
        /// Exponent for power_scale.
        #[arg(long)]
        gamma: Option<f64>,
        /// Dimensions for sobolev_nu.
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        m: Option<u32>,
        /// Evaluation points.
        #[arg(long, required = true, num_args = 1..)]
        at: Vec<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Boyd indices of G(psi).
    Boyd {
        #[arg(long)]
        psi: PathBuf,
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Fundamental function phi(delta) and the ratio phi(2 delta)/phi(delta).
    Phi {
        #[arg(long)]
        psi: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        delta: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Runs the checks for one result.
    Verify {
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Runs one sharpness experiment.
    Sharpness {
        #[arg(long, value_enum)]
        which: Which,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Runs a configured suite; the default configuration runs everything.
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report.json and the per-check CSV files.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug)]
enum Failure {
    Input(String, String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.name().into(), e.to_string())
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Input("Io".into(), format!("{}: {e}", path.display()))
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input("MalformedJson".into(), format!("{}: {e}", path.display())))
}

fn load_psi(path: &Path) -> Result<PsiFunction, Failure> {
    Ok(PsiFunction::try_from(load::<PsiSpec>(path)?)?)
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

fn emit(value: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("json") + "\n";
    match out {
        Some(p) => write_atomic(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_blocks(report: &SuiteReport) -> String {
    if let [e] = report.entries.as_slice() {
        return e.csv();
    }
    report
        .entries
        .iter()
        .map(|e| format!("# {}\n{}", e.csv_name(), e.csv()))
        .collect()
}

fn run_config(mut config: SuiteConfig, run: &RunArgs) -> Result<(), Failure> {
    if let Some(seed) = run.seed {
        config.seed = seed;
    }
    let report = run_suite(&config);
    for e in &report.entries {
        eprintln!(
            "{:>3} {:<28} {:<4} {:>8.2}s{}",
            e.index,
            e.kind,
            if e.pass { "pass" } else { "FAIL" },
            e.seconds,
            e.error.as_ref().map(|r| format!("  {}: {}", r.name, r.message)).unwrap_or_default()
        );
    }
    if let Some(dir) = &run.out {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        write_atomic(&dir.join("report.json"), &report.to_json())?;
        for e in &report.entries {
            write_atomic(&dir.join(e.csv_name()), &e.csv())?;
        }
    }
    match run.format {
        Format::Json => print!("{}", report.to_json()),
        Format::Csv => print!("{}", csv_blocks(&report)),
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn with_checks(checks: Vec<CheckSpec>) -> SuiteConfig {
    SuiteConfig {
        checks,
        ..SuiteConfig::default()
    }
}

fn theorem_checks(t: Theorem) -> Vec<CheckSpec> {
    let d = SuiteConfig::default().checks;
    let pick = |kinds: &[&str]| d.iter().filter(|c| kinds.contains(&c.kind())).cloned().collect();
    match t {
        Theorem::Lemma1 => pick(&["tensor"]),
        Theorem::Th1 => pick(&["dilation", "boyd", "phi_index"]),
        Theorem::Th2 => pick(&["product", "power"]),
        Theorem::Th3 => pick(&["sobolev"]),
        Theorem::Th4 => pick(&["noncompact"]),
        Theorem::Th5 => pick(&["convolution", "young_constant"]),
    }
}

fn sharpness_checks(w: Which) -> Vec<CheckSpec> {
    let d = SuiteConfig::default().checks;
    let kinds: &[&str] = match w {
        Which::Gamma => &["gamma_sharpness", "gamma_oracle"],
        Which::Convolution => &["convolution_sharpness", "convolution_sharpness_outer"],
        Which::Sobolev => &["sobolev_gap"],
    };
    d.into_iter().filter(|c| kinds.contains(&c.kind())).collect()
}

fn derived(op: Op, lhs: &PsiFunction, rhs: Option<PsiFunction>, gamma: Option<f64>, n: Option<u32>, m: Option<u32>) -> Result<PsiFunction, Failure> {
    let need = |what: &str| Failure::Input("Usage".into(), format!("--op needs {what}"));
    Ok(match op {
        Op::Product => PsiFunction::product(lhs, &rhs.ok_or_else(|| need("--rhs"))?)?,
        Op::MultInf => PsiFunction::mult_inf(lhs, &rhs.ok_or_else(|| need("--rhs"))?)?,
        Op::ConvInf => PsiFunction::conv_inf(lhs, &rhs.ok_or_else(|| need("--rhs"))?)?,
        Op::PowerScale => PsiFunction::power_scale(lhs, gamma.ok_or_else(|| need("--gamma"))?)?,
        Op::SobolevNu => PsiFunction::sobolev_nu(lhs, n.ok_or_else(|| need("--n"))?, m.ok_or_else(|| need("--m"))?)?,
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Norm {
            function,
            psi,
            space,
            out,
        } => {
            let f: RadialFunction = load(&function)?;
            f.validate()?;
            let r = g_norm(&f, &load_psi(&psi)?, &space.space()?)?;
            emit(&serde_json::to_value(r).expect("json"), out.as_deref())
        }
        Command::Psi {
            op,
            lhs,
            rhs,
            gamma,
            n,
            m,
            at,
            out,
        } => {
            let l = load_psi(&lhs)?;
            let r = rhs.as_deref().map(load_psi).transpose()?;
            let psi = derived(op, &l, r, gamma, n, m)?;
            let dom = psi.domain();
            let mut values = Vec::new();
            for &p in &at {
                let mut v = json!({"p": p, "value": psi.eval(p)?});
                if matches!(op, Op::MultInf | Op::ConvInf) {
                    v["argmin"] = serde_json::to_value(psi.infimum_at(p)?).expect("json");
                }
                values.push(v);
            }
            // keep the output loadable as a psi document
            let mut doc = serde_json::to_value(PsiSpec::from(&psi)).expect("json");
            doc["domain"] = json!([dom.a, if dom.b.is_finite() { json!(dom.b) } else { Value::Null }]);
            doc["values"] = Value::Array(values);
            emit(&doc, out.as_deref())
        }
        Command::Boyd { psi, space, out } => {
            let b = boyd_indices(&load_psi(&psi)?, &space.space()?)?;
            emit(&json!({"gamma1": b.gamma1, "gamma2": b.gamma2}), out.as_deref())
        }
        Command::Phi { psi, delta, out } => {
            let psi = load_psi(&psi)?;
            let lo = fundamental_phi(&psi, delta)?;
            let hi = fundamental_phi(&psi, 2.0 * delta)?;
            emit(&json!({"delta": delta, "phi": lo, "phi_2delta": hi, "ratio": hi / lo}), out.as_deref())
        }
        Command::Verify { theorem, run } => run_config(with_checks(theorem_checks(theorem)), &run),
        Command::Sharpness { which, run } => run_config(with_checks(sharpness_checks(which)), &run),
        Command::Suite { config, run } => {
            let cfg = match &config {
                Some(p) => load(p)?,
                None => SuiteConfig::default(),
            };
            run_config(cfg, &run)
        }
    }
}

// `-psi` is accepted as a spelling of `--psi`.
fn normalize_args() -> Vec<String> {
    std::env::args()
        .map(|a| if a == "-psi" { "--psi".to_string() } else { a })
        .collect()
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("GRANDLP_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: Usage: GRANDLP_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = match Cli::try_parse_from(normalize_args()) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Input(name, msg)) => {
            eprintln!("error: {name}: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(checks: &[CheckSpec]) -> Vec<String> {
        checks
            .iter()
            .map(|c| serde_json::to_value(c).unwrap()["kind"].as_str().unwrap().to_string())
            .collect()
    }

    #[test]
    fn theorem_selection() {
        assert_eq!(kinds(&theorem_checks(Theorem::Th5)), ["convolution", "young_constant"]);
        assert_eq!(kinds(&theorem_checks(Theorem::Lemma1)), ["tensor"]);
        assert_eq!(kinds(&sharpness_checks(Which::Sobolev)), ["sobolev_gap"]);
    }

    #[test]
    fn parses_psi_operation() {
        let cli = Cli::try_parse_from(["grandlp", "psi", "--op", "sobolev_nu", "--lhs", "a.json", "--n", "3", "--m", "2", "--at", "2.5"]);
        assert!(cli.is_ok());
        assert!(Cli::try_parse_from(["grandlp", "psi", "--op", "sobolev-nu", "--lhs", "a.json", "--at", "2"]).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
