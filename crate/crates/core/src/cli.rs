//! The `kemeny` command line.
//!
//! Exit codes: 0 on success, 1 when an identity check fails or a simulated
//! path exceeds the step cap, 2 on usage, parse or validation errors.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};

use crate::chain::{Chain, InputFormat};
use crate::exactalg::{format_decimal, format_rational, Rational};
use crate::hitting::{HittingAnalysis, HittingError};
use crate::mcsim::{histogram_csv, simulate_hitting, SimConfig, SimError, Target};
use crate::report::{build_report, ReportError, ReportOptions, DECIMAL_DIGITS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kemeny", version, about = "Exact hitting-time analysis of finite Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full exact analysis, written as a JSON report.
    Analyze(AnalyzeArgs),
    /// Generating function of a hitting time, with its series prefix.
    Gf(GfArgs),
    /// Samples of every pi_v(x) on [0, 1] as CSV.
    PlotData(PlotArgs),
    /// Monte Carlo hitting times compared with the exact law.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Chain file.
    #[arg(long)]
    input: PathBuf,
    /// Input format; guessed from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Report path; the report goes to standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Highest factorial moment order.
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    /// Attach a simulation of the Kemeny time with this seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Paths for the attached simulation.
    #[arg(long, default_value_t = 100_000, requires = "seed")]
    paths: usize,
}

#[derive(Debug, Args)]
struct GfArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Start state label.
    u: String,
    /// Target state label.
    v: String,
    /// Time shift.
    #[arg(long, default_value_t = 0)]
    t: usize,
    #[arg(long, default_value_t = 20)]
    series_len: usize,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Equispaced sample points, endpoints included.
    #[arg(long, default_value_t = 101)]
    samples: usize,
    /// Print rational strings instead of decimals.
    #[arg(long)]
    exact: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Start state label.
    u: String,
    /// Target state label; a stationary target is drawn per path when omitted.
    v: Option<String>,
    #[arg(long, default_value_t = 1)]
    t: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    /// Write the histogram CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure together with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<HittingError> for Failure {
    fn from(e: HittingError) -> Self {
        let code = match e {
            HittingError::Chain(_) | HittingError::ShiftTooLarge { .. } | HittingError::InvalidArgument(_) => {
                EXIT_INPUT
            }
            _ => EXIT_CHECK_FAILED,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::StepCapExceeded { .. } => EXIT_CHECK_FAILED,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Hitting(e) => e.into(),
            ReportError::Sim(e) => e.into(),
        }
    }
}

impl From<crate::ChainError> for Failure {
    fn from(e: crate::ChainError) -> Self {
        Self::input(e.to_string())
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                EXIT_INPUT
            } else {
                let _ = write!(stdout, "{rendered}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze(a, stdout, stderr),
        Command::Gf(a) => gf(a, stdout),
        Command::PlotData(a) => plot_data(a, stdout),
        Command::Simulate(a) => simulate(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn load_chain(input: &InputArgs) -> Result<Chain, Failure> {
    let format = match input.format {
        Some(FormatArg::Json) => InputFormat::Json,
        Some(FormatArg::Csv) => InputFormat::Csv,
        None => match input.input.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Json,
        },
    };
    let text = std::fs::read_to_string(&input.input)
        .map_err(|e| Failure::input(format!("{}: {e}", input.input.display())))?;
    Chain::parse(&text, format).map_err(|e| Failure::input(format!("{}: {e}", input.input.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn io(e: std::io::Error) -> Failure {
    Failure::input(format!("write failed: {e}"))
}

fn analyze(a: AnalyzeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let chain = load_chain(&a.input)?;
    let opts = ReportOptions {
        k_max: a.kmax,
        simulation: a.seed.map(|seed| SimConfig::new(seed, a.paths)),
    };
    let report = build_report(&chain, &opts)?;
    let json = report.to_json_string();
    match &a.out {
        Some(path) => {
            write_file(path, &json)?;
            let stationary: Vec<&str> = report.stationary.iter().map(|s| s.exact.as_str()).collect();
            let passed = report.identities.iter().filter(|c| c.passed).count();
            writeln!(stdout, "states: {}", chain.states().join(" ")).map_err(io)?;
            writeln!(stdout, "stationary: {}", stationary.join(" ")).map_err(io)?;
            writeln!(stdout, "Z: {}", report.z.exact).map_err(io)?;
            writeln!(
                stdout,
                "kemeny: {} ({})",
                report.kemeny.by_mean_hitting.exact, report.kemeny.by_mean_hitting.decimal
            )
            .map_err(io)?;
            writeln!(stdout, "identities: {passed}/{} passed", report.identities.len()).map_err(io)?;
            if let Some(sim) = &report.simulation {
                writeln!(
                    stdout,
                    "simulation: mean {:.6} se {:.6} z {:.3}",
                    sim.empirical_mean, sim.std_error, sim.z_score
                )
                .map_err(io)?;
            }
            writeln!(stdout, "report: {}", path.display()).map_err(io)?;
        }
        None => stdout.write_all(json.as_bytes()).map_err(io)?,
    }
    for c in report.identities.iter().filter(|c| !c.passed) {
        let _ = writeln!(
            stderr,
            "identity ({}) {} failed: {}",
            c.id,
            c.name,
            c.witness.as_deref().unwrap_or("")
        );
    }
    if !report.kemeny.eigen_within_tolerance || !report.kemeny.eigen_imag_residual_ok {
        let _ = writeln!(stderr, "warning: spectral Kemeny value out of tolerance: {}", report.kemeny.by_eigenvalues);
    }
    Ok(if report.all_identities_passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn gf(a: GfArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let chain = load_chain(&a.input)?;
    let u = chain.state_index(&a.u)?;
    let v = chain.state_index(&a.v)?;
    let analysis = HittingAnalysis::new(&chain)?;
    let g = analysis.gf(u, v, a.t)?;
    let series = g.gf.series(a.series_len).map_err(HittingError::from)?;
    let mut out = String::new();
    let _ = writeln!(out, "G[{},{}]^(>={})(x) = {}", a.u, a.v, a.t, g.gf);
    let _ = writeln!(out, "num: {}", crate::report::poly_json(g.gf.num()).join(" "));
    let _ = writeln!(out, "den: {}", crate::report::poly_json(g.gf.den()).join(" "));
    let series: Vec<String> = series.iter().map(format_rational).collect();
    let _ = writeln!(out, "series: {}", series.join(" "));
    stdout.write_all(out.as_bytes()).map_err(io)?;
    Ok(EXIT_OK)
}

fn plot_data(a: PlotArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    if a.samples < 2 {
        return Err(Failure::input("--samples must be at least 2"));
    }
    let chain = load_chain(&a.input)?;
    let bundle = crate::detcore::CharBundle::new(&chain).map_err(HittingError::from)?;
    let render = |r: &Rational| {
        if a.exact {
            format_rational(r)
        } else {
            format_decimal(r, DECIMAL_DIGITS)
        }
    };
    let mut out = String::from("x");
    for v in 1..=chain.dim() {
        let _ = write!(out, ",pi_{v}");
    }
    out.push('\n');
    let steps = (a.samples - 1) as i64;
    for k in 0..=steps {
        let x = Rational::new(k.into(), steps.into());
        out.push_str(&render(&x));
        for p in &bundle.pi {
            out.push(',');
            out.push_str(&render(&p.eval(&x)));
        }
        out.push('\n');
    }
    match &a.out {
        Some(path) => write_file(path, &out)?,
        None => stdout.write_all(out.as_bytes()).map_err(io)?,
    }
    Ok(EXIT_OK)
}

fn simulate(a: SimulateArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let chain = load_chain(&a.input)?;
    let u = chain.state_index(&a.u)?;
    let v = a.v.as_deref().map(|l| chain.state_index(l)).transpose()?;
    let analysis = HittingAnalysis::new(&chain)?;
    let t = usize::try_from(a.t).map_err(|_| Failure::input("--t is too large"))?;
    // Exact law and mean of the simulated time, mixing over the stationary
    // target when no target is given.
    let weights: Vec<(usize, Rational)> = match v {
        Some(v) => vec![(v, Rational::one())],
        None => analysis.stationary().into_iter().enumerate().collect(),
    };
    let gfs = weights
        .iter()
        .map(|(target, w)| Ok((analysis.gf(u, *target, t)?.gf, w)))
        .collect::<Result<Vec<_>, HittingError>>()?;
    let summary = simulate_hitting(
        &chain,
        u,
        v.map_or(Target::Stationary, Target::State),
        a.t,
        &SimConfig::new(a.seed, a.paths),
    )?;
    let last = summary.histogram.keys().next_back().copied().unwrap_or(0) as usize;
    let mut law = vec![Rational::zero(); last + 1];
    let mut mean = Rational::zero();
    for (g, w) in &gfs {
        let at_one = g.taylor_at(&Rational::one(), 2).map_err(HittingError::from)?;
        mean += *w * &at_one[1];
        for (m, p) in g.series(last + 1).map_err(HittingError::from)?.into_iter().enumerate() {
            law[m] += *w * p;
        }
    }
    let mean_f = crate::exactalg::rational::to_f64(&mean);
    let target_label = a.v.clone().unwrap_or_else(|| "X~stationary".into());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "start {} target {} t {} seed {} paths {}",
        a.u, target_label, a.t, a.seed, summary.n_paths
    );
    let _ = writeln!(out, "exact mean: {} ({})", format_rational(&mean), format_decimal(&mean, DECIMAL_DIGITS));
    let _ = writeln!(
        out,
        "empirical mean: {:.6} se {:.6} delta {:.6} z {:.3}",
        summary.mean,
        summary.std_error,
        summary.mean - mean_f,
        summary.z_score(mean_f)
    );
    let _ = writeln!(out, "m count empirical exact delta");
    let n = summary.n_paths as f64;
    for (m, p) in law.iter().enumerate() {
        let count = summary.histogram.get(&(m as u64)).copied().unwrap_or(0);
        let freq = count as f64 / n;
        let pf = crate::exactalg::rational::to_f64(p);
        let _ = writeln!(out, "{m} {count} {freq:.6} {pf:.6} {:.6}", freq - pf);
    }
    stdout.write_all(out.as_bytes()).map_err(io)?;
    if let Some(path) = &a.out {
        write_file(path, &histogram_csv(&summary, Some(&law)))?;
    }
    Ok(EXIT_OK)
}
