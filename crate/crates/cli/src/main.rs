use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use densitylab::densities::{alpha_density, d_infinity, lower_density, upper_density, Side};
use densitylab::extremal::{eval_surrogate, lower_extreme, surrogate_sup, upper_extreme, Surrogate};
use densitylab::polya::{t_estimate, t_lower_estimate, theta_at};
use densitylab::report::{reports_to_csv, reports_to_json, reports_to_plot, SURROGATE_TAG};
use densitylab::verify::run_suite;
use densitylab::{
    parse_seq_expr, parse_set_expr, theta_of, DensityReport, Error, Estimate, EstimatorConfig,
    Extrapolation, NatSet, Seq,
};

/// Densities of integer sets and window averages of bounded sequences.
#[derive(Parser, Debug)]
#[command(name = "densitylab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Upper and lower asymptotic density of a set.
    Density,
    /// α-densities; the whole α grid (d̄_∞, ḏ_∞) unless --alpha is given.
    Alpha {
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Upper and lower Pólya densities, or t(x) for a sequence.
    Polya,
    /// Extremal values d̄*, ḏ* with the cross-route gap.
    Extremal,
    /// Best single-atom surrogate, or the value of a saved surrogate.
    Surrogate {
        /// Evaluate this surrogate (JSON atom list) instead of searching.
        #[arg(long, value_name = "FILE")]
        surrogate: Option<PathBuf>,
        /// Write the best surrogate found to this file.
        #[arg(long, value_name = "FILE")]
        save_surrogate: Option<PathBuf>,
    },
    /// Run a property suite; exits 1 if any property fails.
    Verify {
        #[arg(long, default_value = "core")]
        suite: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plot,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExtrapolationArg {
    LastValue,
    LinearFit,
}

#[derive(Args, Debug)]
struct Options {
    /// Set expression, e.g. "blocks(geom;1,2,2)".
    #[arg(long, global = true)]
    set: Option<String>,
    /// Sequence expression, e.g. "affine(2,-1,rand01(7))".
    #[arg(long, global = true)]
    seq: Option<String>,
    /// Read the expression from a file.
    #[arg(long, global = true, value_name = "FILE")]
    expr_file: Option<PathBuf>,
    /// Largest horizon; the grid is the powers of two below it plus itself.
    #[arg(long, global = true)]
    horizon: Option<u64>,
    /// θ grid size K, θ_k = 1 − 2^{−k}.
    #[arg(long, global = true)]
    theta_k: Option<u32>,
    /// Comma-separated α grid.
    #[arg(long, global = true, value_delimiter = ',')]
    alpha_grid: Option<Vec<f64>>,
    /// Fraction of the horizon grid used for limsup/liminf.
    #[arg(long, global = true)]
    tail_window: Option<f64>,
    #[arg(long, global = true, value_enum)]
    extrapolation: Option<ExtrapolationArg>,
    /// Output format; reports default to json, `verify` to one line per property.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Enumeration cap for fallbacks and enumerated sequences.
    #[arg(long, global = true)]
    cap: Option<u64>,
    #[arg(long, global = true, env = "DENSITYLAB_THREADS")]
    threads: Option<usize>,
}

enum Failure {
    Parse(Error),
    Input(String),
    Estimator(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_parse_error() {
            Failure::Parse(e)
        } else {
            Failure::Estimator(e)
        }
    }
}

const SEQ_HEADS: &[&str] = &["ind", "const", "periodic", "affine", "rand01", "prefix", "round", "sum"];

enum Input {
    Set(NatSet),
    Seq(Seq),
}

impl Options {
    fn config(&self) -> Result<EstimatorConfig, Failure> {
        let mut cfg = EstimatorConfig::default();
        if let Some(h) = self.horizon {
            if h < 2 {
                return Err(Failure::Estimator(Error::InvalidConfig(format!("horizon {h} below 2"))));
            }
            cfg = cfg.with_max_horizon(h);
        }
        if let Some(k) = self.theta_k {
            cfg.theta_k = k;
        }
        if let Some(grid) = &self.alpha_grid {
            cfg.alphas = grid.clone();
        }
        if let Some(t) = self.tail_window {
            cfg.tail_fraction = t;
        }
        if let Some(e) = self.extrapolation {
            cfg.extrapolation = match e {
                ExtrapolationArg::LastValue => Extrapolation::LastValue,
                ExtrapolationArg::LinearFit => Extrapolation::LinearFit,
            };
        }
        if let Some(c) = self.cap {
            cfg.cap = c;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn input(&self) -> Result<Input, Failure> {
        if let Some(text) = &self.set {
            return Ok(Input::Set(parse_set_expr(text)?));
        }
        if let Some(text) = &self.seq {
            return Ok(Input::Seq(parse_seq_expr(text)?));
        }
        if let Some(path) = &self.expr_file {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
            let head: String = text
                .trim_start()
                .chars()
                .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                .collect();
            return Ok(if SEQ_HEADS.contains(&head.as_str()) {
                Input::Seq(parse_seq_expr(&text)?)
            } else {
                Input::Set(parse_set_expr(&text)?)
            });
        }
        Err(Failure::Input("an expression is required: use --set, --seq or --expr-file".into()))
    }

    fn set(&self) -> Result<NatSet, Failure> {
        match self.input()? {
            Input::Set(a) => Ok(a),
            Input::Seq(_) => Err(Failure::Input("this command needs a set expression".into())),
        }
    }

    fn sequence(&self) -> Result<Seq, Failure> {
        Ok(match self.input()? {
            Input::Set(a) => Seq::indicator(a),
            Input::Seq(x) => x,
        })
    }
}

fn surrogate_report(f: &Surrogate, x: &Seq) -> Result<DensityReport, Error> {
    let mut report = DensityReport::new(format!("surrogate_value{SURROGATE_TAG}"), x.to_string());
    for atom in &f.atoms {
        report.estimates.push(Estimate {
            param: atom.n as f64,
            value: theta_at(x, &theta_of::<f64>(atom.theta_k), atom.n, densitylab::natset::DEFAULT_CAP)?,
        });
    }
    report.extrapolated = eval_surrogate(f, x)?;
    Ok(report)
}

fn run(cli: &Cli) -> Result<Vec<DensityReport>, Failure> {
    let opts = &cli.opts;
    let cfg = opts.config()?;
    Ok(match &cli.command {
        Command::Density => {
            let a = opts.set()?;
            vec![upper_density(&a, &cfg)?, lower_density(&a, &cfg)?]
        }
        Command::Alpha { alpha: Some(alpha) } => {
            let a = opts.set()?;
            vec![
                alpha_density(&a, *alpha, &cfg, Side::Upper)?,
                alpha_density(&a, *alpha, &cfg, Side::Lower)?,
            ]
        }
        Command::Alpha { alpha: None } => {
            let a = opts.set()?;
            vec![d_infinity(&a, &cfg, Side::Upper)?, d_infinity(&a, &cfg, Side::Lower)?]
        }
        Command::Polya => {
            let x = opts.sequence()?;
            vec![t_estimate(&x, &cfg)?, t_lower_estimate(&x, &cfg)?]
        }
        Command::Extremal => {
            let a = opts.set()?;
            vec![upper_extreme(&a, &cfg)?, lower_extreme(&a, &cfg)?]
        }
        Command::Surrogate {
            surrogate: Some(path),
            ..
        } => {
            let x = opts.sequence()?;
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
            let f = Surrogate::from_json(&text).map_err(Failure::Parse)?;
            vec![surrogate_report(&f, &x)?]
        }
        Command::Surrogate {
            surrogate: None,
            save_surrogate,
        } => {
            let x = opts.sequence()?;
            let (best, value) = surrogate_sup(&x, &cfg)?;
            let t = t_estimate(&x, &cfg)?.extrapolated;
            if let Some(path) = save_surrogate {
                fs::write(path, best.to_json() + "\n")
                    .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            let mut report = DensityReport::new(format!("surrogate_sup{SURROGATE_TAG}"), x.to_string());
            report.estimates = best
                .atoms
                .iter()
                .map(|a| Estimate {
                    param: a.n as f64,
                    value,
                })
                .collect();
            report.extrapolated = value;
            report.error_indicator = (value - t).abs();
            report.diagnostics.cross_route_gap = Some((value - t).abs());
            vec![report]
        }
        Command::Verify { .. } => unreachable!("handled separately"),
    })
}

fn verify(suite: &str, seed: u64, format: Option<Format>) -> ExitCode {
    let results = match run_suite(suite, seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    match format {
        Some(Format::Json) => {
            let rows: Vec<_> = results
                .iter()
                .map(|r| serde_json::json!({"name": r.name, "passed": r.passed, "detail": r.detail}))
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows).expect("serializable"));
        }
        _ => {
            for r in &results {
                if r.passed {
                    println!("PASS {}", r.name);
                } else {
                    println!("FAIL {}: {}", r.name, r.detail);
                }
            }
        }
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
    for r in &failed {
        eprintln!("property failed: {}", r.name);
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.opts.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: thread pool not configured: {e}");
        }
    }
    if let Command::Verify { suite } = &cli.command {
        return verify(suite, cli.opts.seed, cli.opts.format);
    }
    match run(&cli) {
        Ok(reports) => {
            for r in &reports {
                for w in &r.warnings {
                    eprintln!("warning [{}]: {w}", r.quantity);
                }
            }
            let out = match cli.opts.format.unwrap_or(Format::Json) {
                Format::Json => reports_to_json(&reports) + "\n",
                Format::Csv => reports_to_csv(&reports),
                Format::Plot => reports_to_plot(&reports),
            };
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Parse(e)) => {
            eprintln!("parse error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Estimator(e)) => {
            eprintln!("estimator error: {e}");
            ExitCode::from(3)
        }
    }
}
