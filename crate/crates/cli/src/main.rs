use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use qmht::experiments::{
    binary_sweep, chernoff_report, format_value, multi_sweep, plan_report, verify,
    write_binary_csv, write_chernoff_csv, write_multi_csv, write_plan_csv, ExperimentConfig,
    ExponentEstimate, FitWindow, SweepOptions,
};
use qmht::multi::EvaluationMethod;
use qmht::HypothesisSet;

#[derive(Parser)]
#[command(
    name = "qmht",
    version,
    about = "Quantum multiple hypothesis testing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise Chernoff distances, phi and the least favorable pair.
    Chernoff(Common),
    /// Block weights and lengths for one total length.
    Plan {
        #[command(flatten)]
        common: Common,
        /// Total number of sites.
        #[arg(long)]
        n: usize,
    },
    /// Helstrom error of two hypotheses over a range of block sizes.
    BinarySweep(Common),
    /// Voting-test error over a range of block sizes.
    MultiSweep(Common),
    /// Run the built-in checks.
    Verify,
}

#[derive(Args)]
struct Common {
    /// Experiment config or bare hypothesis-set JSON.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// factorized, dense or monte-carlo.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, default_value_t = 1)]
    n_step: usize,
    /// Override block weights, e.g. `manual:0.5,0.3,0.2`.
    #[arg(long)]
    weights: Option<String>,
    /// upper-half or all.
    #[arg(long)]
    fit_window: Option<String>,
    /// Also require the states to be distinguishable at this block size.
    #[arg(long)]
    distinct_at: Option<usize>,
}

struct Loaded {
    hs: HypothesisSet,
    cfg: ExperimentConfig,
    opts: SweepOptions,
}

fn parse_weights(spec: &str) -> Result<Vec<f64>> {
    let Some(list) = spec.strip_prefix("manual:") else {
        bail!(qmht::Error::Parse(format!(
            "weights must look like manual:a,b,...; got '{spec}'"
        )));
    };
    list.split(',')
        .map(|w| {
            w.trim()
                .parse::<f64>()
                .map_err(|e| qmht::Error::Parse(format!("weight '{w}': {e}")).into())
        })
        .collect()
}

fn parse_window(s: &str) -> Result<FitWindow> {
    match s {
        "upper-half" | "upper_half" => Ok(FitWindow::UpperHalf),
        "all" => Ok(FitWindow::All),
        other => bail!(qmht::Error::Parse(format!("unknown fit window '{other}'"))),
    }
}

impl Common {
    fn load(&self) -> Result<Loaded> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(m) = &self.method {
            cfg.method = m.parse::<EvaluationMethod>()?;
        }
        if let Some(s) = self.samples {
            cfg.samples = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = &self.weights {
            cfg.weights = Some(parse_weights(w)?);
        }
        if let Some(w) = &self.fit_window {
            cfg.fit_window = parse_window(w)?;
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        match (self.n_min, self.n_max) {
            (Some(lo), Some(hi)) => {
                if self.n_step == 0 {
                    bail!(qmht::Error::Parse("n-step must be positive".into()));
                }
                cfg.n_range = (lo..=hi).step_by(self.n_step).collect();
            }
            (None, None) => {}
            _ => bail!(qmht::Error::Parse("give both --n-min and --n-max".into())),
        }
        let hs = cfg.hypothesis_set()?;
        if let Some(n) = self.distinct_at {
            let report = hs.check_distinct_at(n);
            if !report.is_valid() {
                bail!(qmht::Error::InvalidHypotheses(report));
            }
        }
        let opts = SweepOptions::from_config(&cfg);
        Ok(Loaded { hs, cfg, opts })
    }
}

/// CSV goes to the configured file, else to stdout; the summary then goes to stderr.
fn emit(
    cfg: &ExperimentConfig,
    write_csv: impl FnOnce(&mut dyn Write) -> qmht::Result<()>,
    summary: &[String],
) -> Result<()> {
    match &cfg.output {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_csv(&mut w)?;
            w.flush()?;
            let mut out = io::stdout().lock();
            for line in summary {
                writeln!(out, "{line}")?;
            }
            info!("wrote {}", path.display());
        }
        None => {
            let mut out = io::stdout().lock();
            write_csv(&mut out)?;
            out.flush()?;
            let mut err = io::stderr().lock();
            for line in summary {
                writeln!(err, "{line}")?;
            }
        }
    }
    Ok(())
}

fn fit_line(fit: Option<&ExponentEstimate>) -> String {
    match fit {
        Some(ExponentEstimate::Fitted(f)) => format!(
            "fitted exponent {} (r^2 {:.6}) over n = {:?}",
            format_value(f.slope),
            f.r_squared,
            f.window
        ),
        Some(ExponentEstimate::Infinite { window }) => {
            format!("fitted exponent inf (all errors zero) over n = {window:?}")
        }
        None => "fitted exponent unavailable".into(),
    }
}

fn pair_label(pair: (usize, usize)) -> String {
    format!("({}, {})", pair.0 + 1, pair.1 + 1)
}

fn cmd_chernoff(common: &Common) -> Result<()> {
    let Loaded { hs, cfg, .. } = common.load()?;
    let rep = chernoff_report(&hs, &cfg.distance_options())?;
    let s = &rep.summary;
    let mut summary = vec![
        format!("xi_min {}", format_value(s.xi_min)),
        format!("phi {}", format_value(s.phi)),
        format!(
            "least favorable pair {}",
            pair_label(rep.distances.pairs.pair(s.least_favorable))
        ),
    ];
    for &k in &s.infinite_pairs {
        summary.push(format!(
            "pair {} has infinite distance (orthogonal supports)",
            pair_label(rep.distances.pairs.pair(k))
        ));
    }
    emit(&cfg, |w| write_chernoff_csv(w, &rep), &summary)
}

fn cmd_plan(common: &Common, n: usize) -> Result<()> {
    let Loaded { hs, cfg, opts } = common.load()?;
    let rep = plan_report(&hs, n, &opts)?;
    let summary = vec![
        format!("n {n}, lengths {:?}", rep.plan.lengths()),
        format!(
            "weights {:?}{}",
            rep.plan.weights(),
            if rep.manual_weights { " (manual)" } else { "" }
        ),
        format!(
            "predicted exponent {}",
            format_value(rep.predicted_exponent)
        ),
        format!(
            "xi_min * phi {}",
            format_value(rep.chernoff.summary.guaranteed_exponent())
        ),
    ];
    emit(&cfg, |w| write_plan_csv(w, &rep), &summary)
}

fn cmd_binary_sweep(common: &Common) -> Result<()> {
    let Loaded { hs, cfg, opts } = common.load()?;
    cfg.validate_n_range()?;
    let sweep = binary_sweep(&hs, &cfg.n_range, &opts)?;
    let summary = vec![
        fit_line(sweep.fit.as_ref()),
        format!(
            "chernoff distance {}",
            format_value(sweep.chernoff_distance())
        ),
    ];
    emit(&cfg, |w| write_binary_csv(w, &sweep), &summary)
}

fn cmd_multi_sweep(common: &Common) -> Result<()> {
    let Loaded { hs, cfg, opts } = common.load()?;
    cfg.validate_n_range()?;
    let sweep = multi_sweep(&hs, &cfg.n_range, &opts)?;
    let slope = sweep.fit.as_ref().map_or(f64::NAN, ExponentEstimate::slope);
    let compare = |label: &str, bound: f64, holds: bool| {
        format!(
            "{label} {} : {}",
            format_value(bound),
            if holds { "satisfied" } else { "violated" }
        )
    };
    let summary = vec![
        format!("method {}", sweep.method.name()),
        fit_line(sweep.fit.as_ref()),
        format!(
            "predicted exponent {}",
            format_value(sweep.predicted_exponent)
        ),
        compare(
            "lower bound xi_min*phi",
            sweep.lower_bound(),
            slope >= sweep.lower_bound(),
        ),
        compare(
            "upper bound xi_min",
            sweep.upper_bound(),
            slope <= sweep.upper_bound(),
        ),
    ];
    emit(&cfg, |w| write_multi_csv(w, &sweep), &summary)
}

fn cmd_verify() -> Result<bool> {
    let outcomes = verify::run_checks();
    let mut out = io::stdout().lock();
    for o in &outcomes {
        writeln!(out, "{o}")?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    writeln!(out, "{} checks, {failed} failed", outcomes.len())?;
    Ok(failed == 0)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<qmht::Error>() {
        Some(e) if e.is_resource_limit() => 3,
        Some(e) if e.is_validation() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Chernoff(c) => cmd_chernoff(c).map(|_| true),
        Command::Plan { common, n } => cmd_plan(common, *n).map(|_| true),
        Command::BinarySweep(c) => cmd_binary_sweep(c).map(|_| true),
        Command::MultiSweep(c) => cmd_multi_sweep(c).map(|_| true),
        Command::Verify => cmd_verify(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
