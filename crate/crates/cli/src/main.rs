use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use surrogate_mix::io::{fmt_f64, read_losses, write_results};
use surrogate_mix::model::{ExperimentPlan, RiskCurve, ScalingLawModel};
use surrogate_mix::scaling::{build_model, optimal_alpha, predict_mixture_risk, required_surrogate};
use surrogate_mix::sim::run_experiment;

mod oracle;

/// Weighted ERM with surrogate data: simulations, scaling-law fits and risk oracles.
#[derive(Debug, Parser)]
#[command(name = "surrogate-mix", version)]
struct Cli {
    /// Worker threads (default: logical cores). Output does not depend on it.
    #[arg(long, global = true, env = "SURROGATE_MIX_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment plan and write the results table as CSV.
    Simulate {
        /// ExperimentPlan JSON.
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed stored in the plan.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit power laws to original and surrogate loss tables (`n,loss`).
    Fit {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        surrogate: PathBuf,
        /// ScalingLawModel JSON output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict the mixture risk over an alpha grid.
    Predict {
        /// ScalingLawModel JSON.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// `start:stop:count` (inclusive) or a comma-separated list.
        #[arg(long, default_value = "0:1:101")]
        alphas: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Smallest surrogate sample size reaching a target risk.
    Plan {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        target: f64,
    },
    /// Evaluate an analytic risk curve.
    Oracle {
        #[arg(long, value_enum)]
        setting: Setting,
        /// Setting parameters as JSON.
        #[arg(long)]
        params: PathBuf,
        /// `start:stop:count` (inclusive) or a comma-separated list.
        #[arg(long, default_value = "0:1:21")]
        alphas: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Setting {
    Mean,
    Sequence,
    Nonparam,
    Lowdim,
    Hidim,
}

/// Failure carrying its exit code: 2 for bad input, 3 for numerical trouble.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    Numeric(anyhow::Error),
}

impl From<surrogate_mix::Error> for Failure {
    fn from(e: surrogate_mix::Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.into())
        } else {
            Failure::Input(e.into())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(value)
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Parses `start:stop:count` or `a,b,c`.
fn parse_alphas(spec: &str) -> Outcome<Vec<f64>> {
    let bad = |why: String| Failure::Input(anyhow!("invalid --alphas `{spec}`: {why}"));
    let alphas: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:count".into()));
        }
        let start: f64 = parts[0].trim().parse().map_err(|e| bad(format!("{e}")))?;
        let stop: f64 = parts[1].trim().parse().map_err(|e| bad(format!("{e}")))?;
        let count: usize = parts[2].trim().parse().map_err(|e| bad(format!("{e}")))?;
        match count {
            0 => return Err(bad("count must be positive".into())),
            1 => vec![start],
            _ => (0..count)
                .map(|i| {
                    if i == count - 1 {
                        stop
                    } else {
                        start + (stop - start) * i as f64 / (count - 1) as f64
                    }
                })
                .collect(),
        }
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| bad(format!("{e}"))))
            .collect::<Result<_, _>>()?
    };
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(bad(format!("alpha {a} outside [0, 1]")));
    }
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("alphas must be strictly increasing".into()));
    }
    Ok(alphas)
}

fn curve_csv(header: &str, curve: &RiskCurve) -> String {
    let mut out = format!("{header}\n");
    for p in curve.points() {
        out += &format!("{},{},{}\n", fmt_f64(p.alpha), fmt_f64(p.risk), fmt_f64(p.std_error));
    }
    if let Some(best) = curve.argmin() {
        out += &format!("# alpha_star={}, risk_star={}\n", fmt_f64(best.alpha), fmt_f64(best.risk));
    }
    out
}

fn simulate(plan: &Path, out: &Path, seed: Option<u64>) -> Outcome {
    let mut plan: ExperimentPlan = read_json(plan)?;
    if let Some(seed) = seed {
        plan.seed = seed;
    }
    let rows = run_experiment(&plan)?;
    let mut buf = Vec::new();
    write_results(&rows, &mut buf)?;
    fs::write(out, buf).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn fit(original: &Path, surrogate: &Path, out: &Path) -> Outcome {
    let load = |path: &Path| -> Outcome<Vec<(usize, f64)>> {
        let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
        read_losses(file).map_err(|e| Failure::Input(anyhow!("{}: {e}", path.display())))
    };
    let model = build_model(&load(original)?, &load(surrogate)?)?;
    if model.degenerate() {
        eprintln!("warning: degenerate fit (constant losses); see the `degenerate` flags");
    }
    if model.gap_clamped {
        eprintln!("warning: surrogate asymptote below original; gap clamped at 0");
    }
    let json = serde_json::to_string_pretty(&model).context("serializing model")?;
    write_text(out, &(json + "\n"))
}

fn predict(model: &Path, n: usize, m: usize, alphas: &str, out: &Path) -> Outcome {
    let model: ScalingLawModel = read_json(model)?;
    let alphas = parse_alphas(alphas)?;
    let mut text = String::from("alpha,predicted_risk\n");
    for &a in &alphas {
        let r = predict_mixture_risk(&model, n, m, a)?;
        text += &format!("{},{}\n", fmt_f64(a), fmt_f64(r));
    }
    let (a, r) = optimal_alpha(&model, n, m)?;
    text += &format!("# alpha_star={}, risk_star={}\n", fmt_f64(a), fmt_f64(r));
    write_text(out, &text)
}

fn plan(model: &Path, n: usize, target: f64) -> Outcome {
    let model: ScalingLawModel = read_json(model)?;
    if !target.is_finite() {
        return Err(Failure::Input(anyhow!("target must be finite, got {target}")));
    }
    match required_surrogate(&model, n, target) {
        Some(m) => {
            let m_usize = usize::try_from(m).map_err(|_| anyhow!("m={m} does not fit in usize"))?;
            let (a, r) = optimal_alpha(&model, n, m_usize)?;
            println!("m={m} alpha={} predicted_risk={}", fmt_f64(a), fmt_f64(r));
        }
        None => println!("infeasible"),
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Failure::Input(anyhow!("--threads must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Simulate { plan, out, seed } => simulate(&plan, &out, seed),
        Command::Fit {
            original,
            surrogate,
            out,
        } => fit(&original, &surrogate, &out),
        Command::Predict {
            model,
            n,
            m,
            alphas,
            out,
        } => predict(&model, n, m, &alphas, &out),
        Command::Plan { model, n, target } => plan(&model, n, target),
        Command::Oracle {
            setting,
            params,
            alphas,
            out,
        } => {
            let grid = parse_alphas(&alphas)?;
            let curve = oracle::evaluate(setting, &params, &grid)?;
            write_text(&out, &curve_csv("alpha,risk,std_error", &curve))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_specs() {
        assert_eq!(parse_alphas("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_alphas("0.2, 0.4").unwrap(), vec![0.2, 0.4]);
        assert_eq!(parse_alphas("0.3:0.3:1").unwrap(), vec![0.3]);
        for bad in ["0:1", "0:2:3", "0.5,0.1", "x", "0:1:0"] {
            assert!(matches!(parse_alphas(bad), Err(Failure::Input(_))), "{bad}");
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
