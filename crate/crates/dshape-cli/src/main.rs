//! `dshape` command line: run experiments from config files, reproduce the
//! coefficient sweep and ablation studies, machine-check the invariance
//! theory, plot curve CSVs, and print demonstrations.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use dshape::baselines::{SbsParams, MANHATTAN_SWEEP};
use dshape::demo::{make_demo, DemoQuality};
use dshape::grid::GridSpec;
use dshape::harness::{
    compute_auc, emit_outputs, parse_curve_csv, render_curves_svg, run_side, with_jobs,
    ExperimentConfig, MethodOutcome, MethodSpec,
};
use dshape::oracle::{
    check_goal_dependent_mutation, check_manhattan_divergence, check_policy_invariance,
    check_sbs_invariance, check_theorem1,
};
use dshape::shaping::PotentialFn;
use dshape::AblationFlags;

#[derive(Parser)]
#[command(name = "dshape", version, about = "Gridworld experiments for demonstration-guided Q-learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunOverrides {
    /// Output directory for CSV/SVG artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for parallel runs (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the training steps per run.
    #[arg(long)]
    steps: Option<u64>,
    /// Override the evaluation interval (env steps).
    #[arg(long)]
    eval_interval: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        /// Flat `key = value` config file.
        config: PathBuf,
        #[command(flatten)]
        overrides: RunOverrides,
    },
    /// Sweep the Manhattan imitation coefficient (with D-Shape as the
    /// reference curve).
    Sweep {
        #[arg(long, default_value_t = 10)]
        side: u32,
        /// Demo quality: optimal, good, medium, or worst.
        #[arg(long, default_value = "worst")]
        demo: String,
        /// Coefficients to sweep.
        #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = MANHATTAN_SWEEP)]
        coefficients: Vec<f64>,
        #[command(flatten)]
        overrides: RunOverrides,
    },
    /// Run full D-Shape against its three ablations.
    Ablate {
        #[arg(long, default_value_t = 10)]
        side: u32,
        #[arg(long, default_value = "optimal")]
        demo: String,
        #[command(flatten)]
        overrides: RunOverrides,
    },
    /// Machine-check the invariance theory with the exact solver.
    OracleCheck {
        #[arg(long, default_value_t = 5)]
        side: u32,
        #[arg(long, default_value = "worst")]
        demo: String,
    },
    /// Render curve CSVs into one SVG plot.
    Plot {
        /// Curve CSV files produced by `run`, `sweep`, or `ablate`.
        #[arg(required = true)]
        csvs: Vec<PathBuf>,
        #[arg(long, default_value = "curves.svg")]
        out: PathBuf,
        /// Draw the optimal-return line at this value.
        #[arg(long)]
        optimal: Option<f64>,
    },
    /// Print a demonstration as a `t x y` table.
    Demo {
        side: u32,
        /// optimal, good, medium, or worst.
        tier: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run { config, overrides } => run_cmd(config, overrides),
        Command::Sweep { side, demo, coefficients, overrides } => {
            sweep_cmd(side, &demo, &coefficients, overrides)
        }
        Command::Ablate { side, demo, overrides } => ablate_cmd(side, &demo, overrides),
        Command::OracleCheck { side, demo } => oracle_cmd(side, &demo),
        Command::Plot { csvs, out, optimal } => plot_cmd(&csvs, &out, optimal),
        Command::Demo { side, tier } => demo_cmd(side, &tier),
    }
}

fn apply_overrides(cfg: &mut ExperimentConfig, overrides: &RunOverrides) {
    if let Some(seed) = overrides.seed {
        cfg.base_seed = seed;
    }
    if let Some(steps) = overrides.steps {
        cfg.learner.total_steps = steps;
    }
    if let Some(interval) = overrides.eval_interval {
        cfg.eval_interval = interval;
    }
}

fn parse_quality(s: &str) -> Result<DemoQuality, String> {
    s.parse::<DemoQuality>().map_err(|e| e.to_string())
}

fn run_configs(
    configs: Vec<ExperimentConfig>,
    overrides: &RunOverrides,
) -> Result<Vec<MethodOutcome>, String> {
    let mut prepared = Vec::new();
    for mut cfg in configs {
        apply_overrides(&mut cfg, overrides);
        cfg.validate().map_err(|e| e.to_string())?;
        prepared.push(cfg);
    }
    with_jobs(overrides.jobs, move || {
        let mut outcomes = Vec::new();
        for cfg in &prepared {
            for &side in &cfg.sides {
                outcomes.push(run_side(cfg, side).map_err(|e| e.to_string())?);
            }
        }
        Ok(outcomes)
    })
}

fn finish(outcomes: Vec<MethodOutcome>, overrides: &RunOverrides) -> Result<(), String> {
    let mut summary = String::new();
    for o in &outcomes {
        let _ = writeln!(
            summary,
            "{} (side {}): final mean return {:.3}, AUC {:.1}, optimal {:.0}",
            o.label,
            o.side,
            o.curve.points.last().map(|p| p.mean).unwrap_or(f64::NAN),
            compute_auc(&o.curve),
            o.optimal_return
        );
    }
    let written = emit_outputs(&outcomes, &overrides.out).map_err(|e| e.to_string())?;
    print!("{summary}");
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_cmd(config: PathBuf, overrides: RunOverrides) -> Result<(), String> {
    let cfg = ExperimentConfig::from_file(&config).map_err(|e| e.to_string())?;
    let outcomes = run_configs(vec![cfg], &overrides)?;
    finish(outcomes, &overrides)
}

fn sweep_cmd(
    side: u32,
    demo: &str,
    coefficients: &[f64],
    overrides: RunOverrides,
) -> Result<(), String> {
    let demo_quality = parse_quality(demo)?;
    let mut configs = vec![ExperimentConfig {
        sides: vec![side],
        method: MethodSpec::DShape,
        demo_quality,
        ..Default::default()
    }];
    for &c in coefficients {
        configs.push(ExperimentConfig {
            sides: vec![side],
            method: MethodSpec::Manhattan,
            demo_quality,
            c,
            ..Default::default()
        });
    }
    let mut outcomes = run_configs(configs, &overrides)?;
    // Make the sweep curves distinguishable in file names and legends.
    let mut seen = 0;
    for o in outcomes.iter_mut() {
        if o.label.starts_with("manhattan") {
            o.label = format!("manhattan_c{}_{demo_quality}", coefficients[seen]);
            seen += 1;
        }
    }
    finish(outcomes, &overrides)
}

fn ablate_cmd(side: u32, demo: &str, overrides: RunOverrides) -> Result<(), String> {
    let demo_quality = parse_quality(demo)?;
    let flag_sets = [
        AblationFlags::full(),
        AblationFlags::no_relabel(),
        AblationFlags::augment_only(),
        AblationFlags::shaping_only(),
    ];
    let configs = flag_sets
        .into_iter()
        .map(|flags| ExperimentConfig {
            sides: vec![side],
            method: MethodSpec::DShapeAblation(flags),
            demo_quality,
            ..Default::default()
        })
        .collect();
    let outcomes = run_configs(configs, &overrides)?;
    finish(outcomes, &overrides)
}

fn oracle_cmd(side: u32, demo: &str) -> Result<(), String> {
    let quality = parse_quality(demo)?;
    // Reduced horizon keeps the exact solves small while leaving the goal
    // reachable from everywhere that matters.
    let spec = GridSpec::new(side)
        .and_then(|s| s.with_horizon(4 * side))
        .map_err(|e| e.to_string())?;
    let demo = make_demo(&spec, quality).map_err(|e| e.to_string())?;

    let theorem1 = check_theorem1(&spec, &demo).map_err(|e| e.to_string())?;
    print!("{theorem1}");
    let mutation =
        check_goal_dependent_mutation(&spec, &demo, 2.0).map_err(|e| e.to_string())?;
    print!("{mutation}");
    println!("  (a goal-dependent reward must break the equality; FAIL is the expected outcome)");
    let pbrs = check_policy_invariance(&spec, &demo, &PotentialFn::default())
        .map_err(|e| e.to_string())?;
    print!("{pbrs}");
    let sbs =
        check_sbs_invariance(&spec, &demo, &SbsParams::default()).map_err(|e| e.to_string())?;
    print!("{sbs}");
    let manhattan =
        check_manhattan_divergence(&spec, &demo, 25.0).map_err(|e| e.to_string())?;
    print!("{manhattan}");
    println!("  (the additive reward is free to diverge; FAIL here is the divergence mechanism)");

    let healthy = theorem1.passed && !mutation.passed && pbrs.passed && sbs.passed;
    if healthy {
        Ok(())
    } else {
        Err("oracle checks did not produce the expected certificates".into())
    }
}

fn plot_cmd(csvs: &[PathBuf], out: &PathBuf, optimal: Option<f64>) -> Result<(), String> {
    let mut curves = Vec::new();
    for path in csvs {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        let curve = parse_curve_csv(&text).map_err(|e| e.to_string())?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        curves.push((label, curve));
    }
    let refs: Vec<(String, &dshape::LearningCurve)> =
        curves.iter().map(|(l, c)| (l.clone(), c)).collect();
    let svg = render_curves_svg(&refs, optimal, "learning curves");
    std::fs::write(out, svg).map_err(|e| format!("{}: {e}", out.display()))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn demo_cmd(side: u32, tier: &str) -> Result<(), String> {
    let quality = parse_quality(tier)?;
    let spec = GridSpec::new(side).map_err(|e| e.to_string())?;
    let demo = make_demo(&spec, quality).map_err(|e| e.to_string())?;
    print!("{}", demo.to_table());
    Ok(())
}
