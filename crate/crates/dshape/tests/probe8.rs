//! Temporary probe (deleted before ship): ablation AUC ordering and the
//! Manhattan c=25 divergence finals.

use dshape::agent::AblationFlags;
use dshape::demo::DemoQuality;
use dshape::harness::{per_run_auc, run_side, ExperimentConfig, MethodSpec};
use dshape::qlearn::LearnerParams;

fn cfg(method: MethodSpec, quality: DemoQuality, c: f64) -> ExperimentConfig {
    ExperimentConfig {
        sides: vec![10],
        method,
        demo_quality: quality,
        n_runs: 10,
        c,
        learner: LearnerParams { total_steps: 250_000, ..Default::default() },
        ..Default::default()
    }
}

#[test]
#[ignore]
fn probe_ablation_aucs() {
    for (name, flags) in [
        ("full", AblationFlags::full()),
        ("no_gr", AblationFlags::no_relabel()),
        ("no_gr_no_shaping(ridm)", AblationFlags::augment_only()),
        ("no_gr_no_augment", AblationFlags::shaping_only()),
    ] {
        let out = run_side(
            &cfg(MethodSpec::DShapeAblation(flags), DemoQuality::Optimal, 1.0),
            10,
        )
        .unwrap();
        let aucs = per_run_auc(&out.curve);
        println!(
            "{name}: mean auc {:.0}, per-run {:?}",
            aucs.iter().sum::<f64>() / aucs.len() as f64,
            aucs.iter().map(|a| a.round()).collect::<Vec<_>>()
        );
    }
}

#[test]
#[ignore]
fn probe_manhattan_c25_divergence() {
    let out = run_side(&cfg(MethodSpec::Manhattan, DemoQuality::Worst, 25.0), 10).unwrap();
    println!("manhattan c25 worst finals: {:?}", out.curve.final_returns());
    println!(
        "mean final: {:.1}",
        out.curve.final_returns().iter().sum::<f64>() / 10.0
    );
}
