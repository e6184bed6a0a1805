//! Temporary calibration probe (deleted before ship): measures convergence,
//! AUC ordering, and visitation concentration at experiment scale.

use dshape::demo::DemoQuality;
use dshape::harness::{compute_auc, per_run_auc, run_side, ExperimentConfig, MethodSpec};
use dshape::qlearn::LearnerParams;

fn cfg(method: MethodSpec, quality: DemoQuality, n_runs: u32, steps: u64) -> ExperimentConfig {
    ExperimentConfig {
        sides: vec![10],
        method,
        demo_quality: quality,
        n_runs,
        learner: LearnerParams { total_steps: steps, ..Default::default() },
        ..Default::default()
    }
}

#[test]
#[ignore]
fn probe_dshape_convergence_and_visitation() {
    for quality in DemoQuality::ALL {
        let start = std::time::Instant::now();
        let out = run_side(&cfg(MethodSpec::DShape, quality, 10, 250_000), 10).unwrap();
        let finals = out.curve.final_returns();
        let within = finals.iter().filter(|r| (*r - (-17.0)).abs() <= 1.0).count();
        println!(
            "dshape {quality}: finals {:?} within1 {within}/10 edge_frac {:.3} auc {:.0} [{:?}]",
            finals,
            out.visitation.edge_fraction(),
            compute_auc(&out.curve),
            start.elapsed()
        );
    }
}

#[test]
#[ignore]
fn probe_auc_ordering() {
    let steps = 250_000;
    let d = run_side(&cfg(MethodSpec::DShape, DemoQuality::Optimal, 10, steps), 10).unwrap();
    let m = run_side(&cfg(MethodSpec::Manhattan, DemoQuality::Optimal, 10, steps), 10).unwrap();
    let q = run_side(&cfg(MethodSpec::QLearning, DemoQuality::Optimal, 10, steps), 10).unwrap();
    println!(
        "aucs: dshape {:?}\nmanhattan {:?}\nqlearning {:?}",
        per_run_auc(&d.curve),
        per_run_auc(&m.curve),
        per_run_auc(&q.curve)
    );
}

#[test]
#[ignore]
fn probe_manhattan_divergence() {
    let mut c = cfg(MethodSpec::Manhattan, DemoQuality::Worst, 10, 250_000);
    c.c = 25.0;
    let out = run_side(&c, 10).unwrap();
    println!("manhattan c=25 worst finals {:?}", out.curve.final_returns());
}

#[test]
#[ignore]
fn probe_sbs_runtime() {
    let start = std::time::Instant::now();
    let out = run_side(&cfg(MethodSpec::Sbs, DemoQuality::Optimal, 4, 250_000), 10).unwrap();
    println!("sbs finals {:?} [{:?}]", out.curve.final_returns(), start.elapsed());
}
