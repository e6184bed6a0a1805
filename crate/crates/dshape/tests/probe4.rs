//! Temporary early-stop probe (deleted before ship): does every run reach
//! two consecutive evaluations within 1.0 of optimal, how early, and how
//! concentrated is the visitation at that point?

use dshape::agent::{AblationFlags, DShapeAgent};
use dshape::demo::{make_demo, DemoQuality};
use dshape::grid::GridSpec;
use dshape::harness::{eval_rng, train_rng, VisitationMap};
use dshape::qlearn::{Learner, LearnerParams};

#[test]
#[ignore]
fn probe_early_stop_rule() {
    let spec = GridSpec::new(10).unwrap();
    let optimal = spec.optimal_return().unwrap();
    for quality in DemoQuality::ALL {
        let demo = make_demo(&spec, quality).unwrap();
        let mut stops = Vec::new();
        let mut finals = Vec::new();
        let mut edges = Vec::new();
        for run in 0..15u32 {
            let agent = DShapeAgent::new(demo.clone(), AblationFlags::full(), 3, 1.0);
            let mut learner =
                Learner::new(spec.clone(), agent, LearnerParams::default(), train_rng(0, run));
            let mut eval = eval_rng(0, run);
            let mut prev_ok = false;
            let mut stopped_at = None;
            let mut last = learner.evaluate(10, &mut eval);
            for chunk in 1..=100u64 {
                learner.train(2500).unwrap();
                last = learner.evaluate(10, &mut eval);
                let ok = (last - optimal).abs() <= 1.0;
                if ok && prev_ok {
                    stopped_at = Some(chunk * 2500);
                    break;
                }
                prev_ok = ok;
            }
            let mut visits = VisitationMap::new(10);
            for _ in 0..100 {
                let (_, states) = learner.greedy_episode(&mut eval);
                visits.record(&states);
            }
            stops.push(stopped_at);
            finals.push(last);
            edges.push(visits.edge_fraction());
        }
        let converged = stops.iter().filter(|s| s.is_some()).count();
        println!(
            "{quality}: stopped {}/15 at {:?}\n  finals {:?}\n  edge fractions {:?}",
            converged,
            stops.iter().map(|s| s.map(|v| v / 1000)).collect::<Vec<_>>(),
            finals,
            edges.iter().map(|e| (e * 100.0).round() / 100.0).collect::<Vec<_>>()
        );
    }
}
