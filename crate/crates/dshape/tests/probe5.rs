//! Temporary visitation-accounting probe (deleted before ship).

use dshape::agent::{AblationFlags, DShapeAgent};
use dshape::demo::{make_demo, DemoQuality};
use dshape::grid::GridSpec;
use dshape::harness::{train_rng, VisitationMap};
use dshape::qlearn::{Learner, LearnerParams};

#[test]
#[ignore]
fn probe_training_visitation() {
    let spec = GridSpec::new(10).unwrap();
    for quality in [DemoQuality::Optimal, DemoQuality::Worst] {
        let demo = make_demo(&spec, quality).unwrap();
        for steps in [250_000u64, 50_000] {
            let mut fracs = Vec::new();
            for run in 0..8u32 {
                let agent = DShapeAgent::new(demo.clone(), AblationFlags::full(), 3, 1.0);
                let mut learner =
                    Learner::new(spec.clone(), agent, LearnerParams::default(), train_rng(0, run));
                let mut visits = VisitationMap::new(10);
                for _ in 0..steps {
                    visits.record(&[learner.current_state()]);
                    learner.train_step().unwrap();
                }
                fracs.push((visits.edge_fraction() * 1000.0).round() / 1000.0);
            }
            println!("{quality} training-visitation {steps}: {fracs:?}");
        }
    }
}
