//! Learning from a single state-only demonstration by treating
//! demonstration states as goals: tabular Q-learning over goal-augmented
//! states, a potential-based goal-reaching reward, and hindsight-style
//! relabelling with consecutive achieved-state pairs. Comes with the three
//! comparison baselines, an exact finite-horizon solver that certifies the
//! policy-invariance properties on small instances, and a multi-seed
//! experiment harness.
//!
//! The `book/` directory at the repository root walks through each concept
//! with runnable snippets; those snippets compile and run as doc-tests of
//! this crate (see the bottom of this file).

pub mod agent;
pub mod baselines;
pub mod demo;
pub mod grid;
pub mod harness;
pub mod oracle;
pub mod qlearn;
pub mod shaping;

pub use agent::{inference_action, relabel, AblationFlags, DShapeAgent};
pub use baselines::{
    manhattan_reward, ridm_agent, sbs_potential, sbs_reward, ManhattanAgent, ManhattanParams,
    SbsAgent, SbsParams,
};
pub use demo::{make_demo, DemoError, DemoQuality, Demonstration};
pub use grid::{Action, Cell, GridError, GridSpec, GridState, StepOutcome};
pub use harness::{
    compute_auc, emit_outputs, mann_whitney_u, per_run_auc, run_experiment, run_side,
    ExperimentConfig, HarnessError, LearningCurve, MethodOutcome, MethodSpec, VisitationMap,
};
pub use oracle::{
    check_goal_dependent_mutation, check_manhattan_divergence, check_policy_invariance,
    check_sbs_invariance, check_theorem1, value_iteration, value_iteration_augmented,
    Certificate, ExactSolution, OracleError,
};
pub use qlearn::{
    q_update, select_action, Agent, Learner, LearnerParams, QKey, QLearningAgent, QTable,
    ReplayBuffer, Transition,
};
pub use shaping::{shaped_reward, shaping_term, AugmentedState, PotentialFn};

// The book chapters double as doc-tests so their snippets can never drift
// from the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/gridworld.md")]
    mod gridworld {}
    #[doc = include_str!("../../../book/src/demonstrations.md")]
    mod demonstrations {}
    #[doc = include_str!("../../../book/src/q-learning.md")]
    mod q_learning {}
    #[doc = include_str!("../../../book/src/goal-shaping.md")]
    mod goal_shaping {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/invariance.md")]
    mod invariance {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
