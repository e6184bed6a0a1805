//! The three comparison methods: similarity-based shaping (SBS), adapted
//! RIDM, and Q-learning with an additive Manhattan imitation reward.

use crate::agent::{AblationFlags, DShapeAgent, DEFAULT_RELABEL_GOALS};
use crate::demo::Demonstration;
use crate::grid::GridState;
use crate::qlearn::{Agent, StepContext};

/// SBS similarity and shaping-scale parameters. Defaults are the selected
/// values from the hyperparameter search: σ = 10, c = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbsParams {
    pub sigma: f64,
    pub c: f64,
}

impl Default for SbsParams {
    fn default() -> Self {
        SbsParams { sigma: 10.0, c: 1.0 }
    }
}

/// Manhattan imitation-reward coefficient; default c = 1. The divergence
/// study sweeps c over {1, 20, 25}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManhattanParams {
    pub c: f64,
}

impl Default for ManhattanParams {
    fn default() -> Self {
        ManhattanParams { c: 1.0 }
    }
}

/// Coefficients used in the Manhattan divergence sweep.
pub const MANHATTAN_SWEEP: [f64; 3] = [1.0, 20.0, 25.0];

/// Similarity-based potential: the maximum over demo states of
/// exp(−‖s − s_d‖₁ / (2σ)), with coordinates normalised to [0, 1] by the
/// grid extent. Always in (0, 1], and 1 exactly on demo states. The demo is
/// a few dozen states at most, so a linear scan does fine.
pub fn sbs_potential(params: &SbsParams, s: &GridState, demo: &Demonstration, side: u32) -> f64 {
    let scale = (side.saturating_sub(1)).max(1) as f64;
    let sx = s.x as f64 / scale;
    let sy = s.y as f64 / scale;
    let mut best = f64::NEG_INFINITY;
    for d in demo.states() {
        let l1 = (sx - d.x as f64 / scale).abs() + (sy - d.y as f64 / scale).abs();
        best = best.max((-l1 / (2.0 * params.sigma)).exp());
    }
    best
}

/// SBS shaped reward r + c·(γ·φ′ − φ), with φ′ read as zero on terminal
/// successors.
pub fn sbs_reward(
    r_task: f64,
    phi_s: f64,
    phi_next: f64,
    gamma: f64,
    c: f64,
    terminal: bool,
) -> f64 {
    let phi_to = if terminal { 0.0 } else { phi_next };
    r_task + c * (gamma * phi_to - phi_s)
}

/// Additive (non-potential) imitation reward: the task reward minus the
/// scaled distance from the current state to its time-aligned demo
/// lookahead. Unlike potential-based shaping this can change the optimal
/// policy; its divergence at large c with bad demos is expected behaviour.
pub fn manhattan_reward(r_task: f64, s: &GridState, demo: &Demonstration, c: f64) -> f64 {
    r_task - c * s.pos().manhattan(&demo.goal_at(s.t).pos()) as f64
}

/// Q-learning with the SBS potential-based shaping reward (no goal
/// augmentation; the potential is time-independent).
#[derive(Debug, Clone)]
pub struct SbsAgent {
    params: SbsParams,
    demo: Demonstration,
    side: u32,
    gamma: f64,
}

impl SbsAgent {
    pub fn new(params: SbsParams, demo: Demonstration, side: u32, gamma: f64) -> Self {
        SbsAgent { params, demo, side, gamma }
    }
}

impl Agent for SbsAgent {
    fn reward(&self, step: &StepContext) -> f64 {
        let phi_s = sbs_potential(&self.params, step.state, &self.demo, self.side);
        let phi_next = sbs_potential(&self.params, step.next_state, &self.demo, self.side);
        sbs_reward(step.r_task, phi_s, phi_next, self.gamma, self.params.c, step.terminal)
    }
}

/// Q-learning with the additive Manhattan imitation reward.
#[derive(Debug, Clone)]
pub struct ManhattanAgent {
    params: ManhattanParams,
    demo: Demonstration,
}

impl ManhattanAgent {
    pub fn new(params: ManhattanParams, demo: Demonstration) -> Self {
        ManhattanAgent { params, demo }
    }
}

impl Agent for ManhattanAgent {
    fn reward(&self, step: &StepContext) -> f64 {
        manhattan_reward(step.r_task, step.state, &self.demo, self.params.c)
    }
}

/// RIDM adapted to the shared base learner: Q-learning with
/// demonstration-state augmentation and no shaping or relabelling. No
/// hyperparameters of its own.
pub fn ridm_agent(demo: Demonstration, gamma: f64) -> DShapeAgent {
    DShapeAgent::new(demo, AblationFlags::augment_only(), DEFAULT_RELABEL_GOALS, gamma)
}
