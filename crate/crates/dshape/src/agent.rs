//! The D-Shape learner: act with time-aligned demonstration states as
//! goals, shape the task reward with the goal potential, and relabel each
//! finished episode with consecutive achieved-state pairs. Each of the three
//! components can be switched off for ablations.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::demo::Demonstration;
use crate::grid::{Action, GridState};
use crate::qlearn::{Agent, QKey, QTable, RawTransition, StepContext, Transition};
use crate::shaping::{shaped_reward, shaping_term, AugmentedState, PotentialFn};

/// Default number of relabel goals per transition.
pub const DEFAULT_RELABEL_GOALS: usize = 3;

/// Which components are active. Relabelling needs a goal-reaching reward
/// and goals in the state, so `relabel` requires `shaping` and `augment`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AblationFlags {
    relabel: bool,
    shaping: bool,
    augment: bool,
}

#[derive(Debug, Error, PartialEq)]
#[error("goal relabelling requires both shaping and state augmentation")]
pub struct InvalidFlags;

impl AblationFlags {
    pub fn new(relabel: bool, shaping: bool, augment: bool) -> Result<Self, InvalidFlags> {
        if relabel && !(shaping && augment) {
            return Err(InvalidFlags);
        }
        Ok(AblationFlags { relabel, shaping, augment })
    }

    /// Full D-Shape: relabelling, shaping, and state augmentation.
    pub fn full() -> Self {
        AblationFlags { relabel: true, shaping: true, augment: true }
    }

    /// D-Shape without goal relabelling.
    pub fn no_relabel() -> Self {
        AblationFlags { relabel: false, shaping: true, augment: true }
    }

    /// State augmentation only (no relabelling, no shaping); this is the
    /// adapted RIDM baseline.
    pub fn augment_only() -> Self {
        AblationFlags { relabel: false, shaping: false, augment: true }
    }

    /// Shaping only: the potential still tracks the time-aligned demo goal,
    /// but goals are not part of the table key.
    pub fn shaping_only() -> Self {
        AblationFlags { relabel: false, shaping: true, augment: false }
    }

    /// Everything off: plain Q-learning.
    pub fn none() -> Self {
        AblationFlags { relabel: false, shaping: false, augment: false }
    }

    pub fn relabel(&self) -> bool {
        self.relabel
    }

    pub fn shaping(&self) -> bool {
        self.shaping
    }

    pub fn augment(&self) -> bool {
        self.augment
    }
}

/// The D-Shape agent hooks (and, with flags switched off, its ablations).
#[derive(Debug, Clone)]
pub struct DShapeAgent {
    flags: AblationFlags,
    n_goals: usize,
    potential: PotentialFn,
    gamma: f64,
    demo: Demonstration,
}

impl DShapeAgent {
    pub fn new(demo: Demonstration, flags: AblationFlags, n_goals: usize, gamma: f64) -> Self {
        DShapeAgent { flags, n_goals, potential: PotentialFn::default(), gamma, demo }
    }

    /// Full D-Shape with the default relabel count.
    pub fn full(demo: Demonstration, gamma: f64) -> Self {
        Self::new(demo, AblationFlags::full(), DEFAULT_RELABEL_GOALS, gamma)
    }

    pub fn flags(&self) -> AblationFlags {
        self.flags
    }

    pub fn demo(&self) -> &Demonstration {
        &self.demo
    }

    pub fn potential(&self) -> &PotentialFn {
        &self.potential
    }
}

impl Agent for DShapeAgent {
    fn augment(&self) -> bool {
        self.flags.augment
    }

    fn goal(&self, t: u32) -> Option<GridState> {
        if self.flags.augment || self.flags.shaping {
            Some(self.demo.goal_at(t))
        } else {
            None
        }
    }

    fn reward(&self, step: &StepContext) -> f64 {
        if !self.flags.shaping {
            return step.r_task;
        }
        let goal = step.goal.expect("shaping needs a goal for the current step");
        let next_goal = step.next_goal.expect("shaping needs a goal for the next step");
        let from = AugmentedState::new(*step.state, *goal);
        let to = AugmentedState::new(*step.next_state, *next_goal);
        let f = shaping_term(&self.potential, &from, &to, self.gamma, step.terminal);
        shaped_reward(step.r_task, f)
    }

    fn on_episode_end(&self, episode: &[Transition], rng: &mut ChaCha8Rng) -> Vec<Transition> {
        if self.flags.relabel {
            relabel(episode, self.n_goals, &self.potential, self.gamma, rng)
        } else {
            Vec::new()
        }
    }
}

/// Relabel every transition of a finished episode with `n_goals` goal pairs,
/// each drawn uniformly (with replacement) from the episode's consecutive
/// achieved-state pairs (s_k, s_{k+1}). The task-reward component is left
/// untouched; only the shaping term is recomputed for the substituted goals.
/// A single-step episode has exactly one pair, its own.
pub fn relabel(
    episode: &[Transition],
    n_goals: usize,
    potential: &PotentialFn,
    gamma: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Transition> {
    if episode.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(episode.len() * n_goals);
    for tr in episode {
        for _ in 0..n_goals {
            let k = rng.gen_range(0..episode.len());
            let goal = episode[k].raw.state;
            let next_goal = episode[k].raw.next_state;
            let from = AugmentedState::new(tr.raw.state, goal);
            let to = AugmentedState::new(tr.raw.next_state, next_goal);
            let f = shaping_term(potential, &from, &to, gamma, tr.terminal);
            out.push(Transition {
                key: QKey::augmented(tr.raw.state.pos(), goal.pos()),
                action: tr.action,
                reward: shaped_reward(tr.raw.r_task, f),
                next_key: QKey::augmented(tr.raw.next_state.pos(), next_goal.pos()),
                // Terminality is task terminality, not goal reaching: the
                // relabelled reward's task component is goal-independent.
                terminal: tr.terminal,
                raw: RawTransition {
                    state: tr.raw.state,
                    goal: Some(goal),
                    next_state: tr.raw.next_state,
                    next_goal: Some(next_goal),
                    r_task: tr.raw.r_task,
                },
            });
        }
    }
    out
}

/// Greedy action for a trained table, with the demonstration state as the
/// inference-time goal.
pub fn inference_action(
    q: &QTable,
    s: &GridState,
    demo: &Demonstration,
    rng: &mut ChaCha8Rng,
) -> Action {
    let key = if q.is_augmented() {
        QKey::augmented(s.pos(), demo.goal_at(s.t).pos())
    } else {
        QKey::plain(s.pos())
    };
    q.greedy_action(&key, rng)
}
