//! Goal-reaching potential and the potential-based shaping term added to the
//! task reward.

use crate::grid::GridState;

/// A state paired with its behaviour goal: the state space of the
/// goal-augmented MDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AugmentedState {
    pub state: GridState,
    pub goal: GridState,
}

impl AugmentedState {
    pub fn new(state: GridState, goal: GridState) -> Self {
        AugmentedState { state, goal }
    }
}

/// Negative-Manhattan-distance potential over augmented states. With
/// `terminal_zero` set (the default), the potential of a terminal successor
/// is forced to zero, which is what keeps potential-based shaping
/// policy-preserving in episodic tasks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialFn {
    pub terminal_zero: bool,
}

impl Default for PotentialFn {
    fn default() -> Self {
        PotentialFn { terminal_zero: true }
    }
}

impl PotentialFn {
    /// φ([s, g]) = −‖s − g‖₁. Zero exactly when the state sits on its goal,
    /// negative everywhere else.
    pub fn phi(&self, aug: &AugmentedState) -> f64 {
        -(aug.state.pos().manhattan(&aug.goal.pos()) as f64)
    }
}

/// Shaping term F = γ·φ(to) − φ(from), with φ(to) read as zero when the
/// transition enters a terminal state and the potential's episodic rule is
/// active.
pub fn shaping_term(
    phi: &PotentialFn,
    from: &AugmentedState,
    to: &AugmentedState,
    gamma: f64,
    to_terminal: bool,
) -> f64 {
    let phi_to = if to_terminal && phi.terminal_zero { 0.0 } else { phi.phi(to) };
    gamma * phi_to - phi.phi(from)
}

/// Goal-reaching reward: the task reward plus the shaping term.
pub fn shaped_reward(r_task: f64, shaping: f64) -> f64 {
    r_task + shaping
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aug(s: (u32, u32), g: (u32, u32)) -> AugmentedState {
        AugmentedState::new(GridState::new(s.0, s.1, 0), GridState::new(g.0, g.1, 0))
    }

    #[test]
    fn tracking_the_goal_costs_nothing() {
        let phi = PotentialFn::default();
        // Agent one step behind its goal before and after: distances 1 and 1.
        let f = shaping_term(&phi, &aug((0, 0), (1, 0)), &aug((1, 0), (2, 0)), 1.0, false);
        assert_eq!(f, 0.0);
    }

    #[test]
    fn sitting_on_the_goal_gives_zero_term() {
        let phi = PotentialFn::default();
        let f = shaping_term(&phi, &aug((2, 2), (2, 2)), &aug((3, 2), (3, 2)), 1.0, false);
        assert_eq!(f, 0.0);
    }

    #[test]
    fn terminal_transitions_release_the_stored_potential() {
        let phi = PotentialFn::default();
        // φ(from) = −3; terminal successor reads as φ = 0.
        let f = shaping_term(&phi, &aug((1, 1), (4, 1)), &aug((2, 1), (4, 1)), 1.0, true);
        assert_eq!(f, 3.0);
        // Without the episodic rule the raw potential is used instead.
        let raw = PotentialFn { terminal_zero: false };
        let f = shaping_term(&raw, &aug((1, 1), (4, 1)), &aug((2, 1), (4, 1)), 1.0, true);
        assert_eq!(f, 1.0);
    }

    #[test]
    fn shaped_reward_is_the_plain_sum() {
        assert_eq!(shaped_reward(-1.0, 0.0), -1.0);
        assert_eq!(shaped_reward(-1.0, 1.0), 0.0);
        assert_eq!(shaped_reward(0.0, 3.0), 3.0);
    }
}
