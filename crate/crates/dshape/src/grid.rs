//! Deterministic sparse-reward gridworld: fixed start, fixed task goal, four
//! movement actions, −1 reward per step until the goal cell is entered.

use std::fmt;

use thiserror::Error;

/// A cell position. `(0, 0)` is the bottom-left corner; x grows to the
/// right, y grows upward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub fn new(x: u32, y: u32) -> Self {
        Cell { x, y }
    }

    /// L1 distance between two cells.
    pub fn manhattan(&self, other: &Cell) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Agent state: a position plus the number of env steps taken since reset.
/// The timestep is part of the state so that time-aligned demonstration
/// goals are a function of the state alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridState {
    pub x: u32,
    pub y: u32,
    pub t: u32,
}

impl GridState {
    pub fn new(x: u32, y: u32, t: u32) -> Self {
        GridState { x, y, t }
    }

    pub fn pos(&self) -> Cell {
        Cell::new(self.x, self.y)
    }
}

impl fmt::Display for GridState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, t={})", self.x, self.y, self.t)
    }
}

/// The four movement actions, with a stable 0..=3 encoding for table
/// indexing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn index(self) -> usize {
        match self {
            Action::Up => 0,
            Action::Down => 1,
            Action::Left => 2,
            Action::Right => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    fn delta(self) -> (i64, i64) {
        match self {
            Action::Up => (0, 1),
            Action::Down => (0, -1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
        };
        f.write_str(name)
    }
}

/// Result of one environment step. `terminal` means the goal cell was
/// entered; `truncated` means the time limit was hit without reaching it.
/// Truncation is not a true terminal: learners still bootstrap through it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next_state: GridState,
    pub reward: f64,
    pub terminal: bool,
    pub truncated: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid side must be at least 2, got {0}")]
    SideTooSmall(u32),
    #[error("cell {0} is outside a {1}x{1} grid")]
    OutOfBounds(Cell, u32),
    #[error("start and task goal must differ, both are {0}")]
    StartIsGoal(Cell),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("discount must be in (0, 1], got {0}")]
    BadDiscount(f64),
    #[error("cannot step {0}: the position is the task goal, the episode is over")]
    SteppedTerminal(GridState),
    #[error("cannot step {0}: the time limit has been reached")]
    SteppedExpired(GridState),
    #[error("task goal unreachable: shortest path is {distance} steps, horizon is {horizon}")]
    Unreachable { distance: u32, horizon: u32 },
}

/// Default episode time limit (env steps).
pub const DEFAULT_HORIZON: u32 = 500;

/// The gridworld task definition. Validated at construction; stepping is a
/// pure function of `(spec, state, action)`, so a spec can be shared across
/// threads freely.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    side: u32,
    start: Cell,
    task_goal: Cell,
    horizon: u32,
    gamma: f64,
}

impl GridSpec {
    /// Corner-to-corner task on a `side`×`side` grid: start at the bottom
    /// left, goal at the top right, horizon 500, γ = 1.
    pub fn new(side: u32) -> Result<Self, GridError> {
        let far = side.saturating_sub(1);
        Self::custom(side, Cell::new(0, 0), Cell::new(far, far), DEFAULT_HORIZON, 1.0)
    }

    pub fn custom(
        side: u32,
        start: Cell,
        task_goal: Cell,
        horizon: u32,
        gamma: f64,
    ) -> Result<Self, GridError> {
        if side < 2 {
            return Err(GridError::SideTooSmall(side));
        }
        for cell in [start, task_goal] {
            if cell.x >= side || cell.y >= side {
                return Err(GridError::OutOfBounds(cell, side));
            }
        }
        if start == task_goal {
            return Err(GridError::StartIsGoal(start));
        }
        if horizon == 0 {
            return Err(GridError::ZeroHorizon);
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(GridError::BadDiscount(gamma));
        }
        Ok(GridSpec { side, start, task_goal, horizon, gamma })
    }

    pub fn with_start(self, start: Cell) -> Result<Self, GridError> {
        Self::custom(self.side, start, self.task_goal, self.horizon, self.gamma)
    }

    pub fn with_horizon(self, horizon: u32) -> Result<Self, GridError> {
        Self::custom(self.side, self.start, self.task_goal, horizon, self.gamma)
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self, GridError> {
        Self::custom(self.side, self.start, self.task_goal, self.horizon, gamma)
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn task_goal(&self) -> Cell {
        self.task_goal
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn contains(&self, cell: &Cell) -> bool {
        cell.x < self.side && cell.y < self.side
    }

    /// The initial state.
    pub fn reset(&self) -> GridState {
        GridState::new(self.start.x, self.start.y, 0)
    }

    /// One deterministic step. Moves one cell in the direction of `a`,
    /// clamped to the grid; the reward reads the post-transition position:
    /// 0 on arrival at the task goal, −1 otherwise.
    pub fn step(&self, s: GridState, a: Action) -> Result<StepOutcome, GridError> {
        if !self.contains(&s.pos()) {
            return Err(GridError::OutOfBounds(s.pos(), self.side));
        }
        if s.pos() == self.task_goal {
            return Err(GridError::SteppedTerminal(s));
        }
        if s.t >= self.horizon {
            return Err(GridError::SteppedExpired(s));
        }
        let (dx, dy) = a.delta();
        let max = (self.side - 1) as i64;
        let nx = (s.x as i64 + dx).clamp(0, max) as u32;
        let ny = (s.y as i64 + dy).clamp(0, max) as u32;
        let next_state = GridState::new(nx, ny, s.t + 1);
        let terminal = next_state.pos() == self.task_goal;
        let reward = if terminal { 0.0 } else { -1.0 };
        let truncated = next_state.t == self.horizon && !terminal;
        Ok(StepOutcome { next_state, reward, terminal, truncated })
    }

    /// Undiscounted return of an optimal episode from the start: a shortest
    /// path takes `d` steps of which only the final arriving step is
    /// rewarded 0, so the optimal return is `-(d - 1)`. Matches the exact
    /// value-iteration solution.
    pub fn optimal_return(&self) -> Result<f64, GridError> {
        let d = self.start.manhattan(&self.task_goal);
        if d > self.horizon {
            return Err(GridError::Unreachable { distance: d, horizon: self.horizon });
        }
        Ok(-((d - 1) as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reset_returns_configured_start() {
        let spec = GridSpec::new(10).unwrap();
        assert_eq!(spec.reset(), GridState::new(0, 0, 0));

        let fig3 = GridSpec::new(5).unwrap();
        assert_eq!(fig3.reset(), GridState::new(0, 0, 0));

        let custom = GridSpec::new(10).unwrap().with_start(Cell::new(2, 3)).unwrap();
        assert_eq!(custom.reset(), GridState::new(2, 3, 0));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert_eq!(GridSpec::new(1).unwrap_err(), GridError::SideTooSmall(1));
        assert_eq!(
            GridSpec::custom(5, Cell::new(4, 4), Cell::new(4, 4), 500, 1.0).unwrap_err(),
            GridError::StartIsGoal(Cell::new(4, 4)),
        );
        assert_eq!(
            GridSpec::custom(5, Cell::new(0, 0), Cell::new(5, 0), 500, 1.0).unwrap_err(),
            GridError::OutOfBounds(Cell::new(5, 0), 5),
        );
        assert!(GridSpec::new(5).unwrap().with_horizon(0).is_err());
        assert!(GridSpec::new(5).unwrap().with_gamma(0.0).is_err());
        assert!(GridSpec::new(5).unwrap().with_gamma(1.5).is_err());
    }

    #[test]
    fn boundary_moves_clamp_in_place() {
        let spec = GridSpec::new(10).unwrap();
        let out = spec.step(GridState::new(0, 0, 0), Action::Left).unwrap();
        assert_eq!(out.next_state, GridState::new(0, 0, 1));
        assert_eq!(out.reward, -1.0);
        assert!(!out.terminal && !out.truncated);
    }

    #[test]
    fn arrival_is_terminal_with_zero_reward() {
        let spec = GridSpec::new(10).unwrap();
        let out = spec.step(GridState::new(9, 8, 7), Action::Up).unwrap();
        assert_eq!(out.next_state, GridState::new(9, 9, 8));
        assert_eq!(out.reward, 0.0);
        assert!(out.terminal);
        assert!(!out.truncated);
    }

    #[test]
    fn time_limit_truncates() {
        let spec = GridSpec::new(10).unwrap();
        let out = spec.step(GridState::new(3, 3, 499), Action::Right).unwrap();
        assert_eq!(out.next_state, GridState::new(4, 3, 500));
        assert_eq!(out.reward, -1.0);
        assert!(!out.terminal);
        assert!(out.truncated);
    }

    #[test]
    fn stepping_finished_states_is_rejected() {
        let spec = GridSpec::new(10).unwrap();
        let at_goal = GridState::new(9, 9, 20);
        assert_eq!(spec.step(at_goal, Action::Up).unwrap_err(), GridError::SteppedTerminal(at_goal));
        let expired = GridState::new(3, 3, 500);
        assert_eq!(
            spec.step(expired, Action::Up).unwrap_err(),
            GridError::SteppedExpired(expired)
        );
    }

    #[test]
    fn optimal_return_examples() {
        assert_eq!(GridSpec::new(10).unwrap().optimal_return().unwrap(), -17.0);
        assert_eq!(GridSpec::new(5).unwrap().optimal_return().unwrap(), -7.0);
        // One step to an adjacent goal earns reward 0.
        let adjacent = GridSpec::new(10).unwrap().with_start(Cell::new(9, 8)).unwrap();
        assert_eq!(adjacent.optimal_return().unwrap(), 0.0);
    }

    #[test]
    fn unreachable_goal_is_distinguished() {
        let spec = GridSpec::new(10).unwrap().with_horizon(5).unwrap();
        assert_eq!(
            spec.optimal_return().unwrap_err(),
            GridError::Unreachable { distance: 18, horizon: 5 }
        );
    }

    proptest! {
        #[test]
        fn step_is_deterministic_and_bounded(
            side in 2u32..30,
            x in 0u32..30,
            y in 0u32..30,
            t in 0u32..499,
            a in 0usize..4,
        ) {
            let spec = GridSpec::new(side).unwrap();
            let s = GridState::new(x.min(side - 1), y.min(side - 1), t);
            let a = Action::from_index(a).unwrap();
            match spec.step(s, a) {
                Err(e) => prop_assert_eq!(e, GridError::SteppedTerminal(s)),
                Ok(out) => {
                    // Determinism: identical inputs, identical outcome.
                    prop_assert_eq!(spec.step(s, a).unwrap(), out);
                    prop_assert!(spec.contains(&out.next_state.pos()));
                    prop_assert_eq!(out.next_state.t, s.t + 1);
                    // Reward range, and 0 exactly on arrival.
                    prop_assert!(out.reward == 0.0 || out.reward == -1.0);
                    prop_assert_eq!(out.reward == 0.0, out.terminal);
                    // One step changes the goal distance by at most 1.
                    let before = s.pos().manhattan(&spec.task_goal());
                    let after = out.next_state.pos().manhattan(&spec.task_goal());
                    prop_assert!(before.abs_diff(after) <= 1);
                }
            }
        }

        #[test]
        fn rollout_return_is_within_horizon_bounds(side in 2u32..12, seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let spec = GridSpec::new(side).unwrap().with_horizon(60).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut s = spec.reset();
            let mut total = 0.0;
            let mut steps = 0u32;
            loop {
                let a = Action::from_index(rng.gen_range(0..4)).unwrap();
                let out = spec.step(s, a).unwrap();
                total += out.reward;
                steps += 1;
                if out.terminal || out.truncated {
                    break;
                }
                s = out.next_state;
            }
            prop_assert!(steps <= spec.horizon());
            prop_assert!(total <= 0.0 && total >= -(spec.horizon() as f64));
        }
    }
}
