//! State-only demonstrations in four quality tiers. A demonstration is a
//! legal state sequence from the environment start; suboptimal tiers stop at
//! an alternative goal a fixed Manhattan distance short of the task goal.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::grid::{Action, Cell, GridSpec, GridState};

/// Demonstration quality. Suboptimal tiers end 2, 4, or 6 Manhattan steps
/// away from the task goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DemoQuality {
    Optimal,
    Good,
    Medium,
    Worst,
}

impl DemoQuality {
    pub const ALL: [DemoQuality; 4] =
        [DemoQuality::Optimal, DemoQuality::Good, DemoQuality::Medium, DemoQuality::Worst];

    /// Manhattan distance from the demo's end state to the task goal.
    pub fn goal_distance(self) -> u32 {
        match self {
            DemoQuality::Optimal => 0,
            DemoQuality::Good => 2,
            DemoQuality::Medium => 4,
            DemoQuality::Worst => 6,
        }
    }
}

impl fmt::Display for DemoQuality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DemoQuality::Optimal => "optimal",
            DemoQuality::Good => "good",
            DemoQuality::Medium => "medium",
            DemoQuality::Worst => "worst",
        };
        f.write_str(name)
    }
}

impl FromStr for DemoQuality {
    type Err = DemoError;

    fn from_str(s: &str) -> Result<Self, DemoError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "optimal" => Ok(DemoQuality::Optimal),
            "good" => Ok(DemoQuality::Good),
            "medium" => Ok(DemoQuality::Medium),
            "worst" => Ok(DemoQuality::Worst),
            other => Err(DemoError::UnknownQuality(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DemoError {
    #[error("{quality} demo infeasible: it must stop {cut} steps short of the goal but the shortest path has only {path} steps")]
    TierInfeasible { quality: DemoQuality, cut: u32, path: u32 },
    #[error("unknown demo quality {0:?} (expected optimal, good, medium, or worst)")]
    UnknownQuality(String),
    #[error("demo row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error("demo must contain at least two states")]
    TooShort,
    #[error("demo must start at the environment start {expected}, got {found}")]
    WrongStart { expected: Cell, found: Cell },
    #[error("demo states {from} and {to} (index {index}) are not connected by a legal move")]
    IllegalMove { index: usize, from: GridState, to: GridState },
    #[error("demo ends {distance} Manhattan steps from the task goal, which matches no quality tier")]
    UnknownTier { distance: u32 },
}

/// A single state-only demonstration. The i-th state carries timestep i, so
/// the goal served at env time t is simply the state at index t+1 (clamped
/// to the final state once the demo runs out).
#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    states: Vec<GridState>,
    quality: DemoQuality,
    demo_goal: Cell,
}

/// Build the edge-following demonstration for a tier: from the start, move
/// along x toward the goal column, then along y toward the goal row (for the
/// corner-to-corner task this traces the bottom edge, then the right edge).
/// Suboptimal tiers use the same path truncated `goal_distance()` steps
/// short of the task goal; while the cut stays on the vertical leg this
/// places the alternative goal on the right edge, `k` cells below the goal.
pub fn make_demo(spec: &GridSpec, quality: DemoQuality) -> Result<Demonstration, DemoError> {
    let start = spec.start();
    let goal = spec.task_goal();
    let path_len = start.manhattan(&goal);
    let cut = quality.goal_distance();
    if cut >= path_len {
        return Err(DemoError::TierInfeasible { quality, cut, path: path_len });
    }

    let mut states = Vec::with_capacity((path_len - cut + 1) as usize);
    let mut cell = start;
    let mut t = 0;
    states.push(GridState::new(cell.x, cell.y, t));
    while cell != goal && t < path_len - cut {
        if cell.x != goal.x {
            cell.x = if cell.x < goal.x { cell.x + 1 } else { cell.x - 1 };
        } else {
            cell.y = if cell.y < goal.y { cell.y + 1 } else { cell.y - 1 };
        }
        t += 1;
        states.push(GridState::new(cell.x, cell.y, t));
    }

    Ok(Demonstration { states, quality, demo_goal: cell })
}

impl Demonstration {
    /// Reconstruct a demonstration from externally supplied states,
    /// validating trajectory legality against the environment and
    /// classifying the quality tier from the end state.
    pub fn from_states(spec: &GridSpec, states: Vec<GridState>) -> Result<Self, DemoError> {
        if states.len() < 2 {
            return Err(DemoError::TooShort);
        }
        if states[0].pos() != spec.start() {
            return Err(DemoError::WrongStart { expected: spec.start(), found: states[0].pos() });
        }
        for (i, pair) in states.windows(2).enumerate() {
            let (from, to) = (pair[0], pair[1]);
            let replayable = from.t == i as u32
                && Action::ALL.iter().any(|&a| match spec.step(from, a) {
                    Ok(out) => out.next_state == to,
                    Err(_) => false,
                });
            if !replayable {
                return Err(DemoError::IllegalMove { index: i, from, to });
            }
        }
        let demo_goal = states.last().unwrap().pos();
        let distance = demo_goal.manhattan(&spec.task_goal());
        let quality = DemoQuality::ALL
            .into_iter()
            .find(|q| q.goal_distance() == distance)
            .ok_or(DemoError::UnknownTier { distance })?;
        Ok(Demonstration { states, quality, demo_goal })
    }

    pub fn states(&self) -> &[GridState] {
        &self.states
    }

    pub fn quality(&self) -> DemoQuality {
        self.quality
    }

    /// The cell the demonstration terminates at.
    pub fn demo_goal(&self) -> Cell {
        self.demo_goal
    }

    /// Index of the final demo state.
    pub fn last_index(&self) -> usize {
        self.states.len() - 1
    }

    /// Goal served to the agent at env time `t`: the demo state one step
    /// ahead, clamped to the final state. Total for every t.
    pub fn goal_at(&self, t: u32) -> GridState {
        let idx = (t as usize).saturating_add(1).min(self.last_index());
        self.states[idx]
    }

    /// Plain-text table of `t x y` rows, one per demo state.
    pub fn to_table(&self) -> String {
        let mut out = String::from("# t x y\n");
        for s in &self.states {
            out.push_str(&format!("{} {} {}\n", s.t, s.x, s.y));
        }
        out
    }

    /// Parse the `t x y` table format (blank lines and `#` comments are
    /// ignored), validating against the environment.
    pub fn parse_table(spec: &GridSpec, text: &str) -> Result<Self, DemoError> {
        let mut states = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(DemoError::BadRow {
                    row: lineno + 1,
                    message: format!("expected 3 fields `t x y`, got {}", fields.len()),
                });
            }
            let parse = |s: &str| -> Result<u32, DemoError> {
                s.parse().map_err(|_| DemoError::BadRow {
                    row: lineno + 1,
                    message: format!("{s:?} is not a non-negative integer"),
                })
            };
            let (t, x, y) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
            if t as usize != states.len() {
                return Err(DemoError::BadRow {
                    row: lineno + 1,
                    message: format!("timestep {t} out of order, expected {}", states.len()),
                });
            }
            states.push(GridState::new(x, y, t));
        }
        Self::from_states(spec, states)
    }
}
