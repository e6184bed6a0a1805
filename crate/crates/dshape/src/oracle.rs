//! Exact finite-horizon dynamic programming on the task MDP and on its
//! goal-augmented variants, used to certify that goal augmentation and
//! potential-based shaping leave optimal action sets unchanged, and to
//! supply ground-truth values for tests.
//!
//! All solves are backward inductions over (cell, t); the augmented solves
//! run under the deterministic demonstration goal kernel, where the goal at
//! time t is the demo state one step ahead (clamped to the demo's end).
//! Shaped solves read the potential of any episode-ending successor —
//! arrival at the goal or expiry of the horizon — as zero; without that,
//! argmax preservation genuinely fails at states that can no longer reach
//! the goal in the remaining time.

use std::fmt;

use thiserror::Error;

use crate::baselines::{sbs_potential, SbsParams};
use crate::demo::Demonstration;
use crate::grid::{Action, Cell, GridSpec, GridState};
use crate::shaping::{AugmentedState, PotentialFn};

/// Absolute tolerance for "equal to the maximum" when extracting argmax
/// sets. Under γ = 1 all quantities are small integers, so ties are exact
/// in practice.
pub const ARGMAX_TOL: f64 = 1e-9;

/// Budget on side² · (horizon + 1) for an exact solve.
pub const MAX_ORACLE_STATES: usize = 4_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("exact solve too large: side {side} x horizon {horizon} is {states} states, budget {budget}")]
    TooLarge { side: u32, horizon: u32, states: usize, budget: usize },
}

/// A set of actions, stored as a 4-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionSet(u8);

impl ActionSet {
    pub const EMPTY: ActionSet = ActionSet(0);

    /// Actions whose value is within [`ARGMAX_TOL`] of the maximum.
    pub fn argmax(values: &[f64; 4]) -> ActionSet {
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut set = ActionSet::EMPTY;
        for a in Action::ALL {
            if (max - values[a.index()]).abs() <= ARGMAX_TOL {
                set.insert(a);
            }
        }
        set
    }

    pub fn insert(&mut self, a: Action) {
        self.0 |= 1 << a.index();
    }

    pub fn contains(&self, a: Action) -> bool {
        self.0 & (1 << a.index()) != 0
    }

    pub fn is_subset(&self, other: &ActionSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Action> + '_ {
        Action::ALL.into_iter().filter(|a| self.contains(*a))
    }
}

impl fmt::Display for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

fn check_budget(spec: &GridSpec) -> Result<(), OracleError> {
    let states = (spec.side() as usize).pow(2) * (spec.horizon() as usize + 1);
    if states > MAX_ORACLE_STATES {
        return Err(OracleError::TooLarge {
            side: spec.side(),
            horizon: spec.horizon(),
            states,
            budget: MAX_ORACLE_STATES,
        });
    }
    Ok(())
}

/// Exact solution over (cell, t): optimal V, Q, and argmax sets. Terminal
/// and expired states have V = 0.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    side: u32,
    horizon: u32,
    goal: Cell,
    v: Vec<f64>,      // (horizon + 1) slices of side²
    q: Vec<[f64; 4]>, // horizon slices of side²
}

impl ExactSolution {
    fn cells(&self) -> usize {
        (self.side as usize).pow(2)
    }

    fn cell_index(&self, c: Cell) -> usize {
        c.y as usize * self.side as usize + c.x as usize
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn value(&self, s: &GridState) -> f64 {
        if s.t > self.horizon {
            return 0.0;
        }
        self.v[s.t as usize * self.cells() + self.cell_index(s.pos())]
    }

    /// Q-values at a non-terminal, non-expired state.
    pub fn q_values(&self, s: &GridState) -> [f64; 4] {
        assert!(s.t < self.horizon, "no actions at an expired state");
        assert!(s.pos() != self.goal, "no actions at the terminal state");
        self.q[s.t as usize * self.cells() + self.cell_index(s.pos())]
    }

    pub fn optimal_actions(&self, s: &GridState) -> ActionSet {
        ActionSet::argmax(&self.q_values(s))
    }
}

/// Backward induction on the task MDP. The reward hook sees the full
/// transition so the same engine also solves reward-modified variants.
fn solve_plain<R>(spec: &GridSpec, reward: R) -> Result<ExactSolution, OracleError>
where
    R: Fn(&GridState, Action, &GridState, bool, bool) -> f64,
{
    check_budget(spec)?;
    let side = spec.side();
    let h = spec.horizon();
    let cells = (side as usize).pow(2);
    let goal = spec.task_goal();
    let gamma = spec.gamma();

    let mut v = vec![0.0; cells * (h as usize + 1)];
    let mut q = vec![[0.0; 4]; cells * h as usize];

    for t in (0..h).rev() {
        for y in 0..side {
            for x in 0..side {
                let cell = Cell::new(x, y);
                let idx = t as usize * cells + (y * side + x) as usize;
                if cell == goal {
                    continue; // terminal: V = 0, no actions
                }
                let s = GridState::new(x, y, t);
                let mut best = f64::NEG_INFINITY;
                let mut row = [0.0; 4];
                for a in Action::ALL {
                    let out = spec.step(s, a).expect("solver only steps live states");
                    let next = out.next_state;
                    let expired = next.t == h;
                    let v_next = if out.terminal || expired {
                        0.0
                    } else {
                        v[next.t as usize * cells + (next.y * side + next.x) as usize]
                    };
                    let r = reward(&s, a, &next, out.terminal, expired);
                    let value = r + gamma * v_next;
                    row[a.index()] = value;
                    best = best.max(value);
                }
                q[idx] = row;
                v[idx] = best;
            }
        }
    }

    Ok(ExactSolution { side, horizon: h, goal, v, q })
}

/// Exact optimal solution of the task MDP.
pub fn value_iteration(spec: &GridSpec) -> Result<ExactSolution, OracleError> {
    solve_plain(spec, |_s, _a, next, _terminal, _expired| {
        if next.pos() == spec.task_goal() {
            0.0
        } else {
            -1.0
        }
    })
}

/// Exact solution over augmented states under the demonstration goal
/// kernel. The goal at time t is determined by t, so storage is again
/// (cell, t) with the goal sequence kept alongside.
#[derive(Debug, Clone)]
pub struct AugmentedExactSolution {
    base: ExactSolution,
    goals: Vec<GridState>, // goal at each t in 0..=horizon
    shaped: bool,
}

impl AugmentedExactSolution {
    pub fn shaped(&self) -> bool {
        self.shaped
    }

    /// The goal paired with states at time t under the demo kernel.
    pub fn goal_at(&self, t: u32) -> GridState {
        self.goals[(t as usize).min(self.goals.len() - 1)]
    }

    pub fn value(&self, s: &GridState) -> f64 {
        self.base.value(s)
    }

    pub fn q_values(&self, s: &GridState) -> [f64; 4] {
        self.base.q_values(s)
    }

    pub fn optimal_actions(&self, s: &GridState) -> ActionSet {
        self.base.optimal_actions(s)
    }
}

fn solve_augmented<R>(
    spec: &GridSpec,
    demo: &Demonstration,
    shaped: bool,
    reward: R,
) -> Result<AugmentedExactSolution, OracleError>
where
    // (s, goal, a, next, next_goal, terminal, expired) -> reward
    R: Fn(&GridState, &GridState, Action, &GridState, &GridState, bool, bool) -> f64,
{
    let goals: Vec<GridState> = (0..=spec.horizon()).map(|t| demo.goal_at(t)).collect();
    let base = solve_plain(spec, |s, a, next, terminal, expired| {
        let g = &goals[s.t as usize];
        let g_next = &goals[next.t as usize];
        reward(s, g, a, next, g_next, terminal, expired)
    })?;
    Ok(AugmentedExactSolution { base, goals, shaped })
}

/// Exact solution of the goal-augmented MDP: unshaped (task reward only)
/// when `shaping` is `None`, shaped with the goal potential otherwise.
pub fn value_iteration_augmented(
    spec: &GridSpec,
    demo: &Demonstration,
    shaping: Option<&PotentialFn>,
) -> Result<AugmentedExactSolution, OracleError> {
    let task = |next: &GridState| if next.pos() == spec.task_goal() { 0.0 } else { -1.0 };
    match shaping {
        None => solve_augmented(spec, demo, false, move |_s, _g, _a, next, _gn, _term, _exp| {
            task(next)
        }),
        Some(potential) => {
            let potential = *potential;
            let gamma = spec.gamma();
            solve_augmented(spec, demo, true, move |s, g, _a, next, g_next, terminal, expired| {
                let from = AugmentedState::new(*s, *g);
                let to = AugmentedState::new(*next, *g_next);
                let ended = terminal || expired;
                let phi_to =
                    if ended && potential.terminal_zero { 0.0 } else { potential.phi(&to) };
                task(next) + gamma * phi_to - potential.phi(&from)
            })
        }
    }
}

/// Augmented solve with a deliberately goal-dependent reward: a bonus is
/// paid whenever the successor lands on its goal cell. This violates the
/// premise that the augmented reward ignores goals, so the argmax-set
/// equality with the task MDP is expected to break.
pub fn value_iteration_goal_bonus(
    spec: &GridSpec,
    demo: &Demonstration,
    bonus: f64,
) -> Result<AugmentedExactSolution, OracleError> {
    let task = |next: &GridState| if next.pos() == spec.task_goal() { 0.0 } else { -1.0 };
    solve_augmented(spec, demo, false, move |_s, _g, _a, next, g_next, _term, _exp| {
        let hit = next.pos() == g_next.pos();
        task(next) + if hit { bonus } else { 0.0 }
    })
}

/// Cells reachable at each t by forward closure from the start under all
/// actions. Arrival at the task goal absorbs.
fn reachable_sets(spec: &GridSpec) -> Vec<Vec<bool>> {
    let side = spec.side();
    let cells = (side as usize).pow(2);
    let h = spec.horizon() as usize;
    let mut reach = vec![vec![false; cells]; h + 1];
    let start = spec.start();
    reach[0][(start.y * side + start.x) as usize] = true;
    for t in 0..h {
        for y in 0..side {
            for x in 0..side {
                if !reach[t][(y * side + x) as usize] || Cell::new(x, y) == spec.task_goal() {
                    continue;
                }
                let s = GridState::new(x, y, t as u32);
                for a in Action::ALL {
                    let next = spec.step(s, a).expect("closure only steps live states").next_state;
                    reach[t + 1][(next.y * side + next.x) as usize] = true;
                }
            }
        }
    }
    reach
}

/// One argmax-set mismatch found by a certificate check.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub state: GridState,
    pub goal: Option<GridState>,
    pub expected: ActionSet,
    pub found: ActionSet,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {}", self.state)?;
        if let Some(g) = &self.goal {
            write!(f, " with goal {}", g)?;
        }
        write!(f, ": expected {}, found {}", self.expected, self.found)
    }
}

/// Result of an exact theory check: pass/fail plus the mismatches found,
/// rendered as a structured text report.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub name: String,
    pub context: String,
    pub passed: bool,
    pub states_checked: usize,
    pub counterexamples: Vec<Counterexample>,
    pub notes: Vec<String>,
}

impl Certificate {
    fn new(name: &str, context: String) -> Self {
        Certificate {
            name: name.to_string(),
            context,
            passed: true,
            states_checked: 0,
            counterexamples: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn record(&mut self, cx: Counterexample) {
        self.passed = false;
        self.counterexamples.push(cx);
    }
}

const REPORTED_COUNTEREXAMPLES: usize = 5;

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} ({}; {} states checked, {} counterexamples)",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.context,
            self.states_checked,
            self.counterexamples.len()
        )?;
        for cx in self.counterexamples.iter().take(REPORTED_COUNTEREXAMPLES) {
            writeln!(f, "  counterexample {cx}")?;
        }
        if self.counterexamples.len() > REPORTED_COUNTEREXAMPLES {
            writeln!(f, "  ... and {} more", self.counterexamples.len() - REPORTED_COUNTEREXAMPLES)?;
        }
        for note in &self.notes {
            writeln!(f, "  note: {note}")?;
        }
        Ok(())
    }
}

fn context_of(spec: &GridSpec, demo: &Demonstration) -> String {
    format!(
        "{side}x{side}, {quality} demo, horizon {h}",
        side = spec.side(),
        quality = demo.quality(),
        h = spec.horizon()
    )
}

/// Compare argmax sets of an augmented solve against the task solve at
/// every reachable non-terminal (state, t); under the demo kernel the goal
/// at time t is fixed, so these are exactly the reachable augmented states.
fn compare_augmented_to_base(
    cert: &mut Certificate,
    spec: &GridSpec,
    base: &ExactSolution,
    aug: &AugmentedExactSolution,
) -> (f64, f64) {
    let reach = reachable_sets(spec);
    let side = spec.side();
    let mut max_v_gap: f64 = 0.0;
    let mut max_q_gap: f64 = 0.0;
    for t in 0..spec.horizon() {
        for y in 0..side {
            for x in 0..side {
                if !reach[t as usize][(y * side + x) as usize] || Cell::new(x, y) == spec.task_goal()
                {
                    continue;
                }
                let s = GridState::new(x, y, t);
                cert.states_checked += 1;
                let expected = base.optimal_actions(&s);
                let found = aug.optimal_actions(&s);
                if expected != found {
                    cert.record(Counterexample {
                        state: s,
                        goal: Some(aug.goal_at(t)),
                        expected,
                        found,
                    });
                }
                max_v_gap = max_v_gap.max((base.value(&s) - aug.value(&s)).abs());
                let (bq, aq) = (base.q_values(&s), aug.q_values(&s));
                for a in Action::ALL {
                    max_q_gap = max_q_gap.max((bq[a.index()] - aq[a.index()]).abs());
                }
            }
        }
    }
    (max_v_gap, max_q_gap)
}

/// Evaluate, in the task MDP, the policy extracted greedily from the
/// augmented solve (first optimal action at [s, g_t], executed at (s, t)).
/// Returns the largest gap between that policy's value and the optimal task
/// value over reachable states; zero means the extracted goal-conditioned
/// policy is optimal in the task MDP.
fn extracted_policy_gap(
    spec: &GridSpec,
    base: &ExactSolution,
    aug: &AugmentedExactSolution,
) -> f64 {
    let side = spec.side();
    let cells = (side as usize).pow(2);
    let h = spec.horizon() as usize;
    let goal = spec.task_goal();
    let mut v_pi = vec![0.0; cells * (h + 1)];
    for t in (0..h).rev() {
        for y in 0..side {
            for x in 0..side {
                if Cell::new(x, y) == goal {
                    continue;
                }
                let s = GridState::new(x, y, t as u32);
                let a = aug.optimal_actions(&s).iter().next().expect("nonempty argmax");
                let out = spec.step(s, a).expect("policy evaluation steps live states");
                let next = out.next_state;
                let cont = if out.terminal || next.t as usize == h {
                    0.0
                } else {
                    v_pi[next.t as usize * cells + (next.y * side + next.x) as usize]
                };
                v_pi[t * cells + (y * side + x) as usize] = out.reward + spec.gamma() * cont;
            }
        }
    }
    let reach = reachable_sets(spec);
    let mut gap: f64 = 0.0;
    for t in 0..h {
        for y in 0..side {
            for x in 0..side {
                if !reach[t][(y * side + x) as usize] || Cell::new(x, y) == goal {
                    continue;
                }
                let s = GridState::new(x, y, t as u32);
                gap = gap.max((v_pi[t * cells + (y * side + x) as usize] - base.value(&s)).abs());
            }
        }
    }
    gap
}

/// Executable check of goal-relabelling consistency: at every reachable
/// augmented state, the argmax set of the (unshaped) goal-augmented solve
/// equals the task argmax set, and the optimal values coincide.
pub fn check_theorem1(spec: &GridSpec, demo: &Demonstration) -> Result<Certificate, OracleError> {
    let base = value_iteration(spec)?;
    let aug = value_iteration_augmented(spec, demo, None)?;
    let mut cert = Certificate::new("Theorem 1", context_of(spec, demo));
    let (v_gap, q_gap) = compare_augmented_to_base(&mut cert, spec, &base, &aug);
    cert.notes.push(format!("max |V_aug - V| over reachable states: {v_gap:.2e}"));
    cert.notes.push(format!("max |Q_aug - Q| over reachable states: {q_gap:.2e}"));
    let ext_gap = extracted_policy_gap(spec, &base, &aug);
    cert.notes.push(format!("extracted greedy policy optimality gap in the task MDP: {ext_gap:.2e}"));
    if v_gap > ARGMAX_TOL || q_gap > ARGMAX_TOL || ext_gap > ARGMAX_TOL {
        cert.passed = false;
    }
    Ok(cert)
}

/// Mutation test for the theorem check: inject a goal-dependent bonus and
/// confirm the argmax-set equality breaks with a concrete counterexample.
pub fn check_goal_dependent_mutation(
    spec: &GridSpec,
    demo: &Demonstration,
    bonus: f64,
) -> Result<Certificate, OracleError> {
    let base = value_iteration(spec)?;
    let mutated = value_iteration_goal_bonus(spec, demo, bonus)?;
    let mut cert = Certificate::new(
        "Goal-dependent reward mutation",
        format!("{}, bonus {bonus}", context_of(spec, demo)),
    );
    let _ = compare_augmented_to_base(&mut cert, spec, &base, &mutated);
    Ok(cert)
}

/// Policy-invariance check for the goal potential: the shaped and unshaped
/// augmented solves must have identical argmax sets at every reachable
/// augmented state. Under γ = 1 the check also verifies the value identity
/// Q_shaped = Q_unshaped − φ.
pub fn check_policy_invariance(
    spec: &GridSpec,
    demo: &Demonstration,
    potential: &PotentialFn,
) -> Result<Certificate, OracleError> {
    let unshaped = value_iteration_augmented(spec, demo, None)?;
    let shaped = value_iteration_augmented(spec, demo, Some(potential))?;
    let mut cert =
        Certificate::new("Policy invariance (goal potential)", context_of(spec, demo));
    let reach = reachable_sets(spec);
    let side = spec.side();
    let mut max_offset_gap: f64 = 0.0;
    for t in 0..spec.horizon() {
        for y in 0..side {
            for x in 0..side {
                if !reach[t as usize][(y * side + x) as usize] || Cell::new(x, y) == spec.task_goal()
                {
                    continue;
                }
                let s = GridState::new(x, y, t);
                cert.states_checked += 1;
                let expected = unshaped.optimal_actions(&s);
                let found = shaped.optimal_actions(&s);
                if expected != found {
                    cert.record(Counterexample {
                        state: s,
                        goal: Some(unshaped.goal_at(t)),
                        expected,
                        found,
                    });
                }
                if spec.gamma() == 1.0 && potential.terminal_zero {
                    let phi = potential.phi(&AugmentedState::new(s, unshaped.goal_at(t)));
                    let (uq, sq) = (unshaped.q_values(&s), shaped.q_values(&s));
                    for a in Action::ALL {
                        let gap = (sq[a.index()] - (uq[a.index()] - phi)).abs();
                        max_offset_gap = max_offset_gap.max(gap);
                    }
                }
            }
        }
    }
    if spec.gamma() == 1.0 && potential.terminal_zero {
        cert.notes.push(format!(
            "max |Q_shaped - (Q_unshaped - phi)| over reachable states: {max_offset_gap:.2e}"
        ));
        if max_offset_gap > ARGMAX_TOL {
            cert.passed = false;
        }
    }
    Ok(cert)
}

/// Policy-invariance check for the SBS potential on the plain (non-
/// augmented) MDP, with the episodic terminal-zero rule.
pub fn check_sbs_invariance(
    spec: &GridSpec,
    demo: &Demonstration,
    params: &SbsParams,
) -> Result<Certificate, OracleError> {
    let base = value_iteration(spec)?;
    let side = spec.side();
    let gamma = spec.gamma();
    let c = params.c;
    let task = |next: &GridState| if next.pos() == spec.task_goal() { 0.0 } else { -1.0 };
    let shaped = solve_plain(spec, |s, _a, next, terminal, expired| {
        let phi_s = sbs_potential(params, s, demo, side);
        let phi_next =
            if terminal || expired { 0.0 } else { sbs_potential(params, next, demo, side) };
        task(next) + c * (gamma * phi_next - phi_s)
    })?;
    let mut cert = Certificate::new(
        "Policy invariance (SBS potential)",
        format!("{}, sigma {}, c {}", context_of(spec, demo), params.sigma, params.c),
    );
    let reach = reachable_sets(spec);
    for t in 0..spec.horizon() {
        for y in 0..side {
            for x in 0..side {
                if !reach[t as usize][(y * side + x) as usize] || Cell::new(x, y) == spec.task_goal()
                {
                    continue;
                }
                let s = GridState::new(x, y, t);
                cert.states_checked += 1;
                let expected = base.optimal_actions(&s);
                let found = shaped.optimal_actions(&s);
                if expected != found {
                    cert.record(Counterexample { state: s, goal: None, expected, found });
                }
            }
        }
    }
    Ok(cert)
}

/// Exact-solver confirmation of the Manhattan divergence mechanism: solve
/// the task MDP with the additive (non-potential) imitation reward and
/// report the on-path states — states reachable from the start by following
/// only task-optimal actions — where the hybrid argmax set is no longer a
/// subset of the task-optimal set. `passed` means invariance held; with a
/// large coefficient and a bad demo it is expected to fail.
pub fn check_manhattan_divergence(
    spec: &GridSpec,
    demo: &Demonstration,
    c: f64,
) -> Result<Certificate, OracleError> {
    let base = value_iteration(spec)?;
    let task = |next: &GridState| if next.pos() == spec.task_goal() { 0.0 } else { -1.0 };
    let shaped = solve_plain(spec, |s, _a, next, _terminal, _expired| {
        task(next) - c * s.pos().manhattan(&demo.goal_at(s.t).pos()) as f64
    })?;
    let mut cert = Certificate::new(
        "Additive Manhattan reward",
        format!("{}, c {c}", context_of(spec, demo)),
    );

    // Forward closure under task-optimal actions only.
    let side = spec.side();
    let cells = (side as usize).pow(2);
    let h = spec.horizon() as usize;
    let mut on_path = vec![vec![false; cells]; h + 1];
    let start = spec.start();
    on_path[0][(start.y * side + start.x) as usize] = true;
    for t in 0..h {
        for y in 0..side {
            for x in 0..side {
                if !on_path[t][(y * side + x) as usize] || Cell::new(x, y) == spec.task_goal() {
                    continue;
                }
                let s = GridState::new(x, y, t as u32);
                for a in base.optimal_actions(&s).iter() {
                    let next = spec.step(s, a).expect("closure only steps live states").next_state;
                    on_path[t + 1][(next.y * side + next.x) as usize] = true;
                }
            }
        }
    }

    let mut differing = 0usize;
    for t in 0..h {
        for y in 0..side {
            for x in 0..side {
                if !on_path[t][(y * side + x) as usize] || Cell::new(x, y) == spec.task_goal() {
                    continue;
                }
                let s = GridState::new(x, y, t as u32);
                cert.states_checked += 1;
                let expected = base.optimal_actions(&s);
                let found = shaped.optimal_actions(&s);
                if expected != found {
                    differing += 1;
                }
                if !found.is_subset(&expected) {
                    cert.record(Counterexample { state: s, goal: None, expected, found });
                }
            }
        }
    }
    cert.notes.push(format!(
        "argmax sets differ at {differing} on-path states; hybrid argmax leaves the task-optimal set at {}",
        cert.counterexamples.len()
    ));
    Ok(cert)
}
