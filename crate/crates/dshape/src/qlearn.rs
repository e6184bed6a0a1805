//! Tabular Q-learning with a FIFO replay buffer and ε-greedy exploration:
//! the base learner shared by every method. Method-specific behaviour
//! (goals, reward transforms, relabelling) plugs in through the [`Agent`]
//! trait.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{Action, Cell, GridError, GridSpec, GridState};

/// Q-table key: the agent's cell plus, for goal-augmented methods, the goal
/// cell. Timesteps are deliberately left out of the key: rewards and the
/// goal potential depend only on positions, and keying on time would
/// multiply the table size by the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QKey {
    pub cell: Cell,
    pub goal: Option<Cell>,
}

impl QKey {
    pub fn plain(cell: Cell) -> Self {
        QKey { cell, goal: None }
    }

    pub fn augmented(cell: Cell, goal: Cell) -> Self {
        QKey { cell, goal: Some(goal) }
    }
}

/// Dense zero-initialised action-value table. Entries that were never
/// written read as the initialisation value 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    side: u32,
    augmented: bool,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(side: u32, augmented: bool) -> Self {
        let cells = (side as usize) * (side as usize);
        let keys = if augmented { cells * cells } else { cells };
        QTable { side, augmented, values: vec![0.0; keys * 4] }
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    pub fn is_augmented(&self) -> bool {
        self.augmented
    }

    fn slot(&self, key: &QKey, a: Action) -> usize {
        let side = self.side as usize;
        debug_assert!(key.cell.x < self.side && key.cell.y < self.side);
        let cell = key.cell.y as usize * side + key.cell.x as usize;
        let base = match (self.augmented, key.goal) {
            (false, None) => cell,
            (true, Some(g)) => {
                debug_assert!(g.x < self.side && g.y < self.side);
                cell * side * side + g.y as usize * side + g.x as usize
            }
            _ => panic!("key augmentation does not match the table layout"),
        };
        base * 4 + a.index()
    }

    pub fn get(&self, key: &QKey, a: Action) -> f64 {
        self.values[self.slot(key, a)]
    }

    pub fn set(&mut self, key: &QKey, a: Action, value: f64) {
        let slot = self.slot(key, a);
        self.values[slot] = value;
    }

    pub fn action_values(&self, key: &QKey) -> [f64; 4] {
        let base = self.slot(key, Action::Up);
        [self.values[base], self.values[base + 1], self.values[base + 2], self.values[base + 3]]
    }

    pub fn max_value(&self, key: &QKey) -> f64 {
        self.action_values(key).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action with a uniform random draw among the exact maximisers,
    /// so evaluation averages are meaningful under ties.
    pub fn greedy_action(&self, key: &QKey, rng: &mut ChaCha8Rng) -> Action {
        let values = self.action_values(key);
        let max = values.into_iter().fold(f64::NEG_INFINITY, f64::max);
        let mut ties = [Action::Up; 4];
        let mut n = 0;
        for a in Action::ALL {
            if values[a.index()] == max {
                ties[n] = a;
                n += 1;
            }
        }
        if n == 1 {
            ties[0]
        } else {
            ties[rng.gen_range(0..n)]
        }
    }

    /// Snapshot of the non-zero entries as a text table, one
    /// `x y [gx gy] action value` row per entry, in key order.
    pub fn export(&self) -> String {
        let mut out = String::new();
        if self.augmented {
            out.push_str("# x y gx gy action value\n");
        } else {
            out.push_str("# x y action value\n");
        }
        let side = self.side as usize;
        for (slot, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let a = Action::from_index(slot % 4).unwrap();
            let base = slot / 4;
            if self.augmented {
                let cell = base / (side * side);
                let goal = base % (side * side);
                let _ = writeln!(
                    out,
                    "{} {} {} {} {} {}",
                    cell % side,
                    cell / side,
                    goal % side,
                    goal / side,
                    a,
                    v
                );
            } else {
                let _ = writeln!(out, "{} {} {} {}", base % side, base / side, a, v);
            }
        }
        out
    }
}

/// ε-greedy draw: with probability `epsilon` a uniform action, otherwise a
/// uniform draw among the table's maximisers.
pub fn select_action(q: &QTable, key: &QKey, epsilon: f64, rng: &mut ChaCha8Rng) -> Action {
    if rng.gen::<f64>() < epsilon {
        Action::ALL[rng.gen_range(0..4usize)]
    } else {
        q.greedy_action(key, rng)
    }
}

/// One replay-buffer record. `key`/`next_key` are what the table is indexed
/// with; `raw` keeps the full states and goals so the shaping term can be
/// recomputed under substituted goals.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub key: QKey,
    pub action: Action,
    pub reward: f64,
    pub next_key: QKey,
    pub terminal: bool,
    pub raw: RawTransition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawTransition {
    pub state: GridState,
    pub goal: Option<GridState>,
    pub next_state: GridState,
    pub next_goal: Option<GridState>,
    pub r_task: f64,
}

/// FIFO replay buffer with strict oldest-first eviction.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    records: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "replay buffer capacity must be at least 1");
        ReplayBuffer { capacity, records: VecDeque::with_capacity(capacity) }
    }

    pub fn push(&mut self, tr: Transition) {
        if self.records.len() == self.capacity {
            self.records.pop_front();
        }
        self.records.push_back(tr);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.records.iter()
    }

    /// Uniform sample; `None` on an empty buffer.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Option<&Transition> {
        if self.records.is_empty() {
            return None;
        }
        Some(&self.records[rng.gen_range(0..self.records.len())])
    }
}

/// Shared Q-learning hyperparameters; every method trains with these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerParams {
    pub alpha: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub updates_per_step: u32,
    pub buffer_capacity: usize,
    pub total_steps: u64,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams {
            alpha: 0.1,
            epsilon: 0.2,
            gamma: 1.0,
            updates_per_step: 20,
            buffer_capacity: 5000,
            total_steps: 250_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum QError {
    #[error("non-finite Q update (reward {reward}, target {target}); reward scale is broken")]
    NonFinite { reward: f64, target: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// One Watkins backup from a single transition:
/// Q(k,a) ← Q(k,a) + α·(r + γ·max_a' Q(k',a')·(1 − terminal) − Q(k,a)).
/// Only goal arrival blocks the bootstrap; truncated episodes bootstrap
/// through the time limit.
pub fn q_update(q: &mut QTable, tr: &Transition, alpha: f64, gamma: f64) -> Result<(), QError> {
    let bootstrap = if tr.terminal { 0.0 } else { q.max_value(&tr.next_key) };
    let target = tr.reward + gamma * bootstrap;
    let old = q.get(&tr.key, tr.action);
    let new = old + alpha * (target - old);
    if !new.is_finite() {
        return Err(QError::NonFinite { reward: tr.reward, target });
    }
    q.set(&tr.key, tr.action, new);
    Ok(())
}

/// What a method may look at when computing the stored reward for one step.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub state: &'a GridState,
    pub goal: Option<&'a GridState>,
    pub next_state: &'a GridState,
    pub next_goal: Option<&'a GridState>,
    pub r_task: f64,
    pub terminal: bool,
}

/// Method-specific hooks plugged into the shared training loop: whether the
/// table keys carry goals, which goal accompanies the state at time t, how
/// the stored reward is formed, and what extra records a finished episode
/// contributes.
pub trait Agent {
    /// Whether Q-keys carry the goal cell.
    fn augment(&self) -> bool {
        false
    }

    /// Goal paired with the state at env time `t` (`None` for methods that
    /// use no goals).
    fn goal(&self, _t: u32) -> Option<GridState> {
        None
    }

    /// Reward stored for learning; defaults to the task reward unchanged.
    fn reward(&self, step: &StepContext) -> f64 {
        step.r_task
    }

    /// Extra records appended when an episode finishes (e.g. relabelled
    /// transitions).
    fn on_episode_end(&self, _episode: &[Transition], _rng: &mut ChaCha8Rng) -> Vec<Transition> {
        Vec::new()
    }
}

/// Plain Q-learning: no goals, no shaping, no relabelling.
#[derive(Debug, Clone, Copy, Default)]
pub struct QLearningAgent;

impl Agent for QLearningAgent {}

impl<A: Agent + ?Sized> Agent for &A {
    fn augment(&self) -> bool {
        (**self).augment()
    }
    fn goal(&self, t: u32) -> Option<GridState> {
        (**self).goal(t)
    }
    fn reward(&self, step: &StepContext) -> f64 {
        (**self).reward(step)
    }
    fn on_episode_end(&self, episode: &[Transition], rng: &mut ChaCha8Rng) -> Vec<Transition> {
        (**self).on_episode_end(episode, rng)
    }
}

/// The shared training loop. A learner instance is single-threaded;
/// distinct seeded instances share nothing and run in parallel freely.
pub struct Learner<A: Agent> {
    spec: GridSpec,
    agent: A,
    params: LearnerParams,
    q: QTable,
    buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    state: GridState,
    episode: Vec<Transition>,
    steps: u64,
}

impl<A: Agent> Learner<A> {
    pub fn new(spec: GridSpec, agent: A, params: LearnerParams, rng: ChaCha8Rng) -> Self {
        let q = QTable::new(spec.side(), agent.augment());
        let state = spec.reset();
        Learner {
            spec,
            agent,
            params,
            q,
            buffer: ReplayBuffer::new(params.buffer_capacity),
            rng,
            state,
            episode: Vec::new(),
            steps: 0,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn agent(&self) -> &A {
        &self.agent
    }

    pub fn params(&self) -> &LearnerParams {
        &self.params
    }

    pub fn q(&self) -> &QTable {
        &self.q
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// The state the next training step will act from.
    pub fn current_state(&self) -> GridState {
        self.state
    }

    fn key_for(&self, s: &GridState, goal: Option<&GridState>) -> QKey {
        if self.agent.augment() {
            let g = goal.expect("augmented agent must supply a goal for every t");
            QKey::augmented(s.pos(), g.pos())
        } else {
            QKey::plain(s.pos())
        }
    }

    /// One environment step: act ε-greedily, store the transition (plus any
    /// episode-end records from the agent), then run `updates_per_step`
    /// uniform replay backups.
    pub fn train_step(&mut self) -> Result<(), QError> {
        let s = self.state;
        let goal = self.agent.goal(s.t);
        let key = self.key_for(&s, goal.as_ref());
        let action = select_action(&self.q, &key, self.params.epsilon, &mut self.rng);
        let out = self.spec.step(s, action)?;
        let next_goal = self.agent.goal(out.next_state.t);
        let reward = self.agent.reward(&StepContext {
            state: &s,
            goal: goal.as_ref(),
            next_state: &out.next_state,
            next_goal: next_goal.as_ref(),
            r_task: out.reward,
            terminal: out.terminal,
        });
        let next_key = self.key_for(&out.next_state, next_goal.as_ref());
        let tr = Transition {
            key,
            action,
            reward,
            next_key,
            terminal: out.terminal,
            raw: RawTransition {
                state: s,
                goal,
                next_state: out.next_state,
                next_goal,
                r_task: out.reward,
            },
        };
        self.episode.push(tr.clone());
        self.buffer.push(tr);

        if out.terminal || out.truncated {
            for record in self.agent.on_episode_end(&self.episode, &mut self.rng) {
                self.buffer.push(record);
            }
            self.episode.clear();
            self.state = self.spec.reset();
        } else {
            self.state = out.next_state;
        }

        for _ in 0..self.params.updates_per_step {
            let Some(tr) = self.buffer.sample(&mut self.rng) else { break };
            let tr = tr.clone();
            q_update(&mut self.q, &tr, self.params.alpha, self.params.gamma)?;
        }
        self.steps += 1;
        Ok(())
    }

    pub fn train(&mut self, steps: u64) -> Result<(), QError> {
        for _ in 0..steps {
            self.train_step()?;
        }
        Ok(())
    }

    /// One greedy episode from the start (exploration off, the method's
    /// goals at inference). Returns the undiscounted return and every state
    /// visited, initial state included. Touches neither the table, the
    /// buffer, nor the training RNG stream.
    pub fn greedy_episode(&self, rng: &mut ChaCha8Rng) -> (f64, Vec<GridState>) {
        let mut s = self.spec.reset();
        let mut visited = vec![s];
        let mut total = 0.0;
        loop {
            let goal = self.agent.goal(s.t);
            let key = self.key_for(&s, goal.as_ref());
            let action = self.q.greedy_action(&key, rng);
            let out = self.spec.step(s, action).expect("greedy rollout only steps live states");
            total += out.reward;
            visited.push(out.next_state);
            if out.terminal || out.truncated {
                return (total, visited);
            }
            s = out.next_state;
        }
    }

    /// Mean greedy return over `episodes` rollouts.
    pub fn evaluate(&self, episodes: u32, rng: &mut ChaCha8Rng) -> f64 {
        let mut total = 0.0;
        for _ in 0..episodes {
            total += self.greedy_episode(rng).0;
        }
        total / episodes.max(1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn plain_tr(key: QKey, reward: f64, next_key: QKey, terminal: bool) -> Transition {
        let s = GridState::new(key.cell.x, key.cell.y, 0);
        let n = GridState::new(next_key.cell.x, next_key.cell.y, 1);
        Transition {
            key,
            action: Action::Up,
            reward,
            next_key,
            terminal,
            raw: RawTransition {
                state: s,
                goal: None,
                next_state: n,
                next_goal: None,
                r_task: reward,
            },
        }
    }

    #[test]
    fn unseen_keys_read_zero() {
        let q = QTable::new(5, false);
        assert_eq!(q.get(&QKey::plain(Cell::new(3, 4)), Action::Left), 0.0);
        let aug = QTable::new(5, true);
        assert_eq!(aug.get(&QKey::augmented(Cell::new(1, 2), Cell::new(4, 0)), Action::Down), 0.0);
    }

    #[test]
    fn q_update_examples() {
        let key = QKey::plain(Cell::new(0, 0));
        let next = QKey::plain(Cell::new(1, 0));

        // Zero table, r = −1, non-terminal: one α-sized step toward −1.
        let mut q = QTable::new(3, false);
        q_update(&mut q, &plain_tr(key, -1.0, next, false), 0.1, 1.0).unwrap();
        assert_eq!(q.get(&key, Action::Up), -0.1);

        // Zero table, r = 0 terminal: fixed point, nothing moves.
        let mut q = QTable::new(3, false);
        q_update(&mut q, &plain_tr(key, 0.0, next, true), 0.1, 1.0).unwrap();
        assert_eq!(q.get(&key, Action::Up), 0.0);

        // Consistent values are a fixed point: Q = −5, r = −1, max next = −4.
        let mut q = QTable::new(3, false);
        q.set(&key, Action::Up, -5.0);
        for a in Action::ALL {
            q.set(&next, a, -4.0);
        }
        q_update(&mut q, &plain_tr(key, -1.0, next, false), 0.1, 1.0).unwrap();
        assert_eq!(q.get(&key, Action::Up), -5.0);
    }

    #[test]
    fn q_update_rejects_non_finite() {
        let key = QKey::plain(Cell::new(0, 0));
        let mut q = QTable::new(3, false);
        let err = q_update(&mut q, &plain_tr(key, f64::INFINITY, key, true), 0.1, 1.0);
        assert!(matches!(err, Err(QError::NonFinite { .. })));
    }

    fn chi_square_uniform(counts: &[u64; 4]) -> f64 {
        let total: u64 = counts.iter().sum();
        let expected = total as f64 / 4.0;
        counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
    }

    // χ²(df=3) critical value at α = 0.001.
    const CHI2_CRIT: f64 = 16.266;

    #[test]
    fn pure_exploration_is_uniform() {
        let q = QTable::new(3, false);
        let key = QKey::plain(Cell::new(1, 1));
        let mut r = rng(7);
        let mut counts = [0u64; 4];
        for _ in 0..10_000 {
            counts[select_action(&q, &key, 1.0, &mut r).index()] += 1;
        }
        assert!(chi_square_uniform(&counts) < CHI2_CRIT, "counts {counts:?}");
    }

    #[test]
    fn unique_argmax_is_deterministic() {
        let mut q = QTable::new(3, false);
        let key = QKey::plain(Cell::new(1, 1));
        q.set(&key, Action::Up, 1.0);
        let mut r = rng(11);
        for _ in 0..100 {
            assert_eq!(select_action(&q, &key, 0.0, &mut r), Action::Up);
        }
    }

    #[test]
    fn zero_table_ties_break_uniformly() {
        let q = QTable::new(3, false);
        let key = QKey::plain(Cell::new(0, 2));
        let mut r = rng(13);
        let mut counts = [0u64; 4];
        for _ in 0..10_000 {
            counts[select_action(&q, &key, 0.0, &mut r).index()] += 1;
        }
        assert!(chi_square_uniform(&counts) < CHI2_CRIT, "counts {counts:?}");
    }

    #[test]
    fn buffer_evicts_oldest_first() {
        let key = QKey::plain(Cell::new(0, 0));
        let mut buf = ReplayBuffer::new(3);
        for i in 0..5 {
            buf.push(plain_tr(key, -(i as f64), key, false));
        }
        assert_eq!(buf.len(), 3);
        let rewards: Vec<f64> = buf.iter().map(|t| t.reward).collect();
        assert_eq!(rewards, vec![-2.0, -3.0, -4.0]);
    }

    #[test]
    fn single_step_fills_buffer_and_updates_only_that_record() {
        let spec = GridSpec::new(5).unwrap();
        let mut learner =
            Learner::new(spec, QLearningAgent, LearnerParams::default(), rng(3));
        learner.train_step().unwrap();
        assert_eq!(learner.buffer().len(), 1);
        assert_eq!(learner.steps(), 1);
    }

    #[test]
    fn buffer_capacity_is_enforced_during_training() {
        let spec = GridSpec::new(5).unwrap();
        let params = LearnerParams { buffer_capacity: 50, updates_per_step: 0, ..Default::default() };
        let mut learner = Learner::new(spec, QLearningAgent, params, rng(3));
        learner.train(51).unwrap();
        assert_eq!(learner.buffer().len(), 50);
    }

    #[test]
    fn same_seed_gives_bit_identical_tables() {
        let spec = GridSpec::new(4).unwrap();
        let run = || {
            let mut l = Learner::new(spec.clone(), QLearningAgent, LearnerParams::default(), rng(42));
            l.train(3000).unwrap();
            l.q().clone()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn q_values_stay_in_the_return_range() {
        let spec = GridSpec::new(3).unwrap();
        let mut learner = Learner::new(spec.clone(), QLearningAgent, LearnerParams::default(), rng(5));
        learner.train(5000).unwrap();
        let h = spec.horizon() as f64;
        for cell_y in 0..3 {
            for cell_x in 0..3 {
                let key = QKey::plain(Cell::new(cell_x, cell_y));
                for a in Action::ALL {
                    let v = learner.q().get(&key, a);
                    assert!((-h..=0.0).contains(&v), "Q{key:?}[{a}] = {v}");
                }
            }
        }
    }

    #[test]
    fn plain_qlearning_converges_on_a_tiny_grid() {
        let spec = GridSpec::new(3).unwrap();
        let mut learner = Learner::new(spec.clone(), QLearningAgent, LearnerParams::default(), rng(1));
        learner.train(20_000).unwrap();
        let mut eval = rng(1000);
        let (ret, _) = learner.greedy_episode(&mut eval);
        assert_eq!(ret, spec.optimal_return().unwrap());
    }

    #[test]
    fn export_lists_nonzero_entries() {
        let mut q = QTable::new(3, false);
        q.set(&QKey::plain(Cell::new(2, 1)), Action::Right, -0.5);
        let text = q.export();
        assert!(text.contains("2 1 right -0.5"), "{text}");
        assert_eq!(text.lines().count(), 2); // header + one row
    }
}
