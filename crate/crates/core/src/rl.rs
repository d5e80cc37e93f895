//! Episodic reward-driven navigation: a feedforward action-value network
//! over one-hot states with an 8-way compass head, trained by one-step
//! temporal-difference updates under epsilon-greedy exploration. Choosing a
//! wall ends the episode, as does reaching a food cell.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::{SpaceKind, StateSpace, TransitionMatrix};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::net::{init_with_outputs, LayeredNetwork};

/// The eight compass actions in fixed tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action8 {
    North,
    NorthEast,
    East,
    SouthEast,
    South,
    SouthWest,
    West,
    NorthWest,
}

impl Action8 {
    pub const ALL: [Action8; 8] = [
        Action8::North,
        Action8::NorthEast,
        Action8::East,
        Action8::SouthEast,
        Action8::South,
        Action8::SouthWest,
        Action8::West,
        Action8::NorthWest,
    ];

    pub fn delta(self) -> (isize, isize) {
        match self {
            Action8::North => (-1, 0),
            Action8::NorthEast => (-1, 1),
            Action8::East => (0, 1),
            Action8::SouthEast => (1, 1),
            Action8::South => (1, 0),
            Action8::SouthWest => (1, -1),
            Action8::West => (0, -1),
            Action8::NorthWest => (-1, -1),
        }
    }

    pub fn index(self) -> usize {
        Action8::ALL.iter().position(|&a| a == self).unwrap()
    }

    pub fn name(self) -> &'static str {
        match self {
            Action8::North => "N",
            Action8::NorthEast => "NE",
            Action8::East => "E",
            Action8::SouthEast => "SE",
            Action8::South => "S",
            Action8::SouthWest => "SW",
            Action8::West => "W",
            Action8::NorthWest => "NW",
        }
    }
}

impl fmt::Display for Action8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exploration rate per episode: end + (start - end) * decay^episode.
#[derive(Debug, Clone, Copy)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay: f64,
}

impl EpsilonSchedule {
    pub fn at(&self, episode: usize) -> f64 {
        self.end + (self.start - self.end) * self.decay.powi(episode as i32)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("start", self.start), ("end", self.end)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!(
                    "epsilon {name} must lie in [0,1], got {v}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.decay) {
            return Err(Error::Config("epsilon decay must lie in [0,1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AgentConfig {
    pub episodes: usize,
    pub max_steps: usize,
    pub epsilon: EpsilonSchedule,
    pub learning_rate: f64,
    /// TD discount; must stay below 1.
    pub discount: f64,
    pub reward_goal: f64,
    pub reward_step: f64,
    pub reward_wall: f64,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            episodes: 10_000,
            max_steps: 200,
            epsilon: EpsilonSchedule {
                start: 1.0,
                end: 0.05,
                decay: 0.9995,
            },
            learning_rate: 0.05,
            discount: 0.95,
            reward_goal: 1.0,
            reward_step: 0.0,
            reward_wall: -1.0,
            seed: 0,
        }
    }
}

impl AgentConfig {
    fn validate(&self) -> Result<()> {
        self.epsilon.validate()?;
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::Config(format!(
                "TD discount must lie in [0,1), got {}",
                self.discount
            )));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalCause {
    Goal,
    WallChoice,
    StepLimit,
}

impl TerminalCause {
    pub fn name(self) -> &'static str {
        match self {
            TerminalCause::Goal => "goal",
            TerminalCause::WallChoice => "wall",
            TerminalCause::StepLimit => "step-limit",
        }
    }
}

/// Trace of one episode. `visited` holds only valid states; an episode that
/// ends by choosing a wall never records the wall itself.
#[derive(Debug, Clone)]
pub struct Episode {
    pub visited: Vec<usize>,
    pub actions: Vec<Action8>,
    pub cause: TerminalCause,
    pub total_reward: f64,
}

impl Episode {
    pub fn steps(&self) -> usize {
        self.actions.len()
    }
}

/// Compact per-episode record kept during training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    pub start: usize,
    pub steps: usize,
    pub cause: TerminalCause,
    pub total_reward: f64,
}

/// Action-value network bound to a maze-shaped state space.
#[derive(Debug, Clone)]
pub struct NavAgent {
    net: LayeredNetwork,
    n_states: usize,
    grid_shape: (usize, usize),
    config: AgentConfig,
    train_log: Vec<EpisodeSummary>,
}

impl NavAgent {
    /// Fresh, untrained agent for a spatial state space.
    pub fn new(space: &StateSpace, config: AgentConfig) -> Result<Self> {
        config.validate()?;
        let grid_shape = space.grid_shape().ok_or(Error::WrongKind {
            expected: "spatial grid",
            got: SpaceKind::Language.name(),
        })?;
        let n = space.n_states();
        let net = init_with_outputs(n, n, 8, config.seed)?;
        Ok(NavAgent {
            net,
            n_states: n,
            grid_shape,
            config,
            train_log: Vec::new(),
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn policy_net(&self) -> &LayeredNetwork {
        &self.net
    }

    pub fn policy_net_mut(&mut self) -> &mut LayeredNetwork {
        &mut self.net
    }

    pub fn train_log(&self) -> &[EpisodeSummary] {
        &self.train_log
    }

    fn check_space(&self, space: &StateSpace) -> Result<()> {
        if space.n_states() != self.n_states || space.grid_shape() != Some(self.grid_shape) {
            return Err(Error::Shape(
                "agent is bound to a different state space".into(),
            ));
        }
        Ok(())
    }

    /// Destination cell of an action, or None for out-of-bounds.
    fn destination(&self, state: usize, action: Action8) -> Option<usize> {
        let (rows, cols) = self.grid_shape;
        let (r, c) = (state / cols, state % cols);
        let (dr, dc) = action.delta();
        let nr = r as isize + dr;
        let nc = c as isize + dc;
        if nr < 0 || nc < 0 || nr as usize >= rows || nc as usize >= cols {
            return None;
        }
        Some(nr as usize * cols + nc as usize)
    }

    /// A move is legal exactly when it lands on an adjacent valid cell (the
    /// corner-cutting rule is inherited from the space's adjacency).
    fn legal_destination(
        &self,
        space: &StateSpace,
        state: usize,
        action: Action8,
    ) -> Option<usize> {
        let dest = self.destination(state, action)?;
        if space.adjacency(state).binary_search(&dest).is_ok() {
            Some(dest)
        } else {
            None
        }
    }

    fn q_values(&self, state: usize) -> Vec<f64> {
        self.net.logits(state).expect("state checked by caller")
    }

    fn greedy_action(&self, state: usize) -> Action8 {
        let q = self.q_values(state);
        let mut best = 0;
        for a in 1..8 {
            if q[a] > q[best] {
                best = a;
            }
        }
        Action8::ALL[best]
    }

    /// Epsilon-greedy draw over all eight compass slots.
    pub fn sample_action<R: Rng>(&self, rng: &mut R, state: usize, epsilon: f64) -> Action8 {
        if rng.gen::<f64>() < epsilon {
            Action8::ALL[rng.gen_range(0..8)]
        } else {
            self.greedy_action(state)
        }
    }

    /// One-step TD update on the value of (state, action) toward `target`.
    fn td_update(&mut self, state: usize, action: Action8, target: f64) {
        let a = action.index();
        let lr = self.config.learning_rate;
        let hidden_pre: Vec<f64> = (0..self.net.hidden_width())
            .map(|j| self.net.w1[(j, state)] + self.net.b1[j])
            .collect();
        let hidden: Vec<f64> = hidden_pre.iter().map(|&h| h.max(0.0)).collect();
        let q: f64 = self
            .net
            .w2
            .row(a)
            .iter()
            .zip(&hidden)
            .map(|(w, h)| w * h)
            .sum::<f64>()
            + self.net.b2[a];
        let d = q - target;

        // gradient through the single active output, using pre-update w2
        let dh: Vec<f64> = (0..self.net.hidden_width())
            .map(|j| {
                if hidden_pre[j] > 0.0 {
                    self.net.w2[(a, j)] * d
                } else {
                    0.0
                }
            })
            .collect();

        self.net.b2[a] -= lr * d;
        let w2_row = self.net.w2.row_mut(a);
        for (w, h) in w2_row.iter_mut().zip(&hidden) {
            *w -= lr * d * h;
        }
        for (j, &g) in dh.iter().enumerate() {
            if g != 0.0 {
                self.net.b1[j] -= lr * g;
                self.net.w1[(j, state)] -= lr * g;
            }
        }
    }

    /// Agent checkpoint: the action-head metadata followed by the network
    /// checkpoint block.
    pub fn to_checkpoint(&self) -> String {
        let mut text = format!(
            "nav-agent 1\nactions 8\ngrid {} {}\n",
            self.grid_shape.0, self.grid_shape.1
        );
        text.push_str(&self.net.to_checkpoint());
        text
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_checkpoint())?;
        Ok(())
    }

    /// Restore the network and binding of a saved agent; the training log is
    /// not persisted and comes back empty.
    pub fn load<P: AsRef<Path>>(path: P, config: AgentConfig) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        if lines.next() != Some("nav-agent 1") {
            return Err(Error::Parse("unknown agent checkpoint header".into()));
        }
        if lines.next() != Some("actions 8") {
            return Err(Error::Parse(
                "agent checkpoint must declare 8 actions".into(),
            ));
        }
        let grid_line = lines
            .next()
            .ok_or_else(|| Error::Parse("agent checkpoint missing grid".into()))?;
        let dims: Vec<usize> = grid_line
            .strip_prefix("grid ")
            .map(|rest| {
                rest.split_whitespace()
                    .filter_map(|t| t.parse().ok())
                    .collect()
            })
            .unwrap_or_default();
        if dims.len() != 2 {
            return Err(Error::Parse("agent checkpoint grid line malformed".into()));
        }
        let net_text: String = lines.collect::<Vec<_>>().join("\n");
        let net = LayeredNetwork::from_checkpoint(&net_text)?;
        if net.output_width() != 8 {
            return Err(Error::Parse("agent network must have 8 outputs".into()));
        }
        Ok(NavAgent {
            n_states: net.input_width(),
            grid_shape: (dims[0], dims[1]),
            net,
            config,
            train_log: Vec::new(),
        })
    }
}

/// Train an agent on a maze with at least one reward cell. Every episode
/// starts at a uniformly random valid non-goal state; choosing a wall ends
/// the episode with the wall penalty, reaching a food cell ends it with the
/// goal reward. Deterministic for a fixed seed.
pub fn train_agent(space: &StateSpace, config: &AgentConfig) -> Result<NavAgent> {
    if space.reward_states().is_empty() {
        return Err(Error::Config(
            "reinforcement learning needs at least one reward state".into(),
        ));
    }
    let mut agent = NavAgent::new(space, *config)?;
    let starts: Vec<usize> = space
        .non_terminal_states()
        .into_iter()
        .filter(|&s| !space.is_reward(s))
        .collect();
    if starts.is_empty() {
        return Err(Error::Config("no valid non-goal start states".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for episode in 0..config.episodes {
        let epsilon = config.epsilon.at(episode);
        let start = starts[rng.gen_range(0..starts.len())];
        let mut state = start;
        let mut total_reward = 0.0;
        let mut steps = 0;
        let mut cause = TerminalCause::StepLimit;
        for _ in 0..config.max_steps {
            let action = agent.sample_action(&mut rng, state, epsilon);
            steps += 1;
            match agent.legal_destination(space, state, action) {
                None => {
                    total_reward += config.reward_wall;
                    agent.td_update(state, action, config.reward_wall);
                    cause = TerminalCause::WallChoice;
                    break;
                }
                Some(dest) if space.is_reward(dest) => {
                    total_reward += config.reward_goal;
                    agent.td_update(state, action, config.reward_goal);
                    cause = TerminalCause::Goal;
                    break;
                }
                Some(dest) => {
                    total_reward += config.reward_step;
                    let next_q = agent.q_values(dest);
                    let best = next_q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    agent.td_update(state, action, config.reward_step + config.discount * best);
                    state = dest;
                }
            }
        }
        agent.train_log.push(EpisodeSummary {
            start,
            steps,
            cause,
            total_reward,
        });
    }
    Ok(agent)
}

/// Softmax over the eight action values; sums to one.
pub fn action_distribution(agent: &NavAgent, space: &StateSpace, state: usize) -> Result<[f64; 8]> {
    agent.check_space(space)?;
    if state >= agent.n_states {
        return Err(Error::StateOutOfRange {
            state,
            n_states: agent.n_states,
        });
    }
    if !space.is_valid(state) {
        return Err(Error::InvalidState(state));
    }
    let q = agent.q_values(state);
    let max = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut exps = [0.0f64; 8];
    let mut sum = 0.0;
    for (e, &v) in exps.iter_mut().zip(&q) {
        *e = (v - max).exp();
        sum += *e;
    }
    for e in &mut exps {
        *e /= sum;
    }
    Ok(exps)
}

/// Expand the 8-way action preferences into a full transition matrix: each
/// action's probability lands on its destination cell, mass on illegal moves
/// is redistributed proportionally over the legal ones. Wall states get zero
/// rows, and reward states are absorbing (zero rows) as well.
pub fn policy_tp_matrix(agent: &NavAgent, space: &StateSpace) -> Result<TransitionMatrix> {
    agent.check_space(space)?;
    let n = space.n_states();
    let mut mat = Mat::zeros(n, n);
    let mut untrained = vec![false; n];
    for s in 0..n {
        if !space.is_valid(s) || space.is_terminal(s) || space.is_reward(s) {
            untrained[s] = true;
            continue;
        }
        let probs = action_distribution(agent, space, s)?;
        let mut legal: Vec<(usize, f64)> = Vec::with_capacity(8);
        let mut legal_mass = 0.0;
        for (a, &p) in Action8::ALL.iter().zip(&probs) {
            if let Some(dest) = agent.legal_destination(space, s, *a) {
                legal.push((dest, p));
                legal_mass += p;
            }
        }
        let row = mat.row_mut(s);
        for (dest, p) in legal {
            row[dest] += p / legal_mass;
        }
    }
    TransitionMatrix::new(mat, untrained, 1e-9)
}

/// Follow argmax actions (ties resolved by the fixed compass order) until a
/// goal, a wall choice, or the step limit. Starting on a reward state ends
/// immediately with a zero-length goal episode.
pub fn greedy_rollout(
    agent: &NavAgent,
    space: &StateSpace,
    start: usize,
    max_steps: usize,
) -> Result<Episode> {
    agent.check_space(space)?;
    if start >= agent.n_states {
        return Err(Error::StateOutOfRange {
            state: start,
            n_states: agent.n_states,
        });
    }
    if !space.is_valid(start) {
        return Err(Error::InvalidState(start));
    }
    let mut episode = Episode {
        visited: vec![start],
        actions: Vec::new(),
        cause: TerminalCause::StepLimit,
        total_reward: 0.0,
    };
    if space.is_reward(start) {
        episode.cause = TerminalCause::Goal;
        return Ok(episode);
    }
    let cfg = agent.config();
    let mut state = start;
    for _ in 0..max_steps {
        let action = agent.greedy_action(state);
        episode.actions.push(action);
        match agent.legal_destination(space, state, action) {
            None => {
                episode.total_reward += cfg.reward_wall;
                episode.cause = TerminalCause::WallChoice;
                return Ok(episode);
            }
            Some(dest) if space.is_reward(dest) => {
                episode.visited.push(dest);
                episode.total_reward += cfg.reward_goal;
                episode.cause = TerminalCause::Goal;
                return Ok(episode);
            }
            Some(dest) => {
                episode.visited.push(dest);
                episode.total_reward += cfg.reward_step;
                state = dest;
            }
        }
    }
    Ok(episode)
}
