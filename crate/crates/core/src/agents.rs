//! Reference agents used by the playability gate.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::game::{Action, Agent, GameState, GameVariant, Terminal};
use crate::rng::{rng_from_seed, SimRng};

/// Uniform draw over the variant's actions on every call.
pub struct RandomAgent {
    actions: &'static [Action],
    rng: SimRng,
}

impl RandomAgent {
    pub fn new(variant: GameVariant, seed: u64) -> Self {
        RandomAgent {
            actions: variant.actions(),
            rng: rng_from_seed(seed),
        }
    }

    pub fn next_action(&mut self) -> Action {
        self.actions[self.rng.random_range(0..self.actions.len())]
    }
}

impl Agent for RandomAgent {
    fn act(&mut self, _state: &GameState) -> Action {
        self.next_action()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Budget {
    Iterations(u32),
    WallClockMs(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MctsConfig {
    pub budget: Budget,
    pub exploration_c: f64,
    pub rollout_depth: u32,
    pub discount: f64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        MctsConfig {
            budget: Budget::Iterations(128),
            exploration_c: std::f64::consts::SQRT_2,
            rollout_depth: 20,
            discount: 1.0,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MctsConfigError {
    #[error("iteration budget must be at least 1")]
    ZeroIterations,
    #[error("wall-clock budget must be at least 1 ms")]
    ZeroWallClock,
    #[error("exploration constant must be finite and non-negative, got {0}")]
    BadExploration(f64),
    #[error("discount must lie in (0, 1], got {0}")]
    BadDiscount(f64),
}

impl MctsConfig {
    pub fn validate(&self) -> Result<(), MctsConfigError> {
        match self.budget {
            Budget::Iterations(0) => return Err(MctsConfigError::ZeroIterations),
            Budget::WallClockMs(0) => return Err(MctsConfigError::ZeroWallClock),
            _ => {}
        }
        if !(self.exploration_c >= 0.0 && self.exploration_c.is_finite()) {
            return Err(MctsConfigError::BadExploration(self.exploration_c));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(MctsConfigError::BadDiscount(self.discount));
        }
        Ok(())
    }
}

/// Terminal bonus added to native points inside the search.
const WIN_BONUS: f64 = 1.0;
const LOSS_BONUS: f64 = -1.0;

#[derive(Clone, Debug)]
struct Node {
    children: Vec<Option<usize>>,
    visits: u32,
    total: f64,
}

impl Node {
    fn new(actions: usize) -> Self {
        Node {
            children: vec![None; actions],
            visits: 0,
            total: 0.0,
        }
    }
}

/// Statistics of the last search, for inspection and tests.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SearchStats {
    pub iterations: u32,
    pub root_visits: Vec<u32>,
    pub min_return: f64,
    pub max_return: f64,
}

/// Open-loop UCT planner. The tree is rebuilt from scratch for every
/// decision; simulated environment randomness comes from the agent's own
/// stream, never from the episode's.
pub struct MctsAgent {
    config: MctsConfig,
    rng: SimRng,
    nodes: Vec<Node>,
    last: SearchStats,
}

impl MctsAgent {
    pub fn new(config: MctsConfig, seed: u64) -> Result<Self, MctsConfigError> {
        config.validate()?;
        Ok(MctsAgent {
            config,
            rng: rng_from_seed(seed),
            nodes: Vec::new(),
            last: SearchStats::default(),
        })
    }

    pub fn last_search(&self) -> &SearchStats {
        &self.last
    }

    /// Run one search from `root` and return the chosen action.
    pub fn search(&mut self, root: &GameState) -> Action {
        assert!(!root.is_terminal(), "cannot plan from a terminal state");
        let actions = root.variant().actions();
        let n_act = actions.len();
        self.nodes.clear();
        self.nodes.push(Node::new(n_act));
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let deadline = match self.config.budget {
            Budget::WallClockMs(ms) => Some(Instant::now() + Duration::from_millis(ms)),
            Budget::Iterations(_) => None,
        };
        let mut iterations = 0u32;
        let mut path = Vec::new();

        loop {
            match (self.config.budget, deadline) {
                (Budget::Iterations(n), _) if iterations >= n => break,
                (_, Some(d)) if iterations > 0 && Instant::now() >= d => break,
                _ => {}
            }
            iterations += 1;

            let mut state = root.clone();
            let mut node = 0usize;
            let mut ret = 0.0;
            let mut weight = 1.0;
            path.clear();
            path.push(0);

            // Selection through fully expanded nodes.
            while !state.is_terminal() && self.nodes[node].children.iter().all(Option::is_some) {
                let k = self.select_child(node, lo, hi);
                ret += weight * self.advance(&mut state, actions[k]);
                weight *= self.config.discount;
                node = self.nodes[node].children[k].unwrap();
                path.push(node);
            }
            // Expansion of one untried action.
            if !state.is_terminal() {
                let untried: Vec<usize> = (0..n_act)
                    .filter(|&k| self.nodes[node].children[k].is_none())
                    .collect();
                let k = untried[self.rng.random_range(0..untried.len())];
                let child = self.nodes.len();
                self.nodes.push(Node::new(n_act));
                self.nodes[node].children[k] = Some(child);
                ret += weight * self.advance(&mut state, actions[k]);
                weight *= self.config.discount;
                node = child;
                path.push(node);
            }
            // Random playout.
            let mut depth = 0;
            while !state.is_terminal() && depth < self.config.rollout_depth {
                let a = actions[self.rng.random_range(0..n_act)];
                ret += weight * self.advance(&mut state, a);
                weight *= self.config.discount;
                depth += 1;
            }

            lo = lo.min(ret);
            hi = hi.max(ret);
            for &n in &path {
                self.nodes[n].visits += 1;
                self.nodes[n].total += ret;
            }
        }

        let root_visits: Vec<u32> = self.nodes[0]
            .children
            .iter()
            .map(|c| c.map_or(0, |i| self.nodes[i].visits))
            .collect();
        let mut best = 0;
        for k in 1..n_act {
            if root_visits[k] > root_visits[best] {
                best = k;
            }
        }
        self.last = SearchStats {
            iterations,
            root_visits,
            min_return: lo,
            max_return: hi,
        };
        actions[best]
    }

    fn select_child(&self, node: usize, lo: f64, hi: f64) -> usize {
        let parent = &self.nodes[node];
        let log_n = (parent.visits.max(1) as f64).ln();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (k, child) in parent.children.iter().enumerate() {
            let c = &self.nodes[child.expect("fully expanded")];
            let mean = c.total / c.visits as f64;
            let score = normalize(mean, lo, hi)
                + self.config.exploration_c * (log_n / c.visits as f64).sqrt();
            if score > best_score {
                best = k;
                best_score = score;
            }
        }
        best
    }

    /// Step a simulated state and return the search reward for that step.
    fn advance(&mut self, state: &mut GameState, action: Action) -> f64 {
        let before = state.score();
        state
            .step(action, &mut self.rng)
            .expect("search only steps running states");
        let bonus = match state.terminal() {
            Terminal::Win => WIN_BONUS,
            Terminal::Loss => LOSS_BONUS,
            _ => 0.0,
        };
        state.score() - before + bonus
    }
}

/// Min-max normalisation into `[0, 1]`; a degenerate range maps to 0.5.
pub fn normalize(value: f64, lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return 0.5;
    }
    ((value - lo) / (hi - lo)).clamp(0.0, 1.0)
}

impl Agent for MctsAgent {
    fn act(&mut self, state: &GameState) -> Action {
        self.search(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{rollout, Level, Outcome, RewardScheme};

    #[test]
    fn random_agent_is_reproducible() {
        let draw = |seed| {
            let mut a = RandomAgent::new(GameVariant::DZeldaSingleDoor, seed);
            (0..100).map(|_| a.next_action()).collect::<Vec<_>>()
        };
        assert_eq!(draw(3)[..10], draw(3)[..10]);
        assert_ne!(draw(3), draw(4));
    }

    #[test]
    fn random_agent_is_uniform() {
        let mut a = RandomAgent::new(GameVariant::DZeldaSingleDoor, 17);
        let n = 10_000usize;
        let mut counts = [0usize; 6];
        for _ in 0..n {
            let act = a.next_action();
            counts[GameVariant::DZeldaSingleDoor.action_index(act).unwrap()] += 1;
        }
        let p = 1.0 / 6.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * p).abs() < 5.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn config_validation() {
        let mut c = MctsConfig::default();
        assert_eq!(c.validate(), Ok(()));
        c.budget = Budget::Iterations(0);
        assert_eq!(c.validate(), Err(MctsConfigError::ZeroIterations));
        c = MctsConfig { exploration_c: -1.0, ..MctsConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn normalization_stays_in_unit_interval() {
        assert_eq!(normalize(3.0, 1.0, 5.0), 0.5);
        assert_eq!(normalize(9.0, 1.0, 5.0), 1.0);
        assert_eq!(normalize(2.0, 2.0, 2.0), 0.5);
    }

    #[test]
    fn root_visits_sum_to_budget() {
        let level = crate::seeds::seed_level(GameVariant::DZeldaSingleDoor);
        let state = GameState::new(&level, 500);
        let mut agent = MctsAgent::new(MctsConfig::default(), 1).unwrap();
        agent.search(&state);
        let s = agent.last_search();
        assert_eq!(s.iterations, 128);
        assert_eq!(s.root_visits.iter().sum::<u32>(), 128);
    }

    #[test]
    fn same_seed_same_trace() {
        let level = crate::seeds::seed_level(GameVariant::DZeldaSingleDoor);
        let run = || {
            let mut agent = MctsAgent::new(MctsConfig::default(), 5).unwrap();
            rollout(&level, &mut agent, 60, RewardScheme::Native, 2).actions
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn cannot_win_without_reachable_key() {
        // The key is sealed in the top-right pocket.
        let level = Level::parse(
            "wwwwwwww\nwA...w+w\nw.3..www\nw...g..w\nwwwwwwww\n",
            GameVariant::DZeldaSingleDoor,
        )
        .unwrap();
        let mut agent = MctsAgent::new(MctsConfig::default(), 0).unwrap();
        let r = rollout(&level, &mut agent, 80, RewardScheme::Native, 0);
        assert_ne!(r.outcome, Outcome::Win);
    }
}
