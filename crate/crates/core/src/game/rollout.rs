use std::collections::HashMap;

use super::reward::{score_episode, EpisodeReport, Outcome, RewardScheme};
use super::state::{GameState, Terminal, World};
use super::{Action, Level};
use crate::rng::rng_from_seed;

/// Anything that picks an action for a state.
pub trait Agent {
    fn act(&mut self, state: &GameState) -> Action;

    /// True when `act` is a pure function of `state.world()`: no internal
    /// randomness, no memory, no dependence on the tick counter.
    fn is_markov(&self) -> bool {
        false
    }
}

impl<A: Agent + ?Sized> Agent for &mut A {
    fn act(&mut self, state: &GameState) -> Action {
        (**self).act(state)
    }

    fn is_markov(&self) -> bool {
        (**self).is_markov()
    }
}

/// Replays a fixed action list, then emits `Nil`.
#[derive(Clone, Debug)]
pub struct ScriptedAgent {
    actions: Vec<Action>,
    next: usize,
}

impl ScriptedAgent {
    pub fn new(actions: Vec<Action>) -> Self {
        ScriptedAgent { actions, next: 0 }
    }
}

impl Agent for ScriptedAgent {
    fn act(&mut self, _state: &GameState) -> Action {
        let a = self.actions.get(self.next).copied().unwrap_or(Action::Nil);
        self.next += 1;
        a
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RolloutOptions {
    /// Stop early once a deterministic episode driven by a Markov agent
    /// revisits a state. The report is identical to playing it out.
    pub detect_cycles: bool,
}

impl Default for RolloutOptions {
    fn default() -> Self {
        RolloutOptions { detect_cycles: true }
    }
}

/// Play `agent` on `level` until a terminal state or `game_len` steps.
/// The environment stream is seeded with `seed`.
pub fn rollout<A: Agent + ?Sized>(
    level: &Level,
    agent: &mut A,
    game_len: u32,
    scheme: RewardScheme,
    seed: u64,
) -> EpisodeReport {
    rollout_with(level, agent, game_len, scheme, seed, RolloutOptions::default())
}

pub fn rollout_with<A: Agent + ?Sized>(
    level: &Level,
    agent: &mut A,
    game_len: u32,
    scheme: RewardScheme,
    seed: u64,
    options: RolloutOptions,
) -> EpisodeReport {
    let mut rng = rng_from_seed(seed);
    let mut state = GameState::new(level, game_len);
    let mut events = Vec::new();
    let mut actions = Vec::with_capacity(game_len as usize);
    let track = options.detect_cycles && agent.is_markov();
    let mut seen: HashMap<(World, u32), u32> = HashMap::new();

    while !state.is_terminal() {
        if track && state.is_deterministic() {
            let key = (state.world.clone(), state.phase());
            if let Some(&start) = seen.get(&key) {
                // Periodic from here on: no further events, plays to the limit.
                let period = (state.tick - start) as usize;
                let base = start as usize;
                while actions.len() < game_len as usize {
                    let i = base + (actions.len() - base) % period;
                    actions.push(actions[i]);
                }
                state.tick = game_len;
                state.terminal = Terminal::Timeout;
                break;
            }
            seen.insert(key, state.tick);
        }
        let action = agent.act(&state);
        state
            .step_into(action, &mut rng, &mut events)
            .expect("agent chose an illegal action");
        actions.push(action);
    }

    let outcome = match state.terminal {
        Terminal::Win => Outcome::Win,
        Terminal::Loss => Outcome::Loss,
        Terminal::Timeout => Outcome::Timeout,
        Terminal::Running => unreachable!("loop exits only on terminal states"),
    };
    let mut report = EpisodeReport {
        variant: level.variant(),
        final_score: 0.0,
        native_score: state.score,
        steps: state.tick,
        max_steps: game_len,
        outcome,
        events,
        actions,
    };
    report.final_score = score_episode(&report, scheme);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{EventKind, GameVariant};

    struct Constant(Action);

    impl Agent for Constant {
        fn act(&mut self, _: &GameState) -> Action {
            self.0
        }
        fn is_markov(&self) -> bool {
            true
        }
    }

    const TOY: &str = "\
wwwww
wA+gw
wwwww
";

    #[test]
    fn nil_agent_times_out() {
        let level = Level::parse(TOY, GameVariant::DZeldaSingleDoor).unwrap();
        let r = rollout(&level, &mut Constant(Action::Nil), 50, RewardScheme::Aligned, 1);
        assert_eq!(r.outcome, Outcome::Timeout);
        assert_eq!(r.steps, 50);
        assert_eq!(r.actions.len(), 50);
        assert_eq!(r.final_score, 0.0);
    }

    #[test]
    fn scripted_two_move_win() {
        let level = Level::parse(TOY, GameVariant::DZeldaSingleDoor).unwrap();
        let mut agent = ScriptedAgent::new(vec![Action::Right, Action::Right]);
        let r = rollout(&level, &mut agent, 500, RewardScheme::Aligned, 9);
        assert_eq!(r.outcome, Outcome::Win);
        assert_eq!(r.steps, 2);
        assert_eq!(r.events.last().unwrap().kind, EventKind::Win);
        assert_eq!(r.final_score, 1.0 - 2.0 / 500.0);
        assert_eq!(r.native_score, 2.0);
    }

    #[test]
    fn cycle_shortcut_matches_full_playout() {
        let level = Level::parse(
            "wwwwww\nwA...w\nw..+.w\nw...gw\nwwwwww\n",
            GameVariant::DZeldaSingleDoor,
        )
        .unwrap();
        for a in GameVariant::DZeldaSingleDoor.actions() {
            let fast = rollout(&level, &mut Constant(*a), 300, RewardScheme::Native, 0);
            let slow = rollout_with(
                &level,
                &mut Constant(*a),
                300,
                RewardScheme::Native,
                0,
                RolloutOptions { detect_cycles: false },
            );
            assert_eq!(fast, slow, "action {a}");
        }
    }
}
