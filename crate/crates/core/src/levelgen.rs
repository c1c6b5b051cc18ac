//! Level mutation and the minimal playability gate.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{MctsAgent, MctsConfig, RandomAgent};
use crate::game::{rollout, Action, EpisodeReport, Level, Outcome, Pos, RewardScheme, ScriptedAgent, Tile};
use crate::rng::{child_seed, mix64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MutationConfig {
    pub p_add: f64,
    pub p_move: f64,
    pub p_remove: f64,
    pub p_chain: f64,
    /// Chance that a selected parent emits children at a reproduction event.
    pub mutation_rate: f64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig {
            p_add: 0.5,
            p_move: 0.3,
            p_remove: 0.2,
            p_chain: 0.5,
            mutation_rate: 0.8,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MutationConfigError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("operator probabilities sum to {0}, not 1")]
    NotNormalized(f64),
}

impl MutationConfig {
    pub fn validate(&self) -> Result<(), MutationConfigError> {
        for (name, value) in [
            ("pAdd", self.p_add),
            ("pMove", self.p_move),
            ("pRemove", self.p_remove),
            ("pChain", self.p_chain),
            ("mutationRate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(MutationConfigError::OutOfRange { name, value });
            }
        }
        let sum = self.p_add + self.p_move + self.p_remove;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MutationConfigError::NotNormalized(sum));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MutationOp {
    Add { tile: Tile, at: Pos },
    Move { tile: Tile, from: Pos, to: Pos },
    Remove { tile: Tile, at: Pos },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum OpKind {
    Add,
    Move,
    Remove,
}

/// A mutated copy of a parent. `ops` is empty when no valid mutation was
/// found and `level` is the unchanged parent.
#[derive(Clone, Debug, PartialEq)]
pub struct Mutation {
    pub level: Level,
    pub ops: Vec<MutationOp>,
}

impl Mutation {
    pub fn mutated(&self) -> bool {
        !self.ops.is_empty()
    }
}

/// Attempts allowed to find one structurally valid mutation.
pub const MAX_RESAMPLES: usize = 100;

/// Apply one mutation, then keep chaining further mutations with
/// probability `p_chain`.
pub fn mutate<R: Rng + ?Sized>(level: &Level, config: &MutationConfig, rng: &mut R) -> Mutation {
    let mut current = level.clone();
    let mut ops = Vec::new();
    loop {
        match mutate_once(&current, config, rng) {
            Some((next, op)) => {
                current = next;
                ops.push(op);
            }
            None => break,
        }
        if !rng.random_bool(config.p_chain) {
            break;
        }
    }
    if ops.is_empty() {
        current = level.clone();
    }
    Mutation { level: current, ops }
}

/// One valid mutation, or `None` after [`MAX_RESAMPLES`] invalid draws.
pub fn mutate_once<R: Rng + ?Sized>(
    level: &Level,
    config: &MutationConfig,
    rng: &mut R,
) -> Option<(Level, MutationOp)> {
    let sprites: Vec<Pos> = level
        .iter()
        .filter(|&(p, t)| t.is_sprite() && level.is_mutable_cell(p))
        .map(|(p, _)| p)
        .collect();
    let empty: Vec<Pos> = level
        .iter()
        .filter(|&(p, t)| t == Tile::Floor && level.is_mutable_cell(p))
        .map(|(p, _)| p)
        .collect();
    let addable = level.variant().addable_sprites();

    for _ in 0..MAX_RESAMPLES {
        let u: f64 = rng.random();
        let kind = if u < config.p_add {
            OpKind::Add
        } else if u < config.p_add + config.p_move {
            OpKind::Move
        } else {
            OpKind::Remove
        };
        let (next, op) = match kind {
            OpKind::Add => {
                if empty.is_empty() {
                    continue;
                }
                let tile = addable[rng.random_range(0..addable.len())];
                let at = empty[rng.random_range(0..empty.len())];
                (level.with_tile(at, tile), MutationOp::Add { tile, at })
            }
            OpKind::Move => {
                if sprites.is_empty() || empty.is_empty() {
                    continue;
                }
                let from = sprites[rng.random_range(0..sprites.len())];
                let to = empty[rng.random_range(0..empty.len())];
                let tile = level.get(from);
                let next = level.with_tile(from, Tile::Floor).with_tile(to, tile);
                (next, MutationOp::Move { tile, from, to })
            }
            OpKind::Remove => {
                let removable: Vec<Pos> =
                    sprites.iter().copied().filter(|&p| level.get(p) != Tile::Avatar).collect();
                if removable.is_empty() {
                    continue;
                }
                let at = removable[rng.random_range(0..removable.len())];
                let tile = level.get(at);
                (level.with_tile(at, Tile::Floor), MutationOp::Remove { tile, at })
            }
        };
        if next.validate().is_ok() {
            return Some((next, op));
        }
    }
    None
}

/// Winning action trace plus the environment seed it was recorded under.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub seed: u64,
    pub actions: Vec<Action>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WitnessParseError {
    #[error("missing `seed <n>` header")]
    MissingHeader,
    #[error("bad seed header: {0}")]
    BadSeed(String),
    #[error("line {line}: unknown action `{token}`")]
    BadAction { line: usize, token: String },
}

impl fmt::Display for Witness {
    /// `seed <n>` followed by one action token per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {}", self.seed)?;
        for a in &self.actions {
            writeln!(f, "{}", a.token())?;
        }
        Ok(())
    }
}

impl FromStr for Witness {
    type Err = WitnessParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines();
        let header = lines.next().ok_or(WitnessParseError::MissingHeader)?;
        let seed = header
            .strip_prefix("seed ")
            .ok_or(WitnessParseError::MissingHeader)?
            .trim()
            .parse()
            .map_err(|_| WitnessParseError::BadSeed(header.to_string()))?;
        let actions = lines
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.trim().parse().map_err(|_| WitnessParseError::BadAction {
                    line: i + 2,
                    token: l.trim().to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Witness { seed, actions })
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WitnessError {
    /// The trace does not win under its own seed.
    #[error("witness does not win: {outcome:?} after {steps} steps")]
    WitnessInvalid { outcome: Outcome, steps: u32 },
    /// The trace was replayed under a different seed and did not win there.
    #[error("witness does not win under seed {seed}")]
    NonReproducible { seed: u64 },
}

fn replay(level: &Level, witness: &Witness, game_len: u32, seed: u64) -> EpisodeReport {
    let mut agent = ScriptedAgent::new(witness.actions.clone());
    rollout(level, &mut agent, game_len, RewardScheme::Native, seed)
}

fn wins_within_trace(report: &EpisodeReport, witness: &Witness) -> bool {
    report.won() && report.steps as usize <= witness.actions.len()
}

/// Replay a witness under its recorded seed; it must win before the trace ends.
pub fn replay_witness(level: &Level, witness: &Witness, game_len: u32) -> Result<EpisodeReport, WitnessError> {
    let report = replay(level, witness, game_len, witness.seed);
    if wins_within_trace(&report, witness) {
        Ok(report)
    } else {
        Err(WitnessError::WitnessInvalid {
            outcome: report.outcome,
            steps: report.steps,
        })
    }
}

/// Replay a witness under an arbitrary seed.
pub fn replay_witness_with_seed(
    level: &Level,
    witness: &Witness,
    game_len: u32,
    seed: u64,
) -> Result<EpisodeReport, WitnessError> {
    if seed == witness.seed {
        return replay_witness(level, witness, game_len);
    }
    let report = replay(level, witness, game_len, seed);
    if wins_within_trace(&report, witness) {
        Ok(report)
    } else {
        Err(WitnessError::NonReproducible { seed })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    TooEasy,
    TooHard,
    Viable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Viability {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GateConfig {
    pub random_trials: u32,
    pub mcts_attempts: u32,
    pub mcts: MctsConfig,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            random_trials: 20,
            mcts_attempts: 3,
            mcts: MctsConfig::default(),
        }
    }
}

/// Random agents first: any win makes the level too easy. Then up to
/// `mcts_attempts` planner episodes; the first win is kept as the witness.
/// Every episode draws its seeds from `seed`.
pub fn check_playability(level: &Level, game_len: u32, config: &GateConfig, seed: u64) -> Viability {
    let variant = level.variant();
    for trial in 0..config.random_trials as u64 {
        let s = child_seed(seed, trial);
        let mut agent = RandomAgent::new(variant, mix64(s));
        if rollout(level, &mut agent, game_len, RewardScheme::Native, s).won() {
            return Viability {
                verdict: Verdict::TooEasy,
                witness: None,
            };
        }
    }
    for attempt in 0..config.mcts_attempts as u64 {
        let s = child_seed(seed, 1_000_000 + attempt);
        let mut agent = MctsAgent::new(config.mcts, mix64(s)).expect("gate MCTS config is valid");
        let report = rollout(level, &mut agent, game_len, RewardScheme::Native, s);
        if report.won() {
            return Viability {
                verdict: Verdict::Viable,
                witness: Some(Witness {
                    seed: s,
                    actions: report.actions,
                }),
            };
        }
    }
    Viability {
        verdict: Verdict::TooHard,
        witness: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameVariant;
    use crate::rng::rng_from_seed;

    #[test]
    fn witness_text_round_trip() {
        let w = Witness {
            seed: 42,
            actions: vec![Action::Up, Action::Use, Action::Nil],
        };
        let text = w.to_string();
        assert_eq!(text, "seed 42\nup\nuse\nnil\n");
        assert_eq!(text.parse::<Witness>().unwrap(), w);
        assert_eq!("up\n".parse::<Witness>(), Err(WitnessParseError::MissingHeader));
    }

    #[test]
    fn config_validation() {
        assert_eq!(MutationConfig::default().validate(), Ok(()));
        let c = MutationConfig { p_add: 0.6, ..MutationConfig::default() };
        assert!(matches!(c.validate(), Err(MutationConfigError::NotNormalized(_))));
        let c = MutationConfig { mutation_rate: 1.5, ..MutationConfig::default() };
        assert!(matches!(c.validate(), Err(MutationConfigError::OutOfRange { .. })));
    }

    #[test]
    fn exhausted_mutations_return_the_parent() {
        // Removing the only key or the only door always breaks the level.
        let level = Level::parse("wwwww\nwA+gw\nwwwww\n", GameVariant::DZeldaSingleDoor).unwrap();
        let cfg = MutationConfig {
            p_add: 0.0,
            p_move: 0.0,
            p_remove: 1.0,
            ..MutationConfig::default()
        };
        let m = mutate(&level, &cfg, &mut rng_from_seed(0));
        assert!(!m.mutated());
        assert_eq!(m.level, level);
    }
}
