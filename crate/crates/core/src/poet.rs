//! The coevolution loop: reproduce levels, optimise every pair's agents,
//! re-evaluate champions, and periodically transfer champions between pairs.
//!
//! Loop `t` (counting from 1) runs, in order:
//!
//! 1. reproduction when `t % mutation_timer == 0`,
//! 2. one `optimize_step` for every active pair,
//! 3. champion re-evaluation on the pair's own level,
//! 4. transfer when `t % transfer_timer == 0`.
//!
//! Every random stream is derived from the master seed and a
//! `(purpose, id, loop)` triple, so results do not depend on how work is
//! scheduled across threads.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::de::{init_population, DeError, DeParams, DePopulation, GameFitness};
use crate::game::{rollout, GameVariant, Level, LevelError, RewardScheme};
use crate::levelgen::{check_playability, mutate, GateConfig, MutationConfig, MutationOp, Verdict, Witness};
use crate::policy::{ParamVector, PolicyAgent, PolicySpec};
use crate::rng::{child_seed, derive_rng, derive_seed, Purpose};

/// Gate seed used for the starting level, so its verdict does not depend on
/// the master seed.
pub const SEED_LEVEL_GATE_SEED: u64 = 0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PoetConfig {
    pub game: GameVariant,
    pub game_len: u32,
    pub n_games: u64,
    pub pop_size: usize,
    pub mutation_timer: u64,
    pub max_children: usize,
    pub mutation_rate: f64,
    pub transfer_timer: u64,
    pub max_envs: usize,
    pub num_poet_loops: u64,
    pub reward: RewardScheme,
    pub seed: u64,
    pub episodes_per_eval: u32,
    /// Spread of the initial DE population around the zero network.
    pub sigma_init: f64,
    /// Spread of a re-seeded population around a transferred champion.
    pub sigma_transfer: f64,
    pub de: DeParams,
    pub mutation: MutationConfig,
    pub gate: GateConfig,
    /// Write a checkpoint every this many loops (and after the last loop).
    pub checkpoint_every: u64,
    /// Older checkpoints beyond this many are pruned; 0 keeps all.
    pub keep_checkpoints: usize,
    /// Starting level text; the built-in seed level of `game` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_level: Option<String>,
}

impl PoetConfig {
    pub fn new(game: GameVariant) -> Self {
        PoetConfig {
            game,
            game_len: game.default_game_len(),
            n_games: 1500,
            pop_size: 50,
            mutation_timer: 25,
            max_children: 8,
            mutation_rate: 0.8,
            transfer_timer: 10,
            max_envs: 30,
            num_poet_loops: 5000,
            reward: RewardScheme::Aligned,
            seed: 0,
            episodes_per_eval: 1,
            sigma_init: 0.1,
            sigma_transfer: 0.01,
            de: DeParams::default(),
            mutation: MutationConfig::default(),
            gate: GateConfig::default(),
            checkpoint_every: 50,
            keep_checkpoints: 2,
            seed_level: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let range = |name: &'static str, ok: bool, value: String| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange { name, value })
            }
        };
        range("gameLen", self.game_len >= 1, self.game_len.to_string())?;
        range("popSize", self.pop_size >= 4, self.pop_size.to_string())?;
        range(
            "nGames",
            self.n_games >= self.pop_size as u64,
            self.n_games.to_string(),
        )?;
        range("mutationTimer", self.mutation_timer >= 1, self.mutation_timer.to_string())?;
        range("transferTimer", self.transfer_timer >= 1, self.transfer_timer.to_string())?;
        range("maxEnvs", self.max_envs >= 1, self.max_envs.to_string())?;
        range(
            "mutationRate",
            (0.0..=1.0).contains(&self.mutation_rate),
            self.mutation_rate.to_string(),
        )?;
        range("episodesPerEval", self.episodes_per_eval >= 1, self.episodes_per_eval.to_string())?;
        range(
            "sigmaInit",
            self.sigma_init >= 0.0 && self.sigma_init.is_finite(),
            self.sigma_init.to_string(),
        )?;
        range(
            "sigmaTransfer",
            self.sigma_transfer >= 0.0 && self.sigma_transfer.is_finite(),
            self.sigma_transfer.to_string(),
        )?;
        range("checkpointEvery", self.checkpoint_every >= 1, self.checkpoint_every.to_string())?;
        range(
            "de.cr",
            (0.0..=1.0).contains(&self.de.cr),
            self.de.cr.to_string(),
        )?;
        self.mutation
            .validate()
            .map_err(|e| ConfigError::OutOfRange {
                name: "mutation",
                value: e.to_string(),
            })?;
        self.gate.mcts.validate().map_err(|e| ConfigError::OutOfRange {
            name: "gate.mcts",
            value: e.to_string(),
        })?;
        Ok(())
    }

    pub fn mutation_config(&self) -> MutationConfig {
        MutationConfig {
            mutation_rate: self.mutation_rate,
            ..self.mutation
        }
    }

    pub fn seed_level(&self) -> Result<Level, ConfigError> {
        match &self.seed_level {
            Some(text) => Level::parse(text, self.game).map_err(ConfigError::SeedLevel),
            None => Ok(crate::seeds::seed_level(self.game)),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{name} out of range: {value}")]
    OutOfRange { name: &'static str, value: String },
    #[error("seed level does not parse: {0}")]
    SeedLevel(LevelError),
}

#[derive(Debug, thiserror::Error)]
pub enum PoetError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("seed level failed the playability gate ({0:?}); the run cannot start")]
    SeedNotViable(Verdict),
    #[error(transparent)]
    De(#[from] DeError),
}

/// Champion snapshot that won on its own level at re-evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveRecord {
    pub solved_loop: u64,
    pub params: ParamVector,
    /// Environment seed and action trace of the winning episode.
    pub trace: Witness,
}

/// An environment paired with its agent population.
#[derive(Clone, Debug)]
pub struct Pair {
    pub id: u64,
    pub level: Level,
    /// Dropped when the pair is culled.
    pub de: Option<DePopulation>,
    pub champion: ParamVector,
    pub champion_score: f64,
    pub created_loop: u64,
    pub parent_id: Option<u64>,
    pub solved: Option<SolveRecord>,
    pub active: bool,
    pub culled_loop: Option<u64>,
    /// Gate witness recorded at admission.
    pub witness: Witness,
    /// Number of `optimize_step` calls this pair received.
    pub optimized_loops: u64,
}

impl Pair {
    pub fn is_solved(&self) -> bool {
        self.solved.is_some()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunStats {
    pub loops: u64,
    pub total_levels: u64,
    pub viable_levels: u64,
    pub solved_levels: u64,
    pub transfer_attempts: u64,
    pub transfers_accepted: u64,
}

/// One line of `lineage.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case", rename_all_fields = "camelCase")]
pub enum LineageEvent {
    /// The starting level; not counted among generated levels.
    Seed {
        #[serde(rename = "loop")]
        loop_index: u64,
        id: u64,
        witness_seed: u64,
        witness_steps: usize,
    },
    Admit {
        #[serde(rename = "loop")]
        loop_index: u64,
        id: u64,
        parent_id: Option<u64>,
        witness_seed: u64,
        witness_steps: usize,
        mutations: Vec<MutationOp>,
    },
    Reject {
        #[serde(rename = "loop")]
        loop_index: u64,
        parent_id: u64,
        verdict: Verdict,
    },
    Cull {
        #[serde(rename = "loop")]
        loop_index: u64,
        id: u64,
    },
    Solve {
        #[serde(rename = "loop")]
        loop_index: u64,
        id: u64,
        score: f64,
        seed: u64,
        steps: u32,
    },
    TransferRound {
        #[serde(rename = "loop")]
        loop_index: u64,
        attempts: u64,
        accepted: u64,
    },
    Transfer {
        #[serde(rename = "loop")]
        loop_index: u64,
        from: u64,
        to: u64,
        score: f64,
        incumbent_score: f64,
    },
}

impl LineageEvent {
    pub fn loop_index(&self) -> u64 {
        match *self {
            LineageEvent::Seed { loop_index, .. }
            | LineageEvent::Admit { loop_index, .. }
            | LineageEvent::Reject { loop_index, .. }
            | LineageEvent::Cull { loop_index, .. }
            | LineageEvent::Solve { loop_index, .. }
            | LineageEvent::TransferRound { loop_index, .. }
            | LineageEvent::Transfer { loop_index, .. } => loop_index,
        }
    }
}

/// Recount run statistics from an event log. Counts cover generated
/// levels only, so the seed level and its solve are left out.
pub fn recount(events: &[LineageEvent]) -> RunStats {
    let mut s = RunStats::default();
    let mut seeds = Vec::new();
    for e in events {
        s.loops = s.loops.max(e.loop_index());
        match e {
            LineageEvent::Seed { id, .. } => seeds.push(*id),
            LineageEvent::Solve { id, .. } if seeds.contains(id) => {}
            LineageEvent::Admit { .. } => {
                s.total_levels += 1;
                s.viable_levels += 1;
            }
            LineageEvent::Reject { .. } => s.total_levels += 1,
            LineageEvent::Solve { .. } => s.solved_levels += 1,
            LineageEvent::TransferRound { attempts, .. } => s.transfer_attempts += attempts,
            LineageEvent::Transfer { .. } => s.transfers_accepted += 1,
            LineageEvent::Cull { .. } => {}
        }
    }
    s
}

/// Per-loop row of `stats.csv`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StatsRow {
    #[serde(rename = "loop")]
    pub loop_index: u64,
    pub total_levels: u64,
    pub viable_levels: u64,
    pub solved_levels: u64,
    pub transfer_attempts: u64,
    pub transfers_accepted: u64,
    pub active_pairs: usize,
}

/// Result of one transfer round.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TransferOutcome {
    pub attempts: u64,
    pub accepted: u64,
    pub events: Vec<LineageEvent>,
}

fn champion_score(level: &Level, params: &ParamVector, config: &PoetConfig, seed: u64) -> (f64, Option<Witness>) {
    let spec = PolicySpec::for_variant(level.variant(), level.width(), level.height());
    let mut total = 0.0;
    let mut win = None;
    for e in 0..config.episodes_per_eval {
        let s = GameFitness::episode_seed(seed, e);
        let mut agent = PolicyAgent::new(spec, params, level.variant()).expect("champion matches spec");
        let r = rollout(level, &mut agent, config.game_len, config.reward, s);
        if r.won() && win.is_none() {
            win = Some(Witness {
                seed: s,
                actions: r.actions.clone(),
            });
        }
        total += r.final_score;
    }
    (total / config.episodes_per_eval as f64, win)
}

/// Mutual transfer among the active pairs in `pairs`.
///
/// Every champion is evaluated on every other active level under that
/// level's transfer seed for `loop_index`, and the incumbent on the same
/// seed. A level adopts the best foreign champion only if it strictly beats
/// the incumbent; its DE population is then re-seeded around the newcomer.
pub fn transfer(pairs: &mut [Pair], config: &PoetConfig, loop_index: u64) -> TransferOutcome {
    let active: Vec<usize> = (0..pairs.len()).filter(|&i| pairs[i].active).collect();
    let n = active.len();
    if n < 2 {
        return TransferOutcome::default();
    }
    let jobs: Vec<(usize, usize)> = active
        .iter()
        .flat_map(|&j| active.iter().map(move |&i| (i, j)))
        .collect();
    let scores: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let seed = derive_seed(config.seed, Purpose::Transfer, pairs[j].id, loop_index);
            champion_score(&pairs[j].level, &pairs[i].champion, config, seed).0
        })
        .collect();
    let score = |i: usize, j: usize| {
        let a = active.iter().position(|&x| x == i).unwrap();
        let b = active.iter().position(|&x| x == j).unwrap();
        scores[b * n + a]
    };

    let snapshot: Vec<ParamVector> = active.iter().map(|&i| pairs[i].champion.clone()).collect();
    let mut out = TransferOutcome {
        attempts: (n * (n - 1)) as u64,
        ..TransferOutcome::default()
    };
    for &j in &active {
        let incumbent = score(j, j);
        let mut best: Option<(usize, f64)> = None;
        for &i in active.iter().filter(|&&i| i != j) {
            let s = score(i, j);
            if s > incumbent && best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        if let Some((i, s)) = best {
            let donor = snapshot[active.iter().position(|&x| x == i).unwrap()].clone();
            let mut rng = derive_rng(config.seed, Purpose::TransferReseed, pairs[j].id, loop_index);
            let mut de = init_population(&donor, config.sigma_transfer, config.pop_size, &mut rng)
                .expect("config validated");
            de.params = config.de;
            let (from, to) = (pairs[i].id, pairs[j].id);
            let target = &mut pairs[j];
            target.champion = donor;
            target.champion_score = s;
            target.de = Some(de);
            out.accepted += 1;
            out.events.push(LineageEvent::Transfer {
                loop_index,
                from,
                to,
                score: s,
                incumbent_score: incumbent,
            });
        }
    }
    out.events.insert(
        0,
        LineageEvent::TransferRound {
            loop_index,
            attempts: out.attempts,
            accepted: out.accepted,
        },
    );
    out
}

/// Deactivate the oldest active pairs (smallest `created_loop`, then
/// smallest id) until at most `max_envs` remain.
pub fn cull(pairs: &mut [Pair], max_envs: usize, loop_index: u64) -> Vec<LineageEvent> {
    let mut events = Vec::new();
    loop {
        let active: Vec<usize> = (0..pairs.len()).filter(|&i| pairs[i].active).collect();
        if active.len() <= max_envs {
            return events;
        }
        let oldest = *active
            .iter()
            .min_by_key(|&&i| (pairs[i].created_loop, pairs[i].id))
            .unwrap();
        let p = &mut pairs[oldest];
        p.active = false;
        p.culled_loop = Some(loop_index);
        p.de = None;
        events.push(LineageEvent::Cull {
            loop_index,
            id: p.id,
        });
    }
}

/// Full state of a run between loops.
#[derive(Clone, Debug)]
pub struct Poet {
    pub config: PoetConfig,
    /// Every pair ever admitted, in id order; culled pairs stay as archive.
    pub pairs: Vec<Pair>,
    pub stats: RunStats,
    pub next_id: u64,
    /// Last completed loop.
    pub loop_index: u64,
}

impl Poet {
    /// Gate the seed level and pair it with a fresh population around the
    /// zero network. Returns the admission event of the seed pair.
    pub fn new(config: PoetConfig) -> Result<(Poet, Vec<LineageEvent>), PoetError> {
        config.validate()?;
        let level = config.seed_level()?;
        let viability = check_playability(&level, config.game_len, &config.gate, SEED_LEVEL_GATE_SEED);
        let witness = match (viability.verdict, viability.witness) {
            (Verdict::Viable, Some(w)) => w,
            (v, _) => return Err(PoetError::SeedNotViable(v)),
        };
        let spec = PolicySpec::for_variant(level.variant(), level.width(), level.height());
        let center = ParamVector::zeros(&spec);
        let mut rng = derive_rng(config.seed, Purpose::Init, 0, 0);
        let mut de = init_population(&center, config.sigma_init, config.pop_size, &mut rng)?;
        de.params = config.de;
        let event = LineageEvent::Seed {
            loop_index: 0,
            id: 0,
            witness_seed: witness.seed,
            witness_steps: witness.actions.len(),
        };
        let pair = Pair {
            id: 0,
            level,
            de: Some(de),
            champion: center,
            champion_score: 0.0,
            created_loop: 0,
            parent_id: None,
            solved: None,
            active: true,
            culled_loop: None,
            witness,
            optimized_loops: 0,
        };
        Ok((
            Poet {
                config,
                pairs: vec![pair],
                stats: RunStats::default(),
                next_id: 1,
                loop_index: 0,
            },
            vec![event],
        ))
    }

    pub fn active_count(&self) -> usize {
        self.pairs.iter().filter(|p| p.active).count()
    }

    pub fn pair(&self, id: u64) -> Option<&Pair> {
        self.pairs.iter().find(|p| p.id == id)
    }

    pub fn stats_row(&self) -> StatsRow {
        StatsRow {
            loop_index: self.loop_index,
            total_levels: self.stats.total_levels,
            viable_levels: self.stats.viable_levels,
            solved_levels: self.stats.solved_levels,
            transfer_attempts: self.stats.transfer_attempts,
            transfers_accepted: self.stats.transfers_accepted,
            active_pairs: self.active_count(),
        }
    }

    /// Run one loop and return the events it produced.
    pub fn step(&mut self) -> Vec<LineageEvent> {
        let t = self.loop_index + 1;
        let mut events = Vec::new();
        if t % self.config.mutation_timer == 0 {
            events.extend(self.reproduce(t));
        }
        self.optimize(t);
        events.extend(self.reevaluate(t));
        if t % self.config.transfer_timer == 0 {
            let out = transfer(&mut self.pairs, &self.config, t);
            self.stats.transfer_attempts += out.attempts;
            self.stats.transfers_accepted += out.accepted;
            events.extend(out.events);
        }
        self.loop_index = t;
        self.stats.loops = t;
        events
    }

    /// Mutate eligible parents, gate the candidates, admit the viable ones
    /// and cull down to `max_envs`.
    pub fn reproduce(&mut self, t: u64) -> Vec<LineageEvent> {
        let cfg = &self.config;
        let mut coin = derive_rng(cfg.seed, Purpose::Reproduce, 0, t);
        let solved: Vec<usize> = (0..self.pairs.len())
            .filter(|&i| self.pairs[i].active && self.pairs[i].is_solved())
            .collect();
        let eligible = if solved.is_empty() {
            (0..self.pairs.len()).filter(|&i| self.pairs[i].active).collect()
        } else {
            solved
        };

        let mutation = cfg.mutation_config();
        let mut candidates = Vec::new();
        for &pi in &eligible {
            if !coin.random_bool(cfg.mutation_rate) {
                continue;
            }
            let parent = &self.pairs[pi];
            let base = derive_seed(cfg.seed, Purpose::Mutate, parent.id, t);
            for k in 0..cfg.max_children as u64 {
                let mut rng = crate::rng::rng_from_seed(child_seed(base, k));
                let m = mutate(&parent.level, &mutation, &mut rng);
                if m.mutated() {
                    let gate_seed = child_seed(derive_seed(cfg.seed, Purpose::Gate, parent.id, t), k);
                    candidates.push((pi, m, gate_seed));
                }
            }
        }
        let verdicts: Vec<_> = candidates
            .par_iter()
            .map(|(_, m, gate_seed)| check_playability(&m.level, cfg.game_len, &cfg.gate, *gate_seed))
            .collect();

        let mut events = Vec::new();
        for ((pi, m, _), via) in candidates.into_iter().zip(verdicts) {
            self.stats.total_levels += 1;
            let parent_id = self.pairs[pi].id;
            let witness = match (via.verdict, via.witness) {
                (Verdict::Viable, Some(w)) => w,
                (verdict, _) => {
                    events.push(LineageEvent::Reject {
                        loop_index: t,
                        parent_id,
                        verdict,
                    });
                    continue;
                }
            };
            self.stats.viable_levels += 1;
            let parent = &self.pairs[pi];
            let mut de = parent.de.clone().expect("active pairs keep their population");
            de.invalidate();
            let id = self.next_id;
            self.next_id += 1;
            events.push(LineageEvent::Admit {
                loop_index: t,
                id,
                parent_id: Some(parent_id),
                witness_seed: witness.seed,
                witness_steps: witness.actions.len(),
                mutations: m.ops.clone(),
            });
            let child = Pair {
                id,
                level: m.level,
                de: Some(de),
                champion: parent.champion.clone(),
                champion_score: parent.champion_score,
                created_loop: t,
                parent_id: Some(parent_id),
                solved: None,
                active: true,
                culled_loop: None,
                witness,
                optimized_loops: 0,
            };
            self.pairs.push(child);
        }
        events.extend(cull(&mut self.pairs, self.config.max_envs, t));
        events
    }

    fn optimize(&mut self, t: u64) {
        let cfg = &self.config;
        self.pairs.par_iter_mut().filter(|p| p.active).for_each(|p| {
            let mut fit = GameFitness::new(p.level.clone(), cfg.game_len, cfg.reward);
            fit.episodes_per_eval = cfg.episodes_per_eval;
            let de = p.de.as_mut().expect("active pairs keep their population");
            de.reseed(derive_seed(cfg.seed, Purpose::Optimize, p.id, t));
            let base = derive_seed(cfg.seed, Purpose::Fitness, p.id, t);
            de.optimize_step(&fit, cfg.n_games, base).expect("config validated");
            p.champion = de.champion().0.clone();
            p.optimized_loops += 1;
        });
    }

    fn reevaluate(&mut self, t: u64) -> Vec<LineageEvent> {
        let cfg = &self.config;
        let results: Vec<(usize, f64, Option<Witness>)> = self
            .pairs
            .par_iter()
            .enumerate()
            .filter(|(_, p)| p.active)
            .map(|(i, p)| {
                let seed = derive_seed(cfg.seed, Purpose::Reevaluate, p.id, t);
                let (s, w) = champion_score(&p.level, &p.champion, cfg, seed);
                (i, s, w)
            })
            .collect();
        let mut events = Vec::new();
        for (i, score, win) in results {
            let p = &mut self.pairs[i];
            p.champion_score = score;
            if let (None, Some(trace)) = (&p.solved, win) {
                events.push(LineageEvent::Solve {
                    loop_index: t,
                    id: p.id,
                    score,
                    seed: trace.seed,
                    steps: trace.actions.len() as u32,
                });
                p.solved = Some(SolveRecord {
                    solved_loop: t,
                    params: p.champion.clone(),
                    trace,
                });
                if p.parent_id.is_some() {
                    self.stats.solved_levels += 1;
                }
            }
        }
        events
    }

    /// Ids from `id` back to the root, `id` first.
    pub fn ancestry(&self, id: u64) -> Vec<u64> {
        let mut chain = vec![id];
        let mut cur = self.pair(id).and_then(|p| p.parent_id);
        while let Some(pid) = cur {
            chain.push(pid);
            cur = self.pair(pid).and_then(|p| p.parent_id);
        }
        chain
    }
}

/// Run `config.num_poet_loops` loops in memory, returning the final state
/// and every event.
pub fn run(config: PoetConfig) -> Result<(Poet, Vec<LineageEvent>), PoetError> {
    let (mut poet, mut events) = Poet::new(config)?;
    while poet.loop_index < poet.config.num_poet_loops {
        events.extend(poet.step());
    }
    Ok((poet, events))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_reference_table() {
        let c = PoetConfig::new(GameVariant::DZeldaSingleDoor);
        assert_eq!(
            (c.game_len, c.n_games, c.pop_size, c.mutation_timer, c.max_children),
            (500, 1500, 50, 25, 8)
        );
        assert_eq!((c.mutation_rate, c.transfer_timer, c.max_envs, c.num_poet_loops), (0.8, 10, 30, 5000));
        assert!(c.validate().is_ok());
        let bad = PoetConfig {
            mutation_rate: 1.5,
            ..c
        };
        assert!(matches!(bad.validate(), Err(ConfigError::OutOfRange { name: "mutationRate", .. })));
    }

    #[test]
    fn config_json_is_camel_case() {
        let c = PoetConfig::new(GameVariant::Solarfox);
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        assert_eq!(v["game"], "solarfox");
        assert_eq!(v["gameLen"], 1000);
        assert_eq!(v["maxEnvs"], 30);
        let back: PoetConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn event_lines_round_trip() {
        let e = LineageEvent::Solve {
            loop_index: 7,
            id: 3,
            score: 0.986,
            seed: 11,
            steps: 7,
        };
        let line = serde_json::to_string(&e).unwrap();
        assert!(line.starts_with(r#"{"event":"solve","loop":7"#), "{line}");
        assert_eq!(serde_json::from_str::<LineageEvent>(&line).unwrap(), e);
    }
}
