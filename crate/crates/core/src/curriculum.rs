//! Curricula extracted from a run's archive.
//!
//! A lineage is the parent chain from the seed level to a named leaf pair.
//! Its solved levels, in chain order, are indexed `0..k`; index `i` covers
//! the quantile interval `[i/k, (i+1)/k]`. The easy, medium and hard
//! segments are the indices whose interval overlaps `[0, 0.1]`,
//! `[0.45, 0.55]` and `[0.9, 1]` with positive length.

use std::fmt;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::de::{init_population, DeParams, DePopulation, GameFitness};
use crate::game::{rollout, Level, RewardScheme};
use crate::poet::{Poet, PoetConfig};
use crate::policy::{ParamVector, PolicyAgent};
use crate::rng::{child_seed, derive_rng, derive_seed, Purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Easy,
    Medium,
    Hard,
    /// Control: direct optimisation on the hard level alone.
    Direct,
}

impl Stage {
    pub const CURRICULUM: [Stage; 3] = [Stage::Easy, Stage::Medium, Stage::Hard];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Easy => "easy",
            Stage::Medium => "medium",
            Stage::Hard => "hard",
            Stage::Direct => "direct",
        }
    }

    /// Whether solved index `i` of `k` falls in this segment.
    pub fn contains(self, i: usize, k: usize) -> bool {
        match self {
            Stage::Easy => 10 * i < k,
            Stage::Medium => 100 * i < 55 * k && 100 * (i + 1) > 45 * k,
            Stage::Hard | Stage::Direct => 10 * (i + 1) > 9 * k,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CurriculumError {
    #[error("no pair with id {0} in the archive")]
    UnknownPair(u64),
    #[error("lineage {lineage_id} has {solved} solved levels; at least 3 are needed to fill the easy, medium and hard segments")]
    CurriculumUnavailable { lineage_id: u64, solved: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurriculumLevel {
    pub pair_id: u64,
    pub level: Level,
    /// Index among the lineage's solved levels.
    pub position: usize,
    /// Optimisation steps the source pair received in the run.
    pub source_loops: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curriculum {
    pub lineage_id: u64,
    /// Number of solved levels along the lineage.
    pub solved_count: usize,
    pub easy: CurriculumLevel,
    pub medium: CurriculumLevel,
    pub hard: CurriculumLevel,
}

impl Curriculum {
    pub fn stages(&self) -> [(Stage, &CurriculumLevel); 3] {
        [
            (Stage::Easy, &self.easy),
            (Stage::Medium, &self.medium),
            (Stage::Hard, &self.hard),
        ]
    }
}

/// Pair ids from the seed level down to `leaf`.
pub fn lineage(archive: &Poet, leaf: u64) -> Result<Vec<u64>, CurriculumError> {
    if archive.pair(leaf).is_none() {
        return Err(CurriculumError::UnknownPair(leaf));
    }
    let mut chain = archive.ancestry(leaf);
    chain.reverse();
    Ok(chain)
}

/// Solved pair ids along the lineage ending at `leaf`, in chain order.
pub fn solved_along(archive: &Poet, leaf: u64) -> Result<Vec<u64>, CurriculumError> {
    Ok(lineage(archive, leaf)?
        .into_iter()
        .filter(|&id| archive.pair(id).is_some_and(|p| p.is_solved()))
        .collect())
}

/// Pick one solved level uniformly from each segment of the lineage ending
/// at `lineage_id`.
pub fn extract_curriculum<R: Rng + ?Sized>(
    archive: &Poet,
    lineage_id: u64,
    rng: &mut R,
) -> Result<Curriculum, CurriculumError> {
    let solved = solved_along(archive, lineage_id)?;
    let k = solved.len();
    if k < 3 {
        return Err(CurriculumError::CurriculumUnavailable { lineage_id, solved: k });
    }
    let mut pick = |stage: Stage| {
        let segment: Vec<usize> = (0..k).filter(|&i| stage.contains(i, k)).collect();
        let position = segment[rng.random_range(0..segment.len())];
        let pair = archive.pair(solved[position]).expect("lineage ids exist");
        CurriculumLevel {
            pair_id: pair.id,
            level: pair.level.clone(),
            position,
            source_loops: pair.optimized_loops,
        }
    };
    let easy = pick(Stage::Easy);
    let medium = pick(Stage::Medium);
    let hard = pick(Stage::Hard);
    Ok(Curriculum {
        lineage_id,
        solved_count: k,
        easy,
        medium,
        hard,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CurriculumConfig {
    pub game_len: u32,
    pub reward: RewardScheme,
    pub n_games: u64,
    pub pop_size: usize,
    pub episodes_per_eval: u32,
    pub sigma_init: f64,
    pub de: DeParams,
    /// Upper bound on optimisation steps per stage.
    pub max_stage_loops: u64,
    pub seed: u64,
}

impl CurriculumConfig {
    /// Settings matching the run that produced the archive.
    pub fn from_run(config: &PoetConfig) -> Self {
        CurriculumConfig {
            game_len: config.game_len,
            reward: config.reward,
            n_games: config.n_games,
            pop_size: config.pop_size,
            episodes_per_eval: config.episodes_per_eval,
            sigma_init: config.sigma_init,
            de: config.de,
            max_stage_loops: config.num_poet_loops,
            seed: config.seed,
        }
    }

    fn stage_loops(&self, source_loops: u64) -> u64 {
        source_loops.clamp(1, self.max_stage_loops.max(1))
    }
}

/// One CSV row of the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StageResult {
    pub lineage_id: u64,
    pub stage: Stage,
    pub budget_used: u64,
    /// Reported flag: false once any earlier stage has failed.
    pub solved: bool,
    /// Whether a champion won this stage's level, regardless of earlier stages.
    #[serde(skip)]
    pub reached_win: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurriculumReport {
    /// Easy, medium, hard.
    pub stages: Vec<StageResult>,
    pub direct: StageResult,
    /// Rollout budget the source pairs received in the run.
    pub source_budget: u64,
}

impl CurriculumReport {
    pub fn rows(&self) -> impl Iterator<Item = &StageResult> {
        self.stages.iter().chain(std::iter::once(&self.direct))
    }

    /// `lineageId,stage,budgetUsed,solved`, one row per stage plus the control.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        for row in self.rows() {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn champion_wins(level: &Level, params: &ParamVector, cfg: &CurriculumConfig, seed: u64) -> bool {
    let fit = GameFitness::new(level.clone(), cfg.game_len, cfg.reward);
    let mut agent = PolicyAgent::new(fit.spec, params, level.variant()).expect("population matches spec");
    rollout(level, &mut agent, cfg.game_len, cfg.reward, seed).won()
}

/// Train one population on `level` for `loops` optimisation steps and report
/// the rollouts spent and whether any step's champion won.
fn train(pop: &mut DePopulation, level: &Level, loops: u64, cfg: &CurriculumConfig, stream: u64) -> (u64, bool) {
    let mut fit = GameFitness::new(level.clone(), cfg.game_len, cfg.reward);
    fit.episodes_per_eval = cfg.episodes_per_eval;
    pop.invalidate();
    let before = pop.evaluations;
    let mut won = false;
    for l in 0..loops {
        let base = derive_seed(cfg.seed, Purpose::Curriculum, stream, l);
        pop.reseed(child_seed(base, 0));
        pop.optimize_step(&fit, cfg.n_games, child_seed(base, 1))
            .expect("budget validated");
        if !won {
            won = champion_wins(level, pop.champion().0, cfg, child_seed(base, 2));
        }
    }
    (pop.evaluations - before, won)
}

fn fresh_population(curriculum: &Curriculum, cfg: &CurriculumConfig, stream: u64) -> DePopulation {
    let fit = GameFitness::new(curriculum.hard.level.clone(), cfg.game_len, cfg.reward);
    let mut rng = derive_rng(cfg.seed, Purpose::Curriculum, stream, u64::MAX);
    let mut pop = init_population(&ParamVector::zeros(&fit.spec), cfg.sigma_init, cfg.pop_size, &mut rng)
        .expect("population settings validated");
    pop.params = cfg.de;
    pop
}

/// Train a fresh population through the easy, medium and hard stages in
/// turn, carrying it forward, then run the direct control on the hard level
/// with the combined budget.
pub fn run_curriculum(curriculum: &Curriculum, cfg: &CurriculumConfig) -> CurriculumReport {
    let mut pop = fresh_population(curriculum, cfg, 0);
    let mut stages = Vec::with_capacity(3);
    let mut all_loops = 0;
    let mut source_budget = 0;
    let mut failed = false;
    for (k, (stage, cl)) in curriculum.stages().into_iter().enumerate() {
        let loops = cfg.stage_loops(cl.source_loops);
        all_loops += loops;
        source_budget += cl.source_loops * cfg.n_games;
        let (used, won) = train(&mut pop, &cl.level, loops, cfg, k as u64 + 1);
        failed |= !won;
        stages.push(StageResult {
            lineage_id: curriculum.lineage_id,
            stage,
            budget_used: used,
            solved: !failed,
            reached_win: won,
        });
    }
    let mut control = fresh_population(curriculum, cfg, 4);
    let (used, won) = train(&mut control, &curriculum.hard.level, all_loops, cfg, 5);
    CurriculumReport {
        stages,
        direct: StageResult {
            lineage_id: curriculum.lineage_id,
            stage: Stage::Direct,
            budget_used: used,
            solved: won,
            reached_win: won,
        },
        source_budget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segment(stage: Stage, k: usize) -> Vec<usize> {
        (0..k).filter(|&i| stage.contains(i, k)).collect()
    }

    #[test]
    fn small_lineages_have_singleton_segments() {
        assert_eq!(segment(Stage::Easy, 3), [0]);
        assert_eq!(segment(Stage::Medium, 3), [1]);
        assert_eq!(segment(Stage::Hard, 3), [2]);
        assert_eq!(segment(Stage::Medium, 4), [1, 2]);
    }

    #[test]
    fn segments_follow_quantiles() {
        assert_eq!(segment(Stage::Easy, 20), [0, 1]);
        assert_eq!(segment(Stage::Medium, 20), [9, 10]);
        assert_eq!(segment(Stage::Hard, 20), [18, 19]);
        assert_eq!(segment(Stage::Medium, 100), (45..55).collect::<Vec<_>>());
    }
}
