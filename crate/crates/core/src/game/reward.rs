use serde::{Deserialize, Serialize};

use super::state::{Event, EventKind};
use super::{Action, GameVariant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardScheme {
    /// The game's own points: key, door, monster kills, coins.
    Native,
    /// Terminal-only reward favouring fast wins and late deaths.
    Aligned,
}

#[derive(Debug, thiserror::Error)]
#[error("unknown reward scheme `{0}` (expected native or aligned)")]
pub struct UnknownReward(pub String);

impl std::str::FromStr for RewardScheme {
    type Err = UnknownReward;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "native" => Ok(RewardScheme::Native),
            "aligned" => Ok(RewardScheme::Aligned),
            other => Err(UnknownReward(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Win,
    Loss,
    Timeout,
}

/// Outcome of one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub variant: GameVariant,
    /// Score under the scheme the rollout was run with.
    pub final_score: f64,
    /// Native points accumulated, regardless of scheme.
    pub native_score: f64,
    pub steps: u32,
    pub max_steps: u32,
    pub outcome: Outcome,
    pub events: Vec<Event>,
    pub actions: Vec<Action>,
}

impl EpisodeReport {
    pub fn won(&self) -> bool {
        self.outcome == Outcome::Win
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

/// Score a finished episode.
///
/// Native sums event points. Aligned is `1 - steps/maxSteps` on a win,
/// `steps/maxSteps - 1` on a loss and exactly zero on a timeout.
pub fn score_episode(report: &EpisodeReport, scheme: RewardScheme) -> f64 {
    match scheme {
        RewardScheme::Native => report
            .events
            .iter()
            .map(|e| e.kind.points(report.variant))
            .sum(),
        RewardScheme::Aligned => {
            let frac = report.steps as f64 / report.max_steps as f64;
            match report.outcome {
                Outcome::Win => 1.0 - frac,
                Outcome::Loss => frac - 1.0,
                Outcome::Timeout => 0.0,
            }
        }
    }
}
