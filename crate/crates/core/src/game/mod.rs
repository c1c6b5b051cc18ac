//! Deterministic forward models for the two grid games.
//!
//! * dZelda: pick up a key and walk it to the door (single-door) or to every
//!   door (multi-door) while avoiding or killing randomly wandering monsters.
//! * Solarfox: a ship that never stops moving collects every coin while
//!   dodging walls and the shots fired by two enemies patrolling the top and
//!   bottom rows.

mod level;
mod reward;
mod rollout;
mod solarfox;
mod state;
mod zelda;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use level::{Level, LevelError, Tile};
pub use reward::{score_episode, EpisodeReport, Outcome, RewardScheme, UnknownReward};
pub use rollout::{rollout, rollout_with, Agent, RolloutOptions, ScriptedAgent};
pub use solarfox::{Enemy, Projectile, SolarfoxWorld, ENEMY_FIRE_PERIOD};
pub use state::{Event, EventKind, GameState, LossCause, StepError, Terminal, World};
pub use zelda::ZeldaWorld;

/// Tile coordinates; `x` grows to the right, `y` grows downward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Pos { x, y }
    }

    pub fn offset(self, o: Orientation) -> Pos {
        let (dx, dy) = o.delta();
        Pos::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameVariant {
    #[serde(rename = "dzelda")]
    DZeldaSingleDoor,
    #[serde(rename = "dzelda-multidoor")]
    DZeldaMultiDoor,
    #[serde(rename = "solarfox")]
    Solarfox,
}

const ZELDA_ACTIONS: [Action; 6] = [
    Action::Up,
    Action::Down,
    Action::Left,
    Action::Right,
    Action::Use,
    Action::Nil,
];
const SOLARFOX_ACTIONS: [Action; 5] =
    [Action::Up, Action::Down, Action::Left, Action::Right, Action::Nil];

impl GameVariant {
    pub const ALL: [GameVariant; 3] = [
        GameVariant::DZeldaSingleDoor,
        GameVariant::DZeldaMultiDoor,
        GameVariant::Solarfox,
    ];

    /// Legal actions, in the order the policy network's outputs map onto them.
    pub fn actions(self) -> &'static [Action] {
        match self {
            GameVariant::Solarfox => &SOLARFOX_ACTIONS,
            _ => &ZELDA_ACTIONS,
        }
    }

    pub fn action_count(self) -> usize {
        self.actions().len()
    }

    pub fn action_index(self, action: Action) -> Option<usize> {
        self.actions().iter().position(|&a| a == action)
    }

    pub fn is_zelda(self) -> bool {
        !matches!(self, GameVariant::Solarfox)
    }

    /// Default `(width, height)` in tiles.
    pub fn default_dims(self) -> (usize, usize) {
        match self {
            GameVariant::Solarfox => (11, 10),
            _ => (13, 9),
        }
    }

    pub fn default_game_len(self) -> u32 {
        match self {
            GameVariant::Solarfox => 1000,
            _ => 500,
        }
    }

    /// Sprites the level mutator may add. Never contains the avatar.
    pub fn addable_sprites(self) -> &'static [Tile] {
        match self {
            GameVariant::Solarfox => &[Tile::Wall, Tile::Coin, Tile::Enemy],
            _ => &[Tile::Wall, Tile::Key, Tile::Door, Tile::Monster],
        }
    }

    pub fn cli_name(self) -> &'static str {
        match self {
            GameVariant::DZeldaSingleDoor => "dzelda",
            GameVariant::DZeldaMultiDoor => "dzelda-multidoor",
            GameVariant::Solarfox => "solarfox",
        }
    }
}

impl fmt::Display for GameVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown game `{0}` (expected dzelda, dzelda-multidoor or solarfox)")]
pub struct UnknownGame(pub String);

impl FromStr for GameVariant {
    type Err = UnknownGame;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dzelda" | "dzelda-singledoor" => Ok(GameVariant::DZeldaSingleDoor),
            "dzelda-multidoor" => Ok(GameVariant::DZeldaMultiDoor),
            "solarfox" => Ok(GameVariant::Solarfox),
            other => Err(UnknownGame(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    Use,
    Nil,
}

impl Action {
    /// Heading requested by a directional action.
    pub fn direction(self) -> Option<Orientation> {
        match self {
            Action::Up => Some(Orientation::N),
            Action::Down => Some(Orientation::S),
            Action::Left => Some(Orientation::W),
            Action::Right => Some(Orientation::E),
            Action::Use | Action::Nil => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
            Action::Use => "use",
            Action::Nil => "nil",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown action token `{0}`")]
pub struct UnknownAction(pub String);

impl FromStr for Action {
    type Err = UnknownAction;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "up" => Ok(Action::Up),
            "down" => Ok(Action::Down),
            "left" => Ok(Action::Left),
            "right" => Ok(Action::Right),
            "use" => Ok(Action::Use),
            "nil" => Ok(Action::Nil),
            other => Err(UnknownAction(other.to_string())),
        }
    }
}

/// Avatar heading. The discriminant is the slot in the orientation vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    N = 0,
    S = 1,
    E = 2,
    W = 3,
}

impl Orientation {
    pub fn delta(self) -> (i32, i32) {
        match self {
            Orientation::N => (0, -1),
            Orientation::S => (0, 1),
            Orientation::E => (1, 0),
            Orientation::W => (-1, 0),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}
