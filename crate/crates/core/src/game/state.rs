use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::solarfox::SolarfoxWorld;
use super::zelda::ZeldaWorld;
use super::{Action, GameVariant, Level, Orientation, Tile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossCause {
    Monster,
    Wall,
    Boundary,
    Enemy,
    Projectile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    KeyPickup,
    DoorOpened,
    MonsterKilled,
    CoinCollected,
    Win,
    Loss(LossCause),
}

impl EventKind {
    /// Native points awarded for this event.
    pub fn points(self, variant: GameVariant) -> f64 {
        match self {
            EventKind::KeyPickup | EventKind::DoorOpened | EventKind::CoinCollected => 1.0,
            EventKind::MonsterKilled => 2.0,
            EventKind::Win if variant.is_zelda() => 1.0,
            EventKind::Win | EventKind::Loss(_) => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub tick: u32,
    pub kind: EventKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terminal {
    Running,
    Win,
    Loss,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StepError {
    #[error("cannot step a terminal state ({0:?})")]
    Terminal(Terminal),
    #[error("action {0} is not legal in {1}")]
    IllegalAction(Action, GameVariant),
}

/// Per-game dynamic contents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum World {
    Zelda(ZeldaWorld),
    Solarfox(SolarfoxWorld),
}

/// Mutable episode state advanced by [`GameState::step`].
///
/// Static walls are shared behind an `Arc`, so cloning a state (as the
/// planner does on every simulation) only copies the small dynamic parts.
#[derive(Clone, Debug)]
pub struct GameState {
    pub(crate) variant: GameVariant,
    pub(crate) width: usize,
    pub(crate) height: usize,
    pub(crate) walls: Arc<[bool]>,
    pub(crate) tick: u32,
    pub(crate) game_len: u32,
    pub(crate) score: f64,
    pub(crate) terminal: Terminal,
    pub(crate) world: World,
}

impl GameState {
    /// Initial state for `level`; the episode times out after `game_len` ticks.
    pub fn new(level: &Level, game_len: u32) -> GameState {
        assert!(game_len >= 1, "game_len must be at least 1");
        let walls: Arc<[bool]> = level.tiles().iter().map(|&t| t == Tile::Wall).collect();
        let world = if level.variant().is_zelda() {
            World::Zelda(ZeldaWorld::from_level(level))
        } else {
            World::Solarfox(SolarfoxWorld::from_level(level))
        };
        GameState {
            variant: level.variant(),
            width: level.width(),
            height: level.height(),
            walls,
            tick: 0,
            game_len,
            score: 0.0,
            terminal: Terminal::Running,
            world,
        }
    }

    pub fn variant(&self) -> GameVariant {
        self.variant
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn game_len(&self) -> u32 {
        self.game_len
    }

    /// Accumulated native points.
    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn terminal(&self) -> Terminal {
        self.terminal
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal != Terminal::Running
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn zelda(&self) -> Option<&ZeldaWorld> {
        match &self.world {
            World::Zelda(z) => Some(z),
            World::Solarfox(_) => None,
        }
    }

    pub fn solarfox(&self) -> Option<&SolarfoxWorld> {
        match &self.world {
            World::Solarfox(s) => Some(s),
            World::Zelda(_) => None,
        }
    }

    pub fn orientation(&self) -> Orientation {
        match &self.world {
            World::Zelda(z) => z.orientation,
            World::Solarfox(s) => s.heading,
        }
    }

    pub(crate) fn is_wall(&self, x: i32, y: i32) -> bool {
        self.walls[y as usize * self.width + x as usize]
    }

    pub(crate) fn in_bounds(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// Whether the future of this state depends only on the actions taken,
    /// i.e. stepping it never draws from the environment stream.
    pub fn is_deterministic(&self) -> bool {
        match &self.world {
            World::Zelda(z) => z.monsters.is_empty(),
            World::Solarfox(_) => true,
        }
    }

    /// Position within any periodic schedule that drives the dynamics.
    pub(crate) fn phase(&self) -> u32 {
        match &self.world {
            World::Zelda(_) => 0,
            World::Solarfox(_) => self.tick % super::solarfox::SCHEDULE_PERIOD,
        }
    }

    /// Advance one tick. Events are appended to `events`.
    pub fn step_into<R: Rng + ?Sized>(
        &mut self,
        action: Action,
        rng: &mut R,
        events: &mut Vec<Event>,
    ) -> Result<(), StepError> {
        if self.is_terminal() {
            return Err(StepError::Terminal(self.terminal));
        }
        if self.variant.action_index(action).is_none() {
            return Err(StepError::IllegalAction(action, self.variant));
        }
        self.tick += 1;
        let first = events.len();
        let outcome = match &mut self.world {
            World::Zelda(z) => z.step(
                action,
                rng,
                self.variant,
                &self.walls,
                self.width,
                self.height,
                self.tick,
                events,
            ),
            World::Solarfox(s) => s.step(action, &self.walls, self.width, self.height, self.tick, events),
        };
        for e in &events[first..] {
            self.score += e.kind.points(self.variant);
        }
        self.terminal = outcome;
        if self.terminal == Terminal::Running && self.tick >= self.game_len {
            self.terminal = Terminal::Timeout;
        }
        Ok(())
    }

    /// Advance one tick and return the events it produced.
    pub fn step<R: Rng + ?Sized>(&mut self, action: Action, rng: &mut R) -> Result<Vec<Event>, StepError> {
        let mut events = Vec::new();
        self.step_into(action, rng, &mut events)?;
        Ok(events)
    }
}
