//! Solarfox rules.
//!
//! The avatar lives on a half-tile lattice: `(hx, hy)` is the top-left corner
//! of its one-tile body in half-tile units, so it spans tiles
//! `hx/2 ..= (hx+1)/2` horizontally. It advances one half-tile per tick along
//! its heading and can only steer. Its *tile* (for coin pickup and the
//! observation) is `(hx/2, hy/2)`.
//!
//! Enemies walk the top and bottom rows one tile every [`ENEMY_MOVE_PERIOD`]
//! ticks, turning around at the row ends, and every [`ENEMY_FIRE_PERIOD`]
//! ticks each one fires a shot that travels one tile per tick toward the
//! opposite row.

use super::state::{Event, EventKind, LossCause, Terminal};
use super::{Action, Level, Orientation, Pos, Tile};

pub const ENEMY_MOVE_PERIOD: u32 = 2;
pub const ENEMY_FIRE_PERIOD: u32 = 8;
/// Least common multiple of the periodic schedules above.
pub(crate) const SCHEDULE_PERIOD: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Enemy {
    pub pos: Pos,
    /// +1 walking east, -1 walking west.
    pub dir: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Projectile {
    pub pos: Pos,
    pub vy: i32,
    /// Index of the enemy that fired it (0 or 1).
    pub owner: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SolarfoxWorld {
    /// Avatar corner in half-tile units.
    pub hx: i32,
    pub hy: i32,
    pub heading: Orientation,
    pub coins: Vec<Pos>,
    pub enemies: [Enemy; 2],
    pub projectiles: Vec<Projectile>,
}

impl SolarfoxWorld {
    pub(crate) fn from_level(level: &Level) -> SolarfoxWorld {
        let avatar = level.avatar();
        let enemies = level.positions(Tile::Enemy);
        assert_eq!(enemies.len(), 2, "Solarfox levels carry exactly two enemies");
        SolarfoxWorld {
            hx: avatar.x * 2,
            hy: avatar.y * 2,
            heading: Orientation::N,
            coins: level.positions(Tile::Coin),
            enemies: [
                Enemy { pos: enemies[0], dir: 1 },
                Enemy { pos: enemies[1], dir: 1 },
            ],
            projectiles: Vec::new(),
        }
    }

    /// Tile holding the avatar's top-left corner.
    pub fn avatar_tile(&self) -> Pos {
        Pos::new(self.hx.div_euclid(2), self.hy.div_euclid(2))
    }

    /// Every tile the avatar's body overlaps (one, two or four tiles).
    pub fn overlapped_tiles(&self) -> impl Iterator<Item = Pos> {
        let (x0, x1) = (self.hx.div_euclid(2), (self.hx + 1).div_euclid(2));
        let (y0, y1) = (self.hy.div_euclid(2), (self.hy + 1).div_euclid(2));
        let xs = if x0 == x1 { vec![x0] } else { vec![x0, x1] };
        let ys = if y0 == y1 { vec![y0] } else { vec![y0, y1] };
        ys.into_iter()
            .flat_map(move |y| xs.clone().into_iter().map(move |x| Pos::new(x, y)))
    }

    pub(crate) fn step(
        &mut self,
        action: Action,
        walls: &[bool],
        width: usize,
        height: usize,
        tick: u32,
        events: &mut Vec<Event>,
    ) -> Terminal {
        let (w, h) = (width as i32, height as i32);
        let wall = |p: Pos| walls[p.y as usize * width + p.x as usize];
        let mut emit = |kind| events.push(Event { tick, kind });

        if let Some(heading) = action.direction() {
            self.heading = heading;
        }
        let (dx, dy) = self.heading.delta();
        self.hx += dx;
        self.hy += dy;
        if self.hx < 0 || self.hy < 0 || self.hx + 2 > 2 * w || self.hy + 2 > 2 * h {
            emit(EventKind::Loss(LossCause::Boundary));
            return Terminal::Loss;
        }

        let tile = self.avatar_tile();
        if let Some(i) = self.coins.iter().position(|&c| c == tile) {
            self.coins.remove(i);
            emit(EventKind::CoinCollected);
            if self.coins.is_empty() {
                emit(EventKind::Win);
                return Terminal::Win;
            }
        }

        if tick % ENEMY_MOVE_PERIOD == 0 {
            for e in &mut self.enemies {
                if !(0..w).contains(&(e.pos.x + e.dir)) {
                    e.dir = -e.dir;
                }
                e.pos.x += e.dir;
            }
        }
        let interior = |p: Pos| p.y > 0 && p.y < h - 1;
        self.projectiles.retain_mut(|p| {
            p.pos.y += p.vy;
            interior(p.pos) && !wall(p.pos)
        });
        if tick % ENEMY_FIRE_PERIOD == 0 {
            for (owner, e) in self.enemies.iter().enumerate() {
                let vy = if e.pos.y == 0 { 1 } else { -1 };
                let pos = Pos::new(e.pos.x, e.pos.y + vy);
                if interior(pos) && !wall(pos) {
                    self.projectiles.push(Projectile {
                        pos,
                        vy,
                        owner: owner as u8,
                    });
                }
            }
        }

        for t in self.overlapped_tiles() {
            let cause = if wall(t) {
                Some(LossCause::Wall)
            } else if self.enemies.iter().any(|e| e.pos == t) {
                Some(LossCause::Enemy)
            } else if self.projectiles.iter().any(|p| p.pos == t) {
                Some(LossCause::Projectile)
            } else {
                None
            };
            if let Some(cause) = cause {
                emit(EventKind::Loss(cause));
                return Terminal::Loss;
            }
        }
        Terminal::Running
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameState, GameVariant, StepError};
    use crate::rng::rng_from_seed;

    const LEVEL: &str = "\
..e........
...........
..o........
...........
.....A.....
...........
.......o...
...........
...........
........e..
";

    fn state() -> GameState {
        GameState::new(&Level::parse(LEVEL, GameVariant::Solarfox).unwrap(), 1000)
    }

    fn set_avatar(s: &mut GameState, hx: i32, hy: i32, heading: Orientation) {
        if let crate::game::World::Solarfox(w) = &mut s.world {
            w.hx = hx;
            w.hy = hy;
            w.heading = heading;
        }
    }

    #[test]
    fn east_boundary_contact_loses() {
        let mut s = state();
        // Flush against the east edge of the 11-wide field, heading east.
        set_avatar(&mut s, 20, 8, Orientation::E);
        let ev = s.step(Action::Nil, &mut rng_from_seed(0)).unwrap();
        assert_eq!(ev, vec![Event { tick: 1, kind: EventKind::Loss(LossCause::Boundary) }]);
        assert_eq!(s.terminal(), Terminal::Loss);
    }

    #[test]
    fn avatar_advances_half_a_tile_and_steers() {
        let mut s = state();
        let mut rng = rng_from_seed(0);
        s.step(Action::Nil, &mut rng).unwrap();
        let w = s.solarfox().unwrap();
        assert_eq!((w.hx, w.hy), (10, 7));
        assert_eq!(w.avatar_tile(), Pos::new(5, 3));
        assert_eq!(w.overlapped_tiles().count(), 2);
        s.step(Action::Left, &mut rng).unwrap();
        let w = s.solarfox().unwrap();
        assert_eq!((w.hx, w.hy, w.heading), (9, 7, Orientation::W));
        assert_eq!(w.overlapped_tiles().count(), 4);
    }

    #[test]
    fn use_is_not_a_solarfox_action() {
        let mut s = state();
        assert_eq!(
            s.step(Action::Use, &mut rng_from_seed(0)),
            Err(StepError::IllegalAction(Action::Use, GameVariant::Solarfox))
        );
    }

    #[test]
    fn coins_then_win() {
        let text = "\
e....
.....
.o...
.A...
....e
";
        let level = Level::parse(text, GameVariant::Solarfox).unwrap();
        let mut s = GameState::new(&level, 100);
        let mut rng = rng_from_seed(0);
        let ev = s.step(Action::Up, &mut rng).unwrap();
        // Corner moved half a tile up: tile row 2 holds the coin.
        assert_eq!(ev[0].kind, EventKind::CoinCollected);
        assert_eq!(ev[1].kind, EventKind::Win);
        assert_eq!(s.terminal(), Terminal::Win);
        assert_eq!(s.score(), 1.0);
    }

    #[test]
    fn enemies_patrol_and_fire() {
        let mut s = state();
        let mut rng = rng_from_seed(0);
        // Steer left and right so the avatar stays in the middle.
        for t in 0..8 {
            let a = if t % 2 == 0 { Action::Left } else { Action::Right };
            s.step(a, &mut rng).unwrap();
        }
        let w = s.solarfox().unwrap();
        assert_eq!(w.enemies[0].pos, Pos::new(6, 0));
        // The bottom enemy bounced off the east end at tick 6.
        assert_eq!(w.enemies[1].pos, Pos::new(8, 9));
        assert_eq!(w.enemies[1].dir, -1);
        assert_eq!(w.projectiles.len(), 2);
        assert!(w.projectiles.iter().any(|p| p.pos == Pos::new(6, 1) && p.owner == 0));
        assert!(w.projectiles.iter().any(|p| p.pos == Pos::new(8, 8) && p.owner == 1));
    }

    #[test]
    fn projectile_hit_loses() {
        let mut s = state();
        if let crate::game::World::Solarfox(w) = &mut s.world {
            w.projectiles.push(Projectile { pos: Pos::new(5, 2), vy: 1, owner: 0 });
        }
        // Avatar corner (10, 8) moves to (10, 7): overlaps rows 3 and 4.
        let ev = s.step(Action::Nil, &mut rng_from_seed(0)).unwrap();
        assert_eq!(ev.last().unwrap().kind, EventKind::Loss(LossCause::Projectile));
    }
}
