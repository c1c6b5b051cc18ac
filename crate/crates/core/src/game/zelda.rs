use rand::Rng;

use super::state::{Event, EventKind, LossCause, Terminal};
use super::{Action, GameVariant, Level, Orientation, Pos, Tile};

/// Monster moves: stay, or one of the four headings.
const MONSTER_MOVES: [Option<Orientation>; 5] = [
    None,
    Some(Orientation::N),
    Some(Orientation::S),
    Some(Orientation::E),
    Some(Orientation::W),
];

/// Dynamic dZelda contents. Walls live in the shared static grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZeldaWorld {
    pub avatar: Pos,
    pub orientation: Orientation,
    pub has_key: bool,
    pub keys: Vec<Pos>,
    pub doors: Vec<Pos>,
    pub monsters: Vec<Pos>,
}

impl ZeldaWorld {
    pub(crate) fn from_level(level: &Level) -> ZeldaWorld {
        ZeldaWorld {
            avatar: level.avatar(),
            orientation: Orientation::N,
            has_key: false,
            keys: level.positions(Tile::Key),
            doors: level.positions(Tile::Door),
            monsters: level.positions(Tile::Monster),
        }
    }

    pub fn doors_remaining(&self) -> usize {
        self.doors.len()
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn step<R: Rng + ?Sized>(
        &mut self,
        action: Action,
        rng: &mut R,
        variant: GameVariant,
        walls: &[bool],
        width: usize,
        height: usize,
        tick: u32,
        events: &mut Vec<Event>,
    ) -> Terminal {
        let inside =
            |p: Pos| p.x >= 0 && p.y >= 0 && (p.x as usize) < width && (p.y as usize) < height;
        let wall = |p: Pos| walls[p.y as usize * width + p.x as usize];
        let mut emit = |kind| events.push(Event { tick, kind });

        match action {
            Action::Use => {
                let target = self.avatar.offset(self.orientation);
                if let Some(i) = self.monsters.iter().position(|&m| m == target) {
                    self.monsters.remove(i);
                    emit(EventKind::MonsterKilled);
                }
            }
            Action::Nil => {}
            dir => {
                let heading = dir.direction().expect("directional action");
                self.orientation = heading;
                let target = self.avatar.offset(heading);
                if inside(target) && !wall(target) {
                    if let Some(d) = self.doors.iter().position(|&p| p == target) {
                        if self.has_key {
                            self.doors.remove(d);
                            self.avatar = target;
                            let won = variant == GameVariant::DZeldaSingleDoor || self.doors.is_empty();
                            if won {
                                emit(EventKind::Win);
                                return Terminal::Win;
                            }
                            emit(EventKind::DoorOpened);
                        }
                    } else {
                        self.avatar = target;
                        if let Some(k) = self.keys.iter().position(|&p| p == target) {
                            self.keys.remove(k);
                            self.has_key = true;
                            emit(EventKind::KeyPickup);
                        }
                    }
                }
            }
        }

        if self.monsters.contains(&self.avatar) {
            emit(EventKind::Loss(LossCause::Monster));
            return Terminal::Loss;
        }

        for i in 0..self.monsters.len() {
            let choice = MONSTER_MOVES[rng.random_range(0..MONSTER_MOVES.len())];
            let Some(heading) = choice else { continue };
            let target = self.monsters[i].offset(heading);
            let blocked = !inside(target)
                || wall(target)
                || self.doors.contains(&target)
                || self.monsters.contains(&target);
            if !blocked {
                self.monsters[i] = target;
            }
        }
        if self.monsters.contains(&self.avatar) {
            emit(EventKind::Loss(LossCause::Monster));
            return Terminal::Loss;
        }
        Terminal::Running
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameState, Level};
    use crate::rng::rng_from_seed;

    fn state(text: &str, variant: GameVariant) -> GameState {
        GameState::new(&Level::parse(text, variant).unwrap(), 500)
    }

    const OPEN: &str = "\
wwwwww
w....w
w.A+.w
w...gw
wwwwww
";

    #[test]
    fn unobstructed_move_sets_orientation() {
        let text = "\
wwwwww
wA...w
w..+.w
w...gw
wwwwww
";
        let mut s = state(text, GameVariant::DZeldaSingleDoor);
        let mut rng = rng_from_seed(0);
        s.step(Action::Right, &mut rng).unwrap();
        let z = s.zelda().unwrap();
        assert_eq!(z.avatar, Pos::new(2, 1));
        assert_eq!(z.orientation, Orientation::E);
        assert_eq!(s.tick(), 1);
    }

    #[test]
    fn blocked_move_only_turns() {
        let mut s = state(OPEN, GameVariant::DZeldaSingleDoor);
        let mut rng = rng_from_seed(0);
        s.step(Action::Left, &mut rng).unwrap();
        s.step(Action::Left, &mut rng).unwrap();
        let z = s.zelda().unwrap();
        assert_eq!(z.avatar, Pos::new(1, 2));
        assert_eq!(z.orientation, Orientation::W);
    }

    #[test]
    fn door_without_key_is_a_wall_and_with_key_wins() {
        let mut s = state(OPEN, GameVariant::DZeldaSingleDoor);
        let mut rng = rng_from_seed(0);
        // Down then right: the door at (4,3) blocks without the key.
        s.step(Action::Down, &mut rng).unwrap();
        s.step(Action::Right, &mut rng).unwrap();
        let ev = s.step(Action::Right, &mut rng).unwrap();
        assert!(ev.is_empty());
        assert_eq!(s.zelda().unwrap().avatar, Pos::new(3, 3));
        let ev = s.step(Action::Up, &mut rng).unwrap();
        assert_eq!(ev[0].kind, EventKind::KeyPickup);
        s.step(Action::Right, &mut rng).unwrap();
        let ev = s.step(Action::Down, &mut rng).unwrap();
        assert_eq!(ev.last().unwrap().kind, EventKind::Win);
        assert_eq!(s.terminal(), Terminal::Win);
        assert_eq!(s.score(), 2.0);
    }

    #[test]
    fn multidoor_keeps_key_and_wins_on_last_door() {
        let text = "\
wwwwwww
wA+g.gw
wwwwwww
";
        let mut s = state(text, GameVariant::DZeldaMultiDoor);
        let mut rng = rng_from_seed(0);
        let kinds: Vec<_> = (0..4)
            .flat_map(|_| s.step(Action::Right, &mut rng).unwrap())
            .map(|e| e.kind)
            .collect();
        assert_eq!(
            kinds,
            vec![EventKind::KeyPickup, EventKind::DoorOpened, EventKind::Win]
        );
        assert!(s.zelda().unwrap().has_key);
        assert_eq!(s.zelda().unwrap().doors_remaining(), 0);
        assert_eq!(s.terminal(), Terminal::Win);
        assert_eq!(s.tick(), 4);
    }

    #[test]
    fn use_kills_faced_monster() {
        // Monster boxed in so it cannot wander off before the swing.
        let text = "\
wwwww
wA3ww
w+wgw
wwwww
";
        let mut s = state(text, GameVariant::DZeldaSingleDoor);
        s.world = crate::game::World::Zelda(ZeldaWorld {
            orientation: Orientation::E,
            ..s.zelda().unwrap().clone()
        });
        let mut rng = rng_from_seed(3);
        let ev = s.step(Action::Use, &mut rng).unwrap();
        assert_eq!(ev, vec![Event { tick: 1, kind: EventKind::MonsterKilled }]);
        assert!(s.zelda().unwrap().monsters.is_empty());
        assert_eq!(s.score(), 2.0);
        assert_eq!(s.terminal(), Terminal::Running);
    }

    #[test]
    fn walking_into_monster_loses() {
        let text = "\
wwwww
wA3ww
w+wgw
wwwww
";
        let mut s = state(text, GameVariant::DZeldaSingleDoor);
        let mut rng = rng_from_seed(0);
        let ev = s.step(Action::Right, &mut rng).unwrap();
        assert_eq!(ev.last().unwrap().kind, EventKind::Loss(LossCause::Monster));
        assert_eq!(s.terminal(), Terminal::Loss);
        assert_eq!(
            s.step(Action::Nil, &mut rng),
            Err(crate::game::StepError::Terminal(Terminal::Loss))
        );
    }
}
