use std::fmt;

use serde::{Deserialize, Serialize};

use super::{GameVariant, Pos};

/// Contents of one grid cell. Every cell holds floor plus at most one sprite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tile {
    Floor,
    Wall,
    Avatar,
    Key,
    Door,
    Monster,
    Coin,
    Enemy,
}

impl Tile {
    pub fn glyph(self) -> char {
        match self {
            Tile::Floor => '.',
            Tile::Wall => 'w',
            Tile::Avatar => 'A',
            Tile::Key => '+',
            Tile::Door => 'g',
            Tile::Monster => '3',
            Tile::Coin => 'o',
            Tile::Enemy => 'e',
        }
    }

    fn from_glyph(c: char, variant: GameVariant) -> Option<Tile> {
        let tile = match c {
            '.' => Tile::Floor,
            'w' => Tile::Wall,
            'A' => Tile::Avatar,
            '+' if variant.is_zelda() => Tile::Key,
            'g' if variant.is_zelda() => Tile::Door,
            '3' if variant.is_zelda() => Tile::Monster,
            'o' if !variant.is_zelda() => Tile::Coin,
            'e' if !variant.is_zelda() => Tile::Enemy,
            _ => return None,
        };
        Some(tile)
    }

    pub fn is_sprite(self) -> bool {
        !matches!(self, Tile::Floor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LevelError {
    #[error("level text is empty")]
    Empty,
    #[error("row {row} has width {found}, expected {expected}")]
    NotRectangular {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown character {ch:?} at row {row}, column {col}")]
    UnknownChar { ch: char, row: usize, col: usize },
    #[error("level is {width}x{height}, smaller than the 3x3 minimum")]
    TooSmall { width: usize, height: usize },
    #[error("level has no avatar")]
    MissingAvatar,
    #[error("level has {0} avatars, expected exactly one")]
    DuplicateAvatar(usize),
    #[error("level has no key")]
    MissingKey,
    #[error("level has no door")]
    MissingDoor,
    #[error("single-door level has {0} doors")]
    TooManyDoors(usize),
    #[error("border tile {0} is not a wall")]
    OpenBorder(Pos),
    #[error("level has no coin")]
    MissingCoin,
    #[error("level has {0} enemies, expected exactly two")]
    EnemyCount(usize),
    #[error("enemy at {0} is not on the top or bottom row")]
    EnemyOffPerimeter(Pos),
    #[error("{tile:?} at {pos} is on an enemy lane")]
    SpriteOnPerimeter { tile: Tile, pos: Pos },
}

/// An immutable grid of sprite placements: both the evolvable genome and the
/// playable map.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Level {
    variant: GameVariant,
    width: usize,
    height: usize,
    tiles: Vec<Tile>,
}

impl fmt::Debug for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Level({}, {}x{})\n{}", self.variant, self.width, self.height, self.render())
    }
}

impl Level {
    /// Parse and validate a level from its ASCII form.
    pub fn parse(text: &str, variant: GameVariant) -> Result<Level, LevelError> {
        let rows: Vec<&str> = text.lines().collect();
        if rows.is_empty() || rows[0].is_empty() {
            return Err(LevelError::Empty);
        }
        let width = rows[0].chars().count();
        let mut tiles = Vec::with_capacity(width * rows.len());
        for (row, line) in rows.iter().enumerate() {
            let found = line.chars().count();
            if found != width {
                return Err(LevelError::NotRectangular {
                    row,
                    expected: width,
                    found,
                });
            }
            for (col, ch) in line.chars().enumerate() {
                let tile =
                    Tile::from_glyph(ch, variant).ok_or(LevelError::UnknownChar { ch, row, col })?;
                tiles.push(tile);
            }
        }
        Level::from_tiles(variant, width, rows.len(), tiles)
    }

    /// Build a level from raw tiles, checking every structural invariant.
    pub fn from_tiles(
        variant: GameVariant,
        width: usize,
        height: usize,
        tiles: Vec<Tile>,
    ) -> Result<Level, LevelError> {
        let level = Level::from_tiles_unchecked(variant, width, height, tiles);
        level.validate()?;
        Ok(level)
    }

    /// Build a level without validation. Only for tests and scratch states
    /// that intentionally break the playable-level invariants.
    #[doc(hidden)]
    pub fn from_tiles_unchecked(
        variant: GameVariant,
        width: usize,
        height: usize,
        tiles: Vec<Tile>,
    ) -> Level {
        assert_eq!(tiles.len(), width * height, "tile count must match dimensions");
        Level {
            variant,
            width,
            height,
            tiles,
        }
    }

    pub fn validate(&self) -> Result<(), LevelError> {
        let (w, h) = (self.width, self.height);
        if w < 3 || h < 3 {
            return Err(LevelError::TooSmall {
                width: w,
                height: h,
            });
        }
        let avatars = self.count(Tile::Avatar);
        match avatars {
            0 => return Err(LevelError::MissingAvatar),
            1 => {}
            n => return Err(LevelError::DuplicateAvatar(n)),
        }
        if self.variant.is_zelda() {
            for (pos, tile) in self.iter() {
                if self.is_border(pos) && tile != Tile::Wall {
                    return Err(LevelError::OpenBorder(pos));
                }
            }
            if self.count(Tile::Key) == 0 {
                return Err(LevelError::MissingKey);
            }
            let doors = self.count(Tile::Door);
            if doors == 0 {
                return Err(LevelError::MissingDoor);
            }
            if self.variant == GameVariant::DZeldaSingleDoor && doors > 1 {
                return Err(LevelError::TooManyDoors(doors));
            }
        } else {
            if self.count(Tile::Coin) == 0 {
                return Err(LevelError::MissingCoin);
            }
            let enemies = self.count(Tile::Enemy);
            if enemies != 2 {
                return Err(LevelError::EnemyCount(enemies));
            }
            for (pos, tile) in self.iter() {
                let lane = self.is_enemy_lane(pos.y);
                match tile {
                    Tile::Enemy if !lane => return Err(LevelError::EnemyOffPerimeter(pos)),
                    Tile::Floor | Tile::Enemy => {}
                    other if lane => return Err(LevelError::SpriteOnPerimeter { tile: other, pos }),
                    _ => {}
                }
            }
        }
        Ok(())
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

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.width && (p.y as usize) < self.height
    }

    pub fn index(&self, p: Pos) -> usize {
        debug_assert!(self.in_bounds(p));
        p.y as usize * self.width + p.x as usize
    }

    pub fn pos_of(&self, index: usize) -> Pos {
        Pos::new((index % self.width) as i32, (index / self.width) as i32)
    }

    pub fn get(&self, p: Pos) -> Tile {
        self.tiles[self.index(p)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pos, Tile)> + '_ {
        self.tiles.iter().enumerate().map(|(i, &t)| (self.pos_of(i), t))
    }

    pub fn count(&self, tile: Tile) -> usize {
        self.tiles.iter().filter(|&&t| t == tile).count()
    }

    pub fn positions(&self, tile: Tile) -> Vec<Pos> {
        self.iter().filter(|&(_, t)| t == tile).map(|(p, _)| p).collect()
    }

    pub fn avatar(&self) -> Pos {
        self.positions(Tile::Avatar)[0]
    }

    pub fn is_border(&self, p: Pos) -> bool {
        p.x == 0 || p.y == 0 || p.x as usize == self.width - 1 || p.y as usize == self.height - 1
    }

    /// Top and bottom rows of a Solarfox level, where the enemies patrol.
    pub fn is_enemy_lane(&self, y: i32) -> bool {
        y == 0 || y as usize == self.height - 1
    }

    /// Whether the mutator may touch this cell. dZelda borders are fixed walls.
    pub fn is_mutable_cell(&self, p: Pos) -> bool {
        !(self.variant.is_zelda() && self.is_border(p))
    }

    /// Number of sprites the mutator can see (everything but floor and fixed
    /// border walls).
    pub fn sprite_count(&self) -> usize {
        self.iter()
            .filter(|&(p, t)| t.is_sprite() && self.is_mutable_cell(p))
            .count()
    }

    /// Copy with one cell replaced. The result is not validated.
    pub fn with_tile(&self, p: Pos, tile: Tile) -> Level {
        let mut next = self.clone();
        let i = next.index(p);
        next.tiles[i] = tile;
        next
    }

    /// ASCII form: one newline-terminated row per grid row.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in self.tiles.chunks(self.width) {
            out.extend(row.iter().map(|t| t.glyph()));
            out.push('\n');
        }
        out
    }
}
