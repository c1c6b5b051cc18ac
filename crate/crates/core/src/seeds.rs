//! Built-in starting levels, one per variant.

use crate::game::{GameVariant, Level};

pub const DZELDA_SEED: &str = "\
wwwwwwwwwwwww
w......3w...w
w.A.+...w.g.w
w.......w...w
w.......3...w
w.......w...w
w.......w...w
w...3...w...w
wwwwwwwwwwwww
";

pub const DZELDA_MULTIDOOR_SEED: &str = "\
wwwwwwwwwwwww
w......3w...w
w.A.+...w.g.w
w.......w...w
w.......3...w
w.......w...w
w.......w.g.w
w...3...w...w
wwwwwwwwwwwww
";

pub const SOLARFOX_SEED: &str = "\
..e........
...........
..o.....o..
...........
.....A.....
...........
..o.....o..
...........
...........
........e..
";

pub fn seed_text(variant: GameVariant) -> &'static str {
    match variant {
        GameVariant::DZeldaSingleDoor => DZELDA_SEED,
        GameVariant::DZeldaMultiDoor => DZELDA_MULTIDOOR_SEED,
        GameVariant::Solarfox => SOLARFOX_SEED,
    }
}

pub fn seed_level(variant: GameVariant) -> Level {
    Level::parse(seed_text(variant), variant).expect("built-in seed levels parse")
}
