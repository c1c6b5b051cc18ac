//! One-hot tile tensor and orientation vector fed to the policy network.
//!
//! dZelda uses six channels (floor, wall, key, door, avatar, monster).
//! Solarfox uses fourteen: floor, wall, avatar, coin, one sheet per enemy,
//! one sheet per enemy's shots, and six reserved sheets that stay zero.
//! The floor sheet is the complement of the wall sheet, so every tile has
//! exactly one of the two hot.

use crate::game::{GameState, GameVariant, World};

pub mod zelda_channel {
    pub const FLOOR: usize = 0;
    pub const WALL: usize = 1;
    pub const KEY: usize = 2;
    pub const DOOR: usize = 3;
    pub const AVATAR: usize = 4;
    pub const MONSTER: usize = 5;
    pub const COUNT: usize = 6;
}

pub mod solarfox_channel {
    pub const FLOOR: usize = 0;
    pub const WALL: usize = 1;
    pub const AVATAR: usize = 2;
    pub const COIN: usize = 3;
    pub const ENEMY1: usize = 4;
    pub const ENEMY2: usize = 5;
    pub const SHOT1: usize = 6;
    pub const SHOT2: usize = 7;
    pub const COUNT: usize = 14;
}

pub fn channel_count(variant: GameVariant) -> usize {
    if variant.is_zelda() {
        zelda_channel::COUNT
    } else {
        solarfox_channel::COUNT
    }
}

/// Channels that change from tick to tick (avatar, NPCs, shots) for a
/// tensor with `channels` channels. The rest only change when a pickup or
/// door disappears. Unknown layouts are treated as entirely static.
pub fn moving_channels(channels: usize) -> &'static [usize] {
    match channels {
        zelda_channel::COUNT => &[zelda_channel::AVATAR, zelda_channel::MONSTER],
        solarfox_channel::COUNT => &[
            solarfox_channel::AVATAR,
            solarfox_channel::ENEMY1,
            solarfox_channel::ENEMY2,
            solarfox_channel::SHOT1,
            solarfox_channel::SHOT2,
        ],
        _ => &[],
    }
}

/// Binary tensor in channel-major order: `data[c][y][x]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ObsTensor {
    pub channels: usize,
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl ObsTensor {
    pub fn zeros(channels: usize, width: usize, height: usize) -> Self {
        ObsTensor {
            channels,
            width,
            height,
            data: vec![0; channels * width * height],
        }
    }

    #[inline]
    pub fn offset(&self, c: usize, x: usize, y: usize) -> usize {
        (c * self.height + y) * self.width + x
    }

    pub fn get(&self, c: usize, x: usize, y: usize) -> u8 {
        self.data[self.offset(c, x, y)]
    }

    #[inline]
    fn set(&mut self, c: usize, x: i32, y: i32) {
        let i = self.offset(c, x as usize, y as usize);
        self.data[i] = 1;
    }

    pub fn channel(&self, c: usize) -> &[u8] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_sum(&self, c: usize) -> usize {
        self.channel(c).iter().map(|&v| v as usize).sum()
    }
}

/// One-hot heading in `[N, S, E, W]` order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OrientVec(pub [u8; 4]);

/// Encode a state into a fresh tensor.
pub fn encode(state: &GameState) -> (ObsTensor, OrientVec) {
    let mut obs = ObsTensor::zeros(channel_count(state.variant()), state.width(), state.height());
    let orient = encode_into(state, &mut obs);
    (obs, orient)
}

/// Encode into an existing tensor of the right shape, overwriting it.
pub fn encode_into(state: &GameState, obs: &mut ObsTensor) -> OrientVec {
    let (w, h) = (state.width(), state.height());
    assert_eq!(
        (obs.channels, obs.width, obs.height),
        (channel_count(state.variant()), w, h),
        "observation buffer shape"
    );
    obs.data.fill(0);
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let c = if state.is_wall(x, y) { 1 } else { 0 };
            obs.set(c, x, y);
        }
    }
    match state.world() {
        World::Zelda(z) => {
            use zelda_channel as ch;
            for k in &z.keys {
                obs.set(ch::KEY, k.x, k.y);
            }
            for d in &z.doors {
                obs.set(ch::DOOR, d.x, d.y);
            }
            for m in &z.monsters {
                obs.set(ch::MONSTER, m.x, m.y);
            }
            obs.set(ch::AVATAR, z.avatar.x, z.avatar.y);
        }
        World::Solarfox(s) => {
            use solarfox_channel as ch;
            for c in &s.coins {
                obs.set(ch::COIN, c.x, c.y);
            }
            for (i, e) in s.enemies.iter().enumerate() {
                obs.set(ch::ENEMY1 + i, e.pos.x, e.pos.y);
            }
            for p in &s.projectiles {
                obs.set(ch::SHOT1 + p.owner as usize, p.pos.x, p.pos.y);
            }
            let t = s.avatar_tile();
            if state.in_bounds(t.x, t.y) {
                obs.set(ch::AVATAR, t.x, t.y);
            }
        }
    }
    let mut orient = [0u8; 4];
    orient[state.orientation().index()] = 1;
    OrientVec(orient)
}
