#![allow(dead_code)]

use cogen::de::init_population;
use cogen::game::{GameVariant, Level};
use cogen::levelgen::{mutate, MutationConfig, Witness};
use cogen::poet::{Pair, Poet, PoetConfig};
use cogen::policy::{ParamVector, PolicySpec};
use cogen::rng::rng_from_seed;
use cogen::seeds::seed_level;

/// A structurally valid level reached by chaining mutations from the
/// variant's seed level.
pub fn random_level(variant: GameVariant, seed: u64) -> Level {
    let mut rng = rng_from_seed(seed);
    let config = MutationConfig {
        p_chain: 0.8,
        ..MutationConfig::default()
    };
    let mut level = seed_level(variant);
    for _ in 0..4 {
        level = mutate(&level, &config, &mut rng).level;
    }
    level
}

pub fn zelda(text: &str) -> Level {
    Level::parse(text, GameVariant::DZeldaSingleDoor).unwrap()
}

/// Open room, no monsters; the shortest win takes six moves.
pub const SIX_STEP: &str = "\
wwwwwwwwwwwww
w...........w
w...........w
w...+..g....w
w...........w
w...........w
w...A.......w
w...........w
wwwwwwwwwwwww
";

/// Key and door beside the avatar: Right, Right wins.
pub const TWO_STEP: &str = "\
wwwww
wA+gw
wwwww
";

/// The avatar is walled off from the key.
pub const SEALED: &str = "\
wwwwwwwwwwwww
w.A.w.......w
w...w.......w
wwwww.......w
w.......+...w
w...........w
w.........g.w
w...........w
wwwwwwwwwwwww
";

/// Cheap settings: four members, one generation per loop.
pub fn tiny_config(seed: u64) -> PoetConfig {
    let mut c = PoetConfig::new(GameVariant::DZeldaSingleDoor);
    c.pop_size = 4;
    c.n_games = 4;
    c.max_envs = 4;
    c.max_children = 2;
    c.seed = seed;
    c
}

/// A free-standing pair on `level` whose population is centred on `champion`.
pub fn pair(id: u64, level: Level, champion: ParamVector, created_loop: u64, config: &PoetConfig) -> Pair {
    let mut de = init_population(&champion, 0.0, config.pop_size, &mut rng_from_seed(id)).unwrap();
    de.params = config.de;
    Pair {
        id,
        level,
        de: Some(de),
        champion,
        champion_score: 0.0,
        created_loop,
        parent_id: None,
        solved: None,
        active: true,
        culled_loop: None,
        witness: Witness {
            seed: 0,
            actions: Vec::new(),
        },
        optimized_loops: 0,
    }
}

/// Parameters whose only nonzero entry is the output bias of `action`, so
/// the policy plays that action on every step.
pub fn constant_policy(level: &Level, action: cogen::game::Action) -> ParamVector {
    let spec = PolicySpec::for_variant(level.variant(), level.width(), level.height());
    let mut p = ParamVector::zeros(&spec);
    let k = level.variant().action_index(action).unwrap();
    p.as_mut_slice()[spec.output_bias_index(k)] = 1.0;
    p
}

/// Every structural property a finished archive must have.
pub fn check_archive(poet: &Poet) {
    let c = &poet.config;
    for p in &poet.pairs {
        let r = cogen::levelgen::replay_witness(&p.level, &p.witness, c.game_len)
            .unwrap_or_else(|e| panic!("pair {}: {e}", p.id));
        assert!(r.won());
        let chain = poet.ancestry(p.id);
        assert_eq!(*chain.last().unwrap(), 0, "pair {} is not rooted at the seed", p.id);
        if let Some(s) = &p.solved {
            let mut agent = cogen::policy::PolicyAgent::new(
                PolicySpec::for_variant(p.level.variant(), p.level.width(), p.level.height()),
                &s.params,
                p.level.variant(),
            )
            .unwrap();
            let r = cogen::game::rollout(&p.level, &mut agent, c.game_len, c.reward, s.trace.seed);
            assert!(r.won(), "pair {} solve record does not replay", p.id);
        }
        assert_eq!(p.active, p.de.is_some());
    }
    let s = &poet.stats;
    assert!(s.viable_levels <= s.total_levels);
    assert!(s.solved_levels <= s.viable_levels);
    assert!(s.transfers_accepted <= s.transfer_attempts);
    assert!(poet.active_count() <= c.max_envs);
}
