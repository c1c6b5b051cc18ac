mod common;

use cogen::game::{GameState, GameVariant, Tile};
use cogen::observation::{channel_count, encode, zelda_channel, ObsTensor, OrientVec};
use cogen::policy::{select_action, ParamVector, PolicyError, PolicySpec};
use cogen::rng::rng_from_seed;
use proptest::prelude::*;
use rand_distr::{Distribution, Normal};

use common::random_level;

fn random_params(spec: &PolicySpec, seed: u64) -> ParamVector {
    let mut rng = rng_from_seed(seed);
    let n = Normal::new(0.0f32, 0.3).unwrap();
    ParamVector::from_vec((0..spec.parameter_count()).map(|_| n.sample(&mut rng)).collect())
}

#[test]
fn parameter_counts_follow_the_layer_formula() {
    let count = |c: usize, w: usize, h: usize, a: usize| 8 * (9 * c + 1) + 64 * (8 * w * h + 4 + 1) + a * (64 + 1);
    let z = PolicySpec::for_variant(GameVariant::DZeldaSingleDoor, 13, 9);
    let s = PolicySpec::for_variant(GameVariant::Solarfox, 11, 10);
    assert_eq!(z.parameter_count(), count(6, 13, 9, 6));
    assert_eq!(z.parameter_count(), 61054);
    assert_eq!(s.parameter_count(), count(14, 11, 10, 5));
    assert_eq!(s.parameter_count(), 57981);
    assert!(matches!(PolicySpec::new(0, 13, 9, 6), Err(PolicyError::InvalidSpec(_))));
}

#[test]
fn zero_network_scores_zero_and_picks_first_action() {
    let level = random_level(GameVariant::DZeldaSingleDoor, 3);
    let spec = PolicySpec::for_variant(level.variant(), level.width(), level.height());
    let (obs, orient) = encode(&GameState::new(&level, 10));
    let scores = spec.forward(&ParamVector::zeros(&spec), &obs, &orient).unwrap();
    assert!(scores.iter().all(|&s| s == 0.0));
    assert_eq!(select_action(&scores), 0);
    assert_eq!(select_action(&[0.1, 0.9, 0.2]), 1);
}

#[test]
fn output_bias_alone_fixes_the_argmax() {
    let spec = PolicySpec::for_variant(GameVariant::Solarfox, 11, 10);
    for k in 0..spec.action_count {
        let mut p = ParamVector::zeros(&spec);
        p.as_mut_slice()[spec.output_bias_index(k)] = 1.0;
        for seed in 0..5 {
            let level = random_level(GameVariant::Solarfox, seed);
            let (obs, orient) = encode(&GameState::new(&level, 10));
            assert_eq!(select_action(&spec.forward(&p, &obs, &orient).unwrap()), k);
        }
    }
}

#[test]
fn forward_rejects_mismatched_shapes() {
    let spec = PolicySpec::for_variant(GameVariant::DZeldaSingleDoor, 13, 9);
    let obs = ObsTensor::zeros(6, 13, 9);
    let orient = OrientVec([1, 0, 0, 0]);
    let short = ParamVector::from_vec(vec![0.0; 10]);
    assert!(matches!(spec.forward(&short, &obs, &orient), Err(PolicyError::ParamSpecMismatch { .. })));
    let wrong = ObsTensor::zeros(6, 11, 9);
    assert!(matches!(
        spec.forward(&ParamVector::zeros(&spec), &wrong, &orient),
        Err(PolicyError::ShapeMismatch { .. })
    ));
}

#[test]
fn param_vector_file_round_trip() {
    let spec = PolicySpec::for_variant(GameVariant::DZeldaSingleDoor, 13, 9);
    let p = random_params(&spec, 9);
    let bytes = p.to_bytes();
    assert_eq!(bytes.len(), 8 + 4 * p.len());
    let back = ParamVector::read_from(bytes.as_slice()).unwrap();
    assert_eq!(back.as_slice(), p.as_slice());
    assert!(matches!(ParamVector::read_from(&b"nope0000"[..]), Err(PolicyError::BadMagic)));
}

#[test]
fn conv_filter_sees_only_its_receptive_field() {
    // Only filter 0's weights and the dense path from output (0, 0) are set,
    // so the scores depend on tiles within one step of the corner.
    let level = random_level(GameVariant::DZeldaSingleDoor, 11);
    let spec = PolicySpec::for_variant(level.variant(), level.width(), level.height());
    let mut p = ParamVector::zeros(&spec);
    let v = p.as_mut_slice();
    for c in 0..spec.in_channels {
        for ky in 0..3 {
            for kx in 0..3 {
                v[spec.conv_weight_index(0, c, ky, kx)] = 0.5 + 0.1 * c as f32;
            }
        }
    }
    v[spec.dense1_weight_index(0, 0, 0, 0)] = 1.0;
    v[spec.dense2_weight_index(0, 2)] = 1.0;
    let state = GameState::new(&level, 10);
    let (obs, orient) = encode(&state);
    let base = spec.forward(&p, &obs, &orient).unwrap();
    let mut far = obs.clone();
    let i = far.offset(zelda_channel::MONSTER, 10, 6);
    far.data[i] ^= 1;
    assert_eq!(spec.forward(&p, &far, &orient).unwrap(), base);
    let mut near = obs.clone();
    let i = near.offset(zelda_channel::MONSTER, 1, 1);
    near.data[i] ^= 1;
    assert_ne!(spec.forward(&p, &near, &orient).unwrap(), base);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn channel_sums_match_sprite_counts(seed in any::<u64>(), v in 0usize..2) {
        let level = random_level(GameVariant::ALL[v], seed);
        let (obs, orient) = encode(&GameState::new(&level, 10));
        prop_assert_eq!(obs.channels, channel_count(level.variant()));
        prop_assert_eq!(obs.channel_sum(zelda_channel::KEY), level.count(Tile::Key));
        prop_assert_eq!(obs.channel_sum(zelda_channel::DOOR), level.count(Tile::Door));
        prop_assert_eq!(obs.channel_sum(zelda_channel::MONSTER), level.count(Tile::Monster));
        prop_assert_eq!(obs.channel_sum(zelda_channel::AVATAR), 1);
        prop_assert_eq!(obs.channel_sum(zelda_channel::WALL), level.count(Tile::Wall));
        prop_assert_eq!(orient.0.iter().map(|&b| b as usize).sum::<usize>(), 1);
        prop_assert!(obs.data.iter().all(|&b| b <= 1));
        for x in 0..level.width() {
            for y in 0..level.height() {
                prop_assert!(obs.get(zelda_channel::FLOOR, x, y) + obs.get(zelda_channel::WALL, x, y) <= 1);
            }
        }
    }

    #[test]
    fn encoding_separates_distinct_levels(a in any::<u64>(), b in any::<u64>()) {
        let la = random_level(GameVariant::DZeldaSingleDoor, a);
        let lb = random_level(GameVariant::DZeldaSingleDoor, b);
        let ea = encode(&GameState::new(&la, 10)).0;
        let eb = encode(&GameState::new(&lb, 10)).0;
        prop_assert_eq!(la == lb, ea == eb);
    }

    #[test]
    fn shifting_output_biases_keeps_the_argmax(seed in any::<u64>(), shift in -5.0f32..5.0) {
        let level = random_level(GameVariant::DZeldaSingleDoor, seed);
        let spec = PolicySpec::for_variant(level.variant(), level.width(), level.height());
        let p = random_params(&spec, seed);
        let mut q = p.clone();
        for k in 0..spec.action_count {
            q.as_mut_slice()[spec.output_bias_index(k)] += shift;
        }
        let (obs, orient) = encode(&GameState::new(&level, 10));
        let sp = spec.forward(&p, &obs, &orient).unwrap();
        let sq = spec.forward(&q, &obs, &orient).unwrap();
        prop_assert_eq!(sp.clone(), spec.forward(&p, &obs, &orient).unwrap());
        // Rounding can merge near ties; require a clear margin before comparing.
        let mut sorted = sp.clone();
        sorted.sort_by(|x, y| y.total_cmp(x));
        prop_assume!(sorted[0] - sorted[1] > 1e-3);
        prop_assert_eq!(select_action(&sp), select_action(&sq));
    }
}
