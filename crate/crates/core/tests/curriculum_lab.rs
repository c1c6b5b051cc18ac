mod common;

use cogen::curriculum::{
    extract_curriculum, run_curriculum, solved_along, Curriculum, CurriculumConfig, CurriculumError,
    CurriculumLevel, Stage,
};
use cogen::levelgen::Witness;
use cogen::poet::{Poet, SolveRecord};
use cogen::rng::rng_from_seed;
use proptest::prelude::*;
use std::sync::OnceLock;

use common::{pair, tiny_config, zelda};

/// Walking up collects the key and then opens the door, which is what the
/// zero network does.
const UPWARD: &str = "\
wwwww
w.g.w
w.+.w
w.A.w
wwwww
";

/// An archive holding one chain `0 -> 1 -> ... -> n-1` where the pairs
/// flagged in `solved` are marked solved.
fn chain_archive(solved: &[bool]) -> Poet {
    static BASE: OnceLock<Poet> = OnceLock::new();
    let mut poet = BASE.get_or_init(|| Poet::new(tiny_config(0)).unwrap().0).clone();
    let level = poet.pairs[0].level.clone();
    let champion = poet.pairs[0].champion.clone();
    poet.pairs.clear();
    for (i, &s) in solved.iter().enumerate() {
        let mut p = pair(i as u64, level.clone(), champion.clone(), i as u64, &poet.config);
        p.parent_id = i.checked_sub(1).map(|x| x as u64);
        p.optimized_loops = 3 + i as u64;
        if s {
            p.solved = Some(SolveRecord {
                solved_loop: i as u64,
                params: champion.clone(),
                trace: Witness {
                    seed: 0,
                    actions: Vec::new(),
                },
            });
        }
        poet.pairs.push(p);
    }
    poet.next_id = solved.len() as u64;
    poet
}

#[test]
fn short_lineages_cannot_fill_three_segments() {
    let archive = chain_archive(&[true, false, true, false]);
    assert_eq!(
        extract_curriculum(&archive, 3, &mut rng_from_seed(0)),
        Err(CurriculumError::CurriculumUnavailable {
            lineage_id: 3,
            solved: 2
        })
    );
    assert_eq!(
        extract_curriculum(&archive, 99, &mut rng_from_seed(0)),
        Err(CurriculumError::UnknownPair(99))
    );
}

#[test]
fn trivially_winnable_stages_are_all_solved() {
    let level = zelda(UPWARD);
    let stage = |position| CurriculumLevel {
        pair_id: position as u64,
        level: level.clone(),
        position,
        source_loops: 2,
    };
    let curriculum = Curriculum {
        lineage_id: 2,
        solved_count: 3,
        easy: stage(0),
        medium: stage(1),
        hard: stage(2),
    };
    let mut cfg = CurriculumConfig::from_run(&tiny_config(0));
    cfg.game_len = 30;
    cfg.max_stage_loops = 5;
    let report = run_curriculum(&curriculum, &cfg);
    let stages: Vec<Stage> = report.rows().map(|r| r.stage).collect();
    assert_eq!(stages, [Stage::Easy, Stage::Medium, Stage::Hard, Stage::Direct]);
    assert!(report.rows().all(|r| r.solved && r.lineage_id == 2));
    // Two loops per stage, one generation of four trials each, plus the
    // initial scoring after every level change.
    for r in &report.stages {
        assert_eq!(r.budget_used, 4 + 2 * 4);
    }
    assert_eq!(report.direct.budget_used, 4 + 6 * 4);
    assert_eq!(report.source_budget, 3 * 2 * 4);
    assert_eq!(run_curriculum(&curriculum, &cfg), report);

    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lineageId,stage,budgetUsed,solved");
    assert_eq!(lines[1], "2,easy,12,true");
    assert_eq!(lines[4], "2,direct,28,true");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn picks_respect_the_quantile_segments(flags in prop::collection::vec(any::<bool>(), 3..40), seed in any::<u64>()) {
        let archive = chain_archive(&flags);
        let leaf = flags.len() as u64 - 1;
        let solved = solved_along(&archive, leaf).unwrap();
        let k = solved.len();
        match extract_curriculum(&archive, leaf, &mut rng_from_seed(seed)) {
            Err(e) => prop_assert_eq!(e, CurriculumError::CurriculumUnavailable { lineage_id: leaf, solved: k }),
            Ok(c) => {
                prop_assert!(k >= 3);
                prop_assert_eq!(c.solved_count, k);
                for (stage, cl) in c.stages() {
                    prop_assert_eq!(solved[cl.position], cl.pair_id);
                    prop_assert!(archive.pair(cl.pair_id).unwrap().is_solved());
                    prop_assert_eq!(cl.source_loops, 3 + cl.pair_id);
                    let (a, b) = (cl.position as f64 / k as f64, (cl.position + 1) as f64 / k as f64);
                    let (s, e) = match stage {
                        Stage::Easy => (0.0, 0.1),
                        Stage::Medium => (0.45, 0.55),
                        _ => (0.9, 1.0),
                    };
                    prop_assert!(a.max(s) < b.min(e), "{stage} index {} of {k}", cl.position);
                }
            }
        }
    }
}
