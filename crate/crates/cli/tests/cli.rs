use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cogen::game::GameVariant;
use cogen::policy::{ParamVector, PolicySpec};
use cogen::seeds::seed_level;

const TWO_STEP: &str = "wwwww\nwA+gw\nwwwww\n";

fn cogen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cogen")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn tiny_run(out: &Path, loops: &str) -> Output {
    cogen(&[
        "run", "--out", p(out), "--pop-size", "4", "--n-games", "4", "--max-envs", "4", "--max-children", "2",
        "--mutation-timer", "2", "--transfer-timer", "2", "--num-poet-loops", loops,
        "--checkpoint-every", "2", "--keep-checkpoints", "0", "--workers", "1", "-q",
    ])
}

#[test]
fn dry_run_writes_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = cogen(&["run", "--out", p(&out), "--dry-run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let config: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(config["gameLen"], 500);
    assert_eq!(config["popSize"], 50);
    assert_eq!(config["maxEnvs"], 30);
    assert_eq!(config["mutationRate"], 0.8);
}

#[test]
fn bad_config_and_occupied_out_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = cogen(&["run", "--out", p(&out), "--dry-run", "--mutation-rate", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mutationRate"), "{}", stderr(&o));

    fs::create_dir_all(&out).unwrap();
    fs::write(out.join("junk"), "x").unwrap();
    let o = cogen(&["run", "--out", p(&out), "--dry-run"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: "));
}

#[test]
fn render_round_trips_ascii_and_writes_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let text = seed_level(GameVariant::DZeldaSingleDoor).render();
    let file = dir.path().join("seed.txt");
    fs::write(&file, &text).unwrap();
    let o = cogen(&["render", p(&file)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), text);

    let ppm = dir.path().join("seed.ppm");
    let o = cogen(&["render", p(&file), "--out", p(&ppm), "--scale", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = fs::read(&ppm).unwrap();
    let level = seed_level(GameVariant::DZeldaSingleDoor);
    let header = format!("P6\n{} {}\n255\n", level.width() * 2, level.height() * 2);
    assert!(bytes.starts_with(header.as_bytes()));
    assert_eq!(bytes.len(), header.len() + level.width() * level.height() * 4 * 3);

    fs::write(&file, "wwwww\nwA+gw\nwww?w\n").unwrap();
    let o = cogen(&["render", p(&file)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn replay_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let level_file = dir.path().join("level.txt");
    fs::write(&level_file, TWO_STEP).unwrap();
    let level = cogen::game::Level::parse(TWO_STEP, GameVariant::DZeldaSingleDoor).unwrap();
    let spec = PolicySpec::for_variant(GameVariant::DZeldaSingleDoor, level.width(), level.height());

    // A zero network always takes the first action, which is a no-op here.
    let zeros = ParamVector::zeros(&spec).to_bytes();
    let params = dir.path().join("zero.pvec");
    fs::write(&params, &zeros).unwrap();
    let o = cogen(&["replay", p(&level_file), p(&params), "--game-len", "20"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("step\taction\tposition\tevents\n"));
    assert!(out.lines().last().unwrap().starts_with("outcome Timeout steps 20"));

    fs::write(&params, &zeros[..zeros.len() / 2]).unwrap();
    let o = cogen(&["replay", p(&level_file), p(&params)]);
    assert_eq!(o.status.code(), Some(1));
}

fn stats_json(run: &Path) -> serde_json::Value {
    let o = cogen(&["stats", p(run), "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn stats_of_empty_and_tiny_runs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    let o = tiny_run(&empty, "0");
    assert!(o.status.success(), "{}", stderr(&o));
    let v = stats_json(&empty);
    assert_eq!(v["loops"], 0);
    assert_eq!(v["solveRate"], 0.0);

    let run = dir.path().join("tiny");
    let o = tiny_run(&run, "4");
    assert!(o.status.success(), "{}", stderr(&o));
    let v = stats_json(&run);
    assert_eq!(v["loops"], 4);
    let viable = v["viableLevels"].as_u64().unwrap();
    let solved = v["solvedLevels"].as_u64().unwrap();
    assert!(solved <= viable && viable <= v["totalLevels"].as_u64().unwrap());
    let table = stdout(&cogen(&["stats", p(&run)]));
    assert!(table.contains(&format!("solved levels       {solved}")));

    let o = cogen(&["render", "--run", p(&run), "--lineage", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("#0 @0") || stdout(&o) == seed_level(GameVariant::DZeldaSingleDoor).render());
}

#[test]
fn resumed_run_matches_straight_run() {
    let dir = tempfile::tempdir().unwrap();
    let straight = dir.path().join("straight");
    assert!(tiny_run(&straight, "6").status.success());

    let split = dir.path().join("split");
    assert!(tiny_run(&split, "2").status.success());
    let o = cogen(&["run", "--resume", p(&split), "--num-poet-loops", "6", "--workers", "1", "-q"]);
    assert!(o.status.success(), "{}", stderr(&o));

    for file in ["lineage.jsonl", "stats.csv"] {
        assert_eq!(
            fs::read(straight.join(file)).unwrap(),
            fs::read(split.join(file)).unwrap(),
            "{file} differs"
        );
    }
}
