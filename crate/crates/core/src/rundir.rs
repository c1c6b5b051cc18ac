//! On-disk layout of a run and checkpoint/resume.
//!
//! ```text
//! <out>/config.json
//! <out>/manifest.json          config, version, start time
//! <out>/lineage.jsonl          one LineageEvent per line
//! <out>/stats.csv              one StatsRow per loop
//! <out>/levels/<id>.txt        level text
//! <out>/levels/<id>.witness    gate witness
//! <out>/checkpoints/<loop>/    state.json plus binary champions and populations
//! ```

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::de::{DeError, DePopulation};
use crate::game::{Level, LevelError};
use crate::levelgen::WitnessParseError;
use crate::poet::{LineageEvent, Pair, Poet, PoetConfig, PoetError, RunStats, SolveRecord, StatsRow};
use crate::policy::{ParamVector, PolicyError};

#[derive(Debug, thiserror::Error)]
pub enum RunDirError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}: no checkpoint to resume from")]
    NoCheckpoint(PathBuf),
    #[error("{0} already contains a run; use resume or pick another directory")]
    NotEmpty(PathBuf),
    #[error("checkpoint level {id}: {source}")]
    Level { id: u64, source: LevelError },
    #[error("checkpoint witness {id}: {source}")]
    Witness { id: u64, source: WitnessParseError },
    #[error("checkpoint parameters {id}: {source}")]
    Params { id: u64, source: PolicyError },
    #[error("checkpoint population {id}: {source}")]
    Population { id: u64, source: DeError },
    #[error(transparent)]
    Poet(#[from] PoetError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunDirError + '_ {
    move |source| RunDirError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RunDirError> {
    fs::write(path, bytes).map_err(io_err(path))
}

fn read_string(path: &Path) -> Result<String, RunDirError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunDirError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| RunDirError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, RunDirError> {
    serde_json::from_str(&read_string(path)?).map_err(|source| RunDirError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Written once when a run starts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub config: PoetConfig,
    pub version: String,
    pub master_seed: u64,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
}

impl Manifest {
    pub fn new(config: &PoetConfig) -> Self {
        let started_at = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Manifest {
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: config.seed,
            started_at,
        }
    }
}

/// Paths inside a run directory.
#[derive(Clone, Debug)]
pub struct RunPaths {
    pub root: PathBuf,
}

impl RunPaths {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunPaths { root: root.into() }
    }
    pub fn config(&self) -> PathBuf {
        self.root.join("config.json")
    }
    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }
    pub fn lineage(&self) -> PathBuf {
        self.root.join("lineage.jsonl")
    }
    pub fn stats(&self) -> PathBuf {
        self.root.join("stats.csv")
    }
    pub fn levels(&self) -> PathBuf {
        self.root.join("levels")
    }
    pub fn level(&self, id: u64) -> PathBuf {
        self.levels().join(format!("{id}.txt"))
    }
    pub fn witness(&self, id: u64) -> PathBuf {
        self.levels().join(format!("{id}.witness"))
    }
    pub fn checkpoints(&self) -> PathBuf {
        self.root.join("checkpoints")
    }
    pub fn checkpoint(&self, loop_index: u64) -> PathBuf {
        self.checkpoints().join(loop_index.to_string())
    }

    /// Loop indices of complete checkpoints, ascending.
    pub fn checkpoint_loops(&self) -> Result<Vec<u64>, RunDirError> {
        let dir = self.checkpoints();
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut loops = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let entry = entry.map_err(io_err(&dir))?;
            let name = entry.file_name();
            if let Some(n) = name.to_str().and_then(|s| s.parse::<u64>().ok()) {
                if entry.path().join("state.json").exists() {
                    loops.push(n);
                }
            }
        }
        loops.sort_unstable();
        Ok(loops)
    }
}

/// Read every event from a lineage log.
pub fn read_lineage(path: &Path) -> Result<Vec<LineageEvent>, RunDirError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut events = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line).map_err(|source| RunDirError::Json {
            path: path.to_path_buf(),
            source,
        })?);
    }
    Ok(events)
}

pub fn read_stats(path: &Path) -> Result<Vec<StatsRow>, RunDirError> {
    let csv_err = |source| RunDirError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct PairRecord {
    id: u64,
    parent_id: Option<u64>,
    created_loop: u64,
    active: bool,
    culled_loop: Option<u64>,
    champion_score: f64,
    optimized_loops: u64,
    solved_loop: Option<u64>,
    solve_trace: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct StateRecord {
    loop_index: u64,
    next_id: u64,
    stats: RunStats,
    config: PoetConfig,
    pairs: Vec<PairRecord>,
}

/// Write a full snapshot of `poet` under `checkpoints/<loop>/`.
///
/// Files go to a temporary directory first and are renamed into place, so a
/// crash leaves either a complete checkpoint or none.
pub fn write_checkpoint(paths: &RunPaths, poet: &Poet) -> Result<PathBuf, RunDirError> {
    let dir = paths.checkpoint(poet.loop_index);
    let tmp = paths.checkpoints().join(format!(".{}.tmp", poet.loop_index));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(io_err(&tmp))?;
    }
    fs::create_dir_all(&tmp).map_err(io_err(&tmp))?;

    let mut pairs = Vec::with_capacity(poet.pairs.len());
    for p in &poet.pairs {
        write_file(&tmp.join(format!("{}.level", p.id)), p.level.render().as_bytes())?;
        write_file(&tmp.join(format!("{}.witness", p.id)), p.witness.to_string().as_bytes())?;
        write_file(&tmp.join(format!("{}.champion", p.id)), &p.champion.to_bytes())?;
        if let Some(s) = &p.solved {
            write_file(&tmp.join(format!("{}.solved", p.id)), &s.params.to_bytes())?;
        }
        if let Some(de) = &p.de {
            let path = tmp.join(format!("{}.depop", p.id));
            let file = File::create(&path).map_err(io_err(&path))?;
            de.write_to(file).map_err(io_err(&path))?;
        }
        pairs.push(PairRecord {
            id: p.id,
            parent_id: p.parent_id,
            created_loop: p.created_loop,
            active: p.active,
            culled_loop: p.culled_loop,
            champion_score: p.champion_score,
            optimized_loops: p.optimized_loops,
            solved_loop: p.solved.as_ref().map(|s| s.solved_loop),
            solve_trace: p.solved.as_ref().map(|s| s.trace.to_string()),
        });
    }
    let state = StateRecord {
        loop_index: poet.loop_index,
        next_id: poet.next_id,
        stats: poet.stats,
        config: poet.config.clone(),
        pairs,
    };
    write_json(&tmp.join("state.json"), &state)?;
    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(io_err(&dir))?;
    }
    fs::rename(&tmp, &dir).map_err(io_err(&dir))?;
    Ok(dir)
}

/// Restore the state saved by [`write_checkpoint`].
pub fn read_checkpoint(dir: &Path) -> Result<Poet, RunDirError> {
    let state: StateRecord = read_json(&dir.join("state.json"))?;
    let variant = state.config.game;
    let mut pairs = Vec::with_capacity(state.pairs.len());
    for r in state.pairs {
        let id = r.id;
        let level = Level::parse(&read_string(&dir.join(format!("{id}.level")))?, variant)
            .map_err(|source| RunDirError::Level { id, source })?;
        let witness = read_string(&dir.join(format!("{id}.witness")))?
            .parse()
            .map_err(|source| RunDirError::Witness { id, source })?;
        let read_params = |name: String| -> Result<ParamVector, RunDirError> {
            let path = dir.join(name);
            let file = File::open(&path).map_err(io_err(&path))?;
            ParamVector::read_from(BufReader::new(file)).map_err(|source| RunDirError::Params { id, source })
        };
        let champion = read_params(format!("{id}.champion"))?;
        let solved = match (r.solved_loop, r.solve_trace) {
            (Some(solved_loop), Some(trace)) => Some(SolveRecord {
                solved_loop,
                params: read_params(format!("{id}.solved"))?,
                trace: trace.parse().map_err(|source| RunDirError::Witness { id, source })?,
            }),
            _ => None,
        };
        let de_path = dir.join(format!("{id}.depop"));
        let de = if de_path.exists() {
            let file = File::open(&de_path).map_err(io_err(&de_path))?;
            Some(
                DePopulation::read_from(BufReader::new(file))
                    .map_err(|source| RunDirError::Population { id, source })?,
            )
        } else {
            None
        };
        pairs.push(Pair {
            id,
            level,
            de,
            champion,
            champion_score: r.champion_score,
            created_loop: r.created_loop,
            parent_id: r.parent_id,
            solved,
            active: r.active,
            culled_loop: r.culled_loop,
            witness,
            optimized_loops: r.optimized_loops,
        });
    }
    Ok(Poet {
        config: state.config,
        pairs,
        stats: state.stats,
        next_id: state.next_id,
        loop_index: state.loop_index,
    })
}

/// A run bound to its output directory.
pub struct Run {
    pub poet: Poet,
    pub paths: RunPaths,
    lineage: BufWriter<File>,
    stats: csv::Writer<File>,
}

impl Run {
    /// Start a fresh run in `out`, which must not already hold one.
    pub fn create(config: PoetConfig, out: &Path) -> Result<Run, RunDirError> {
        let paths = RunPaths::new(out);
        if paths.config().exists() {
            return Err(RunDirError::NotEmpty(out.to_path_buf()));
        }
        let (poet, events) = Poet::new(config)?;
        fs::create_dir_all(paths.levels()).map_err(io_err(&paths.levels()))?;
        fs::create_dir_all(paths.checkpoints()).map_err(io_err(&paths.checkpoints()))?;
        write_json(&paths.config(), &poet.config)?;
        write_json(&paths.manifest(), &Manifest::new(&poet.config))?;
        let lineage_path = paths.lineage();
        let lineage = BufWriter::new(File::create(&lineage_path).map_err(io_err(&lineage_path))?);
        let stats_path = paths.stats();
        let stats = csv::Writer::from_path(&stats_path).map_err(|source| RunDirError::Csv {
            path: stats_path.clone(),
            source,
        })?;
        let mut run = Run {
            poet,
            paths,
            lineage,
            stats,
        };
        run.record(&events, true)?;
        run.flush()?;
        Ok(run)
    }

    /// Reopen `out` at its latest checkpoint (or at `at_loop`), discarding
    /// log lines written after that loop. `num_poet_loops` replaces the
    /// configured loop count when given.
    pub fn resume(out: &Path, at_loop: Option<u64>, num_poet_loops: Option<u64>) -> Result<Run, RunDirError> {
        let paths = RunPaths::new(out);
        let loops = paths.checkpoint_loops()?;
        let chosen = match at_loop {
            Some(l) => loops.iter().copied().find(|&x| x == l),
            None => loops.last().copied(),
        }
        .ok_or_else(|| RunDirError::NoCheckpoint(out.to_path_buf()))?;
        let mut poet = read_checkpoint(&paths.checkpoint(chosen))?;
        if let Some(n) = num_poet_loops {
            poet.config.num_poet_loops = n;
        }

        let kept: Vec<LineageEvent> = read_lineage(&paths.lineage())?
            .into_iter()
            .filter(|e| e.loop_index() <= chosen)
            .collect();
        let rows: Vec<StatsRow> = read_stats(&paths.stats())?
            .into_iter()
            .filter(|r| r.loop_index <= chosen)
            .collect();

        let lineage_path = paths.lineage();
        let mut lineage = BufWriter::new(File::create(&lineage_path).map_err(io_err(&lineage_path))?);
        for e in &kept {
            serde_json::to_writer(&mut lineage, e).map_err(|source| RunDirError::Json {
                path: lineage_path.clone(),
                source,
            })?;
            lineage.write_all(b"\n").map_err(io_err(&lineage_path))?;
        }
        let stats_path = paths.stats();
        let csv_err = |source| RunDirError::Csv {
            path: stats_path.clone(),
            source,
        };
        let mut stats = csv::Writer::from_path(&stats_path).map_err(csv_err)?;
        for r in &rows {
            stats.serialize(r).map_err(csv_err)?;
        }
        let mut run = Run {
            poet,
            paths,
            lineage,
            stats,
        };
        run.flush()?;
        Ok(run)
    }

    fn record(&mut self, events: &[LineageEvent], row: bool) -> Result<(), RunDirError> {
        let lineage_path = self.paths.lineage();
        for e in events {
            serde_json::to_writer(&mut self.lineage, e).map_err(|source| RunDirError::Json {
                path: lineage_path.clone(),
                source,
            })?;
            self.lineage.write_all(b"\n").map_err(io_err(&lineage_path))?;
            if let LineageEvent::Seed { id, .. } | LineageEvent::Admit { id, .. } = *e {
                let pair = self.poet.pair(id).expect("admitted pair exists");
                write_file(&self.paths.level(id), pair.level.render().as_bytes())?;
                write_file(&self.paths.witness(id), pair.witness.to_string().as_bytes())?;
            }
        }
        if row {
            let stats_path = self.paths.stats();
            self.stats
                .serialize(self.poet.stats_row())
                .map_err(|source| RunDirError::Csv { path: stats_path, source })?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<(), RunDirError> {
        let lineage_path = self.paths.lineage();
        self.lineage.flush().map_err(io_err(&lineage_path))?;
        let stats_path = self.paths.stats();
        self.stats.flush().map_err(io_err(&stats_path))
    }

    pub fn is_finished(&self) -> bool {
        self.poet.loop_index >= self.poet.config.num_poet_loops
    }

    /// Run one loop, append its logs and checkpoint when due.
    pub fn step(&mut self) -> Result<Vec<LineageEvent>, RunDirError> {
        let events = self.poet.step();
        self.record(&events, true)?;
        self.flush()?;
        let t = self.poet.loop_index;
        if t % self.poet.config.checkpoint_every == 0 || self.is_finished() {
            self.checkpoint()?;
        }
        Ok(events)
    }

    /// Write a checkpoint for the current loop and prune old ones.
    pub fn checkpoint(&mut self) -> Result<PathBuf, RunDirError> {
        let dir = write_checkpoint(&self.paths, &self.poet)?;
        let keep = self.poet.config.keep_checkpoints;
        if keep > 0 {
            let loops = self.paths.checkpoint_loops()?;
            for &old in loops.iter().take(loops.len().saturating_sub(keep)) {
                let path = self.paths.checkpoint(old);
                fs::remove_dir_all(&path).map_err(io_err(&path))?;
            }
        }
        Ok(dir)
    }

    /// Run until the configured number of loops is reached.
    pub fn run_to_end(&mut self, mut on_loop: impl FnMut(&Poet, &[LineageEvent])) -> Result<(), RunDirError> {
        while !self.is_finished() {
            let events = self.step()?;
            on_loop(&self.poet, &events);
        }
        Ok(())
    }
}
