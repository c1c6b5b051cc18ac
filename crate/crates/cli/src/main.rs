use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cogen::curriculum::{extract_curriculum, run_curriculum, CurriculumConfig};
use cogen::game::{rollout_with, Action, Agent, GameState, GameVariant, Level, Outcome, RewardScheme, RolloutOptions};
use cogen::poet::{recount, LineageEvent, PoetConfig, RunStats};
use cogen::policy::{ParamVector, PolicyAgent, PolicySpec};
use cogen::render::{ascii_strip, level_image, strip_image};
use cogen::rng::rng_from_seed;
use cogen::rundir::{read_checkpoint, read_lineage, read_stats, Run, RunPaths};

const EXIT_LOSS: u8 = 3;
const EXIT_TIMEOUT: u8 = 4;

#[derive(Parser)]
#[command(name = "cogen", version, about = "Co-evolve grid-game levels and the agents that solve them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Start a run, or resume one from a checkpoint.
    Run(RunArgs),
    /// Draw a level, or the lineage of a pair from a run, as ASCII or PPM.
    Render(RenderArgs),
    /// Play a parameter file on a level and print the trace.
    Replay(ReplayArgs),
    /// Summarise a run directory.
    Stats(StatsArgs),
    /// Extract a curriculum from a run and train through it.
    Curriculum(CurriculumArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_parser = parse_game)]
    game: Option<GameVariant>,
    #[arg(long)]
    game_len: Option<u32>,
    #[arg(long)]
    n_games: Option<u64>,
    #[arg(long)]
    pop_size: Option<usize>,
    #[arg(long)]
    mutation_timer: Option<u64>,
    #[arg(long)]
    max_children: Option<usize>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    transfer_timer: Option<u64>,
    #[arg(long)]
    max_envs: Option<usize>,
    #[arg(long)]
    num_poet_loops: Option<u64>,
    #[arg(long, value_parser = parse_reward)]
    reward: Option<RewardScheme>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    checkpoint_every: Option<u64>,
    /// Checkpoints to keep on disk; 0 keeps all.
    #[arg(long)]
    keep_checkpoints: Option<usize>,
    /// Start from this level file instead of the built-in seed level.
    #[arg(long)]
    seed_level: Option<PathBuf>,
    /// Run directory; must not already hold a run.
    #[arg(long, required_unless_present = "resume")]
    out: Option<PathBuf>,
    /// A run directory (latest checkpoint) or a `checkpoints/<loop>` directory.
    #[arg(long, conflicts_with = "out")]
    resume: Option<PathBuf>,
    /// Evaluation threads; defaults to one per core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Write the resolved config.json and stop.
    #[arg(long)]
    dry_run: bool,
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct RenderArgs {
    /// Level file to draw.
    #[arg(required_unless_present = "run")]
    level: Option<PathBuf>,
    #[arg(long, value_parser = parse_game, default_value = "dzelda")]
    game: GameVariant,
    /// Run directory for lineage mode.
    #[arg(long, requires = "lineage", conflicts_with = "level")]
    run: Option<PathBuf>,
    /// Pair id whose ancestry is drawn, oldest first.
    #[arg(long, requires = "run")]
    lineage: Option<u64>,
    /// Output file; `.ppm` writes an image, anything else ASCII. Stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pixels per tile in images.
    #[arg(long, default_value_t = 8)]
    scale: usize,
}

#[derive(Args)]
struct ReplayArgs {
    level: PathBuf,
    /// Parameter vector file.
    params: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_game, default_value = "dzelda")]
    game: GameVariant,
    #[arg(long)]
    game_len: Option<u32>,
    #[arg(long, value_parser = parse_reward, default_value = "aligned")]
    reward: RewardScheme,
}

#[derive(Args)]
struct StatsArgs {
    run: PathBuf,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CurriculumArgs {
    run: PathBuf,
    /// Leaf pair id naming the lineage.
    #[arg(long)]
    lineage: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on optimisation steps per stage.
    #[arg(long)]
    max_stage_loops: Option<u64>,
    /// Report CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_game(s: &str) -> Result<GameVariant, String> {
    s.parse().map_err(|e: cogen::game::UnknownGame| e.to_string())
}

fn parse_reward(s: &str) -> Result<RewardScheme, String> {
    s.parse().map_err(|e: cogen::game::UnknownReward| e.to_string())
}

type CmdResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Render(a) => cmd_render(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Curriculum(a) => cmd_curriculum(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn resolve_config(a: &RunArgs) -> Result<PoetConfig, Box<dyn std::error::Error>> {
    let mut c = PoetConfig::new(a.game.unwrap_or(GameVariant::DZeldaSingleDoor));
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = a.$field { c.$field = v; } )* };
    }
    set!(game_len, n_games, pop_size, mutation_timer, max_children, mutation_rate);
    set!(transfer_timer, max_envs, num_poet_loops, reward, seed, checkpoint_every, keep_checkpoints);
    if let Some(path) = &a.seed_level {
        c.seed_level = Some(fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?);
    }
    c.validate()?;
    Ok(c)
}

fn cmd_run(a: RunArgs) -> CmdResult {
    cogen::init_workers(a.workers)?;
    let mut run = if let Some(resume) = &a.resume {
        let (root, at) = if resume.join("state.json").exists() {
            let at = resume
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| format!("{}: not a checkpoint directory", resume.display()))?;
            let root = resume
                .parent()
                .and_then(Path::parent)
                .ok_or_else(|| format!("{}: checkpoint is not inside a run directory", resume.display()))?;
            (root.to_path_buf(), Some(at))
        } else {
            (resume.clone(), None)
        };
        let run = Run::resume(&root, at, a.num_poet_loops)?;
        if !a.quiet {
            eprintln!("resumed {} at loop {}", root.display(), run.poet.loop_index);
        }
        run
    } else {
        let out = a.out.clone().expect("clap requires --out without --resume");
        if out.exists() && fs::read_dir(&out)?.next().is_some() {
            return Err(format!("{} already exists; pass --resume to continue it", out.display()).into());
        }
        let config = resolve_config(&a)?;
        if a.dry_run {
            fs::create_dir_all(&out)?;
            let mut text = serde_json::to_string_pretty(&config)?;
            text.push('\n');
            fs::write(RunPaths::new(&out).config(), text)?;
            return Ok(ExitCode::SUCCESS);
        }
        Run::create(config, &out)?
    };
    let quiet = a.quiet;
    run.run_to_end(|poet, _| {
        if !quiet {
            let s = poet.stats;
            eprintln!(
                "loop {:>5}  active {:>3}  levels {:>5}  viable {:>5}  solved {:>5}  transfers {}/{}",
                poet.loop_index,
                poet.active_count(),
                s.total_levels,
                s.viable_levels,
                s.solved_levels,
                s.transfers_accepted,
                s.transfer_attempts
            );
        }
    })?;
    Ok(ExitCode::SUCCESS)
}

fn read_level(path: &Path, game: GameVariant) -> Result<Level, Box<dyn std::error::Error>> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(Level::parse(&text, game).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match out {
        Some(p) => fs::write(p, bytes),
        None => io::stdout().write_all(bytes),
    }
}

fn is_ppm(out: Option<&Path>) -> bool {
    out.and_then(Path::extension).is_some_and(|e| e.eq_ignore_ascii_case("ppm"))
}

fn cmd_render(a: RenderArgs) -> CmdResult {
    let (levels, captions) = match (&a.level, &a.run, a.lineage) {
        (Some(path), _, _) => (vec![read_level(path, a.game)?], vec![String::new()]),
        (None, Some(run), Some(leaf)) => lineage_levels(run, leaf)?,
        _ => unreachable!("clap enforces a level or --run with --lineage"),
    };
    let refs: Vec<&Level> = levels.iter().collect();
    let out = a.out.as_deref();
    let bytes = if is_ppm(out) {
        let img = if refs.len() == 1 {
            level_image(refs[0], a.scale)
        } else {
            strip_image(&refs, a.scale, a.scale)
        };
        let mut b = Vec::new();
        img.write_ppm(&mut b)?;
        b
    } else if refs.len() == 1 {
        refs[0].render().into_bytes()
    } else {
        ascii_strip(&refs, &captions).into_bytes()
    };
    write_output(out, &bytes)?;
    Ok(ExitCode::SUCCESS)
}

/// Levels from the seed down to `leaf`, ordered by admission loop, read from
/// the event log and the saved level files.
fn lineage_levels(run: &Path, leaf: u64) -> Result<(Vec<Level>, Vec<String>), Box<dyn std::error::Error>> {
    let paths = RunPaths::new(run);
    let config: PoetConfig = serde_json::from_str(&fs::read_to_string(paths.config())?)?;
    let mut nodes: HashMap<u64, (Option<u64>, u64)> = HashMap::new();
    for e in read_lineage(&paths.lineage())? {
        match e {
            LineageEvent::Seed { id, loop_index, .. } => {
                nodes.insert(id, (None, loop_index));
            }
            LineageEvent::Admit {
                id,
                parent_id,
                loop_index,
                ..
            } => {
                nodes.insert(id, (parent_id, loop_index));
            }
            _ => {}
        }
    }
    let mut chain = Vec::new();
    let mut cur = Some(leaf);
    while let Some(id) = cur {
        let &(parent, created) = nodes.get(&id).ok_or_else(|| format!("pair {id} is not in the lineage log"))?;
        chain.push((created, id));
        cur = parent;
    }
    chain.sort_unstable();
    let mut levels = Vec::new();
    let mut captions = Vec::new();
    for (created, id) in chain {
        levels.push(read_level(&paths.level(id), config.game)?);
        captions.push(format!("#{id} @{created}"));
    }
    Ok((levels, captions))
}

/// Records the avatar position the agent saw before each action.
struct Tracing<A> {
    inner: A,
    positions: Vec<String>,
}

impl<A: Agent> Agent for Tracing<A> {
    fn act(&mut self, state: &GameState) -> Action {
        let pos = match (state.zelda(), state.solarfox()) {
            (Some(z), _) => format!("({},{})", z.avatar.x, z.avatar.y),
            (_, Some(s)) => format!("({:.1},{:.1})", s.hx as f64 / 2.0, s.hy as f64 / 2.0),
            _ => String::new(),
        };
        self.positions.push(pos);
        self.inner.act(state)
    }

    fn is_markov(&self) -> bool {
        self.inner.is_markov()
    }
}

fn cmd_replay(a: ReplayArgs) -> CmdResult {
    let level = read_level(&a.level, a.game)?;
    let spec = PolicySpec::for_variant(a.game, level.width(), level.height());
    let file = File::open(&a.params).map_err(|e| format!("{}: {e}", a.params.display()))?;
    let params = ParamVector::read_from(BufReader::new(file))?;
    let inner = PolicyAgent::new(spec, &params, a.game)?;
    let mut agent = Tracing {
        inner,
        positions: Vec::new(),
    };
    let game_len = a.game_len.unwrap_or(a.game.default_game_len());
    let options = RolloutOptions { detect_cycles: false };
    let report = rollout_with(&level, &mut agent, game_len, a.reward, a.seed, options);

    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    writeln!(w, "step\taction\tposition\tevents")?;
    for (t, action) in report.actions.iter().enumerate() {
        let events: Vec<String> = report
            .events
            .iter()
            .filter(|e| e.tick as usize == t + 1)
            .map(|e| format!("{:?}", e.kind))
            .collect();
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            t + 1,
            action.token(),
            agent.positions[t],
            events.join(",")
        )?;
    }
    writeln!(
        w,
        "outcome {:?} steps {} score {} native {}",
        report.outcome, report.steps, report.final_score, report.native_score
    )?;
    w.flush()?;
    Ok(match report.outcome {
        Outcome::Win => ExitCode::SUCCESS,
        Outcome::Loss => ExitCode::from(EXIT_LOSS),
        Outcome::Timeout => ExitCode::from(EXIT_TIMEOUT),
    })
}

fn cmd_stats(a: StatsArgs) -> CmdResult {
    let paths = RunPaths::new(&a.run);
    let rows = read_stats(&paths.stats())?;
    let events = read_lineage(&paths.lineage())?;
    let counted = recount(&events);
    let logged = rows.last().map_or(RunStats::default(), |r| RunStats {
        loops: r.loop_index,
        total_levels: r.total_levels,
        viable_levels: r.viable_levels,
        solved_levels: r.solved_levels,
        transfer_attempts: r.transfer_attempts,
        transfers_accepted: r.transfers_accepted,
    });
    // The log has no per-loop marker, so the loop count comes from stats.csv.
    let stats = RunStats {
        loops: logged.loops,
        ..counted
    };
    if logged != stats {
        return Err(format!("stats.csv disagrees with lineage.jsonl: {logged:?} vs {stats:?}").into());
    }
    let rate = if stats.viable_levels == 0 {
        0.0
    } else {
        100.0 * stats.solved_levels as f64 / stats.viable_levels as f64
    };
    if a.json {
        let mut v = serde_json::to_value(stats)?;
        v["solveRate"] = serde_json::json!(rate);
        println!("{v}");
    } else {
        println!("loops               {}", stats.loops);
        println!("total levels        {}", stats.total_levels);
        println!("viable levels       {}", stats.viable_levels);
        println!("solved levels       {}", stats.solved_levels);
        println!("transfer attempts   {}", stats.transfer_attempts);
        println!("transfers           {}", stats.transfers_accepted);
        println!("solve rate          {rate:.1}%");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_curriculum(a: CurriculumArgs) -> CmdResult {
    cogen::init_workers(0)?;
    let paths = RunPaths::new(&a.run);
    let last = *paths
        .checkpoint_loops()?
        .last()
        .ok_or_else(|| format!("{}: no checkpoint", a.run.display()))?;
    let archive = read_checkpoint(&paths.checkpoint(last))?;
    let mut rng = rng_from_seed(a.seed);
    let curriculum = extract_curriculum(&archive, a.lineage, &mut rng)?;
    let mut cfg = CurriculumConfig::from_run(&archive.config);
    cfg.seed = a.seed;
    if let Some(cap) = a.max_stage_loops {
        cfg.max_stage_loops = cap;
    }
    for (stage, cl) in curriculum.stages() {
        eprintln!(
            "{stage}: pair {} (solved level {} of {}), {} source loops",
            cl.pair_id,
            cl.position + 1,
            curriculum.solved_count,
            cl.source_loops
        );
    }
    let report = run_curriculum(&curriculum, &cfg);
    let mut bytes = Vec::new();
    report.write_csv(&mut bytes)?;
    write_output(a.out.as_deref(), &bytes)?;
    Ok(ExitCode::SUCCESS)
}
