//! arenakit command line.
//!
//! Thin argument-parsing shell over `arenakit_core`: every subcommand loads
//! its inputs, calls one library entry point, and writes the result to a file
//! or standard output. JSON is the canonical output everywhere; CSV and SVG
//! are projections of the same data. Exit codes follow the usage/data split:
//! 0 success, 1 usage error (bad flags, unknown names, invalid parameters),
//! 2 data error (unreadable files, schema violations, bad states).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use arenakit_core::arena::{ArenaConstants, GameState, Vec3};
use arenakit_core::field::{
    build_report, export_field, ExportFormat, FieldTarget, GridConfig, Scenario,
};
use arenakit_core::graph::{build_adjacency_with, AdjacencyVariant, CaseANormalization};
use arenakit_core::objectives::{class_balance_report, RewardSource, DEFAULT_EPSILON};
use arenakit_core::obs::{encode_observation, KbmTable, ObservationConfig};
use arenakit_core::replay::{
    parse_replay_csv, replay_to_rewards, timeline_to_csv, ColumnMap, RewardTimeline,
};
use arenakit_core::rewards::Component;
use arenakit_core::sim::{
    random_state_setter, run_episode, ChasePolicy, IdlePolicy, Policy, RandomPolicy, SetterVariant,
    SimConfig,
};
use arenakit_core::{Error, Result, RewardSpec};

#[derive(Parser)]
#[command(
    name = "arenakit",
    version,
    about = "Reward fields, replay scoring, rollouts, and encodings for car-soccer arenas",
    propagate_version = true
)]
struct Cli {
    /// TOML or JSON file with an [arena] section overriding arena geometry.
    #[arg(long, global = true, env = "ARENAKIT_CONFIG", value_name = "PATH")]
    config: Option<PathBuf>,

    /// Print a summary line to stderr after the command finishes.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a reward component or a spec's utility over an arena plane.
    Field(FieldArgs),
    /// Score a replay CSV into a reward timeline.
    Replay(ReplayArgs),
    /// Run a simulated episode and emit the full result.
    Rollout(RolloutArgs),
    /// Build an object adjacency matrix from a state or explicit positions.
    Graph(GraphArgs),
    /// Encode the observation triplet for one player of a state fixture.
    Obs(ObsArgs),
    /// Auxiliary-task data utilities.
    Aux(AuxArgs),
}

#[derive(Args)]
struct FieldArgs {
    /// Reward component to sample (e.g. save_boost, offensive_potential).
    #[arg(long, value_name = "NAME", conflicts_with = "utility")]
    component: Option<String>,

    /// Sample a whole utility tree instead: reward spec path or built-in name.
    #[arg(long, value_name = "SPEC")]
    utility: Option<String>,

    /// Component parameter, repeatable (e.g. --param dispersion=1.1).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,

    /// Scenario JSON file; flags below override its fields.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,

    /// Ball position.
    #[arg(long, value_name = "X,Y,Z")]
    ball: Option<String>,

    /// Ball velocity.
    #[arg(long = "ball-vel", value_name = "X,Y,Z")]
    ball_vel: Option<String>,

    /// Probe car velocity.
    #[arg(long = "probe-vel", value_name = "X,Y,Z")]
    probe_vel: Option<String>,

    /// Probe car boost in [0, 100].
    #[arg(long = "probe-boost", value_name = "AMOUNT")]
    probe_boost: Option<f64>,

    /// Sampling plane height.
    #[arg(long, default_value_t = 300.0)]
    z: f64,

    /// Grid resolution.
    #[arg(long, value_name = "NXxNY", default_value = "128x160")]
    res: String,

    /// Annotate the ball with its nearest grid value.
    #[arg(long = "annotate-ball")]
    annotate_ball: bool,

    /// Output format; defaults to the --out extension, else json.
    #[arg(long, value_enum)]
    format: Option<FieldFormatArg>,

    /// Output file (.csv, .json, or .svg); stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Replay CSV to score.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,

    /// Reward spec path or built-in name.
    #[arg(long, default_value = "lucy_skg", value_name = "SPEC")]
    spec: String,

    /// Frames skipped between evaluated frames.
    #[arg(long = "n-skip", default_value_t = 9)]
    n_skip: usize,

    /// TOML file with a [columns] section remapping header names.
    #[arg(long, value_name = "PATH")]
    columns: Option<PathBuf>,

    /// Output file (.json or .csv); stdout JSON when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RolloutArgs {
    /// Reward spec path or built-in name.
    #[arg(long, default_value = "lucy_skg", value_name = "SPEC")]
    spec: String,

    /// Seed for the state setter, the policy, and the sim config.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Roster shape, blue first (e.g. 2v2, 3v1).
    #[arg(long, default_value = "1v1", value_name = "NvM")]
    players: String,

    /// Initial state setter.
    #[arg(long, value_enum, default_value_t = SetterArg::Random)]
    setter: SetterArg,

    /// Per-player control policy.
    #[arg(long, value_enum, default_value_t = PolicyArg::Random)]
    policy: PolicyArg,

    /// Override the hard step cap.
    #[arg(long = "max-steps", value_name = "STEPS")]
    max_steps: Option<usize>,

    /// Override the no-touch timeout in steps; 0 disables it.
    #[arg(long = "no-touch", value_name = "STEPS")]
    no_touch: Option<usize>,

    /// Output file (.json); stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    /// Game state JSON fixture; objects are the ball plus every car.
    #[arg(long, value_name = "PATH", conflicts_with = "position")]
    state: Option<PathBuf>,

    /// Explicit object position, repeatable.
    #[arg(long, value_name = "X,Y,Z")]
    position: Vec<String>,

    #[arg(long, value_enum, default_value_t = VariantArg::UnitSelf)]
    variant: VariantArg,

    #[arg(long, default_value_t = 1.0)]
    dispersion: f64,

    #[arg(long, default_value_t = 1.0)]
    density: f64,

    /// Divisor for the case-a normalization.
    #[arg(long = "case-a", value_enum, default_value_t = CaseAArg::SumOverN)]
    case_a: CaseAArg,

    /// Output file (.json or .csv); stdout JSON when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ObsArgs {
    /// Game state JSON fixture.
    #[arg(long, value_name = "PATH", required_unless_present = "dump_kbm")]
    state: Option<PathBuf>,

    /// Player index in the state's roster.
    #[arg(long, default_value_t = 0)]
    player: usize,

    /// Action stack depth k.
    #[arg(long, default_value_t = 5)]
    stack: usize,

    /// Pad the key/value rows up to this object capacity.
    #[arg(long, value_name = "N")]
    capacity: Option<usize>,

    /// KBM table TOML to validate and use instead of the default.
    #[arg(long, value_name = "PATH")]
    kbm: Option<PathBuf>,

    /// Dump the KBM table as TOML instead of encoding an observation.
    #[arg(long = "dump-kbm")]
    dump_kbm: bool,

    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuxArgs {
    #[command(subcommand)]
    command: AuxCommand,
}

#[derive(Subcommand)]
enum AuxCommand {
    /// Three-class balance report over a scored timeline.
    Classify(ClassifyArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Timeline JSON produced by the replay subcommand.
    #[arg(long, value_name = "PATH")]
    timeline: PathBuf,

    /// Classification threshold.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,

    /// Which per-player scalar to classify.
    #[arg(long, value_enum, default_value_t = SourceArg::Distributed)]
    source: SourceArg,

    /// Output file (.json); stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldFormatArg {
    Csv,
    Json,
    Svg,
}

impl From<FieldFormatArg> for ExportFormat {
    fn from(arg: FieldFormatArg) -> ExportFormat {
        match arg {
            FieldFormatArg::Csv => ExportFormat::Csv,
            FieldFormatArg::Json => ExportFormat::Json,
            FieldFormatArg::Svg => ExportFormat::Svg,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SetterArg {
    Random,
    Kickoff,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Idle,
    Random,
    Chase,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    UnitSelf,
    NormalizedSelf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseAArg {
    SumOverN,
    OffDiagonalMean,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Distributed,
    Shaped,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // clap renders help to stdout and errors to stderr on its own.
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_usage() { 1 } else { 2 })
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let arena = match &cli.config {
        Some(path) => ArenaConstants::from_config_file(path)?,
        None => ArenaConstants::default(),
    };
    match &cli.command {
        Command::Field(args) => run_field(args, &arena, cli.verbose),
        Command::Replay(args) => run_replay(args, &arena, cli.verbose),
        Command::Rollout(args) => run_rollout(args, &arena, cli.verbose),
        Command::Graph(args) => run_graph(args, &arena, cli.verbose),
        Command::Obs(args) => run_obs(args, &arena, cli.verbose),
        Command::Aux(args) => match &args.command {
            AuxCommand::Classify(args) => run_classify(args, cli.verbose),
        },
    }
}

fn run_field(args: &FieldArgs, arena: &ArenaConstants, verbose: bool) -> Result<()> {
    let params = parse_params(&args.params)?;
    let target = match (&args.component, &args.utility) {
        (Some(name), None) => FieldTarget::Component(Component::from_name(name, &params)?),
        (None, Some(spec)) => FieldTarget::Utility(RewardSpec::resolve(spec)?),
        (None, None) => {
            return Err(Error::Parameter(
                "field needs either --component or --utility".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects the conflict"),
    };

    let mut scenario = match &args.scenario {
        Some(path) => read_json::<Scenario>(path)?,
        None => Scenario::default(),
    };
    if let Some(text) = &args.ball {
        scenario.ball.position = parse_vec3(text)?;
    }
    if let Some(text) = &args.ball_vel {
        scenario.ball.linear_velocity = parse_vec3(text)?;
    }
    if let Some(text) = &args.probe_vel {
        scenario.probe_velocity = parse_vec3(text)?;
    }
    if let Some(boost) = args.probe_boost {
        scenario.probe_boost = boost;
    }

    let (nx, ny) = parse_res(&args.res)?;
    let grid = GridConfig { nx, ny, z: args.z, ..GridConfig::default() };

    let report = build_report(&target, params, &scenario, &grid, arena, args.annotate_ball)?;
    let format = match args.format {
        Some(arg) => arg.into(),
        None => match &args.out {
            Some(path) => ExportFormat::from_extension(extension_of(path)?)?,
            None => ExportFormat::Json,
        },
    };
    let text = export_field(&report, format)?;
    emit(&text, args.out.as_deref())?;
    if verbose {
        let (lo, hi) = report.grid.value_range();
        eprintln!(
            "field {}: {}x{} cells, values in [{lo:.6}, {hi:.6}]",
            report.target, nx, ny
        );
    }
    Ok(())
}

fn run_replay(args: &ReplayArgs, arena: &ArenaConstants, verbose: bool) -> Result<()> {
    let map = match &args.columns {
        Some(path) => ColumnMap::from_toml_str(&read_text(path)?)?,
        None => ColumnMap::default(),
    };
    let table = parse_replay_csv(&args.input, &map)?;
    let spec = RewardSpec::resolve(&args.spec)?;
    let timeline = replay_to_rewards(&table, &spec, args.n_skip, arena)?;

    let as_csv = match &args.out {
        Some(path) => match extension_of(path)? {
            "csv" => true,
            "json" => false,
            other => {
                return Err(Error::Format(format!(
                    "replay output must be .json or .csv, got .{other}"
                )))
            }
        },
        None => false,
    };
    let text = if as_csv { timeline_to_csv(&timeline) } else { to_json(&timeline)? };
    emit(&text, args.out.as_deref())?;
    if verbose {
        eprintln!(
            "replay: {} frames -> {} evaluated, {} players, {} corrupt rows dropped",
            table.len(),
            timeline.frames.len(),
            timeline.player_count(),
            table.dropped_rows
        );
    }
    Ok(())
}

fn run_rollout(args: &RolloutArgs, arena: &ArenaConstants, verbose: bool) -> Result<()> {
    let spec = RewardSpec::resolve(&args.spec)?;
    let (blue, orange) = parse_players(&args.players)?;
    let variant = match args.setter {
        SetterArg::Random => SetterVariant::Random,
        SetterArg::Kickoff => SetterVariant::KickoffLike,
    };
    let mut config = SimConfig { seed: args.seed, ..SimConfig::default() };
    if let Some(steps) = args.max_steps {
        config.max_steps = steps;
    }
    if let Some(steps) = args.no_touch {
        config.no_touch_timeout = if steps == 0 { None } else { Some(steps) };
    }

    let initial = random_state_setter(args.seed, blue, orange, variant, arena)?;
    let mut idle = IdlePolicy;
    let mut random = RandomPolicy::new(args.seed);
    let mut chase = ChasePolicy;
    let policy: &mut dyn Policy = match args.policy {
        PolicyArg::Idle => &mut idle,
        PolicyArg::Random => &mut random,
        PolicyArg::Chase => &mut chase,
    };
    let result = run_episode(&spec, initial, policy, &config, arena)?;

    if let Some(path) = &args.out {
        if extension_of(path)? != "json" {
            return Err(Error::Format("rollout output must be .json".into()));
        }
    }
    emit(&to_json(&result)?, args.out.as_deref())?;
    if verbose {
        eprintln!(
            "rollout: {blue}v{orange}, {} steps, terminated by {:?}",
            result.steps.len(),
            result.termination
        );
    }
    Ok(())
}

fn run_graph(args: &GraphArgs, arena: &ArenaConstants, verbose: bool) -> Result<()> {
    let positions: Vec<Vec3> = match &args.state {
        Some(path) => {
            let state = read_json::<GameState>(path)?;
            state.validate(arena)?;
            std::iter::once(state.ball.position)
                .chain(state.players.iter().map(|p| p.body.position))
                .collect()
        }
        None => {
            if args.position.is_empty() {
                return Err(Error::Parameter(
                    "graph needs --state or at least one --position".into(),
                ));
            }
            args.position
                .iter()
                .map(|text| parse_vec3(text))
                .collect::<Result<_>>()?
        }
    };
    let variant = match args.variant {
        VariantArg::UnitSelf => AdjacencyVariant::UnitSelf,
        VariantArg::NormalizedSelf => AdjacencyVariant::NormalizedSelf,
    };
    let case_a = match args.case_a {
        CaseAArg::SumOverN => CaseANormalization::SumOverN,
        CaseAArg::OffDiagonalMean => CaseANormalization::OffDiagonalMean,
    };
    let matrix = build_adjacency_with(&positions, variant, args.dispersion, args.density, case_a)?;

    let as_csv = match &args.out {
        Some(path) => match extension_of(path)? {
            "csv" => true,
            "json" => false,
            other => {
                return Err(Error::Format(format!(
                    "graph output must be .json or .csv, got .{other}"
                )))
            }
        },
        None => false,
    };
    let text = if as_csv {
        let mut out = String::new();
        for row in &matrix.values {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    } else {
        to_json(&matrix)?
    };
    emit(&text, args.out.as_deref())?;
    if verbose {
        eprintln!("graph: {0}x{0} adjacency", matrix.size());
    }
    Ok(())
}

fn run_obs(args: &ObsArgs, arena: &ArenaConstants, verbose: bool) -> Result<()> {
    let table = match &args.kbm {
        Some(path) => KbmTable::from_toml_str(&read_text(path)?)?,
        None => KbmTable::default(),
    };
    if args.dump_kbm {
        emit(&table.to_toml_string(), args.out.as_deref())?;
        return Ok(());
    }

    let path = args.state.as_ref().expect("clap requires --state here");
    let state = read_json::<GameState>(path)?;
    state.validate(arena)?;
    let cfg = ObservationConfig {
        action_stack_len: args.stack,
        object_capacity: args.capacity,
        ..ObservationConfig::default()
    };
    let triplet = encode_observation(&state, args.player, &[], &cfg, arena)?;
    emit(&to_json(&triplet)?, args.out.as_deref())?;
    if verbose {
        eprintln!(
            "obs: player {} of {}, {} object rows of width {}",
            args.player,
            state.players.len(),
            triplet.key_value.len(),
            triplet.query.len()
        );
    }
    Ok(())
}

fn run_classify(args: &ClassifyArgs, verbose: bool) -> Result<()> {
    let timeline = read_json::<RewardTimeline>(&args.timeline)?;
    let source = match args.source {
        SourceArg::Distributed => RewardSource::Distributed,
        SourceArg::Shaped => RewardSource::Shaped,
    };
    let balance = class_balance_report(&timeline, args.epsilon, source)?;
    emit(&to_json(&balance)?, args.out.as_deref())?;
    if verbose {
        eprintln!(
            "classify: {} samples -> positive {} / zero {} / negative {}",
            balance.total, balance.counts[0], balance.counts[1], balance.counts[2]
        );
    }
    Ok(())
}

fn parse_vec3(text: &str) -> Result<Vec3> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Parameter(format!(
            "expected X,Y,Z with three components, got `{text}`"
        )));
    }
    let mut coords = [0.0f64; 3];
    for (slot, part) in coords.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| Error::Parameter(format!("`{part}` is not a number in `{text}`")))?;
    }
    Ok(Vec3::new(coords[0], coords[1], coords[2]))
}

fn parse_res(text: &str) -> Result<(usize, usize)> {
    let parse = |part: &str| {
        part.parse::<usize>()
            .map_err(|_| Error::Parameter(format!("bad grid resolution `{text}`, expected NXxNY")))
    };
    match text.split_once(['x', 'X']) {
        Some((nx, ny)) => Ok((parse(nx.trim())?, parse(ny.trim())?)),
        None => Err(Error::Parameter(format!(
            "bad grid resolution `{text}`, expected NXxNY"
        ))),
    }
}

fn parse_params(items: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for item in items {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            Error::Parameter(format!("expected KEY=VALUE for --param, got `{item}`"))
        })?;
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::Parameter(format!("`{value}` is not a number in --param `{item}`"))
        })?;
        map.insert(key.trim().to_string(), value);
    }
    Ok(map)
}

fn parse_players(text: &str) -> Result<(usize, usize)> {
    let err = || Error::Parameter(format!("bad roster `{text}`, expected NvM like 2v2"));
    let (blue, orange) = text.split_once(['v', 'V']).ok_or_else(err)?;
    Ok((
        blue.trim().parse().map_err(|_| err())?,
        orange.trim().parse().map_err(|_| err())?,
    ))
}

fn extension_of(path: &Path) -> Result<&str> {
    path.extension().and_then(|e| e.to_str()).ok_or_else(|| {
        Error::Format(format!(
            "output path `{}` needs a file extension",
            path.display()
        ))
    })
}

fn read_text(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))
}

/// Writes to the file (with a trailing newline) or to stdout.
fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let body = if text.ends_with('\n') {
                text.to_string()
            } else {
                format!("{text}\n")
            };
            std::fs::write(path, body)?;
        }
        None => {
            use std::io::Write;
            // A closed pipe (e.g. `arenakit ... | head`) is not an error.
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = writeln!(stdout, "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(Error::Io(e));
                }
            }
        }
    }
    Ok(())
}
