use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use longtake::controller::tune_ziegler_nichols;
use longtake::engine::{ControlVariant, Telemetry};
use longtake::eval::{relay_tune, run_ablation_suite, GimbalAxis, RelayConfig};
use longtake::scenes::{centered_script, scene_by_name, standard_two_shot_script, whip_script, SCENE_NAMES};
use longtake::script::{parse_script, Script};
use longtake::session::{read_event_log, replay, EventLog, Session, SessionConfig};
use longtake::sim::{GimbalPlant, SceneSpec};
use longtake::tracker::replay::{read_stream, write_records};
use longtake::tracker::Ablation;
use longtake_service::{ServiceConfig, Sink};

#[derive(Parser)]
#[command(name = "longtake", version, about = "Simulated long-take filming: tracker, framing controller and script engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check script files and report the first error in each.
    Validate {
        #[arg(required = true)]
        scripts: Vec<PathBuf>,
    },
    /// Run a script against a simulated scene and write per-tick telemetry.
    Simulate(SimulateArgs),
    /// Run a script against a recorded detection stream.
    Replay(ReplayArgs),
    /// Compare tracker variants over many seeds and write a CSV table.
    Ablate(AblateArgs),
    /// Relay-tune the rate loop on the simulated gimbal and print PID gains.
    Tune(TuneArgs),
}

#[derive(Args)]
struct TrackerFlags {
    /// Accept a lost actor's first match (no recovery phase).
    #[arg(long)]
    no_recovery: bool,
    /// Store encodings even when other detections compete for the actor.
    #[arg(long)]
    faulty_encodings: bool,
    /// Store every encoding, near-duplicates included.
    #[arg(long)]
    greedy_encodings: bool,
    /// Keep only the most recent encodings.
    #[arg(long)]
    simple_history: bool,
}

impl TrackerFlags {
    fn ablation(&self) -> Ablation {
        Ablation {
            no_recovery: self.no_recovery,
            faulty_encodings: self.faulty_encodings,
            greedy_encodings: self.greedy_encodings,
            simple_history: self.simple_history,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Full,
    BinaryWeights,
    StandardControl,
}

impl From<Variant> for ControlVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Full => ControlVariant::Full,
            Variant::BinaryWeights => ControlVariant::BinaryWeights,
            Variant::StandardControl => ControlVariant::StandardControl,
        }
    }
}

#[derive(Args)]
struct EngineFlags {
    /// Script file; repeat to load alternatives for `switch_script`. The
    /// first one starts active.
    #[arg(long = "script")]
    scripts: Vec<PathBuf>,
    /// Operator events as JSON lines: {"tick": 30, "kind": "speech_word", "word": "action"}.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Tick rate in Hz.
    #[arg(long, default_value_t = 60.0)]
    hz: f64,
    /// Control variant.
    #[arg(long, value_enum, default_value = "full")]
    variant: Variant,
    #[command(flatten)]
    tracker: TrackerFlags,
}

#[derive(Args)]
struct SimulateArgs {
    /// Preset name or scene JSON file.
    #[arg(long, default_value = "two_shot")]
    scene: String,
    /// Overrides the scene seed and the tracker seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for telemetry.jsonl.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Also write the simulated detections to detections.jsonl (input for `replay`).
    #[arg(long)]
    record_detections: bool,
    #[command(flatten)]
    engine: EngineFlags,
    /// Serve the session over WebSocket instead of running it headless.
    #[arg(long)]
    serve: bool,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Address to bind when serving.
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Broadcast telemetry on every n-th tick when serving.
    #[arg(long, default_value_t = 2)]
    throttle: u64,
    /// Directory with the built web UI, served at `/`.
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Start the served session paused.
    #[arg(long)]
    paused: bool,
}

#[derive(Args)]
struct ReplayArgs {
    /// Detection stream as JSON lines: {"tick", "bbox", "embedding", "truth_id"?}.
    #[arg(long)]
    detections: PathBuf,
    /// Tracker seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for telemetry.jsonl.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    engine: EngineFlags,
}

#[derive(Args)]
struct AblateArgs {
    /// Preset name or scene JSON file.
    #[arg(default_value = "standard_occlusion")]
    scene: String,
    /// Number of seeds.
    #[arg(long, default_value_t = 40)]
    seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 60.0)]
    hz: f64,
    /// Output directory for ablation.csv.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Add a wall-time column (makes the CSV non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct TuneArgs {
    /// Relay output magnitude, deg/s.
    #[arg(long, default_value_t = 10.0)]
    amplitude: f64,
    /// Scale applied to the Ziegler-Nichols gains.
    #[arg(long, default_value_t = 0.6)]
    relaxation: f64,
    /// Gimbal axis: 0 yaw, 1 pitch, 2 roll.
    #[arg(long, default_value_t = 0)]
    axis: usize,
    #[arg(long, default_value_t = 60.0)]
    hz: f64,
    /// Also write the result to this file.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

/// Exit code 1: bad input. Exit code 2: something failed while running.
enum Failure {
    Validation(String),
    Runtime(String),
}

type Outcome = Result<(), Failure>;

fn invalid(m: impl ToString) -> Failure {
    Failure::Validation(m.to_string())
}

fn runtime(m: impl ToString) -> Failure {
    Failure::Runtime(m.to_string())
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| runtime(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Validate { scripts } => validate(&scripts),
        Command::Simulate(a) => simulate(a),
        Command::Replay(a) => run_replay(a),
        Command::Ablate(a) => ablate(a),
        Command::Tune(a) => tune(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn validate(paths: &[PathBuf]) -> Outcome {
    let mut bad = 0;
    for p in paths {
        let text = fs::read_to_string(p).map_err(io_err(p))?;
        match parse_script(&text) {
            Ok(s) => println!("{}: ok ({} links)", p.display(), s.chain.len()),
            Err(e) => {
                bad += 1;
                eprintln!("{}: {}: {e}", p.display(), e.kind());
            }
        }
    }
    match bad {
        0 => Ok(()),
        n => Err(invalid(format!("{n} of {} scripts invalid", paths.len()))),
    }
}

fn load_scene(arg: &str) -> Result<SceneSpec, Failure> {
    if let Some(s) = scene_by_name(arg) {
        return Ok(s);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(invalid(format!("{arg:?} is neither a scene file nor a preset ({})", SCENE_NAMES.join(", "))));
    }
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    SceneSpec::from_json(&text).map_err(|e| invalid(format!("{arg}: {e}")))
}

fn load_scripts(paths: &[PathBuf]) -> Result<Vec<Script>, Failure> {
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            parse_script(&text).map_err(|e| invalid(format!("{}: {}: {e}", p.display(), e.kind())))
        })
        .collect()
}

/// Script used when a preset scene is simulated without `--script`.
fn preset_script(scene: &str) -> Option<Script> {
    Some(match scene {
        "standard_occlusion" => standard_two_shot_script(),
        "two_shot" => whip_script(3.0),
        "sway_walk" => centered_script(0.2),
        "imposter_pair" => centered_script(0.1),
        _ => return None,
    })
}

fn load_events(path: Option<&PathBuf>) -> Result<EventLog, Failure> {
    let Some(p) = path else { return Ok(EventLog::new()) };
    let file = File::open(p).map_err(io_err(p))?;
    read_event_log(BufReader::new(file)).map_err(|e| invalid(format!("{}: {e}", p.display())))
}

fn session_config(engine: &EngineFlags, seed: Option<u64>) -> Result<SessionConfig, Failure> {
    if !(engine.hz > 0.0 && engine.hz.is_finite()) {
        return Err(invalid("--hz must be positive"));
    }
    let mut cfg = SessionConfig { dt: 1.0 / engine.hz, seed, ..SessionConfig::default() };
    cfg.tracker.ablation = engine.tracker.ablation();
    cfg.engine.variant = engine.variant.into();
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).map_err(io_err(&path))?))
}

fn write_line<W: Write>(out: &mut W, value: &Telemetry) -> io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")
}

fn simulate(a: SimulateArgs) -> Outcome {
    let scene = load_scene(&a.scene)?;
    let scripts = if a.engine.scripts.is_empty() {
        let s = preset_script(&a.scene).ok_or_else(|| invalid("--script is required for scene files"))?;
        vec![s]
    } else {
        load_scripts(&a.engine.scripts)?
    };
    let events = load_events(a.engine.events.as_ref())?;
    let cfg = session_config(&a.engine, a.seed)?;
    let mut session = Session::new(scene, scripts, cfg).map_err(invalid)?;
    let telemetry_path = a.out.join("telemetry.jsonl");
    let mut telemetry = create(&a.out, "telemetry.jsonl")?;

    if a.serve {
        if !events.is_empty() {
            return Err(invalid("--events cannot be combined with --serve"));
        }
        let service = ServiceConfig {
            addr: SocketAddr::new(a.host, a.port),
            throttle: a.throttle,
            speed: 1.0,
            start_paused: a.paused,
            static_dir: a.static_dir,
        };
        let sink: Sink = Box::new(telemetry);
        return longtake_service::serve(session, service, Some(sink)).map_err(runtime);
    }

    let mut detections = if a.record_detections { Some(create(&a.out, "detections.jsonl")?) } else { None };
    let none = Vec::new();
    let werr = io_err(&telemetry_path);
    while !session.finished() {
        let tick = session.tick();
        let rec = session.step(events.get(&tick).unwrap_or(&none));
        write_line(&mut telemetry, &rec.output.telemetry).map_err(&werr)?;
        if let Some(d) = detections.as_mut() {
            write_records(d, tick, &rec.frame.detections).map_err(&werr)?;
        }
    }
    telemetry.flush().map_err(&werr)?;
    if let Some(d) = detections.as_mut() {
        d.flush().map_err(&werr)?;
    }
    let engine = session.engine();
    eprintln!(
        "{} ticks, script {} ended at link {} ({}); telemetry in {}",
        session.tick(),
        engine.script().name,
        engine.chain_index(),
        engine.behavior_id(),
        telemetry_path.display()
    );
    Ok(())
}

fn run_replay(a: ReplayArgs) -> Outcome {
    if a.engine.scripts.is_empty() {
        return Err(invalid("--script is required"));
    }
    let scripts = load_scripts(&a.engine.scripts)?;
    let events = load_events(a.engine.events.as_ref())?;
    let cfg = session_config(&a.engine, a.seed)?;
    let file = File::open(&a.detections).map_err(io_err(&a.detections))?;
    let stream = read_stream(BufReader::new(file)).map_err(|e| invalid(format!("{}: {e}", a.detections.display())))?;
    let path = a.out.join("telemetry.jsonl");
    let mut out = create(&a.out, "telemetry.jsonl")?;
    let mut failed: Option<io::Error> = None;
    replay(&stream, scripts, cfg, &events, |o| {
        if failed.is_none() {
            failed = write_line(&mut out, &o.telemetry).err();
        }
    })
    .map_err(invalid)?;
    if let Some(e) = failed {
        return Err(io_err(&path)(e));
    }
    out.flush().map_err(io_err(&path))?;
    eprintln!("{} ticks; telemetry in {}", stream.frames.len(), path.display());
    Ok(())
}

fn ablate(a: AblateArgs) -> Outcome {
    if a.seeds == 0 {
        return Err(invalid("--seeds must be at least 1"));
    }
    if !(a.hz > 0.0 && a.hz.is_finite()) {
        return Err(invalid("--hz must be positive"));
    }
    let scene = load_scene(&a.scene)?;
    let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();
    let base = longtake::tracker::TrackerConfig { dt: 1.0 / a.hz, ..Default::default() };
    let table = run_ablation_suite(&scene, &base, &seeds).map_err(invalid)?;
    let path = a.out.join("ablation.csv");
    let mut out = create(&a.out, "ablation.csv")?;
    out.write_all(table.to_csv(a.timing).as_bytes()).and_then(|_| out.flush()).map_err(io_err(&path))?;
    print!("{}", table.render());
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn tune(a: TuneArgs) -> Outcome {
    if a.axis > 2 {
        return Err(invalid("--axis must be 0, 1 or 2"));
    }
    if !(a.hz > 0.0 && a.hz.is_finite()) {
        return Err(invalid("--hz must be positive"));
    }
    let cfg = RelayConfig { amplitude: a.amplitude, dt: 1.0 / a.hz, ..RelayConfig::default() };
    let mut plant = GimbalAxis { plant: GimbalPlant::new(Default::default()), axis: a.axis };
    let relay = relay_tune(&mut plant, &cfg).map_err(invalid)?;
    let gains = tune_ziegler_nichols(relay.ku, relay.tu, a.relaxation).map_err(invalid)?;
    let report = serde_json::json!({
        "axis": a.axis,
        "relay": relay,
        "relaxation": a.relaxation,
        "gains": gains,
    });
    let text = serde_json::to_string_pretty(&report).expect("tune report serializes") + "\n";
    print!("{text}");
    if let Some(p) = a.out {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        fs::write(&p, text).map_err(io_err(&p))?;
    }
    Ok(())
}
