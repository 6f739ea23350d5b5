use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use distmon_core::epidemic::{self, AwarenessMode, EpidemicParams, EpidemicState};
use distmon_core::evaluation::{
    average_precision, generate_scenario, match_detections, pr_curve, ScenarioConfig,
};
use distmon_core::geometry::{BoundingBox, ScoredBox};
use distmon_core::pipeline::{
    run_to_writers, GroundTruthRecord, PipelineConfig, PipelineError,
};

/// Exit codes: 0 success, 1 runtime/I-O failure, 2 configuration error,
/// 3 input-format error.
const EXIT_RUNTIME: i32 = 1;
const EXIT_CONFIG: i32 = 2;
const EXIT_FORMAT: i32 = 3;

#[derive(Parser)]
#[command(
    name = "distmon",
    version,
    about = "Social-distance monitoring engine: tracks detected people, finds proximity groups, and reports violation statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Process a detection stream into reports, violation events, and overlay data
    Run(RunArgs),
    /// Generate a synthetic detection stream with matching ground truth
    Simulate(SimulateArgs),
    /// Score predictions against ground truth (precision, recall, AP)
    Evaluate(EvaluateArgs),
    /// Integrate the distancing-aware SIR model and emit the trajectory
    Epidemic(EpidemicArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Line-delimited detection records
    #[arg(long)]
    detections: PathBuf,
    /// TOML configuration file; omit to use built-in defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Frame report output (line-delimited JSON); overrides the config file
    #[arg(long)]
    report: Option<PathBuf>,
    /// Violation event log output; overrides the config file
    #[arg(long)]
    events: Option<PathBuf>,
    /// Overlay record output; overrides the config file
    #[arg(long)]
    overlay: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1920.0)]
    width: f64,
    #[arg(long, default_value_t = 1080.0)]
    height: f64,
    #[arg(long, default_value_t = 8)]
    people: usize,
    #[arg(long, default_value_t = 200)]
    frames: usize,
    /// Per-axis speed bound, pixels/frame
    #[arg(long, default_value_t = 4.0)]
    max_speed: f64,
    /// Gaussian noise std on detection coordinates, pixels
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Probability of dropping a true detection
    #[arg(long, default_value_t = 0.0)]
    miss_rate: f64,
    /// Expected false positives per frame
    #[arg(long, default_value_t = 0.0)]
    fp_rate: f64,
    #[arg(long, default_value_t = 8)]
    descriptor_dim: usize,
    /// Gaussian noise std per descriptor component
    #[arg(long, default_value_t = 0.0)]
    descriptor_noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the detection stream
    #[arg(long)]
    detections_out: PathBuf,
    /// Where to write the ground-truth records
    #[arg(long)]
    truth_out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Line-delimited detection records to score
    #[arg(long)]
    predictions: PathBuf,
    /// Line-delimited ground-truth records
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    iou_threshold: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum AwarenessArg {
    None,
    Long,
    Short,
}

impl From<AwarenessArg> for AwarenessMode {
    fn from(value: AwarenessArg) -> Self {
        match value {
            AwarenessArg::None => AwarenessMode::None,
            AwarenessArg::Long => AwarenessMode::LongTerm,
            AwarenessArg::Short => AwarenessMode::ShortTerm,
        }
    }
}

#[derive(Args)]
struct EpidemicArgs {
    /// Infection rate (1/time)
    #[arg(long)]
    beta: f64,
    /// Recovery rate (1/time)
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    population: f64,
    #[arg(long, default_value_t = 1.0)]
    initial_infected: f64,
    /// Awareness behavior exponent
    #[arg(long, default_value_t = 0.0)]
    k: f64,
    #[arg(long, value_enum, default_value_t = AwarenessArg::None)]
    awareness: AwarenessArg,
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
    #[arg(long, default_value_t = 4000)]
    steps: usize,
    /// Trajectory output; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Epidemic(args) => cmd_epidemic(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    if let Some(pipeline_err) = err.downcast_ref::<PipelineError>() {
        return match pipeline_err {
            PipelineError::Config(_) => EXIT_CONFIG,
            PipelineError::Format { .. } => EXIT_FORMAT,
            _ => EXIT_RUNTIME,
        };
    }
    if err
        .downcast_ref::<distmon_core::evaluation::EvaluationError>()
        .is_some()
    {
        return EXIT_CONFIG;
    }
    if let Some(epidemic_err) = err.downcast_ref::<epidemic::EpidemicError>() {
        return match epidemic_err {
            epidemic::EpidemicError::Unstable { .. } => EXIT_RUNTIME,
            _ => EXIT_CONFIG,
        };
    }
    EXIT_RUNTIME
}

fn open_input(path: &Path) -> Result<BufReader<File>, PipelineError> {
    // an unreadable source is an input error, not a generic I/O failure
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| PipelineError::Format {
            line: 0,
            reason: format!("cannot open {}: {e}", path.display()),
        })
}

fn create_output(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let config = match &args.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };

    let report_path = args
        .report
        .or_else(|| config.output.report_path.clone())
        .ok_or_else(|| {
            PipelineError::Config("no report output path given (--report or [output])".into())
        })?;
    let events_path = args
        .events
        .or_else(|| config.output.events_path.clone())
        .ok_or_else(|| {
            PipelineError::Config("no event-log output path given (--events or [output])".into())
        })?;
    let overlay_path = args.overlay.or_else(|| config.output.overlay_path.clone());

    let source = open_input(&args.detections)?;
    let mut report_writer = create_output(&report_path)?;
    let mut events_writer = create_output(&events_path)?;
    let mut overlay_writer = match &overlay_path {
        Some(path) => Some(create_output(path)?),
        None => None,
    };

    let summary = run_to_writers(
        &config,
        source,
        &mut report_writer,
        &mut events_writer,
        overlay_writer.as_mut(),
    )?;
    report_writer.flush()?;
    events_writer.flush()?;
    if let Some(w) = overlay_writer.as_mut() {
        w.flush()?;
    }

    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let config = ScenarioConfig {
        frame_width: args.width,
        frame_height: args.height,
        person_count: args.people,
        frame_count: args.frames,
        max_speed: args.max_speed,
        detection_noise_std: args.noise,
        miss_rate: args.miss_rate,
        false_positive_rate: args.fp_rate,
        descriptor_dim: args.descriptor_dim,
        descriptor_noise_std: args.descriptor_noise,
        seed: args.seed,
    };
    let scenario = generate_scenario(&config)?;

    let mut detections = create_output(&args.detections_out)?;
    for record in &scenario.detections {
        serde_json::to_writer(&mut detections, record)?;
        detections.write_all(b"\n")?;
    }
    detections.flush()?;

    let mut truth = create_output(&args.truth_out)?;
    for record in scenario.truth_records() {
        serde_json::to_writer(&mut truth, &record)?;
        truth.write_all(b"\n")?;
    }
    truth.flush()?;

    eprintln!(
        "wrote {} detections over {} frames ({} identities)",
        scenario.detections.len(),
        config.frame_count,
        config.person_count
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    if !(args.iou_threshold > 0.0 && args.iou_threshold < 1.0) {
        bail!(PipelineError::Config(format!(
            "iou_threshold {} outside (0, 1)",
            args.iou_threshold
        )));
    }

    let mut frames: std::collections::BTreeMap<u64, (Vec<ScoredBox>, Vec<BoundingBox>)> =
        std::collections::BTreeMap::new();

    let predictions = open_input(&args.predictions)?;
    for batch in distmon_core::pipeline::parse_stream(predictions) {
        let batch = batch?;
        let entry = frames.entry(batch.frame_id).or_default();
        for record in &batch.records {
            entry.0.push(ScoredBox {
                bbox: record.bbox(),
                score: record.confidence,
            });
        }
    }

    let truth_reader = open_input(&args.truth)?;
    for (line_number, line) in truth_reader.lines().enumerate() {
        let line = line.map_err(PipelineError::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let record: GroundTruthRecord =
            serde_json::from_str(&line).map_err(|e| PipelineError::Format {
                line: line_number + 1,
                reason: format!("bad ground-truth record: {e}"),
            })?;
        frames.entry(record.frame_id).or_default().1.push(record.bbox());
    }

    let frame_list: Vec<(Vec<ScoredBox>, Vec<BoundingBox>)> = frames.into_values().collect();
    let mut true_positives = 0usize;
    let mut false_positives = 0usize;
    let mut false_negatives = 0usize;
    for (predictions, truth) in &frame_list {
        let counts = match_detections(predictions, truth, args.iou_threshold);
        true_positives += counts.true_positives;
        false_positives += counts.false_positives;
        false_negatives += counts.false_negatives;
    }

    let curve = pr_curve(&frame_list, args.iou_threshold);
    let ap = average_precision(&curve);
    let precision = ratio(true_positives, true_positives + false_positives);
    let recall = ratio(true_positives, true_positives + false_negatives);

    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "iou_threshold": args.iou_threshold,
            "true_positives": true_positives,
            "false_positives": false_positives,
            "false_negatives": false_negatives,
            "precision": precision,
            "recall": recall,
            "average_precision": ap,
            // single "person" class: the mean over classes degenerates to AP
            "mean_average_precision": ap,
        }))?
    );
    Ok(())
}

fn ratio(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

fn cmd_epidemic(args: EpidemicArgs) -> Result<()> {
    let params = EpidemicParams::new(
        args.beta,
        args.delta,
        args.population,
        args.k,
        args.awareness.into(),
    )?;
    if args.initial_infected < 0.0 || args.initial_infected > args.population {
        bail!(PipelineError::Config(format!(
            "initial_infected {} outside [0, population]",
            args.initial_infected
        )));
    }
    let initial = EpidemicState {
        susceptible: args.population - args.initial_infected,
        infected: args.initial_infected,
        recovered: 0.0,
        time: 0.0,
    };
    let trajectory = epidemic::integrate(&initial, &params, args.dt, args.steps)?;

    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create_output(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    for state in &trajectory {
        let a = epidemic::awareness(state, &params);
        serde_json::to_writer(
            &mut out,
            &serde_json::json!({
                "t": state.time,
                "susceptible": state.susceptible,
                "infected": state.infected,
                "recovered": state.recovered,
                "awareness": a,
            }),
        )?;
        out.write_all(b"\n")?;
    }
    out.flush()?;

    if let Some((peak, at)) = epidemic::peak_infected(&trajectory) {
        eprintln!("peak infected {peak:.2} at t = {at:.2}");
    }
    Ok(())
}
