//! Command-line front end: dataset synthesis, adversarial amplification,
//! dataset validation, predictor training, depth-mask encoding, stream
//! recognition and the accuracy sweep experiments.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or model error.

use gesture_forge::channels::{ChannelKind, ObservedDelta};
use gesture_forge::codec::normalize_stream_with_coverage;
use gesture_forge::datagen::gan::{gan_sample, gan_train, GanModel, GanTrainConfig};
use gesture_forge::datagen::registry::{all_templates, synth_gesture, PALM_CENTER};
use gesture_forge::datagen::validate::validate_dataset;
use gesture_forge::datagen::{
    read_samples_csv, read_stream_csv, synth_sample_set, write_samples_csv, write_stream_csv,
    NoiseSpec, Sample, SampleSet,
};
use gesture_forge::depth::{
    baseline_from, encode_frame, fit_skeleton, gravity_center, segment_prospects,
};
use gesture_forge::gesture::{Gesture, ALL_GESTURES};
use gesture_forge::hand::{delta_sequence, frame_delta};
use gesture_forge::predictor::{train_predictor, PredictorConfig, PredictorModel};
use gesture_forge::recognizer::{FrameBuffer, Matcher};
use gesture_forge::sweep::{
    run_accuracy, Condition, Models, Pipeline, RunConfig, StrategyChoice,
    ALIGNMENT_COVERAGE_THRESHOLD,
};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::process::ExitCode;

const USAGE: &str = "\
gesture-forge <command> [options]

commands:
  synth            --gesture <name>|--all [--n 50] [--m 30] [--jitter <amp>]
                   [--seed <u64>] --out <csv>
  gan-train        --input <csv> --mode vector|angle [--epochs 50] [--lr 0.001]
                   [--hidden 32] [--batch 8] [--noise <amp>] [--seed <u64>] --out <json>
  gan-gen          --model <json> --seeds <csv> [--n 5000] [--noise <amp>]
                   [--seed <u64>] --out <csv>
  validate         --input <csv> --mode vector|angle --out <csv> [--report <csv>]
  gru-train        --input <csv> [--epochs 60] [--lr 0.05] [--hidden 16]
                   [--seed <u64>] --out <json>
  encode-depth     --gesture <name> [--m 30] [--start-frame 0] --elbow <x,y>
                   --threshold <gray> --out <csv> <mask.pgm>...
  recognize        --stream <csv> [--m 30] [--normalize] [--infill --model <json>]
                   [--strategy coordinate|angle|joint] [--out <json>]
  sweep-frames     [--trials 100] [--from 21] [--to 35] [--noise-vector 0.1]
                   [--noise-angle 0.5] [--gestures a,b,..] [--normalize] [--seed <u64>]
                   [--strategy joint] --out <csv>
  sweep-occlusion  [--trials 100] [--from 0] [--to 15] [--noise-vector 1]
                   [--noise-angle 5] [--gesture push] [--model <json>] [--seed <u64>]
                   [--strategy joint] --out <csv>

The GESTURE_FORGE_SEED environment variable overrides --seed.
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some((command, rest)) = args.split_first() else {
        eprint!("{USAGE}");
        return ExitCode::from(1);
    };
    let opts = match Options::parse(rest) {
        Ok(opts) => opts,
        Err(e) => {
            eprintln!("error: {e}");
            eprint!("{USAGE}");
            return ExitCode::from(1);
        }
    };
    let result = match command.as_str() {
        "synth" => cmd_synth(&opts),
        "gan-train" => cmd_gan_train(&opts),
        "gan-gen" => cmd_gan_gen(&opts),
        "validate" => cmd_validate(&opts),
        "gru-train" => cmd_gru_train(&opts),
        "encode-depth" => cmd_encode_depth(&opts),
        "recognize" => cmd_recognize(&opts),
        "sweep-frames" => cmd_sweep_frames(&opts),
        "sweep-occlusion" => cmd_sweep_occlusion(&opts),
        other => {
            eprintln!("error: unknown command {other:?}");
            eprint!("{USAGE}");
            return ExitCode::from(1);
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprint!("{USAGE}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }

    fn data(msg: impl std::fmt::Display) -> CliError {
        CliError::Data(msg.to_string())
    }
}

struct Options {
    flags: Vec<(String, Option<String>)>,
    positional: Vec<String>,
}

/// Boolean switches that never take a value.
const SWITCHES: [&str; 4] = ["--all", "--normalize", "--infill", "--raw"];

impl Options {
    fn parse(args: &[String]) -> Result<Options, String> {
        let mut flags = Vec::new();
        let mut positional = Vec::new();
        let mut iter = args.iter().peekable();
        while let Some(arg) = iter.next() {
            if let Some(name) = arg.strip_prefix("--") {
                if SWITCHES.contains(&arg.as_str()) {
                    flags.push((name.to_string(), None));
                } else {
                    let value = iter
                        .next()
                        .ok_or_else(|| format!("flag --{name} needs a value"))?;
                    flags.push((name.to_string(), Some(value.clone())));
                }
            } else {
                positional.push(arg.clone());
            }
        }
        Ok(Options { flags, positional })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.flags
            .iter()
            .find(|(n, _)| n == name)
            .and_then(|(_, v)| v.as_deref())
    }

    fn has(&self, name: &str) -> bool {
        self.flags.iter().any(|(n, _)| n == name)
    }

    fn required(&self, name: &str) -> Result<&str, CliError> {
        self.get(name)
            .ok_or_else(|| CliError::usage(format!("--{name} is required")))
    }

    fn parsed<T: std::str::FromStr>(&self, name: &str, default: T) -> Result<T, CliError> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::usage(format!("bad value for --{name}: {v:?}"))),
        }
    }

    /// Seed resolution: GESTURE_FORGE_SEED wins over --seed, default 0.
    fn seed(&self) -> Result<u64, CliError> {
        if let Ok(env) = std::env::var("GESTURE_FORGE_SEED") {
            return env
                .parse()
                .map_err(|_| CliError::usage(format!("bad GESTURE_FORGE_SEED: {env:?}")));
        }
        self.parsed("seed", 0u64)
    }

    fn mode(&self) -> Result<ChannelKind, CliError> {
        match self.required("mode")? {
            "vector" => Ok(ChannelKind::Vector),
            "angle" => Ok(ChannelKind::Angle),
            other => Err(CliError::usage(format!("bad --mode {other:?}"))),
        }
    }

    fn strategy(&self) -> Result<StrategyChoice, CliError> {
        match self.get("strategy").unwrap_or("joint") {
            "coordinate" => Ok(StrategyChoice::Coordinate),
            "angle" => Ok(StrategyChoice::Angle),
            "joint" => Ok(StrategyChoice::Joint),
            other => Err(CliError::usage(format!("bad --strategy {other:?}"))),
        }
    }

    fn gesture(&self, name: &str) -> Result<Gesture, CliError> {
        let value = self.required(name)?;
        Gesture::from_name(value)
            .ok_or_else(|| CliError::usage(format!("unknown gesture {value:?}")))
    }
}

fn create(path: &str) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::data(format!("cannot write {path}: {e}")))
}

fn open(path: &str) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::data(format!("cannot read {path}: {e}")))
}

fn load_samples(opts: &Options, flag: &str, mode: ChannelKind) -> Result<SampleSet, CliError> {
    let path = opts.required(flag)?;
    read_samples_csv(open(path)?, mode).map_err(CliError::data)
}

fn noise_spec(opts: &Options, mode: ChannelKind) -> Result<NoiseSpec, CliError> {
    let default = match mode {
        ChannelKind::Vector => NoiseSpec::vector_default(),
        ChannelKind::Angle => NoiseSpec::angle_default(),
    };
    match opts.get("noise") {
        None => Ok(default),
        Some(v) => {
            let amp: f64 = v
                .parse()
                .map_err(|_| CliError::usage(format!("bad --noise {v:?}")))?;
            NoiseSpec::new(amp).map_err(CliError::data)
        }
    }
}

fn cmd_synth(opts: &Options) -> Result<(), CliError> {
    let m: usize = opts.parsed("m", 30)?;
    let n: usize = opts.parsed("n", 50)?;
    let jitter = match opts.parsed("jitter", 0.0f64)? {
        a if a > 0.0 => Some(NoiseSpec::new(a).map_err(CliError::data)?),
        _ => None,
    };
    let seed = opts.seed()?;
    let set = if opts.has("all") {
        synth_sample_set(ChannelKind::Vector, m, n, jitter.as_ref(), seed)
    } else {
        let gesture = opts.gesture("gesture")?;
        let mut set = SampleSet::new(ChannelKind::Vector, m);
        let mut rng = rand_chacha_seed(seed);
        for _ in 0..n {
            use rand::Rng;
            let frames =
                synth_gesture(gesture, m, rng.random(), jitter.as_ref()).map_err(CliError::data)?;
            set.push(Sample {
                label: gesture,
                frames: delta_sequence(&frames),
            })
            .map_err(CliError::data)?;
        }
        set
    };
    let mut out = create(opts.required("out")?)?;
    write_samples_csv(&mut out, &set).map_err(CliError::data)?;
    Ok(())
}

fn rand_chacha_seed(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

fn cmd_gan_train(opts: &Options) -> Result<(), CliError> {
    let mode = opts.mode()?;
    let seeds = load_samples(opts, "input", mode)?;
    let spec = noise_spec(opts, mode)?;
    let config = GanTrainConfig {
        epochs: opts.parsed("epochs", 50)?,
        lr: opts.parsed("lr", 1e-3)?,
        hidden: opts.parsed("hidden", 32)?,
        batch_size: opts.parsed("batch", 8)?,
        rng_seed: opts.seed()?,
    };
    let model = gan_train(&seeds, &spec, &config).map_err(CliError::data)?;
    let mut out = create(opts.required("out")?)?;
    serde_json::to_writer_pretty(&mut out, &model).map_err(CliError::data)?;
    out.write_all(b"\n").map_err(CliError::data)?;
    Ok(())
}

fn cmd_gan_gen(opts: &Options) -> Result<(), CliError> {
    let model: GanModel =
        serde_json::from_reader(open(opts.required("model")?)?).map_err(CliError::data)?;
    let seeds = load_samples(opts, "seeds", model.mode)?;
    let spec = noise_spec(opts, model.mode)?;
    let n: usize = opts.parsed("n", 5000)?;
    let generated = gan_sample(&model, &seeds, &spec, n, opts.seed()?).map_err(CliError::data)?;
    let mut out = create(opts.required("out")?)?;
    write_samples_csv(&mut out, &generated).map_err(CliError::data)?;
    Ok(())
}

fn cmd_validate(opts: &Options) -> Result<(), CliError> {
    let mode = opts.mode()?;
    let set = load_samples(opts, "input", mode)?;
    let (validated, report) = validate_dataset(&set).map_err(CliError::data)?;
    let mut out = create(opts.required("out")?)?;
    write_samples_csv(&mut out, &validated).map_err(CliError::data)?;
    if let Some(path) = opts.get("report") {
        let mut rep = create(path)?;
        writeln!(rep, "gesture,relabeled_away,relabeled_to").map_err(CliError::data)?;
        let from = report.counts_from();
        let to = report.counts_to();
        for g in ALL_GESTURES {
            writeln!(rep, "{},{},{}", g, from[g.ordinal()], to[g.ordinal()])
                .map_err(CliError::data)?;
        }
    }
    eprintln!("relabeled {} of {} samples", report.total(), set.len());
    Ok(())
}

fn cmd_gru_train(opts: &Options) -> Result<(), CliError> {
    let set = load_samples(opts, "input", ChannelKind::Vector)?;
    let config = PredictorConfig {
        lr: opts.parsed("lr", 0.05)?,
        epochs: opts.parsed("epochs", 60)?,
        hidden: opts.parsed("hidden", 16)?,
        rng_seed: opts.seed()?,
    };
    let model = train_predictor(&set, &config).map_err(CliError::data)?;
    let mut out = create(opts.required("out")?)?;
    serde_json::to_writer(&mut out, &model).map_err(CliError::data)?;
    out.write_all(b"\n").map_err(CliError::data)?;
    Ok(())
}

fn cmd_encode_depth(opts: &Options) -> Result<(), CliError> {
    if opts.positional.is_empty() {
        return Err(CliError::usage("encode-depth needs at least one PGM path"));
    }
    let gesture = opts.gesture("gesture")?;
    let m: usize = opts.parsed("m", 30)?;
    let start_frame: usize = opts.parsed("start-frame", 0)?;
    let elbow_arg = opts.required("elbow")?;
    let elbow: Vec<f64> = elbow_arg
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::usage(format!("bad --elbow {elbow_arg:?}; expected x,y")))?;
    if elbow.len() != 2 {
        return Err(CliError::usage("--elbow expects x,y"));
    }
    let threshold: u16 = opts.parsed("threshold", 1u16)?;

    let pose_frames = synth_gesture(gesture, m, 0, None).map_err(CliError::data)?;
    let mut encoded = Vec::new();
    for (i, path) in opts.positional.iter().enumerate() {
        let mask = gesture_forge::pgm::read_pgm(open(path)?).map_err(CliError::data)?;
        let center = gravity_center(&mask).map_err(CliError::data)?;
        let baseline = baseline_from([center.0 as f64, center.1 as f64], [elbow[0], elbow[1]])
            .map_err(CliError::data)?;
        let frame_idx = (start_frame + i).min(m - 1);
        let skeleton = fit_skeleton(
            &pose_frames[frame_idx],
            &baseline,
            [PALM_CENTER.x, PALM_CENTER.y],
        );
        let regions = segment_prospects(&mask, threshold);
        let frame = encode_frame(&regions, &baseline, &skeleton, (start_frame + i) as u64)
            .map_err(CliError::data)?;
        encoded.push(frame);
    }

    // Consecutive encoded frames become delta rows; the first frame is its
    // own reference.
    let mut stream = Vec::with_capacity(encoded.len());
    for (i, frame) in encoded.iter().enumerate() {
        let delta = if i == 0 {
            gesture_forge::DeltaFrame::ZERO
        } else {
            frame_delta(frame, &encoded[i - 1])
        };
        stream.push(ObservedDelta::new(&delta, *frame.confidences()));
    }
    let mut out = create(opts.required("out")?)?;
    write_stream_csv(&mut out, &stream, gesture.name()).map_err(CliError::data)?;
    Ok(())
}

fn cmd_recognize(opts: &Options) -> Result<(), CliError> {
    let m: usize = opts.parsed("m", 30)?;
    let stream = read_stream_csv(open(opts.required("stream")?)?).map_err(CliError::data)?;
    if stream.is_empty() {
        return Err(CliError::data("stream holds no frames"));
    }
    let mut frames = stream;
    if opts.has("infill") {
        let model_path = opts
            .get("model")
            .ok_or_else(|| CliError::usage("--infill needs --model"))?;
        let model: PredictorModel =
            serde_json::from_reader(open(model_path)?).map_err(CliError::data)?;
        model.infill_sequence(&mut frames);
    }
    let templates = all_templates(m);
    let matcher = Matcher::new(&templates);
    let mut raw = FrameBuffer::new(m);
    raw.extend(frames.iter().cloned());

    let result = if opts.has("normalize") {
        let mut aligned = Vec::new();
        let mut use_aligned = Vec::new();
        for template in &templates {
            let normalized = normalize_stream_with_coverage(&frames, template);
            let mut buffer = FrameBuffer::new(m);
            buffer.extend(normalized.frames);
            use_aligned.push([
                normalized.coverage[0] >= ALIGNMENT_COVERAGE_THRESHOLD,
                normalized.coverage[1] >= ALIGNMENT_COVERAGE_THRESHOLD,
            ]);
            aligned.push(buffer);
        }
        matcher.recognize_aligned(&raw, &aligned, &use_aligned)
    } else {
        matcher.recognize(&raw)
    }
    .map_err(CliError::data)?;

    let json = serde_json::to_string_pretty(&result).map_err(CliError::data)?;
    match opts.get("out") {
        Some(path) => {
            let mut out = create(path)?;
            out.write_all(json.as_bytes()).map_err(CliError::data)?;
            out.write_all(b"\n").map_err(CliError::data)?;
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn sweep_config(opts: &Options) -> Result<RunConfig, CliError> {
    Ok(RunConfig {
        m: opts.parsed("m", 30)?,
        trials: opts.parsed("trials", 100)?,
        noise_vector: opts.parsed("noise-vector", -1.0)?,
        noise_angle: opts.parsed("noise-angle", -1.0)?,
        rng_seed: opts.seed()?,
        ..RunConfig::default()
    })
}

fn parse_gestures(opts: &Options) -> Result<Vec<Gesture>, CliError> {
    match opts.get("gestures") {
        None => Ok(vec![Gesture::Push, Gesture::Hold, Gesture::RotateLeft]),
        Some(list) => list
            .split(',')
            .map(|name| {
                Gesture::from_name(name.trim())
                    .ok_or_else(|| CliError::usage(format!("unknown gesture {name:?}")))
            })
            .collect(),
    }
}

fn cmd_sweep_frames(opts: &Options) -> Result<(), CliError> {
    let mut config = sweep_config(opts)?;
    if config.noise_vector < 0.0 {
        config.noise_vector = 0.1;
    }
    if config.noise_angle < 0.0 {
        config.noise_angle = 0.5;
    }
    let from: usize = opts.parsed("from", 21)?;
    let to: usize = opts.parsed("to", 35)?;
    config.frame_range = (from, to);
    let pipeline = Pipeline {
        normalize: opts.has("normalize"),
        infill: false,
        strategy: opts.strategy()?,
    };
    let gestures = parse_gestures(opts)?;
    let conditions: Vec<Condition> = (from..=to).map(Condition::Frames).collect();
    let models = Models::templates_only(config.m);
    let report = run_accuracy(&config, &pipeline, &models, &conditions, &gestures)
        .map_err(CliError::data)?;
    let mut out = create(opts.required("out")?)?;
    report.write_csv(&mut out).map_err(CliError::data)?;
    Ok(())
}

fn cmd_sweep_occlusion(opts: &Options) -> Result<(), CliError> {
    let mut config = sweep_config(opts)?;
    if config.noise_vector < 0.0 {
        config.noise_vector = 1.0;
    }
    if config.noise_angle < 0.0 {
        config.noise_angle = 5.0;
    }
    let from: usize = opts.parsed("from", 0)?;
    let to: usize = opts.parsed("to", 15)?;
    let gesture = match opts.get("gesture") {
        None => Gesture::Push,
        Some(name) => Gesture::from_name(name)
            .ok_or_else(|| CliError::usage(format!("unknown gesture {name:?}")))?,
    };
    let predictor = match opts.get("model") {
        Some(path) => Some(serde_json::from_reader(open(path)?).map_err(CliError::data)?),
        None => None,
    };
    let pipeline = Pipeline {
        normalize: !opts.has("raw"),
        infill: predictor.is_some(),
        strategy: opts.strategy()?,
    };
    let conditions: Vec<Condition> = (from..=to).map(Condition::Occlusion).collect();
    let models = Models {
        templates: all_templates(config.m),
        predictor,
    };
    let report = run_accuracy(&config, &pipeline, &models, &conditions, &[gesture])
        .map_err(CliError::data)?;
    let mut out = create(opts.required("out")?)?;
    report.write_csv(&mut out).map_err(CliError::data)?;
    Ok(())
}
