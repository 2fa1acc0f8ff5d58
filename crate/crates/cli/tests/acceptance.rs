//! CLI acceptance: every randomized command emits byte-identical output for
//! a fixed seed across two consecutive runs, exit codes follow the contract,
//! and the PGM-to-recognition surface works end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_gesture-forge")
}

fn workdir(name: &str) -> PathBuf {
    let dir =
        std::env::temp_dir().join(format!("gesture-forge-test-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("GESTURE_FORGE_SEED")
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"))
}

/// Runs a command twice into different output files and demands identical
/// bytes.
fn assert_reproducible(name: &str, dir: &Path, args: Vec<String>, out_flag: &str) {
    let first = dir.join(format!("{name}-a.out"));
    let second = dir.join(format!("{name}-b.out"));
    let run_with = |path: &Path| {
        let mut full = args.clone();
        full.push(out_flag.to_string());
        full.push(path.to_string_lossy().into_owned());
        let refs: Vec<&str> = full.iter().map(|s| s.as_str()).collect();
        run_ok(&refs);
    };
    run_with(&first);
    run_with(&second);
    assert_eq!(
        read(&first),
        read(&second),
        "{name}: outputs differ between identical runs"
    );
}

#[test]
fn criterion_10_randomized_commands_are_reproducible() {
    let dir = workdir("repro");
    let seeds = dir.join("seeds.csv");

    run_ok(&[
        "synth",
        "--all",
        "--n",
        "3",
        "--jitter",
        "0.05",
        "--seed",
        "5",
        "--out",
        seeds.to_str().unwrap(),
    ]);

    let s = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    assert_reproducible(
        "synth",
        &dir,
        s(&[
            "synth", "--all", "--n", "3", "--jitter", "0.05", "--seed", "5",
        ]),
        "--out",
    );
    assert_reproducible(
        "gan-train",
        &dir,
        s(&[
            "gan-train",
            "--input",
            seeds.to_str().unwrap(),
            "--mode",
            "angle",
            "--epochs",
            "2",
            "--hidden",
            "4",
            "--batch",
            "4",
            "--seed",
            "9",
        ]),
        "--out",
    );
    // A trained model for gan-gen.
    let gan = dir.join("gan.json");
    run_ok(&[
        "gan-train",
        "--input",
        seeds.to_str().unwrap(),
        "--mode",
        "angle",
        "--epochs",
        "2",
        "--hidden",
        "4",
        "--batch",
        "4",
        "--seed",
        "9",
        "--out",
        gan.to_str().unwrap(),
    ]);
    assert_reproducible(
        "gan-gen",
        &dir,
        s(&[
            "gan-gen",
            "--model",
            gan.to_str().unwrap(),
            "--seeds",
            seeds.to_str().unwrap(),
            "--n",
            "6",
            "--seed",
            "3",
        ]),
        "--out",
    );
    assert_reproducible(
        "gru-train",
        &dir,
        s(&[
            "gru-train",
            "--input",
            seeds.to_str().unwrap(),
            "--epochs",
            "2",
            "--hidden",
            "3",
            "--seed",
            "2",
        ]),
        "--out",
    );
    assert_reproducible(
        "sweep-frames",
        &dir,
        s(&[
            "sweep-frames",
            "--trials",
            "2",
            "--from",
            "29",
            "--to",
            "31",
            "--seed",
            "4",
            "--normalize",
        ]),
        "--out",
    );
    assert_reproducible(
        "sweep-occlusion",
        &dir,
        s(&[
            "sweep-occlusion",
            "--trials",
            "2",
            "--from",
            "0",
            "--to",
            "2",
            "--seed",
            "4",
        ]),
        "--out",
    );
    println!(
        "[acceptance] criterion 10 (reproducibility): PASS (6 randomized commands byte-identical)"
    );
}

#[test]
fn seed_env_var_overrides_flag() {
    let dir = workdir("env");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    run_ok(&[
        "synth",
        "--all",
        "--n",
        "2",
        "--jitter",
        "0.1",
        "--seed",
        "1",
        "--out",
        a.to_str().unwrap(),
    ]);
    let out = Command::new(bin())
        .args([
            "synth",
            "--all",
            "--n",
            "2",
            "--jitter",
            "0.1",
            "--seed",
            "999",
            "--out",
            b.to_str().unwrap(),
        ])
        .env("GESTURE_FORGE_SEED", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(read(&a), read(&b), "env seed should override --seed");
}

#[test]
fn exit_codes_follow_the_contract() {
    // Unknown subcommand: usage error, code 1, usage on stderr.
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gesture-forge <command>"));

    // Missing required flag: code 1.
    let out = run(&["synth", "--all"]);
    assert_eq!(out.status.code(), Some(1));

    // Unreadable data: code 2.
    let out = run(&[
        "gan-train",
        "--input",
        "/nonexistent.csv",
        "--mode",
        "angle",
        "--out",
        "/tmp/x.json",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown gesture name: code 1.
    let out = run(&[
        "synth",
        "--gesture",
        "wave",
        "--n",
        "1",
        "--out",
        "/tmp/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn synth_emits_one_row_per_frame() {
    let dir = workdir("rows");
    let out = dir.join("push50.csv");
    run_ok(&[
        "synth",
        "--gesture",
        "push",
        "--n",
        "50",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    // Header plus 50 samples x 30 frames.
    assert_eq!(text.lines().count(), 1 + 50 * 30);
}

#[test]
fn recognize_names_a_self_template_stream() {
    let dir = workdir("recognize");
    let stream = dir.join("stream.csv");
    run_ok(&[
        "synth",
        "--gesture",
        "swipe-up",
        "--n",
        "1",
        "--seed",
        "0",
        "--out",
        stream.to_str().unwrap(),
    ]);
    let out = run(&[
        "recognize",
        "--stream",
        stream.to_str().unwrap(),
        "--normalize",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["gesture"], "swipe-up");
    assert_eq!(json["table"].as_array().unwrap().len(), 11);
}

#[test]
fn encode_depth_reads_pgm_and_emits_a_recognizable_stream() {
    use gesture_forge::datagen::registry::{synth_gesture, PALM_CENTER};
    use gesture_forge::depth::rasterize_hand;
    use gesture_forge::hand::{KeypointId, Vec3, KEYPOINT_COUNT};
    use gesture_forge::Gesture;

    let dir = workdir("depth");
    let m = 30;
    let scale = 40.0;
    let offset = [160.0, 200.0];
    let poses = synth_gesture(Gesture::Click, m, 0, None).unwrap();
    let mut mask_paths = Vec::new();
    for (t, pose) in poses.iter().enumerate() {
        let mut skeleton = [[0.0f64; 2]; KEYPOINT_COUNT];
        let mut depths = [200u16; KEYPOINT_COUNT];
        for kp in KeypointId::all() {
            let v = pose.vector(kp).unwrap_or(Vec3::ZERO);
            skeleton[kp.ordinal()] = [offset[0] + scale * v.x, offset[1] + scale * v.y];
            depths[kp.ordinal()] = (200.0 + scale * v.z) as u16;
        }
        let palm = [
            offset[0] + scale * PALM_CENTER.x,
            offset[1] + scale * PALM_CENTER.y,
        ];
        let mask = rasterize_hand(&skeleton, palm, 320, 320, 2.5, 11.0, &depths, 150, &[]);
        let path = dir.join(format!("frame{t:02}.pgm"));
        let mut file = std::fs::File::create(&path).unwrap();
        gesture_forge::pgm::write_pgm(&mut file, &mask, t % 2 == 0).unwrap();
        mask_paths.push(path);
    }

    let stream = dir.join("depth-stream.csv");
    let elbow = format!("{},{}", offset[0], offset[1]);
    let mut args = vec![
        "encode-depth".to_string(),
        "--gesture".into(),
        "click".into(),
        "--elbow".into(),
        elbow,
        "--threshold".into(),
        "180".into(),
        "--out".into(),
        stream.to_string_lossy().into_owned(),
    ];
    args.extend(mask_paths.iter().map(|p| p.to_string_lossy().into_owned()));
    let refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    run_ok(&refs);

    let out = run(&["recognize", "--stream", stream.to_str().unwrap()]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["gesture"], "click");
}
