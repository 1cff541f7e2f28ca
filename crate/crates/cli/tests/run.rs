use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ajja::config::RunConfig;
use ajja::output::{verify_csv, verify_json, Tamper};
use serde_json::Value;

fn ajja(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ajja"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("AJJA_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) {
    let o = ajja(args, out);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .to_string()
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn error_record(o: &Output) -> Value {
    let line = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(line.trim()).unwrap_or_else(|_| panic!("not a JSON record: {line}"))
}

#[test]
fn spectrum_default_reproduces_the_qubit_gap() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["spectrum"], dir.path());
    let doc = json(&dir.path().join("spectrum.json"));
    assert_eq!(doc["schema_version"], 1);
    let w = doc["summary"]["omega_q_U0"].as_f64().unwrap();
    assert!((w - 2.55).abs() <= 0.2 * 2.55, "omega_q = {w}");
    let w_hz = doc["summary"]["omega_q_hz"].as_f64().unwrap();
    assert!((w_hz - 550.0 * w).abs() < 1e-9 * w_hz);

    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(body(&csv).len(), 82);
    assert!(csv.starts_with("# ajja "));
    assert!(csv.contains(&format!(
        "# config_sha256: {}",
        doc["config_sha256"].as_str().unwrap()
    )));
    assert!(csv.contains("# seed: 0\n"));
    let first: Vec<f64> = body(&csv)[1]
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(first[0], 0.48);
    assert_eq!(body(&csv)[81].split(',').next().unwrap(), "0.52");
}

#[test]
fn golden_column_headers() {
    let dir = tempfile::tempdir().unwrap();
    let small = [
        "--set",
        "n_atoms=6",
        "--set",
        "flux_points=3",
        "--set",
        "atom_list=6",
    ];
    ok(&[&["spectrum"], &small[..]].concat(), dir.path());
    assert_eq!(
        header(&dir.path().join("spectrum.csv")),
        "flux,E0_U0,E1_U0,E2_U0,E3_U0,E4_U0,E5_U0,E0_hz,E1_hz,E2_hz,E3_hz,E4_hz,E5_hz,\
         omega_q_U0,omega_q_hz,current0_U0,current1_U0"
    );
    assert_eq!(
        header(&dir.path().join("spectrum_atoms.csv")),
        "n_atoms,omega0_U0,flux,omega_q_U0,omega_q_hz"
    );
    ok(
        &["splitting", "--set", "n_atoms=6", "--set", "ratio_points=3"],
        dir.path(),
    );
    assert_eq!(
        header(&dir.path().join("splitting.csv")),
        "ratio,t0_U0,t0_hz"
    );
    ok(
        &[
            "loss",
            "--set",
            "n_atoms=6",
            "--set",
            "loss_atoms=6",
            "--set",
            "loss_flux_points=2",
        ],
        dir.path(),
    );
    assert_eq!(
        header(&dir.path().join("loss_single.csv")),
        "n_atoms,omega0_U0,gamma_ratio,first_term,second_term,theta,chi"
    );
    assert_eq!(
        header(&dir.path().join("loss_three_body.csv")),
        "n_atoms,base_rate_per_s,bracket,effective_rate_per_s,normalized"
    );
}

#[test]
fn gate_writes_window_matrix_and_durations() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "gate",
        "--target",
        "not",
        "--pulses",
        "12",
        "--set",
        "restarts=2",
        "--set",
        "max_evals=300",
        "--set",
        "gradient_iterations=20",
    ];
    ok(&args, dir.path());
    let doc = json(&dir.path().join("gate.json"));
    let m = &doc["matrices"]["window_unitary"];
    assert_eq!((m["rows"].as_u64(), m["cols"].as_u64()), (Some(6), Some(6)));
    let abs = m["abs"].as_array().unwrap();
    // a window of a unitary cannot gain norm
    for j in 0..6 {
        let norm: f64 = abs.iter().map(|r| r[j].as_f64().unwrap().powi(2)).sum();
        assert!(norm <= 1.0 + 1e-9 && norm > 0.5);
    }
    assert_eq!(doc["summary"]["durations_U0"].as_array().unwrap().len(), 12);

    let matrix = fs::read_to_string(dir.path().join("gate_matrix.csv")).unwrap();
    assert_eq!(
        body(&matrix)[0],
        "row,abs_u0,abs_u1,abs_u2,abs_u3,abs_u4,abs_u5"
    );
    assert_eq!(body(&matrix).len(), 7);
    let durations = fs::read_to_string(dir.path().join("gate_durations.csv")).unwrap();
    assert_eq!(
        body(&durations)[0],
        "pulse,generator,start_U0,duration_U0,duration_ms"
    );
    assert_eq!(body(&durations).len(), 13);
    assert!(body(&durations)[1].split(',').nth(1) == Some("B"));
    assert!(body(&durations)[2].split(',').nth(1) == Some("A"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "gate",
        "--set",
        "n_atoms=5",
        "--set",
        "gate_window=4",
        "--set",
        "restarts=3",
        "--set",
        "max_evals=200",
        "--set",
        "gradient_iterations=10",
        "--seed",
        "7",
    ];
    ok(&args, dir.path());
    let first: Vec<Vec<u8>> = ["gate.json", "gate_matrix.csv", "gate_durations.csv"]
        .iter()
        .map(|f| fs::read(dir.path().join(f)).unwrap())
        .collect();
    ok(&args, dir.path());
    for (k, f) in ["gate.json", "gate_matrix.csv", "gate_durations.csv"]
        .iter()
        .enumerate()
    {
        assert_eq!(
            fs::read(dir.path().join(f)).unwrap(),
            first[k],
            "{f} changed"
        );
    }
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .contains(".tmp")
        })
        .collect();
    assert!(leftovers.is_empty());

    // another seed changes the search but not the format
    ok(&[&args[..args.len() - 1], &["8"]].concat(), dir.path());
    let doc = json(&dir.path().join("gate.json"));
    assert_eq!(doc["seed"], 8);
}

#[test]
fn tampering_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["splitting", "--set", "n_atoms=5", "--set", "ratio_points=4"],
        dir.path(),
    );
    let json_path = dir.path().join("splitting.json");
    let text = fs::read_to_string(&json_path).unwrap();
    verify_json(&text).unwrap();

    let doc: Value = serde_json::from_str(&text).unwrap();
    let cfg = RunConfig::parse_str(doc["config_text"].as_str().unwrap()).unwrap();
    let csv = fs::read_to_string(dir.path().join("splitting.csv")).unwrap();
    verify_csv(&csv, &cfg).unwrap();

    let forged = text.replace("ratio_points = 4", "ratio_points = 5");
    assert_ne!(forged, text);
    assert!(matches!(
        verify_json(&forged),
        Err(Tamper::HashMismatch { .. })
    ));

    let forged_csv = csv.replacen(&cfg.hash(), &"0".repeat(64), 1);
    assert!(matches!(
        verify_csv(&forged_csv, &cfg),
        Err(Tamper::HashMismatch { .. })
    ));
    assert!(matches!(verify_json("{}"), Err(Tamper::Malformed(_))));
}

#[test]
fn config_file_and_echo_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["splitting", "--set", "n_atoms=5", "--set", "ratio_points=2"],
        dir.path(),
    );
    let doc = json(&dir.path().join("splitting.json"));
    let echoed = doc["config_text"].as_str().unwrap();
    let file = dir.path().join("echo.toml");
    fs::write(&file, echoed).unwrap();
    let again = dir.path().join("again");
    ok(&["splitting", "--config", file.to_str().unwrap()], &again);
    let doc2 = json(&again.join("splitting.json"));
    assert_eq!(doc["tables"], doc2["tables"]);
    assert_eq!(doc["config"]["n_atoms"], doc2["config"]["n_atoms"]);
}

#[test]
fn errors_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let o = ajja(&["spectrum", "--set", "n_atoms=-3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let r = error_record(&o);
    assert_eq!(r["status"], "error");
    assert_eq!(r["kind"], "config");
    assert_eq!(r["field"], "n_atoms");
    assert_eq!(r["schema_version"], 1);

    let o = ajja(&["spectrum", "--set", "bogus=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["field"], "bogus");

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "n_atoms = 6\nflux_grid = [0.5]\n").unwrap();
    let o = ajja(&["spectrum", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["field"], "flux_grid");

    let o = ajja(&["teleport"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["kind"], "usage");

    // K larger than the smallest sector is only caught by the engine
    let o = ajja(
        &["two-qubit", "--set", "n_atoms=2", "--set", "truncation=5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    let r = error_record(&o);
    assert_eq!(r["kind"], "numerics");
    assert_eq!(r["field"], "truncation");
    assert!(!dir.path().join("two-qubit.json").exists());
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ajja"))
        .args(["splitting", "--out"])
        .arg(dir.path())
        .env("AJJA_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["field"], "AJJA_THREADS");
}

#[test]
fn format_flag_selects_files() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &[
            "splitting",
            "--set",
            "ratio_points=2",
            "--set",
            "n_atoms=4",
            "--format",
            "csv",
        ],
        dir.path(),
    );
    assert!(dir.path().join("splitting.csv").exists());
    assert!(!dir.path().join("splitting.json").exists());
    let other = dir.path().join("j");
    ok(
        &[
            "splitting",
            "--set",
            "ratio_points=2",
            "--set",
            "n_atoms=4",
            "--format",
            "json",
        ],
        &other,
    );
    assert!(!other.join("splitting.csv").exists());
    assert!(other.join("splitting.json").exists());
}

#[test]
fn remaining_subcommands_run_on_small_systems() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &[
            "wavefunction",
            "--set",
            "n_atoms=6",
            "--set",
            "wavefunction_grid=16",
        ],
        d,
    );
    let doc = json(&d.join("wavefunction.json"));
    assert_eq!(doc["summary"]["peaks"].as_array().unwrap().len(), 4);
    assert_eq!(
        body(&fs::read_to_string(d.join("wavefunction.csv")).unwrap()).len(),
        1 + 4 * 256
    );

    ok(
        &[
            "coupling-sweep",
            "--set",
            "n_atoms=6",
            "--set",
            "coupling_points=5",
        ],
        d,
    );
    assert_eq!(
        header(&d.join("coupling_sweep.csv"))
            .split(',')
            .take(3)
            .collect::<Vec<_>>(),
        ["omega0_U0", "omega0_hz", "E0_U0"]
    );

    ok(
        &[
            "ramp",
            "--set",
            "n_atoms=5",
            "--set",
            "ramp_durations=0,5",
            "--set",
            "ramp_end=40",
        ],
        d,
    );
    let ramp = fs::read_to_string(d.join("ramp.csv")).unwrap();
    assert_eq!(body(&ramp).len(), 3);
    assert!(header(&d.join("ramp_gaps.csv")).starts_with("omega0_U0,ground_U0,gap1_U0"));

    ok(
        &[
            "readout",
            "--set",
            "n_atoms=5",
            "--set",
            "readout_duration=5",
            "--set",
            "ramp_end=40",
        ],
        d,
    );
    let readout = fs::read_to_string(d.join("readout.csv")).unwrap();
    let rows = body(&readout);
    assert_eq!(
        rows[0],
        "state,expected_excitations,p_zero,p_at_least_one,overlap_rabi1,overlap_rabi2"
    );
    let rabi2: Vec<&str> = rows[3].split(',').collect();
    assert_eq!(rabi2[0], "rabi2");
    assert!((rabi2[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);

    ok(
        &[
            "two-qubit",
            "--set",
            "n_atoms=4",
            "--set",
            "truncation=3",
            "--set",
            "restarts=1",
            "--set",
            "max_evals=100",
            "--set",
            "gradient_iterations=5",
            "--pulses",
            "6",
            "--set",
            "tunneling=0.05",
        ],
        d,
    );
    let doc = json(&d.join("two-qubit.json"));
    assert_eq!(doc["matrices"]["qubit_block"]["rows"], 4);
    assert_eq!(doc["summary"]["joint_dimension"], 27);
    assert_eq!(
        body(&fs::read_to_string(d.join("two_qubit_durations.csv")).unwrap()).len(),
        7
    );
}
