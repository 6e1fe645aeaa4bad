use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rispeb"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn point_at_base_station_fails() {
    let o = run(&["point", "--x", "0", "--y", "0"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("degenerate"), "{}", stderr(&o));
}

#[test]
fn point_behind_wall_fails() {
    let o = run(&["point", "--x", "2", "--y", "11"]);
    assert!(!o.status.success());
}

#[test]
fn ris_point_report() {
    let o = run(&["point", "--x", "2", "--y", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let bits = text
        .lines()
        .find_map(|l| l.strip_prefix("allocation"))
        .unwrap()
        .trim();
    assert_eq!(bits.len(), 5);
    assert_eq!(bits.matches('1').count(), 1, "{bits}");
    for key in ["LOS", "RIS1", "RIS5", "resolvable", "fim", "peb_m", "peb_direct_m"] {
        assert!(text.contains(key), "missing {key}:\n{text}");
    }
}

#[test]
fn baseline_point_reports() {
    let o = run(&["--mode", "reflector", "point", "--x", "2", "--y", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("reflector"));
    assert!(stdout(&o).contains("allocation   00000"));
    let o = run(&["--mode", "scatterer", "point", "--x", "-3", "--y", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("scatterer"));
}

#[test]
fn sweep_writes_outputs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, extra) in [(&a, None), (&b, Some("--serial"))] {
        let mut args = vec!["--out", out.to_str().unwrap(), "sweep", "--nx", "10", "--ny", "10"];
        args.extend(extra);
        let o = run(&args);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let map = fs::read_to_string(a.join("map.csv")).unwrap();
    let lines: Vec<&str> = map.lines().collect();
    assert_eq!(lines[0], "x,y,peb_m,flag,path_count,allocation_bits");
    assert_eq!(lines.len(), 101);
    for row in &lines[1..] {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 6, "{row}");
        assert!(["ok", "capped", "inf", "invalid"].contains(&fields[3]), "{row}");
        assert_eq!(fields[5].len(), 5);
    }
    assert_eq!(map, fs::read_to_string(b.join("map.csv")).unwrap());
    assert_eq!(
        fs::read(a.join("cdf.csv")).unwrap(),
        fs::read(b.join("cdf.csv")).unwrap()
    );
    let cdf = fs::read_to_string(a.join("cdf.csv")).unwrap();
    assert!(cdf.starts_with("peb_m,cdf\n"));

    // the dumped config reproduces the run
    let effective = a.join("effective.toml");
    let c = dir.path().join("c");
    let o = run(&[
        "--config",
        effective.to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
        "sweep",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(map, fs::read_to_string(c.join("map.csv")).unwrap());
}

#[test]
fn validate_passes_on_default() {
    let o = run(&["validate"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o).matches("[PASS]").count(), 5);
}

#[test]
fn corrupted_config_is_rejected_with_line() {
    let path = fixture("corrupt.cfg");
    let o = run(&["--config", path.to_str().unwrap(), "validate"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("line 11"), "{err}");
    assert!(err.contains("[waveform] bandwidth_hz"), "{err}");
}

#[test]
fn override_out_of_range_is_rejected() {
    let o = run(&["--kbar", "9", "point", "--x", "2", "--y", "5"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("k_bar"));
    let o = run(&["--mode", "mirror", "validate"]);
    assert!(!o.status.success());
}

#[test]
fn single_ris_scene() {
    let path = fixture("single_ris.cfg");
    let cfg = path.to_str().unwrap();
    let o = run(&["--config", cfg, "point", "--x", "1", "--y", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("allocation   1") || text.contains("allocation   0"));
    assert!(!text.contains("RIS2"));

    let o = run(&["--config", cfg, "validate"]);
    assert!(o.status.success(), "{}", stdout(&o));
    // the single-RIS scene has no reflector or scatterer
    assert_eq!(stdout(&o).matches("fim-oracle").count(), 1);

    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--config", cfg, "--out", dir.path().to_str().unwrap(), "sweep"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let map = fs::read_to_string(dir.path().join("map.csv")).unwrap();
    assert_eq!(map.lines().count(), 49);
}

#[test]
fn robust_select() {
    for objective in ["worst", "expected"] {
        let o = run(&[
            "--bandwidth",
            "1e9",
            "--kbar",
            "2",
            "select",
            "--x",
            "-3",
            "--y",
            "7",
            "--uncertainty",
            "0.5",
            "--objective",
            objective,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = stdout(&o);
        let bits = text.lines().next().unwrap().trim_start_matches("allocation").trim();
        assert!(bits.matches('1').count() <= 2, "{bits}");
    }
    let o = run(&["select", "--x", "2", "--y", "5", "--uncertainty", "-1"]);
    assert!(!o.status.success());
}
