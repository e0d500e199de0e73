use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = "model = allen-cahn\nepsilon = 0.1\nLx = 1\nNx = 8\nic = sine\n\
                    scheme = icn\ndt = 0.1\nT = 0.5\noutput_dir = tiny\n";

fn gradflow(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradflow"))
        .args(args)
        .env("GRADFLOW_OUTPUT_ROOT", root)
        .output()
        .unwrap()
}

fn write_spec(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_writes_under_output_root() {
    let root = tempfile::tempdir().unwrap();
    let spec = write_spec(root.path(), "tiny.spec", TINY);
    let out = gradflow(root.path(), &["run", &spec]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = root.path().join("tiny");
    assert!(dir.join("trace.csv").exists());
    let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("# status: completed"));
    assert!(manifest.contains("scheme = icn"));
}

#[test]
fn spec_errors_exit_2() {
    let root = tempfile::tempdir().unwrap();
    let unknown = write_spec(root.path(), "a.spec", &format!("{TINY}colour = red\n"));
    let inapplicable = write_spec(root.path(), "b.spec", &format!("{TINY}a = 0.3\n"));
    let odd_grid = write_spec(root.path(), "c.spec", &TINY.replace("Nx = 8", "Nx = 7"));
    for spec in [&unknown, &inapplicable, &odd_grid] {
        assert_eq!(gradflow(root.path(), &["run", spec]).status.code(), Some(2), "{spec}");
        assert_eq!(gradflow(root.path(), &["check", spec]).status.code(), Some(2), "{spec}");
    }
    let missing = root.path().join("nope.spec");
    assert_eq!(gradflow(root.path(), &["run", missing.to_str().unwrap()]).status.code(), Some(2));
    assert!(!root.path().join("tiny").exists());
}

#[test]
fn solver_failure_exits_3() {
    let root = tempfile::tempdir().unwrap();
    let spec = write_spec(
        root.path(),
        "fail.spec",
        "model = cahn-hilliard\nepsilon = 0.05\nlambda = 0.1\nLx = 12.566370614359172\nNx = 32\n\
         ic = random\namplitude = 0.5\nseed = 3\nscheme = gauss\nstages = 2\ndt = 1\nT = 4\n\
         max_stage_iters = 1\noutput_dir = fail\n",
    );
    let out = gradflow(root.path(), &["run", &spec]);
    assert_eq!(out.status.code(), Some(3));
    assert!(root.path().join("fail").join("trace.csv").exists());
}

#[test]
fn check_prints_resolved_spec() {
    let root = tempfile::tempdir().unwrap();
    let spec = write_spec(root.path(), "p.spec", "preset = ac-disk-small\ndt = 1\n");
    let out = gradflow(root.path(), &["check", &spec]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("dt = 1\n"));
    assert!(text.contains("volume = true"));
    assert!(text.contains("# ok: 100 steps"));
    assert!(!root.path().join("ac-disk-small-icn").exists());
}

#[test]
fn presets_lists_every_preset() {
    let root = tempfile::tempdir().unwrap();
    let out = gradflow(root.path(), &["presets"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["ch-refine", "ch-coarsen", "ac-disk", "pfc-crystal", "mbe-coarsen", "pfc-crystal-small"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn converge_writes_csv() {
    let root = tempfile::tempdir().unwrap();
    let spec = write_spec(root.path(), "c.spec", &TINY.replace("T = 0.5", "T = 0.4"));
    let out = gradflow(root.path(), &["converge", &spec, "--dts", "0.1,0.05", "--ref-dt", "0.001"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(root.path().join("tiny").join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.ends_with(",ok")).count(), 2);
    assert!(csv.contains("# slope icn = "));
    assert_eq!(std::fs::read_dir(root.path().join("references")).unwrap().count(), 1);
    let bad = gradflow(root.path(), &["converge", &spec, "--dts", "0.1", "--ref-dt", "0.001"]);
    assert_eq!(bad.status.code(), Some(2));
}
