use std::path::Path;
use std::process::{Command, Output};

fn fbimg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbimg")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn small_grid(dir: &Path) -> Vec<String> {
    ["grid_nx=40", "grid_ny=40"]
        .iter()
        .map(|s| s.to_string())
        .chain([format!("output_dir={}", dir.display())])
        .flat_map(|s| ["--set".to_string(), s])
        .collect()
}

fn run_with(base: &[&str], extra: &[String]) -> Output {
    let mut args: Vec<&str> = base.to_vec();
    args.extend(extra.iter().map(String::as_str));
    fbimg(&args)
}

#[test]
fn step_by_step_chain() {
    let dir = tempfile::tempdir().unwrap();
    let opts = small_grid(dir.path());
    stdout(&run_with(&["simulate"], &opts));
    let ring = dir.path().join("ring_k3.csv");
    assert!(ring.exists());

    let noisy = dir.path().join("noisy.csv");
    let out = stdout(&fbimg(&[
        "noise",
        "-i",
        ring.to_str().unwrap(),
        "-o",
        noisy.to_str().unwrap(),
        "--delta",
        "0.05",
        "--seed",
        "3",
    ]));
    assert!(out.contains("delta=0.05 seed=3"));
    let text = std::fs::read_to_string(&noisy).unwrap();
    assert!(text.contains("# delta=0.05\n") && text.contains("# seed=3"));

    let out = stdout(&run_with(&["reconstruct", "-i", noisy.to_str().unwrap()], &opts));
    assert!(out.contains("truncation=3"));
    let pgm = dir.path().join("out.pgm");
    stdout(&fbimg(&[
        "render",
        "-i",
        dir.path().join("indicator_k3.csv").to_str().unwrap(),
        "-o",
        pgm.to_str().unwrap(),
        "--scale",
        "linear",
    ]));
    assert!(std::fs::read_to_string(&pgm).unwrap().starts_with("P2\n40 40\n65535\n"));
}

#[test]
fn clean_ring_without_truncation_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let opts = small_grid(dir.path());
    stdout(&run_with(&["simulate"], &opts));
    let ring = dir.path().join("ring_k3.csv");
    let out = run_with(&["reconstruct", "-i", ring.to_str().unwrap()], &opts);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncation"));
    let mut with_n = opts.clone();
    with_n.extend(["--set".into(), "truncation=10".into()]);
    stdout(&run_with(&["reconstruct", "-i", ring.to_str().unwrap()], &with_n));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        format!(
            "# hard obstacle, two frequencies\nbc = hard\nwavenumbers = 3,4\ngrid_nx = 40\ngrid_ny = 40\noutput_dir = {}\n",
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    let out = stdout(&fbimg(&["pipeline", "--config", conf.to_str().unwrap(), "--set", "seed=11"]));
    assert!(out.contains("result superposed"));
    let manifest = std::fs::read_to_string(dir.path().join("out/manifest.txt")).unwrap();
    assert!(manifest.contains("seed = 11"));
    assert!(manifest.contains("bc = hard"));

    let bad = fbimg(&["pipeline", "--set", "colour=red"]);
    assert!(!bad.status.success());
    let bad = fbimg(&["pipeline", "--set", "novalue"]);
    assert!(!bad.status.success());
}

#[test]
fn oracle_check_reports_pass_and_rejects_non_circles() {
    let out = stdout(&fbimg(&["oracle-check", "--set", "wavenumbers=3", "--set", "bc=hard"]));
    assert!(out.contains("PASS"));
    let out = fbimg(&["oracle-check", "--set", "shape=kite"]);
    assert!(!out.status.success());
}

#[test]
fn rates_interior_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rates.txt");
    let out = stdout(&fbimg(&["rates", "--side", "interior", "--output", path.to_str().unwrap()]));
    assert!(out.contains("sigma2"));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), out);
}
