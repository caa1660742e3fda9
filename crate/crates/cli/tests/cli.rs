use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cmoea(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmoea"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SMOKE: &[&str] = &[
    "--problem",
    "MCOP1",
    "--algorithm",
    "moead",
    "--pop-size",
    "20",
    "--budget",
    "600",
    "--runs",
    "2",
    "--seed",
    "5",
    "--threads",
    "2",
];

#[test]
fn manifest_lists_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&cmoea(&["manifest"], dir.path()));
    assert!(out.contains("\"CTP2\"") && out.contains("\"MCOP7\""));
    assert_eq!(out.matches("\"constraint_count\"").count(), 14);
}

#[test]
fn run_without_fronts_fails_fast() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run"];
    args.extend_from_slice(SMOKE);
    let out = cmoea(&args, dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("reference front for MCOP1"));
    assert!(!dir.path().join("results/results.csv").exists());
}

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    ok(&cmoea(
        &[
            "reference-fronts",
            "--problem",
            "MCOP1",
            "--resolution",
            "1000",
        ],
        dir.path(),
    ));
    assert!(dir.path().join("data/fronts/MCOP1.front").is_file());

    let mut args = vec!["run", "--no-timing"];
    args.extend_from_slice(SMOKE);
    let out = ok(&cmoea(&args, dir.path()));
    assert!(out.contains("executed 6 runs"), "{out}");
    let csv = fs::read_to_string(dir.path().join("results/results.csv")).unwrap();
    assert!(csv.contains("problem,algorithm,repair,seed,igd,hv,feasible_fraction,evals,wall_ms"));
    assert_eq!(csv.lines().filter(|l| l.starts_with("MCOP1,")).count(), 6);

    let out = ok(&cmoea(&["tables"], dir.path()));
    assert!(out.contains("Repair-C vs Repair-A h"));
    for name in ["igd_moead", "hv_moead", "ttest_igd_moead", "ttest_hv_moead"] {
        for ext in ["csv", "txt"] {
            let p = dir.path().join(format!("results/tables/{name}.{ext}"));
            let text = fs::read_to_string(&p).unwrap();
            assert!(text.starts_with("# "), "{} lacks provenance", p.display());
        }
    }

    let out = ok(&cmoea(&["plots"], dir.path()));
    assert!(out.contains("3 front files and 1 boundary files"), "{out}");
    let boundary = fs::read_to_string(dir.path().join("results/plots/boundary_MCOP1.dat")).unwrap();
    let blocks = boundary
        .split("\n\n")
        .filter(|b| b.lines().any(|l| !l.starts_with('#')))
        .count();
    assert_eq!(blocks, 9);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("exp.toml"),
        "problems = [\"CTP2\"]\nruns = 4\n\n[settings]\npop_size = 50\n",
    )
    .unwrap();
    let out = ok(&cmoea(
        &["config", "--config", "exp.toml", "--runs", "7"],
        dir.path(),
    ));
    assert!(out.contains("runs = 7"));
    assert!(out.contains("pop_size = 50"));
    assert!(out.contains("\"CTP2\""));
    let bad = cmoea(&["config", "--problem", "ZDT1"], dir.path());
    assert!(!bad.status.success());
    let odd = cmoea(
        &["config", "--algorithm", "nsga2", "--pop-size", "51"],
        dir.path(),
    );
    assert!(!odd.status.success());
}
