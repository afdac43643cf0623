use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frontal-lab"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(cfg: &Path, out: &Path) -> Output {
    bin().arg("run").arg(cfg).arg("--out").arg(out).output().unwrap()
}

fn report(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn seed_outside_domain_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"generator": {"kind": "rank1-front", "domain": [-0.5, 0.5, -0.5, 0.5], "params": {"lambda": "v"}},
            "outputs": [{"trace": {"field": "asymptotic-1", "seeds": [[0.9, 0.0]]}}]}"#,
    )
    .unwrap();
    let out = run(&cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("0.9"), "{err}");
}

#[test]
fn example_surface_is_extendable_in_analytic_mode() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&config("extendable-normal.json"), dir.path()).status.success());
    let r = report(dir.path());
    let block = r["results"].as_array().unwrap().iter().find(|b| b["type"] == "extendability").unwrap();
    assert_eq!(block["verdict"], "extendable");
    assert_eq!(block["mode"], "analytic");
}

#[test]
fn cuspidal_edge_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("cuspidal-edge.json"), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["report.json", "surface.obj", "fields.csv", "singular.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(text.contains("front-rank1"));
    let header = std::fs::read_to_string(dir.path().join("fields.csv")).unwrap();
    assert!(header.starts_with("u,v,lambda_omega,K_omega,H_omega"));
}

#[test]
fn degenerate_basis_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("degenerate-basis.json"), dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_passes_on_shipped_configs() {
    for name in ["cuspidal-edge.json", "wave.json", "saddle.json", "ellipsoid.json"] {
        let out = bin().arg("verify").arg(config(name)).output().unwrap();
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(out.status.success(), "{name}: {text}");
        assert!(!text.contains("FAIL"), "{name}: {text}");
    }
}

#[test]
fn eval_prints_derivatives() {
    let out = bin().args(["eval", "u^2*v", "--at", "-1,2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("f_u"), "{text}");
}
