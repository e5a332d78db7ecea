//! End-to-end pipeline and CLI behavior on small instances.

use std::process::Command;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qap_admm::qap::QapInstance;
use qap_admm::report::{from_csv, run_parsed, to_csv, RunConfig};

fn random_instance(n: usize, seed: u64) -> QapInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Array2::zeros((n, n));
    let mut b = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..i {
            let u: f64 = rng.gen_range(0..10) as f64;
            let v: f64 = rng.gen_range(0..10) as f64;
            a[[i, j]] = u;
            a[[j, i]] = u;
            b[[i, j]] = v;
            b[[j, i]] = v;
        }
    }
    QapInstance::new(format!("rand{n}_{seed}"), a, b, Array2::zeros((n, n))).unwrap()
}

fn instance_text(inst: &QapInstance) -> String {
    let n = inst.order();
    let mut s = format!("{n}\n");
    for m in [inst.flows(), inst.distances()] {
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{}", m[[i, j]])).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
    }
    s
}

#[test]
fn pipeline_report_round_trips_and_is_deterministic() {
    let inst = random_instance(5, 7);
    let config = RunConfig::default();
    let r1 = run_parsed(&inst, &config, &[]).unwrap();
    let r2 = run_parsed(&inst, &config, &[]).unwrap();
    assert_eq!(r1.lb_real, r2.lb_real);
    assert_eq!(r1.lb_int, r2.lb_int);
    assert_eq!(r1.ub, r2.ub);
    assert_eq!(r1.iters, r2.iters);

    let csv = to_csv(&[r1.clone()]).unwrap();
    let parsed = from_csv(&csv).unwrap();
    assert_eq!(parsed.len(), 1);
    assert_eq!(parsed[0], r1);
    assert!(r1.lb_real <= r1.ub + 1e-9);
}

#[test]
fn cli_solves_a_file_and_reports_csv() {
    let dir = tempfile::tempdir().unwrap();
    let inst = random_instance(4, 11);
    let path = dir.path().join("rand4.dat");
    std::fs::write(&path, instance_text(&inst)).unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_qap-admm"))
        .args(["solve", path.to_str().unwrap(), "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let reports = from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].name, "rand4");
    assert_eq!(reports[0].n, 4);
    assert!(reports[0].lb_int <= reports[0].ub);
}

#[test]
fn cli_exit_codes() {
    // per-instance failure -> 1
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dat");
    std::fs::write(&bad, "2\n0 1 1 0\n0 3").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qap-admm"))
        .args(["solve", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // usage error -> 2
    let out = Command::new(env!("CARGO_BIN_EXE_qap-admm"))
        .args(["solve", bad.to_str().unwrap(), "--polytope", "p9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // invalid numeric config -> 2
    let good = dir.path().join("ok.dat");
    std::fs::write(&good, instance_text(&random_instance(4, 3))).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qap-admm"))
        .args(["solve", good.to_str().unwrap(), "--gamma", "2.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_batch_empty_directory_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qap-admm"))
        .args(["batch", dir.path().to_str().unwrap(), "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn cli_reference_file_adds_improvement_column() {
    let dir = tempfile::tempdir().unwrap();
    let inst = random_instance(4, 19);
    let path = dir.path().join("rand4.dat");
    std::fs::write(&path, instance_text(&inst)).unwrap();
    let reference = dir.path().join("ref.csv");
    std::fs::write(&reference, "name,opt,bundle\nrand4,100,90\n").unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_qap-admm"))
        .args([
            "solve",
            path.to_str().unwrap(),
            "--format",
            "json",
            "--reference",
            reference.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("pct_impr"), "{text}");
}
