use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rmtlab::formats::{emit_circuit, load_matrix, parse_circuit, save_matrix};
use rmtlab_core::compiler::{Circuit, Gate};
use rmtlab_core::ensembles::EnsembleSpec;
use rmtlab_core::rng::SeedStream;
use rmtlab_core::HermitianMatrix;

fn rmtlab_in(dir: Option<&Path>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rmtlab"));
    if let Some(d) = dir {
        cmd.current_dir(d);
    }
    cmd.args(args)
        .env_remove("RMTLAB_SEED")
        .output()
        .expect("binary runs")
}

fn rmtlab(args: &[&str]) -> Output {
    rmtlab_in(None, args)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn body(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn identical_invocations_give_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let o = rmtlab_in(
            Some(dir),
            &[
                "jump-figure",
                "--d",
                "2",
                "--eps",
                "0.2",
                "--max-len",
                "6",
                "--t",
                "0:1:0.25",
                "--samples",
                "100",
                "--seed",
                "5",
                "--out",
                "run",
            ],
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in [
        "jump_escape.csv",
        "jump_complexity.csv",
        "jump_avoidance.csv",
        "jump_bundle.txt",
        "jump-figure.manifest.json",
    ] {
        let x = fs::read(a.path().join("run").join(f)).unwrap();
        let y = fs::read(b.path().join("run").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn results_do_not_depend_on_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for jobs in ["1", "3"] {
        let out = dir.path().join(jobs);
        let o = rmtlab(&[
            "escape",
            "--d",
            "8",
            "--eps",
            "0.4",
            "--t",
            "0:0.6:0.1",
            "--samples",
            "150",
            "--seed",
            "9",
            "--jobs",
            jobs,
            "--out",
            &out_arg(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        bodies.push(body(&out.join("escape.csv")));
    }
    assert_eq!(bodies[0], bodies[1]);
    assert!(bodies[0].starts_with("t,stay_prob,stderr,n_samples,ensemble,d,epsilon,metric,seed\n0,1,0,150,gue,8,0.4,diamond,9"));
}

#[test]
fn outputs_start_with_provenance_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let o = rmtlab(&[
        "form-factor",
        "--ensemble",
        "diag-gaussian",
        "--d",
        "8",
        "--t",
        "0:1:0.5",
        "--samples",
        "20",
        "--seed",
        "3",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("form_factor.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# rmtlab "));
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# invocation: rmtlab form-factor --ensemble diag-gaussian"));
    assert_eq!(
        lines.next().unwrap(),
        "t,mean_re,mean_im,variance,std_error,n_samples,theory_mean,theory_variance,seed"
    );
    assert_eq!(lines.count(), 3);
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("form-factor.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["files"][0]["file"], "form_factor.csv");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["form-factor", "--d", "-3", "--t", "0", "--samples", "2"],
        vec!["form-factor", "--d", "4", "--t", "0:1", "--samples", "2"],
        vec![
            "escape",
            "--d",
            "4",
            "--eps",
            "0.1",
            "--t",
            "0",
            "--samples",
            "100",
            "--frobnicate",
        ],
        vec!["no-such-command"],
        vec![
            "escape",
            "--d",
            "4",
            "--eps",
            "0.1",
            "--t",
            "0",
            "--samples",
            "5",
            "--out",
            "/dev/null/x",
        ],
    ] {
        let o = rmtlab(&args);
        assert_ne!(code(&o), 0, "{args:?}");
        if !args.contains(&"/dev/null/x") {
            assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
        }
    }
    // Fewer than the minimum escape samples is rejected by the library.
    let dir = tempfile::tempdir().unwrap();
    let o = rmtlab(&[
        "escape",
        "--d",
        "4",
        "--eps",
        "0.1",
        "--t",
        "0",
        "--samples",
        "5",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "d = 8\nsamples = 100\nseed = 1\n[escape]\neps = 0.4\nt = \"0:0.4:0.2\"\n",
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = rmtlab(&[
        "escape",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "2",
        "--out",
        &out_arg(&a),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = rmtlab(&[
        "escape",
        "--d",
        "8",
        "--samples",
        "100",
        "--eps",
        "0.4",
        "--t",
        "0:0.4:0.2",
        "--seed",
        "2",
        "--out",
        &out_arg(&b),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(body(&a.join("escape.csv")), body(&b.join("escape.csv")));
    assert!(body(&a.join("escape.csv"))
        .lines()
        .nth(1)
        .unwrap()
        .ends_with(",2"));
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rmtlab"))
        .args(["sample", "--d", "3", "--out", dir.path().to_str().unwrap()])
        .env("RMTLAB_SEED", "44")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = load_matrix(&dir.path().join("h_0000.cmpx")).unwrap();
    let h = EnsembleSpec::gue(3)
        .sample_stream(SeedStream::new(44, 0))
        .unwrap();
    assert_eq!(&m, h.matrix());
}

#[test]
fn sampled_matrix_files_are_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let o = rmtlab(&[
        "sample",
        "--d",
        "16",
        "--count",
        "2",
        "--seed",
        "8",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for i in 0..2 {
        let m = load_matrix(&dir.path().join(format!("h_{i:04}.cmpx"))).unwrap();
        let h = EnsembleSpec::gue(16)
            .sample_stream(SeedStream::new(8, i))
            .unwrap();
        let bits = |m: &rmtlab_core::ComplexMatrix| -> Vec<(u64, u64)> {
            m.as_slice()
                .iter()
                .map(|z| (z.re.to_bits(), z.im.to_bits()))
                .collect()
        };
        assert_eq!(bits(&m), bits(h.matrix()));
    }
}

#[test]
fn compile_then_verify_from_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.cmpx");
    let diag: Vec<f64> = (0..16).map(|i| ((i * 5 % 7) as f64 - 3.0) * 0.4).collect();
    save_matrix(&h, HermitianMatrix::from_real_diagonal(&diag).matrix()).unwrap();
    let out = out_arg(dir.path());
    let o = rmtlab(&[
        "compile",
        "--n",
        "4",
        "--t",
        "1",
        "--eps",
        "1e-3",
        "--hamiltonian",
        h.to_str().unwrap(),
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("verify_circuit: error"));
    let circuit = dir.path().join("circuit.txt");
    let o = rmtlab(&[
        "verify-circuit",
        "--circuit",
        circuit.to_str().unwrap(),
        "--hamiltonian",
        h.to_str().unwrap(),
        "--t",
        "1",
        "--eps",
        "1e-3",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let o = rmtlab(&[
        "compile",
        "--n",
        "3",
        "--t",
        "1",
        "--eps",
        "1e-3",
        "--hamiltonian",
        h.to_str().unwrap(),
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn corrupted_circuit_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let diag = "0.3,-1.2,0.5,2.0";
    let o = rmtlab(&[
        "compile", "--diag", diag, "--t", "1", "--eps", "1e-3", "--out", &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let path = dir.path().join("circuit.txt");
    let good = parse_circuit(&fs::read_to_string(&path).unwrap()).unwrap();

    // An extra CNOT leaves the circuit non-diagonal.
    let mut gates = good.gates().to_vec();
    gates.push(Gate::Cnot {
        control: 0,
        target: 1,
    });
    fs::write(&path, emit_circuit(&Circuit::new(2, gates).unwrap())).unwrap();
    let o = rmtlab(&[
        "verify-circuit",
        "--circuit",
        path.to_str().unwrap(),
        "--diag",
        diag,
        "--t",
        "1",
        "--eps",
        "1e-3",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("verify_circuit"), "{}", stderr(&o));

    // A perturbed rotation stays diagonal but misses the target.
    let mut gates = good.gates().to_vec();
    gates.push(Gate::Rz {
        qubit: 0,
        angle: 0.1,
    });
    fs::write(&path, emit_circuit(&Circuit::new(2, gates).unwrap())).unwrap();
    let o = rmtlab(&[
        "verify-circuit",
        "--circuit",
        path.to_str().unwrap(),
        "--diag",
        diag,
        "--t",
        "1",
        "--eps",
        "1e-3",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("verify_circuit"), "{}", stderr(&o));

    // Garbage text is reported against the same check.
    fs::write(&path, "QUBITS 2\nSWAP 0 1\n").unwrap();
    let o = rmtlab(&[
        "verify-circuit",
        "--circuit",
        path.to_str().unwrap(),
        "--diag",
        diag,
        "--t",
        "1",
        "--eps",
        "1e-3",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("verify_circuit"));
}

#[test]
fn truncated_matrix_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.cmpx");
    save_matrix(
        &h,
        HermitianMatrix::from_real_diagonal(&[1.0, 2.0]).matrix(),
    )
    .unwrap();
    let bytes = fs::read(&h).unwrap();
    fs::write(&h, &bytes[..bytes.len() - 4]).unwrap();
    let o = rmtlab(&[
        "compile",
        "--hamiltonian",
        h.to_str().unwrap(),
        "--t",
        "1",
        "--eps",
        "0.1",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("truncated"), "{}", stderr(&o));
}

#[test]
fn verification_subcommands_name_the_failing_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = rmtlab(&[
        "variance-check",
        "--d",
        "32",
        "--t",
        "0:0.5:0.25",
        "--samples",
        "200",
        "--seed",
        "1",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(code(&o), 1);
    assert!(
        stderr(&o).contains("small-t variance bound"),
        "{}",
        stderr(&o)
    );
    assert!(dir.path().join("variance.csv").exists());

    let o = rmtlab(&[
        "torus-distance",
        "--d",
        "8",
        "--samples",
        "20",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn complexity_of_a_target_file() {
    let dir = tempfile::tempdir().unwrap();
    let id = dir.path().join("id.cmpx");
    save_matrix(&id, &rmtlab_core::ComplexMatrix::identity(2)).unwrap();
    let o = rmtlab(&[
        "complexity",
        "--d",
        "2",
        "--eps",
        "0.1",
        "--max-len",
        "4",
        "--target",
        id.to_str().unwrap(),
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let b = body(&dir.path().join("complexity.csv"));
    let row = b.lines().nth(1).unwrap();
    assert!(row.contains(",0,I,"), "{row}");
}
