//! End-to-end checks of the `dirac` binary: the bundled examples run, the
//! documented exit codes come back, and repeated runs are byte-identical.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dirac"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn dirac")
}

fn stdout_on_success(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "dirac {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 stdout")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Parsed CSV body: comment lines dropped, header split off.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .expect("header row")
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|f| f.parse::<f64>().expect("numeric field"))
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn forward_zero_potential_lists_the_even_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("spectrum.json");
    let out = run(&[
        "forward",
        "--potential",
        data("zero_potential.json").to_str().unwrap(),
        "--theta",
        "0",
        "--nmax",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["theta"], 0);
    assert_eq!(doc["N"], 3);
    let entries = doc["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 7, "one entry per n in -3..=3");
    for e in entries {
        let n = e["n"].as_i64().unwrap();
        for key in ["l1", "l2"] {
            let re = e[key][0].as_f64().unwrap();
            let im = e[key][1].as_f64().unwrap();
            assert!(
                (re - 2.0 * n as f64).abs() < 1e-8 && im.abs() < 1e-8,
                "lambda_{{{n}}} {key} = {re}+{im}i, want {}",
                2 * n
            );
        }
    }
}

#[test]
fn det_matches_the_free_closed_form() {
    let text = stdout_on_success(&[
        "det",
        "--potential",
        data("zero_potential.json").to_str().unwrap(),
        "--theta",
        "0",
        "--grid",
        "-2:2:0.5",
    ]);
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["lambda_re", "lambda_im", "delta_re", "delta_im"]);
    assert_eq!(rows.len(), 9, "inclusive grid -2..2 at step 0.5");
    for row in &rows {
        let l = row[0];
        let want = (std::f64::consts::PI * l).cos() - 1.0;
        assert!(
            (row[2] - want).abs() < 1e-10 && row[3].abs() < 1e-10,
            "Delta({l}) = {}+{}i, closed form {want}",
            row[2],
            row[3]
        );
    }
}

#[test]
fn det_from_spectrum_agrees_with_the_integrated_determinant() {
    let integrated = stdout_on_success(&[
        "det",
        "--potential",
        data("zero_potential.json").to_str().unwrap(),
        "--theta",
        "0",
        "--grid",
        "-1.8:1.8:0.3",
    ]);
    let modeled = stdout_on_success(&[
        "det-from-spectrum",
        "--spectrum",
        data("free_spectrum_theta0.json").to_str().unwrap(),
        "--grid",
        "-1.8:1.8:0.3",
    ]);
    let (_, a) = csv_rows(&integrated);
    let (_, b) = csv_rows(&modeled);
    assert_eq!(a.len(), b.len());
    for (ra, rb) in a.iter().zip(&b) {
        assert!(
            (ra[2] - rb[2]).abs() < 1e-9 && (ra[3] - rb[3]).abs() < 1e-9,
            "integration vs product at lambda {}: {} vs {}",
            ra[0],
            ra[2],
            rb[2]
        );
    }
}

#[test]
fn f_sums_vanish_on_the_free_table() {
    let text = stdout_on_success(&[
        "f-sums",
        "--spectrum",
        data("free_spectrum_theta0.json").to_str().unwrap(),
        "--K",
        "8",
    ]);
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["k", "f_re", "f_im", "partial_sum"]);
    assert_eq!(rows.len(), 17, "rows for every k in -8..=8");
    for row in &rows {
        assert!(
            row[1].abs() < 1e-12 && row[2].abs() < 1e-12 && row[3] < 1e-11,
            "free residual at k = {} is {}+{}i",
            row[0],
            row[1],
            row[2]
        );
    }
}

#[test]
fn admissible_free_table_reads_consistent() {
    let text = stdout_on_success(&[
        "admissible",
        "--spectrum",
        data("free_spectrum_theta0.json").to_str().unwrap(),
        "--K",
        "8",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["verdict"], "consistent");
    assert!(doc["sup_offset"].as_f64().unwrap() < 1e-10);
}

#[test]
fn incomplete_spectrum_table_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gappy.json");
    // Claims N = 2 but stops at n = 1.
    std::fs::write(
        &path,
        r#"{"schema_version":1,"theta":0,"N":2,"entries":[
            {"n":-2,"l1":[-4.0,0.0],"l2":[-4.0,0.0]},
            {"n":-1,"l1":[-2.0,0.0],"l2":[-2.0,0.0]},
            {"n":0,"l1":[0.0,0.0],"l2":[0.0,0.0]},
            {"n":1,"l1":[2.0,0.0],"l2":[2.0,0.0]}]}"#,
    )
    .unwrap();
    let out = run(&["admissible", "--spectrum", path.to_str().unwrap(), "--K", "2"]);
    assert_eq!(exit_code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn construct_then_glm_check_completes_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let con_path = dir.path().join("construction.json");
    let out = run(&[
        "construct",
        "--target",
        data("free_spectrum_theta0.json").to_str().unwrap(),
        "--N",
        "5",
        "--out",
        con_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&con_path).unwrap()).unwrap();
    assert_eq!(doc["n0"], 0, "free target needs no cluster");
    let rep = &doc["verification"];
    assert_eq!(rep["signs_ok"], true);
    assert!(rep["interpolation_deviation"].as_f64().unwrap() < 1e-10);

    let text = stdout_on_success(&[
        "glm-check",
        "--construction",
        con_path.to_str().unwrap(),
        "--xgrid",
        "4",
        "--grid",
        "64",
    ]);
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["x", "sigma_min", "pass"]);
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert!(
            row[1] > 0.1 && row[2] == 1.0,
            "sigma_min({}) = {} should clear the floor",
            row[0],
            row[1]
        );
    }
}

#[test]
fn counterexample_rows_pass_both_bounds() {
    let text = stdout_on_success(&["counterexample", "--pmin", "10", "--pmax", "12"]);
    let (header, rows) = csv_rows(&text);
    assert_eq!(
        header,
        ["p", "average", "resonant_term", "side_sum", "exceeds_threshold", "side_sum_within"]
    );
    assert_eq!(rows.len(), 3, "one row per p in 10..=12");
    for row in &rows {
        let p = row[0];
        assert!(
            row[1].abs() > 1.0 / p && row[4] == 1.0 && row[5] == 1.0,
            "dyadic average at p = {p} is {}, needs modulus above {}",
            row[1],
            1.0 / p
        );
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    for (path, threads) in [(&first, "1"), (&second, "4")] {
        let out = run(&[
            "det",
            "--potential",
            data("constant_q03.json").to_str().unwrap(),
            "--theta",
            "1",
            "--grid",
            "-3:3:0.25",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&first).unwrap();
    let b = std::fs::read(&second).unwrap();
    assert_eq!(a, b, "same grid must serialize identically regardless of thread count");
}

#[test]
fn missing_input_file_exits_two() {
    let out = run(&[
        "forward",
        "--potential",
        "/nonexistent/potential.json",
        "--theta",
        "0",
        "--nmax",
        "2",
    ]);
    assert_eq!(exit_code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn invalid_arguments_exit_three() {
    let zero_threads = run(&[
        "det",
        "--potential",
        data("zero_potential.json").to_str().unwrap(),
        "--theta",
        "0",
        "--grid",
        "0:1:0.5",
        "--threads",
        "0",
    ]);
    assert_eq!(exit_code(&zero_threads), 3);

    let swapped = run(&["counterexample", "--pmin", "12", "--pmax", "10"]);
    assert_eq!(exit_code(&swapped), 3, "{}", String::from_utf8_lossy(&swapped.stderr));
}

#[test]
fn malformed_thread_env_warns_and_proceeds() {
    let out = bin()
        .env("DIRAC_SPECTRA_THREADS", "plenty")
        .args(["counterexample", "--pmin", "10", "--pmax", "10"])
        .output()
        .expect("spawn dirac");
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("DIRAC_SPECTRA_THREADS"),
        "expected a warning about the ignored value, got: {err}"
    );
}

#[test]
fn bundled_pipeline_artifacts_stay_in_sync() {
    // data/ ships each stage of the constant-q pipeline (potential ->
    // spectrum -> construction) so every command runs on bundled inputs
    // alone. Regenerating a stage must reproduce the committed bytes; a
    // drift here means the bundled files predate a schema or numeric
    // change and need regenerating.
    let spectrum = stdout_on_success(&[
        "forward",
        "--potential",
        data("constant_q012.json").to_str().unwrap(),
        "--theta",
        "0",
        "--nmax",
        "24",
    ]);
    let committed = std::fs::read_to_string(data("constant_q012_spectrum.json")).unwrap();
    assert_eq!(spectrum, committed, "constant_q012_spectrum.json is stale");

    let construction = stdout_on_success(&[
        "construct",
        "--target",
        data("constant_q012_spectrum.json").to_str().unwrap(),
        "--N",
        "12",
    ]);
    let committed =
        std::fs::read_to_string(data("constant_q012_construction.json")).unwrap();
    assert_eq!(construction, committed, "constant_q012_construction.json is stale");

    let free = stdout_on_success(&[
        "construct",
        "--target",
        data("free_spectrum_theta0.json").to_str().unwrap(),
        "--N",
        "8",
    ]);
    let committed = std::fs::read_to_string(data("free_construction_theta0.json")).unwrap();
    assert_eq!(free, committed, "free_construction_theta0.json is stale");

    // The two bundled constructions bracket the solvability landscape: the
    // free target stays comfortably above the default floor at every
    // endpoint, while the clustered constant-q target degrades past x =
    // pi/4 (its weights are large, so I + K_x approaches singularity; the
    // scan reports that rather than failing).
    let tame = stdout_on_success(&[
        "glm-check",
        "--construction",
        data("free_construction_theta0.json").to_str().unwrap(),
        "--xgrid",
        "4",
        "--grid",
        "64",
    ]);
    let (_, rows) = csv_rows(&tame);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[2] == 1.0), "free kernel under the floor:\n{tame}");

    let clustered = stdout_on_success(&[
        "glm-check",
        "--construction",
        data("constant_q012_construction.json").to_str().unwrap(),
        "--xgrid",
        "4",
        "--grid",
        "64",
    ]);
    let (_, rows) = csv_rows(&clustered);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][2], 1.0, "x = pi/4 should clear the floor:\n{clustered}");
    assert!(
        rows[3][1] < 1e-3,
        "the clustered kernel should be near-singular at x = pi:\n{clustered}"
    );
}
