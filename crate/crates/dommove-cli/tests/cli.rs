//! End-to-end runs of the `dommove` binary.

use std::path::Path;
use std::process::{Command, Output};

fn dommove(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dommove"))
        .args(args)
        .current_dir(dir)
        .env_remove("DOM_EXTERNAL_CMD")
        .output()
        .expect("binary runs")
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

fn json_at(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn compute_figure_instance() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("p.csv"), "# f1,f2\n2.0,2.5\n3.0,1.9\n");
    write(&dir.path().join("q.csv"), "2.2,2.0\n3.0,1.5\n");
    let out = dommove(
        &["compute", "p.csv", "q.csv", "--json", "out.json", "--deterministic"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("status: optimal"), "{text}");
    assert!(text.contains("changed points: 2 of 2"), "{text}");
    let doc = json_at(&dir.path().join("out.json"));
    assert!((doc["value"].as_f64().unwrap() - 0.9).abs() < 1e-9);
    assert_eq!(doc["backend"], "exact-2d");
    assert_eq!(doc["assignment"]["0"], 0);
    assert!(doc.get("solve_seconds").is_none());
}

#[test]
fn compute_skips_solver_on_full_domination() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("p.csv"), "0,0\n");
    write(&dir.path().join("q.csv"), "1,1\n2,0.5\n");
    // a backend that would explode if it were ever invoked
    let out = dommove(
        &[
            "compute",
            "p.csv",
            "q.csv",
            "--backend",
            "external",
            "--external-cmd",
            "/nonexistent-solver {lp_file} {sol_file}",
            "--json",
            "out.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let doc = json_at(&dir.path().join("out.json"));
    assert_eq!(doc["value"], 0.0);
    assert_eq!(doc["status"], "optimal");
}

#[test]
fn compute_emit_lp_writes_model_without_solving() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("p.csv"), "2.0,2.5\n3.0,1.9\n");
    write(&dir.path().join("q.csv"), "2.2,2.0\n3.0,1.5\n");
    let out = dommove(
        &["compute", "p.csv", "q.csv", "--emit-lp", "model.lp"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let lp = std::fs::read_to_string(dir.path().join("model.lp")).unwrap();
    assert!(lp.contains("xpq_1_1 + xpq_2_1 = 1"), "{lp}");
    assert!(lp.starts_with("Minimize\n"));
    assert!(lp.ends_with("End\n"));

    // the dedicated verb emits byte-identical output
    let out = dommove(
        &["emit-lp", "p.csv", "q.csv", "-o", "model2.lp"],
        dir.path(),
    );
    assert!(out.status.success());
    let lp2 = std::fs::read_to_string(dir.path().join("model2.lp")).unwrap();
    assert_eq!(lp, lp2);
}

#[test]
fn csv_errors_name_file_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("p.csv"), "1.0,2.0\n1.0,bogus\n");
    write(&dir.path().join("q.csv"), "1.0,1.0\n");
    let out = dommove(&["compute", "p.csv", "q.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("p.csv:2:5"), "{err}");
}

#[test]
fn dimension_mismatch_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("p.csv"), "1.0,2.0\n");
    write(&dir.path().join("q.csv"), "1.0,2.0,3.0\n");
    let out = dommove(&["compute", "p.csv", "q.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn broken_external_solver_maps_to_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("p.csv"), "2.0,2.5\n3.0,1.9\n");
    write(&dir.path().join("q.csv"), "2.2,2.0\n3.0,1.5\n");
    let out = dommove(
        &[
            "compute",
            "p.csv",
            "q.csv",
            "--backend",
            "external",
            "--external-cmd",
            "/nonexistent-solver {lp_file} {sol_file}",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn report_ranks_dominating_algorithm_first() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("toy");
    std::fs::create_dir(&data).unwrap();
    write(&data.join("alpha.csv"), "0.0,1.0\n1.0,0.0\n");
    write(&data.join("beta.csv"), "0.5,1.5\n1.5,0.5\n");
    let out = dommove(
        &["report", "toy", "--json", "report.json", "--deterministic"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let doc = json_at(&dir.path().join("report.json"));
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows[0]["algorithm"], "alpha");
    assert_eq!(rows[0]["dom_value"], 0.0);
    assert!(rows[1]["dom_value"].as_f64().unwrap() > 0.0);
    assert!(doc["metadata"].get("solve_seconds").is_none());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("algorithm"), "{text}");
}

#[test]
fn report_needs_at_least_two_algorithms() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("solo");
    std::fs::create_dir(&data).unwrap();
    write(&data.join("only.csv"), "0.0,1.0\n");
    let out = dommove(&["report", "solo"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_ranking_matches_recomputed_dominance_moves() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("rand");
    std::fs::create_dir(&data).unwrap();
    // three fixed 3-objective sets
    write(&data.join("a.csv"), "5.1,1.2,4.0\n2.2,3.3,2.9\n1.0,4.4,3.8\n");
    write(&data.join("b.csv"), "4.9,1.5,3.6\n2.0,3.1,3.1\n0.8,4.9,4.0\n");
    write(&data.join("c.csv"), "6.0,0.9,4.2\n2.5,2.5,2.5\n1.4,4.0,3.2\n");
    let out = dommove(
        &["report", "rand", "--json", "report.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let doc = json_at(&dir.path().join("report.json"));

    // oracle: recompute each dominance move against the joint front
    let sets: Vec<(String, dommove::PointSet)> = ["a", "b", "c"]
        .iter()
        .map(|n| {
            (
                n.to_string(),
                dommove::io::read_point_set(data.join(format!("{n}.csv"))).unwrap(),
            )
        })
        .collect();
    let union = dommove::PointSet::new(
        sets.iter()
            .flat_map(|(_, s)| s.points().iter().cloned())
            .collect(),
    )
    .unwrap();
    let joint = dommove::nondominated_filter(&union);
    let mut expect: Vec<(String, f64)> = sets
        .iter()
        .map(|(n, s)| {
            (
                n.clone(),
                dommove::solver::solve_dp_exact(s, &joint, 20).unwrap().value,
            )
        })
        .collect();
    expect.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));

    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for (row, (name, value)) in rows.iter().zip(&expect) {
        assert_eq!(row["algorithm"].as_str().unwrap(), name);
        assert!((row["dom_value"].as_f64().unwrap() - value).abs() < 1e-9);
    }
}

#[test]
fn correlate_reports_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    // synthetic report where dom == -hv exactly and igd is constant
    let rows: Vec<serde_json::Value> = (0..5)
        .map(|i| {
            serde_json::json!({
                "algorithm": format!("a{i}"),
                "dom_value": i as f64,
                "hv_value": -(i as f64),
                "igd_plus_value": 1.0,
                "eps_additive_value": 10.0 - i as f64,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "problem": "synthetic",
        "rows": rows,
        "metadata": {
            "backend": "exact-dp",
            "gap_target": 1e-8,
            "reference_size": 5,
            "hv_reference": [1.0, 1.0],
        }
    });
    write(
        &dir.path().join("report.json"),
        &serde_json::to_string(&doc).unwrap(),
    );
    let out = dommove(
        &["correlate", "report.json", "--json", "corr.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let corr = json_at(&dir.path().join("corr.json"));
    let problem = &corr["problems"][0];
    assert!((problem["neg_hv"]["r"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(problem["neg_hv"]["significant"], true);
    // constant igd column surfaces a per-cell error rather than failing
    assert!(problem["igd_plus"]["error"].as_str().unwrap().contains("zero-variance"));
    // eps anti-correlates perfectly
    assert!((problem["eps_additive"]["r"].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn correlate_needs_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let doc = serde_json::json!({
        "problem": "tiny",
        "rows": [
            {"algorithm": "a", "dom_value": 1.0, "hv_value": 0.5,
             "igd_plus_value": 0.1, "eps_additive_value": 0.2},
            {"algorithm": "b", "dom_value": 2.0, "hv_value": 0.4,
             "igd_plus_value": 0.2, "eps_additive_value": 0.3},
        ],
        "metadata": {"backend": "exact-dp", "gap_target": 1e-8,
                      "reference_size": 2, "hv_reference": [1.0, 1.0]}
    });
    write(
        &dir.path().join("tiny.json"),
        &serde_json::to_string(&doc).unwrap(),
    );
    let out = dommove(&["correlate", "tiny.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn running_matrix_diagonal_and_monotonicity() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("series");
    std::fs::create_dir(&data).unwrap();
    // cumulative improving archives on a shrinking front
    write(&data.join("gen_10.csv"), "8.0,9.0\n9.0,8.0\n");
    write(&data.join("gen_20.csv"), "6.0,7.0\n7.0,6.0\n8.0,9.0\n");
    write(&data.join("gen_30.csv"), "4.0,5.0\n5.0,4.0\n6.0,7.0\n");
    let out = dommove(
        &["running", "series", "--pivots", "10,30", "--out", "run.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("generation,pivot,value"));
    let mut cells: Vec<(u64, String, f64)> = Vec::new();
    for line in lines {
        let parts: Vec<&str> = line.split(',').collect();
        cells.push((
            parts[0].parse().unwrap(),
            parts[1].to_string(),
            parts[2].parse().unwrap(),
        ));
    }
    // diagonal zeros
    for (generation, pivot, value) in &cells {
        if pivot == &generation.to_string() {
            assert_eq!(*value, 0.0);
        }
    }
    // later generations never score worse against a fixed pivot
    for pivot in ["10", "30"] {
        let column: Vec<f64> = cells
            .iter()
            .filter(|(_, p, _)| p == pivot)
            .map(|(_, _, v)| *v)
            .collect();
        assert_eq!(column.len(), 3);
        assert!(column.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{column:?}");
    }
}

#[test]
fn running_single_generation_is_a_zero_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("one");
    std::fs::create_dir(&data).unwrap();
    write(&data.join("gen_1.csv"), "1.0,2.0\n2.0,1.0\n");
    let out = dommove(&["running", "one"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "generation,pivot,value\n1,1,0\n");
}

#[test]
fn running_rejects_unknown_pivot() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("series");
    std::fs::create_dir(&data).unwrap();
    write(&data.join("gen_1.csv"), "1.0,2.0\n");
    let out = dommove(&["running", "series", "--pivots", "7"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn size_prints_model_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dommove(&["size", "200", "200", "5"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("continuous variables: 202000"), "{text}");
    assert!(text.contains("binary variables: 440200"));
    assert!(text.contains("constraints: 923400"));
}

#[test]
fn deterministic_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("p.csv"), "2.0,2.5\n3.0,1.9\n");
    write(&dir.path().join("q.csv"), "2.2,2.0\n3.0,1.5\n");
    for name in ["one.json", "two.json"] {
        let out = dommove(
            &["compute", "p.csv", "q.csv", "--deterministic", "--json", name],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("one.json")).unwrap();
    let b = std::fs::read(dir.path().join("two.json")).unwrap();
    assert_eq!(a, b);

    let data = dir.path().join("algos");
    std::fs::create_dir(&data).unwrap();
    write(&data.join("x.csv"), "0.0,1.0\n1.0,0.0\n");
    write(&data.join("y.csv"), "0.5,1.5\n1.5,0.5\n");
    for name in ["r1.json", "r2.json"] {
        let out = dommove(
            &["report", "algos", "--deterministic", "--json", name],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("r1.json")).unwrap();
    let b = std::fs::read(dir.path().join("r2.json")).unwrap();
    assert_eq!(a, b);
}
