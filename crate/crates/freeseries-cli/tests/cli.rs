//! End-to-end tests of the binary: exit codes, report determinism, and the
//! documented flows on small reference nodes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_freeseries"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| {
        panic!("stdout is not a JSON report: {e}\nstdout: {text}");
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

struct Fixtures {
    dir: tempfile::TempDir,
}

impl Fixtures {
    fn new() -> Self {
        Fixtures {
            dir: tempfile::tempdir().expect("tempdir"),
        }
    }

    fn write(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        fs::write(&path, contents).expect("write fixture");
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// One-variable node realizing (1−z)/(1+z)-type data: A=−1, B=C=√2, D=−1.
    fn e1(&self) -> PathBuf {
        self.write(
            "e1.json",
            &format!(
                r#"{{"n_vars":1,"dims":[1],"A":[[[-1,0]]],"B":[[[{SQRT2},0]]],
                   "C":[[[{SQRT2},0]]],"D":[[[-1,0]]]}}"#
            ),
        )
    }

    /// The inverse-series node of `e1`: A=1, B=−√2, C=√2, D=−1.
    fn e1_assoc(&self) -> PathBuf {
        self.write(
            "e1assoc.json",
            &format!(
                r#"{{"n_vars":1,"dims":[1],"A":[[[1,0]]],"B":[[[{m},0]]],
                   "C":[[[{SQRT2},0]]],"D":[[[-1,0]]]}}"#,
                m = -SQRT2
            ),
        )
    }

    /// Product of `e1` in variable 1 with `e1` in variable 2 (two components).
    fn product(&self) -> PathBuf {
        self.write(
            "prod.json",
            &format!(
                r#"{{"n_vars":2,"dims":[1,1],
                   "A":[[[-1,0],[2,0]],[[0,0],[-1,0]]],
                   "B":[[[{m},0]],[[{SQRT2},0]]],
                   "C":[[[{SQRT2},0],[{m},0]]],
                   "D":[[[1,0]]]}}"#,
                m = -SQRT2
            ),
        )
    }

    /// A=0, B=C=1, D=0: the single-variable coordinate series.
    fn shift(&self) -> PathBuf {
        self.write(
            "shift.json",
            r#"{"n_vars":1,"dims":[1],"A":[[[0,0]]],"B":[[[1,0]]],"C":[[[1,0]]],"D":[[[0,0]]]}"#,
        )
    }

    /// A=1/2, B=3/4, C=1, D=−1/2: a disk-inner scalar node.
    fn blaschke(&self) -> PathBuf {
        self.write(
            "blaschke.json",
            r#"{"n_vars":1,"dims":[1],"A":[[[0.5,0]]],"B":[[[0.75,0]]],
               "C":[[[1,0]]],"D":[[[-0.5,0]]]}"#,
        )
    }

    /// Realization of i·z1 + i·z2 (selfadjoint on the line case).
    fn skew_sum(&self) -> PathBuf {
        self.write(
            "phisum.json",
            r#"{"n_vars":2,"dims":[1,1],"A":[[[0,0],[0,0]],[[0,0],[0,0]]],
               "B":[[[1,0]],[[1,0]]],"C":[[[0,1],[0,1]]],"D":[[[0,0]]]}"#,
        )
    }

    /// First coordinate in component 1, zero-dimensional in component 2.
    fn first_factor_family(&self) -> PathBuf {
        self.write("fam.json", r#"{"bases":[[[[1,0]]],[[]]]}"#)
    }
}

fn arg(path: &Path) -> String {
    path.display().to_string()
}

// -------------------------------------------------------------------
// Report envelope and determinism
// -------------------------------------------------------------------

#[test]
fn report_envelope_has_the_five_fields_and_is_deterministic() {
    let fx = Fixtures::new();
    let e1 = arg(&fx.e1());
    let out1 = run(&["check", "--case", "line", "--input", &e1]);
    let out2 = run(&["check", "--case", "line", "--input", &e1]);
    assert_eq!(out1.stdout, out2.stdout, "reports must be byte-identical");
    let rep = report(&out1);
    for key in ["command", "inputs", "result", "residuals", "seed"] {
        assert!(rep.get(key).is_some(), "missing field {key}");
    }
    assert_eq!(rep["command"], "check");
    assert_eq!(rep["seed"], 0);
    // Keys are emitted in sorted order at every level.
    let text = String::from_utf8_lossy(&out1.stdout);
    let c = text.find("\"command\"").unwrap();
    let i = text.find("\"inputs\"").unwrap();
    let r = text.find("\"result\"").unwrap();
    let s = text.find("\"seed\"").unwrap();
    assert!(c < i && i < r && r < s);
}

#[test]
fn seeded_commands_are_reproducible_and_seed_sensitive() {
    let fx = Fixtures::new();
    let prod = arg(&fx.product());
    let a = run(&["eval", "--input", &prod, "--seed", "7"]);
    let b = run(&["eval", "--input", &prod, "--seed", "7"]);
    let c = run(&["eval", "--input", &prod, "--seed", "8"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(report(&a)["seed"], 7);
}

// -------------------------------------------------------------------
// Classification flows
// -------------------------------------------------------------------

#[test]
fn check_line_certifies_the_reference_node_with_unit_certificate() {
    let fx = Fixtures::new();
    let out = run(&["check", "--case", "line", "--input", &arg(&fx.e1())]);
    assert_eq!(code(&out), 0);
    let rep = report(&out);
    assert_eq!(rep["result"]["j_unitary"], true);
    assert_eq!(rep["result"]["nu"], serde_json::json!([0]));
    // H is a block diagonal with a single 1×1 block equal to 1.
    let h = &rep["result"]["H"][0][0][0];
    assert!((h[0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(h[1].as_f64().unwrap().abs() < 1e-12);
    // Residuals are reported and tiny.
    let lyap = rep["residuals"]["lyapunov"].as_f64().unwrap();
    assert!(lyap < 1e-12);
}

#[test]
fn check_inner_line_rejects_the_inverse_node_with_exit_one() {
    let fx = Fixtures::new();
    let out = run(&[
        "check",
        "--case",
        "inner-line",
        "--input",
        &arg(&fx.e1_assoc()),
    ]);
    assert_eq!(code(&out), 1, "indefinite certificate ⇒ not inner ⇒ exit 1");
    let rep = report(&out);
    assert_eq!(rep["result"]["j_unitary"], true);
    assert_eq!(rep["result"]["inner"], false);
    assert_eq!(rep["result"]["nu"], serde_json::json!([1]));
}

#[test]
fn check_covers_all_six_cases() {
    let fx = Fixtures::new();
    let e1 = arg(&fx.e1());
    let blaschke = arg(&fx.blaschke());
    let skew = arg(&fx.skew_sum());
    assert_eq!(code(&run(&["check", "--case", "line", "--input", &e1])), 0);
    assert_eq!(
        code(&run(&["check", "--case", "inner-line", "--input", &e1])),
        0
    );
    assert_eq!(
        code(&run(&["check", "--case", "circle", "--input", &blaschke])),
        0
    );
    assert_eq!(
        code(&run(&["check", "--case", "inner-disk", "--input", &blaschke])),
        0
    );
    let sa = run(&["check", "--case", "sa-line", "--input", &skew]);
    assert_eq!(code(&sa), 0);
    assert_eq!(report(&sa)["result"]["selfadjoint"], true);
    // The skew sum is not selfadjoint in the circle sense; expect exit 1.
    assert_eq!(
        code(&run(&["check", "--case", "sa-circle", "--input", &skew])),
        1
    );
}

#[test]
fn assoc_h_reports_the_certificate_and_negative_squares() {
    let fx = Fixtures::new();
    let out = run(&["assoc-h", "--input", &arg(&fx.e1_assoc())]);
    assert_eq!(code(&out), 0);
    let rep = report(&out);
    assert_eq!(rep["result"]["nu"], serde_json::json!([1]));
    let h = &rep["result"]["H"][0][0][0];
    assert!((h[0].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

// -------------------------------------------------------------------
// Constructive flows
// -------------------------------------------------------------------

#[test]
fn expand_writes_a_series_document_that_hankel_accepts() {
    let fx = Fixtures::new();
    let series_path = fx.path("series.json");
    let out = run(&[
        "expand",
        "--input",
        &arg(&fx.e1()),
        "--degree",
        "5",
        "--output",
        &arg(&series_path),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["result"]["degree"], 5);
    let h = run(&["hankel", "--input", &arg(&series_path)]);
    assert_eq!(code(&h), 0);
    assert_eq!(report(&h)["result"]["ranks"], serde_json::json!([1]));
}

#[test]
fn minimize_compresses_a_padded_node() {
    let fx = Fixtures::new();
    let padded = fx.write(
        "padded.json",
        &format!(
            r#"{{"n_vars":1,"dims":[2],
               "A":[[[-1,0],[0,0]],[[0,0],[0.3,0]]],
               "B":[[[{SQRT2},0]],[[0,0]]],
               "C":[[[{SQRT2},0],[0,0]]],
               "D":[[[-1,0]]]}}"#
        ),
    );
    let out = run(&["minimize", "--input", &arg(&padded)]);
    assert_eq!(code(&out), 0);
    let rep = report(&out);
    assert_eq!(rep["result"]["dims_before"], serde_json::json!([2]));
    assert_eq!(rep["result"]["dims_after"], serde_json::json!([1]));
}

#[test]
fn cayley_with_unit_parameter_maps_the_coordinate_node_to_e1() {
    let fx = Fixtures::new();
    let out = run(&["cayley", "--a", "1,0", "--input", &arg(&fx.shift())]);
    assert_eq!(code(&out), 0);
    let node = &report(&out)["result"]["node"];
    let a = node["A"][0][0][0].as_f64().unwrap();
    let b = node["B"][0][0][0].as_f64().unwrap();
    let d = node["D"][0][0][0].as_f64().unwrap();
    assert!((a + 1.0).abs() < 1e-12);
    assert!((b - SQRT2).abs() < 1e-12);
    assert!((d + 1.0).abs() < 1e-12);
}

#[test]
fn complete_from_output_data_returns_a_certified_node() {
    let fx = Fixtures::new();
    let completed = fx.path("completed.json");
    let out = run(&[
        "complete",
        "--from",
        "ca",
        "--case",
        "line",
        "--input",
        &arg(&fx.e1()),
        "--output",
        &arg(&completed),
    ]);
    assert_eq!(code(&out), 0);
    let recheck = run(&["check", "--case", "line", "--input", &arg(&completed)]);
    assert_eq!(code(&recheck), 0);
    assert_eq!(report(&recheck)["result"]["j_unitary"], true);
}

#[test]
fn balance_line_yields_identity_certificate() {
    let fx = Fixtures::new();
    let balanced = fx.path("balanced.json");
    let out = run(&[
        "balance",
        "--case",
        "line",
        "--input",
        &arg(&fx.e1()),
        "--output",
        &arg(&balanced),
    ]);
    assert_eq!(code(&out), 0);
    let recheck = run(&["check", "--case", "line", "--input", &arg(&balanced)]);
    let rep = report(&recheck);
    let h = &rep["result"]["H"][0][0][0];
    assert!((h[0].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn factorize_search_splits_the_product_into_single_variable_factors() {
    let fx = Fixtures::new();
    let factors = fx.path("factors.json");
    let out = run(&[
        "factorize",
        "--case",
        "line",
        "--search",
        "--input",
        &arg(&fx.product()),
        "--output",
        &arg(&factors),
    ]);
    assert_eq!(code(&out), 0);
    let rep = report(&out);
    assert_eq!(rep["result"]["dims1"], serde_json::json!([1, 0]));
    assert_eq!(rep["result"]["dims2"], serde_json::json!([0, 1]));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&factors).unwrap()).unwrap();
    assert!(doc.get("factor1").is_some() && doc.get("factor2").is_some());
}

#[test]
fn factorize_with_explicit_subspace_family_works() {
    let fx = Fixtures::new();
    let out = run(&[
        "factorize",
        "--case",
        "line",
        "--subspace",
        &arg(&fx.first_factor_family()),
        "--input",
        &arg(&fx.product()),
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn decompose_splits_the_skew_sum_additively() {
    let fx = Fixtures::new();
    let parts = fx.path("parts.json");
    let out = run(&[
        "decompose",
        "--case",
        "sa-line",
        "--subspace",
        &arg(&fx.first_factor_family()),
        "--input",
        &arg(&fx.skew_sum()),
        "--output",
        &arg(&parts),
    ]);
    assert_eq!(code(&out), 0);
    let rep = report(&out);
    assert!(rep["result"]["summand1"].get("A").is_some());
    assert!(rep["result"]["summand2"].get("A").is_some());
    let doc: Value = serde_json::from_str(&fs::read_to_string(&parts).unwrap()).unwrap();
    assert!(doc.get("summand1").is_some() && doc.get("summand2").is_some());
}

// -------------------------------------------------------------------
// Kernel and model flows
// -------------------------------------------------------------------

#[test]
fn kernel_routes_agree_on_the_reference_node() {
    let fx = Fixtures::new();
    let e1 = arg(&fx.e1());
    let series_path = fx.path("series7.json");
    assert_eq!(
        code(&run(&[
            "expand",
            "--input",
            &e1,
            "--degree",
            "7",
            "--output",
            &arg(&series_path),
        ])),
        0
    );
    let node_route = run(&["kernel", "--route", "node", "--k", "1", "--degree", "3", "--input", &e1]);
    let formal_route = run(&[
        "kernel", "--route", "formal", "--k", "1", "--degree", "3", "--input", &e1,
    ]);
    let series_route = run(&[
        "kernel",
        "--route",
        "series",
        "--k",
        "1",
        "--degree",
        "3",
        "--input",
        &arg(&series_path),
    ]);
    for out in [&node_route, &formal_route, &series_route] {
        assert_eq!(code(out), 0);
    }
    let entries = |out: &Output| report(out)["result"]["kernel"]["entries"].clone();
    let e_node = entries(&node_route);
    // K_{∅,∅} = 2 on this node, by every route.
    let first = &e_node[0]["matrix"][0][0];
    assert!((first[0].as_f64().unwrap() - 2.0).abs() < 1e-9);
    for other in [entries(&formal_route), entries(&series_route)] {
        assert_eq!(e_node.as_array().unwrap().len(), other.as_array().unwrap().len());
        for (a, b) in e_node
            .as_array()
            .unwrap()
            .iter()
            .zip(other.as_array().unwrap())
        {
            assert_eq!(a["w"], b["w"]);
            assert_eq!(a["w2"], b["w2"]);
            let ma = a["matrix"][0][0][0].as_f64().unwrap();
            let mb = b["matrix"][0][0][0].as_f64().unwrap();
            assert!((ma - mb).abs() < 1e-8, "routes differ: {ma} vs {mb}");
        }
    }
}

#[test]
fn kernel_series_route_demands_enough_degree() {
    let fx = Fixtures::new();
    let series_path = fx.path("short.json");
    run(&[
        "expand",
        "--input",
        &arg(&fx.e1()),
        "--degree",
        "3",
        "--output",
        &arg(&series_path),
    ]);
    let out = run(&[
        "kernel",
        "--route",
        "series",
        "--k",
        "1",
        "--degree",
        "2",
        "--input",
        &arg(&series_path),
    ]);
    assert_eq!(code(&out), 2, "degree 2 needs coefficients up to 5");
    assert!(report(&out)["result"]["error"].is_string());
}

#[test]
fn model_realizes_an_expanded_node_minimally() {
    let fx = Fixtures::new();
    let series_path = fx.path("prodseries.json");
    run(&[
        "expand",
        "--input",
        &arg(&fx.product()),
        "--degree",
        "8",
        "--output",
        &arg(&series_path),
    ]);
    let model_path = fx.path("model.json");
    let out = run(&[
        "model",
        "--input",
        &arg(&series_path),
        "--output",
        &arg(&model_path),
    ]);
    assert_eq!(code(&out), 0);
    let rep = report(&out);
    assert_eq!(rep["result"]["dims"], serde_json::json!([1, 1]));
    assert_eq!(rep["result"]["nu"], serde_json::json!([0, 0]));
    let recheck = run(&["check", "--case", "line", "--input", &arg(&model_path)]);
    assert_eq!(code(&recheck), 0);
}

#[test]
fn schur_sample_accepts_the_disk_inner_node_and_rejects_an_expanding_one() {
    let fx = Fixtures::new();
    let ok = run(&[
        "schur-sample",
        "--input",
        &arg(&fx.blaschke()),
        "--samples",
        "60",
        "--seed",
        "11",
    ]);
    assert_eq!(code(&ok), 0);
    let rep = report(&ok);
    assert_eq!(rep["result"]["within_unit_ball"], true);
    assert!(rep["result"]["max_norm"].as_f64().unwrap() <= 1.0 + 1e-8);
    assert!(rep["result"]["used"].as_u64().unwrap() >= 50);

    let big = fx.write(
        "big.json",
        r#"{"n_vars":1,"dims":[1],"A":[[[0,0]]],"B":[[[1,0]]],"C":[[[3,0]]],"D":[[[0,0]]]}"#,
    );
    let bad = run(&[
        "schur-sample",
        "--input",
        &arg(&big),
        "--samples",
        "60",
        "--seed",
        "11",
    ]);
    assert_eq!(code(&bad), 1, "3·z exceeds the unit ball on samples");
    assert_eq!(report(&bad)["result"]["within_unit_ball"], false);
}

// -------------------------------------------------------------------
// Error handling
// -------------------------------------------------------------------

#[test]
fn missing_and_malformed_inputs_exit_two_with_an_error_report() {
    let fx = Fixtures::new();
    let out = run(&["check", "--case", "line", "--input", "/nonexistent.json"]);
    assert_eq!(code(&out), 2);
    assert!(report(&out)["result"]["error"].is_string());

    let bad = fx.write("bad.json", r#"{"unrelated": 1}"#);
    let out = run(&["expand", "--input", &arg(&bad)]);
    assert_eq!(code(&out), 2);

    let truncated = fx.write("trunc.json", r#"{"n_vars": 1,"#);
    let out = run(&["expand", "--input", &arg(&truncated)]);
    assert_eq!(code(&out), 2);

    let out = run(&["expand"]);
    assert_eq!(code(&out), 2, "--input is required");
}

#[test]
fn usage_errors_from_the_parser_exit_two() {
    let out = run(&["not-a-command"]);
    assert_eq!(code(&out), 2);
    let out = run(&["check", "--case", "bogus", "--input", "x.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn numerical_failures_exit_three() {
    let fx = Fixtures::new();
    // The circle completion needs an invertible state matrix; A = 0 fails.
    let out = run(&[
        "complete",
        "--from",
        "ca",
        "--case",
        "circle",
        "--input",
        &arg(&fx.shift()),
    ]);
    assert_eq!(code(&out), 3);
    assert!(report(&out)["result"]["error"].is_string());
}

#[test]
fn oversized_kernel_requests_are_rejected_as_usage_errors() {
    let fx = Fixtures::new();
    let out = run(&[
        "kernel",
        "--route",
        "node",
        "--k",
        "1",
        "--degree",
        "12",
        "--input",
        &arg(&fx.product()),
    ]);
    assert_eq!(code(&out), 2);
    let out = run(&["kernel", "--k", "0", "--input", &arg(&fx.product())]);
    assert_eq!(code(&out), 2, "--k is 1-based");
}
