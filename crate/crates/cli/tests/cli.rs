//! Behaviour of the command-line interface: reports, exit codes, files.

mod common;

use common::{data, f, ldod, ldod_json, run_spec, scratch};

#[test]
fn eval_reports_criterion_and_support() {
    let r = ldod(&["eval", &data("b3_bbd.csv"), "--model", "mechanistic"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("phi       -51.51"), "{}", r.stdout);
    let j = ldod_json(&["eval", &data("b3_bbd.csv"), "--model", "mechanistic"], 0);
    assert!((f(&j["phi"]) + 51.5174).abs() < 0.1);
    assert_eq!(j["n"], 24);
    assert_eq!(j["p"], 6);
    let reps: u64 = j["support"].as_array().unwrap().iter().map(|s| s["replicates"].as_u64().unwrap()).sum();
    assert_eq!(reps, 24);
    assert_eq!(j["distinct_points"].as_u64().unwrap() as usize, j["support"].as_array().unwrap().len());
}

#[test]
fn eval_of_singular_design_exits_3() {
    let dir = scratch("singular");
    let path = dir.join("d.csv");
    std::fs::write(&path, "R,C,T\n3,2,80\n3,2,80\n6,1,70\n").unwrap();
    let r = ldod(&["eval", path.to_str().unwrap(), "--model", "mechanistic"]);
    assert_eq!(r.code, 3);
    assert!(r.stdout.contains("-inf"), "{}", r.stdout);
    let j = ldod_json(&["eval", path.to_str().unwrap(), "--model", "mechanistic"], 3);
    assert_eq!(j["phi"], "-inf");
}

#[test]
fn malformed_inputs_exit_2_naming_file_and_line() {
    let dir = scratch("malformed");
    let path = dir.join("bad.csv");
    std::fs::write(&path, "R,C,T\n3,2,80\n3,x,80\n").unwrap();
    let r = ldod(&["eval", path.to_str().unwrap(), "--model", "mechanistic"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("bad.csv, line 3"), "{}", r.stderr);
    std::fs::write(&path, "R,C,T\n3,2,95\n").unwrap();
    let r = ldod(&["eval", path.to_str().unwrap(), "--model", "mechanistic"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 2"), "{}", r.stderr);
    let r = ldod(&["eval", dir.join("missing.csv").to_str().unwrap(), "--model", "mechanistic"]);
    assert_eq!(r.code, 2);
    let r = ldod(&["eval", &data("b3_bbd.csv"), "--model", "hybrid"]);
    assert_eq!(r.code, 2, "columns R,C,T do not fit the hybrid model");
    let r = ldod(&["eval", &data("b3_bbd.csv"), "--model", "mechanistic", "--prior", "1,2,3"]);
    assert_eq!(r.code, 2);
}

#[test]
fn unknown_algorithm_lists_valid_options() {
    let r = ldod(&["search", "--model", "mechanistic", "--algorithm", "annealing"]);
    assert_eq!(r.code, 2);
    for name in ["discrete-pea", "discrete-cea", "continuous-pea", "continuous-cea"] {
        assert!(r.stderr.contains(name), "{}", r.stderr);
    }
}

#[test]
fn seeded_search_is_byte_identical() {
    let dir = scratch("determinism");
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "1", "3"].iter().enumerate() {
        let out = dir.join(format!("d{k}.csv"));
        let j = ldod_json(
            &[
                "search",
                "--spec",
                &run_spec("example1_search.json"),
                "--tries",
                "4",
                "--seed",
                "7",
                "--threads",
                threads,
                "--out",
                out.to_str().unwrap(),
            ],
            0,
        );
        outputs.push((std::fs::read(&out).unwrap(), j));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2], "thread count must not change results");
    let single: Vec<_> = (0..2)
        .map(|_| ldod(&["search", "--model", "hybrid", "--algorithm", "continuous-cea", "--tries", "1", "--seed", "3"]))
        .collect();
    assert_eq!(single[0].stdout, single[1].stdout);
}

#[test]
fn search_writes_design_and_trace() {
    let dir = scratch("search_files");
    let (out, trace) = (dir.join("best.csv"), dir.join("trace.json"));
    let j = ldod_json(
        &[
            "search",
            "--model",
            "mechanistic",
            "--algorithm",
            "discrete-cea",
            "--tries",
            "5",
            "--seed",
            "2",
            "--out",
            out.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ],
        0,
    );
    let again = ldod_json(&["eval", out.to_str().unwrap(), "--model", "mechanistic"], 0);
    assert!((f(&again["phi"]) - f(&j["best_phi"])).abs() < 1e-9, "written design reproduces the reported phi");
    let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    let tries = t["tries"].as_array().unwrap();
    assert_eq!(tries.len(), 5);
    for tr in tries {
        let traj: Vec<f64> = tr["trajectory"].as_array().unwrap().iter().map(f).collect();
        assert!(traj.windows(2).all(|w| w[1] > w[0]));
        assert!((traj.last().unwrap() - f(&tr["final_phi"])).abs() < 1e-8);
    }
    assert_eq!(j["best_three"].as_array().unwrap().len(), 3);
}

#[test]
fn multiphase_without_closest_distances_exits_2() {
    let model = r#"{"expr": "a*exp(-b*x)", "params": ["a", "b"], "factors": ["x"]}"#;
    let r = ldod(&["multiphase", "--model", model, "--prior", "1,1", "--region", "x=0:5", "--n", "4", "--levels", "0,1,2,5"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("closest"), "{}", r.stderr);
    let ok = ldod_json(
        &["multiphase", "--model", model, "--prior", "1,1", "--region", "x=0:5", "--n", "4", "--levels", "0,1,2,5", "--closest", "0.1", "--tries", "5"],
        0,
    );
    assert!(f(&ok["phi"]) >= f(&ok["phase3"]["snapped_phi"]));
}

#[test]
fn spec_of_the_wrong_command_is_rejected() {
    let r = ldod(&["search", "--spec", &run_spec("example1_reactor.json")]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("multiphase"), "{}", r.stderr);
}

#[test]
fn fit_handles_exact_and_insufficient_data() {
    let dir = scratch("fit");
    let line = dir.join("line.csv");
    std::fs::write(&line, "x,y\n1,3\n2,5\n").unwrap();
    let model = r#"{"expr": "a + b*x", "params": ["a", "b"], "factors": ["x"]}"#;
    let j = ldod_json(&["fit", line.to_str().unwrap(), "--model", model, "--init", "0,0"], 0);
    assert!(f(&j["sse"]) < 1e-12, "{j}");
    let theta: Vec<f64> = j["theta_hat"].as_array().unwrap().iter().map(f).collect();
    assert!((theta[0] - 1.0).abs() < 1e-6 && (theta[1] - 2.0).abs() < 1e-6);

    let short = dir.join("short.csv");
    std::fs::write(&short, "S,E,P,xi\n5,6.25,300,70\n5,6.25,200,80\n2.5,62.5,400,95\n7.5,6.25,300,77\n5,0.625,300,50\n")
        .unwrap();
    let r = ldod(&["fit", short.to_str().unwrap(), "--model", "hybrid", "--transform", "percent-odds"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("cannot identify"), "{}", r.stderr);
}

#[test]
fn fit_writes_a_prior_usable_by_eval() {
    let dir = scratch("fit_prior");
    let prior = dir.join("prior.json");
    let j = ldod_json(
        &["fit", &data("table4_data.csv"), "--model", "hybrid", "--transform", "percent-odds", "--prior-out", prior.to_str().unwrap()],
        0,
    );
    assert_eq!(j["rows"], 17);
    assert_eq!(j["dropped"], 1);
    let e = ldod_json(&["eval", &data("table5a_pea.csv"), "--model", "hybrid", "--prior", prior.to_str().unwrap()], 0);
    assert!((f(&e["phi"]) - 41.22).abs() < 0.1);
}

#[test]
fn efficiency_of_a_design_against_itself_is_100() {
    let j = ldod_json(&["efficiency", &data("table7_multiphase.csv"), &data("table7_multiphase.csv"), "--model", "mechanistic"], 0);
    assert_eq!(f(&j["efficiency_percent"]), 100.0);
}

#[test]
fn standard_designs_match_tabulated_files() {
    let dir = scratch("standard");
    for (kind, example, file) in [
        ("face_centred_ccd", "1", "b1_face_ccd.csv"),
        ("spherical_ccd", "1", "b2_spherical_ccd.csv"),
        ("box_behnken", "1", "b3_bbd.csv"),
        ("face_centred_ccd", "2", "table4_ccd.csv"),
    ] {
        let r = ldod(&["standard-design", "--kind", kind, "--example", example]);
        assert_eq!(r.code, 0);
        let parse = |s: &str| -> Vec<Vec<f64>> {
            s.lines().skip(1).map(|l| l.split(',').map(|v| v.trim().parse().unwrap()).collect()).collect()
        };
        let expected = std::fs::read_to_string(data(file)).unwrap();
        assert_eq!(parse(&r.stdout), parse(&expected), "{kind} {example}");
        assert_eq!(r.stdout.lines().next(), expected.lines().next());
        // Written files read back to the same matrix.
        let out = dir.join(file);
        assert_eq!(ldod(&["standard-design", "--kind", kind, "--example", example, "--out", out.to_str().unwrap()]).code, 0);
        assert_eq!(parse(&std::fs::read_to_string(&out).unwrap()), parse(&expected));
    }
    let r = ldod(&["standard-design", "--kind", "box_behnken", "--example", "2"]);
    assert_eq!(r.code, 2);
}
