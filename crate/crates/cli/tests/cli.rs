use std::fs;
use std::path::Path;

use serde_json::Value;

use pqvar::pathcore::io::read_path_csv;
use pqvar::variation::p_variation_exact;

fn run(args: &[&str]) -> i32 {
    pqvar_cli::run(std::iter::once("pqvar").chain(args.iter().copied()))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn out_dir(tmp: &tempfile::TempDir, name: &str) -> String {
    tmp.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn condition_check_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let a = out_dir(&tmp, "a");
    assert_eq!(run(&["condition-check", "--p", "1.4", "--q", "1", "--out", &a]), 0);
    let c = read_json(&Path::new(&a).join("condition.json"));
    assert_eq!(c["result"]["feasible"], true);
    let lo = c["result"]["alpha_interval"][0].as_f64().unwrap();
    let hi = c["result"]["alpha_interval"][1].as_f64().unwrap();
    assert!((lo - 4.0 / 7.0).abs() < 1e-12 && (hi - 5.0 / 7.0).abs() < 1e-12);

    let b = out_dir(&tmp, "b");
    assert_eq!(run(&["condition-check", "--p", "2", "--q", "1", "--out", &b]), 2);
    assert_eq!(run(&["condition-check", "--p", "2", "--q", "1", "--force", "--out", &b]), 0);
    assert_eq!(read_json(&Path::new(&b).join("condition.json"))["result"]["feasible"], false);
}

#[test]
fn tanaka_example_writes_one_report_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "t");
    assert_eq!(run(&["examples", "--name", "tanaka", "--seeds", "10", "--out", &out]), 0);
    let reports: Vec<_> = fs::read_dir(Path::new(&out).join("reports")).unwrap().collect();
    assert_eq!(reports.len(), 10);
    for r in 0..10 {
        let v = read_json(&Path::new(&out).join(format!("reports/ito_{r}.json")));
        assert_eq!(v["config"]["function"], "ramp(0.1)");
        let res = v["result"]["residual"].as_f64().unwrap();
        let inc = v["result"]["max_increment"].as_f64().unwrap();
        assert!(res <= 2.0 * inc, "replicate {r}: {res} > 2 * {inc}");
    }
}

#[test]
fn input_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "x");
    assert_eq!(run(&["no-such-command"]), 1);
    assert_eq!(run(&["examples", "--name", "nope", "--out", &out]), 1);
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"seeds": "many"}"#).unwrap();
    assert_eq!(run(&["simulate", "--config", bad.to_str().unwrap(), "--out", &out]), 1);
    fs::write(&bad, r#"{"unknown_key": 1}"#).unwrap();
    assert_eq!(run(&["simulate", "--config", bad.to_str().unwrap(), "--out", &out]), 1);
    assert_eq!(run(&["simulate", "--config", "/does/not/exist.json", "--out", &out]), 1);
    assert_eq!(run(&["variation", "--name", "nonsense", "--out", &out]), 1);
}

#[test]
fn flags_override_config_and_config_is_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("sim.json");
    fs::write(&cfg, r#"{"seed": 4, "seeds": 2, "simulation": {"n_steps": 64, "x0": 0.5}}"#).unwrap();
    let out = out_dir(&tmp, "s");
    assert_eq!(run(&["simulate", "--config", cfg.to_str().unwrap(), "--seeds", "3", "--out", &out]), 0);
    let eff = read_json(&Path::new(&out).join("effective_config.json"));
    assert_eq!(eff["command"], "simulate");
    assert_eq!(eff["config"]["seeds"], 3);
    assert_eq!(eff["config"]["seed"], 4);
    assert_eq!(eff["config"]["simulation"]["n_steps"], 64);
    for r in 0..3 {
        let v = read_json(&Path::new(&out).join(format!("simulation_{r}.json")));
        assert_eq!(v["config"], eff["config"]);
        assert_eq!(v["result"]["x"][0], 0.5);
        assert_eq!(v["result"]["x"].as_array().unwrap().len(), 65);
    }
    assert!(!Path::new(&out).join("simulation_3.json").exists());
}

#[test]
fn variation_of_a_simulated_path_matches_the_library() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = out_dir(&tmp, "sim");
    assert_eq!(run(&["simulate", "--n-steps", "200", "--seed", "8", "--out", &sim]), 0);
    let csv = Path::new(&sim).join("path_0.csv");
    let out = out_dir(&tmp, "var");
    assert_eq!(run(&["variation", "--input", csv.to_str().unwrap(), "--p", "2.5", "--out", &out]), 0);
    let v = read_json(&Path::new(&out).join("variation.json"));
    let path = read_path_csv(fs::File::open(&csv).unwrap()).unwrap();
    let direct = p_variation_exact(&path, 2.5).unwrap();
    assert_eq!(v["result"]["report"]["value"].as_f64().unwrap(), direct.value);
    assert_eq!(v["result"]["report"]["exactness"], "exact-on-grid");
}

#[test]
fn young_commands_refuse_and_force() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "y");
    assert_eq!(run(&["young1d", "--out", &out]), 0);
    let v = read_json(&Path::new(&out).join("young1d.json"));
    assert!((v["result"]["value"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-3);
    assert_eq!(run(&["young1d", "--p", "2", "--q", "2", "--out", &out]), 2);
    assert_eq!(run(&["young1d", "--p", "2", "--q", "2", "--force", "--out", &out]), 0);
    assert!(!read_json(&Path::new(&out).join("young1d.json"))["result"]["notes"].as_array().unwrap().is_empty());

    assert_eq!(run(&["young2d", "--p", "2", "--q", "1", "--out", &out]), 2);
    assert_eq!(run(&["young2d", "--p", "1.4", "--q", "1", "--out", &out]), 0);
    let v = read_json(&Path::new(&out).join("young2d.json"));
    assert!((v["result"]["forward"]["value"].as_f64().unwrap() - 0.25).abs() < 1e-3);
    assert!(v["result"]["corner_gap"].as_f64().unwrap() < 1e-3);
}

#[test]
fn ito_check_refuses_rough_gradient_claims() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "i");
    let base = ["ito-check", "--name", "x3t3cos", "--schedule", "64,256", "--seeds", "2", "--out", &out];
    assert_eq!(run(&[&base[..], &["--p", "2", "--q", "1"]].concat()), 2);
    assert_eq!(run(&[&base[..], &["--p", "2", "--q", "1", "--force"]].concat()), 0);
    let notes = &read_json(&Path::new(&out).join("reports/ito_0.json"))["result"]["notes"];
    assert!(notes.as_array().unwrap().iter().any(|n| n.as_str().unwrap().starts_with("forced")));
    assert_eq!(run(&["ito-check", "--name", "x3cos", "--gamma", "2.5", "--seeds", "1", "--out", &out]), 2);
    assert_eq!(run(&["ito-check", "--name", "xysin", "--out", &out]), 1);
}

#[test]
fn localtime_artifacts_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(&tmp, "l");
    let args = ["localtime", "--n-steps", "1024", "--levels", "65", "--time-stride", "128", "--bandwidth", "0.1", "--out", &out];
    assert_eq!(run(&args), 0);
    let v = read_json(&Path::new(&out).join("localtime_0.json"));
    assert_eq!(v["result"]["tanaka"]["convention"], "tanaka-no-half");
    assert!(v["result"]["tanaka_residual"].as_f64().unwrap() < 1e-12);
    let slice = read_path_csv(fs::File::open(Path::new(&out).join("localtime_0_LT.csv")).unwrap()).unwrap();
    assert_eq!(slice.len(), 65);
    assert!(slice.values().iter().all(|&l| l >= -1e-12));
    assert_eq!((slice.first(), slice.last()), (0.0, 0.0));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (out_dir(&tmp, "a"), out_dir(&tmp, "b"));
    for out in [&a, &b] {
        let args = ["localtime", "--n-steps", "512", "--seeds", "2", "--levels", "33", "--probe", "1.5,3", "--out", out];
        assert_eq!(run(&args), 0);
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 7);
    for n in names {
        assert_eq!(fs::read(Path::new(&a).join(&n)).unwrap(), fs::read(Path::new(&b).join(&n)).unwrap(), "{n:?}");
    }
}
