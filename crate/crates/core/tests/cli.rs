use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn afa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afa")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Fixtures {
    _dir: TempDir,
    root: PathBuf,
}

impl Fixtures {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let f = Fixtures { _dir: dir, root };
        f.write("g3.json", r#"{"n":3,"values":[0,0,0,1,0,1,0,1]}"#);
        f.write("d.csv", "age,income,score\n0,0,1\n2,4,-1\n1,-3,2\n");
        f.write("lin.json", r#"{"type":"linear","beta0":0.5,"beta":[1,-2,3]}"#);
        f.write(
            "inter.json",
            r#"{"type":"interaction","beta0":0,"beta":[1,0,0],"gamma":[[1,2,0.5]]}"#,
        );
        f
    }

    fn write(&self, name: &str, body: &str) -> String {
        let p = self.root.join(name);
        std::fs::write(&p, body).unwrap();
        self.path(name)
    }

    fn path(&self, name: &str) -> String {
        Path::new(&self.root).join(name).to_str().unwrap().to_string()
    }
}

fn phi(json: &str) -> Vec<f64> {
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    v["phi"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn output_is_byte_identical_across_runs() {
    let f = Fixtures::new();
    let g3 = f.path("g3.json");
    let runs: [&[&str]; 4] = [
        &["attribute", "--game", &g3, "--kernel", "concave"],
        &["compare", "--game", &g3, "--kernels", "shap,es,shapley,lsprenucleolus", "--format", "csv"],
        &["kernels", "--n", "5", "--normalized"],
        &["verify", "--seed", "9", "--trials", "3", "--n-max", "4"],
    ];
    for args in runs {
        let a = afa(args);
        let b = afa(args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn json_round_trips_full_precision() {
    let f = Fixtures::new();
    let o = afa(&[
        "attribute", "--data", &f.path("d.csv"), "--model", &f.path("inter.json"),
        "--instance-values", "0.1,0.7,-1.3", "--kernel", "exp:0.9", "--format", "json",
    ]);
    assert!(o.status.success());
    let got = phi(&stdout(&o));

    use afa_core::kernels::KernelSpec;
    use afa_core::model::{estimate_value_function, InstanceRef};
    let data = afa_core::io::load_dataset_csv(f.path("d.csv")).unwrap();
    let model = afa_core::io::load_model_json(f.path("inter.json")).unwrap();
    let game =
        estimate_value_function(&model, &data, &InstanceRef::Values(vec![0.1, 0.7, -1.3])).unwrap();
    let kernel: KernelSpec = "exp:0.9".parse().unwrap();
    let want = afa_core::solver::solve_constrained(&game, &kernel.build(3).unwrap()).unwrap();
    assert_eq!(got, want.phi);
}

#[test]
fn features_are_named_from_the_header() {
    let f = Fixtures::new();
    let o = afa(&[
        "attribute", "--data", &f.path("d.csv"), "--model", &f.path("lin.json"), "--instance", "1",
        "--kernel", "lm", "--format", "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["features"], serde_json::json!(["age", "income", "score"]));
    // beta_j (x_j - mean_j) with means (1, 1/3, 2/3)
    let want = [1.0, -2.0 * (4.0 - 1.0 / 3.0), 3.0 * (-1.0 - 2.0 / 3.0)];
    for (a, b) in phi(&stdout(&o)).iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn table_is_the_default_format() {
    let f = Fixtures::new();
    let o = afa(&["attribute", "--game", &f.path("g3.json"), "--kernel", "shap"]);
    let text = stdout(&o);
    assert!(text.contains("0.6667"), "{text}");
    assert!(text.contains("0.1667"), "{text}");
}

#[test]
fn usage_errors_exit_1() {
    let f = Fixtures::new();
    let g3 = f.path("g3.json");
    for args in [
        vec![],
        vec!["attribute", "--kernel", "shap"],
        vec!["attribute", "--game", &g3],
        vec!["attribute", "--game", &g3, "--kernel", "shap", "--format", "xml"],
        vec!["verify", "--n-max", "30"],
        vec!["verify", "--trials", "0"],
        vec!["frobnicate"],
    ] {
        let o = afa(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn validation_errors_exit_2() {
    let f = Fixtures::new();
    let g3 = f.path("g3.json");
    let short = f.write("short.json", r#"{"n":2,"values":[0,1,3]}"#);
    let broken = f.write("broken.json", r#"{"n":2,"#);
    let ragged = f.write("ragged.csv", "a,b\n1,2\n3\n");
    let d = f.path("d.csv");
    let lin = f.path("lin.json");
    for args in [
        vec!["attribute", "--game", &short, "--kernel", "shap"],
        vec!["attribute", "--game", &broken, "--kernel", "shap"],
        vec!["attribute", "--game", &g3, "--kernel", "fesp:1.5"],
        vec!["attribute", "--game", &g3, "--kernel", "custom:1,-1,0"],
        vec!["attribute", "--data", &ragged, "--model", &lin, "--instance", "0", "--kernel", "shap"],
        vec!["attribute", "--data", &d, "--model", &lin, "--instance", "7", "--kernel", "shap"],
        vec!["attribute", "--game", "/nonexistent/g.json", "--kernel", "shap"],
        vec!["compare", "--game", &g3, "--kernels", "shap,bogus"],
    ] {
        let o = afa(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn numerical_errors_exit_3() {
    let f = Fixtures::new();
    let g3 = f.path("g3.json");
    for args in [
        vec!["attribute", "--game", &g3, "--kernel", "custom:0,0,1"],
        vec!["attribute", "--game", &g3, "--kernel", "custom:0,0,1", "--method", "oracle"],
        vec!["attribute", "--game", &g3, "--kernel", "custom:0,0,1", "--unconstrained"],
    ] {
        let o = afa(&args);
        assert_eq!(o.status.code(), Some(3), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn compare_footer_rows() {
    let f = Fixtures::new();
    let o = afa(&["compare", "--game", &f.path("g3.json"), "--kernels", "shap,es", "--format", "csv"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "feature,shap,es");
    assert!(lines.iter().any(|l| l.starts_with("efficiency_gap,")));
    assert!(lines.iter().any(|l| l.starts_with("max_abs_diff:es,")));
}
