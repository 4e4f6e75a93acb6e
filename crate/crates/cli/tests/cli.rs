use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mpmab_core::harness::emit::CSV_HEADER;
use mpmab_core::{example1_instance, MpmabInstance};

fn mpmab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpmab"))
        .args(args)
        .env_remove("MPMAB_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path_str(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_writes_a_valid_instance() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("inst.json");
    let out = mpmab(&[
        "generate", "--players", "20", "--arms", "10", "--subpar", "8", "--eps", "0.15", "--seed", "7", "--out",
        path_str(&file),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let instance = MpmabInstance::load(&file).unwrap();
    assert_eq!((instance.num_players(), instance.num_arms()), (20, 10));
    assert_eq!(instance.subpar_arms(0.15).unwrap().len(), 8);
    assert!(instance.dissimilarity() <= 0.15);

    let again = mpmab(&["generate", "--players", "20", "--arms", "10", "--subpar", "8", "--eps", "0.15", "--seed", "7"]);
    assert_eq!(again.stdout, fs::read(&file).unwrap());
}

#[test]
fn seed_environment_overrides_flag() {
    let base = ["generate", "--players", "3", "--arms", "4", "--subpar", "1"];
    let with_env = Command::new(env!("CARGO_BIN_EXE_mpmab"))
        .args(base)
        .args(["--seed", "7"])
        .env("MPMAB_SEED", "9")
        .output()
        .unwrap();
    let nine = mpmab(&[&base[..], &["--seed", "9"]].concat());
    let seven = mpmab(&[&base[..], &["--seed", "7"]].concat());
    assert_eq!(with_env.stdout, nine.stdout);
    assert_ne!(with_env.stdout, seven.stdout);
}

#[test]
fn run_on_example1_fixture_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = dir.path().join("example1.json");
    example1_instance(4, 0.1).unwrap().save(&fixture).unwrap();
    let csv = dir.path().join("out.csv");
    let out = mpmab(&[
        "run", "--algo", "ind-ucb", "--horizon", "2000", "--reps", "3", "--instance", path_str(&fixture), "--out",
        path_str(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 3 * 1000);
    assert!(String::from_utf8_lossy(&out.stderr).contains("final regret"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.conf");
    fs::write(
        &config,
        "# small run\nalgo = naive-agg\nplayers = 3\narms = 4\nsubpar = 2\nhorizon = 300\nreps = 2\nformat = json\n",
    )
    .unwrap();
    let out = mpmab(&["run", "--config", path_str(&config), "--horizon", "200"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let echoed = &doc["experiments"][0]["config"];
    assert_eq!(echoed["horizon"], 200);
    assert_eq!(echoed["num_replications"], 2);
    assert_eq!(echoed["policy"]["algorithm"], "naive-agg");
    assert_eq!(echoed["instance"]["num_players"], 3);
}

#[test]
fn sweep_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = mpmab(&[
        "sweep",
        "--algo",
        "robustagg-adapted,ind-ucb,naive-agg",
        "--players",
        "4",
        "--subpar",
        "8",
        "--horizon",
        "1000",
        "--reps",
        "2",
        "--out",
        path_str(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let svg = dir.path().join("sweep.svg");
    let out = mpmab(&["plot", path_str(&csv), "--out", path_str(&svg)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 3);
    assert!(text.contains("cumulative collective regret"));
}

#[test]
fn argument_errors_exit_2() {
    let unknown = mpmab(&["run", "--bogus"]);
    assert_eq!(code(&unknown), 2);
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));

    assert_eq!(code(&mpmab(&[])), 2);
    assert_eq!(code(&mpmab(&["run", "--algo", "ucb9", "--horizon", "100", "--reps", "1"])), 2);
    assert_eq!(code(&mpmab(&["run", "--horizon", "many"])), 2);
    assert_eq!(code(&mpmab(&["run", "--horizon", "10", "--reps", "1"])), 2);
    assert_eq!(code(&mpmab(&["run", "--format", "png", "--horizon", "100", "--reps", "1"])), 2);
    assert_eq!(code(&mpmab(&["generate", "--subpar", "10", "--arms", "10"])), 2);
    assert_eq!(code(&mpmab(&["run", "--instance", "a.json", "--example1", "0.1"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.conf");
    fs::write(&config, "horizon = 100\nthreads = 4\n").unwrap();
    let out = mpmab(&["run", "--config", path_str(&config)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("threads"));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let out = mpmab(&["run", "--instance", path_str(&missing), "--horizon", "100", "--reps", "1"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));

    let unwritable = dir.path().join("no/dir/out.csv");
    let out = mpmab(&[
        "run", "--example1", "0.1", "--players", "2", "--horizon", "50", "--reps", "1", "--out",
        path_str(&unwritable),
    ]);
    assert_eq!(code(&out), 1);

    let garbage = dir.path().join("garbage.csv");
    fs::write(&garbage, "not,a,results,file\n").unwrap();
    assert_eq!(code(&mpmab(&["plot", path_str(&garbage)])), 1);
}

#[test]
fn help_exits_0() {
    let out = mpmab(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["generate", "run", "sweep", "plot"] {
        assert!(text.contains(sub));
    }
}
