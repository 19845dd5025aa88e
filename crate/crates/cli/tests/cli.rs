use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn sumrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumrank"))
        .args(args)
        .env_remove("SUMRANK_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn stderr_json(o: &Output) -> Value {
    let s = String::from_utf8(o.stderr.clone()).unwrap();
    assert_eq!(s.lines().count(), 1, "{s}");
    serde_json::from_str(&s).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_hamming(dir: &PathBuf) -> PathBuf {
    let o = sumrank(&["hamming", "--q", "2", "--N", "2", "--r", "4"]);
    assert!(o.status.success());
    let path = dir.join("code.json");
    fs::write(&path, &o.stdout).unwrap();
    path
}

#[test]
fn hamming_descriptor() {
    let o = sumrank(&["hamming", "--q", "2", "--N", "2", "--r", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!((v["n"].as_u64(), v["k"].as_u64(), v["ell"].as_u64()), (Some(10), Some(6), Some(5)));
    assert_eq!(v["min_distance"], 3);
    assert_eq!(v["perfect"], true);
    let c = sumrank::codes::CodeDescriptor::from_json(&v).unwrap();
    assert_eq!(c.to_json()["G"], v["G"]);
}

#[test]
fn verify_passes() {
    let o = sumrank(&["verify", "--q", "2", "--N", "2", "--r", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_out(&o);
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    let status = |name: &str| checks.iter().find(|c| c["name"] == name).unwrap()["passed"].clone();
    assert_eq!(status("min_distance"), true);
    assert_eq!(status("perfect"), true);
    assert_eq!(status("bound_length_equality"), true);
}

#[test]
fn reference_table_flags_one_row() {
    let o = sumrank(&["paper-tables", "--q", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",match")).count(), 7);
    assert_eq!(rows[0], "2,5,4,6,15,4,12,flagged");
}

#[test]
fn lrc_table_csv() {
    let o = sumrank(&["lrc", "table", "--q", "2", "--pairs", "3:9,5:15"]);
    assert_eq!(
        stdout(&o),
        "N,local_groups,global_parities,dimension,length\n3,73,9,210,292\n5,1057,15,5270,6342\n"
    );
    let bad = sumrank(&["lrc", "table", "--pairs", "2:5"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(stderr_json(&bad)["error"], "precondition");
}

#[test]
fn decode_single_error_and_failure() {
    let dir = scratch("decode");
    let code = write_hamming(&dir);
    let rx = dir.join("rx.txt");
    fs::write(&rx, "2 1 1 10\n1 0 0 0 0 0 0 0 0 0\n").unwrap();
    let o = sumrank(&["decode", "--code", code.to_str().unwrap(), "--received", rx.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["location"], 0);
    assert_eq!(v["codeword"], serde_json::json!([0, 0, 0, 0, 0, 0, 0, 0, 0, 0]));

    // the perfect code never fails; a two-member partial spread code does
    let spread = dir.join("partial.json");
    fs::write(
        &spread,
        r#"{"q":2,"r":4,"dims":[2,2],"members":["2 1 4 2\n1 0\n0 1\n0 0\n0 0\n","2 1 4 2\n0 0\n0 0\n1 0\n0 1\n"]}"#,
    )
    .unwrap();
    let o = sumrank(&["hamming", "--spread", spread.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let partial = dir.join("partial_code.json");
    fs::write(&partial, &o.stdout).unwrap();
    fs::write(&rx, "2 1 1 4\n1 0 1 0\n").unwrap();
    let o = sumrank(&["decode", "--code", partial.to_str().unwrap(), "--received", rx.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "decoding_failure");
}

#[test]
fn simulate_is_deterministic() {
    let dir = scratch("simulate");
    let code = write_hamming(&dir);
    let args = ["simulate", "--code", code.to_str().unwrap(), "--trials", "200", "--t", "1", "--seed", "9"];
    let a = sumrank(&args);
    let b = sumrank(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = json_out(&a);
    assert_eq!(v["successes"], 200);
    assert_eq!(v["trials"], 200);
}

#[test]
fn lrc_repair_and_decode() {
    let dir = scratch("lrc");
    let code = write_hamming(&dir);
    let build = sumrank(&["lrc", "build", "--code", code.to_str().unwrap()]);
    let v = json_out(&build);
    assert_eq!((v["length"].as_u64(), v["dimension"].as_u64()), (Some(15), Some(6)));
    let global = sumrank::codes::CodeDescriptor::from_json(&v["global"]).unwrap();
    let c = global.encode(&[1, 0, 1, 1, 0, 1]).unwrap();
    let text: Vec<String> = c.iter().map(u32::to_string).collect();
    let word = dir.join("word.txt");
    // erased symbols hold garbage on disk
    let mut garbled = text.clone();
    for j in [0, 4, 8, 9, 10] {
        garbled[j] = if c[j] == 0 { "1".into() } else { "0".into() };
    }
    fs::write(&word, format!("2 1 1 15\n{}\n", garbled.join(" "))).unwrap();
    let erased = dir.join("erased.txt");
    fs::write(&erased, "0\n4\n8\n9\n10\n").unwrap();
    let args = |cmd: &str| {
        vec![
            "lrc".to_string(),
            cmd.to_string(),
            "--code".into(),
            code.to_str().unwrap().into(),
            "--word".into(),
            word.to_str().unwrap().into(),
            "--erased".into(),
            erased.to_str().unwrap().into(),
        ]
    };
    let a = args("decode");
    let o = sumrank(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json_out(&o)["codeword"], format!("2 1 1 15\n{}\n", text.join(" ")));

    let mut a = args("repair");
    a.extend(["--group".into(), "2".into()]);
    let o = sumrank(&a.iter().map(String::as_str).collect::<Vec<_>>());
    let v = json_out(&o);
    assert_eq!(v["repaired"], serde_json::json!([[8, c[8]]]));
    assert_eq!(v["remaining_erasures"], serde_json::json!([0, 4, 9, 10]));

    // group 3 lost two of its three symbols
    let mut a = args("repair");
    a.extend(["--group".into(), "3".into()]);
    let o = sumrank(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "local_repair_impossible");
}

#[test]
fn exit_codes() {
    let usage = sumrank(&["hamming", "--q"]);
    assert_eq!(usage.status.code(), Some(1));
    assert_eq!(stderr_json(&usage)["error"], "usage");

    let missing = sumrank(&["decode", "--code", "/nonexistent.json", "--received", "/nonexistent.txt"]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(stderr_json(&missing)["error"], "io");

    let budget = Command::new(env!("CARGO_BIN_EXE_sumrank"))
        .args(["simplex", "--q", "2", "--N", "2", "--r", "4"])
        .env("SUMRANK_BUDGET", "2")
        .output()
        .unwrap();
    assert_eq!(budget.status.code(), Some(3));
    assert_eq!(stderr_json(&budget)["error"], "budget_exceeded");
}

#[test]
fn spread_output_round_trips() {
    let o = sumrank(&["spread", "--q", "2", "--N", "2", "--r", "5", "--search"]);
    let v = json_out(&o);
    assert_eq!(v["size"], 9);
    assert_eq!(v["certified"], true);
    assert_eq!((v["lower_bound"].as_str(), v["upper_bound"].as_str()), (Some("9"), Some("10")));
    let s = sumrank::spreads::SpreadFamily::from_json(&v["spread"]).unwrap();
    assert_eq!(s.to_json(), v["spread"]);
}

#[test]
fn output_file_and_text_format() {
    let dir = scratch("output");
    let path = dir.join("table.csv");
    let o = sumrank(&["lrc", "table", "--pairs", "2:6", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(fs::read_to_string(&path).unwrap().lines().nth(1), Some("2,21,6,36,63"));
    let t = sumrank(&["simplex", "--q", "2", "--N", "2", "--r", "4", "--format", "text"]);
    assert!(stdout(&t).lines().any(|l| l == "min_distance: 4"));
}
