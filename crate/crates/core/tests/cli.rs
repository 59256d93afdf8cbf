use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn mttcheck(args: &[&str], mtt: &str) -> Output {
    let schema = data("mini-xhtml.schema");
    Command::new(env!("CARGO_BIN_EXE_mttcheck"))
        .arg(data(mtt))
        .arg(&schema)
        .arg(&schema)
        .args(args)
        .output()
        .expect("spawn mttcheck")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn remove_b_is_well_typed() {
    let o = mttcheck(&[], "remove-b.mtt");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("WELL-TYPED"));
}

#[test]
fn drop_div_reports_a_decoded_witness() {
    let o = mttcheck(&["--witness"], "drop-div.mtt");
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("ILL-TYPED"));
    assert!(out.contains("document: <html>"));
    assert!(out.contains("<div"));
}

#[test]
fn json_report_parses() {
    let o = mttcheck(&["--json", "--stats"], "drop-div.mtt");
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["verdict"], "ILL-TYPED");
    assert!(v["witness"]["ranked"].as_str().unwrap().starts_with("html("));
    assert!(v["ata_states_materialized"].as_u64().unwrap() > 0);
}

#[test]
fn ours_and_classical_agree_on_the_bundled_transformations() {
    for (mtt, code) in [("remove-b.mtt", 0), ("drop-div.mtt", 1), ("copy-a.mtt", 0)] {
        for algo in ["ours", "classical"] {
            let o = mttcheck(&["--algo", algo], mtt);
            assert_eq!(o.status.code(), Some(code), "{mtt} --algo {algo}");
        }
    }
}

#[test]
fn oracle_cross_check_is_consistent() {
    let o = mttcheck(&["--oracle-depth", "9"], "drop-div.mtt");
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("oracle (<= 9 nodes)"));
}

#[test]
fn parse_errors_exit_with_two() {
    let dir = std::env::temp_dir().join(format!("mttcheck-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.mtt");
    std::fs::File::create(&bad)
        .unwrap()
        .write_all(b"initial top\ntop(x1 -> \n")
        .unwrap();
    let schema = data("mini-xhtml.schema");
    let o = Command::new(env!("CARGO_BIN_EXE_mttcheck"))
        .arg(&bad)
        .arg(&schema)
        .arg(&schema)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("mttcheck:"));
    std::fs::remove_dir_all(&dir).ok();
}
