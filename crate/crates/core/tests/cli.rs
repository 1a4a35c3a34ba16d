use std::process::Command;

use serde_json::Value;

fn qslab(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qslab")).args(args).env_remove("QSLAB_SEED").output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn hirzebruch_json() {
    let (code, out) = qslab(&["hirzebruch", "--k", "4", "--json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["classification"]["type"], "S2xS2");
    assert_eq!(v["classification"]["areas"], serde_json::json!([1, 6]));
}

#[test]
fn suite_report_and_exit_codes() {
    let dir = std::env::temp_dir().join(format!("qslab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("group.json");
    let (code, _) = qslab(&["group", "--group-pairs", "500", "--seed", "9", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["suite"], "group");
    assert_eq!(v["seed"], 9);
    assert_eq!(v["pass"], true);

    let config = dir.join("bad.json");
    std::fs::write(&config, r#"{"levl": 3}"#).unwrap();
    assert_eq!(qslab(&["axioms", "--config", config.to_str().unwrap()]).0, 2);
    assert_eq!(qslab(&["bundle", "--check", "nonsense"]).0, 2);
    assert_eq!(qslab(&["hirzebruch", "--k", "0"]).0, 2);
}

#[test]
fn sphere_writes_mesh_and_field() {
    let dir = std::env::temp_dir().join(format!("qslab-sphere-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (mesh, field) = (dir.join("m.off"), dir.join("f.csv"));
    let (code, out) = qslab(&[
        "sphere", "--level", "2", "--field", "x*y", "--mesh-out", mesh.to_str().unwrap(), "--field-out", field.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["euler_characteristic"], 2);
    assert!(std::fs::read_to_string(&mesh).unwrap().starts_with("OFF"));
    assert_eq!(std::fs::read_to_string(&field).unwrap().lines().count(), 163);
}
