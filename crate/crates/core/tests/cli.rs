use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Map, Value};
use tempfile::TempDir;

const REFERENCE: &str = include_str!("../configs/reference_design.cfg");

fn masersim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_masersim"))
        .args(args)
        .current_dir(dir)
        .env_remove("MASERSIM_OUT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn with_truncation(n: usize) -> String {
    REFERENCE.replacen("[sweep.steady]", &format!("[sweep]\ntruncation = {n}\n\n[sweep.steady]"), 1)
}

fn manifest(dir: &Path, command: &str) -> Value {
    let path = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| {
            let name = p.file_name().unwrap().to_string_lossy();
            name.starts_with(&format!("{command}_")) && name.ends_with(".json")
        })
        .unwrap_or_else(|| panic!("no {command} manifest in {}", dir.display()));
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Key and type skeleton of a JSON value; arrays keep the skeleton of their
/// first element.
fn shape(v: &Value) -> Value {
    match v {
        Value::Null => json!("null"),
        Value::Bool(_) => json!("bool"),
        Value::Number(_) => json!("number"),
        Value::String(_) => json!("string"),
        Value::Array(a) => json!([a.first().map(shape).unwrap_or(json!("empty"))]),
        Value::Object(o) => Value::Object(o.iter().map(|(k, v)| (k.clone(), shape(v))).collect::<Map<_, _>>()),
    }
}

/// Compares against tests/schemas/<command>.json; set MASERSIM_BLESS=1 to
/// rewrite the file.
fn check_schema(command: &str, m: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/schemas").join(format!("{command}.json"));
    let actual = shape(m);
    if std::env::var_os("MASERSIM_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, serde_json::to_string_pretty(&actual).unwrap() + "\n").unwrap();
    }
    let expected: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(actual, expected, "{command} manifest schema changed");
}

#[test]
fn validate_reference_exits_zero() {
    let t = TempDir::new().unwrap();
    let o = masersim(t.path(), &["validate", "--out-dir", "."]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("g_eff/2pi: 7.91"), "{text}");
    assert!(text.contains("n_max/n_cr: 0.15"), "{text}");
    let m = manifest(t.path(), "validate");
    assert_eq!(m["command"], "validate");
    assert_eq!(m["schema_version"], 1);
    assert!((m["report"]["lambda"].as_f64().unwrap() - 0.1).abs() < 0.01);
    check_schema("validate", &m);
}

#[test]
fn shipped_config_matches_builtin_reference() {
    let t = TempDir::new().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/reference_design.cfg");
    let a = masersim(t.path(), &["validate", cfg.to_str().unwrap(), "--out-dir", "a"]);
    let b = masersim(t.path(), &["validate", "--out-dir", "b"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let (ma, mb) = (manifest(&t.path().join("a"), "validate"), manifest(&t.path().join("b"), "validate"));
    assert_eq!(ma["design_hash"], mb["design_hash"]);
    assert_eq!(ma["report"], mb["report"]);
}

#[test]
fn unknown_command_is_a_usage_error() {
    let t = TempDir::new().unwrap();
    assert_eq!(masersim(t.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(masersim(t.path(), &["steady", "--threads", "many"]).status.code(), Some(2));
    assert_eq!(masersim(t.path(), &[]).status.code(), Some(2));
}

#[test]
fn missing_or_malformed_config_is_a_usage_error() {
    let t = TempDir::new().unwrap();
    assert_eq!(masersim(t.path(), &["validate", "absent.cfg"]).status.code(), Some(2));

    let bare = write_config(t.path(), "bare.cfg", &REFERENCE.replace("pump_rate = \"50 MHz\"", "pump_rate = 50"));
    let o = masersim(t.path(), &["validate", bare.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unit"));

    let version = write_config(t.path(), "v.cfg", &REFERENCE.replace("schema_version = 1", "schema_version = 7"));
    assert_eq!(masersim(t.path(), &["validate", version.to_str().unwrap()]).status.code(), Some(2));

    let unknown = write_config(t.path(), "u.cfg", &REFERENCE.replace("[conventions]", "[conventions]\ncolour = \"red\""));
    assert_eq!(masersim(t.path(), &["validate", unknown.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn hard_validity_flags_exit_one() {
    let t = TempDir::new().unwrap();
    let strong = REFERENCE.replacen("coupler_capacitance = \"3.5 fF\"\n\n[conventions]", "coupler_capacitance = \"40 fF\"\n\n[conventions]", 1);
    assert_ne!(strong, REFERENCE);
    let cfg = write_config(t.path(), "strong.cfg", &strong);
    let o = masersim(t.path(), &["validate", cfg.to_str().unwrap(), "--out-dir", "."]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("flag [Hard]"));
    assert_eq!(manifest(t.path(), "validate")["summary"]["hard_flags"], true);
}

#[test]
fn numerical_failure_exits_one() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "big.cfg", &with_truncation(5000));
    let o = masersim(t.path(), &["steady", cfg.to_str().unwrap(), "--out-dir", "."]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn keep_going_accepts_failed_points() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "big.cfg", &with_truncation(5000));
    let cfg = cfg.to_str().unwrap();
    let strict = masersim(t.path(), &["flux-sweep", cfg, "--out-dir", "strict"]);
    assert_eq!(strict.status.code(), Some(1));
    let lenient = masersim(t.path(), &["flux-sweep", cfg, "--out-dir", "lenient", "--keep-going"]);
    assert_eq!(lenient.status.code(), Some(0));

    let m = manifest(&t.path().join("lenient"), "flux-sweep");
    let table = &m["tables"][0];
    assert_eq!(table["points"], 21);
    assert_eq!(table["failures"].as_array().unwrap().len(), 21);
    for f in table["failures"].as_array().unwrap() {
        assert!(f["kind"].is_string() && f["message"].is_string());
    }
    assert_eq!(m["summary"]["failed_points"], 21);
}

#[test]
fn steady_reference_point() {
    let t = TempDir::new().unwrap();
    let o = masersim(t.path(), &["steady", "--out-dir", "."]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(t.path(), "steady");
    let s = &m["steady"];
    assert_eq!(s["truncation"], 100);
    let n = s["n_mean"].as_f64().unwrap();
    let eq = s["n_mean_eq"].as_f64().unwrap();
    assert!((n - eq).abs() / eq < 0.1, "n_mean {n} vs {eq}");
    assert!((s["g2"].as_f64().unwrap() - 1.0).abs() < 0.05);
    let fock: Vec<f64> = s["fock"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(fock.len(), 100);
    assert!((fock.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    check_schema("steady", &m);
}

#[test]
fn format_flag_selects_outputs() {
    let t = TempDir::new().unwrap();
    let o = masersim(t.path(), &["coupling-sweep", "--out-dir", "json", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let files: Vec<_> = fs::read_dir(t.path().join("json")).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(files.iter().all(|p| p.extension().unwrap() == "json"));
    let m = manifest(&t.path().join("json"), "coupling-sweep");
    assert!(m["tables"][0]["file"].is_null());
    assert_eq!(m["tables"][0]["rows"].as_array().unwrap().len(), 25);

    let o = masersim(t.path(), &["coupling-sweep", "--out-dir", "csv", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let m = manifest(&t.path().join("csv"), "coupling-sweep");
    assert!(m["tables"][0].get("rows").is_none());
    let csv = t.path().join("csv").join(m["tables"][0]["file"].as_str().unwrap());
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 26);
}

#[test]
fn coupling_sweep_schema_is_stable() {
    let t = TempDir::new().unwrap();
    let o = masersim(t.path(), &["coupling-sweep", "--out-dir", "."]);
    assert_eq!(o.status.code(), Some(0));
    check_schema("coupling-sweep", &manifest(t.path(), "coupling-sweep"));
}

#[test]
fn flux_sweep_schema_is_stable() {
    let t = TempDir::new().unwrap();
    let o = masersim(t.path(), &["flux-sweep", "--out-dir", "."]);
    assert_eq!(o.status.code(), Some(0));
    check_schema("flux-sweep", &manifest(t.path(), "flux-sweep"));
}

#[test]
fn output_directory_precedence() {
    let t = TempDir::new().unwrap();
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_masersim"));
        c.arg("validate").current_dir(t.path()).env_remove("MASERSIM_OUT");
        if let Some(e) = env {
            c.env("MASERSIM_OUT", e);
        }
        if let Some(f) = flag {
            c.args(["--out-dir", f]);
        }
        assert_eq!(c.output().unwrap().status.code(), Some(0));
    };
    run(None, None);
    assert!(t.path().join("out").is_dir());
    run(Some("from-env"), None);
    assert!(t.path().join("from-env").is_dir());
    run(Some("ignored"), Some("from-flag"));
    assert!(t.path().join("from-flag").is_dir());
    assert!(!t.path().join("ignored").exists());
}

#[test]
fn halved_convention_changes_only_the_coupling() {
    let t = TempDir::new().unwrap();
    let half = write_config(t.path(), "half.cfg", &REFERENCE.replace("sw_half_factor = false", "sw_half_factor = true"));
    assert_eq!(masersim(t.path(), &["validate", "--out-dir", "full"]).status.code(), Some(0));
    assert_eq!(masersim(t.path(), &["validate", half.to_str().unwrap(), "--out-dir", "half"]).status.code(), Some(0));
    let full = manifest(&t.path().join("full"), "validate");
    let half = manifest(&t.path().join("half"), "validate");
    assert_ne!(full["design_hash"], half["design_hash"]);
    assert_eq!(full["dressed"], half["dressed"]);

    let (a, b) = (full["report"].as_object().unwrap(), half["report"].as_object().unwrap());
    let changed: Vec<&str> = a.keys().filter(|k| a[*k] != b[*k]).map(|k| k.as_str()).collect();
    assert_eq!(changed, ["g_eff", "lambda"]);
    assert!(b["g_eff"].as_f64().unwrap() < a["g_eff"].as_f64().unwrap());
}

#[test]
fn json_config_is_accepted() {
    let t = TempDir::new().unwrap();
    let toml_value: toml::Value = toml::from_str(REFERENCE).unwrap();
    let cfg = write_config(t.path(), "reference.json", &serde_json::to_string(&toml_value).unwrap());
    let o = masersim(t.path(), &["validate", cfg.to_str().unwrap(), "--out-dir", "j"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let b = masersim(t.path(), &["validate", "--out-dir", "r"]);
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(manifest(&t.path().join("j"), "validate")["design_hash"], manifest(&t.path().join("r"), "validate")["design_hash"]);
}
