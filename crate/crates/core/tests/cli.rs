use std::path::Path;
use std::process::Command;

fn relscott(dir: &Path, args: &[&str], manifest: Option<&str>) -> i32 {
    let mut c = Command::new(env!("CARGO_BIN_EXE_relscott"));
    c.args(args).arg("--out").arg(dir);
    if let Some(text) = manifest {
        let p = dir.with_extension("toml");
        std::fs::write(&p, text).unwrap();
        c.arg("--manifest").arg(p);
    }
    c.status().unwrap().code().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn tf_default_run() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("tf");
    assert_eq!(relscott(&out, &["tf"], None), 0);
    let s = json(&out.join("tf_solution.json"));
    let slope = s["slope"].as_f64().unwrap();
    assert!((slope + 1.58807).abs() < 1e-4, "{slope}");
    assert!(out.join("run.log").exists());
    let log = std::fs::read_to_string(out.join("run.log")).unwrap();
    assert!(log.contains("seed 42"));
}

#[test]
fn lemma_ensemble_reproducible() {
    let t = tempfile::tempdir().unwrap();
    let m = "command = \"lemmas\"\nseed = 42\n[lemmas]\ninstances = 1000\n";
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    assert_eq!(relscott(&a, &[], Some(m)), 0);
    assert_eq!(relscott(&b, &[], Some(m)), 0);
    let (sa, sb) = (json(&a.join("lemmas_summary.json")), json(&b.join("lemmas_summary.json")));
    for k in ["pull_out_violations", "bks_violations", "arithmetic_violations"] {
        assert_eq!(sa[k].as_u64(), Some(0), "{k}");
    }
    assert_eq!(sa["hash"], sb["hash"]);
    assert_eq!(std::fs::read(a.join("lemmas.jsonl")).unwrap(), std::fs::read(b.join("lemmas.jsonl")).unwrap());
}

#[test]
fn beta_above_h_is_rejected() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("bad");
    let m = "command = \"spectrum\"\n[spectrum]\nh = 0.1\nbeta = 0.2\n";
    assert_eq!(relscott(&out, &[], Some(m)), 2);
    let e = json(&out.join("error.json"));
    assert_eq!(e["kind"], "constraint");
    assert!(e["message"].as_str().unwrap().contains("beta <= h"));
}

#[test]
fn unknown_keys_are_invalid() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("bad");
    assert_eq!(relscott(&out, &[], Some("command = \"tf\"\n[tf]\ntolerence = 1e-8\n")), 2);
    assert_eq!(json(&out.join("error.json"))["kind"], "invalid");
}

#[test]
fn csv_outputs_are_byte_identical() {
    let t = tempfile::tempdir().unwrap();
    let m = "command = \"weyl\"\n[weyl]\nr_values = [1.0, 4.0, 16.0]\n";
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    assert_eq!(relscott(&a, &[], Some(m)), 0);
    assert_eq!(relscott(&b, &[], Some(m)), 0);
    assert_eq!(std::fs::read(a.join("weyl.csv")).unwrap(), std::fs::read(b.join("weyl.csv")).unwrap());
}
