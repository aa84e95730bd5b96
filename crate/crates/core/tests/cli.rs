use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_whitehead")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn eval_examples() {
    for (input, want) in [("[eta_4, eta_4^2]", "0"), ("iota_4 . iota_4", "iota_4"), ("eta_5^3", "4 nu_5")] {
        let o = run(&["eval", input]);
        assert!(o.status.success(), "{input}");
        assert_eq!(stdout(&o).trim(), want, "{input}");
    }
}

#[test]
fn eval_trace_cites_relations() {
    let o = run(&["eval", "[eta_4, eta_4^2]", "--trace"]);
    let out = stdout(&o);
    assert!(out.contains("naturality: [eta_4, eta_4 . eta_5] => eta_4 . [iota_5, eta_5]"), "{out}");
    for c in ["Toda (5.10)", "Toda (5.9)", "Toda (5.5)"] {
        assert!(out.contains(c), "{c}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["eval", "eta_4 ."]).status.code(), Some(1));
    assert_eq!(run(&["eval", "eta_4 . eta_7"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "sigma_9 . sigma_16"]).status.code(), Some(3));
    assert_eq!(run(&["eval", "iota_4", "--relations", "/nonexistent/x.rel"]).status.code(), Some(4));
    assert_eq!(run(&["scenario", "nope"]).status.code(), Some(1));
}

#[test]
fn residue_is_printed() {
    let o = run(&["eval", "sigma_9 . sigma_16"]);
    assert!(stdout(&o).starts_with("residue: sigma_9 . sigma_16"), "{}", stdout(&o));
}

#[test]
fn custom_relations_file() {
    let dir = std::env::temp_dir().join(format!("whitehead-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tiny.rel");
    std::fs::write(&path, "family eta base=3 stem=1 order=2\ngroup S4 k=6 = Z2{eta_4 . eta_5}\n").unwrap();
    let o = run(&["eval", "3 eta_4 . eta_5", "--relations", path.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "eta_4 . eta_5");
    std::fs::write(&path, "gen x dom=3\n").unwrap();
    assert_eq!(run(&["eval", "iota_4", "--relations", path.to_str().unwrap()]).status.code(), Some(1));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn scenarios_pass() {
    let o = run(&["scenario", "all"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    for name in
        ["lemma-3.1", "prop-3.2", "s2-empty", "rp2", "cp-r", "hp-empty", "prop-5.2", "omega-remark", "permutation-sign"]
    {
        assert!(out.contains(&format!("scenario {name}: pass")), "{name}\n{out}");
    }
    let o = run(&["scenario", "prop-3.2"]);
    assert!(stdout(&o).contains("|J| = 15"));
}

#[test]
fn json_output_is_stable() {
    let a = run(&["scenario", "all", "--format", "json"]);
    let b = run(&["scenario", "all", "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 9);
    let e: serde_json::Value = serde_json::from_slice(&run(&["eval", "eta_5^3", "--format", "json"]).stdout).unwrap();
    assert_eq!(e["result"]["kind"], "resolved");
    assert_eq!(e["result"]["rendered"], "4 nu_5");
}

#[test]
fn fatwedge_examples() {
    let o = run(&["fatwedge", "--r", "4", "--dims", "2,2,2,2", "--obstruction"]);
    assert!(stdout(&o).starts_with("witness ({1,2},{3,4})"), "{}", stdout(&o));
    let o = run(&["fatwedge", "--r", "2", "--dims", "3,5", "--levels", "0,1"]);
    let out = stdout(&o);
    assert!(out.contains("1 class\n") && out.contains("H^8 = Z^1"), "{out}");
    let o = run(&["fatwedge", "--r", "4", "--dims", "1,1,1,1", "--levels", "1,3"]);
    assert!(stdout(&o).contains("10 classes"));
    let o = run(&["fatwedge", "--r", "3", "--dims", "1,1,1", "--obstruction"]);
    assert_eq!(stdout(&o).trim(), "no witness");
    assert!(!run(&["fatwedge", "--r", "3", "--dims", "1,1,1", "--levels", "2,1"]).status.success());
}

#[test]
fn product_and_known() {
    let o = run(&["product", "eta_4", "eta_4^2", "2 iota_4"]);
    let out = stdout(&o);
    assert!(out.contains("4 nu_4 . sigma' + 2 S eps'") && out.contains("|J| = 15"), "{out}");
    let o = run(&["product", "0 iota_2", "iota_2", "iota_2"]);
    assert!(stdout(&o).contains("empty: [iota_2, iota_2] = 2 eta_2"));
    let o = run(&["known", "cp:3"]);
    assert!(stdout(&o).starts_with("24 gamma_3C"));
}
