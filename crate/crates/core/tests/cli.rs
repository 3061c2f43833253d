use proptest::prelude::*;
use serde_json::Value;
use situskit::cli::*;
use situskit::fostruct::{binary_structures, unary_function_structures, FinStructure};
use situskit::geometry::{all_metrics, all_topologies};
use situskit::simplex::all_preorders;
use situskit::Error;
use std::path::PathBuf;
use std::process::Command;

fn data(name: &str) -> String {
    format!("{}/examples/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (Value, i32) {
    let out = main_with(std::iter::once("situskit").chain(args.iter().copied()));
    let text = if out.stdout.is_empty() { &out.stderr } else { &out.stdout };
    (serde_json::from_str(text).unwrap_or(Value::Null), out.code)
}

fn tmp(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("situskit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn stability_example_fails_with_witness() {
    let m = data("chain4.struct");
    let (v, code) = run(&["check", "stability", "--model", &m, "--formula", "x<=y", "--chain", "5", "--distinct", "3"]);
    assert_eq!(code, 1);
    assert_eq!(v["holds"], false);
    assert_eq!(v["witness"]["kind"], "sequence");
    assert_eq!(v["config"]["chain"], 5);
    assert_eq!(v["config"]["distinct"], 3);
}

#[test]
fn hom_example_counts_monotone_maps() {
    let o = data("chain2.order");
    let (v, code) = run(&["hom", "--from", &o, "--to", &o]);
    assert_eq!(code, 0);
    assert_eq!(v["count"], 3);
    assert_eq!(v["morphisms"].as_array().unwrap().len(), 3);
}

#[test]
fn validate_example_is_ok() {
    let (v, code) = run(&["validate", "--object", "stone", "--model", &data("eq3.struct"), "--sigma", "x=y", "--depth", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "ok");
    for (object, file) in [("quotient", "equiv4.struct"), ("order", "chain3.order"), ("metric", "line3.metric"), ("covering", "sierpinski.topo")] {
        let (v, code) = run(&["validate", "--object", object, "--model", &data(file)]);
        assert_eq!((code, &v["status"]), (0, &Value::from("ok")), "{object}");
    }
    let (v, _) = run(&["validate", "--object", "consistency", "--model", &data("cycle3.struct"), "--sigma", "R(x,y)"]);
    assert_eq!(v["status"], "ok");
}

#[test]
fn reports_have_sorted_keys_and_are_deterministic() {
    let args = ["check", "nip", "--model", &data("equiv4.struct")];
    let a = main_with(std::iter::once("situskit").chain(args));
    let b = main_with(std::iter::once("situskit").chain(args));
    assert_eq!(a, b);
    fn sorted(v: &Value) -> bool {
        match v {
            Value::Object(m) => m.keys().zip(m.keys().skip(1)).all(|(x, y)| x < y) && m.values().all(sorted),
            Value::Array(a) => a.iter().all(sorted),
            _ => true,
        }
    }
    assert!(sorted(&serde_json::from_str(&a.stdout).unwrap()));
    let v: Value = serde_json::from_str(&a.stdout).unwrap();
    for key in ["chain", "depth", "distinct", "variant", "qdepth", "model"] {
        assert!(v["config"].get(key).is_some(), "{key}");
    }
}

#[test]
fn every_check_runs() {
    let eq = data("eq3.struct");
    let cases: Vec<Vec<&str>> = vec![
        vec!["check", "eventual-stability", "--model", &eq],
        vec!["check", "op", "--model", &eq, "--k", "2"],
        vec!["check", "nsop", "--model", &eq],
        vec!["check", "non-dividing", "--model", &eq, "--a", "a", "--b", "b", "--a-set", "b"],
        vec!["check", "ntp", "--model", &eq, "--formula", "x=y"],
    ];
    for c in cases {
        let (v, code) = run(&c);
        assert_eq!(code, 0, "{c:?}: {v}");
        assert_eq!(v["holds"], true);
        assert_eq!(v["oracle_holds"], true);
    }
    let (v, code) = run(&["check", "complete", "--model", &data("line3.metric")]);
    assert_eq!((code, &v["property"]), (0, &Value::from("complete")));
    let (v, code) = run(&["check", "compact", "--model", &data("sierpinski.topo"), "--alpha", "2"]);
    assert_eq!((code, &v["property"]), (0, &Value::from("compact")));
    let (v, code) = run(&["check", "op", "--model", &data("chain4.struct"), "--k", "2"]);
    assert_eq!((code, &v["holds"]), (1, &Value::from(false)));
}

#[test]
fn surject_lift_and_orbits() {
    let (c2, c3) = (data("chain2.order"), data("chain3.order"));
    let (v, code) = run(&["surject", "--from", &c3, "--to", &c2]);
    assert_eq!((code, &v["exists"]), (0, &Value::from(true)));
    let (v, code) = run(&["surject", "--from", &c2, "--to", &c3]);
    assert_eq!((code, &v["exists"]), (1, &Value::from(false)));
    let (v, code) = run(&["lift", "--left-source", &c2, "--left-target", &c2, "--right-source", &c3]);
    assert_eq!((code, &v["holds"]), (0, &Value::from(true)));
    let (v, code) = run(&["orbits", "--model", &data("equiv4.struct"), "--arity", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["count"], 3);
    let (v, _) = run(&["orbits", "--model", &data("equiv4.struct"), "--fix", "a"]);
    assert_eq!(v["count"], 3);
}

#[test]
fn reduct_represent_and_ramsey() {
    let out = std::env::temp_dir().join(format!("situskit-reduct-{}.struct", std::process::id()));
    let (v, code) = run(&["reduct", "--model", &data("succ3.struct"), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["functions"].as_array().unwrap().len(), 3);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), v["structure"].as_str().unwrap());
    let (v, code) = run(&["represent", "--model", out.to_str().unwrap(), "--target", &data("succ3.struct"), "--mode", "em", "--len", "2"]);
    assert_eq!(code, if v["represents"] == true { 0 } else { 1 });
    let (v, code) = run(&["ramsey", "--atoms", "5"]);
    assert_eq!((code, &v["always_homogeneous"]), (1, &Value::from(false)));
    let (v, code) = run(&["ramsey", "--atoms", "6"]);
    assert_eq!((code, v["colorings_checked"].as_u64()), (0, Some(32768)));
}

#[test]
fn errors_exit_with_two() {
    let (v, code) = run(&["ramsey", "--atoms", "9"]);
    assert_eq!((code, &v["error"]), (2, &Value::from("resource")));
    assert_eq!(v["bound"]["limit"], 8);
    let (v, code) = run(&["check", "stability", "--model", &data("eq3.struct"), "--formula", "S(x,y)"]);
    assert_eq!(code, 2, "{v}");
    let (v, code) = run(&["check", "non-dividing", "--model", &data("eq3.struct"), "--a", "z", "--b", "a"]);
    assert_eq!((code, &v["error"]), (2, &Value::from("unknown_name")));
    let (v, code) = run(&["hom", "--from", "missing.order", "--to", "missing.order"]);
    assert_eq!((code, &v["error"]), (2, &Value::from("io")));
    let bad = tmp("bad.struct", "universe a b\nrel R/2: (a,b) (b,q)\n");
    let (v, code) = run(&["check", "nip", "--model", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!((v["line"].as_u64(), v["column"].as_u64()), (Some(2), Some(16)));
    assert_eq!(main_with(["situskit", "frobnicate"]).code, 2);
    assert_eq!(main_with(["situskit", "--help"]).code, 0);
}

#[test]
fn parse_errors_carry_positions() {
    let pos = |text: &str| match parse_structure(text) {
        Err(Error::Parse { line, col, .. }) => (line, col),
        other => panic!("expected a parse error, got {other:?}"),
    };
    assert_eq!(pos(""), (1, 1));
    assert_eq!(pos("rel R/2:\n"), (1, 1));
    assert_eq!(pos("universe a a"), (1, 12));
    assert_eq!(pos("universe a b\n\n  rel R/x: (a,b)"), (3, 7));
    assert_eq!(pos("universe a b\nrel R/2: (a)"), (2, 10));
    assert_eq!(pos("universe a b\nrel R/2: (a,b"), (2, 10));
    assert_eq!(pos("universe a b\nfun f: a->b"), (2, 5));
    assert_eq!(pos("universe a b\nfun f: a->b b=>a"), (2, 13));
    assert_eq!(pos("universe a b\nconst c a"), (2, 1));
    assert_eq!(pos("universe a b\nconst c = z"), (2, 11));
    assert_eq!(pos("universe a b\nrel R/1: (a)\nrel R/1: (b)"), (3, 5));
    assert_eq!(pos("universe a\nuniverse b"), (2, 1));
    assert!(matches!(parse_order("universe a b\nle a c"), Err(Error::Parse { line: 2, col: 6, .. })));
    assert!(matches!(parse_metric("points a b\n"), Err(Error::Parse { .. })));
    assert!(matches!(parse_metric("points a b\ndist a b x"), Err(Error::Parse { line: 2, col: 10, .. })));
    assert!(matches!(parse_topology("points a b\nclosed a"), Err(Error::Parse { line: 2, col: 1, .. })));
    assert!(parse_topology("points a b c\nopen a\nopen b").is_err());
    assert!(parse_metric("points a b c\ndist a b 1\ndist b c 1\ndist a c 3").is_err());
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let m = parse_structure("# header\nuniverse a b   # two points\n\nrel R/2: (a,b)  (b, a)\nconst e = a\n").unwrap();
    assert_eq!(write_structure(&m), "universe a b\nrel R/2: (a,b) (b,a)\nconst e = a\n");
}

#[test]
fn canonical_files_round_trip() {
    for n in 1..=2 {
        for m in binary_structures(n).into_iter().chain(unary_function_structures(n)) {
            let text = write_structure(&m);
            let back = parse_structure(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(write_structure(&back), text);
        }
    }
    for n in 1..=3 {
        for p in all_preorders(n) {
            let text = write_order(&p);
            assert_eq!(write_order(&parse_order(&text).unwrap()), text);
        }
        for m in all_metrics(n, &[1, 2, 3]) {
            let text = write_metric(&m);
            assert_eq!(write_metric(&parse_metric(&text).unwrap()), text);
        }
        for t in all_topologies(n) {
            let text = write_topology(&t);
            let back = parse_topology(&text).unwrap();
            assert_eq!(back.opens(), t.opens());
            assert_eq!(write_topology(&back), text);
        }
    }
    for f in ["chain4.struct", "eq3.struct", "equiv4.struct", "cycle3.struct", "succ3.struct", "chain2.order", "chain3.order", "line3.metric", "sierpinski.topo"] {
        let path = PathBuf::from(data(f));
        let obj = Object::parse(&path, &std::fs::read_to_string(&path).unwrap()).unwrap();
        let text = obj.write();
        assert_eq!(Object::parse(&path, &text).unwrap().write(), text, "{f}");
    }
}

#[test]
fn workspace_names_are_unique() {
    let a = tmp("w.struct", "universe a\n");
    let dir = a.parent().unwrap().join("sub");
    std::fs::create_dir_all(&dir).unwrap();
    let b = dir.join("w.order");
    std::fs::write(&b, "universe a\n").unwrap();
    assert!(matches!(Workspace::load(&[&a, &b]), Err(Error::Domain(_))));
    let ws = Workspace::load(&[&a]).unwrap();
    assert!(ws.structure("w").is_ok());
    assert!(matches!(ws.get("v"), Err(Error::UnknownName(_))));
    assert!(matches!(ws.metric("w"), Err(Error::Domain(_))));
    assert!(Object::parse(&PathBuf::from("x.txt"), "universe a").is_err());
}

#[test]
fn binary_reports_on_stdout() {
    let out = Command::new(env!("CARGO_BIN_EXE_situskit"))
        .args(["hom", "--from", &data("chain2.order"), "--to", &data("chain3.order")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["count"], 6);
    let out = Command::new(env!("CARGO_BIN_EXE_situskit")).args(["ramsey", "--atoms", "9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let out = Command::new(env!("CARGO_BIN_EXE_situskit")).args(["--guard-override", "ramsey", "--atoms", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

fn structure_strategy() -> impl Strategy<Value = FinStructure> {
    (1usize..=3).prop_flat_map(|n| {
        (
            proptest::collection::vec(any::<bool>(), n * n),
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(0..n as u32, n),
            0..n as u32,
        )
            .prop_map(move |(r, u, f, c)| {
                let mut m = FinStructure::with_size(n);
                let pairs: Vec<Vec<u32>> = (0..n * n).filter(|&i| r[i]).map(|i| vec![(i / n) as u32, (i % n) as u32]).collect();
                m.add_relation("R", 2, &pairs).unwrap();
                let unary: Vec<Vec<u32>> = (0..n).filter(|&i| u[i]).map(|i| vec![i as u32]).collect();
                m.add_relation("<", 1, &unary).unwrap();
                m.add_function("f", f).unwrap();
                m.add_constant("c", c).unwrap();
                m
            })
    })
}

proptest! {
    #[test]
    fn structure_text_round_trips(m in structure_strategy()) {
        let text = write_structure(&m);
        let back = parse_structure(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(write_structure(&back), text);
    }
}
