use std::fs;
use std::path::Path;

use cahom_cli::{render_svg, run, RenderStyle, SolutionJson, StructureJson, Viewport};
use cahom_core::games::{validate_game, GameShape, RawGame};
use cahom_core::lsystem::{builtin, parse_lsystem, sample_curve, CurvePoint, RuleShape, Sample, WfrReport};
use cahom_core::markov::MarkovChainJson;
use cahom_core::schemes::{Cofree, SquareReport};
use cahom_core::timed::{SolutionFamilyJson, TimedCoalgebra, TimedCoalgebraJson};
use serde_json::Value;
use tempfile::TempDir;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cahom(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("cahom").chain(args.iter().copied()), &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn error_json(o: &Outcome) -> Value {
    serde_json::from_str(o.stderr.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {}", o.stderr))
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn read<T: serde::de::DeserializeOwned>(p: impl AsRef<Path>) -> T {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

const CYCLE2: &str = r#"{"states":["x","y"],"rows":{"x":{"y":1.0},"y":{"x":1.0}}}"#;
const GAME: &str = r#"{
  "agents": ["a", "b"],
  "choices": ["l", "r"],
  "states": {
    "root": {"agent": "a", "moves": {"l": "low", "r": "high"}},
    "low": {"payoff": {"a": 1, "b": 0}},
    "high": {"payoff": {"a": 3, "b": 2}}
  },
  "start": "root"
}"#;

#[test]
fn timed_inconsistent_exits_2() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.json", r#"{"monoid":"Z","states":["a","b"],"e":{"a":[1,"b"],"b":[1,"a"]}}"#);
    let o = cahom(&["timed", "solve", &f]);
    assert_eq!(o.code, 2);
    let err = error_json(&o);
    assert_eq!(err["error"], "Inconsistent");
    assert_eq!(err["total"], 2.0);
    assert_eq!(err["cycle"], serde_json::json!(["a", "b"]));
}

#[test]
fn timed_solve_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "ok.json", r#"{"monoid":"Z","states":["a","b"],"e":{"a":[3,"b"],"b":[-3,"a"]}}"#);
    let sol = path(&dir, "sol.json");
    let o = cahom(&["timed", "solve", &f, "--json", "--out", &sol]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let printed: SolutionFamilyJson = serde_json::from_str(&o.stdout).unwrap();
    let written: SolutionFamilyJson = read(&sol);
    assert_eq!(printed, written);
    assert_eq!(written.classes[0].reference, "b");
    assert_eq!(written.classes[0].offsets["a"], 3.0);

    assert_eq!(cahom(&["timed", "verify", &f, &sol]).code, 0);

    // A wrong offset is a failed check, not a malformed input.
    let wrong = write(
        &dir,
        "wrong.json",
        r#"{"monoid":"Z","classes":[{"members":["a","b"],"reference":"b","offsets":{"a":4,"b":0}}]}"#,
    );
    let o = cahom(&["timed", "verify", &f, &wrong]);
    assert_eq!(o.code, 2);
    assert_eq!(error_json(&o)["error"], "CheckFailed");
}

#[test]
fn timed_validation_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let neg = write(&dir, "neg.json", r#"{"monoid":"N","states":["a"],"e":{"a":[-1,"a"]}}"#);
    let o = cahom(&["timed", "solve", &neg]);
    assert_eq!(o.code, 1);
    assert_eq!(error_json(&o)["error"], "InvalidMonoidValue");

    let garbage = write(&dir, "garbage.json", "{");
    assert_eq!(error_json(&cahom(&["timed", "solve", &garbage]))["error"], "Json");
    assert_eq!(cahom(&["timed", "solve", &path(&dir, "missing.json")]).code, 1);
}

#[test]
fn timed_series_round_trips() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "series.json");
    let o = cahom(&["timed", "series", "--kind", "1", "--delta", "1", "--lo", "-2", "--hi", "2", "--out", &out]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("t[-2] = -2"));
    let json: TimedCoalgebraJson = read(&out);
    let e = TimedCoalgebra::from_json(json.clone()).unwrap();
    assert_eq!(e.to_json(), json);
    assert_eq!(e.len(), 5);

    let o = cahom(&["timed", "series", "--kind", "3", "--delta", "1", "--lo", "-1", "--hi", "2"]);
    assert_eq!(o.code, 1);
    assert_eq!(error_json(&o)["error"], "WindowMismatch");
}

#[test]
fn markov_stationary_of_two_cycle() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "c.json", CYCLE2);
    let o = cahom(&["markov", "stationary", &f, "--json"]);
    assert_eq!(o.code, 0);
    let v: Vec<f64> = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v, vec![0.5, 0.5]);

    let o = cahom(&["markov", "classify", &f, "--json"]);
    let s: StructureJson = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(s.classes.len(), 1);
    assert_eq!(s.classes[0].period, 2);
}

#[test]
fn markov_solution_round_trip_and_verify() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "a.json", r#"{"states":["s","t"],"rows":{"s":{"s":1.0},"t":{"s":0.3,"t":0.7}}}"#);
    let sol = path(&dir, "sol.json");
    let o = cahom(&["markov", "solution", &f, "--json", "--out", &sol]);
    assert_eq!(o.code, 0);
    let json: SolutionJson = read(&sol);
    assert_eq!(serde_json::from_str::<SolutionJson>(&o.stdout).unwrap(), json);
    let expected = [[1.0, 0.0], [1.0, 0.0]];
    for (row, want) in json.matrix.iter().zip(expected) {
        assert!(row.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12), "{row:?}");
    }
    assert_eq!(cahom(&["markov", "verify", &f, &sol]).code, 0);

    let bad = write(&dir, "bad.json", r#"{"states":["s","t"],"matrix":[[0.5,0.5],[0,1]]}"#);
    assert_eq!(cahom(&["markov", "verify", &f, &bad]).code, 2);
}

#[test]
fn markov_invalid_rows_exit_1() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.json", r#"{"states":["s"],"rows":{"s":{"s":0.5}}}"#);
    let o = cahom(&["markov", "classify", &f]);
    assert_eq!(o.code, 1);
    assert_eq!(error_json(&o)["error"], "RowNotNormalized");
}

#[test]
fn game_eval_tree_and_discount() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "g.json", GAME);
    let o = cahom(&["game", "eval", &f, "--json"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v, serde_json::json!({"a": 3.0, "b": 2.0}));

    let o = cahom(&["game", "tree", &f, "--json", "--depth", "3"]);
    let tree: Cofree<GameShape, String> = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(tree.children.len(), 2);

    let o = cahom(&["game", "discount", &f, "--gamma", "0.5", "--json"]);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v, serde_json::json!({"a": 1.5, "b": 1.0}));

    let o = cahom(&["game", "discount", &f, "--gamma", "1.5"]);
    assert_eq!(o.code, 1);
    assert_eq!(error_json(&o)["error"], "InvalidGamma");
}

#[test]
fn cyclic_game_exits_2() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "loop.json",
        r#"{"agents":["a"],"choices":["go"],"states":{"s":{"agent":"a","moves":{"go":"s"}}},"start":"s"}"#,
    );
    let o = cahom(&["game", "eval", &f]);
    assert_eq!(o.code, 2);
    assert_eq!(error_json(&o)["error"], "CyclicGame");
    // Discounting is defined on cyclic games.
    assert_eq!(cahom(&["game", "discount", &f, "--gamma", "0.9"]).code, 0);
}

#[test]
fn game_file_round_trips() {
    let raw: RawGame = serde_json::from_str(GAME).unwrap();
    let spec = validate_game(&raw).unwrap();
    let again: RawGame = serde_json::from_str(&serde_json::to_string(&spec.to_raw()).unwrap()).unwrap();
    assert_eq!(validate_game(&again).unwrap(), spec);
}

#[test]
fn lsystem_check_and_shapes() {
    let o = cahom(&["lsystem", "check", "--builtin", "koch", "--json"]);
    assert_eq!(o.code, 0);
    let reports: Vec<WfrReport> = serde_json::from_str(&o.stdout).unwrap();
    assert!(reports.iter().all(WfrReport::well_formed));

    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.lsys", "K -1-> K K\n");
    let o = cahom(&["lsystem", "check", &f]);
    assert_eq!(o.code, 2);
    assert_eq!(error_json(&o)["error"], "NotWellFormed");

    let o = cahom(&["lsystem", "shapes", "--builtin", "sierpinski", "--json"]);
    let shapes: Vec<RuleShape> = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(shapes.len(), 2);
}

#[test]
fn lsystem_parse_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e.lsys", "K -3->\n");
    let o = cahom(&["lsystem", "check", &f]);
    assert_eq!(o.code, 1);
    assert_eq!(error_json(&o)["error"], "EmptyBody");

    let f = write(&dir, "p.lsys", "K -3-> K ?\n");
    let err = error_json(&cahom(&["lsystem", "check", &f]));
    assert_eq!(err["error"], "Parse");
    assert_eq!((err["line"].as_u64(), err["column"].as_u64()), (Some(1), Some(10)));

    let o = cahom(&["lsystem", "check", "--builtin", "dragon"]);
    assert_eq!(error_json(&o)["error"], "UnknownBuiltin");
}

#[test]
fn lsystem_sample_csv() {
    let o = cahom(&["lsystem", "sample", "--builtin", "koch", "--samples", "4"]);
    assert_eq!(o.code, 0);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines[0], "i,z,x,y,exact,err");
    assert_eq!(lines.len(), 6);
    let apex: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(apex[1], "1/2");
    assert!((apex[3].parse::<f64>().unwrap() - 3f64.sqrt() / 6.0).abs() < 1e-14);
    assert_eq!(apex[4], "true");

    let o = cahom(&["lsystem", "sample", "--builtin", "koch", "--samples", "50", "--json"]);
    let s: Sample = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(s, sample_curve(&builtin("koch").unwrap(), "K", 50, 1e-9, false).unwrap());
}

#[test]
fn lsystem_not_well_formed_sampling_exits_2() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.lsys", "K -1-> K K\n");
    assert_eq!(cahom(&["lsystem", "sample", &f, "--samples", "3"]).code, 2);
}

#[test]
fn parallel_sampling_matches() {
    let a = cahom(&["lsystem", "sample", "--builtin", "sierpinski", "--samples", "200"]);
    let b = cahom(&["lsystem", "sample", "--builtin", "sierpinski", "--samples", "200", "--parallel"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn render_is_deterministic_and_fitted() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.svg"), path(&dir, "b.svg"));
    assert_eq!(cahom(&["lsystem", "render", "--builtin", "koch", "--out", &a]).code, 0);
    assert_eq!(cahom(&["lsystem", "render", "--builtin", "koch", "--out", &b, "--parallel"]).code, 0);
    let svg = fs::read_to_string(&a).unwrap();
    assert_eq!(svg, fs::read_to_string(&b).unwrap());
    assert_eq!(svg.matches("<circle").count(), 667);

    let o = cahom(&["lsystem", "render", "--builtin", "koch", "--samples", "10", "--no-connect"]);
    assert!(o.stdout.starts_with("<svg") && !o.stdout.contains("<polyline"));
}

#[test]
fn koch_render_apex_maps_back() {
    let s = sample_curve(&builtin("koch").unwrap(), "K", 666, 1e-9, false).unwrap();
    let points: Vec<[f64; 2]> = s.points.iter().map(|p: &CurvePoint| p.value).collect();
    let style = RenderStyle::default();
    let svg = render_svg(&points, &style).unwrap();
    let view = Viewport::fit(&points, &style);
    let mut top = f64::INFINITY;
    for circle in svg.split("<circle ").skip(1) {
        let attr = |name: &str| -> f64 {
            let start = circle.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
            let end = start + circle[start..].find('"').unwrap();
            circle[start..end].parse().unwrap()
        };
        let (cx, cy) = (attr("cx"), attr("cy"));
        assert!((0.0..=style.width_px as f64).contains(&cx));
        assert!((0.0..=style.height_px as f64).contains(&cy));
        top = top.min(cy);
    }
    let apex = view.from_pixel([0.0, top])[1];
    assert!((apex - 3f64.sqrt() / 6.0).abs() < 1e-6, "{apex}");
}

#[test]
fn law_commands() {
    for cmd in [["laws", "timed"], ["laws", "dist"], ["laws", "comonad"]] {
        let o = cahom(&[cmd[0], cmd[1], "--samples", "50", "--json"]);
        assert_eq!(o.code, 0, "{cmd:?}: {}", o.stderr);
        let r: SquareReport = serde_json::from_str(&o.stdout).unwrap();
        assert!(r.passed && r.total_points == 50);
    }
    let o = cahom(&["laws", "timed", "--monoid", "R+", "--samples", "20"]);
    assert_eq!(o.code, 0);
    assert_eq!(error_json(&cahom(&["laws", "timed", "--monoid", "Q"]))["error"], "UnknownMonoid");
    assert_eq!(cahom(&["laws", "dist", "--samples", "0"]).code, 1);
}

#[test]
fn usage_errors() {
    let o = cahom(&["frobnicate"]);
    assert_eq!(o.code, 1);
    assert_eq!(error_json(&o)["error"], "Usage");
    assert_eq!(cahom(&["--help"]).code, 0);
}

#[test]
fn dsl_round_trip_through_files() {
    let dir = TempDir::new().unwrap();
    let sys = builtin("sierpinski").unwrap();
    let f = write(&dir, "s.lsys", &sys.to_dsl());
    assert_eq!(parse_lsystem(&fs::read_to_string(&f).unwrap()).unwrap(), sys);
    let a = cahom(&["lsystem", "sample", &f, "--samples", "30"]);
    let b = cahom(&["lsystem", "sample", "--builtin", "sierpinski", "--samples", "30"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn markov_chain_json_round_trips() {
    let json: MarkovChainJson = serde_json::from_str(CYCLE2).unwrap();
    let chain = cahom_core::markov::MarkovChain::from_json(&json).unwrap();
    let again: MarkovChainJson = serde_json::from_str(&serde_json::to_string(&chain.to_json()).unwrap()).unwrap();
    assert_eq!(cahom_core::markov::MarkovChain::from_json(&again).unwrap(), chain);
}

#[test]
fn binary_runs() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_cahom"))
        .args(["lsystem", "check", "--builtin", "koch"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("well-formed"));
}
