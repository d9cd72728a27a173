//! Command-line front end for the `cahom` engines.
//!
//! Exit codes: 0 on success, 1 for unreadable or invalid input, 2 when the
//! input is valid but has no solution or fails a check. Errors are written
//! to the diagnostic stream as a single JSON object.

pub mod svg;

use std::fmt::Debug;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cahom_core::games::{
    self, backward_induction, discounted_eval, unfold_tree, validate_game, GameError, GameShape, GameSpec, RawGame,
};
use cahom_core::lsystem::{
    self, builtin, check_wfr, parse_lsystem, sample_curve, shape_set, FractalLSystem, LSystemError, RuleShape,
    WfrReport,
};
use cahom_core::markov::{
    self, canonical_from, classify, stationary_from, Distribution, MarkovChain, MarkovChainJson,
    MarkovError, Matrix,
};
use cahom_core::schemes::{check_comonad_laws, check_dist_monad_laws, check_timed_monad_laws, LawError, SquareReport};
use cahom_core::timed::{
    series_coalgebra, solve, verify_solution, Deltas, MonoidId, SolutionFamily, SolutionFamilyJson, TimedCoalgebra,
    TimedError, Unsolvable,
};
use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use svg::{render_svg, RenderError, RenderStyle, Viewport};

#[derive(Parser, Debug)]
#[command(name = "cahom", version, about = "Recursion-scheme engines for timed systems, Markov chains, games and fractal curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Timed systems over a time monoid
    #[command(subcommand)]
    Timed(TimedCmd),
    /// Long-run behaviour of finite Markov chains
    #[command(subcommand)]
    Markov(MarkovCmd),
    /// Backward induction on perfect-information games
    #[command(subcommand)]
    Game(GameCmd),
    /// Fractal L-system curves
    #[command(subcommand)]
    Lsystem(LsystemCmd),
    /// Randomised monad and comonad law checks
    #[command(subcommand)]
    Laws(LawsCmd),
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Print machine-readable JSON instead of a summary
    #[arg(long)]
    json: bool,
    /// Also write the result to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum TimedCmd {
    /// Solve a coalgebra and print its solution family
    Solve {
        file: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Build one of the four series coalgebras
    Series {
        /// 1: all integers, 2: non-positive, 3: non-negative, 4: [0, n]
        #[arg(long)]
        kind: u8,
        /// Constant time difference
        #[arg(long, conflicts_with = "zeno", required_unless_present = "zeno")]
        delta: Option<f64>,
        /// Use Zeno's differences 2^-(i+1)
        #[arg(long)]
        zeno: bool,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        lo: i64,
        #[arg(long, allow_hyphen_values = true)]
        hi: i64,
        #[arg(long, default_value = "R")]
        monoid: String,
        #[command(flatten)]
        output: Output,
    },
    /// Check a solution family against its coalgebra
    Verify {
        file: PathBuf,
        solution: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand, Debug)]
enum MarkovCmd {
    /// Communicating classes, recurrence and periods
    Classify {
        file: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Stationary distribution of each recurrent class
    Stationary {
        file: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// The long-run matrix E†
    Solution {
        file: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Check E · S = S for a candidate long-run matrix S
    Verify {
        file: PathBuf,
        solution: PathBuf,
        #[arg(long, default_value_t = markov::FIXPOINT_TOLERANCE)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand, Debug)]
enum GameCmd {
    /// Backward-induction payoff of the start state
    Eval {
        file: PathBuf,
        #[arg(long)]
        start: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Dump the unfolded game tree
    Tree {
        file: PathBuf,
        #[arg(long)]
        start: Option<String>,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Discounted value iteration (also for cyclic games)
    Discount {
        file: PathBuf,
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug, Clone)]
struct SystemSource {
    /// Rule file
    #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
    file: Option<PathBuf>,
    /// Use a builtin system: koch or sierpinski
    #[arg(long)]
    builtin: Option<String>,
    /// Start nonterminal (defaults to the axiom)
    #[arg(long)]
    start: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct SampleArgs {
    #[arg(long, default_value_t = 666)]
    samples: usize,
    #[arg(long, default_value_t = lsystem::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Evaluate sample points in parallel
    #[arg(long)]
    parallel: bool,
}

#[derive(Subcommand, Debug)]
enum LsystemCmd {
    /// Well-formedness of every rule
    Check {
        #[command(flatten)]
        source: SystemSource,
        #[command(flatten)]
        output: Output,
    },
    /// Rule shapes reachable from the start symbol
    Shapes {
        #[command(flatten)]
        source: SystemSource,
        #[command(flatten)]
        output: Output,
    },
    /// Evaluate the curve at k/n as CSV
    Sample {
        #[command(flatten)]
        source: SystemSource,
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Draw the sampled curve as SVG
    Render {
        #[command(flatten)]
        source: SystemSource,
        #[command(flatten)]
        sample: SampleArgs,
        /// Leave out the dashed connecting line
        #[arg(long)]
        no_connect: bool,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug, Clone)]
struct LawArgs {
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand, Debug)]
enum LawsCmd {
    /// Monad laws of the timed monad
    Timed {
        #[arg(long, default_value = "Z")]
        monoid: String,
        #[command(flatten)]
        args: LawArgs,
    },
    /// Monad laws of the finite distribution monad
    Dist {
        #[command(flatten)]
        args: LawArgs,
    },
    /// Comonad laws on game and L-system trees
    Comonad {
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[command(flatten)]
        args: LawArgs,
    },
}

/// A failed command: exit code and the JSON diagnostic.
#[derive(Debug)]
struct Failure {
    code: i32,
    body: Value,
}

type CmdResult = Result<(), Failure>;

fn variant<E: Debug>(e: &E) -> String {
    format!("{e:?}").chars().take_while(|c| c.is_ascii_alphanumeric()).collect()
}

fn invalid(kind: &str, message: impl ToString) -> Failure {
    Failure {
        code: 1,
        body: json!({"error": kind, "message": message.to_string()}),
    }
}

fn infeasible(kind: &str, message: impl ToString) -> Failure {
    Failure {
        code: 2,
        body: json!({"error": kind, "message": message.to_string()}),
    }
}

impl From<TimedError> for Failure {
    fn from(e: TimedError) -> Self {
        invalid(&variant(&e), &e)
    }
}

impl From<Unsolvable> for Failure {
    fn from(e: Unsolvable) -> Self {
        let mut f = infeasible(&variant(&e), &e);
        if let Unsolvable::Inconsistent(w) = &e {
            f.body["cycle"] = json!(w.cycle);
            f.body["total"] = json!(w.total);
        }
        f
    }
}

impl From<MarkovError> for Failure {
    fn from(e: MarkovError) -> Self {
        match e {
            MarkovError::SingularSystem { .. } => infeasible(&variant(&e), &e),
            _ => invalid(&variant(&e), &e),
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        match &e {
            GameError::CyclicGame(cycle) => {
                let mut f = infeasible("CyclicGame", &e);
                f.body["cycle"] = json!(cycle);
                f
            }
            GameError::NotConverged(_) => infeasible(&variant(&e), &e),
            _ => invalid(&variant(&e), &e),
        }
    }
}

impl From<LSystemError> for Failure {
    fn from(e: LSystemError) -> Self {
        let mut f = match &e {
            LSystemError::NotWellFormed(_) => infeasible(&variant(&e), &e),
            _ => invalid(&variant(&e), &e),
        };
        if let LSystemError::Parse { line, column, .. } | LSystemError::UndeclaredNonterminal { line, column, .. } = &e
        {
            f.body["line"] = json!(line);
            f.body["column"] = json!(column);
        }
        f
    }
}

impl From<LawError> for Failure {
    fn from(e: LawError) -> Self {
        invalid(&variant(&e), &e)
    }
}

impl From<RenderError> for Failure {
    fn from(e: RenderError) -> Self {
        invalid(&variant(&e), &e)
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid("Io", format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| invalid("Json", format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| invalid("Io", format!("{}: {e}", path.display())))
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn parse_monoid(s: &str) -> Result<MonoidId, Failure> {
    serde_json::from_value(json!(s)).map_err(|_| invalid("UnknownMonoid", format!("unknown monoid `{s}`")))
}

/// Writes the JSON artifact to `--out` if given, and prints it or a
/// summary.
fn emit<T: Serialize>(out: &mut dyn Write, output: &Output, value: &T, summary: impl FnOnce() -> String) -> CmdResult {
    let text = pretty(value);
    if let Some(path) = &output.out {
        write_file(path, &text)?;
    }
    let shown = if output.json { text } else { summary() };
    out.write_all(shown.as_bytes()).map_err(|e| invalid("Io", e))
}

fn report_result(report: &SquareReport, what: &str) -> CmdResult {
    if report.passed {
        Ok(())
    } else {
        let mut f = infeasible("CheckFailed", format!("{what}: {} of {} points fail", report.failures.len(), report.total_points));
        f.body["failures"] = json!(report.failures);
        Err(f)
    }
}

fn report_summary(report: &SquareReport, what: &str) -> String {
    let mut s = format!(
        "{what}: {} ({} points, {} failures)\n",
        if report.passed { "pass" } else { "FAIL" },
        report.total_points,
        report.failures.len()
    );
    for f in &report.failures {
        s.push_str(&format!("  {}: {} != {}\n", f.state, f.lhs, f.rhs));
    }
    s
}

// ---------------------------------------------------------------- timed

fn timed_cmd(cmd: TimedCmd, out: &mut dyn Write) -> CmdResult {
    match cmd {
        TimedCmd::Solve { file, output } => {
            let e = TimedCoalgebra::from_json(read_json(&file)?)?;
            let family = solve(&e)?;
            let json = family.to_json();
            emit(out, &output, &json, || {
                let mut s = format!("{} classes over {}\n", json.classes.len(), json.monoid);
                for c in &json.classes {
                    let offsets: Vec<String> = c.offsets.iter().map(|(k, v)| format!("{k}: {v}")).collect();
                    s.push_str(&format!("  reference {}; offsets {{{}}}\n", c.reference, offsets.join(", ")));
                }
                s
            })
        }
        TimedCmd::Series {
            kind,
            delta,
            zeno,
            lo,
            hi,
            monoid,
            output,
        } => {
            let monoid = parse_monoid(&monoid)?;
            let deltas = match (delta, zeno) {
                (Some(d), false) => Deltas::Constant(d),
                _ => Deltas::from_fn(lo.min(0)..=hi.max(0), |i| 0.5f64.powi(i as i32 + 1)),
            };
            if zeno && lo < 0 {
                return Err(invalid("WindowMismatch", "Zeno differences start at 0"));
            }
            let e = series_coalgebra(kind, &deltas, lo..=hi, monoid)?;
            let json = e.to_json();
            emit(out, &output, &json, || {
                let mut s = format!("series kind {kind} on {lo}..={hi} over {monoid}\n");
                for i in lo..=hi {
                    if let Some(t) = deltas.partial_sum(i) {
                        s.push_str(&format!("  t[{i}] = {t}\n"));
                    }
                }
                s
            })
        }
        TimedCmd::Verify { file, solution, output } => {
            let e = TimedCoalgebra::from_json(read_json(&file)?)?;
            let json: SolutionFamilyJson = read_json(&solution)?;
            let family = SolutionFamily::from_json(&json, e.states())?;
            if family.monoid != e.monoid() {
                return Err(invalid("MonoidMismatch", "solution and coalgebra use different monoids"));
            }
            // Zero shift and the class index as the target tag.
            let params: Vec<(f64, usize)> = (0..family.classes.len()).map(|c| (0.0, c)).collect();
            let instance = family.instance(&params)?;
            let report = verify_solution(&e, &instance);
            emit(out, &output, &report, || report_summary(&report, "solution square"))?;
            report_result(&report, "solution square")
        }
    }
}

// --------------------------------------------------------------- markov

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassJson {
    pub members: Vec<String>,
    pub recurrent: bool,
    pub period: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureJson {
    pub classes: Vec<ClassJson>,
    /// Per state, probability of ending in each recurrent class (indexed as
    /// in `classes`).
    pub absorption: Vec<Vec<f64>>,
}

/// Row-major long-run matrix over the chain's states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub states: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

fn format_row(row: &[f64]) -> String {
    row.iter().map(|p| format!("{p:.12}")).collect::<Vec<_>>().join("  ")
}

fn markov_cmd(cmd: MarkovCmd, out: &mut dyn Write) -> CmdResult {
    match cmd {
        MarkovCmd::Classify { file, output } => {
            let chain = MarkovChain::from_json(&read_json::<MarkovChainJson>(&file)?)?;
            let s = classify(&chain)?;
            let name = |x: &usize| chain.states()[*x].clone();
            let json = StructureJson {
                classes: s
                    .classes
                    .iter()
                    .enumerate()
                    .map(|(c, members)| ClassJson {
                        members: members.iter().map(name).collect(),
                        recurrent: s.recurrent[c],
                        period: s.period[c],
                    })
                    .collect(),
                absorption: s.absorption.to_rows(),
            };
            emit(out, &output, &json, || {
                let mut text = String::new();
                for c in &json.classes {
                    text.push_str(&format!(
                        "{{{}}}: {}, period {}\n",
                        c.members.join(", "),
                        if c.recurrent { "recurrent" } else { "transient" },
                        c.period
                    ));
                }
                text
            })
        }
        MarkovCmd::Stationary { file, output } => {
            let chain = MarkovChain::from_json(&read_json::<MarkovChainJson>(&file)?)?;
            let s = classify(&chain)?;
            let st = stationary_from(&chain, &s, 0)?;
            let vectors: Vec<Vec<f64>> = st.per_class.iter().map(|c| c.distribution.clone()).collect();
            // A unique stationary law prints as one vector.
            let json = if vectors.len() == 1 { json!(vectors[0]) } else { json!(vectors) };
            emit(out, &output, &json, || {
                let mut text = format!("states: {}\n", chain.states().join("  "));
                for v in &vectors {
                    text.push_str(&format_row(v));
                    text.push('\n');
                }
                text
            })
        }
        MarkovCmd::Solution { file, output } => {
            let chain = MarkovChain::from_json(&read_json::<MarkovChainJson>(&file)?)?;
            let s = classify(&chain)?;
            let st = stationary_from(&chain, &s, 0)?;
            let sol = canonical_from(&chain, &s, &st);
            let json = SolutionJson {
                states: chain.states().to_vec(),
                matrix: sol.to_rows(),
            };
            emit(out, &output, &json, || {
                let mut text = String::new();
                for (name, row) in json.states.iter().zip(&json.matrix) {
                    text.push_str(&format!("{name}: {}\n", format_row(row)));
                }
                text
            })
        }
        MarkovCmd::Verify {
            file,
            solution,
            tol,
            output,
        } => {
            let chain = MarkovChain::from_json(&read_json::<MarkovChainJson>(&file)?)?;
            let sol: SolutionJson = read_json(&solution)?;
            if sol.states != chain.states() {
                return Err(invalid("StateMismatch", "solution states differ from the chain's"));
            }
            let matrix = Matrix::from_rows(&sol.matrix)
                .filter(|m| m.rows() == chain.len() && m.cols() == chain.len())
                .ok_or_else(|| invalid("ShapeMismatch", "solution matrix must be square over the chain's states"))?;
            let report = markov::verify_fixpoint_with(&chain, &matrix, tol);
            emit(out, &output, &report, || report_summary(&report, "fixpoint E·S = S"))?;
            report_result(&report, "fixpoint")
        }
    }
}

// ---------------------------------------------------------------- games

fn load_game(file: &Path, start: Option<String>) -> Result<(GameSpec, usize), Failure> {
    let raw: RawGame = read_json(file)?;
    let spec = validate_game(&raw)?;
    let start = match start {
        Some(name) => spec.index_of(&name).ok_or(GameError::UnknownState(name))?,
        None => spec.start().ok_or(GameError::NoStart)?,
    };
    Ok((spec, start))
}

fn payoff_summary(spec: &GameSpec, start: usize, payoff: &[f64]) -> String {
    let parts: Vec<String> = spec.agents().iter().zip(payoff).map(|(a, v)| format!("{a}: {v}")).collect();
    format!("{}: {}\n", spec.states()[start], parts.join(", "))
}

fn game_cmd(cmd: GameCmd, out: &mut dyn Write) -> CmdResult {
    match cmd {
        GameCmd::Eval { file, start, output } => {
            let (spec, s) = load_game(&file, start)?;
            let payoff = backward_induction(&spec, s)?;
            emit(out, &output, &spec.named(&payoff), || payoff_summary(&spec, s, &payoff))
        }
        GameCmd::Tree {
            file,
            start,
            depth,
            output,
        } => {
            let (spec, s) = load_game(&file, start)?;
            let tree = unfold_tree(&spec, s, depth);
            emit(out, &output, &tree, || {
                fn show(t: &games::GameTree, spec: &GameSpec, indent: usize, acc: &mut String) {
                    let what = match &t.shape {
                        GameShape::Terminal(p) => format!("payoff {p:?}"),
                        GameShape::Move { agent } if t.truncated => format!("{} moves (cut)", spec.agents()[*agent]),
                        GameShape::Move { agent } => format!("{} moves", spec.agents()[*agent]),
                    };
                    acc.push_str(&format!("{:indent$}{}: {what}\n", "", t.label));
                    for c in &t.children {
                        show(c, spec, indent + 2, acc);
                    }
                }
                let mut acc = String::new();
                show(&tree, &spec, 0, &mut acc);
                acc
            })
        }
        GameCmd::Discount {
            file,
            start,
            gamma,
            tol,
            output,
        } => {
            let (spec, s) = load_game(&file, start)?;
            let payoff = discounted_eval(&spec, s, gamma, tol)?;
            emit(out, &output, &spec.named(&payoff), || payoff_summary(&spec, s, &payoff))
        }
    }
}

// -------------------------------------------------------------- lsystem

fn load_system(source: &SystemSource) -> Result<(FractalLSystem, String), Failure> {
    let sys = match (&source.builtin, &source.file) {
        (Some(name), _) => builtin(name)?,
        (None, Some(path)) => parse_lsystem(&read_text(path)?)?,
        (None, None) => return Err(invalid("Usage", "give a rule file or --builtin")),
    };
    let start = source.start.clone().unwrap_or_else(|| sys.axiom.clone());
    sys.rule(&start)?;
    Ok((sys, start))
}

/// CSV with header `i,z,x,y,exact,err`.
pub fn sample_csv(points: &[lsystem::CurvePoint]) -> String {
    let mut s = String::from("i,z,x,y,exact,err\n");
    for (i, p) in points.iter().enumerate() {
        s.push_str(&format!(
            "{i},{}/{},{:.15e},{:.15e},{},{:e}\n",
            p.z.numer(),
            p.z.denom(),
            p.value[0],
            p.value[1],
            p.exact,
            p.error_bound
        ));
    }
    s
}

#[derive(Serialize)]
struct SampleSummary {
    samples: usize,
    exact: usize,
    exact_fraction: f64,
    bound: f64,
    max_error_bound: f64,
}

fn lsystem_cmd(cmd: LsystemCmd, out: &mut dyn Write) -> CmdResult {
    match cmd {
        LsystemCmd::Check { source, output } => {
            let (sys, _) = load_system(&source)?;
            let reports = check_wfr(&sys);
            emit(out, &output, &reports, || {
                reports
                    .iter()
                    .map(|r| {
                        format!(
                            "{}: a={} span=({:.12}, {:.12}) dir={} -> {}\n",
                            r.rule,
                            r.shrink,
                            r.span[0],
                            r.span[1],
                            r.dir,
                            if r.well_formed() { "well-formed" } else { "NOT well-formed" }
                        )
                    })
                    .collect()
            })?;
            if let Some(bad) = reports.iter().find(|r| !r.well_formed()) {
                let mut f = infeasible("NotWellFormed", format!("rule `{}` is not well-formed", bad.rule));
                let failing: Vec<&WfrReport> = reports.iter().filter(|r| !r.well_formed()).collect();
                f.body["reports"] = json!(failing);
                return Err(f);
            }
            Ok(())
        }
        LsystemCmd::Shapes { source, output } => {
            let (sys, start) = load_system(&source)?;
            let shapes: Vec<RuleShape> = shape_set(&sys, &start)?;
            emit(out, &output, &shapes, || {
                let mut s = format!("{} shape(s) reachable from {start}\n", shapes.len());
                for shape in &shapes {
                    let body: Vec<String> = shape
                        .body
                        .iter()
                        .map(|e| e.map_or_else(|| "*".to_string(), |t| t.to_string()))
                        .collect();
                    s.push_str(&format!("  -{}-> {}\n", shape.shrink, body.join(" ")));
                }
                s
            })
        }
        LsystemCmd::Sample { source, sample, output } => {
            let (sys, start) = load_system(&source)?;
            let result = sample_curve(&sys, &start, sample.samples, sample.epsilon, sample.parallel)?;
            let csv = sample_csv(&result.points);
            if let Some(path) = &output.out {
                write_file(path, &csv)?;
            }
            let text = if output.json {
                pretty(&result)
            } else if output.out.is_some() {
                format!(
                    "{} of {} points exact\n",
                    result.exact_count(),
                    result.points.len()
                )
            } else {
                csv
            };
            out.write_all(text.as_bytes()).map_err(|e| invalid("Io", e))
        }
        LsystemCmd::Render {
            source,
            sample,
            no_connect,
            output,
        } => {
            let (sys, start) = load_system(&source)?;
            let result = sample_curve(&sys, &start, sample.samples, sample.epsilon, sample.parallel)?;
            let style = RenderStyle {
                connect: !no_connect,
                ..RenderStyle::default()
            };
            let points: Vec<[f64; 2]> = result.points.iter().map(|p| p.value).collect();
            let svg = render_svg(&points, &style)?;
            let summary = SampleSummary {
                samples: result.points.len(),
                exact: result.exact_count(),
                exact_fraction: result.exact_fraction(),
                bound: result.bound,
                max_error_bound: result.points.iter().map(|p| p.error_bound).fold(0.0, f64::max),
            };
            let text = match &output.out {
                Some(path) => {
                    write_file(path, &svg)?;
                    if output.json {
                        pretty(&summary)
                    } else {
                        format!(
                            "wrote {} ({} of {} points exact)\n",
                            path.display(),
                            summary.exact,
                            summary.samples
                        )
                    }
                }
                None => svg,
            };
            out.write_all(text.as_bytes()).map_err(|e| invalid("Io", e))
        }
    }
}

// ----------------------------------------------------------------- laws

/// Random `(delay, value)` samples valid for `monoid`.
pub fn random_timed_samples(monoid: MonoidId, n: usize, rng: &mut impl Rng) -> Vec<(f64, u32)> {
    (0..n)
        .map(|_| {
            let t = match monoid {
                MonoidId::Z => rng.gen_range(-1000i64..=1000) as f64,
                MonoidId::N => rng.gen_range(0i64..=1000) as f64,
                MonoidId::R => rng.gen_range(-1000.0..1000.0),
                MonoidId::RPlus => rng.gen_range(0.0..1000.0),
            };
            (t, rng.gen_range(0..100))
        })
        .collect()
}

fn random_distribution<R: Rng, V>(rng: &mut R, mut value: impl FnMut(&mut R) -> V) -> Distribution<V> {
    let k = rng.gen_range(1..=4);
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    Distribution::from_weights(weights.into_iter().map(|w| (value(rng), w / total)).collect())
}

/// Random distributions of distributions over small integers.
pub fn random_dist_samples(n: usize, rng: &mut impl Rng) -> Vec<Distribution<Distribution<u8>>> {
    (0..n)
        .map(|_| random_distribution(rng, |r| random_distribution(r, |r| r.gen_range(0..6u8))))
        .collect()
}

/// A random acyclic two-agent, two-choice game whose move nodes only point
/// to later states.
pub fn random_game(rng: &mut impl Rng) -> GameSpec {
    let moves = rng.gen_range(1..=6);
    let terminals = rng.gen_range(1..=4);
    let n = moves + terminals;
    let mut nodes = Vec::with_capacity(n);
    for i in 0..moves {
        let targets = (0..2).map(|_| rng.gen_range(i + 1..n)).collect();
        nodes.push(games::Node::Move {
            agent: rng.gen_range(0..2),
            moves: targets,
        });
    }
    for _ in 0..terminals {
        nodes.push(games::Node::Terminal(vec![
            rng.gen_range(0..4) as f64,
            rng.gen_range(0..4) as f64,
        ]));
    }
    let names = |s: &[&str]| s.iter().map(|x| x.to_string()).collect();
    GameSpec::from_nodes(names(&["a", "b"]), names(&["l", "r"]), nodes, Some(0)).expect("well-formed by construction")
}

/// Runs the comonad laws on `n` trees, alternating between unfolded random
/// games and the builtin L-systems.
pub fn comonad_report(n: usize, depth: usize, rng: &mut impl Rng) -> SquareReport {
    let mut game_trees = Vec::new();
    let mut curve_trees = Vec::new();
    let systems = [builtin("koch").expect("builtin"), builtin("sierpinski").expect("builtin")];
    for i in 0..n {
        if i % 2 == 0 {
            let g = random_game(rng);
            game_trees.push(unfold_tree(&g, 0, rng.gen_range(0..=depth + 1)));
        } else {
            let sys = &systems[rng.gen_range(0..2)];
            curve_trees.push(
                lsystem::unfold_tree(sys, &sys.axiom, rng.gen_range(0..=3)).expect("builtin axiom"),
            );
        }
    }
    let games = check_comonad_laws(&game_trees, depth);
    let curves = check_comonad_laws(&curve_trees, depth);
    SquareReport::merge([games, curves])
}

fn laws_cmd(cmd: LawsCmd, out: &mut dyn Write) -> CmdResult {
    let (args, report, what) = match cmd {
        LawsCmd::Timed { monoid, args } => {
            let monoid = parse_monoid(&monoid)?;
            let mut rng = StdRng::seed_from_u64(args.seed);
            let samples = random_timed_samples(monoid, args.samples, &mut rng);
            (args, check_timed_monad_laws(monoid, &samples)?, "timed monad laws")
        }
        LawsCmd::Dist { args } => {
            let mut rng = StdRng::seed_from_u64(args.seed);
            let samples = random_dist_samples(args.samples, &mut rng);
            (args, check_dist_monad_laws(&samples)?, "distribution monad laws")
        }
        LawsCmd::Comonad { depth, args } => {
            if args.samples == 0 {
                return Err(LawError::NoSamples.into());
            }
            let mut rng = StdRng::seed_from_u64(args.seed);
            (args.clone(), comonad_report(args.samples, depth, &mut rng), "comonad laws")
        }
    };
    emit(out, &args.output, &report, || report_summary(&report, what))?;
    report_result(&report, what)
}

/// Runs the command line `args` (including the program name), writing
/// results to `stdout` and diagnostics to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let body = json!({"error": "Usage", "message": e.to_string().trim_end()});
            let _ = writeln!(stderr, "{body}");
            return 1;
        }
    };
    let result = match cli.command {
        Command::Timed(c) => timed_cmd(c, stdout),
        Command::Markov(c) => markov_cmd(c, stdout),
        Command::Game(c) => game_cmd(c, stdout),
        Command::Lsystem(c) => lsystem_cmd(c, stdout),
        Command::Laws(c) => laws_cmd(c, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.body);
            f.code
        }
    }
}
