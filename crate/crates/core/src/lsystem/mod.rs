//! Fractal L-systems interpreted as unit curves.
//!
//! A rule `K -a-> body` lists turns and nonterminals. Each nonterminal
//! denotes a curve from `(0,0)` to `(1,0)`; a rule concatenates the curves
//! of its symbols along a turtle path, sends turns to constant points, and
//! shrinks the result by `a`. Well-formed rules reproduce unit curves, and
//! the curve of a nonterminal is the unique fixpoint of this recursion.

mod eval;
mod parse;
mod turn;

use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schemes::Cofree;

pub use eval::{
    check_self_similarity, curve_bound, depth_limit, eval_point, sample_curve, CurvePoint, Sample,
};
pub use parse::parse_lsystem;
pub use turn::{parse_degrees, Turn};

/// Tolerance for comparing spans with `a·e`.
pub const SPAN_TOLERANCE: f64 = 1e-9;

/// Default certificate size for point evaluation.
pub const DEFAULT_EPSILON: f64 = 1e-9;

pub const E: [f64; 2] = [1.0, 0.0];

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LSystemError {
    #[error("line {line}, column {column}: {reason}")]
    Parse { line: usize, column: usize, reason: String },
    #[error("line {line}, column {column}: undeclared nonterminal `{name}`")]
    UndeclaredNonterminal { name: String, line: usize, column: usize },
    #[error("rule `{0}` has an empty body")]
    EmptyBody(String),
    #[error("unknown nonterminal `{0}`")]
    UnknownNonterminal(String),
    #[error("rule `{0}` is not well-formed")]
    NotWellFormed(String),
    #[error("parameter {0} is outside [0, 1]")]
    OutOfDomain(String),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("sample count must be positive")]
    NoSamples,
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Entry {
    Turn(Turn),
    Symbol(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub shrink: f64,
    pub body: Vec<Entry>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.body.len()
    }

    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }

    /// The rule with every symbol replaced by the same placeholder.
    pub fn shape(&self) -> RuleShape {
        RuleShape {
            shrink: self.shrink,
            body: self
                .body
                .iter()
                .map(|e| match e {
                    Entry::Turn(t) => Some(*t),
                    Entry::Symbol(_) => None,
                })
                .collect(),
        }
    }
}

/// A rule with symbol identities erased; `None` marks a symbol slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleShape {
    pub shrink: f64,
    pub body: Vec<Option<Turn>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractalLSystem {
    pub rules: IndexMap<String, Rule>,
    pub axiom: String,
}

impl FractalLSystem {
    pub fn rule(&self, name: &str) -> Result<&Rule, LSystemError> {
        self.rules.get(name).ok_or_else(|| LSystemError::UnknownNonterminal(name.to_string()))
    }

    /// Nonterminals reachable from `start`, in discovery order.
    pub fn reachable(&self, start: &str) -> Result<Vec<String>, LSystemError> {
        self.rule(start)?;
        let mut seen: Vec<String> = vec![start.to_string()];
        let mut i = 0;
        while i < seen.len() {
            for entry in &self.rules[&seen[i]].body {
                if let Entry::Symbol(s) = entry {
                    if !seen.contains(s) {
                        seen.push(s.clone());
                    }
                }
            }
            i += 1;
        }
        Ok(seen)
    }
}

/// Net displacement and rotation of a turtle walking `body`, where every
/// symbol is one unit step.
pub fn span_dir(body: &[Entry]) -> ([f64; 2], Turn) {
    let mut span = [0.0, 0.0];
    let mut dir = Turn::identity();
    for entry in body {
        match entry {
            Entry::Turn(t) => dir = dir.compose(*t),
            Entry::Symbol(_) => {
                let v = dir.rotate(E);
                span[0] += v[0];
                span[1] += v[1];
            }
        }
    }
    (span, dir)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WfrReport {
    pub rule: String,
    pub shrink: f64,
    pub shrink_ok: bool,
    pub span: [f64; 2],
    pub span_ok: bool,
    pub dir: Turn,
    pub dir_ok: bool,
}

impl WfrReport {
    pub fn well_formed(&self) -> bool {
        self.shrink_ok && self.span_ok && self.dir_ok
    }
}

pub fn check_rule(name: &str, rule: &Rule) -> WfrReport {
    let (span, dir) = span_dir(&rule.body);
    let a = rule.shrink;
    WfrReport {
        rule: name.to_string(),
        shrink: a,
        shrink_ok: a > 1.0,
        span,
        span_ok: (span[0] - a).abs() <= SPAN_TOLERANCE && span[1].abs() <= SPAN_TOLERANCE,
        dir,
        dir_ok: dir.is_identity(),
    }
}

pub fn check_wfr(sys: &FractalLSystem) -> Vec<WfrReport> {
    sys.rules.iter().map(|(name, rule)| check_rule(name, rule)).collect()
}

/// Distinct shapes of the rules reachable from `start`.
pub fn shape_set(sys: &FractalLSystem, start: &str) -> Result<Vec<RuleShape>, LSystemError> {
    let mut shapes: Vec<RuleShape> = Vec::new();
    for name in sys.reachable(start)? {
        let shape = sys.rules[&name].shape();
        if !shapes.contains(&shape) {
            shapes.push(shape);
        }
    }
    Ok(shapes)
}

/// Concrete interpretation of a body on `[0, ℓ]`, with `curve(name, z)`
/// supplying the curve of each symbol on `(0, 1)`.
pub fn step(body: &[Entry], x: f64, curve: &dyn Fn(&str, f64) -> [f64; 2]) -> [f64; 2] {
    let mut pos = [0.0, 0.0];
    let mut dir = Turn::identity();
    let mut x = x;
    for (i, entry) in body.iter().enumerate() {
        let last = i + 1 == body.len();
        if x <= 1.0 || last {
            let local = match entry {
                Entry::Turn(_) => [0.0, 0.0],
                Entry::Symbol(_) if x <= 0.0 => [0.0, 0.0],
                Entry::Symbol(_) if x >= 1.0 => E,
                Entry::Symbol(s) => curve(s, x),
            };
            let v = dir.rotate(local);
            return [pos[0] + v[0], pos[1] + v[1]];
        }
        match entry {
            Entry::Turn(t) => dir = dir.compose(*t),
            Entry::Symbol(_) => {
                let v = dir.rotate(E);
                pos[0] += v[0];
                pos[1] += v[1];
            }
        }
        x -= 1.0;
    }
    pos
}

/// `draw((a, t))(z) = a⁻¹ · step(t)(ℓ z)`.
pub fn draw(rule: &Rule, z: f64, curve: &dyn Fn(&str, f64) -> [f64; 2]) -> [f64; 2] {
    let v = step(&rule.body, rule.len() as f64 * z, curve);
    [v[0] / rule.shrink, v[1] / rule.shrink]
}

/// The straight stroke `x ↦ x·e`.
pub fn stroke(_: &str, x: f64) -> [f64; 2] {
    [x, 0.0]
}

/// Approximates the curve of `start` by unfolding `depth` levels and
/// drawing strokes below.
pub fn approximate(sys: &FractalLSystem, start: &str, z: f64, depth: usize) -> [f64; 2] {
    fn go(sys: &FractalLSystem, name: &str, z: f64, depth: usize) -> [f64; 2] {
        if depth == 0 {
            return stroke(name, z);
        }
        draw(&sys.rules[name], z, &|s, x| go(sys, s, x, depth - 1))
    }
    go(sys, start, z, depth)
}

/// The rule tree of `start` unfolded to `depth`, labelled by nonterminal.
pub fn unfold_tree(sys: &FractalLSystem, start: &str, depth: usize) -> Result<Cofree<RuleShape, String>, LSystemError> {
    let rule = sys.rule(start)?;
    let truncated = depth == 0;
    let children = if truncated {
        Vec::new()
    } else {
        rule.body
            .iter()
            .filter_map(|e| match e {
                Entry::Symbol(s) => Some(unfold_tree(sys, s, depth - 1)),
                Entry::Turn(_) => None,
            })
            .collect::<Result<_, _>>()?
    };
    Ok(Cofree {
        label: start.to_string(),
        shape: rule.shape(),
        children,
        truncated,
    })
}

pub const KOCH: &str = "K -3-> K +60 K -120 K +60 K\naxiom K\n";
pub const SIERPINSKI: &str = "U -2-> +60 D -60 U -60 D +60\nD -2-> -60 U +60 D +60 U -60\naxiom U\n";

pub fn builtin(name: &str) -> Result<FractalLSystem, LSystemError> {
    let text = match name {
        "koch" => KOCH,
        "sierpinski" => SIERPINSKI,
        other => return Err(LSystemError::UnknownBuiltin(other.to_string())),
    };
    Ok(parse_lsystem(text).expect("builtin systems parse"))
}

/// Concatenation `t ⊕ u` of two rules with summed shrink factors.
pub fn concat(r: &Rule, s: &Rule) -> Rule {
    Rule {
        shrink: r.shrink + s.shrink,
        body: r.body.iter().chain(&s.body).cloned().collect(),
    }
}

/// Names of nonterminals used anywhere in the system.
pub fn symbols(sys: &FractalLSystem) -> BTreeSet<String> {
    sys.rules
        .values()
        .flat_map(|r| r.body.iter())
        .filter_map(|e| match e {
            Entry::Symbol(s) => Some(s.clone()),
            Entry::Turn(_) => None,
        })
        .collect()
}
