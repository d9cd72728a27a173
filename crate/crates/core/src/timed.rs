//! Timing specifications over a time monoid.
//!
//! A [`TimedCoalgebra`] assigns each symbolic state a backward-looking
//! specification `(t, x')`: "`t` time units after `x'`". Its
//! Kleisli-coinductive solutions `e†: X → Δ × Y` satisfy
//! `e†(x) = (t + u, y)` whenever `e(x) = (t, x')` and `e†(x') = (u, y)`.
//!
//! Because every state has exactly one predecessor, the predecessor graph is
//! a functional graph: each weakly connected class holds exactly one cycle.
//! A class is solvable iff its cycle accumulates zero time, and then the
//! solutions are exactly `e†(x) = (offset(x) + u₀, y₀)` for free `u₀`, `y₀`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::RangeInclusive;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schemes::{approx_eq, check_ca_square, SquareReport, DEFAULT_TOLERANCE};

/// The supported time monoids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MonoidId {
    Z,
    R,
    N,
    #[serde(rename = "R+")]
    RPlus,
}

impl MonoidId {
    pub fn is_group(self) -> bool {
        matches!(self, MonoidId::Z | MonoidId::R)
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, MonoidId::Z | MonoidId::N)
    }

    pub fn contains(self, t: f64) -> bool {
        if !t.is_finite() {
            return false;
        }
        if self.is_discrete() && t.fract() != 0.0 {
            return false;
        }
        self.is_group() || t >= 0.0
    }

    /// Equality of durations: exact for the integer monoids, within
    /// [`DEFAULT_TOLERANCE`] for the real ones.
    pub fn delta_eq(self, a: f64, b: f64) -> bool {
        if self.is_discrete() {
            a == b
        } else {
            approx_eq(a, b, DEFAULT_TOLERANCE)
        }
    }
}

impl fmt::Display for MonoidId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MonoidId::Z => "Z",
            MonoidId::R => "R",
            MonoidId::N => "N",
            MonoidId::RPlus => "R+",
        })
    }
}

/// Monad structure of `T = Δ × Id`, with durations written additively.
pub mod monad {
    pub fn unit<V>(x: V) -> (f64, V) {
        (0.0, x)
    }

    pub fn join<V>((t, (u, x)): (f64, (f64, V))) -> (f64, V) {
        (t + u, x)
    }

    pub fn map<V, W>((t, x): (f64, V), f: impl FnOnce(V) -> W) -> (f64, W) {
        (t, f(x))
    }

    /// Kleisli extension `f*`.
    pub fn extend<V, W>(f: impl FnOnce(V) -> (f64, W), (t, x): (f64, V)) -> (f64, W) {
        let (u, y) = f(x);
        (t + u, y)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimedError {
    #[error("value {value} is not an element of monoid {monoid}")]
    InvalidMonoidValue { monoid: MonoidId, value: f64 },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("no specification for state `{0}`")]
    MissingSpecification(String),
    #[error("series kind {kind} does not admit window {lo}..={hi}")]
    WindowMismatch { kind: u8, lo: i64, hi: i64 },
    #[error("series kind must be 1, 2, 3 or 4, got {0}")]
    UnknownSeriesKind(u8),
    #[error("expected {expected} time differences, got {got}")]
    DeltaCount { expected: usize, got: usize },
    #[error("parameter `{0}` must be positive")]
    NonPositiveParameter(&'static str),
    #[error("expected {expected} class parameters, got {got}")]
    MissingParameters { expected: usize, got: usize },
    #[error("state vector has dimension {got}, action expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A finite `T`-coalgebra: states with their backward-looking
/// specifications `e(x) = (delay, predecessor)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimedCoalgebra {
    monoid: MonoidId,
    states: Vec<String>,
    spec: Vec<(f64, usize)>,
}

/// Wire form: `{"monoid": "Z", "states": [...], "e": {name: [delta, name]}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedCoalgebraJson {
    pub monoid: MonoidId,
    pub states: Vec<String>,
    pub e: IndexMap<String, (f64, String)>,
}

impl TimedCoalgebra {
    pub fn new(
        monoid: MonoidId,
        states: Vec<String>,
        e: impl IntoIterator<Item = (String, (f64, String))>,
    ) -> Result<Self, TimedError> {
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.as_str(), i).is_some() {
                return Err(TimedError::DuplicateState(s.clone()));
            }
        }
        let mut spec: Vec<Option<(f64, usize)>> = vec![None; states.len()];
        for (name, (delta, pred)) in e {
            let &x = index.get(name.as_str()).ok_or_else(|| TimedError::UnknownState(name.clone()))?;
            let &p = index.get(pred.as_str()).ok_or(TimedError::UnknownState(pred))?;
            if !monoid.contains(delta) {
                return Err(TimedError::InvalidMonoidValue { monoid, value: delta });
            }
            spec[x] = Some((delta, p));
        }
        let spec = spec
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| TimedError::MissingSpecification(states[i].clone())))
            .collect::<Result<_, _>>()?;
        Ok(TimedCoalgebra { monoid, states, spec })
    }

    /// Builds a coalgebra on index states `0..n` named by their index.
    pub fn from_indices(monoid: MonoidId, spec: &[(f64, usize)]) -> Result<Self, TimedError> {
        let states: Vec<String> = (0..spec.len()).map(|i| i.to_string()).collect();
        let e = spec
            .iter()
            .enumerate()
            .map(|(i, &(t, p))| {
                let pred = states.get(p).cloned().unwrap_or_else(|| p.to_string());
                (states[i].clone(), (t, pred))
            })
            .collect::<Vec<_>>();
        TimedCoalgebra::new(monoid, states, e)
    }

    pub fn from_json(json: TimedCoalgebraJson) -> Result<Self, TimedError> {
        TimedCoalgebra::new(json.monoid, json.states, json.e)
    }

    pub fn to_json(&self) -> TimedCoalgebraJson {
        TimedCoalgebraJson {
            monoid: self.monoid,
            states: self.states.clone(),
            e: self
                .spec
                .iter()
                .enumerate()
                .map(|(i, &(t, p))| (self.states[i].clone(), (t, self.states[p].clone())))
                .collect(),
        }
    }

    pub fn monoid(&self) -> MonoidId {
        self.monoid
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `e(x)` as `(delay, predecessor index)`.
    pub fn spec(&self, x: usize) -> (f64, usize) {
        self.spec[x]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }
}

/// Cycle of the predecessor graph together with its accumulated delay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleWitness {
    pub cycle: Vec<String>,
    pub total: f64,
}

/// Cycle structure of the functional predecessor graph.
struct Cycles {
    /// Component id per state, components numbered by first member.
    component: Vec<usize>,
    /// Per component: the cycle, listed from its earliest member along
    /// predecessor edges.
    cycles: Vec<Vec<usize>>,
    /// Per component: total delay of the cycle.
    weight: Vec<f64>,
    on_cycle: Vec<bool>,
}

fn find_cycles(e: &TimedCoalgebra) -> Cycles {
    let n = e.len();
    // 0 = unvisited, 1 = on the current walk, 2 = done
    let mut mark = vec![0u8; n];
    let mut on_cycle = vec![false; n];
    let mut cycle_of: Vec<Option<usize>> = vec![None; n];
    let mut raw_cycles: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if mark[start] != 0 {
            continue;
        }
        let mut walk = Vec::new();
        let mut x = start;
        while mark[x] == 0 {
            mark[x] = 1;
            walk.push(x);
            x = e.spec[x].1;
        }
        let cid = if mark[x] == 1 {
            let pos = walk.iter().position(|&w| w == x).expect("cycle entry is on the walk");
            let cycle = walk[pos..].to_vec();
            for &c in &cycle {
                on_cycle[c] = true;
            }
            raw_cycles.push(cycle);
            raw_cycles.len() - 1
        } else {
            cycle_of[x].expect("finished states belong to a cycle class")
        };
        for &w in &walk {
            mark[w] = 2;
            cycle_of[w] = Some(cid);
        }
    }

    // Renumber components by their earliest member and rotate each cycle
    // to start at its earliest state.
    let mut renumber = vec![usize::MAX; raw_cycles.len()];
    let mut next = 0;
    let mut component = vec![0; n];
    for x in 0..n {
        let raw = cycle_of[x].expect("every state is classified");
        if renumber[raw] == usize::MAX {
            renumber[raw] = next;
            next += 1;
        }
        component[x] = renumber[raw];
    }
    let mut cycles = vec![Vec::new(); raw_cycles.len()];
    for (raw, mut cycle) in raw_cycles.into_iter().enumerate() {
        let min_pos = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap_or(0);
        cycle.rotate_left(min_pos);
        cycles[renumber[raw]] = cycle;
    }
    let weight = cycles
        .iter()
        .map(|c| c.iter().map(|&x| e.spec[x].0).sum())
        .collect();
    Cycles {
        component,
        cycles,
        weight,
        on_cycle,
    }
}

/// The relations `∼e`, `⪰e`, `≻e`, `≃e` and the weighted reachability `⇝e`.
#[derive(Clone, Debug, PartialEq)]
pub struct Relations {
    /// Classes of `∼e`, each sorted, ordered by first member.
    pub sim_classes: Vec<Vec<usize>>,
    /// `succeq[x][y]` iff `x ⪰e y`, i.e. `y` is reached from `x` along
    /// predecessor edges.
    pub succeq: Vec<Vec<bool>>,
    /// `leadsto[x][y] = Some(t)` iff `x ⇝e (t, y)` with a unique `t`.
    pub leadsto: Vec<Vec<Option<f64>>>,
}

impl Relations {
    pub fn succ(&self, x: usize, y: usize) -> bool {
        self.succeq[x][y] && !self.succeq[y][x]
    }

    pub fn simeq(&self, x: usize, y: usize) -> bool {
        self.succeq[x][y] && self.succeq[y][x]
    }

    pub fn sim(&self, x: usize, y: usize) -> bool {
        self.sim_classes.iter().any(|c| c.contains(&x) && c.contains(&y))
    }

    pub fn succ_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs(|x, y| self.succ(x, y))
    }

    pub fn simeq_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs(|x, y| self.simeq(x, y))
    }

    fn pairs(&self, rel: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
        let n = self.succeq.len();
        (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|&(x, y)| rel(x, y))
            .collect()
    }
}

pub fn build_relations(e: &TimedCoalgebra) -> Relations {
    let n = e.len();
    let cycles = find_cycles(e);
    let mut sim_classes = vec![Vec::new(); cycles.cycles.len()];
    for x in 0..n {
        sim_classes[cycles.component[x]].push(x);
    }

    let mut succeq = vec![vec![false; n]; n];
    let mut leadsto = vec![vec![None; n]; n];
    for x in 0..n {
        let mut y = x;
        let mut acc = 0.0;
        loop {
            if succeq[x][y] {
                break;
            }
            succeq[x][y] = true;
            // Along a non-zero cycle the same target is reached with
            // unboundedly many delays.
            let ambiguous = cycles.on_cycle[y] && !e.monoid.delta_eq(cycles.weight[cycles.component[y]], 0.0);
            if !ambiguous {
                leadsto[x][y] = Some(acc);
            }
            let (t, p) = e.spec[y];
            acc += t;
            y = p;
        }
    }
    Relations {
        sim_classes,
        succeq,
        leadsto,
    }
}

/// `Ok` iff every cycle of the predecessor graph accumulates zero delay;
/// otherwise the first offending cycle (in state order).
pub fn check_consistency(e: &TimedCoalgebra) -> Result<(), CycleWitness> {
    let cycles = find_cycles(e);
    for (cycle, &total) in cycles.cycles.iter().zip(&cycles.weight) {
        if !e.monoid.delta_eq(total, 0.0) {
            return Err(CycleWitness {
                cycle: cycle.iter().map(|&x| e.states[x].clone()).collect(),
                total,
            });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum Unsolvable {
    #[error("inconsistent: cycle {:?} accumulates delay {}", .0.cycle, .0.total)]
    Inconsistent(CycleWitness),
    /// Infinite strictly descending chains of `≻e`. Finite carriers never
    /// contain one, so `solve` does not produce this variant; it is kept for
    /// callers matching on the full set of solvability conditions.
    #[error("strict order is not well-founded along {0:?}")]
    NotWellFounded(Vec<String>),
}

/// One `∼e` class of a solution family.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionClass {
    pub members: Vec<usize>,
    pub reference: usize,
    /// Offsets aligned with `members`.
    pub offsets: Vec<f64>,
}

impl SolutionClass {
    pub fn offset_of(&self, x: usize) -> Option<f64> {
        self.members.iter().position(|&m| m == x).map(|i| self.offsets[i])
    }
}

/// All solutions of a coalgebra: per class, `e†(x) = (offset(x) + u₀, y₀)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionFamily {
    pub monoid: MonoidId,
    pub states: Vec<String>,
    pub classes: Vec<SolutionClass>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionClassJson {
    pub members: Vec<String>,
    pub reference: String,
    pub offsets: IndexMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFamilyJson {
    pub monoid: MonoidId,
    pub classes: Vec<SolutionClassJson>,
}

impl SolutionFamily {
    pub fn class_of(&self, x: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.members.contains(&x))
    }

    pub fn offset(&self, x: usize) -> Option<f64> {
        self.classes.iter().find_map(|c| c.offset_of(x))
    }

    /// The solution instance with the given per-class `(u₀, y₀)`.
    pub fn instance<Y: Clone>(&self, params: &[(f64, Y)]) -> Result<Vec<(f64, Y)>, TimedError> {
        if params.len() != self.classes.len() {
            return Err(TimedError::MissingParameters {
                expected: self.classes.len(),
                got: params.len(),
            });
        }
        let mut out: Vec<Option<(f64, Y)>> = vec![None; self.states.len()];
        for (class, (u0, y0)) in self.classes.iter().zip(params) {
            if !self.monoid.contains(*u0) {
                return Err(TimedError::InvalidMonoidValue {
                    monoid: self.monoid,
                    value: *u0,
                });
            }
            for (&m, &off) in class.members.iter().zip(&class.offsets) {
                out[m] = Some((off + u0, y0.clone()));
            }
        }
        Ok(out.into_iter().map(|v| v.expect("classes partition the states")).collect())
    }

    pub fn to_json(&self) -> SolutionFamilyJson {
        SolutionFamilyJson {
            monoid: self.monoid,
            classes: self
                .classes
                .iter()
                .map(|c| SolutionClassJson {
                    members: c.members.iter().map(|&m| self.states[m].clone()).collect(),
                    reference: self.states[c.reference].clone(),
                    offsets: c
                        .members
                        .iter()
                        .zip(&c.offsets)
                        .map(|(&m, &o)| (self.states[m].clone(), o))
                        .collect(),
                })
                .collect(),
        }
    }

    /// Rebuilds a family against the state list of its coalgebra.
    pub fn from_json(json: &SolutionFamilyJson, states: &[String]) -> Result<Self, TimedError> {
        let index = |name: &str| {
            states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| TimedError::UnknownState(name.to_string()))
        };
        let mut classes = Vec::with_capacity(json.classes.len());
        for c in &json.classes {
            let members = c.members.iter().map(|m| index(m)).collect::<Result<Vec<_>, _>>()?;
            let offsets = c
                .members
                .iter()
                .map(|m| c.offsets.get(m).copied().ok_or_else(|| TimedError::MissingSpecification(m.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            classes.push(SolutionClass {
                members,
                reference: index(&c.reference)?,
                offsets,
            });
        }
        let mut seen = vec![false; states.len()];
        for &m in classes.iter().flat_map(|c| &c.members) {
            if std::mem::replace(&mut seen[m], true) {
                return Err(TimedError::DuplicateState(states[m].clone()));
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(TimedError::MissingSpecification(states[missing].clone()));
        }
        Ok(SolutionFamily {
            monoid: json.monoid,
            states: states.to_vec(),
            classes,
        })
    }
}

/// Computes the full solution family.
///
/// Signed potentials are propagated from each class's cycle along the
/// predecessor tree (`pot(x) = pot(pred x) + t`); the one non-tree edge per
/// class closes the cycle and must carry zero discrepancy. Offsets are the
/// potentials shifted so that the class minimum is 0; the reference is the
/// earliest state attaining that minimum. For the non-group monoids this
/// normalisation is what keeps every offset inside the monoid.
pub fn solve(e: &TimedCoalgebra) -> Result<SolutionFamily, Unsolvable> {
    check_consistency(e).map_err(Unsolvable::Inconsistent)?;
    let n = e.len();
    let cycles = find_cycles(e);
    let mut pot: Vec<Option<f64>> = vec![None; n];
    for cycle in &cycles.cycles {
        // pot(c₀) = 0, then pot(pred c) = pot(c) − t(c) around the cycle.
        let mut acc = 0.0;
        for &c in cycle {
            pot[c] = Some(acc);
            acc -= e.spec[c].0;
        }
    }
    let mut stack = Vec::new();
    for x in 0..n {
        let mut y = x;
        while pot[y].is_none() {
            stack.push(y);
            y = e.spec[y].1;
        }
        while let Some(z) = stack.pop() {
            let (t, p) = e.spec[z];
            pot[z] = Some(pot[p].expect("resolved predecessor") + t);
        }
    }
    let pot: Vec<f64> = pot.into_iter().map(|p| p.expect("all potentials resolved")).collect();

    let mut members = vec![Vec::new(); cycles.cycles.len()];
    for x in 0..n {
        members[cycles.component[x]].push(x);
    }
    let classes = members
        .into_iter()
        .map(|members| {
            let min = members.iter().map(|&m| pot[m]).fold(f64::INFINITY, f64::min);
            let reference = *members
                .iter()
                .find(|&&m| e.monoid.delta_eq(pot[m], min))
                .expect("class is nonempty");
            let base = pot[reference];
            let offsets = members
                .iter()
                .map(|&m| if m == reference { 0.0 } else { (pot[m] - base).max(0.0) })
                .collect();
            SolutionClass {
                members,
                reference,
                offsets,
            }
        })
        .collect();
    Ok(SolutionFamily {
        monoid: e.monoid,
        states: e.states.clone(),
        classes,
    })
}

/// Checks the Kleisli-coinduction equation `e† = μ ∘ T e† ∘ e` pointwise.
pub fn verify_solution<Y>(e: &TimedCoalgebra, sol: &[(f64, Y)]) -> SquareReport
where
    Y: Clone + PartialEq + fmt::Debug,
{
    let carrier: Vec<usize> = (0..e.len()).collect();
    let monoid = e.monoid;
    check_ca_square::<_, _, _, _, std::convert::Infallible>(
        &carrier,
        |&x| e.states[x].clone(),
        |&x| e.spec[x],
        |&(t, p), h| (t, h(&p)),
        |fy: &(f64, (f64, Y))| Ok(monad::join(fy.clone())),
        |&x| sol[x].clone(),
        |a, b| monoid.delta_eq(a.0, b.0) && a.1 == b.1,
    )
    .unwrap_or_else(|never| match never {})
}

type ActionFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;

/// A left action of the time monoid on `ℝ^dim`: an algebra of `Δ × Id`.
#[derive(Clone)]
pub struct MonoidAction {
    monoid: MonoidId,
    dim: usize,
    action: Arc<ActionFn>,
}

impl fmt::Debug for MonoidAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonoidAction")
            .field("monoid", &self.monoid)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl MonoidAction {
    pub fn new(
        monoid: MonoidId,
        dim: usize,
        action: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        MonoidAction {
            monoid,
            dim,
            action: Arc::new(action),
        }
    }

    pub fn monoid(&self) -> MonoidId {
        self.monoid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, t: f64, y: &[f64]) -> Vec<f64> {
        (self.action)(t, y)
    }

    /// Checks `f(0, y) = y` and `f(t + u, y) = f(t, f(u, y))` on samples.
    pub fn check_laws(&self, samples: &[(f64, f64, Vec<f64>)], tol: f64) -> SquareReport {
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(p, q)| approx_eq(*p, *q, tol));
        let mut failures = Vec::new();
        for (i, (t, u, y)) in samples.iter().enumerate() {
            let id = self.apply(0.0, y);
            if !close(&id, y) {
                failures.push(crate::schemes::SquareFailure {
                    state: format!("sample {i}: identity"),
                    lhs: format!("{id:?}"),
                    rhs: format!("{y:?}"),
                });
            }
            let lhs = self.apply(t + u, y);
            let rhs = self.apply(*t, &self.apply(*u, y));
            if !close(&lhs, &rhs) {
                failures.push(crate::schemes::SquareFailure {
                    state: format!("sample {i}: compatibility"),
                    lhs: format!("{lhs:?}"),
                    rhs: format!("{rhs:?}"),
                });
            }
        }
        SquareReport::new(samples.len(), failures)
    }
}

/// Per-class free parameters of an instantiation.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassParams {
    pub shift: f64,
    pub target: Vec<f64>,
}

/// `h(x) = f(offset(x) + u₀, y₀)` for every state.
pub fn instantiate(
    sol: &SolutionFamily,
    params: &[ClassParams],
    action: &MonoidAction,
) -> Result<Vec<Vec<f64>>, TimedError> {
    for p in params {
        if p.target.len() != action.dim {
            return Err(TimedError::DimensionMismatch {
                expected: action.dim,
                got: p.target.len(),
            });
        }
    }
    let pairs: Vec<(f64, ())> = params.iter().map(|p| (p.shift, ())).collect();
    let delays = sol.instance(&pairs)?;
    let mut out = vec![Vec::new(); sol.states.len()];
    for (ci, class) in sol.classes.iter().enumerate() {
        for &m in &class.members {
            out[m] = action.apply(delays[m].0, &params[ci].target);
        }
    }
    Ok(out)
}

/// Checks `h(x) = f(t, h(x'))` for `e(x) = (t, x')`: `h` is a
/// homomorphism from the coalgebra into the action.
pub fn check_action_square(e: &TimedCoalgebra, h: &[Vec<f64>], action: &MonoidAction, tol: f64) -> SquareReport {
    let carrier: Vec<usize> = (0..e.len()).collect();
    check_ca_square::<_, _, _, _, std::convert::Infallible>(
        &carrier,
        |&x| e.states[x].clone(),
        |&x| e.spec[x],
        |&(t, p), h| (t, h(&p)),
        |(t, y): &(f64, Vec<f64>)| Ok(action.apply(*t, y)),
        |&x| h[x].clone(),
        |a, b| a.len() == b.len() && a.iter().zip(b).all(|(p, q)| approx_eq(*p, *q, tol)),
    )
    .unwrap_or_else(|never| match never {})
}

/// Closed-form flow of `ẍ + (k/m) x = 0` on `(x, ẋ)`.
pub fn oscillator_action(k: f64, m: f64) -> Result<MonoidAction, TimedError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(TimedError::NonPositiveParameter("k"));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(TimedError::NonPositiveParameter("m"));
    }
    let omega = (k / m).sqrt();
    Ok(MonoidAction::new(MonoidId::R, 2, move |t, y| {
        let (s, c) = (omega * t).sin_cos();
        vec![c * y[0] + s / omega * y[1], -omega * s * y[0] + c * y[1]]
    }))
}

/// Period of the oscillator with the given parameters, `2π/ω`.
pub fn oscillator_period(k: f64, m: f64) -> f64 {
    2.0 * PI / (k / m).sqrt()
}

/// The time differences `δᵢ` of a series.
#[derive(Clone, Debug, PartialEq)]
pub enum Deltas {
    Constant(f64),
    /// `values[k] = δ_{start + k}`.
    Indexed { start: i64, values: Vec<f64> },
}

impl Deltas {
    pub fn from_fn(range: RangeInclusive<i64>, f: impl Fn(i64) -> f64) -> Self {
        Deltas::Indexed {
            start: *range.start(),
            values: range.map(f).collect(),
        }
    }

    /// Zeno's sequence `δᵢ = 2^-(i+1)` for `i` in `0..n`.
    pub fn zeno(n: usize) -> Self {
        Deltas::from_fn(0..=(n as i64 - 1), |i| 0.5f64.powi(i as i32 + 1))
    }

    pub fn get(&self, i: i64) -> Option<f64> {
        match self {
            Deltas::Constant(d) => Some(*d),
            Deltas::Indexed { start, values } => {
                usize::try_from(i - start).ok().and_then(|k| values.get(k).copied())
            }
        }
    }

    /// Partial sums: `tᵢ = Σ_{j∈[0,i)} δⱼ` for `i ≥ 0`, and
    /// `tᵢ = −Σ_{j∈[i,0)} δⱼ` for `i < 0`.
    pub fn partial_sum(&self, i: i64) -> Option<f64> {
        if i >= 0 {
            (0..i).try_fold(0.0, |acc, j| self.get(j).map(|d| acc + d))
        } else {
            (i..0).rev().try_fold(0.0, |acc, j| self.get(j).map(|d| acc - d))
        }
    }
}

/// The four series shapes, truncated to a finite window where the shape is
/// infinite.
///
/// | kind | carrier        | window     |
/// |------|----------------|------------|
/// | 1    | all integers   | any `lo..=hi` |
/// | 2    | `(−∞, 0]`      | `lo..=0`   |
/// | 3    | `[0, +∞)`      | `0..=hi`   |
/// | 4    | `[0, n]`       | `0..=n`    |
///
/// States are named by their integer index, `e(i + 1) = (δᵢ, i)` inside the
/// window, and the lowest window state is anchored as `e(lo) = (0, lo)`.
/// For kinds 3 and 4 that anchor is part of the shape itself; for kinds 1
/// and 2 it stands in for the part of the series left of the window.
pub fn series_coalgebra(
    kind: u8,
    deltas: &Deltas,
    window: RangeInclusive<i64>,
    monoid: MonoidId,
) -> Result<TimedCoalgebra, TimedError> {
    let (lo, hi) = (*window.start(), *window.end());
    let mismatch = TimedError::WindowMismatch { kind, lo, hi };
    match kind {
        1 if lo <= hi => {}
        2 if lo <= hi && hi == 0 => {}
        3 | 4 if lo == 0 && hi >= 0 => {}
        1..=4 => return Err(mismatch),
        other => return Err(TimedError::UnknownSeriesKind(other)),
    }
    let expected = (hi - lo) as usize;
    if let Deltas::Indexed { start, values } = deltas {
        if *start > lo || start + (values.len() as i64) < hi {
            return Err(TimedError::DeltaCount {
                expected,
                got: values.len(),
            });
        }
    }
    let states: Vec<String> = window.clone().map(|i| i.to_string()).collect();
    let mut e = Vec::with_capacity(states.len());
    e.push((lo.to_string(), (0.0, lo.to_string())));
    for i in lo..hi {
        let d = deltas.get(i).expect("window covered by deltas");
        e.push(((i + 1).to_string(), (d, i.to_string())));
    }
    TimedCoalgebra::new(monoid, states, e)
}
