//! Verification harness shared by all engines.
//!
//! [`check_ca_square`] evaluates both paths of the coalgebra-to-algebra
//! square `h = g ∘ F h ∘ f` on every point of a finite carrier. Each engine
//! supplies its own functor lifting as a closure, so no generic functor
//! machinery is needed here.
//!
//! The law suites check unit, associativity and Kleisli-extension laws of
//! the timed and distribution monads on sample values, and the comonad laws
//! of cofree trees up to a truncation depth.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::markov::Distribution;
use crate::timed::{monad, MonoidId};

/// Absolute tolerance used for real-valued comparisons unless a caller
/// asks for something else.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Default truncation depth for comonad-law checks on cofree trees.
pub const DEFAULT_COMONAD_DEPTH: usize = 5;

pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol
}

/// One carrier point where the two sides of a square disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareFailure {
    pub state: String,
    pub lhs: String,
    pub rhs: String,
}

/// Outcome of a pointwise square or law check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareReport {
    pub total_points: usize,
    pub failures: Vec<SquareFailure>,
    pub passed: bool,
}

impl SquareReport {
    pub fn new(total_points: usize, failures: Vec<SquareFailure>) -> Self {
        let passed = failures.is_empty();
        SquareReport {
            total_points,
            failures,
            passed,
        }
    }

    /// Concatenates reports over disjoint carriers.
    pub fn merge(reports: impl IntoIterator<Item = SquareReport>) -> Self {
        let mut total = 0;
        let mut failures = Vec::new();
        for r in reports {
            total += r.total_points;
            failures.extend(r.failures);
        }
        SquareReport::new(total, failures)
    }
}

/// Checks `h(x) == algebra(functor_map(coalgebra(x), h))` for every `x` in
/// `carrier`.
///
/// `label` names a carrier point in the failure list. Errors raised by the
/// algebra abort the check and are returned unchanged.
pub fn check_ca_square<X, FX, FY, Y, E>(
    carrier: &[X],
    label: impl Fn(&X) -> String,
    coalgebra: impl Fn(&X) -> FX,
    functor_map: impl Fn(&FX, &dyn Fn(&X) -> Y) -> FY,
    algebra: impl Fn(&FY) -> Result<Y, E>,
    h: impl Fn(&X) -> Y,
    eq: impl Fn(&Y, &Y) -> bool,
) -> Result<SquareReport, E>
where
    Y: Debug,
{
    let mut failures = Vec::new();
    for x in carrier {
        let lhs = h(x);
        let image = functor_map(&coalgebra(x), &h);
        let rhs = algebra(&image)?;
        if !eq(&lhs, &rhs) {
            failures.push(SquareFailure {
                state: label(x),
                lhs: format!("{lhs:?}"),
                rhs: format!("{rhs:?}"),
            });
        }
    }
    Ok(SquareReport::new(carrier.len(), failures))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LawError {
    #[error("no samples given")]
    NoSamples,
    #[error("value {value} is not an element of monoid {monoid}")]
    InvalidMonoidValue { monoid: MonoidId, value: f64 },
    #[error("distribution weights sum to {0}, expected 1")]
    NotNormalized(f64),
}

fn law_failure(state: String, lhs: impl Debug, rhs: impl Debug) -> SquareFailure {
    SquareFailure {
        state,
        lhs: format!("{lhs:?}"),
        rhs: format!("{rhs:?}"),
    }
}

/// Monad laws of `Δ × Id` and the Kleisli-extension identities, checked on
/// each sample together with its two cyclic successors (used as the extra
/// delays needed by the three-level laws).
pub fn check_timed_monad_laws<V>(
    monoid: MonoidId,
    samples: &[(f64, V)],
) -> Result<SquareReport, LawError>
where
    V: Clone + PartialEq + Debug,
{
    if samples.is_empty() {
        return Err(LawError::NoSamples);
    }
    for (t, _) in samples {
        if !monoid.contains(*t) {
            return Err(LawError::InvalidMonoidValue { monoid, value: *t });
        }
    }
    let n = samples.len();
    let same = |a: &(f64, V), b: &(f64, V)| monoid.delta_eq(a.0, b.0) && a.1 == b.1;
    let mut failures = Vec::new();
    for (i, sample) in samples.iter().enumerate() {
        let (t, x) = sample.clone();
        let t2 = samples[(i + 1) % n].0;
        let t3 = samples[(i + 2) % n].0;
        let mut check = |law: &str, lhs: (f64, V), rhs: (f64, V)| {
            if !same(&lhs, &rhs) {
                failures.push(law_failure(format!("sample {i}: {law}"), lhs, rhs));
            }
        };

        // μ ∘ η_T = id and μ ∘ T η = id
        check("left unit", monad::join(monad::unit((t, x.clone()))), (t, x.clone()));
        check(
            "right unit",
            monad::join(monad::map((t, x.clone()), monad::unit)),
            (t, x.clone()),
        );
        // μ ∘ μ_T = μ ∘ T μ
        let nested = (t, (t2, (t3, x.clone())));
        check(
            "associativity",
            monad::join(monad::join(nested.clone())),
            monad::join(monad::map(nested, monad::join)),
        );

        let delay2 = |y: V| (t2, y);
        let delay3 = |y: V| (t3, y);
        // f* ∘ η = f
        check(
            "kleisli unit",
            monad::extend(delay2, monad::unit(x.clone())),
            delay2(x.clone()),
        );
        // η* = id
        check(
            "kleisli identity",
            monad::extend(monad::unit, (t, x.clone())),
            (t, x.clone()),
        );
        // (g* ∘ f)* = g* ∘ f*
        check(
            "kleisli composition",
            monad::extend(|y| monad::extend(delay3, delay2(y)), (t, x.clone())),
            monad::extend(delay3, monad::extend(delay2, (t, x.clone()))),
        );
    }
    Ok(SquareReport::new(n, failures))
}

/// Unit and associativity laws of the finite distribution monad on
/// distributions of distributions.
///
/// Associativity is checked on the three-level value that mixes each
/// sample evenly with its cyclic successor.
pub fn check_dist_monad_laws<V>(samples: &[Distribution<Distribution<V>>]) -> Result<SquareReport, LawError>
where
    V: Clone + Ord + Debug,
{
    check_dist_monad_laws_with(samples, DEFAULT_TOLERANCE)
}

pub fn check_dist_monad_laws_with<V>(
    samples: &[Distribution<Distribution<V>>],
    tol: f64,
) -> Result<SquareReport, LawError>
where
    V: Clone + Ord + Debug,
{
    if samples.is_empty() {
        return Err(LawError::NoSamples);
    }
    for outer in samples {
        let total = outer.total_mass();
        if !approx_eq(total, 1.0, tol) {
            return Err(LawError::NotNormalized(total));
        }
        for (inner, _) in outer.iter() {
            let total = inner.total_mass();
            if !approx_eq(total, 1.0, tol) {
                return Err(LawError::NotNormalized(total));
            }
        }
    }

    let n = samples.len();
    let mut failures = Vec::new();
    for (i, dd) in samples.iter().enumerate() {
        let flat = dd.flatten();
        if !approx_eq(flat.total_mass(), 1.0, tol) {
            failures.push(law_failure(
                format!("sample {i}: flattening preserves mass"),
                flat.total_mass(),
                1.0,
            ));
        }
        let mut check = |law: &str, lhs: Distribution<V>, rhs: Distribution<V>| {
            if !lhs.approx_eq(&rhs, tol) {
                failures.push(law_failure(format!("sample {i}: {law}"), lhs, rhs));
            }
        };
        // The flattening formula, recomputed term by term.
        let mut by_formula = Vec::new();
        for (inner, p) in dd.iter() {
            for (x, q) in inner.iter() {
                by_formula.push((x.clone(), p * q));
            }
        }
        check("flattening formula", flat.clone(), Distribution::from_weights(by_formula));

        // μ ∘ η_T = id and μ ∘ T η = id, applied to the flattened sample.
        check("left unit", Distribution::point(flat.clone()).flatten(), flat.clone());
        check("right unit", flat.map(|x| Distribution::point(x.clone())).flatten(), flat.clone());

        let ddd = Distribution::from_weights(vec![(dd.clone(), 0.5), (samples[(i + 1) % n].clone(), 0.5)]);
        check(
            "associativity",
            ddd.flatten().flatten(),
            ddd.map(|inner| inner.flatten()).flatten(),
        );
    }
    Ok(SquareReport::new(n, failures))
}

/// A node of a cofree tree: a label, the functor layer's non-recursive
/// data (`shape`) and the recursive positions in order.
///
/// Nodes cut off by a depth bound keep their label and shape but have
/// `truncated` set and no children.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cofree<S, L> {
    pub label: L,
    pub shape: S,
    pub children: Vec<Cofree<S, L>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
}

impl<S: Clone, L: Clone> Cofree<S, L> {
    pub fn extract(&self) -> &L {
        &self.label
    }

    pub fn map<M>(&self, f: &impl Fn(&L) -> M) -> Cofree<S, M> {
        Cofree {
            label: f(&self.label),
            shape: self.shape.clone(),
            children: self.children.iter().map(|c| c.map(f)).collect(),
            truncated: self.truncated,
        }
    }

    /// Relabels every node with the subtree rooted there.
    pub fn duplicate(&self) -> Cofree<S, Cofree<S, L>> {
        self.extend(&|t: &Cofree<S, L>| t.clone())
    }

    pub fn extend<M>(&self, f: &impl Fn(&Cofree<S, L>) -> M) -> Cofree<S, M> {
        Cofree {
            label: f(self),
            shape: self.shape.clone(),
            children: self.children.iter().map(|c| c.extend(f)).collect(),
            truncated: self.truncated,
        }
    }

    pub fn height(&self) -> usize {
        self.children.iter().map(|c| c.height() + 1).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Cofree::node_count).sum::<usize>()
    }
}

/// Structural equality that ignores everything below a given depth.
pub trait DepthEq {
    fn eq_to_depth(&self, other: &Self, depth: usize) -> bool;
}

macro_rules! depth_eq_by_partial_eq {
    ($($t:ty),*) => {
        $(impl DepthEq for $t {
            fn eq_to_depth(&self, other: &Self, _depth: usize) -> bool {
                self == other
            }
        })*
    };
}

depth_eq_by_partial_eq!(String, usize, u32, u64, i64, bool);

impl<S: PartialEq, L: DepthEq> DepthEq for Cofree<S, L> {
    fn eq_to_depth(&self, other: &Self, depth: usize) -> bool {
        if !self.label.eq_to_depth(&other.label, depth) || self.shape != other.shape {
            return false;
        }
        if depth == 0 {
            return true;
        }
        self.truncated == other.truncated
            && self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| a.eq_to_depth(b, depth - 1))
    }
}

/// Counit and coassociativity laws of the cofree comonad, compared up to
/// `depth`.
pub fn check_comonad_laws<S, L>(trees: &[Cofree<S, L>], depth: usize) -> SquareReport
where
    S: Clone + PartialEq + Debug,
    L: Clone + DepthEq + Debug,
{
    let mut failures = Vec::new();
    for (i, w) in trees.iter().enumerate() {
        let dup = w.duplicate();
        if !dup.extract().eq_to_depth(w, depth) {
            failures.push(law_failure(format!("tree {i}: extract ∘ duplicate"), dup.extract(), w));
        }
        let back = dup.map(&|t: &Cofree<S, L>| t.extract().clone());
        if !back.eq_to_depth(w, depth) {
            failures.push(law_failure(format!("tree {i}: map extract ∘ duplicate"), back, w));
        }
        let lhs = dup.duplicate();
        let rhs = dup.map(&|t: &Cofree<S, L>| t.duplicate());
        if !lhs.eq_to_depth(&rhs, depth) {
            failures.push(law_failure(
                format!("tree {i}: duplicate ∘ duplicate"),
                "duplicate(duplicate(w))",
                "map duplicate (duplicate(w))",
            ));
        }
    }
    SquareReport::new(trees.len(), failures)
}
