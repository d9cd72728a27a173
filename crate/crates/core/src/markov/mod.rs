//! Finite Markov chains as coalgebras of the distribution monad.
//!
//! Kleisli morphisms `X → T Y` are right-stochastic matrices and Kleisli
//! composition is the matrix product `F G`. The Kleisli-coinductive
//! solution into the free algebra `(T X, μ)` is the long-run matrix `E†`
//! with `E · E† = E†`: row `x` is the mixture of the stationary
//! distributions of the recurrent classes, weighted by the probability of
//! ending up in each class from `x`.

mod dist;
pub mod linalg;

use std::collections::BTreeMap;

use indexmap::IndexMap;
use num::integer::gcd;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dist::Distribution;
pub use linalg::Matrix;

use crate::schemes::{approx_eq, check_ca_square, SquareReport};

/// Row sums must be within this of 1.
pub const ROW_TOLERANCE: f64 = 1e-9;

/// Tolerance of the fixpoint check `E · E† = E†`.
pub const FIXPOINT_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MarkovError {
    #[error("row of `{state}` sums to {sum}, expected 1")]
    RowNotNormalized { state: String, sum: f64 },
    #[error("negative probability from `{from}` to `{to}`")]
    NegativeProbability { from: String, to: String },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("cannot compose {left_rows}x{left_cols} with {right_rows}x{right_cols}")]
    ShapeMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("linear system is singular at column {column}")]
    SingularSystem { column: usize },
}

impl From<linalg::Singular> for MarkovError {
    fn from(s: linalg::Singular) -> Self {
        MarkovError::SingularSystem { column: s.column }
    }
}

/// A validated chain: named states and a right-stochastic matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovChain {
    states: Vec<String>,
    matrix: Matrix,
}

/// Wire form: `{"states": [...], "rows": {state: {state: p}}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovChainJson {
    pub states: Vec<String>,
    pub rows: IndexMap<String, IndexMap<String, f64>>,
}

/// Validates sparse rows into a chain. Missing rows count as summing to 0.
pub fn validate_chain(
    states: &[String],
    rows: &IndexMap<String, IndexMap<String, f64>>,
) -> Result<MarkovChain, MarkovError> {
    let mut index = BTreeMap::new();
    for (i, s) in states.iter().enumerate() {
        if index.insert(s.as_str(), i).is_some() {
            return Err(MarkovError::DuplicateState(s.clone()));
        }
    }
    for from in rows.keys() {
        if !index.contains_key(from.as_str()) {
            return Err(MarkovError::UnknownState(from.clone()));
        }
    }
    let n = states.len();
    let mut matrix = Matrix::zeros(n, n);
    for (i, from) in states.iter().enumerate() {
        if let Some(row) = rows.get(from) {
            for (to, &p) in row {
                let &j = index.get(to.as_str()).ok_or_else(|| MarkovError::UnknownState(to.clone()))?;
                if p < 0.0 || p.is_nan() {
                    return Err(MarkovError::NegativeProbability {
                        from: from.clone(),
                        to: to.clone(),
                    });
                }
                matrix[(i, j)] += p;
            }
        }
    }
    MarkovChain::new(states.to_vec(), matrix)
}

impl MarkovChain {
    pub fn new(states: Vec<String>, matrix: Matrix) -> Result<Self, MarkovError> {
        assert_eq!(matrix.rows(), states.len());
        assert_eq!(matrix.cols(), states.len());
        for (i, row) in matrix.row_iter().enumerate() {
            if let Some(j) = row.iter().position(|&p| p < 0.0 || p.is_nan()) {
                return Err(MarkovError::NegativeProbability {
                    from: states[i].clone(),
                    to: states[j].clone(),
                });
            }
            let sum: f64 = row.iter().sum();
            if !approx_eq(sum, 1.0, ROW_TOLERANCE) {
                return Err(MarkovError::RowNotNormalized {
                    state: states[i].clone(),
                    sum,
                });
            }
        }
        Ok(MarkovChain { states, matrix })
    }

    /// Chain on states named `0..n`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MarkovError> {
        let matrix = Matrix::from_rows(rows).ok_or(MarkovError::ShapeMismatch {
            left_rows: rows.len(),
            left_cols: rows.first().map_or(0, Vec::len),
            right_rows: rows.len(),
            right_cols: rows.len(),
        })?;
        if matrix.cols() != matrix.rows() {
            return Err(MarkovError::ShapeMismatch {
                left_rows: matrix.rows(),
                left_cols: matrix.cols(),
                right_rows: matrix.rows(),
                right_cols: matrix.rows(),
            });
        }
        MarkovChain::new((0..rows.len()).map(|i| i.to_string()).collect(), matrix)
    }

    pub fn from_json(json: &MarkovChainJson) -> Result<Self, MarkovError> {
        validate_chain(&json.states, &json.rows)
    }

    pub fn to_json(&self) -> MarkovChainJson {
        let rows = self
            .matrix
            .row_iter()
            .enumerate()
            .map(|(i, row)| {
                let sparse = row
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p != 0.0)
                    .map(|(j, &p)| (self.states[j].clone(), p))
                    .collect();
                (self.states[i].clone(), sparse)
            })
            .collect();
        MarkovChainJson {
            states: self.states.clone(),
            rows,
        }
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The transition distribution `e(x)`.
    pub fn step(&self, x: usize) -> Distribution<usize> {
        Distribution::from_weights(
            self.matrix
                .row(x)
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(j, &p)| (j, p))
                .collect(),
        )
    }

    fn successors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.matrix
            .row(x)
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(j, _)| j)
    }
}

/// `g ∘Kl f` as the matrix product `F G`.
pub fn kleisli_compose(f: &Matrix, g: &Matrix) -> Result<Matrix, MarkovError> {
    f.mul(g).ok_or(MarkovError::ShapeMismatch {
        left_rows: f.rows(),
        left_cols: f.cols(),
        right_rows: g.rows(),
        right_cols: g.cols(),
    })
}

/// Communicating classes with their recurrence, period and absorption data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStructure {
    /// Strongly connected components of the positive-probability graph,
    /// each sorted, ordered by first member.
    pub classes: Vec<Vec<usize>>,
    pub recurrent: Vec<bool>,
    /// Period per class. A class with no internal cycle (a transient
    /// singleton without self-loop) is reported with period 1.
    pub period: Vec<usize>,
    /// `absorption[(x, c)]`: probability that `x` ends up in recurrent class
    /// `c`. Recurrent states have 1 on their own class; columns of
    /// transient classes are 0.
    pub absorption: Matrix,
    class_of: Vec<usize>,
}

impl ChainStructure {
    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn recurrent_classes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.classes.len()).filter(|&c| self.recurrent[c])
    }

    pub fn is_transient(&self, x: usize) -> bool {
        !self.recurrent[self.class_of[x]]
    }
}

/// Tarjan's algorithm, iterative.
fn strongly_connected(chain: &MarkovChain) -> Vec<Vec<usize>> {
    let n = chain.len();
    let succ: Vec<Vec<usize>> = (0..n).map(|x| chain.successors(x).collect()).collect();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut out = Vec::new();
    // (node, position in its successor list)
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                while let Some(w) = stack.pop() {
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out.sort_by_key(|c| c[0]);
    out
}

/// gcd of `level(u) + 1 − level(v)` over the class's internal edges, with
/// levels from a BFS rooted at the first member.
fn class_period(chain: &MarkovChain, class: &[usize], class_of: &[usize], id: usize) -> usize {
    let n = chain.len();
    let mut level = vec![usize::MAX; n];
    let root = class[0];
    level[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut g = 0usize;
    while let Some(u) = queue.pop_front() {
        for v in chain.successors(u) {
            if class_of[v] != id {
                continue;
            }
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                let diff = (level[u] + 1).abs_diff(level[v]);
                g = gcd(g, diff);
            }
        }
    }
    g.max(1)
}

pub fn classify(chain: &MarkovChain) -> Result<ChainStructure, MarkovError> {
    let n = chain.len();
    let classes = strongly_connected(chain);
    let mut class_of = vec![0; n];
    for (c, members) in classes.iter().enumerate() {
        for &x in members {
            class_of[x] = c;
        }
    }
    let recurrent: Vec<bool> = classes
        .iter()
        .enumerate()
        .map(|(c, members)| members.iter().all(|&x| chain.successors(x).all(|y| class_of[y] == c)))
        .collect();
    let period = classes
        .iter()
        .enumerate()
        .map(|(c, members)| class_period(chain, members, &class_of, c))
        .collect();

    // (I − Q) B = R over the transient states.
    let transient: Vec<usize> = (0..n).filter(|&x| !recurrent[class_of[x]]).collect();
    let mut absorption = Matrix::zeros(n, classes.len());
    for x in 0..n {
        if recurrent[class_of[x]] {
            absorption[(x, class_of[x])] = 1.0;
        }
    }
    if !transient.is_empty() {
        let k = transient.len();
        let mut a = Matrix::identity(k);
        let mut r = Matrix::zeros(k, classes.len());
        for (i, &x) in transient.iter().enumerate() {
            for (j, &y) in transient.iter().enumerate() {
                a[(i, j)] -= chain.matrix[(x, y)];
            }
            for y in 0..n {
                if recurrent[class_of[y]] {
                    r[(i, class_of[y])] += chain.matrix[(x, y)];
                }
            }
        }
        let b = linalg::solve(&a, &r)?;
        for (i, &x) in transient.iter().enumerate() {
            for c in 0..classes.len() {
                absorption[(x, c)] = b[(i, c)];
            }
        }
    }
    Ok(ChainStructure {
        classes,
        recurrent,
        period,
        absorption,
        class_of,
    })
}

/// Stationary distribution of one recurrent class, padded with zeros to
/// the whole state space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassStationary {
    pub class: usize,
    pub distribution: Vec<f64>,
}

/// One stationary distribution per recurrent class. Every stationary
/// distribution of the chain is a convex combination of these.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarySet {
    pub per_class: Vec<ClassStationary>,
}

pub fn stationary(chain: &MarkovChain) -> Result<StationarySet, MarkovError> {
    let structure = classify(chain)?;
    stationary_from(chain, &structure, 0)
}

/// Solves `π (E_C − I) = 0` with `Σ π = 1`, the normalisation replacing
/// equation `replaced_row` (taken modulo the class size).
pub fn stationary_from(
    chain: &MarkovChain,
    structure: &ChainStructure,
    replaced_row: usize,
) -> Result<StationarySet, MarkovError> {
    let mut per_class = Vec::new();
    for c in structure.recurrent_classes() {
        let members = &structure.classes[c];
        let k = members.len();
        let r = replaced_row % k;
        // Transposed system: (E_C − I)ᵀ πᵀ = 0.
        let mut a = Matrix::zeros(k, k);
        for (i, &x) in members.iter().enumerate() {
            for (j, &y) in members.iter().enumerate() {
                a[(j, i)] = chain.matrix[(x, y)] - if i == j { 1.0 } else { 0.0 };
            }
        }
        let mut b = Matrix::zeros(k, 1);
        for j in 0..k {
            a[(r, j)] = 1.0;
        }
        b[(r, 0)] = 1.0;
        let pi = linalg::solve(&a, &b)?;
        let mut distribution = vec![0.0; chain.len()];
        for (i, &x) in members.iter().enumerate() {
            distribution[x] = pi[(i, 0)];
        }
        per_class.push(ClassStationary { class: c, distribution });
    }
    Ok(StationarySet { per_class })
}

/// `E†[x] = Σ_C absorption(x → C) · π_C`.
pub fn canonical_solution(chain: &MarkovChain) -> Result<Matrix, MarkovError> {
    let structure = classify(chain)?;
    let stationary = stationary_from(chain, &structure, 0)?;
    Ok(canonical_from(chain, &structure, &stationary))
}

pub fn canonical_from(chain: &MarkovChain, structure: &ChainStructure, stationary: &StationarySet) -> Matrix {
    let n = chain.len();
    let mut out = Matrix::zeros(n, n);
    for x in 0..n {
        for cs in &stationary.per_class {
            let w = structure.absorption[(x, cs.class)];
            if w == 0.0 {
                continue;
            }
            for (y, &p) in cs.distribution.iter().enumerate() {
                out[(x, y)] += w * p;
            }
        }
    }
    out
}

/// Checks `E · E† = E†` row by row, each `E†` row also required to be a
/// distribution.
pub fn verify_fixpoint(chain: &MarkovChain, solution: &Matrix) -> SquareReport {
    verify_fixpoint_with(chain, solution, FIXPOINT_TOLERANCE)
}

pub fn verify_fixpoint_with(chain: &MarkovChain, solution: &Matrix, tol: f64) -> SquareReport {
    assert_eq!(solution.rows(), chain.len());
    assert_eq!(solution.cols(), chain.len());
    let carrier: Vec<usize> = (0..chain.len()).collect();
    let row_of = |x: &usize| solution.row(*x).to_vec();
    check_ca_square::<_, _, _, _, std::convert::Infallible>(
        &carrier,
        |&x| chain.states[x].clone(),
        |&x| chain.step(x),
        |fx: &Distribution<usize>, h| fx.map(|y| h(y)),
        |ty: &Distribution<Vec<f64>>| {
            // μ on the free algebra: the convex combination of the rows.
            let mut acc = vec![0.0; chain.len()];
            for (row, p) in ty.iter() {
                for (a, r) in acc.iter_mut().zip(row) {
                    *a += p * r;
                }
            }
            Ok(acc)
        },
        row_of,
        |lhs, rhs| {
            let normalized = approx_eq(lhs.iter().sum(), 1.0, tol) && lhs.iter().all(|&p| p >= -tol);
            normalized && lhs.iter().zip(rhs).all(|(a, b)| approx_eq(*a, *b, tol))
        },
    )
    .unwrap_or_else(|never| match never {})
}
