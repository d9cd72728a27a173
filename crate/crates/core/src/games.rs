//! Perfect-information games as coalgebras of `G X = ℝ^A + A × X^C`.
//!
//! Each state is either terminal with a payoff per agent, or a move node
//! where one agent picks a choice leading to a successor state. Unfolding a
//! state yields the cofree tree with states kept as node labels; backward
//! induction is the cobasic algebra `k₀` that picks, at every move node, the
//! child payoff maximising the mover's own coordinate.

use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schemes::{approx_eq, check_ca_square, Cofree, SquareReport, DEFAULT_TOLERANCE};

/// Payoff vector indexed by agent.
pub type Payoffs = Vec<f64>;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GameError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown choice `{choice}` at state `{state}`")]
    UnknownChoice { state: String, choice: String },
    #[error("state `{state}` has no move for choice `{choice}`")]
    MissingChoice { state: String, choice: String },
    #[error("state `{state}` has no payoff for agent `{agent}`")]
    MissingAgentPayoff { state: String, agent: String },
    #[error("state `{state}` has non-finite payoff for agent `{agent}`")]
    NonFinitePayoff { state: String, agent: String },
    #[error("no start state given")]
    NoStart,
    #[error("game is infinite: cycle through {0:?}")]
    CyclicGame(Vec<String>),
    #[error("discount factor {0} is outside (0, 1)")]
    InvalidGamma(f64),
    #[error("tolerance {0} must be positive")]
    InvalidTolerance(f64),
    #[error("value iteration did not converge within {0} sweeps")]
    NotConverged(usize),
}

/// Wire form of a game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawGame {
    pub agents: Vec<String>,
    pub choices: Vec<String>,
    pub states: IndexMap<String, RawNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawNode {
    Terminal { payoff: IndexMap<String, f64> },
    Move { agent: String, moves: IndexMap<String, String> },
}

/// One layer of the game functor over successor type `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node<T> {
    Terminal(Payoffs),
    Move { agent: usize, moves: Vec<T> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameSpec {
    agents: Vec<String>,
    choices: Vec<String>,
    states: Vec<String>,
    nodes: Vec<Node<usize>>,
    start: Option<usize>,
}

pub fn validate_game(raw: &RawGame) -> Result<GameSpec, GameError> {
    let state_index: HashMap<&str, usize> = raw.states.keys().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let agent_index: HashMap<&str, usize> = raw.agents.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut nodes = Vec::with_capacity(raw.states.len());
    for (name, node) in &raw.states {
        nodes.push(match node {
            RawNode::Terminal { payoff } => {
                for agent in payoff.keys() {
                    if !agent_index.contains_key(agent.as_str()) {
                        return Err(GameError::UnknownAgent(agent.clone()));
                    }
                }
                let mut values = Vec::with_capacity(raw.agents.len());
                for agent in &raw.agents {
                    let &v = payoff.get(agent).ok_or_else(|| GameError::MissingAgentPayoff {
                        state: name.clone(),
                        agent: agent.clone(),
                    })?;
                    if !v.is_finite() {
                        return Err(GameError::NonFinitePayoff {
                            state: name.clone(),
                            agent: agent.clone(),
                        });
                    }
                    values.push(v);
                }
                Node::Terminal(values)
            }
            RawNode::Move { agent, moves } => {
                let &a = agent_index
                    .get(agent.as_str())
                    .ok_or_else(|| GameError::UnknownAgent(agent.clone()))?;
                for choice in moves.keys() {
                    if !raw.choices.contains(choice) {
                        return Err(GameError::UnknownChoice {
                            state: name.clone(),
                            choice: choice.clone(),
                        });
                    }
                }
                let mut targets = Vec::with_capacity(raw.choices.len());
                for choice in &raw.choices {
                    let target = moves.get(choice).ok_or_else(|| GameError::MissingChoice {
                        state: name.clone(),
                        choice: choice.clone(),
                    })?;
                    let &t = state_index
                        .get(target.as_str())
                        .ok_or_else(|| GameError::UnknownState(target.clone()))?;
                    targets.push(t);
                }
                Node::Move { agent: a, moves: targets }
            }
        });
    }
    let start = match &raw.start {
        Some(s) => Some(*state_index.get(s.as_str()).ok_or_else(|| GameError::UnknownState(s.clone()))?),
        None => None,
    };
    Ok(GameSpec {
        agents: raw.agents.clone(),
        choices: raw.choices.clone(),
        states: raw.states.keys().cloned().collect(),
        nodes,
        start,
    })
}

impl GameSpec {
    /// Builds a spec directly from indexed nodes, checking references.
    pub fn from_nodes(
        agents: Vec<String>,
        choices: Vec<String>,
        nodes: Vec<Node<usize>>,
        start: Option<usize>,
    ) -> Result<Self, GameError> {
        let states: Vec<String> = (0..nodes.len()).map(|i| i.to_string()).collect();
        for (i, node) in nodes.iter().enumerate() {
            match node {
                Node::Terminal(p) => {
                    if p.len() != agents.len() {
                        return Err(GameError::MissingAgentPayoff {
                            state: states[i].clone(),
                            agent: agents.get(p.len()).cloned().unwrap_or_default(),
                        });
                    }
                }
                Node::Move { agent, moves } => {
                    if *agent >= agents.len() {
                        return Err(GameError::UnknownAgent(agent.to_string()));
                    }
                    if moves.len() != choices.len() {
                        return Err(GameError::MissingChoice {
                            state: states[i].clone(),
                            choice: choices.get(moves.len()).cloned().unwrap_or_default(),
                        });
                    }
                    if let Some(&t) = moves.iter().find(|&&t| t >= nodes.len()) {
                        return Err(GameError::UnknownState(t.to_string()));
                    }
                }
            }
        }
        if let Some(s) = start.filter(|&s| s >= nodes.len()) {
            return Err(GameError::UnknownState(s.to_string()));
        }
        Ok(GameSpec {
            agents,
            choices,
            states,
            nodes,
            start,
        })
    }

    pub fn to_raw(&self) -> RawGame {
        let states = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, node)| {
                let raw = match node {
                    Node::Terminal(p) => RawNode::Terminal {
                        payoff: self.agents.iter().cloned().zip(p.iter().copied()).collect(),
                    },
                    Node::Move { agent, moves } => RawNode::Move {
                        agent: self.agents[*agent].clone(),
                        moves: self
                            .choices
                            .iter()
                            .cloned()
                            .zip(moves.iter().map(|&t| self.states[t].clone()))
                            .collect(),
                    },
                };
                (self.states[i].clone(), raw)
            })
            .collect();
        RawGame {
            agents: self.agents.clone(),
            choices: self.choices.clone(),
            states,
            start: self.start.map(|s| self.states[s].clone()),
        }
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn choices(&self) -> &[String] {
        &self.choices
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn node(&self, x: usize) -> &Node<usize> {
        &self.nodes[x]
    }

    pub fn start(&self) -> Option<usize> {
        self.start
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    /// States reachable from `start`, in discovery order.
    pub fn reachable(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            if std::mem::replace(&mut seen[x], true) {
                continue;
            }
            order.push(x);
            if let Node::Move { moves, .. } = &self.nodes[x] {
                stack.extend(moves.iter().rev());
            }
        }
        order
    }

    /// Names payoffs by agent.
    pub fn named(&self, payoffs: &[f64]) -> IndexMap<String, f64> {
        self.agents.iter().cloned().zip(payoffs.iter().copied()).collect()
    }
}

/// Non-recursive data of a game-tree node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GameShape {
    Terminal(Payoffs),
    Move { agent: usize },
}

/// Cofree game tree labelled by the originating states.
pub type GameTree = Cofree<GameShape, String>;

/// Unfolds `start` to `depth` levels. Move nodes at level `depth` are kept
/// with `truncated` set and no children; terminal nodes are never
/// truncated.
pub fn unfold_tree(spec: &GameSpec, start: usize, depth: usize) -> GameTree {
    match &spec.nodes[start] {
        Node::Terminal(p) => Cofree {
            label: spec.states[start].clone(),
            shape: GameShape::Terminal(p.clone()),
            children: Vec::new(),
            truncated: false,
        },
        Node::Move { agent, moves } => {
            let truncated = depth == 0;
            let children = if truncated {
                Vec::new()
            } else {
                moves.iter().map(|&m| unfold_tree(spec, m, depth - 1)).collect()
            };
            Cofree {
                label: spec.states[start].clone(),
                shape: GameShape::Move { agent: *agent },
                children,
                truncated,
            }
        }
    }
}

/// Index of the child maximising `agent`'s payoff; the earliest choice wins
/// ties.
pub fn best_choice(agent: usize, children: &[&[f64]]) -> usize {
    let mut best = 0;
    for (c, payoff) in children.iter().enumerate().skip(1) {
        if payoff[agent] > children[best][agent] {
            best = c;
        }
    }
    best
}

/// The evaluation algebra `k₀`.
pub fn backward_step(node: &Node<Payoffs>) -> Payoffs {
    match node {
        Node::Terminal(u) => u.clone(),
        Node::Move { agent, moves } => {
            let refs: Vec<&[f64]> = moves.iter().map(Vec::as_slice).collect();
            moves[best_choice(*agent, &refs)].clone()
        }
    }
}

/// Applies `k₀` bottom-up to a tree; `None` if a truncated node is reached.
pub fn evaluate_tree(tree: &GameTree) -> Option<Payoffs> {
    match &tree.shape {
        GameShape::Terminal(u) => Some(u.clone()),
        GameShape::Move { agent } => {
            if tree.truncated {
                return None;
            }
            let values = tree.children.iter().map(evaluate_tree).collect::<Option<Vec<_>>>()?;
            Some(backward_step(&Node::Move { agent: *agent, moves: values }))
        }
    }
}

/// Finds a cycle reachable from `start`, if any.
fn find_cycle(spec: &GameSpec, start: usize) -> Option<Vec<usize>> {
    // 0 = unseen, 1 = on the DFS path, 2 = finished
    let mut colour = vec![0u8; spec.nodes.len()];
    let mut path: Vec<(usize, usize)> = vec![(start, 0)];
    colour[start] = 1;
    while let Some(&mut (x, ref mut next)) = path.last_mut() {
        let moves: &[usize] = match &spec.nodes[x] {
            Node::Move { moves, .. } => moves,
            Node::Terminal(_) => &[],
        };
        if let Some(&y) = moves.get(*next) {
            *next += 1;
            match colour[y] {
                0 => {
                    colour[y] = 1;
                    path.push((y, 0));
                }
                1 => {
                    let pos = path.iter().position(|&(z, _)| z == y).expect("grey node is on the path");
                    return Some(path[pos..].iter().map(|&(z, _)| z).collect());
                }
                _ => {}
            }
        } else {
            colour[x] = 2;
            path.pop();
        }
    }
    None
}

/// Backward induction values for every state reachable from `start`
/// (`None` elsewhere), memoised over shared states.
pub fn solve_states(spec: &GameSpec, start: usize) -> Result<Vec<Option<Payoffs>>, GameError> {
    if let Some(cycle) = find_cycle(spec, start) {
        return Err(GameError::CyclicGame(cycle.iter().map(|&x| spec.states[x].clone()).collect()));
    }
    let mut memo: Vec<Option<Payoffs>> = vec![None; spec.nodes.len()];
    let mut stack = vec![start];
    while let Some(&x) = stack.last() {
        if memo[x].is_some() {
            stack.pop();
            continue;
        }
        match &spec.nodes[x] {
            Node::Terminal(u) => {
                memo[x] = Some(u.clone());
                stack.pop();
            }
            Node::Move { agent, moves } => {
                let pending: Vec<usize> = moves.iter().copied().filter(|&m| memo[m].is_none()).collect();
                if pending.is_empty() {
                    let values = moves.iter().map(|&m| memo[m].clone().expect("child evaluated")).collect();
                    memo[x] = Some(backward_step(&Node::Move { agent: *agent, moves: values }));
                    stack.pop();
                } else {
                    stack.extend(pending);
                }
            }
        }
    }
    Ok(memo)
}

/// The choice index taken at every reachable move node (`None` at
/// terminals and unreachable states).
pub fn selected_choices(spec: &GameSpec, start: usize) -> Result<Vec<Option<usize>>, GameError> {
    let values = solve_states(spec, start)?;
    Ok(spec
        .nodes
        .iter()
        .enumerate()
        .map(|(x, node)| match node {
            Node::Move { agent, moves } if values[x].is_some() => {
                let refs: Vec<&[f64]> = moves
                    .iter()
                    .map(|&m| values[m].as_deref().expect("children of reachable nodes are evaluated"))
                    .collect();
                Some(best_choice(*agent, &refs))
            }
            _ => None,
        })
        .collect())
}

pub fn backward_induction(spec: &GameSpec, start: usize) -> Result<Payoffs, GameError> {
    let mut values = solve_states(spec, start)?;
    Ok(values[start].take().expect("start is evaluated"))
}

/// Backward induction without sharing: evaluates the fully unfolded tree.
pub fn backward_induction_unshared(spec: &GameSpec, start: usize) -> Result<Payoffs, GameError> {
    if let Some(cycle) = find_cycle(spec, start) {
        return Err(GameError::CyclicGame(cycle.iter().map(|&x| spec.states[x].clone()).collect()));
    }
    // An acyclic game over n states has height below n.
    let tree = unfold_tree(spec, start, spec.nodes.len());
    Ok(evaluate_tree(&tree).expect("acyclic unfolding is never truncated"))
}

const MAX_SWEEPS: usize = 1_000_000;

/// Value iteration for the discounted evaluation
/// `V(x) = γ · V(m(c*))`, `c* = argmax_c V(m(c))[a]`, terminals fixed at
/// their payoff. Stops once successive sweeps differ by less than
/// `tol · (1 − γ)` in sup norm. Applies to cyclic games as well.
///
/// This is an experimental, non-cobasic evaluation; it is not backward
/// induction and does not coincide with it unless `γ = 1`.
pub fn discounted_eval(spec: &GameSpec, start: usize, gamma: f64, tol: f64) -> Result<Payoffs, GameError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(GameError::InvalidGamma(gamma));
    }
    if !(tol > 0.0) {
        return Err(GameError::InvalidTolerance(tol));
    }
    let reachable = spec.reachable(start);
    let k = spec.agents.len();
    let mut values: Vec<Payoffs> = spec
        .nodes
        .iter()
        .map(|n| match n {
            Node::Terminal(u) => u.clone(),
            Node::Move { .. } => vec![0.0; k],
        })
        .collect();
    let threshold = tol * (1.0 - gamma);
    for _ in 0..MAX_SWEEPS {
        let mut next = values.clone();
        let mut diff: f64 = 0.0;
        for &x in &reachable {
            if let Node::Move { agent, moves } = &spec.nodes[x] {
                let refs: Vec<&[f64]> = moves.iter().map(|&m| values[m].as_slice()).collect();
                let best = moves[best_choice(*agent, &refs)];
                next[x] = values[best].iter().map(|v| gamma * v).collect();
                for (a, b) in next[x].iter().zip(&values[x]) {
                    diff = diff.max((a - b).abs());
                }
            }
        }
        values = next;
        if diff < threshold {
            return Ok(values.swap_remove(start));
        }
    }
    Err(GameError::NotConverged(MAX_SWEEPS))
}

/// Checks `h(x) = k₀(G h (f x))` on the states reachable from `start`.
/// States where `h` is undefined fail.
pub fn verify_game_square(spec: &GameSpec, start: usize, h: &[Option<Payoffs>]) -> SquareReport {
    let carrier = spec.reachable(start);
    check_ca_square::<_, _, _, _, std::convert::Infallible>(
        &carrier,
        |&x| spec.states[x].clone(),
        |&x| spec.nodes[x].clone(),
        |node, h| match node {
            Node::Terminal(u) => Node::Terminal(u.clone()),
            Node::Move { agent, moves } => Node::Move {
                agent: *agent,
                moves: moves.iter().map(h).collect(),
            },
        },
        |image: &Node<Option<Payoffs>>| {
            Ok(match image {
                Node::Terminal(u) => Some(u.clone()),
                Node::Move { agent, moves } => moves
                    .iter()
                    .cloned()
                    .collect::<Option<Vec<_>>>()
                    .map(|moves| backward_step(&Node::Move { agent: *agent, moves })),
            })
        },
        |&x| h.get(x).cloned().flatten(),
        |a, b| match (a, b) {
            (Some(a), Some(b)) => a.len() == b.len() && a.iter().zip(b).all(|(p, q)| approx_eq(*p, *q, DEFAULT_TOLERANCE)),
            _ => false,
        },
    )
    .unwrap_or_else(|never| match never {})
}
