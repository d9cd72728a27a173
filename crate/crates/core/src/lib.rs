//! Coalgebra-to-algebra recursion engines.
//!
//! Four instances of two dual recursion schemes, sharing one verification
//! harness:
//!
//! * [`timed`] solves backward-looking timing specifications over a time
//!   monoid and instantiates the solutions in concrete dynamical systems.
//! * [`markov`] analyses finite Markov chains: communicating classes,
//!   periods, stationary distributions and the long-run matrix `E†`.
//! * [`games`] evaluates finite perfect-information games by backward
//!   induction over the cofree game tree.
//! * [`lsystem`] interprets fractal L-systems as unit curves and evaluates
//!   points of the curve exactly (or with a certified error bound).
//!
//! [`schemes`] holds the commuting-square checker and the (co)monad law
//! suites that every engine is tested against.

pub mod games;
pub mod lsystem;
pub mod markov;
pub mod schemes;
pub mod timed;

pub use schemes::{SquareFailure, SquareReport};
