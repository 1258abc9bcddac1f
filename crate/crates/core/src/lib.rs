//! Liability rules for cascading disruptions in a chain of agents.
//!
//! Agents `1..n` each hold an agreement with the next one. The first agent to
//! fail (the disruptor) triggers its own loss and every later one. A
//! *solution* assigns liabilities for each possible disruptor, and that
//! assignment shapes how much each agent invests in not failing.
//!
//! The crate builds solutions ([`liability`]), evaluates expected costs and
//! their derivatives ([`costs`]), solves for efficient investments and for
//! the equilibrium a solution induces ([`solvers`]), runs the Monte Carlo and
//! efficiency-loss experiments ([`experiments`]) and checks the model's
//! structural results numerically ([`verify`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod costs;
pub mod error;
pub mod experiments;
pub mod format;
pub mod liability;
pub mod model;
pub mod par;
pub mod root;
pub mod solvers;
pub mod technology;
pub mod verify;

pub use error::{Error, Result};
pub use liability::{LiabilityMatrix, PiWeights};
pub use model::{InvestmentProfile, Problem};
pub use par::Execution;
pub use solvers::{SolveOptions, SolveResult};
pub use technology::Technology;
