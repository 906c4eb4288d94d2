//! Finite model enumeration for equational first-order logic over the domain
//! `0..n`, and probability by counting models.
//!
//! A probability puzzle is written as two theories: one whose models are all
//! the possible outcomes, and a set of extra constraints selecting the
//! favorable ones. The probability is the ratio of the two model counts.
//!
//! ```
//! use modelprob::{parse_str, solve_puzzle};
//!
//! let dice = parse_str(
//!     "assign(domain_size, 7).
//!      formulas(assumptions). Dice1 != 0. Dice2 != 0. end_of_list.",
//! ).unwrap();
//! let doubles = parse_str("formulas(assumptions). Dice1 = Dice2. end_of_list.").unwrap();
//! let outcome = solve_puzzle(&dice, &doubles).unwrap();
//! assert_eq!(outcome.probability.to_string(), "1/6");
//! ```

pub mod corpus;
pub mod oracle;
pub mod parser;
pub mod probability;
pub mod semantics;
pub mod solver;
pub mod syntax;

pub use oracle::{brute_force_count, brute_force_count_with, brute_force_models, OracleBudget, OracleError};
pub use parser::{format_theory, merge_theories, parse_str, parse_theory, MergeError, ParseDiagnostic, SourceFile};
pub use probability::{solve_puzzle, ProbabilityError, PuzzleOutcome, Rational};
pub use semantics::{eval_term, holds, is_model, Arithmetic, Binding, EvalError, Interpretation, ModelError, Table, Unbounded};
pub use solver::{count_models, enumerate, ground, GroundProblem, ModelCount, Models, SolveError};
pub use syntax::{ArithOp, Formula, ModelLimit, Rel, Signature, SymbolKind, Term, Theory};
