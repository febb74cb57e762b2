//! First-order tree-width toolkit.
//!
//! The pipeline: parse a relational FO formula, normalize it (straight,
//! negation normal form), build its formula graph and depth functions,
//! compute a minimum-width stratified tree decomposition, translate the
//! formula into the bounded-variable fragment, and evaluate it on finite
//! relational structures. A brute-force evaluator and exhaustive searches
//! act as oracles for everything clever.

pub mod decomposition;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod formula;
pub mod game;
pub mod gen;
pub mod order;
pub mod structures;
pub mod translate;
pub mod xenerp;

pub use error::{Error, ParseError};
