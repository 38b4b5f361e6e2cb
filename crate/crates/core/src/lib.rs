//! Labelled explicit-substitution λ-calculi with closed reduction, their
//! translation into weighted proof-nets, and checkers relating labels to
//! straight-path weights.

pub mod algebra;
pub mod check;
pub mod cli;
pub mod corpus;
pub mod label;
pub mod levy;
pub mod net;
pub mod paths;
pub mod rewrite;
pub mod term;
