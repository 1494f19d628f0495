//! A classical-realizability workbench: a weak head machine on processes
//! `ξ ⋆ π`, bracket abstraction, the forcing-condition extension of a
//! realizability algebra, poles, finite truth values and realizer
//! generators.

pub mod combinators;
pub mod compile;
pub mod derivation;
pub mod kam;
pub mod pole;
pub mod realizer;
pub mod star;
pub mod suite;
pub mod syntax;
pub mod term;
pub mod truth;

pub use term::{Comb, Name, Process, Stack, Term};
