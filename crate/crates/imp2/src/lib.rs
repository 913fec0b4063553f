//! IMP2 is a small imperative language with a prefix-free binary program
//! encoding. A program is a two-part code `<n, y>`: a self-delimiting
//! encoding of a sentence index `n` followed by a raw input bit stream `y`.
//!
//! This crate provides the whole pipeline around that machine:
//!
//! * [`syntax`] — the abstract syntax tree, a parser for the fully
//!   parenthesized concrete syntax, and the canonical printer;
//! * [`enumeration`] — the rank/unrank bijection between naturals and
//!   sentences, built from round-robin unions and sum-layered tupling;
//! * [`codec`] — binary-string bijection, self-delimiting program codes,
//!   and counting/iteration/sampling of the length-stratified code space;
//! * [`interpreter`] — resource-bounded execution with loop detection and
//!   the five-way halting classification;
//! * [`threshold`] — a sampling estimator for the step budget;
//! * [`runner`] — partitioned sweeps of the program space with mergeable,
//!   persistent aggregates;
//! * [`analysis`] — output-frequency (CTM) and smallest-program-found (SPF)
//!   tables, rank correlations, and permutation significance tests.

pub mod analysis;
pub mod codec;
pub mod enumeration;
pub mod interpreter;
pub mod runner;
pub mod syntax;
pub mod threshold;
