//! Brute-force and closed-form checks of the combinatorial and analytic facts
//! used by the theory. Every check returns both sides of its inequality.

pub mod automorphism;
pub mod bayes;
pub mod counting;
pub mod qform;
pub mod spanning;
pub mod trace;
