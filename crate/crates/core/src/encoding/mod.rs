//! Individuals as concatenated bit-strings and the variation operators that
//! act on them.

pub(crate) mod bits;
mod individual;
mod operators;

pub use bits::{BitString, Solution};
pub use individual::{FitnessVector, Individual};
pub(crate) use operators::mutate_solution;
pub use operators::{
    shuffle_solutions, standard_bit_mutation, uniform_crossover, uniform_crossover_traced,
    CrossoverOutcome,
};
