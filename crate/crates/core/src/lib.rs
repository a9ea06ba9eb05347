//! Evolving sets of solutions toward trade-offs between objective quality and
//! diversity.
//!
//! An [`Individual`](encoding::Individual) is a multiset of `r` bit-string
//! solutions. Its fitness pairs an aggregated objective (`f1`) with the sum of
//! pairwise Hamming distances between its solutions (`f2`), and NSGA-II or
//! SPEA2 search for non-dominated individuals. Maximum cut, maximum coverage
//! and minimum vertex cover on graphs are provided.

pub mod archive;
pub mod config;
pub mod diversity;
pub mod emo;
pub mod encoding;
pub mod error;
pub mod graph;
pub mod harness;
pub mod indicators;
pub mod instance_io;
pub mod problems;
pub mod stats;

pub use error::{Error, Result};
