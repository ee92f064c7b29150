//! Steady-state simulation of a single-atom maser whose source–reservoir
//! coupling is tuned through a flux-biased transmon coupler.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod cli;
pub mod config;
pub mod golden;
pub mod hilbert;
pub mod lindblad;
pub mod maser;
pub mod observables;
pub mod output;
pub mod sparse;
pub mod sweep;
pub mod units;
