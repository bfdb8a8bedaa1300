//! Training small neural networks with a hybrid of grey-wolf optimization,
//! genetic operators and SGD on the leading wolves, alongside SGD and SL-PSO
//! baselines and an NSGA-II bi-objective variant.
// NaN must fail validation, hence `!(a <= b)` rather than `a > b`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod experiment;
pub mod hybrid;
pub mod metaheuristics;
pub mod moo;
pub mod nn;
pub mod rng;

pub use error::{Error, Result};
