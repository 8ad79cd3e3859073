//! Benchmarking suite for the three-parameter, non-variational Quantum
//! Walk-based Optimisation Algorithm (QWOA) on weighted maxcut.
//!
//! The pipeline is: generate an [`instances::InstanceLibrary`], tabulate each
//! graph's cut values ([`landscape::ObjectiveTable`]), optimise the three
//! schedule parameters per depth ([`schedule`]), sweep depth until the mean
//! probability of measuring an optimum reaches a target ([`bench`]), and
//! compare against classical local search and Grover search ([`report`]).
//!
//! ```
//! use qwoa_core::instances::WeightedGraph;
//! use qwoa_core::landscape::ObjectiveTable;
//! use qwoa_core::schedule::{optimize, OptimizerConfig, DEFAULT_START};
//!
//! let g = WeightedGraph::from_triples(4, &[(0, 1, 1.0), (1, 2, 0.5), (2, 3, 0.8), (0, 3, 0.3)]).unwrap();
//! let table = ObjectiveTable::build(&g).unwrap();
//! let res = optimize(&table, 2, DEFAULT_START, &OptimizerConfig::default()).unwrap();
//! assert!(res.expectation <= table.optimum());
//! ```

pub mod bench;
pub mod config;
pub mod error;
pub mod fit;
pub mod instances;
pub mod landscape;
pub mod local_search;
pub mod plot;
pub mod reference;
pub mod report;
pub mod rng;
pub mod schedule;
pub mod sim;

pub use error::{Error, Result};
