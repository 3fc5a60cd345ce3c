//! Cooperative coevolution for large-scale black-box optimization.
//!
//! Building blocks: benchmark objectives, variable partitions, a subspace
//! CMA-ES, limited-memory CMA-ES, the cooperative-coevolution engine, a
//! toolkit for pure Nash equilibria of the decomposition game, and a
//! distributed driver mixing both optimizer families.

pub mod cc;
pub mod cma;
pub mod dcc;
pub mod error;
pub mod experiment;
pub mod game;
pub mod lmcma;
pub mod objective;
pub mod partition;
pub mod record;
pub mod search;

pub use error::{Error, Result};
pub use objective::{BaseFunction, Objective, ObjectiveInstance};
pub use partition::Partition;
pub use record::{RecordPoint, RunRecord, Status};
