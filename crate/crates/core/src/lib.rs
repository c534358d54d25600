//! Two-location facility location (2-LFLP) and its K-location extension.
//!
//! The crate is `no_std` and needs only `alloc`. It provides:
//!
//! * [`instance`]: the instance model, extended-real helpers, metric checks and cost evaluation;
//! * [`engine`]: an exact event-driven implementation of the 2-Chance and K-Chance greedy algorithms;
//! * [`baselines`]: the single-location greedy, home/work projections, myopic pruning and exact optimum;
//! * [`certify`]: structural checks, dual certificates and program extraction from execution traces;
//! * [`frp`]: factor-revealing program builders, feasibility checking, batching and LP text export;
//! * [`hardness`]: hard-instance families and reductions;
//! * [`gen`]: seeded synthetic instance generation.
#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

pub mod baselines;
pub mod certify;
pub mod engine;
mod error;
pub mod frp;
pub mod gen;
pub mod hardness;
pub mod instance;

pub use error::{Error, Result};
pub use instance::{CostReport, Edge, HyperEdges, Instance, Solution};
