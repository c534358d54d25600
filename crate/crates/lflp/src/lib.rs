//! File formats, policy dispatch, benchmark harness and command-line front end for two-location
//! facility location. All algorithms live in `lflp_core`.

pub mod bench;
pub mod cli;
pub mod io;
pub mod policy;
