//! The two experimental applications and their data pipelines.

mod dopt;
mod hawkes;
pub mod io;
mod mhp;
mod simplex_log;

pub use dopt::{dopt_random, DoptInstance};
pub use hawkes::{hawkes_simulate, random_infectivity, spectral_radius, MAX_EVENTS};
pub use mhp::{mhp_ingest, MhpArrivals, MhpDimension};
pub use simplex_log::SimplexLogInstance;
