pub mod cft_ops;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod io;
pub mod observables;
pub mod oracle;
pub mod partitions;
pub mod renewal;
pub mod series;
pub mod symfun;
pub mod wavefunction;

pub use error::{Error, Result};
