//! Learning-theory toolkit for data drawn from heterogeneous mixtures.

pub mod complexity;
pub mod error;
pub mod mixtures;
pub mod optim;
pub mod rates;
pub mod regress;
pub mod stats;
pub mod rng;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
pub use rng::{derive_stream, RngStream};
pub use types::{validate_mixture, CriticalEq, Dataset, FittedFn, GaussianComponent, HyperplaneMixture, MixtureModel};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
