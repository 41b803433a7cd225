pub mod analysis;
pub mod circle;
pub mod energy;
pub mod error;
pub mod kernels;
pub mod minimize;
pub mod operator;
pub mod periodic;
pub mod quad;
pub mod rearrange;
pub mod special;

pub use error::{Error, Result};
pub use kernels::{Kernel, KernelFamily, KernelSpec, WrappedKernel};
pub use operator::{Provenance, SymbolTable};
pub use periodic::{PeriodicFunction, PeriodicGrid};

/// Library version embedded in CLI reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
