//! Persistence modules over a convex cone: exact cone geometry, modules on
//! rational cell arrangements, the Alexandrov/γ-topology functors,
//! ephemeral detection, interleaving distances and 1-D convolution
//! distances.

pub mod arrangement;
pub mod cone;
pub mod conv1d;
pub mod doc;
pub mod error;
pub mod exactla;
pub mod interleave;
pub mod oracle;
pub mod par;
pub mod persist;
pub mod rat;
pub mod sites;
pub mod suites;

pub use error::{Error, Result};
pub use rat::Rat;
