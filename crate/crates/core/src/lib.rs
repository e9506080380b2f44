//! Holomorphic eta quotients on Gamma0(N) and eta expressions for weight-2
//! newforms.

pub mod analytic;
pub mod arith;
pub mod enumerate;
pub mod error;
pub mod etaquot;
pub mod exactla;
pub mod express;
pub mod ingest;
mod lattice;
pub mod modp;
pub mod series;
pub mod tables;

pub use error::{Error, Result};
pub use etaquot::{index_gamma0, sturm_bound, EtaQuotient};
pub use series::QExpansion;
