//! Optimal power splits (superposition with successive interference
//! cancellation) and time splits (orthogonal time sharing) for weighted
//! unequal error protection over a quasi-static Rayleigh fading channel.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod fbl;
pub mod ora;
pub mod oracle;
pub mod params;
pub mod pds;
pub mod quadrature;
pub mod report;
pub mod roots;
pub mod solution;
pub mod special;
pub mod validate;

pub use error::{Error, Result};
pub use params::{ChannelParams, ImportanceVector};
