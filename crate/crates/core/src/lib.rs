#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::excessive_precision
)]

pub mod egf;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod mc;
pub mod numeric;
pub mod oracle;
pub mod special;

pub use error::{Error, Result};
