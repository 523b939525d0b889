//! Airy and Hermite special functions.

mod airy;
mod hermite;

pub use airy::{airy, airy_series, AiryPair, AIRY_DOMAIN, AI_PRIME_ZERO, AI_ZERO};
pub use hermite::{char_poly_mean, gue_kernel, hermite_phys};
