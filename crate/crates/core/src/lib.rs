//! Index functions, embedding predicates and numerical experiments for
//! modulation, Besov and Lebesgue-type spaces.

pub mod cli;
pub mod experiments;
pub mod extremals;
pub mod fft;
pub mod grid;
pub mod indices;
pub mod norms;
pub mod par;
