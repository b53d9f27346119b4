//! Combinatorics of plane curve arrangements: abstract curve data, blow-ups,
//! admissible vector families, the Q-matrix spectral test and combinatorial pencils.

pub mod acc;
pub mod admissibility;
pub mod blowup;
pub mod cli;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod pencil;
pub mod rational;
pub mod spectra;
mod union_find;
