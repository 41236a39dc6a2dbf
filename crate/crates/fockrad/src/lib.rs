//! Joint operator radii of matrix tuples, truncated Fock-space models, multi-Toeplitz
//! positivity and Fejér-type factorization, with randomized certification of the
//! inequalities that relate them.

pub mod certify;
pub mod error;
pub mod fock;
pub mod io;
pub mod matrix;
pub mod radii;
pub mod spectra;
pub mod toeplitz;
pub mod tuple;
pub mod words;

pub use error::{Error, Result};
pub use matrix::{CMatrix, C64};
pub use tuple::OperatorTuple;
pub use words::Word;

/// Maps `f` over `items`, in parallel when the `parallel` feature is on. Order is preserved.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, U>(items: &[T], f: impl Fn(&T) -> U) -> Vec<U> {
    items.iter().map(f).collect()
}

/// Caps the worker pool used by parallel sweeps. Only the first call has an effect.
#[cfg(feature = "parallel")]
pub fn set_threads(n: usize) -> bool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_ok()
}

#[cfg(not(feature = "parallel"))]
pub fn set_threads(_n: usize) -> bool {
    false
}
