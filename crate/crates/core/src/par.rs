//! Sequential/parallel switch for the embarrassingly parallel loops.
//!
//! Every parallel loop here maps a pure function over an index range and
//! collects in index order, so both execution modes return bit-identical
//! results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Evaluates `f` at every index in `0..len`, in order.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..len).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..len).into_par_iter().map(f).collect(),
        }
    }

    /// Like [`Execution::map`] for fallible closures; returns the first error
    /// by index.
    pub fn try_map<T, E, F>(self, len: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(len, f).into_iter().collect()
    }
}

/// Upper-triangle index pairs `(k, l)` with `k <= l < m`, row-major.
pub(crate) fn upper_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|k| (k..m).map(move |l| (k, l))).collect()
}
