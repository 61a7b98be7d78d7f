//! Switch between rayon and plain iterators depending on the `parallel` feature.
//!
//! Call sites import `rayon::prelude::*` under the same feature so the
//! adapter methods resolve. Every call site collects into an ordered `Vec`
//! before reducing, so results do not depend on thread scheduling.

#[cfg(feature = "parallel")]
#[macro_export]
#[doc(hidden)]
macro_rules! maybe_par_iter {
    ($e:expr) => {
        rayon::iter::IntoParallelIterator::into_par_iter($e)
    };
}

#[cfg(not(feature = "parallel"))]
#[macro_export]
#[doc(hidden)]
macro_rules! maybe_par_iter {
    ($e:expr) => {
        ($e).into_iter()
    };
}

/// Index of the largest value; ties keep the earliest index.
pub(crate) fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some(b) if !(*v > values[b]) => {}
            _ => best = Some(i),
        }
    }
    best
}

pub(crate) fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some(b) if !(*v < values[b]) => {}
            _ => best = Some(i),
        }
    }
    best
}
