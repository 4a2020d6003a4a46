//! Row-wise fan-out shared by the stats and thresholding passes.

/// How per-row work is scheduled. Results are identical either way.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rows are spread over the rayon pool. Without the `parallel` feature
    /// this runs sequentially.
    #[default]
    Parallel,
}

/// Calls `f(y, row)` for every `width`-long row of `out`.
pub(crate) fn for_each_row<T, F>(out: &mut [T], width: usize, exec: Execution, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if width == 0 {
        return;
    }
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            out.par_chunks_mut(width)
                .enumerate()
                .for_each(|(y, row)| f(y, row));
        }
        _ => out
            .chunks_mut(width)
            .enumerate()
            .for_each(|(y, row)| f(y, row)),
    }
}
