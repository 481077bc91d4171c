//! Data-parallel map over replicate indices.
//!
//! With the `parallel` feature (default) the map runs on rayon's current
//! thread pool; without it the same loop runs sequentially. Results are
//! collected in index order either way, so outputs never depend on the
//! schedule or worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..count`, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn par_map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

/// Sequential fallback used when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn par_map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Always-sequential variant, kept for benchmarking against the parallel
/// path.
pub fn seq_map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..count).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_index_order() {
        let out = par_map_indexed(100, |i| i * i);
        assert_eq!(out, seq_map_indexed(100, |i| i * i));
    }
}
