//! Execution strategy for the data-parallel inner loops.
//!
//! Every hot kernel (per-simplex assembly, per-vertex maps, restart sweeps)
//! is expressed through the helpers here. The parallel path maps in parallel
//! but reduces in a fixed order over fixed-size chunks, so sums are
//! bit-identical to the sequential path regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk size for ordered partial sums. Fixed so that the summation tree does
/// not depend on the number of worker threads.
const SUM_CHUNK: usize = 1024;

/// Which execution path to use. `Exec::default()` is parallel whenever the
/// `parallel` feature is enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Exec::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// `f(i)` for `i in 0..len`, collected in index order.
    pub fn map_collect<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..len).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..len).into_par_iter().map(f).collect(),
        }
    }

    /// Deterministic sum of `f(i)` over `0..len`: per-chunk sequential sums,
    /// chunk results added in order.
    pub fn sum<F>(self, len: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let chunk_sums: Vec<f64> = match self {
            Exec::Sequential => chunks(len)
                .map(|(a, b)| (a..b).map(&f).sum::<f64>())
                .collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => chunks(len)
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|(a, b)| (a..b).map(&f).sum::<f64>())
                .collect(),
        };
        chunk_sums.iter().sum()
    }
}

fn chunks(len: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..len.div_ceil(SUM_CHUNK)).map(move |c| {
        let a = c * SUM_CHUNK;
        (a, (a + SUM_CHUNK).min(len))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_matches_sequential_bitwise() {
        let f = |i: usize| ((i as f64) * 0.1).sin() / ((i + 1) as f64);
        let seq = Exec::Sequential.sum(10_000, f);
        let def = Exec::default().sum(10_000, f);
        assert_eq!(seq.to_bits(), def.to_bits());
    }

    #[test]
    fn map_collect_preserves_order() {
        let v = Exec::default().map_collect(517, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }
}
