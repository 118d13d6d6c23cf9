//! Data-parallel helpers. With the `parallel` feature the work is spread over
//! the current rayon pool; without it, or with [`Execution::Sequential`], it
//! runs on the calling thread. Results are always returned in index order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..count).map(f)` collected in order.
pub fn map_indexed<R, F>(count: usize, exec: Execution, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..count).map(f).collect()
}

/// Like [`map_indexed`] over a slice.
pub fn map_slice<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_indexed(items.len(), exec, |i| f(&items[i]))
}

/// Independent stream for work item `index` under base seed `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
