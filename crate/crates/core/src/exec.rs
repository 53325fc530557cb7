//! Index-ordered data-parallel maps.
//!
//! With the `parallel` feature (default) the work is spread over the current
//! rayon pool; without it everything runs on the calling thread. Outputs are
//! always assembled by index, so results never depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..len).map(f).collect()`, possibly in parallel.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Maps then folds with an associative, commutative `combine`.
pub fn map_reduce<T, F, R>(len: usize, identity: T, f: F, combine: R) -> T
where
    T: Send + Sync + Clone,
    F: Fn(usize) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len)
            .into_par_iter()
            .map(f)
            .reduce(|| identity.clone(), &combine)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).fold(identity, combine)
    }
}

/// Runs `op` with at most `threads` workers. `None` uses the global pool.
pub fn with_threads<T, F>(threads: Option<usize>, op: F) -> T
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    #[cfg(feature = "parallel")]
    {
        match threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .expect("thread pool construction")
                .install(op),
            None => op(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        op()
    }
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let v = with_threads(Some(3), || map_indexed(1000, |i| i * i));
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }

    #[test]
    fn reduce_matches_sequential() {
        let total = map_reduce(500, 0u64, |i| i as u64, |a, b| a + b);
        assert_eq!(total, 499 * 500 / 2);
    }
}
