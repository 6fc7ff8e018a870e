//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper returns results in index order, so callers reduce
//! deterministically regardless of the execution mode or thread count.

/// How an index-parallel loop is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Serial,
    /// Uses rayon when the `parallel` feature is enabled, otherwise serial.
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Maps `f` over `0..n` and collects the results in index order.
pub fn map_indexed<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Runs `f` inside a pool with `threads` workers (serial when `threads <= 1`
/// or the `parallel` feature is off). Returns the exec mode to use inside.
pub fn with_threads<R, F>(threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce(Exec) -> R + Send,
{
    if threads <= 1 {
        return f(Exec::Serial);
    }
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| f(Exec::Parallel)),
            Err(_) => f(Exec::Serial),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        f(Exec::Serial)
    }
}

/// Number of worker threads rayon would use by default (1 without the feature).
pub fn default_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
