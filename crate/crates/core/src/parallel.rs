//! Ordered parallel map over independent jobs.
//!
//! With the `parallel` feature (default) work is spread over a rayon pool;
//! without it, or with `jobs == 1`, jobs run sequentially on the caller's
//! thread. Results always come back in input order, so callers see identical
//! output either way.

/// Caps the number of worker threads. `0` means one per available core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WorkerPool {
    pub jobs: usize,
}

impl WorkerPool {
    pub fn sequential() -> WorkerPool {
        WorkerPool { jobs: 1 }
    }

    pub fn with_jobs(jobs: usize) -> WorkerPool {
        WorkerPool { jobs }
    }

    /// Effective number of workers.
    pub fn width(&self) -> usize {
        if !cfg!(feature = "parallel") {
            return 1;
        }
        match self.jobs {
            0 => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            n => n,
        }
    }

    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            if self.width() > 1 && items.len() > 1 {
                use rayon::prelude::*;
                return match rayon::ThreadPoolBuilder::new().num_threads(self.width()).build() {
                    Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                    Err(_) => items.par_iter().map(&f).collect(),
                };
            }
        }
        items.iter().map(f).collect()
    }
}
