//! Order-preserving data-parallel map with a sequential fallback.
//!
//! Each index is evaluated independently and results come back in index
//! order, so anything reduced afterwards is identical across thread counts.

/// How index-parallel work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon's global pool.
    #[default]
    Parallel,
    /// A dedicated pool with this many workers.
    Threads(usize),
}

impl Execution {
    /// `--jobs`-style selection: 0 means the global pool, 1 sequential.
    pub fn from_jobs(jobs: usize) -> Self {
        match jobs {
            0 => Execution::Parallel,
            1 => Execution::Sequential,
            n => Execution::Threads(n),
        }
    }

    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..len).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            #[cfg(feature = "parallel")]
            Execution::Threads(n) => {
                use rayon::prelude::*;
                match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    Ok(pool) => pool.install(|| (0..len).into_par_iter().map(&f).collect()),
                    Err(_) => (0..len).map(f).collect(),
                }
            }
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel | Execution::Threads(_) => (0..len).map(f).collect(),
        }
    }

    /// Like [`Execution::map`]; on failure returns the error with the lowest
    /// index, whatever order the workers finished in.
    pub fn try_map<T, E, F>(self, len: usize, f: F) -> Result<Vec<T>, (usize, E)>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        let results = self.map(len, f);
        let mut out = Vec::with_capacity(len);
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok(x) => out.push(x),
                Err(e) => return Err((i, e)),
            }
        }
        Ok(out)
    }
}
