//! Order-preserving map over index ranges.
//!
//! With the `parallel` feature the work is spread over a rayon pool; without
//! it every call runs on the current thread. Results are always returned in
//! index order, so reductions performed by the caller are deterministic no
//! matter how many workers ran.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[derive(Default)]
pub struct Exec {
    workers: usize,
}


impl Exec {
    /// Single worker, the canonical reference mode.
    pub fn reference() -> Self {
        Self { workers: 1 }
    }

    /// `0` means "let rayon decide".
    pub fn with_workers(workers: usize) -> Self {
        Self { workers }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn is_sequential(&self) -> bool {
        self.workers == 1 || !cfg!(feature = "parallel")
    }

    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.is_sequential() || n < 2 {
            return (0..n).map(f).collect();
        }
        self.map_parallel(n, f)
    }

    #[cfg(feature = "parallel")]
    fn map_parallel<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.workers == 0 {
            return (0..n).into_par_iter().map(f).collect();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(self.workers).build() {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(_) => (0..n).map(f).collect(),
        }
    }

    #[cfg(not(feature = "parallel"))]
    fn map_parallel<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        for exec in [Exec::reference(), Exec::with_workers(3), Exec::default()] {
            let out = exec.map(100, |i| i * i);
            assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }
}
