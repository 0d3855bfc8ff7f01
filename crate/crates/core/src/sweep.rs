//! Running independent per-degree solves.
//!
//! With the `parallel` feature (on by default) the work is spread over the
//! rayon pool; without it, or with [`Execution::Sequential`], it runs in
//! order on the calling thread. The output is ordered like the input in both
//! cases.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// `Parallel` when compiled with the `parallel` feature.
    pub fn available() -> &'static [Execution] {
        if cfg!(feature = "parallel") {
            &[Execution::Sequential, Execution::Parallel]
        } else {
            &[Execution::Sequential]
        }
    }
}

/// `items.iter().map(f)`, possibly in parallel.
pub fn map_items<I, T, F>(items: &[I], exec: Execution, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
