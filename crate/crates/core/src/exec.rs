//! Trial execution: data-parallel over trial indices with rayon when the
//! `parallel` feature is on, a plain loop otherwise.
//!
//! Results are combined through [`Merge`], which must be associative and
//! insensitive to how the index range is split, so every execution mode
//! returns the same value.

/// Partial results that can be combined in any grouping.
pub trait Merge: Default + Send {
    fn merge(self, other: Self) -> Self;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// The global rayon pool. Without the `parallel` feature this runs
    /// sequentially.
    #[default]
    Parallel,
    /// A dedicated pool with this many threads.
    ParallelWith(usize),
}

impl Execution {
    pub fn threads(n: usize) -> Self {
        if n <= 1 {
            Execution::Sequential
        } else {
            Execution::ParallelWith(n)
        }
    }

    /// Folds `0..n` into an accumulator. `init` builds per-worker scratch
    /// state, `step` processes one index.
    pub fn fold<A, S, I, F>(&self, n: u64, init: I, step: F) -> A
    where
        A: Merge,
        S: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, &mut A, u64) + Sync + Send,
    {
        match self {
            Execution::Sequential => sequential_fold(n, &init, &step),
            #[cfg(feature = "parallel")]
            Execution::Parallel => parallel_fold(n, &init, &step),
            #[cfg(feature = "parallel")]
            Execution::ParallelWith(k) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(*k)
                    .build()
                    .expect("thread pool");
                pool.install(|| parallel_fold(n, &init, &step))
            }
            #[cfg(not(feature = "parallel"))]
            _ => sequential_fold(n, &init, &step),
        }
    }
}

fn sequential_fold<A, S, I, F>(n: u64, init: &I, step: &F) -> A
where
    A: Merge,
    I: Fn() -> S,
    F: Fn(&mut S, &mut A, u64),
{
    let mut scratch = init();
    let mut acc = A::default();
    for i in 0..n {
        step(&mut scratch, &mut acc, i);
    }
    acc
}

#[cfg(feature = "parallel")]
fn parallel_fold<A, S, I, F>(n: u64, init: &I, step: &F) -> A
where
    A: Merge,
    S: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut A, u64) + Sync + Send,
{
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .fold(
            || (init(), A::default()),
            |(mut s, mut a), i| {
                step(&mut s, &mut a, i);
                (s, a)
            },
        )
        .map(|(_, a)| a)
        .reduce(A::default, A::merge)
}
