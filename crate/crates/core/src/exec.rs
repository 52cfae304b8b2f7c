//! Sequential / data-parallel dispatch for independent work items.
//!
//! Results always come back in index order, so anything reduced from them
//! afterwards is independent of scheduling.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon's current pool. Falls back to [`Execution::Sequential`] when
    /// the crate is built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Execution {
    /// Whether work actually fans out to the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Evaluates `f(0), f(1), .., f(n-1)` and collects in index order,
    /// stopping at the first error (by index).
    pub fn try_map<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            let all: Vec<Result<T, E>> = (0..n).into_par_iter().map(f).collect();
            return all.into_iter().collect();
        }
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree_and_keep_order() {
        let f = |i: usize| Ok::<_, ()>(i * i);
        let a = Execution::Sequential.try_map(1000, f).unwrap();
        let b = Execution::Parallel.try_map(1000, f).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[31], 961);
    }

    #[test]
    fn first_error_by_index_wins() {
        let f = |i: usize| if i % 7 == 3 { Err(i) } else { Ok(i) };
        assert_eq!(Execution::Sequential.try_map(100, f), Err(3));
        assert_eq!(Execution::Parallel.try_map(100, f), Err(3));
    }
}
