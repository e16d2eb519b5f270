//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] dispatches
//! to rayon; without it every call runs sequentially. Results always come
//! back in input order, so outputs do not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn map<T, R, F>(self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.into_par_iter().map(f).collect(),
            _ => items.into_iter().map(f).collect(),
        }
    }

    pub fn map_range<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..len).into_par_iter().map(f).collect(),
            _ => (0..len).map(f).collect(),
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = Execution::Sequential.map_range(100, |i| i * i);
        let par = Execution::Parallel.map_range(100, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(
            Execution::Parallel.map(vec![3, 1, 2], |x| x + 1),
            vec![4, 2, 3]
        );
    }
}
