//! Execution policy for batch work: independent runs, oracle sweeps and
//! other embarrassingly parallel loops.
//!
//! With the `parallel` feature (default) [`ExecPolicy::Parallel`] fans out
//! over rayon's global pool. Without it, every policy runs sequentially, so
//! callers never need their own `cfg` switches. Results always come back in
//! input order.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExecPolicy {
    Sequential,
    #[default]
    Parallel,
}

impl ExecPolicy {
    /// True when this policy actually runs on multiple threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecPolicy::Parallel
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == ExecPolicy::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    pub fn map_range<R, F>(self, range: std::ops::Range<u64>, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == ExecPolicy::Parallel {
            use rayon::prelude::*;
            return range.into_par_iter().map(f).collect();
        }
        range.map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree_and_preserve_order() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = ExecPolicy::Sequential.map(&items, |x| x * x);
        let par = ExecPolicy::Parallel.map(&items, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(
            ExecPolicy::Sequential.map_range(0..50, |x| x + 1),
            ExecPolicy::Parallel.map_range(0..50, |x| x + 1)
        );
        assert!(!ExecPolicy::Sequential.is_parallel());
    }
}
