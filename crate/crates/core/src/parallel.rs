//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool;
//! without it everything runs on the calling thread. Results are collected in
//! input order either way, so downstream reductions are bit-identical.

use crate::error::Result;

pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_par<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_par(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(items, f)
    }
}

/// Like [`map`], stopping at the first error in input order.
pub fn try_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    map(items, f).into_iter().collect()
}

/// Runs `job` with at most `threads` workers. `None` uses the global pool.
pub fn with_thread_cap<R, F>(threads: Option<usize>, job: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = threads.filter(|&n| n > 0) {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                return pool.install(job);
            }
        }
        job()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        job()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let xs: Vec<u64> = (0..10_000).collect();
        let ys = map(&xs, |x| x * x);
        assert_eq!(ys, map_seq(&xs, |x| x * x));
    }

    #[test]
    fn try_map_reports_first_error() {
        use crate::error::Error;
        let xs = [1, 2, 3, 4];
        let r = try_map(&xs, |&x| {
            if x >= 3 {
                Err(Error::Analysis(format!("bad {x}")))
            } else {
                Ok(x)
            }
        });
        assert_eq!(r, Err(Error::Analysis("bad 3".into())));
    }

    #[test]
    fn capped_pool_gives_same_answer() {
        let xs: Vec<f64> = (0..1000).map(|k| k as f64 * 0.37).collect();
        let a: f64 = with_thread_cap(Some(1), || map(&xs, |x| x.sin()).iter().sum());
        let b: f64 = map(&xs, |x| x.sin()).iter().sum();
        assert_eq!(a, b);
    }
}
