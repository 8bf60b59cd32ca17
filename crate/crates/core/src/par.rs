//! Data-parallel helpers. With the `parallel` feature these run on rayon;
//! without it, or with [`Parallelism::Sequential`], they are plain loops.
//! Results never depend on the mode: maps keep input order and searches
//! return the first hit in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// Whether work will actually fan out in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

pub fn map<T, R, F>(par: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = par;
    items.iter().map(f).collect()
}

/// First `Some` in input order.
pub fn find_map_first<T, R, F>(par: Parallelism, items: &[T], f: F) -> Option<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        return items.par_iter().find_map_first(f);
    }
    let _ = par;
    items.iter().find_map(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let sq = |x: &u64| x * x;
        assert_eq!(map(Parallelism::Sequential, &xs, sq), map(Parallelism::Parallel, &xs, sq));
        let hit = |x: &u64| (x % 97 == 13).then_some(*x);
        assert_eq!(find_map_first(Parallelism::Parallel, &xs, hit), Some(13));
        assert_eq!(find_map_first(Parallelism::Sequential, &xs, hit), Some(13));
    }
}
