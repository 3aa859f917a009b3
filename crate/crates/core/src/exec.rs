//! Data-parallel map with a sequential fallback. With the `parallel` feature
//! off, or `parallel == false`, items run in order on the calling thread.
//! Output order always matches input order.

pub fn par_map<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// Whether `par_map(.., true, ..)` actually fans out.
pub const fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v: Vec<u64> = (0..1000).collect();
        let a = par_map(&v, true, |x| x * x);
        let b = par_map(&v, false, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(a[999], 998001);
    }
}
