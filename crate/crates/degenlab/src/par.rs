//! Data-parallel helpers with a sequential fallback.
//!
//! Every verification suite maps an independent check over a list of rows,
//! so the whole crate parallelizes through this one seam. With the
//! `parallel` feature (default) the work runs on rayon; without it, or when
//! sequential mode is requested at run time, it runs on the calling thread.
//! The `DEGENLAB_THREADS` environment variable caps the rayon pool.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    Parallel,
}

impl Mode {
    /// Parallel when compiled in, sequential otherwise.
    pub fn auto() -> Mode {
        if cfg!(feature = "parallel") {
            Mode::Parallel
        } else {
            Mode::Sequential
        }
    }
}

/// Installs a global rayon pool honoring `DEGENLAB_THREADS`. Harmless to
/// call more than once; a no-op without the `parallel` feature.
pub fn init_thread_pool() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(v) = std::env::var("DEGENLAB_THREADS") {
            if let Ok(n) = v.parse::<usize>() {
                if n > 0 {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
            }
        }
    }
}

/// Maps `f` over `items`, in parallel when the mode and feature allow.
/// Results keep the input order either way.
pub fn map_vec<T, R, F>(mode: Mode, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    match mode {
        Mode::Sequential => items.into_iter().map(f).collect(),
        Mode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                items.into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                items.into_iter().map(f).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let items: Vec<u64> = (0..100).collect();
        let seq = map_vec(Mode::Sequential, items.clone(), |x| x * x);
        let par = map_vec(Mode::auto(), items, |x| x * x);
        assert_eq!(seq, par);
    }
}
