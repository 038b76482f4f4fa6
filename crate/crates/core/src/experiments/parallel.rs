use rayon::prelude::*;

use crate::error::{Error, Result};

/// Evaluates `f` for realizations `0..m` on up to `workers` threads (0 means
/// one per core) and returns the results in realization order. The first
/// failing realization, in index order, determines the error.
pub(crate) fn map_realizations<T, F>(m: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let results: Vec<Result<T>> = if workers == 1 {
        (0..m as u64).map(&f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::internal(format!("thread pool: {e}")))?;
        pool.install(|| (0..m as u64).into_par_iter().map(&f).collect())
    };
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_errors() {
        for w in [0, 1, 3] {
            let v = map_realizations(20, w, |r| Ok(r * r)).unwrap();
            assert_eq!(v, (0..20u64).map(|r| r * r).collect::<Vec<_>>());
            let err = map_realizations(20, w, |r| {
                if r >= 5 {
                    Err(Error::invalid(format!("r{r}")))
                } else {
                    Ok(r)
                }
            })
            .unwrap_err();
            assert_eq!(err.to_string(), "invalid input: r5");
        }
    }
}
