//! Shared numerical plumbing: deterministic random numbers, small symmetric
//! linear algebra, statistics and a worker-pool helper.

mod linalg;
mod rng;
mod stats;

pub use linalg::{
    cholesky, dot, lambda_max, norm2, solve_spd, solve_spd_many, sym_eigen, Matrix, SymEigen,
    SymMatrix, JACOBI_MAX_SWEEPS,
};
pub use rng::{mix64, Rng};
pub use stats::{
    average_ranks, fit_line, logistic_normal_mean, mean, pearson, r_squared, sigmoid, spearman,
    std_normal_cdf, LineFit,
};

/// Run `f` on a pool of `workers` threads; `workers <= 1` runs inline.
///
/// Callers must produce results whose order does not depend on scheduling
/// (indexed `par_iter().map().collect()`), which keeps output independent of
/// the worker count.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers <= 1 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
