//! Files, stack-level parallelism and the end-to-end pipeline around
//! [`usvol_core`].

pub mod error;
pub mod frameio;
pub mod pipeline;
pub mod report;
pub mod stack;

pub use error::{Error, Result};
pub use usvol_core as core;

/// Runs `f` on a dedicated rayon pool with `threads` workers (`None` uses the
/// global pool).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
