//! Worker-pool sizing.

use crate::error::{HarnessError, Result};

pub const THREADS_ENV: &str = "MALIGN_THREADS";

/// `MALIGN_THREADS` wins over the flag; `0` or nothing means one worker per CPU.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Result<usize> {
    let requested = match env.map(str::trim).filter(|v| !v.is_empty()) {
        Some(v) => Some(
            v.parse::<usize>()
                .map_err(|_| HarnessError::Config(format!("{THREADS_ENV}={v} is not a thread count")))?,
        ),
        None => flag,
    };
    Ok(match requested {
        Some(k) if k > 0 => k,
        _ => std::thread::available_parallelism().map(|k| k.get()).unwrap_or(1),
    })
}

pub fn build_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {threads} worker threads: {e}")))
}
