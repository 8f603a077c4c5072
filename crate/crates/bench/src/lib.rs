//! Shared fixtures for the solver benchmarks.

use std::sync::Arc;

use volmaj_core::{corpus, graded_mesh, Mesh, Result};

/// Uniform mesh on `[0, t_end]` with `n` intervals.
pub fn uniform(t_end: f64, n: usize) -> Result<Arc<Mesh>> {
    Ok(Arc::new(graded_mesh(t_end, n, 1.0)?))
}

/// `example2` with `m` interior nodes.
pub fn example2(m: usize) -> Result<corpus::CorpusEntry> {
    corpus::example2(m)
}
