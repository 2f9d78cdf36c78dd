//! Deterministic parallel reduction over replicas.
//!
//! Replicas are cut into fixed-size chunks; chunks run on the rayon pool
//! and their partial results are merged in chunk order, so the outcome is
//! bit-identical for any number of worker threads.

use crate::error::Result;
use rayon::prelude::*;

const CHUNK: u64 = 256;

pub(crate) fn reduce<T, I, B, M>(replicas: u64, init: I, body: B, merge: M) -> Result<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    B: Fn(&mut T, u64) -> Result<()> + Sync,
    M: Fn(&mut T, T),
{
    let chunks = replicas.div_ceil(CHUNK);
    let parts: Vec<Result<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(replicas) {
                body(&mut acc, idx)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = init();
    for part in parts {
        merge(&mut total, part?);
    }
    Ok(total)
}

/// Collect one value per replica, in replica order.
pub(crate) fn collect<T, F>(replicas: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    reduce(
        replicas,
        Vec::new,
        |acc: &mut Vec<T>, idx| {
            acc.push(f(idx)?);
            Ok(())
        },
        |acc, part| acc.extend(part),
    )
}
