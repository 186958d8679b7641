use crate::rng::derive_seed;
use crate::topology::Topology;
use crate::traffic::TrafficMatrix;
use crate::CoreError;

use super::{max_concurrent_flow, FlowOptions};

/// Largest load in `lo..=hi` at which every one of `runs` seeded trials
/// reaches throughput `1 - eps`, by binary search.
///
/// Trial `k` at load `L` is built with seed `derive_seed(seed, [L, k])`. A
/// builder error counts as a failed load; solver errors are returned.
pub fn max_supported_load<B>(
    builder: B,
    runs: usize,
    eps: f64,
    (lo, hi): (u64, u64),
    seed: u64,
    opts: &FlowOptions,
) -> Result<u64, CoreError>
where
    B: Fn(u64, u64) -> Result<(Topology, TrafficMatrix), CoreError>,
{
    if lo > hi || runs == 0 {
        return Err(CoreError::InvalidInput("empty load range or zero runs".into()));
    }
    let passes = |load: u64| -> Result<bool, CoreError> {
        for k in 0..runs as u64 {
            let Ok((t, tm)) = builder(load, derive_seed(seed, &[load, k])) else {
                return Ok(false);
            };
            if max_concurrent_flow(&t, &tm, opts)?.throughput < 1.0 - eps {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if !passes(lo)? {
        return Err(CoreError::BracketError(lo));
    }
    if passes(hi)? {
        return Ok(hi);
    }
    let (mut good, mut bad) = (lo, hi);
    while bad - good > 1 {
        let mid = good + (bad - good) / 2;
        if passes(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}
