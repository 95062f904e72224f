//! Trial fan-out. Results always come back in trial order.

use crate::prelude::*;
use crate::rng::{SeedStream, TrialRng};

/// Runs `f` for trial indices `0..n`, each with its own stream of `seed`.
pub fn map_trials<T, F>(seed: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut TrialRng) -> T + Sync + Send,
{
    let run = |i: usize| {
        let mut rng = SeedStream::new(seed, i as u64).rng();
        f(i, &mut rng)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(run).collect()
    }
}

/// Fallible variant of [`map_trials`]; the first error by trial index wins.
pub fn try_map_trials<T, E, F>(seed: u64, n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut TrialRng) -> Result<T, E> + Sync + Send,
{
    map_trials(seed, n, f).into_iter().collect()
}
