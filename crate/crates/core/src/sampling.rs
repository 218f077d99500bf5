//! Seeded sampling of the phase-space ball.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::system::{ModelId, State};

/// Default number of ball samples standing in for the whole of `X`.
pub const DEFAULT_BALL_SAMPLES: usize = 64;

fn direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// `count` points uniformly distributed (by volume) in the ball of the given
/// radius: Gaussian directions, radii `r = radius·U^{1/dim}`.
pub fn sample_ball(model: ModelId, dim: usize, radius: f64, count: usize, seed: u64) -> Vec<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d = direction(&mut rng, dim);
            let u: f64 = rng.gen();
            let r = radius * u.powf(1.0 / dim as f64);
            State {
                model,
                coords: d.into_iter().map(|x| x * r).collect(),
            }
        })
        .collect()
}

/// `count` points uniformly distributed on the sphere of the given radius.
pub fn sample_sphere(model: ModelId, dim: usize, radius: f64, count: usize, seed: u64) -> Vec<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| State {
            model,
            coords: direction(&mut rng, dim).into_iter().map(|x| x * radius).collect(),
        })
        .collect()
}
