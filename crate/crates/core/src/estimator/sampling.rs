// SPDX-License-Identifier: Apache-2.0

use super::EstimatorError;
use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent RNG for `(master seed, trial, stream)`; no shared state.
pub fn stream_rng(seed: u64, trial: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(trial)));
    rng.set_stream(stream);
    rng
}

/// Mean of `m` Bernoulli(`p`) draws.
pub fn sample_signal(p: f64, m: u64, rng: &mut ChaCha8Rng) -> Result<f64, EstimatorError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EstimatorError::Domain(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    if m == 0 {
        return Err(EstimatorError::Domain("need at least one shot".into()));
    }
    let dist = Bernoulli::new(p).expect("p checked");
    let hits = dist
        .sample_iter(rng)
        .take(m as usize)
        .filter(|&b| b)
        .count();
    Ok(hits as f64 / m as f64)
}

/// Either noisy Bernoulli sampling or the noiseless `m → ∞` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    #[default]
    Bernoulli,
    Exact,
}

impl Sampling {
    pub fn draw(self, p: f64, m: u64, rng: &mut ChaCha8Rng) -> Result<f64, EstimatorError> {
        match self {
            Sampling::Bernoulli => sample_signal(p, m, rng),
            Sampling::Exact => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(EstimatorError::Domain(format!(
                        "probability {p} outside [0, 1]"
                    )));
                }
                Ok(p)
            }
        }
    }
}
