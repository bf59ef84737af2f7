use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::spectral::CombParams;

/// One realization of the random `(nu_ceo, nu_rep)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleDraw {
    pub nu_ceo: f64,
    pub nu_rep: f64,
}

impl SampleDraw {
    pub fn mean(params: &CombParams) -> Self {
        Self {
            nu_ceo: params.mu_ceo,
            nu_rep: params.mu_rep,
        }
    }

    pub fn line(&self, m: i64) -> f64 {
        self.nu_ceo + m as f64 * self.nu_rep
    }
}

/// Independent normal draws `N(mu_ceo, sigma_ceo^2)` and `N(mu_rep, sigma_rep^2)`.
pub fn sample_params<R: Rng + ?Sized>(params: &CombParams, rng: &mut R) -> SampleDraw {
    let z_ceo: f64 = rng.sample(StandardNormal);
    let z_rep: f64 = rng.sample(StandardNormal);
    SampleDraw {
        nu_ceo: params.mu_ceo + params.sigma_ceo * z_ceo,
        nu_rep: params.mu_rep + params.sigma_rep * z_rep,
    }
}

/// Generator for draw `index` of the run seeded with `seed`: the ChaCha
/// stream id is the draw index, so any draw can be reproduced on its own and
/// parallel runs see the same numbers as sequential ones.
pub fn draw_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn draw_at(params: &CombParams, seed: u64, index: u64) -> SampleDraw {
    sample_params(params, &mut draw_rng(seed, index))
}
