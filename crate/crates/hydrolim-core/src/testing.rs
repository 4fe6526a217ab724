//! Deterministic pseudo-random fields for tests and self-checks. A small
//! splitmix64 generator keeps the crate free of RNG dependencies and makes
//! every check reproducible from a seed.

use crate::spectral::{Grid, Parity, SpectralField};
use crate::state::CfState;
use num_complex::Complex64;

/// splitmix64 stream; good enough statistical quality for test data.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

/// Random real field with all modes |k_axis| <= band, given parity, and the
/// requested L^2 norm (unless the draw is identically zero).
pub fn random_band_limited(
    grid: Grid,
    band: i64,
    parity: Parity,
    l2_norm: f64,
    seed: u64,
) -> SpectralField {
    let mut rng = SplitMix64::new(seed);
    let mut field = SpectralField::zeros(grid, Parity::None);
    let bx = band.min(grid.nx as i64 / 2 - 1);
    let by = band.min(grid.ny as i64 / 2 - 1);
    let bz = band.min(grid.nz as i64 / 2 - 1);
    for kx in -bx..=bx {
        for ky in -by..=by {
            for kz in -bz..=bz {
                // fill a half-space; set_mode_pair writes the conjugate mode
                if (kx, ky, kz) < (0, 0, 0) {
                    continue;
                }
                let c = Complex64::new(rng.next_f64(), rng.next_f64());
                field.set_mode_pair(kx, ky, kz, c);
            }
        }
    }
    // the zero mode must be real for a real field
    let mean = field.mode(0, 0, 0);
    field.set_mode_pair(0, 0, 0, Complex64::new(mean.re, 0.0));
    let mut field = match parity {
        Parity::None => field,
        p => field.project_parity(p),
    };
    let norm = field.l2_norm();
    if norm > 0.0 {
        field = field.scaled(l2_norm / norm);
    }
    field
}

/// Random band-limited flow state with the correct symmetry classes.
pub fn random_cf_state(
    grid: Grid,
    band: i64,
    amplitude: f64,
    epsilon: f64,
    seed: u64,
) -> CfState {
    let sigma = random_band_limited(grid, band, Parity::EvenZ, amplitude, seed ^ 0x5163);
    let v1 = random_band_limited(grid, band, Parity::EvenZ, amplitude, seed ^ 0x7631);
    let v2 = random_band_limited(grid, band, Parity::EvenZ, amplitude, seed ^ 0x7632);
    let w = random_band_limited(grid, band, Parity::OddZ, amplitude, seed ^ 0x9d01);
    CfState::new(sigma, v1, v2, w, epsilon, 0.0).expect("valid random state")
}
