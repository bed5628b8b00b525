use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{weighted_norm, ScalarField, VelocityGrid, WeightedNormSpec};
use crate::error::{LandauError, Result};

/// Shape of the random test fields: Gaussian envelope of the given width
/// times a random trigonometric mix with integer wavenumbers up to
/// `bandlimit` (in units of `pi / R`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldProfile {
    pub bandlimit: u32,
    pub envelope_width: f64,
}

impl Default for FieldProfile {
    fn default() -> Self {
        Self {
            bandlimit: 4,
            envelope_width: 1.2,
        }
    }
}

const MODES: usize = 24;

/// Deterministic random field with unit discrete `L^2` norm.
///
/// The random draws do not depend on `N`, so the same seed samples the same
/// continuous function on every grid with the same half-width.
pub fn random_field(grid: VelocityGrid, seed: u64, profile: FieldProfile) -> Result<ScalarField> {
    if 2 * profile.bandlimit as usize >= grid.n() {
        return Err(LandauError::InvalidArgument(format!(
            "bandlimit {} must be < N/2 = {}",
            profile.bandlimit,
            grid.n() / 2
        )));
    }
    if !(profile.envelope_width > 0.0) {
        return Err(LandauError::InvalidArgument("envelope width must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = profile.bandlimit as i64;
    let base = std::f64::consts::PI / grid.half_width();
    let modes: Vec<([f64; 3], f64, f64)> = (0..MODES)
        .map(|_| {
            let k = [0; 3].map(|_: i32| rng.random_range(-b..=b) as f64 * base);
            let amp: f64 = rng.sample(StandardNormal);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            (k, amp, phase)
        })
        .collect();
    let inv_w2 = 1.0 / (2.0 * profile.envelope_width * profile.envelope_width);
    let f = ScalarField::from_fn(grid, |v| {
        let env = (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * inv_w2).exp();
        let mix: f64 = modes
            .iter()
            .map(|(k, a, p)| a * (k[0] * v[0] + k[1] * v[1] + k[2] * v[2] + p).cos())
            .sum();
        env * mix
    });
    normalize(f)
}

/// Unit-norm wave packet `exp(-|v - c|^2 / (2 s^2)) cos(k . (v - c))`.
pub fn packet_field(grid: VelocityGrid, center: [f64; 3], width: f64, wavevector: [f64; 3]) -> Result<ScalarField> {
    let inv = 1.0 / (2.0 * width * width);
    let f = ScalarField::from_fn(grid, |v| {
        let d = [v[0] - center[0], v[1] - center[1], v[2] - center[2]];
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        (-r2 * inv).exp() * (wavevector[0] * d[0] + wavevector[1] * d[1] + wavevector[2] * d[2]).cos()
    });
    normalize(f)
}

fn normalize(f: ScalarField) -> Result<ScalarField> {
    let n = weighted_norm(&f, WeightedNormSpec::l2(0.0));
    if !(n > 0.0 && n.is_finite()) {
        return Err(LandauError::Degenerate {
            context: "random field normalization".into(),
            value: n,
        });
    }
    Ok(f.scaled(1.0 / n))
}
