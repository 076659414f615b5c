use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use tangent_geom::{ChartMetric, Epsilon, GeometryError, WeightPair};

use crate::config::SamplingSpec;

/// Fiber vectors shorter than this are skipped for `ε = +1` families.
pub const ZERO_SECTION_EXCLUSION: f64 = 1e-6;

const MAX_ATTEMPTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub index: usize,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

/// Stable per-suite seed: FNV-1a over the suite name, mixed with the run seed.
pub fn suite_seed(seed: u64, suite: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in suite.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash ^ seed.rotate_left(17)
}

/// Generator for the random vectors used while evaluating one sample.
/// Independent of evaluation order, so parallel runs stay reproducible.
pub fn sample_rng(suite_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(suite_seed);
    rng.set_stream(index as u64 + 1);
    rng
}

pub fn random_vector(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Draws `count` points of `T(M)` from the configured chart box and fiber
/// range, keeping only points inside the weight family's domain.
pub fn draw(
    count: usize,
    suite_seed: u64,
    spec: &SamplingSpec,
    base: &ChartMetric,
    weights: &WeightPair,
) -> Result<Vec<Sample>, GeometryError> {
    let m = base.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(suite_seed);
    let [mut lo, hi] = spec.fiber;
    if weights.epsilon() == Epsilon::Plus {
        lo = lo.max(ZERO_SECTION_EXCLUSION);
    }
    let domain = weights.domain();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > MAX_ATTEMPTS * count {
            return Err(GeometryError::Precondition(format!(
                "could not draw sample points inside the domain of `{}` from fiber range [{lo}, {hi}]",
                weights.name()
            )));
        }
        let x: Vec<f64> = (0..m)
            .map(|_| spec.half_width * rng.gen_range(-1.0..=1.0))
            .collect();
        let dir = random_vector(&mut rng, m);
        let norm: f64 = rng.gen_range(lo..=hi);
        if base.check_domain(&x).is_err() {
            continue;
        }
        let g = base.matrix(&x)?;
        let dv = nalgebra::DVector::from_column_slice(&dir);
        let len = dv.dot(&(&g * &dv)).sqrt();
        if len < 1e-3 {
            continue;
        }
        let u: Vec<f64> = dir.iter().map(|d| d * norm / len).collect();
        if !domain.contains(0.5 * norm * norm) {
            continue;
        }
        out.push(Sample {
            index: out.len(),
            x,
            u,
        });
    }
    Ok(out)
}
