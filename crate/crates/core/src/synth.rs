//! Seeded synthetic pipelines for tests and benchmarks.
//!
//! Accuracy falls by a fixed amount per halving of bit-width and latency
//! scales with a power of the bit-width ratio to 32 bits. Optional bounded
//! noise is drawn from a seeded ChaCha stream and then clipped so both
//! curves stay monotone in bit-width.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{AccuracyComposition, LevelSet, MeasuredPoint, ModelProfile, PipelineProfile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_models: usize,
    pub level_set: LevelSet,
    pub seed: u64,
    pub acc_fp32: f64,
    pub degr_per_halving: f64,
    pub lat_fp32_ms: f64,
    pub speed_exponent: f64,
    pub noise_amplitude: f64,
}

impl SynthConfig {
    pub fn new(n_models: usize, level_set: LevelSet, seed: u64) -> Self {
        SynthConfig {
            n_models,
            level_set,
            seed,
            acc_fp32: 0.95,
            degr_per_halving: 0.02,
            lat_fp32_ms: 400.0,
            speed_exponent: 1.0,
            noise_amplitude: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::invalid(format!("synth config: {msg}")));
        if self.n_models == 0 {
            return bad("n_models must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.acc_fp32) {
            return bad("acc_fp32 must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.degr_per_halving) {
            return bad("degr_per_halving must lie in [0, 1]");
        }
        if !(self.lat_fp32_ms.is_finite() && self.lat_fp32_ms > 0.0) {
            return bad("lat_fp32_ms must be positive");
        }
        if !(self.speed_exponent.is_finite() && self.speed_exponent > 0.0) {
            return bad("speed_exponent must be positive");
        }
        if !(0.0..1.0).contains(&self.noise_amplitude) {
            return bad("noise_amplitude must lie in [0, 1)");
        }
        let min_bits = self
            .level_set
            .levels()
            .iter()
            .map(|l| l.bits)
            .min()
            .unwrap_or(32);
        if self.acc_fp32 - self.degr_per_halving * halvings(min_bits) < 0.0 {
            return bad("accuracy at the lowest bit-width would fall below 0");
        }
        Ok(())
    }
}

/// Number of halvings from 32 bits down to `bits` (negative above 32).
fn halvings(bits: u32) -> f64 {
    (32.0 / bits as f64).log2()
}

pub fn generate_profiles(cfg: &SynthConfig) -> Result<PipelineProfile> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let amp = cfg.noise_amplitude;
    let mut noise = move || {
        if amp > 0.0 {
            rng.gen_range(-amp..=amp)
        } else {
            0.0
        }
    };

    let models = (0..cfg.n_models)
        .map(|i| {
            let mut points = BTreeMap::new();
            let mut prev: Option<(f64, f64)> = None;
            // Level-set order is bits descending, so clipping against the
            // previous level keeps both curves nonincreasing.
            for level in cfg.level_set.levels() {
                let ratio = level.bits as f64 / 32.0;
                let mut acc = (cfg.acc_fp32 - cfg.degr_per_halving * halvings(level.bits)
                    + noise())
                .clamp(0.0, 1.0);
                let mut lat = cfg.lat_fp32_ms * ratio.powf(cfg.speed_exponent) * (1.0 + noise());
                if let Some((pa, pl)) = prev {
                    acc = acc.min(pa);
                    lat = lat.min(pl);
                }
                prev = Some((acc, lat));
                let point = MeasuredPoint::new(acc, lat, None)?;
                points.insert(level.name.clone(), point);
            }
            Ok(ModelProfile::new(format!("model-{}", i + 1), points))
        })
        .collect::<Result<Vec<_>>>()?;

    PipelineProfile::new(
        format!("synthetic-{}", cfg.seed),
        cfg.level_set.clone(),
        models,
        Vec::new(),
        AccuracyComposition::Product,
        None,
    )
}
