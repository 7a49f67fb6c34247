#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use hetquant::domain::preference_order;
use hetquant::objective::{feasible_levels, objective_of};
use hetquant::synth::{generate_profiles, SynthConfig};
use hetquant::{
    dominates, AccuracyComposition, Assignment, LevelSet, MeasuredPoint, ModelProfile,
    ObjectiveVector, PipelineProfile, Thresholds,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> Vec<u8> {
    std::fs::read(fixture(name)).unwrap()
}

const STANDARD: [&str; 5] = ["fp-16", "int-8", "int-4", "int-2", "bin-1"];

fn random_levels(rng: &mut ChaCha8Rng) -> LevelSet {
    let k = rng.gen_range(1..=5);
    let mut names = STANDARD.to_vec();
    names.shuffle(rng);
    LevelSet::from_known(&names[..k]).unwrap()
}

/// Random thresholds for roughly half the models; each stays satisfiable.
fn random_thresholds(rng: &mut ChaCha8Rng, models: &[ModelProfile]) -> Vec<Thresholds> {
    let mut out = Vec::new();
    for m in models {
        if !rng.gen_bool(0.5) {
            continue;
        }
        let accs: Vec<f64> = m.points.values().map(|p| p.accuracy).collect();
        let lats: Vec<f64> = m.points.values().map(|p| p.latency_ms).collect();
        let floor = accs[rng.gen_range(0..accs.len())] + rng.gen_range(-0.01..0.01);
        let ceiling = lats[rng.gen_range(0..lats.len())] * rng.gen_range(0.9..1.1);
        let t = Thresholds::new(m.model_id.clone(), floor.clamp(0.0, 1.0), ceiling).unwrap();
        if !feasible_levels(m, Some(&t)).is_empty() {
            out.push(t);
        }
    }
    out
}

/// Synthetic instance with N in 1..=4 and |Q| in 1..=5. Some measurements are
/// dropped and about half the instances carry thresholds.
pub fn synthetic_instance(seed: u64) -> PipelineProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_1a7e);
    let levels = random_levels(&mut rng);
    let mut cfg = SynthConfig::new(rng.gen_range(1..=4), levels, seed);
    cfg.acc_fp32 = rng.gen_range(0.7..0.99);
    cfg.degr_per_halving = rng.gen_range(0.0..0.06);
    cfg.lat_fp32_ms = rng.gen_range(50.0..500.0);
    cfg.speed_exponent = rng.gen_range(0.5..1.5);
    // A quarter of the instances are noiseless, so all models share one curve.
    cfg.noise_amplitude = if rng.gen_bool(0.25) {
        0.0
    } else {
        rng.gen_range(0.0..0.1)
    };
    let base = generate_profiles(&cfg).unwrap();

    let models: Vec<ModelProfile> = base
        .models()
        .iter()
        .map(|m| {
            let mut points = m.points.clone();
            while points.len() > 1 && rng.gen_bool(0.2) {
                let key = points
                    .keys()
                    .nth(rng.gen_range(0..points.len()))
                    .unwrap()
                    .clone();
                points.remove(&key);
            }
            ModelProfile::new(m.model_id.clone(), points)
        })
        .collect();
    let thresholds = if rng.gen_bool(0.5) {
        random_thresholds(&mut rng, &models)
    } else {
        Vec::new()
    };
    PipelineProfile::new(
        base.name(),
        base.level_set().clone(),
        models,
        thresholds,
        AccuracyComposition::Product,
        None,
    )
    .unwrap()
}

/// Instance on a coarse value grid, so equal sums and exact ties are common.
pub fn grid_instance(seed: u64) -> PipelineProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let levels = random_levels(&mut rng);
    let n = rng.gen_range(1..=4);
    let ids = ["d", "b", "a", "c"];
    let models: Vec<ModelProfile> = (0..n)
        .map(|i| {
            let mut points = BTreeMap::new();
            for l in levels.levels() {
                if points.is_empty() || rng.gen_bool(0.85) {
                    let acc = rng.gen_range(10..=20) as f64 / 20.0;
                    let lat = rng.gen_range(1..=6) as f64 * 10.0;
                    points.insert(l.name.clone(), MeasuredPoint::new(acc, lat, None).unwrap());
                }
            }
            ModelProfile::new(ids[i], points)
        })
        .collect();
    let thresholds = if rng.gen_bool(0.5) {
        random_thresholds(&mut rng, &models)
    } else {
        Vec::new()
    };
    PipelineProfile::new(
        format!("grid-{seed}"),
        levels,
        models,
        thresholds,
        AccuracyComposition::Product,
        None,
    )
    .unwrap()
}

/// Independent reference front: recursive enumeration, `objective_of` for
/// every assignment, quadratic dominance filter, preference order for ties.
pub fn naive_front(p: &PipelineProfile) -> Vec<(ObjectiveVector, Assignment)> {
    fn walk(p: &PipelineProfile, i: usize, current: Assignment, out: &mut Vec<Assignment>) {
        if i == p.models().len() {
            out.push(current);
            return;
        }
        let m = &p.models()[i];
        for level in feasible_levels(m, p.thresholds(&m.model_id)) {
            walk(p, i + 1, current.with(&m.model_id, &level), out);
        }
    }
    let mut all = Vec::new();
    walk(p, 0, Assignment::default(), &mut all);
    let scored: Vec<(ObjectiveVector, Assignment)> = all
        .into_iter()
        .map(|a| (objective_of(&a, p).unwrap(), a))
        .collect();
    let mut front: Vec<(ObjectiveVector, Assignment)> = scored
        .iter()
        .filter(|(o, a)| {
            !scored.iter().any(|(o2, a2)| {
                dominates(o2, o) || (o2 == o && preference_order((o2, a2), (o, a)).is_lt())
            })
        })
        .cloned()
        .collect();
    front.sort_by(|x, y| x.0.latency_sum_ms.total_cmp(&y.0.latency_sum_ms));
    front
}
