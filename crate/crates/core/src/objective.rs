//! Feasibility, normalization, scalarization and evaluation of assignments.

use std::collections::BTreeSet;

use crate::domain::{
    AccuracyComposition, Assignment, MeasuredPoint, ModelProfile, ObjectiveVector, PipelineProfile,
    QuantLevel, Thresholds,
};
use crate::error::{Error, Result};

/// A level's accuracy and latency rescaled to `[0, 1]` across the model's
/// measured levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedPoint {
    pub norm_accuracy: f64,
    pub norm_latency: f64,
}

/// Affine rescaling onto `[0, 1]`: the minimum maps to 0 and the maximum to 1.
/// A constant series maps to all zeros.
pub fn min_max_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::invalid("empty series"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value"));
    }
    let (lo, hi) = bounds(values.iter().copied());
    Ok(values.iter().map(|&v| scale(v, lo, hi)).collect())
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn scale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Levels of `profile` that pass the threshold disjunction: accuracy at or
/// above the floor, or latency at or below the ceiling. Without thresholds
/// every measured level is feasible.
pub fn feasible_levels(
    profile: &ModelProfile,
    thresholds: Option<&Thresholds>,
) -> BTreeSet<String> {
    profile
        .points
        .iter()
        .filter(|(_, p)| is_feasible(p, thresholds))
        .map(|(name, _)| name.clone())
        .collect()
}

pub fn is_feasible(point: &MeasuredPoint, thresholds: Option<&Thresholds>) -> bool {
    match thresholds {
        None => true,
        Some(t) => point.accuracy >= t.min_accuracy || point.latency_ms <= t.max_latency_ms,
    }
}

/// Feasible levels of the model at `index`, in level-set order.
pub fn feasible_points(
    pipeline: &PipelineProfile,
    index: usize,
) -> Vec<(&QuantLevel, &MeasuredPoint)> {
    let model = &pipeline.models()[index];
    let t = pipeline.thresholds(&model.model_id);
    model
        .measured(pipeline.level_set())
        .filter(|(_, p)| is_feasible(p, t))
        .collect()
}

/// Normalizes `level`'s accuracy and latency against the model's measured
/// levels.
pub fn normalized_point(profile: &ModelProfile, level: &str) -> Result<NormalizedPoint> {
    let point = profile
        .point(level)
        .ok_or_else(|| Error::invalid(format!("unmeasured level {}/{level}", profile.model_id)))?;
    let (alo, ahi) = bounds(profile.points.values().map(|p| p.accuracy));
    let (llo, lhi) = bounds(profile.points.values().map(|p| p.latency_ms));
    Ok(NormalizedPoint {
        norm_accuracy: scale(point.accuracy, alo, ahi),
        norm_latency: scale(point.latency_ms, llo, lhi),
    })
}

/// Weighted-sum score of one level, lower is better:
/// `lambda * norm_latency - (1 - lambda) * norm_accuracy`.
pub fn model_score(profile: &ModelProfile, level: &str, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let n = normalized_point(profile, level)?;
    Ok(lambda * n.norm_latency - (1.0 - lambda) * n.norm_accuracy)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )))
    }
}

/// Pipeline-wide normalization for weighted solving.
///
/// Each model's contribution is its offset from its own minimum, divided by
/// the span of the pipeline totals (sum of per-model spans). The summed score
/// is then the min-max normalized pipeline latency and accuracy, so one
/// lambda weighs the same trade-off in every model. For a single model this
/// coincides with [`model_score`].
#[derive(Debug, Clone)]
pub struct PipelineScale {
    accuracy_min: Vec<f64>,
    latency_min: Vec<f64>,
    accuracy_span: f64,
    latency_span: f64,
}

impl PipelineScale {
    pub fn new(pipeline: &PipelineProfile) -> Self {
        let mut scale = PipelineScale {
            accuracy_min: Vec::with_capacity(pipeline.models().len()),
            latency_min: Vec::with_capacity(pipeline.models().len()),
            accuracy_span: 0.0,
            latency_span: 0.0,
        };
        for model in pipeline.models() {
            let (alo, ahi) = bounds(model.points.values().map(|p| p.accuracy));
            let (llo, lhi) = bounds(model.points.values().map(|p| p.latency_ms));
            scale.accuracy_min.push(alo);
            scale.latency_min.push(llo);
            scale.accuracy_span += ahi - alo;
            scale.latency_span += lhi - llo;
        }
        scale
    }

    /// Score contribution of `point` for the model at `index`; lower is better.
    pub fn score(&self, index: usize, point: &MeasuredPoint, lambda: f64) -> f64 {
        let acc = ratio(
            point.accuracy - self.accuracy_min[index],
            self.accuracy_span,
        );
        let lat = ratio(
            point.latency_ms - self.latency_min[index],
            self.latency_span,
        );
        lambda * lat - (1.0 - lambda) * acc
    }
}

fn ratio(offset: f64, span: f64) -> f64 {
    if span > 0.0 {
        offset / span
    } else {
        0.0
    }
}

/// Chosen points in pipeline order, validating the assignment.
pub fn chosen_points<'a>(
    assignment: &Assignment,
    pipeline: &'a PipelineProfile,
) -> Result<Vec<&'a MeasuredPoint>> {
    pipeline.check_assignment(assignment)?;
    Ok(pipeline
        .models()
        .iter()
        .map(|m| {
            let level = assignment.level_of(&m.model_id).expect("checked");
            m.point(level).expect("checked")
        })
        .collect())
}

/// Sums selected accuracies and latencies over the pipeline, in execution
/// order starting from zero.
pub fn objective_of(
    assignment: &Assignment,
    pipeline: &PipelineProfile,
) -> Result<ObjectiveVector> {
    Ok(sum_points(chosen_points(assignment, pipeline)?))
}

pub(crate) fn sum_points<'a>(
    points: impl IntoIterator<Item = &'a MeasuredPoint>,
) -> ObjectiveVector {
    points
        .into_iter()
        .fold(ObjectiveVector::default(), |acc, p| acc + point_vector(p))
}

pub(crate) fn point_vector(p: &MeasuredPoint) -> ObjectiveVector {
    ObjectiveVector::new(p.accuracy, p.latency_ms)
}

/// End-to-end accuracy under the pipeline's composition rule.
pub fn pipeline_accuracy(assignment: &Assignment, pipeline: &PipelineProfile) -> Result<f64> {
    pipeline_accuracy_with(assignment, pipeline, pipeline.accuracy_composition())
}

pub fn pipeline_accuracy_with(
    assignment: &Assignment,
    pipeline: &PipelineProfile,
    mode: AccuracyComposition,
) -> Result<f64> {
    let accs: Vec<f64> = chosen_points(assignment, pipeline)?
        .iter()
        .map(|p| p.accuracy)
        .collect();
    Ok(compose_accuracy(&accs, mode))
}

/// Combines per-model accuracies. `accuracies` must be nonempty.
pub fn compose_accuracy(accuracies: &[f64], mode: AccuracyComposition) -> f64 {
    match mode {
        AccuracyComposition::Product => accuracies.iter().product(),
        AccuracyComposition::Min => accuracies.iter().copied().fold(f64::INFINITY, f64::min),
        AccuracyComposition::Mean => accuracies.iter().sum::<f64>() / accuracies.len() as f64,
    }
}

/// Models run sequentially, so pipeline latency is the latency sum.
pub fn pipeline_latency_ms(assignment: &Assignment, pipeline: &PipelineProfile) -> Result<f64> {
    Ok(objective_of(assignment, pipeline)?.latency_sum_ms)
}

pub fn speedup(baseline_latency_ms: f64, quantized_latency_ms: f64) -> Result<f64> {
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(baseline_latency_ms) || !positive(quantized_latency_ms) {
        return Err(Error::invalid(format!(
            "speedup needs positive latencies, got {baseline_latency_ms} and {quantized_latency_ms}"
        )));
    }
    Ok(baseline_latency_ms / quantized_latency_ms)
}
