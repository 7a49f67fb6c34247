//! Value types shared by every other module: quantization levels, measured
//! profiles, assignments, objective vectors and the Pareto front.
//!
//! Everything here is an immutable value once constructed. Constructors
//! validate their invariants; downstream code relies on them.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named numeric precision, e.g. `int-8` at 8 bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantLevel {
    pub name: String,
    pub bits: u32,
}

/// Levels with a well-known name and bit-width.
const KNOWN_LEVELS: &[(&str, u32)] = &[
    ("fp-32", 32),
    ("fp-16", 16),
    ("int-8", 8),
    ("int-4", 4),
    ("int-2", 2),
    ("bin-1", 1),
];

impl QuantLevel {
    pub fn new(name: impl Into<String>, bits: u32) -> Result<Self> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(Error::invalid("level name must be nonempty"));
        }
        if bits == 0 {
            return Err(Error::invalid(format!("level {name}: bits must be >= 1")));
        }
        Ok(QuantLevel { name, bits })
    }

    /// Looks up one of the well-known levels (`fp-32`, `fp-16`, `int-8`,
    /// `int-4`, `int-2`, `bin-1`) by name.
    pub fn known(name: &str) -> Option<Self> {
        KNOWN_LEVELS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|&(n, bits)| QuantLevel {
                name: n.to_string(),
                bits,
            })
    }
}

impl fmt::Display for QuantLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.bits)
    }
}

/// Nonempty set of levels, ordered by bit-width descending (then by name).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSet {
    levels: Vec<QuantLevel>,
}

impl LevelSet {
    pub fn new(mut levels: Vec<QuantLevel>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("level set must be nonempty"));
        }
        let mut seen = BTreeSet::new();
        for level in &levels {
            if level.bits == 0 || level.name.trim().is_empty() {
                return Err(Error::invalid(format!("invalid level {level}")));
            }
            if !seen.insert(level.name.as_str()) {
                return Err(Error::invalid(format!("duplicate {}", level.name)));
            }
        }
        levels.sort_by(|a, b| b.bits.cmp(&a.bits).then_with(|| a.name.cmp(&b.name)));
        Ok(LevelSet { levels })
    }

    /// The search set used throughout the examples:
    /// `fp-16, int-8, int-4, int-2, bin-1`.
    pub fn standard() -> Self {
        Self::from_known(&["fp-16", "int-8", "int-4", "int-2", "bin-1"]).unwrap()
    }

    /// Builds a set from well-known level names.
    pub fn from_known(names: &[&str]) -> Result<Self> {
        let levels = names
            .iter()
            .map(|n| {
                QuantLevel::known(n).ok_or_else(|| Error::invalid(format!("unknown level {n}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels)
    }

    pub fn levels(&self) -> &[QuantLevel] {
        &self.levels
    }

    pub fn get(&self, name: &str) -> Option<&QuantLevel> {
        self.levels.iter().find(|l| l.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.levels.iter().map(|l| l.name.as_str())
    }
}

/// Accuracy, latency and (optionally) size measured for one model at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredPoint {
    /// Fraction in `[0, 1]`.
    pub accuracy: f64,
    pub latency_ms: f64,
    /// Reporting metadata only; never part of the objective.
    pub size_kb: Option<f64>,
}

impl MeasuredPoint {
    pub fn new(accuracy: f64, latency_ms: f64, size_kb: Option<f64>) -> Result<Self> {
        let point = MeasuredPoint {
            accuracy,
            latency_ms,
            size_kb,
        };
        point.check().map_err(Error::Invalid)?;
        Ok(point)
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(self.accuracy.is_finite() && (0.0..=1.0).contains(&self.accuracy)) {
            return Err("accuracy out of range".into());
        }
        if !(self.latency_ms.is_finite() && self.latency_ms > 0.0) {
            return Err("latency_ms must be positive".into());
        }
        if let Some(size) = self.size_kb {
            if !(size.is_finite() && size > 0.0) {
                return Err("size_kb must be positive".into());
            }
        }
        Ok(())
    }
}

/// Measurements of one model, keyed by level name.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelProfile {
    pub model_id: String,
    pub points: BTreeMap<String, MeasuredPoint>,
}

impl ModelProfile {
    pub fn new(model_id: impl Into<String>, points: BTreeMap<String, MeasuredPoint>) -> Self {
        ModelProfile {
            model_id: model_id.into(),
            points,
        }
    }

    pub fn point(&self, level: &str) -> Option<&MeasuredPoint> {
        self.points.get(level)
    }

    /// Measured levels in level-set order (bits descending).
    pub fn measured<'a>(
        &'a self,
        level_set: &'a LevelSet,
    ) -> impl Iterator<Item = (&'a QuantLevel, &'a MeasuredPoint)> + 'a {
        level_set
            .levels()
            .iter()
            .filter_map(move |l| self.points.get(&l.name).map(|p| (l, p)))
    }
}

/// Per-model accuracy floor and latency ceiling.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    pub model_id: String,
    pub min_accuracy: f64,
    pub max_latency_ms: f64,
}

impl Thresholds {
    pub fn new(
        model_id: impl Into<String>,
        min_accuracy: f64,
        max_latency_ms: f64,
    ) -> Result<Self> {
        let model_id = model_id.into();
        if !(min_accuracy.is_finite() && (0.0..=1.0).contains(&min_accuracy)) {
            return Err(Error::invalid(format!(
                "min_accuracy out of range for {model_id}"
            )));
        }
        if !(max_latency_ms.is_finite() && max_latency_ms > 0.0) {
            return Err(Error::invalid(format!(
                "max_latency_ms must be positive for {model_id}"
            )));
        }
        Ok(Thresholds {
            model_id,
            min_accuracy,
            max_latency_ms,
        })
    }
}

/// How per-model accuracies combine into an end-to-end pipeline accuracy.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum AccuracyComposition {
    #[default]
    Product,
    Min,
    Mean,
}

impl AccuracyComposition {
    pub const ALL: [AccuracyComposition; 3] = [Self::Product, Self::Min, Self::Mean];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Product => "product",
            Self::Min => "min",
            Self::Mean => "mean",
        }
    }
}

impl std::str::FromStr for AccuracyComposition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(Self::Product),
            "min" => Ok(Self::Min),
            "mean" => Ok(Self::Mean),
            other => Err(Error::invalid(format!(
                "unknown accuracy composition {other}"
            ))),
        }
    }
}

impl fmt::Display for AccuracyComposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A validated multi-model pipeline: levels, per-model measurements in
/// execution order, optional thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineProfile {
    name: String,
    level_set: LevelSet,
    models: Vec<ModelProfile>,
    thresholds: BTreeMap<String, Thresholds>,
    accuracy_composition: AccuracyComposition,
    baseline_latency_ms: Option<f64>,
}

impl PipelineProfile {
    pub fn new(
        name: impl Into<String>,
        level_set: LevelSet,
        models: Vec<ModelProfile>,
        thresholds: Vec<Thresholds>,
        accuracy_composition: AccuracyComposition,
        baseline_latency_ms: Option<f64>,
    ) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::invalid("pipeline must contain at least one model"));
        }
        let mut ids = BTreeSet::new();
        for model in &models {
            if model.model_id.trim().is_empty() {
                return Err(Error::invalid("model id must be nonempty"));
            }
            if !ids.insert(model.model_id.as_str()) {
                return Err(Error::invalid(format!("duplicate {}", model.model_id)));
            }
            if model.points.is_empty() {
                return Err(Error::invalid(format!(
                    "model {} has no measured levels",
                    model.model_id
                )));
            }
            for (level, point) in &model.points {
                if !level_set.contains(level) {
                    return Err(Error::invalid(format!(
                        "unknown level {}/{level}",
                        model.model_id
                    )));
                }
                point
                    .check()
                    .map_err(|e| Error::invalid(format!("{e} for {}/{level}", model.model_id)))?;
            }
        }
        let mut by_model = BTreeMap::new();
        for t in thresholds {
            if !ids.contains(t.model_id.as_str()) {
                return Err(Error::invalid(format!(
                    "unknown model in thresholds: {}",
                    t.model_id
                )));
            }
            let t = Thresholds::new(t.model_id, t.min_accuracy, t.max_latency_ms)?;
            if by_model.contains_key(&t.model_id) {
                return Err(Error::invalid(format!("duplicate {}", t.model_id)));
            }
            by_model.insert(t.model_id.clone(), t);
        }
        if let Some(b) = baseline_latency_ms {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::invalid("baseline_latency_ms must be positive"));
            }
        }
        Ok(PipelineProfile {
            name: name.into(),
            level_set,
            models,
            thresholds: by_model,
            accuracy_composition,
            baseline_latency_ms,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn level_set(&self) -> &LevelSet {
        &self.level_set
    }

    /// Models in execution order.
    pub fn models(&self) -> &[ModelProfile] {
        &self.models
    }

    pub fn model(&self, id: &str) -> Option<&ModelProfile> {
        self.models.iter().find(|m| m.model_id == id)
    }

    pub fn thresholds(&self, model_id: &str) -> Option<&Thresholds> {
        self.thresholds.get(model_id)
    }

    pub fn all_thresholds(&self) -> impl Iterator<Item = &Thresholds> {
        self.thresholds.values()
    }

    pub fn accuracy_composition(&self) -> AccuracyComposition {
        self.accuracy_composition
    }

    pub fn baseline_latency_ms(&self) -> Option<f64> {
        self.baseline_latency_ms
    }

    pub fn with_composition(mut self, composition: AccuracyComposition) -> Self {
        self.accuracy_composition = composition;
        self
    }

    pub fn with_baseline_latency_ms(mut self, baseline: Option<f64>) -> Result<Self> {
        if let Some(b) = baseline {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::invalid("baseline_latency_ms must be positive"));
            }
        }
        self.baseline_latency_ms = baseline;
        Ok(self)
    }

    /// Replaces all thresholds, re-validating references.
    pub fn with_thresholds(self, thresholds: Vec<Thresholds>) -> Result<Self> {
        PipelineProfile::new(
            self.name,
            self.level_set,
            self.models,
            thresholds,
            self.accuracy_composition,
            self.baseline_latency_ms,
        )
    }

    /// Checks that `assignment` picks exactly one measured level for every
    /// model and mentions no other model.
    pub fn check_assignment(&self, assignment: &Assignment) -> Result<()> {
        for model_id in assignment.choices.keys() {
            if self.model(model_id).is_none() {
                return Err(Error::invalid(format!(
                    "unknown model {model_id} in assignment"
                )));
            }
        }
        for model in &self.models {
            let level = assignment.level_of(&model.model_id).ok_or_else(|| {
                Error::invalid(format!("assignment has no level for {}", model.model_id))
            })?;
            if model.point(level).is_none() {
                return Err(Error::invalid(format!(
                    "unmeasured level {}/{level}",
                    model.model_id
                )));
            }
        }
        Ok(())
    }
}

/// One chosen level per model: the one-hot rows of the decision matrix.
///
/// Ordering is lexicographic over `(model_id, level)` pairs with model ids
/// sorted, which is the final tie-breaker everywhere.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    pub choices: BTreeMap<String, String>,
}

impl Assignment {
    pub fn from_pairs<I, M, L>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (M, L)>,
        M: Into<String>,
        L: Into<String>,
    {
        Assignment {
            choices: pairs
                .into_iter()
                .map(|(m, l)| (m.into(), l.into()))
                .collect(),
        }
    }

    pub fn level_of(&self, model_id: &str) -> Option<&str> {
        self.choices.get(model_id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Copy of `self` with one more (or replaced) choice.
    pub fn with(&self, model_id: &str, level: &str) -> Self {
        let mut next = self.clone();
        next.choices.insert(model_id.to_string(), level.to_string());
        next
    }
}

/// Summed accuracy and summed latency of an assignment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub accuracy_sum: f64,
    pub latency_sum_ms: f64,
}

impl ObjectiveVector {
    pub fn new(accuracy_sum: f64, latency_sum_ms: f64) -> Self {
        ObjectiveVector {
            accuracy_sum,
            latency_sum_ms,
        }
    }

    pub fn dominates(&self, other: &ObjectiveVector) -> bool {
        dominates(self, other)
    }
}

impl std::ops::Add for ObjectiveVector {
    type Output = ObjectiveVector;

    fn add(self, rhs: ObjectiveVector) -> ObjectiveVector {
        ObjectiveVector {
            accuracy_sum: self.accuracy_sum + rhs.accuracy_sum,
            latency_sum_ms: self.latency_sum_ms + rhs.latency_sum_ms,
        }
    }
}

/// `a` is no worse than `b` in both objectives (accuracy up, latency down)
/// and strictly better in at least one.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    a.accuracy_sum >= b.accuracy_sum
        && a.latency_sum_ms <= b.latency_sum_ms
        && (a.accuracy_sum > b.accuracy_sum || a.latency_sum_ms < b.latency_sum_ms)
}

/// The total preference order: higher accuracy first, then lower latency,
/// then the smaller assignment. `Less` means "preferred".
pub fn preference_order(
    a: (&ObjectiveVector, &Assignment),
    b: (&ObjectiveVector, &Assignment),
) -> Ordering {
    b.0.accuracy_sum
        .total_cmp(&a.0.accuracy_sum)
        .then_with(|| a.0.latency_sum_ms.total_cmp(&b.0.latency_sum_ms))
        .then_with(|| a.1.cmp(b.1))
}

/// Nondominated subset of `items`, sorted by latency ascending. Among items
/// with identical objective vectors only the one with the smallest key
/// survives. The result depends only on the set of items, not their order.
pub(crate) fn prune_exact<K: Ord>(
    mut items: Vec<(ObjectiveVector, K)>,
) -> Vec<(ObjectiveVector, K)> {
    items.sort_by(|a, b| {
        a.0.latency_sum_ms
            .total_cmp(&b.0.latency_sum_ms)
            .then_with(|| b.0.accuracy_sum.total_cmp(&a.0.accuracy_sum))
            .then_with(|| a.1.cmp(&b.1))
    });
    let mut kept: Vec<(ObjectiveVector, K)> = Vec::with_capacity(items.len().min(64));
    for item in items {
        // Every earlier item has latency <= this one.
        if kept
            .last()
            .is_none_or(|last| item.0.accuracy_sum > last.0.accuracy_sum)
        {
            kept.push(item);
        }
    }
    kept
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontEntry {
    pub objective: ObjectiveVector,
    pub assignment: Assignment,
}

impl FrontEntry {
    pub fn new(objective: ObjectiveVector, assignment: Assignment) -> Self {
        FrontEntry {
            objective,
            assignment,
        }
    }
}

/// Nondominated entries sorted by latency ascending; accuracy is strictly
/// increasing along the front.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParetoFront {
    entries: Vec<FrontEntry>,
}

impl ParetoFront {
    /// Prunes dominated entries, and keeps only the preferred assignment
    /// among entries with identical objective vectors.
    pub fn from_entries(entries: Vec<FrontEntry>) -> Self {
        let items = entries
            .into_iter()
            .map(|e| (e.objective, e.assignment))
            .collect();
        ParetoFront {
            entries: prune_exact(items)
                .into_iter()
                .map(|(objective, assignment)| FrontEntry::new(objective, assignment))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[FrontEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FrontEntry> {
        self.entries.iter()
    }

    pub fn into_entries(self) -> Vec<FrontEntry> {
        self.entries
    }

    /// Entry with the highest accuracy (last along the front).
    pub fn most_accurate(&self) -> Option<&FrontEntry> {
        self.entries.last()
    }

    /// Entry with the lowest latency (first along the front).
    pub fn fastest(&self) -> Option<&FrontEntry> {
        self.entries.first()
    }
}

impl<'a> IntoIterator for &'a ParetoFront {
    type Item = &'a FrontEntry;
    type IntoIter = std::slice::Iter<'a, FrontEntry>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}
