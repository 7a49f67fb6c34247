//! Profile documents in, reports/CSV/SVG out.
//!
//! Profile schema (JSON, unknown keys rejected):
//!
//! ```json
//! {
//!   "pipeline": { "name": "...", "models": ["A", "B"],
//!                 "accuracy_composition": "product", "baseline_latency_ms": 4800 },
//!   "levels": [ { "name": "fp-16", "bits": 16 } ],
//!   "profiles": [ { "model": "A", "measurements": [
//!       { "level": "fp-16", "accuracy": 0.88, "latency_ms": 250, "size_kb": 2500 } ] } ],
//!   "thresholds": [ { "model": "A", "min_accuracy": 0.8, "max_latency_ms": 100 } ]
//! }
//! ```
//!
//! `accuracy_composition`, `baseline_latency_ms`, `size_kb` and
//! `thresholds` are optional.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::domain::{
    AccuracyComposition, LevelSet, MeasuredPoint, ModelProfile, ParetoFront, PipelineProfile,
    QuantLevel, Thresholds,
};
use crate::error::{Error, Result};
use crate::objective::{compose_accuracy, min_max_normalize, speedup};
use crate::solver::SolveResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    pub pipeline: PipelineSection,
    pub levels: Vec<LevelEntry>,
    pub profiles: Vec<ProfileEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub thresholds: Vec<ThresholdEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    pub name: String,
    pub models: Vec<String>,
    #[serde(default)]
    pub accuracy_composition: AccuracyComposition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_latency_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelEntry {
    pub name: String,
    pub bits: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEntry {
    pub model: String,
    pub measurements: Vec<MeasurementEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementEntry {
    pub level: String,
    pub accuracy: f64,
    pub latency_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_kb: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdEntry {
    pub model: String,
    pub min_accuracy: f64,
    pub max_latency_ms: f64,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses and validates a profile document.
pub fn parse_profile(text: &[u8]) -> Result<PipelineProfile> {
    let doc: ProfileDocument = serde_json::from_slice(text).map_err(parse_error)?;
    doc.into_pipeline()
}

impl ProfileDocument {
    pub fn into_pipeline(self) -> Result<PipelineProfile> {
        let mut names = BTreeSet::new();
        let mut levels = Vec::with_capacity(self.levels.len());
        for l in self.levels {
            if !names.insert(l.name.clone()) {
                return Err(Error::invalid(format!("duplicate {}", l.name)));
            }
            levels.push(
                QuantLevel::new(&l.name, l.bits)
                    .map_err(|_| Error::invalid(format!("invalid bits for level {}", l.name)))?,
            );
        }
        let level_set = LevelSet::new(levels)?;

        let mut order = BTreeSet::new();
        for id in &self.pipeline.models {
            if !order.insert(id.as_str()) {
                return Err(Error::invalid(format!("duplicate {id}")));
            }
        }

        let mut by_model: BTreeMap<String, BTreeMap<String, MeasuredPoint>> = BTreeMap::new();
        for entry in self.profiles {
            if !order.contains(entry.model.as_str()) {
                return Err(Error::invalid(format!(
                    "unknown model {} in profiles",
                    entry.model
                )));
            }
            if by_model.contains_key(&entry.model) {
                return Err(Error::invalid(format!("duplicate {}", entry.model)));
            }
            let mut points = BTreeMap::new();
            for m in entry.measurements {
                let at = || format!("{}/{}", entry.model, m.level);
                if !level_set.contains(&m.level) {
                    return Err(Error::invalid(format!("unknown level {}", at())));
                }
                if points.contains_key(&m.level) {
                    return Err(Error::invalid(format!("duplicate {}", at())));
                }
                if !(m.accuracy.is_finite() && (0.0..=1.0).contains(&m.accuracy)) {
                    return Err(Error::invalid(format!(
                        "accuracy out of range for {}",
                        at()
                    )));
                }
                if !(m.latency_ms.is_finite() && m.latency_ms > 0.0) {
                    return Err(Error::invalid(format!(
                        "latency_ms must be positive for {}",
                        at()
                    )));
                }
                if m.size_kb.is_some_and(|s| !(s.is_finite() && s > 0.0)) {
                    return Err(Error::invalid(format!(
                        "size_kb must be positive for {}",
                        at()
                    )));
                }
                let point = MeasuredPoint::new(m.accuracy, m.latency_ms, m.size_kb)?;
                points.insert(m.level, point);
            }
            by_model.insert(entry.model, points);
        }

        let models = self
            .pipeline
            .models
            .iter()
            .map(|id| {
                let points = by_model
                    .remove(id)
                    .ok_or_else(|| Error::invalid(format!("missing profile for {id}")))?;
                Ok(ModelProfile::new(id.clone(), points))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut thresholds = Vec::with_capacity(self.thresholds.len());
        for t in self.thresholds {
            if !order.contains(t.model.as_str()) {
                return Err(Error::invalid(format!(
                    "unknown model in thresholds: {}",
                    t.model
                )));
            }
            thresholds.push(Thresholds::new(t.model, t.min_accuracy, t.max_latency_ms)?);
        }

        PipelineProfile::new(
            self.pipeline.name,
            level_set,
            models,
            thresholds,
            self.pipeline.accuracy_composition,
            self.pipeline.baseline_latency_ms,
        )
    }

    pub fn from_pipeline(p: &PipelineProfile) -> Self {
        ProfileDocument {
            pipeline: PipelineSection {
                name: p.name().to_string(),
                models: p.models().iter().map(|m| m.model_id.clone()).collect(),
                accuracy_composition: p.accuracy_composition(),
                baseline_latency_ms: p.baseline_latency_ms(),
            },
            levels: p
                .level_set()
                .levels()
                .iter()
                .map(|l| LevelEntry {
                    name: l.name.clone(),
                    bits: l.bits,
                })
                .collect(),
            profiles: p
                .models()
                .iter()
                .map(|m| ProfileEntry {
                    model: m.model_id.clone(),
                    measurements: m
                        .measured(p.level_set())
                        .map(|(l, pt)| MeasurementEntry {
                            level: l.name.clone(),
                            accuracy: pt.accuracy,
                            latency_ms: pt.latency_ms,
                            size_kb: pt.size_kb,
                        })
                        .collect(),
                })
                .collect(),
            thresholds: p
                .all_thresholds()
                .map(|t| ThresholdEntry {
                    model: t.model_id.clone(),
                    min_accuracy: t.min_accuracy,
                    max_latency_ms: t.max_latency_ms,
                })
                .collect(),
        }
    }
}

/// Serializes a pipeline in the profile schema (pretty JSON, trailing newline).
pub fn emit_profile(pipeline: &PipelineProfile) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&ProfileDocument::from_pipeline(pipeline))
        .expect("profile documents always serialize");
    out.push(b'\n');
    out
}

/// Renders a real with at most 9 significant digits, in plain decimal
/// notation for magnitudes in `[1e-3, 1e9)`.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let mag = v.abs();
    if (1e-3..1e9).contains(&mag) {
        let exp = mag.log10().floor() as i32;
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let s = format!("{v:.8e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const PARETO_CSV_HEADER: &str =
    "assignment,accuracy_sum,latency_sum_ms,pipeline_accuracy,pipeline_latency_ms";

/// One row per front entry, sorted by latency ascending.
pub fn emit_pareto_csv(front: &ParetoFront, pipeline: &PipelineProfile) -> Result<Vec<u8>> {
    if front.is_empty() {
        return Err(Error::invalid("cannot emit an empty front"));
    }
    let mut out = String::new();
    out.push_str(PARETO_CSV_HEADER);
    out.push('\n');
    for entry in front {
        let assignment = pipeline
            .models()
            .iter()
            .map(|m| {
                let level = entry.assignment.level_of(&m.model_id).ok_or_else(|| {
                    Error::invalid(format!("front entry has no level for {}", m.model_id))
                })?;
                Ok(format!("{}={level}", m.model_id))
            })
            .collect::<Result<Vec<_>>>()?
            .join(";");
        let accs: Vec<f64> = crate::objective::chosen_points(&entry.assignment, pipeline)?
            .iter()
            .map(|p| p.accuracy)
            .collect();
        let composed = compose_accuracy(&accs, pipeline.accuracy_composition());
        let o = entry.objective;
        writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&assignment),
            format_real(o.accuracy_sum),
            format_real(o.latency_sum_ms),
            format_real(composed),
            format_real(o.latency_sum_ms),
        )
        .unwrap();
    }
    Ok(out.into_bytes())
}

const SVG_WIDTH: f64 = 640.0;
const SVG_HEIGHT: f64 = 480.0;
const PLOT_LEFT: f64 = 80.0;
const PLOT_RIGHT: f64 = 480.0;
const PLOT_TOP: f64 = 40.0;
const PLOT_BOTTOM: f64 = 410.0;
const PALETTE: &[&str] = &[
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// A model id and its `(level, x, y)` points.
pub type ScatterSeries = (String, Vec<(String, f64, f64)>);

/// One scatter point per measured (model, level); x is the model's
/// min-max normalized speed (1 / latency), y is accuracy.
pub fn scatter_points(pipeline: &PipelineProfile) -> Vec<ScatterSeries> {
    pipeline
        .models()
        .iter()
        .map(|m| {
            let measured: Vec<_> = m.measured(pipeline.level_set()).collect();
            let speeds: Vec<f64> = measured.iter().map(|(_, p)| 1.0 / p.latency_ms).collect();
            let xs = min_max_normalize(&speeds).expect("models have at least one finite point");
            let pts = measured
                .iter()
                .zip(xs)
                .map(|((l, p), x)| (l.name.clone(), x, p.accuracy))
                .collect();
            (m.model_id.clone(), pts)
        })
        .collect()
}

pub fn emit_scatter_svg(pipeline: &PipelineProfile) -> Vec<u8> {
    let series = scatter_points(pipeline);
    let accs = series.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.2));
    let (lo, hi) = accs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
        (lo.min(a), hi.max(a))
    });
    let mut y_min = ((lo - 0.02) * 20.0).floor() / 20.0;
    let mut y_max = ((hi + 0.02) * 20.0).ceil() / 20.0;
    y_min = y_min.max(0.0);
    y_max = y_max.min(1.0);
    if y_max - y_min < 0.05 {
        y_min = (y_max - 0.05).max(0.0);
        y_max = y_min + 0.05;
    }
    let px = |x: f64| PLOT_LEFT + x * (PLOT_RIGHT - PLOT_LEFT);
    let py = |y: f64| PLOT_BOTTOM - (y - y_min) / (y_max - y_min) * (PLOT_BOTTOM - PLOT_TOP);

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    )
    .unwrap();
    writeln!(s, "<title>{}</title>", xml_escape(pipeline.name())).unwrap();
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    writeln!(
        s,
        "<g class=\"axes\" stroke=\"black\"><line x1=\"{PLOT_LEFT}\" y1=\"{PLOT_BOTTOM}\" x2=\"{PLOT_RIGHT}\" y2=\"{PLOT_BOTTOM}\"/><line x1=\"{PLOT_LEFT}\" y1=\"{PLOT_TOP}\" x2=\"{PLOT_LEFT}\" y2=\"{PLOT_BOTTOM}\"/></g>"
    )
    .unwrap();
    s.push_str("<g class=\"ticks\" text-anchor=\"middle\">\n");
    for i in 0..=4 {
        let x = i as f64 / 4.0;
        writeln!(
            s,
            "<line x1=\"{0:.2}\" y1=\"{PLOT_BOTTOM}\" x2=\"{0:.2}\" y2=\"{1}\" stroke=\"black\"/><text x=\"{0:.2}\" y=\"{2}\">{3}</text>",
            px(x),
            PLOT_BOTTOM + 5.0,
            PLOT_BOTTOM + 18.0,
            format_real(x)
        )
        .unwrap();
        let y = y_min + (y_max - y_min) * i as f64 / 4.0;
        writeln!(
            s,
            "<line x1=\"{0}\" y1=\"{1:.2}\" x2=\"{PLOT_LEFT}\" y2=\"{1:.2}\" stroke=\"black\"/><text x=\"{2}\" y=\"{3:.2}\" text-anchor=\"end\">{4}</text>",
            PLOT_LEFT - 5.0,
            py(y),
            PLOT_LEFT - 8.0,
            py(y) + 4.0,
            format_real((y * 1e4).round() / 1e4)
        )
        .unwrap();
    }
    s.push_str("</g>\n");
    writeln!(
        s,
        "<text class=\"x-label\" x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">Inference speed (min-max normalized)</text>",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        SVG_HEIGHT - 30.0
    )
    .unwrap();
    writeln!(
        s,
        "<text class=\"y-label\" x=\"20\" y=\"{0:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0:.2})\">Accuracy</text>",
        (PLOT_TOP + PLOT_BOTTOM) / 2.0
    )
    .unwrap();

    for (k, (model, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let id = xml_escape(model);
        writeln!(
            s,
            "<g class=\"series\" data-model=\"{id}\" fill=\"{color}\">"
        )
        .unwrap();
        for (level, x, y) in pts {
            writeln!(
                s,
                "<circle class=\"point\" data-level=\"{}\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\"><title>{id} {} ({}, {})</title></circle>",
                xml_escape(level),
                px(*x),
                py(*y),
                xml_escape(level),
                format_real(*x),
                format_real(*y)
            )
            .unwrap();
        }
        let ly = PLOT_TOP + 10.0 + 20.0 * k as f64;
        writeln!(
            s,
            "<rect class=\"legend-marker\" x=\"{}\" y=\"{:.2}\" width=\"10\" height=\"10\"/><text class=\"legend\" x=\"{}\" y=\"{:.2}\" fill=\"black\">{id}</text>",
            PLOT_RIGHT + 20.0,
            ly - 9.0,
            PLOT_RIGHT + 36.0,
            ly
        )
        .unwrap();
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s.into_bytes()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "text" => Ok(Self::Text),
            other => Err(Error::invalid(format!("unknown report format {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanReport {
    pub pipeline: String,
    pub n_models: usize,
    pub levels: Vec<String>,
    pub models: Vec<ReportRow>,
    pub accuracy_sum: f64,
    pub latency_sum_ms: f64,
    pub composition: AccuracyComposition,
    pub pipeline_accuracy: f64,
    pub pipeline_accuracy_by_composition: CompositionAccuracies,
    pub pipeline_latency_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_latency_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speedup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRow {
    pub model: String,
    pub level: String,
    pub bits: u32,
    pub accuracy: f64,
    pub latency_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_kb: Option<f64>,
    pub feasible_levels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionAccuracies {
    pub product: f64,
    pub min: f64,
    pub mean: f64,
}

impl PlanReport {
    pub fn new(result: &SolveResult, pipeline: &PipelineProfile) -> Result<Self> {
        let points = crate::objective::chosen_points(&result.assignment, pipeline)?;
        let models = pipeline
            .models()
            .iter()
            .zip(&points)
            .map(|(m, p)| {
                let level = result.assignment.level_of(&m.model_id).expect("validated");
                ReportRow {
                    model: m.model_id.clone(),
                    level: level.to_string(),
                    bits: pipeline.level_set().get(level).map_or(0, |l| l.bits),
                    accuracy: p.accuracy,
                    latency_ms: p.latency_ms,
                    size_kb: p.size_kb,
                    feasible_levels: result
                        .feasible_level_counts
                        .get(&m.model_id)
                        .copied()
                        .unwrap_or(0),
                }
            })
            .collect();
        let accs: Vec<f64> = points.iter().map(|p| p.accuracy).collect();
        let baseline = pipeline.baseline_latency_ms();
        let speedup = baseline
            .map(|b| speedup(b, result.pipeline_latency_ms))
            .transpose()?;
        Ok(PlanReport {
            pipeline: pipeline.name().to_string(),
            n_models: pipeline.models().len(),
            levels: pipeline.level_set().names().map(str::to_string).collect(),
            models,
            accuracy_sum: result.objective.accuracy_sum,
            latency_sum_ms: result.objective.latency_sum_ms,
            composition: pipeline.accuracy_composition(),
            pipeline_accuracy: result.pipeline_accuracy,
            pipeline_accuracy_by_composition: CompositionAccuracies {
                product: compose_accuracy(&accs, AccuracyComposition::Product),
                min: compose_accuracy(&accs, AccuracyComposition::Min),
                mean: compose_accuracy(&accs, AccuracyComposition::Mean),
            },
            pipeline_latency_ms: result.pipeline_latency_ms,
            baseline_latency_ms: baseline,
            speedup,
        })
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("reports always serialize");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(parse_error)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "Plan for {} ({} models; levels {})",
            self.pipeline,
            self.n_models,
            self.levels.join(", ")
        )
        .unwrap();
        s.push('\n');
        s.push_str("Model  Parameter Precision  Accuracy  size (KB)  latency (ms)\n");
        for row in &self.models {
            writeln!(
                s,
                "{}  {}  {}  {}  {}",
                row.model,
                row.level,
                format_real(row.accuracy),
                row.size_kb.map_or_else(|| "-".to_string(), format_real),
                format_real(row.latency_ms)
            )
            .unwrap();
        }
        s.push('\n');
        let counts: Vec<String> = self
            .models
            .iter()
            .map(|r| format!("{}={}", r.model, r.feasible_levels))
            .collect();
        writeln!(s, "feasible levels: {}", counts.join(", ")).unwrap();
        writeln!(s, "accuracy sum: {}", format_real(self.accuracy_sum)).unwrap();
        writeln!(s, "latency sum (ms): {}", format_real(self.latency_sum_ms)).unwrap();
        let by = &self.pipeline_accuracy_by_composition;
        for (mode, value) in [
            (AccuracyComposition::Product, by.product),
            (AccuracyComposition::Min, by.min),
            (AccuracyComposition::Mean, by.mean),
        ] {
            let mark = if mode == self.composition {
                " (selected)"
            } else {
                ""
            };
            writeln!(
                s,
                "pipeline accuracy [{mode}]: {}{mark}",
                format_real(value)
            )
            .unwrap();
        }
        writeln!(
            s,
            "pipeline latency (ms): {}",
            format_real(self.pipeline_latency_ms)
        )
        .unwrap();
        if let (Some(b), Some(x)) = (self.baseline_latency_ms, self.speedup) {
            let mut factor = format_real(x);
            if !factor.contains(['.', 'e']) {
                factor.push_str(".0");
            }
            writeln!(s, "speedup vs baseline {} ms: {factor}x", format_real(b)).unwrap();
        }
        s
    }
}

pub fn emit_report(
    result: &SolveResult,
    pipeline: &PipelineProfile,
    format: ReportFormat,
) -> Result<Vec<u8>> {
    let report = PlanReport::new(result, pipeline)?;
    Ok(match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Text => report.to_text().into_bytes(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "pipeline": {"name": "one", "models": ["m"]},
        "levels": [{"name": "int-8", "bits": 8}],
        "profiles": [{"model": "m", "measurements": [{"level": "int-8", "accuracy": 0.5, "latency_ms": 10}]}]
    }"#;

    fn with(doc: &str, from: &str, to: &str) -> Vec<u8> {
        assert!(doc.contains(from), "{from}");
        doc.replacen(from, to, 1).into_bytes()
    }

    fn err(bytes: &[u8]) -> String {
        parse_profile(bytes).unwrap_err().to_string()
    }

    #[test]
    fn minimal_document() {
        let p = parse_profile(MINIMAL.as_bytes()).unwrap();
        assert_eq!(p.models().len(), 1);
        assert_eq!(p.accuracy_composition(), AccuracyComposition::Product);
        assert_eq!(p.models()[0].points["int-8"].accuracy, 0.5);
    }

    #[test]
    fn validation_errors_name_the_culprit() {
        assert_eq!(
            err(&with(MINIMAL, "0.5", "1.2")),
            "accuracy out of range for m/int-8"
        );
        assert_eq!(
            err(&with(
                MINIMAL,
                r#""models": ["m"]"#,
                r#""models": ["m", "m"]"#
            )),
            "duplicate m"
        );
        assert_eq!(
            err(&with(
                MINIMAL,
                r#"[{"name": "int-8", "bits": 8}]"#,
                r#"[{"name": "int-8", "bits": 8}, {"name": "int-8", "bits": 4}]"#
            )),
            "duplicate int-8"
        );
        assert_eq!(
            err(&with(MINIMAL, r#""level": "int-8""#, r#""level": "int-4""#)),
            "unknown level m/int-4"
        );
        assert_eq!(
            err(&with(
                MINIMAL,
                "]}]\n",
                "]}], \"thresholds\": [{\"model\": \"q\", \"min_accuracy\": 0.1, \"max_latency_ms\": 5}]\n"
            )),
            "unknown model in thresholds: q"
        );
        assert_eq!(
            err(&with(MINIMAL, r#""latency_ms": 10"#, r#""latency_ms": 0"#)),
            "latency_ms must be positive for m/int-8"
        );
        assert_eq!(
            err(&with(
                MINIMAL,
                r#""models": ["m"]"#,
                r#""models": ["m", "k"]"#
            )),
            "missing profile for k"
        );
    }

    #[test]
    fn syntax_and_schema_errors_carry_location() {
        let e = err(b"{\n  \"pipeline\": ,\n}");
        assert!(e.starts_with("parse error at 2:"), "{e}");
        let e = err(&with(MINIMAL, r#""bits": 8"#, r#""bits": 8, "bitz": 3"#));
        assert!(e.starts_with("parse error at 3:"), "{e}");
        assert!(e.contains("bitz"), "{e}");
    }

    #[test]
    fn format_real_rules() {
        assert_eq!(format_real(400.0), "400");
        assert_eq!(format_real(0.9 + 0.8), "1.7");
        assert_eq!(format_real(0.88 * 0.85 * 0.87), "0.65076");
        assert_eq!(format_real(2.0 / 3.0), "0.666666667");
        assert_eq!(format_real(123456789.4), "123456789");
        assert_eq!(format_real(0.001), "0.001");
        assert_eq!(format_real(0.0001234), "1.234e-4");
        assert_eq!(format_real(2.5e9), "2.5e9");
        assert_eq!(format_real(-1.5), "-1.5");
        assert_eq!(format_real(0.0), "0");
    }

    #[test]
    fn emitted_profile_reparses_identically() {
        let p = parse_profile(MINIMAL.as_bytes()).unwrap();
        let text = emit_profile(&p);
        assert_eq!(parse_profile(&text).unwrap(), p);
        assert_eq!(emit_profile(&parse_profile(&text).unwrap()), text);
    }

    #[test]
    fn scatter_x_from_speed() {
        let doc = r#"{
            "pipeline": {"name": "s", "models": ["m"]},
            "levels": [{"name": "a", "bits": 8}, {"name": "b", "bits": 4}],
            "profiles": [{"model": "m", "measurements": [
                {"level": "a", "accuracy": 0.9, "latency_ms": 100},
                {"level": "b", "accuracy": 0.8, "latency_ms": 40}]}]
        }"#;
        let p = parse_profile(doc.as_bytes()).unwrap();
        let series = scatter_points(&p);
        let xs: Vec<f64> = series[0].1.iter().map(|pt| pt.1).collect();
        assert_eq!(xs, [0.0, 1.0]);
        let svg = String::from_utf8(emit_scatter_svg(&p)).unwrap();
        assert!(svg.starts_with("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg "));
        assert_eq!(svg.matches("class=\"point\"").count(), 2);
        assert!(svg.contains("Inference speed (min-max normalized)"));
        assert!(svg.contains(">Accuracy</text>"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
