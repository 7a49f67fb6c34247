//! Exact solvers for the level-assignment problem.
//!
//! * [`brute_force_front`] enumerates every feasible assignment (test oracle).
//! * [`pareto_front_dp`] merges per-model points one model at a time,
//!   pruning dominated partial sums (exact, much faster).
//! * [`solve_weighted`] scalarizes with a single lambda; separable per model.
//! * [`solve_budget`] maximizes accuracy under a pipeline latency budget.
//!
//! Objective sums are always accumulated in pipeline order starting from
//! zero, so every solver produces bit-identical floats for the same
//! assignment.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::domain::{
    prune_exact, AccuracyComposition, Assignment, FrontEntry, MeasuredPoint, ObjectiveVector,
    ParetoFront, PipelineProfile, QuantLevel,
};
use crate::error::{Error, Result};
use crate::objective::{
    check_lambda, compose_accuracy, feasible_points, point_vector, PipelineScale,
};
use crate::par;

/// Default limit on the number of assignments the oracle will enumerate.
pub const DEFAULT_ORACLE_CAP: u128 = 1_000_000;

const ORACLE_CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMode {
    Weighted { lambda: f64 },
    Budget { budget_ms: f64 },
    Pareto,
}

#[derive(Debug, Clone)]
pub struct SolveRequest {
    pub pipeline: PipelineProfile,
    pub mode: SolveMode,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Plan(SolveResult),
    Front(ParetoFront),
}

pub fn solve(request: &SolveRequest) -> Result<Solution> {
    let p = &request.pipeline;
    match request.mode {
        SolveMode::Weighted { lambda } => solve_weighted(p, lambda).map(Solution::Plan),
        SolveMode::Budget { budget_ms } => solve_budget(p, budget_ms).map(Solution::Plan),
        SolveMode::Pareto => pareto_front_dp(p).map(Solution::Front),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub assignment: Assignment,
    pub objective: ObjectiveVector,
    /// End-to-end accuracy under the pipeline's composition rule.
    pub pipeline_accuracy: f64,
    pub pipeline_latency_ms: f64,
    pub feasible_level_counts: BTreeMap<String, usize>,
}

impl SolveResult {
    /// Evaluates `assignment` against `pipeline`.
    pub fn evaluate(pipeline: &PipelineProfile, assignment: Assignment) -> Result<Self> {
        let points = crate::objective::chosen_points(&assignment, pipeline)?;
        let objective = crate::objective::sum_points(points.iter().copied());
        let accs: Vec<f64> = points.iter().map(|p| p.accuracy).collect();
        let counts = pipeline
            .models()
            .iter()
            .enumerate()
            .map(|(i, m)| (m.model_id.clone(), feasible_points(pipeline, i).len()))
            .collect();
        Ok(SolveResult {
            assignment,
            objective,
            pipeline_accuracy: compose_accuracy(&accs, pipeline.accuracy_composition()),
            pipeline_latency_ms: objective.latency_sum_ms,
            feasible_level_counts: counts,
        })
    }

    pub fn pipeline_accuracy_with(
        &self,
        pipeline: &PipelineProfile,
        mode: AccuracyComposition,
    ) -> Result<f64> {
        crate::objective::pipeline_accuracy_with(&self.assignment, pipeline, mode)
    }
}

/// Objective, assignment sort key, per-model choice indices.
type Candidate = (ObjectiveVector, Vec<u16>, Vec<u16>);

/// Feasible choices of every model, in pipeline order, with the data needed
/// to rank assignments without materializing them.
struct Choices<'a> {
    pipeline: &'a PipelineProfile,
    per_model: Vec<Vec<(&'a QuantLevel, &'a MeasuredPoint)>>,
    /// `name_rank[i][j]`: rank of choice `j` of model `i` among that model's
    /// feasible level names.
    name_rank: Vec<Vec<u16>>,
    /// Model positions sorted by model id.
    id_order: Vec<usize>,
}

impl<'a> Choices<'a> {
    fn new(pipeline: &'a PipelineProfile) -> Result<Self> {
        let mut per_model = Vec::with_capacity(pipeline.models().len());
        for (i, model) in pipeline.models().iter().enumerate() {
            let pts = feasible_points(pipeline, i);
            if pts.is_empty() {
                return Err(Error::InfeasibleModel(model.model_id.clone()));
            }
            per_model.push(pts);
        }
        let name_rank = per_model
            .iter()
            .map(|pts| {
                let mut idx: Vec<usize> = (0..pts.len()).collect();
                idx.sort_by(|&a, &b| pts[a].0.name.cmp(&pts[b].0.name));
                let mut rank = vec![0u16; pts.len()];
                for (r, &j) in idx.iter().enumerate() {
                    rank[j] = r as u16;
                }
                rank
            })
            .collect();
        let mut id_order: Vec<usize> = (0..pipeline.models().len()).collect();
        id_order.sort_by(|&a, &b| {
            pipeline.models()[a]
                .model_id
                .cmp(&pipeline.models()[b].model_id)
        });
        Ok(Choices {
            pipeline,
            per_model,
            name_rank,
            id_order,
        })
    }

    fn combinations(&self) -> u128 {
        self.per_model
            .iter()
            .try_fold(1u128, |acc, pts| acc.checked_mul(pts.len() as u128))
            .unwrap_or(u128::MAX)
    }

    /// Sort key equivalent to `Assignment` ordering over the first `k`
    /// models of the pipeline.
    fn key(&self, picks: &[u16]) -> Vec<u16> {
        self.id_order
            .iter()
            .filter(|&&i| i < picks.len())
            .map(|&i| self.name_rank[i][picks[i] as usize])
            .collect()
    }

    fn assignment(&self, picks: &[u16]) -> Assignment {
        Assignment::from_pairs(
            self.pipeline
                .models()
                .iter()
                .zip(&self.per_model)
                .zip(picks)
                .map(|((m, pts), &j)| (m.model_id.as_str(), pts[j as usize].0.name.as_str())),
        )
    }

    fn decode(&self, mut index: u64, picks: &mut [u16]) {
        for (slot, pts) in picks.iter_mut().zip(&self.per_model).rev() {
            let n = pts.len() as u64;
            *slot = (index % n) as u16;
            index /= n;
        }
    }

    fn objective(&self, picks: &[u16]) -> ObjectiveVector {
        picks
            .iter()
            .zip(&self.per_model)
            .fold(ObjectiveVector::default(), |acc, (&j, pts)| {
                acc + point_vector(pts[j as usize].1)
            })
    }

    fn build_front(&self, items: Vec<Candidate>) -> ParetoFront {
        // items: (objective, key, picks); key already orders like Assignment.
        let keyed: Vec<_> = items.into_iter().map(|(o, k, p)| (o, (k, p))).collect();
        let entries = prune_exact(keyed)
            .into_iter()
            .map(|(o, (_, picks))| FrontEntry::new(o, self.assignment(&picks)))
            .collect();
        ParetoFront::from_entries(entries)
    }
}

/// Exhaustive enumeration with the default cap.
pub fn brute_force_front(pipeline: &PipelineProfile) -> Result<ParetoFront> {
    brute_force_front_with_cap(pipeline, DEFAULT_ORACLE_CAP)
}

pub fn brute_force_front_with_cap(pipeline: &PipelineProfile, cap: u128) -> Result<ParetoFront> {
    let choices = Choices::new(pipeline)?;
    let combinations = choices.combinations();
    if combinations > cap {
        return Err(Error::TooLarge { combinations, cap });
    }
    let n = choices.per_model.len();
    let prune = |items: Vec<Candidate>| -> Vec<Candidate> {
        prune_exact(items.into_iter().map(|(o, k, p)| (o, (k, p))).collect())
            .into_iter()
            .map(|(o, (k, p))| (o, k, p))
            .collect()
    };
    let local = |range: std::ops::Range<u64>| -> Vec<Candidate> {
        let mut picks = vec![0u16; n];
        let items = range
            .map(|index| {
                choices.decode(index, &mut picks);
                (
                    choices.objective(&picks),
                    choices.key(&picks),
                    picks.clone(),
                )
            })
            .collect();
        prune(items)
    };
    let merged = par::chunked_reduce(
        combinations as u64,
        ORACLE_CHUNK,
        Vec::new(),
        local,
        |mut a, b| {
            a.extend(b);
            prune(a)
        },
    );
    Ok(choices.build_front(merged))
}

/// Partial assignment over the first `k` models.
#[derive(Clone)]
struct Partial {
    objective: ObjectiveVector,
    picks: Vec<u16>,
}

/// Exact front by dynamic programming over models in pipeline order.
///
/// Intermediate stages only drop a partial sum when another one beats it in
/// every objective by more than any later rounding could close (or ties it
/// exactly and ranks first). The last stage prunes exactly, so the result is
/// identical to [`brute_force_front`].
pub fn pareto_front_dp(pipeline: &PipelineProfile) -> Result<ParetoFront> {
    let choices = Choices::new(pipeline)?;
    let lat_total: f64 = choices
        .per_model
        .iter()
        .map(|pts| pts.iter().map(|(_, p)| p.latency_ms).fold(0.0, f64::max))
        .sum();
    let margin = Margin {
        accuracy: 1e-9 * (choices.per_model.len() as f64).max(1.0),
        latency: 1e-9 * lat_total.max(1.0),
    };

    let mut front = vec![Partial {
        objective: ObjectiveVector::default(),
        picks: Vec::new(),
    }];
    for pts in &choices.per_model {
        let mut next = Vec::with_capacity(front.len() * pts.len());
        for partial in &front {
            for (j, (_, point)) in pts.iter().enumerate() {
                let mut picks = partial.picks.clone();
                picks.push(j as u16);
                next.push(Partial {
                    objective: partial.objective + point_vector(point),
                    picks,
                });
            }
        }
        front = prune_safe(next, &choices, margin);
    }
    let items = front
        .into_iter()
        .map(|p| (p.objective, choices.key(&p.picks), p.picks))
        .collect();
    Ok(choices.build_front(items))
}

#[derive(Debug, Clone, Copy)]
struct Margin {
    accuracy: f64,
    latency: f64,
}

/// Drops partials that can never reach the final front.
fn prune_safe(mut items: Vec<Partial>, choices: &Choices<'_>, margin: Margin) -> Vec<Partial> {
    // Exact duplicates: keep the one that ranks first.
    let mut keyed: Vec<(Vec<u16>, Partial)> = items
        .drain(..)
        .map(|p| (choices.key(&p.picks), p))
        .collect();
    keyed.sort_by(|a, b| {
        a.1.objective
            .latency_sum_ms
            .total_cmp(&b.1.objective.latency_sum_ms)
            .then_with(|| {
                b.1.objective
                    .accuracy_sum
                    .total_cmp(&a.1.objective.accuracy_sum)
            })
            .then_with(|| a.0.cmp(&b.0))
    });
    keyed.dedup_by(|later, earlier| later.1.objective == earlier.1.objective);

    let mut kept: Vec<Partial> = Vec::with_capacity(keyed.len());
    for (_, candidate) in keyed {
        let beaten = kept
            .iter()
            .any(|k| clearly_dominates(&k.objective, &candidate.objective, margin));
        if !beaten {
            kept.push(candidate);
        }
    }
    kept
}

/// Every component equal or better by more than the margin, at least one
/// better by more than the margin.
fn clearly_dominates(a: &ObjectiveVector, b: &ObjectiveVector, m: Margin) -> bool {
    let acc = component(
        a.accuracy_sum - b.accuracy_sum,
        a.accuracy_sum == b.accuracy_sum,
        m.accuracy,
    );
    let lat = component(
        b.latency_sum_ms - a.latency_sum_ms,
        a.latency_sum_ms == b.latency_sum_ms,
        m.latency,
    );
    match (acc, lat) {
        (Some(x), Some(y)) => x || y,
        _ => false,
    }
}

/// `Some(true)` when better by margin, `Some(false)` when exactly equal.
fn component(gain: f64, equal: bool, margin: f64) -> Option<bool> {
    if equal {
        Some(false)
    } else if gain > margin {
        Some(true)
    } else {
        None
    }
}

/// Per-model weighted-sum solve. Ties on score go to higher accuracy, then
/// lower latency, then the smaller level name.
pub fn solve_weighted(pipeline: &PipelineProfile, lambda: f64) -> Result<SolveResult> {
    check_lambda(lambda)?;
    let choices = Choices::new(pipeline)?;
    let scale = PipelineScale::new(pipeline);
    let picks: Vec<u16> = choices
        .per_model
        .iter()
        .enumerate()
        .map(|(i, pts)| {
            let scored: Vec<(f64, &QuantLevel, &MeasuredPoint)> = pts
                .iter()
                .map(|&(level, point)| (scale.score(i, point, lambda), level, point))
                .collect();
            let best = (0..scored.len())
                .min_by(|&a, &b| weighted_order(&scored[a], &scored[b]))
                .expect("nonempty");
            best as u16
        })
        .collect();
    SolveResult::evaluate(pipeline, choices.assignment(&picks))
}

fn weighted_order(
    a: &(f64, &QuantLevel, &MeasuredPoint),
    b: &(f64, &QuantLevel, &MeasuredPoint),
) -> Ordering {
    a.0.total_cmp(&b.0)
        .then_with(|| b.2.accuracy.total_cmp(&a.2.accuracy))
        .then_with(|| a.2.latency_ms.total_cmp(&b.2.latency_ms))
        .then_with(|| a.1.name.cmp(&b.1.name))
}

/// Runs [`solve_weighted`] for each lambda.
pub fn solve_weighted_sweep(
    pipeline: &PipelineProfile,
    lambdas: &[f64],
) -> Result<Vec<SolveResult>> {
    par::map(lambdas, |&l| solve_weighted(pipeline, l))
        .into_iter()
        .collect()
}

/// Most accurate front entry whose latency sum fits within `budget_ms`.
pub fn solve_budget(pipeline: &PipelineProfile, budget_ms: f64) -> Result<SolveResult> {
    if !(budget_ms.is_finite() && budget_ms > 0.0) && budget_ms != f64::INFINITY {
        return Err(Error::invalid(format!(
            "budget must be positive, got {budget_ms}"
        )));
    }
    let front = pareto_front_dp(pipeline)?;
    budget_pick(&front, budget_ms)
        .map(|e| SolveResult::evaluate(pipeline, e.assignment.clone()))
        .unwrap_or_else(|| {
            Err(Error::BudgetInfeasible {
                min_latency_ms: front
                    .fastest()
                    .map_or(f64::NAN, |e| e.objective.latency_sum_ms),
            })
        })
}

/// Front entries are sorted by latency with accuracy increasing, so the last
/// one within budget is the most accurate.
pub fn budget_pick(front: &ParetoFront, budget_ms: f64) -> Option<&FrontEntry> {
    front
        .iter()
        .take_while(|e| e.objective.latency_sum_ms <= budget_ms)
        .last()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{LevelSet, ModelProfile, Thresholds};

    fn model(id: &str, pts: &[(&str, f64, f64)]) -> ModelProfile {
        ModelProfile::new(
            id,
            pts.iter()
                .map(|&(l, a, lat)| (l.to_string(), MeasuredPoint::new(a, lat, None).unwrap()))
                .collect(),
        )
    }

    fn two_by_two() -> PipelineProfile {
        PipelineProfile::new(
            "2x2",
            LevelSet::from_known(&["fp-16", "int-8"]).unwrap(),
            vec![
                model("X", &[("fp-16", 0.9, 100.0), ("int-8", 0.8, 40.0)]),
                model("Y", &[("fp-16", 0.95, 200.0), ("int-8", 0.94, 60.0)]),
            ],
            vec![],
            AccuracyComposition::Product,
            None,
        )
        .unwrap()
    }

    fn vectors(front: &ParetoFront) -> Vec<(f64, f64)> {
        front
            .iter()
            .map(|e| (e.objective.accuracy_sum, e.objective.latency_sum_ms))
            .collect()
    }

    fn close(got: &[(f64, f64)], want: &[(f64, f64)]) -> bool {
        got.len() == want.len()
            && got
                .iter()
                .zip(want)
                .all(|(a, b)| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12)
    }

    #[test]
    fn two_by_two_front() {
        let p = two_by_two();
        let want = [(1.74, 100.0), (1.84, 160.0), (1.85, 300.0)];
        let brute = brute_force_front(&p).unwrap();
        assert!(close(&vectors(&brute), &want), "{:?}", vectors(&brute));
        assert_eq!(pareto_front_dp(&p).unwrap(), brute);
        assert_eq!(
            brute.entries()[1].assignment,
            Assignment::from_pairs([("X", "fp-16"), ("Y", "int-8")])
        );
    }

    #[test]
    fn single_point_front() {
        let p = PipelineProfile::new(
            "one",
            LevelSet::standard(),
            vec![model("m", &[("int-4", 0.5, 10.0)])],
            vec![],
            AccuracyComposition::Product,
            None,
        )
        .unwrap();
        for front in [brute_force_front(&p).unwrap(), pareto_front_dp(&p).unwrap()] {
            assert_eq!(vectors(&front), [(0.5, 10.0)]);
        }
    }

    #[test]
    fn forced_assignment_front() {
        let p = PipelineProfile::new(
            "forced",
            LevelSet::standard(),
            vec![
                model("a", &[("fp-16", 0.9, 10.0)]),
                model("b", &[("int-8", 0.8, 20.0)]),
                model("c", &[("bin-1", 0.7, 30.0)]),
            ],
            vec![],
            AccuracyComposition::Product,
            None,
        )
        .unwrap();
        let front = pareto_front_dp(&p).unwrap();
        assert_eq!(front.len(), 1);
        let o = crate::objective::objective_of(&front.entries()[0].assignment, &p).unwrap();
        assert_eq!(front.entries()[0].objective, o);
    }

    #[test]
    fn infeasible_model_is_named_by_every_solver() {
        let p = two_by_two()
            .with_thresholds(vec![Thresholds::new("Y", 0.99, 10.0).unwrap()])
            .unwrap();
        let want = Error::InfeasibleModel("Y".into());
        assert_eq!(brute_force_front(&p).unwrap_err(), want);
        assert_eq!(pareto_front_dp(&p).unwrap_err(), want);
        assert_eq!(solve_weighted(&p, 0.5).unwrap_err(), want);
        assert_eq!(solve_budget(&p, 1e9).unwrap_err(), want);
        assert_eq!(want.to_string(), "infeasible model Y");
    }

    #[test]
    fn oracle_cap() {
        let err = brute_force_front_with_cap(&two_by_two(), 3).unwrap_err();
        assert_eq!(
            err,
            Error::TooLarge {
                combinations: 4,
                cap: 3
            }
        );
        assert!(err.to_string().starts_with("instance too large for oracle"));
    }

    #[test]
    fn weighted_extremes() {
        let p = two_by_two();
        let r0 = solve_weighted(&p, 0.0).unwrap();
        assert_eq!(
            r0.assignment,
            Assignment::from_pairs([("X", "fp-16"), ("Y", "fp-16")])
        );
        assert!((r0.objective.accuracy_sum - 1.85).abs() < 1e-12);
        assert_eq!(r0.objective.latency_sum_ms, 300.0);
        let r1 = solve_weighted(&p, 1.0).unwrap();
        assert_eq!(
            r1.assignment,
            Assignment::from_pairs([("X", "int-8"), ("Y", "int-8")])
        );
        assert!((r1.objective.accuracy_sum - 1.74).abs() < 1e-12);
        assert_eq!(r1.objective.latency_sum_ms, 100.0);
        assert_eq!(r1.feasible_level_counts["X"], 2);
        assert!(solve_weighted(&p, -0.1).is_err());
    }

    #[test]
    fn weighted_forced_choice() {
        let p = PipelineProfile::new(
            "p",
            LevelSet::standard(),
            vec![
                model("a", &[("int-2", 0.4, 5.0)]),
                model("b", &[("fp-16", 0.9, 100.0), ("int-8", 0.8, 40.0)]),
            ],
            vec![],
            AccuracyComposition::Product,
            None,
        )
        .unwrap();
        for lambda in [0.0, 0.5, 1.0] {
            let r = solve_weighted(&p, lambda).unwrap();
            assert_eq!(r.assignment.level_of("a"), Some("int-2"));
        }
    }

    #[test]
    fn budget_examples() {
        let p = two_by_two();
        let r = solve_budget(&p, 200.0).unwrap();
        assert_eq!(
            r.assignment,
            Assignment::from_pairs([("X", "fp-16"), ("Y", "int-8")])
        );
        assert!((r.objective.accuracy_sum - 1.84).abs() < 1e-12);
        assert_eq!(r.objective.latency_sum_ms, 160.0);
        let err = solve_budget(&p, 99.0).unwrap_err();
        assert_eq!(
            err,
            Error::BudgetInfeasible {
                min_latency_ms: 100.0
            }
        );
        assert_eq!(
            err.to_string(),
            "budget infeasible: minimum achievable latency is 100 ms"
        );
        let wide = solve_budget(&p, 1e12).unwrap();
        assert_eq!(wide.assignment, solve_weighted(&p, 0.0).unwrap().assignment);
        assert!(solve_budget(&p, 0.0).is_err());
    }

    #[test]
    fn solve_request_dispatch() {
        let pipeline = two_by_two();
        let req = SolveRequest {
            pipeline,
            mode: SolveMode::Pareto,
        };
        match solve(&req).unwrap() {
            Solution::Front(f) => assert_eq!(f.len(), 3),
            other => panic!("{other:?}"),
        }
        let req = SolveRequest {
            mode: SolveMode::Budget { budget_ms: 200.0 },
            ..req
        };
        assert!(matches!(solve(&req).unwrap(), Solution::Plan(_)));
    }

    #[test]
    fn weighted_plan_is_not_dominated_when_model_ranges_differ() {
        // Per-model normalization alone picks (0.83, 87), (0.6, 6), (0.46, 46)
        // here, which (0.82, 39), (0.76, 51), (0.46, 46) dominates.
        let p = PipelineProfile::new(
            "ranges",
            LevelSet::standard(),
            vec![
                model("a", &[("fp-16", 0.83, 87.0), ("int-8", 0.82, 39.0)]),
                model(
                    "b",
                    &[
                        ("fp-16", 0.76, 51.0),
                        ("int-8", 0.61, 34.0),
                        ("int-4", 0.26, 2.0),
                        ("int-2", 0.6, 6.0),
                    ],
                ),
                model(
                    "c",
                    &[
                        ("fp-16", 0.46, 46.0),
                        ("int-8", 0.23, 57.0),
                        ("int-4", 0.21, 61.0),
                    ],
                ),
            ],
            vec![],
            AccuracyComposition::Product,
            None,
        )
        .unwrap();
        let front = pareto_front_dp(&p).unwrap();
        let r = solve_weighted(&p, 0.5).unwrap();
        assert!(front.iter().all(|e| !e.objective.dominates(&r.objective)));
        assert!(front.iter().any(|e| e.objective == r.objective));
    }

    #[test]
    fn exact_ties_keep_smallest_assignment() {
        // Every level of both models has the same point: one front entry,
        // and it must be the lexicographically smallest assignment.
        let pts = [
            ("fp-16", 0.5, 10.0),
            ("int-8", 0.5, 10.0),
            ("int-4", 0.5, 10.0),
        ];
        let p = PipelineProfile::new(
            "ties",
            LevelSet::standard(),
            vec![model("b", &pts), model("a", &pts)],
            vec![],
            AccuracyComposition::Product,
            None,
        )
        .unwrap();
        let brute = brute_force_front(&p).unwrap();
        assert_eq!(brute, pareto_front_dp(&p).unwrap());
        assert_eq!(brute.len(), 1);
        assert_eq!(
            brute.entries()[0].assignment,
            Assignment::from_pairs([("a", "fp-16"), ("b", "fp-16")])
        );
    }
}
