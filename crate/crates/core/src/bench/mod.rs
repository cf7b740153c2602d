//! Evaluation runs, per-category aggregation, ranking and balance data.

mod render;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::RunConfig;
use crate::map::RoadMap;
use crate::metrics::{self, TriadResult};
use crate::scenario::{Difficulty, LengthClass, ScenarioRecord, ScenarioTag, Structure};
use crate::trajectory::PredictionSet;

pub use render::{balance_csv, balance_svg, report_csv, tables_markdown};

/// Metric registry with fixed optimization directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    MinAde,
    MinFde,
    Rf,
    MinAsd,
    MinFsd,
    Dac,
    Dao,
    Aae,
    Amv,
    Att,
}

impl Metric {
    pub const ALL: [Metric; 10] = [
        Metric::MinAde,
        Metric::MinFde,
        Metric::Rf,
        Metric::MinAsd,
        Metric::MinFsd,
        Metric::Dac,
        Metric::Dao,
        Metric::Aae,
        Metric::Amv,
        Metric::Att,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::MinAde => "minADE",
            Metric::MinFde => "minFDE",
            Metric::Rf => "RF",
            Metric::MinAsd => "minASD",
            Metric::MinFsd => "minFSD",
            Metric::Dac => "DAC",
            Metric::Dao => "DAO",
            Metric::Aae => "AAE",
            Metric::Amv => "AMV",
            Metric::Att => "ATT",
        }
    }

    pub fn lower_is_better(self) -> bool {
        matches!(self, Metric::MinAde | Metric::MinFde)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown metric `{s}`")))
    }
}

/// Every metric of one scenario for one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioMetrics {
    #[serde(rename = "minADE")]
    pub min_ade: f64,
    #[serde(rename = "minFDE")]
    pub min_fde: f64,
    #[serde(rename = "RF")]
    pub rf: f64,
    #[serde(rename = "minASD")]
    pub min_asd: f64,
    #[serde(rename = "minFSD")]
    pub min_fsd: f64,
    #[serde(rename = "DAC")]
    pub dac: f64,
    #[serde(rename = "DAO")]
    pub dao: f64,
    /// Absent when fewer than two modes move far enough to have a heading.
    #[serde(rename = "AAE")]
    pub aae: Option<f64>,
    #[serde(rename = "AMV")]
    pub amv: f64,
    #[serde(rename = "ATT")]
    pub att: f64,
    pub triad: TriadResult<f64>,
    pub tag: ScenarioTag,
}

impl ScenarioMetrics {
    pub fn get(&self, m: Metric) -> Option<f64> {
        Some(match m {
            Metric::MinAde => self.min_ade,
            Metric::MinFde => self.min_fde,
            Metric::Rf => self.rf,
            Metric::MinAsd => self.min_asd,
            Metric::MinFsd => self.min_fsd,
            Metric::Dac => self.dac,
            Metric::Dao => self.dao,
            Metric::Aae => return self.aae,
            Metric::Amv => self.amv,
            Metric::Att => self.att,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationRun {
    pub model: String,
    pub config: RunConfig,
    /// SHA-256 of every input file, keyed by role.
    pub inputs: BTreeMap<String, String>,
    pub per_scenario: BTreeMap<String, ScenarioMetrics>,
}

/// Difficulty weights of the overall score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightConfig {
    pub w_hard: f64,
    pub w_middle: f64,
    pub w_easy: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            w_hard: 1.0,
            w_middle: 1.0,
            w_easy: 1.0,
        }
    }
}

impl WeightConfig {
    pub fn get(&self, d: Difficulty) -> f64 {
        match d {
            Difficulty::Hard => self.w_hard,
            Difficulty::Middle => self.w_middle,
            Difficulty::Easy => self.w_easy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = [self.w_hard, self.w_middle, self.w_easy];
        if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) || w.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidConfig(format!(
                "weights must be non-negative and not all zero, got {w:?}"
            )));
        }
        Ok(())
    }
}

fn dangling(what: &str, ids: &[&str]) -> Error {
    const SHOWN: usize = 10;
    let mut list = ids.iter().take(SHOWN).map(|s| format!("`{s}`")).collect::<Vec<_>>().join(", ");
    if ids.len() > SHOWN {
        list.push_str(&format!(" and {} more", ids.len() - SHOWN));
    }
    Error::DataConsistency(format!("{what}: {list}"))
}

fn evaluate_one(
    rec: &ScenarioRecord<f64>,
    pred: &PredictionSet<f64>,
    map: &RoadMap<f64>,
    tag: ScenarioTag,
    cfg: &RunConfig,
) -> Result<ScenarioMetrics> {
    if pred.k() < 2 {
        return Err(Error::Shape(format!("scenario `{}`: need at least 2 modes, got {}", rec.id, pred.k())));
    }
    if pred.modes()[0].dt() != rec.dt() {
        return Err(Error::Shape(format!(
            "scenario `{}`: prediction dt {} differs from scenario dt {}",
            rec.id,
            pred.modes()[0].dt(),
            rec.dt()
        )));
    }
    let anchor = rec.anchor();
    let kin = cfg.kinematic.with_anchor(anchor);
    let gt = &rec.future;
    let triad = metrics::att(pred, map, &cfg.alignment, &kin)?;
    let aae = match metrics::aae(pred, cfg.aae_unit) {
        Ok(v) => Some(v),
        Err(Error::InsufficientModes { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ScenarioMetrics {
        min_ade: metrics::min_ade(pred, gt)?,
        min_fde: metrics::min_fde(pred, gt)?,
        rf: metrics::rf(pred, gt)?,
        min_asd: metrics::min_asd(pred)?,
        min_fsd: metrics::min_fsd(pred)?,
        dac: metrics::dac(pred, map),
        dao: metrics::dao(pred, map, &cfg.dao, anchor),
        aae,
        amv: metrics::amv(pred, &kin, cfg.amv_reduction)?,
        att: triad.att_rate,
        triad,
        tag,
    })
}

/// Scores one model on every record. Scenarios are processed in parallel;
/// results are keyed by id so thread count never changes the output.
pub fn evaluate_model(
    model: &str,
    records: &[ScenarioRecord<f64>],
    maps: &BTreeMap<String, RoadMap<f64>>,
    predictions: &[PredictionSet<f64>],
    tags: &BTreeMap<String, ScenarioTag>,
    cfg: &RunConfig,
) -> Result<EvaluationRun> {
    cfg.validate()?;
    let mut by_id: HashMap<&str, &PredictionSet<f64>> = HashMap::with_capacity(predictions.len());
    let mut dup = Vec::new();
    for p in predictions {
        if by_id.insert(p.scenario_id(), p).is_some() {
            dup.push(p.scenario_id());
        }
    }
    if !dup.is_empty() {
        return Err(dangling("duplicate predictions for scenarios", &dup));
    }
    let known: HashMap<&str, &ScenarioRecord<f64>> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let missing: Vec<&str> = records.iter().map(|r| r.id.as_str()).filter(|id| !by_id.contains_key(id)).collect();
    if !missing.is_empty() {
        return Err(dangling("no predictions for scenarios", &missing));
    }
    let mut unknown: Vec<&str> = by_id.keys().copied().filter(|id| !known.contains_key(id)).collect();
    if !unknown.is_empty() {
        unknown.sort_unstable();
        return Err(dangling("predictions for unknown scenarios", &unknown));
    }
    let untagged: Vec<&str> = records.iter().map(|r| r.id.as_str()).filter(|id| !tags.contains_key(*id)).collect();
    if !untagged.is_empty() {
        return Err(dangling("no tags for scenarios", &untagged));
    }
    let per_scenario = records
        .par_iter()
        .map(|rec| {
            let map = maps.get(&rec.map_id).ok_or_else(|| {
                Error::DataConsistency(format!("scenario `{}` references unknown map `{}`", rec.id, rec.map_id))
            })?;
            let m = evaluate_one(rec, by_id[rec.id.as_str()], map, tags[&rec.id], cfg)?;
            Ok((rec.id.clone(), m))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluationRun {
        model: model.to_string(),
        config: cfg.clone(),
        inputs: BTreeMap::new(),
        per_scenario: per_scenario.into_iter().collect(),
    })
}

/// Means over a group of scenarios. `means` omits metrics with no values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub count: usize,
    pub empty: bool,
    pub means: BTreeMap<String, f64>,
}

fn summarize<'a>(items: impl Iterator<Item = &'a ScenarioMetrics> + Clone) -> GroupSummary {
    let count = items.clone().count();
    let mut means = BTreeMap::new();
    for m in Metric::ALL {
        let (sum, n) = items
            .clone()
            .filter_map(|s| s.get(m))
            .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        if n > 0 {
            means.insert(m.name().to_string(), sum / n as f64);
        }
    }
    GroupSummary {
        count,
        empty: count == 0,
        means,
    }
}

/// Mode-level pass rates of each test of the triad.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttAblation {
    pub modes: usize,
    pub boundary: f64,
    pub alignment: f64,
    pub kinematic: f64,
    pub att: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub model: String,
    /// Keyed by `STRUCTURE/DIFFICULTY/LENGTH`, all 12 present.
    pub per_category: BTreeMap<String, GroupSummary>,
    pub by_difficulty: BTreeMap<String, GroupSummary>,
    /// Difficulty-weighted means; a metric is `null` when no difficulty
    /// level with positive weight has a value for it.
    pub overall: BTreeMap<String, Option<f64>>,
    pub att_ablation: AttAblation,
}

impl MetricReport {
    /// Value of `metric` in `scope`: `overall`, a difficulty name or a category key.
    pub fn value(&self, scope: &str, metric: Metric) -> Option<f64> {
        let name = metric.name();
        if scope == "overall" {
            return self.overall.get(name).copied().flatten();
        }
        self.per_category
            .get(scope)
            .or_else(|| self.by_difficulty.get(scope))
            .and_then(|g| g.means.get(name).copied())
    }
}

/// Per-category means, difficulty-weighted overall values and the ATT ablation.
pub fn aggregate(run: &EvaluationRun, weights: &WeightConfig) -> Result<MetricReport> {
    weights.validate()?;
    let all = || run.per_scenario.values();
    let per_category = ScenarioTag::grid()
        .into_iter()
        .map(|t| (t.key(), summarize(all().filter(move |s| s.tag == t))))
        .collect();
    let by_difficulty: BTreeMap<String, GroupSummary> = Difficulty::ALL
        .into_iter()
        .map(|d| (d.as_str().to_string(), summarize(all().filter(move |s| s.tag.difficulty == d))))
        .collect();
    let overall = Metric::ALL
        .into_iter()
        .map(|m| {
            let (num, den) = Difficulty::ALL
                .into_iter()
                .filter_map(|d| {
                    let w = weights.get(d);
                    let v = by_difficulty[d.as_str()].means.get(m.name())?;
                    (w > 0.0).then_some((w * v, w))
                })
                .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
            (m.name().to_string(), (den > 0.0).then(|| num / den))
        })
        .collect();
    let mut counts = [0usize; 5];
    for s in all() {
        let t = &s.triad;
        counts[0] += t.modes();
        counts[1] += t.boundary_pass.iter().filter(|&&b| b).count();
        counts[2] += t.alignment_pass.iter().filter(|&&b| b).count();
        counts[3] += t.kinematic_pass.iter().filter(|&&b| b).count();
        counts[4] += t.admissible.iter().filter(|&&b| b).count();
    }
    let rate = |n: usize| if counts[0] == 0 { 0.0 } else { n as f64 / counts[0] as f64 };
    Ok(MetricReport {
        model: run.model.clone(),
        per_category,
        by_difficulty,
        overall,
        att_ablation: AttAblation {
            modes: counts[0],
            boundary: rate(counts[1]),
            alignment: rate(counts[2]),
            kinematic: rate(counts[3]),
            att: rate(counts[4]),
        },
    })
}

/// Competition ranking: tied values share the best rank, later ranks skip.
pub fn rank_values(values: &[(String, f64)], lower_is_better: bool) -> BTreeMap<String, usize> {
    values
        .iter()
        .map(|(name, v)| {
            let better = values
                .iter()
                .filter(|(_, o)| if lower_is_better { o < v } else { o > v })
                .count();
            (name.clone(), better + 1)
        })
        .collect()
}

/// Ranks models on `metric` within `scope` (see [`MetricReport::value`]).
pub fn rank(reports: &[MetricReport], metric: Metric, scope: &str) -> Result<BTreeMap<String, usize>> {
    let values = reports
        .iter()
        .map(|r| {
            r.value(scope, metric).map(|v| (r.model.clone(), v)).ok_or_else(|| {
                Error::DataConsistency(format!("model `{}` has no {metric} value in `{scope}`", r.model))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_values(&values, metric.lower_is_better()))
}

/// Subset of the category grid; `*` matches any value on an axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CategoryFilter {
    pub structure: Option<Structure>,
    pub difficulty: Option<Difficulty>,
    pub length: Option<LengthClass>,
}

impl CategoryFilter {
    pub const ALL: CategoryFilter = CategoryFilter {
        structure: None,
        difficulty: None,
        length: None,
    };

    /// TURN, HARD and LONG together.
    pub const CHALLENGING: CategoryFilter = CategoryFilter {
        structure: Some(Structure::Turn),
        difficulty: Some(Difficulty::Hard),
        length: Some(LengthClass::Long),
    };

    pub fn matches(&self, t: &ScenarioTag) -> bool {
        self.structure.is_none_or(|s| s == t.structure)
            && self.difficulty.is_none_or(|d| d == t.difficulty)
            && self.length.is_none_or(|l| l == t.length)
    }
}

impl FromStr for CategoryFilter {
    type Err = Error;

    /// Accepts `all`, `challenging` or `STRUCTURE/DIFFICULTY/LENGTH` with `*` wildcards.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => return Ok(Self::ALL),
            "challenging" => return Ok(Self::CHALLENGING),
            _ => {}
        }
        let parts: Vec<String> = s.split('/').map(|p| p.trim().to_ascii_uppercase()).collect();
        let bad = || Error::InvalidConfig(format!("bad category filter `{s}`, expected e.g. TURN/HARD/LONG"));
        if parts.len() != 3 {
            return Err(bad());
        }
        fn axis<T: Copy>(p: &str, all: &[T], name: fn(T) -> &'static str) -> Option<Option<T>> {
            if p == "*" {
                return Some(None);
            }
            all.iter().copied().find(|&v| name(v) == p).map(Some)
        }
        Ok(Self {
            structure: axis(&parts[0], &Structure::ALL, Structure::as_str).ok_or_else(bad)?,
            difficulty: axis(&parts[1], &Difficulty::ALL, Difficulty::as_str).ok_or_else(bad)?,
            length: axis(&parts[2], &LengthClass::ALL, LengthClass::as_str).ok_or_else(bad)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalancePoint {
    pub model: String,
    pub diversity: f64,
    pub att: f64,
    pub min_fde: f64,
}

/// One point per model: mean diversity, ATT and minFDE over the scenarios
/// matching `filter`. Models without data in the subset are left out.
pub fn balance_data(runs: &[EvaluationRun], diversity: Metric, filter: &CategoryFilter) -> Result<Vec<BalancePoint>> {
    if !matches!(diversity, Metric::Aae | Metric::Amv) {
        return Err(Error::InvalidConfig(format!("balance chart needs AAE or AMV, got {diversity}")));
    }
    let mut out = Vec::new();
    for run in runs {
        let group = summarize(run.per_scenario.values().filter(|s| filter.matches(&s.tag)));
        let get = |m: Metric| group.means.get(m.name()).copied();
        if let (Some(d), Some(a), Some(f)) = (get(diversity), get(Metric::Att), get(Metric::MinFde)) {
            out.push(BalancePoint {
                model: run.model.clone(),
                diversity: d,
                att: a,
                min_fde: f,
            });
        }
    }
    Ok(out)
}

/// Everything `report` writes, before rendering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: RunConfig,
    pub inputs: BTreeMap<String, String>,
    pub category_counts: BTreeMap<String, usize>,
    pub models: Vec<MetricReport>,
    /// scope → metric → model → rank. Scopes whose metric is missing for
    /// some model are left out.
    pub ranks: BTreeMap<String, BTreeMap<String, BTreeMap<String, usize>>>,
}

/// Aggregates and ranks every run. Runs must share one configuration and
/// cover the same scenarios.
pub fn build_report(runs: &[EvaluationRun], inputs: BTreeMap<String, String>) -> Result<BenchReport> {
    let first = runs
        .first()
        .ok_or_else(|| Error::DataConsistency("no metrics files given".into()))?;
    let mut names = std::collections::HashSet::new();
    for r in runs {
        if r.config != first.config {
            return Err(Error::DataConsistency(format!(
                "model `{}` was evaluated with a different configuration than `{}`",
                r.model, first.model
            )));
        }
        if !r.per_scenario.keys().eq(first.per_scenario.keys()) {
            return Err(Error::DataConsistency(format!(
                "model `{}` covers different scenarios than `{}`",
                r.model, first.model
            )));
        }
        if !names.insert(r.model.as_str()) {
            return Err(Error::DataConsistency(format!("model `{}` appears twice", r.model)));
        }
    }
    let mut models = runs
        .iter()
        .map(|r| aggregate(r, &first.config.weights))
        .collect::<Result<Vec<_>>>()?;
    models.sort_by(|a, b| a.model.cmp(&b.model));
    let mut category_counts = BTreeMap::new();
    for (key, g) in &models[0].per_category {
        category_counts.insert(key.clone(), g.count);
    }
    let scopes = std::iter::once("overall".to_string())
        .chain(Difficulty::ALL.iter().map(|d| d.as_str().to_string()))
        .chain(ScenarioTag::grid().into_iter().map(|t| t.key()));
    let mut ranks = BTreeMap::new();
    for scope in scopes {
        let per_metric: BTreeMap<String, BTreeMap<String, usize>> = Metric::ALL
            .into_iter()
            .filter_map(|m| rank(&models, m, &scope).ok().map(|r| (m.name().to_string(), r)))
            .collect();
        if !per_metric.is_empty() {
            ranks.insert(scope, per_metric);
        }
    }
    Ok(BenchReport {
        config: first.config.clone(),
        inputs,
        category_counts,
        models,
        ranks,
    })
}
