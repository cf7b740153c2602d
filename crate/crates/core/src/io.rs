//! JSON file formats, loaders with path-aware errors, and the run config.
//!
//! | file        | top level                                                    |
//! |-------------|--------------------------------------------------------------|
//! | map         | one map object, or an array of them                          |
//! | scenarios   | `{"scenarios": [{id, map_id, agent_id, dt, past, future}]}`  |
//! | predictions | `{"model", "dt", "predictions": [{scenario_id, anchor, modes, probabilities?}]}` |
//! | minFDE      | `{"min_fde": {scenario_id: {model: meters}}}`                |
//! | tags        | `{"config", "inputs", "tags", "category_counts"}`            |
//! | metrics     | `{"model", "config", "inputs", "per_scenario"}`              |
//!
//! Points are `[x, y]` arrays in meters. `modes` is `K x T x 2`.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::{EvaluationRun, WeightConfig};
use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::map::{MapDocument, RoadMap};
use crate::metrics::{AlignmentConfig, AngleUnit, DaoConfig, Reduction};
use crate::scenario::{MinFdeTable, ScenarioConfig, ScenarioRecord, ScenarioTag, TagSet};
use crate::trajectory::{KinematicConfig, PredictionSet, Trajectory};

/// Largest allowed gap between a prediction's anchor and the scenario's last
/// observed position, meters.
pub const ANCHOR_TOLERANCE: f64 = 1e-6;

/// Every tunable of a run. Serialized verbatim into tags and metrics files.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kinematic: KinematicConfig<f64>,
    pub alignment: AlignmentConfig<f64>,
    pub dao: DaoConfig<f64>,
    pub scenario: ScenarioConfig,
    pub weights: WeightConfig,
    pub amv_reduction: Reduction,
    pub aae_unit: AngleUnit,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.kinematic.validate()?;
        self.alignment.validate()?;
        self.dao.validate()?;
        self.scenario.validate()?;
        self.weights.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub id: String,
    pub map_id: String,
    pub agent_id: String,
    pub dt: f64,
    pub past: Vec<Point2<f64>>,
    pub future: Vec<Point2<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenariosFile {
    /// Free-form provenance, e.g. generator settings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
    pub scenarios: Vec<ScenarioDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionDocument {
    pub scenario_id: String,
    pub anchor: Point2<f64>,
    pub modes: Vec<Vec<Point2<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionsFile {
    pub model: String,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
    pub predictions: Vec<PredictionDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinFdeFile {
    pub min_fde: MinFdeTable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagsFile {
    pub config: RunConfig,
    pub inputs: BTreeMap<String, String>,
    pub tags: BTreeMap<String, ScenarioTag>,
    pub category_counts: BTreeMap<String, usize>,
}

impl TagsFile {
    pub fn new(config: RunConfig, inputs: BTreeMap<String, String>, set: TagSet) -> Self {
        Self {
            config,
            inputs,
            tags: set.tags,
            category_counts: set.category_counts,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A file's bytes plus its digest.
pub struct Loaded {
    pub bytes: Vec<u8>,
    pub digest: String,
}

pub fn read_file(path: &Path) -> Result<Loaded> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        context: format!("cannot read `{}`", path.display()),
        source,
    })?;
    let digest = sha256_hex(&bytes);
    Ok(Loaded { bytes, digest })
}

/// Parses JSON, reporting the path of the first offending field.
pub fn parse_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::schema(if path.is_empty() { "$".into() } else { path }, e.into_inner())
    })
}

/// Pretty JSON with a trailing newline; key order follows the types, so
/// equal values always give equal bytes.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_maps(bytes: &[u8]) -> Result<Vec<RoadMap<f64>>> {
    let value: serde_json::Value = parse_json(bytes)?;
    let docs: Vec<(String, MapDocument)> = match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                serde_path_to_error::deserialize(v)
                    .map(|d| (format!("[{i}]"), d))
                    .map_err(|e| Error::schema(format!("[{i}].{}", e.path()), e.into_inner()))
            })
            .collect::<Result<_>>()?,
        v => vec![(
            String::new(),
            serde_path_to_error::deserialize(v).map_err(|e| Error::schema(e.path().to_string(), e.into_inner()))?,
        )],
    };
    let mut seen = HashSet::new();
    docs.iter()
        .map(|(prefix, d)| {
            if !seen.insert(d.map_id.clone()) {
                return Err(Error::DataConsistency(format!("duplicate map id `{}`", d.map_id)));
            }
            RoadMap::from_document(d).map_err(|e| match e {
                Error::Schema { path, message } if !prefix.is_empty() => Error::Schema {
                    path: format!("{prefix}.{path}"),
                    message,
                },
                e => e,
            })
        })
        .collect()
}

pub fn maps_by_id(maps: Vec<RoadMap<f64>>) -> BTreeMap<String, RoadMap<f64>> {
    maps.into_iter().map(|m| (m.map_id().to_string(), m)).collect()
}

/// Builds records; when `maps` is given every `map_id` must resolve.
pub fn scenarios_from_file(file: &ScenariosFile, maps: Option<&BTreeMap<String, RoadMap<f64>>>) -> Result<Vec<ScenarioRecord<f64>>> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(file.scenarios.len());
    for (i, s) in file.scenarios.iter().enumerate() {
        if !seen.insert(s.id.as_str()) {
            return Err(Error::DataConsistency(format!("duplicate scenario id `{}`", s.id)));
        }
        if let Some(maps) = maps {
            if !maps.contains_key(&s.map_id) {
                return Err(Error::DataConsistency(format!(
                    "scenario `{}` references unknown map `{}`",
                    s.id, s.map_id
                )));
            }
        }
        let past = Trajectory::new(s.past.clone(), s.dt).map_err(|e| e.at(format!("scenarios[{i}].past")))?;
        let future = Trajectory::new(s.future.clone(), s.dt).map_err(|e| e.at(format!("scenarios[{i}].future")))?;
        out.push(ScenarioRecord::new(s.id.clone(), s.map_id.clone(), s.agent_id.clone(), past, future)?);
    }
    Ok(out)
}

pub fn scenarios_to_file(records: &[ScenarioRecord<f64>], meta: Option<serde_json::Value>) -> ScenariosFile {
    ScenariosFile {
        meta,
        scenarios: records
            .iter()
            .map(|r| ScenarioDocument {
                id: r.id.clone(),
                map_id: r.map_id.clone(),
                agent_id: r.agent_id.clone(),
                dt: r.dt(),
                past: r.past.points().to_vec(),
                future: r.future.points().to_vec(),
            })
            .collect(),
    }
}

/// Builds prediction sets. When `records` is given, ids must resolve and
/// anchors must match the last observed positions.
pub fn predictions_from_file(file: &PredictionsFile, records: Option<&[ScenarioRecord<f64>]>) -> Result<Vec<PredictionSet<f64>>> {
    let by_id: Option<BTreeMap<&str, &ScenarioRecord<f64>>> =
        records.map(|rs| rs.iter().map(|r| (r.id.as_str(), r)).collect());
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(file.predictions.len());
    for (i, p) in file.predictions.iter().enumerate() {
        let here = format!("predictions[{i}]");
        if !seen.insert(p.scenario_id.as_str()) {
            return Err(Error::DataConsistency(format!("duplicate prediction for scenario `{}`", p.scenario_id)));
        }
        if p.modes.is_empty() {
            return Err(Error::schema(format!("{here}.modes"), "at least one mode is required"));
        }
        let t = p.modes[0].len();
        if let Some(k) = p.modes.iter().position(|m| m.len() != t) {
            return Err(Error::schema(
                format!("{here}.modes[{k}]"),
                format!("ragged modes: mode 0 has {t} points, mode {k} has {}", p.modes[k].len()),
            ));
        }
        if let Some(by_id) = &by_id {
            let rec = by_id.get(p.scenario_id.as_str()).ok_or_else(|| {
                Error::DataConsistency(format!("prediction references unknown scenario `{}`", p.scenario_id))
            })?;
            if rec.anchor().distance(p.anchor) > ANCHOR_TOLERANCE {
                return Err(Error::DataConsistency(format!(
                    "scenario `{}`: anchor [{}, {}] differs from the last observed position [{}, {}]",
                    p.scenario_id,
                    p.anchor.x,
                    p.anchor.y,
                    rec.anchor().x,
                    rec.anchor().y
                )));
            }
        }
        let modes = p
            .modes
            .iter()
            .enumerate()
            .map(|(k, m)| Trajectory::new(m.clone(), file.dt).map_err(|e| e.at(format!("{here}.modes[{k}]"))))
            .collect::<Result<Vec<_>>>()?;
        let set = PredictionSet::new(p.scenario_id.clone(), modes, p.probabilities.clone())
            .map_err(|e| e.at(format!("{here}.probabilities")))?;
        out.push(set);
    }
    Ok(out)
}

pub fn predictions_to_file(
    model: &str,
    dt: f64,
    sets: &[PredictionSet<f64>],
    anchors: &[Point2<f64>],
    meta: Option<serde_json::Value>,
) -> PredictionsFile {
    PredictionsFile {
        model: model.to_string(),
        dt,
        meta,
        predictions: sets
            .iter()
            .zip(anchors)
            .map(|(s, &anchor)| PredictionDocument {
                scenario_id: s.scenario_id().to_string(),
                anchor,
                modes: s.modes().iter().map(|m| m.points().to_vec()).collect(),
                probabilities: s.probabilities().map(<[f64]>::to_vec),
            })
            .collect(),
    }
}

/// Per-scenario minFDE of every model, computed from prediction files.
pub fn min_fde_table(
    records: &[ScenarioRecord<f64>],
    models: &[(String, Vec<PredictionSet<f64>>)],
) -> Result<MinFdeTable> {
    let mut table: MinFdeTable = records.iter().map(|r| (r.id.clone(), BTreeMap::new())).collect();
    let by_id: BTreeMap<&str, &ScenarioRecord<f64>> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    for (model, sets) in models {
        for s in sets {
            let rec = by_id.get(s.scenario_id()).ok_or_else(|| {
                Error::DataConsistency(format!("model `{model}` predicts unknown scenario `{}`", s.scenario_id()))
            })?;
            let v = crate::metrics::min_fde(s, &rec.future)?;
            if table.get_mut(&rec.id).expect("seeded from records").insert(model.clone(), v).is_some() {
                return Err(Error::DataConsistency(format!("model `{model}` appears twice")));
            }
        }
    }
    Ok(table)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocumentKind {
    Map,
    Scenarios,
    Predictions,
    MinFde,
    Tags,
    Metrics,
}

#[derive(Debug)]
pub enum Document {
    Maps(Vec<RoadMap<f64>>),
    Scenarios(Vec<ScenarioRecord<f64>>),
    Predictions { model: String, sets: Vec<PredictionSet<f64>> },
    MinFde(MinFdeTable),
    Tags(TagsFile),
    Metrics(EvaluationRun),
}

/// Reads and validates one file on its own. Cross-file references are
/// checked by the typed helpers above once every input is loaded.
pub fn load_and_validate(path: &Path, kind: DocumentKind) -> Result<Document> {
    let bytes = read_file(path)?.bytes;
    Ok(match kind {
        DocumentKind::Map => Document::Maps(parse_maps(&bytes)?),
        DocumentKind::Scenarios => Document::Scenarios(scenarios_from_file(&parse_json(&bytes)?, None)?),
        DocumentKind::Predictions => {
            let f: PredictionsFile = parse_json(&bytes)?;
            Document::Predictions {
                sets: predictions_from_file(&f, None)?,
                model: f.model,
            }
        }
        DocumentKind::MinFde => {
            let f: MinFdeFile = parse_json(&bytes)?;
            crate::scenario::difficulty_scores(&f.min_fde)?;
            Document::MinFde(f.min_fde)
        }
        DocumentKind::Tags => {
            let f: TagsFile = parse_json(&bytes)?;
            f.config.validate()?;
            Document::Tags(f)
        }
        DocumentKind::Metrics => {
            let f: EvaluationRun = parse_json(&bytes)?;
            f.config.validate()?;
            Document::Metrics(f)
        }
    })
}
