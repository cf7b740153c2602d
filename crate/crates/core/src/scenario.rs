//! Scenario extraction: road structure, difficulty and trajectory length.
//!
//! Every scenario gets one tag per axis, giving a grid of 12 categories.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::RoadMap;
use crate::scalar::Scalar;
use crate::trajectory::Trajectory;

/// One agent's observed past and ground-truth future on a map.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioRecord<S> {
    pub id: String,
    pub map_id: String,
    pub agent_id: String,
    pub past: Trajectory<S>,
    pub future: Trajectory<S>,
}

impl<S: Scalar> ScenarioRecord<S> {
    pub fn new(
        id: impl Into<String>,
        map_id: impl Into<String>,
        agent_id: impl Into<String>,
        past: Trajectory<S>,
        future: Trajectory<S>,
    ) -> Result<Self> {
        let id = id.into();
        if past.dt() != future.dt() {
            return Err(Error::Shape(format!(
                "scenario `{id}`: past dt {} differs from future dt {}",
                past.dt(),
                future.dt()
            )));
        }
        Ok(Self {
            id,
            map_id: map_id.into(),
            agent_id: agent_id.into(),
            past,
            future,
        })
    }

    pub fn dt(&self) -> S {
        self.future.dt()
    }

    /// Last observed position.
    pub fn anchor(&self) -> crate::geom::Point2<S> {
        self.past.last()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Lane search radius around each ground-truth point, meters.
    pub turn_radius: f64,
    /// Hard, middle and easy shares.
    pub alpha: [f64; 3],
    /// Future arc length at or above which a scenario is LONG, meters.
    pub beta: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            turn_radius: 100.0,
            alpha: [0.10, 0.45, 0.45],
            beta: 28.8,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.turn_radius > 0.0 && self.turn_radius.is_finite()) {
            return Err(Error::InvalidConfig("scenario.turn_radius must be positive".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig("scenario.beta must be positive".into()));
        }
        if self.alpha.iter().any(|&a| !(a > 0.0)) || (self.alpha.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "scenario.alpha must be positive and sum to 1, got {:?}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Structure {
    Turn,
    Cruising,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Difficulty {
    Hard,
    Middle,
    Easy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LengthClass {
    Short,
    Long,
}

impl Structure {
    pub const ALL: [Structure; 2] = [Structure::Turn, Structure::Cruising];

    pub fn as_str(self) -> &'static str {
        match self {
            Structure::Turn => "TURN",
            Structure::Cruising => "CRUISING",
        }
    }
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Hard, Difficulty::Middle, Difficulty::Easy];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Hard => "HARD",
            Difficulty::Middle => "MIDDLE",
            Difficulty::Easy => "EASY",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl LengthClass {
    pub const ALL: [LengthClass; 2] = [LengthClass::Short, LengthClass::Long];

    pub fn as_str(self) -> &'static str {
        match self {
            LengthClass::Short => "SHORT",
            LengthClass::Long => "LONG",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ScenarioTag {
    pub structure: Structure,
    pub difficulty: Difficulty,
    pub length: LengthClass,
}

impl ScenarioTag {
    /// Category key, e.g. `TURN/HARD/LONG`.
    pub fn key(&self) -> String {
        self.to_string()
    }

    /// All 12 tags in table order: structure, then length, then difficulty.
    pub fn grid() -> Vec<ScenarioTag> {
        let mut out = Vec::with_capacity(12);
        for structure in Structure::ALL {
            for length in LengthClass::ALL {
                for difficulty in Difficulty::ALL {
                    out.push(ScenarioTag { structure, difficulty, length });
                }
            }
        }
        out
    }
}

impl fmt::Display for ScenarioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.structure.as_str(), self.difficulty.as_str(), self.length.as_str())
    }
}

/// Per-scenario minFDE of every evaluated model: scenario id → model → meters.
pub type MinFdeTable = BTreeMap<String, BTreeMap<String, f64>>;

/// TURN iff some lane within `radius` of a past or future point is a turn lane.
pub fn tag_structure<S: Scalar>(rec: &ScenarioRecord<S>, map: &RoadMap<S>, radius: f64) -> Result<Structure> {
    if rec.map_id != map.map_id() {
        return Err(Error::DataConsistency(format!(
            "scenario `{}` is on map `{}` but was given map `{}`",
            rec.id,
            rec.map_id,
            map.map_id()
        )));
    }
    let r = S::of(radius);
    let turn = rec
        .past
        .points()
        .iter()
        .chain(rec.future.points())
        .any(|&p| map.lanes_within_radius(p, r).iter().any(|l| l.is_turn_lane()));
    Ok(if turn { Structure::Turn } else { Structure::Cruising })
}

/// Path length over the prediction window: from the last observed position
/// through every ground-truth future point.
pub fn future_length<S: Scalar>(rec: &ScenarioRecord<S>) -> S {
    rec.anchor().distance(rec.future.first()) + rec.future.arc_length()
}

/// LONG iff [`future_length`] reaches `beta`.
pub fn tag_length<S: Scalar>(rec: &ScenarioRecord<S>, beta: f64) -> LengthClass {
    if future_length(rec).as_f64() >= beta {
        LengthClass::Long
    } else {
        LengthClass::Short
    }
}

/// Mean minFDE across models for every scenario.
pub fn difficulty_scores(table: &MinFdeTable) -> Result<BTreeMap<String, f64>> {
    let mut reference: Option<(&str, Vec<&String>)> = None;
    let mut out = BTreeMap::new();
    for (id, by_model) in table {
        if by_model.is_empty() {
            return Err(Error::DataConsistency(format!("scenario `{id}` has no minFDE values")));
        }
        let models: Vec<&String> = by_model.keys().collect();
        match &reference {
            None => reference = Some((id, models)),
            Some((first, expected)) if *expected != models => {
                return Err(Error::DataConsistency(format!(
                    "scenario `{id}` has models {models:?}, but scenario `{first}` has {expected:?}"
                )));
            }
            Some(_) => {}
        }
        if let Some((m, v)) = by_model.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::DataConsistency(format!("scenario `{id}`: minFDE of `{m}` is {v}")));
        }
        out.insert(id.clone(), by_model.values().sum::<f64>() / by_model.len() as f64);
    }
    Ok(out)
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Group sizes `(hard, middle, easy)` for `n` scenarios.
pub fn partition_sizes(n: usize, alpha: [f64; 3]) -> (usize, usize, usize) {
    let hard = round_half_up(alpha[0] * n as f64).min(n);
    let mid = round_half_up(alpha[1] * n as f64).min(n - hard);
    (hard, mid, n - hard - mid)
}

/// Splits scenarios by descending score; ties go to the smaller id first.
pub fn partition_difficulty(scores: &BTreeMap<String, f64>, alpha: [f64; 3]) -> BTreeMap<String, Difficulty> {
    let mut order: Vec<(&String, f64)> = scores.iter().map(|(k, &v)| (k, v)).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let (hard, mid, _) = partition_sizes(order.len(), alpha);
    order
        .into_iter()
        .enumerate()
        .map(|(rank, (id, _))| {
            let d = if rank < hard {
                Difficulty::Hard
            } else if rank < hard + mid {
                Difficulty::Middle
            } else {
                Difficulty::Easy
            };
            (id.clone(), d)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TagSet {
    pub tags: BTreeMap<String, ScenarioTag>,
    /// Scenario count per category key, all 12 keys present.
    pub category_counts: BTreeMap<String, usize>,
}

impl TagSet {
    pub fn from_tags(tags: BTreeMap<String, ScenarioTag>) -> Self {
        let mut category_counts: BTreeMap<String, usize> = ScenarioTag::grid().iter().map(|t| (t.key(), 0)).collect();
        for t in tags.values() {
            *category_counts.get_mut(&t.key()).expect("grid covers every tag") += 1;
        }
        Self { tags, category_counts }
    }
}

/// Tags every record. `maps` is keyed by map id; `table` must cover exactly
/// the given records.
pub fn tag_all<S: Scalar>(
    records: &[ScenarioRecord<S>],
    maps: &BTreeMap<String, RoadMap<S>>,
    table: &MinFdeTable,
    cfg: &ScenarioConfig,
) -> Result<TagSet> {
    cfg.validate()?;
    let mut seen = HashSet::with_capacity(records.len());
    for r in records {
        if !seen.insert(r.id.as_str()) {
            return Err(Error::DataConsistency(format!("duplicate scenario id `{}`", r.id)));
        }
        if !table.contains_key(&r.id) {
            return Err(Error::DataConsistency(format!("no minFDE values for scenario `{}`", r.id)));
        }
    }
    if let Some(extra) = table.keys().find(|k| !seen.contains(k.as_str())) {
        return Err(Error::DataConsistency(format!("minFDE table names unknown scenario `{extra}`")));
    }
    let difficulty = partition_difficulty(&difficulty_scores(table)?, cfg.alpha);
    let tagged = records
        .par_iter()
        .map(|r| {
            let map = maps.get(&r.map_id).ok_or_else(|| {
                Error::DataConsistency(format!("scenario `{}` references unknown map `{}`", r.id, r.map_id))
            })?;
            let tag = ScenarioTag {
                structure: tag_structure(r, map, cfg.turn_radius)?,
                difficulty: difficulty[&r.id],
                length: tag_length(r, cfg.beta),
            };
            Ok((r.id.clone(), tag))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TagSet::from_tags(tagged.into_iter().collect()))
}
