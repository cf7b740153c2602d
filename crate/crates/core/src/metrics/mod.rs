//! Scalar metrics over a [`PredictionSet`](crate::trajectory::PredictionSet).
//!
//! * accuracy: minADE, minFDE, RF
//! * diversity: minASD, minFSD (length biased), AAE and AMV (length free)
//! * admissibility: DAC, DAO and the admissibility triad (boundary,
//!   alignment and kinematic tests)
//!
//! Mode pairs are always visited once, as `(i, j)` with `i < j`, in index
//! order, so every result is bit-reproducible for identical inputs.

mod accuracy;
mod admissibility;
mod diversity;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use accuracy::{ade, fde, min_ade, min_fde, rf, RF_EPS};
pub use admissibility::{
    alignment_confidence, att, dac, dao, dao_with_mask, drivable_cells, test_alignment, test_boundary,
    test_kinematic, AlignmentOutcome, TriadResult,
};
pub use diversity::{aae, amv, min_asd, min_fsd};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum StationaryPolicy {
    #[default]
    Pass,
    Fail,
}

/// Settings of the lane alignment test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", default, deny_unknown_fields)]
pub struct AlignmentConfig<S> {
    /// Pass iff the best confidence is strictly above this.
    pub threshold_lac: S,
    /// Number of final points used for heading and lane lookup.
    pub tail_steps: usize,
    /// Tail displacement (m) below which the mode counts as stationary.
    pub stationary_eps: S,
    pub stationary_policy: StationaryPolicy,
}

impl<S: Scalar> Default for AlignmentConfig<S> {
    fn default() -> Self {
        Self {
            threshold_lac: S::of(0.5),
            tail_steps: 3,
            stationary_eps: S::of(0.1),
            stationary_policy: StationaryPolicy::Pass,
        }
    }
}

impl<S: Scalar> AlignmentConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_lac > S::zero() && self.threshold_lac < S::one()) {
            return Err(Error::InvalidConfig(format!(
                "alignment.threshold_lac must lie in (0, 1), got {}",
                self.threshold_lac
            )));
        }
        if self.tail_steps < 2 {
            return Err(Error::InvalidConfig("alignment.tail_steps must be at least 2".into()));
        }
        if !(self.stationary_eps >= S::zero()) || !self.stationary_eps.is_finite() {
            return Err(Error::InvalidConfig("alignment.stationary_eps must be non-negative".into()));
        }
        Ok(())
    }
}

/// Rasterization settings for DAO.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", default, deny_unknown_fields)]
pub struct DaoConfig<S> {
    /// Cell edge, meters.
    pub cell: S,
    /// Side of the square region centered on the anchor, meters.
    pub roi_side: S,
    /// Multiplier applied to the occupied fraction.
    pub scale: S,
}

impl<S: Scalar> Default for DaoConfig<S> {
    fn default() -> Self {
        Self {
            cell: S::of(0.5),
            roi_side: S::of(100.0),
            scale: S::of(1e4),
        }
    }
}

impl<S: Scalar> DaoConfig<S> {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: S| v > S::zero() && v.is_finite();
        if !ok(self.cell) || !ok(self.roi_side) || !ok(self.scale) {
            return Err(Error::InvalidConfig(
                "dao.cell, dao.roi_side and dao.scale must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AngleUnit {
    #[default]
    Degrees,
    Radians,
}

/// How AMV folds per-step magnitude differences within a pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Reduction {
    #[default]
    Sum,
    Mean,
}

fn require_modes(k: usize, needed: usize) -> Result<()> {
    if k < needed {
        Err(Error::InsufficientModes { needed, got: k })
    } else {
        Ok(())
    }
}

/// Unordered index pairs `(i, j)`, `i < j`, in lexicographic order.
fn pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j)))
}
