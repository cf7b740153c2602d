use crate::error::{Error, Result};
use crate::scalar::{mean, Scalar};
use crate::trajectory::{PredictionSet, Trajectory};

/// Floor on minFDE when forming RF, meters.
pub const RF_EPS: f64 = 1e-6;

/// Average displacement error of one mode.
pub fn ade<S: Scalar>(mode: &Trajectory<S>, gt: &Trajectory<S>) -> S {
    mean(mode.points().iter().zip(gt.points()).map(|(a, b)| a.distance(*b))).unwrap_or_else(S::zero)
}

/// Final displacement error of one mode.
pub fn fde<S: Scalar>(mode: &Trajectory<S>, gt: &Trajectory<S>) -> S {
    mode.last().distance(gt.last())
}

fn check_horizon<S: Scalar>(pred: &PredictionSet<S>, gt: &Trajectory<S>) -> Result<()> {
    if pred.horizon() != gt.len() {
        return Err(Error::Shape(format!(
            "scenario `{}`: modes have {} points, ground truth has {}",
            pred.scenario_id(),
            pred.horizon(),
            gt.len()
        )));
    }
    Ok(())
}

fn min_over_modes<S: Scalar>(
    pred: &PredictionSet<S>,
    gt: &Trajectory<S>,
    f: fn(&Trajectory<S>, &Trajectory<S>) -> S,
) -> Result<S> {
    check_horizon(pred, gt)?;
    Ok(pred.modes().iter().map(|m| f(m, gt)).fold(S::infinity(), S::min))
}

pub fn min_ade<S: Scalar>(pred: &PredictionSet<S>, gt: &Trajectory<S>) -> Result<S> {
    min_over_modes(pred, gt, ade)
}

pub fn min_fde<S: Scalar>(pred: &PredictionSet<S>, gt: &Trajectory<S>) -> Result<S> {
    min_over_modes(pred, gt, fde)
}

/// Mean FDE over modes divided by minFDE (floored at [`RF_EPS`]); never below 1.
pub fn rf<S: Scalar>(pred: &PredictionSet<S>, gt: &Trajectory<S>) -> Result<S> {
    check_horizon(pred, gt)?;
    let fdes: Vec<S> = pred.modes().iter().map(|m| fde(m, gt)).collect();
    let min = fdes.iter().copied().fold(S::infinity(), S::min);
    let avg = mean(fdes.iter().copied()).expect("prediction sets are non-empty");
    Ok((avg / min.max(S::of(RF_EPS))).max(S::one()))
}
