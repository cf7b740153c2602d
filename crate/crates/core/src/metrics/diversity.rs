use super::{pairs, require_modes, AngleUnit, Reduction};
use crate::error::{Error, Result};
use crate::geom::{angle_between, HEADING_EPS};
use crate::scalar::{mean, Scalar};
use crate::trajectory::{displacement_vector, kinematic_clip, step_vectors, KinematicConfig, PredictionSet};

fn min_pair<S: Scalar>(pred: &PredictionSet<S>, f: impl Fn(usize, usize) -> S) -> Result<S> {
    require_modes(pred.k(), 2)?;
    Ok(pairs(pred.k()).map(|(i, j)| f(i, j)).fold(S::infinity(), S::min))
}

/// Smallest mean pointwise distance over mode pairs.
pub fn min_asd<S: Scalar>(pred: &PredictionSet<S>) -> Result<S> {
    let modes = pred.modes();
    min_pair(pred, |i, j| super::ade(&modes[i], &modes[j]))
}

/// Smallest final-point distance over mode pairs.
pub fn min_fsd<S: Scalar>(pred: &PredictionSet<S>) -> Result<S> {
    let modes = pred.modes();
    min_pair(pred, |i, j| super::fde(&modes[i], &modes[j]))
}

/// Average Angular Expansion: mean pairwise angle between the modes'
/// start-to-end displacement vectors.
///
/// Modes whose displacement is shorter than the heading threshold have no
/// direction and are left out of every pair.
pub fn aae<S: Scalar>(pred: &PredictionSet<S>, unit: AngleUnit) -> Result<S> {
    let dirs: Vec<_> = pred
        .modes()
        .iter()
        .map(displacement_vector)
        .filter(|v| v.norm() > S::of(HEADING_EPS))
        .collect();
    require_modes(dirs.len(), 2)?;
    let angles = pairs(dirs.len())
        .map(|(i, j)| angle_between(dirs[i], dirs[j]))
        .collect::<Result<Vec<_>>>()?;
    let avg = mean(angles).ok_or_else(|| Error::Internal("no mode pairs".into()))?;
    Ok(match unit {
        AngleUnit::Degrees => avg.to_degrees(),
        AngleUnit::Radians => avg,
    })
}

/// Average Magnitude Variation.
///
/// Every mode is first cut to its kinematically admissible prefix. For each
/// pair the absolute step-length differences are summed (or averaged) over
/// the steps both clipped modes share; AMV is the mean over pairs.
pub fn amv<S: Scalar>(pred: &PredictionSet<S>, kin: &KinematicConfig<S>, reduction: Reduction) -> Result<S> {
    require_modes(pred.k(), 2)?;
    let magnitudes: Vec<Vec<S>> = pred
        .modes()
        .iter()
        .map(|m| {
            step_vectors(&kinematic_clip(m, kin), kin.anchor)
                .into_iter()
                .map(|v| v.norm())
                .collect()
        })
        .collect();
    let per_pair = pairs(pred.k()).map(|(i, j)| {
        let diffs = magnitudes[i]
            .iter()
            .zip(&magnitudes[j])
            .map(|(a, b)| (*a - *b).abs());
        match reduction {
            Reduction::Sum => diffs.sum(),
            Reduction::Mean => mean(diffs).unwrap_or_else(S::zero),
        }
    });
    mean(per_pair).ok_or_else(|| Error::Internal("no mode pairs".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Point2, Vec2};
    use crate::trajectory::Trajectory;
    use proptest::prelude::*;

    fn ray(heading_deg: f64, len: f64, n: usize) -> Trajectory<f64> {
        let d = Vec2::from_heading(heading_deg.to_radians());
        let pts = (0..n)
            .map(|i| Point2::new(0.0, 0.0) + d * (len * i as f64 / (n - 1) as f64))
            .collect();
        Trajectory::new(pts, 0.1).unwrap()
    }

    fn set(modes: Vec<Trajectory<f64>>) -> PredictionSet<f64> {
        PredictionSet::new("s", modes, None).unwrap()
    }

    fn line(y: f64, steps: &[f64]) -> Trajectory<f64> {
        let mut x = 0.0;
        let mut pts = vec![];
        for s in steps {
            x += s;
            pts.push(Point2::new(x, y));
        }
        Trajectory::new(pts, 0.1).unwrap()
    }

    #[test]
    fn parallel_modes() {
        let p = set(vec![line(0.0, &[1.0; 31]), line(1.0, &[1.0; 31])]);
        assert!((min_asd(&p).unwrap() - 1.0).abs() < 1e-12);
        assert!((min_fsd(&p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shared_endpoint_has_zero_fsd() {
        let a = Trajectory::new(vec![Point2::new(0.0, 0.0), Point2::new(5.0, 5.0), Point2::new(10.0, 0.0)], 0.1).unwrap();
        let b = Trajectory::new(vec![Point2::new(0.0, 0.0), Point2::new(5.0, -5.0), Point2::new(10.0, 0.0)], 0.1).unwrap();
        assert_eq!(min_fsd(&set(vec![a, b])).unwrap(), 0.0);
    }

    #[test]
    fn single_mode_is_insufficient() {
        let p = set(vec![ray(0.0, 10.0, 5)]);
        assert!(matches!(min_asd(&p), Err(Error::InsufficientModes { needed: 2, got: 1 })));
        assert!(min_fsd(&p).is_err());
        assert!(aae(&p, AngleUnit::Degrees).is_err());
        assert!(amv(&p, &KinematicConfig::default(), Reduction::Sum).is_err());
    }

    #[test]
    fn aae_examples() {
        let right = set(vec![ray(0.0, 30.0, 10), ray(90.0, 30.0, 10)]);
        assert!((aae(&right, AngleUnit::Degrees).unwrap() - 90.0).abs() < 1e-9);
        assert!((aae(&right, AngleUnit::Radians).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let same = set(vec![ray(17.0, 30.0, 10); 6]);
        assert_eq!(aae(&same, AngleUnit::Degrees).unwrap(), 0.0);

        let fan = set(vec![ray(0.0, 30.0, 10), ray(30.0, 30.0, 10), ray(60.0, 30.0, 10)]);
        let dirs = [0.0f64, 30.0, 60.0];
        let mut total = 0.0;
        let mut n = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i < j {
                    total += (dirs[i] - dirs[j]).abs();
                    n += 1.0;
                }
            }
        }
        assert!((aae(&fan, AngleUnit::Degrees).unwrap() - total / n).abs() < 1e-9);
        assert!((total / n - 40.0).abs() < 1e-12);
    }

    #[test]
    fn aae_skips_stationary_modes() {
        let still = Trajectory::new(vec![Point2::new(0.0, 0.0); 10], 0.1).unwrap();
        let p = set(vec![ray(0.0, 30.0, 10), still.clone(), ray(90.0, 30.0, 10)]);
        assert!((aae(&p, AngleUnit::Degrees).unwrap() - 90.0).abs() < 1e-9);
        let q = set(vec![ray(0.0, 30.0, 10), still]);
        assert!(matches!(aae(&q, AngleUnit::Degrees), Err(Error::InsufficientModes { .. })));
    }

    #[test]
    fn amv_arithmetic() {
        let anchor = Point2::new(0.0, 0.0);
        let a = line(0.0, &[1.0, 1.0, 1.0]);
        let b = line(0.0, &[1.2, 1.2, 1.2]);
        let kin = KinematicConfig::default().with_anchor(anchor);
        let p = set(vec![a.clone(), b]);
        assert!((amv(&p, &kin, Reduction::Sum).unwrap() - 0.6).abs() < 1e-12);
        assert!((amv(&p, &kin, Reduction::Mean).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(amv(&set(vec![a.clone(), a]), &kin, Reduction::Sum).unwrap(), 0.0);
    }

    #[test]
    fn amv_uses_clipped_prefix() {
        // Mode b jumps from 1 m to 2 m steps after step 5: +100 m/s².
        let kin = KinematicConfig::default().with_anchor(Point2::new(0.0, 0.0));
        let a = line(0.0, &[1.1; 10]);
        let mut steps = vec![1.0; 5];
        steps.extend([2.0; 5]);
        let b = line(0.0, &steps);
        assert_eq!(kinematic_clip(&b, &kin).len(), 5);
        let p = set(vec![a, b]);
        let clipped = amv(&p, &kin, Reduction::Sum).unwrap();
        assert!((clipped - 5.0 * 0.1).abs() < 1e-9);
        let loose = KinematicConfig { a_min: -1e9, a_max: 1e9, ..kin.clone() };
        let unclipped = amv(&p, &loose, Reduction::Sum).unwrap();
        assert!((unclipped - clipped - 5.0 * 0.9).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn aae_scale_free_while_distances_scale(
            headings in proptest::collection::vec(-180.0..180.0f64, 2..7),
            lens in proptest::collection::vec(5.0..50.0f64, 7),
            c in 0.1..10.0f64,
        ) {
            let modes: Vec<_> = headings.iter().zip(&lens).map(|(&h, &l)| ray(h, l, 12)).collect();
            let scaled: Vec<_> = modes.iter().map(|m| m.map_points(|q| Point2::new(c * q.x, c * q.y)).unwrap()).collect();
            let (p, q) = (set(modes), set(scaled));
            let a0 = aae(&p, AngleUnit::Degrees).unwrap();
            prop_assert!((0.0..=180.0).contains(&a0));
            prop_assert!((a0 - aae(&q, AngleUnit::Degrees).unwrap()).abs() < 1e-9);
            prop_assert!((c * min_asd(&p).unwrap() - min_asd(&q).unwrap()).abs() < 1e-9 * (1.0 + min_asd(&q).unwrap()));
            prop_assert!((c * min_fsd(&p).unwrap() - min_fsd(&q).unwrap()).abs() < 1e-9 * (1.0 + min_fsd(&q).unwrap()));
        }

        #[test]
        fn amv_symmetric_and_rigid_invariant(
            steps in proptest::collection::vec(proptest::collection::vec(0.5..1.5f64, 8), 2..5),
            rot in -3.0..3.0f64,
        ) {
            let kin = KinematicConfig::default().with_anchor(Point2::new(0.0, 0.0));
            let modes: Vec<_> = steps.iter().map(|s| line(0.0, s)).collect();
            let mut rev = modes.clone();
            rev.reverse();
            let a = amv(&set(modes.clone()), &kin, Reduction::Sum).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((a - amv(&set(rev), &kin, Reduction::Sum).unwrap()).abs() < 1e-9);
            let rot_modes: Vec<_> = modes.iter().map(|m| m.map_points(|q| Point2::new(0.0, 0.0) + q.to_vec().rotate(rot)).unwrap()).collect();
            prop_assert!((a - amv(&set(rot_modes), &kin, Reduction::Sum).unwrap()).abs() < 1e-9);
        }
    }
}
