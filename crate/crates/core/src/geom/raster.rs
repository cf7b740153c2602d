use std::collections::BTreeSet;

use super::{Aabb, Point2};
use crate::scalar::Scalar;

/// Integer cell coordinate `(column, row)` relative to a region's minimum corner.
pub type Cell = (i64, i64);

/// Cells touched by `points` inside the half-open box `[min, max)`.
///
/// # Panics
/// If `cell` is not strictly positive.
pub fn rasterize_occupancy<S: Scalar>(points: &[Point2<S>], roi: Aabb<S>, cell: S) -> BTreeSet<Cell> {
    assert!(cell > S::zero(), "cell size must be positive");
    points
        .iter()
        .filter(|p| p.x >= roi.min.x && p.x < roi.max.x && p.y >= roi.min.y && p.y < roi.max.y)
        .filter_map(|p| {
            let cx = ((p.x - roi.min.x) / cell).floor().to_i64()?;
            let cy = ((p.y - roi.min.y) / cell).floor().to_i64()?;
            Some((cx, cy))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roi() -> Aabb<f64> {
        Aabb::new(Point2::new(0.0, 0.0), Point2::new(100.0, 100.0))
    }

    #[test]
    fn corner_point_is_one_cell() {
        let cells = rasterize_occupancy(&[Point2::new(0.0, 0.0)], roi(), 0.5);
        assert_eq!(cells.into_iter().collect::<Vec<_>>(), vec![(0, 0)]);
    }

    #[test]
    fn same_cell_deduplicates() {
        let cells = rasterize_occupancy(&[Point2::new(1.1, 1.1), Point2::new(1.2, 1.3)], roi(), 0.5);
        assert_eq!(cells.len(), 1);
    }

    #[test]
    fn points_outside_are_dropped() {
        let cells = rasterize_occupancy(
            &[Point2::new(-0.1, 5.0), Point2::new(100.0, 5.0), Point2::new(50.0, 50.0)],
            roi(),
            0.5,
        );
        assert_eq!(cells.into_iter().collect::<Vec<_>>(), vec![(100, 100)]);
    }

    #[test]
    fn spaced_line_enumerates_distinct_cells() {
        let pts: Vec<_> = (0..30).map(|i| Point2::new(10.25 + i as f64, 20.25)).collect();
        let cells = rasterize_occupancy(&pts, roi(), 0.5);
        let expected: BTreeSet<Cell> = (0..30).map(|i| (20 + 2 * i, 40)).collect();
        assert_eq!(cells, expected);
    }
}
