use std::collections::HashMap;

use super::{Aabb, Point2, Polygon, Polyline};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default cell edge for map indexes, in meters.
pub const DEFAULT_CELL_SIZE: f64 = 10.0;

/// Anything a [`GridIndex`] can hold.
pub trait Shape<S: Scalar> {
    fn bbox(&self) -> Aabb<S>;
    /// Minimum Euclidean distance from `p` to the shape (0 when `p` is on or in it).
    fn distance_to(&self, p: Point2<S>) -> S;
}

impl<S: Scalar> Shape<S> for Point2<S> {
    fn bbox(&self) -> Aabb<S> {
        Aabb::new(*self, *self)
    }
    fn distance_to(&self, p: Point2<S>) -> S {
        self.distance(p)
    }
}

impl<S: Scalar> Shape<S> for Polyline<S> {
    fn bbox(&self) -> Aabb<S> {
        Polyline::bbox(self)
    }
    fn distance_to(&self, p: Point2<S>) -> S {
        self.segments()
            .map(|(a, b)| super::segment_distance(p, a, b))
            .fold(S::infinity(), S::min)
    }
}

impl<S: Scalar> Shape<S> for Polygon<S> {
    fn bbox(&self) -> Aabb<S> {
        Polygon::bbox(self)
    }
    fn distance_to(&self, p: Point2<S>) -> S {
        Polygon::distance_to(self, p)
    }
}

/// Uniform grid over item bounding boxes. Item ids are insertion indices.
///
/// Immutable once built; every item id is listed in each cell its bounding
/// box overlaps.
#[derive(Clone, Debug)]
pub struct GridIndex<S, T> {
    cell_size: S,
    items: Vec<T>,
    boxes: Vec<Aabb<S>>,
    cells: HashMap<(i64, i64), Vec<usize>>,
    bounds: Option<Aabb<S>>,
}

impl<S: Scalar, T: Shape<S>> GridIndex<S, T> {
    pub fn new(items: Vec<T>, cell_size: S) -> Result<Self> {
        if !(cell_size > S::zero()) || !cell_size.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid cell size must be positive, got {cell_size}"
            )));
        }
        let boxes: Vec<Aabb<S>> = items.iter().map(Shape::bbox).collect();
        let bounds = boxes.iter().copied().reduce(Aabb::union);
        let mut index = Self {
            cell_size,
            items,
            boxes,
            cells: HashMap::new(),
            bounds,
        };
        for id in 0..index.boxes.len() {
            let b = index.boxes[id];
            let (x0, y0) = index.cell_of(b.min);
            let (x1, y1) = index.cell_of(b.max);
            for cx in x0..=x1 {
                for cy in y0..=y1 {
                    index.cells.entry((cx, cy)).or_default().push(id);
                }
            }
        }
        Ok(index)
    }

    pub fn with_default_cell(items: Vec<T>) -> Self {
        Self::new(items, S::of(DEFAULT_CELL_SIZE)).expect("default cell size is valid")
    }

    fn cell_of(&self, p: Point2<S>) -> (i64, i64) {
        let c = |v: S| (v / self.cell_size).floor().to_i64().unwrap_or(0);
        (c(p.x), c(p.y))
    }

    pub fn cell_size(&self) -> S {
        self.cell_size
    }

    pub fn bounds(&self) -> Option<Aabb<S>> {
        self.bounds
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn get(&self, id: usize) -> Option<&T> {
        self.items.get(id)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Ids whose bounding boxes overlap `area`, ascending and deduplicated.
    pub fn candidates(&self, area: Aabb<S>) -> Vec<usize> {
        let Some(clipped) = self.bounds.and_then(|b| b.intersection(&area)) else {
            return Vec::new();
        };
        let (x0, y0) = self.cell_of(clipped.min);
        let (x1, y1) = self.cell_of(clipped.max);
        let mut out = Vec::new();
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                if let Some(ids) = self.cells.get(&(cx, cy)) {
                    out.extend(ids.iter().copied().filter(|&id| self.boxes[id].intersects(&area)));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Exactly the ids whose shape lies within distance `r` of `center`,
    /// ascending.
    pub fn query_radius(&self, center: Point2<S>, r: S) -> Vec<usize> {
        let area = Aabb::new(center, center).expanded(r);
        self.candidates(area)
            .into_iter()
            .filter(|&id| self.boxes[id].distance_to(center) <= r)
            .filter(|&id| self.items[id].distance_to(center) <= r)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_core::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;

    fn unit(rng: &mut SplitMix64) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn near_and_far_items() {
        let idx = GridIndex::with_default_cell(vec![Point2::new(5.0, 0.0), Point2::new(150.0, 0.0)]);
        assert_eq!(idx.query_radius(Point2::new(0.0, 0.0), 100.0), vec![0]);
        assert_eq!(idx.query_radius(Point2::new(0.0, 0.0), 1e6), vec![0, 1]);
    }

    #[test]
    fn rejects_bad_cell_size() {
        assert!(GridIndex::<f64, Point2<f64>>::new(vec![], 0.0).is_err());
        assert!(GridIndex::<f64, Point2<f64>>::new(vec![], -1.0).is_err());
    }

    #[test]
    fn empty_index_returns_nothing() {
        let idx = GridIndex::<f64, Point2<f64>>::with_default_cell(vec![]);
        assert!(idx.query_radius(Point2::new(0.0, 0.0), 10.0).is_empty());
    }

    #[test]
    fn polylines_match_linear_scan() {
        for seed in 0..20u64 {
            let mut rng = SplitMix64::seed_from_u64(seed);
            let lines: Vec<Polyline<f64>> = (0..40)
                .map(|_| {
                    let x = unit(&mut rng) * 300.0;
                    let y = unit(&mut rng) * 300.0;
                    Polyline::new(vec![
                        Point2::new(x, y),
                        Point2::new(x + unit(&mut rng) * 30.0, y + unit(&mut rng) * 30.0),
                    ])
                    .unwrap()
                })
                .collect();
            let idx = GridIndex::new(lines.clone(), 7.0).unwrap();
            for _ in 0..20 {
                let c = Point2::new(unit(&mut rng) * 300.0, unit(&mut rng) * 300.0);
                let r = unit(&mut rng) * 80.0 + 0.1;
                let oracle: Vec<usize> = (0..lines.len())
                    .filter(|&i| lines[i].distance_to(c) <= r)
                    .collect();
                assert_eq!(idx.query_radius(c, r), oracle);
            }
        }
    }

    proptest! {
        #[test]
        fn point_cloud_matches_scan(
            pts in proptest::collection::vec((-500.0..500.0f64, -500.0..500.0f64), 0..80),
            cx in -600.0..600.0f64, cy in -600.0..600.0f64, r in 0.01..400.0f64,
            cell in 0.5..50.0f64,
        ) {
            let items: Vec<_> = pts.iter().map(|&(x, y)| Point2::new(x, y)).collect();
            let idx = GridIndex::new(items.clone(), cell).unwrap();
            let c = Point2::new(cx, cy);
            let oracle: Vec<usize> = (0..items.len()).filter(|&i| items[i].distance(c) <= r).collect();
            prop_assert_eq!(idx.query_radius(c, r), oracle);
        }

        #[test]
        fn permutation_insensitive(
            pts in proptest::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 1..40),
            r in 1.0..80.0f64,
        ) {
            let items: Vec<_> = pts.iter().map(|&(x, y)| Point2::new(x, y)).collect();
            let mut reversed = items.clone();
            reversed.reverse();
            let n = items.len();
            let a = GridIndex::with_default_cell(items).query_radius(Point2::new(0.0, 0.0), r);
            let mut b: Vec<usize> = GridIndex::with_default_cell(reversed)
                .query_radius(Point2::new(0.0, 0.0), r)
                .into_iter()
                .map(|id| n - 1 - id)
                .collect();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }
    }
}
