//! Immutable point sets with a unit-cell index, and the [`PlanarSet`]
//! counting interface shared with implicitly described sets.

use std::collections::BTreeSet;
use std::ops::Range;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BoxSpec, FloorLine, Orientation, Point, Rect, Tube};

/// Anything that can answer membership and box-count queries.
///
/// Materialized [`PointSet`]s answer through their cell index; implicit
/// generator sets answer by row or column summation.
pub trait PlanarSet: Sync {
    fn contains(&self, p: &Point) -> bool;

    /// Exact number of members inside the closed rectangle.
    fn count_in_rect(&self, rect: &Rect) -> u64;

    /// Exact number of members inside `spec`.
    fn box_count(&self, spec: &BoxSpec) -> u64;

    /// Bounding rectangle of the members, `None` when empty.
    fn bounds(&self) -> Option<Rect>;

    /// Lower-left corners of windows of side `size` worth examining in a
    /// counting-dimension search. The default walks a grid of stride
    /// `size / 2` over [`PlanarSet::bounds`], capped at `max_windows`
    /// (the stride grows when the cap would be exceeded).
    fn window_candidates(&self, size: f64, max_windows: usize) -> Vec<(f64, f64)> {
        let Some(b) = self.bounds() else {
            return vec![(0.0, 0.0)];
        };
        let mut stride = (size / 2.0).max(0.5);
        loop {
            let nx = ((b.x_max - b.x_min.min(0.0)) / stride).floor() as usize + 2;
            let ny = ((b.y_max - b.y_min.min(0.0)) / stride).floor() as usize + 2;
            if nx.saturating_mul(ny) <= max_windows.max(1) {
                let x_first = (b.x_min / stride).floor() - 1.0;
                let y_first = (b.y_min / stride).floor() - 1.0;
                let mut out = vec![(0.0, 0.0)];
                for i in 0..nx {
                    for j in 0..ny {
                        let x0 = (x_first + i as f64) * stride;
                        let y0 = (y_first + j as f64) * stride;
                        if x0 + size >= b.x_min && y0 + size >= b.y_min {
                            out.push((x0, y0));
                        }
                    }
                }
                return out;
            }
            stride *= 2.0;
        }
    }
}

/// Column-major cell index: points sorted by `(floor x, floor y)`, with the
/// occupied columns stored as a compressed offset table.
#[derive(Debug, Clone, Default)]
struct CellIndex {
    cell_y: Vec<i64>,
    col_x: Vec<i64>,
    col_start: Vec<usize>,
}

impl CellIndex {
    fn build(points: &mut [Point]) -> Self {
        points.sort_by(|a, b| {
            a.cell()
                .cmp(&b.cell())
                .then(a.x.total_cmp(&b.x))
                .then(a.y.total_cmp(&b.y))
        });
        let mut idx = CellIndex {
            cell_y: Vec::with_capacity(points.len()),
            col_x: Vec::new(),
            col_start: Vec::new(),
        };
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = p.cell();
            if idx.col_x.last() != Some(&cx) {
                idx.col_x.push(cx);
                idx.col_start.push(i);
            }
            idx.cell_y.push(cy);
        }
        idx.col_start.push(points.len());
        idx
    }

    /// Indices into `col_x` of occupied columns with `lo <= cx <= hi`.
    fn columns(&self, lo: i64, hi: i64) -> Range<usize> {
        if lo > hi {
            return 0..0;
        }
        let a = self.col_x.partition_point(|&c| c < lo);
        let b = self.col_x.partition_point(|&c| c <= hi);
        a..b
    }

    /// Point indices in column `ci` whose cell row lies in `[lo, hi]`.
    fn rows(&self, ci: usize, lo: i64, hi: i64) -> Range<usize> {
        let (s, e) = (self.col_start[ci], self.col_start[ci + 1]);
        if lo > hi {
            return s..s;
        }
        let col = &self.cell_y[s..e];
        let a = col.partition_point(|&r| r < lo);
        let b = col.partition_point(|&r| r <= hi);
        s + a..s + b
    }
}

/// Saturating `floor` into cell coordinates.
fn cell_floor(v: f64) -> i64 {
    if v.is_nan() {
        0
    } else {
        v.floor() as i64
    }
}

/// Distances within this of one still count as separated, so points placed
/// exactly one apart in real arithmetic validate after rounding.
pub const SEPARATION_SLACK: f64 = 1e-9;

/// Result of a 1-separation check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    /// Exact minimum pairwise distance; `None` for a single point.
    pub min_distance: Option<f64>,
    /// A pair closer than `1 - SEPARATION_SLACK`, if any.
    pub violating_pair: Option<(Point, Point)>,
    pub valid: bool,
}

/// An immutable planar point set with a unit-cell spatial index.
///
/// Points are stored in index order (sorted by cell), so
/// [`PointSet::points`] is generally a permutation of the input.
#[derive(Debug)]
pub struct PointSet {
    points: Vec<Point>,
    index: CellIndex,
    bbox: Option<Rect>,
    separation: OnceLock<SeparationReport>,
}

impl Clone for PointSet {
    fn clone(&self) -> Self {
        PointSet {
            points: self.points.clone(),
            index: self.index.clone(),
            bbox: self.bbox,
            separation: self.separation.clone(),
        }
    }
}

impl PointSet {
    pub fn new(mut points: Vec<Point>) -> Result<Self> {
        for p in &points {
            Point::new(p.x, p.y)?;
        }
        let index = CellIndex::build(&mut points);
        let bbox = Rect::around(points.iter().copied());
        Ok(PointSet {
            points,
            index,
            bbox,
            separation: OnceLock::new(),
        })
    }

    pub fn empty() -> Self {
        PointSet::new(Vec::new()).expect("empty set is valid")
    }

    pub fn from_lattice(points: impl IntoIterator<Item = (u64, u64)>) -> Self {
        PointSet::new(points.into_iter().map(|(x, y)| Point::lattice(x, y)).collect())
            .expect("lattice points are valid")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn bbox(&self) -> Option<Rect> {
        self.bbox
    }

    /// `Some(valid)` once [`PointSet::validate_separation`] has run.
    pub fn separation_checked(&self) -> Option<bool> {
        self.separation.get().map(|r| r.valid)
    }

    /// Largest number of points sharing one unit cell.
    pub fn max_cell_occupancy(&self) -> usize {
        let mut best = 0;
        let mut run = 0;
        let mut last = None;
        for p in &self.points {
            let c = p.cell();
            if Some(c) == last {
                run += 1;
            } else {
                run = 1;
                last = Some(c);
            }
            best = best.max(run);
        }
        best
    }

    /// Members satisfying `keep`, as a new indexed set.
    pub fn filter(&self, keep: impl Fn(&Point) -> bool) -> PointSet {
        PointSet::new(self.points.iter().copied().filter(|p| keep(p)).collect())
            .expect("subset of a valid set")
    }

    /// `E ∩ [0, n]^2`.
    pub fn restrict_to_square(&self, n: f64) -> PointSet {
        let b = BoxSpec::first_quadrant(n);
        self.filter(|p| b.contains(p))
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Result<PointSet> {
        PointSet::new(
            self.points
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Calls `f` on every point whose cell lies in the given column range
    /// and, per column, in the row range returned by `rows_for(cx)`.
    fn visit_columns(
        &self,
        x_lo: i64,
        x_hi: i64,
        mut rows_for: impl FnMut(i64) -> (i64, i64),
        mut f: impl FnMut(&Point),
    ) {
        for ci in self.index.columns(x_lo, x_hi) {
            let cx = self.index.col_x[ci];
            let (lo, hi) = rows_for(cx);
            for i in self.index.rows(ci, lo, hi) {
                f(&self.points[i]);
            }
        }
    }

    fn rect_cells(rect: &Rect) -> (i64, i64, i64, i64) {
        (
            cell_floor(rect.x_min),
            cell_floor(rect.x_max),
            cell_floor(rect.y_min),
            cell_floor(rect.y_max),
        )
    }

    /// Exact minimum pairwise distance via the unit-cell index.
    ///
    /// Any pair closer than one shares a cell or sits in adjacent cells, so
    /// the neighbor scan is exact whenever it finds a distance `<= 1`.
    /// Otherwise the set is valid and the true minimum comes from an
    /// x-sorted sweep.
    pub fn validate_separation(&self) -> Result<SeparationReport> {
        if self.points.is_empty() {
            return Err(Error::EmptySet);
        }
        let report = self.separation_scan();
        let _ = self.separation.set(report.clone());
        Ok(report)
    }

    fn separation_scan(&self) -> SeparationReport {
        let mut best = f64::INFINITY;
        let mut pair = None;
        for (i, p) in self.points.iter().enumerate() {
            let (cx, cy) = p.cell();
            for ci in self.index.columns(cx, cx + 1) {
                let col = self.index.col_x[ci];
                let (lo, hi) = if col == cx { (cy, cy + 1) } else { (cy - 1, cy + 1) };
                for j in self.index.rows(ci, lo, hi) {
                    if j == i || (col == cx && self.index.cell_y[j] == cy && j < i) {
                        continue;
                    }
                    let d2 = p.dist2(&self.points[j]);
                    if d2 < best {
                        best = d2;
                        pair = Some((*p, self.points[j]));
                    }
                }
            }
        }
        if best <= 1.0 {
            let d = best.sqrt();
            let valid = d >= 1.0 - SEPARATION_SLACK;
            return SeparationReport {
                min_distance: Some(d),
                violating_pair: if valid { None } else { pair },
                valid,
            };
        }
        let min = sweep_min_distance(&self.points);
        SeparationReport {
            min_distance: min,
            violating_pair: None,
            valid: true,
        }
    }

    /// Members of `tube`. Only occupied columns that the tube crosses are
    /// visited, and in each only the rows the tube spans.
    pub fn slice_tube(&self, tube: &Tube) -> PointSet {
        let mut out = Vec::new();
        self.for_each_in_tube(tube, |p| out.push(*p));
        PointSet::new(out).expect("subset of a valid set")
    }

    pub fn count_in_tube(&self, tube: &Tube) -> u64 {
        let mut n = 0;
        self.for_each_in_tube(tube, |_| n += 1);
        n
    }

    pub(crate) fn for_each_in_tube(&self, tube: &Tube, mut f: impl FnMut(&Point)) {
        let Some(b) = self.bbox else { return };
        let (lo_c, hi_c) = tube.intercepts();
        match tube.orientation() {
            Orientation::Horizontal => {
                let (x_lo, x_hi, _, _) = Self::rect_cells(&b);
                let rows = (cell_floor(lo_c), cell_floor(hi_c));
                self.visit_columns(x_lo, x_hi, |_| rows, |p| {
                    if tube.contains(p) {
                        f(p)
                    }
                });
            }
            Orientation::Standard => {
                let k = tube.edge_slope();
                // x-range where the strip meets the bbox rows
                let (mut x_lo, mut x_hi) = (b.x_min, b.x_max);
                let (xa, xb) = ((b.y_min - hi_c) / k, (b.y_max - lo_c) / k);
                let (sx_lo, sx_hi) = if xa <= xb { (xa, xb) } else { (xb, xa) };
                x_lo = x_lo.max(sx_lo - 1.0);
                x_hi = x_hi.min(sx_hi + 1.0);
                if x_lo > x_hi {
                    return;
                }
                self.visit_columns(
                    cell_floor(x_lo),
                    cell_floor(x_hi),
                    |cx| {
                        let (x0, x1) = (cx as f64, cx as f64 + 1.0);
                        let y_min = (k * x0).min(k * x1) + lo_c;
                        let y_max = (k * x0).max(k * x1) + hi_c;
                        (cell_floor(y_min) - 1, cell_floor(y_max) + 1)
                    },
                    |p| {
                        if tube.contains(p) {
                            f(p)
                        }
                    },
                );
            }
        }
    }

    /// Distinct heights `{ y : (x, y) in E, x <= x_max, y = floor(u x + v) }`,
    /// ascending.
    pub fn slice_floor_line(&self, line: &FloorLine, x_max: f64) -> Vec<i64> {
        let mut out = Vec::new();
        self.for_each_floor_hit(line, x_max, |y| out.push(y));
        out
    }

    /// Number of distinct heights hit by the floor line.
    pub fn floor_line_count(&self, line: &FloorLine, x_max: f64) -> u64 {
        let mut n = 0;
        self.for_each_floor_hit(line, x_max, |_| n += 1);
        n
    }

    /// Calls `f` once per distinct height. Hits arrive in nondecreasing
    /// height order: columns ascend, `floor(u x + v)` is monotone in `x`,
    /// and within a column cells ascend by row.
    fn for_each_floor_hit(&self, line: &FloorLine, x_max: f64, mut f: impl FnMut(i64)) {
        let Some(b) = self.bbox else { return };
        let (u, v) = (line.u(), line.v());
        let row_lo = b.y_min.floor();
        let row_hi = b.y_max.floor();
        let x_lo = b.x_min.max((row_lo - v) / u - 1.0);
        let x_hi = b.x_max.min(x_max).min((row_hi + 1.0 - v) / u + 1.0);
        if !(x_lo <= x_hi) {
            return;
        }
        let mut last: Option<i64> = None;
        self.visit_columns(
            cell_floor(x_lo),
            cell_floor(x_hi),
            |cx| {
                (
                    cell_floor(line.height_at(cx as f64)),
                    cell_floor(line.height_at(cx as f64 + 1.0)),
                )
            },
            |p| {
                if p.x <= x_max && line.contains(p) {
                    let y = p.y as i64;
                    if last != Some(y) {
                        last = Some(y);
                        f(y);
                    }
                }
            },
        );
    }
}

impl PlanarSet for PointSet {
    fn contains(&self, p: &Point) -> bool {
        let (cx, cy) = p.cell();
        self.index
            .columns(cx, cx)
            .flat_map(|ci| self.index.rows(ci, cy, cy))
            .any(|i| self.points[i] == *p)
    }

    fn count_in_rect(&self, rect: &Rect) -> u64 {
        if rect.is_empty() {
            return 0;
        }
        let (x_lo, x_hi, y_lo, y_hi) = Self::rect_cells(rect);
        let mut n = 0;
        for ci in self.index.columns(x_lo, x_hi) {
            let cx = self.index.col_x[ci];
            let r = self.index.rows(ci, y_lo, y_hi);
            let interior_x = (cx as f64) >= rect.x_min && (cx + 1) as f64 <= rect.x_max;
            if interior_x {
                // only the boundary rows can hold points outside the rect
                let first_row_full = (y_lo as f64) >= rect.y_min;
                let last_row_full = ((y_hi + 1) as f64) <= rect.y_max;
                for i in r {
                    let cy = self.index.cell_y[i];
                    if (cy == y_lo && !first_row_full) || (cy == y_hi && !last_row_full) {
                        n += rect.contains(&self.points[i]) as u64;
                    } else {
                        n += 1;
                    }
                }
            } else {
                n += r.filter(|&i| rect.contains(&self.points[i])).count() as u64;
            }
        }
        n
    }

    fn box_count(&self, spec: &BoxSpec) -> u64 {
        match spec {
            BoxSpec::FirstQuadrant { .. } | BoxSpec::Centered { .. } | BoxSpec::Window { .. } => {
                self.count_in_rect(&spec.bounding_rect())
            }
            BoxSpec::Slanted { .. } => {
                let r = spec.bounding_rect();
                if r.is_empty() {
                    return 0;
                }
                let (x_lo, x_hi, y_lo, y_hi) = Self::rect_cells(&r);
                let mut n = 0;
                self.visit_columns(x_lo, x_hi, |_| (y_lo, y_hi), |p| n += spec.contains(p) as u64);
                n
            }
        }
    }

    fn bounds(&self) -> Option<Rect> {
        self.bbox
    }

    /// Grid placements (stride `size / 2`) whose window could hold a point,
    /// derived from the occupied half-cells plus the origin placement.
    fn window_candidates(&self, size: f64, max_windows: usize) -> Vec<(f64, f64)> {
        let stride = (size / 2.0).max(f64::MIN_POSITIVE);
        let mut occupied: Vec<(i64, i64)> = self
            .points
            .iter()
            .map(|p| ((p.x / stride).floor() as i64, (p.y / stride).floor() as i64))
            .collect();
        occupied.sort_unstable();
        occupied.dedup();
        let mut cells = BTreeSet::new();
        for (i, j) in occupied {
            for di in -2..=0 {
                for dj in -2..=0 {
                    cells.insert((i + di, j + dj));
                }
            }
        }
        let mut out = vec![(0.0, 0.0)];
        out.extend(
            cells
                .into_iter()
                .map(|(i, j)| (i as f64 * stride, j as f64 * stride))
                .filter(|&c| c != (0.0, 0.0)),
        );
        if out.len() > max_windows.max(1) {
            out.truncate(max_windows.max(1));
        }
        out
    }
}

/// Closest pair by an x-sorted sweep. Used only when no pair is closer
/// than one, so the window stays short for separated inputs.
fn sweep_min_distance(points: &[Point]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let mut sorted: Vec<Point> = points.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut best = f64::INFINITY;
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            let dx = sorted[j].x - sorted[i].x;
            if dx * dx >= best {
                break;
            }
            best = best.min(sorted[i].dist2(&sorted[j]));
        }
    }
    Some(best.sqrt())
}
