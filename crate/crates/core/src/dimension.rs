//! Finite-scale dimension estimates.
//!
//! A profile records `log(count) / log(scale)` at each scale. The limsup is
//! approximated from the tail window, the last `ceil(n/3)` scales, in two
//! ways: the largest ratio there and the least-squares slope of
//! `log count` against `log scale`. Counts of 0 or 1 give ratio 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finitefield::FiniteFieldSet;
use crate::geometry::{BoxSpec, Point, Tube};
use crate::par::{map_indexed, Execution};
use crate::pointset::{PlanarSet, PointSet};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    #[default]
    RatioMaxTail,
    RegressionTail,
}

impl std::str::FromStr for EstimateMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio_max_tail" | "ratio" => Ok(EstimateMethod::RatioMaxTail),
            "regression_tail" | "regression" => Ok(EstimateMethod::RegressionTail),
            other => Err(Error::invalid(
                "method",
                format!("expected ratio_max_tail|regression_tail, got {other:?}"),
            )),
        }
    }
}

/// Which box a scale `l` denotes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxFamily {
    /// `[0, l]^2`, ratio against `log l`.
    #[default]
    FirstQuadrant,
    /// `[-l, l]^2`, ratio against `log 2l`.
    Centered,
}

impl BoxFamily {
    fn spec(self, l: f64) -> BoxSpec {
        match self {
            BoxFamily::FirstQuadrant => BoxSpec::FirstQuadrant { size: l },
            BoxFamily::Centered => BoxSpec::Centered { size: l },
        }
    }

    fn log_side(self, l: f64) -> f64 {
        match self {
            BoxFamily::FirstQuadrant => l.ln(),
            BoxFamily::Centered => (2.0 * l).ln(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionProfile {
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub ratios: Vec<f64>,
    pub method: EstimateMethod,
    pub estimate: f64,
    /// Largest ratio over the tail window.
    pub ratio_max_tail: f64,
    /// Least-squares slope over the tail window (0 with fewer than two
    /// usable points).
    pub regression_tail: f64,
}

pub fn ratio(count: u64, log_side: f64) -> f64 {
    if count <= 1 || log_side <= 0.0 {
        0.0
    } else {
        (count as f64).ln() / log_side
    }
}

fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::invalid("scales", "must not be empty"));
    }
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::invalid("scales", "must be positive and finite"));
    }
    if scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("scales", "must be strictly increasing"));
    }
    Ok(())
}

/// Number of scales in the tail window.
pub fn tail_len(n: usize) -> usize {
    n.div_ceil(3).max(1).min(n)
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return 0.0;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}

impl DimensionProfile {
    /// Builds a profile from counts; `log_side(l)` is the denominator of the
    /// ratio at scale `l`.
    pub fn from_counts(
        scales: Vec<f64>,
        counts: Vec<u64>,
        method: EstimateMethod,
        log_side: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        check_scales(&scales)?;
        if scales.len() != counts.len() {
            return Err(Error::invalid("counts", "length differs from scales"));
        }
        let logs: Vec<f64> = scales.iter().map(|&l| log_side(l)).collect();
        let ratios: Vec<f64> = counts.iter().zip(&logs).map(|(&c, &g)| ratio(c, g)).collect();
        let start = scales.len() - tail_len(scales.len());
        let ratio_max_tail = ratios[start..].iter().copied().fold(0.0, f64::max);
        let (xs, ys): (Vec<f64>, Vec<f64>) = (start..scales.len())
            .filter(|&i| counts[i] >= 1 && logs[i] > 0.0)
            .map(|i| (logs[i], (counts[i] as f64).ln()))
            .unzip();
        let regression_tail = least_squares_slope(&xs, &ys);
        let estimate = match method {
            EstimateMethod::RatioMaxTail => ratio_max_tail,
            EstimateMethod::RegressionTail => regression_tail,
        };
        Ok(DimensionProfile {
            scales,
            counts,
            ratios,
            method,
            estimate,
            ratio_max_tail,
            regression_tail,
        })
    }
}

/// `2, 4, 8, ...` up to `max`.
pub fn dyadic_scales(max: f64) -> Vec<f64> {
    std::iter::successors(Some(2.0f64), |s| Some(s * 2.0))
        .take_while(|&s| s <= max)
        .collect()
}

/// Parses `dyadic:<max>`, `dyadic:<min>:<max>` or a comma-separated list.
pub fn parse_scales(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::invalid("scales", format!("bad number {s:?}")))
    };
    let scales = if let Some(rest) = text.strip_prefix("dyadic:") {
        let parts: Vec<&str> = rest.split(':').collect();
        match parts.as_slice() {
            [max] => dyadic_scales(num(max)?),
            [min, max] => {
                let min = num(min)?;
                dyadic_scales(num(max)?).into_iter().filter(|&s| s >= min).collect()
            }
            _ => return Err(Error::invalid("scales", format!("malformed {text:?}"))),
        }
    } else {
        text.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    check_scales(&scales)?;
    Ok(scales)
}

pub fn mass_dim_profile<S: PlanarSet + ?Sized>(
    set: &S,
    scales: &[f64],
    family: BoxFamily,
    method: EstimateMethod,
    exec: Execution,
) -> Result<DimensionProfile> {
    check_scales(scales)?;
    let counts = map_indexed(exec, scales.len(), |i| set.box_count(&family.spec(scales[i])));
    DimensionProfile::from_counts(scales.to_vec(), counts, method, |l| family.log_side(l))
}

/// Largest count of a closed window `[x0, x0+l] × [y0, y0+l]` over the
/// placements suggested by [`PlanarSet::window_candidates`]. The search is
/// not exhaustive, so each count is a lower bound for its scale. The origin
/// placement is always searched, so counts dominate the first-quadrant ones.
pub fn counting_dim_profile<S: PlanarSet + ?Sized>(
    set: &S,
    sizes: &[f64],
    max_windows: usize,
    method: EstimateMethod,
    exec: Execution,
) -> Result<DimensionProfile> {
    check_scales(sizes)?;
    let counts = sizes
        .iter()
        .map(|&size| {
            let cands = set.window_candidates(size, max_windows);
            map_indexed(exec, cands.len(), |i| {
                let (x0, y0) = cands[i];
                set.box_count(&BoxSpec::Window { x0, y0, size })
            })
            .into_iter()
            .max()
            .unwrap_or(0)
        })
        .collect();
    DimensionProfile::from_counts(sizes.to_vec(), counts, method, f64::ln)
}

/// Profile of `|A ∩ {1, ..., N}|` against `log N`.
pub fn dim_1d_profile(a: &[u64], scales: &[f64], method: EstimateMethod) -> Result<DimensionProfile> {
    check_scales(scales)?;
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let counts = scales
        .iter()
        .map(|&n| {
            let lo = sorted.partition_point(|&x| x < 1);
            let hi = sorted.partition_point(|&x| (x as f64) <= n);
            (hi - lo) as u64
        })
        .collect();
    DimensionProfile::from_counts(scales.to_vec(), counts, method, f64::ln)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FfDim {
    pub value: f64,
    /// Set for the empty set, whose value is reported as 0.
    pub empty: bool,
}

/// `log |B| / log p`.
pub fn ff_dim(b: &FiniteFieldSet) -> FfDim {
    if b.is_empty() {
        return FfDim { value: 0.0, empty: true };
    }
    FfDim {
        value: (b.len() as f64).ln() / (b.p() as f64).ln(),
        empty: false,
    }
}

/// Members of a tube with their position along it, sorted by that position.
/// Box membership for annuli reuses [`Tube::frame`], the same computation
/// behind [`BoxSpec::contains`].
pub struct TubeSlice {
    tube: Tube,
    points: Vec<Point>,
    s: Vec<f64>,
}

impl TubeSlice {
    pub fn new(set: &PointSet, tube: &Tube) -> Self {
        let mut items: Vec<(f64, Point)> = set
            .slice_tube(tube)
            .points()
            .iter()
            .map(|p| (tube.frame(p).0, *p))
            .collect();
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (s, points) = items.into_iter().unzip();
        TubeSlice { tube: *tube, points, s }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `|(B_m \ B_{m/2}) ∩ E ∩ t|` where both boxes are slanted along the tube.
    pub fn annulus_count(&self, m: f64) -> u64 {
        if m >= 3.0 {
            // tube members satisfy the cross-tube condition of both boxes
            // (half-widths m/2 and m/4 exceed the tube's half-width 1/2 with
            // margin), leaving m/2 < s <= m
            let hi = self.s.partition_point(|&s| s <= m);
            let lo = self.s.partition_point(|&s| s <= m / 2.0);
            return (hi - lo.max(self.s.partition_point(|&s| s < 0.0))) as u64;
        }
        self.annulus_count_direct(m)
    }

    /// Reference count straight from [`BoxSpec::contains`].
    pub fn annulus_count_direct(&self, m: f64) -> u64 {
        let outer = BoxSpec::Slanted { size: m, tube: self.tube };
        let inner = BoxSpec::Slanted { size: m / 2.0, tube: self.tube };
        self.points
            .iter()
            .filter(|p| outer.contains(p) && !inner.contains(p))
            .count() as u64
    }
}

pub fn annulus_profile(set: &PointSet, tube: &Tube, levels: &[f64]) -> Vec<u64> {
    let slice = TubeSlice::new(set, tube);
    levels.iter().map(|&m| slice.annulus_count(m)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSearchConfig {
    pub alpha: f64,
    pub psi: f64,
    pub search_bound: u64,
}

impl LevelSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::invalid("alpha", format!("must be >= 0, got {}", self.alpha)));
        }
        if !(self.psi.is_finite() && self.psi > 0.0) {
            return Err(Error::invalid("psi", format!("must be > 0, got {}", self.psi)));
        }
        if self.search_bound == 0 {
            return Err(Error::invalid("search_bound", "must be at least 1"));
        }
        Ok(())
    }

    /// `alpha + psi/2`.
    pub fn exponent(&self) -> f64 {
        self.alpha + self.psi / 2.0
    }

    pub fn threshold(&self, m: u64) -> f64 {
        (m as f64 / 2.0).powf(self.exponent())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelProfile {
    pub u: f64,
    pub v: f64,
    pub levels: Vec<u64>,
    pub annulus_counts: Vec<u64>,
}

/// Every integer height `m <= search_bound` whose annulus count exceeds
/// `(m/2)^(alpha + psi/2)`. Taking the least qualifying height above the
/// previous level at each step visits exactly these heights in order.
pub fn find_levels(set: &PointSet, tube: &Tube, config: &LevelSearchConfig, exec: Execution) -> Result<LevelProfile> {
    config.validate()?;
    let slice = TubeSlice::new(set, tube);
    let bound = config.search_bound as usize;
    let hits = map_indexed(exec, bound, |i| {
        let m = i as u64 + 1;
        let c = slice.annulus_count(m as f64);
        (c as f64 > config.threshold(m)).then_some((m, c))
    });
    let (levels, annulus_counts) = hits.into_iter().flatten().unzip();
    Ok(LevelProfile {
        u: tube.u(),
        v: tube.v(),
        levels,
        annulus_counts,
    })
}
