//! Surveys over floor-line and tube parameters.
//!
//! [`survey_floor_lines`] evaluates `|E_N ∩ floor(l_{u,v})|` over the
//! parameter box `(0, M]^2`, either at the centres of a `gu × gv` grid or at
//! seeded uniform samples, and compares the average with `|E_N| / M`.
//!
//! Grid evaluation has an exact discretization allowance. For fixed `u`, a
//! point `(x, y)` lies on `floor(u x + v) = y` for `v` in a half-open
//! interval of length 1, which contains at most `ceil(gv / M)` of the `v`
//! centres. The grid mean is therefore at most `|E_N| ceil(gv/M) / gv`, and
//! the excess over `|E_N| / M` is reported as the resolution term (zero when
//! `M / gv` divides 1). Sampled surveys use three standard errors instead.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dimension::{mass_dim_profile, BoxFamily, DimensionProfile, EstimateMethod};
use crate::error::{Error, Result};
use crate::geometry::{FloorLine, Tube};
use crate::par::{map_indexed, Execution};
use crate::pointset::PointSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    Grid { gu: u32, gv: u32 },
    MonteCarlo { samples: u32, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyConfig {
    pub n: u64,
    pub m: f64,
    pub sampling: Sampling,
    /// Defaults to `sqrt(ln M ln N)`.
    #[serde(default)]
    pub k_threshold: Option<f64>,
}

impl SurveyConfig {
    pub fn grid(n: u64, m: f64, gu: u32, gv: u32) -> Self {
        SurveyConfig {
            n,
            m,
            sampling: Sampling::Grid { gu, gv },
            k_threshold: None,
        }
    }

    pub fn k(&self) -> f64 {
        self.k_threshold
            .unwrap_or_else(|| (self.m.ln() * (self.n as f64).ln()).sqrt())
    }

    /// `N / M`.
    pub fn alpha_ratio(&self) -> f64 {
        self.n as f64 / self.m
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("N", "must be at least 2"));
        }
        if !(self.m.is_finite() && self.m >= 1.0) {
            return Err(Error::invalid("M", format!("must be at least 1, got {}", self.m)));
        }
        match self.sampling {
            Sampling::Grid { gu, gv } if gu == 0 || gv == 0 => {
                return Err(Error::invalid("grid", "cell counts must be positive"))
            }
            Sampling::MonteCarlo { samples: 0, .. } => {
                return Err(Error::invalid("samples", "must be positive"))
            }
            _ => {}
        }
        let k = self.k();
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::invalid(
                "k_threshold",
                format!("must be positive, got {k} (the default vanishes when M = 1)"),
            ));
        }
        Ok(())
    }

    fn parameters(&self) -> Vec<(f64, f64)> {
        match self.sampling {
            Sampling::Grid { gu, gv } => {
                let (hu, hv) = (self.m / gu as f64, self.m / gv as f64);
                (0..gu)
                    .flat_map(|i| (0..gv).map(move |j| ((i as f64 + 0.5) * hu, (j as f64 + 0.5) * hv)))
                    .collect()
            }
            Sampling::MonteCarlo { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..samples)
                    .map(|_| {
                        // (0, M]: reflect the half-open [0, M) draw
                        let u = self.m - rng.random::<f64>() * self.m;
                        let v = self.m - rng.random::<f64>() * self.m;
                        (u, v)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyReport {
    pub config: SurveyConfig,
    /// `|E_N|`.
    pub set_size: u64,
    /// Evaluated `(u, v)` parameters, `u`-major for grids.
    pub parameters: Vec<(f64, f64)>,
    pub counts: Vec<u64>,
    pub mean: f64,
    /// `|E_N| / M`.
    pub bound: f64,
    /// Discretization allowance added to `bound` (three standard errors for
    /// sampled surveys).
    pub resolution_term: f64,
    pub standard_error: Option<f64>,
    pub k: f64,
    /// Counts above `k |E_N| / M` are exceptional.
    pub threshold: f64,
    pub exception_fraction: f64,
    pub good_fraction: f64,
}

impl SurveyReport {
    pub fn mean_within_bound(&self) -> bool {
        self.mean <= self.bound + self.resolution_term
    }

    /// `1 - 1/k` less the share of the resolution term.
    pub fn good_fraction_floor(&self) -> f64 {
        if self.bound == 0.0 {
            return 1.0;
        }
        1.0 - (self.bound + self.resolution_term) / (self.k * self.bound)
    }

    pub fn good_fraction_holds(&self) -> bool {
        self.good_fraction >= self.good_fraction_floor()
    }
}

pub fn survey_floor_lines(set: &PointSet, config: &SurveyConfig, exec: Execution) -> Result<SurveyReport> {
    config.validate()?;
    let window = set.restrict_to_square(config.n as f64);
    let x_max = config.n as f64;
    let parameters = config.parameters();
    let counts = map_indexed(exec, parameters.len(), |i| {
        let (u, v) = parameters[i];
        window.floor_line_count(&FloorLine::unchecked(u, v), x_max)
    });
    let size = window.len() as u64;
    let total = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / total;
    let bound = size as f64 / config.m;
    let k = config.k();
    let threshold = k * bound;
    let exceptional = counts.iter().filter(|&&c| c as f64 > threshold).count() as f64;
    let (resolution_term, standard_error) = match config.sampling {
        Sampling::Grid { gv, .. } => {
            let per_interval = (gv as f64 / config.m).ceil();
            ((size as f64 * per_interval / gv as f64 - bound).max(0.0), None)
        }
        Sampling::MonteCarlo { .. } => {
            let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (total - 1.0).max(1.0);
            let se = (var / total).sqrt();
            (3.0 * se, Some(se))
        }
    };
    Ok(SurveyReport {
        config: *config,
        set_size: size,
        parameters,
        counts,
        mean,
        bound,
        resolution_term,
        standard_error,
        k,
        threshold,
        exception_fraction: exceptional / total,
        good_fraction: 1.0 - exceptional / total,
    })
}

/// Mass-dimension profile of `E ∩ t` with first-quadrant boxes.
pub fn tube_dim_along(
    set: &PointSet,
    tube: &Tube,
    scales: &[f64],
    method: EstimateMethod,
    exec: Execution,
) -> Result<DimensionProfile> {
    mass_dim_profile(&set.slice_tube(tube), scales, BoxFamily::FirstQuadrant, method, exec)
}

/// Finite-scale diagnostic: which sampled tubes have a slice estimate above
/// `threshold_dim`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceptionScan {
    pub scales: Vec<f64>,
    pub threshold_dim: f64,
    /// `(u, v)` of each sampled tube.
    pub tubes: Vec<(f64, f64)>,
    pub estimates: Vec<f64>,
    pub fraction: f64,
}

impl ExceptionScan {
    /// Fraction at another threshold, from the stored estimates.
    pub fn fraction_at(&self, threshold_dim: f64) -> f64 {
        if self.estimates.is_empty() {
            return 0.0;
        }
        self.estimates.iter().filter(|&&e| e > threshold_dim).count() as f64 / self.estimates.len() as f64
    }
}

fn midpoints(lo: f64, hi: f64, n: u32) -> Vec<f64> {
    (0..n).map(|i| lo + (i as f64 + 0.5) * (hi - lo) / n as f64).collect()
}

#[allow(clippy::too_many_arguments)]
fn scan(
    set: &PointSet,
    tubes: Vec<Tube>,
    threshold_dim: f64,
    scales: &[f64],
    method: EstimateMethod,
    exec: Execution,
) -> Result<ExceptionScan> {
    let profiles = map_indexed(exec, tubes.len(), |i| {
        tube_dim_along(set, &tubes[i], scales, method, Execution::Sequential)
    });
    let estimates = profiles
        .into_iter()
        .map(|p| p.map(|p| p.estimate))
        .collect::<Result<Vec<_>>>()?;
    let mut out = ExceptionScan {
        scales: scales.to_vec(),
        threshold_dim,
        tubes: tubes.iter().map(|t| (t.u(), t.v())).collect(),
        estimates,
        fraction: 0.0,
    };
    out.fraction = out.fraction_at(threshold_dim);
    Ok(out)
}

/// Tubes `t_{u, v0}` for `u` at the midpoints of `u_samples` equal cells of
/// `u_interval`. The interval may be negative, for tubes rising to the right,
/// but must not contain 0.
#[allow(clippy::too_many_arguments)]
pub fn exception_ray_scan(
    set: &PointSet,
    v0: f64,
    u_interval: (f64, f64),
    u_samples: u32,
    threshold_dim: f64,
    scales: &[f64],
    method: EstimateMethod,
    exec: Execution,
) -> Result<ExceptionScan> {
    let (lo, hi) = u_interval;
    if !(lo < hi) || (lo <= 0.0 && hi >= 0.0) {
        return Err(Error::invalid("u_interval", "must be nonempty and exclude 0"));
    }
    if u_samples == 0 {
        return Err(Error::invalid("u_samples", "must be positive"));
    }
    let tubes = midpoints(lo, hi, u_samples)
        .into_iter()
        .map(|u| Tube::standard(u, v0))
        .collect::<Result<Vec<_>>>()?;
    scan(set, tubes, threshold_dim, scales, method, exec)
}

/// Tubes `t_{u0, v}` for `v` at the midpoints of `v_samples` equal cells.
#[allow(clippy::too_many_arguments)]
pub fn exception_offset_scan(
    set: &PointSet,
    u0: f64,
    v_interval: (f64, f64),
    v_samples: u32,
    threshold_dim: f64,
    scales: &[f64],
    method: EstimateMethod,
    exec: Execution,
) -> Result<ExceptionScan> {
    let (lo, hi) = v_interval;
    if !(lo < hi) || v_samples == 0 {
        return Err(Error::invalid("v_interval", "must be nonempty with at least one sample"));
    }
    let tubes = midpoints(lo, hi, v_samples)
        .into_iter()
        .map(|v| Tube::standard(u0, v))
        .collect::<Result<Vec<_>>>()?;
    scan(set, tubes, threshold_dim, scales, method, exec)
}
