//! The acceptance recipes, one per check, shared by the `repro` command and
//! the acceptance test suite.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dimension::{dyadic_scales, find_levels, mass_dim_profile, BoxFamily, EstimateMethod, LevelSearchConfig, TubeSlice};
use crate::error::{Error, Result};
use crate::finitefield::{
    ff_affine_intersection, ff_chebyshev_fraction, ff_double_count, ff_slice_count, ff_slice_heights, FiniteFieldSet,
};
use crate::generators::{gen_unit_line, gen_zigzag, ParabolicStaircase};
use crate::geometry::{BoxSpec, FloorLine, Point, Rect, Tube};
use crate::par::{map_indexed, Execution};
use crate::pointset::{PlanarSet, PointSet};
use crate::survey::{survey_floor_lines, tube_dim_along, SurveyConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    FfIdentity,
    FfChebyshev,
    FfAffine,
    TubeWidth,
    Example2Counts,
    Example2Dims,
    Example3Growth,
    SurveyBound,
    OracleEquivalence,
    LevelFinder,
}

impl Criterion {
    pub const ALL: [Criterion; 10] = [
        Criterion::FfIdentity,
        Criterion::FfChebyshev,
        Criterion::FfAffine,
        Criterion::TubeWidth,
        Criterion::Example2Counts,
        Criterion::Example2Dims,
        Criterion::Example3Growth,
        Criterion::SurveyBound,
        Criterion::OracleEquivalence,
        Criterion::LevelFinder,
    ];

    pub fn id(self) -> u8 {
        Self::ALL.iter().position(|&c| c == self).expect("listed") as u8 + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::FfIdentity => "ff-identity",
            Criterion::FfChebyshev => "ff-chebyshev",
            Criterion::FfAffine => "ff-affine",
            Criterion::TubeWidth => "tube-width",
            Criterion::Example2Counts => "example2-counts",
            Criterion::Example2Dims => "example2-dims",
            Criterion::Example3Growth => "example3-growth",
            Criterion::SurveyBound => "survey-bound",
            Criterion::OracleEquivalence => "oracle-equivalence",
            Criterion::LevelFinder => "level-finder",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn run(self, exec: Execution) -> CriterionResult {
        let start = Instant::now();
        let outcome = match self {
            Criterion::FfIdentity => ff_identity(FF_PRIMES, FF_SUBSETS, exec),
            Criterion::FfChebyshev => ff_chebyshev(FF_PRIMES, FF_SUBSETS, exec),
            Criterion::FfAffine => ff_affine(&[5, 11, 31], 1000),
            Criterion::TubeWidth => tube_width(10_000),
            Criterion::Example2Counts => example2_counts(1024),
            Criterion::Example2Dims => example2_dims(1024, exec),
            Criterion::Example3Growth => example3_growth(0.2, 30, 20, exec),
            Criterion::SurveyBound => survey_bound(256, 256.0, 512, exec),
            Criterion::OracleEquivalence => oracle_equivalence(50, 100_000, exec),
            Criterion::LevelFinder => level_finder(exec),
        };
        CriterionResult::from_outcome(self, outcome, start)
    }
}

pub const FF_PRIMES: &[u64] = &[3, 5, 7, 11, 13, 17, 31];
pub const FF_SUBSETS: u32 = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub details: Value,
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionResult {
    fn from_outcome(c: Criterion, outcome: Result<Check>, start: Instant) -> Self {
        let (passed, summary, details) = match outcome {
            Ok(check) => (check.passed, check.summary, check.details),
            Err(e) => (false, format!("error: {e}"), Value::Null),
        };
        CriterionResult {
            id: c.id(),
            name: c.name().to_string(),
            passed,
            summary,
            details,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.summary
        )
    }
}

/// Outcome of one recipe.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub passed: bool,
    pub summary: String,
    pub details: Value,
}

fn ff_battery(p: u64, subsets: u32) -> impl Iterator<Item = Result<FiniteFieldSet>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1E1D ^ p);
    (0..subsets).map(move |_| {
        let rho: f64 = rng.random();
        FiniteFieldSet::random(p, rho, rng.random())
    })
}

/// Line-sum identity `Σ |B ∩ l| = |B| p` over random subsets.
pub fn ff_identity(primes: &[u64], subsets: u32, exec: Execution) -> Result<Check> {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for &p in primes {
        for (i, b) in ff_battery(p, subsets).enumerate() {
            let b = b?;
            let dc = ff_double_count(&b, exec);
            checked += 1;
            if !dc.holds() {
                failures.push(json!({"p": p, "subset": i, "total": dc.total, "expected": dc.expected}));
            }
        }
    }
    let in_time = start.elapsed().as_secs_f64() < 30.0;
    Ok(Check {
        passed: failures.is_empty() && in_time,
        summary: format!("{checked} subsets, {} mismatches, within 30 s: {in_time}", failures.len()),
        details: json!({"primes": primes, "subsets_per_prime": subsets, "failures": failures}),
    })
}

/// Good fraction at `k = ln p` is at least `1 - 1/k`.
pub fn ff_chebyshev(primes: &[u64], subsets: u32, exec: Execution) -> Result<Check> {
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut min_margin = f64::INFINITY;
    for &p in primes {
        let k = (p as f64).ln();
        for (i, b) in ff_battery(p, subsets).enumerate() {
            let b = b?;
            if b.is_empty() {
                continue;
            }
            let r = ff_chebyshev_fraction(&b, k, exec)?;
            checked += 1;
            min_margin = min_margin.min(r.fraction - r.bound);
            if !r.holds() {
                failures.push(json!({"p": p, "subset": i, "fraction": r.fraction, "bound": r.bound}));
            }
        }
    }
    Ok(Check {
        passed: failures.is_empty(),
        summary: format!("{checked} nonempty subsets, {} below 1 - 1/ln p, smallest margin {min_margin:.4}", failures.len()),
        details: json!({"primes": primes, "failures": failures, "min_margin": min_margin}),
    })
}

/// `|A ∩ (uB + v)|` against the product set's line slice (distinct heights).
pub fn ff_affine(primes: &[u64], trials: u32) -> Result<Check> {
    let mut mismatches = Vec::new();
    let mut point_count_agrees_off_zero = true;
    let mut zero_slopes = 0;
    for &p in primes {
        let mut rng = ChaCha8Rng::seed_from_u64(0xAFF1 ^ p);
        for t in 0..trials {
            let a: Vec<u64> = (0..p).filter(|_| rng.random_bool(0.5)).collect();
            let b: Vec<u64> = (0..p).filter(|_| rng.random_bool(0.5)).collect();
            let (u, v) = (rng.random_range(0..p), rng.random_range(0..p));
            let lhs = ff_affine_intersection(p, &a, &b, u, v)?;
            let prod = FiniteFieldSet::product(p, &a, &b)?;
            let rhs = ff_slice_heights(&prod, u, v);
            if lhs != rhs {
                mismatches.push(json!({"p": p, "trial": t, "u": u, "v": v, "affine": lhs, "slice": rhs}));
            }
            if u == 0 {
                zero_slopes += 1;
            } else if ff_slice_count(&prod, u, v) != lhs {
                point_count_agrees_off_zero = false;
            }
        }
    }
    Ok(Check {
        passed: mismatches.is_empty() && point_count_agrees_off_zero,
        summary: format!(
            "{} triples, {} mismatches ({zero_slopes} with u = 0, where heights are counted once)",
            primes.len() as u32 * trials,
            mismatches.len()
        ),
        details: json!({"primes": primes, "mismatches": mismatches, "point_count_agrees_for_nonzero_u": point_count_agrees_off_zero}),
    })
}

/// Edge separation of random tubes with `u` log-uniform in `[1e-2, 1e2]`.
pub fn tube_width(samples: u32) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7_0BE);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = 10f64.powf(rng.random_range(-2.0..=2.0));
        let v = rng.random_range(-50.0..50.0);
        let tube = Tube::standard(u, v)?;
        worst = worst.max((tube.edge_distance() - 1.0).abs());
    }
    Ok(Check {
        passed: worst <= 1e-9,
        summary: format!("{samples} tubes, max |width - 1| = {worst:.3e}"),
        details: json!({"samples": samples, "max_error": worst}),
    })
}

/// `|E ∩ [0, N^2]^2| = N(N+1)/2` for every `N <= columns`.
pub fn example2_counts(columns: u64) -> Result<Check> {
    let stair = ParabolicStaircase::new(columns)?;
    let set = stair.materialize();
    let mut bad = Vec::new();
    for n in 1..=columns {
        let want = n * (n + 1) / 2;
        let b = BoxSpec::first_quadrant((n * n) as f64);
        let (got, got_implicit) = (set.box_count(&b), stair.box_count(&b));
        if got != want || got_implicit != want {
            bad.push(json!({"N": n, "indexed": got, "implicit": got_implicit, "expected": want}));
        }
    }
    Ok(Check {
        passed: bad.is_empty(),
        summary: format!("N = 1..={columns}, {} mismatches", bad.len()),
        details: json!({"columns": columns, "points": set.len(), "mismatches": bad}),
    })
}

/// Set ratio at `l = N^2` and the horizontal slice dimension.
pub fn example2_dims(columns: u64, exec: Execution) -> Result<Check> {
    let set = ParabolicStaircase::new(columns)?.materialize();
    let l = (columns * columns) as f64;
    let count = set.box_count(&BoxSpec::first_quadrant(l));
    let closed = ((columns * (columns + 1) / 2) as f64).ln() / l.ln();
    let ratio = mass_dim_profile(&set, &[l], BoxFamily::FirstQuadrant, EstimateMethod::RatioMaxTail, exec)?.ratios[0];
    let tube = Tube::horizontal(-0.5)?;
    let slice = tube_dim_along(&set, &tube, &dyadic_scales(l), EstimateMethod::RatioMaxTail, exec)?;
    let ratio_ok = (ratio - closed).abs() <= 1e-12;
    let slice_ok = (0.45..=0.55).contains(&slice.estimate);
    Ok(Check {
        passed: ratio_ok && slice_ok,
        summary: format!(
            "set ratio {ratio:.12} vs closed form {closed:.12}; horizontal slice estimate {:.4}",
            slice.estimate
        ),
        details: json!({"count": count, "ratio": ratio, "closed_form": closed, "slice_profile": slice}),
    })
}

/// Corner growth of the zig-zag and logarithmic tube slices inside its cone.
pub fn example3_growth(delta: f64, levels: u32, tubes: u32, exec: Execution) -> Result<Check> {
    let (set, trace) = gen_zigzag(delta, levels)?;
    if trace.stopped_early_at.is_some() {
        return Err(Error::invalid("levels", "trace stopped before the requested level"));
    }
    // dominant root of t^2 - tr t + det for M = [[1+AB, A], [B, 1]]
    let [[m00, m01], [m10, m11]] = trace.matrix();
    let (tr, det) = (m00 + m11, m00 * m11 - m01 * m10);
    let lambda = (tr + (tr * tr - 4.0 * det).sqrt()) / 2.0;
    let c = &trace.corners;
    let last_ratio = c[c.len() - 1].0 / c[c.len() - 2].0;
    let ratio_err = (last_ratio / lambda - 1.0).abs();

    let top = (std::f64::consts::FRAC_PI_4 + delta).tan();
    let xs: Vec<f64> = c.iter().map(|p| p.0).collect();
    let dyadic = dyadic_scales(*xs.last().expect("corners"));
    let per_tube = map_indexed(exec, tubes as usize, |i| {
        let slope = 1.0 + (i as f64 + 0.5) * (top - 1.0) / tubes as f64;
        let tube = Tube::along_slope(slope, 0.0)?;
        let slice = set.slice_tube(&tube);
        let mut worst: f64 = 0.0;
        let mut within = true;
        for &x in &xs[1..] {
            let n = slice.box_count(&BoxSpec::first_quadrant(x)) as f64;
            let cap = 8.0 * x.ln();
            worst = worst.max(n / cap);
            within &= n <= cap;
        }
        // profile over the traced corner heights; dyadic scales reported beside it
        let prof = tube_dim_along(&set, &tube, &xs[1..], EstimateMethod::RegressionTail, Execution::Sequential)?;
        let dy = tube_dim_along(&set, &tube, &dyadic, EstimateMethod::RegressionTail, Execution::Sequential)?;
        Ok((slope, within, worst, prof.estimate, prof.ratio_max_tail, dy.estimate))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let counts_ok = per_tube.iter().all(|t| t.1);
    let dims_ok = per_tube.iter().all(|t| t.3 <= 0.15);
    let max_dim = per_tube.iter().map(|t| t.3).fold(0.0, f64::max);
    let max_fill = per_tube.iter().map(|t| t.2).fold(0.0, f64::max);
    Ok(Check {
        passed: ratio_err <= 0.01 && counts_ok && dims_ok,
        summary: format!(
            "x_n+1/x_n = {last_ratio:.6} vs lambda1 {lambda:.6}; max count/(8 ln x_n) = {max_fill:.3}; max slice estimate {max_dim:.4}"
        ),
        details: json!({
            "lambda1": lambda,
            "last_ratio": last_ratio,
            "points": set.len(),
            "tubes": per_tube.iter().map(|t| json!({
                "slope": t.0, "counts_within": t.1, "max_count_over_cap": t.2,
                "regression_estimate": t.3, "ratio_estimate": t.4, "dyadic_regression_estimate": t.5,
            })).collect::<Vec<_>>(),
        }),
    })
}

/// Floor-line survey of the full grid `{1..N}^2`.
pub fn survey_bound(n: u64, m: f64, cells: u32, exec: Execution) -> Result<Check> {
    let grid = PointSet::from_lattice((1..=n).flat_map(|x| (1..=n).map(move |y| (x, y))));
    let r = survey_floor_lines(&grid, &SurveyConfig::grid(n, m, cells, cells), exec)?;
    let floor = r.good_fraction_floor();
    Ok(Check {
        passed: r.mean_within_bound() && r.good_fraction_holds(),
        summary: format!(
            "mean {:.4} <= {} + {}; good fraction {:.4} >= {:.4} at k = {:.4}",
            r.mean, r.bound, r.resolution_term, r.good_fraction, floor, r.k
        ),
        details: json!({
            "set_size": r.set_size, "mean": r.mean, "bound": r.bound,
            "resolution_term": r.resolution_term, "k": r.k,
            "exception_fraction": r.exception_fraction, "good_fraction": r.good_fraction,
        }),
    })
}

/// Seeded 1-separated test sets: lattice subsets, jittered grids, and
/// strips, with sizes spread up to `max_points`.
pub fn oracle_test_set(index: u32, max_points: usize) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0_AC1E ^ index as u64);
    let target = ((max_points as f64).powf((index % 10 + 1) as f64 / 10.0)) as usize;
    match index % 3 {
        0 => {
            let side = ((target as f64 / 0.4).sqrt().ceil() as u64).max(2);
            PointSet::from_lattice((0..side).flat_map(|x| (0..side).map(move |y| (x, y))).filter(|_| rng.random_bool(0.4)))
        }
        1 => {
            // spacing 2 leaves room for jitter below 1/2 in each coordinate
            let side = ((target as f64).sqrt().ceil() as u64).max(2);
            let mut pts = Vec::new();
            for i in 0..side {
                for j in 0..side {
                    let x = 2.0 * i as f64 + rng.random_range(0.0..0.49);
                    let y = 2.0 * j as f64 + rng.random_range(0.0..0.49);
                    pts.push(Point::new(x, y).expect("first quadrant"));
                }
            }
            PointSet::new(pts).expect("finite")
        }
        _ => {
            let len = (target as u64 / 3).max(2);
            PointSet::from_lattice((0..len).flat_map(|x| (0..3).map(move |y| (x, y + x / 2))))
        }
    }
}

fn naive_floor(points: &[Point], line: &FloorLine, x_max: f64) -> Vec<i64> {
    let mut ys: Vec<i64> = points
        .iter()
        .filter(|p| p.x <= x_max && p.y == (line.u() * p.x + line.v()).floor())
        .map(|p| p.y as i64)
        .collect();
    ys.sort_unstable();
    ys.dedup();
    ys
}

/// Indexed queries against full scans on seeded sets.
pub fn oracle_equivalence(sets: u32, max_points: usize, exec: Execution) -> Result<Check> {
    let outcomes = map_indexed(exec, sets as usize, |i| -> Result<(usize, u32, Vec<String>)> {
        let set = oracle_test_set(i as u32, max_points);
        let pts = set.points();
        let b = set.bbox().unwrap_or(Rect::new(0.0, 1.0, 0.0, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let mut queries = 0;
        let mut bad = Vec::new();
        let span = b.x_max.max(b.y_max).max(1.0);
        for q in 0..10 {
            let size = rng.random_range(0.5..span);
            let boxes = [
                BoxSpec::FirstQuadrant { size },
                BoxSpec::Centered { size },
                BoxSpec::Window { x0: rng.random_range(0.0..span), y0: rng.random_range(0.0..span), size: size / 3.0 },
                BoxSpec::Slanted { size, tube: Tube::standard(-rng.random_range(0.2..5.0), rng.random_range(-span..0.0))? },
            ];
            for bx in boxes {
                queries += 1;
                let naive = pts.iter().filter(|p| bx.contains(p)).count() as u64;
                if set.box_count(&bx) != naive {
                    bad.push(format!("box {bx:?}"));
                }
            }
            let u = if q % 2 == 0 { rng.random_range(0.05..20.0) } else { -rng.random_range(0.05..20.0) };
            let tube = if q == 9 { Tube::horizontal(rng.random_range(0.0..span))? } else { Tube::standard(u, rng.random_range(-span..span))? };
            let mut naive: Vec<Point> = pts.iter().copied().filter(|p| tube.contains(p)).collect();
            let mut got = set.slice_tube(&tube).points().to_vec();
            let key = |p: &Point| (p.x.to_bits(), p.y.to_bits());
            naive.sort_by_key(key);
            got.sort_by_key(key);
            queries += 1;
            if naive != got {
                bad.push(format!("tube {tube:?}"));
            }
            let line = FloorLine::new(rng.random_range(0.01..10.0), rng.random_range(0.0..span))?;
            let x_max = rng.random_range(0.0..span * 1.1);
            queries += 1;
            if set.slice_floor_line(&line, x_max) != naive_floor(pts, &line, x_max) {
                bad.push(format!("floor line {line:?} x_max {x_max}"));
            }
        }
        Ok((set.len(), queries, bad))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let largest = outcomes.iter().map(|o| o.0).max().unwrap_or(0);
    let queries: u32 = outcomes.iter().map(|o| o.1).sum();
    let bad: Vec<String> = outcomes.into_iter().flat_map(|o| o.2).collect();
    Ok(Check {
        passed: bad.is_empty(),
        summary: format!("{sets} sets (largest {largest} points), {queries} queries, {} mismatches", bad.len()),
        details: json!({"mismatches": bad.iter().take(20).collect::<Vec<_>>()}),
    })
}

/// Points at distances `2^j`, `j >= 1`, along the line of slope `slope`.
pub fn sparse_line(slope: f64, count: u32) -> Result<PointSet> {
    let (s, c) = slope.atan().sin_cos();
    PointSet::new(
        (1..=count)
            .map(|j| {
                let d = 2f64.powi(j as i32);
                Point::new(d * c, d * s)
            })
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Levels on the unit-spaced line satisfy the inequality by recount; a
/// sparse set along the same tube yields none.
pub fn level_finder(exec: Execution) -> Result<Check> {
    let slope = 1.7;
    let cfg = LevelSearchConfig {
        alpha: 0.0,
        psi: 1.0,
        search_bound: 2000,
    };
    let tube = Tube::along_slope(slope, -0.5)?;
    let line = gen_unit_line(slope, 2500)?;
    let prof = find_levels(&line, &tube, &cfg, exec)?;
    let recount = TubeSlice::new(&line, &tube);
    let violations = prof
        .levels
        .iter()
        .zip(&prof.annulus_counts)
        .filter(|&(&m, &c)| {
            let direct = recount.annulus_count_direct(m as f64);
            direct != c || direct as f64 <= cfg.threshold(m)
        })
        .count();
    let sparse = find_levels(&sparse_line(slope, 40)?, &tube, &cfg, exec)?;
    Ok(Check {
        passed: !prof.levels.is_empty() && violations == 0 && sparse.levels.is_empty(),
        summary: format!(
            "{} levels on the unit line, {violations} failing recount; {} on the sparse line",
            prof.levels.len(),
            sparse.levels.len()
        ),
        details: json!({"config": cfg, "levels": prof.levels.len(), "violations": violations, "sparse_levels": sparse.levels}),
    })
}
