//! Property tests for the structural invariants.

use std::collections::BTreeSet;

use latslice::dimension::{
    counting_dim_profile, dyadic_scales, ff_dim, find_levels, mass_dim_profile, BoxFamily, DimensionProfile,
    EstimateMethod, LevelSearchConfig,
};
use latslice::finitefield::{
    ff_affine_intersection, ff_chebyshev_fraction, ff_double_count, ff_slice_count, ff_slice_heights,
    ff_slice_table, FiniteFieldSet,
};
use latslice::generators::{implicit, materialize, GeneratorSpec};
use latslice::geometry::{BoxSpec, FloorLine, Point, Rect, Tube};
use latslice::io::{format_points, parse_points};
use latslice::par::Execution;
use latslice::pointset::{PlanarSet, PointSet};
use latslice::survey::{exception_offset_scan, survey_floor_lines, SurveyConfig};
use proptest::prelude::*;

const PRIMES: &[u64] = &[2, 3, 5, 7, 11, 13];

fn lattice_set(max: u64, max_len: usize) -> impl Strategy<Value = PointSet> {
    prop::collection::vec((0..max, 0..max), 0..max_len).prop_map(PointSet::from_lattice)
}

fn ff_set() -> impl Strategy<Value = FiniteFieldSet> {
    (prop::sample::select(PRIMES), 0.0f64..=1.0, any::<u64>())
        .prop_map(|(p, rho, seed)| FiniteFieldSet::random(p, rho, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tube_width_is_one(u in prop_oneof![1e-3f64..1e3, -1e3f64..-1e-3], v in -100.0f64..100.0) {
        let t = Tube::standard(u, v).unwrap();
        prop_assert!((t.edge_distance() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tube_membership_near_edges(u in 0.05f64..20.0, v in 0.0f64..10.0, x in 0.0f64..50.0) {
        let t = Tube::standard(u, v).unwrap();
        let (lo, hi) = t.intercepts();
        let k = t.edge_slope();
        let (ylo, yhi) = (lo + k * x, hi + k * x);
        let margin = 1e-6;
        for (y, inside) in [(ylo - margin, false), (ylo + margin, true), (yhi - margin, true), (yhi + margin, false)] {
            if y >= 0.0 {
                prop_assert_eq!(t.contains(&Point::new(x, y).unwrap()), inside);
            }
        }
    }

    #[test]
    fn box_counts_are_monotone(set in lattice_set(64, 300), a in 0.0f64..80.0, b in 0.0f64..80.0) {
        let (l1, l2) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(set.box_count(&BoxSpec::first_quadrant(l1)) <= set.box_count(&BoxSpec::first_quadrant(l2)));
    }

    #[test]
    fn indexed_rect_count_matches_scan(set in lattice_set(40, 400), x0 in -5.0f64..45.0, y0 in -5.0f64..45.0, w in 0.0f64..30.0, h in 0.0f64..30.0) {
        let r = Rect::new(x0, x0 + w, y0, y0 + h);
        let naive = set.points().iter().filter(|p| r.contains(p)).count() as u64;
        prop_assert_eq!(set.count_in_rect(&r), naive);
    }

    #[test]
    fn floor_slice_lies_in_enclosing_tube(set in lattice_set(40, 400), u in 0.05f64..8.0, v in 0.0f64..20.0) {
        let line = FloorLine::new(u, v).unwrap();
        let heights: BTreeSet<i64> = set.slice_floor_line(&line, f64::INFINITY).into_iter().collect();
        let tube_heights: BTreeSet<i64> = set
            .slice_tube(&line.enclosing_tube())
            .points()
            .iter()
            .filter(|p| line.contains(p))
            .map(|p| p.y as i64)
            .collect();
        prop_assert_eq!(heights, tube_heights);
    }

    #[test]
    fn separation_matches_pairwise_scan(pts in prop::collection::vec((0.0f64..20.0, 0.0f64..20.0), 0..60)) {
        let set = PointSet::new(pts.iter().map(|&(x, y)| Point::new(x, y).unwrap()).collect()).unwrap();
        let mut min = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                min = min.min(set.points()[i].dist(&set.points()[j]));
            }
        }
        match set.validate_separation() {
            Err(_) => prop_assert!(pts.is_empty()),
            Ok(r) => {
                prop_assert_eq!(r.valid, min >= 1.0 - latslice::pointset::SEPARATION_SLACK);
                if let Some(d) = r.min_distance {
                    prop_assert!((d - min).abs() <= 1e-12 * min.max(1.0));
                }
            }
        }
    }

    #[test]
    fn point_files_round_trip(set in lattice_set(1 << 40, 50)) {
        let back = parse_points(&format_points(&set, None), std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(back.points(), set.points());
    }

    #[test]
    fn mass_never_exceeds_counting(set in lattice_set(64, 300)) {
        let scales = dyadic_scales(64.0);
        let m = mass_dim_profile(&set, &scales, BoxFamily::FirstQuadrant, EstimateMethod::RatioMaxTail, Execution::Sequential).unwrap();
        let c = counting_dim_profile(&set, &scales, 4096, EstimateMethod::RatioMaxTail, Execution::Parallel).unwrap();
        for (a, b) in m.counts.iter().zip(&c.counts) {
            prop_assert!(a <= b);
        }
        prop_assert!(m.estimate <= c.estimate + 1e-12);
        prop_assert!(m.estimate <= 2.0 + 0.5);
    }

    #[test]
    fn tail_estimate_ignores_prepended_scales(counts in prop::collection::vec(1u64..10_000, 6..12), extra in 1usize..4) {
        let n = counts.len();
        let scales: Vec<f64> = (0..n).map(|i| 2f64.powi(i as i32 + 4)).collect();
        let base = DimensionProfile::from_counts(scales.clone(), counts.clone(), EstimateMethod::RatioMaxTail, f64::ln).unwrap();
        // prepend without growing the tail window: ceil((n + e)/3) == ceil(n/3)
        let e = (0..=extra).rev().find(|&e| (n + e).div_ceil(3) == n.div_ceil(3)).unwrap_or(0);
        let mut s2: Vec<f64> = (0..e).map(|i| 2f64.powi(i as i32 + 1)).collect();
        s2.extend(&scales);
        let mut c2 = vec![1u64; e];
        c2.extend(&counts);
        let longer = DimensionProfile::from_counts(s2, c2, EstimateMethod::RatioMaxTail, f64::ln).unwrap();
        prop_assert_eq!(base.estimate, longer.estimate);
    }

    #[test]
    fn ff_identity_and_markov(b in ff_set(), k in 0.5f64..10.0) {
        let dc = ff_double_count(&b, Execution::Parallel);
        prop_assert_eq!(dc.total, b.len() * b.p());
        let table = ff_slice_table(&b, Execution::Sequential);
        prop_assert_eq!(table.iter().map(|&c| c as u64).sum::<u64>(), dc.total);
        if !b.is_empty() {
            let r = ff_chebyshev_fraction(&b, k, Execution::Sequential).unwrap();
            prop_assert!(r.holds());
        }
    }

    #[test]
    fn ff_points_lie_on_one_line_per_slope(p in prop::sample::select(PRIMES), x in 0u64..13, y in 0u64..13) {
        let (x, y) = (x % p, y % p);
        let b = FiniteFieldSet::singleton(p, x, y).unwrap();
        for u in 0..p {
            let hits: Vec<u64> = (0..p).filter(|&v| ff_slice_count(&b, u, v) == 1).collect();
            prop_assert_eq!(hits, vec![(y + p * p - u * x % p) % p]);
        }
    }

    #[test]
    fn ff_affine_is_product_slice(p in prop::sample::select(PRIMES), seed in any::<u64>(), u in 0u64..13, v in 0u64..13) {
        let (u, v) = (u % p, v % p);
        let a: Vec<u64> = (0..p).filter(|i| (seed >> i) & 1 == 1).collect();
        let b: Vec<u64> = (0..p).filter(|i| (seed >> (i + 20)) & 1 == 1).collect();
        let prod = FiniteFieldSet::product(p, &a, &b).unwrap();
        let lhs = ff_affine_intersection(p, &a, &b, u, v).unwrap();
        prop_assert_eq!(lhs, ff_slice_heights(&prod, u, v));
        if u != 0 {
            prop_assert_eq!(lhs, ff_slice_count(&prod, u, v));
        }
    }

    #[test]
    fn ff_dim_bounds_and_slice_restatement(b in ff_set(), u in 0u64..13, v in 0u64..13) {
        let d = ff_dim(&b);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&d.value));
        if b.is_empty() {
            return Ok(());
        }
        let p = b.p();
        let slice = ff_slice_count(&b, u, v);
        if slice == 0 {
            return Ok(());
        }
        let slice_set = FiniteFieldSet::from_points(p, (0..p).map(|x| (x, (u % p * x + v % p) % p)).filter(|&(x, y)| b.contains(x, y))).unwrap();
        // |B ∩ l| <= k |B| / p with the smallest such k
        let k = slice as f64 * p as f64 / b.len() as f64;
        let lhs = ff_dim(&slice_set).value;
        let rhs = (d.value - 1.0).max(0.0) + k.ln().max(0.0) / (p as f64).ln();
        prop_assert!(lhs <= rhs + 1e-9, "{} > {}", lhs, rhs);
    }

    #[test]
    fn implicit_counts_match_materialized(theta in 0.05f64..1.2, k_max in 1u32..=2, x0 in 0.0f64..200.0, y0 in 0.0f64..300.0, w in 0.0f64..200.0, h in 0.0f64..300.0) {
        for spec in [
            GeneratorSpec::ConeAnnuli { theta, k_min: 0, k_max },
            GeneratorSpec::ConeStaircase { theta, k_max },
            GeneratorSpec::ConeFixedWidth { theta, k0: 1, levels: Some(k_max) },
            GeneratorSpec::ParabolicStaircase { columns: 20 },
        ] {
            let imp = implicit(&spec).unwrap();
            let mat = materialize(&spec).unwrap();
            let r = Rect::new(x0, x0 + w, y0, y0 + h);
            prop_assert_eq!(imp.count_in_rect(&r), mat.count_in_rect(&r));
            let q = BoxSpec::first_quadrant(w + h);
            prop_assert_eq!(imp.box_count(&q), mat.box_count(&q));
            for p in mat.points().iter().take(50) {
                prop_assert!(imp.contains(p));
            }
        }
    }

    #[test]
    fn survey_mean_respects_bound(set in lattice_set(16, 120), m in 1.5f64..24.0, gu in 1u32..24, gv in 1u32..24) {
        let cfg = SurveyConfig::grid(16, m, gu, gv);
        let r = survey_floor_lines(&set, &cfg, Execution::Parallel).unwrap();
        prop_assert!(r.mean_within_bound(), "mean {} bound {} res {}", r.mean, r.bound, r.resolution_term);
        prop_assert!(r.good_fraction_holds());
    }

    #[test]
    fn survey_modes_agree(seed in any::<u64>()) {
        let set = PointSet::from_lattice((0..12u64).flat_map(|x| (0..12u64).map(move |y| (x, y))));
        let grid = survey_floor_lines(&set, &SurveyConfig::grid(12, 6.0, 120, 120), Execution::Parallel).unwrap();
        let mc = survey_floor_lines(
            &set,
            &SurveyConfig { n: 12, m: 6.0, sampling: latslice::survey::Sampling::MonteCarlo { samples: 4000, seed }, k_threshold: None },
            Execution::Parallel,
        )
        .unwrap();
        let se = mc.standard_error.unwrap();
        // grid quadrature itself is within its resolution of the integral
        prop_assert!((grid.mean - mc.mean).abs() <= 3.0 * se + grid.resolution_term + 0.05, "{} vs {} (se {})", grid.mean, mc.mean, se);
    }

    #[test]
    fn levels_satisfy_inequality(slope in 0.3f64..4.0, count in 20u64..300, psi in 0.2f64..2.0) {
        let set = latslice::generators::gen_unit_line(slope, count).unwrap();
        let tube = Tube::along_slope(slope, -0.5).unwrap();
        let cfg = LevelSearchConfig { alpha: 0.0, psi, search_bound: count + 20 };
        let prof = find_levels(&set, &tube, &cfg, Execution::Parallel).unwrap();
        prop_assert!(prof.levels.windows(2).all(|w| w[0] < w[1]));
        for (&m, &c) in prof.levels.iter().zip(&prof.annulus_counts) {
            prop_assert!(c as f64 > cfg.threshold(m));
        }
    }

    #[test]
    fn exception_fraction_monotone_in_threshold(t1 in 0.0f64..1.5, t2 in 0.0f64..1.5) {
        let set = latslice::generators::gen_unit_line(1.0, 600).unwrap();
        let scan = exception_offset_scan(&set, -1.0, (-2.0, 1.0), 9, t1, &dyadic_scales(512.0), EstimateMethod::RatioMaxTail, Execution::Parallel).unwrap();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(scan.fraction_at(hi) <= scan.fraction_at(lo));
    }
}

/// Points at distances `k + 0.37` along the line, so no point sits on an
/// annulus boundary at integer or half-integer heights.
fn offset_line(slope: f64, count: u32) -> PointSet {
    let (s, c) = slope.atan().sin_cos();
    PointSet::new(
        (0..count)
            .map(|k| {
                let d = k as f64 + 0.37;
                Point::new(d * c, d * s).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn level_profile_locally_constant_in_slope() {
    let slope: f64 = 1.3;
    let set = offset_line(slope, 300);
    let cfg = LevelSearchConfig { alpha: 0.0, psi: 1.0, search_bound: 350 };
    let base = find_levels(&set, &Tube::along_slope(slope, -0.5).unwrap(), &cfg, Execution::Sequential).unwrap();
    assert!(!base.levels.is_empty());
    for eps in [1e-9, -1e-9, 1e-7] {
        let moved = find_levels(&set, &Tube::along_slope(slope * (1.0 + eps), -0.5).unwrap(), &cfg, Execution::Sequential).unwrap();
        assert_eq!(moved.levels, base.levels);
        assert_eq!(moved.annulus_counts, base.annulus_counts);
    }
}
