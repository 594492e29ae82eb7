//! Lines and point sets in `F_p^2`.
//!
//! Lines are `y = u x + v` for `u, v` in `F_p`; vertical lines are not part
//! of the family, so there are exactly `p^2` lines and every point lies on
//! exactly `p` of them (one per slope).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};

/// Deterministic trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Largest modulus accepted; keeps the `p^2` grid and `p^3` scans small.
pub const MAX_PRIME: u64 = 10_007;

fn check_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime { p });
    }
    if p > MAX_PRIME {
        return Err(Error::invalid("p", format!("must not exceed {MAX_PRIME}")));
    }
    Ok(())
}

/// Dense `p × p` membership grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteFieldSet {
    p: u64,
    bits: Vec<u64>,
    len: u64,
}

impl FiniteFieldSet {
    pub fn empty(p: u64) -> Result<Self> {
        check_prime(p)?;
        let cells = (p * p) as usize;
        Ok(FiniteFieldSet {
            p,
            bits: vec![0; cells.div_ceil(64)],
            len: 0,
        })
    }

    pub fn full(p: u64) -> Result<Self> {
        let mut s = Self::empty(p)?;
        for x in 0..p {
            for y in 0..p {
                s.insert(x, y);
            }
        }
        Ok(s)
    }

    pub fn singleton(p: u64, x: u64, y: u64) -> Result<Self> {
        Self::from_points(p, [(x, y)])
    }

    pub fn from_points(p: u64, points: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let mut s = Self::empty(p)?;
        for (x, y) in points {
            if x >= p || y >= p {
                return Err(Error::invalid("point", format!("({x}, {y}) outside F_{p}^2")));
            }
            s.insert(x, y);
        }
        Ok(s)
    }

    /// Each cell independently with probability `rho`.
    pub fn random(p: u64, rho: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::invalid("rho", format!("must lie in [0, 1], got {rho}")));
        }
        let mut s = Self::empty(p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for x in 0..p {
            for y in 0..p {
                if rng.random_bool(rho) {
                    s.insert(x, y);
                }
            }
        }
        Ok(s)
    }

    /// `{(b, a) : a ∈ A, b ∈ B}`: B along x, A along y.
    pub fn product(p: u64, a: &[u64], b: &[u64]) -> Result<Self> {
        Self::from_points(p, b.iter().flat_map(|&x| a.iter().map(move |&y| (x, y))))
    }

    fn insert(&mut self, x: u64, y: u64) {
        let i = (x * self.p + y) as usize;
        let (w, b) = (i / 64, i % 64);
        if self.bits[w] & (1 << b) == 0 {
            self.bits[w] |= 1 << b;
            self.len += 1;
        }
    }

    pub fn contains(&self, x: u64, y: u64) -> bool {
        if x >= self.p || y >= self.p {
            return false;
        }
        let i = (x * self.p + y) as usize;
        self.bits[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn points(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let p = self.p;
        (0..p).flat_map(move |x| (0..p).filter(move |&y| self.contains(x, y)).map(move |y| (x, y)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineFp {
    pub u: u64,
    pub v: u64,
}

impl LineFp {
    pub fn y_at(&self, p: u64, x: u64) -> u64 {
        (self.u * x + self.v) % p
    }
}

pub fn ff_line_points(p: u64, u: u64, v: u64) -> Result<Vec<(u64, u64)>> {
    check_prime(p)?;
    if u >= p || v >= p {
        return Err(Error::invalid("line", format!("u = {u}, v = {v} must lie in 0..{p}")));
    }
    let line = LineFp { u, v };
    Ok((0..p).map(|x| (x, line.y_at(p, x))).collect())
}

/// `|B ∩ l_{u,v}|`; `u` and `v` are reduced mod `p`.
pub fn ff_slice_count(b: &FiniteFieldSet, u: u64, v: u64) -> u64 {
    let p = b.p;
    let line = LineFp { u: u % p, v: v % p };
    (0..p).filter(|&x| b.contains(x, line.y_at(p, x))).count() as u64
}

/// Number of distinct `y` values in `B ∩ l_{u,v}`.
pub fn ff_slice_heights(b: &FiniteFieldSet, u: u64, v: u64) -> u64 {
    let p = b.p;
    let line = LineFp { u: u % p, v: v % p };
    let mut seen = vec![false; p as usize];
    let mut n = 0;
    for x in 0..p {
        let y = line.y_at(p, x);
        if b.contains(x, y) && !seen[y as usize] {
            seen[y as usize] = true;
            n += 1;
        }
    }
    n
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DoubleCount {
    pub total: u64,
    pub expected: u64,
}

impl DoubleCount {
    pub fn holds(&self) -> bool {
        self.total == self.expected
    }
}

/// `Σ_{(u,v)} |B ∩ l_{u,v}|` by scanning every line, beside `|B| p`.
pub fn ff_double_count(b: &FiniteFieldSet, exec: Execution) -> DoubleCount {
    let p = b.p;
    let rows = map_indexed(exec, p as usize, |u| {
        (0..p).map(|v| ff_slice_count(b, u as u64, v)).sum::<u64>()
    });
    DoubleCount {
        total: rows.into_iter().sum(),
        expected: b.len * p,
    }
}

/// All `p^2` slice counts, indexed `u * p + v`, accumulated from point
/// incidences: `(x, y)` lies on `l_{u, y - u x}` for each `u`.
pub fn ff_slice_table(b: &FiniteFieldSet, exec: Execution) -> Vec<u32> {
    let p = b.p;
    let pts: Vec<(u64, u64)> = b.points().collect();
    map_indexed(exec, p as usize, |u| {
        let u = u as u64;
        let mut row = vec![0u32; p as usize];
        for &(x, y) in &pts {
            let v = (y + p * p - u * x % p) % p;
            row[v as usize] += 1;
        }
        row
    })
    .concat()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChebyshevReport {
    pub k: f64,
    /// Lines with `|B ∩ l| <= k |B| / p`.
    pub good: u64,
    pub total: u64,
    pub fraction: f64,
    /// `1 - 1/k`.
    pub bound: f64,
}

impl ChebyshevReport {
    /// Markov on the exact mean `|B|/p`: at most `total / k` lines are bad.
    pub fn holds(&self) -> bool {
        ((self.total - self.good) as f64) * self.k <= self.total as f64
    }
}

pub fn ff_chebyshev_fraction(b: &FiniteFieldSet, k: f64, exec: Execution) -> Result<ChebyshevReport> {
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::invalid("k", format!("must be positive, got {k}")));
    }
    Ok(chebyshev_from_table(&ff_slice_table(b, exec), b.p, b.len, k))
}

fn chebyshev_from_table(table: &[u32], p: u64, size: u64, k: f64) -> ChebyshevReport {
    let limit = k * size as f64;
    let good = table.iter().filter(|&&c| (c as u64 * p) as f64 <= limit).count() as u64;
    let total = table.len() as u64;
    ChebyshevReport {
        k,
        good,
        total,
        fraction: good as f64 / total as f64,
        bound: 1.0 - 1.0 / k,
    }
}

/// `|A ∩ (u B + v)|` over `F_p`.
pub fn ff_affine_intersection(p: u64, a: &[u64], b: &[u64], u: u64, v: u64) -> Result<u64> {
    check_prime(p)?;
    if let Some(bad) = a.iter().chain(b).chain([&u, &v]).find(|&&e| e >= p) {
        return Err(Error::invalid("element", format!("{bad} is not in 0..{p}")));
    }
    let mut in_a = vec![false; p as usize];
    for &e in a {
        in_a[e as usize] = true;
    }
    let mut hit = vec![false; p as usize];
    for &e in b {
        let y = ((u * e + v) % p) as usize;
        if in_a[y] {
            hit[y] = true;
        }
    }
    Ok(hit.iter().filter(|&&h| h).count() as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetFamily {
    Density { rho: f64, seed: u64 },
    Full,
    Singleton,
}

impl SetFamily {
    pub fn build(&self, p: u64) -> Result<FiniteFieldSet> {
        match *self {
            SetFamily::Density { rho, seed } => FiniteFieldSet::random(p, rho, seed ^ p),
            SetFamily::Full => FiniteFieldSet::full(p),
            SetFamily::Singleton => FiniteFieldSet::singleton(p, 1, 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    LogP,
    Const(f64),
}

impl KRule {
    pub fn k(&self, p: u64) -> f64 {
        match *self {
            KRule::LogP => (p as f64).ln(),
            KRule::Const(k) => k,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitRow {
    pub p: u64,
    pub size: u64,
    pub report: ChebyshevReport,
}

pub fn ff_exception_limit_table(
    family: &SetFamily,
    primes: &[u64],
    k_rule: KRule,
    exec: Execution,
) -> Result<Vec<LimitRow>> {
    if primes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("primes", "must be strictly increasing"));
    }
    primes
        .iter()
        .map(|&p| {
            let set = family.build(p)?;
            let report = ff_chebyshev_fraction(&set, k_rule.k(p), exec)?;
            Ok(LimitRow {
                p,
                size: set.len(),
                report,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(10_007));
        assert!(!is_prime(10_001));
        assert!(matches!(FiniteFieldSet::empty(9), Err(Error::NotPrime { p: 9 })));
    }

    #[test]
    fn line_points() {
        assert_eq!(ff_line_points(3, 0, 1).unwrap(), [(0, 1), (1, 1), (2, 1)]);
        assert_eq!(ff_line_points(5, 1, 0).unwrap(), (0..5).map(|x| (x, x)).collect::<Vec<_>>());
        let pts = ff_line_points(7, 3, 2).unwrap();
        assert_eq!(pts, [(0, 2), (1, 5), (2, 1), (3, 4), (4, 0), (5, 3), (6, 6)]);
        assert!(ff_line_points(4, 0, 0).is_err());
        assert!(ff_line_points(5, 5, 0).is_err());
    }

    #[test]
    fn slice_counts_basic() {
        let full = FiniteFieldSet::full(7).unwrap();
        assert_eq!(full.len(), 49);
        assert_eq!(ff_slice_count(&full, 3, 4), 7);
        let empty = FiniteFieldSet::empty(7).unwrap();
        assert_eq!(ff_slice_count(&empty, 3, 4), 0);
    }

    #[test]
    fn double_count_small_cases() {
        let one = FiniteFieldSet::singleton(3, 1, 1).unwrap();
        assert_eq!(ff_double_count(&one, Execution::Sequential).total, 3);
        let full = FiniteFieldSet::full(3).unwrap();
        assert_eq!(ff_double_count(&full, Execution::Parallel).total, 27);
    }

    #[test]
    fn table_matches_line_scan() {
        let b = FiniteFieldSet::random(13, 0.3, 5).unwrap();
        let table = ff_slice_table(&b, Execution::Parallel);
        for u in 0..13 {
            for v in 0..13 {
                assert_eq!(table[(u * 13 + v) as usize] as u64, ff_slice_count(&b, u, v));
            }
        }
    }

    #[test]
    fn chebyshev_full_grid() {
        let full = FiniteFieldSet::full(11).unwrap();
        let r = ff_chebyshev_fraction(&full, 2.0, Execution::Sequential).unwrap();
        assert_eq!(r.fraction, 1.0);
        assert!(r.holds());
        assert!(ff_chebyshev_fraction(&FiniteFieldSet::empty(11).unwrap(), 2.0, Execution::Sequential).is_err());
    }

    #[test]
    fn affine_small_cases() {
        let a = [1, 4, 6];
        assert_eq!(ff_affine_intersection(11, &a, &a, 1, 0).unwrap(), 3);
        assert_eq!(ff_affine_intersection(11, &a, &a, 0, 4).unwrap(), 1);
        assert_eq!(ff_affine_intersection(11, &a, &a, 0, 5).unwrap(), 0);
        // 2 * {1,4,6} + 3 = {5, 0, 4}
        assert_eq!(ff_affine_intersection(11, &a, &a, 2, 3).unwrap(), 1);
    }

    #[test]
    fn singleton_family_fraction() {
        let rows = ff_exception_limit_table(&SetFamily::Singleton, &[11, 31], KRule::LogP, Execution::Sequential).unwrap();
        for row in rows {
            // a single point exceeds k/p only on the p lines through it
            let p = row.p;
            assert_eq!(row.report.good, p * p - p);
        }
    }
}
