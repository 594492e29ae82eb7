//! JSON run reports and CSV profile files.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::dimension::DimensionProfile;
use crate::error::{Error, Result};
use crate::io::{format_coord, write_atomic};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn now(seed: Option<u64>) -> Self {
        Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            seed,
        }
    }
}

/// A run's configuration echo, results and provenance. Only the provenance
/// block varies between identical runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(command: &str, config: &impl Serialize, results: &impl Serialize, seed: Option<u64>) -> Result<Self> {
        Ok(Report {
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            results: serde_json::to_value(results)?,
            provenance: Provenance::now(seed),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }
}

/// Decimal places for CSV ratios: at least 12 significant digits for
/// ratios in `[0.1, 10)` and a round-trip error below `1e-12`.
pub const RATIO_DECIMALS: usize = 12;

pub fn profile_csv(profile: &DimensionProfile) -> String {
    let mut out = String::from("scale,count,ratio\n");
    for ((s, c), r) in profile.scales.iter().zip(&profile.counts).zip(&profile.ratios) {
        out.push_str(&format!("{},{c},{r:.RATIO_DECIMALS$}\n", format_coord(*s)));
    }
    out
}

pub fn emit_profile_csv(profile: &DimensionProfile, path: &Path) -> Result<()> {
    if profile.scales.is_empty() {
        return Err(Error::invalid("profile", "has no scales"));
    }
    write_atomic(path, profile_csv(profile).as_bytes())
}

/// Rows `(scale, count, ratio)` of a profile CSV.
pub fn parse_profile_csv(text: &str) -> Result<Vec<(f64, u64, f64)>> {
    let mut lines = text.lines();
    if lines.next() != Some("scale,count,ratio") {
        return Err(Error::invalid("csv", "missing scale,count,ratio header"));
    }
    lines
        .map(|line| {
            let bad = || Error::invalid("csv", format!("malformed row {line:?}"));
            let mut f = line.split(',');
            let (Some(s), Some(c), Some(r), None) = (f.next(), f.next(), f.next(), f.next()) else {
                return Err(bad());
            };
            Ok((
                s.parse().map_err(|_| bad())?,
                c.parse().map_err(|_| bad())?,
                r.parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::EstimateMethod;

    fn profile() -> DimensionProfile {
        DimensionProfile::from_counts(vec![2.0, 4.0, 8.0], vec![3, 10, 40], EstimateMethod::RatioMaxTail, f64::ln).unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let p = profile();
        let text = profile_csv(&p);
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("scale,count,ratio\n2,3,1.584962500721\n"), "{text}");
        let rows = parse_profile_csv(&text).unwrap();
        for (row, r) in rows.iter().zip(&p.ratios) {
            assert!((row.2 - r).abs() < 1e-12);
        }
        assert_eq!(rows[1].0, 4.0);
        assert_eq!(rows[2].1, 40);
    }

    #[test]
    fn report_json_shape() {
        let r = Report::new("dim", &serde_json::json!({"in": "x"}), &profile(), Some(7)).unwrap();
        let v: Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["command"], "dim");
        assert_eq!(v["provenance"]["seed"], 7);
        assert_eq!(v["results"]["counts"][2], 40);
    }
}
