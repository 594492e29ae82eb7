//! Plain-text point files: one `x y` pair per line, whitespace separated,
//! `#` starts a comment line. Integer coordinates are written without a
//! fractional part and read back exactly; other values use the shortest
//! round-trip decimal form.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::pointset::PointSet;

/// Largest magnitude below which every integer is exact in `f64`.
const EXACT_INT: f64 = 9_007_199_254_740_992.0;

pub fn format_coord(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < EXACT_INT {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

pub fn format_points(set: &PointSet, header: Option<&str>) -> String {
    let mut out = String::with_capacity(set.len() * 12);
    if let Some(h) = header {
        for line in h.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    for p in set.points() {
        let _ = writeln!(out, "{} {}", format_coord(p.x), format_coord(p.y));
    }
    out
}

/// Parses the point format; `origin` only labels error messages.
pub fn parse_pairs(text: &str, origin: &Path) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| Error::Parse {
            path: origin.to_path_buf(),
            line: n + 1,
            reason,
        };
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(format!("expected two fields, got {line:?}")));
        };
        let x: f64 = a.parse().map_err(|_| err(format!("bad number {a:?}")))?;
        let y: f64 = b.parse().map_err(|_| err(format!("bad number {b:?}")))?;
        out.push((x, y));
    }
    Ok(out)
}

pub fn parse_points(text: &str, origin: &Path) -> Result<PointSet> {
    let pairs = parse_pairs(text, origin)?;
    let mut points = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        points.push(Point::new(x, y)?);
    }
    PointSet::new(points)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

pub fn read_points(path: &Path) -> Result<PointSet> {
    parse_points(&read_to_string(path)?, path)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir: PathBuf = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let ctx = || format!("writing {}", path.display());
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(ctx(), e))?;
    tmp.write_all(contents).map_err(|e| Error::io(ctx(), e))?;
    tmp.persist(path).map_err(|e| Error::io(ctx(), e.error))?;
    Ok(())
}

pub fn write_points(path: &Path, set: &PointSet, header: Option<&str>) -> Result<()> {
    write_atomic(path, format_points(set, header).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_round_trip_is_exact() {
        let set = PointSet::from_lattice([(0, 0), (3, 7), (1 << 40, 12)]);
        let text = format_points(&set, Some("three points"));
        assert!(text.starts_with("# three points\n"));
        assert!(text.contains("1099511627776 12\n"));
        let back = parse_points(&text, Path::new("mem")).unwrap();
        assert_eq!(back.points(), set.points());
    }

    #[test]
    fn fractional_round_trip() {
        let set = PointSet::new(vec![Point::new(0.1, 2.0 / 3.0).unwrap()]).unwrap();
        let back = parse_points(&format_points(&set, None), Path::new("mem")).unwrap();
        assert_eq!(back.points(), set.points());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = parse_points("# c\n1 2\n3\n", Path::new("f.txt")).unwrap_err();
        assert_eq!(err.to_string(), "f.txt:3: expected two fields, got \"3\"");
        let err = parse_points("1 x\n", Path::new("f.txt")).unwrap_err();
        assert!(err.to_string().contains("bad number"));
        assert!(matches!(
            parse_points("-1 0\n", Path::new("f.txt")),
            Err(Error::InvalidPoint { .. })
        ));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.txt");
        write_points(&path, &PointSet::from_lattice([(1, 1)]), None).unwrap();
        write_points(&path, &PointSet::from_lattice([(2, 2)]), None).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "2 2\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
