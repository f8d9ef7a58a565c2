//! Output files: CSV tables, field snapshots and the run manifest.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_complex::Complex64;
use oscillon::field::ComplexField;

use crate::config::Config;
use crate::CliError;

/// Lossless (17 significant digit) float formatting.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(e.to_string()))?;
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// Two-column `key,value` table.
pub fn write_pairs(path: &Path, pairs: &[(String, String)]) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = pairs.iter().map(|(k, v)| vec![k.clone(), v.clone()]).collect();
    write_csv(path, &["key", "value"], &rows)
}

/// Whitespace-separated columns under `# x re_u im_u`, or one `re_uJ im_uJ`
/// pair per harmonic `J` when `labels` is given.
pub fn write_snapshot(path: &Path, fields: &[(Option<i64>, &ComplexField)]) -> Result<(), CliError> {
    let first = fields.first().ok_or_else(|| CliError::Io("empty snapshot".into()))?.1;
    let mut out = String::from("# x");
    for (j, _) in fields {
        match j {
            Some(j) => out.push_str(&format!(" re_u{j} im_u{j}")),
            None => out.push_str(" re_u im_u"),
        }
    }
    out.push('\n');
    for (i, x) in first.grid().iter().enumerate() {
        out.push_str(&num(*x));
        for (_, f) in fields {
            let v = f.values()[i];
            out.push(' ');
            out.push_str(&num(v.re));
            out.push(' ');
            out.push_str(&num(v.im));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Snapshot contents: a plain field or a set of harmonic profiles.
#[derive(Debug, Clone)]
pub enum Snapshot {
    Field(ComplexField),
    Harmonics(Vec<(i64, ComplexField)>),
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, CliError> {
    let bad = |msg: String| CliError::Config(format!("snapshot {}: {msg}", path.display()));
    let file = fs::File::open(path).map_err(|e| bad(e.to_string()))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?.map_err(|e| bad(e.to_string()))?;
    let cols: Vec<&str> = header.trim_start_matches('#').split_whitespace().collect();
    if cols.first() != Some(&"x") || cols.len() < 3 || cols.len().is_multiple_of(2) {
        return Err(bad(format!("unexpected header `{header}`")));
    }
    let mut harmonics = Vec::new();
    for pair in cols[1..].chunks(2) {
        let re = pair[0].strip_prefix("re_u").ok_or_else(|| bad(format!("bad column `{}`", pair[0])))?;
        if re.is_empty() {
            harmonics.push(None);
        } else {
            harmonics.push(Some(re.parse::<i64>().map_err(|_| bad(format!("bad harmonic label `{}`", pair[0])))?));
        }
    }
    let mut xs = Vec::new();
    let mut data: Vec<Vec<Complex64>> = vec![Vec::new(); harmonics.len()];
    for line in lines {
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(e.to_string()))?;
        if v.len() != cols.len() {
            return Err(bad(format!("row has {} columns, header has {}", v.len(), cols.len())));
        }
        xs.push(v[0]);
        for (k, d) in data.iter_mut().enumerate() {
            d.push(Complex64::new(v[1 + 2 * k], v[2 + 2 * k]));
        }
    }
    if xs.len() < 2 {
        return Err(bad("fewer than two grid points".into()));
    }
    let length = (xs[1] - xs[0]) * xs.len() as f64;
    let mk = |d: Vec<Complex64>| ComplexField::new(length, d).map_err(|e| bad(e.to_string()));
    if harmonics.len() == 1 && harmonics[0].is_none() {
        return Ok(Snapshot::Field(mk(data.pop().expect("one column pair"))?));
    }
    let mut out = Vec::new();
    for (j, d) in harmonics.into_iter().zip(data) {
        let j = j.ok_or_else(|| bad("mixed plain and harmonic columns".into()))?;
        out.push((j, mk(d)?));
    }
    Ok(Snapshot::Harmonics(out))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// `manifest.toml`: version, command and the fully resolved configuration.
pub fn write_manifest(dir: &Path, command: &str, cfg: &Config) -> Result<(), CliError> {
    let body = toml::to_string(&cfg.resolved()).map_err(|e| CliError::Io(e.to_string()))?;
    let mut f = fs::File::create(dir.join("manifest.toml")).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(f, "# oscillon {}\n# command: {command}\n", env!("CARGO_PKG_VERSION")).map_err(|e| CliError::Io(e.to_string()))?;
    f.write_all(body.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let f = ComplexField::from_fn(16, 3.7, |x| Complex64::new(x.sin() / 3.0, (0.1 * x).exp())).unwrap();
        let g = ComplexField::from_fn(16, 3.7, |x| Complex64::new(1.0 / 7.0, x)).unwrap();
        let p = dir.path().join("a.dat");
        write_snapshot(&p, &[(None, &f)]).unwrap();
        match read_snapshot(&p).unwrap() {
            Snapshot::Field(h) => {
                assert_eq!(h.values(), f.values());
                assert!((h.length() - 3.7).abs() < 1e-14);
            }
            other => panic!("{other:?}"),
        }
        write_snapshot(&p, &[(Some(-1), &f), (Some(3), &g)]).unwrap();
        match read_snapshot(&p).unwrap() {
            Snapshot::Harmonics(h) => {
                assert_eq!(h[0].0, -1);
                assert_eq!(h[1].0, 3);
                assert_eq!(h[1].1.values(), g.values());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_snapshots_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.dat");
        for text in ["", "# y re_u im_u\n0 1 2\n1 1 2\n", "# x re_u im_u\n0 1\n", "# x re_uq im_uq\n0 1 2\n1 1 2\n"] {
            fs::write(&p, text).unwrap();
            assert!(matches!(read_snapshot(&p), Err(CliError::Config(_))), "{text:?}");
        }
    }

    #[test]
    fn numbers_keep_seventeen_digits() {
        let v = 0.1 + 0.2;
        assert_eq!(num(v).parse::<f64>().unwrap(), v);
    }
}
