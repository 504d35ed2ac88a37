//! Writes a [`RunReport`] to disk.
//!
//! `report.json` is always written. CSV output adds one file per series
//! with columns `<param>,value,lo,hi`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::cli::config::Format;
use crate::cli::report::{RunReport, Series};
use crate::criteria::audit::CriterionReport;
use crate::error::{Error, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

/// Writes the report into `dir` and returns the paths written, JSON first.
pub fn emit(report: &RunReport, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let json_path = dir.join("report.json");
    fs::write(&json_path, report.to_json()? + "\n").map_err(io_err(&json_path))?;
    let mut written = vec![json_path];
    if format == Format::Csv {
        for s in report.series() {
            let path = dir.join(format!("{}.csv", s.name));
            write_csv(&s, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes one `<exponent>.json` per audit report into `dir`.
pub fn emit_audit(reports: &[CriterionReport], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    reports
        .iter()
        .map(|r| {
            let path = dir.join(format!("{}.json", r.exponent));
            let text = serde_json::to_string_pretty(r).map_err(|e| Error::Serialize(e.to_string()))?;
            fs::write(&path, text + "\n").map_err(io_err(&path))?;
            Ok(path)
        })
        .collect()
}

fn write_csv(s: &Series, path: &Path) -> Result<()> {
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io { path: path.to_path_buf(), source },
        other => Error::Serialize(format!("{}: {other:?}", path.display())),
    };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err)?;
    w.write_record([s.param, "value", "lo", "hi"]).map_err(csv_err)?;
    for p in &s.points {
        w.serialize((p.param, p.value, p.lo, p.hi)).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::parse_config;
    use crate::cli::run::run_scenario;

    fn report(criteria: &str) -> RunReport {
        let cfg = parse_config(&format!(
            r#"{{"exponent":{{"catalog":"constant-2"}},"grid":{{"x_min":1e-8,"n":241}},"criteria":{criteria}}}"#
        ))
        .unwrap();
        run_scenario(&cfg).unwrap()
    }

    #[test]
    fn csv_files_per_series() {
        let dir = tempfile::tempdir().unwrap();
        let r = report(r#"["C2","A"]"#);
        let paths = emit(&r, Format::Csv, dir.path()).unwrap();
        let names: Vec<_> = paths.iter().map(|p| p.file_name().unwrap().to_str().unwrap()).collect();
        assert_eq!(names, ["report.json", "a.csv", "c2.csv"]);
        let c2 = fs::read_to_string(dir.path().join("c2.csv")).unwrap();
        let mut lines = c2.lines();
        assert_eq!(lines.next(), Some("a,value,lo,hi"));
        let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), r.report.c2.as_ref().unwrap().series.len());
        assert!(rows.windows(2).all(|w| w[0][0] <= w[1][0]));
        assert!(rows.iter().all(|r| r[0] <= 0.5 && r[1] >= 0.0));
        assert!(fs::read_to_string(dir.path().join("a.csv")).unwrap().starts_with("x,value,lo,hi\n"));
    }

    #[test]
    fn empty_selection_writes_metadata_only() {
        let dir = tempfile::tempdir().unwrap();
        let r = report("[]");
        let paths = emit(&r, Format::Csv, dir.path()).unwrap();
        assert_eq!(paths.len(), 1);
        let back = RunReport::from_json(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert!(back.report.c2.is_none() && back.report.c1.is_none());
        assert_eq!(back.version, r.version);
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("taken");
        fs::write(&blocker, "").unwrap();
        let err = emit(&report("[]"), Format::Json, &blocker.join("sub")).unwrap_err();
        assert!(matches!(&err, Error::Io { path, .. } if path.ends_with("sub")), "{err}");
        assert!(err.to_string().contains("taken"));
    }
}
