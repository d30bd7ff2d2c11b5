//! Report rendering and persistence.

use std::io::Write;
use std::path::{Path, PathBuf};

use carnot_lw::harness::Report;

pub fn table(reports: &[Report]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut s = format!(
        "{:<width$}  {:>14}  {:>14}  {:>12}  {:>10}  pass\n",
        "name", "lhs", "rhs", "deficit", "tol"
    );
    for r in reports {
        s.push_str(&format!(
            "{:<width$}  {:>14.6e}  {:>14.6e}  {:>12.4e}  {:>10.2e}  {}\n",
            r.name,
            r.lhs,
            r.rhs,
            r.deficit,
            r.tolerance,
            if r.pass { "yes" } else { "NO" }
        ));
    }
    s
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

/// Replaces `path` in one rename, so readers never see a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn jsonl(reports: &[Report]) -> String {
    reports
        .iter()
        .map(|r| serde_json::to_string(r).expect("reports serialize") + "\n")
        .collect()
}

pub fn csv(reports: &[Report]) -> std::io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "lhs", "rhs", "deficit", "tolerance", "pass"])?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.deficit.to_string(),
            r.tolerance.to_string(),
            r.pass.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

/// Writes `PREFIX.jsonl` and `PREFIX.csv`.
pub fn write(prefix: &Path, reports: &[Report]) -> std::io::Result<()> {
    write_atomic(&with_ext(prefix, "jsonl"), jsonl(reports).as_bytes())?;
    write_atomic(&with_ext(prefix, "csv"), &csv(reports)?)
}
