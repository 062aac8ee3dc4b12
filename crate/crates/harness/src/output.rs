//! Flat-file outputs: `metrics.csv`, `summary.json` and per-series `.dat`
//! plot files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::pipeline::{MetricsRow, Summary};

pub const METRICS_HEADER: &str = "step,m,mu_G,mu_H,matching,ratio,max_load,max_path_len,h_changes,us_per_update";

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::new();
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{},{},{},{:.3}",
            r.step, r.m, r.mu_g, r.mu_h, r.matching, r.ratio, r.max_load, r.max_path_len, r.h_changes, r.us_per_update
        )
        .expect("writing to a String");
    }
    out
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> io::Result<()> {
    fs::write(path, metrics_csv(rows))
}

pub fn write_summary_json(path: &Path, summary: &Summary) -> io::Result<()> {
    let text = serde_json::to_string_pretty(summary).map_err(io::Error::other)?;
    fs::write(path, text + "\n")
}

type Series = (&'static str, fn(&MetricsRow) -> String);

/// Writes `ratio.dat`, `max_load.dat`, `h_changes.dat` and `wall_time.dat`
/// into `dir`, one `step value` line per checkpoint.
pub fn emit_plot_data(dir: &Path, rows: &[MetricsRow]) -> io::Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "no metrics rows to plot"));
    }
    let series: [Series; 4] = [
        ("ratio", |r| format!("{:.6}", r.ratio)),
        ("max_load", |r| r.max_load.to_string()),
        ("h_changes", |r| r.h_changes.to_string()),
        ("wall_time", |r| format!("{:.3}", r.us_per_update)),
    ];
    let mut written = Vec::new();
    for (name, value) in series {
        let mut text = String::new();
        for r in rows {
            writeln!(text, "{} {}", r.step, value(r)).expect("writing to a String");
        }
        let path = dir.join(format!("{name}.dat"));
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

/// Everything a run writes into its output directory.
pub fn write_run(dir: &Path, rows: &[MetricsRow], summary: &Summary) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_metrics_csv(&dir.join("metrics.csv"), rows)?;
    write_summary_json(&dir.join("summary.json"), summary)?;
    if !rows.is_empty() {
        emit_plot_data(dir, rows)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(step: usize) -> MetricsRow {
        MetricsRow {
            step,
            m: 10,
            mu_g: 4,
            mu_h: 4,
            matching: 3,
            ratio: 4.0 / 3.0,
            max_load: 2,
            max_path_len: 1,
            h_changes: 2,
            us_per_update: 1.25,
        }
    }

    #[test]
    fn csv_layout() {
        let text = metrics_csv(&[row(100)]);
        assert_eq!(text, format!("{METRICS_HEADER}\n100,10,4,4,3,1.333333,2,1,2,1.250\n"));
    }

    #[test]
    fn plot_files_have_one_line_per_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let rows: Vec<MetricsRow> = (1..=100).map(|i| row(i * 10)).collect();
        let files = emit_plot_data(dir.path(), &rows).unwrap();
        assert_eq!(files.len(), 4);
        for f in files {
            let text = fs::read_to_string(f).unwrap();
            let lines: Vec<&str> = text.lines().collect();
            assert_eq!(lines.len(), 100);
            for l in lines {
                let cols: Vec<f64> = l.split(' ').map(|c| c.parse().unwrap()).collect();
                assert_eq!(cols.len(), 2);
            }
        }
        assert!(emit_plot_data(dir.path(), &[]).is_err());
    }

    #[test]
    fn single_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        emit_plot_data(dir.path(), &[row(1)]).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("ratio.dat")).unwrap(), "1 1.333333\n");
    }
}
