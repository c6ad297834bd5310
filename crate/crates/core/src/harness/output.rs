//! CSV outputs. Every file is written to a temporary sibling first and then
//! renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use super::record::{AggregateStat, RunRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub agent: String,
    pub metric: String,
    pub stat: AggregateStat,
}

impl AggregateRow {
    pub fn new(agent: &str, metric: impl Into<String>, stat: AggregateStat) -> Self {
        AggregateRow {
            agent: agent.to_string(),
            metric: metric.into(),
            stat,
        }
    }
}

/// One point of a plotted series.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub series: String,
    pub agent: String,
    pub x: f64,
    pub y: f64,
    pub err: f64,
}

impl CurveRow {
    pub fn new(series: &str, agent: &str, x: f64, stat: AggregateStat) -> Self {
        CurveRow {
            series: series.to_string(),
            agent: agent.to_string(),
            x,
            y: stat.mean,
            err: stat.std_error,
        }
    }

    pub fn exact(series: &str, agent: &str, x: f64, y: f64) -> Self {
        CurveRow {
            series: series.to_string(),
            agent: agent.to_string(),
            x,
            y,
            err: 0.0,
        }
    }
}

/// Everything one experiment writes.
#[derive(Debug, Clone, Default)]
pub struct Artifact {
    pub name: String,
    /// Lines written as `#` comments at the top of each file.
    pub header: Vec<String>,
    pub aggregates: Vec<AggregateRow>,
    pub curves: Vec<CurveRow>,
    /// Per-run logs keyed by agent label.
    pub runs: Vec<(String, RunRecord)>,
}

impl Artifact {
    pub fn new(name: impl Into<String>) -> Self {
        Artifact {
            name: name.into(),
            ..Artifact::default()
        }
    }
}

fn slug(label: &str) -> String {
    let mut s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    s.trim_matches('_').to_string()
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |source| Error::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(err)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.flush().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

fn with_header(header: &[String], build: impl FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for line in header {
        writeln!(buf, "# {line}")?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        build(&mut w)?;
        w.flush()?;
    }
    Ok(buf)
}

pub fn aggregate_csv(art: &Artifact) -> Result<Vec<u8>> {
    with_header(&art.header, |w| {
        w.write_record(["agent", "metric", "mean", "stderr", "n_seeds"])?;
        for r in &art.aggregates {
            w.write_record([
                r.agent.clone(),
                r.metric.clone(),
                r.stat.mean.to_string(),
                r.stat.std_error.to_string(),
                r.stat.n_seeds.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn curves_csv(art: &Artifact) -> Result<Vec<u8>> {
    with_header(&art.header, |w| {
        w.write_record(["series", "agent", "x", "y", "err"])?;
        for r in &art.curves {
            w.write_record([
                r.series.clone(),
                r.agent.clone(),
                r.x.to_string(),
                r.y.to_string(),
                r.err.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn steps_csv(rec: &RunRecord) -> Result<Vec<u8>> {
    let header = [format!("seed={} config={}", rec.seed, rec.fingerprint)];
    with_header(&header, |w| {
        w.write_record(["t", "s", "a", "r_ext", "r_int", "done", "unique_states"])?;
        for r in &rec.steps {
            w.write_record([
                r.t.to_string(),
                r.s.to_string(),
                r.a.to_string(),
                r.r_ext.to_string(),
                r.r_int.to_string(),
                u8::from(r.done).to_string(),
                r.unique_states.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn episodes_csv(rec: &RunRecord) -> Result<Vec<u8>> {
    let header = [format!("seed={} config={}", rec.seed, rec.fingerprint)];
    with_header(&header, |w| {
        w.write_record(["episode", "length", "return", "completed"])?;
        for e in &rec.episodes {
            w.write_record([
                e.episode.to_string(),
                e.length.to_string(),
                e.ret.to_string(),
                u8::from(e.completed).to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Write `<name>_aggregate.csv`, `<name>_plot.csv` and, when `run_logs`,
/// per-run step and episode logs under `runs/`. Returns the written paths.
pub fn emit_outputs(dir: &Path, art: &Artifact, run_logs: bool) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |path: PathBuf, bytes: Vec<u8>| -> Result<()> {
        write_atomic(&path, &bytes)?;
        written.push(path);
        Ok(())
    };
    put(dir.join(format!("{}_aggregate.csv", art.name)), aggregate_csv(art)?)?;
    if !art.curves.is_empty() {
        put(dir.join(format!("{}_plot.csv", art.name)), curves_csv(art)?)?;
    }
    if run_logs {
        for (label, rec) in &art.runs {
            let stem = format!("{}_{}_seed{}", art.name, slug(label), rec.seed);
            if !rec.steps.is_empty() {
                put(dir.join("runs").join(format!("{stem}_steps.csv")), steps_csv(rec)?)?;
            }
            put(dir.join("runs").join(format!("{stem}_episodes.csv")), episodes_csv(rec)?)?;
        }
    }
    Ok(written)
}
