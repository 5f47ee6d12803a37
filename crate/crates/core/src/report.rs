//! CSV output of metrics series and the `run` driver behind the CLI.
//!
//! Floats are written in Rust's shortest round-trip decimal form, so parsing
//! a file back yields the exact values that were written.

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use crate::config::ExperimentConfig;
use crate::engine::{self, Execution, MeanRecord, MetricsRecord, MetricsSeries};
use crate::error::{Error, Result};

pub const HEADER: [&str; 7] = [
    "t",
    "mse_unweighted",
    "mse_weighted",
    "mean_variance",
    "active_count",
    "evictions_cum",
    "resets_cum",
];

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub output_dir: PathBuf,
    pub emit_per_seed: bool,
    pub execution: Execution,
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_mean_csv<W: Write>(rows: &[MeanRecord], w: W) -> Result<()> {
    let mut w = writer(w);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.mse_unweighted.to_string(),
            r.mse_weighted.to_string(),
            r.mean_variance.to_string(),
            r.active_count.to_string(),
            r.evictions_cum.to_string(),
            r.resets_cum.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_seed_csv<W: Write>(rows: &[MetricsRecord], w: W) -> Result<()> {
    let mut w = writer(w);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.mse_unweighted.to_string(),
            r.mse_weighted.to_string(),
            r.mean_variance.to_string(),
            r.active_count.to_string(),
            r.evictions_cum.to_string(),
            r.resets_cum.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn rows<R: Read>(r: R) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::Reader::from_reader(r);
    if reader.headers()?.iter().ne(HEADER) {
        return Err(Error::config("header", "not a metrics CSV"));
    }
    Ok(reader.records().collect::<std::result::Result<_, _>>()?)
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize) -> Result<T> {
    row.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::config(HEADER[i], format!("unparsable value in row {row:?}")))
}

pub fn read_mean_csv<R: Read>(r: R) -> Result<Vec<MeanRecord>> {
    rows(r)?
        .iter()
        .map(|row| {
            Ok(MeanRecord {
                t: field(row, 0)?,
                mse_unweighted: field(row, 1)?,
                mse_weighted: field(row, 2)?,
                mean_variance: field(row, 3)?,
                active_count: field(row, 4)?,
                evictions_cum: field(row, 5)?,
                resets_cum: field(row, 6)?,
            })
        })
        .collect()
}

pub fn read_seed_csv<R: Read>(r: R) -> Result<Vec<MetricsRecord>> {
    rows(r)?
        .iter()
        .map(|row| {
            Ok(MetricsRecord {
                t: field(row, 0)?,
                mse_unweighted: field(row, 1)?,
                mse_weighted: field(row, 2)?,
                mean_variance: field(row, 3)?,
                active_count: field(row, 4)?,
                evictions_cum: field(row, 5)?,
                resets_cum: field(row, 6)?,
            })
        })
        .collect()
}

/// Writes `mean.csv` and, if requested, one `seed_<n>.csv` per seed.
pub fn emit(series: &MetricsSeries, manifest: &RunManifest) -> Result<()> {
    fs::create_dir_all(&manifest.output_dir)?;
    let create = |name: String| -> Result<std::io::BufWriter<fs::File>> {
        Ok(std::io::BufWriter::new(fs::File::create(
            manifest.output_dir.join(name),
        )?))
    };
    write_mean_csv(&series.mean, create("mean.csv".into())?)?;
    if manifest.emit_per_seed {
        for (seed, rows) in series.seeds.iter().zip(&series.per_seed) {
            write_seed_csv(rows, create(format!("seed_{seed}.csv"))?)?;
        }
    }
    Ok(())
}

pub fn run_and_emit(manifest: &RunManifest) -> Result<MetricsSeries> {
    let series = engine::run_with(&manifest.config, manifest.execution)?;
    emit(&series, manifest)?;
    Ok(series)
}
