//! Batch and trajectory files.
//!
//! A batch is stored as a data file (CSV or JSONL) plus a sidecar
//! `<path>.meta.json` carrying the schema version, format and batch
//! metadata. CSV files have a header row and exactly 16 columns; JSONL files
//! have one record per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datagen::{Batch, BatchMetadata, TrajectoryRow, TransitionRecord};
use crate::error::{Error, Result};

pub const BATCH_SCHEMA: &str = "indbench-batch/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(Error::Validation(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    schema: String,
    format: Format,
    records: usize,
    metadata: BatchMetadata,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    obs: [f64; 6],
    action: [f64; 3],
    next_obs: [f64; 6],
    reward: f64,
}

impl From<&TransitionRecord> for JsonRecord {
    fn from(r: &TransitionRecord) -> Self {
        Self {
            obs: r.observation.to_array(),
            action: r.action.to_array(),
            next_obs: r.next_observation.to_array(),
            reward: r.reward,
        }
    }
}

pub fn export_batch(batch: &Batch, format: Format, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record(TransitionRecord::COLUMNS)?;
            for rec in &batch.records {
                w.write_record(rec.to_row().iter().map(|x| x.to_string()))?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut w = BufWriter::new(File::create(path)?);
            for rec in &batch.records {
                serde_json::to_writer(&mut w, &JsonRecord::from(rec))?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
    }
    let sidecar = Sidecar {
        schema: BATCH_SCHEMA.to_string(),
        format,
        records: batch.records.len(),
        metadata: batch.metadata.clone(),
    };
    let mut w = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(&mut w, &sidecar)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn import_batch(path: impl AsRef<Path>) -> Result<Batch> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(sidecar_path(path))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Deserialize(e.to_string()))?;
    let schema = value.get("schema").and_then(|s| s.as_str()).unwrap_or("<missing>");
    if schema != BATCH_SCHEMA {
        return Err(Error::VersionMismatch {
            expected: BATCH_SCHEMA.to_string(),
            found: schema.to_string(),
        });
    }
    let sidecar: Sidecar =
        serde_json::from_value(value).map_err(|e| Error::Deserialize(e.to_string()))?;

    let records = match sidecar.format {
        Format::Csv => read_csv_records(path)?,
        Format::Jsonl => read_jsonl_records(path)?,
    };
    if records.len() != sidecar.records {
        return Err(Error::Deserialize(format!(
            "expected {} records, found {}",
            sidecar.records,
            records.len()
        )));
    }
    Ok(Batch {
        metadata: sidecar.metadata,
        records,
    })
}

fn read_csv_records(path: &Path) -> Result<Vec<TransitionRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()? != TransitionRecord::COLUMNS.as_slice() {
        return Err(Error::Deserialize(format!(
            "unexpected CSV header {:?}",
            r.headers()?
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut row = [0.0; 16];
        if rec.len() != row.len() {
            return Err(Error::Deserialize(format!("row {i}: expected 16 fields, found {}", rec.len())));
        }
        for (x, field) in row.iter_mut().zip(rec.iter()) {
            *x = field
                .parse()
                .map_err(|e| Error::Deserialize(format!("row {i}: {field:?}: {e}")))?;
        }
        out.push(TransitionRecord::from_row(&row));
    }
    Ok(out)
}

fn read_jsonl_records(path: &Path) -> Result<Vec<TransitionRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let j: JsonRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Deserialize(format!("line {}: {e}", i + 1)))?;
        let mut row = [0.0; 16];
        row[..6].copy_from_slice(&j.obs);
        row[6..9].copy_from_slice(&j.action);
        row[9..15].copy_from_slice(&j.next_obs);
        row[15] = j.reward;
        out.push(TransitionRecord::from_row(&row));
    }
    Ok(out)
}

pub const TRAJECTORY_COLUMNS: [&str; 8] = ["t", "p", "v", "g", "h", "c", "f", "reward"];
pub const LATENT_COLUMNS: [&str; 14] = [
    "theta", "theta_c", "h_e", "m", "c_hat", "v_e", "g_e", "f_b", "alpha", "delta", "psi", "phi",
    "mu_v", "mu_g",
];

/// Writes a trajectory as CSV, optionally with latent columns appended.
pub fn write_trajectory<W: Write>(rows: &[TrajectoryRow], debug_latents: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = TRAJECTORY_COLUMNS.to_vec();
    if debug_latents {
        header.extend(LATENT_COLUMNS);
    }
    w.write_record(&header)?;
    for row in rows {
        let o = row.observation;
        let mut fields = vec![row.t.to_string()];
        fields.extend(
            o.to_array()
                .iter()
                .chain([row.reward].iter())
                .map(|x| x.to_string()),
        );
        if debug_latents {
            let l = row.latents;
            fields.extend(
                [
                    l.opcost,
                    l.opcost_convolved,
                    l.effective_shift,
                    l.penalty,
                    l.consumption_clean,
                    l.effective_velocity,
                    l.effective_gain,
                    l.basic_fatigue,
                    l.amplification,
                ]
                .iter()
                .map(|x| x.to_string()),
            );
            fields.push(row.miscal.domain.to_string());
            fields.push(row.miscal.response.to_string());
            fields.push(row.miscal.direction.to_string());
            fields.push(row.mu_v.to_string());
            fields.push(row.mu_g.to_string());
        }
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}
