//! Trace files. CSV columns are `n, lambda, eps, x0.., xbar0.., eps_u_norm,
//! dist_to_solution`; JSON holds a metadata object and the same rows.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use extsum::{ConvergenceTrace, IterationState, Point, TraceRow};
use serde::{Deserialize, Serialize};

use crate::config::{OutputFormat, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub config: Option<RunConfig>,
    pub schedule_valid: Option<bool>,
    pub h1_sup: f64,
    pub final_state: Option<IterationState>,
    pub final_dist: Option<f64>,
    pub stopped_early: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub metadata: TraceMetadata,
    pub rows: Vec<TraceRow>,
}

impl TraceDocument {
    pub fn new(trace: &ConvergenceTrace, config: Option<&RunConfig>) -> Self {
        TraceDocument {
            metadata: TraceMetadata {
                config: config.cloned(),
                schedule_valid: trace.header.schedule_valid,
                h1_sup: trace.h1_sup,
                final_state: trace.final_state.clone(),
                final_dist: trace.final_dist,
                stopped_early: trace.stopped_early,
                failure: trace.failure.as_ref().map(|f| f.message.clone()),
            },
            rows: trace.rows.clone(),
        }
    }

    pub fn into_trace(self) -> ConvergenceTrace {
        let mut trace = ConvergenceTrace::from_rows(self.rows);
        let m = self.metadata;
        trace.h1_sup = trace.h1_sup.max(m.h1_sup);
        trace.final_state = m.final_state;
        trace.final_dist = m.final_dist;
        trace.stopped_early = m.stopped_early;
        trace.header.schedule_valid = m.schedule_valid;
        if let Some(cfg) = m.config {
            trace.header.algorithm = Some(cfg.algorithm);
            trace.header.max_iter = cfg.max_iter;
            trace.header.record_every = cfg.record_every;
            trace.header.unsafe_schedule = cfg.unsafe_schedule;
        }
        trace
    }
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_header(dim: usize) -> Vec<String> {
    let mut h = vec!["n".to_string(), "lambda".into(), "eps".into()];
    h.extend((0..dim).map(|i| format!("x{i}")));
    h.extend((0..dim).map(|i| format!("xbar{i}")));
    h.push("eps_u_norm".into());
    h.push("dist_to_solution".into());
    h
}

pub fn write_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<(), CliError> {
    let dim = rows.first().map_or(1, |r| r.x.dim());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(dim))?;
    for r in rows {
        let mut rec = vec![r.n.to_string(), real(r.lambda), real(r.eps)];
        rec.extend(r.x.coords().iter().map(|&v| real(v)));
        rec.extend(r.xbar.coords().iter().map(|&v| real(v)));
        rec.push(real(r.eps_u_norm));
        rec.push(r.dist_to_solution.map(real).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TraceRow>, String> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    if header.len() < 7 || (header.len() - 5) % 2 != 0 {
        return Err(format!("unexpected header with {} columns", header.len()));
    }
    let dim = (header.len() - 5) / 2;
    let expected = csv_header(dim);
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(format!("expected header {}", expected.join(",")));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let at = |i: usize| -> Result<f64, String> {
            rec[i]
                .trim()
                .parse()
                .map_err(|_| format!("row {}: column {} is not a number: '{}'", line + 1, expected[i], &rec[i]))
        };
        let n = rec[0]
            .trim()
            .parse()
            .map_err(|_| format!("row {}: bad index '{}'", line + 1, &rec[0]))?;
        let coords = |from: usize| -> Result<Point, String> {
            let v = (from..from + dim).map(at).collect::<Result<Vec<_>, _>>()?;
            Point::new(v).map_err(|e| format!("row {}: {e}", line + 1))
        };
        let dist_col = 4 + 2 * dim;
        rows.push(TraceRow {
            n,
            lambda: at(1)?,
            eps: at(2)?,
            x: coords(3)?,
            xbar: coords(3 + dim)?,
            eps_u_norm: at(3 + 2 * dim)?,
            dist_to_solution: if rec[dist_col].trim().is_empty() {
                None
            } else {
                Some(at(dist_col)?)
            },
        });
    }
    Ok(rows)
}

pub fn write_trace(
    path: &Path,
    format: OutputFormat,
    trace: &ConvergenceTrace,
    config: Option<&RunConfig>,
) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    match format {
        OutputFormat::Csv => write_csv(&trace.rows, &mut out)?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &TraceDocument::new(trace, config))?;
            out.write_all(b"\n").map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

/// Reads a trace written by [`write_trace`], choosing the format from the
/// first non-blank character.
pub fn read_trace(path: &Path) -> Result<(ConvergenceTrace, Option<RunConfig>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let malformed = |message: String| CliError::MalformedTrace {
        path: path.to_path_buf(),
        message,
    };
    let (trace, config) = if text.trim_start().starts_with('{') {
        let doc: TraceDocument = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
        let config = doc.metadata.config.clone();
        (doc.into_trace(), config)
    } else {
        (ConvergenceTrace::from_rows(read_csv(text.as_bytes()).map_err(malformed)?), None)
    };
    if trace.rows.is_empty() {
        return Err(malformed("no rows".into()));
    }
    Ok((trace, config))
}
