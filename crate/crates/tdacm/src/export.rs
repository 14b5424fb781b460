//! Trajectory CSV.
//!
//! Columns: `t`, `q_0…`, `s_0…`, `e_s_0…`, `f_n`, `e_f`, `p_t`,
//! `qdot_des_0…`, `flags`. Floats use Rust's shortest round-trip form, so
//! parsing a file gives back the logged values bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DVector;
use tdacm_core::sim::TrajectoryLog;

use crate::{AppError, AppResult};

/// Vector widths of one log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub dof: usize,
    pub features: usize,
}

impl Layout {
    pub fn of(log: &TrajectoryLog) -> Option<Self> {
        log.records.first().map(|r| Self {
            dof: r.q.len(),
            features: r.s.len(),
        })
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend((0..self.dof).map(|i| format!("q_{i}")));
        h.extend((0..self.features).map(|i| format!("s_{i}")));
        h.extend((0..self.features).map(|i| format!("e_s_{i}")));
        h.extend(["f_n", "e_f", "p_t"].map(String::from));
        h.extend((0..self.dof).map(|i| format!("qdot_des_{i}")));
        h.push("flags".into());
        h
    }

    fn from_header(header: &[String]) -> Option<Self> {
        let count = |p: &str| {
            header
                .iter()
                .filter(|h| h.starts_with(p) && h[p.len()..].parse::<usize>().is_ok())
                .count()
        };
        let layout = Self {
            dof: count("q_"),
            features: count("s_"),
        };
        (layout.header() == header).then_some(layout)
    }
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub t: f64,
    pub q: DVector<f64>,
    pub s: DVector<f64>,
    pub e_s: DVector<f64>,
    pub f_n: f64,
    pub e_f: f64,
    pub p_t: f64,
    pub qdot_des: DVector<f64>,
    pub flags: u8,
}

/// Header written for a log with no records.
pub const EMPTY_HEADER: &str = "t,f_n,e_f,p_t,flags";

pub fn write_csv<W: Write>(log: &TrajectoryLog, out: W) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    let Some(layout) = Layout::of(log) else {
        writeln!(out, "{EMPTY_HEADER}")?;
        return out.flush();
    };
    writeln!(out, "{}", layout.header().join(","))?;
    let mut line = String::new();
    for r in &log.records {
        line.clear();
        let mut push = |x: f64| {
            if !line.is_empty() {
                line.push(',');
            }
            line.push_str(&format!("{x:?}"));
        };
        push(r.t);
        r.q.iter().for_each(|&x| push(x));
        r.s.iter().for_each(|&x| push(x));
        r.e_s.iter().for_each(|&x| push(x));
        push(r.f_n);
        push(r.e_f);
        push(r.p_t);
        r.qdot_des.iter().for_each(|&x| push(x));
        line.push(',');
        line.push_str(&r.flags.to_string());
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()
}

pub fn csv_string(log: &TrajectoryLog) -> String {
    let mut buf = Vec::new();
    write_csv(log, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is ASCII")
}

pub fn export(log: &TrajectoryLog, path: &Path) -> AppResult<()> {
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    write_csv(log, file).map_err(|e| AppError::io(path, e))
}

/// Parses CSV text produced by [`write_csv`]; `origin` names the source in errors.
pub fn parse_csv(text: &str, origin: &str) -> AppResult<Vec<Row>> {
    let bad = |line: usize, message: String| AppError::Csv {
        path: origin.to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| bad(1, e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    if header.join(",") == EMPTY_HEADER {
        return match reader.records().next() {
            None => Ok(Vec::new()),
            Some(_) => Err(bad(2, "rows after an empty-log header".into())),
        };
    }
    let layout =
        Layout::from_header(&header).ok_or_else(|| bad(1, "unexpected column layout".into()))?;
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        if rec.len() != header.len() {
            return Err(bad(
                line,
                format!("expected {} fields, got {}", header.len(), rec.len()),
            ));
        }
        let nums: Vec<f64> = rec
            .iter()
            .take(header.len() - 1)
            .enumerate()
            .map(|(i, f)| {
                f.parse::<f64>()
                    .map_err(|e| bad(line, format!("column {}: {e}", header[i])))
            })
            .collect::<AppResult<_>>()?;
        let flags = rec[header.len() - 1]
            .parse::<u8>()
            .map_err(|e| bad(line, format!("column flags: {e}")))?;
        let (d, f) = (layout.dof, layout.features);
        let mut at = 0;
        let mut take = |n: usize| {
            let v = DVector::from_row_slice(&nums[at..at + n]);
            at += n;
            v
        };
        let t = take(1)[0];
        let q = take(d);
        let s = take(f);
        let e_s = take(f);
        let scalars = take(3);
        let qdot_des = take(d);
        rows.push(Row {
            t,
            q,
            s,
            e_s,
            f_n: scalars[0],
            e_f: scalars[1],
            p_t: scalars[2],
            qdot_des,
            flags,
        });
    }
    Ok(rows)
}

pub fn parse_file(path: &Path) -> AppResult<Vec<Row>> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_csv(&text, &path.display().to_string())
}

/// The rows a log exports to, for comparing against a parse.
pub fn rows_of(log: &TrajectoryLog) -> Vec<Row> {
    log.records
        .iter()
        .map(|r| Row {
            t: r.t,
            q: r.q.clone(),
            s: r.s.clone(),
            e_s: r.e_s.clone(),
            f_n: r.f_n,
            e_f: r.e_f,
            p_t: r.p_t,
            qdot_des: r.qdot_des.clone(),
            flags: r.flags,
        })
        .collect()
}
