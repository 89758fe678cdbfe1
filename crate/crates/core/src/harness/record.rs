use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::floor_for_report;

pub const RECORD_HEADER: [&str; 9] = [
    "preset",
    "spectrum_id",
    "block_size",
    "delta",
    "ortho_policy",
    "trial_index",
    "matvecs",
    "eps_empirical_raw",
    "eps_empirical_floored",
];

/// One `(cell, trial, budget)` measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub preset: String,
    pub spectrum_id: String,
    pub block_size: usize,
    pub delta: f64,
    pub ortho_policy: String,
    pub trial_index: usize,
    /// The matvec budget this row was evaluated at.
    pub matvecs: u64,
    pub eps_empirical_raw: f64,
    pub eps_empirical_floored: f64,
}

impl ExperimentRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        preset: &str,
        spectrum_id: &str,
        block_size: usize,
        delta: f64,
        ortho_policy: &str,
        trial_index: usize,
        matvecs: u64,
        eps: f64,
    ) -> Self {
        Self {
            preset: preset.to_string(),
            spectrum_id: spectrum_id.to_string(),
            block_size,
            delta,
            ortho_policy: ortho_policy.to_string(),
            trial_index,
            matvecs,
            eps_empirical_raw: eps,
            eps_empirical_floored: floor_for_report(eps),
        }
    }
}

/// 17 significant digits, enough to round-trip every `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_records<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.preset.clone(),
            r.spectrum_id.clone(),
            r.block_size.to_string(),
            format_float(r.delta),
            r.ortho_policy.clone(),
            r.trial_index.to_string(),
            r.matvecs.to_string(),
            format_float(r.eps_empirical_raw),
            format_float(r.eps_empirical_floored),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(records: &[ExperimentRecord], path: impl AsRef<Path>) -> Result<()> {
    write_records(records, std::fs::File::create(path)?)
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(RECORD_HEADER.iter().copied()) {
        return Err(Error::Parse { line: 1, msg: "unexpected CSV header".into() });
    }
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let field = |j: usize| row.get(j).unwrap_or_default();
        let num = |j: usize| -> Result<f64> {
            field(j).parse().map_err(|_| Error::Parse { line, msg: format!("bad number in `{}`", RECORD_HEADER[j]) })
        };
        let int = |j: usize| -> Result<u64> {
            field(j).parse().map_err(|_| Error::Parse { line, msg: format!("bad integer in `{}`", RECORD_HEADER[j]) })
        };
        out.push(ExperimentRecord {
            preset: field(0).to_string(),
            spectrum_id: field(1).to_string(),
            block_size: int(2)? as usize,
            delta: num(3)?,
            ortho_policy: field(4).to_string(),
            trial_index: int(5)? as usize,
            matvecs: int(6)?,
            eps_empirical_raw: num(7)?,
            eps_empirical_floored: num(8)?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    read_records(std::fs::File::open(path)?)
}

/// Type-7 (linear interpolation) quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `(q25, median, q75)`.
pub fn quartiles(values: &[f64]) -> Result<(f64, f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyGroup);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok((quantile_sorted(&v, 0.25), quantile_sorted(&v, 0.5), quantile_sorted(&v, 0.75)))
}

pub fn median(values: &[f64]) -> Result<f64> {
    quartiles(values).map(|q| q.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKey {
    Preset,
    SpectrumId,
    BlockSize,
    Delta,
    OrthoPolicy,
    Matvecs,
}

impl GroupKey {
    /// Every field except the trial index and the measurements.
    pub const ALL: [GroupKey; 6] = [
        GroupKey::Preset,
        GroupKey::SpectrumId,
        GroupKey::BlockSize,
        GroupKey::Delta,
        GroupKey::OrthoPolicy,
        GroupKey::Matvecs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GroupKey::Preset => "preset",
            GroupKey::SpectrumId => "spectrum_id",
            GroupKey::BlockSize => "block_size",
            GroupKey::Delta => "delta",
            GroupKey::OrthoPolicy => "ortho_policy",
            GroupKey::Matvecs => "matvecs",
        }
    }

    fn part(self, r: &ExperimentRecord) -> KeyPart {
        match self {
            GroupKey::Preset => KeyPart::Text(r.preset.clone()),
            GroupKey::SpectrumId => KeyPart::Text(r.spectrum_id.clone()),
            GroupKey::BlockSize => KeyPart::Num(r.block_size as u64),
            // Bit patterns of non-negative floats sort like the values.
            GroupKey::Delta => KeyPart::Num(r.delta.to_bits()),
            GroupKey::OrthoPolicy => KeyPart::Text(r.ortho_policy.clone()),
            GroupKey::Matvecs => KeyPart::Num(r.matvecs),
        }
    }

    fn display(self, r: &ExperimentRecord) -> String {
        match self {
            GroupKey::Delta => format_float(r.delta),
            GroupKey::BlockSize => r.block_size.to_string(),
            GroupKey::Matvecs => r.matvecs.to_string(),
            GroupKey::Preset => r.preset.clone(),
            GroupKey::SpectrumId => r.spectrum_id.clone(),
            GroupKey::OrthoPolicy => r.ortho_policy.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum KeyPart {
    Text(String),
    Num(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileRow {
    /// Display values of the group keys, in key order.
    pub key: Vec<String>,
    pub count: usize,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

/// Quartiles of `eps_empirical_floored` per group, groups in ascending key order.
pub fn aggregate_quantiles(records: &[ExperimentRecord], keys: &[GroupKey]) -> Result<Vec<QuantileRow>> {
    let mut groups: BTreeMap<Vec<KeyPart>, (Vec<String>, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let id: Vec<KeyPart> = keys.iter().map(|k| k.part(r)).collect();
        groups
            .entry(id)
            .or_insert_with(|| (keys.iter().map(|k| k.display(r)).collect(), Vec::new()))
            .1
            .push(r.eps_empirical_floored);
    }
    groups
        .into_values()
        .map(|(key, values)| {
            let (q25, median, q75) = quartiles(&values)?;
            Ok(QuantileRow { key, count: values.len(), q25, median, q75 })
        })
        .collect()
}

pub fn write_summary<W: Write>(rows: &[QuantileRow], keys: &[GroupKey], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = keys.iter().map(|k| k.name()).collect();
    header.extend(["count", "q25", "median", "q75"]);
    w.write_record(&header)?;
    for row in rows {
        let mut fields = row.key.clone();
        fields.push(row.count.to_string());
        fields.extend([row.q25, row.median, row.q75].map(format_float));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}
