//! Synthetic attribution vectors and ingestion of exported attributions.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Deserialize;

use crate::config::DomainProfile;
use crate::error::{Error, Result};
use crate::stream::RandomStream;

/// Signed per-feature importance values for one prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionVector {
    pub domain: String,
    pub sample_id: u64,
    pub values: Vec<f64>,
}

impl AttributionVector {
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Draws magnitudes from a symmetric Dirichlet with the profile's
/// concentration and attaches independent fair-coin signs.
///
/// Magnitudes are normalized gamma variates; all magnitudes are drawn before
/// the signs.
pub fn generate_attribution(
    profile: &DomainProfile,
    sample_id: u64,
    stream: &mut RandomStream,
) -> AttributionVector {
    let gamma = Gamma::new(profile.dirichlet_concentration, 1.0)
        .expect("concentration validated positive");
    let n = profile.feature_count;
    let magnitudes = loop {
        let g: Vec<f64> = (0..n).map(|_| gamma.sample(stream)).collect();
        let total: f64 = g.iter().sum();
        // Very small concentrations can underflow every variate to zero.
        if total > 0.0 && total.is_finite() {
            break g.into_iter().map(|x| x / total).collect::<Vec<_>>();
        }
    };
    let values = magnitudes
        .into_iter()
        .map(|m| if stream.random_bool(0.5) { m } else { -m })
        .collect();
    AttributionVector {
        domain: profile.name.clone(),
        sample_id,
        values,
    }
}

/// Attribution vectors read from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedBatch {
    pub source_path: PathBuf,
    pub feature_names: Vec<String>,
    pub vectors: Vec<AttributionVector>,
    pub normalized: bool,
}

impl IngestedBatch {
    /// Rescales every vector to unit L1 norm. All-zero vectors cannot be
    /// rescaled; their sample ids are listed in the error.
    pub fn normalize(mut self) -> Result<Self> {
        let zero: Vec<u64> = self
            .vectors
            .iter()
            .filter(|v| v.is_all_zero())
            .map(|v| v.sample_id)
            .collect();
        if !zero.is_empty() {
            let ids: Vec<String> = zero.iter().map(u64::to_string).collect();
            return Err(Error::Degenerate(format!(
                "{}: all-zero attribution vectors cannot be normalized (sample ids: {})",
                self.source_path.display(),
                ids.join(", ")
            )));
        }
        for v in &mut self.vectors {
            let norm = v.l1_norm();
            for x in &mut v.values {
                *x /= norm;
            }
        }
        self.normalized = true;
        Ok(self)
    }

    /// Splits off all-zero vectors, returning their ids.
    pub fn take_all_zero(&mut self) -> Vec<u64> {
        let (zero, keep): (Vec<_>, Vec<_>) =
            std::mem::take(&mut self.vectors).into_iter().partition(|v| v.is_all_zero());
        self.vectors = keep;
        zero.into_iter().map(|v| v.sample_id).collect()
    }

    /// Wide CSV with shortest round-trip formatting for values.
    pub fn to_csv(&self) -> String {
        let mut out = self.feature_names.join(",");
        out.push('\n');
        for v in &self.vectors {
            let row: Vec<String> = v.values.iter().map(|x| format!("{x:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Reads a wide CSV or JSON attribution export, optionally normalizing.
pub fn ingest_attributions(path: &Path, normalize: bool) -> Result<IngestedBatch> {
    let batch = read_attributions(path)?;
    if normalize {
        batch.normalize()
    } else {
        Ok(batch)
    }
}

/// Parses without normalizing. The format is chosen by content: a document
/// whose first non-blank character is `{` is JSON, anything else wide CSV.
pub fn read_attributions(path: &Path) -> Result<IngestedBatch> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    if text.trim_start().starts_with('{') {
        parse_json(path, text)
    } else {
        parse_csv(path, text)
    }
}

fn domain_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "ingested".into())
}

fn check_header(path: &Path, names: &[String]) -> Result<()> {
    let fail = |message: String| Error::Format {
        path: path.to_path_buf(),
        line: 1,
        message,
    };
    if names.is_empty() {
        return Err(fail("header has no feature names".into()));
    }
    if let Some(i) = names.iter().position(|n| n.is_empty()) {
        return Err(fail(format!("header column {} is empty", i + 1)));
    }
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(fail(format!("duplicate feature name {n:?} in header")));
        }
    }
    Ok(())
}

fn parse_csv(path: &Path, text: &str) -> Result<IngestedBatch> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| csv_error(path, e))?,
        None => {
            return Err(Error::Format {
                path: path.to_path_buf(),
                line: 1,
                message: "missing header line".into(),
            })
        }
    };
    let feature_names: Vec<String> = header.iter().map(str::to_owned).collect();
    check_header(path, &feature_names)?;
    if feature_names.iter().all(|n| n.parse::<f64>().is_ok()) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            line: 1,
            message: "header looks numeric; the first line must name the features".into(),
        });
    }

    let domain = domain_label(path);
    let mut vectors = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != feature_names.len() {
            return Err(Error::Format {
                path: path.to_path_buf(),
                line,
                message: format!(
                    "expected {} values, found {}",
                    feature_names.len(),
                    rec.len()
                ),
            });
        }
        let sample_id = vectors.len() as u64;
        let values = rec
            .iter()
            .enumerate()
            .map(|(col, cell)| parse_cell(path, line, col + 1, cell))
            .collect::<Result<Vec<_>>>()?;
        vectors.push(AttributionVector {
            domain: domain.clone(),
            sample_id,
            values,
        });
    }

    Ok(IngestedBatch {
        source_path: path.to_path_buf(),
        feature_names,
        vectors,
        normalized: false,
    })
}

fn parse_cell(path: &Path, row: u64, column: usize, cell: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            path: path.to_path_buf(),
            row,
            column,
            cell: cell.to_owned(),
        }),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Format {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonExport {
    feature_names: Vec<String>,
    samples: Vec<Vec<serde_json::Value>>,
}

fn parse_json(path: &Path, text: &str) -> Result<IngestedBatch> {
    let doc: JsonExport = serde_json::from_str(text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    check_header(path, &doc.feature_names)?;
    let domain = domain_label(path);
    let mut vectors = Vec::with_capacity(doc.samples.len());
    for (i, sample) in doc.samples.iter().enumerate() {
        if sample.len() != doc.feature_names.len() {
            return Err(Error::Format {
                path: path.to_path_buf(),
                line: 0,
                message: format!(
                    "sample {i} has {} values, expected {}",
                    sample.len(),
                    doc.feature_names.len()
                ),
            });
        }
        let values = sample
            .iter()
            .enumerate()
            .map(|(col, v)| match v.as_f64() {
                Some(x) if x.is_finite() => Ok(x),
                _ => Err(Error::Parse {
                    path: path.to_path_buf(),
                    row: i as u64,
                    column: col + 1,
                    cell: v.to_string(),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        vectors.push(AttributionVector {
            domain: domain.clone(),
            sample_id: i as u64,
            values,
        });
    }
    Ok(IngestedBatch {
        source_path: path.to_path_buf(),
        feature_names: doc.feature_names,
        vectors,
        normalized: false,
    })
}
