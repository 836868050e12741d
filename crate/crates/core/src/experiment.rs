//! The full simulation protocol: attribution → message → percept → metrics,
//! aggregated per condition, plus the λ₂ sensitivity sweep and KDE inputs.
//!
//! Every random draw is keyed by a [`StreamKey`], so work items run in
//! parallel and the output is still identical to a sequential run.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    CompositeWeights, Condition, DomainProfile, ExperimentConfig, Modality, ModalityParams, Style,
    StyleParams, TrustParams,
};
use crate::encoder::{self, SymbolCode};
use crate::error::{Error, Result};
use crate::generator::{generate_attribution, AttributionVector};
use crate::infotheory::{self, DensityCurve};
use crate::metrics;
use crate::percept;
use crate::stream::{derive_stream, Purpose, StreamKey};

/// One simulated trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub domain: String,
    pub modality: Modality,
    pub style: Style,
    pub sample_id: u64,
    pub i_m: f64,
    pub load: f64,
    pub ce: f64,
    pub duration_s: f64,
    pub message_entropy_bits: f64,
    pub q_true: f64,
    pub trust: f64,
    pub tce_abs: f64,
    pub degenerate: bool,
}

impl SampleRecord {
    pub fn condition(&self) -> Condition {
        Condition {
            modality: self.modality,
            style: self.style,
        }
    }
}

/// Per-sample (true, perceived) symbol pairs; `None` is the missing symbol.
pub type SymbolPairs = Vec<(SymbolCode, Option<SymbolCode>)>;

/// A record together with the symbol pairs it was computed from.
#[derive(Debug, Clone)]
pub struct Trial {
    pub record: SampleRecord,
    pub pairs: SymbolPairs,
}

/// Per-condition aggregates over non-degenerate records pooled across
/// domains. Variances are sample variances (n − 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub modality: Modality,
    pub style: Style,
    pub n_included: usize,
    pub n_excluded: usize,
    pub mean_ce: f64,
    pub var_ce: f64,
    pub mean_tce: f64,
    pub var_tce: f64,
    /// Retention computed over the concatenated symbol pairs of the condition.
    pub pooled_i_m: f64,
    pub mean_load: f64,
    pub phi_default: f64,
}

impl ConditionSummary {
    pub fn condition(&self) -> Condition {
        Condition {
            modality: self.modality,
            style: self.style,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultSet {
    pub records: Vec<SampleRecord>,
    pub summaries: Vec<ConditionSummary>,
    pub config_fingerprint: String,
}

impl ResultSet {
    pub fn summary(&self, c: Condition) -> Option<&ConditionSummary> {
        self.summaries.iter().find(|s| s.condition() == c)
    }

    pub fn excluded_count(&self) -> usize {
        self.records.iter().filter(|r| r.degenerate).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("result set serializes")
    }
}

/// Runs one (domain, condition, sample) work item end to end.
pub fn simulate_sample(
    cfg: &ExperimentConfig,
    profile: &DomainProfile,
    condition: Condition,
    sample_index: u64,
) -> Result<Trial> {
    let key = StreamKey::new(
        cfg.master_seed,
        profile.name.clone(),
        condition.modality,
        condition.style,
        sample_index,
        Purpose::Attribution,
    );
    let a = generate_attribution(profile, sample_index, &mut derive_stream(&key));
    evaluate_vector(
        &a,
        condition,
        cfg.modality_params.get(condition.modality),
        cfg.style_params.get(condition.style),
        &cfg.trust,
        &key,
    )
}

/// Encode, perceive, and score a single attribution vector. Streams for the
/// channel and the trust model are derived from `key` with their own
/// purposes. An all-zero vector yields a degenerate record.
pub fn evaluate_vector(
    a: &AttributionVector,
    condition: Condition,
    modality_params: &ModalityParams,
    style_params: &StyleParams,
    trust_params: &TrustParams,
    key: &StreamKey,
) -> Result<Trial> {
    let Condition { modality, style } = condition;
    let trust = metrics::simulate_trust(
        modality,
        style,
        trust_params,
        &mut derive_stream(&key.with_purpose(Purpose::Trust)),
    );
    let duration_s = style_params.word_count as f64 / modality_params.rate_wps;

    let (i_m, entropy_bits, degenerate, pairs) = if a.is_all_zero() {
        (1.0, 0.0, true, Vec::new())
    } else {
        let msg = encoder::encode(a, modality, style, modality_params, style_params)?;
        let truth = encoder::reference_codes(a, style_params.quant_levels)?;
        let seen = percept::perceive(
            &msg,
            a.values.len(),
            modality_params,
            &mut derive_stream(&key.with_purpose(Purpose::Retention)),
            &mut derive_stream(&key.with_purpose(Purpose::SymbolNoise)),
        )
        .codes();
        let retained = infotheory::information_retention(&truth, &seen)?;
        let pairs: SymbolPairs = truth.into_iter().zip(seen).collect();
        (retained.value, msg.message_entropy_bits, retained.degenerate, pairs)
    };

    let load = metrics::cognitive_load(duration_s, entropy_bits, modality_params)?;
    let ce = metrics::comprehension_efficiency(i_m, load)?;
    Ok(Trial {
        record: SampleRecord {
            domain: a.domain.clone(),
            modality,
            style,
            sample_id: a.sample_id,
            i_m,
            load,
            ce,
            duration_s,
            message_entropy_bits: entropy_bits,
            q_true: trust.q_true,
            trust: trust.trust,
            tce_abs: trust.tce_abs,
            degenerate,
        },
        pairs,
    })
}

#[derive(Debug, Clone, Copy)]
struct WorkItem<'a> {
    profile: &'a DomainProfile,
    condition: Condition,
    sample_index: u64,
}

fn work_items(cfg: &ExperimentConfig) -> Vec<WorkItem<'_>> {
    let mut items = Vec::new();
    for profile in &cfg.domains {
        for condition in Condition::all() {
            for sample_index in 0..cfg.samples_per_condition_per_domain as u64 {
                items.push(WorkItem {
                    profile,
                    condition,
                    sample_index,
                });
            }
        }
    }
    items
}

fn record_order(a: &SampleRecord, b: &SampleRecord) -> std::cmp::Ordering {
    (&a.domain, a.modality, a.style, a.sample_id).cmp(&(&b.domain, b.modality, b.style, b.sample_id))
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() < 2 {
        0.0
    } else {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    };
    (mean, var)
}

/// Summary of one condition from its trials (degenerate records are counted
/// but excluded from every statistic).
pub fn summarize_condition<'a>(
    condition: Condition,
    trials: impl IntoIterator<Item = (&'a SampleRecord, &'a SymbolPairs)>,
    weights: &CompositeWeights,
) -> Result<ConditionSummary> {
    let mut ce = Vec::new();
    let mut tce = Vec::new();
    let mut load = Vec::new();
    let mut pooled: SymbolPairs = Vec::new();
    let mut n_excluded = 0;
    for (rec, pairs) in trials {
        if rec.degenerate {
            n_excluded += 1;
            continue;
        }
        ce.push(rec.ce);
        tce.push(rec.tce_abs);
        load.push(rec.load);
        pooled.extend(pairs.iter().cloned());
    }
    let (mean_ce, var_ce) = mean_var(&ce);
    let (mean_tce, var_tce) = mean_var(&tce);
    let (mean_load, _) = mean_var(&load);
    let pooled_i_m = if pooled.is_empty() {
        f64::NAN
    } else {
        let (truth, seen): (Vec<_>, Vec<_>) = pooled.into_iter().unzip();
        infotheory::information_retention(&truth, &seen)?.value
    };
    Ok(ConditionSummary {
        modality: condition.modality,
        style: condition.style,
        n_included: ce.len(),
        n_excluded,
        mean_ce,
        var_ce,
        mean_tce,
        var_tce,
        pooled_i_m,
        mean_load,
        phi_default: metrics::composite_score(mean_ce, mean_tce, weights),
    })
}

/// Builds a result set from trials: sorts records by
/// (domain, modality, style, sample_id) and summarizes each condition that
/// has at least one record.
pub fn assemble(mut trials: Vec<Trial>, weights: &CompositeWeights, fingerprint: String) -> Result<ResultSet> {
    trials.sort_by(|a, b| record_order(&a.record, &b.record));
    let mut summaries = Vec::new();
    for c in Condition::all() {
        let members: Vec<_> = trials
            .iter()
            .filter(|t| t.record.condition() == c)
            .map(|t| (&t.record, &t.pairs))
            .collect();
        if !members.is_empty() {
            summaries.push(summarize_condition(c, members, weights)?);
        }
    }
    Ok(ResultSet {
        records: trials.into_iter().map(|t| t.record).collect(),
        summaries,
        config_fingerprint: fingerprint,
    })
}

/// Runs every (domain, modality, style, sample) work item in parallel.
pub fn run_protocol(cfg: &ExperimentConfig) -> Result<ResultSet> {
    run_trials(cfg, true)
}

/// Same as [`run_protocol`] on the calling thread, in reverse work order.
/// Exists to check that output does not depend on scheduling.
pub fn run_protocol_sequential_reversed(cfg: &ExperimentConfig) -> Result<ResultSet> {
    run_trials(cfg, false)
}

fn run_trials(cfg: &ExperimentConfig, parallel: bool) -> Result<ResultSet> {
    cfg.validate().into_result()?;
    let items = work_items(cfg);
    let run = |w: &WorkItem<'_>| simulate_sample(cfg, w.profile, w.condition, w.sample_index);
    let trials: Vec<Trial> = if parallel {
        items.par_iter().map(run).collect::<Result<_>>()?
    } else {
        items.iter().rev().map(run).collect::<Result<_>>()?
    };
    assemble(trials, &cfg.weights, cfg.fingerprint())
}

/// Φ recomputed from condition means over a grid of λ₂ values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiMatrix {
    pub lambda1: f64,
    pub lambda2_values: Vec<f64>,
    pub conditions: Vec<Condition>,
    /// `phi[i][j]` for λ₂ value `i` and condition `j`.
    pub phi: Vec<Vec<f64>>,
    /// Winning condition index per λ₂ row.
    pub argmax_per_lambda: Vec<usize>,
}

impl PhiMatrix {
    pub fn winner(&self, row: usize) -> Condition {
        self.conditions[self.argmax_per_lambda[row]]
    }

    pub fn row_for(&self, lambda2: f64) -> Option<usize> {
        self.lambda2_values
            .iter()
            .position(|&v| (v - lambda2).abs() < 1e-12)
    }
}

/// Φ grid over arbitrary λ₂ values. Ties in a row go to the condition that
/// comes first in (modality, style) declaration order.
pub fn phi_matrix(rs: &ResultSet, lambda1: f64, lambda2_values: &[f64]) -> Result<PhiMatrix> {
    if lambda2_values.is_empty() {
        return Err(Error::Domain("λ₂ sweep is empty".into()));
    }
    if rs.summaries.is_empty() {
        return Err(Error::EmptyInput("no condition summaries to sweep"));
    }
    let conditions: Vec<Condition> = rs.summaries.iter().map(|s| s.condition()).collect();
    let mut phi = Vec::with_capacity(lambda2_values.len());
    let mut argmax = Vec::with_capacity(lambda2_values.len());
    for &lambda2 in lambda2_values {
        let w = CompositeWeights { lambda1, lambda2 };
        let row: Vec<f64> = rs
            .summaries
            .iter()
            .map(|s| metrics::composite_score(s.mean_ce, s.mean_tce, &w))
            .collect();
        let best = row
            .iter()
            .enumerate()
            .fold(0, |best, (j, &v)| if v > row[best] { j } else { best });
        phi.push(row);
        argmax.push(best);
    }
    Ok(PhiMatrix {
        lambda1,
        lambda2_values: lambda2_values.to_vec(),
        conditions,
        phi,
        argmax_per_lambda: argmax,
    })
}

pub fn lambda_sweep(rs: &ResultSet, cfg: &ExperimentConfig) -> Result<PhiMatrix> {
    phi_matrix(rs, cfg.weights.lambda1, &cfg.lambda2_sweep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Ce,
    Tce,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Ce => "ce",
            Metric::Tce => "tce",
        }
    }

    pub fn value(self, r: &SampleRecord) -> f64 {
        match self {
            Metric::Ce => r.ce,
            Metric::Tce => r.tce_abs,
        }
    }
}

/// Non-degenerate per-sample values of `metric` for one modality.
pub fn metric_values(rs: &ResultSet, metric: Metric, modality: Modality) -> Vec<f64> {
    rs.records
        .iter()
        .filter(|r| !r.degenerate && r.modality == modality)
        .map(|r| metric.value(r))
        .collect()
}

/// One KDE curve per modality over the pooled per-sample metric.
pub fn summarize_kde(
    rs: &ResultSet,
    metric: Metric,
    grid_points: usize,
) -> Result<Vec<(Modality, DensityCurve)>> {
    Modality::ALL
        .iter()
        .map(|&m| {
            let values = metric_values(rs, metric, m);
            if values.len() < 2 {
                return Err(Error::EmptyInput("kde needs two non-degenerate records per modality"));
            }
            let curve = infotheory::kde(&values, grid_points).map_err(|e| match e {
                Error::ZeroSpread(_) => {
                    Error::ZeroSpread(format!("{} values for {m} have no spread", metric.as_str()))
                }
                other => other,
            })?;
            Ok((m, curve))
        })
        .collect()
}
