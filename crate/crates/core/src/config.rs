//! Domain types and the experiment configuration schema.
//!
//! Everything here is plain data: immutable after construction and cheap to
//! share across threads. The JSON form of [`ExperimentConfig`] mirrors the
//! struct field-for-field and rejects unknown keys.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Delivery channel of an explanation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Text,
    Voice,
}

impl Modality {
    pub const ALL: [Modality; 2] = [Modality::Text, Modality::Voice];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Text => "text",
            Modality::Voice => "voice",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Modality::Text => "Text",
            Modality::Voice => "Voice",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Modality::Text),
            "voice" => Ok(Modality::Voice),
            other => Err(Error::Usage(format!("unknown modality {other:?} (expected text|voice)"))),
        }
    }
}

/// Rhetorical form of an explanation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    Brief,
    Detailed,
    Analogy,
}

impl Style {
    pub const ALL: [Style; 3] = [Style::Brief, Style::Detailed, Style::Analogy];

    pub fn as_str(self) -> &'static str {
        match self {
            Style::Brief => "brief",
            Style::Detailed => "detailed",
            Style::Analogy => "analogy",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Style::Brief => "Brief",
            Style::Detailed => "Detailed",
            Style::Analogy => "Analogy",
        }
    }
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Style {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brief" => Ok(Style::Brief),
            "detailed" => Ok(Style::Detailed),
            "analogy" => Ok(Style::Analogy),
            other => Err(Error::Usage(format!(
                "unknown style {other:?} (expected brief|detailed|analogy)"
            ))),
        }
    }
}

/// One (modality, style) cell of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub modality: Modality,
    pub style: Style,
}

impl Condition {
    /// All six conditions in (modality, style) order.
    pub fn all() -> Vec<Condition> {
        Modality::ALL
            .iter()
            .flat_map(|&modality| Style::ALL.iter().map(move |&style| Condition { modality, style }))
            .collect()
    }

    /// `text_brief`, `voice_analogy`, ...
    pub fn key(&self) -> String {
        format!("{}_{}", self.modality.as_str(), self.style.as_str())
    }

    /// `Text–Brief`, `Voice–Analogy`, ...
    pub fn label(&self) -> String {
        format!("{}\u{2013}{}", self.modality.label(), self.style.label())
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A value per modality, serialized as `{"text": .., "voice": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ByModality<T> {
    pub text: T,
    pub voice: T,
}

impl<T> ByModality<T> {
    pub fn get(&self, m: Modality) -> &T {
        match m {
            Modality::Text => &self.text,
            Modality::Voice => &self.voice,
        }
    }

    pub fn get_mut(&mut self, m: Modality) -> &mut T {
        match m {
            Modality::Text => &mut self.text,
            Modality::Voice => &mut self.voice,
        }
    }
}

/// A value per style, serialized as `{"brief": .., "detailed": .., "analogy": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ByStyle<T> {
    pub brief: T,
    pub detailed: T,
    pub analogy: T,
}

impl<T> ByStyle<T> {
    pub fn get(&self, s: Style) -> &T {
        match s {
            Style::Brief => &self.brief,
            Style::Detailed => &self.detailed,
            Style::Analogy => &self.analogy,
        }
    }

    pub fn get_mut(&mut self, s: Style) -> &mut T {
        match s {
            Style::Brief => &mut self.brief,
            Style::Detailed => &mut self.detailed,
            Style::Analogy => &mut self.analogy,
        }
    }
}

/// Feature layout and sparsity of one synthetic attribution domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainProfile {
    pub name: String,
    pub feature_count: usize,
    pub feature_names: Vec<String>,
    pub dirichlet_concentration: f64,
}

impl DomainProfile {
    pub fn finance() -> Self {
        let names = [
            "income",
            "debt_ratio",
            "credit_age",
            "utilization",
            "inquiries",
            "delinquencies",
            "employment_years",
            "savings",
        ];
        DomainProfile {
            name: "finance".into(),
            feature_count: names.len(),
            feature_names: names.iter().map(|s| s.to_string()).collect(),
            dirichlet_concentration: 1.0,
        }
    }

    pub fn genetics() -> Self {
        DomainProfile {
            name: "genetics".into(),
            feature_count: 10,
            feature_names: (1..=10).map(|i| format!("gene_{i}")).collect(),
            dirichlet_concentration: 1.0,
        }
    }

    fn is_builtin(&self) -> bool {
        self.name == "finance" || self.name == "genetics"
    }
}

/// How a listener holds on to the symbols of a message.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Retention {
    /// The first `capacity` symbols survive, the rest are dropped.
    Prefix { capacity: usize },
    /// The symbol at 1-based position `i` survives with probability `rho^i`.
    SerialDecay { rho: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModalityParams {
    pub rate_wps: f64,
    /// Load per second of explanation.
    pub alpha: f64,
    /// Load per bit of message entropy.
    pub beta: f64,
    pub symbol_noise_p: f64,
    pub retention: Retention,
}

/// Number of features a style transmits: a fixed count or all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopK {
    All,
    Count(usize),
}

impl TopK {
    pub fn resolve(self, feature_count: usize) -> usize {
        match self {
            TopK::All => feature_count,
            TopK::Count(k) => k.min(feature_count),
        }
    }
}

impl Serialize for TopK {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TopK::All => serializer.serialize_str("all"),
            TopK::Count(k) => serializer.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for TopK {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct TopKVisitor;

        impl Visitor<'_> for TopKVisitor {
            type Value = TopK;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive integer or \"all\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<TopK, E> {
                Ok(TopK::Count(v as usize))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<TopK, E> {
                if v < 0 {
                    return Err(E::custom("top_k must be non-negative"));
                }
                Ok(TopK::Count(v as usize))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<TopK, E> {
                if v == "all" {
                    Ok(TopK::All)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(TopKVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StyleParams {
    pub top_k: TopK,
    pub quant_levels: u32,
    pub word_count: u32,
}

/// Generative model for task correctness `q` and user trust `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrustParams {
    pub q_low: f64,
    pub q_high: f64,
    pub bias_by_modality: ByModality<f64>,
    /// Multiplies the modality bias; smaller means better calibrated.
    pub style_factor: ByStyle<f64>,
    pub sigma_by_modality: ByModality<f64>,
}

impl TrustParams {
    /// Systematic trust offset for a condition.
    pub fn offset(&self, m: Modality, s: Style) -> f64 {
        self.bias_by_modality.get(m) * self.style_factor.get(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositeWeights {
    pub lambda1: f64,
    pub lambda2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub samples_per_condition_per_domain: usize,
    pub domains: Vec<DomainProfile>,
    pub modality_params: ByModality<ModalityParams>,
    pub style_params: ByStyle<StyleParams>,
    pub trust: TrustParams,
    pub weights: CompositeWeights,
    pub lambda2_sweep: Vec<f64>,
}

/// The λ₂ grid 0.1, 0.2, ..., 1.0 written as exact decimal literals.
pub const DEFAULT_LAMBDA2_SWEEP: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            master_seed: 42,
            samples_per_condition_per_domain: 30,
            domains: vec![DomainProfile::finance(), DomainProfile::genetics()],
            modality_params: ByModality {
                text: ModalityParams {
                    rate_wps: 4.17,
                    alpha: 0.34,
                    beta: 0.58,
                    symbol_noise_p: 0.05,
                    retention: Retention::Prefix { capacity: 7 },
                },
                voice: ModalityParams {
                    rate_wps: 2.5,
                    alpha: 0.34,
                    beta: 0.58,
                    symbol_noise_p: 0.15,
                    retention: Retention::SerialDecay { rho: 0.80 },
                },
            },
            style_params: ByStyle {
                brief: StyleParams {
                    top_k: TopK::Count(3),
                    quant_levels: 3,
                    word_count: 65,
                },
                detailed: StyleParams {
                    top_k: TopK::All,
                    quant_levels: 7,
                    word_count: 95,
                },
                analogy: StyleParams {
                    top_k: TopK::Count(5),
                    quant_levels: 5,
                    word_count: 95,
                },
            },
            trust: TrustParams {
                q_low: 0.6,
                q_high: 0.95,
                bias_by_modality: ByModality {
                    text: -0.215,
                    voice: 0.14,
                },
                style_factor: ByStyle {
                    brief: 1.0,
                    detailed: 0.88,
                    analogy: 0.8,
                },
                sigma_by_modality: ByModality {
                    text: 0.02,
                    voice: 0.03,
                },
            },
            weights: CompositeWeights {
                lambda1: 1.0,
                lambda2: 0.5,
            },
            lambda2_sweep: DEFAULT_LAMBDA2_SWEEP.to_vec(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Parses and validates in one step.
    pub fn load_validated(path: &Path) -> Result<Self> {
        let cfg = Self::load(path)?;
        cfg.validate().into_result()?;
        Ok(cfg)
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> ValidationReport {
        validate_config(self)
    }
}

/// One violated invariant, located by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, path: &str) -> bool {
        self.violations.iter().any(|v| v.path == path)
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Config(self))
        }
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    fn check(&mut self, ok: bool, path: impl Into<String>, message: impl Into<String>) {
        if !ok {
            self.push(path, message);
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  {}: {}", v.path, v.message)?;
        }
        Ok(())
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Checks every type invariant and reports all violations at once.
pub fn validate_config(cfg: &ExperimentConfig) -> ValidationReport {
    let mut r = ValidationReport::default();

    r.check(
        cfg.samples_per_condition_per_domain > 0,
        "samples_per_condition_per_domain",
        "must be a positive integer",
    );

    r.check(!cfg.domains.is_empty(), "domains", "at least one domain is required");
    let mut domain_names = BTreeSet::new();
    for (i, d) in cfg.domains.iter().enumerate() {
        let p = format!("domains[{i}]");
        r.check(!d.name.is_empty(), format!("{p}.name"), "must not be empty");
        r.check(
            domain_names.insert(d.name.as_str()),
            format!("{p}.name"),
            format!("duplicate domain name {:?}", d.name),
        );
        r.check(d.feature_count > 0, format!("{p}.feature_count"), "must be positive");
        if d.is_builtin() {
            r.check(
                (5..=10).contains(&d.feature_count),
                format!("{p}.feature_count"),
                "built-in profiles use 5 to 10 features",
            );
        }
        r.check(
            d.feature_names.len() == d.feature_count,
            format!("{p}.feature_names"),
            format!(
                "has {} names but feature_count is {}",
                d.feature_names.len(),
                d.feature_count
            ),
        );
        let unique: BTreeSet<_> = d.feature_names.iter().collect();
        r.check(
            unique.len() == d.feature_names.len(),
            format!("{p}.feature_names"),
            "feature names must be unique",
        );
        r.check(
            positive(d.dirichlet_concentration),
            format!("{p}.dirichlet_concentration"),
            "must be a positive real",
        );
    }

    for m in Modality::ALL {
        let p = format!("modality_params.{m}");
        let mp = cfg.modality_params.get(m);
        r.check(positive(mp.rate_wps), format!("{p}.rate_wps"), "must be positive");
        r.check(positive(mp.alpha), format!("{p}.alpha"), "ModalityParams.alpha must be > 0");
        r.check(positive(mp.beta), format!("{p}.beta"), "ModalityParams.beta must be > 0");
        r.check(
            (0.0..=1.0).contains(&mp.symbol_noise_p),
            format!("{p}.symbol_noise_p"),
            "must lie in [0, 1]",
        );
        match mp.retention {
            Retention::Prefix { capacity } => r.check(
                capacity > 0,
                format!("{p}.retention.prefix.capacity"),
                "must be positive",
            ),
            Retention::SerialDecay { rho } => r.check(
                rho > 0.0 && rho < 1.0,
                format!("{p}.retention.serial_decay.rho"),
                "must lie in (0, 1)",
            ),
        }
    }

    let min_features = cfg.domains.iter().map(|d| d.feature_count).min();
    for s in Style::ALL {
        let p = format!("style_params.{s}");
        let sp = cfg.style_params.get(s);
        if let TopK::Count(k) = sp.top_k {
            r.check(k > 0, format!("{p}.top_k"), "must be positive or \"all\"");
            if let Some(n) = min_features {
                r.check(
                    k <= n,
                    format!("{p}.top_k"),
                    format!("exceeds the smallest domain's feature count ({n})"),
                );
            }
        }
        r.check(sp.quant_levels >= 2, format!("{p}.quant_levels"), "must be at least 2");
        r.check(sp.word_count > 0, format!("{p}.word_count"), "must be positive");
    }

    let t = &cfg.trust;
    r.check(
        t.q_low >= 0.0 && t.q_low < t.q_high && t.q_high <= 1.0,
        "trust.q_low",
        "requires 0 <= q_low < q_high <= 1",
    );
    for m in Modality::ALL {
        r.check(
            t.bias_by_modality.get(m).is_finite(),
            format!("trust.bias_by_modality.{m}"),
            "must be finite",
        );
        r.check(
            positive(*t.sigma_by_modality.get(m)),
            format!("trust.sigma_by_modality.{m}"),
            "must be positive",
        );
    }
    for s in Style::ALL {
        let f = *t.style_factor.get(s);
        r.check(
            f > 0.0 && f <= 1.0,
            format!("trust.style_factor.{s}"),
            "must lie in (0, 1]",
        );
    }

    let w = &cfg.weights;
    r.check(
        w.lambda1.is_finite() && w.lambda1 >= 0.0,
        "weights.lambda1",
        "must be non-negative",
    );
    r.check(
        w.lambda2.is_finite() && w.lambda2 >= 0.0,
        "weights.lambda2",
        "must be non-negative",
    );
    r.check(
        !(w.lambda1 == 0.0 && w.lambda2 == 0.0),
        "weights",
        "lambda1 and lambda2 cannot both be zero",
    );

    for (i, &v) in cfg.lambda2_sweep.iter().enumerate() {
        r.check(
            v > 0.0 && v <= 1.0,
            format!("lambda2_sweep[{i}]"),
            "must lie in (0, 1]",
        );
    }
    for (i, pair) in cfg.lambda2_sweep.windows(2).enumerate() {
        r.check(
            pair[0] < pair[1],
            format!("lambda2_sweep[{}]", i + 1),
            "sweep must be strictly increasing",
        );
    }

    r
}
