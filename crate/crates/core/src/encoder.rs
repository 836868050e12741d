//! Turns an attribution vector into a transmitted message.
//!
//! Features are ranked by magnitude, the top `k` are kept, and each kept
//! value becomes a (sign, level) symbol quantized against the sample's
//! largest magnitude. The message also carries its spoken/read duration and
//! the plug-in entropy of its symbols.

use std::cmp::Ordering;

use crate::config::{Modality, ModalityParams, Style, StyleParams};
use crate::error::{Error, Result};
use crate::generator::AttributionVector;
use crate::infotheory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

/// The (sign, level) content of a symbol, without the feature it describes.
pub type SymbolCode = (Sign, u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MessageSymbol {
    pub feature_index: usize,
    pub sign: Sign,
    pub level: u32,
}

impl MessageSymbol {
    pub fn code(&self) -> SymbolCode {
        (self.sign, self.level)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedExplanation {
    pub modality: Modality,
    pub style: Style,
    pub quant_levels: u32,
    /// Features in descending magnitude order.
    pub symbols: Vec<MessageSymbol>,
    pub duration_s: f64,
    pub message_entropy_bits: f64,
}

/// `level = floor(q * |value| / max)`, clamped to `q - 1`.
pub fn quantize_value(value: f64, max_magnitude: f64, quant_levels: u32) -> Result<SymbolCode> {
    if !(max_magnitude > 0.0) {
        return Err(Error::Degenerate(
            "cannot quantize against a zero max magnitude".into(),
        ));
    }
    if quant_levels < 2 {
        return Err(Error::Domain(format!(
            "quant_levels must be at least 2, got {quant_levels}"
        )));
    }
    let sign = if value > 0.0 {
        Sign::Positive
    } else if value < 0.0 {
        Sign::Negative
    } else {
        Sign::Zero
    };
    let scaled = (quant_levels as f64 * value.abs() / max_magnitude).floor();
    let level = (scaled as u32).min(quant_levels - 1);
    Ok((sign, level))
}

fn max_magnitude(a: &AttributionVector) -> f64 {
    a.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Feature indices by descending |value|, ties by ascending index.
pub fn rank_features(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| {
        values[j]
            .abs()
            .partial_cmp(&values[i].abs())
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });
    idx
}

/// Every feature's symbol at the given resolution, in feature order. This is
/// the reference side when measuring how much of `A` a listener retained.
pub fn reference_codes(a: &AttributionVector, quant_levels: u32) -> Result<Vec<SymbolCode>> {
    let max = max_magnitude(a);
    if max == 0.0 {
        return Err(degenerate(a));
    }
    a.values
        .iter()
        .map(|&v| quantize_value(v, max, quant_levels))
        .collect()
}

fn degenerate(a: &AttributionVector) -> Error {
    Error::Degenerate(format!(
        "sample {} of {} has an all-zero attribution vector",
        a.sample_id, a.domain
    ))
}

pub fn encode(
    a: &AttributionVector,
    modality: Modality,
    style: Style,
    modality_params: &ModalityParams,
    style_params: &StyleParams,
) -> Result<EncodedExplanation> {
    let max = max_magnitude(a);
    if max == 0.0 {
        return Err(degenerate(a));
    }
    let q = style_params.quant_levels;
    let k = style_params.top_k.resolve(a.values.len());
    let symbols = rank_features(&a.values)
        .into_iter()
        .take(k)
        .map(|i| {
            let (sign, level) = quantize_value(a.values[i], max, q)?;
            Ok(MessageSymbol {
                feature_index: i,
                sign,
                level,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let codes: Vec<SymbolCode> = symbols.iter().map(MessageSymbol::code).collect();
    let message_entropy_bits = infotheory::entropy_of(&codes)?;
    Ok(EncodedExplanation {
        modality,
        style,
        quant_levels: q,
        symbols,
        duration_s: style_params.word_count as f64 / modality_params.rate_wps,
        message_entropy_bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use proptest::prelude::*;

    fn vector(values: &[f64]) -> AttributionVector {
        AttributionVector {
            domain: "t".into(),
            sample_id: 0,
            values: values.to_vec(),
        }
    }

    fn encode_default(a: &AttributionVector, m: Modality, s: Style) -> EncodedExplanation {
        let cfg = ExperimentConfig::default();
        encode(a, m, s, cfg.modality_params.get(m), cfg.style_params.get(s)).unwrap()
    }

    fn encode_with_words(a: &AttributionVector, m: Modality, s: Style, words: u32) -> EncodedExplanation {
        let cfg = ExperimentConfig::default();
        let sp = StyleParams {
            word_count: words,
            ..cfg.style_params.get(s).clone()
        };
        encode(a, m, s, cfg.modality_params.get(m), &sp).unwrap()
    }

    /// Independent binning: the level is the index of the bucket
    /// [j/q, (j+1)/q) of max that contains |value|, the top edge in bucket q-1.
    fn bin_by_scan(value: f64, max: f64, q: u32) -> u32 {
        let r = value.abs() / max;
        (0..q).find(|&j| r < (j + 1) as f64 / q as f64).unwrap_or(q - 1)
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize_value(0.9, 0.9, 3).unwrap(), (Sign::Positive, 2));
        assert_eq!(quantize_value(-0.1, 0.9, 3).unwrap(), (Sign::Negative, 0));
        assert_eq!(quantize_value(0.45, 0.9, 3).unwrap(), (Sign::Positive, 1));
        assert_eq!(quantize_value(0.0, 0.9, 3).unwrap(), (Sign::Zero, 0));
    }

    #[test]
    fn quantize_matches_binning_table() {
        for q in 2..=9 {
            for i in 0..=200 {
                let v = -0.9 + 1.8 * i as f64 / 200.0;
                let (_, level) = quantize_value(v, 0.9, q).unwrap();
                assert_eq!(level, bin_by_scan(v, 0.9, q), "v={v} q={q}");
            }
        }
    }

    #[test]
    fn zero_max_is_degenerate() {
        assert!(matches!(quantize_value(0.0, 0.0, 3), Err(Error::Degenerate(_))));
        let a = vector(&[0.0; 5]);
        assert!(matches!(
            encode(
                &a,
                Modality::Text,
                Style::Brief,
                &ExperimentConfig::default().modality_params.text,
                &ExperimentConfig::default().style_params.brief
            ),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn detailed_text_sends_everything() {
        let a = vector(&[0.3, -0.2, 0.1, 0.1, -0.1, 0.05, 0.1, -0.05]);
        let e = encode_with_words(&a, Modality::Text, Style::Detailed, 120);
        assert_eq!(e.symbols.len(), 8);
        assert!((e.duration_s - 120.0 / 4.17).abs() < 1e-12);
        assert!((e.duration_s - 28.78).abs() < 0.01);
    }

    #[test]
    fn brief_voice_sends_three() {
        let a = vector(&[0.3, -0.2, 0.1, 0.1, -0.1, 0.05, 0.1, -0.05]);
        let e = encode_with_words(&a, Modality::Voice, Style::Brief, 30);
        assert_eq!(e.symbols.len(), 3);
        assert_eq!(e.duration_s, 30.0 / 2.5);
        let order: Vec<_> = e.symbols.iter().map(|s| s.feature_index).collect();
        // 0.1 ties at indices 2, 3, 4, 6 resolve by index.
        assert_eq!(order, [0, 1, 2]);
    }

    #[test]
    fn identical_top_symbols_have_zero_entropy() {
        let a = vector(&[0.2, 0.2, 0.2, 0.1, -0.1, 0.1, 0.05, 0.05]);
        let e = encode_default(&a, Modality::Text, Style::Brief);
        assert!(e.symbols.iter().all(|s| s.code() == (Sign::Positive, 2)));
        assert_eq!(e.message_entropy_bits, 0.0);
    }

    fn attribution() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, 5..=10)
            .prop_filter("not all zero", |v| v.iter().any(|x| *x != 0.0))
    }

    proptest! {
        #[test]
        fn message_invariants(values in attribution(), voice in any::<bool>()) {
            let a = vector(&values);
            let m = if voice { Modality::Voice } else { Modality::Text };
            let cfg = ExperimentConfig::default();
            let mut counts = Vec::new();
            for s in Style::ALL {
                let sp = cfg.style_params.get(s);
                let mp = cfg.modality_params.get(m);
                let e = encode(&a, m, s, mp, sp).unwrap();
                prop_assert_eq!(e.symbols.len(), sp.top_k.resolve(values.len()));
                for pair in e.symbols.windows(2) {
                    let (x, y) = (values[pair[0].feature_index].abs(), values[pair[1].feature_index].abs());
                    prop_assert!(x > y || (x == y && pair[0].feature_index < pair[1].feature_index));
                }
                for sym in &e.symbols {
                    prop_assert!(sym.level < sp.quant_levels);
                    prop_assert_eq!(sym.sign == Sign::Zero, values[sym.feature_index] == 0.0);
                }
                prop_assert!((e.duration_s * mp.rate_wps - sp.word_count as f64).abs() < 1e-9);
                let bound = (3.0 * sp.quant_levels as f64).log2();
                prop_assert!(e.message_entropy_bits >= 0.0 && e.message_entropy_bits <= bound + 1e-12);
                counts.push(e.symbols.len());
            }
            // brief, detailed, analogy
            prop_assert!(counts[1] >= counts[2] && counts[2] >= counts[0]);
        }
    }
}
