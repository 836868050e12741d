//! The listener side of the channel: capacity-limited retention followed by
//! graded perceptual noise.
//!
//! This is one concrete instantiation of the reception function. Retention
//! runs first over the message in transmission order; noise then shifts the
//! level of each retained symbol by one step with probability
//! `symbol_noise_p`. Signs and feature identities are never corrupted.

use rand::Rng;

use crate::config::{ModalityParams, Retention};
use crate::encoder::{EncodedExplanation, MessageSymbol, SymbolCode};
use crate::stream::RandomStream;

/// What the user holds after the message, indexed by feature. `None` is the
/// missing symbol ⊥: never transmitted, or transmitted and forgotten.
#[derive(Debug, Clone, PartialEq)]
pub struct Percept {
    pub perceived: Vec<Option<MessageSymbol>>,
    pub retained_count: usize,
}

impl Percept {
    pub fn codes(&self) -> Vec<Option<SymbolCode>> {
        self.perceived.iter().map(|p| p.map(|s| s.code())).collect()
    }
}

pub fn perceive(
    msg: &EncodedExplanation,
    feature_count: usize,
    params: &ModalityParams,
    retention_stream: &mut RandomStream,
    noise_stream: &mut RandomStream,
) -> Percept {
    let mut perceived = vec![None; feature_count];
    let mut retained_count = 0;
    let top = msg.quant_levels.saturating_sub(1);

    let kept: Vec<&MessageSymbol> = msg
        .symbols
        .iter()
        .enumerate()
        .filter(|(pos, _)| match params.retention {
            Retention::Prefix { capacity } => *pos < capacity,
            Retention::SerialDecay { rho } => {
                let p = rho.powi(*pos as i32 + 1);
                retention_stream.random::<f64>() < p
            }
        })
        .map(|(_, s)| s)
        .collect();

    for sym in kept {
        let mut out = *sym;
        if noise_stream.random::<f64>() < params.symbol_noise_p {
            out.level = if noise_stream.random_bool(0.5) {
                (out.level + 1).min(top)
            } else {
                out.level.saturating_sub(1)
            };
        }
        perceived[sym.feature_index] = Some(out);
        retained_count += 1;
    }

    Percept {
        perceived,
        retained_count,
    }
}
