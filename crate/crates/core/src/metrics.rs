//! Cognitive load, comprehension efficiency, the trust model, calibration
//! error, and the composite score.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{CompositeWeights, Modality, ModalityParams, Style, TrustParams};
use crate::error::{Error, Result};
use crate::stream::RandomStream;

/// `L = α·D + β·H`.
pub fn cognitive_load(
    duration_s: f64,
    message_entropy_bits: f64,
    params: &ModalityParams,
) -> Result<f64> {
    if !(duration_s > 0.0) {
        return Err(Error::Domain(format!(
            "duration must be positive, got {duration_s}"
        )));
    }
    if !(message_entropy_bits >= 0.0) {
        return Err(Error::Domain(format!(
            "message entropy must be non-negative, got {message_entropy_bits}"
        )));
    }
    Ok(params.alpha * duration_s + params.beta * message_entropy_bits)
}

/// `CE = I_M / L`.
pub fn comprehension_efficiency(i_m: f64, load: f64) -> Result<f64> {
    if !(load > 0.0) {
        return Err(Error::Domain(format!("load must be positive, got {load}")));
    }
    Ok(i_m / load)
}

/// One simulated trial of the trust model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustOutcome {
    pub q_true: f64,
    pub trust: f64,
    pub tce_abs: f64,
}

/// Unclamped trust `q + offset + ε`, `ε ~ N(0, σ²)`. With `sigma == 0` the
/// result is exactly `q + offset` and no draw is consumed.
pub fn perceived_trust(q_true: f64, offset: f64, sigma: f64, stream: &mut RandomStream) -> f64 {
    if sigma == 0.0 {
        return q_true + offset;
    }
    let noise = Normal::new(0.0, sigma).expect("sigma validated positive");
    q_true + offset + noise.sample(stream)
}

/// Draws `q ~ U(q_low, q_high)`, then `T = clamp01(q + bias·factor + ε)`.
pub fn simulate_trust(
    modality: Modality,
    style: Style,
    params: &TrustParams,
    stream: &mut RandomStream,
) -> TrustOutcome {
    let q_true = if params.q_high > params.q_low {
        stream.random_range(params.q_low..params.q_high)
    } else {
        params.q_low
    };
    let offset = params.offset(modality, style);
    let sigma = *params.sigma_by_modality.get(modality);
    let trust = perceived_trust(q_true, offset, sigma, stream).clamp(0.0, 1.0);
    TrustOutcome {
        q_true,
        trust,
        tce_abs: (trust - q_true).abs(),
    }
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `E|b + ε|` for `ε ~ N(0, σ²)`:
/// `σ·√(2/π)·exp(−b²/2σ²) + b·(1 − 2·Φ(−b/σ))`.
pub fn folded_normal_mean(b: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let spread = sigma * (2.0 / std::f64::consts::PI).sqrt() * (-b * b / (2.0 * sigma * sigma)).exp();
    Ok(spread + b * (1.0 - 2.0 * std_normal_cdf(-b / sigma)))
}

/// `Φ = λ₁·CE − λ₂·TCE`.
pub fn composite_score(ce: f64, tce: f64, w: &CompositeWeights) -> f64 {
    w.lambda1 * ce - w.lambda2 * tce
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, Retention};
    use proptest::prelude::*;

    fn params(alpha: f64, beta: f64) -> ModalityParams {
        ModalityParams {
            rate_wps: 1.0,
            alpha,
            beta,
            symbol_noise_p: 0.0,
            retention: Retention::Prefix { capacity: 7 },
        }
    }

    #[test]
    fn load_examples() {
        assert!((cognitive_load(10.0, 2.0, &params(0.1, 0.2)).unwrap() - 1.4).abs() < 1e-12);
        assert_eq!(cognitive_load(12.0, 0.0, &params(0.1, 0.2)).unwrap(), 0.1 * 12.0);
        let text = ExperimentConfig::default().modality_params.text;
        let d = ExperimentConfig::default().style_params.detailed.word_count as f64 / text.rate_wps;
        let expected = text.alpha * d + text.beta * 2.5;
        assert!((cognitive_load(d, 2.5, &text).unwrap() - expected).abs() < 1e-9);
        assert!(matches!(cognitive_load(0.0, 1.0, &text), Err(Error::Domain(_))));
        assert!(matches!(cognitive_load(-1.0, 1.0, &text), Err(Error::Domain(_))));
    }

    #[test]
    fn detailed_text_load_example() {
        // α = 0.15, D = 120/4.17 s, β = 0.25, H = 2.5 bits.
        let p = ModalityParams {
            rate_wps: 4.17,
            ..params(0.15, 0.25)
        };
        let load = cognitive_load(120.0 / 4.17, 2.5, &p).unwrap();
        assert!((load - (0.15 * 120.0 / 4.17 + 0.625)).abs() < 1e-9);
        assert!((load - 4.942).abs() < 1e-3);
    }

    #[test]
    fn ce_examples() {
        assert_eq!(comprehension_efficiency(1.0, 2.0).unwrap(), 0.5);
        assert_eq!(comprehension_efficiency(0.0, 3.7).unwrap(), 0.0);
        assert!((comprehension_efficiency(0.7, 1.4).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(comprehension_efficiency(0.5, 0.0), Err(Error::Domain(_))));
    }

    fn trust_params(bias: f64, sigma: f64) -> TrustParams {
        let mut t = ExperimentConfig::default().trust;
        t.bias_by_modality.text = bias;
        t.style_factor.brief = 1.0;
        t.sigma_by_modality.text = sigma;
        t
    }

    #[test]
    fn noiseless_unbiased_trust_is_calibrated() {
        let t = trust_params(0.0, 0.0);
        let mut s = RandomStream::from_seed(1);
        for _ in 0..100 {
            let o = simulate_trust(Modality::Text, Style::Brief, &t, &mut s);
            assert_eq!(o.trust, o.q_true);
            assert_eq!(o.tce_abs, 0.0);
        }
    }

    #[test]
    fn deterministic_offset() {
        let mut s = RandomStream::from_seed(1);
        let t = perceived_trust(0.7, 0.1, 0.0, &mut s);
        assert!((t - 0.8).abs() < 1e-12);
        assert!(((t - 0.7).abs() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn unclamped_unit_noise_has_folded_mean() {
        let mut s = RandomStream::from_seed(11);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| (perceived_trust(0.5, 0.0, 1.0, &mut s) - 0.5).abs())
            .sum::<f64>()
            / n as f64;
        assert!((mean - (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.01, "{mean}");
    }

    #[test]
    fn trust_stays_in_unit_interval() {
        let mut t = trust_params(0.4, 0.3);
        t.q_low = 0.8;
        t.q_high = 1.0;
        let mut s = RandomStream::from_seed(3);
        for _ in 0..1000 {
            let o = simulate_trust(Modality::Text, Style::Brief, &t, &mut s);
            assert!((0.0..=1.0).contains(&o.trust));
            assert!(o.tce_abs >= 0.0);
            assert!((o.tce_abs - (o.trust - o.q_true).abs()).abs() == 0.0);
        }
    }

    /// Composite Simpson over ±12σ of |b+x|·φ(x; σ).
    fn folded_mean_by_quadrature(b: f64, sigma: f64) -> f64 {
        let n = 20_000;
        let (lo, hi) = (-12.0 * sigma, 12.0 * sigma);
        let h = (hi - lo) / n as f64;
        let f = |x: f64| {
            (b + x).abs() * (-x * x / (2.0 * sigma * sigma)).exp()
                / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        };
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(lo + h * i as f64);
        }
        acc * h / 3.0
    }

    #[test]
    fn folded_normal_examples() {
        let root = (2.0 / std::f64::consts::PI).sqrt();
        assert!((folded_normal_mean(0.0, 1.0).unwrap() - root).abs() < 1e-12);
        assert!((folded_normal_mean(0.0, 1.0).unwrap() - 0.7978846).abs() < 1e-7);
        assert!((folded_normal_mean(0.15, 1e-9).unwrap() - 0.15).abs() < 1e-9);
        let quad = folded_mean_by_quadrature(0.1, 0.05);
        let exact = folded_normal_mean(0.1, 0.05).unwrap();
        assert!((exact - quad).abs() < 1e-6);
        // Frozen from the quadrature above.
        assert!((exact - 0.100849).abs() < 1e-6, "{exact}");
        assert!(matches!(folded_normal_mean(0.1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn composite_examples() {
        let w = CompositeWeights { lambda1: 1.0, lambda2: 0.5 };
        assert!((composite_score(0.8, 0.2, &w) - 0.7).abs() < 1e-12);
        let ce_only = CompositeWeights { lambda1: 1.0, lambda2: 0.0 };
        assert_eq!(composite_score(0.31, 0.9, &ce_only), 0.31);
        let trust_only = CompositeWeights { lambda1: 1.0, lambda2: 1.0 };
        assert!((composite_score(0.0, 0.1, &trust_only) + 0.1).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn folded_mean_matches_quadrature(b in -0.3f64..0.3, sigma in 0.02f64..0.3) {
            let exact = folded_normal_mean(b, sigma).unwrap();
            prop_assert!((exact - folded_mean_by_quadrature(b, sigma)).abs() < 1e-6);
            prop_assert!(exact >= b.abs() - 1e-12);
        }

        #[test]
        fn composite_is_affine(ce in -2.0f64..2.0, tce in 0.0f64..1.0, l1 in 0.0f64..3.0, l2 in 0.0f64..3.0) {
            let w = CompositeWeights { lambda1: l1, lambda2: l2 };
            let unit = CompositeWeights { lambda1: 1.0, lambda2: 0.0 };
            let lhs = composite_score(ce, tce, &w);
            let rhs = l1 * composite_score(ce, 0.0, &unit) - l2 * tce;
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
