//! Plug-in (maximum-likelihood) information measures in bits, and a
//! univariate Gaussian KDE with Silverman's rule-of-thumb bandwidth.
//!
//! Counts are accumulated in ordered maps so every floating-point sum runs
//! in a fixed order.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// `-Σ p log₂ p` over the empirical distribution given by `counts`.
/// Zero counts contribute nothing.
pub fn entropy_from_counts<I>(counts: I) -> Result<f64>
where
    I: IntoIterator<Item = u64>,
{
    let counts: Vec<u64> = counts.into_iter().collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyInput("entropy needs at least one observation"));
    }
    let n = total as f64;
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}

pub fn entropy<K: Ord>(counts: &BTreeMap<K, u64>) -> Result<f64> {
    entropy_from_counts(counts.values().copied())
}

fn count<T: Ord + Clone>(items: impl IntoIterator<Item = T>) -> BTreeMap<T, u64> {
    let mut map = BTreeMap::new();
    for it in items {
        *map.entry(it).or_insert(0) += 1;
    }
    map
}

/// Entropy of the empirical distribution of `symbols`.
pub fn entropy_of<T: Ord + Clone>(symbols: &[T]) -> Result<f64> {
    entropy(&count(symbols.iter().cloned()))
}

/// Plug-in `I(A;U) = H(A) + H(U) − H(A,U)`, clamped to
/// `[0, min(H(A), H(U))]`.
pub fn mutual_information<A, U>(pairs: &[(A, U)]) -> Result<f64>
where
    A: Ord + Clone,
    U: Ord + Clone,
{
    if pairs.is_empty() {
        return Err(Error::EmptyInput("mutual information needs at least one pair"));
    }
    let ha = entropy(&count(pairs.iter().map(|(a, _)| a.clone())))?;
    let hu = entropy(&count(pairs.iter().map(|(_, u)| u.clone())))?;
    let hau = entropy(&count(pairs.iter().cloned()))?;
    Ok((ha + hu - hau).clamp(0.0, ha.min(hu)))
}

/// Normalized retention `I(A;U) / H(A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Retained {
    pub value: f64,
    /// `H(A) = 0`: nothing to retain, so the value is vacuously 1.
    pub degenerate: bool,
}

pub fn information_retention<A, U>(truth: &[A], perceived: &[U]) -> Result<Retained>
where
    A: Ord + Clone,
    U: Ord + Clone,
{
    if truth.len() != perceived.len() {
        return Err(Error::Shape(format!(
            "{} true symbols vs {} perceived symbols",
            truth.len(),
            perceived.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput("information retention needs symbols"));
    }
    let ha = entropy_of(truth)?;
    if ha == 0.0 {
        return Ok(Retained {
            value: 1.0,
            degenerate: true,
        });
    }
    let pairs: Vec<(A, U)> = truth.iter().cloned().zip(perceived.iter().cloned()).collect();
    let mi = mutual_information(&pairs)?;
    Ok(Retained {
        value: (mi / ha).clamp(0.0, 1.0),
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityCurve {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }

    /// Linear interpolation between grid points; zero outside the grid.
    pub fn evaluate(&self, x: f64) -> f64 {
        let g = &self.grid;
        if g.is_empty() || x < g[0] || x > g[g.len() - 1] {
            return 0.0;
        }
        let i = g.partition_point(|&v| v <= x).min(g.len() - 1).max(1);
        let (x0, x1) = (g[i - 1], g[i]);
        let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
        self.density[i - 1] + t * (self.density[i] - self.density[i - 1])
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Quantile with linear interpolation between order statistics.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `0.9 · min(σ̂, IQR/1.34) · n^(-1/5)`. When one of the two spread
/// measures is zero (heavy ties) the other is used alone.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::EmptyInput("bandwidth needs at least two samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::ZeroSpread("all samples are equal".into()));
    }
    let sd = sample_std(samples);
    let iqr = (quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)) / 1.34;
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => return Err(Error::ZeroSpread("no spread in samples".into())),
    };
    Ok(0.9 * spread * (samples.len() as f64).powf(-0.2))
}

/// Gaussian KDE evaluated on `grid_points` equally spaced points over
/// `[min − 3h, max + 3h]`, rescaled so the trapezoidal integral is 1.
pub fn kde(samples: &[f64], grid_points: usize) -> Result<DensityCurve> {
    if grid_points < 2 {
        return Err(Error::Domain("kde needs at least two grid points".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("kde samples must be finite".into()));
    }
    let h = silverman_bandwidth(samples)?;
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let step = (hi - lo) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| if i == grid_points - 1 { hi } else { lo + step * i as f64 })
        .collect();

    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let mut density: Vec<f64> = grid
        .iter()
        .map(|&x| {
            samples
                .iter()
                .map(|&s| {
                    let z = (x - s) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();

    let area = trapezoid(&grid, &density);
    for d in &mut density {
        *d /= area;
    }
    Ok(DensityCurve {
        grid,
        density,
        bandwidth: h,
    })
}
