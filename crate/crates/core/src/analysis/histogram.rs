use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binning {
    /// Equal-width bins spanning the data range.
    Count(usize),
    /// Bins of this width aligned to multiples of it.
    Width(f64),
}

/// Left-closed bins; the last bin also holds its right edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub density: Vec<f64>,
}

impl Histogram {
    /// `sum density * width`, 1 up to rounding.
    pub fn integral(&self) -> f64 {
        self.density
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum()
    }
}

pub fn histogram(values: &[f64], binning: Binning) -> Result<Histogram, AnalysisError> {
    if values.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let edges = match binning {
        Binning::Count(0) => return Err(AnalysisError::InvalidBinning("zero bins".into())),
        Binning::Count(n) => {
            let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
            let w = (hi - lo) / n as f64;
            let mut e: Vec<f64> = (0..n).map(|i| lo + i as f64 * w).collect();
            e.push(hi);
            e
        }
        Binning::Width(w) if !(w > 0.0 && w.is_finite()) => {
            return Err(AnalysisError::InvalidBinning(format!("width {w}")))
        }
        Binning::Width(w) => {
            let start = (lo / w).floor();
            let n = ((hi / w).floor() - start) as usize + 1;
            (0..=n).map(|i| (start + i as f64) * w).collect()
        }
    };
    histogram_with_edges(values, &edges)
}

/// Histogram on explicit, strictly increasing edges. Values outside are
/// ignored; densities are normalized by the number of binned values.
pub fn histogram_with_edges(values: &[f64], edges: &[f64]) -> Result<Histogram, AnalysisError> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(AnalysisError::InvalidBinning("edges must be strictly increasing".into()));
    }
    let nb = edges.len() - 1;
    let mut counts = vec![0usize; nb];
    for &v in values {
        if v < edges[0] || v > edges[nb] {
            continue;
        }
        // index of the last edge <= v
        let k = edges.partition_point(|&e| e <= v).saturating_sub(1).min(nb - 1);
        counts[k] += 1;
    }
    let total: usize = counts.iter().sum();
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| {
            if total == 0 {
                0.0
            } else {
                c as f64 / (total as f64 * (w[1] - w[0]))
            }
        })
        .collect();
    Ok(Histogram {
        edges: edges.to_vec(),
        counts,
        density,
    })
}
