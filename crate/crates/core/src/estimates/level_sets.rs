//! Level-set decay diagnostic: fit `g(k) ≤ β |A_k|^α` with
//! `g(k) = ∫|G_k(u)|` and `A_k = {|u| > k}`; `α > 1` forces boundedness.

use super::EstimateError;
use crate::discretization::Field;
use crate::truncation::remainder;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSample {
    pub level: f64,
    /// `∫|G_k(u)|`
    pub excess: f64,
    /// `|{|u| > k}|`
    pub measure: f64,
}

/// Midpoint-rule samples of `g(k)` and `|A_k|` from cell averages.
pub fn level_set_samples(u: &Field, levels: &[f64]) -> Vec<LevelSample> {
    let mesh = u.mesh();
    let v = mesh.cell_volume();
    let avgs: Vec<f64> = (0..mesh.cell_count()).map(|c| u.cell_average(c)).collect();
    levels
        .iter()
        .map(|&k| LevelSample {
            level: k,
            excess: avgs.iter().map(|a| v * remainder(*a, k).abs()).sum(),
            measure: avgs.iter().filter(|a| a.abs() > k).count() as f64 * v,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinfVerdict {
    /// `g` vanishes from this level on, so `|u| ≤ level` a.e.
    BoundedAtLevel(f64),
    /// Fitted exponent above 1: level-set decay forces a finite bound.
    Finite,
    /// Fitted exponent at most 1: no conclusion.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinfFit {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub verdict: LinfVerdict,
}

/// Least-squares line `ln g = ln β + α ln |A|` through the samples with `g, |A| > 0`.
pub fn fit_linf_bound(samples: &[LevelSample]) -> Result<LinfFit, EstimateError> {
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.excess > 0.0 && s.measure > 0.0)
        .map(|s| (s.measure.ln(), s.excess.ln()))
        .collect();
    let fit = regression(&usable);
    if let Some(k) = samples
        .iter()
        .filter(|s| s.excess == 0.0)
        .map(|s| s.level)
        .min_by(f64::total_cmp)
    {
        return Ok(LinfFit {
            alpha: fit.map(|f| f.0),
            beta: fit.map(|f| f.1),
            verdict: LinfVerdict::BoundedAtLevel(k),
        });
    }
    if usable.len() < 5 {
        return Err(EstimateError::InsufficientSamples(usable.len()));
    }
    let (alpha, beta) = fit.ok_or(EstimateError::InsufficientSamples(usable.len()))?;
    Ok(LinfFit {
        alpha: Some(alpha),
        beta: Some(beta),
        verdict: if alpha > 1.0 { LinfVerdict::Finite } else { LinfVerdict::None },
    })
}

fn regression(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let alpha = sxy / sxx;
    Some((alpha, (my - alpha * mx).exp()))
}
