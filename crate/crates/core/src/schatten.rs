//! Singular values of the composition operator on the Hilbert space `p = 2`.
//!
//! In the orthonormal basis of normalized indicators the operator matrix has
//! one nonzero per row, so `C* C` is diagonal with entries
//! `weight(preimage(u)) / weight(u)`. The singular values are their square
//! roots; the dense oracle checks this independently.

use serde::Serialize;

use crate::compop::{self, OperatorSpec};
use crate::error::{Error, Result};
use crate::report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    Analytic,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchattenSum {
    #[serde(with = "report::num")]
    pub q: f64,
    /// `sum_u [weight(preimage(u)) / weight(u)]^(q/2)`.
    #[serde(with = "report::num")]
    pub diagonal_sum: f64,
    /// `sum_n mu_n^q` over the analytic singular values.
    #[serde(with = "report::num")]
    pub singular_sum: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceReport {
    /// `sum_u <C f_u, f_u>`.
    #[serde(with = "report::num")]
    pub trace_diagonal: f64,
    pub fixed_point_count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub truncation_depth: usize,
    #[serde(with = "report::num_vec")]
    pub singular_values: Vec<f64>,
    pub schatten_sums: Vec<SchattenSum>,
    #[serde(with = "report::num")]
    pub hs_norm: f64,
    pub trace: TraceReport,
    pub source: SpectrumSource,
}

fn require_hilbert(spec: &OperatorSpec) -> Result<()> {
    if spec.p().is_hilbert() {
        Ok(())
    } else {
        Err(Error::RequiresHilbert(spec.p().value()))
    }
}

/// Descending, padded with zeros to the vertex count.
pub fn singular_values_analytic(spec: &OperatorSpec) -> Result<Vec<f64>> {
    require_hilbert(spec)?;
    let mut values: Vec<f64> = compop::preimage_ratios(spec).into_iter().map(f64::sqrt).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

fn diagonal_sum(spec: &OperatorSpec, q: f64) -> f64 {
    let half = q / 2.0;
    compop::preimage_ratios(spec)
        .into_iter()
        .filter(|&r| r > 0.0)
        .map(|r| if half == 1.0 { r } else { r.powf(half) })
        .sum()
}

/// Hilbert-Schmidt norm `[sum_u weight(preimage(u)) / weight(u)]^(1/2)`.
pub fn hs_norm(spec: &OperatorSpec) -> Result<f64> {
    require_hilbert(spec)?;
    Ok(diagonal_sum(spec, 2.0).sqrt())
}

pub fn schatten_sum(spec: &OperatorSpec, q: f64) -> Result<SchattenSum> {
    require_hilbert(spec)?;
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::InvalidSchattenExponent(q));
    }
    let singular_sum = singular_values_analytic(spec)?
        .into_iter()
        .filter(|&mu| mu > 0.0)
        .map(|mu| mu.powf(q))
        .sum();
    Ok(SchattenSum {
        q,
        diagonal_sum: diagonal_sum(spec, q),
        singular_sum,
    })
}

/// `sum_u sum_v chi_u(map(v)) chi_u(v) weight(v) / weight(u)` next to the
/// fixed-point count. Each summand is exactly 0 or 1.
pub fn trace_diagonal(spec: &OperatorSpec) -> TraceReport {
    let mut trace = 0.0;
    let mut fixed = 0usize;
    for (v, w) in spec.map().pairs() {
        if v == w {
            trace += spec.weight().at(v) / spec.weight().at(w);
            fixed += 1;
        }
    }
    TraceReport {
        trace_diagonal: trace,
        fixed_point_count: fixed,
    }
}

pub fn spectral_report(spec: &OperatorSpec, exponents: &[f64]) -> Result<SpectralReport> {
    Ok(SpectralReport {
        truncation_depth: spec.tree().truncation_depth(),
        singular_values: singular_values_analytic(spec)?,
        schatten_sums: exponents
            .iter()
            .map(|&q| schatten_sum(spec, q))
            .collect::<Result<_>>()?,
        hs_norm: hs_norm(spec)?,
        trace: trace_diagonal(spec),
        source: SpectrumSource::Analytic,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipTrend {
    /// The last partial-sum increment is below tolerance.
    Converging,
    /// The last increment stays at least half the first one.
    Diverging,
    Inconclusive,
}

/// Classifies partial sums ordered by truncation depth.
pub fn membership_trend(partial_sums: &[f64], tol: f64) -> MembershipTrend {
    if partial_sums.len() < 3 {
        return MembershipTrend::Inconclusive;
    }
    let increments: Vec<f64> = partial_sums.windows(2).map(|w| w[1] - w[0]).collect();
    let last = *increments.last().expect("at least two increments");
    let first = increments[0];
    let scale = partial_sums.last().expect("nonempty").abs().max(1.0);
    if last.abs() <= tol * scale {
        MembershipTrend::Converging
    } else if first > 0.0 && last >= 0.5 * first {
        MembershipTrend::Diverging
    } else {
        MembershipTrend::Inconclusive
    }
}
