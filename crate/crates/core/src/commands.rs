//! Report builders behind the `analyze`, `spectrum` and `adversary` commands.
//!
//! Every report embeds the spec it came from, the depth ladder and the
//! convention notes, and contains no timestamps, so re-running a command on
//! the same spec reproduces it byte for byte.

use std::io::Write;

use serde::Serialize;

use crate::compop::{
    self, BoundednessReport, BoundednessTrend, CompactnessConfig, CompactnessProfile, IsometryVerdict, OperatorSpec,
};
use crate::document::{AnalysisSpec, Scenario};
use crate::error::{Error, Result};
use crate::oracle::{self, DenseMatrix};
use crate::report::{self, CONVENTION_NOTES};
use crate::schatten::{self, MembershipTrend, SchattenSum, TraceReport};
use crate::selfmap::{self, Adversary, MapDocument};
use crate::tree::Tree;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailDefectSample {
    pub cutoff: usize,
    pub n: usize,
    #[serde(with = "report::num")]
    pub defect: f64,
    /// `s_cutoff^(1/p)`, the bound for injective maps.
    #[serde(with = "report::num")]
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthAnalysis {
    pub truncation_depth: usize,
    pub boundedness: BoundednessReport,
    pub isometry: IsometryVerdict,
    pub compactness: CompactnessProfile,
    pub tail_defects: Vec<TailDefectSample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeReport {
    pub command: &'static str,
    pub spec: AnalysisSpec,
    pub depth_ladder: Vec<usize>,
    pub convention_notes: &'static [&'static str],
    pub norm_formula: &'static str,
    pub depths: Vec<DepthAnalysis>,
    pub boundedness_trend: BoundednessTrend,
}

/// Cutoffs `0, D/3, 2D/3` with `n` at the next level and halfway down.
fn tail_samples(spec: &OperatorSpec, profile: &CompactnessProfile) -> Result<Vec<TailDefectSample>> {
    let depth = spec.tree().truncation_depth();
    let inv_p = 1.0 / spec.p().value();
    let mut cutoffs: Vec<usize> = vec![0, depth / 3, 2 * depth / 3];
    cutoffs.dedup();
    let mut samples = Vec::new();
    for cutoff in cutoffs.into_iter().filter(|&c| c < depth) {
        let mut ns = vec![cutoff + 1, (cutoff + 1 + depth).div_ceil(2)];
        ns.dedup();
        for n in ns {
            samples.push(TailDefectSample {
                cutoff,
                n,
                defect: compop::tail_defect(spec, n, cutoff)?,
                bound: profile.s[cutoff].powf(inv_p),
            });
        }
    }
    Ok(samples)
}

pub fn analyze(scenario: &Scenario) -> Result<AnalyzeReport> {
    let tol = scenario.spec.tolerances;
    let config = CompactnessConfig {
        decay_ratio: tol.decay_ratio,
    };
    let mut depths = Vec::new();
    for &d in scenario.ladder() {
        let spec = scenario.instance(d)?;
        let compactness = compop::compactness_profile(&spec, &config);
        depths.push(DepthAnalysis {
            truncation_depth: d,
            boundedness: compop::boundedness_report(&spec),
            isometry: compop::isometry_check(&spec, tol.ratio),
            tail_defects: tail_samples(&spec, &compactness)?,
            compactness,
        });
    }
    let ladder: Vec<(usize, f64)> = depths
        .iter()
        .map(|d| (d.truncation_depth, d.boundedness.beta.value))
        .collect();
    Ok(AnalyzeReport {
        command: "analyze",
        spec: scenario.spec.clone(),
        depth_ladder: scenario.ladder().to_vec(),
        convention_notes: CONVENTION_NOTES,
        norm_formula: "derived, oracle-verified: max_u [weight(preimage(u)) / weight(u)]^(1/p)",
        boundedness_trend: compop::boundedness_trend(&ladder, tol.trend),
        depths,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleComparison {
    #[serde(with = "report::num")]
    pub frobenius_sq: f64,
    /// Largest `|sigma_analytic - sigma_oracle|` after sorting.
    #[serde(with = "report::num")]
    pub max_deviation: f64,
    pub agrees: bool,
    pub gram_is_identity: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthSpectrum {
    pub truncation_depth: usize,
    pub vertex_count: usize,
    #[serde(with = "report::num")]
    pub hs_norm: f64,
    pub schatten_sums: Vec<SchattenSum>,
    pub trace: TraceReport,
    pub oracle: Option<OracleComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_notice: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipRow {
    #[serde(with = "report::num")]
    pub q: f64,
    #[serde(with = "report::num_vec")]
    pub partial_sums: Vec<f64>,
    pub verdict: MembershipTrend,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumRow {
    pub rank: usize,
    #[serde(with = "report::num")]
    pub sigma_analytic: f64,
    #[serde(with = "report::num_opt")]
    pub sigma_oracle: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub command: &'static str,
    pub spec: AnalysisSpec,
    pub depth_ladder: Vec<usize>,
    pub convention_notes: &'static [&'static str],
    pub depths: Vec<DepthSpectrum>,
    /// Schatten partial sums across the ladder, one row per exponent.
    pub membership: Vec<MembershipRow>,
    /// Singular values at the deepest ladder entry.
    pub spectrum_depth: usize,
    pub spectrum: Vec<SpectrumRow>,
    pub trace_line: String,
    #[serde(skip)]
    pub matrix: Option<DenseMatrix>,
}

fn schatten_exponents(spec: &AnalysisSpec) -> Vec<f64> {
    if spec.schatten_exponents.is_empty() {
        vec![1.0, 2.0]
    } else {
        spec.schatten_exponents.clone()
    }
}

pub fn spectrum(scenario: &Scenario) -> Result<SpectrumReport> {
    let spec_doc = &scenario.spec;
    if !spec_doc.p.is_hilbert() {
        return Err(Error::RequiresHilbert(spec_doc.p.value()));
    }
    let exponents = schatten_exponents(spec_doc);
    let settings = spec_doc.oracle;
    let mut depths = Vec::new();
    let mut spectrum = Vec::new();
    let mut matrix = None;
    for (i, &d) in scenario.ladder().iter().enumerate() {
        let spec = scenario.instance(d)?;
        let report = schatten::spectral_report(&spec, &exponents)?;
        let deepest = i + 1 == scenario.ladder().len();
        let (comparison, notice, oracle_values) = if !settings.enabled {
            (None, None, None)
        } else if spec.tree().len() > settings.dense_cap {
            let notice = format!(
                "oracle skipped: {} vertices exceed the dense cap {}",
                spec.tree().len(),
                settings.dense_cap
            );
            (None, Some(notice), None)
        } else {
            let m = oracle::matrix_of(&spec, settings.dense_cap)?;
            let values = oracle::svd_values(&m)?;
            let max_deviation = report
                .singular_values
                .iter()
                .zip(&values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let comparison = OracleComparison {
                frobenius_sq: oracle::frobenius_sq(&m),
                max_deviation,
                agrees: max_deviation <= spec_doc.tolerances.oracle,
                gram_is_identity: oracle::gram_is_identity(&m, 1e-10),
            };
            if deepest {
                matrix = Some(m);
            }
            (Some(comparison), None, Some(values))
        };
        if deepest {
            spectrum = report
                .singular_values
                .iter()
                .enumerate()
                .map(|(k, &s)| SpectrumRow {
                    rank: k + 1,
                    sigma_analytic: s,
                    sigma_oracle: oracle_values.as_ref().map(|v| v[k]),
                })
                .collect();
        }
        depths.push(DepthSpectrum {
            truncation_depth: d,
            vertex_count: spec.tree().len(),
            hs_norm: report.hs_norm,
            schatten_sums: report.schatten_sums,
            trace: report.trace,
            oracle: comparison,
            oracle_notice: notice,
        });
    }
    let membership = exponents
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            let partial_sums: Vec<f64> = depths.iter().map(|d| d.schatten_sums[k].diagonal_sum).collect();
            MembershipRow {
                q,
                verdict: schatten::membership_trend(&partial_sums, spec_doc.tolerances.convergence),
                partial_sums,
            }
        })
        .collect();
    let last = depths.last().expect("validated ladder is nonempty");
    let trace_line = format!(
        "depth {}: trace {} = fixed points {}",
        last.truncation_depth,
        report::sig15(last.trace.trace_diagonal),
        last.trace.fixed_point_count
    );
    Ok(SpectrumReport {
        command: "spectrum",
        spec: spec_doc.clone(),
        depth_ladder: scenario.ladder().to_vec(),
        convention_notes: CONVENTION_NOTES,
        spectrum_depth: last.truncation_depth,
        depths,
        membership,
        spectrum,
        trace_line,
        matrix,
    })
}

impl SpectrumReport {
    /// Whether the CSV carries the `sigma_oracle` column.
    pub fn has_oracle_column(&self) -> bool {
        self.spectrum.first().is_some_and(|r| r.sigma_oracle.is_some())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let oracle = self.has_oracle_column();
        if oracle {
            w.write_record(["rank", "sigma_analytic", "sigma_oracle"])?;
        } else {
            w.write_record(["rank", "sigma_analytic"])?;
        }
        for row in &self.spectrum {
            let mut record = vec![row.rank.to_string(), report::sig15(row.sigma_analytic)];
            if oracle {
                record.push(report::sig15(row.sigma_oracle.expect("column present")));
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AdversaryAtDepth {
    pub truncation_depth: usize,
    pub found: bool,
    pub swaps: usize,
    #[serde(with = "report::num")]
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryVerdict {
    /// β grows at every ladder step.
    Found,
    NotFound,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdversaryLadder {
    pub ladder: Vec<AdversaryAtDepth>,
    pub verdict: AdversaryVerdict,
    /// The constructed map at the deepest ladder entry.
    pub map: Option<MapDocument>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdversaryReport {
    pub command: &'static str,
    pub spec: AnalysisSpec,
    pub depth_ladder: Vec<usize>,
    pub convention_notes: &'static [&'static str],
    pub weight_bounds: Vec<(usize, String, String)>,
    pub unbounded: AdversaryLadder,
    pub vanishing: AdversaryLadder,
}

fn adversary_ladder(
    scenario: &Scenario,
    build: fn(&Tree, &crate::weight::Weight) -> Option<Adversary>,
) -> Result<AdversaryLadder> {
    let mut ladder = Vec::new();
    let mut map = None;
    for &d in scenario.ladder() {
        let tree = scenario.tree_at(d)?;
        let weight = scenario.weight_on(&tree)?;
        let found = build(&tree, &weight);
        let (beta, swaps) = match &found {
            Some(a) => {
                let spec = OperatorSpec::new(tree.clone(), weight, a.map.clone(), scenario.spec.p)?;
                (compop::beta(&spec).value, a.pairs.len())
            }
            None => (1.0, 0),
        };
        map = found.as_ref().map(|a| a.map.to_document(&tree));
        ladder.push(AdversaryAtDepth {
            truncation_depth: d,
            found: found.is_some(),
            swaps,
            beta,
        });
    }
    let betas: Vec<(usize, f64)> = ladder.iter().map(|a| (a.truncation_depth, a.beta)).collect();
    let growing = ladder.iter().all(|a| a.found)
        && compop::boundedness_trend(&betas, scenario.spec.tolerances.trend) == BoundednessTrend::UnboundedTrend;
    Ok(AdversaryLadder {
        verdict: if growing {
            AdversaryVerdict::Found
        } else {
            AdversaryVerdict::NotFound
        },
        map: if growing { map } else { None },
        ladder,
    })
}

pub fn adversary(scenario: &Scenario) -> Result<AdversaryReport> {
    let mut weight_bounds = Vec::new();
    for &d in scenario.ladder() {
        let tree = scenario.tree_at(d)?;
        let (lo, hi) = scenario.weight_on(&tree)?.bounds();
        weight_bounds.push((d, report::sig15(lo), report::sig15(hi)));
    }
    Ok(AdversaryReport {
        command: "adversary",
        spec: scenario.spec.clone(),
        depth_ladder: scenario.ladder().to_vec(),
        convention_notes: CONVENTION_NOTES,
        weight_bounds,
        unbounded: adversary_ladder(scenario, selfmap::adversary_unbounded)?,
        vanishing: adversary_ladder(scenario, selfmap::adversary_vanishing)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn scenario(text: &str) -> Scenario {
        Scenario::parse(text, Path::new("."), Path::new("<inline>")).unwrap()
    }

    #[test]
    fn identity_analysis() {
        let s = scenario(
            r#"{"schema_version": 1, "tree": {"kind": "bary", "branching": 2},
                "weight": {"family": "reciprocal_depth"}, "map": {"builtin": "identity"},
                "depth_ladder": [2, 4, 6]}"#,
        );
        let r = analyze(&s).unwrap();
        for d in &r.depths {
            assert_eq!(d.boundedness.norm_exact.value, 1.0);
            assert!(d.isometry.is_isometry);
            assert!(d.compactness.s.iter().all(|&x| x == 1.0));
            assert!(d.tail_defects.iter().all(|t| t.defect <= t.bound));
        }
        assert_eq!(r.boundedness_trend, BoundednessTrend::Plateau);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, serde_json::to_string(&analyze(&s).unwrap()).unwrap());
        assert!(json.contains("convention_notes"));
    }

    #[test]
    fn depth_square_trend() {
        let s = scenario(
            r#"{"schema_version": 1, "tree": {"kind": "bary", "branching": 2},
                "weight": {"family": "reciprocal_depth"}, "map": {"builtin": "depth_square"},
                "depth_ladder": [4, 9, 16]}"#,
        );
        let r = analyze(&s).unwrap();
        assert_eq!(r.boundedness_trend, BoundednessTrend::UnboundedTrend);
        assert_eq!(
            r.depths
                .iter()
                .map(|d| d.boundedness.effective_domain_depth)
                .collect::<Vec<_>>(),
            vec![Some(2), Some(3), Some(4)]
        );
    }

    #[test]
    fn spectrum_path_example() {
        let s = scenario(
            r#"{"schema_version": 1, "tree": {"kind": "bary", "branching": 1},
                "weight": {"family": "geometric", "params": {"c": 0.5}}, "map": {"builtin": "parent"},
                "depth_ladder": [2, 4, 6], "schatten_exponents": [1, 2]}"#,
        );
        let r = spectrum(&s).unwrap();
        assert_eq!(r.depths[2].hs_norm, 2.0);
        assert!(r.depths.iter().all(|d| d.oracle.as_ref().unwrap().agrees));
        assert_eq!(r.spectrum.len(), 7);
        assert_eq!(r.membership[1].verdict, MembershipTrend::Diverging);
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert!(csv.starts_with("rank,sigma_analytic,sigma_oracle\n1,1.22474487139159,"));
        assert_eq!(r.trace_line, "depth 6: trace 1.00000000000000 = fixed points 1");
    }

    #[test]
    fn spectrum_without_oracle() {
        let s = scenario(
            r#"{"schema_version": 1, "tree": {"kind": "bary", "branching": 2},
                "weight": {"family": "constant", "params": {"c": 1}}, "map": {"builtin": "identity"},
                "depth_ladder": [2], "oracle": {"enabled": false}}"#,
        );
        let r = spectrum(&s).unwrap();
        assert_eq!(r.depths[0].hs_norm, 7f64.sqrt());
        assert_eq!(r.depths[0].trace.trace_diagonal, 7.0);
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv)
            .unwrap()
            .starts_with("rank,sigma_analytic\n1,1.00000000000000\n"));
    }

    #[test]
    fn spectrum_needs_hilbert() {
        let s = scenario(
            r#"{"schema_version": 1, "tree": {"kind": "bary", "branching": 2},
                "weight": {"family": "reciprocal_depth"}, "map": {"builtin": "identity"},
                "p": 3, "depth_ladder": [2]}"#,
        );
        assert!(matches!(spectrum(&s), Err(Error::RequiresHilbert(_))));
    }

    #[test]
    fn adversaries() {
        let run = |weight: &str| {
            adversary(&scenario(&format!(
                r#"{{"schema_version": 1, "tree": {{"kind": "bary", "branching": 1}},
                    "weight": {weight}, "depth_ladder": [4, 16, 64]}}"#
            )))
            .unwrap()
        };
        let constant = run(r#"{"family": "constant", "params": {"c": 1}}"#);
        assert_eq!(constant.unbounded.verdict, AdversaryVerdict::NotFound);
        assert_eq!(constant.vanishing.verdict, AdversaryVerdict::NotFound);
        let vanishing = run(r#"{"family": "reciprocal_depth"}"#);
        assert_eq!(vanishing.vanishing.verdict, AdversaryVerdict::Found);
        assert!(vanishing.vanishing.map.is_some());
        let unbounded = run(r#"{"family": "geometric", "params": {"c": 2}}"#);
        assert_eq!(unbounded.unbounded.verdict, AdversaryVerdict::Found);
        let b = &unbounded.unbounded.ladder;
        assert!(b[2].beta >= 2.0 * b[1].beta);
    }
}
