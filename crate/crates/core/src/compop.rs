//! The composition operator `(C f)(v) = f(map(v))` on a weighted `L^p`
//! space of a finite truncation.
//!
//! Writing `r(v) = weight(v) / weight(map(v))`, the quantities here are
//!
//! * `beta = max_v r(v)`;
//! * the exact norm `max_u [sum_{map(v) = u} weight(v) / weight(u)]^(1/p)`,
//!   which equals `beta^(1/p)` when the map is injective and lies in
//!   `[beta^(1/p), (M beta)^(1/p)]` for multiplicity `M`;
//! * the compactness tail `s_N = max {r(v) : depth(map(v)) >= N}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lpspace::{self, Exponent, TreeFunction};
use crate::report;
use crate::selfmap::{self, MapProfile, SelfMap};
use crate::tree::{Tree, VertexId};
use crate::weight::Weight;

/// A weight, a self-map and an exponent on one truncated tree.
#[derive(Clone, Debug)]
pub struct OperatorSpec {
    tree: Tree,
    weight: Weight,
    map: SelfMap,
    p: Exponent,
}

impl OperatorSpec {
    pub fn new(tree: Tree, weight: Weight, map: SelfMap, p: Exponent) -> Result<OperatorSpec> {
        if weight.len() != tree.len() {
            return Err(Error::LengthMismatch {
                what: "weight",
                expected: tree.len(),
                found: weight.len(),
            });
        }
        if map.len() != tree.len() {
            return Err(Error::LengthMismatch {
                what: "map",
                expected: tree.len(),
                found: map.len(),
            });
        }
        if let Some((v, w)) = map.pairs().find(|(_, w)| w.index() >= tree.len()) {
            return Err(Error::ImageOutsideTree {
                vertex: tree.label(v).to_owned(),
                image: w.to_string(),
            });
        }
        Ok(OperatorSpec { tree, weight, map, p })
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn map(&self) -> &SelfMap {
        &self.map
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn with_p(mut self, p: Exponent) -> OperatorSpec {
        self.p = p;
        self
    }

    pub fn profile(&self) -> MapProfile {
        selfmap::analyze(&self.tree, &self.map)
    }

    /// Deepest level of the map's domain.
    pub fn effective_domain_depth(&self) -> Option<usize> {
        self.map.pairs().map(|(v, _)| self.tree.depth(v)).max()
    }

    /// `weight(v) / weight(map(v))`.
    pub fn ratio(&self, v: VertexId, image: VertexId) -> f64 {
        self.weight.at(v) / self.weight.at(image)
    }
}

/// A maximum together with the vertex attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extremum {
    #[serde(with = "report::num")]
    pub value: f64,
    pub at: Option<VertexId>,
}

impl Extremum {
    const EMPTY: Extremum = Extremum { value: 0.0, at: None };

    fn offer(&mut self, value: f64, at: VertexId) {
        if self.at.is_none() || value > self.value {
            *self = Extremum { value, at: Some(at) };
        }
    }
}

/// `(C f)(v) = f(map(v))` on the domain, zero elsewhere.
pub fn apply(spec: &OperatorSpec, f: &TreeFunction) -> TreeFunction {
    let mut values = vec![Complex64::new(0.0, 0.0); spec.tree.len()];
    for (v, w) in spec.map.pairs() {
        values[v.index()] = f.at(w);
    }
    TreeFunction::from_values(values)
}

/// `max_v weight(v) / weight(map(v))`, with the maximizing `v`.
pub fn beta(spec: &OperatorSpec) -> Extremum {
    let mut best = Extremum::EMPTY;
    for (v, w) in spec.map.pairs() {
        best.offer(spec.ratio(v, w), v);
    }
    best
}

/// `weight(preimage(u)) / weight(u)` for every `u`, summed one preimage
/// at a time; zero for vertices outside the image.
pub fn preimage_ratios(spec: &OperatorSpec) -> Vec<f64> {
    let mut sums = vec![0.0; spec.tree.len()];
    for (v, w) in spec.map.pairs() {
        sums[w.index()] += spec.ratio(v, w);
    }
    sums
}

/// Exact operator norm on the truncation, with the maximizing `u`; the
/// normalized indicator of `u` attains it.
pub fn norm_exact(spec: &OperatorSpec) -> Extremum {
    let mut best = Extremum::EMPTY;
    for (u, r) in preimage_ratios(spec).into_iter().enumerate() {
        if r > 0.0 {
            best.offer(r, VertexId::new(u));
        }
    }
    best.value = best.value.powf(1.0 / spec.p.value());
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundednessReport {
    pub truncation_depth: usize,
    pub effective_domain_depth: Option<usize>,
    pub vertex_count: usize,
    pub domain_size: usize,
    #[serde(with = "report::num")]
    pub p: f64,
    pub beta: Extremum,
    pub beta_finite: bool,
    pub norm_exact: Extremum,
    /// `beta^(1/p)`.
    #[serde(with = "report::num")]
    pub norm_lower: f64,
    /// `(M beta)^(1/p)`.
    #[serde(with = "report::num")]
    pub norm_upper: f64,
    pub injective: bool,
    pub multiplicity: usize,
}

pub fn boundedness_report(spec: &OperatorSpec) -> BoundednessReport {
    let profile = spec.profile();
    let b = beta(spec);
    let inv_p = 1.0 / spec.p.value();
    BoundednessReport {
        truncation_depth: spec.tree.truncation_depth(),
        effective_domain_depth: spec.effective_domain_depth(),
        vertex_count: spec.tree.len(),
        domain_size: profile.domain_size,
        p: spec.p.value(),
        beta: b,
        beta_finite: b.value.is_finite(),
        norm_exact: norm_exact(spec),
        norm_lower: b.value.powf(inv_p),
        norm_upper: (profile.max_multiplicity as f64 * b.value).powf(inv_p),
        injective: profile.injective,
        multiplicity: profile.max_multiplicity,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundednessTrend {
    /// β grows strictly at every step of the depth ladder.
    UnboundedTrend,
    /// β is unchanged over the last step.
    Plateau,
    Inconclusive,
}

/// Classifies `(depth, beta)` pairs ordered by depth.
pub fn boundedness_trend(ladder: &[(usize, f64)], rel_tol: f64) -> BoundednessTrend {
    if ladder.len() < 2 {
        return BoundednessTrend::Inconclusive;
    }
    let grows = |a: f64, b: f64| b > a * (1.0 + rel_tol);
    if ladder.windows(2).all(|w| grows(w[0].1, w[1].1)) {
        return BoundednessTrend::UnboundedTrend;
    }
    let (a, b) = (ladder[ladder.len() - 2].1, ladder[ladder.len() - 1].1);
    if (b - a).abs() <= rel_tol * a.abs().max(b.abs()) {
        BoundednessTrend::Plateau
    } else {
        BoundednessTrend::Inconclusive
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Collision {
    pub first: VertexId,
    pub second: VertexId,
    pub image: VertexId,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioViolation {
    pub vertex: VertexId,
    #[serde(with = "report::num")]
    pub ratio: f64,
}

/// A unit basis vector whose image norm differs from one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WitnessFunction {
    /// Support of the normalized indicator.
    pub vertex: VertexId,
    #[serde(with = "report::num")]
    pub image_norm: f64,
    /// `|image_norm - 1|`.
    #[serde(with = "report::num")]
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsometryVerdict {
    pub is_isometry: bool,
    pub bijective: bool,
    pub collision: Option<Collision>,
    pub unhit_count: usize,
    pub first_unhit: Option<VertexId>,
    /// Every vertex missed by the map sits on the truncation frontier, so a
    /// bijection of the infinite tree could still explain the miss.
    pub misses_only_on_frontier: bool,
    pub ratio_violation: Option<RatioViolation>,
    pub witness: Option<WitnessFunction>,
}

fn witness_at(spec: &OperatorSpec, u: VertexId) -> WitnessFunction {
    let f = lpspace::basis_vector(&spec.tree, &spec.weight, u, spec.p);
    let image_norm = lpspace::norm_p(&apply(spec, &f), &spec.weight, spec.p);
    WitnessFunction {
        vertex: u,
        image_norm,
        margin: (image_norm - 1.0).abs(),
    }
}

/// Isometric iff the map is a bijection of the stored vertices and every
/// ratio equals one within `ratio_tol`.
pub fn isometry_check(spec: &OperatorSpec, ratio_tol: f64) -> IsometryVerdict {
    let profile = spec.profile();
    let total = spec.map.is_total();
    let bijective = total && profile.injective && profile.surjective_on_truncation;

    let collision = profile
        .preimage_index
        .iter()
        .enumerate()
        .find(|(_, pre)| pre.len() > 1)
        .map(|(u, pre)| Collision {
            first: pre[0],
            second: pre[1],
            image: VertexId::new(u),
        });
    let unhit: Vec<VertexId> = profile
        .preimage_index
        .iter()
        .enumerate()
        .filter(|(_, pre)| pre.is_empty())
        .map(|(u, _)| VertexId::new(u))
        .collect();
    let depth = spec.tree.truncation_depth();
    let misses_only_on_frontier = !unhit.is_empty() && unhit.iter().all(|&u| spec.tree.depth(u) == depth);

    let ratio_violation = spec
        .map
        .pairs()
        .map(|(v, w)| (v, w, spec.ratio(v, w)))
        .filter(|&(_, _, r)| (r - 1.0).abs() > ratio_tol)
        .max_by(|a, b| (a.2 - 1.0).abs().total_cmp(&(b.2 - 1.0).abs()))
        .map(|(v, _, r)| RatioViolation { vertex: v, ratio: r });

    let is_isometry = bijective && ratio_violation.is_none();
    let witness = if is_isometry {
        None
    } else if let Some(&u) = unhit.first() {
        Some(witness_at(spec, u))
    } else {
        ratio_violation.map(|rv| {
            let image = spec.map.get(rv.vertex).expect("violation lies in the domain");
            witness_at(spec, image)
        })
    };

    IsometryVerdict {
        is_isometry,
        bijective,
        collision,
        unhit_count: unhit.len(),
        first_unhit: unhit.first().copied(),
        misses_only_on_frontier,
        ratio_violation,
        witness,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompactnessConfig {
    /// The last live tail value must fall below `decay_ratio * s_0`.
    pub decay_ratio: f64,
}

impl Default for CompactnessConfig {
    fn default() -> Self {
        CompactnessConfig { decay_ratio: 0.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompactnessVerdict {
    CompactConsistent,
    NotCompactConsistent,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompactnessProfile {
    pub truncation_depth: usize,
    /// `s[N]` for `N = 0..=D`; zero where no image reaches depth `N`.
    #[serde(with = "report::num_vec")]
    pub s: Vec<f64>,
    /// Deepest level hit by the map; `s` is vacuous beyond it.
    pub deepest_image_level: Option<usize>,
    /// Least-squares slope of `ln s_N` over the live range.
    #[serde(with = "report::num_opt")]
    pub tail_log_slope: Option<f64>,
    pub verdict: CompactnessVerdict,
}

pub fn compactness_profile(spec: &OperatorSpec, config: &CompactnessConfig) -> CompactnessProfile {
    let depth = spec.tree.truncation_depth();
    let mut by_level = vec![0.0f64; depth + 1];
    let mut deepest: Option<usize> = None;
    for (v, w) in spec.map.pairs() {
        let d = spec.tree.depth(w);
        by_level[d] = by_level[d].max(spec.ratio(v, w));
        deepest = deepest.max(Some(d));
    }
    let mut s = by_level;
    for n in (0..depth).rev() {
        s[n] = s[n].max(s[n + 1]);
    }

    let live = deepest.map_or(&s[..0], |d| &s[..=d]);
    let tail_log_slope = log_slope(live);
    let verdict = if live.len() < 3 {
        CompactnessVerdict::Inconclusive
    } else {
        let k = live.len().div_ceil(3);
        let head_min = live[..k].iter().copied().fold(f64::INFINITY, f64::min);
        let tail_max = live[live.len() - k..].iter().copied().fold(0.0, f64::max);
        let decayed = live[live.len() - 1] < config.decay_ratio * live[0];
        if decayed && tail_max < head_min {
            CompactnessVerdict::CompactConsistent
        } else {
            CompactnessVerdict::NotCompactConsistent
        }
    };
    CompactnessProfile {
        truncation_depth: depth,
        s,
        deepest_image_level: deepest,
        tail_log_slope,
        verdict,
    }
}

fn log_slope(values: &[f64]) -> Option<f64> {
    if values.len() < 2 || values.iter().any(|&x| x <= 0.0) {
        return None;
    }
    let n = values.len() as f64;
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = values.iter().map(|x| x.ln()).sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, x) in values.iter().enumerate() {
        let dx = i as f64 - mean_x;
        num += dx * (x.ln() - mean_y);
        den += dx * dx;
    }
    Some(num / den)
}

/// Exact `||C - C A_n||` on the truncation, where `A_n` keeps depths
/// `<= n`. Requires `n > cutoff`; then the value is at most `s_cutoff^(1/p)`
/// for injective maps.
pub fn tail_defect(spec: &OperatorSpec, n: usize, cutoff: usize) -> Result<f64> {
    if n <= cutoff {
        return Err(Error::TailDefectRegime { n, cutoff });
    }
    let sup = preimage_ratios(spec)
        .into_iter()
        .enumerate()
        .filter(|&(u, _)| spec.tree.depth(VertexId::new(u)) > n)
        .map(|(_, r)| r)
        .fold(0.0, f64::max);
    Ok(sup.powf(1.0 / spec.p.value()))
}
