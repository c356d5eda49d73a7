//! Seeded generators for property suites: trees, weights, maps, functions.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lpspace::{self, Exponent, TreeFunction};
use crate::selfmap::SelfMap;
use crate::tree::{Tree, VertexId};
use crate::weight::Weight;

/// Random `b`-ary tree with `b` in `1..=max_branching`, depth in
/// `1..=max_depth`, and at most `max_vertices` vertices.
pub fn bary_tree<R: Rng>(rng: &mut R, max_branching: usize, max_depth: usize, max_vertices: usize) -> Result<Tree> {
    if max_branching == 0 || max_depth == 0 || max_vertices < 2 {
        return Err(Error::InvalidParameter {
            name: "sample bounds",
            reason: "need branching >= 1, depth >= 1 and room for two vertices".into(),
        });
    }
    let b = rng.random_range(1..=max_branching);
    let fits = |d: usize| -> bool {
        let mut count = 0usize;
        let mut level = 1usize;
        for _ in 0..=d {
            count = count.saturating_add(level);
            level = level.saturating_mul(b);
        }
        count <= max_vertices
    };
    let deepest = (1..=max_depth).take_while(|&d| fits(d)).last().unwrap_or(1);
    Tree::build_bary(b, rng.random_range(1..=deepest))
}

/// Log-uniform weights in `[lo, hi]`.
pub fn log_uniform_weight<R: Rng>(rng: &mut R, tree: &Tree, lo: f64, hi: f64) -> Result<Weight> {
    let (a, b) = (lo.ln(), hi.ln());
    let values = (0..tree.len()).map(|_| rng.random_range(a..=b).exp()).collect();
    Weight::from_values(tree, values)
}

/// Uniform random permutation of the stored vertices.
pub fn bijection<R: Rng>(rng: &mut R, tree: &Tree) -> SelfMap {
    let mut images: Vec<VertexId> = tree.vertices().collect();
    images.shuffle(rng);
    SelfMap::from_images(tree, images).expect("a permutation stays on the tree")
}

/// Injective map defined on a random subset of roughly `fraction` of the
/// vertices (at least one).
pub fn partial_injection<R: Rng>(rng: &mut R, tree: &Tree, fraction: f64) -> SelfMap {
    let n = tree.len();
    let size = ((n as f64 * fraction).round() as usize).clamp(1, n);
    let mut sources: Vec<VertexId> = tree.vertices().collect();
    sources.shuffle(rng);
    let mut targets: Vec<VertexId> = tree.vertices().collect();
    targets.shuffle(rng);
    let mut images = vec![None; n];
    for (s, t) in sources.into_iter().zip(targets).take(size) {
        images[s.index()] = Some(t);
    }
    SelfMap::partial(tree, images).expect("images are stored vertices")
}

/// Total map whose largest fibre has exactly `multiplicity` elements.
pub fn bounded_multiplicity<R: Rng>(rng: &mut R, tree: &Tree, multiplicity: usize) -> Result<SelfMap> {
    let n = tree.len();
    if multiplicity == 0 || multiplicity > n {
        return Err(Error::InvalidParameter {
            name: "multiplicity",
            reason: format!("must lie in 1..={n}"),
        });
    }
    let mut sources: Vec<VertexId> = tree.vertices().collect();
    sources.shuffle(rng);
    let mut load = vec![0usize; n];
    let mut images = vec![VertexId::ROOT; n];
    let hub = VertexId::new(rng.random_range(0..n));
    for &s in &sources[..multiplicity] {
        images[s.index()] = hub;
    }
    load[hub.index()] = multiplicity;
    for &s in &sources[multiplicity..] {
        let open: Vec<usize> = (0..n).filter(|&u| load[u] < multiplicity).collect();
        let u = open[rng.random_range(0..open.len())];
        load[u] += 1;
        images[s.index()] = VertexId::new(u);
    }
    SelfMap::from_images(tree, images)
}

/// Complex function with entries uniform in the unit square, scaled to
/// norm one.
pub fn unit_function<R: Rng>(rng: &mut R, tree: &Tree, weight: &Weight, p: Exponent) -> TreeFunction {
    loop {
        let f = TreeFunction::from_values(
            (0..tree.len())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        );
        let norm = lpspace::norm_p(&f, weight, p);
        if norm > 0.0 {
            return f.scale(Complex64::new(1.0 / norm, 0.0));
        }
    }
}

pub fn exponent<R: Rng>(rng: &mut R, choices: &[f64]) -> Exponent {
    Exponent::new(choices[rng.random_range(0..choices.len())]).expect("choices are valid exponents")
}
