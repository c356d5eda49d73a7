//! Seeded property suites behind `spectree verify`.
//!
//! Each suite draws its own generator from `(seed, suite index)`, so running
//! one suite alone reproduces the same cases as running them all. Failures
//! carry the offending operator serialized as tree/weight/map documents.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compop::{self, CompactnessConfig, CompactnessVerdict, OperatorSpec};
use crate::error::{Error, Result};
use crate::lpspace::{self, Exponent};
use crate::oracle::{self, DEFAULT_DENSE_CAP};
use crate::sample;
use crate::schatten;
use crate::selfmap::{self, MapDocument, SelfMap};
use crate::tree::{Tree, TreeDocument, VertexId};
use crate::weight::{Weight, WeightDocument};

pub const SUITES: &[&str] = &[
    "lpspace",
    "norm",
    "sandwich",
    "isometry",
    "tail",
    "schatten",
    "oracle",
    "trace",
    "adversary",
    "compactness",
];

const KEPT_FAILURES: usize = 5;

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Perturb the weights the isometry suite expects to be isometric.
    pub inject_fault: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecDump {
    pub tree: TreeDocument,
    pub weight: WeightDocument,
    pub map: MapDocument,
    pub p: f64,
}

impl SpecDump {
    pub fn of(spec: &OperatorSpec) -> SpecDump {
        let tree = spec.tree();
        SpecDump {
            tree: tree.to_document(),
            weight: spec.weight().to_document(tree),
            map: spec.map().to_document(tree),
            p: spec.p().value(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub property: String,
    pub detail: String,
    pub spec: Option<SpecDump>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub checks: usize,
    pub failed: usize,
    pub passed: bool,
    /// The first few failures.
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub seed: u64,
    pub inject_fault: bool,
    pub suites: Vec<SuiteOutcome>,
    pub passed: bool,
}

struct Suite {
    rng: ChaCha8Rng,
    cases: usize,
    checks: usize,
    failed: usize,
    counterexamples: Vec<Counterexample>,
}

impl Suite {
    fn new(seed: u64, index: usize) -> Suite {
        let stream = seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Suite {
            rng: ChaCha8Rng::seed_from_u64(stream),
            cases: 0,
            checks: 0,
            failed: 0,
            counterexamples: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, property: &str, spec: Option<&OperatorSpec>, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if ok {
            return;
        }
        self.failed += 1;
        if self.counterexamples.len() < KEPT_FAILURES {
            self.counterexamples.push(Counterexample {
                property: property.to_owned(),
                detail: detail(),
                spec: spec.map(SpecDump::of),
            });
        }
    }

    fn finish(self, name: &'static str) -> SuiteOutcome {
        SuiteOutcome {
            name,
            cases: self.cases,
            checks: self.checks,
            failed: self.failed,
            passed: self.failed == 0,
            counterexamples: self.counterexamples,
        }
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

const EXPONENTS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

fn random_tree(rng: &mut ChaCha8Rng, max_vertices: usize) -> Tree {
    sample::bary_tree(rng, 3, 6, max_vertices).expect("bounds are valid")
}

/// Bijection, partial injection or depth-square map, chosen at random.
fn random_injection(rng: &mut ChaCha8Rng, tree: &Tree) -> SelfMap {
    match rng.random_range(0..4) {
        0 | 1 => sample::bijection(rng, tree),
        2 => sample::partial_injection(rng, tree, 0.6),
        _ => SelfMap::depth_square(tree).expect("b-ary levels never shrink"),
    }
}

/// Any of the map generators, injective or not.
fn random_map(rng: &mut ChaCha8Rng, tree: &Tree) -> SelfMap {
    match rng.random_range(0..6) {
        0 => sample::bijection(rng, tree),
        1 => sample::partial_injection(rng, tree, 0.5),
        2 => SelfMap::parent(tree),
        3 => SelfMap::level_shift(tree, rng.random_range(1..=3)),
        4 => SelfMap::depth_square(tree).expect("b-ary levels never shrink"),
        _ => {
            let m = rng.random_range(1..=tree.len().min(4));
            sample::bounded_multiplicity(rng, tree, m).expect("multiplicity fits")
        }
    }
}

fn operator(tree: Tree, weight: Weight, map: SelfMap, p: Exponent) -> OperatorSpec {
    OperatorSpec::new(tree, weight, map, p).expect("generated parts agree")
}

fn random_operator(s: &mut Suite, max_vertices: usize, injective: bool, p: Exponent) -> OperatorSpec {
    let tree = random_tree(&mut s.rng, max_vertices);
    let weight = sample::log_uniform_weight(&mut s.rng, &tree, 0.01, 100.0).expect("positive");
    let map = if injective {
        random_injection(&mut s.rng, &tree)
    } else {
        random_map(&mut s.rng, &tree)
    };
    operator(tree, weight, map, p)
}

fn oracle_top(spec: &OperatorSpec) -> Result<f64> {
    let values = oracle::svd_values(&oracle::matrix_of(spec, DEFAULT_DENSE_CAP)?)?;
    Ok(values.first().copied().unwrap_or(0.0))
}

fn suite_lpspace(s: &mut Suite) -> Result<()> {
    for _ in 0..20 {
        s.cases += 1;
        let tree = random_tree(&mut s.rng, 200);
        let weight = sample::log_uniform_weight(&mut s.rng, &tree, 0.01, 100.0)?;
        let p = sample::exponent(&mut s.rng, &EXPONENTS);
        for v in tree.vertices() {
            let n = lpspace::norm_p(&lpspace::basis_vector(&tree, &weight, v, p), &weight, p);
            s.check((n - 1.0).abs() <= 1e-12, "basis vector has norm 1", None, || {
                format!("vertex {v}, p = {}, norm {n}", p.value())
            });
        }
    }
    for _ in 0..1000 {
        s.cases += 1;
        let tree = random_tree(&mut s.rng, 100);
        let weight = sample::log_uniform_weight(&mut s.rng, &tree, 0.01, 100.0)?;
        let p = sample::exponent(&mut s.rng, &EXPONENTS);
        let f = sample::unit_function(&mut s.rng, &tree, &weight, p)
            .scale(Complex64::new(s.rng.random_range(0.1..10.0), 0.0));
        let v = VertexId::new(s.rng.random_range(0..tree.len()));
        let bound = lpspace::point_eval_norm(&weight, v, p);
        let lhs = f.at(v).norm();
        let rhs = bound * lpspace::norm_p(&f, &weight, p);
        s.check(lhs <= rhs * (1.0 + 1e-12), "point evaluation bound", None, || {
            format!("|f({v})| = {lhs} > {rhs}")
        });
        let fv = lpspace::basis_vector(&tree, &weight, v, p);
        let at = fv.at(v).norm();
        s.check(
            rel_close(at, bound * lpspace::norm_p(&fv, &weight, p), 1e-12),
            "point evaluation equality",
            None,
            || format!("|f_v(v)| = {at}, bound {bound}"),
        );
    }
    for _ in 0..500 {
        s.cases += 1;
        let tree = random_tree(&mut s.rng, 200);
        let weight = sample::log_uniform_weight(&mut s.rng, &tree, 0.01, 100.0)?;
        let p = sample::exponent(&mut s.rng, &EXPONENTS);
        let f = sample::unit_function(&mut s.rng, &tree, &weight, p);
        let n = s.rng.random_range(0..=tree.truncation_depth());
        let a = lpspace::project(&tree, &f, n);
        let head = lpspace::norm_p(&a, &weight, p);
        let tail = lpspace::norm_p(&f.sub(&a), &weight, p);
        s.check(
            head <= 1.0 + 1e-12 && tail <= 1.0 + 1e-12,
            "projections contract",
            None,
            || format!("n = {n}: |A f| = {head}, |(I - A) f| = {tail}"),
        );
        if p.is_hilbert() {
            let ip = lpspace::inner(&f, &f, &weight);
            s.check(
                (ip.re - 1.0).abs() <= 1e-10 && ip.im.abs() <= 1e-10,
                "inner(f, f) = |f|^2",
                None,
                || format!("inner = {ip}"),
            );
        }
    }
    Ok(())
}

fn suite_norm(s: &mut Suite) -> Result<()> {
    for _ in 0..100 {
        s.cases += 1;
        let p = sample::exponent(&mut s.rng, &EXPONENTS);
        let spec = random_operator(s, DEFAULT_DENSE_CAP, true, p);
        let norm = compop::norm_exact(&spec).value;
        let expect = compop::beta(&spec).value.powf(1.0 / p.value());
        s.check(
            rel_close(norm, expect, 1e-10),
            "norm = beta^(1/p) for injective maps",
            Some(&spec),
            || format!("norm {norm}, beta^(1/p) {expect}"),
        );
        let found = oracle::norm_search(&spec, 8, s.rng.random());
        s.check(
            (found - norm).abs() <= 1e-9 * norm.max(1.0),
            "norm search attains the exact norm",
            Some(&spec),
            || format!("search {found}, exact {norm}"),
        );
        if p.is_hilbert() {
            let top = oracle_top(&spec)?;
            s.check(
                rel_close(norm, top, 1e-8),
                "norm = largest singular value",
                Some(&spec),
                || format!("norm {norm}, oracle {top}"),
            );
        }
    }
    for _ in 0..50 {
        s.cases += 1;
        let tree = random_tree(&mut s.rng, DEFAULT_DENSE_CAP);
        let c = s.rng.random_range(0.01..100.0);
        let map = random_injection(&mut s.rng, &tree);
        let p = sample::exponent(&mut s.rng, &EXPONENTS);
        let spec = operator(tree.clone(), Weight::constant(&tree, c)?, map, p);
        let norm = compop::norm_exact(&spec).value;
        s.check(
            (norm - 1.0).abs() <= 1e-12,
            "constant weight, injective map: norm 1",
            Some(&spec),
            || format!("norm {norm}"),
        );
    }
    Ok(())
}

fn suite_sandwich(s: &mut Suite) -> Result<()> {
    for _ in 0..100 {
        s.cases += 1;
        let m = s.rng.random_range(2..=4usize);
        let tree = loop {
            let t = random_tree(&mut s.rng, DEFAULT_DENSE_CAP);
            if t.len() >= m {
                break t;
            }
        };
        let weight = sample::log_uniform_weight(&mut s.rng, &tree, 0.01, 100.0)?;
        let map = sample::bounded_multiplicity(&mut s.rng, &tree, m)?;
        let p = sample::exponent(&mut s.rng, &EXPONENTS);
        let spec = operator(tree, weight, map, p);
        let r = compop::boundedness_report(&spec);
        let norm = r.norm_exact.value;
        s.check(r.multiplicity == m, "generated multiplicity", Some(&spec), || {
            format!("expected {m}, found {}", r.multiplicity)
        });
        s.check(
            r.norm_lower <= norm * (1.0 + 1e-10) && norm <= r.norm_upper * (1.0 + 1e-10),
            "beta^(1/p) <= norm <= (M beta)^(1/p)",
            Some(&spec),
            || format!("{} <= {norm} <= {}", r.norm_lower, r.norm_upper),
        );
        let found = oracle::norm_search(&spec, 8, s.rng.random());
        s.check(
            found <= norm * (1.0 + 1e-9) + 1e-9,
            "norm search never exceeds the exact norm",
            Some(&spec),
            || format!("search {found}, exact {norm}"),
        );
        if p.is_hilbert() {
            let top = oracle_top(&spec)?;
            s.check(
                rel_close(norm, top, 1e-8),
                "norm = largest singular value",
                Some(&spec),
                || format!("norm {norm}, oracle {top}"),
            );
        }
    }
    Ok(())
}

/// Bijection with at least one moved vertex.
fn moving_bijection(rng: &mut ChaCha8Rng, tree: &Tree) -> (SelfMap, VertexId) {
    loop {
        let map = sample::bijection(rng, tree);
        let moved: Vec<VertexId> = map.pairs().filter(|(v, w)| v != w).map(|(v, _)| v).collect();
        if !moved.is_empty() {
            let v = moved[rng.random_range(0..moved.len())];
            return (map, v);
        }
    }
}

fn perturbed(tree: &Tree, weight: &Weight, v: VertexId, factor: f64) -> Result<Weight> {
    let mut values = weight.values().to_vec();
    values[v.index()] *= factor;
    Weight::from_values(tree, values)
}

/// `||C f_u||_p` straight from the fibre of `u`.
fn basis_image_norm(spec: &OperatorSpec, u: VertexId) -> f64 {
    let mass: f64 = spec
        .map()
        .pairs()
        .filter(|&(_, w)| w == u)
        .map(|(v, _)| spec.weight().at(v))
        .sum();
    (mass / spec.weight().at(u)).powf(1.0 / spec.p().value())
}

fn suite_isometry(s: &mut Suite, inject_fault: bool) -> Result<()> {
    for _ in 0..20 {
        s.cases += 1;
        let tree = loop {
            let t = random_tree(&mut s.rng, 300);
            if t.len() >= 3 {
                break t;
            }
        };
        let c = s.rng.random_range(0.01..100.0);
        let p = sample::exponent(&mut s.rng, &EXPONENTS);
        let (map, moved) = moving_bijection(&mut s.rng, &tree);
        let constant = Weight::constant(&tree, c)?;
        let weight = if inject_fault {
            perturbed(&tree, &constant, moved, 1.01)?
        } else {
            constant.clone()
        };
        let spec = operator(tree.clone(), weight, map.clone(), p);
        let verdict = compop::isometry_check(&spec, 1e-12);
        s.check(
            verdict.is_isometry,
            "constant weight bijection is an isometry",
            Some(&spec),
            || match verdict.witness {
                Some(w) => format!("witness vertex {}: |C f| = {}", tree.label(w.vertex), w.image_norm),
                None => "verdict false without witness".into(),
            },
        );
        for _ in 0..100 {
            let f = sample::unit_function(&mut s.rng, &tree, spec.weight(), p);
            let image = lpspace::norm_p(&compop::apply(&spec, &f), spec.weight(), p);
            s.check((image - 1.0).abs() <= 1e-9, "norm preserved", Some(&spec), || {
                format!("|C f| = {image} for a unit f")
            });
        }

        // one weight off by 1% at a moved vertex
        let bad = operator(tree.clone(), perturbed(&tree, &constant, moved, 1.01)?, map.clone(), p);
        let v = compop::isometry_check(&bad, 1e-12);
        s.check(!v.is_isometry, "perturbed weight breaks isometry", Some(&bad), || {
            format!("vertex {} scaled by 1.01", tree.label(moved))
        });
        match v.witness {
            Some(w) => {
                let direct = basis_image_norm(&bad, w.vertex);
                s.check(
                    (direct - 1.0).abs() > 1e-6 && (direct - w.image_norm).abs() <= 1e-12 * direct.max(1.0),
                    "witness basis vector changes norm",
                    Some(&bad),
                    || format!("witness {}: reported {}, direct {direct}", w.vertex, w.image_norm),
                );
            }
            None => s.check(false, "non-isometry carries a witness", Some(&bad), String::new),
        }

        // Hilbert case against the Gram test
        for candidate in [
            operator(tree.clone(), constant.clone(), map.clone(), Exponent::TWO),
            bad.clone().with_p(Exponent::TWO),
            operator(
                tree.clone(),
                sample::log_uniform_weight(&mut s.rng, &tree, 0.01, 100.0)?,
                SelfMap::identity(&tree),
                Exponent::TWO,
            ),
            operator(
                tree.clone(),
                sample::log_uniform_weight(&mut s.rng, &tree, 0.01, 100.0)?,
                map.clone(),
                Exponent::TWO,
            ),
        ] {
            let verdict = compop::isometry_check(&candidate, 1e-12).is_isometry;
            let gram = oracle::gram_is_identity(&oracle::matrix_of(&candidate, DEFAULT_DENSE_CAP)?, 1e-10);
            s.check(
                verdict == gram,
                "isometry verdict = (M^T M = I)",
                Some(&candidate),
                || format!("verdict {verdict}, gram {gram}"),
            );
        }
    }
    Ok(())
}

fn suite_tail(s: &mut Suite) -> Result<()> {
    for _ in 0..50 {
        s.cases += 1;
        let p = sample::exponent(&mut s.rng, &EXPONENTS);
        let spec = random_operator(s, DEFAULT_DENSE_CAP, true, p);
        let profile = compop::compactness_profile(&spec, &CompactnessConfig::default());
        let depth = spec.tree().truncation_depth();
        for cutoff in 0..depth {
            let mut previous = f64::INFINITY;
            for n in cutoff + 1..=depth {
                let defect = compop::tail_defect(&spec, n, cutoff)?;
                let lhs = defect.powf(p.value());
                let bound = profile.s[cutoff];
                s.check(
                    lhs <= bound + 1e-10 * bound.max(1.0),
                    "tail_defect^p <= s_N",
                    Some(&spec),
                    || format!("N = {cutoff}, n = {n}: {lhs} > {bound}"),
                );
                s.check(
                    defect <= previous,
                    "tail defect nonincreasing in n",
                    Some(&spec),
                    || format!("N = {cutoff}, n = {n}: {defect} > {previous}"),
                );
                previous = defect;
            }
        }
    }
    Ok(())
}

fn suite_schatten(s: &mut Suite) -> Result<()> {
    for _ in 0..40 {
        s.cases += 1;
        let spec = random_operator(s, DEFAULT_DENSE_CAP, false, Exponent::TWO);
        let hs = schatten::hs_norm(&spec)?;
        let frob = oracle::frobenius_sq(&oracle::matrix_of(&spec, DEFAULT_DENSE_CAP)?);
        s.check(
            rel_close(hs * hs, frob, 1e-9),
            "hs_norm^2 = Frobenius^2",
            Some(&spec),
            || format!("hs^2 {}, frobenius {frob}", hs * hs),
        );
        for q in [1.0, 1.5, 2.0, 3.0] {
            let sum = schatten::schatten_sum(&spec, q)?;
            s.check(
                rel_close(sum.diagonal_sum, sum.singular_sum, 1e-10),
                "diagonal Schatten sum = singular-value sum",
                Some(&spec),
                || format!("q = {q}: {} vs {}", sum.diagonal_sum, sum.singular_sum),
            );
            if q == 2.0 {
                s.check(
                    rel_close(sum.diagonal_sum, hs * hs, 1e-12),
                    "S_2 sum = hs^2",
                    Some(&spec),
                    || format!("{} vs {}", sum.diagonal_sum, hs * hs),
                );
            }
        }
    }
    for c in [0.5, 0.25, 0.125, 2.0] {
        for depth in 1..=8 {
            s.cases += 1;
            let path = Tree::build_bary(1, depth)?;
            let weight = Weight::geometric(&path, c)?;
            let spec = operator(path.clone(), weight, SelfMap::parent(&path), Exponent::TWO);
            let hs = schatten::hs_norm(&spec)?;
            let expect = (1.0 + depth as f64 * c).sqrt();
            s.check(hs == expect, "path closed form sqrt(1 + D c)", Some(&spec), || {
                format!("c = {c}, D = {depth}: {hs} vs {expect}")
            });
        }
    }
    Ok(())
}

fn compare_spectra(s: &mut Suite, spec: &OperatorSpec) -> Result<()> {
    let analytic = schatten::singular_values_analytic(spec)?;
    let m = oracle::matrix_of(spec, DEFAULT_DENSE_CAP)?;
    let numeric = oracle::svd_values(&m)?;
    let worst = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    s.check(
        analytic.len() == numeric.len() && worst <= 1e-8,
        "analytic singular values = dense SVD",
        Some(spec),
        || format!("max deviation {worst}"),
    );
    let sum_sq: f64 = numeric.iter().map(|x| x * x).sum();
    let frob = oracle::frobenius_sq(&m);
    s.check(
        rel_close(sum_sq, frob, 1e-9),
        "sum of squared singular values = Frobenius^2",
        Some(spec),
        || format!("{sum_sq} vs {frob}"),
    );
    Ok(())
}

/// Larger hand-picked operators up to the dense cap.
pub fn structured_specs() -> Result<Vec<OperatorSpec>> {
    let b2d8 = Tree::build_bary(2, 8)?;
    let b3d5 = Tree::build_bary(3, 5)?;
    let broom = Tree::build_broom(2, 3, 60)?;
    let path = Tree::build_bary(1, 500)?;
    let spherical = Tree::build_spherical(&[3, 2, 2, 1, 2, 1, 1, 2])?;
    let two = Exponent::TWO;
    Ok(vec![
        operator(
            b2d8.clone(),
            Weight::reciprocal_depth(&b2d8),
            SelfMap::identity(&b2d8),
            two,
        ),
        operator(
            b2d8.clone(),
            Weight::geometric(&b2d8, 0.5)?,
            SelfMap::parent(&b2d8),
            two,
        ),
        operator(
            b2d8.clone(),
            Weight::geometric(&b2d8, 2.0)?,
            SelfMap::depth_square(&b2d8)?,
            two,
        ),
        operator(
            b2d8.clone(),
            Weight::reciprocal_depth(&b2d8),
            SelfMap::level_shift(&b2d8, 3),
            two,
        ),
        operator(
            b3d5.clone(),
            Weight::geometric(&b3d5, 0.7)?,
            SelfMap::level_shift(&b3d5, 2),
            two,
        ),
        operator(b3d5.clone(), Weight::constant(&b3d5, 3.0)?, SelfMap::parent(&b3d5), two),
        operator(
            broom.clone(),
            Weight::reciprocal_depth(&broom),
            SelfMap::depth_square(&broom)?,
            two,
        ),
        operator(
            path.clone(),
            Weight::geometric(&path, 0.99)?,
            SelfMap::parent(&path),
            two,
        ),
        operator(
            spherical.clone(),
            Weight::reciprocal_depth(&spherical),
            SelfMap::parent(&spherical),
            two,
        ),
        operator(
            spherical.clone(),
            Weight::geometric(&spherical, 1.5)?,
            SelfMap::level_shift(&spherical, 1),
            two,
        ),
    ])
}

fn suite_oracle(s: &mut Suite) -> Result<()> {
    for _ in 0..50 {
        s.cases += 1;
        let spec = random_operator(s, 200, false, Exponent::TWO);
        compare_spectra(s, &spec)?;
    }
    for spec in structured_specs()? {
        s.cases += 1;
        compare_spectra(s, &spec)?;
    }
    Ok(())
}

fn suite_trace(s: &mut Suite) -> Result<()> {
    let check_trace = |s: &mut Suite, spec: &OperatorSpec, expect: Option<usize>| {
        let t = schatten::trace_diagonal(spec);
        s.check(
            t.trace_diagonal == t.fixed_point_count as f64,
            "trace = fixed-point count",
            Some(spec),
            || format!("trace {}, fixed points {}", t.trace_diagonal, t.fixed_point_count),
        );
        if let Some(e) = expect {
            s.check(
                t.fixed_point_count == e,
                "closed-form fixed-point count",
                Some(spec),
                || format!("expected {e}, found {}", t.fixed_point_count),
            );
        }
    };
    for _ in 0..100 {
        s.cases += 1;
        let spec = random_operator(s, DEFAULT_DENSE_CAP, false, Exponent::TWO);
        check_trace(s, &spec, None);
        let tree = spec.tree().clone();
        let weight = spec.weight().clone();
        let level_one = tree.vertices_at_level(1).len();
        check_trace(
            s,
            &operator(tree.clone(), weight.clone(), SelfMap::identity(&tree), Exponent::TWO),
            Some(tree.len()),
        );
        check_trace(
            s,
            &operator(tree.clone(), weight.clone(), SelfMap::parent(&tree), Exponent::TWO),
            Some(1),
        );
        check_trace(
            s,
            &operator(tree.clone(), weight, SelfMap::depth_square(&tree)?, Exponent::TWO),
            Some(1 + level_one),
        );
    }
    Ok(())
}

fn suite_adversary(s: &mut Suite) -> Result<()> {
    let path = |d| Tree::build_bary(1, d);
    let beta_of = |tree: &Tree, weight: &Weight, a: &selfmap::Adversary| {
        compop::beta(&operator(tree.clone(), weight.clone(), a.map.clone(), Exponent::TWO)).value
    };
    type WeightOf = fn(&Tree) -> Result<Weight>;
    type Build = fn(&Tree, &Weight) -> Option<selfmap::Adversary>;
    let cases: [(&str, WeightOf, Build); 2] = [
        (
            "reciprocal_depth",
            |t| Ok(Weight::reciprocal_depth(t)),
            selfmap::adversary_vanishing,
        ),
        (
            "geometric c=2",
            |t| Weight::geometric(t, 2.0),
            selfmap::adversary_unbounded,
        ),
    ];
    for (name, weight_of, build) in cases {
        s.cases += 1;
        let mut betas = Vec::new();
        for d in [16, 64] {
            let tree = path(d)?;
            let weight = weight_of(&tree)?;
            match build(&tree, &weight) {
                Some(a) => {
                    s.check(
                        selfmap::analyze(&tree, &a.map).injective,
                        "adversary map is injective",
                        None,
                        || format!("{name} at depth {d}"),
                    );
                    betas.push(beta_of(&tree, &weight, &a));
                }
                None => s.check(false, "adversary exists", None, || format!("{name} at depth {d}")),
            }
        }
        if let [b16, b64] = betas[..] {
            s.check(
                b64 >= 2.0 * b16,
                "beta at least doubles from depth 16 to 64",
                None,
                || format!("{name}: {b16} -> {b64}"),
            );
        }
    }
    for _ in 0..20 {
        s.cases += 1;
        let tree = random_tree(&mut s.rng, DEFAULT_DENSE_CAP);
        let weight = Weight::constant(&tree, s.rng.random_range(0.01..100.0))?;
        s.check(
            selfmap::adversary_unbounded(&tree, &weight).is_none()
                && selfmap::adversary_vanishing(&tree, &weight).is_none(),
            "constant weight admits no adversary",
            None,
            || format!("{} vertices", tree.len()),
        );
    }
    Ok(())
}

fn suite_compactness(s: &mut Suite) -> Result<()> {
    let config = CompactnessConfig::default();
    for _ in 0..20 {
        s.cases += 1;
        let tree = loop {
            let t = random_tree(&mut s.rng, DEFAULT_DENSE_CAP);
            if t.truncation_depth() >= 2 {
                break t;
            }
        };
        let c = s.rng.random_range(0.01..100.0);
        let spec = operator(
            tree.clone(),
            Weight::constant(&tree, c)?,
            SelfMap::identity(&tree),
            Exponent::TWO,
        );
        let profile = compop::compactness_profile(&spec, &config);
        s.check(
            profile.s.iter().all(|&x| x == 1.0),
            "identity: s_N = 1",
            Some(&spec),
            || format!("{:?}", profile.s),
        );
        s.check(
            profile.verdict == CompactnessVerdict::NotCompactConsistent,
            "identity is not compact-consistent",
            Some(&spec),
            || format!("{:?}", profile.verdict),
        );
    }
    s.cases += 1;
    let broom = Tree::build_broom(2, 4, 16)?;
    let spec = operator(
        broom.clone(),
        Weight::geometric(&broom, 2.0)?,
        SelfMap::depth_square(&broom)?,
        Exponent::TWO,
    );
    let profile = compop::compactness_profile(&spec, &config);
    s.check(
        profile.verdict == CompactnessVerdict::CompactConsistent,
        "growing weight under depth-square is compact-consistent",
        Some(&spec),
        || format!("{:?}: {:?}", profile.verdict, profile.s),
    );
    Ok(())
}

pub fn run_suite(name: &str, options: VerifyOptions) -> Result<SuiteOutcome> {
    let index = SUITES
        .iter()
        .position(|&s| s == name)
        .ok_or_else(|| Error::InvalidParameter {
            name: "suite",
            reason: format!("unknown suite `{name}`; expected one of {}", SUITES.join(", ")),
        })?;
    let mut s = Suite::new(options.seed, index);
    match name {
        "lpspace" => suite_lpspace(&mut s)?,
        "norm" => suite_norm(&mut s)?,
        "sandwich" => suite_sandwich(&mut s)?,
        "isometry" => suite_isometry(&mut s, options.inject_fault)?,
        "tail" => suite_tail(&mut s)?,
        "schatten" => suite_schatten(&mut s)?,
        "oracle" => suite_oracle(&mut s)?,
        "trace" => suite_trace(&mut s)?,
        "adversary" => suite_adversary(&mut s)?,
        "compactness" => suite_compactness(&mut s)?,
        _ => unreachable!("checked against SUITES"),
    }
    Ok(s.finish(SUITES[index]))
}

/// Runs `suite`, or all suites when `None`.
pub fn verify(suite: Option<&str>, options: VerifyOptions) -> Result<VerifyReport> {
    let names: Vec<&str> = match suite {
        Some(name) => vec![name],
        None => SUITES.to_vec(),
    };
    let suites = names
        .into_iter()
        .map(|n| run_suite(n, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport {
        command: "verify",
        seed: options.seed,
        inject_fault: options.inject_fault,
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}
