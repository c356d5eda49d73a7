//! Acceptance gate: one pass/fail line per criterion.
//!
//! Run with `cargo test -p spectree --test acceptance`. Exits nonzero when
//! any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectree::commands::{self, AdversaryVerdict};
use spectree::compop::{self, BoundednessTrend, CompactnessConfig, CompactnessVerdict, OperatorSpec};
use spectree::document::Scenario;
use spectree::lpspace::{self, Exponent};
use spectree::oracle::{self, DEFAULT_DENSE_CAP};
use spectree::sample;
use spectree::schatten;
use spectree::selfmap::SelfMap;
use spectree::tree::{Tree, VertexId};
use spectree::verify;
use spectree::weight::Weight;

type Outcome = Result<String, String>;

const EXPONENTS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn op(tree: &Tree, weight: Weight, map: SelfMap, p: Exponent) -> OperatorSpec {
    OperatorSpec::new(tree.clone(), weight, map, p).unwrap()
}

fn random_tree(r: &mut ChaCha8Rng, max_vertices: usize) -> Tree {
    sample::bary_tree(r, 3, 6, max_vertices).unwrap()
}

fn random_injection(r: &mut ChaCha8Rng, tree: &Tree) -> SelfMap {
    match r.random_range(0..4) {
        0 | 1 => sample::bijection(r, tree),
        2 => sample::partial_injection(r, tree, 0.6),
        _ => SelfMap::depth_square(tree).unwrap(),
    }
}

fn random_map(r: &mut ChaCha8Rng, tree: &Tree) -> SelfMap {
    match r.random_range(0..5) {
        0 => sample::bijection(r, tree),
        1 => SelfMap::parent(tree),
        2 => SelfMap::level_shift(tree, r.random_range(1..=3)),
        3 => SelfMap::depth_square(tree).unwrap(),
        _ => {
            let m = r.random_range(1..=tree.len().min(4));
            sample::bounded_multiplicity(r, tree, m).unwrap()
        }
    }
}

fn oracle_values(spec: &OperatorSpec) -> Vec<f64> {
    oracle::svd_values(&oracle::matrix_of(spec, DEFAULT_DENSE_CAP).unwrap()).unwrap()
}

fn norm_identity() -> Outcome {
    let mut r = rng(101);
    let mut hilbert = 0;
    for i in 0..100 {
        let tree = random_tree(&mut r, DEFAULT_DENSE_CAP);
        let weight = sample::log_uniform_weight(&mut r, &tree, 0.01, 100.0).unwrap();
        let map = random_injection(&mut r, &tree);
        let p = sample::exponent(&mut r, &EXPONENTS);
        let spec = op(&tree, weight, map, p);
        let norm = compop::norm_exact(&spec).value;
        let expect = compop::beta(&spec).value.powf(1.0 / p.value());
        ensure(rel_close(norm, expect, 1e-10), || {
            format!("spec {i}: norm {norm} vs beta^(1/p) {expect}")
        })?;
        if p.is_hilbert() {
            hilbert += 1;
            let mu1 = oracle_values(&spec)[0];
            ensure(rel_close(norm, mu1, 1e-8), || {
                format!("spec {i}: norm {norm} vs oracle {mu1}")
            })?;
        }
    }
    Ok(format!(
        "100 injective specs, {hilbert} at p = 2 checked against the oracle"
    ))
}

fn constant_weight_norm() -> Outcome {
    let mut r = rng(102);
    for i in 0..50 {
        let tree = random_tree(&mut r, DEFAULT_DENSE_CAP);
        let weight = Weight::constant(&tree, r.random_range(0.01..100.0)).unwrap();
        let map = random_injection(&mut r, &tree);
        let p = sample::exponent(&mut r, &EXPONENTS);
        let norm = compop::norm_exact(&op(&tree, weight, map, p)).value;
        ensure((norm - 1.0).abs() <= 1e-12, || format!("instance {i}: norm {norm}"))?;
    }
    Ok("50 instances, norm 1 within 1e-12".into())
}

/// Reciprocal-depth weight under depth-square on a binary broom: the
/// binary core reaches depth 10, so level 10 and level 100 both hold 1024
/// vertices.
fn depth_square_example() -> Outcome {
    let mut ladder = Vec::new();
    for n in 2..=10usize {
        let depth = n * n;
        let tree = Tree::build_broom(2, 10.min(depth), depth).unwrap();
        let spec = op(
            &tree,
            Weight::reciprocal_depth(&tree),
            SelfMap::depth_square(&tree).unwrap(),
            Exponent::TWO,
        );
        ensure(spec.effective_domain_depth() == Some(n), || {
            format!("D = {depth}: domain {:?}", spec.effective_domain_depth())
        })?;
        // exact: weight(v) / weight(map v) = (1 + |map v|) / (1 + |v|)
        let exact = spec
            .map()
            .pairs()
            .map(|(v, w)| Ratio::new(1 + tree.depth(w) as u64, 1 + tree.depth(v) as u64))
            .max()
            .unwrap();
        let expect = Ratio::new(1 + (n * n) as u64, 1 + n as u64);
        ensure(exact == expect, || {
            format!("N = {n}: rational beta {exact} vs {expect}")
        })?;
        let b = compop::beta(&spec).value;
        let nearest = *expect.numer() as f64 / *expect.denom() as f64;
        ensure(rel_close(b, nearest, 4.0 * f64::EPSILON), || {
            format!("N = {n}: beta {b} vs {nearest}")
        })?;
        ladder.push((depth, b, exact));
    }
    ensure(ladder.windows(2).all(|w| w[0].2 < w[1].2), || {
        "not strictly increasing".into()
    })?;
    ensure(ladder.last().unwrap().2 == Ratio::new(101, 11), || {
        "beta(10) != 101/11".into()
    })?;
    let trend = compop::boundedness_trend(&ladder.iter().map(|&(d, b, _)| (d, b)).collect::<Vec<_>>(), 1e-12);
    ensure(trend == BoundednessTrend::UnboundedTrend, || format!("trend {trend:?}"))?;
    Ok("beta(N) = (1+N^2)/(1+N) for N = 2..10, beta(10) = 101/11, unbounded trend".into())
}

fn adversaries() -> Outcome {
    let run = |weight: &str| {
        let text = format!(
            r#"{{"schema_version": 1, "tree": {{"kind": "broom", "branching": 2, "core_depth": 4}},
                "weight": {weight}, "depth_ladder": [16, 64]}}"#
        );
        let scenario = Scenario::parse(&text, ".".as_ref(), "<acceptance>".as_ref()).unwrap();
        commands::adversary(&scenario).unwrap()
    };
    let vanishing = run(r#"{"family": "reciprocal_depth"}"#);
    let unbounded = run(r#"{"family": "geometric", "params": {"c": 2}}"#);
    let constant = run(r#"{"family": "constant", "params": {"c": 1}}"#);
    let mut summary = Vec::new();
    for (name, ladder) in [("vanishing", &vanishing.vanishing), ("unbounded", &unbounded.unbounded)] {
        let (b16, b64) = (ladder.ladder[0].beta, ladder.ladder[1].beta);
        ensure(ladder.ladder.iter().all(|a| a.found), || {
            format!("{name}: constructor returned nothing")
        })?;
        ensure(b64 >= 2.0 * b16, || format!("{name}: beta {b16} -> {b64}"))?;
        ensure(ladder.verdict == AdversaryVerdict::Found, || {
            format!("{name}: verdict {:?}", ladder.verdict)
        })?;
        summary.push(format!("{name} {b16:.4e} -> {b64:.4e}"));
    }
    ensure(
        constant
            .unbounded
            .ladder
            .iter()
            .chain(&constant.vanishing.ladder)
            .all(|a| !a.found),
        || "constant weight produced an adversary".into(),
    )?;
    Ok(format!("{}; constant weight: none", summary.join(", ")))
}

fn sandwich() -> Outcome {
    let mut r = rng(105);
    for i in 0..100 {
        let m = [2usize, 3, 4][i % 3];
        let tree = loop {
            let t = random_tree(&mut r, DEFAULT_DENSE_CAP);
            if t.len() >= m {
                break t;
            }
        };
        let weight = sample::log_uniform_weight(&mut r, &tree, 0.01, 100.0).unwrap();
        let map = sample::bounded_multiplicity(&mut r, &tree, m).unwrap();
        let p = sample::exponent(&mut r, &EXPONENTS);
        let rep = compop::boundedness_report(&op(&tree, weight, map, p));
        let norm = rep.norm_exact.value;
        ensure(rep.multiplicity == m, || {
            format!("spec {i}: multiplicity {}", rep.multiplicity)
        })?;
        ensure(
            rep.norm_lower <= norm * (1.0 + 1e-10) && norm <= rep.norm_upper * (1.0 + 1e-10),
            || format!("spec {i}: {} <= {norm} <= {}", rep.norm_lower, rep.norm_upper),
        )?;
    }
    Ok("100 specs with M in {2, 3, 4}".into())
}

fn isometry() -> Outcome {
    let mut r = rng(106);
    let mut functions = 0;
    for i in 0..20 {
        let tree = loop {
            let t = random_tree(&mut r, 300);
            if t.len() >= 3 {
                break t;
            }
        };
        let p = sample::exponent(&mut r, &EXPONENTS);
        let (map, moved) = loop {
            let m = sample::bijection(&mut r, &tree);
            let moved: Vec<VertexId> = m.pairs().filter(|(v, w)| v != w).map(|(v, _)| v).collect();
            if !moved.is_empty() {
                let v = moved[r.random_range(0..moved.len())];
                break (m, v);
            }
        };
        let weight = Weight::constant(&tree, r.random_range(0.01..100.0)).unwrap();
        let spec = op(&tree, weight.clone(), map.clone(), p);
        ensure(compop::isometry_check(&spec, 1e-12).is_isometry, || {
            format!("bijection {i}: not an isometry")
        })?;
        for _ in 0..100 {
            let f = sample::unit_function(&mut r, &tree, &weight, p);
            let n = lpspace::norm_p(&compop::apply(&spec, &f), &weight, p);
            ensure((n - 1.0).abs() <= 1e-9, || format!("bijection {i}: |C f| = {n}"))?;
            functions += 1;
        }

        let mut values = weight.values().to_vec();
        values[moved.index()] *= 1.01;
        let bad = op(&tree, Weight::from_values(&tree, values).unwrap(), map.clone(), p);
        let verdict = compop::isometry_check(&bad, 1e-12);
        ensure(!verdict.is_isometry, || {
            format!("bijection {i}: perturbation not detected")
        })?;
        let w = verdict.witness.ok_or_else(|| format!("bijection {i}: no witness"))?;
        let f = lpspace::basis_vector(&tree, bad.weight(), w.vertex, p);
        let image = lpspace::norm_p(&compop::apply(&bad, &f), bad.weight(), p);
        ensure(
            (image - 1.0).abs() > 1e-6 && (image - w.image_norm).abs() <= 1e-12,
            || {
                format!(
                    "bijection {i}: witness {} reports {}, recomputed {image}",
                    w.vertex, w.image_norm
                )
            },
        )?;

        for candidate in [spec.clone().with_p(Exponent::TWO), bad.with_p(Exponent::TWO)] {
            let analytic = compop::isometry_check(&candidate, 1e-12).is_isometry;
            let gram = oracle::gram_is_identity(&oracle::matrix_of(&candidate, DEFAULT_DENSE_CAP).unwrap(), 1e-10);
            ensure(analytic == gram, || {
                format!("bijection {i}: verdict {analytic}, gram {gram}")
            })?;
        }
    }
    Ok(format!(
        "20 bijections, {functions} unit functions, 20 perturbations flipped with witnesses"
    ))
}

fn lp_structure() -> Outcome {
    let mut r = rng(107);
    let mut basis = 0;
    for _ in 0..20 {
        let tree = random_tree(&mut r, 200);
        let weight = sample::log_uniform_weight(&mut r, &tree, 0.01, 100.0).unwrap();
        let p = sample::exponent(&mut r, &EXPONENTS);
        for v in tree.vertices() {
            let n = lpspace::norm_p(&lpspace::basis_vector(&tree, &weight, v, p), &weight, p);
            ensure((n - 1.0).abs() <= 1e-12, || format!("basis vector {v}: norm {n}"))?;
            basis += 1;
        }
    }
    for i in 0..1000 {
        let tree = random_tree(&mut r, 100);
        let weight = sample::log_uniform_weight(&mut r, &tree, 0.01, 100.0).unwrap();
        let p = sample::exponent(&mut r, &EXPONENTS);
        let f = sample::unit_function(&mut r, &tree, &weight, p).scale(Complex64::new(r.random_range(0.1..10.0), 0.0));
        let v = VertexId::new(r.random_range(0..tree.len()));
        let bound = lpspace::point_eval_norm(&weight, v, p);
        let (lhs, rhs) = (f.at(v).norm(), bound * lpspace::norm_p(&f, &weight, p));
        ensure(lhs <= rhs * (1.0 + 1e-12), || format!("pair {i}: {lhs} > {rhs}"))?;
        let fv = lpspace::basis_vector(&tree, &weight, v, p);
        let eq = bound * lpspace::norm_p(&fv, &weight, p);
        ensure(rel_close(fv.at(v).norm(), eq, 1e-12), || {
            format!("pair {i}: no equality at f_v")
        })?;
    }
    for i in 0..500 {
        let tree = random_tree(&mut r, 200);
        let weight = sample::log_uniform_weight(&mut r, &tree, 0.01, 100.0).unwrap();
        let p = sample::exponent(&mut r, &EXPONENTS);
        let f = sample::unit_function(&mut r, &tree, &weight, p);
        let n = r.random_range(0..=tree.truncation_depth());
        let a = lpspace::project(&tree, &f, n);
        let (head, tail) = (lpspace::norm_p(&a, &weight, p), lpspace::norm_p(&f.sub(&a), &weight, p));
        ensure(head <= 1.0 + 1e-12 && tail <= 1.0 + 1e-12, || {
            format!("pair {i}: {head}, {tail}")
        })?;
    }
    Ok(format!(
        "{basis} basis vectors, 1000 evaluation pairs, 500 projection pairs"
    ))
}

fn tail_defect() -> Outcome {
    let mut r = rng(108);
    let mut checks = 0;
    for i in 0..50 {
        let tree = random_tree(&mut r, DEFAULT_DENSE_CAP);
        let weight = sample::log_uniform_weight(&mut r, &tree, 0.01, 100.0).unwrap();
        let map = random_injection(&mut r, &tree);
        let p = sample::exponent(&mut r, &EXPONENTS);
        let spec = op(&tree, weight, map, p);
        let s = compop::compactness_profile(&spec, &CompactnessConfig::default()).s;
        let depth = tree.truncation_depth();
        for (cutoff, &s_cut) in s.iter().enumerate().take(depth) {
            let mut previous = f64::INFINITY;
            for n in cutoff + 1..=depth {
                let d = compop::tail_defect(&spec, n, cutoff).unwrap();
                ensure(d.powf(p.value()) <= s_cut + 1e-10, || {
                    format!("spec {i}, N = {cutoff}, n = {n}: {d}^p > s_N = {}", s_cut)
                })?;
                ensure(d <= previous, || format!("spec {i}, N = {cutoff}, n = {n}: increased"))?;
                previous = d;
                checks += 1;
            }
        }
    }
    Ok(format!("50 specs, {checks} (N, n) pairs"))
}

fn structured() -> Vec<OperatorSpec> {
    verify::structured_specs().unwrap()
}

fn hilbert_schmidt() -> Outcome {
    let mut r = rng(109);
    let mut specs = structured();
    for _ in 0..40 {
        let tree = random_tree(&mut r, DEFAULT_DENSE_CAP);
        let weight = sample::log_uniform_weight(&mut r, &tree, 0.01, 100.0).unwrap();
        let map = random_map(&mut r, &tree);
        specs.push(op(&tree, weight, map, Exponent::TWO));
    }
    for (i, spec) in specs.iter().enumerate() {
        let hs = schatten::hs_norm(spec).unwrap();
        let frob = oracle::frobenius_sq(&oracle::matrix_of(spec, DEFAULT_DENSE_CAP).unwrap());
        ensure(rel_close(hs * hs, frob, 1e-9), || {
            format!("spec {i}: hs^2 {} vs {frob}", hs * hs)
        })?;
    }
    for c in [0.5, 0.25, 0.125] {
        for depth in 1..=10 {
            let path = Tree::build_bary(1, depth).unwrap();
            let spec = op(
                &path,
                Weight::geometric(&path, c).unwrap(),
                SelfMap::parent(&path),
                Exponent::TWO,
            );
            let hs = schatten::hs_norm(&spec).unwrap();
            let expect = (1.0 + depth as f64 * c).sqrt();
            ensure(hs == expect, || format!("path c = {c}, D = {depth}: {hs} vs {expect}"))?;
        }
    }
    Ok(format!(
        "{} specs against the oracle, 30 closed-form paths exact",
        specs.len()
    ))
}

fn spectrum_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(110);
    let mut specs = Vec::new();
    for _ in 0..50 {
        let tree = random_tree(&mut r, 200);
        let weight = sample::log_uniform_weight(&mut r, &tree, 0.01, 100.0).unwrap();
        let map = random_map(&mut r, &tree);
        specs.push(op(&tree, weight, map, Exponent::TWO));
    }
    specs.extend(structured());
    let mut worst = 0.0f64;
    for (i, spec) in specs.iter().enumerate() {
        let analytic = schatten::singular_values_analytic(spec).unwrap();
        let numeric = oracle_values(spec);
        ensure(analytic.len() == numeric.len(), || format!("spec {i}: lengths differ"))?;
        for (a, b) in analytic.iter().zip(&numeric) {
            worst = worst.max((a - b).abs());
        }
        ensure(worst <= 1e-8, || format!("spec {i}: deviation {worst}"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("60 specs, max deviation {worst:.2e}, {secs:.1} s"))
}

fn trace() -> Outcome {
    let mut r = rng(111);
    let mut checked = 0;
    for i in 0..100 {
        let tree = random_tree(&mut r, DEFAULT_DENSE_CAP);
        let weight = sample::log_uniform_weight(&mut r, &tree, 0.01, 100.0).unwrap();
        let level_one = tree.vertices_at_level(1).len();
        let cases = [
            (random_map(&mut r, &tree), None),
            (SelfMap::identity(&tree), Some(tree.len())),
            (SelfMap::parent(&tree), Some(1)),
            (SelfMap::depth_square(&tree).unwrap(), Some(1 + level_one)),
        ];
        for (map, expect) in cases {
            let t = schatten::trace_diagonal(&op(&tree, weight.clone(), map, Exponent::TWO));
            ensure(t.trace_diagonal == t.fixed_point_count as f64, || {
                format!("spec {i}: trace {} vs {}", t.trace_diagonal, t.fixed_point_count)
            })?;
            if let Some(e) = expect {
                ensure(t.fixed_point_count == e, || {
                    format!("spec {i}: {} fixed points, expected {e}", t.fixed_point_count)
                })?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} operators"))
}

fn compactness() -> Outcome {
    let config = CompactnessConfig::default();
    let tree = Tree::build_bary(2, 8).unwrap();
    let id = compop::compactness_profile(
        &op(
            &tree,
            Weight::constant(&tree, 1.0).unwrap(),
            SelfMap::identity(&tree),
            Exponent::TWO,
        ),
        &config,
    );
    ensure(id.s.iter().all(|&x| x == 1.0), || format!("identity s_N = {:?}", id.s))?;
    ensure(id.verdict == CompactnessVerdict::NotCompactConsistent, || {
        format!("identity verdict {:?}", id.verdict)
    })?;

    // geometric c = 0.5 under depth-square: weight(v)/weight(map v) = 2^(n^2 - n)
    let broom = Tree::build_broom(2, 4, 16).unwrap();
    let prof = compop::compactness_profile(
        &op(
            &broom,
            Weight::geometric(&broom, 0.5).unwrap(),
            SelfMap::depth_square(&broom).unwrap(),
            Exponent::TWO,
        ),
        &config,
    );
    let (s0, last) = (prof.s[0], *prof.s.last().unwrap());
    ensure(
        last < 0.1 * s0 && prof.verdict == CompactnessVerdict::CompactConsistent,
        || {
            format!(
                "identity part holds; geometric c = 0.5 + depth_square gives s_0 = {s0}, s_D = {last}, verdict {:?} \
             (ratios 2^(n^2-n) grow, so the tail cannot decay)",
                prof.verdict
            )
        },
    )?;
    Ok("identity s_N = 1 (not compact-consistent); geometric c = 0.5 decays".into())
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_spectree");
    let run = || {
        Command::new(exe)
            .args(["verify", "--seed", "2024"])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(a.status.success() && b.status.success(), || {
        format!("exit {:?} / {:?}", a.status, b.status)
    })?;
    ensure(!a.stdout.is_empty() && a.stdout == b.stdout, || "outputs differ".into())?;
    Ok(format!("two runs, {} identical bytes", a.stdout.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("norm = beta^(1/p) for injective maps", norm_identity),
        ("constant weight, injective map: norm 1", constant_weight_norm),
        ("depth-square ladder beta(N) = (1+N^2)/(1+N)", depth_square_example),
        ("adversarial injections", adversaries),
        ("norm sandwich for multiplicity M", sandwich),
        ("isometry characterization", isometry),
        ("basis, point evaluation, projections", lp_structure),
        ("tail defect bound", tail_defect),
        ("Hilbert-Schmidt norm", hilbert_schmidt),
        ("spectrum vs dense SVD", spectrum_oracle),
        ("trace = fixed-point count", trace),
        ("compactness diagnostics", compactness),
        ("deterministic verify output", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2} s): {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
