//! Self-maps of the stored vertex set.
//!
//! A map may be partial: the depth-square map of a finite truncation is
//! only defined on the levels whose squares are still stored. Every
//! quantity computed from a map ranges over its domain only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{Tree, VertexId};
use crate::weight::Weight;

/// How a map was produced, serialized as `{"builtin": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", content = "params", rename_all = "snake_case")]
pub enum MapKind {
    Identity,
    Parent,
    LevelShift { k: usize },
    DepthSquare { domain_depth: usize },
    AdversaryUnbounded,
    AdversaryVanishing,
    Custom,
}

/// Map document: vertex id -> image id.
pub type MapDocument = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq)]
pub struct SelfMap {
    image: Vec<Option<VertexId>>,
    kind: MapKind,
}

#[derive(Clone, Debug, Serialize)]
pub struct MapProfile {
    pub injective: bool,
    pub max_multiplicity: usize,
    pub surjective_on_truncation: bool,
    pub fixed_points: Vec<VertexId>,
    pub domain_size: usize,
    /// `preimage_index[u]` lists `{v : map(v) = u}` in increasing order.
    #[serde(skip)]
    pub preimage_index: Vec<Vec<VertexId>>,
}

/// A finite witness built from the boundedness proof: a product of
/// disjoint transpositions pairing high-weight with low-weight vertices.
#[derive(Clone, Debug)]
pub struct Adversary {
    pub map: SelfMap,
    /// `(source, target)` with `map(source) = target` and `map(target) = source`.
    pub pairs: Vec<(VertexId, VertexId)>,
}

impl SelfMap {
    pub fn identity(tree: &Tree) -> SelfMap {
        SelfMap {
            image: tree.vertices().map(Some).collect(),
            kind: MapKind::Identity,
        }
    }

    /// Each vertex to its parent; the root is fixed.
    pub fn parent(tree: &Tree) -> SelfMap {
        SelfMap {
            image: tree.vertices().map(|v| Some(tree.parent(v).unwrap_or(v))).collect(),
            kind: MapKind::Parent,
        }
    }

    /// Each vertex to its ancestor `k` levels up, clamped at the root.
    pub fn level_shift(tree: &Tree, k: usize) -> SelfMap {
        SelfMap {
            image: tree
                .vertices()
                .map(|v| Some(tree.ancestor_at(v, tree.depth(v).saturating_sub(k))))
                .collect(),
            kind: MapKind::LevelShift { k },
        }
    }

    /// The i-th vertex of level n goes to the i-th vertex of level n^2, on
    /// the largest domain the truncation supports (depth <= floor(sqrt D)).
    pub fn depth_square(tree: &Tree) -> Result<SelfMap> {
        SelfMap::depth_square_with_domain(tree, isqrt(tree.truncation_depth()))
    }

    pub fn depth_square_with_domain(tree: &Tree, domain_depth: usize) -> Result<SelfMap> {
        let depth = tree.truncation_depth();
        let mut image = vec![None; tree.len()];
        for level in 0..=domain_depth {
            let target = level * level;
            if target > depth {
                return Err(Error::TreeTooShallow {
                    level,
                    needed: target,
                    depth,
                });
            }
            let from = tree.vertices_at_level(level);
            let to = tree.vertices_at_level(target);
            if to.len() < from.len() {
                return Err(Error::LevelSizeViolation {
                    level,
                    target,
                    level_size: from.len(),
                    target_size: to.len(),
                });
            }
            for (v, w) in from.iter().zip(to) {
                image[v.index()] = Some(*w);
            }
        }
        Ok(SelfMap {
            image,
            kind: MapKind::DepthSquare { domain_depth },
        })
    }

    /// Total map from explicit images.
    pub fn from_images(tree: &Tree, images: Vec<VertexId>) -> Result<SelfMap> {
        SelfMap::partial(tree, images.into_iter().map(Some).collect())
    }

    /// Map defined where `images[v]` is `Some`.
    pub fn partial(tree: &Tree, images: Vec<Option<VertexId>>) -> Result<SelfMap> {
        if images.len() != tree.len() {
            return Err(Error::LengthMismatch {
                what: "map",
                expected: tree.len(),
                found: images.len(),
            });
        }
        for (v, w) in tree.vertices().zip(&images) {
            if let Some(w) = w {
                if w.index() >= tree.len() {
                    return Err(Error::ImageOutsideTree {
                        vertex: tree.label(v).to_owned(),
                        image: w.to_string(),
                    });
                }
            }
        }
        Ok(SelfMap {
            image: images,
            kind: MapKind::Custom,
        })
    }

    /// Every stored vertex needs an image that is itself stored.
    pub fn load(tree: &Tree, document: &MapDocument) -> Result<SelfMap> {
        let images = tree
            .vertices()
            .map(|v| {
                let label = tree.label(v);
                let target = document
                    .get(label)
                    .ok_or_else(|| Error::MissingImage(label.to_owned()))?;
                tree.lookup(target).map_err(|_| Error::ImageOutsideTree {
                    vertex: label.to_owned(),
                    image: target.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SelfMap::from_images(tree, images)
    }

    pub fn to_document(&self, tree: &Tree) -> MapDocument {
        self.pairs()
            .map(|(v, w)| (tree.label(v).to_owned(), tree.label(w).to_owned()))
            .collect()
    }

    pub fn with_kind(mut self, kind: MapKind) -> SelfMap {
        self.kind = kind;
        self
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    /// Size of the stored vertex set the map acts on.
    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn get(&self, v: VertexId) -> Option<VertexId> {
        self.image[v.index()]
    }

    pub fn is_total(&self) -> bool {
        self.image.iter().all(Option::is_some)
    }

    pub fn domain_size(&self) -> usize {
        self.image.iter().filter(|w| w.is_some()).count()
    }

    /// `(v, map(v))` over the domain, in vertex order.
    pub fn pairs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.image
            .iter()
            .enumerate()
            .filter_map(|(v, w)| w.map(|w| (VertexId::new(v), w)))
    }
}

fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

pub fn analyze(tree: &Tree, map: &SelfMap) -> MapProfile {
    let mut preimage_index = vec![Vec::new(); tree.len()];
    let mut fixed_points = Vec::new();
    for (v, w) in map.pairs() {
        preimage_index[w.index()].push(v);
        if v == w {
            fixed_points.push(v);
        }
    }
    let max_multiplicity = preimage_index.iter().map(Vec::len).max().unwrap_or(0);
    let surjective_on_truncation = preimage_index.iter().all(|p| !p.is_empty());
    MapProfile {
        injective: max_multiplicity <= 1,
        max_multiplicity,
        surjective_on_truncation,
        fixed_points,
        domain_size: map.domain_size(),
        preimage_index,
    }
}

/// Pairs the heaviest unused vertex with the lightest unused one while
/// `accept(heavy, light)` holds and the ratio exceeds one.
fn greedy_swaps(tree: &Tree, weight: &Weight, accept: impl Fn(f64, f64) -> bool) -> Vec<(VertexId, VertexId)> {
    let mut asc: Vec<VertexId> = tree.vertices().collect();
    asc.sort_by(|a, b| weight.at(*a).total_cmp(&weight.at(*b)).then(a.cmp(b)));
    let (mut lo, mut hi) = (0usize, asc.len());
    let mut pairs = Vec::new();
    while lo + 1 < hi {
        let heavy = asc[hi - 1];
        let light = asc[lo];
        let (a, b) = (weight.at(heavy), weight.at(light));
        if !(a > b && accept(a, b)) {
            break;
        }
        pairs.push((heavy, light));
        lo += 1;
        hi -= 1;
    }
    pairs
}

fn transpositions(tree: &Tree, pairs: &[(VertexId, VertexId)], kind: MapKind) -> SelfMap {
    let mut image: Vec<Option<VertexId>> = tree.vertices().map(Some).collect();
    for &(s, t) in pairs {
        image[s.index()] = Some(t);
        image[t.index()] = Some(s);
    }
    SelfMap { image, kind }
}

/// Injection sending heavy vertices `w` to light vertices `v` with
/// `weight(w) > weight(v)^2`, so `weight(w)/weight(v) > weight(v)`.
/// `None` when no pair qualifies.
pub fn adversary_unbounded(tree: &Tree, weight: &Weight) -> Option<Adversary> {
    let pairs = greedy_swaps(tree, weight, |heavy, light| heavy > light * light);
    (!pairs.is_empty()).then(|| Adversary {
        map: transpositions(tree, &pairs, MapKind::AdversaryUnbounded),
        pairs,
    })
}

/// Injection sending vertices `v'` to light vertices `u` with
/// `weight(u) < weight(v')^2`, so the ratio exceeds `1/weight(v')`.
pub fn adversary_vanishing(tree: &Tree, weight: &Weight) -> Option<Adversary> {
    let pairs = greedy_swaps(tree, weight, |source, target| target < source * source);
    (!pairs.is_empty()).then(|| Adversary {
        map: transpositions(tree, &pairs, MapKind::AdversaryVanishing),
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_ratio(map: &SelfMap, w: &Weight) -> f64 {
        map.pairs().map(|(v, u)| w.at(v) / w.at(u)).fold(0.0, f64::max)
    }

    #[test]
    fn identity_profile() {
        let t = Tree::build_bary(2, 3).unwrap();
        let p = analyze(&t, &SelfMap::identity(&t));
        assert!(p.injective && p.surjective_on_truncation);
        assert_eq!(p.max_multiplicity, 1);
        assert_eq!(p.fixed_points.len(), t.len());
    }

    #[test]
    fn parent_profile() {
        let t = Tree::build_bary(2, 2).unwrap();
        let p = analyze(&t, &SelfMap::parent(&t));
        assert!(!p.injective);
        assert_eq!(p.max_multiplicity, 3);
        assert_eq!(
            p.preimage_index[0],
            vec![VertexId::new(0), VertexId::new(1), VertexId::new(2)]
        );
        assert_eq!(p.fixed_points, vec![VertexId::ROOT]);
        let total: usize = p.preimage_index.iter().map(Vec::len).sum();
        assert_eq!(total, t.len());
    }

    #[test]
    fn builtins_on_paths() {
        let path = Tree::build_bary(1, 3).unwrap();
        let parent = SelfMap::parent(&path);
        for k in 1..=3 {
            let v = path.vertices_at_level(k)[0];
            assert_eq!(parent.get(v), Some(path.vertices_at_level(k - 1)[0]));
        }
        assert_eq!(parent.get(path.root()), Some(path.root()));

        let t = Tree::build_bary(2, 5).unwrap();
        let shift = SelfMap::level_shift(&t, 2);
        for &v in t.vertices_at_level(5) {
            let a = shift.get(v).unwrap();
            assert_eq!(t.depth(a), 3);
            assert_eq!(t.distance(a, v).unwrap(), 2);
        }
        assert_eq!(shift.get(t.vertices_at_level(1)[1]), Some(t.root()));
        assert_eq!(
            SelfMap::level_shift(&t, 1),
            SelfMap::parent(&t).with_kind(MapKind::LevelShift { k: 1 })
        );
    }

    #[test]
    fn depth_square_structure() {
        let t = Tree::build_bary(2, 9).unwrap();
        let map = SelfMap::depth_square(&t).unwrap();
        assert_eq!(map.kind(), &MapKind::DepthSquare { domain_depth: 3 });
        assert_eq!(map.get(t.root()), Some(t.root()));
        for (i, &v) in t.vertices_at_level(1).iter().enumerate() {
            assert_eq!(map.get(v), Some(t.vertices_at_level(1)[i]));
        }
        let v = t.vertices_at_level(3)[5];
        let img = map.get(v).unwrap();
        assert_eq!(t.depth(img), 9);
        assert_eq!(img, t.vertices_at_level(9)[5]);
        let w = Weight::reciprocal_depth(&t);
        assert!((w.at(v) / w.at(img) - 2.5).abs() < 1e-15);
        // outside the domain
        assert_eq!(map.get(t.vertices_at_level(4)[0]), None);

        let p = analyze(&t, &map);
        assert!(p.injective);
        assert_eq!(p.domain_size, 1 + 2 + 4 + 8);
        assert_eq!(p.fixed_points.len(), 3);
    }

    #[test]
    fn depth_square_errors() {
        let t = Tree::build_bary(2, 8).unwrap();
        assert!(matches!(
            SelfMap::depth_square_with_domain(&t, 3),
            Err(Error::TreeTooShallow {
                level: 3,
                needed: 9,
                depth: 8
            })
        ));
        // level sizes 1, 3, 3, 3, 3: nondecreasing, so level 2 fits into level 4
        let broom = Tree::build_spherical(&[3, 1, 1, 1]).unwrap();
        assert!(SelfMap::depth_square(&broom).is_ok());
    }

    #[test]
    fn level_size_violation() {
        use crate::tree::{TreeDocument, VertexEntry};
        // levels: 1, 1, 2, 2, 1 -> level 2 has 2 vertices, level 4 only 1
        let e = |id: &str, p: Option<&str>| VertexEntry {
            id: id.into(),
            parent: p.map(Into::into),
        };
        let doc = TreeDocument {
            vertices: vec![
                e("r", None),
                e("a", Some("r")),
                e("b", Some("a")),
                e("c", Some("a")),
                e("d", Some("b")),
                e("f", Some("c")),
                e("g", Some("d")),
            ],
        };
        let t = Tree::load(&doc).unwrap();
        assert!(matches!(
            SelfMap::depth_square(&t),
            Err(Error::LevelSizeViolation {
                level: 2,
                target: 4,
                ..
            })
        ));
    }

    #[test]
    fn load_and_document() {
        let t = Tree::build_bary(1, 2).unwrap();
        let doc: MapDocument = [("0", "0"), ("1", "0"), ("2", "1")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let m = SelfMap::load(&t, &doc).unwrap();
        assert_eq!(m.to_document(&t), doc);

        let mut bad = doc.clone();
        bad.insert("2".into(), "7".into());
        assert!(matches!(SelfMap::load(&t, &bad), Err(Error::ImageOutsideTree { .. })));
        bad.remove("2");
        assert!(matches!(SelfMap::load(&t, &bad), Err(Error::MissingImage(v)) if v == "2"));
    }

    #[test]
    fn adversaries_on_constant_weight() {
        let t = Tree::build_bary(2, 4).unwrap();
        for c in [0.5, 1.0, 3.0] {
            let w = Weight::constant(&t, c).unwrap();
            assert!(adversary_unbounded(&t, &w).is_none());
            assert!(adversary_vanishing(&t, &w).is_none());
        }
    }

    #[test]
    fn unbounded_adversary_examples() {
        let t = Tree::build_bary(1, 2).unwrap();
        let w = Weight::from_values(&t, vec![9.0, 2.0, 3.0]).unwrap();
        let adv = adversary_unbounded(&t, &w).unwrap();
        assert_eq!(adv.pairs, vec![(VertexId::new(0), VertexId::new(1))]);
        assert!(analyze(&t, &adv.map).injective);
        assert_eq!(max_ratio(&adv.map, &w), 4.5);

        let path = Tree::build_bary(1, 4).unwrap();
        let w = Weight::geometric(&path, 4.0).unwrap();
        let adv = adversary_unbounded(&path, &w).unwrap();
        // depth 4 -> root, then depth 3 -> depth 1
        assert_eq!(adv.pairs.len(), 2);
        assert!(max_ratio(&adv.map, &w) >= 64.0);
        assert_eq!(max_ratio(&adv.map, &w), 256.0);
        for &(s, t_) in &adv.pairs {
            assert!(w.at(s) > w.at(t_) * w.at(t_));
        }
    }

    #[test]
    fn vanishing_adversary_examples() {
        let t = Tree::build_bary(1, 1).unwrap();
        let w = Weight::from_values(&t, vec![0.1, 0.005]).unwrap();
        let adv = adversary_vanishing(&t, &w).unwrap();
        assert_eq!(adv.pairs, vec![(VertexId::new(0), VertexId::new(1))]);
        let r = max_ratio(&adv.map, &w);
        assert!((r - 20.0).abs() < 1e-12 && r > 1.0 / 0.1);

        let path = Tree::build_bary(1, 4).unwrap();
        let w = Weight::geometric(&path, 0.25).unwrap();
        let adv = adversary_vanishing(&path, &w).unwrap();
        let d1 = path.vertices_at_level(1)[0];
        let d3 = path.vertices_at_level(3)[0];
        assert!(adv.pairs.contains(&(d1, d3)));
        assert_eq!(w.at(d1) / w.at(d3), 16.0);
        assert!(analyze(&path, &adv.map).injective);
    }
}
