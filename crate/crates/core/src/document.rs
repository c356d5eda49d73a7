//! The analysis spec document shared by every command.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "tree": {"kind": "bary", "branching": 2},
//!   "weight": {"family": "reciprocal_depth"},
//!   "map": {"builtin": "depth_square"},
//!   "p": 2,
//!   "depth_ladder": [4, 9, 16],
//!   "schatten_exponents": [1, 2],
//!   "seed": 7
//! }
//! ```
//!
//! Generated trees are built at each ladder depth; a tree file is truncated
//! to it. `weight` and `map` are either a builtin or `{"file": "..."}`, with
//! relative paths resolved against the spec's directory when parsed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::compop::{CompactnessConfig, OperatorSpec};
use crate::error::{Error, Result};
use crate::lpspace::Exponent;
use crate::oracle::DEFAULT_DENSE_CAP;
use crate::selfmap::{self, MapDocument, MapKind, SelfMap};
use crate::tree::{Tree, TreeDocument};
use crate::weight::{Weight, WeightDocument, WeightFamily};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TreeSource {
    /// Every vertex has `branching` children.
    Bary {
        branching: usize,
    },
    /// Level `n` vertices have `branching[n]` children; bounds the depth.
    Spherical {
        branching: Vec<usize>,
    },
    /// A `branching`-ary core of depth `core_depth` with a path below each
    /// core leaf.
    Broom {
        branching: usize,
        core_depth: usize,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightSource {
    Family(WeightFamily),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", content = "params", rename_all = "snake_case")]
pub enum MapBuiltin {
    Identity,
    Parent,
    LevelShift {
        k: usize,
    },
    /// Domain `depth <= floor(sqrt D)` at truncation depth `D`.
    DepthSquare,
    AdversaryUnbounded,
    AdversaryVanishing,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapSource {
    Builtin(MapBuiltin),
    File(PathBuf),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRef {
    file: PathBuf,
}

/// `{"file": ...}` or the builtin form `T`.
fn file_or<'de, D, T>(deserializer: D) -> std::result::Result<(Option<PathBuf>, Option<T>), D::Error>
where
    D: Deserializer<'de>,
    T: DeserializeOwned,
{
    use serde::de::Error as _;
    let value = serde_json::Value::deserialize(deserializer)?;
    if value.get("file").is_some() {
        let r: FileRef = serde_json::from_value(value).map_err(D::Error::custom)?;
        Ok((Some(r.file), None))
    } else {
        let t = serde_json::from_value(value).map_err(D::Error::custom)?;
        Ok((None, Some(t)))
    }
}

impl Serialize for WeightSource {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            WeightSource::Family(f) => f.serialize(s),
            WeightSource::File(p) => FileRef { file: p.clone() }.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for WeightSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match file_or::<D, WeightFamily>(d)? {
            (Some(p), _) => WeightSource::File(p),
            (_, Some(f)) => WeightSource::Family(f),
            _ => unreachable!(),
        })
    }
}

impl Serialize for MapSource {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MapSource::Builtin(b) => b.serialize(s),
            MapSource::File(p) => FileRef { file: p.clone() }.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for MapSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match file_or::<D, MapBuiltin>(d)? {
            (Some(p), _) => MapSource::File(p),
            (_, Some(b)) => MapSource::Builtin(b),
            _ => unreachable!(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Isometry: `|ratio - 1|` allowed per vertex.
    pub ratio: f64,
    /// Relative growth for the boundedness trend.
    pub trend: f64,
    /// Relative partial-sum increment treated as converged.
    pub convergence: f64,
    /// Compactness: final tail value must fall below this fraction of `s_0`.
    pub decay_ratio: f64,
    /// Oracle agreement for singular values.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ratio: 1e-12,
            trend: 1e-12,
            convergence: 1e-8,
            decay_ratio: CompactnessConfig::default().decay_ratio,
            oracle: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    pub enabled: bool,
    pub dense_cap: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            enabled: true,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

fn default_p() -> Exponent {
    Exponent::TWO
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    pub schema_version: u32,
    pub tree: TreeSource,
    pub weight: WeightSource,
    /// Optional only for `adversary`, which builds its own maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSource>,
    #[serde(default = "default_p")]
    pub p: Exponent,
    pub depth_ladder: Vec<usize>,
    #[serde(default)]
    pub schatten_exponents: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub oracle: OracleSettings,
}

/// A validated spec with every referenced file already read.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub spec: AnalysisSpec,
    tree_file: Option<Tree>,
    weight_file: Option<WeightDocument>,
    map_file: Option<MapDocument>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_owned()
    } else {
        base.join(path)
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

impl AnalysisSpec {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            )));
        }
        if self.depth_ladder.is_empty() {
            return Err(invalid("depth_ladder: must be nonempty"));
        }
        if let Some(w) = self.depth_ladder.windows(2).find(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "depth_ladder: must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        if let Some(q) = self.schatten_exponents.iter().find(|q| !(q.is_finite() && **q >= 1.0)) {
            return Err(Error::InvalidSchattenExponent(*q));
        }
        match &self.tree {
            TreeSource::Bary { branching } | TreeSource::Broom { branching, .. } if *branching == 0 => {
                return Err(invalid("tree.branching: must be at least 1"));
            }
            TreeSource::Spherical { branching } => {
                let deepest = *self.depth_ladder.last().expect("nonempty");
                if deepest > branching.len() {
                    return Err(invalid(format!(
                        "tree.branching: {} levels given, depth_ladder reaches {deepest}",
                        branching.len()
                    )));
                }
            }
            _ => {}
        }
        if let WeightSource::Family(WeightFamily::Custom) = self.weight {
            return Err(invalid("weight: family `custom` needs {\"file\": ...}"));
        }
        Ok(())
    }
}

impl Scenario {
    /// Parses and validates `text`; relative file references resolve against `base`.
    pub fn parse(text: &str, base: &Path, origin: &Path) -> Result<Scenario> {
        let spec: AnalysisSpec = serde_json::from_str(text).map_err(|source| Error::Json {
            path: origin.to_owned(),
            source,
        })?;
        Scenario::from_spec(spec, base)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Scenario::parse(&text, base, path)
    }

    pub fn from_spec(spec: AnalysisSpec, base: &Path) -> Result<Scenario> {
        spec.validate()?;
        let tree_file = match &spec.tree {
            TreeSource::File { path } => {
                let doc: TreeDocument = read_json(&resolve(base, path))?;
                let tree = Tree::load(&doc)?;
                let deepest = *spec.depth_ladder.last().expect("validated");
                if deepest > tree.truncation_depth() {
                    return Err(Error::DepthOutOfRange {
                        requested: deepest,
                        available: tree.truncation_depth(),
                    });
                }
                Some(tree)
            }
            _ => None,
        };
        let weight_file = match &spec.weight {
            WeightSource::File(p) => Some(read_json(&resolve(base, p))?),
            WeightSource::Family(_) => None,
        };
        let map_file = match &spec.map {
            Some(MapSource::File(p)) => Some(read_json(&resolve(base, p))?),
            _ => None,
        };
        Ok(Scenario {
            spec,
            tree_file,
            weight_file,
            map_file,
        })
    }

    pub fn ladder(&self) -> &[usize] {
        &self.spec.depth_ladder
    }

    pub fn tree_at(&self, depth: usize) -> Result<Tree> {
        match &self.spec.tree {
            TreeSource::Bary { branching } => Tree::build_bary(*branching, depth),
            TreeSource::Spherical { branching } => Tree::build_spherical(&branching[..depth]),
            TreeSource::Broom { branching, core_depth } => {
                Tree::build_broom(*branching, (*core_depth).min(depth), depth)
            }
            TreeSource::File { .. } => self.tree_file.as_ref().expect("read at parse").truncate(depth),
        }
    }

    pub fn weight_on(&self, tree: &Tree) -> Result<Weight> {
        match (&self.spec.weight, &self.weight_file) {
            (_, Some(doc)) => Weight::load(tree, doc),
            (WeightSource::Family(f), None) => Weight::instantiate(f, tree),
            (WeightSource::File(_), None) => unreachable!("read at parse"),
        }
    }

    pub fn map_on(&self, tree: &Tree, weight: &Weight) -> Result<SelfMap> {
        let source = self
            .spec
            .map
            .as_ref()
            .ok_or_else(|| invalid("map: required for this command"))?;
        match source {
            MapSource::File(_) => SelfMap::load(tree, self.map_file.as_ref().expect("read at parse")),
            MapSource::Builtin(b) => Ok(match b {
                MapBuiltin::Identity => SelfMap::identity(tree),
                MapBuiltin::Parent => SelfMap::parent(tree),
                MapBuiltin::LevelShift { k } => SelfMap::level_shift(tree, *k),
                MapBuiltin::DepthSquare => SelfMap::depth_square(tree)?,
                MapBuiltin::AdversaryUnbounded => selfmap::adversary_unbounded(tree, weight).map_or_else(
                    || SelfMap::identity(tree).with_kind(MapKind::AdversaryUnbounded),
                    |a| a.map,
                ),
                MapBuiltin::AdversaryVanishing => selfmap::adversary_vanishing(tree, weight).map_or_else(
                    || SelfMap::identity(tree).with_kind(MapKind::AdversaryVanishing),
                    |a| a.map,
                ),
            }),
        }
    }

    /// The operator at one ladder depth.
    pub fn instance(&self, depth: usize) -> Result<OperatorSpec> {
        let tree = self.tree_at(depth)?;
        let weight = self.weight_on(&tree)?;
        let map = self.map_on(&tree, &weight)?;
        OperatorSpec::new(tree, weight, map, self.spec.p)
    }
}
