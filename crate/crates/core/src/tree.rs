//! Finite-depth truncations of rooted trees.
//!
//! Vertices are dense indices with the root at 0. Within every level the
//! vertices are kept in lexicographic order of their root paths (children
//! ordered by id), so "the i-th vertex at level n" is well defined.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(usize);

impl VertexId {
    pub const ROOT: VertexId = VertexId(0);

    pub const fn new(index: usize) -> Self {
        VertexId(index)
    }

    pub const fn index(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// An immutable rooted tree truncated at `truncation_depth`.
#[derive(Clone, Debug)]
pub struct Tree {
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
    depth: Vec<usize>,
    levels: Vec<Vec<VertexId>>,
    labels: Vec<String>,
    by_label: HashMap<String, VertexId>,
    truncation_depth: usize,
    terminal_violations: Vec<VertexId>,
}

/// On-disk tree description: every vertex with its parent; the root has `parent: null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub vertices: Vec<VertexEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexEntry {
    pub id: String,
    pub parent: Option<String>,
}

impl Tree {
    /// Complete `branching`-ary tree with all leaves at `depth`.
    pub fn build_bary(branching: usize, depth: usize) -> Result<Tree> {
        if branching == 0 {
            return Err(Error::ZeroBranching { level: 0 });
        }
        Tree::build_spherical(&vec![branching; depth])
    }

    /// Spherically symmetric tree: every vertex at level `k` has
    /// `branching[k]` children, and the tree is truncated at
    /// `branching.len()`.
    pub fn build_spherical(branching: &[usize]) -> Result<Tree> {
        if let Some(level) = branching.iter().position(|&b| b == 0) {
            return Err(Error::ZeroBranching { level });
        }
        let mut parents: Vec<Option<usize>> = vec![None];
        let mut frontier = 0..1usize;
        for &b in branching {
            let start = parents.len();
            for v in frontier.clone() {
                for _ in 0..b {
                    parents.push(Some(v));
                }
            }
            frontier = start..parents.len();
        }
        let labels = (0..parents.len()).map(|i| i.to_string()).collect();
        Tree::from_parents(&parents, labels, Some(branching.len()))
    }

    /// `branching`-ary up to `core_depth`, then a single path from every
    /// core leaf down to `depth`. Level sizes are nondecreasing, and the tree
    /// stays small for large `depth`.
    pub fn build_broom(branching: usize, core_depth: usize, depth: usize) -> Result<Tree> {
        let core = core_depth.min(depth);
        let mut levels = vec![branching; core];
        levels.extend(std::iter::repeat_n(1, depth - core));
        Tree::build_spherical(&levels)
    }

    pub fn load(document: &TreeDocument) -> Result<Tree> {
        let mut root: Option<usize> = None;
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (i, entry) in document.vertices.iter().enumerate() {
            if seen.insert(entry.id.as_str(), i).is_some() {
                return Err(Error::DuplicateVertex(entry.id.clone()));
            }
            if entry.parent.is_none() {
                if let Some(r) = root {
                    return Err(Error::MultipleRoots {
                        first: document.vertices[r].id.clone(),
                        second: entry.id.clone(),
                    });
                }
                root = Some(i);
            }
        }
        let root = root.ok_or(Error::NoRoot)?;

        // root first, then document order
        let order: Vec<usize> = std::iter::once(root)
            .chain((0..document.vertices.len()).filter(|&i| i != root))
            .collect();
        let mut dense = vec![0usize; document.vertices.len()];
        for (new, &old) in order.iter().enumerate() {
            dense[old] = new;
        }
        let mut parents = Vec::with_capacity(order.len());
        let mut labels = Vec::with_capacity(order.len());
        for &old in &order {
            let entry = &document.vertices[old];
            let parent = match &entry.parent {
                None => None,
                Some(p) => {
                    let &pi = seen.get(p.as_str()).ok_or_else(|| Error::UnknownParent {
                        vertex: entry.id.clone(),
                        parent: p.clone(),
                    })?;
                    if pi == old {
                        return Err(Error::Cycle(entry.id.clone()));
                    }
                    Some(dense[pi])
                }
            };
            parents.push(parent);
            labels.push(entry.id.clone());
        }
        Tree::from_parents(&parents, labels, None)
    }

    pub fn to_document(&self) -> TreeDocument {
        TreeDocument {
            vertices: (0..self.len())
                .map(|i| VertexEntry {
                    id: self.labels[i].clone(),
                    parent: self.parent[i].map(|p| self.labels[p.0].clone()),
                })
                .collect(),
        }
    }

    /// Parent links with the root at index 0. Children are ordered by index.
    fn from_parents(parents: &[Option<usize>], labels: Vec<String>, truncation_depth: Option<usize>) -> Result<Tree> {
        let n = parents.len();
        debug_assert_eq!(parents[0], None);
        let mut children = vec![Vec::new(); n];
        for (v, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                children[p].push(VertexId(v));
            }
        }
        let mut depth = vec![usize::MAX; n];
        depth[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for c in &children[v] {
                depth[c.0] = depth[v] + 1;
                queue.push_back(c.0);
            }
        }
        if let Some(v) = depth.iter().position(|&d| d == usize::MAX) {
            return Err(Error::Cycle(labels[v].clone()));
        }
        let max_depth = depth.iter().copied().max().unwrap_or(0);
        let truncation_depth = truncation_depth.unwrap_or(max_depth);

        // preorder visits each level in lexicographic path order
        let mut levels = vec![Vec::new(); max_depth + 1];
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            levels[depth[v]].push(VertexId(v));
            stack.extend(children[v].iter().rev().map(|c| c.0));
        }
        let terminal_violations = (0..n)
            .filter(|&v| depth[v] < truncation_depth && children[v].is_empty())
            .map(VertexId)
            .collect();
        let by_label = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), VertexId(i)))
            .collect();
        Ok(Tree {
            parent: parents.iter().map(|p| p.map(VertexId)).collect(),
            children,
            depth,
            levels,
            labels,
            by_label,
            truncation_depth,
            terminal_violations,
        })
    }

    /// The sub-tree of vertices at depth `<= depth`, relabelled densely in
    /// the original index order. Labels are preserved.
    pub fn truncate(&self, depth: usize) -> Result<Tree> {
        if depth > self.truncation_depth {
            return Err(Error::DepthOutOfRange {
                requested: depth,
                available: self.truncation_depth,
            });
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&v| self.depth[v] <= depth).collect();
        let mut dense = vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            dense[old] = new;
        }
        let parents: Vec<Option<usize>> = keep.iter().map(|&v| self.parent[v].map(|p| dense[p.0])).collect();
        let labels = keep.iter().map(|&v| self.labels[v].clone()).collect();
        Tree::from_parents(&parents, labels, Some(depth))
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> VertexId {
        VertexId::ROOT
    }

    pub fn truncation_depth(&self) -> usize {
        self.truncation_depth
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = VertexId> + Clone {
        (0..self.len()).map(VertexId)
    }

    pub fn check(&self, v: VertexId) -> Result<VertexId> {
        if v.0 < self.len() {
            Ok(v)
        } else {
            Err(Error::InvalidVertex {
                index: v.0,
                len: self.len(),
            })
        }
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v.0]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v.0]
    }

    /// Number of neighbours.
    pub fn degree(&self, v: VertexId) -> usize {
        self.children[v.0].len() + usize::from(self.parent[v.0].is_some())
    }

    pub fn depth(&self, v: VertexId) -> usize {
        self.depth[v.0]
    }

    pub fn depths(&self) -> &[usize] {
        &self.depth
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.0]
    }

    pub fn lookup(&self, label: &str) -> Result<VertexId> {
        self.by_label
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(label.to_owned()))
    }

    /// Vertices with depth exactly `n` in lexicographic path order; empty
    /// beyond the truncation.
    pub fn vertices_at_level(&self, n: usize) -> &[VertexId] {
        self.levels.get(n).map_or(&[], Vec::as_slice)
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.levels.iter().map(Vec::len).collect();
        sizes.resize(self.truncation_depth + 1, 0);
        sizes
    }

    /// Internal vertices above the frontier that have no children. Always
    /// empty for generated trees; loaded trees are accepted but marked.
    pub fn terminal_violations(&self) -> &[VertexId] {
        &self.terminal_violations
    }

    /// Ancestor of `v` at depth `target` (clamped to `v` itself when
    /// `target >= depth(v)`).
    pub fn ancestor_at(&self, mut v: VertexId, target: usize) -> VertexId {
        while self.depth[v.0] > target {
            v = self.parent[v.0].expect("non-root vertex has a parent");
        }
        v
    }

    /// Edge count of the unique path between `u` and `v`.
    pub fn distance(&self, u: VertexId, v: VertexId) -> Result<usize> {
        self.check(u)?;
        self.check(v)?;
        let (du, dv) = (self.depth[u.0], self.depth[v.0]);
        let mut a = self.ancestor_at(u, dv.min(du));
        let mut b = self.ancestor_at(v, dv.min(du));
        while a != b {
            a = self.parent[a.0].expect("distinct vertices below the root");
            b = self.parent[b.0].expect("distinct vertices below the root");
        }
        let lca = self.depth[a.0];
        Ok(du + dv - 2 * lca)
    }
}
