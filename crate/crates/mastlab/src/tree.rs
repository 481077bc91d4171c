//! Rooted binary leaf-labeled trees.
//!
//! Nodes live in a flat arena (`Vec<Node>`) and are referenced by `NodeId`
//! indices, so trees copy and serialize cheaply. Trees are immutable values
//! after construction: every operation returns a new tree. Node ids carry no
//! meaning across trees; equality and ordering are defined on the labeled
//! topology alone (children are unordered).

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Index into a tree's node arena.
pub type NodeId = usize;

/// A set of leaf labels.
pub type LeafSet = BTreeSet<u32>;

/// Maximum `n` accepted by [`enumerate_trees`]. (2n-3)!! grows too fast to
/// stream much further on a desk machine.
pub const ENUMERATION_LIMIT: usize = 9;

/// One node: a labeled leaf or an internal vertex with exactly two children.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Leaf(u32),
    Internal(NodeId, NodeId),
}

/// A rooted binary tree with distinct positive-integer leaf labels.
#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
    root: NodeId,
    leaf_count: usize,
}

/// Canonical encoding of an unlabeled rooted tree shape.
///
/// Two trees have equal `ShapeCode`s iff their unlabeled rooted shapes are
/// isomorphic: at each internal node the two child codes are sorted before
/// concatenation, which is the classic AHU canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShapeCode(Vec<u8>);

impl ShapeCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl std::fmt::Display for ShapeCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&String::from_utf8_lossy(&self.0))
    }
}

impl Tree {
    /// A single leaf.
    pub fn leaf(label: u32) -> Tree {
        Tree {
            nodes: vec![Node::Leaf(label)],
            root: 0,
            leaf_count: 1,
        }
    }

    /// Joins two trees under a new root. Fails if their label sets overlap.
    pub fn join(left: Tree, right: Tree) -> Result<Tree> {
        let left_labels = left.labels();
        for label in right.labels() {
            if left_labels.contains(&label) {
                return Err(Error::DuplicateLabel(label));
            }
        }
        let mut nodes = left.nodes;
        let offset = nodes.len();
        for node in right.nodes {
            nodes.push(match node {
                Node::Leaf(l) => Node::Leaf(l),
                Node::Internal(a, b) => Node::Internal(a + offset, b + offset),
            });
        }
        let leaf_count = left.leaf_count + right.leaf_count;
        let root = nodes.len();
        nodes.push(Node::Internal(left.root, right.root + offset));
        Ok(Tree {
            nodes,
            root,
            leaf_count,
        })
    }

    /// Builds a tree from a raw arena. Used by the parser and generators;
    /// callers must uphold the binary/reachability invariants, which are
    /// checked here.
    pub(crate) fn from_parts(nodes: Vec<Node>, root: NodeId) -> Result<Tree> {
        let mut seen = BTreeSet::new();
        let mut leaf_count = 0usize;
        let mut stack = vec![root];
        let mut visited = 0usize;
        while let Some(id) = stack.pop() {
            visited += 1;
            match *nodes.get(id).ok_or(Error::InvalidNode(id))? {
                Node::Leaf(label) => {
                    if label == 0 {
                        return Err(Error::UnknownLabel(0));
                    }
                    if !seen.insert(label) {
                        return Err(Error::DuplicateLabel(label));
                    }
                    leaf_count += 1;
                }
                Node::Internal(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        if visited != nodes.len() {
            return Err(Error::InvalidNode(root));
        }
        Ok(Tree {
            nodes,
            root,
            leaf_count,
        })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of leaves, the paper's `n`.
    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        matches!(self.nodes[id], Node::Leaf(_))
    }

    /// The set of all leaf labels.
    pub fn labels(&self) -> LeafSet {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf(l) => Some(*l),
                Node::Internal(..) => None,
            })
            .collect()
    }

    /// Node ids in postorder (children before parents).
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.nodes.len());
        // Two-phase stack: push node, revisit after children.
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded || self.is_leaf(id) {
                order.push(id);
            } else {
                stack.push((id, true));
                if let Node::Internal(a, b) = self.nodes[id] {
                    stack.push((b, false));
                    stack.push((a, false));
                }
            }
        }
        order
    }

    /// Parent of each node (`None` for the root).
    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut parents = vec![None; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            if let Node::Internal(a, b) = node {
                parents[*a] = Some(id);
                parents[*b] = Some(id);
            }
        }
        parents
    }

    /// Leaf count of every subtree, indexed by node id.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.nodes.len()];
        for id in self.postorder() {
            sizes[id] = match self.nodes[id] {
                Node::Leaf(_) => 1,
                Node::Internal(a, b) => sizes[a] + sizes[b],
            };
        }
        sizes
    }

    /// Minimum leaf label in every subtree, indexed by node id.
    pub fn min_labels(&self) -> Vec<u32> {
        let mut mins = vec![u32::MAX; self.nodes.len()];
        for id in self.postorder() {
            mins[id] = match self.nodes[id] {
                Node::Leaf(l) => l,
                Node::Internal(a, b) => mins[a].min(mins[b]),
            };
        }
        mins
    }

    /// The labels of all leaves below `v` (inclusive).
    pub fn clade_leafset(&self, v: NodeId) -> Result<LeafSet> {
        if v >= self.nodes.len() {
            return Err(Error::InvalidNode(v));
        }
        let mut out = LeafSet::new();
        let mut stack = vec![v];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf(l) => {
                    out.insert(l);
                }
                Node::Internal(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        Ok(out)
    }

    /// The restriction `T|_S`: delete leaves outside `s`, suppress degree-2
    /// vertices, re-root at the most recent common ancestor of `s`.
    pub fn restrict(&self, s: &LeafSet) -> Result<Tree> {
        if s.is_empty() {
            return Err(Error::EmptyLeafSet);
        }
        let labels = self.labels();
        for label in s {
            if !labels.contains(label) {
                return Err(Error::UnknownLabel(*label));
            }
        }
        let mut nodes = Vec::new();
        // Bottom-up: map each surviving subtree to its new root, passing a
        // lone survivor through to suppress the degree-2 vertex.
        let mut mapped: Vec<Option<NodeId>> = vec![None; self.nodes.len()];
        for id in self.postorder() {
            mapped[id] = match self.nodes[id] {
                Node::Leaf(l) => {
                    if s.contains(&l) {
                        nodes.push(Node::Leaf(l));
                        Some(nodes.len() - 1)
                    } else {
                        None
                    }
                }
                Node::Internal(a, b) => match (mapped[a], mapped[b]) {
                    (Some(x), Some(y)) => {
                        nodes.push(Node::Internal(x, y));
                        Some(nodes.len() - 1)
                    }
                    (Some(x), None) | (None, Some(x)) => Some(x),
                    (None, None) => None,
                },
            };
        }
        let root = mapped[self.root].expect("non-empty restriction");
        Ok(Tree {
            nodes,
            root,
            leaf_count: s.len(),
        })
    }

    /// Canonical shape encoding, invariant under leaf relabeling.
    pub fn shape_code(&self) -> ShapeCode {
        ShapeCode(self.shape_codes_per_node().swap_remove(self.root))
    }

    /// AHU code of every subtree, indexed by node id.
    pub(crate) fn shape_codes_per_node(&self) -> Vec<Vec<u8>> {
        let mut codes: Vec<Vec<u8>> = vec![Vec::new(); self.nodes.len()];
        for id in self.postorder() {
            codes[id] = match self.nodes[id] {
                Node::Leaf(_) => vec![b'.'],
                Node::Internal(a, b) => {
                    let (lo, hi) = if codes[a] <= codes[b] { (a, b) } else { (b, a) };
                    let mut c = Vec::with_capacity(codes[a].len() + codes[b].len() + 2);
                    c.push(b'(');
                    c.extend_from_slice(&codes[lo]);
                    c.extend_from_slice(&codes[hi]);
                    c.push(b')');
                    c
                }
            };
        }
        codes
    }

    /// Applies a label bijection to the leaves; the shape is untouched.
    /// `map` must cover every label of the tree injectively.
    pub fn relabel(&self, map: &std::collections::HashMap<u32, u32>) -> Result<Tree> {
        let nodes = self
            .nodes
            .iter()
            .map(|node| match node {
                Node::Leaf(l) => map
                    .get(l)
                    .map(|new| Node::Leaf(*new))
                    .ok_or(Error::UnknownLabel(*l)),
                internal => Ok(*internal),
            })
            .collect::<Result<Vec<Node>>>()?;
        Tree::from_parts(nodes, self.root)
    }

    /// Most recent common ancestor of a non-empty leaf set.
    pub fn mrca(&self, s: &LeafSet) -> Result<NodeId> {
        if s.is_empty() {
            return Err(Error::EmptyLeafSet);
        }
        let parents = self.parents();
        let mut depth = vec![0usize; self.nodes.len()];
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, d)) = stack.pop() {
            depth[id] = d;
            if let Node::Internal(a, b) = self.nodes[id] {
                stack.push((a, d + 1));
                stack.push((b, d + 1));
            }
        }
        let mut leaf_of = std::collections::HashMap::new();
        for (id, node) in self.nodes.iter().enumerate() {
            if let Node::Leaf(l) = node {
                leaf_of.insert(*l, id);
            }
        }
        let mut iter = s.iter();
        let first = *iter.next().unwrap();
        let mut acc = *leaf_of.get(&first).ok_or(Error::UnknownLabel(first))?;
        for label in iter {
            let mut a = acc;
            let mut b = *leaf_of.get(label).ok_or(Error::UnknownLabel(*label))?;
            while depth[a] > depth[b] {
                a = parents[a].unwrap();
            }
            while depth[b] > depth[a] {
                b = parents[b].unwrap();
            }
            while a != b {
                a = parents[a].unwrap();
                b = parents[b].unwrap();
            }
            acc = a;
        }
        Ok(acc)
    }
}

impl PartialEq for Tree {
    /// Equality of labeled topologies: node numbering and stored child order
    /// are irrelevant.
    fn eq(&self, other: &Tree) -> bool {
        if self.leaf_count != other.leaf_count {
            return false;
        }
        let mins_a = self.min_labels();
        let mins_b = other.min_labels();
        fn go(
            a: &Tree,
            u: NodeId,
            b: &Tree,
            v: NodeId,
            mins_a: &[u32],
            mins_b: &[u32],
        ) -> bool {
            match (a.nodes[u], b.nodes[v]) {
                (Node::Leaf(x), Node::Leaf(y)) => x == y,
                (Node::Internal(a1, a2), Node::Internal(b1, b2)) => {
                    let (x1, x2) = if mins_a[a1] < mins_a[a2] {
                        (a1, a2)
                    } else {
                        (a2, a1)
                    };
                    let (y1, y2) = if mins_b[b1] < mins_b[b2] {
                        (b1, b2)
                    } else {
                        (b2, b1)
                    };
                    go(a, x1, b, y1, mins_a, mins_b) && go(a, x2, b, y2, mins_a, mins_b)
                }
                _ => false,
            }
        }
        go(self, self.root, other, other.root, &mins_a, &mins_b)
    }
}

impl Eq for Tree {}

impl std::fmt::Display for Tree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&crate::newick::write_newick(self))
    }
}

/// Inserts a new leaf on the edge above `position` (the edge above the root
/// when `position` is the root), in place. The old occupant of the slot moves
/// to a fresh id so existing ids stay valid except for `position` itself.
pub(crate) fn insert_leaf_above(nodes: &mut Vec<Node>, position: NodeId, label: u32) {
    let moved = nodes.len();
    let old = nodes[position];
    nodes.push(old);
    let leaf = nodes.len();
    nodes.push(Node::Leaf(label));
    nodes[position] = Node::Internal(moved, leaf);
}

/// Streams every tree in RB(n) exactly once, in a fixed order: leaf `i` is
/// attached at each of the `2i-3` possible positions (existing nodes in arena
/// order), odometer-style with the deepest leaf varying fastest.
pub fn enumerate_trees(n: usize) -> Result<TreeEnumerator> {
    if n == 0 || n > ENUMERATION_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(TreeEnumerator {
        n,
        // positions[i] is the attachment choice for leaf i+3.
        positions: vec![0; n.saturating_sub(2)],
        done: false,
    })
}

/// Iterator over RB(n); see [`enumerate_trees`].
pub struct TreeEnumerator {
    n: usize,
    positions: Vec<usize>,
    done: bool,
}

impl TreeEnumerator {
    fn build(&self) -> Tree {
        let mut nodes = vec![Node::Leaf(1)];
        if self.n >= 2 {
            insert_leaf_above(&mut nodes, 0, 2);
        }
        for (idx, &pos) in self.positions.iter().enumerate() {
            let label = (idx + 3) as u32;
            insert_leaf_above(&mut nodes, pos, label);
        }
        Tree {
            root: 0,
            leaf_count: self.n,
            nodes,
        }
    }
}

impl Iterator for TreeEnumerator {
    type Item = Tree;

    fn next(&mut self) -> Option<Tree> {
        if self.done {
            return None;
        }
        let tree = self.build();
        // Advance the odometer. Leaf i+3 goes into a partial tree with
        // 2(i+2)-1 nodes, so its position ranges over 0..=2i+2.
        let mut i = self.positions.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            let limit = 2 * i + 2;
            if self.positions[i] < limit {
                self.positions[i] += 1;
                for p in self.positions[i + 1..].iter_mut() {
                    *p = 0;
                }
                break;
            }
        }
        Some(tree)
    }
}
