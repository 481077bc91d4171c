//! Greedy k-blobification, scaffold trees, the matched-blob agreement
//! constructor, and the greedy comb scaffold.
//!
//! A blob is either a cherry blob (all leaves below a vertex) or an edge blob
//! (a difference C1 \ C2 of nested clades). The greedy procedure first takes
//! every containment-minimal clade whose size lies in [k, 2k-2] as a cherry
//! blob, then groups the remaining leaves along each prescaffold edge, bottom
//! up, closing an edge blob the first time the running group size enters the
//! window. Whatever is left on an edge (at most k-1 leaves) stays as
//! leftovers.
//!
//! Traversal everywhere uses a canonical child order (subtree shape code,
//! then minimum label), so blob lists, scaffolds and leaf numbering depend
//! only on the tree value, and two trees of equal shape produce blob lists
//! aligned index-by-index under a shape isomorphism.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::tree::{LeafSet, Node, NodeId, Tree};

/// What anchors a blob to the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlobAnchor {
    /// Cherry blob: every leaf below this vertex.
    Cherry { vertex: NodeId },
    /// Edge blob: `outer \ inner` for nested clades `inner` strictly inside
    /// `outer`.
    Edge { outer: LeafSet, inner: LeafSet },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlobKind {
    Cherry,
    Edge,
}

/// One blob of a blobification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blob {
    pub leaves: LeafSet,
    pub anchor: BlobAnchor,
}

impl Blob {
    pub fn kind(&self) -> BlobKind {
        match self.anchor {
            BlobAnchor::Cherry { .. } => BlobKind::Cherry,
            BlobAnchor::Edge { .. } => BlobKind::Edge,
        }
    }
}

/// A scaffold edge, identified by its lower endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScaffoldEdge {
    /// The edge above a non-root scaffold node.
    Above(NodeId),
    /// The distinguished edge above the scaffold root; present when
    /// `root_edge` is set, and the only edge of an empty blobification.
    Root,
}

/// The scaffold: one leaf per blob, labeled blob index + 1, plus a flag for
/// the extra edge above its root (present when the prescaffold root is not
/// the root of the source tree).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scaffold {
    pub tree: Option<Tree>,
    pub root_edge: bool,
}

/// Output of the greedy k-blobification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blobification {
    pub k: usize,
    /// Cherry blobs first, then edge blobs, both in canonical traversal
    /// order.
    pub blobs: Vec<Blob>,
    pub cherry_count: usize,
    pub edge_count: usize,
    pub scaffold: Scaffold,
    /// Scaffold leaf node id for each blob index; a bijection onto the
    /// scaffold's leaves.
    pub blob_to_scaffold: Vec<NodeId>,
    /// Unblobbed leaves per scaffold edge; every set has at most k-1 leaves.
    pub leftovers: BTreeMap<ScaffoldEdge, LeafSet>,
}

impl Blobification {
    pub fn blob_count(&self) -> usize {
        self.blobs.len()
    }
}

/// Canonical child order: by subtree shape code, ties by minimum label.
fn canonical_children(
    t: &Tree,
    id: NodeId,
    codes: &[Vec<u8>],
    mins: &[u32],
) -> (NodeId, NodeId) {
    let Node::Internal(a, b) = t.node(id) else {
        unreachable!("leaf has no children");
    };
    if (&codes[a], mins[a]) <= (&codes[b], mins[b]) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Postorder under the canonical child order.
fn canonical_postorder(t: &Tree, codes: &[Vec<u8>], mins: &[u32]) -> Vec<NodeId> {
    let mut order = Vec::with_capacity(t.node_count());
    let mut stack = vec![(t.root(), false)];
    while let Some((id, expanded)) = stack.pop() {
        if expanded || t.is_leaf(id) {
            order.push(id);
        } else {
            stack.push((id, true));
            let (first, second) = canonical_children(t, id, codes, mins);
            stack.push((second, false));
            stack.push((first, false));
        }
    }
    order
}

/// Scaffold under construction; finalized into a labeled `Tree` once all
/// blob indices are known.
struct ScaffoldBuilder {
    nodes: Vec<BuilderNode>,
}

enum BuilderNode {
    CherryLeaf(usize),
    EdgeLeaf(usize),
    Internal(usize, usize),
}

impl ScaffoldBuilder {
    fn cherry_leaf(&mut self, index: usize) -> usize {
        self.nodes.push(BuilderNode::CherryLeaf(index));
        self.nodes.len() - 1
    }

    fn edge_leaf(&mut self, index: usize) -> usize {
        self.nodes.push(BuilderNode::EdgeLeaf(index));
        self.nodes.len() - 1
    }

    fn internal(&mut self, a: usize, b: usize) -> usize {
        self.nodes.push(BuilderNode::Internal(a, b));
        self.nodes.len() - 1
    }

    /// Labels cherry blob i as i+1 and edge blob j as cherry_count+j+1.
    fn finish(self, root: usize, cherry_count: usize) -> (Tree, Vec<NodeId>) {
        let blob_total = self
            .nodes
            .iter()
            .filter(|n| !matches!(n, BuilderNode::Internal(..)))
            .count();
        let mut blob_to_scaffold = vec![usize::MAX; blob_total];
        let nodes: Vec<Node> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, node)| match node {
                BuilderNode::CherryLeaf(i) => {
                    blob_to_scaffold[*i] = id;
                    Node::Leaf(*i as u32 + 1)
                }
                BuilderNode::EdgeLeaf(j) => {
                    blob_to_scaffold[cherry_count + *j] = id;
                    Node::Leaf((cherry_count + *j) as u32 + 1)
                }
                BuilderNode::Internal(a, b) => Node::Internal(*a, *b),
            })
            .collect();
        let tree = Tree::from_parts(nodes, root).expect("scaffold construction is valid");
        (tree, blob_to_scaffold)
    }
}

/// State of the bottom-up contraction at one tree node.
enum State {
    /// No blob below: the subtree's leaves, at most k-1 of them.
    Free(Vec<u32>),
    /// A blob exists below.
    Built {
        /// Scaffold node currently on top of this branch.
        top: usize,
        /// Pendant leaves gathered since the last close point.
        acc: Vec<u32>,
        /// Tree node whose clade is everything at or below the close point
        /// (the inner clade of the next edge blob formed here).
        base_node: NodeId,
    },
}

/// Runs the greedy k-blobification.
pub fn greedy_blobification(t: &Tree, k: usize) -> Result<Blobification> {
    if k < 2 {
        return Err(Error::InvalidK(k));
    }
    let sizes = t.subtree_sizes();
    let codes = t.shape_codes_per_node();
    let mins = t.min_labels();
    let order = canonical_postorder(t, &codes, &mins);

    // Cherry blobs: containment-minimal clades with size in [k, 2k-2].
    let window = k..=2 * k - 2;
    let mut is_anchor = vec![false; t.node_count()];
    let mut has_anchor_below = vec![false; t.node_count()];
    let mut anchors = Vec::new();
    for &id in &order {
        let below = match t.node(id) {
            Node::Leaf(_) => false,
            Node::Internal(a, b) => has_anchor_below[a] || has_anchor_below[b],
        };
        if !below && window.contains(&sizes[id]) {
            is_anchor[id] = true;
            has_anchor_below[id] = true;
            anchors.push(id);
        } else {
            has_anchor_below[id] = below;
        }
    }

    if anchors.is_empty() {
        // n < k: nothing to blob, every leaf is a leftover on the root edge.
        debug_assert!(t.leaf_count() < k);
        return Ok(Blobification {
            k,
            blobs: Vec::new(),
            cherry_count: 0,
            edge_count: 0,
            scaffold: Scaffold {
                tree: None,
                root_edge: true,
            },
            blob_to_scaffold: Vec::new(),
            leftovers: BTreeMap::from([(ScaffoldEdge::Root, t.labels())]),
        });
    }

    let anchor_index: BTreeMap<NodeId, usize> = anchors
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i))
        .collect();

    let mut builder = ScaffoldBuilder { nodes: Vec::new() };
    let mut edge_blobs: Vec<Blob> = Vec::new();
    let mut leftovers: BTreeMap<ScaffoldEdge, LeafSet> = BTreeMap::new();
    let mut last_junction: Option<NodeId> = None;

    // Bottom-up contraction following the canonical postorder.
    let mut states: Vec<Option<State>> = (0..t.node_count()).map(|_| None).collect();
    for &id in &order {
        let state = if is_anchor[id] {
            let top = builder.cherry_leaf(anchor_index[&id]);
            State::Built {
                top,
                acc: Vec::new(),
                base_node: id,
            }
        } else {
            match t.node(id) {
                Node::Leaf(l) => State::Free(vec![l]),
                Node::Internal(..) => {
                    let (first, second) = canonical_children(t, id, &codes, &mins);
                    let sa = states[first].take().expect("postorder");
                    let sb = states[second].take().expect("postorder");
                    match (sa, sb) {
                        (State::Free(mut x), State::Free(y)) => {
                            x.extend(y);
                            debug_assert!(x.len() < k);
                            State::Free(x)
                        }
                        (State::Built { top, mut acc, base_node }, State::Free(p))
                        | (State::Free(p), State::Built { top, mut acc, base_node }) => {
                            debug_assert!(p.len() < k);
                            acc.extend(p);
                            if acc.len() >= k {
                                debug_assert!(acc.len() <= 2 * k - 2);
                                let outer =
                                    t.clade_leafset(id).expect("traversal node");
                                let inner =
                                    t.clade_leafset(base_node).expect("traversal node");
                                let leaves: LeafSet = acc.iter().copied().collect();
                                debug_assert_eq!(
                                    leaves,
                                    outer.difference(&inner).copied().collect()
                                );
                                let index = edge_blobs.len();
                                edge_blobs.push(Blob {
                                    leaves,
                                    anchor: BlobAnchor::Edge { outer, inner },
                                });
                                let leaf = builder.edge_leaf(index);
                                let top2 = builder.internal(top, leaf);
                                State::Built {
                                    top: top2,
                                    acc: Vec::new(),
                                    base_node: id,
                                }
                            } else {
                                State::Built { top, acc, base_node }
                            }
                        }
                        (
                            State::Built { top: tl, acc: al, .. },
                            State::Built { top: tr, acc: ar, .. },
                        ) => {
                            if !al.is_empty() {
                                leftovers.insert(
                                    ScaffoldEdge::Above(tl),
                                    al.into_iter().collect(),
                                );
                            }
                            if !ar.is_empty() {
                                leftovers.insert(
                                    ScaffoldEdge::Above(tr),
                                    ar.into_iter().collect(),
                                );
                            }
                            let top = builder.internal(tl, tr);
                            last_junction = Some(id);
                            State::Built {
                                top,
                                acc: Vec::new(),
                                base_node: id,
                            }
                        }
                    }
                }
            }
        };
        states[id] = Some(state);
    }

    let State::Built { top, acc, .. } = states[t.root()].take().expect("root state")
    else {
        unreachable!("anchors exist, so the root is built");
    };

    let prescaffold_root = if anchors.len() == 1 {
        anchors[0]
    } else {
        last_junction.expect("two or more anchors meet at a junction")
    };
    let root_edge = prescaffold_root != t.root();
    if !acc.is_empty() {
        debug_assert!(root_edge);
        leftovers.insert(ScaffoldEdge::Root, acc.into_iter().collect());
    }

    let cherry_count = anchors.len();
    let (scaffold_tree, blob_to_scaffold) = builder.finish(top, cherry_count);

    let mut blobs: Vec<Blob> = anchors
        .iter()
        .map(|&vertex| Blob {
            leaves: t.clade_leafset(vertex).expect("anchor node"),
            anchor: BlobAnchor::Cherry { vertex },
        })
        .collect();
    let edge_count = edge_blobs.len();
    blobs.extend(edge_blobs);

    Ok(Blobification {
        k,
        blobs,
        cherry_count,
        edge_count,
        scaffold: Scaffold {
            tree: Some(scaffold_tree),
            root_edge,
        },
        blob_to_scaffold,
        leftovers,
    })
}

/// Checks every blobification invariant against `t`; returns the list of
/// violations, empty when valid.
pub fn verify_blobification(t: &Tree, b: &Blobification) -> Vec<String> {
    let mut errs = Vec::new();
    if b.k < 2 {
        errs.push(format!("k = {} is below 2", b.k));
        return errs;
    }
    if b.cherry_count + b.edge_count != b.blobs.len() {
        errs.push("cherry_count + edge_count does not match the blob list".into());
    }
    for (i, blob) in b.blobs.iter().enumerate() {
        let expect_cherry = i < b.cherry_count;
        if (blob.kind() == BlobKind::Cherry) != expect_cherry {
            errs.push(format!("blob {i} is out of kind order"));
        }
        if blob.leaves.len() < b.k || blob.leaves.len() > 2 * b.k - 2 {
            errs.push(format!(
                "blob {i} has size {} outside [{}, {}]",
                blob.leaves.len(),
                b.k,
                2 * b.k - 2
            ));
        }
        match &blob.anchor {
            BlobAnchor::Cherry { vertex } => match t.clade_leafset(*vertex) {
                Ok(clade) => {
                    if clade != blob.leaves {
                        errs.push(format!("blob {i} does not match its anchor clade"));
                    }
                }
                Err(_) => errs.push(format!("blob {i} has an invalid anchor vertex")),
            },
            BlobAnchor::Edge { outer, inner } => {
                if inner.is_empty() {
                    errs.push(format!("blob {i} has an empty inner clade"));
                }
                if !inner.is_subset(outer) || inner == outer {
                    errs.push(format!("blob {i} clades are not strictly nested"));
                }
                let difference: LeafSet = outer.difference(inner).copied().collect();
                if difference != blob.leaves {
                    errs.push(format!("blob {i} leaves are not outer minus inner"));
                }
                for (name, set) in [("outer", outer), ("inner", inner)] {
                    let is_clade = t
                        .mrca(set)
                        .and_then(|m| t.clade_leafset(m))
                        .map(|clade| clade == *set)
                        .unwrap_or(false);
                    if !is_clade {
                        errs.push(format!("blob {i} {name} set is not a clade"));
                    }
                }
            }
        }
    }

    // Disjointness and coverage.
    let mut seen = LeafSet::new();
    let mut total = 0usize;
    for (i, blob) in b.blobs.iter().enumerate() {
        total += blob.leaves.len();
        if blob.leaves.iter().any(|l| seen.contains(l)) {
            errs.push(format!("blob {i} overlaps an earlier blob"));
        }
        seen.extend(blob.leaves.iter().copied());
    }
    for (edge, set) in &b.leftovers {
        if set.is_empty() {
            errs.push(format!("leftover {edge:?} is empty"));
        }
        if set.len() > b.k - 1 {
            errs.push(format!(
                "leftover {edge:?} has {} leaves, above k-1 = {}",
                set.len(),
                b.k - 1
            ));
        }
        total += set.len();
        if set.iter().any(|l| seen.contains(l)) {
            errs.push(format!("leftover {edge:?} overlaps another part"));
        }
        seen.extend(set.iter().copied());
    }
    let labels = t.labels();
    if seen != labels || total != labels.len() {
        errs.push("blobs and leftovers do not partition the leaf set".into());
    }

    // Scaffold bookkeeping.
    match &b.scaffold.tree {
        None => {
            if !b.blobs.is_empty() {
                errs.push("missing scaffold for a non-empty blobification".into());
            }
            if !b.blob_to_scaffold.is_empty() {
                errs.push("blob_to_scaffold entries without a scaffold".into());
            }
        }
        Some(scaffold) => {
            if scaffold.leaf_count() != b.blobs.len() {
                errs.push(format!(
                    "scaffold has {} leaves for {} blobs",
                    scaffold.leaf_count(),
                    b.blobs.len()
                ));
            }
            if b.blob_to_scaffold.len() != b.blobs.len() {
                errs.push("blob_to_scaffold length mismatch".into());
            }
            let mut used = std::collections::BTreeSet::new();
            for (i, &leaf) in b.blob_to_scaffold.iter().enumerate() {
                if leaf >= scaffold.node_count() || !scaffold.is_leaf(leaf) {
                    errs.push(format!("blob {i} maps to a non-leaf scaffold node"));
                } else if !used.insert(leaf) {
                    errs.push(format!("blob {i} shares a scaffold leaf"));
                }
            }
            for edge in b.leftovers.keys() {
                match edge {
                    ScaffoldEdge::Root => {
                        if !b.scaffold.root_edge {
                            errs.push("leftovers on an absent root edge".into());
                        }
                    }
                    ScaffoldEdge::Above(v) => {
                        if *v >= scaffold.node_count() || *v == scaffold.root() {
                            errs.push(format!("leftover edge above invalid node {v}"));
                        }
                    }
                }
            }
        }
    }
    errs
}

/// One leaf from each aligned blob pair with non-empty intersection.
///
/// Both trees are blobified with the canonical traversal, so blob i of one
/// corresponds to blob i of the other under a shape isomorphism; from every
/// index whose blobs intersect, the smallest common label joins the output.
/// The result is always an agreement set of `t1` and `t2` (when non-empty)
/// whose restriction shape embeds in the scaffold shape.
pub fn matched_blob_agreement(t1: &Tree, t2: &Tree, k: usize) -> Result<LeafSet> {
    let (pairs, _) = matched_blob_pairs(t1, t2, k)?;
    Ok(pairs
        .iter()
        .filter_map(|(a, b)| a.intersection(b).next().copied())
        .collect())
}

/// The aligned blob pairs of the two blobifications, plus the blobifications'
/// shared blob count. Exposed for the intersection-frequency experiment.
pub fn matched_blob_pairs(
    t1: &Tree,
    t2: &Tree,
    k: usize,
) -> Result<(Vec<(LeafSet, LeafSet)>, Blobification)> {
    if t1.shape_code() != t2.shape_code() {
        return Err(Error::ShapeMismatch);
    }
    let b1 = greedy_blobification(t1, k)?;
    let b2 = greedy_blobification(t2, k)?;
    debug_assert_eq!(b1.blob_count(), b2.blob_count());
    let pairs = b1
        .blobs
        .iter()
        .zip(&b2.blobs)
        .map(|(x, y)| (x.leaves.clone(), y.leaves.clone()))
        .collect();
    Ok((pairs, b1))
}

/// The vector of blob sizes found by descending into the larger root subtree
/// (ties keep the first-listed child) and then folding the recorded sizes
/// from the deepest split upward, starting a new entry whenever the current
/// one has reached k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombVector {
    pub values: Vec<usize>,
    pub source_n: usize,
}

pub fn greedy_comb_scaffold(t: &Tree, k: usize) -> CombVector {
    let sizes = t.subtree_sizes();
    let mut u = Vec::new();
    let mut cur = t.root();
    while let Node::Internal(a, b) = t.node(cur) {
        u.push(sizes[a].min(sizes[b]));
        cur = if sizes[b] > sizes[a] { b } else { a };
    }
    let mut values = vec![0usize];
    while let Some(x) = u.pop() {
        if *values.last().unwrap() >= k {
            values.push(x);
        } else {
            *values.last_mut().unwrap() += x;
        }
    }
    CombVector {
        values,
        source_n: t.leaf_count(),
    }
}

/// Leaf counts of the comb scaffold: `full` counts every entry, while
/// `conservative` drops a trailing entry smaller than k.
pub fn comb_leaf_count(v: &CombVector, k: usize) -> (usize, usize) {
    let full = v.values.len();
    let conservative = if *v.values.last().expect("comb vector is never empty") >= k {
        full
    } else {
        full - 1
    };
    (full, conservative)
}

impl std::fmt::Display for Blobification {
    /// Structured text report: one header, one line per blob, one line per
    /// leftover edge, then the scaffold in Newick form (leaves are blob
    /// indices + 1).
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n: usize = self.blobs.iter().map(|b| b.leaves.len()).sum::<usize>()
            + self.leftovers.values().map(LeafSet::len).sum::<usize>();
        writeln!(
            f,
            "k={} n={} cherry_blobs={} edge_blobs={} root_edge={}",
            self.k, n, self.cherry_count, self.edge_count, self.scaffold.root_edge
        )?;
        for (i, blob) in self.blobs.iter().enumerate() {
            let kind = match blob.kind() {
                BlobKind::Cherry => "cherry",
                BlobKind::Edge => "edge",
            };
            writeln!(
                f,
                "blob {} {} leaves={} scaffold_leaf={}",
                i,
                kind,
                join_labels(&blob.leaves),
                self.blob_to_scaffold[i]
            )?;
        }
        for (edge, set) in &self.leftovers {
            let name = match edge {
                ScaffoldEdge::Root => "root".to_string(),
                ScaffoldEdge::Above(v) => v.to_string(),
            };
            writeln!(f, "leftover edge={} leaves={}", name, join_labels(set))?;
        }
        match &self.scaffold.tree {
            Some(tree) => writeln!(f, "scaffold={}", tree),
            None => writeln!(f, "scaffold=none"),
        }
    }
}

fn join_labels(set: &LeafSet) -> String {
    set.iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mast::is_agreement_set;
    use crate::newick::parse_newick;
    use crate::random::{relabel_uniform, uniform_tree, RngSeed};

    fn t(s: &str) -> Tree {
        parse_newick(s).unwrap()
    }

    fn leaf_sets(blobs: &[Blob]) -> Vec<LeafSet> {
        blobs.iter().map(|b| b.leaves.clone()).collect()
    }

    #[test]
    fn caterpillar7_k2() {
        let tree = t("((((((1,2),3),4),5),6),7);");
        let b = greedy_blobification(&tree, 2).unwrap();
        assert_eq!(b.cherry_count, 1);
        assert_eq!(b.edge_count, 2);
        assert_eq!(
            leaf_sets(&b.blobs),
            vec![
                LeafSet::from([1, 2]),
                LeafSet::from([3, 4]),
                LeafSet::from([5, 6]),
            ]
        );
        let leftover: Vec<&LeafSet> = b.leftovers.values().collect();
        assert_eq!(leftover, vec![&LeafSet::from([7])]);
        assert!(b.leftovers.contains_key(&ScaffoldEdge::Root));
        assert!(b.scaffold.root_edge);
        // 3 blobs >= 7/8.
        assert!(4 * b.k * b.blob_count() >= tree.leaf_count());
        assert!(verify_blobification(&tree, &b).is_empty());
        // Scaffold is the 3-leaf caterpillar (the only 3-leaf shape).
        let scaffold = b.scaffold.tree.as_ref().unwrap();
        assert_eq!(scaffold.shape_code(), t("((1,2),3);").shape_code());
    }

    #[test]
    fn balanced8_k2_and_k3() {
        let tree = t("(((1,2),(3,4)),((5,6),(7,8)));");
        let b = greedy_blobification(&tree, 2).unwrap();
        assert_eq!(b.cherry_count, 4);
        assert_eq!(b.edge_count, 0);
        assert!(b.leftovers.is_empty());
        assert!(!b.scaffold.root_edge);
        let mut sets = leaf_sets(&b.blobs);
        sets.sort();
        assert_eq!(
            sets,
            vec![
                LeafSet::from([1, 2]),
                LeafSet::from([3, 4]),
                LeafSet::from([5, 6]),
                LeafSet::from([7, 8]),
            ]
        );
        let scaffold = b.scaffold.tree.as_ref().unwrap();
        assert_eq!(
            scaffold.shape_code(),
            t("((1,2),(3,4));").shape_code()
        );
        assert!(verify_blobification(&tree, &b).is_empty());

        // k=3: the two 4-clades are minimal for the window [3,4].
        let b = greedy_blobification(&tree, 3).unwrap();
        assert_eq!(b.cherry_count, 2);
        assert_eq!(b.edge_count, 0);
        let mut sets = leaf_sets(&b.blobs);
        sets.sort();
        assert_eq!(
            sets,
            vec![LeafSet::from([1, 2, 3, 4]), LeafSet::from([5, 6, 7, 8])]
        );
        assert!(verify_blobification(&tree, &b).is_empty());
    }

    #[test]
    fn small_tree_below_k_is_all_leftover() {
        let tree = t("(1,2);");
        let b = greedy_blobification(&tree, 3).unwrap();
        assert_eq!(b.blob_count(), 0);
        assert_eq!(b.leftovers[&ScaffoldEdge::Root], LeafSet::from([1, 2]));
        assert!(b.scaffold.tree.is_none());
        assert!(verify_blobification(&tree, &b).is_empty());
    }

    #[test]
    fn k_below_two_rejected() {
        assert!(matches!(
            greedy_blobification(&t("(1,2);"), 1),
            Err(Error::InvalidK(1))
        ));
    }

    #[test]
    fn whole_tree_single_blob() {
        let tree = t("(1,2);");
        let b = greedy_blobification(&tree, 2).unwrap();
        assert_eq!(b.blob_count(), 1);
        assert!(!b.scaffold.root_edge);
        assert!(b.leftovers.is_empty());
        assert!(verify_blobification(&tree, &b).is_empty());
    }

    #[test]
    fn verify_flags_bad_blobifications() {
        let tree = t("((((((1,2),3),4),5),6),7);");
        let good = greedy_blobification(&tree, 2).unwrap();

        // Overlapping blobs.
        let mut bad = good.clone();
        bad.blobs[1].leaves = LeafSet::from([2, 3]);
        assert!(!verify_blobification(&tree, &bad).is_empty());

        // A blob of size 2k-1.
        let mut bad = good.clone();
        bad.blobs[1].leaves = LeafSet::from([3, 4, 5]);
        assert!(verify_blobification(&tree, &bad)
            .iter()
            .any(|e| e.contains("outside")));

        // Broken anchor.
        let mut bad = good.clone();
        bad.blobs[0].anchor = BlobAnchor::Cherry {
            vertex: tree.root(),
        };
        assert!(!verify_blobification(&tree, &bad).is_empty());
    }

    #[test]
    fn greedy_outputs_verify_on_random_trees() {
        for stream in 0..200 {
            let tree = uniform_tree(40, RngSeed::new(11, stream)).unwrap();
            for k in [2, 3, 7] {
                let b = greedy_blobification(&tree, k).unwrap();
                let errs = verify_blobification(&tree, &b);
                assert!(errs.is_empty(), "k={k} stream={stream}: {errs:?}");
                assert!(4 * k * b.blob_count() >= tree.leaf_count());
            }
        }
    }

    #[test]
    fn prop_23_exhaustive_small() {
        for n in 2..=6 {
            for tree in crate::tree::enumerate_trees(n).unwrap() {
                for k in 2..=4 {
                    if n < k {
                        continue;
                    }
                    let b = greedy_blobification(&tree, k).unwrap();
                    assert!(
                        4 * k * b.blob_count() >= n,
                        "n={n} k={k} tree={tree}"
                    );
                    assert!(b.cherry_count >= 1);
                    assert!(verify_blobification(&tree, &b).is_empty());
                }
            }
        }
    }

    #[test]
    fn matched_identity_hits_every_blob() {
        let tree = t("(((1,2),(3,4)),((5,6),(7,8)));");
        let s = matched_blob_agreement(&tree, &tree, 2).unwrap();
        assert_eq!(s.len(), 4);
        assert!(is_agreement_set(&tree, &tree, &s).unwrap());
    }

    #[test]
    fn matched_blob_involution_fixes_the_tree() {
        // The relabeling (1 5)(2 6)(3 7)(4 8) maps this balanced tree to
        // itself as a labeled tree, so the aligned blobifications coincide
        // and every pair intersects fully.
        let t1 = t("(((1,2),(3,4)),((5,6),(7,8)));");
        let map: std::collections::HashMap<u32, u32> =
            [(1, 5), (2, 6), (3, 7), (4, 8), (5, 1), (6, 2), (7, 3), (8, 4)]
                .into_iter()
                .collect();
        let t2 = t1.relabel(&map).unwrap();
        assert_eq!(t1, t2);
        let s = matched_blob_agreement(&t1, &t2, 2).unwrap();
        assert_eq!(s.len(), 4);
        assert!(is_agreement_set(&t1, &t2, &s).unwrap());
    }

    #[test]
    fn matched_blob_is_agreement_set_on_random_pairs() {
        let mut checked = 0;
        for stream in 0..300 {
            let base = uniform_tree(60, RngSeed::new(21, stream)).unwrap();
            let t1 = relabel_uniform(&base, RngSeed::new(22, stream));
            let t2 = relabel_uniform(&base, RngSeed::new(23, stream));
            let s = matched_blob_agreement(&t1, &t2, 8).unwrap();
            if !s.is_empty() {
                assert!(is_agreement_set(&t1, &t2, &s).unwrap(), "stream={stream}");
                checked += 1;
            }
        }
        assert!(checked > 250, "almost all pairs should yield a witness");
    }

    #[test]
    fn matched_blob_restriction_embeds_in_scaffold() {
        for stream in 0..100 {
            let base = uniform_tree(50, RngSeed::new(31, stream)).unwrap();
            let t1 = relabel_uniform(&base, RngSeed::new(32, stream));
            let t2 = relabel_uniform(&base, RngSeed::new(33, stream));
            let (pairs, b1) = matched_blob_pairs(&t1, &t2, 7).unwrap();
            let mut witness = LeafSet::new();
            let mut matched_leaf_labels = LeafSet::new();
            for (i, (a, b)) in pairs.iter().enumerate() {
                if let Some(l) = a.intersection(b).next() {
                    witness.insert(*l);
                    matched_leaf_labels.insert(i as u32 + 1);
                }
            }
            if witness.is_empty() {
                continue;
            }
            let restricted = t1.restrict(&witness).unwrap();
            let scaffold = b1.scaffold.tree.as_ref().unwrap();
            let induced = scaffold.restrict(&matched_leaf_labels).unwrap();
            assert_eq!(
                restricted.shape_code(),
                induced.shape_code(),
                "stream={stream}"
            );
        }
    }

    #[test]
    fn matched_blob_rejects_shape_mismatch() {
        assert!(matches!(
            matched_blob_agreement(&t("((1,2),(3,4));"), &t("(((1,2),3),4);"), 2),
            Err(Error::ShapeMismatch)
        ));
    }

    #[test]
    fn scaffold_shape_is_representative_independent() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for stream in 0..100 {
            let tree = uniform_tree(60, RngSeed::new(41, stream)).unwrap();
            let b = greedy_blobification(&tree, 6).unwrap();
            if b.blob_count() < 2 {
                continue;
            }
            let mut codes = std::collections::BTreeSet::new();
            for _ in 0..20 {
                let reps: LeafSet = b
                    .blobs
                    .iter()
                    .map(|blob| {
                        let pick = rng.gen_range(0..blob.leaves.len());
                        *blob.leaves.iter().nth(pick).unwrap()
                    })
                    .collect();
                codes.insert(tree.restrict(&reps).unwrap().shape_code());
            }
            assert_eq!(codes.len(), 1, "stream={stream}");
            // And that shape is the scaffold's shape.
            assert_eq!(
                codes.into_iter().next().unwrap(),
                b.scaffold.tree.as_ref().unwrap().shape_code()
            );
        }
    }

    #[test]
    fn comb_scaffold_traces() {
        let caterpillar = t("(((((((1,2),3),4),5),6),7),8);");
        let v = greedy_comb_scaffold(&caterpillar, 2);
        assert_eq!(v.values, vec![2, 2, 2, 1]);
        assert_eq!(comb_leaf_count(&v, 2), (4, 3));

        let balanced = t("(((1,2),(3,4)),((5,6),(7,8)));");
        let v = greedy_comb_scaffold(&balanced, 2);
        assert_eq!(v.values, vec![3, 4]);
        assert_eq!(comb_leaf_count(&v, 2), (2, 2));

        let single = t("1;");
        let v = greedy_comb_scaffold(&single, 2);
        assert_eq!(v.values, vec![0]);
        assert_eq!(v.source_n, 1);
        assert_eq!(comb_leaf_count(&v, 2), (1, 0));
    }

    #[test]
    fn comb_vector_invariants_on_random_trees() {
        for stream in 0..200 {
            let tree = uniform_tree(100, RngSeed::new(51, stream)).unwrap();
            let k = 10;
            let v = greedy_comb_scaffold(&tree, k);
            assert_eq!(v.values.iter().sum::<usize>(), 99);
            for x in &v.values[..v.values.len() - 1] {
                assert!(*x >= k);
            }
        }
    }

    #[test]
    fn report_format_is_stable() {
        let tree = t("((((((1,2),3),4),5),6),7);");
        let b = greedy_blobification(&tree, 2).unwrap();
        let report = b.to_string();
        assert!(report.starts_with("k=2 n=7 cherry_blobs=1 edge_blobs=2 root_edge=true"));
        assert!(report.contains("blob 0 cherry leaves=1,2"));
        assert!(report.contains("leftover edge=root leaves=7"));
        assert!(report.contains("scaffold=((1,2),3);"));
    }
}
