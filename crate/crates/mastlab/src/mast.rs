//! Exact maximum agreement subtree computation.
//!
//! `mast` runs the classical rooted-MAST dynamic program over node pairs;
//! `mast_bruteforce` checks every leaf subset and exists to cross-examine the
//! DP on small inputs. Both return a witness agreement set.

use crate::error::{Error, Result};
use crate::tree::{LeafSet, Node, NodeId, Tree};

/// Largest `n` accepted by the exhaustive-subset operations.
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// The size of a maximum agreement subtree together with a witness set that
/// attains it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MastResult {
    pub size: usize,
    pub witness: LeafSet,
}

/// True iff `t1|_s` and `t2|_s` are the same labeled tree.
pub fn is_agreement_set(t1: &Tree, t2: &Tree, s: &LeafSet) -> Result<bool> {
    if s.is_empty() {
        return Err(Error::EmptyLeafSet);
    }
    let l1 = t1.labels();
    let l2 = t2.labels();
    for label in s {
        if !l1.contains(label) || !l2.contains(label) {
            return Err(Error::UnknownLabel(*label));
        }
    }
    Ok(t1.restrict(s)? == t2.restrict(s)?)
}

fn require_same_labels(t1: &Tree, t2: &Tree) -> Result<()> {
    if t1.labels() != t2.labels() {
        return Err(Error::LabelSetMismatch);
    }
    Ok(())
}

/// Exact MAST via the rooted dynamic program.
///
/// For internal pairs (u, v) with children (u1, u2) and (v1, v2):
/// M(u,v) = max of M(u1,v1)+M(u2,v2), M(u1,v2)+M(u2,v1),
///          M(u1,v), M(u2,v), M(u,v1), M(u,v2),
/// with M(a, b) = 1 on matching leaves. Ties break in the listed order so
/// witness recovery is deterministic.
pub fn mast(t1: &Tree, t2: &Tree) -> Result<MastResult> {
    require_same_labels(t1, t2)?;
    let n1 = t1.node_count();
    let n2 = t2.node_count();
    let order1 = t1.postorder();
    let order2 = t2.postorder();

    let mut table = vec![0u32; n1 * n2];
    let idx = |u: NodeId, v: NodeId| u * n2 + v;

    for &u in &order1 {
        for &v in &order2 {
            let value = match (t1.node(u), t2.node(v)) {
                (Node::Leaf(a), Node::Leaf(b)) => u32::from(a == b),
                (Node::Leaf(_), Node::Internal(v1, v2)) => {
                    table[idx(u, v1)].max(table[idx(u, v2)])
                }
                (Node::Internal(u1, u2), Node::Leaf(_)) => {
                    table[idx(u1, v)].max(table[idx(u2, v)])
                }
                (Node::Internal(u1, u2), Node::Internal(v1, v2)) => {
                    let straight = table[idx(u1, v1)] + table[idx(u2, v2)];
                    let crossed = table[idx(u1, v2)] + table[idx(u2, v1)];
                    straight
                        .max(crossed)
                        .max(table[idx(u1, v)])
                        .max(table[idx(u2, v)])
                        .max(table[idx(u, v1)])
                        .max(table[idx(u, v2)])
                }
            };
            table[idx(u, v)] = value;
        }
    }

    let mut witness = LeafSet::new();
    collect_witness(t1, t2, &table, n2, t1.root(), t2.root(), &mut witness);
    let size = table[idx(t1.root(), t2.root())] as usize;
    debug_assert_eq!(size, witness.len());
    Ok(MastResult { size, witness })
}

/// Follows the first case attaining the optimum at every pair.
fn collect_witness(
    t1: &Tree,
    t2: &Tree,
    table: &[u32],
    n2: usize,
    u: NodeId,
    v: NodeId,
    out: &mut LeafSet,
) {
    let idx = |u: NodeId, v: NodeId| u * n2 + v;
    let here = table[idx(u, v)];
    if here == 0 {
        return;
    }
    match (t1.node(u), t2.node(v)) {
        (Node::Leaf(a), Node::Leaf(_)) => {
            out.insert(a);
        }
        (Node::Leaf(_), Node::Internal(v1, v2)) => {
            if table[idx(u, v1)] == here {
                collect_witness(t1, t2, table, n2, u, v1, out);
            } else {
                collect_witness(t1, t2, table, n2, u, v2, out);
            }
        }
        (Node::Internal(u1, u2), Node::Leaf(_)) => {
            if table[idx(u1, v)] == here {
                collect_witness(t1, t2, table, n2, u1, v, out);
            } else {
                collect_witness(t1, t2, table, n2, u2, v, out);
            }
        }
        (Node::Internal(u1, u2), Node::Internal(v1, v2)) => {
            if table[idx(u1, v1)] + table[idx(u2, v2)] == here {
                collect_witness(t1, t2, table, n2, u1, v1, out);
                collect_witness(t1, t2, table, n2, u2, v2, out);
            } else if table[idx(u1, v2)] + table[idx(u2, v1)] == here {
                collect_witness(t1, t2, table, n2, u1, v2, out);
                collect_witness(t1, t2, table, n2, u2, v1, out);
            } else if table[idx(u1, v)] == here {
                collect_witness(t1, t2, table, n2, u1, v, out);
            } else if table[idx(u2, v)] == here {
                collect_witness(t1, t2, table, n2, u2, v, out);
            } else if table[idx(u, v1)] == here {
                collect_witness(t1, t2, table, n2, u, v1, out);
            } else {
                collect_witness(t1, t2, table, n2, u, v2, out);
            }
        }
    }
}

fn check_brute_force_size(t1: &Tree, t2: &Tree) -> Result<Vec<u32>> {
    require_same_labels(t1, t2)?;
    let n = t1.leaf_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    Ok(t1.labels().into_iter().collect())
}

/// Exhaustive MAST oracle: tries every leaf subset of size >= 2 in decreasing
/// size order (singletons and any 2-set trivially agree). Guarded to n <= 12.
pub fn mast_bruteforce(t1: &Tree, t2: &Tree) -> Result<MastResult> {
    let labels = check_brute_force_size(t1, t2)?;
    let n = labels.len();
    if n == 1 {
        return Ok(MastResult {
            size: 1,
            witness: LeafSet::from_iter(labels),
        });
    }
    for size in (2..=n).rev() {
        let mut best: Option<LeafSet> = None;
        for_each_subset(&labels, size, &mut |s| {
            if best.is_none() && is_agreement_set(t1, t2, s).unwrap() {
                best = Some(s.clone());
            }
        });
        if let Some(witness) = best {
            return Ok(MastResult { size, witness });
        }
    }
    unreachable!("every 2-subset is an agreement set");
}

/// The number of size-`s` agreement sets of `t1` and `t2`.
pub fn count_agreement_sets(t1: &Tree, t2: &Tree, s: usize) -> Result<u64> {
    let labels = check_brute_force_size(t1, t2)?;
    let n = labels.len();
    if s < 2 || s > n {
        return Err(Error::InvalidS { n, s });
    }
    let mut count = 0u64;
    for_each_subset(&labels, s, &mut |set| {
        if is_agreement_set(t1, t2, set).unwrap() {
            count += 1;
        }
    });
    Ok(count)
}

/// Visits every `size`-subset of `labels` in lexicographic index order.
fn for_each_subset(labels: &[u32], size: usize, f: &mut impl FnMut(&LeafSet)) {
    let n = labels.len();
    let mut picks: Vec<usize> = (0..size).collect();
    loop {
        let set: LeafSet = picks.iter().map(|&i| labels[i]).collect();
        f(&set);
        // Advance the combination.
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if picks[i] < n - (size - i) {
                picks[i] += 1;
                for j in i + 1..size {
                    picks[j] = picks[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_newick;
    use crate::tree::enumerate_trees;

    fn t(s: &str) -> Tree {
        parse_newick(s).unwrap()
    }

    #[test]
    fn agreement_set_examples() {
        let t1 = t("((1,2),3);");
        let t2 = t("((1,3),2);");
        // Any 2-subset of a common label set agrees.
        assert!(is_agreement_set(&t1, &t2, &LeafSet::from([1, 2])).unwrap());
        assert!(is_agreement_set(&t1, &t2, &LeafSet::from([2, 3])).unwrap());
        assert!(!is_agreement_set(&t1, &t2, &LeafSet::from([1, 2, 3])).unwrap());
        assert!(is_agreement_set(&t1, &t1, &t1.labels()).unwrap());
        assert!(is_agreement_set(&t1, &t2, &LeafSet::from([7])).is_err());
        assert!(is_agreement_set(&t1, &t2, &LeafSet::new()).is_err());
    }

    #[test]
    fn mast_identity() {
        let tree = t("(((1,2),(3,4)),5);");
        let r = mast(&tree, &tree).unwrap();
        assert_eq!(r.size, 5);
        assert_eq!(r.witness, tree.labels());
    }

    #[test]
    fn mast_examples_match_brute_force() {
        // Brute force over all 2^4 subsets shows no 3-subset agrees here.
        let t1 = t("((1,2),(3,4));");
        let t2 = t("((1,3),(2,4));");
        let bf = mast_bruteforce(&t1, &t2).unwrap();
        assert_eq!(bf.size, 2);
        let dp = mast(&t1, &t2).unwrap();
        assert_eq!(dp.size, 2);
        assert!(is_agreement_set(&t1, &t2, &dp.witness).unwrap());

        let t1 = t("((1,2),3);");
        let t2 = t("((2,3),1);");
        assert_eq!(mast_bruteforce(&t1, &t2).unwrap().size, 2);
        assert_eq!(mast(&t1, &t2).unwrap().size, 2);
    }

    #[test]
    fn mast_single_leaf() {
        let tree = t("7;");
        assert_eq!(mast(&tree, &tree).unwrap().size, 1);
        assert_eq!(mast_bruteforce(&tree, &tree).unwrap().size, 1);
    }

    #[test]
    fn mast_label_mismatch() {
        assert!(matches!(
            mast(&t("(1,2);"), &t("(1,3);")),
            Err(Error::LabelSetMismatch)
        ));
    }

    #[test]
    fn brute_force_guard() {
        let labels: Vec<String> = (1..=13).map(|i| i.to_string()).collect();
        let mut newick = labels[0].clone();
        for l in &labels[1..] {
            newick = format!("({newick},{l})");
        }
        let big = t(&format!("{newick};"));
        assert!(matches!(
            mast_bruteforce(&big, &big),
            Err(Error::SizeLimit { n: 13, .. })
        ));
    }

    #[test]
    fn count_agreement_sets_examples() {
        let t1 = t("((1,2),(3,4));");
        let t2 = t("((1,3),(2,4));");
        // All C(4,2) pairs agree on any pair of trees over [4].
        assert_eq!(count_agreement_sets(&t1, &t2, 2).unwrap(), 6);
        assert_eq!(count_agreement_sets(&t1, &t2, 3).unwrap(), 0);
        assert_eq!(count_agreement_sets(&t1, &t1, 4).unwrap(), 1);
        assert!(count_agreement_sets(&t1, &t2, 1).is_err());
        assert!(count_agreement_sets(&t1, &t2, 5).is_err());
    }

    #[test]
    fn oracle_equivalence_small_exhaustive() {
        for n in 2..=4 {
            let all: Vec<Tree> = enumerate_trees(n).unwrap().collect();
            for a in &all {
                for b in &all {
                    let dp = mast(a, b).unwrap();
                    let bf = mast_bruteforce(a, b).unwrap();
                    assert_eq!(dp.size, bf.size, "n={n} a={a} b={b}");
                    assert!(is_agreement_set(a, b, &dp.witness).unwrap());
                    assert!(dp.size >= 2);
                }
            }
        }
    }

    #[test]
    fn count_positive_iff_mast_at_least_s() {
        let all: Vec<Tree> = enumerate_trees(4).unwrap().collect();
        for a in &all {
            for b in &all {
                let size = mast(a, b).unwrap().size;
                for s in 2..=4 {
                    let count = count_agreement_sets(a, b, s).unwrap();
                    assert_eq!(count >= 1, size >= s);
                }
            }
        }
    }
}
