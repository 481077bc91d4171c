//! Random tree models: uniform on RB(n), Yule-Harding, and same-shape
//! (uniform leaf relabeling).
//!
//! All randomness flows through [`RngSeed`], a (master, stream) pair mapped
//! onto ChaCha8 (rand_chacha 0.3.1, pinned): the master seeds the cipher key
//! via `seed_from_u64` and the stream selects the ChaCha stream via
//! `set_stream`. A replicate's output is therefore a pure function of
//! (master, stream), independent of scheduling.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tree::{insert_leaf_above, Node, Tree};

/// A deterministic stream selector: `master` names the experiment-level seed,
/// `stream` the replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeed {
    pub master: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(master: u64, stream: u64) -> RngSeed {
        RngSeed { master, stream }
    }

    /// The ChaCha8 generator for this (master, stream) pair.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// The three paired-sampling models used by the experiments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeModel {
    /// Uniform over RB(n): every tree has probability 1/(2n-3)!!.
    Uniform { n: usize },
    /// Yule-Harding: uniform leaf splitting followed by a uniform random
    /// labeling.
    Yule { n: usize },
    /// T2 is a uniformly random leaf relabeling of T1, both relabelings of a
    /// fixed base tree.
    SameShape { base: Tree },
}

impl TreeModel {
    pub fn leaf_count(&self) -> usize {
        match self {
            TreeModel::Uniform { n } | TreeModel::Yule { n } => *n,
            TreeModel::SameShape { base } => base.leaf_count(),
        }
    }
}

/// Draws a uniformly random tree from RB(n).
///
/// Sequential leaf insertion: leaf i subdivides one of the 2i-3 positions
/// (every edge plus the slot above the root) chosen uniformly, which yields
/// each tree with probability exactly 1/(2n-3)!!.
pub fn uniform_tree(n: usize, seed: RngSeed) -> Result<Tree> {
    let mut rng = seed.rng();
    uniform_tree_with(n, &mut rng)
}

pub(crate) fn uniform_tree_with(n: usize, rng: &mut ChaCha8Rng) -> Result<Tree> {
    if n == 0 {
        return Err(Error::EmptyTree);
    }
    let mut nodes = vec![Node::Leaf(1)];
    for i in 2..=n {
        let position = rng.gen_range(0..nodes.len());
        insert_leaf_above(&mut nodes, position, i as u32);
    }
    Tree::from_parts(nodes, 0)
}

/// Draws a Yule-Harding tree: grow from a cherry by splitting a uniformly
/// random current leaf, then assign labels 1..n by a uniform permutation.
pub fn yule_tree(n: usize, seed: RngSeed) -> Result<Tree> {
    let mut rng = seed.rng();
    yule_tree_with(n, &mut rng)
}

pub(crate) fn yule_tree_with(n: usize, rng: &mut ChaCha8Rng) -> Result<Tree> {
    if n == 0 {
        return Err(Error::EmptyTree);
    }
    if n == 1 {
        return Ok(Tree::leaf(1));
    }
    // Grow with provisional labels; the slot trick keeps this O(n).
    let mut nodes = vec![Node::Leaf(1)];
    insert_leaf_above(&mut nodes, 0, 2);
    let mut leaves = vec![1usize, 2usize];
    for _ in 3..=n {
        let pick = rng.gen_range(0..leaves.len());
        let leaf_id = leaves[pick];
        insert_leaf_above(&mut nodes, leaf_id, 0);
        // insert_leaf_above moved the old leaf to id len-2 and put the new
        // leaf at len-1.
        leaves[pick] = nodes.len() - 2;
        leaves.push(nodes.len() - 1);
    }
    let mut labels: Vec<u32> = (1..=n as u32).collect();
    labels.shuffle(rng);
    let mut next = labels.into_iter();
    for node in nodes.iter_mut() {
        if let Node::Leaf(l) = node {
            *l = next.next().expect("one label per leaf");
        }
    }
    Tree::from_parts(nodes, 0)
}

/// Applies a uniformly random permutation of the base tree's own label set to
/// its leaves. The shape is untouched.
pub fn relabel_uniform(base: &Tree, seed: RngSeed) -> Tree {
    let mut rng = seed.rng();
    relabel_uniform_with(base, &mut rng)
}

pub(crate) fn relabel_uniform_with(base: &Tree, rng: &mut ChaCha8Rng) -> Tree {
    let labels: Vec<u32> = base.labels().into_iter().collect();
    let mut image = labels.clone();
    image.shuffle(rng);
    let map: std::collections::HashMap<u32, u32> =
        labels.into_iter().zip(image).collect();
    base.relabel(&map).expect("relabeling preserves validity")
}

/// Draws a pair of trees under `model`: two independent draws for
/// Uniform/Yule, two independent relabelings of the base for SameShape.
pub fn sample_pair(model: &TreeModel, seed: RngSeed) -> Result<(Tree, Tree)> {
    let mut rng = seed.rng();
    match model {
        TreeModel::Uniform { n } => Ok((
            uniform_tree_with(*n, &mut rng)?,
            uniform_tree_with(*n, &mut rng)?,
        )),
        TreeModel::Yule { n } => Ok((
            yule_tree_with(*n, &mut rng)?,
            yule_tree_with(*n, &mut rng)?,
        )),
        TreeModel::SameShape { base } => Ok((
            relabel_uniform_with(base, &mut rng),
            relabel_uniform_with(base, &mut rng),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::{parse_newick, write_newick};
    use crate::tree::enumerate_trees;
    use std::collections::HashMap;

    /// 0.999 quantile of chi-square with the given degrees of freedom;
    /// exceeding it rejects uniformity at p < 0.001.
    fn chi2_crit(df: usize) -> f64 {
        match df {
            2 => 13.8155,
            14 => 36.1233,
            _ => panic!("no critical value tabulated for df={df}"),
        }
    }

    fn chi2_stat(observed: &HashMap<String, u64>, expected: &[(String, f64)], total: u64) -> f64 {
        expected
            .iter()
            .map(|(key, p)| {
                let obs = *observed.get(key).unwrap_or(&0) as f64;
                let exp = p * total as f64;
                (obs - exp).powi(2) / exp
            })
            .sum()
    }

    #[test]
    fn uniform_n2_is_the_unique_tree() {
        for stream in 0..5 {
            let tree = uniform_tree(2, RngSeed::new(7, stream)).unwrap();
            assert_eq!(write_newick(&tree), "(1,2);");
        }
        assert!(uniform_tree(0, RngSeed::new(1, 0)).is_err());
    }

    #[test]
    fn uniform_n4_chi_square() {
        let keys: Vec<String> = enumerate_trees(4)
            .unwrap()
            .map(|t| write_newick(&t))
            .collect();
        assert_eq!(keys.len(), 15);
        let total = 150_000u64;
        let mut observed = HashMap::new();
        for stream in 0..total {
            let tree = uniform_tree(4, RngSeed::new(20260811, stream)).unwrap();
            *observed.entry(write_newick(&tree)).or_insert(0u64) += 1;
        }
        let expected: Vec<(String, f64)> =
            keys.into_iter().map(|k| (k, 1.0 / 15.0)).collect();
        let stat = chi2_stat(&observed, &expected, total);
        assert!(stat < chi2_crit(14), "chi2 = {stat}");
    }

    #[test]
    fn yule_n3_is_uniform() {
        let total = 30_000u64;
        let mut observed = HashMap::new();
        for stream in 0..total {
            let tree = yule_tree(3, RngSeed::new(3, stream)).unwrap();
            *observed.entry(write_newick(&tree)).or_insert(0u64) += 1;
        }
        let expected: Vec<(String, f64)> = enumerate_trees(3)
            .unwrap()
            .map(|t| (write_newick(&t), 1.0 / 3.0))
            .collect();
        let stat = chi2_stat(&observed, &expected, total);
        assert!(stat < chi2_crit(2), "chi2 = {stat}");
    }

    #[test]
    fn yule_n4_shape_split() {
        // Balanced shape with probability 1/3 (each labeled balanced tree
        // 1/9), caterpillar 2/3 (each labeled caterpillar 1/18).
        let balanced = parse_newick("((1,2),(3,4));").unwrap().shape_code();
        let total = 60_000u64;
        let mut observed = HashMap::new();
        for stream in 0..total {
            let tree = yule_tree(4, RngSeed::new(44, stream)).unwrap();
            *observed.entry(write_newick(&tree)).or_insert(0u64) += 1;
        }
        let expected: Vec<(String, f64)> = enumerate_trees(4)
            .unwrap()
            .map(|t| {
                let p = if t.shape_code() == balanced {
                    1.0 / 9.0
                } else {
                    1.0 / 18.0
                };
                (write_newick(&t), p)
            })
            .collect();
        let stat = chi2_stat(&observed, &expected, total);
        assert!(stat < chi2_crit(14), "chi2 = {stat}");
    }

    #[test]
    fn yule_single_leaf() {
        assert_eq!(yule_tree(1, RngSeed::new(0, 0)).unwrap(), Tree::leaf(1));
    }

    #[test]
    fn relabel_preserves_shape_and_distribution() {
        let base = parse_newick("((1,2),3);").unwrap();
        let total = 30_000u64;
        let mut observed = HashMap::new();
        for stream in 0..total {
            let tree = relabel_uniform(&base, RngSeed::new(5, stream));
            assert_eq!(tree.shape_code(), base.shape_code());
            *observed.entry(write_newick(&tree)).or_insert(0u64) += 1;
        }
        // The 6 permutations collapse 2-to-1 under the cherry automorphism.
        let expected: Vec<(String, f64)> = enumerate_trees(3)
            .unwrap()
            .map(|t| (write_newick(&t), 1.0 / 3.0))
            .collect();
        let stat = chi2_stat(&observed, &expected, total);
        assert!(stat < chi2_crit(2), "chi2 = {stat}");
    }

    #[test]
    fn relabel_shape_preserved_on_random_bases() {
        for stream in 0..1000 {
            let base = uniform_tree(20, RngSeed::new(9, stream)).unwrap();
            let relabeled = relabel_uniform(&base, RngSeed::new(10, stream));
            assert_eq!(relabeled.shape_code(), base.shape_code());
            assert_eq!(relabeled.labels(), base.labels());
        }
    }

    #[test]
    fn sample_pair_contracts() {
        let base = uniform_tree(12, RngSeed::new(1, 0)).unwrap();
        let model = TreeModel::SameShape { base };
        for stream in 0..50 {
            let (a, b) = sample_pair(&model, RngSeed::new(2, stream)).unwrap();
            assert_eq!(a.shape_code(), b.shape_code());
        }
        let (a1, b1) = sample_pair(&model, RngSeed::new(2, 7)).unwrap();
        let (a2, b2) = sample_pair(&model, RngSeed::new(2, 7)).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
    }

    #[test]
    fn determinism_across_calls() {
        let a = uniform_tree(50, RngSeed::new(99, 3)).unwrap();
        let b = uniform_tree(50, RngSeed::new(99, 3)).unwrap();
        assert_eq!(a, b);
        let c = uniform_tree(50, RngSeed::new(99, 4)).unwrap();
        assert_ne!(write_newick(&a), write_newick(&c));
    }
}
