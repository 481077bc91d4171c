//! Exact arithmetic for the tail bounds on MAST sizes.
//!
//! Everything that feeds an exact comparison runs in arbitrary-precision
//! rationals: double factorials overflow 64-bit integers near n = 17, and the
//! bound checks must not depend on float rounding. Floats appear only at the
//! reporting boundary.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use num::{BigInt, BigRational, BigUint, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::mast::mast;
use crate::newick::{parse_newick, write_newick};
use crate::random::TreeModel;
use crate::tree::{enumerate_trees, insert_leaf_above, Node, ShapeCode, Tree};

/// Largest n for which we enumerate distributions exhaustively.
pub const MARGINAL_LIMIT: usize = 8;

/// Strict lower gate for the upper-bound constant: lambda must exceed
/// e*sqrt(2) = 3.8442310...; the comparison uses this truncated value.
pub const LAMBDA_MIN: f64 = 3.844231;

/// 1 - 1/e, the birthday-bound floor, in double precision.
pub fn lemma_floor() -> f64 {
    1.0 - std::f64::consts::E.recip()
}

/// A rational strictly below 1/e (the first 32 decimal digits), used for
/// certified comparisons against the irrational constant.
fn e_inv_rational_lower() -> BigRational {
    let num: BigInt = "36787944117144232159552377016146".parse().unwrap();
    let den = BigInt::from(10u8).pow(32);
    BigRational::new(num, den)
}

/// The double factorial m!! with (-1)!! = 0!! = 1.
pub fn double_factorial(m: i64) -> Result<BigInt> {
    if m < -1 {
        return Err(Error::NegativeDoubleFactorial(m));
    }
    let mut value = BigInt::one();
    let mut i = m;
    while i > 1 {
        value *= i;
        i -= 2;
    }
    Ok(value)
}

/// Binomial coefficient with C(n, k) = 0 for k > n.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut value = BigUint::one();
    for i in 0..k {
        value = value * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    value
}

/// phi(n, s) = C(n, s) * 2^(s-1) / s!, the exchangeable tail envelope.
pub fn phi(n: usize, s: usize) -> Result<BigRational> {
    if s < 1 || s > n {
        return Err(Error::InvalidS { n, s });
    }
    let num = BigInt::from(binomial(n, s)) * BigInt::from(2u8).pow(s as u32 - 1);
    let mut factorial = BigInt::one();
    for i in 2..=s {
        factorial *= i as u64;
    }
    Ok(BigRational::new(num, factorial))
}

/// The exact distribution P_s of `T|_{1..s}` under an enumerable model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedMarginal {
    pub s: usize,
    /// Canonical Newick string of each tree on {1..s} with nonzero mass.
    pub probabilities: BTreeMap<String, BigRational>,
}

impl InducedMarginal {
    /// Exact total mass; 1 for every marginal produced here.
    pub fn total(&self) -> BigRational {
        self.probabilities.values().sum()
    }

    /// Exact sum of squared probabilities.
    pub fn sum_of_squares(&self) -> BigRational {
        self.probabilities.values().map(|p| p * p).sum()
    }
}

/// The exact single-tree law of an enumerable model as (tree, probability)
/// pairs over its support.
fn model_support(model: &TreeModel) -> Result<Vec<(Tree, BigRational)>> {
    let n = model.leaf_count();
    if n > MARGINAL_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: MARGINAL_LIMIT,
        });
    }
    match model {
        TreeModel::Uniform { n } => {
            let total = double_factorial(2 * *n as i64 - 3)?;
            let p = BigRational::new(BigInt::one(), total);
            Ok(enumerate_trees(*n)?.map(|t| (t, p.clone())).collect())
        }
        TreeModel::Yule { n } => {
            let shape_prob = yule_shape_distribution(*n);
            let mut by_shape: HashMap<ShapeCode, Vec<Tree>> = HashMap::new();
            for tree in enumerate_trees(*n)? {
                by_shape.entry(tree.shape_code()).or_default().push(tree);
            }
            let mut out = Vec::new();
            for (code, trees) in by_shape {
                let q = shape_prob
                    .get(&code)
                    .expect("every shape is reachable by growth");
                let count = BigInt::from(trees.len());
                let p = q / BigRational::from(count);
                for tree in trees {
                    out.push((tree, p.clone()));
                }
            }
            Ok(out)
        }
        TreeModel::SameShape { base } => {
            // Plain sum over all n! permutations; duplicates of the same
            // labeled tree are merged.
            let labels: Vec<u32> = base.labels().into_iter().collect();
            let mut factorial = BigInt::one();
            for i in 2..=labels.len() {
                factorial *= i as u64;
            }
            let weight = BigRational::new(BigInt::one(), factorial);
            let mut acc: BTreeMap<String, (Tree, BigRational)> = BTreeMap::new();
            for perm in labels.iter().copied().permutations(labels.len()) {
                let map: HashMap<u32, u32> =
                    labels.iter().copied().zip(perm).collect();
                let tree = base.relabel(&map)?;
                let key = write_newick(&tree);
                match acc.get_mut(&key) {
                    Some((_, p)) => *p += &weight,
                    None => {
                        acc.insert(key, (tree, weight.clone()));
                    }
                }
            }
            Ok(acc.into_values().collect())
        }
    }
}

/// Exact probability of every unlabeled shape under the Yule-Harding growth
/// process, by enumerating all (n-1)!/1 growth paths.
fn yule_shape_distribution(n: usize) -> BTreeMap<ShapeCode, BigRational> {
    let mut out: BTreeMap<ShapeCode, BigRational> = BTreeMap::new();
    if n == 1 {
        out.insert(Tree::leaf(1).shape_code(), BigRational::one());
        return out;
    }
    let mut path_count = BigInt::one();
    for m in 2..n {
        path_count *= m as u64;
    }
    let path_prob = BigRational::new(BigInt::one(), path_count);

    // DFS over leaf-split choices; provisional labels keep leaves distinct.
    fn grow(
        nodes: &Vec<Node>,
        leaves: &Vec<usize>,
        next_label: u32,
        n: usize,
        path_prob: &BigRational,
        out: &mut BTreeMap<ShapeCode, BigRational>,
    ) {
        if leaves.len() == n {
            let tree = Tree::from_parts(nodes.clone(), 0).expect("valid growth state");
            *out.entry(tree.shape_code()).or_insert_with(BigRational::zero) +=
                path_prob;
            return;
        }
        for pick in 0..leaves.len() {
            let mut nodes2 = nodes.clone();
            let mut leaves2 = leaves.clone();
            insert_leaf_above(&mut nodes2, leaves2[pick], next_label);
            leaves2[pick] = nodes2.len() - 2;
            leaves2.push(nodes2.len() - 1);
            grow(&nodes2, &leaves2, next_label + 1, n, path_prob, out);
        }
    }

    let mut nodes = vec![Node::Leaf(1)];
    insert_leaf_above(&mut nodes, 0, 2);
    let leaves = vec![1usize, 2usize];
    grow(&nodes, &leaves, 3, n, &path_prob, &mut out);
    out
}

/// The exact marginal distribution of `restrict(T, {1..s})` under `model`.
pub fn induced_marginal(model: &TreeModel, s: usize) -> Result<InducedMarginal> {
    let n = model.leaf_count();
    if s < 1 || s >= n {
        return Err(Error::InvalidS { n, s });
    }
    let window: crate::tree::LeafSet = (1..=s as u32).collect();
    let mut probabilities: BTreeMap<String, BigRational> = BTreeMap::new();
    for (tree, p) in model_support(model)? {
        let key = write_newick(&tree.restrict(&window)?);
        *probabilities.entry(key).or_insert_with(BigRational::zero) += p;
    }
    Ok(InducedMarginal { s, probabilities })
}

/// True iff trees of equal shape carry equal probability (exactly).
pub fn check_exchangeable(m: &InducedMarginal) -> bool {
    let mut by_shape: HashMap<ShapeCode, BigRational> = HashMap::new();
    for (key, p) in &m.probabilities {
        let tree = parse_newick(key).expect("marginal keys are canonical newick");
        match by_shape.entry(tree.shape_code()) {
            std::collections::hash_map::Entry::Occupied(e) => {
                if e.get() != p {
                    return false;
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(p.clone());
            }
        }
    }
    true
}

/// psi(n, s) = C(n, s) * sum of squared marginal probabilities.
pub fn psi(n: usize, m: &InducedMarginal) -> Result<BigRational> {
    if m.s > n {
        return Err(Error::SubsetTooLarge { n, s: m.s });
    }
    Ok(BigRational::from(BigInt::from(binomial(n, m.s))) * m.sum_of_squares())
}

/// Checks sum P_s^2 <= 2^(s-1)/s! exactly. Errors if the marginal is not
/// exchangeable, since the inequality's hypothesis would fail.
pub fn check_prop42(m: &InducedMarginal) -> Result<bool> {
    if !check_exchangeable(m) {
        return Err(Error::NotExchangeable);
    }
    let mut factorial = BigInt::one();
    for i in 2..=m.s {
        factorial *= i as u64;
    }
    let bound = BigRational::new(BigInt::from(2u8).pow(m.s as u32 - 1), factorial);
    Ok(m.sum_of_squares() <= bound)
}

/// Exact disjointness probability C(n-s1, s2)/C(n, s2) for uniformly random
/// subsets of sizes s1, s2, plus the 1 - 1/e floor on the intersection
/// probability.
pub fn birthday_bound(n: usize, s1: usize, s2: usize) -> Result<(BigRational, f64)> {
    if s1 > n || s2 > n {
        return Err(Error::SubsetTooLarge { n, s: s1.max(s2) });
    }
    let disjoint = BigRational::new(
        BigInt::from(binomial(n - s1, s2)),
        BigInt::from(binomial(n, s2)),
    );
    Ok((disjoint, lemma_floor()))
}

/// Certified sweep of the birthday bound: returns every (n, s1, s2) with
/// n <= max_n and s1, s2 >= ceil(sqrt(n)) whose intersection probability
/// fails to reach 1 - 1/e. Exact integer arithmetic throughout.
pub fn birthday_violations(max_n: usize) -> Vec<(usize, usize, usize)> {
    let e_inv = e_inv_rational_lower();
    let (p, q) = (
        e_inv.numer().to_biguint().unwrap(),
        e_inv.denom().to_biguint().unwrap(),
    );
    // Pascal's triangle up to max_n.
    let mut pascal: Vec<Vec<BigUint>> = Vec::with_capacity(max_n + 1);
    pascal.push(vec![BigUint::one()]);
    for m in 1..=max_n {
        let prev = &pascal[m - 1];
        let mut row = Vec::with_capacity(m + 1);
        row.push(BigUint::one());
        for j in 1..m {
            row.push(&prev[j - 1] + &prev[j]);
        }
        row.push(BigUint::one());
        pascal.push(row);
    }
    let choose = |m: usize, j: usize| -> BigUint {
        if j > m {
            BigUint::zero()
        } else {
            pascal[m][j].clone()
        }
    };

    let mut violations = Vec::new();
    for n in 1..=max_n {
        let m = (n as f64).sqrt().ceil() as usize;
        for s1 in m..=n {
            for s2 in m..=n {
                // disjoint <= e^{-1}  <=>  C(n-s1,s2) * q <= p * C(n,s2)
                let lhs = choose(n - s1, s2) * &q;
                let rhs = &p * choose(n, s2);
                if lhs > rhs {
                    violations.push((n, s1, s2));
                }
            }
        }
    }
    violations
}

/// Theorem lower bound sqrt(n) * (1 - 1/e) / 4.
pub fn mast_lower_bound(n: usize) -> f64 {
    (n as f64).sqrt() * lemma_floor() / 4.0
}

/// Theorem upper bound lambda * sqrt(n); lambda must exceed e*sqrt(2).
pub fn mast_upper_bound(n: usize, lambda: f64) -> Result<f64> {
    if !(lambda > LAMBDA_MIN) {
        return Err(Error::LambdaTooSmall(lambda));
    }
    Ok(lambda * (n as f64).sqrt())
}

/// Smallest s in [1, n] with phi(n, s) < eps, or None.
pub fn min_s_for_tail(n: usize, eps: f64) -> Option<usize> {
    let eps = BigRational::from_float(eps)?;
    (1..=n).find(|&s| phi(n, s).expect("s in range") < eps)
}

/// Exact distribution of MAST(T1, T2) for an iid pair from `model`.
///
/// The sum over ordered pairs collapses by exchangeability: the inner
/// distribution of MAST(t1, .) depends on t1 only through its shape, so one
/// representative per shape suffices.
pub fn exhaustive_mast_distribution(
    model: &TreeModel,
) -> Result<BTreeMap<usize, BigRational>> {
    let mut dist: BTreeMap<usize, BigRational> = BTreeMap::new();
    match model {
        TreeModel::SameShape { base } => {
            let n = base.leaf_count();
            if n > MARGINAL_LIMIT {
                return Err(Error::SizeLimit {
                    n,
                    limit: MARGINAL_LIMIT,
                });
            }
            // MAST(s1(B), s2(B)) ~ MAST(B, t(B)) for a single uniform t.
            let labels: Vec<u32> = base.labels().into_iter().collect();
            let mut factorial = BigInt::one();
            for i in 2..=labels.len() {
                factorial *= i as u64;
            }
            let weight = BigRational::new(BigInt::one(), factorial);
            for perm in labels.iter().copied().permutations(labels.len()) {
                let map: HashMap<u32, u32> =
                    labels.iter().copied().zip(perm).collect();
                let size = mast(base, &base.relabel(&map)?)?.size;
                *dist.entry(size).or_insert_with(BigRational::zero) += &weight;
            }
        }
        TreeModel::Uniform { .. } | TreeModel::Yule { .. } => {
            let support = model_support(model)?;
            let mut shape_weight: BTreeMap<ShapeCode, (Tree, BigRational)> =
                BTreeMap::new();
            for (tree, p) in &support {
                match shape_weight.entry(tree.shape_code()) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        e.get_mut().1 += p;
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert((tree.clone(), p.clone()));
                    }
                }
            }
            for (rep, w) in shape_weight.values() {
                for (t2, p) in &support {
                    let size = mast(rep, t2)?.size;
                    *dist.entry(size).or_insert_with(BigRational::zero) += w * p;
                }
            }
        }
    }
    Ok(dist)
}

/// Exact P[MAST(T1, T2) >= s] for an iid pair from `model`.
pub fn exhaustive_mast_tail(model: &TreeModel, s: usize) -> Result<BigRational> {
    let n = model.leaf_count();
    if s > n {
        return Err(Error::SubsetTooLarge { n, s });
    }
    let dist = exhaustive_mast_distribution(model)?;
    Ok(dist
        .iter()
        .filter(|(size, _)| **size >= s)
        .map(|(_, p)| p)
        .sum())
}

/// One line of the exhaustive small-n sweep: a model at one leaf count, with
/// every violation found across s = 1..n.
#[derive(Debug, Clone)]
pub struct SweepLine {
    pub label: String,
    pub violations: Vec<String>,
}

/// Exhaustive verification sweep over every model at n = 2..=max_n: uniform,
/// Yule-Harding, and same-shape for one base per shape of RB(n). For every
/// s < n it checks, in exact rational arithmetic, that
///
/// 1. the induced marginal sums to 1,
/// 2. the marginal is exchangeable,
/// 3. sum P_s^2 <= 2^(s-1)/s!,
/// 4. P[MAST >= s] <= psi(n, s),
/// 5. psi(n, s) <= phi(n, s).
pub fn exact_sweep(max_n: usize) -> Result<Vec<SweepLine>> {
    let mut models: Vec<(String, TreeModel)> = Vec::new();
    for n in 2..=max_n {
        models.push((format!("n={n} uniform"), TreeModel::Uniform { n }));
        models.push((format!("n={n} yule"), TreeModel::Yule { n }));
        let mut seen_shapes = std::collections::BTreeSet::new();
        for base in enumerate_trees(n)? {
            if seen_shapes.insert(base.shape_code()) {
                models.push((
                    format!("n={n} same-shape base {base}"),
                    TreeModel::SameShape { base },
                ));
            }
        }
    }
    let lines = crate::parallel::par_map_indexed(models.len(), |i| {
        let (label, model) = &models[i];
        let mut violations = Vec::new();
        let n = model.leaf_count();
        match exhaustive_mast_distribution(model) {
            Ok(dist) => {
                for s in 1..n {
                    match induced_marginal(model, s) {
                        Ok(m) => {
                            if m.total() != BigRational::one() {
                                violations.push(format!("s={s}: marginal mass != 1"));
                            }
                            if !check_exchangeable(&m) {
                                violations.push(format!("s={s}: not exchangeable"));
                            }
                            match check_prop42(&m) {
                                Ok(true) => {}
                                Ok(false) => violations
                                    .push(format!("s={s}: sum P^2 above 2^(s-1)/s!")),
                                Err(e) => violations.push(format!("s={s}: {e}")),
                            }
                            let tail: BigRational = dist
                                .iter()
                                .filter(|(size, _)| **size >= s)
                                .map(|(_, p)| p)
                                .sum();
                            let psi_val = match psi(n, &m) {
                                Ok(v) => v,
                                Err(e) => {
                                    violations.push(format!("s={s}: {e}"));
                                    continue;
                                }
                            };
                            if tail > psi_val {
                                violations.push(format!("s={s}: tail above psi"));
                            }
                            let phi_val = phi(n, s).expect("s in range");
                            if psi_val > phi_val {
                                violations.push(format!("s={s}: psi above phi"));
                            }
                        }
                        Err(e) => violations.push(format!("s={s}: {e}")),
                    }
                }
            }
            Err(e) => violations.push(format!("mast distribution: {e}")),
        }
        SweepLine {
            label: label.clone(),
            violations,
        }
    });
    Ok(lines)
}

/// One row of the bound report behind `mastlab bounds`.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub n: usize,
    pub s: usize,
    pub phi: f64,
    /// Exact psi under Uniform(n); only available when n is small enough to
    /// enumerate.
    pub psi: Option<f64>,
    pub lower: f64,
    pub upper_lambda: f64,
}

/// Assembles the report for (n, s, lambda).
pub fn bound_report(n: usize, s: usize, lambda: f64) -> Result<BoundReport> {
    let phi_val = phi(n, s)?;
    let upper = mast_upper_bound(n, lambda)?;
    let psi_val = if n <= MARGINAL_LIMIT && s < n {
        let marginal = induced_marginal(&TreeModel::Uniform { n }, s)?;
        Some(psi(n, &marginal)?.to_f64().unwrap_or(f64::NAN))
    } else {
        None
    };
    Ok(BoundReport {
        n,
        s,
        phi: phi_val.to_f64().unwrap_or(f64::INFINITY),
        psi: psi_val,
        lower: mast_lower_bound(n),
        upper_lambda: upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial(-1).unwrap(), BigInt::one());
        assert_eq!(double_factorial(0).unwrap(), BigInt::one());
        assert_eq!(double_factorial(1).unwrap(), BigInt::one());
        assert_eq!(double_factorial(7).unwrap(), BigInt::from(105));
        assert_eq!(double_factorial(13).unwrap(), BigInt::from(135135));
        assert!(double_factorial(-2).is_err());
    }

    #[test]
    fn phi_values() {
        for n in 1..20 {
            assert_eq!(phi(n, 1).unwrap(), BigRational::from(BigInt::from(n)));
        }
        assert_eq!(phi(4, 4).unwrap(), rational(1, 3));
        // C(16,4) * 2^3 / 4! = 1820 * 8 / 24
        assert_eq!(phi(16, 4).unwrap(), rational(1820 * 8, 24));
        assert!((phi(16, 4).unwrap().to_f64().unwrap() - 606.6667).abs() < 1e-3);
        assert!(phi(4, 0).is_err());
        assert!(phi(4, 5).is_err());
    }

    #[test]
    fn uniform_marginal_is_uniform() {
        let m = induced_marginal(&TreeModel::Uniform { n: 4 }, 3).unwrap();
        assert_eq!(m.probabilities.len(), 3);
        for p in m.probabilities.values() {
            assert_eq!(*p, rational(1, 3));
        }
        assert_eq!(m.total(), BigRational::one());
    }

    #[test]
    fn same_shape_marginal_balanced4() {
        let base = parse_newick("((1,2),(3,4));").unwrap();
        let m = induced_marginal(&TreeModel::SameShape { base }, 3).unwrap();
        assert_eq!(m.probabilities.len(), 3);
        for p in m.probabilities.values() {
            assert_eq!(*p, rational(1, 3));
        }
    }

    #[test]
    fn marginal_at_s1_is_point_mass() {
        for model in [
            TreeModel::Uniform { n: 4 },
            TreeModel::Yule { n: 4 },
            TreeModel::SameShape {
                base: parse_newick("((1,2),(3,4));").unwrap(),
            },
        ] {
            let m = induced_marginal(&model, 1).unwrap();
            assert_eq!(m.probabilities.len(), 1);
            assert_eq!(m.total(), BigRational::one());
        }
    }

    #[test]
    fn yule_marginal_exact() {
        // The Yule law is exchangeable and sums to one; its marginal at s=3
        // must be uniform because RB(3) has a single shape.
        let m = induced_marginal(&TreeModel::Yule { n: 4 }, 3).unwrap();
        assert_eq!(m.total(), BigRational::one());
        for p in m.probabilities.values() {
            assert_eq!(*p, rational(1, 3));
        }
    }

    #[test]
    fn exchangeability_checks() {
        let m = induced_marginal(&TreeModel::Uniform { n: 5 }, 3).unwrap();
        assert!(check_exchangeable(&m));

        for base in enumerate_trees(6).unwrap().take(40) {
            for s in 2..=5 {
                let m =
                    induced_marginal(&TreeModel::SameShape { base: base.clone() }, s)
                        .unwrap();
                assert!(check_exchangeable(&m));
            }
        }

        // A point mass on one labeled tree of RB(3) is not exchangeable.
        let point = InducedMarginal {
            s: 3,
            probabilities: BTreeMap::from([(
                "((1,2),3);".to_string(),
                BigRational::one(),
            )]),
        };
        assert!(!check_exchangeable(&point));
        assert!(matches!(
            check_prop42(&point),
            Err(Error::NotExchangeable)
        ));
    }

    #[test]
    fn psi_values() {
        let m = induced_marginal(&TreeModel::Uniform { n: 4 }, 3).unwrap();
        assert_eq!(psi(4, &m).unwrap(), rational(4, 3));

        // Point mass: psi = C(4,3) * 1 = 4.
        let point = InducedMarginal {
            s: 3,
            probabilities: BTreeMap::from([(
                "((1,2),3);".to_string(),
                BigRational::one(),
            )]),
        };
        assert_eq!(psi(4, &point).unwrap(), rational(4, 1));

        // Uniform P_s on RB(4) from Uniform(6): psi_{6,4} = C(6,4)/5!! = 1.
        let m = induced_marginal(&TreeModel::Uniform { n: 6 }, 4).unwrap();
        assert_eq!(psi(6, &m).unwrap(), BigRational::one());
    }

    #[test]
    fn prop42_cases() {
        let m = induced_marginal(&TreeModel::Uniform { n: 5 }, 4).unwrap();
        // Uniform on RB(4): 1/15 <= 8/24.
        assert_eq!(m.sum_of_squares(), rational(1, 15));
        assert!(check_prop42(&m).unwrap());

        // Boundary: uniform on RB(2) gives sum 1 against bound 2/2 = 1.
        let m = induced_marginal(&TreeModel::Uniform { n: 3 }, 2).unwrap();
        assert_eq!(m.sum_of_squares(), BigRational::one());
        assert!(check_prop42(&m).unwrap());
    }

    #[test]
    fn birthday_examples() {
        let (disjoint, floor) = birthday_bound(4, 2, 2).unwrap();
        assert_eq!(disjoint, rational(1, 6));
        assert!((floor - 0.6321205588285577).abs() < 1e-15);

        let (disjoint, _) = birthday_bound(9, 3, 3).unwrap();
        assert_eq!(disjoint, rational(5, 21));
        assert!(1.0 - disjoint.to_f64().unwrap() >= 0.6321);

        let (disjoint, _) = birthday_bound(5, 3, 3).unwrap();
        assert_eq!(disjoint, BigRational::zero());

        assert!(birthday_bound(4, 5, 1).is_err());
    }

    #[test]
    fn birthday_sweep_small() {
        assert!(birthday_violations(60).is_empty());
    }

    #[test]
    fn theorem_constants() {
        assert!((mast_lower_bound(100) - 1.5803).abs() < 1e-4);
        assert!((mast_lower_bound(64) - 1.2642).abs() < 1e-4);
        assert!((mast_lower_bound(1) - 0.1580).abs() < 1e-4);

        assert_eq!(mast_upper_bound(1024, 4.0).unwrap(), 128.0);
        assert_eq!(mast_upper_bound(256, 4.0).unwrap(), 64.0);
        assert!(matches!(
            mast_upper_bound(100, 3.8),
            Err(Error::LambdaTooSmall(_))
        ));
    }

    #[test]
    fn min_s_for_tail_values() {
        assert_eq!(min_s_for_tail(16, 0.01), Some(12));
        // eps above phi(n,1) = n picks s = 1 immediately.
        assert_eq!(min_s_for_tail(5, 10.0), Some(1));
        // Monotone in eps.
        let a = min_s_for_tail(16, 1e-3).unwrap();
        let b = min_s_for_tail(16, 1e-2).unwrap();
        assert!(a >= b);
        assert_eq!(min_s_for_tail(3, 1e-9), None);
    }

    #[test]
    fn exhaustive_tail_examples() {
        // Caterpillar on 5 leaves: P[relabeling equals base] = 2/120.
        let base = parse_newick("((((1,2),3),4),5);").unwrap();
        let model = TreeModel::SameShape { base };
        assert_eq!(exhaustive_mast_tail(&model, 5).unwrap(), rational(1, 60));
        assert_eq!(exhaustive_mast_tail(&model, 2).unwrap(), BigRational::one());

        // Tail is bounded by psi for the balanced base at every s.
        let base = parse_newick("((1,2),(3,4));").unwrap();
        let model = TreeModel::SameShape { base };
        for s in 2..4 {
            let tail = exhaustive_mast_tail(&model, s).unwrap();
            let m = induced_marginal(&model, s).unwrap();
            assert!(tail <= psi(4, &m).unwrap(), "s={s}");
        }
    }

    #[test]
    fn tail_distribution_total_mass() {
        for model in [
            TreeModel::Uniform { n: 4 },
            TreeModel::Yule { n: 4 },
            TreeModel::SameShape {
                base: parse_newick("(((1,2),3),4);").unwrap(),
            },
        ] {
            let dist = exhaustive_mast_distribution(&model).unwrap();
            let total: BigRational = dist.values().sum();
            assert_eq!(total, BigRational::one());
        }
    }

    #[test]
    fn report_includes_psi_when_enumerable() {
        let r = bound_report(6, 3, 4.0).unwrap();
        assert!(r.psi.is_some());
        assert!(r.phi >= r.psi.unwrap());
        let r = bound_report(100, 10, 4.0).unwrap();
        assert!(r.psi.is_none());
        assert!(r.upper_lambda == 40.0);
    }

    #[test]
    fn marginal_rejects_out_of_range_s() {
        assert!(induced_marginal(&TreeModel::Uniform { n: 4 }, 4).is_err());
        assert!(induced_marginal(&TreeModel::Uniform { n: 4 }, 0).is_err());
    }
}
