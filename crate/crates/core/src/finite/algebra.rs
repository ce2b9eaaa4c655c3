//! Group rings of finite subgroups of `GL_2(Z/p^n)`: powers of augmentation
//! ideals and co-invariants.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::group::GL2ModElement;
use crate::error::{Error, Result};
use crate::linalg::{identity, rank_exact, rank_mod_p, smith_form, transpose, FpEchelon, IntMatrix};

/// Largest group-ring dimension handled by the ideal-power computations.
pub const ALGEBRA_GUARD: usize = 10_000;

/// A finite group given by its (sorted) elements, with index lookup.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    elements: Vec<GL2ModElement>,
    index: HashMap<GL2ModElement, usize>,
    /// Multiplication table `table[i * n + j] = index(g_i g_j)` for small
    /// groups.
    table: Option<Vec<u32>>,
}

const TABLE_LIMIT: usize = 1024;

impl FiniteGroup {
    pub fn new(mut elements: Vec<GL2ModElement>) -> Result<Self> {
        elements.sort();
        elements.dedup();
        if elements.is_empty() {
            return Err(Error::InvalidInput("empty group".into()));
        }
        let index: HashMap<_, _> = elements.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        let n = elements.len();
        let lookup = |g: &GL2ModElement, h: &GL2ModElement| {
            index.get(&g.mul(h)).copied().ok_or_else(|| Error::InvalidInput(format!("element set not closed: {g} * {h}")))
        };
        let table = if n <= TABLE_LIMIT {
            let mut t = Vec::with_capacity(n * n);
            for g in &elements {
                for h in &elements {
                    t.push(lookup(g, h)? as u32);
                }
            }
            Some(t)
        } else {
            for h in &elements {
                lookup(&elements[0], h)?;
            }
            None
        };
        Ok(Self { elements, index, table })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[GL2ModElement] {
        &self.elements
    }

    pub fn index_of(&self, g: &GL2ModElement) -> Result<usize> {
        self.index.get(g).copied().ok_or_else(|| Error::InvalidInput(format!("{g} is not in the group")))
    }

    /// Permutation `i -> index(g_i * h)`.
    fn right_mul(&self, h: &GL2ModElement) -> Result<Vec<usize>> {
        self.elements.iter().map(|g| self.index_of(&g.mul(h))).collect()
    }

    /// Permutation `i -> index(h * g_i)`.
    fn left_mul(&self, h: &GL2ModElement) -> Result<Vec<usize>> {
        self.elements.iter().map(|g| self.index_of(&h.mul(g))).collect()
    }

    pub fn contains_all(&self, subset: &[GL2ModElement]) -> bool {
        subset.iter().all(|h| self.index.contains_key(h))
    }

    /// Exact product in `Z[G]`.
    pub fn multiply(&self, a: &[i128], b: &[i128]) -> Result<Vec<i128>> {
        let mut out = vec![0i128; self.order()];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj != 0 {
                    let k = match &self.table {
                        Some(t) => t[i * self.order() + j] as usize,
                        None => self.index_of(&self.elements[i].mul(&self.elements[j]))?,
                    };
                    out[k] += ai * bj;
                }
            }
        }
        Ok(out)
    }

    /// The group element `g` as a basis vector.
    pub fn basis_vector(&self, g: &GL2ModElement) -> Result<Vec<i128>> {
        let mut v = vec![0; self.order()];
        v[self.index_of(g)?] = 1;
        Ok(v)
    }
}

/// The augmentation ideal `I_H` of a subgroup `H`, generated by `h - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealData {
    pub subgroup_generators: Vec<GL2ModElement>,
}

impl IdealData {
    pub fn new(subgroup_generators: Vec<GL2ModElement>) -> Self {
        Self { subgroup_generators }
    }

    /// The ring generators `h - 1` as vectors in `Z[G]` (identity omitted).
    pub fn ring_generators(&self, group: &FiniteGroup) -> Result<Vec<Vec<i128>>> {
        let mut out = Vec::new();
        for h in self.subgroup_generators.iter().filter(|h| !h.is_identity()) {
            let mut v = group.basis_vector(h)?;
            let id = group.index_of(&GL2ModElement::identity(h.p(), h.level())?)?;
            v[id] -= 1;
            out.push(v);
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NilpotencyMode {
    /// Least `m` with `I^m = 0` in `F_p[G]`.
    CharP,
    /// Least `m` with every product of `m` elements `h - 1` in `p Z_p[G]`.
    PiContainment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NilpotencyReport {
    pub mode: NilpotencyMode,
    pub group_order: usize,
    pub subgroup_order: usize,
    pub index: usize,
    /// `dim I^k` over `F_p` for `k = 1, ..., index` (char-p mode), or the
    /// number of distinct products of length `k` (containment mode).
    pub sizes: Vec<usize>,
    /// Recomputed through full products of ideal bases (char-p mode) or the
    /// char-p index (containment mode).
    pub independently_verified: bool,
    pub warnings: Vec<String>,
}

fn reduce_mod(v: &[i128], p: u64) -> Vec<u32> {
    v.iter().map(|&x| x.rem_euclid(p as i128) as u32).collect()
}

fn is_p_power(n: usize, p: u64) -> bool {
    let mut n = n as u64;
    while n > 1 && n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

fn is_normal(group: &FiniteGroup, subgroup: &[GL2ModElement]) -> bool {
    group
        .elements()
        .iter()
        .all(|g| subgroup.iter().all(|h| subgroup.binary_search(&g.mul(h).mul(&g.inv())).is_ok()))
}

/// `I^m` inside `F_p[G]` (char-p mode) or the containment index of the
/// products `prod (h_i - 1)` (pi-containment mode). `H` must be normal, so
/// that `I_H` is a two-sided ideal and `I^m = I^(m-1) (h - 1)` summed over
/// the generators `h`.
pub fn ideal_power_nilpotency(group: &FiniteGroup, ideal: &IdealData, mode: NilpotencyMode) -> Result<NilpotencyReport> {
    let p = group.elements()[0].p();
    if group.order() > ALGEBRA_GUARD {
        return Err(Error::SizeGuard(format!("group algebra of dimension {} exceeds {ALGEBRA_GUARD}", group.order())));
    }
    if !group.contains_all(&ideal.subgroup_generators) {
        return Err(Error::InvalidInput("subgroup generators are not in the ambient group".into()));
    }
    let id = GL2ModElement::identity(p, group.elements()[0].level())?;
    let mut gens = ideal.subgroup_generators.clone();
    gens.push(id);
    let subgroup = super::group::generate_subgroup(&gens, group.order())?;
    if !is_normal(group, &subgroup) {
        return Err(Error::InvalidInput("H is not normal in the ambient group".into()));
    }
    let mut warnings = Vec::new();
    if !is_p_power(subgroup.len(), p) {
        warnings.push(format!("H has order {}, not a power of p = {p}; I_H need not be nilpotent", subgroup.len()));
    }
    match mode {
        NilpotencyMode::CharP => char_p_index(group, ideal, subgroup.len(), warnings),
        NilpotencyMode::PiContainment => {
            let mut report = pi_containment_index(group, &subgroup, warnings)?;
            let check = char_p_index(group, ideal, subgroup.len(), Vec::new())?;
            report.independently_verified = check.index == report.index;
            Ok(report)
        }
    }
}

fn char_p_index(group: &FiniteGroup, ideal: &IdealData, subgroup_order: usize, warnings: Vec<String>) -> Result<NilpotencyReport> {
    let p = group.elements()[0].p();
    let n = group.order();
    let gens = ideal.ring_generators(group)?;
    let report = |index, sizes, verified, warnings| NilpotencyReport {
        mode: NilpotencyMode::CharP,
        group_order: n,
        subgroup_order,
        index,
        sizes,
        independently_verified: verified,
        warnings,
    };
    if gens.is_empty() {
        return Ok(report(1, vec![0], true, warnings));
    }
    // I = span{ g (h - 1) }.
    let mut first = FpEchelon::new(p, n);
    for g in group.elements() {
        let left = group.basis_vector(g)?;
        for h in &gens {
            first.insert(reduce_mod(&group.multiply(&left, h)?, p));
        }
    }
    let right_perms: Vec<Vec<usize>> = ideal
        .subgroup_generators
        .iter()
        .filter(|h| !h.is_identity())
        .map(|h| group.right_mul(h))
        .collect::<Result<_>>()?;
    let mut sizes = vec![first.rank()];
    let mut current = first.clone();
    let mut m = 1;
    while current.rank() > 0 {
        if m > n + 1 {
            return Ok(report(0, sizes, false, {
                let mut w = warnings;
                w.push("ideal powers did not vanish; I_H is not nilpotent".into());
                w
            }));
        }
        let mut next = FpEchelon::new(p, n);
        for a in current.basis() {
            for perm in &right_perms {
                // a (h - 1) = a h - a
                let mut v = vec![0u32; n];
                for (i, &ai) in a.iter().enumerate() {
                    v[perm[i]] = ai;
                }
                for (x, &ai) in v.iter_mut().zip(a) {
                    *x = ((*x as u64 + p - ai as u64) % p) as u32;
                }
                next.insert(v);
            }
        }
        m += 1;
        sizes.push(next.rank());
        current = next;
    }
    let verified = verify_by_full_products(group, &first, m, p, &sizes)?;
    sizes.pop();
    Ok(report(m, sizes, verified, warnings))
}

/// Recomputes `I^k = I^(k-1) I` from products of full bases and checks the
/// dimensions, in particular `I^(m-1) != 0 = I^m`.
fn verify_by_full_products(group: &FiniteGroup, first: &FpEchelon, m: usize, p: u64, sizes: &[usize]) -> Result<bool> {
    let n = group.order();
    let to_int = |v: &[u32]| -> Vec<i128> { v.iter().map(|&x| x as i128).collect() };
    let base: Vec<Vec<i128>> = first.basis().iter().map(|v| to_int(v)).collect();
    let mut current: Vec<Vec<i128>> = base.clone();
    for (k, &expected) in sizes.iter().enumerate().skip(1) {
        let mut rows: IntMatrix = Vec::new();
        for a in &current {
            for b in &base {
                rows.push(group.multiply(a, b)?.into_iter().map(|x| x.rem_euclid(p as i128)).collect());
            }
        }
        if rank_mod_p(&rows, p) != expected {
            return Ok(false);
        }
        let mut ech = FpEchelon::new(p, n);
        for r in &rows {
            ech.insert(reduce_mod(r, p));
        }
        current = ech.basis().iter().map(|v| to_int(v)).collect();
        if k + 1 == m {
            return Ok(current.is_empty());
        }
    }
    Ok(m == 1)
}

/// Smallest `m` such that every product of `m` factors `h - 1`,
/// `h in H \ {1}`, has all coefficients divisible by `p`. Products live in
/// `Z[H]` and are enumerated exactly, with duplicates removed.
fn pi_containment_index(group: &FiniteGroup, subgroup: &[GL2ModElement], warnings: Vec<String>) -> Result<NilpotencyReport> {
    const PRODUCT_GUARD: usize = 2_000_000;
    let p = group.elements()[0].p() as i128;
    let h_group = FiniteGroup::new(subgroup.to_vec())?;
    let id = GL2ModElement::identity(p as u64, subgroup[0].level())?;
    let id_index = h_group.index_of(&id)?;
    let factors: Vec<Vec<usize>> = subgroup
        .iter()
        .filter(|h| !h.is_identity())
        .map(|h| h_group.right_mul(h))
        .collect::<Result<_>>()?;
    let report = |index, sizes| NilpotencyReport {
        mode: NilpotencyMode::PiContainment,
        group_order: group.order(),
        subgroup_order: subgroup.len(),
        index,
        sizes,
        independently_verified: false,
        warnings: warnings.clone(),
    };
    if factors.is_empty() {
        return Ok(report(1, vec![0]));
    }
    let mut one = vec![0i128; h_group.order()];
    one[id_index] = 1;
    let mut level: HashSet<Vec<i128>> = HashSet::from([one]);
    let mut sizes = Vec::new();
    for m in 1..=h_group.order() + 1 {
        let mut next = HashSet::new();
        for a in &level {
            for perm in &factors {
                let mut v = vec![0i128; a.len()];
                for (i, &ai) in a.iter().enumerate() {
                    v[perm[i]] += ai;
                }
                for (x, &ai) in v.iter_mut().zip(a) {
                    *x -= ai;
                }
                if v.iter().any(|&x| x != 0) {
                    next.insert(v);
                }
            }
        }
        sizes.push(next.len());
        if next.iter().all(|v| v.iter().all(|x| x % p == 0)) {
            return Ok(report(m, sizes));
        }
        if next.len() > PRODUCT_GUARD {
            return Err(Error::SizeGuard(format!("more than {PRODUCT_GUARD} distinct products")));
        }
        // Multiples of p stay in p Z[H]; only the others need extending.
        level = next.into_iter().filter(|v| v.iter().any(|x| x % p != 0)).collect();
    }
    Err(Error::InvalidInput("augmentation products never enter p Z[H]; H is not a p-group".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentSample {
    pub factors: Vec<GL2ModElement>,
    pub left: GL2ModElement,
    pub in_p_ideal: bool,
}

/// Multiplies `samples` random products `g (h_1 - 1) ... (h_m - 1)` in
/// `Z[G]` and reports whether each lies in `p Z[G]`.
pub fn random_product_containment<R: Rng>(
    group: &FiniteGroup,
    subgroup: &[GL2ModElement],
    m: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<ContainmentSample>> {
    let p = group.elements()[0].p() as i128;
    let nontrivial: Vec<GL2ModElement> = subgroup.iter().filter(|h| !h.is_identity()).copied().collect();
    if nontrivial.is_empty() {
        return Err(Error::InvalidInput("trivial subgroup".into()));
    }
    let id = GL2ModElement::identity(p as u64, subgroup[0].level())?;
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let left = *group.elements().choose(rng).expect("nonempty");
        let factors: Vec<GL2ModElement> = (0..m).map(|_| *nontrivial.choose(rng).expect("nonempty")).collect();
        let mut acc = group.basis_vector(&left)?;
        for h in &factors {
            let mut d = group.basis_vector(h)?;
            d[group.index_of(&id)?] -= 1;
            acc = group.multiply(&acc, &d)?;
        }
        out.push(ContainmentSample { factors, left, in_p_ideal: acc.iter().all(|x| x % p == 0) });
    }
    Ok(out)
}

/// Permutation matrices of left multiplication on `Z[G]`.
pub fn regular_action(group: &FiniteGroup, elements: &[GL2ModElement]) -> Result<Vec<IntMatrix>> {
    elements
        .iter()
        .map(|h| {
            let perm = group.left_mul(h)?;
            let n = group.order();
            let mut m = vec![vec![0i128; n]; n];
            for (i, &j) in perm.iter().enumerate() {
                m[j][i] = 1;
            }
            Ok(m)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NakayamaReport {
    pub module_rank: usize,
    /// Free rank of `M / I_H M`.
    pub coinvariant_rank: usize,
    /// Elementary divisors of the presentation matrix `[rho(h) - 1]`.
    pub elementary_divisors: Vec<String>,
    /// Torsion part of `M / I_H M`: the non-unit nonzero divisors.
    pub torsion_divisors: Vec<String>,
    /// Dimension of the `H`-invariants of the dual, computed from the
    /// transposed action.
    pub dual_invariant_rank: usize,
    pub ranks_agree: bool,
}

/// Co-invariants `M / I_H M` of a free module `M = Z_p^n` with `H` acting
/// through the matrices `action` (one per generator of `H`), and the
/// invariants of the dual.
pub fn nakayama_dimension(p: u64, rank: usize, action: &[IntMatrix]) -> Result<NakayamaReport> {
    for a in action {
        if a.len() != rank || a.iter().any(|r| r.len() != rank) {
            return Err(Error::InvalidInput("action matrix has the wrong size".into()));
        }
    }
    let id = identity(rank);
    let shifted: Vec<IntMatrix> = action
        .iter()
        .map(|a| a.iter().zip(&id).map(|(r, e)| r.iter().zip(e).map(|(x, y)| x - y).collect()).collect())
        .collect();
    // Columns of [rho(h_1) - 1 | rho(h_2) - 1 | ...] span I_H M.
    let presentation: IntMatrix =
        (0..rank).map(|i| shifted.iter().flat_map(|s| s[i].iter().copied()).collect()).collect();
    let smith = smith_form(&presentation, p, None)?;
    let coinvariant_rank = rank - smith.rank();
    let mut elementary_divisors = smith.divisors_text();
    elementary_divisors.truncate(rank);
    let torsion_divisors = smith
        .valuations
        .iter()
        .filter(|&&v| v > 0)
        .map(|&v| if v == 1 { format!("{p}") } else { format!("{p}^{v}") })
        .collect();
    // Invariants of the dual: common kernel of rho(h)^T - 1.
    let stacked: IntMatrix = shifted.iter().flat_map(|s| transpose(s)).collect();
    let dual_invariant_rank = rank - if stacked.is_empty() { 0 } else { rank_exact(&stacked)? };
    Ok(NakayamaReport {
        module_rank: rank,
        coinvariant_rank,
        elementary_divisors,
        torsion_divisors,
        dual_invariant_rank,
        ranks_agree: dual_invariant_rank == coinvariant_rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::group::{congruence_subgroup, enumerate_group, generate_subgroup};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cyclic_unipotent(p: u64) -> (FiniteGroup, GL2ModElement) {
        let g = GL2ModElement::new(p, 1, [1, 1, 0, 1]).unwrap();
        (FiniteGroup::new(generate_subgroup(&[g], 100).unwrap()).unwrap(), g)
    }

    #[test]
    fn cyclic_index_is_p() {
        for p in [2, 3, 5] {
            let (group, g) = cyclic_unipotent(p);
            let ideal = IdealData::new(vec![g]);
            let r = ideal_power_nilpotency(&group, &ideal, NilpotencyMode::CharP).unwrap();
            assert_eq!(r.index, p as usize);
            assert!(r.independently_verified);
            let r = ideal_power_nilpotency(&group, &ideal, NilpotencyMode::PiContainment).unwrap();
            assert_eq!(r.index, p as usize);
        }
    }

    #[test]
    fn trivial_subgroup_gives_index_one() {
        let (group, _) = cyclic_unipotent(3);
        let r = ideal_power_nilpotency(&group, &IdealData::new(vec![]), NilpotencyMode::CharP).unwrap();
        assert_eq!(r.index, 1);
    }

    #[test]
    fn non_normal_subgroup_is_rejected() {
        let group = FiniteGroup::new(enumerate_group(3, 1).unwrap()).unwrap();
        let u = GL2ModElement::u(3, 1).unwrap();
        assert!(ideal_power_nilpotency(&group, &IdealData::new(vec![u]), NilpotencyMode::CharP).is_err());
    }

    #[test]
    fn random_products_of_length_p_vanish_mod_p() {
        let (group, g) = cyclic_unipotent(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples = random_product_containment(&group, group.elements(), 3, 20, &mut rng).unwrap();
        assert!(samples.iter().all(|s| s.in_p_ideal));
        let _ = g;
        let short = random_product_containment(&group, group.elements(), 1, 20, &mut rng).unwrap();
        assert!(short.iter().all(|s| !s.in_p_ideal));
    }

    #[test]
    fn coinvariants_of_regular_module() {
        let group = FiniteGroup::new(enumerate_group(2, 1).unwrap()).unwrap();
        let all = regular_action(&group, group.elements()).unwrap();
        let r = nakayama_dimension(2, 6, &all).unwrap();
        assert_eq!(r.coinvariant_rank, 1);
        assert!(r.ranks_agree);
        let none = nakayama_dimension(2, 6, &[]).unwrap();
        assert_eq!(none.coinvariant_rank, 6);
    }

    #[test]
    fn coinvariant_rank_is_the_index_for_every_subgroup() {
        let group = FiniteGroup::new(enumerate_group(2, 1).unwrap()).unwrap();
        let mut subgroups = std::collections::BTreeSet::new();
        for a in group.elements() {
            for b in group.elements() {
                subgroups.insert(generate_subgroup(&[*a, *b], 6).unwrap());
            }
        }
        assert_eq!(subgroups.len(), 6);
        for h in &subgroups {
            let r = nakayama_dimension(2, 6, &regular_action(&group, h).unwrap()).unwrap();
            assert_eq!(r.coinvariant_rank, 6 / h.len());
            assert!(r.ranks_agree && r.torsion_divisors.is_empty());
        }
    }

    #[test]
    fn k1_in_gl2_mod_4() {
        let group = FiniteGroup::new(enumerate_group(2, 2).unwrap()).unwrap();
        let k1 = congruence_subgroup(2, 2, 1).unwrap();
        let ideal = IdealData::new(k1.clone());
        let r = ideal_power_nilpotency(&group, &ideal, NilpotencyMode::CharP).unwrap();
        assert!(r.independently_verified);
        let c = ideal_power_nilpotency(&group, &ideal, NilpotencyMode::PiContainment).unwrap();
        assert_eq!(c.index, r.index);
        assert!(c.independently_verified);
        assert_eq!(r.sizes[0], 90);
    }
}
