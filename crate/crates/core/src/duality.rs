//! Duality `M -> M^d = Hom(M, K)` for finite free `o`-modules.
//!
//! At finite rank the dual of `f: o^m -> o^n` is the transpose, the
//! canonical map into the double dual is the identity, the closure of an
//! image is its saturation, and `M_cot` (the largest Hausdorff torsion-free
//! quotient) of a cokernel is the cokernel modulo torsion. The exactness
//! statements become rank identities checked through Smith forms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    determinantal_valuations, identity, mat_mul, rank_exact, rank_mod_p, smith_form, transpose, IntMatrix, SmithForm,
};
use crate::padic::vp_int;

/// An `o`-linear map `o^m -> o^n` given by an `n x m` integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeModuleMap {
    pub domain_rank: usize,
    pub codomain_rank: usize,
    pub matrix: IntMatrix,
}

impl FreeModuleMap {
    pub fn new(domain_rank: usize, codomain_rank: usize, matrix: IntMatrix) -> Result<Self> {
        if matrix.len() != codomain_rank || matrix.iter().any(|r| r.len() != domain_rank) {
            return Err(Error::InvalidInput(format!("matrix is not {codomain_rank} x {domain_rank}")));
        }
        Ok(Self { domain_rank, codomain_rank, matrix })
    }

    pub fn from_rows(matrix: IntMatrix) -> Result<Self> {
        let n = matrix.len();
        let m = matrix.first().map_or(0, |r| r.len());
        Self::new(m, n, matrix)
    }

    pub fn identity(rank: usize) -> Self {
        Self { domain_rank: rank, codomain_rank: rank, matrix: identity(rank) }
    }

    /// `self o other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.codomain_rank != self.domain_rank {
            return Err(Error::InvalidInput("maps are not composable".into()));
        }
        Self::new(other.domain_rank, self.codomain_rank, mat_mul(&self.matrix, &other.matrix)?)
    }

    /// Image of a vector.
    pub fn apply(&self, v: &[i128]) -> Result<Vec<i128>> {
        Ok(mat_mul(&self.matrix, &v.iter().map(|&x| vec![x]).collect::<Vec<_>>())?.into_iter().map(|r| r[0]).collect())
    }
}

/// `f^d: N^d -> M^d`, the transpose.
pub fn dual_map(f: &FreeModuleMap) -> FreeModuleMap {
    FreeModuleMap { domain_rank: f.codomain_rank, codomain_rank: f.domain_rank, matrix: transpose(&f.matrix) }
}

/// The dual side of a map: transpose, norms of the images of the dual basis
/// and the elementary divisors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualData {
    pub dual: FreeModuleMap,
    /// `-log_p ||f^d(e_j^*)||`: least valuation in row `j` of the matrix
    /// (`None` for a zero functional).
    pub norm_valuations: Vec<Option<u32>>,
    pub elementary_divisors: Vec<String>,
}

pub fn dual_data(f: &FreeModuleMap, p: u64) -> Result<DualData> {
    let norm_valuations =
        f.matrix.iter().map(|row| row.iter().filter(|&&x| x != 0).map(|&x| vp_int(x, p)).min()).collect();
    Ok(DualData {
        dual: dual_map(f),
        norm_valuations,
        elementary_divisors: smith_form(&f.matrix, p, None)?.divisors_text(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoubleDualReport {
    pub rank: usize,
    pub evaluation_is_identity: bool,
    /// For a permutation `s` of the basis, `iota` intertwines `s` and `s^dd`.
    pub permutation_conjugates: bool,
}

/// The evaluation map `M -> M^dd` at rank `m`, in the bases `e_i` and
/// `e_i^**`: `iota(e_i)(e_j^*) = delta_ij`.
pub fn double_dual_check(rank: usize) -> Result<DoubleDualReport> {
    let iota: IntMatrix = (0..rank).map(|j| (0..rank).map(|i| i128::from(i == j)).collect()).collect();
    let evaluation_is_identity = iota == identity(rank);
    // Cyclic shift of the basis.
    let perm: IntMatrix = (0..rank).map(|i| (0..rank).map(|j| i128::from((j + 1) % rank.max(1) == i)).collect()).collect();
    let s = FreeModuleMap::new(rank, rank, perm)?;
    let s_dd = dual_map(&dual_map(&s));
    let permutation_conjugates = mat_mul(&iota, &s.matrix)? == mat_mul(&s_dd.matrix, &iota)?;
    Ok(DoubleDualReport { rank, evaluation_is_identity, permutation_conjugates })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactnessReport {
    pub p: u64,
    pub domain_rank: usize,
    pub codomain_rank: usize,
    pub elementary_divisors: Vec<String>,
    /// Divisors recomputed from determinantal divisors (small matrices only).
    pub determinantal_check: Option<bool>,
    pub rank: usize,
    /// rank of `ker f`.
    pub kernel_rank: usize,
    /// rank of `M^d / closure(f^d(N^d))`.
    pub dual_quotient_rank: usize,
    /// rank of `coker(f)_cot`.
    pub cokernel_cot_rank: usize,
    /// rank of `ker f^d`.
    pub dual_kernel_rank: usize,
    pub identity_i: bool,
    pub identity_ii: bool,
    pub surjective: bool,
    pub dual_isometry: bool,
    pub biconditional_iii: bool,
    /// `f^d` never increases the sup-norm on the sampled vectors.
    pub norm_nonincreasing: bool,
}

impl ExactnessReport {
    pub fn all_hold(&self) -> bool {
        self.identity_i
            && self.identity_ii
            && self.biconditional_iii
            && self.norm_nonincreasing
            && self.determinantal_check != Some(false)
    }
}

fn sup_valuation(v: &[i128], p: u64) -> Option<u32> {
    v.iter().filter(|&&x| x != 0).map(|&x| vp_int(x, p)).min()
}

/// Checks the exactness dictionary for `f` over `Z_p`.
///
/// The surjectivity of `f` is read off the Smith form of `f`; the isometry
/// of `f^d` is tested independently by injectivity of `f^d mod p` (a map of
/// lattices preserves the sup-norm iff its reduction is injective).
pub fn exactness_suite(f: &FreeModuleMap, p: u64) -> Result<ExactnessReport> {
    let (m, n) = (f.domain_rank, f.codomain_rank);
    let smith: SmithForm = smith_form(&f.matrix, p, None)?;
    let dual = dual_map(f);
    let determinantal_check = if m.min(n) <= 5 && m.max(n) <= 6 {
        Some(determinantal_valuations(&f.matrix, p)? == smith.valuations)
    } else {
        None
    };
    let rank = smith.rank();
    let dual_rank = if dual.matrix.is_empty() { 0 } else { rank_exact(&dual.matrix)? };
    let kernel_rank = m - rank;
    let dual_quotient_rank = m - dual_rank;
    let cokernel_cot_rank = n - rank;
    let dual_kernel_rank = n - dual_rank;
    let surjective = rank == n && smith.unit_count() == n;
    let dual_isometry = rank_mod_p(&dual.matrix, p) == n;
    // Norm check on basis vectors and their sums with alternating signs.
    let mut norm_nonincreasing = true;
    let mut samples: Vec<Vec<i128>> = (0..n).map(|j| (0..n).map(|i| i128::from(i == j)).collect()).collect();
    samples.push((0..n).map(|i| if i % 2 == 0 { 1 } else { -(p as i128) }).collect());
    samples.push((0..n).map(|i| (i as i128 + 1) * p as i128).collect());
    for y in samples.iter().filter(|y| y.iter().any(|&x| x != 0)) {
        let image = dual.apply(y)?;
        let before = sup_valuation(y, p).expect("nonzero sample");
        if let Some(after) = sup_valuation(&image, p) {
            norm_nonincreasing &= after >= before;
        }
    }
    Ok(ExactnessReport {
        p,
        domain_rank: m,
        codomain_rank: n,
        elementary_divisors: smith.divisors_text(),
        determinantal_check,
        rank,
        kernel_rank,
        dual_quotient_rank,
        cokernel_cot_rank,
        dual_kernel_rank,
        identity_i: kernel_rank == dual_quotient_rank,
        identity_ii: cokernel_cot_rank == dual_kernel_rank,
        surjective,
        dual_isometry,
        biconditional_iii: surjective == dual_isometry,
        norm_nonincreasing,
    })
}

/// Random `rows x cols` matrix with `1 <= rows, cols <= max_size` and entries
/// in `[-p^2, p^2]`.
pub fn random_matrix<R: Rng>(rng: &mut R, p: u64, max_size: usize) -> FreeModuleMap {
    let rows = rng.gen_range(1..=max_size);
    let cols = rng.gen_range(1..=max_size);
    let bound = (p * p) as i128;
    let matrix = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-bound..=bound)).collect()).collect();
    FreeModuleMap::from_rows(matrix).expect("well-formed")
}

/// Random unimodular matrix over `Z` (product of elementary matrices).
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize) -> IntMatrix {
    let mut u = identity(n);
    if n < 2 {
        return u;
    }
    for _ in 0..3 * n {
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let c: i128 = rng.gen_range(-2..=2);
        for row in u.iter_mut() {
            row[j] += c * row[i];
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_diagonal() {
        let r = exactness_suite(&FreeModuleMap::identity(3), 5).unwrap();
        assert!(r.surjective && r.dual_isometry && r.all_hold());
        let d = FreeModuleMap::from_rows(vec![vec![1, 0], vec![0, 5]]).unwrap();
        let r = exactness_suite(&d, 5).unwrap();
        assert!(!r.surjective && !r.dual_isometry && r.all_hold());
        assert_eq!(r.elementary_divisors, vec!["1", "5"]);
        let data = dual_data(&d, 5).unwrap();
        assert_eq!(data.norm_valuations, vec![Some(0), Some(1)]);
    }

    #[test]
    fn zero_map() {
        let z = FreeModuleMap::from_rows(vec![vec![0, 0], vec![0, 0]]).unwrap();
        let r = exactness_suite(&z, 3).unwrap();
        assert_eq!((r.kernel_rank, r.cokernel_cot_rank, r.dual_kernel_rank), (2, 2, 2));
        assert!(r.identity_ii);
    }

    #[test]
    fn duals_reverse_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = FreeModuleMap::new(3, 2, vec![vec![1, 2, 3], vec![0, -1, 4]]).unwrap();
        let g = FreeModuleMap::new(2, 4, (0..4).map(|_| (0..2).map(|_| rng.gen_range(-9..=9)).collect()).collect()).unwrap();
        let lhs = dual_map(&g.compose(&f).unwrap());
        let rhs = dual_map(&f).compose(&dual_map(&g)).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(dual_map(&dual_map(&f)), f);
        assert_eq!(dual_map(&FreeModuleMap::identity(4)), FreeModuleMap::identity(4));
    }

    #[test]
    fn double_duals() {
        for rank in [1, 5] {
            let r = double_dual_check(rank).unwrap();
            assert!(r.evaluation_is_identity && r.permutation_conjugates);
        }
    }

    #[test]
    fn divisors_are_unimodular_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in [2, 3, 5] {
            for _ in 0..20 {
                let f = random_matrix(&mut rng, p, 4);
                let left = random_unimodular(&mut rng, f.codomain_rank);
                let right = random_unimodular(&mut rng, f.domain_rank);
                let g = mat_mul(&mat_mul(&left, &f.matrix).unwrap(), &right).unwrap();
                assert_eq!(smith_form(&f.matrix, p, None).unwrap(), smith_form(&g, p, None).unwrap());
            }
        }
    }
}
