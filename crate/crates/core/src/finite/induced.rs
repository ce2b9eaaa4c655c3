//! The principal series `Ind_P^G(chi)` at finite level, its dual pairing with
//! the coset model of `M_(chi^-1)`, and the Bruhat splitting of the coset
//! module.
//!
//! Cosets `gP` of the lower triangular group are determined by the line
//! spanned by the second column of `g`, so `|G/P| = p^(n-1) (p + 1)`. A
//! coset module has basis `e_i` indexed by representatives `g_i`, and
//! `g e_i = chi(q) e_j` where `g g_i = g_j q` with `q` in `P`. The functions
//! `f_i` supported on `g_i P` with `f_i(g_i) = 1` and `f(gq) = chi(q^-1) f(g)`
//! transform by the same rule, so `Ind_P^G(chi)` is the coset module of
//! `chi`.

use serde::{Deserialize, Serialize};

use super::group::{enumerate_group, iwahori_generators, BruhatCell, GL2ModElement};
use crate::characters::{char_conductor, Conductor, TorusCharacter};
use crate::error::{Error, Result};
use crate::padic::{inv_mod, PadicNumber, PrecisionContext};

pub type PadicMatrix = Vec<Vec<PadicNumber>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosetModule {
    pub p: u64,
    pub level: u32,
    pub character: TorusCharacter,
    pub representatives: Vec<GL2ModElement>,
}

/// Canonical index of the coset `gP` in `0..p^(n-1)(p+1)`: lines `(x : 1)`
/// come first (index `x`), then lines `(1 : y)` with `p | y` (index
/// `q + y / p`).
pub fn coset_index(g: &GL2ModElement) -> usize {
    let q = g.modulus();
    let p = g.p();
    let [_, b, _, d] = g.entries();
    if d % p != 0 {
        (b * inv_mod(d, q) % q) as usize
    } else {
        let y = d * inv_mod(b, q) % q;
        (q + y / p) as usize
    }
}

/// Standard representatives: `[[1, x], [0, 1]]` for the line `(x : 1)` and
/// `[[0, 1], [-1, y]]` for `(1 : y)`.
pub fn standard_representatives(p: u64, level: u32) -> Result<Vec<GL2ModElement>> {
    let q = p.pow(level) as i64;
    let mut reps = Vec::new();
    for x in 0..q {
        reps.push(GL2ModElement::new(p, level, [1, x, 0, 1])?);
    }
    for k in 0..q / p as i64 {
        reps.push(GL2ModElement::new(p, level, [0, 1, -1, k * p as i64])?);
    }
    debug_assert!(reps.iter().enumerate().all(|(i, g)| coset_index(g) == i));
    Ok(reps)
}

/// Representatives `g_i s_i` with varying lower triangular `s_i`; used to
/// build a second, independently parametrized model.
pub fn twisted_representatives(p: u64, level: u32) -> Result<Vec<GL2ModElement>> {
    let root = crate::characters::smallest_primitive_root(p) as i64;
    let mut out = Vec::new();
    for (i, g) in standard_representatives(p, level)?.into_iter().enumerate() {
        let a = (0..i).fold(1i64, |acc, _| acc * root % p.pow(level) as i64);
        let s = GL2ModElement::new(p, level, [a, 0, i as i64, 1 + (i as i64 % 2) * p as i64])?;
        out.push(g.mul(&s));
    }
    Ok(out)
}

fn check_conductor(ctx: &PrecisionContext, chi: &TorusCharacter, level: u32) -> Result<()> {
    match char_conductor(ctx, chi)? {
        Conductor::Level(l) if l <= level => Ok(()),
        Conductor::Level(l) => Err(Error::ConductorTooLarge(l)),
        Conductor::Exceeds(l) => Err(Error::ConductorTooLarge(l)),
    }
}

impl CosetModule {
    pub fn new(ctx: &PrecisionContext, chi: &TorusCharacter, level: u32, representatives: Vec<GL2ModElement>) -> Result<Self> {
        check_conductor(ctx, chi, level)?;
        let p = ctx.p();
        let mut seen = vec![false; representatives.len()];
        for g in &representatives {
            let i = coset_index(g);
            if i >= seen.len() || seen[i] {
                return Err(Error::InvalidInput("representatives do not form a system of coset representatives".into()));
            }
            seen[i] = true;
        }
        let mut reps = representatives;
        reps.sort_by_key(coset_index);
        Ok(Self { p, level, character: chi.clone(), representatives: reps })
    }

    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    /// `chi(q)` for `q` lower triangular, through its diagonal entries.
    pub fn chi_of_parabolic(&self, ctx: &PrecisionContext, q: &GL2ModElement) -> Result<PadicNumber> {
        let [a, _, _, d] = q.entries();
        self.character.eval(ctx, &ctx.int(a as i128), &ctx.int(d as i128))
    }

    /// `(j, q)` with `g g_i = g_j q`.
    pub fn transport(&self, g: &GL2ModElement, i: usize) -> Result<(usize, GL2ModElement)> {
        let x = g.mul(&self.representatives[i]);
        let j = coset_index(&x);
        let q = self.representatives[j].inv().mul(&x);
        if !q.in_parabolic() {
            return Err(Error::InvalidInput(format!("{q} is not lower triangular")));
        }
        Ok((j, q))
    }

    /// Matrix of `g`: column `i` holds the image of `e_i`.
    pub fn action(&self, ctx: &PrecisionContext, g: &GL2ModElement) -> Result<PadicMatrix> {
        let n = self.dim();
        let mut m = vec![vec![ctx.zero(); n]; n];
        for i in 0..n {
            let (j, q) = self.transport(g, i)?;
            m[j][i] = self.chi_of_parabolic(ctx, &q)?;
        }
        Ok(m)
    }
}

/// `Ind_P^G(chi)` on the standard representatives.
pub fn build_induced(ctx: &PrecisionContext, chi: &TorusCharacter, level: u32) -> Result<CosetModule> {
    CosetModule::new(ctx, chi, level, standard_representatives(ctx.p(), level)?)
}

fn padic_mat_mul(a: &PadicMatrix, b: &PadicMatrix, ctx: &PrecisionContext) -> PadicMatrix {
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = ctx.zero();
                    for (k, x) in row.iter().enumerate() {
                        if !x.is_exact_zero() && !b[k][j].is_exact_zero() {
                            s += *x * b[k][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Rank of a `Q_p`-matrix by elimination with least-valuation pivots; entries
/// that are zero to their known precision count as zero.
pub fn padic_rank(a: &PadicMatrix) -> usize {
    let mut m = a.clone();
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let pivot = (rank..rows).filter(|&i| !m[i][c].is_zero()).min_by_key(|&i| m[i][c].min_valuation());
        let Some(pi) = pivot else { continue };
        m.swap(rank, pi);
        let inv = m[rank][c].try_inv().expect("nonzero pivot");
        for i in rank + 1..rows {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c] * inv;
            for j in c..cols {
                let t = f * m[rank][j];
                m[i][j] = m[i][j] - t;
            }
        }
        rank += 1;
    }
    rank
}

fn matrices_agree(a: &PadicMatrix, b: &PadicMatrix, digits: i64) -> bool {
    a.iter().zip(b).all(|(r, s)| r.iter().zip(s).all(|(x, y)| x.agrees_with(y, digits)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingReport {
    pub dim_induced: usize,
    pub dim_dual_model: usize,
    pub pairing_rank: usize,
    pub nonsingular: bool,
    /// `rho_M(g)^T B rho(g) = B` for every group element tested.
    pub invariant: bool,
    pub elements_tested: usize,
    /// Left translation by the identity is the identity matrix.
    pub identity_acts_trivially: bool,
}

/// Pairs `Ind_P^G(chi)` with the coset model of `M_(chi^-1)`, built on
/// different representatives: `<g' (x) 1, f> = f(g')`.
pub fn dual_pairing_check(ctx: &PrecisionContext, ind: &CosetModule) -> Result<PairingReport> {
    let dual = CosetModule::new(ctx, &ind.character.inverse(), ind.level, twisted_representatives(ind.p, ind.level)?)?;
    let n = ind.dim();
    let mut pairing = vec![vec![ctx.zero(); n]; n];
    for (i, g) in dual.representatives.iter().enumerate() {
        for (j, h) in ind.representatives.iter().enumerate() {
            let x = h.inv().mul(g);
            if x.in_parabolic() {
                // f_j(h q) = chi(q^-1)
                pairing[i][j] = ind.chi_of_parabolic(ctx, &x)?.try_inv()?;
            }
        }
    }
    let pairing_rank = padic_rank(&pairing);
    let digits = ctx.prec() as i64;
    let elements = enumerate_group(ind.p, ind.level)?;
    let sample: Vec<GL2ModElement> = if elements.len() <= 2000 {
        elements
    } else {
        let mut g = iwahori_generators(ind.p, ind.level)?;
        g.push(GL2ModElement::w(ind.p, ind.level)?);
        g
    };
    let mut invariant = true;
    for g in &sample {
        let rho = ind.action(ctx, g)?;
        let rho_m = dual.action(ctx, g)?;
        let rho_m_t: PadicMatrix = (0..n).map(|j| (0..n).map(|i| rho_m[i][j]).collect()).collect();
        let lhs = padic_mat_mul(&padic_mat_mul(&rho_m_t, &pairing, ctx), &rho, ctx);
        if !matrices_agree(&lhs, &pairing, digits) {
            invariant = false;
            break;
        }
    }
    let id = GL2ModElement::identity(ind.p, ind.level)?;
    let rho_id = ind.action(ctx, &id)?;
    let identity_acts_trivially =
        rho_id.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, x)| x.agrees_with(&ctx.int(i128::from(i == j)), digits)));
    Ok(PairingReport {
        dim_induced: n,
        dim_dual_model: dual.dim(),
        pairing_rank,
        nonsingular: pairing_rank == n && dual.dim() == n,
        invariant,
        elements_tested: sample.len(),
        identity_acts_trivially,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub dim: usize,
    /// Basis indices whose representative lies in `B` (the `N_chi` block).
    pub n_block: Vec<usize>,
    /// Basis indices in the big cell (the `N_(w chi)^-` block).
    pub minus_block: Vec<usize>,
    pub dims_add_up: bool,
    /// `w` maps every `N`-block vector into the `N^-` block.
    pub w_maps_n_into_minus: bool,
    /// An element not preserving the `N` block.
    pub non_equivariance_witness: Option<GL2ModElement>,
    /// The generators of `B` preserve both blocks.
    pub iwahori_preserves_blocks: bool,
    pub identity_preserves_blocks: bool,
}

fn maps_into(m: &PadicMatrix, from: &[usize], to: &[usize]) -> bool {
    from.iter().all(|&i| m.iter().enumerate().all(|(j, row)| row[i].is_zero() || to.contains(&j)))
}

/// Splits the coset model of `M_chi` along the Bruhat cells of the
/// representatives.
pub fn bruhat_module_split(ctx: &PrecisionContext, chi: &TorusCharacter, level: u32) -> Result<SplitReport> {
    let module = build_induced(ctx, chi, level)?;
    let (mut n_block, mut minus_block) = (Vec::new(), Vec::new());
    for (i, g) in module.representatives.iter().enumerate() {
        match super::group::bruhat_classify(g) {
            BruhatCell::B => n_block.push(i),
            BruhatCell::BwP => minus_block.push(i),
        }
    }
    let w = GL2ModElement::w(ctx.p(), level)?;
    let rho_w = module.action(ctx, &w)?;
    let w_maps_n_into_minus = maps_into(&rho_w, &n_block, &minus_block);
    let preserves = |g: &GL2ModElement| -> Result<bool> {
        let m = module.action(ctx, g)?;
        Ok(maps_into(&m, &n_block, &n_block) && maps_into(&m, &minus_block, &minus_block))
    };
    let mut iwahori_preserves_blocks = true;
    for g in iwahori_generators(ctx.p(), level)? {
        iwahori_preserves_blocks &= preserves(&g)?;
    }
    let non_equivariance_witness = (!maps_into(&rho_w, &n_block, &n_block)).then_some(w);
    let identity_preserves_blocks = preserves(&GL2ModElement::identity(ctx.p(), level)?)?;
    Ok(SplitReport {
        dim: module.dim(),
        dims_add_up: n_block.len() + minus_block.len() == module.dim(),
        n_block,
        minus_block,
        w_maps_n_into_minus,
        non_equivariance_witness,
        iwahori_preserves_blocks,
        identity_preserves_blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::torsion_generator;

    fn ctx(p: u64) -> PrecisionContext {
        PrecisionContext::new(p, 12, 16).unwrap()
    }

    /// Character of conductor 1: `diag(a, d) -> tau-power(a)^i tau-power(d)^j`.
    fn tame(c: &PrecisionContext, i: u64, j: u64) -> TorusCharacter {
        let tau = torsion_generator(c);
        TorusCharacter::from_images(c, [tau.pow(i), tau.pow(j)], [c.one(), c.one()], None).unwrap()
    }

    #[test]
    fn coset_counts() {
        assert_eq!(standard_representatives(2, 1).unwrap().len(), 3);
        assert_eq!(standard_representatives(3, 1).unwrap().len(), 4);
        assert_eq!(standard_representatives(2, 2).unwrap().len(), 6);
        for g in enumerate_group(3, 1).unwrap() {
            let i = coset_index(&g);
            let rep = standard_representatives(3, 1).unwrap()[i];
            assert!(rep.inv().mul(&g).in_parabolic());
        }
    }

    #[test]
    fn induced_dimensions_and_pairing() {
        for p in [2, 3] {
            let c = ctx(p);
            // For p = 2 the sign character has conductor 2.
            let level = if p == 2 { 2 } else { 1 };
            for (chi, n) in [(TorusCharacter::trivial(&c), 1), (tame(&c, 1, 0), level)] {
                let ind = build_induced(&c, &chi, n).unwrap();
                assert_eq!(ind.dim(), (p as usize + 1) * (p as usize).pow(n - 1));
                let r = dual_pairing_check(&c, &ind).unwrap();
                assert!(r.nonsingular && r.invariant && r.identity_acts_trivially, "{r:?}");
            }
        }
    }

    #[test]
    fn representation_property() {
        let c = ctx(3);
        let ind = build_induced(&c, &tame(&c, 1, 1), 1).unwrap();
        let g = GL2ModElement::w(3, 1).unwrap();
        let h = GL2ModElement::u(3, 1).unwrap();
        let lhs = ind.action(&c, &g.mul(&h)).unwrap();
        let rhs = padic_mat_mul(&ind.action(&c, &g).unwrap(), &ind.action(&c, &h).unwrap(), &c);
        assert!(matrices_agree(&lhs, &rhs, 12));
    }

    #[test]
    fn conductor_is_checked() {
        let c = ctx(5);
        let chi = TorusCharacter::closed_form(&c, 0, 1);
        assert!(matches!(build_induced(&c, &chi, 1), Err(Error::ConductorTooLarge(_))));
    }

    #[test]
    fn bruhat_split() {
        let c = ctx(3);
        let r = bruhat_module_split(&c, &TorusCharacter::trivial(&c), 1).unwrap();
        assert_eq!((r.n_block.len(), r.minus_block.len()), (1, 3));
        assert!(r.dims_add_up && r.w_maps_n_into_minus && r.iwahori_preserves_blocks && r.identity_preserves_blocks);
        assert!(r.non_equivariance_witness.is_some());
        let r = bruhat_module_split(&ctx(2), &TorusCharacter::trivial(&ctx(2)), 2).unwrap();
        assert_eq!((r.n_block.len(), r.minus_block.len()), (2, 4));
    }
}
