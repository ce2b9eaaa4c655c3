//! `GL_2(Z/p^n)`: elements, enumeration, the Iwahori factorization and the
//! Bruhat cells.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{inv_mod, is_prime};

/// Largest group order that may be enumerated.
pub const ORDER_GUARD: u64 = 10_000_000;

/// A matrix `[[a, b], [c, d]]` over `Z/p^n` with unit determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GL2ModElement {
    p: u64,
    level: u32,
    entries: [u64; 4],
}

impl GL2ModElement {
    pub fn new(p: u64, level: u32, entries: [i64; 4]) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if level == 0 {
            return Err(Error::InvalidInput("level must be at least 1".into()));
        }
        let q = modulus(p, level)?;
        let e = entries.map(|x| x.rem_euclid(q as i64) as u64);
        let g = Self { p, level, entries: e };
        if g.det().is_multiple_of(p) {
            return Err(Error::InvalidInput(format!("determinant of {g} is not a unit")));
        }
        Ok(g)
    }

    fn raw(p: u64, level: u32, entries: [u64; 4]) -> Self {
        Self { p, level, entries }
    }

    pub fn identity(p: u64, level: u32) -> Result<Self> {
        Self::new(p, level, [1, 0, 0, 1])
    }

    /// `w = [[0, -1], [1, 0]]`.
    pub fn w(p: u64, level: u32) -> Result<Self> {
        Self::new(p, level, [0, -1, 1, 0])
    }

    /// `u = [[1, 0], [1, 1]]`.
    pub fn u(p: u64, level: u32) -> Result<Self> {
        Self::new(p, level, [1, 0, 1, 1])
    }

    /// `gamma = [[1, p], [0, 1]]`.
    pub fn gamma(p: u64, level: u32) -> Result<Self> {
        Self::new(p, level, [1, p as i64, 0, 1])
    }

    pub fn diag(p: u64, level: u32, a: i64, d: i64) -> Result<Self> {
        Self::new(p, level, [a, 0, 0, d])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.level)
    }

    pub fn entries(&self) -> [u64; 4] {
        self.entries
    }

    pub fn det(&self) -> u64 {
        let q = self.modulus();
        let [a, b, c, d] = self.entries;
        (a * d % q + q - b * c % q) % q
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!((self.p, self.level), (other.p, other.level), "elements of different groups");
        let q = self.modulus();
        let [a, b, c, d] = self.entries;
        let [e, f, g, h] = other.entries;
        Self::raw(self.p, self.level, [(a * e + b * g) % q, (a * f + b * h) % q, (c * e + d * g) % q, (c * f + d * h) % q])
    }

    pub fn inv(&self) -> Self {
        let q = self.modulus();
        let di = inv_mod(self.det(), q);
        let [a, b, c, d] = self.entries;
        let s = |x: u64| x * di % q;
        Self::raw(self.p, self.level, [s(d), s((q - b) % q), s((q - c) % q), s(a)])
    }

    pub fn is_identity(&self) -> bool {
        self.entries == [1, 0, 0, 1] || self.modulus() == 1
    }

    /// Reduction to a lower level.
    pub fn reduce(&self, level: u32) -> Self {
        let q = self.p.pow(level);
        Self::raw(self.p, level, self.entries.map(|x| x % q))
    }

    /// In the image of the Iwahori subgroup: upper-right entry divisible by `p`.
    pub fn in_iwahori(&self) -> bool {
        self.entries[1].is_multiple_of(self.p)
    }

    /// Lower triangular (the image of `P`).
    pub fn in_parabolic(&self) -> bool {
        self.entries[1] == 0
    }
}

impl fmt::Display for GL2ModElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.entries;
        write!(f, "[[{a}, {b}], [{c}, {d}]] mod {}^{}", self.p, self.level)
    }
}

fn modulus(p: u64, level: u32) -> Result<u64> {
    p.checked_pow(level)
        .filter(|q| q.checked_pow(4).is_some())
        .ok_or_else(|| Error::SizeGuard(format!("modulus {p}^{level} too large")))
}

/// `|GL_2(Z/p^n)| = (p^2 - 1)(p^2 - p) p^(4(n - 1))`.
pub fn group_order(p: u64, level: u32) -> Option<u64> {
    let base = (p * p - 1).checked_mul(p * p - p)?;
    base.checked_mul(p.checked_pow(4 * (level - 1))?)
}

/// All elements of `GL_2(Z/p^n)` in lexicographic order of their entries.
pub fn enumerate_group(p: u64, level: u32) -> Result<Vec<GL2ModElement>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if level == 0 {
        return Err(Error::InvalidInput("level must be at least 1".into()));
    }
    let order = group_order(p, level).filter(|&o| o <= ORDER_GUARD).ok_or_else(|| {
        Error::SizeGuard(format!("GL_2(Z/{p}^{level}) exceeds the order guard {ORDER_GUARD}"))
    })?;
    let q = modulus(p, level)?;
    let mut out = Vec::with_capacity(order as usize);
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    let g = GL2ModElement::raw(p, level, [a, b, c, d]);
                    if !g.det().is_multiple_of(p) {
                        out.push(g);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `b = u_minus * q` with `u_minus = [[1, x], [0, 1]]`, `x` divisible by `p`,
/// and `q` lower triangular; `x = b12 / b22`.
pub fn iwahori_factor(b: &GL2ModElement) -> Result<(GL2ModElement, GL2ModElement)> {
    if !b.in_iwahori() {
        return Err(Error::NotInIwahori(b.to_string()));
    }
    let qm = b.modulus();
    let [b11, b12, b21, b22] = b.entries;
    let x = b12 * inv_mod(b22, qm) % qm;
    let u_minus = GL2ModElement::raw(b.p, b.level, [1, x, 0, 1]);
    let top = (b11 + qm - x * b21 % qm) % qm;
    let lower = GL2ModElement::raw(b.p, b.level, [top, 0, b21, b22]);
    if u_minus.mul(&lower) != *b {
        return Err(Error::NotInIwahori(format!("factorization of {b} failed to re-multiply")));
    }
    Ok((u_minus, lower))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BruhatCell {
    /// The Iwahori subgroup `B`.
    B,
    /// The big cell `BwP`.
    BwP,
}

pub fn bruhat_classify(g: &GL2ModElement) -> BruhatCell {
    if g.in_iwahori() {
        BruhatCell::B
    } else {
        BruhatCell::BwP
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruhatCensus {
    pub p: u64,
    pub level: u32,
    pub order: usize,
    pub cell_b: usize,
    pub cell_bwp: usize,
    /// Every element is in exactly one of `B` and the independently
    /// enumerated set of products `b w q`, and the classifier agrees.
    pub exactly_one_cell: bool,
    /// `iwahori_factor` re-multiplies to the input on all of `B`.
    pub iwahori_factor_remultiplies: bool,
}

/// Exhaustive check of `G = B ⊔ BwP` in `GL_2(Z/p^n)`.
pub fn bruhat_census(p: u64, level: u32) -> Result<BruhatCensus> {
    let elements = enumerate_group(p, level)?;
    let w = GL2ModElement::w(p, level)?;
    let b_image: Vec<_> = elements.iter().filter(|g| g.in_iwahori()).copied().collect();
    let p_image: Vec<_> = elements.iter().filter(|g| g.in_parabolic()).copied().collect();
    let big: BTreeSet<GL2ModElement> =
        b_image.iter().flat_map(|b| p_image.iter().map(move |q| b.mul(&w).mul(q))).collect();
    let (mut cell_b, mut cell_bwp) = (0, 0);
    let mut exactly_one_cell = true;
    for g in &elements {
        let in_b = b_image.binary_search(g).is_ok();
        let in_big = big.contains(g);
        exactly_one_cell &= in_b != in_big;
        match bruhat_classify(g) {
            BruhatCell::B => {
                cell_b += 1;
                exactly_one_cell &= in_b;
            }
            BruhatCell::BwP => {
                cell_bwp += 1;
                exactly_one_cell &= in_big;
            }
        }
    }
    let iwahori_factor_remultiplies =
        b_image.iter().all(|b| iwahori_factor(b).is_ok_and(|(u, q)| u.mul(&q) == *b));
    Ok(BruhatCensus {
        p,
        level,
        order: elements.len(),
        cell_b,
        cell_bwp,
        exactly_one_cell,
        iwahori_factor_remultiplies,
    })
}

/// Closure of `gens` under multiplication, sorted; fails past `guard`
/// elements.
pub fn generate_subgroup(gens: &[GL2ModElement], guard: usize) -> Result<Vec<GL2ModElement>> {
    let first = gens.first().ok_or_else(|| Error::InvalidInput("no generators".into()))?;
    let id = GL2ModElement::identity(first.p, first.level)?;
    let mut seen = BTreeSet::from([id]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.mul(g);
            if seen.insert(y) {
                if seen.len() > guard {
                    return Err(Error::SizeGuard(format!("subgroup exceeds {guard} elements")));
                }
                queue.push_back(y);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Kernel of the reduction `GL_2(Z/p^n) -> GL_2(Z/p^k)`.
pub fn congruence_subgroup(p: u64, level: u32, k: u32) -> Result<Vec<GL2ModElement>> {
    Ok(enumerate_group(p, level)?.into_iter().filter(|g| g.reduce(k).is_identity()).collect())
}

/// Generators of the Iwahori image: the torus, `u` and `gamma`.
pub fn iwahori_generators(p: u64, level: u32) -> Result<Vec<GL2ModElement>> {
    let g = crate::characters::smallest_primitive_root(p) as i64;
    let mut gens = vec![
        GL2ModElement::diag(p, level, g, 1)?,
        GL2ModElement::diag(p, level, 1, g)?,
        GL2ModElement::diag(p, level, -1, 1)?,
        GL2ModElement::diag(p, level, 1 + p as i64, 1)?,
        GL2ModElement::diag(p, level, 1, 1 + p as i64)?,
        GL2ModElement::u(p, level)?,
    ];
    if level > 1 {
        gens.push(GL2ModElement::gamma(p, level)?);
    }
    gens.sort();
    gens.dedup();
    Ok(gens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        assert_eq!(enumerate_group(2, 1).unwrap().len(), 6);
        assert_eq!(enumerate_group(2, 2).unwrap().len(), 96);
        assert_eq!(enumerate_group(3, 1).unwrap().len(), 48);
        assert_eq!(group_order(3, 2), Some(3888));
        assert!(matches!(enumerate_group(7, 3), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn group_laws() {
        for g in enumerate_group(2, 2).unwrap() {
            assert!(g.mul(&g.inv()).is_identity());
        }
        let w = GL2ModElement::w(3, 1).unwrap();
        assert_eq!(w.mul(&w), GL2ModElement::diag(3, 1, -1, -1).unwrap());
    }

    #[test]
    fn iwahori_examples() {
        let gamma = GL2ModElement::gamma(3, 2).unwrap();
        let id = GL2ModElement::identity(3, 2).unwrap();
        assert_eq!(iwahori_factor(&gamma).unwrap(), (gamma, id));
        let u = GL2ModElement::u(3, 2).unwrap();
        assert_eq!(iwahori_factor(&u).unwrap(), (id, u));
        assert!(iwahori_factor(&GL2ModElement::w(3, 2).unwrap()).is_err());
    }

    #[test]
    fn cells_and_generators() {
        let g = enumerate_group(3, 1).unwrap();
        let b = g.iter().filter(|x| bruhat_classify(x) == BruhatCell::B).count();
        assert_eq!((b, g.len() - b), (12, 36));
        for (p, n) in [(2, 1), (3, 1), (2, 2)] {
            let closure = generate_subgroup(&iwahori_generators(p, n).unwrap(), 100_000).unwrap();
            let direct: Vec<_> = enumerate_group(p, n).unwrap().into_iter().filter(|x| x.in_iwahori()).collect();
            assert_eq!(closure, direct, "p = {p}, n = {n}");
        }
        assert_eq!(congruence_subgroup(2, 2, 1).unwrap().len(), 16);
    }
}
