//! Exact linear algebra over `Z`, `Z/p^W` and `F_p`.
//!
//! Matrices are row-major `Vec<Vec<_>>`. Smith forms over `Z_p` are computed
//! modulo `p^W`; a divisor of valuation `>= W` is indistinguishable from zero
//! and reported as such.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{inv_mod, is_prime, max_digits, mul_mod, pow_u64, vp_int};

pub type IntMatrix = Vec<Vec<i128>>;

pub fn transpose<T: Copy>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn mat_mul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Result<IntMatrix> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![0i128; cols]; a.len()];
    for (i, row) in a.iter().enumerate() {
        if row.len() != inner {
            return Err(Error::InvalidInput("matrix dimensions do not match".into()));
        }
        for (k, &aik) in row.iter().enumerate() {
            if aik == 0 {
                continue;
            }
            for (j, bkj) in b[k].iter().enumerate() {
                let t = aik.checked_mul(*bkj).ok_or_else(overflow)?;
                out[i][j] = out[i][j].checked_add(t).ok_or_else(overflow)?;
            }
        }
    }
    Ok(out)
}

pub fn identity(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

fn overflow() -> Error {
    Error::SizeGuard("integer overflow in exact matrix arithmetic".into())
}

/// Smith normal form of an integer matrix over `Z_p`, computed modulo `p^W`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmithForm {
    pub p: u64,
    pub digits: u32,
    /// Valuations of the nonzero elementary divisors, ascending.
    pub valuations: Vec<u32>,
    /// Diagonal entries that vanish modulo `p^W`.
    pub zero_divisors: usize,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.valuations.len()
    }

    pub fn unit_count(&self) -> usize {
        self.valuations.iter().filter(|&&v| v == 0).count()
    }

    /// Elementary divisors as `p^v` strings, zeros as `0`.
    pub fn divisors_text(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .valuations
            .iter()
            .map(|&v| match v {
                0 => "1".to_string(),
                1 => format!("{}", self.p),
                v => format!("{}^{v}", self.p),
            })
            .collect();
        out.extend(std::iter::repeat_n("0".to_string(), self.zero_divisors));
        out
    }
}

/// Smith form over `Z_p` by pivoting on an entry of least valuation, modulo
/// `p^digits` (`digits = None` uses the largest representable precision).
pub fn smith_form(a: &[Vec<i128>], p: u64, digits: Option<u32>) -> Result<SmithForm> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let w = digits.unwrap_or(max_digits(p)).min(max_digits(p));
    let modulus = pow_u64(p, w);
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|&x| x.rem_euclid(modulus as i128) as u64).collect()).collect();
    let val = |x: u64| if x == 0 { u32::MAX } else { vp_int(x as i128, p) };
    let mut valuations = Vec::new();
    let steps = rows.min(cols);
    for t in 0..steps {
        // Least valuation in the remaining block; ties broken by position.
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in m.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                let v = val(x);
                if v != u32::MAX && best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let Some((v, bi, bj)) = best else { break };
        m.swap(t, bi);
        for row in m.iter_mut() {
            row.swap(t, bj);
        }
        let pv = pow_u64(p, v);
        let unit = m[t][t] / pv;
        let unit_inv = inv_mod(unit % modulus, modulus);
        let pivot_row = m[t].clone();
        for row in m.iter_mut().skip(t + 1) {
            if row[t] == 0 {
                continue;
            }
            let factor = mul_mod(row[t] / pv, unit_inv, modulus);
            for (x, &y) in row.iter_mut().zip(&pivot_row).skip(t) {
                *x = (*x + modulus - mul_mod(factor, y, modulus)) % modulus;
            }
        }
        // Column operations only touch row t once the column below is clear.
        for j in t + 1..cols {
            m[t][j] = 0;
        }
        valuations.push(v);
    }
    let zero_divisors = steps - valuations.len();
    Ok(SmithForm { p, digits: w, valuations, zero_divisors })
}

/// Rank over `F_p` by Gaussian elimination, independent of [`smith_form`].
pub fn rank_mod_p(a: &[Vec<i128>], p: u64) -> usize {
    let mut e = FpEchelon::new(p, a.first().map_or(0, |r| r.len()));
    for row in a {
        e.insert(row.iter().map(|&x| x.rem_euclid(p as i128) as u32).collect());
    }
    e.rank()
}

/// Row echelon basis over `F_p` with deterministic (leftmost) pivots.
#[derive(Clone, Debug)]
pub struct FpEchelon {
    p: u64,
    width: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl FpEchelon {
    pub fn new(p: u64, width: usize) -> Self {
        Self { p, width, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Reduces `v` against the basis; returns the reduced vector.
    pub fn reduce(&self, mut v: Vec<u32>) -> Vec<u32> {
        let p = self.p;
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let c = v[piv] as u64;
            if c == 0 {
                continue;
            }
            for (x, &y) in v.iter_mut().zip(row) {
                *x = ((*x as u64 + (p - c) * y as u64) % p) as u32;
            }
        }
        v
    }

    /// Adds `v` to the span; returns whether it was independent.
    pub fn insert(&mut self, v: Vec<u32>) -> bool {
        assert_eq!(v.len(), self.width, "vector width mismatch");
        let mut v = self.reduce(v);
        let Some(piv) = v.iter().position(|&x| x != 0) else { return false };
        let p = self.p;
        let inv = inv_mod(v[piv] as u64, p);
        v.iter_mut().for_each(|x| *x = (*x as u64 * inv % p) as u32);
        // Keep the basis fully reduced so that `reduce` is a single pass.
        for row in self.rows.iter_mut() {
            let c = row[piv] as u64;
            if c != 0 {
                for (x, &y) in row.iter_mut().zip(&v) {
                    *x = ((*x as u64 + (p - c) * y as u64) % p) as u32;
                }
            }
        }
        self.rows.push(v);
        self.pivots.push(piv);
        true
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v.to_vec()).iter().all(|&x| x == 0)
    }
}

/// Exact determinant of a square integer matrix (fraction-free Bareiss).
pub fn determinant(a: &[Vec<i128>]) -> Result<i128> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("determinant of a non-square matrix".into()));
    }
    if n == 0 {
        return Ok(1);
    }
    let mut m = a.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = m[i][j]
                    .checked_mul(m[k][k])
                    .and_then(|x| x.checked_sub(m[i][k].checked_mul(m[k][j])?))
                    .ok_or_else(overflow)?;
                m[i][j] = t / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    Ok(sign * m[n - 1][n - 1])
}

/// Exact rank over `Q` (fraction-free elimination).
pub fn rank_exact(a: &[Vec<i128>]) -> Result<usize> {
    let mut m = a.to_vec();
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, piv);
        for i in rank + 1..rows {
            for j in c + 1..cols {
                let t = m[i][j]
                    .checked_mul(m[rank][c])
                    .and_then(|x| x.checked_sub(m[i][c].checked_mul(m[rank][j])?))
                    .ok_or_else(overflow)?;
                m[i][j] = t / prev;
            }
            m[i][c] = 0;
        }
        prev = m[rank][c];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    Ok(rank)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Elementary divisor valuations from determinantal divisors: `v_p` of the
/// gcd `d_k` of all `k x k` minors gives `e_k = v(d_k) - v(d_(k-1))`. The
/// number of returned valuations is the rank over `Q`.
pub fn determinantal_valuations(a: &[Vec<i128>], p: u64) -> Result<Vec<u32>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    let mut prev = 0u32;
    for k in 1..=rows.min(cols) {
        let mut best: Option<u32> = None;
        for rs in combinations(rows, k) {
            for cs in combinations(cols, k) {
                let sub: IntMatrix = rs.iter().map(|&i| cs.iter().map(|&j| a[i][j]).collect()).collect();
                let d = determinant(&sub)?;
                if d != 0 {
                    let v = vp_int(d, p);
                    best = Some(best.map_or(v, |b| b.min(v)));
                }
            }
        }
        match best {
            Some(v) => {
                out.push(v - prev);
                prev = v;
            }
            None => break,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smith_of_diagonal_and_zero() {
        let s = smith_form(&[vec![1, 0], vec![0, 5]], 5, None).unwrap();
        assert_eq!(s.valuations, vec![0, 1]);
        assert_eq!(s.divisors_text(), vec!["1", "5"]);
        let z = smith_form(&[vec![0, 0], vec![0, 0]], 3, None).unwrap();
        assert_eq!(z.rank(), 0);
        assert_eq!(z.zero_divisors, 2);
    }

    #[test]
    fn smith_matches_determinantal_divisors() {
        let a = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        // Over Z the Smith form is diag(2, 6, 12).
        assert_eq!(smith_form(&a, 2, None).unwrap().valuations, vec![1, 1, 2]);
        assert_eq!(smith_form(&a, 3, None).unwrap().valuations, vec![0, 1, 1]);
        assert_eq!(determinantal_valuations(&a, 2).unwrap(), vec![1, 1, 2]);
        assert_eq!(determinantal_valuations(&a, 3).unwrap(), vec![0, 1, 1]);
    }

    #[test]
    fn exact_ranks_and_determinants() {
        let a = vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]];
        assert_eq!(determinant(&a).unwrap(), 0);
        assert_eq!(rank_exact(&a).unwrap(), 2);
        assert_eq!(determinant(&[vec![2, 1], vec![1, 3]]).unwrap(), 5);
        assert_eq!(rank_mod_p(&[vec![3, 6], vec![1, 2]], 3), 1);
        assert_eq!(rank_exact(&transpose(&a)).unwrap(), 2);
    }

    #[test]
    fn echelon_membership() {
        let mut e = FpEchelon::new(3, 3);
        assert!(e.insert(vec![1, 2, 0]));
        assert!(e.insert(vec![0, 1, 1]));
        assert!(!e.insert(vec![1, 0, 1]));
        assert!(e.contains(&[2, 1, 0]));
        assert!(!e.contains(&[0, 0, 1]));
    }
}
