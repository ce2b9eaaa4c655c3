//! Capped-precision arithmetic in `Q_p`.
//!
//! A [`PadicNumber`] is stored as `p^v * u` where the unit `u` is known modulo
//! `p^rel`. Every operation propagates `rel` (the number of trustworthy digits
//! of the unit part):
//!
//! * addition keeps the smaller *absolute* precision `v + rel` of the operands,
//! * multiplication and division keep the smaller *relative* precision,
//! * cancellation that consumes every known digit produces an inexact zero
//!   `O(p^k)`, which is distinct from the exact zero.
//!
//! Integers and rationals enter at the working precision of a
//! [`PrecisionContext`], which is the report precision `N` plus a few guard
//! digits. Reports truncate back to `N`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest exponent `k` with `p^k <= 2^62`, so that products of two residues
/// fit in a `u128`.
pub fn max_digits(p: u64) -> u32 {
    let mut k = 0;
    let mut acc: u128 = 1;
    while acc * p as u128 <= 1u128 << 62 {
        acc *= p as u128;
        k += 1;
    }
    k
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn pow_u64(p: u64, k: u32) -> u64 {
    p.pow(k)
}

/// p-adic valuation of a nonzero integer.
pub fn vp_int(mut n: i128, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero integer");
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// v_p(n!) by Legendre's formula.
pub fn vp_factorial(n: u64, p: u64) -> u64 {
    let mut v = 0;
    let mut q = n / p;
    while q > 0 {
        v += q;
        q /= p;
    }
    v
}

pub(crate) fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, a as i128 % m as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "inverse of non-unit");
    t0.rem_euclid(m as i128) as u64
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Global parameters of a run: the prime, the report precision `N` and the
/// series truncation degree `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionContext {
    p: u64,
    prec: u32,
    trunc: usize,
}

impl PrecisionContext {
    pub fn new(p: u64, prec: u32, trunc: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p >= 1 << 31 {
            return Err(Error::InvalidContext(format!("prime {p} too large")));
        }
        if prec == 0 {
            return Err(Error::InvalidContext("precision must be at least 1".into()));
        }
        if trunc == 0 {
            return Err(Error::InvalidContext("truncation degree must be at least 1".into()));
        }
        let limit = max_digits(p);
        if prec > limit {
            return Err(Error::PrecisionTooLarge { p, digits: prec, limit });
        }
        Ok(Self { p, prec, trunc })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Report precision `N` in p-adic digits.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Series truncation degree `M`.
    pub fn trunc(&self) -> usize {
        self.trunc
    }

    /// Guard digits on top of `N`: enough to absorb the `log_p(M)` digits that
    /// binomial expansions up to degree `M` can cost, plus two.
    pub fn guard(&self) -> u32 {
        let mut g = 0u32;
        let mut acc = 1usize;
        while acc < self.trunc {
            acc = acc.saturating_mul(self.p as usize);
            g += 1;
        }
        g + 2
    }

    /// Relative precision given to integers and rationals on entry.
    pub fn working(&self) -> u32 {
        (self.prec + self.guard()).min(max_digits(self.p))
    }

    pub fn with_trunc(&self, trunc: usize) -> Result<Self> {
        Self::new(self.p, self.prec, trunc)
    }

    /// `q = p` for odd `p` and `q = 4` for `p = 2`; `1 + q` topologically
    /// generates the torsion-free part of the principal units.
    pub fn q(&self) -> u64 {
        if self.p == 2 {
            4
        } else {
            self.p
        }
    }

    /// Minimal valuation of the argument of `log`/`exp` around zero.
    pub fn log_domain_valuation(&self) -> i64 {
        if self.p == 2 {
            2
        } else {
            1
        }
    }

    pub fn int(&self, n: i128) -> PadicNumber {
        PadicNumber::from_int(self.p, n, self.working())
    }

    pub fn ratio(&self, num: i128, den: i128) -> Result<PadicNumber> {
        PadicNumber::from_ratio(self.p, num, den, self.working())
    }

    pub fn one(&self) -> PadicNumber {
        self.int(1)
    }

    pub fn zero(&self) -> PadicNumber {
        PadicNumber::exact_zero(self.p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Repr {
    ExactZero,
    /// Zero to absolute precision: the value is `O(p^abs)`.
    Zero { abs: i64 },
    Unit { val: i64, unit: u64, rel: u32 },
}

/// Result of [`PadicNumber::valuation`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    /// Inexact zero: the valuation is at least this bound.
    AtLeast(i64),
    Infinite,
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

/// An element of `Q_p` with a precision ledger.
///
/// `PartialEq` is structural (same digits and same precision), which is what
/// serialization round-trips need. Mathematical comparison of inexact values
/// goes through [`PadicNumber::agrees_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PadicNumber {
    p: u64,
    repr: Repr,
}

impl PadicNumber {
    pub fn exact_zero(p: u64) -> Self {
        Self { p, repr: Repr::ExactZero }
    }

    pub fn zero_to(p: u64, abs: i64) -> Self {
        Self { p, repr: Repr::Zero { abs } }
    }

    /// Builds `p^val * unit + O(p^(val + rel))`, normalizing `unit`.
    pub fn from_parts(p: u64, val: i64, unit: u64, rel: u32) -> Result<Self> {
        if rel == 0 {
            return Ok(Self::zero_to(p, val));
        }
        if rel > max_digits(p) {
            return Err(Error::PrecisionTooLarge { p, digits: rel, limit: max_digits(p) });
        }
        let m = pow_u64(p, rel);
        let u = unit % m;
        if u == 0 {
            return Ok(Self::zero_to(p, val + rel as i64));
        }
        let w = vp_int(u as i128, p);
        Ok(Self {
            p,
            repr: Repr::Unit { val: val + w as i64, unit: u / pow_u64(p, w), rel: rel - w },
        })
    }

    /// The integer `n` with `rel` known digits in its unit part.
    pub fn from_int(p: u64, n: i128, rel: u32) -> Self {
        if n == 0 {
            return Self::exact_zero(p);
        }
        let v = vp_int(n, p);
        let m = pow_u64(p, rel) as i128;
        let u = (n / (p as i128).pow(v)).rem_euclid(m) as u64;
        Self { p, repr: Repr::Unit { val: v as i64, unit: u, rel } }
    }

    pub fn from_ratio(p: u64, num: i128, den: i128, rel: u32) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Self::from_int(p, num, rel).try_div(&Self::from_int(p, den, rel))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::ExactZero)
    }

    /// True for exact zero and for `O(p^k)`.
    pub fn is_zero(&self) -> bool {
        !matches!(self.repr, Repr::Unit { .. })
    }

    pub fn valuation(&self) -> Valuation {
        match self.repr {
            Repr::ExactZero => Valuation::Infinite,
            Repr::Zero { abs } => Valuation::AtLeast(abs),
            Repr::Unit { val, .. } => Valuation::Finite(val),
        }
    }

    /// Certified lower bound on the valuation (`i64::MAX` for exact zero).
    pub fn min_valuation(&self) -> i64 {
        match self.repr {
            Repr::ExactZero => i64::MAX,
            Repr::Zero { abs } => abs,
            Repr::Unit { val, .. } => val,
        }
    }

    /// Number of trustworthy digits of the unit part (0 for inexact zero,
    /// `u32::MAX` for exact zero).
    pub fn known_precision(&self) -> u32 {
        match self.repr {
            Repr::ExactZero => u32::MAX,
            Repr::Zero { .. } => 0,
            Repr::Unit { rel, .. } => rel,
        }
    }

    /// `v + rel`; `None` for exact zero.
    pub fn abs_precision(&self) -> Option<i64> {
        match self.repr {
            Repr::ExactZero => None,
            Repr::Zero { abs } => Some(abs),
            Repr::Unit { val, rel, .. } => Some(val + rel as i64),
        }
    }

    /// Unit part modulo `p^known_precision`.
    pub fn unit_part(&self) -> Option<u64> {
        match self.repr {
            Repr::Unit { unit, .. } => Some(unit),
            _ => None,
        }
    }

    /// Little-endian base-p digits of the unit part.
    pub fn digits(&self) -> Vec<u64> {
        match self.repr {
            Repr::Unit { mut unit, rel, .. } => (0..rel)
                .map(|_| {
                    let d = unit % self.p;
                    unit /= self.p;
                    d
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.repr, Repr::Unit { val: 0, .. })
    }

    pub fn is_integral(&self) -> bool {
        self.min_valuation() >= 0
    }

    /// Caps the absolute precision at `abs`.
    pub fn truncate_abs(&self, abs: i64) -> Self {
        match self.repr {
            Repr::ExactZero => Self::zero_to(self.p, abs),
            Repr::Zero { abs: a } => Self::zero_to(self.p, a.min(abs)),
            Repr::Unit { val, unit, rel } => {
                if val >= abs {
                    Self::zero_to(self.p, abs)
                } else if val + rel as i64 <= abs {
                    *self
                } else {
                    let r = (abs - val) as u32;
                    Self { p: self.p, repr: Repr::Unit { val, unit: unit % pow_u64(self.p, r), rel: r } }
                }
            }
        }
    }

    /// A representative with at least `rel` unit digits: unknown digits are
    /// filled with zeros and an inexact zero becomes exact zero. Used when the
    /// caller accounts for the original uncertainty separately.
    pub fn representative(&self, rel: u32) -> Self {
        match self.repr {
            Repr::ExactZero | Repr::Zero { .. } => Self::exact_zero(self.p),
            Repr::Unit { val, unit, rel: r } => {
                Self { p: self.p, repr: Repr::Unit { val, unit, rel: r.max(rel.min(max_digits(self.p))) } }
            }
        }
    }

    /// Like [`truncate_abs`](Self::truncate_abs) but leaves exact zero alone.
    pub fn cap_abs(&self, abs: i64) -> Self {
        if self.is_exact_zero() {
            *self
        } else {
            self.truncate_abs(abs)
        }
    }

    /// Residue modulo `p^k`, if the value is integral and known that far.
    pub fn residue(&self, k: u32) -> Option<u64> {
        let m = pow_u64(self.p, k);
        match self.repr {
            Repr::ExactZero => Some(0),
            Repr::Zero { abs } => (abs >= k as i64).then_some(0),
            Repr::Unit { val, unit, rel } => {
                if val < 0 || val + (rel as i64) < k as i64 {
                    return None;
                }
                if val >= k as i64 {
                    return Some(0);
                }
                Some(mul_mod(unit % m, pow_u64(self.p, val as u32), m))
            }
        }
    }

    /// Agreement to `digits` absolute digits: `self - other` is certified to
    /// have valuation at least `digits`.
    pub fn agrees_with(&self, other: &Self, digits: i64) -> bool {
        (*self - *other).min_valuation() >= digits
    }

    fn check_p(&self, other: &Self) {
        assert_eq!(self.p, other.p, "p-adic operands over different primes");
    }

    pub fn try_inv(&self) -> Result<Self> {
        match self.repr {
            Repr::ExactZero => Err(Error::DivisionByZero),
            Repr::Zero { abs } => Err(Error::DivisionByInexactZero(abs)),
            Repr::Unit { val, unit, rel } => {
                let m = pow_u64(self.p, rel);
                Ok(Self { p: self.p, repr: Repr::Unit { val: -val, unit: inv_mod(unit, m), rel } })
            }
        }
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.check_p(other);
        Ok(*self * other.try_inv()?)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = *self;
        let mut acc = Self::from_int(self.p, 1, max_digits(self.p));
        if e == 0 {
            return match self.repr {
                Repr::Unit { rel, .. } => Self::from_int(self.p, 1, rel),
                _ => acc,
            };
        }
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                acc = if first { base } else { acc * base };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }

    fn add_impl(&self, other: &Self) -> Self {
        self.check_p(other);
        let p = self.p;
        match (self.repr, other.repr) {
            (Repr::ExactZero, _) => *other,
            (_, Repr::ExactZero) => *self,
            (Repr::Zero { abs: a }, Repr::Zero { abs: b }) => Self::zero_to(p, a.min(b)),
            (Repr::Zero { abs }, Repr::Unit { .. }) => other.truncate_abs(abs),
            (Repr::Unit { .. }, Repr::Zero { abs }) => self.truncate_abs(abs),
            (Repr::Unit { val: va, unit: ua, rel: ra }, Repr::Unit { val: vb, unit: ub, rel: rb }) => {
                let abs = (va + ra as i64).min(vb + rb as i64);
                let v = va.min(vb);
                if abs <= v {
                    return Self::zero_to(p, abs);
                }
                let k = (abs - v) as u32;
                let m = pow_u64(p, k);
                let shift = |u: u64, s: i64| -> u64 {
                    if s >= k as i64 {
                        0
                    } else {
                        mul_mod(u % m, pow_u64(p, s as u32), m)
                    }
                };
                let s = (shift(ua, va - v) as u128 + shift(ub, vb - v) as u128) % m as u128;
                Self::from_parts(p, v, s as u64, k).expect("digits within limit")
            }
        }
    }

    fn mul_impl(&self, other: &Self) -> Self {
        self.check_p(other);
        let p = self.p;
        match (self.repr, other.repr) {
            (Repr::ExactZero, _) | (_, Repr::ExactZero) => Self::exact_zero(p),
            (Repr::Zero { abs: a }, Repr::Zero { abs: b }) => Self::zero_to(p, a + b),
            (Repr::Zero { abs }, Repr::Unit { val, .. }) | (Repr::Unit { val, .. }, Repr::Zero { abs }) => {
                Self::zero_to(p, abs + val)
            }
            (Repr::Unit { val: va, unit: ua, rel: ra }, Repr::Unit { val: vb, unit: ub, rel: rb }) => {
                let rel = ra.min(rb);
                let m = pow_u64(p, rel);
                Self { p, repr: Repr::Unit { val: va + vb, unit: mul_mod(ua % m, ub % m, m), rel } }
            }
        }
    }

    fn neg_impl(&self) -> Self {
        match self.repr {
            Repr::Unit { val, unit, rel } => {
                let m = pow_u64(self.p, rel);
                Self { p: self.p, repr: Repr::Unit { val, unit: (m - unit) % m, rel } }
            }
            _ => *self,
        }
    }
}

impl std::ops::Add for PadicNumber {
    type Output = PadicNumber;
    fn add(self, rhs: Self) -> Self {
        self.add_impl(&rhs)
    }
}

impl std::ops::Sub for PadicNumber {
    type Output = PadicNumber;
    fn sub(self, rhs: Self) -> Self {
        self.add_impl(&rhs.neg_impl())
    }
}

impl std::ops::Mul for PadicNumber {
    type Output = PadicNumber;
    fn mul(self, rhs: Self) -> Self {
        self.mul_impl(&rhs)
    }
}

impl std::ops::Neg for PadicNumber {
    type Output = PadicNumber;
    fn neg(self) -> Self {
        self.neg_impl()
    }
}

impl std::ops::AddAssign for PadicNumber {
    fn add_assign(&mut self, rhs: Self) {
        *self = self.add_impl(&rhs);
    }
}

impl fmt::Display for PadicNumber {
    /// `p^v * (d0 + d1*p + d2*p^2 + ...) + O(p^K)`; zero digits above `d0`
    /// are omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.p;
        match self.repr {
            Repr::ExactZero => write!(f, "O({p}^inf)"),
            Repr::Zero { abs } => write!(f, "O({p}^{abs})"),
            Repr::Unit { val, rel, .. } => {
                write!(f, "{p}^{val} * (")?;
                let mut first = true;
                for (i, d) in self.digits().into_iter().enumerate() {
                    if d == 0 && i > 0 {
                        continue;
                    }
                    if !first {
                        write!(f, " + ")?;
                    }
                    first = false;
                    match i {
                        0 => write!(f, "{d}")?,
                        1 => write!(f, "{d}*{p}")?,
                        _ => write!(f, "{d}*{p}^{i}")?,
                    }
                }
                write!(f, ") + O({p}^{})", val + rel as i64)
            }
        }
    }
}

fn parse_power(s: &str) -> Result<(u64, Option<i64>)> {
    let (b, e) = s
        .trim()
        .split_once('^')
        .ok_or_else(|| Error::Parse(format!("expected p^k, got {s:?}")))?;
    let p = b.trim().parse::<u64>().map_err(|e| Error::Parse(e.to_string()))?;
    let e = e.trim();
    if e == "inf" {
        return Ok((p, None));
    }
    let k = e.parse::<i64>().map_err(|e| Error::Parse(e.to_string()))?;
    Ok((p, Some(k)))
}

impl FromStr for PadicNumber {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tail) = match s.rfind("O(") {
            Some(i) => (&s[..i], &s[i + 2..]),
            None => return Err(Error::Parse(format!("missing O(p^k) term in {s:?}"))),
        };
        let tail = tail
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("unbalanced O(...) in {s:?}")))?;
        let (p, abs) = parse_power(tail)?;
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let head = head.trim();
        if head.is_empty() {
            return Ok(match abs {
                None => Self::exact_zero(p),
                Some(k) => Self::zero_to(p, k),
            });
        }
        let abs = abs.ok_or_else(|| Error::Parse("nonzero value with infinite precision".into()))?;
        let head = head
            .strip_suffix('+')
            .ok_or_else(|| Error::Parse(format!("expected '+' before O(...) in {s:?}")))?
            .trim();
        let (scale, body) = head
            .split_once('*')
            .ok_or_else(|| Error::Parse(format!("expected p^v * (...) in {s:?}")))?;
        let (p2, val) = parse_power(scale)?;
        let val = val.ok_or_else(|| Error::Parse("infinite valuation on nonzero value".into()))?;
        if p2 != p {
            return Err(Error::PrimeMismatch(p, p2));
        }
        let body = body
            .trim()
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("expected parenthesized digits in {s:?}")))?;
        if abs <= val {
            return Err(Error::Parse(format!("precision O({p}^{abs}) below valuation {val}")));
        }
        let rel = (abs - val) as u32;
        if rel > max_digits(p) {
            return Err(Error::PrecisionTooLarge { p, digits: rel, limit: max_digits(p) });
        }
        let mut unit: u64 = 0;
        for term in body.split('+') {
            let term = term.trim();
            let (d, i) = match term.split_once('*') {
                None => (term, 0u32),
                Some((d, pw)) => {
                    let pw = pw.trim();
                    let i = match pw.split_once('^') {
                        None => {
                            if pw.parse::<u64>().ok() != Some(p) {
                                return Err(Error::Parse(format!("bad digit term {term:?}")));
                            }
                            1
                        }
                        Some(_) => {
                            let (b, e) = parse_power(pw)?;
                            if b != p {
                                return Err(Error::PrimeMismatch(p, b));
                            }
                            e.ok_or_else(|| Error::Parse("infinite digit index".into()))? as u32
                        }
                    };
                    (d, i)
                }
            };
            let d = d.trim().parse::<u64>().map_err(|e| Error::Parse(e.to_string()))?;
            if d >= p || i >= rel {
                return Err(Error::Parse(format!("digit term {term:?} out of range")));
            }
            unit += d * pow_u64(p, i);
        }
        if unit.is_multiple_of(p) {
            return Err(Error::Parse(format!("leading digit of unit part must be nonzero in {s:?}")));
        }
        Ok(Self { p, repr: Repr::Unit { val, unit, rel } })
    }
}

impl TryFrom<String> for PadicNumber {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PadicNumber> for String {
    fn from(x: PadicNumber) -> String {
        x.to_string()
    }
}

/// Teichmüller representative of a nonzero residue: the `(p-1)`-th root of
/// unity congruent to `r`, found as the fixed point of `x -> x^p`.
pub fn teichmuller(ctx: &PrecisionContext, r: u64) -> Result<PadicNumber> {
    let p = ctx.p();
    if r.is_multiple_of(p) {
        return Err(Error::NotUnit(format!("residue {r} is divisible by {p}")));
    }
    let k = ctx.working();
    let m = pow_u64(p, k);
    let mut x = r % m;
    for _ in 0..=k {
        let mut y: u64 = 1;
        for _ in 0..p {
            y = mul_mod(y, x, m);
        }
        if y == x {
            break;
        }
        x = y;
    }
    Ok(PadicNumber::from_int(p, x as i128, k))
}

/// `log(a) = sum (-1)^(k+1) (a-1)^k / k` for `a` in `1 + qZ_p`.
pub fn plog(ctx: &PrecisionContext, a: &PadicNumber) -> Result<PadicNumber> {
    let p = ctx.p();
    let z = *a - ctx.one();
    let need = ctx.log_domain_valuation();
    if z.min_valuation() < need {
        return Err(Error::OutsideDomain(format!("log needs a = 1 mod p^{need}, got {a}")));
    }
    let (v, abs) = match z.valuation() {
        Valuation::Finite(v) => (v, z.abs_precision().unwrap()),
        _ => return Ok(z),
    };
    let mut sum = PadicNumber::exact_zero(p);
    let mut zk = z;
    let mut k: i64 = 1;
    // v_p(k) <= log_p(k), so terms past this bound are below the precision.
    while k * v - ilog(k as u64, p) < abs {
        let term = zk.try_div(&ctx.int(k as i128))?;
        sum = if k % 2 == 1 { sum + term } else { sum - term };
        zk = zk * z;
        k += 1;
    }
    Ok(sum.truncate_abs(abs))
}

fn ilog(n: u64, p: u64) -> i64 {
    let mut e = 0;
    let mut acc = p;
    while acc <= n {
        acc = acc.saturating_mul(p);
        e += 1;
    }
    e
}

/// `exp(a) = sum a^k / k!` for `v_p(a) >= 1` (`>= 2` when `p = 2`).
pub fn pexp(ctx: &PrecisionContext, a: &PadicNumber) -> Result<PadicNumber> {
    let p = ctx.p();
    let need = ctx.log_domain_valuation();
    if a.min_valuation() < need {
        return Err(Error::OutsideDomain(format!("exp needs v_p(a) >= {need}, got {a}")));
    }
    let one = ctx.one();
    let (v, abs) = match a.valuation() {
        Valuation::Finite(v) => (v, a.abs_precision().unwrap()),
        Valuation::AtLeast(k) => return Ok(one.truncate_abs(k)),
        Valuation::Infinite => return Ok(one),
    };
    let mut sum = one;
    let mut term = one;
    let mut k: i64 = 1;
    // v_p(k!) <= (k-1)/(p-1) bounds the loss of each term.
    while k * v - (k - 1) / (p as i64 - 1) < abs {
        term = term * *a;
        term = term.try_div(&ctx.int(k as i128))?;
        sum += term;
        k += 1;
    }
    Ok(sum.truncate_abs(abs))
}

/// Generalized binomial coefficient `s(s-1)...(s-n+1)/n!` for `s` in `Z_p`.
pub fn pbinomial(ctx: &PrecisionContext, s: &PadicNumber, n: usize) -> Result<PadicNumber> {
    Ok(binomial_row(ctx, s, n + 1)?.pop().expect("nonempty row"))
}

/// `[C(s,0), ..., C(s,count-1)]`, computed by `C(s,k) = C(s,k-1)(s-k+1)/k`.
pub fn binomial_row(ctx: &PrecisionContext, s: &PadicNumber, count: usize) -> Result<Vec<PadicNumber>> {
    if !s.is_integral() {
        return Err(Error::NotIntegral(format!("binomial argument {s}")));
    }
    let mut row = Vec::with_capacity(count);
    let mut c = ctx.one();
    for k in 0..count {
        if k > 0 {
            c = (c * (*s - ctx.int(k as i128 - 1))).try_div(&ctx.int(k as i128))?;
        }
        row.push(c);
    }
    Ok(row)
}
