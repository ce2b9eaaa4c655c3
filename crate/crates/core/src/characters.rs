//! Continuous characters of the diagonal torus `T` of `GL_2(Z_p)`.
//!
//! `Z_p^x = mu x (1 + qZ_p)` with `mu` generated by `tau` (the Teichmüller
//! lift of the smallest primitive root mod `p`, or `-1` when `p = 2`) and
//! `1 + qZ_p` topologically generated by `1 + q`. A character is stored by its
//! values on `(tau, 1)`, `(1, tau)`, `(1 + q, 1)` and `(1, 1 + q)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{pexp, plog, teichmuller, PadicNumber, PrecisionContext};

/// Smallest primitive root modulo an odd prime (1 for `p = 2`).
pub fn smallest_primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let order = p - 1;
    let mut factors = Vec::new();
    let mut n = order;
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            factors.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    let pow_mod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    };
    (2..p).find(|&g| factors.iter().all(|&f| pow_mod(g, order / f) != 1)).expect("primitive root exists")
}

/// Generator `tau` of the torsion subgroup of `Z_p^x`.
pub fn torsion_generator(ctx: &PrecisionContext) -> PadicNumber {
    if ctx.p() == 2 {
        ctx.int(-1)
    } else {
        teichmuller(ctx, smallest_primitive_root(ctx.p())).expect("primitive root is a unit")
    }
}

pub fn torsion_order(p: u64) -> u64 {
    if p == 2 {
        2
    } else {
        p - 1
    }
}

/// `a = tau^i * (1 + q)^s`.
#[derive(Clone, Debug)]
pub struct UnitDecomposition {
    pub torsion_exponent: u64,
    pub principal_exponent: PadicNumber,
}

pub fn decompose_unit(ctx: &PrecisionContext, a: &PadicNumber) -> Result<UnitDecomposition> {
    if !a.is_unit() {
        return Err(Error::NotUnit(a.to_string()));
    }
    let p = ctx.p();
    let (i, torsion_part) = if p == 2 {
        let r = a.residue(2).ok_or_else(|| Error::NotUnit(a.to_string()))?;
        if r == 1 {
            (0, ctx.one())
        } else {
            (1, ctx.int(-1))
        }
    } else {
        let r = a.residue(1).expect("unit");
        let g = smallest_primitive_root(p);
        let mut acc = 1u64;
        let mut i = 0;
        while acc != r {
            acc = acc * g % p;
            i += 1;
        }
        (i, teichmuller(ctx, r)?)
    };
    let principal = a.try_div(&torsion_part)?;
    let s = plog(ctx, &principal)?.try_div(&plog(ctx, &ctx.int(1 + ctx.q() as i128))?)?;
    Ok(UnitDecomposition { torsion_exponent: i, principal_exponent: s })
}

/// `u^s = exp(s log u)` for a principal unit `u` and `s` in `Z_p`.
pub fn principal_power(ctx: &PrecisionContext, u: &PadicNumber, s: &PadicNumber) -> Result<PadicNumber> {
    pexp(ctx, &(*s * plog(ctx, u)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusCharacter {
    p: u64,
    torsion: [PadicNumber; 2],
    principal: [PadicNumber; 2],
    conductor_hint: Option<u32>,
}

impl TorusCharacter {
    pub fn from_images(
        ctx: &PrecisionContext,
        torsion: [PadicNumber; 2],
        principal: [PadicNumber; 2],
        conductor_hint: Option<u32>,
    ) -> Result<Self> {
        let digits = ctx.prec() as i64;
        let one = ctx.one();
        for z in &torsion {
            if !z.is_unit() || !z.pow(torsion_order(ctx.p())).agrees_with(&one, digits) {
                return Err(Error::CharacterVerification(format!(
                    "torsion image {z} is not a {}-th root of unity",
                    torsion_order(ctx.p())
                )));
            }
        }
        let q_val = if ctx.p() == 2 { 2 } else { 1 };
        for u in &principal {
            if (*u - one).min_valuation() < q_val {
                return Err(Error::CharacterVerification(format!("principal image {u} is not in 1 + qZ_p")));
            }
        }
        Ok(Self { p: ctx.p(), torsion, principal, conductor_hint })
    }

    pub fn trivial(ctx: &PrecisionContext) -> Self {
        let one = ctx.one();
        Self { p: ctx.p(), torsion: [one, one], principal: [one, one], conductor_hint: Some(0) }
    }

    /// `diag(a, d) -> a^m1 d^m2`.
    pub fn closed_form(ctx: &PrecisionContext, m1: i64, m2: i64) -> Self {
        let hint = if m1 == 0 && m2 == 0 { Some(0) } else { None };
        let img = |m: i64, g: PadicNumber| {
            let x = g.pow(m.unsigned_abs());
            if m < 0 {
                x.try_inv().expect("unit")
            } else {
                x
            }
        };
        let tau = torsion_generator(ctx);
        let gen = ctx.int(1 + ctx.q() as i128);
        Self {
            p: ctx.p(),
            torsion: [img(m1, tau), img(m2, tau)],
            principal: [img(m1, gen), img(m2, gen)],
            conductor_hint: hint,
        }
    }

    /// Trivial on torsion and on the first factor, `d -> <d>^c` on the
    /// second: its invariant is `c`.
    pub fn with_c(ctx: &PrecisionContext, c: &PadicNumber) -> Result<Self> {
        let gen = ctx.int(1 + ctx.q() as i128);
        let one = ctx.one();
        let img = principal_power(ctx, &gen, c)?;
        Self::from_images(ctx, [one, one], [one, img], None)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn torsion_images(&self) -> [PadicNumber; 2] {
        self.torsion
    }

    pub fn principal_images(&self) -> [PadicNumber; 2] {
        self.principal
    }

    pub fn conductor_hint(&self) -> Option<u32> {
        self.conductor_hint
    }

    fn eval_factor(&self, ctx: &PrecisionContext, slot: usize, a: &PadicNumber) -> Result<PadicNumber> {
        let dec = decompose_unit(ctx, a)?;
        let tors = self.torsion[slot].pow(dec.torsion_exponent);
        let principal = principal_power(ctx, &self.principal[slot], &dec.principal_exponent)?;
        Ok(tors * principal)
    }

    /// `chi(diag(a, d))`.
    pub fn eval(&self, ctx: &PrecisionContext, a: &PadicNumber, d: &PadicNumber) -> Result<PadicNumber> {
        Ok(self.eval_factor(ctx, 0, a)? * self.eval_factor(ctx, 1, d)?)
    }

    /// Value on `t_a = diag(a, 1)`.
    pub fn eval_t(&self, ctx: &PrecisionContext, a: &PadicNumber) -> Result<PadicNumber> {
        self.eval_factor(ctx, 0, a)
    }

    /// Value on `diag(a^-1, a)`.
    pub fn eval_antidiagonal(&self, ctx: &PrecisionContext, a: &PadicNumber) -> Result<PadicNumber> {
        self.eval(ctx, &a.try_inv()?, a)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let z = |a: [PadicNumber; 2], b: [PadicNumber; 2]| [a[0] * b[0], a[1] * b[1]];
        Self {
            p: self.p,
            torsion: z(self.torsion, other.torsion),
            principal: z(self.principal, other.principal),
            conductor_hint: None,
        }
    }

    pub fn inverse(&self) -> Self {
        let inv = |a: [PadicNumber; 2]| [a[0].try_inv().expect("unit"), a[1].try_inv().expect("unit")];
        Self { p: self.p, torsion: inv(self.torsion), principal: inv(self.principal), conductor_hint: self.conductor_hint }
    }

    /// `w chi(t) = chi(w^-1 t w)`: conjugation by `w` swaps the diagonal entries.
    pub fn w_twist(&self) -> Self {
        Self {
            p: self.p,
            torsion: [self.torsion[1], self.torsion[0]],
            principal: [self.principal[1], self.principal[0]],
            conductor_hint: self.conductor_hint,
        }
    }

    pub fn to_spec(&self) -> CharacterSpec {
        CharacterSpec {
            p: self.p,
            images: [
                ImageSpec::Explicit(self.torsion[0]),
                ImageSpec::Explicit(self.torsion[1]),
                ImageSpec::Explicit(self.principal[0]),
                ImageSpec::Explicit(self.principal[1]),
            ],
            conductor_hint: self.conductor_hint,
        }
    }
}

/// `c(chi)` with `chi(diag(a^-1, a)) = exp(c log a)` near `a = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CInvariant {
    pub c: PadicNumber,
    pub derivation_precision: i64,
}

pub fn c_of_chi(ctx: &PrecisionContext, chi: &TorusCharacter) -> Result<CInvariant> {
    let q = ctx.q() as i128;
    let gen = ctx.int(1 + q);
    let value = chi.eval_antidiagonal(ctx, &gen)?;
    let c = plog(ctx, &value)?.try_div(&plog(ctx, &gen)?)?;
    if !c.is_integral() {
        return Err(Error::CharacterVerification(format!("c(chi) = {c} is not in Z_p")));
    }
    let derivation_precision = c.abs_precision().unwrap_or(ctx.working() as i64).min(ctx.prec() as i64);
    let check_digits = derivation_precision - 1;
    for a in [gen, ctx.int((1 + q) * (1 + q)), ctx.int(1 + 2 * q + q * q * 3)] {
        let direct = chi.eval_antidiagonal(ctx, &a)?;
        let resub = principal_power(ctx, &a, &c)?;
        if !direct.agrees_with(&resub, check_digits) {
            return Err(Error::CharacterVerification(format!(
                "exp(c log a) = {resub} but chi(diag(a^-1, a)) = {direct} at a = {a}"
            )));
        }
    }
    Ok(CInvariant { c, derivation_precision })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CClassification {
    /// The unique `m` in `[0, bound]` with `c = m` at the derivation precision.
    pub in_n0_at: Option<u64>,
    /// The unique `m` in `[0, bound]` with `c = -m` at the derivation precision.
    pub in_neg_n0_at: Option<u64>,
    pub bound: u64,
    pub precision: i64,
}

impl CClassification {
    pub fn summary(&self) -> String {
        let pos = match self.in_n0_at {
            Some(m) => format!("in N0 at {m}"),
            None => "not in N0 within precision".to_string(),
        };
        let neg = match self.in_neg_n0_at {
            Some(m) => format!("in -N0 at {m}"),
            None => "not in -N0 within precision".to_string(),
        };
        format!("{pos}; {neg} (bound {}, precision {})", self.bound, self.precision)
    }
}

pub fn classify_c(ctx: &PrecisionContext, c: &CInvariant, bound: u64) -> Result<CClassification> {
    let digits = c.derivation_precision;
    let reach = (ctx.p() as f64).powi(digits.clamp(0, 60) as i32);
    if bound as f64 >= reach {
        return Err(Error::InvalidInput(format!("bound {bound} is not below p^{digits}")));
    }
    let value = c.c.truncate_abs(digits);
    let find = |sign: i128| (0..=bound).find(|&m| (value - ctx.int(sign * m as i128)).is_zero());
    Ok(CClassification { in_n0_at: find(1), in_neg_n0_at: find(-1), bound, precision: digits })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conductor {
    Level(u32),
    /// Not trivial on `1 + p^n Z_p` for any `n` up to this bound.
    Exceeds(u32),
}

/// Least `n` with `chi` trivial on all units congruent to 1 mod `p^n`,
/// detected at precision `N`.
pub fn char_conductor(ctx: &PrecisionContext, chi: &TorusCharacter) -> Result<Conductor> {
    let digits = ctx.prec() as i64;
    let one = ctx.one();
    let trivial_on = |g: &PadicNumber| -> Result<bool> {
        Ok(chi.eval(ctx, g, &one)?.agrees_with(&one, digits) && chi.eval(ctx, &one, g)?.agrees_with(&one, digits))
    };
    let torsion_trivial = chi.torsion.iter().all(|z| z.agrees_with(&one, digits));
    let p = ctx.p();
    let base_level = if p == 2 { 2 } else { 1 };
    let principal_gen = |n: u32| -> PadicNumber {
        // generator of 1 + p^n Z_p for n >= base_level
        let e = (p as i128).pow(n - base_level);
        ctx.int(1 + ctx.q() as i128).pow(e as u64)
    };
    if trivial_on(&principal_gen(base_level))? {
        return Ok(Conductor::Level(if torsion_trivial { 0 } else { base_level }));
    }
    // At level N every value is 1 mod p^N, so N itself is not detectable.
    for n in base_level + 1..ctx.prec() {
        if trivial_on(&principal_gen(n))? {
            return Ok(Conductor::Level(n));
        }
    }
    Ok(Conductor::Exceeds(ctx.prec()))
}

/// One generator image in a character spec file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ImageSpec {
    /// Value of `a^m1 d^m2` on this slot's generator.
    Closed { m1: i64, m2: i64 },
    Explicit(PadicNumber),
    /// `exp(c log g)` for the slot's principal generator `g = 1 + q`.
    ExpCLog(PadicNumber),
    /// As [`ImageSpec::ExpCLog`] with a rational `c = num / den`, entered at
    /// the working precision when the spec is resolved.
    ExpCLogRatio { num: i64, den: i64 },
}

fn parse_ratio(s: &str) -> Option<(i64, i64)> {
    let (num, den) = s.split_once('/').unwrap_or((s, "1"));
    let num = num.trim().parse().ok()?;
    let den: i64 = den.trim().parse().ok()?;
    (den != 0).then_some((num, den))
}

impl fmt::Display for ImageSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImageSpec::Closed { m1, m2 } => write!(f, "a^{m1} d^{m2}"),
            ImageSpec::Explicit(x) => write!(f, "{x}"),
            ImageSpec::ExpCLog(c) => write!(f, "exp(c*log) c = {c}"),
            ImageSpec::ExpCLogRatio { num, den } => write!(f, "exp(c*log) c = {num}/{den}"),
        }
    }
}

impl FromStr for ImageSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("exp(c*log)") {
            let c = rest
                .trim()
                .strip_prefix("c")
                .and_then(|r| r.trim().strip_prefix('='))
                .ok_or_else(|| Error::Parse(format!("expected 'exp(c*log) c = ...', got {s:?}")))?;
            if let Some((num, den)) = parse_ratio(c) {
                return Ok(ImageSpec::ExpCLogRatio { num, den });
            }
            return Ok(ImageSpec::ExpCLog(c.parse()?));
        }
        if s.starts_with("a^") {
            let mut parts = s.split_whitespace();
            let a = parts.next().and_then(|t| t.strip_prefix("a^"));
            let d = parts.next().and_then(|t| t.strip_prefix("d^"));
            if let (Some(a), Some(d), None) = (a, d, parts.next()) {
                let m1 = a.parse().map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
                let m2 = d.parse().map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
                return Ok(ImageSpec::Closed { m1, m2 });
            }
            return Err(Error::Parse(format!("expected 'a^m1 d^m2', got {s:?}")));
        }
        Ok(ImageSpec::Explicit(s.parse()?))
    }
}

const SLOTS: [&str; 4] = ["torsion_1", "torsion_2", "principal_1", "principal_2"];

/// Character spec file: `p`, the four generator images and an optional
/// conductor hint, one `key = value` per line. `#` starts a comment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterSpec {
    pub p: u64,
    pub images: [ImageSpec; 4],
    pub conductor_hint: Option<u32>,
}

impl CharacterSpec {
    pub fn closed(p: u64, m1: i64, m2: i64) -> Self {
        let c = ImageSpec::Closed { m1, m2 };
        Self { p, images: [c.clone(), c.clone(), c.clone(), c], conductor_hint: None }
    }

    pub fn resolve(&self, ctx: &PrecisionContext) -> Result<TorusCharacter> {
        if self.p != ctx.p() {
            return Err(Error::PrimeMismatch(self.p, ctx.p()));
        }
        let tau = torsion_generator(ctx);
        let gen = ctx.int(1 + ctx.q() as i128);
        let mut vals = Vec::with_capacity(4);
        for (i, img) in self.images.iter().enumerate() {
            let torsion_slot = i < 2;
            let first_factor = i % 2 == 0;
            let v = match img {
                ImageSpec::Closed { m1, m2 } => {
                    let m = if first_factor { *m1 } else { *m2 };
                    let g = if torsion_slot { tau } else { gen };
                    let x = g.pow(m.unsigned_abs());
                    if m < 0 {
                        x.try_inv()?
                    } else {
                        x
                    }
                }
                ImageSpec::Explicit(x) => *x,
                ImageSpec::ExpCLog(_) | ImageSpec::ExpCLogRatio { .. } => {
                    if torsion_slot {
                        return Err(Error::Parse(format!("exp(c*log) is not allowed for {}", SLOTS[i])));
                    }
                    let c = match img {
                        ImageSpec::ExpCLogRatio { num, den } => ctx.ratio(*num as i128, *den as i128)?,
                        ImageSpec::ExpCLog(c) => *c,
                        _ => unreachable!(),
                    };
                    principal_power(ctx, &gen, &c)?
                }
            };
            vals.push(v);
        }
        TorusCharacter::from_images(ctx, [vals[0], vals[1]], [vals[2], vals[3]], self.conductor_hint)
    }
}

impl fmt::Display for CharacterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p = {}", self.p)?;
        for (k, img) in SLOTS.iter().zip(&self.images) {
            writeln!(f, "{k} = {img}")?;
        }
        if let Some(h) = self.conductor_hint {
            writeln!(f, "conductor_hint = {h}")?;
        }
        Ok(())
    }
}

impl FromStr for CharacterSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = None;
        let mut images: [Option<ImageSpec>; 4] = Default::default();
        let mut hint = None;
        for line in s.lines() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("expected key = value: {line:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "p" => p = Some(v.parse::<u64>().map_err(|e| Error::Parse(e.to_string()))?),
                "conductor_hint" => hint = Some(v.parse::<u32>().map_err(|e| Error::Parse(e.to_string()))?),
                _ => {
                    let i = SLOTS
                        .iter()
                        .position(|s| *s == k)
                        .ok_or_else(|| Error::Parse(format!("unknown key {k:?}")))?;
                    images[i] = Some(v.parse()?);
                }
            }
        }
        let p = p.ok_or_else(|| Error::Parse("missing p".into()))?;
        let [a, b, c, d] = images;
        let missing = |i: usize| Error::Parse(format!("missing {}", SLOTS[i]));
        Ok(Self {
            p,
            images: [a.ok_or_else(|| missing(0))?, b.ok_or_else(|| missing(1))?, c.ok_or_else(|| missing(2))?, d.ok_or_else(|| missing(3))?],
            conductor_hint: hint,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> PrecisionContext {
        PrecisionContext::new(p, 16, 64).unwrap()
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(smallest_primitive_root(3), 2);
        assert_eq!(smallest_primitive_root(5), 2);
        assert_eq!(smallest_primitive_root(7), 3);
        assert_eq!(smallest_primitive_root(2), 1);
    }

    #[test]
    fn trivial_and_projection() {
        let c = ctx(5);
        let a = c.int(7);
        let t = TorusCharacter::trivial(&c);
        assert!(t.eval(&c, &a, &c.int(3)).unwrap().agrees_with(&c.one(), 16));
        let d = TorusCharacter::closed_form(&c, 0, 1);
        assert!(d.eval_antidiagonal(&c, &a).unwrap().agrees_with(&a, 15));
    }

    #[test]
    fn eval_round_trips_principal_image() {
        let c = ctx(5);
        let six = c.int(6);
        let img = pexp(&c, &(c.int(2) * plog(&c, &six).unwrap())).unwrap();
        let chi = TorusCharacter::from_images(&c, [c.one(), c.one()], [c.one(), img], None).unwrap();
        let v = chi.eval(&c, &c.one(), &six).unwrap();
        assert!(v.agrees_with(&img, 15));
    }

    #[test]
    fn c_examples() {
        let c = ctx(5);
        let z = c_of_chi(&c, &TorusCharacter::trivial(&c)).unwrap();
        assert!(z.c.is_zero());
        let one = c_of_chi(&c, &TorusCharacter::closed_form(&c, 0, 1)).unwrap();
        assert!(one.c.agrees_with(&c.one(), 14));
        let three = c_of_chi(&c, &TorusCharacter::closed_form(&c, 2, 5)).unwrap();
        assert!(three.c.agrees_with(&c.int(3), 14));
    }

    #[test]
    fn twist_negates_c() {
        let c = ctx(3);
        let chi = TorusCharacter::closed_form(&c, 0, 1);
        let wchi = chi.w_twist();
        assert_eq!(wchi, TorusCharacter::closed_form(&c, 1, 0));
        assert!(c_of_chi(&c, &wchi).unwrap().c.agrees_with(&c.int(-1), 14));
        assert_eq!(wchi.w_twist(), chi);
        let triv = TorusCharacter::trivial(&c);
        assert_eq!(triv.w_twist(), triv);
    }

    #[test]
    fn classification_examples() {
        let c = ctx(5);
        let three = c_of_chi(&c, &TorusCharacter::closed_form(&c, 2, 5)).unwrap();
        let r = classify_c(&c, &three, 10).unwrap();
        assert_eq!(r.in_n0_at, Some(3));
        assert_eq!(r.in_neg_n0_at, None);
        let minus_two = c_of_chi(&c, &TorusCharacter::closed_form(&c, 1, -1)).unwrap();
        let r = classify_c(&c, &minus_two, 10).unwrap();
        assert_eq!((r.in_n0_at, r.in_neg_n0_at), (None, Some(2)));

        let c3 = PrecisionContext::new(3, 8, 16).unwrap();
        // 1/4 mod 3^8 by the modular inverse: 4 * 4921 = 3 * 3^8 + 1.
        let quarter = c3.ratio(1, 4).unwrap();
        assert_eq!(quarter.residue(8), Some(4921));
        let cinv = CInvariant { c: quarter, derivation_precision: 8 };
        let r = classify_c(&c3, &cinv, 100).unwrap();
        assert_eq!((r.in_n0_at, r.in_neg_n0_at), (None, None));
    }

    #[test]
    fn conductors() {
        let c = ctx(5);
        assert_eq!(char_conductor(&c, &TorusCharacter::trivial(&c)).unwrap(), Conductor::Level(0));
        let faithful = TorusCharacter::closed_form(&c, 0, 1);
        assert_eq!(char_conductor(&c, &faithful).unwrap(), Conductor::Exceeds(16));
        let tame = TorusCharacter::from_images(&c, [torsion_generator(&c), c.one()], [c.one(), c.one()], None).unwrap();
        assert_eq!(char_conductor(&c, &tame).unwrap(), Conductor::Level(1));
        // chi(1 + p) = 1 + p^(N-1) has order p at precision N.
        let near = c.int(1 + 5i128.pow(15));
        let order_p = TorusCharacter::from_images(&c, [c.one(), c.one()], [near, c.one()], None).unwrap();
        assert_eq!(char_conductor(&c, &order_p).unwrap(), Conductor::Level(2));
    }

    #[test]
    fn spec_file_round_trip() {
        let text = "p = 5\ntorsion_1 = a^1 d^0\ntorsion_2 = 5^0 * (1) + O(5^16)\nprincipal_1 = exp(c*log) c = 5^0 * (2 + 3*5) + O(5^16)\nprincipal_2 = a^0 d^-2\nconductor_hint = 3\n";
        let spec: CharacterSpec = text.parse().unwrap();
        assert_eq!(spec.to_string(), text);
        let c = ctx(5);
        let chi = spec.resolve(&c).unwrap();
        assert!(chi.torsion_images()[0].agrees_with(&torsion_generator(&c), 16));
        let again: CharacterSpec = chi.to_spec().to_string().parse().unwrap();
        assert_eq!(again.resolve(&c).unwrap(), chi);
        assert!("p = 5\ntorsion_1 = exp(c*log) c = O(5^inf)\n".parse::<CharacterSpec>().is_err());
    }

    #[test]
    fn spec_with_rational_c() {
        let text = "p = 3\ntorsion_1 = a^0 d^0\ntorsion_2 = a^0 d^0\nprincipal_1 = a^0 d^0\nprincipal_2 = exp(c*log) c = 1/4\n";
        let spec: CharacterSpec = text.parse().unwrap();
        assert_eq!(spec.to_string(), text);
        let c = ctx(3);
        let chi = spec.resolve(&c).unwrap();
        assert!(c_of_chi(&c, &chi).unwrap().c.agrees_with(&c.ratio(1, 4).unwrap(), 14));
    }

    #[test]
    fn rejects_bad_images() {
        let c = ctx(5);
        assert!(TorusCharacter::from_images(&c, [c.int(2), c.one()], [c.one(), c.one()], None).is_err());
        assert!(TorusCharacter::from_images(&c, [c.one(), c.one()], [c.int(2), c.one()], None).is_err());
    }
}
