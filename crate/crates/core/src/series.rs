//! Truncated power series over `Q_p`, the working model of `K[[U^-]]` with
//! `x = gamma - 1`.
//!
//! Every series has exactly `M` coefficients. Results are valid modulo `x^M`;
//! nothing above the truncation degree is tracked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{binomial_row, PadicNumber, PrecisionContext, Valuation};

/// Lower bound on all coefficient valuations of the (untruncated) series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Floor {
    Bounded(i64),
    Unbounded,
}

impl Floor {
    fn min(self, other: Floor) -> Floor {
        match (self, other) {
            (Floor::Bounded(a), Floor::Bounded(b)) => Floor::Bounded(a.min(b)),
            _ => Floor::Unbounded,
        }
    }

    fn plus(self, other: Floor) -> Floor {
        match (self, other) {
            (Floor::Bounded(a), Floor::Bounded(b)) => Floor::Bounded(a + b),
            _ => Floor::Unbounded,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    coeffs: Vec<PadicNumber>,
    floor: Floor,
}

impl TruncatedSeries {
    /// Pads with exact zeros (or truncates) to `ctx.trunc()` coefficients. The
    /// floor is the observed minimum valuation.
    pub fn from_coeffs(ctx: &PrecisionContext, mut coeffs: Vec<PadicNumber>) -> Self {
        coeffs.resize(ctx.trunc(), ctx.zero());
        let observed = coeffs
            .iter()
            .filter_map(|c| match c.valuation() {
                Valuation::Finite(v) => Some(v),
                _ => None,
            })
            .min()
            .unwrap_or(0);
        Self { coeffs, floor: Floor::Bounded(observed) }
    }

    pub fn from_ints(ctx: &PrecisionContext, coeffs: &[i128]) -> Self {
        Self::from_coeffs(ctx, coeffs.iter().map(|&c| ctx.int(c)).collect())
    }

    pub fn zero(ctx: &PrecisionContext) -> Self {
        Self::from_coeffs(ctx, Vec::new())
    }

    pub fn one(ctx: &PrecisionContext) -> Self {
        Self::from_coeffs(ctx, vec![ctx.one()])
    }

    /// The variable `x`.
    pub fn x(ctx: &PrecisionContext) -> Self {
        Self::from_coeffs(ctx, vec![ctx.zero(), ctx.one()])
    }

    pub fn monomial(ctx: &PrecisionContext, k: usize) -> Self {
        let mut c = vec![ctx.zero(); k + 1];
        c[k] = ctx.one();
        Self::from_coeffs(ctx, c)
    }

    pub fn with_floor(mut self, floor: Floor) -> Self {
        self.floor = floor;
        self
    }

    pub fn floor(&self) -> Floor {
        self.floor
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len()
    }

    pub fn p(&self) -> u64 {
        self.coeffs[0].p()
    }

    pub fn coeffs(&self) -> &[PadicNumber] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> PadicNumber {
        self.coeffs[k]
    }

    /// Integral series: bounded with floor at least 0.
    pub fn is_integral(&self) -> bool {
        matches!(self.floor, Floor::Bounded(f) if f >= 0)
    }

    /// Minimum certified valuation over all coefficients.
    pub fn min_valuation(&self) -> i64 {
        self.coeffs.iter().map(|c| c.min_valuation()).min().unwrap_or(i64::MAX)
    }

    /// Minimum valuation over coefficients that are known to be nonzero.
    pub fn nonzero_min_valuation(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .filter_map(|c| match c.valuation() {
                Valuation::Finite(v) => Some(v),
                _ => None,
            })
            .min()
    }

    /// Index to valuation map.
    pub fn valuation_profile(&self) -> Vec<(usize, Valuation)> {
        self.coeffs.iter().enumerate().map(|(i, c)| (i, c.valuation())).collect()
    }

    /// Coefficients modulo `p`, or `None` if some coefficient is not integral
    /// or not known modulo `p`.
    pub fn reduce_mod_p(&self) -> Option<Vec<u64>> {
        self.coeffs.iter().map(|c| c.residue(1)).collect()
    }

    /// Every coefficient of `self - other` has valuation at least `digits`.
    pub fn agrees_with(&self, other: &Self, digits: i64) -> bool {
        self.coeffs.len() == other.coeffs.len()
            && self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a.agrees_with(b, digits))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn check_len(&self, other: &Self) {
        assert_eq!(self.coeffs.len(), other.coeffs.len(), "series truncation degrees differ");
    }

    pub fn scale(&self, c: &PadicNumber) -> Self {
        let floor = match c.valuation() {
            Valuation::Finite(v) => self.floor.plus(Floor::Bounded(v)),
            _ => Floor::Bounded(0),
        };
        Self { coeffs: self.coeffs.iter().map(|a| *a * *c).collect(), floor }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_len(other);
        Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a + *b).collect(),
            floor: self.floor.min(other.floor),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_len(other);
        Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a - *b).collect(),
            floor: self.floor.min(other.floor),
        }
    }

    /// Cauchy product modulo `x^M`.
    pub fn mul(&self, other: &Self) -> Self {
        self.check_len(other);
        Self { coeffs: cauchy(&self.coeffs, &other.coeffs, self.coeffs.len()), floor: self.floor.plus(other.floor) }
    }

    /// Multiplicative inverse modulo `x^M`; needs a constant term known to be
    /// nonzero.
    pub fn inverse(&self) -> Result<Self> {
        let inv = series_inverse(&self.coeffs, self.coeffs.len())?;
        let floor = match (self.floor, self.coeffs[0].valuation()) {
            (Floor::Bounded(f), Valuation::Finite(v0)) if f == v0 => Floor::Bounded(-v0),
            _ => {
                let observed = inv.iter().map(|c| c.min_valuation()).min().unwrap_or(0);
                Floor::Bounded(observed.min(0))
            }
        };
        Ok(Self { coeffs: inv, floor })
    }

    /// `F(G)` modulo `x^M` by Horner evaluation; `G(0)` must vanish.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        self.check_len(g);
        let g0 = g.coeffs[0];
        if !g0.is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let mut inner = g.clone();
        inner.coeffs[0] = PadicNumber::exact_zero(self.p());
        let m = self.coeffs.len();
        let mut acc = vec![PadicNumber::exact_zero(self.p()); m];
        acc[0] = self.coeffs[m - 1];
        for k in (0..m - 1).rev() {
            acc = cauchy(&acc, &inner.coeffs, m);
            acc[0] += self.coeffs[k];
        }
        let floor = match (self.floor, inner.floor) {
            (f, Floor::Bounded(gf)) if gf >= 0 => f,
            _ => Floor::Unbounded,
        };
        let mut out = Self { coeffs: acc, floor };
        if let Some(eps) = g0.abs_precision() {
            // G(0) was only known to be O(p^eps).
            let shift = match self.floor {
                Floor::Bounded(f) => f,
                Floor::Unbounded => self.min_valuation(),
            };
            let cap = eps + shift;
            out.coeffs.iter_mut().for_each(|c| *c = c.cap_abs(cap));
        }
        Ok(out)
    }

    /// `(F - F mod x^d) / x^d`, padded with exact zeros at the top.
    pub fn shift_down(&self, d: usize) -> Self {
        let p = self.p();
        let m = self.coeffs.len();
        let coeffs = (0..m).map(|k| if k + d < m { self.coeffs[k + d] } else { PadicNumber::exact_zero(p) }).collect();
        Self { coeffs, floor: self.floor }
    }

    /// Divides by `p^k` (`k` may be negative).
    pub fn scale_p_power(&self, ctx: &PrecisionContext, k: i64) -> Self {
        let c = if k >= 0 {
            ctx.int(1).try_div(&ctx.int((ctx.p() as i128).pow(k as u32))).expect("nonzero")
        } else {
            ctx.int((ctx.p() as i128).pow((-k) as u32))
        };
        self.scale(&c)
    }
}

/// Truncated product of two coefficient lists.
pub(crate) fn cauchy(a: &[PadicNumber], b: &[PadicNumber], len: usize) -> Vec<PadicNumber> {
    let p = a.first().or(b.first()).map(|c| c.p()).expect("nonempty");
    let mut out = vec![PadicNumber::exact_zero(p); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_exact_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            if bj.is_exact_zero() {
                continue;
            }
            out[i + j] += *ai * *bj;
        }
    }
    out
}

fn series_inverse(a: &[PadicNumber], len: usize) -> Result<Vec<PadicNumber>> {
    let inv0 = a[0].try_inv()?;
    let p = a[0].p();
    let mut out = vec![PadicNumber::exact_zero(p); len];
    out[0] = inv0;
    for n in 1..len {
        let mut s = PadicNumber::exact_zero(p);
        for i in 1..=n.min(a.len() - 1) {
            if !a[i].is_exact_zero() {
                s += a[i] * out[n - i];
            }
        }
        out[n] = -(s * inv0);
    }
    Ok(out)
}

/// `omega_a(x) = (1 + x)^a - 1 = sum_{n >= 1} C(a, n) x^n` for any `a` in
/// `Z_p`. The torus actions only use units; see [`omega_sub_unit`].
pub fn omega_sub(ctx: &PrecisionContext, a: &PadicNumber) -> Result<TruncatedSeries> {
    let mut row = binomial_row(ctx, a, ctx.trunc())?;
    row[0] = ctx.zero();
    Ok(TruncatedSeries::from_coeffs(ctx, row).with_floor(Floor::Bounded(0)))
}

pub fn omega_sub_unit(ctx: &PrecisionContext, a: &PadicNumber) -> Result<TruncatedSeries> {
    if !a.is_unit() {
        return Err(Error::NotUnit(a.to_string()));
    }
    omega_sub(ctx, a)
}

/// `omega_{p^k}(x) = (1 + x)^(p^k) - 1`.
pub fn omega_p_power(ctx: &PrecisionContext, k: u32) -> TruncatedSeries {
    omega_sub(ctx, &ctx.int((ctx.p() as i128).pow(k))).expect("integral exponent")
}

/// `(1 + x)^s = sum C(s, k) x^k`, the series of `gamma^s`.
pub fn grouplike(ctx: &PrecisionContext, s: &PadicNumber) -> Result<TruncatedSeries> {
    Ok(TruncatedSeries::from_coeffs(ctx, binomial_row(ctx, s, ctx.trunc())?).with_floor(Floor::Bounded(0)))
}

/// `[log(1 + x)]^m` truncated at `x^M`. For `m >= 1` the series is flagged
/// unbounded: the coefficient of `x^n` in `log(1 + x)` is `(-1)^(n+1)/n`.
pub fn log_series_power(ctx: &PrecisionContext, m: u32) -> TruncatedSeries {
    if m == 0 {
        return TruncatedSeries::one(ctx);
    }
    let mut c = vec![ctx.zero()];
    for n in 1..ctx.trunc() {
        let sign = if n % 2 == 1 { 1 } else { -1 };
        c.push(ctx.ratio(sign, n as i128).expect("nonzero denominator"));
    }
    let log = TruncatedSeries::from_coeffs(ctx, c).with_floor(Floor::Unbounded);
    let mut acc = log.clone();
    for _ in 1..m {
        acc = acc.mul(&log);
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundedness {
    BoundedWithFloor(i64),
    /// Indices at which the coefficient valuations reach a new negative minimum.
    UnboundedEvidence(Vec<usize>),
}

/// Scans coefficient valuations. Two or more fresh negative minima (for
/// `log(1 + x)` they sit at `p, p^2, ...`), or an explicit unbounded flag,
/// count as evidence of unboundedness.
pub fn boundedness_floor(f: &TruncatedSeries) -> Boundedness {
    let mut running = i64::MAX;
    let mut evidence = Vec::new();
    for (i, c) in f.coeffs.iter().enumerate() {
        if let Valuation::Finite(v) = c.valuation() {
            if v < running {
                if v < 0 && running != i64::MAX {
                    evidence.push(i);
                }
                running = v;
            }
        }
    }
    if f.floor == Floor::Unbounded || evidence.len() >= 2 {
        Boundedness::UnboundedEvidence(evidence)
    } else {
        let floor = match f.floor {
            Floor::Bounded(b) => b.min(if running == i64::MAX { b } else { running }),
            Floor::Unbounded => unreachable!(),
        };
        Boundedness::BoundedWithFloor(floor)
    }
}

/// Polynomials over `Q_p`, coefficients from low to high degree.
pub type Poly = Vec<PadicNumber>;

/// Output of [`weierstrass_data`]: `F = unit * distinguished_part` in
/// `o[[x]]`, valid modulo `x^M` and `p^valid_digits`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinguishedData {
    pub weierstrass_degree: usize,
    pub distinguished_part: Poly,
    /// Absolute precision to which the lower coefficients are certified.
    pub valid_digits: i64,
    /// Degree below which the unit cofactor is determined.
    pub unit_cofactor_valid_to: usize,
}

impl DistinguishedData {
    pub fn is_distinguished(&self) -> bool {
        let d = self.weierstrass_degree;
        self.distinguished_part.len() == d + 1
            && self.distinguished_part[d].is_unit()
            && self.distinguished_part[d].residue(1) == Some(1)
            && self.distinguished_part[..d].iter().all(|c| c.min_valuation() >= 1)
    }

    pub fn coefficients_text(&self) -> Vec<String> {
        self.distinguished_part.iter().map(|c| c.to_string()).collect()
    }
}

/// Weierstrass preparation of an integral series: degree, distinguished
/// polynomial and the inverse unit cofactor `q` with `q F = P`.
pub fn weierstrass_prepare(f: &TruncatedSeries) -> Result<(DistinguishedData, Vec<PadicNumber>)> {
    if f.nonzero_min_valuation().is_some_and(|v| v < 0) || matches!(f.floor, Floor::Unbounded) {
        return Err(Error::NotIntegral("Weierstrass preparation needs a bounded integral series".into()));
    }
    let m = f.trunc();
    let p = f.p();
    let d = f
        .coeffs
        .iter()
        .position(|c| c.valuation() == Valuation::Finite(0))
        .ok_or_else(|| Error::Undetermined(format!("no unit coefficient below x^{m}")))?;
    if d == 0 {
        let q = series_inverse(&f.coeffs, m)?;
        let c0 = f.coeffs[0];
        return Ok((
            DistinguishedData {
                weierstrass_degree: 0,
                distinguished_part: vec![PadicNumber::from_int(p, 1, c0.known_precision())],
                valid_digits: c0.abs_precision().unwrap_or(i64::MAX),
                unit_cofactor_valid_to: m,
            },
            q,
        ));
    }
    let low: Vec<PadicNumber> = f.coeffs[..d].to_vec();
    let unit: Vec<PadicNumber> = f.coeffs[d..].to_vec();
    let len = m - d;
    let unit_inv = series_inverse(&unit, len)?;
    let lead = f.coeffs[d];
    let exact_one = PadicNumber::from_int(p, 1, lead.known_precision());

    // q = U^{-1} * (1 - shift_d(q * low)), a p-adic contraction.
    let mut q = vec![PadicNumber::exact_zero(p); len];
    let max_iter = 2 * len + 80;
    for _ in 0..max_iter {
        let mut rhs = vec![PadicNumber::exact_zero(p); len];
        rhs[0] = exact_one;
        for (k, r) in rhs.iter_mut().enumerate() {
            let mut s = PadicNumber::exact_zero(p);
            for (i, li) in low.iter().enumerate() {
                let j = k + d - i;
                if j < len && !li.is_exact_zero() {
                    s += q[j] * *li;
                }
            }
            *r = *r - s;
        }
        let next = cauchy(&unit_inv, &rhs, len);
        if next == q {
            break;
        }
        q = next;
    }
    // Garbage from the truncated top of q reaches index < d with valuation at
    // least ceil((len - d + 1) / d); one more digit comes from `low`.
    let truncation_digits = if len + 1 > d { ((len - d + 1).div_ceil(d)) as i64 + 1 } else { 1 };
    let mut poly: Poly = Vec::with_capacity(d + 1);
    for k in 0..d {
        let mut s = PadicNumber::exact_zero(p);
        for i in 0..=k {
            s += q[k - i] * low[i];
        }
        poly.push(s.cap_abs(truncation_digits));
    }
    poly.push(PadicNumber::from_int(p, 1, lead.known_precision()));
    let valid_digits = poly[..d].iter().filter_map(|c| c.abs_precision()).min().unwrap_or(truncation_digits);
    Ok((
        DistinguishedData {
            weierstrass_degree: d,
            distinguished_part: poly,
            valid_digits,
            unit_cofactor_valid_to: len,
        },
        q,
    ))
}

pub fn weierstrass_data(f: &TruncatedSeries) -> Result<DistinguishedData> {
    weierstrass_prepare(f).map(|(w, _)| w)
}

fn trim(mut a: Poly) -> Poly {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

/// Remainder of `a` modulo `b` over `Q_p`; `b` must have a leading
/// coefficient known to be nonzero.
pub fn poly_rem(a: &[PadicNumber], b: &[PadicNumber]) -> Result<Poly> {
    let b = trim(b.to_vec());
    let lead_inv = b.last().ok_or(Error::DivisionByZero)?.try_inv()?;
    let mut r = trim(a.to_vec());
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let factor = *r.last().unwrap() * lead_inv;
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = r[shift + i] - factor * *bi;
        }
        r.pop();
        r = trim(r);
    }
    Ok(r)
}

fn make_monic(a: &[PadicNumber]) -> Result<Poly> {
    let a = trim(a.to_vec());
    let inv = a.last().ok_or(Error::DivisionByZero)?.try_inv()?;
    Ok(a.iter().map(|c| *c * inv).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GcdVerdict {
    /// The gcd is a nonzero constant; the certificate is that constant.
    UnitIdeal { certificate: PadicNumber },
    CommonDivisor(DistinguishedData),
    Undetermined(String),
}

impl GcdVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            GcdVerdict::UnitIdeal { .. } => "unit_ideal",
            GcdVerdict::CommonDivisor(_) => "common_divisor",
            GcdVerdict::Undetermined(_) => "undetermined",
        }
    }
}

/// Euclidean gcd of two polynomials. A remainder counts as zero only when
/// every coefficient is zero to at least `certify_digits`.
pub fn poly_gcd(a: &[PadicNumber], b: &[PadicNumber], certify_digits: i64) -> Result<Poly> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        if b.is_empty() {
            return make_monic(&a);
        }
        let r_full = {
            let lead_inv = b.last().unwrap().try_inv()?;
            let mut r = a.clone();
            while r.len() >= b.len() {
                let shift = r.len() - b.len();
                let factor = *r.last().unwrap() * lead_inv;
                for (i, bi) in b.iter().enumerate() {
                    r[shift + i] = r[shift + i] - factor * *bi;
                }
                r.pop();
                // Only strip leading terms that are certified zero.
                while r.last().is_some_and(|c| c.is_zero()) {
                    let c = r.pop().unwrap();
                    if c.min_valuation() < certify_digits {
                        return Err(Error::Undetermined(format!(
                            "remainder coefficient {c} cannot be certified zero"
                        )));
                    }
                }
            }
            r
        };
        a = b;
        b = r_full;
    }
}

/// Euclidean gcd of two distinguished polynomials in `Lambda_K`. Every
/// division is by a monic polynomial, so it costs no precision; each nonzero
/// remainder `r = p^mu * unit * P` is replaced by its distinguished part `P`,
/// which generates the same ideal because `p` and the unit are invertible.
/// A remainder counts as zero only when it is zero to `certify_digits`.
fn distinguished_gcd(ctx: &PrecisionContext, a: Poly, b: Poly, certify_digits: i64) -> Result<Poly> {
    let (mut a, mut b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    loop {
        if b.len() <= 1 {
            return Ok(b);
        }
        let mut r = a.clone();
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let factor = *r.last().unwrap();
            for (i, bi) in b.iter().enumerate() {
                r[shift + i] = r[shift + i] - factor * *bi;
            }
            r.pop();
        }
        if r.iter().all(|c| c.is_zero()) {
            if let Some(c) = r.iter().find(|c| c.min_valuation() < certify_digits) {
                return Err(Error::Undetermined(format!("remainder coefficient {c} cannot be certified zero")));
            }
            return Ok(b);
        }
        let mu = r.iter().filter(|c| !c.is_zero()).map(|c| c.min_valuation()).min().expect("nonzero remainder");
        let d = r.iter().position(|c| !c.is_zero() && c.min_valuation() == mu).expect("minimum attained");
        if let Some(c) = r[..d].iter().find(|c| c.is_zero() && c.min_valuation() <= mu) {
            return Err(Error::Undetermined(format!("remainder coefficient {c} hides the Weierstrass degree")));
        }
        let series = TruncatedSeries::from_coeffs(ctx, r).scale_p_power(ctx, mu).with_floor(Floor::Bounded(0));
        a = b;
        b = weierstrass_data(&series)?.distinguished_part;
    }
}

/// Decides whether the ideal generated by `gens` in `K[[x]]` (mod `x^M`) is
/// the unit ideal. Each generator is rescaled by a power of `p` (a unit in
/// `K[[x]]`), prepared, and the distinguished parts are combined by
/// [`distinguished_gcd`]. A generator whose gcd step cannot be certified is
/// skipped: the unit ideal is still certified by the others, but a common
/// divisor is then reported as undetermined.
pub fn series_gcd_unit_test(ctx: &PrecisionContext, gens: &[TruncatedSeries]) -> GcdVerdict {
    let certify = (ctx.prec() as i64 / 2).max(1);
    let mut acc: Option<Poly> = None;
    let mut acc_digits = i64::MAX;
    let mut skipped: Vec<String> = Vec::new();
    for g in gens {
        if matches!(g.floor(), Floor::Unbounded) {
            return GcdVerdict::Undetermined("unbounded generator is not in K[[x]]".into());
        }
        let mu = match g.nonzero_min_valuation() {
            Some(mu) => mu,
            None => continue,
        };
        let normalized = g.scale_p_power(ctx, mu).with_floor(Floor::Bounded(0));
        let w = match weierstrass_data(&normalized) {
            Ok(w) => w,
            Err(e) => {
                skipped.push(e.to_string());
                continue;
            }
        };
        let next = match acc.take() {
            None => make_monic(&w.distinguished_part),
            Some(prev) => distinguished_gcd(ctx, prev.clone(), w.distinguished_part.clone(), certify).inspect_err(|_| {
                acc = Some(prev);
            }),
        };
        match next {
            Ok(poly) => {
                if poly.len() == 1 {
                    return GcdVerdict::UnitIdeal { certificate: poly[0] };
                }
                acc_digits = acc_digits.min(w.valid_digits);
                acc = Some(poly);
            }
            Err(e) => skipped.push(e.to_string()),
        }
    }
    if !skipped.is_empty() {
        return GcdVerdict::Undetermined(format!("{} generator(s) not certified: {}", skipped.len(), skipped[0]));
    }
    match acc {
        None => GcdVerdict::Undetermined("all generators vanish to precision".into()),
        Some(poly) => {
            let d = poly.len() - 1;
            let valid = poly[..d].iter().filter_map(|c| c.abs_precision()).min().unwrap_or(acc_digits).min(acc_digits);
            GcdVerdict::CommonDivisor(DistinguishedData {
                weierstrass_degree: d,
                distinguished_part: poly,
                valid_digits: valid,
                unit_cofactor_valid_to: ctx.trunc() - d,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> PrecisionContext {
        PrecisionContext::new(p, 16, 32).unwrap()
    }

    #[test]
    fn unit_and_difference_of_squares() {
        let c = ctx(5);
        let f = TruncatedSeries::from_ints(&c, &[3, 1, 4, 1, 5]);
        assert!(f.mul(&TruncatedSeries::one(&c)).agrees_with(&f, 16));
        let a = TruncatedSeries::from_ints(&c, &[1, 1]);
        let b = TruncatedSeries::from_ints(&c, &[1, -1]);
        assert!(a.mul(&b).agrees_with(&TruncatedSeries::from_ints(&c, &[1, 0, -1]), 16));
    }

    #[test]
    fn compose_identity_and_scaling() {
        let c = ctx(3);
        let f = TruncatedSeries::from_ints(&c, &[2, 0, 7, 1]);
        assert!(f.compose(&TruncatedSeries::x(&c)).unwrap().agrees_with(&f, 16));
        let sq = TruncatedSeries::from_ints(&c, &[0, 0, 1]);
        let two_x = TruncatedSeries::from_ints(&c, &[0, 2]);
        assert!(sq.compose(&two_x).unwrap().agrees_with(&TruncatedSeries::from_ints(&c, &[0, 0, 4]), 16));
        assert_eq!(f.compose(&f), Err(Error::NonzeroConstantTerm));
    }

    #[test]
    fn geometric_composed_with_x_plus_x2() {
        // Oracle: expand sum_k (x + x^2)^k term by term over integers.
        let c = ctx(5);
        let m = c.trunc();
        let mut expect = vec![0i128; m];
        let mut power = vec![0i128; m];
        power[0] = 1;
        for _ in 0..m {
            for (e, pw) in expect.iter_mut().zip(&power) {
                *e += pw;
            }
            let mut next = vec![0i128; m];
            for i in 0..m {
                if i + 1 < m {
                    next[i + 1] += power[i];
                }
                if i + 2 < m {
                    next[i + 2] += power[i];
                }
            }
            power = next;
        }
        let geo = TruncatedSeries::from_ints(&c, &vec![1; m]);
        let inner = TruncatedSeries::from_ints(&c, &[0, 1, 1]);
        assert!(geo.compose(&inner).unwrap().agrees_with(&TruncatedSeries::from_ints(&c, &expect), 16));
    }

    #[test]
    fn omega_examples() {
        let c = ctx(3);
        assert!(omega_sub(&c, &c.one()).unwrap().agrees_with(&TruncatedSeries::x(&c), 16));
        assert!(omega_sub(&c, &c.int(2)).unwrap().agrees_with(&TruncatedSeries::from_ints(&c, &[0, 2, 1]), 16));
        let w3 = omega_p_power(&c, 1).reduce_mod_p().unwrap();
        let mut x3 = vec![0; c.trunc()];
        x3[3] = 1;
        assert_eq!(w3, x3);
        assert!(omega_sub_unit(&c, &c.int(3)).is_err());
    }

    #[test]
    fn weierstrass_examples() {
        let c = ctx(3);
        let w = weierstrass_data(&TruncatedSeries::from_ints(&c, &[1, 1])).unwrap();
        assert_eq!(w.weierstrass_degree, 0);
        let w3 = omega_p_power(&c, 1);
        let w = weierstrass_data(&w3).unwrap();
        assert_eq!(w.weierstrass_degree, 3);
        assert!(w.is_distinguished());
        for (k, expect) in [0i128, 3, 3, 1].iter().enumerate() {
            assert!(w.distinguished_part[k].agrees_with(&c.int(*expect), 10), "{k}");
        }
        let w = weierstrass_data(&TruncatedSeries::from_ints(&c, &[3, 1])).unwrap();
        assert_eq!(w.weierstrass_degree, 1);
        assert!(w.distinguished_part[0].agrees_with(&c.int(3), 10));
        let undetermined = weierstrass_data(&TruncatedSeries::from_ints(&c, &[3, 9, 3]));
        assert!(matches!(undetermined, Err(Error::Undetermined(_))));
    }

    #[test]
    fn weierstrass_recovers_unit_times_distinguished() {
        // F = (1 + 2x + x^3) * (x^2 + 3x + 6): expect P = x^2 + 3x + 6.
        let c = ctx(3);
        let u = TruncatedSeries::from_ints(&c, &[1, 2, 0, 1]);
        let p = TruncatedSeries::from_ints(&c, &[6, 3, 1]);
        let w = weierstrass_data(&u.mul(&p)).unwrap();
        assert_eq!(w.weierstrass_degree, 2);
        assert!(w.distinguished_part[0].agrees_with(&c.int(6), 10));
        assert!(w.distinguished_part[1].agrees_with(&c.int(3), 10));
    }

    #[test]
    fn gcd_examples() {
        let c = ctx(5);
        assert!(matches!(
            series_gcd_unit_test(&c, &[TruncatedSeries::one(&c)]),
            GcdVerdict::UnitIdeal { .. }
        ));
        let v = series_gcd_unit_test(&c, &[TruncatedSeries::monomial(&c, 2), TruncatedSeries::monomial(&c, 3)]);
        match v {
            GcdVerdict::CommonDivisor(d) => {
                assert_eq!(d.weierstrass_degree, 2);
                assert!(d.distinguished_part[0].is_zero() && d.distinguished_part[1].is_zero());
            }
            other => panic!("{other:?}"),
        }
        // x^2 + 5x and x^2 + 10x share exactly the factor x.
        let a = TruncatedSeries::from_ints(&c, &[0, 5, 1]);
        let b = TruncatedSeries::from_ints(&c, &[0, 10, 1]);
        match series_gcd_unit_test(&c, &[a, b]) {
            GcdVerdict::CommonDivisor(d) => {
                assert_eq!(d.weierstrass_degree, 1);
                assert!(d.distinguished_part[0].is_zero());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gcd_with_nonunit_remainders() {
        let c = ctx(5);
        // (x - 5)(x - 25) and (x - 5)(x + 5): the first remainder is a
        // non-unit multiple of x - 5.
        let a = TruncatedSeries::from_ints(&c, &[125, -30, 1]);
        let b = TruncatedSeries::from_ints(&c, &[-25, 0, 1]);
        match series_gcd_unit_test(&c, &[a.clone(), b]) {
            GcdVerdict::CommonDivisor(d) => {
                assert_eq!(d.weierstrass_degree, 1);
                assert!(d.distinguished_part[0].agrees_with(&c.int(-5), 8));
            }
            other => panic!("{other:?}"),
        }
        // (x - 5)(x - 25) and x - 10 are coprime in Lambda_K.
        let coprime = TruncatedSeries::from_ints(&c, &[-10, 1]);
        assert!(matches!(series_gcd_unit_test(&c, &[a, coprime]), GcdVerdict::UnitIdeal { .. }));
    }

    #[test]
    fn log_series_valuations() {
        let c = PrecisionContext::new(5, 16, 30).unwrap();
        assert_eq!(boundedness_floor(&log_series_power(&c, 0)), Boundedness::BoundedWithFloor(0));
        let l = log_series_power(&c, 1);
        assert_eq!(l.coeff(5).valuation(), Valuation::Finite(-1));
        assert_eq!(l.coeff(25).valuation(), Valuation::Finite(-2));
        assert_eq!(boundedness_floor(&l), Boundedness::UnboundedEvidence(vec![5, 25]));
        let w2 = omega_sub(&c, &c.int(2)).unwrap();
        assert_eq!(boundedness_floor(&w2), Boundedness::BoundedWithFloor(0));
    }
}
