//! The `K[[B]]`-modules `N_chi` and `N_chi^-` realized on truncated power
//! series.
//!
//! `N_chi = K[[B]] (x)_{K[[P]]} K^(chi)` is free of rank one over `K[[U^-]]`,
//! and `U^-` is topologically generated by `gamma = [[1, p], [0, 1]]`, so an
//! element is a series `F(gamma - 1)`. The Iwahori group `B` acts through
//! the torus elements `t_a = diag(a, 1)`, the centre, and `u = [[1, 0], [1, 1]]`:
//!
//! * `t_a . F(gamma - 1) = chi(t_a) F(gamma^a - 1)`, because
//!   `t_a gamma^n = gamma^(an) t_a`;
//! * `u . gamma^n = chi(diag((1 + np)^-1, 1 + np)) gamma^(n / (1 + np))`,
//!   from the factorization of `u gamma^n` into `U^- x P`.
//!
//! `N_chi^- = K[[B]] (x)_{K[[P^-]]} K^(chi)` is the mirror image: conjugating
//! by `w` swaps `U^-` and the lower unipotent group `U cap B`, whose generator
//! `[[1, 0], [p, 1]]` satisfies `t_a g^n t_a^-1 = g^(n / a)`. Hence on the
//! minus side the torus acts by `chi(t_a) F(gamma^(1/a) - 1)`.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::characters::{c_of_chi, classify_c, CClassification, CInvariant, TorusCharacter};
use crate::error::{Error, Result};
use crate::padic::{binomial_row, PadicNumber, PrecisionContext};
use crate::series::{
    boundedness_floor, log_series_power, omega_p_power, omega_sub_unit, series_gcd_unit_test,
    Boundedness, DistinguishedData, Floor, GcdVerdict, TruncatedSeries,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    NChi,
    NChiMinus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NChiElement {
    pub series: TruncatedSeries,
    pub character: TorusCharacter,
    pub side: Side,
}

impl NChiElement {
    pub fn new(series: TruncatedSeries, character: TorusCharacter, side: Side) -> Self {
        Self { series, character, side }
    }

    fn with_series(&self, series: TruncatedSeries) -> Self {
        Self { series, character: self.character.clone(), side: self.side }
    }
}

/// Action of `t_a = diag(a, 1)`.
pub fn act_torus(ctx: &PrecisionContext, a: &PadicNumber, f: &NChiElement) -> Result<NChiElement> {
    let exponent = match f.side {
        Side::NChi => *a,
        Side::NChiMinus => a.try_inv()?,
    };
    let omega = omega_sub_unit(ctx, &exponent)?;
    let scalar = f.character.eval_t(ctx, a)?;
    Ok(f.with_series(f.series.compose(&omega)?.scale(&scalar)))
}

/// Coefficients `g_j` of `F` in the basis `gamma^j = (1 + x)^j`:
/// `g_j = sum_{k >= j} f_k (-1)^(k - j) C(k, j)`.
pub fn gamma_basis(ctx: &PrecisionContext, f: &TruncatedSeries) -> Vec<PadicNumber> {
    let m = f.trunc();
    let coeffs = f.coeffs();
    // Signed Pascal rows: row[k][j] = (-1)^(k - j) C(k, j).
    let mut row = vec![ctx.one()];
    let mut out = vec![ctx.zero(); m];
    for (k, fk) in coeffs.iter().enumerate() {
        if k > 0 {
            let mut next = Vec::with_capacity(k + 1);
            for j in 0..=k {
                let left = if j > 0 { row[j - 1] } else { ctx.zero() };
                let right = if j < k { -row[j] } else { ctx.zero() };
                next.push(left + right);
            }
            row = next;
        }
        if fk.is_exact_zero() {
            continue;
        }
        for (g, b) in out.iter_mut().zip(&row) {
            *g += *fk * *b;
        }
    }
    out
}

/// Action of `u = [[1, 0], [1, 1]]` on `N_chi`.
///
/// The truncated polynomial is rewritten exactly in the `gamma`-basis and the
/// group-like formula is applied term by term. `u` maps `x^k` into the ideal
/// `(p, x)^k`, since `u((gamma - 1)^k)` is the `k`-th finite difference of
/// `n -> u(gamma^n)`. Consequently an uncertainty `O(p^a)` in the coefficient
/// of `x^k` only affects the coefficient of `x^i` modulo
/// `p^(a + max(0, k - i))`, and the discarded tail `x^k`, `k >= M`, only
/// modulo `p^(floor + M - i)`. The computation runs on exact representatives
/// and these caps are applied to the output, instead of letting the
/// alternating binomial sums destroy the precision.
pub fn act_u(ctx: &PrecisionContext, f: &NChiElement) -> Result<NChiElement> {
    if f.side != Side::NChi {
        return Err(Error::SideMismatch("the u-action formula is stated on N_chi".into()));
    }
    let m = f.series.trunc();
    let p = ctx.p() as i128;
    let floor = match f.series.floor() {
        Floor::Bounded(b) => b,
        Floor::Unbounded => f.series.min_valuation(),
    };
    let mut caps: Vec<i64> = (0..m).map(|i| floor + (m - i) as i64).collect();
    for (k, fk) in f.series.coeffs().iter().enumerate() {
        if let Some(a) = fk.abs_precision() {
            for (i, cap) in caps.iter_mut().enumerate() {
                *cap = (*cap).min(a + k.saturating_sub(i) as i64);
            }
        }
    }
    let lifted: Vec<PadicNumber> = f.series.coeffs().iter().map(|c| c.representative(ctx.working())).collect();
    let g = gamma_basis(ctx, &TruncatedSeries::from_coeffs(ctx, lifted));
    let mut acc = vec![ctx.zero(); m];
    for (j, gj) in g.iter().enumerate() {
        if gj.is_zero() {
            continue;
        }
        let denom = ctx.int(1 + j as i128 * p);
        let factor = f.character.eval_antidiagonal(ctx, &denom)?;
        let exponent = ctx.int(j as i128).try_div(&denom)?;
        let row = binomial_row(ctx, &exponent, m)?;
        let scalar = *gj * factor;
        for (a, r) in acc.iter_mut().zip(row) {
            *a += scalar * r;
        }
    }
    let capped = acc.into_iter().zip(caps).map(|(c, cap)| c.cap_abs(cap)).collect();
    let series = TruncatedSeries::from_coeffs(ctx, capped).with_floor(f.series.floor());
    Ok(f.with_series(series))
}

/// `sum_{j=0}^{l} (-1)^j C(l, j) j^m`, exactly.
pub fn finite_difference_sum(ell: u32, m: u32) -> BigInt {
    let mut total = BigInt::from(0);
    let mut binom = BigInt::from(1);
    for j in 0..=ell {
        if j > 0 {
            binom = binom * (ell - j + 1) / j;
        }
        let term = &binom * BigInt::from(j).pow(m);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Coefficients of the obstruction series
/// `sum_{j=0}^{l} (-1)^j C(l, j) exp(c log(1 + j y))` in `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionCoefficients {
    pub ell: u32,
    pub degree: usize,
    /// Coefficient of `y^m`, `0 <= m <= degree`, summed term by term.
    pub coefficients: Vec<PadicNumber>,
    /// The integer sums `sum_j (-1)^j C(l, j) j^m`.
    pub integer_sums: Vec<String>,
    /// Least `m` whose coefficient is nonzero at precision `N`, if any.
    pub first_nonvanishing: Option<usize>,
    pub vanishes: bool,
}

/// Expands each `(1 + j y)^c = sum_m C(c, m) j^m y^m` and sums with the
/// alternating binomial weights. The closed form `C(c, m) S(l, m)` is used
/// only as a cross-check in the tests.
pub fn obstruction_coefficients(
    ctx: &PrecisionContext,
    c: &CInvariant,
    ell: u32,
    degree: usize,
) -> Result<ObstructionCoefficients> {
    let row = binomial_row(ctx, &c.c, degree + 1)?;
    let digits = ctx.prec() as i64;
    let mut coefficients = Vec::with_capacity(degree + 1);
    let mut integer_sums = Vec::with_capacity(degree + 1);
    let mut binom_l: i128 = 1;
    let mut weights = Vec::new();
    for j in 0..=ell as i128 {
        if j > 0 {
            binom_l = binom_l * (ell as i128 - j + 1) / j;
        }
        weights.push(if j % 2 == 0 { binom_l } else { -binom_l });
    }
    for (m, cm) in row.iter().enumerate() {
        let mut s = ctx.zero();
        for (j, w) in weights.iter().enumerate() {
            if j == 0 && m > 0 {
                continue;
            }
            let jm = if m == 0 { ctx.one() } else { ctx.int(j as i128).pow(m as u64) };
            s += *cm * ctx.int(*w) * jm;
        }
        coefficients.push(s);
        integer_sums.push(finite_difference_sum(ell, m as u32).to_string());
    }
    let first_nonvanishing = coefficients.iter().position(|v| v.min_valuation() < digits);
    Ok(ObstructionCoefficients {
        ell,
        degree,
        coefficients,
        integer_sums,
        first_nonvanishing,
        vanishes: first_nonvanishing.is_none(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub k: u32,
    pub ell: u32,
    pub torus_samples: Vec<PadicNumber>,
    pub include_u: bool,
    pub generations: usize,
    pub generator: TruncatedSeries,
}

impl ProbeConfig {
    /// Samples `{1 + p, tau, 2}` (non-units dropped) and generator
    /// `omega_{p^k}(x)^l` (for `k = 0` this is `x^l`).
    pub fn standard(ctx: &PrecisionContext, k: u32, ell: u32) -> Result<Self> {
        let visible = (ctx.p() as u128).saturating_pow(k).saturating_mul(ell as u128);
        if ell == 0 || visible >= ctx.trunc() as u128 {
            return Err(Error::InvalidInput(format!(
                "need l >= 1 and p^k * l < M (p = {}, k = {k}, l = {ell}, M = {})",
                ctx.p(),
                ctx.trunc()
            )));
        }
        let omega = omega_p_power(ctx, k);
        let mut generator = TruncatedSeries::one(ctx);
        for _ in 0..ell {
            generator = generator.mul(&omega);
        }
        Ok(Self { k, ell, torus_samples: default_samples(ctx), include_u: true, generations: 3, generator })
    }

    pub fn with_generator(mut self, generator: TruncatedSeries) -> Self {
        self.generator = generator;
        self
    }
}

pub fn default_samples(ctx: &PrecisionContext) -> Vec<PadicNumber> {
    let mut out = Vec::new();
    for a in [ctx.int(1 + ctx.p() as i128), crate::characters::torsion_generator(ctx), ctx.int(2)] {
        if a.is_unit() && !out.iter().any(|b: &PadicNumber| b.agrees_with(&a, ctx.prec() as i64)) {
            out.push(a);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    UnitIdealReached { generation: usize },
    PersistentDivisor(DistinguishedData),
    Undetermined(String),
}

impl ProbeVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            ProbeVerdict::UnitIdealReached { .. } => "unit_ideal_reached",
            ProbeVerdict::PersistentDivisor(_) => "persistent_divisor",
            ProbeVerdict::Undetermined(_) => "undetermined",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub verdict: ProbeVerdict,
    /// Number of series in the orbit after each generation (index 0 is the
    /// generator alone).
    pub generation_sizes: Vec<usize>,
    /// Degree of the running gcd after each generation (`None` when
    /// undetermined).
    pub gcd_degrees: Vec<Option<usize>>,
    pub c: CInvariant,
    pub classification: CClassification,
    pub obstruction: ObstructionCoefficients,
    pub valid_mod_x: usize,
}

fn gcd_degree(v: &GcdVerdict) -> Option<usize> {
    match v {
        GcdVerdict::UnitIdeal { .. } => Some(0),
        GcdVerdict::CommonDivisor(d) => Some(d.weierstrass_degree),
        GcdVerdict::Undetermined(_) => None,
    }
}

/// Closes the ideal generated by `cfg.generator` under the sampled torus
/// elements and `u`, and tests after each generation whether it has become
/// the unit ideal. The verdict is evidence only; the classification of
/// `c(chi)` is reported alongside.
pub fn simplicity_probe(ctx: &PrecisionContext, chi: &TorusCharacter, cfg: &ProbeConfig) -> Result<ProbeReport> {
    let c = c_of_chi(ctx, chi)?;
    let bound = (4 * cfg.ell as u64).max(16);
    let classification = classify_c(ctx, &c, bound)?;
    let obstruction = obstruction_coefficients(ctx, &c, cfg.ell, cfg.ell as usize + 3)?;

    let mut orbit = vec![NChiElement::new(cfg.generator.clone(), chi.clone(), Side::NChi)];
    let mut frontier = orbit.clone();
    let mut generation_sizes = vec![1];
    let mut verdict = series_gcd_unit_test(ctx, std::slice::from_ref(&cfg.generator));
    let mut gcd_degrees = vec![gcd_degree(&verdict)];
    let mut generation = 0;
    while generation < cfg.generations && !matches!(verdict, GcdVerdict::UnitIdeal { .. }) {
        generation += 1;
        let mut next = Vec::new();
        for f in &frontier {
            for a in &cfg.torus_samples {
                next.push(act_torus(ctx, a, f)?);
            }
            if cfg.include_u {
                next.push(act_u(ctx, f)?);
            }
        }
        orbit.extend(next.iter().cloned());
        frontier = next;
        generation_sizes.push(orbit.len());
        let series: Vec<TruncatedSeries> = orbit.iter().map(|e| e.series.clone()).collect();
        verdict = series_gcd_unit_test(ctx, &series);
        gcd_degrees.push(gcd_degree(&verdict));
    }
    let verdict = match verdict {
        GcdVerdict::UnitIdeal { .. } => ProbeVerdict::UnitIdealReached { generation },
        GcdVerdict::CommonDivisor(d) => ProbeVerdict::PersistentDivisor(d),
        GcdVerdict::Undetermined(why) => ProbeVerdict::Undetermined(why),
    };
    Ok(ProbeReport {
        verdict,
        generation_sizes,
        gcd_degrees,
        c,
        classification,
        obstruction,
        valid_mod_x: ctx.trunc(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualProfile {
    pub a: PadicNumber,
    /// Least valuation among the residual coefficients (`None` if all are
    /// exact zeros).
    pub min_valuation: Option<i64>,
    /// Valuation the residual must reach to count as zero.
    pub threshold: i64,
    pub vanishes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntertwinerConclusion {
    /// A bounded solution `F` exists; the intertwiner space is spanned by it.
    NonzeroIntertwiner { m: u64 },
    /// The central characters differ, so every intertwiner vanishes.
    ZeroByCentralCharacter,
    /// No exponent `m` in `N0` solves the functional equation.
    ZeroNoCandidate,
    /// The only candidate `[log(1 + x)]^m` is unbounded.
    ZeroUnbounded { m: u64 },
    /// The candidate fails the functional equation at precision.
    ZeroResidual { m: u64 },
}

impl IntertwinerConclusion {
    pub fn is_nonzero(&self) -> bool {
        matches!(self, IntertwinerConclusion::NonzeroIntertwiner { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntertwinerReport {
    pub central_match: bool,
    pub c_source: PadicNumber,
    pub c_target: PadicNumber,
    /// `c(chi') - c(chi)`.
    pub d: PadicNumber,
    /// `(c(chi) - c(chi')) / 2`, the exponent of the candidate solution.
    pub half_difference: Option<PadicNumber>,
    pub exponent: Option<u64>,
    pub residuals: Vec<ResidualProfile>,
    pub boundedness: Option<Boundedness>,
    /// `Hom(N_chi', N_chi^-)` and `Hom(N_chi^-, N_chi')` vanish for all
    /// characters: `U` has no nonzero invariants on `N_chi^-`.
    pub cross_cell_homs: String,
    pub conclusion: IntertwinerConclusion,
}

/// Residual `chi(t_a) F(omega_a(x)) - chi'(t_a) F(x)` of a candidate `F`.
pub fn functional_equation_residual(
    ctx: &PrecisionContext,
    chi_prime: &TorusCharacter,
    chi: &TorusCharacter,
    f: &TruncatedSeries,
    a: &PadicNumber,
) -> Result<ResidualProfile> {
    let lhs = act_torus(ctx, a, &NChiElement::new(f.clone(), chi.clone(), Side::NChi))?.series;
    let rhs = f.scale(&chi_prime.eval_t(ctx, a)?);
    let residual = lhs.sub(&rhs);
    let min_valuation = residual
        .coeffs()
        .iter()
        .filter(|c| !c.is_exact_zero())
        .map(|c| c.min_valuation())
        .min();
    // Coefficients of F with negative valuation carry that many fewer digits.
    let threshold = ctx.prec() as i64 + f.min_valuation().min(0);
    let vanishes = min_valuation.is_none_or(|v| v >= threshold);
    Ok(ResidualProfile { a: *a, min_valuation, threshold, vanishes })
}

/// Searches for `K[[B]]`-homomorphisms `N_chi' -> N_chi`. Such a map sends
/// the generator to a series `F` with
/// `chi(t_a) F((1 + x)^a - 1) = chi'(t_a) F(x)` for all units `a`; the
/// solutions are the multiples of `[log(1 + x)]^m` with
/// `m = (c(chi) - c(chi')) / 2`, and they are bounded only for `m = 0`.
pub fn intertwiner_solve(
    ctx: &PrecisionContext,
    chi_prime: &TorusCharacter,
    chi: &TorusCharacter,
    samples: &[PadicNumber],
) -> Result<IntertwinerReport> {
    let digits = ctx.prec() as i64;
    let central_points = [crate::characters::torsion_generator(ctx), ctx.int(1 + ctx.q() as i128)];
    let mut central_match = true;
    for b in &central_points {
        if !chi.eval(ctx, b, b)?.agrees_with(&chi_prime.eval(ctx, b, b)?, digits) {
            central_match = false;
        }
    }
    let c_source = c_of_chi(ctx, chi_prime)?;
    let c_target = c_of_chi(ctx, chi)?;
    let d = c_source.c - c_target.c;
    let cross_cell_homs = "zero (structural: no nonzero U-invariants on N_chi^-)".to_string();
    let mut report = IntertwinerReport {
        central_match,
        c_source: c_source.c,
        c_target: c_target.c,
        d,
        half_difference: None,
        exponent: None,
        residuals: Vec::new(),
        boundedness: None,
        cross_cell_homs,
        conclusion: IntertwinerConclusion::ZeroByCentralCharacter,
    };
    if !central_match {
        return Ok(report);
    }
    let half = (c_target.c - c_source.c).try_div(&ctx.int(2))?;
    report.half_difference = Some(half);
    let precision = c_source.derivation_precision.min(c_target.derivation_precision) - ctx.int(2).min_valuation();
    let bound = (ctx.trunc() as u64).saturating_sub(1);
    let inv = CInvariant { c: half, derivation_precision: precision };
    let m = if precision > 0 && (bound as f64) < (ctx.p() as f64).powi(precision.min(60) as i32) {
        classify_c(ctx, &inv, bound)?.in_n0_at
    } else {
        None
    };
    let Some(m) = m else {
        report.conclusion = IntertwinerConclusion::ZeroNoCandidate;
        return Ok(report);
    };
    report.exponent = Some(m);
    let f = log_series_power(ctx, m as u32);
    for a in samples.iter().filter(|a| a.is_unit()) {
        report.residuals.push(functional_equation_residual(ctx, chi_prime, chi, &f, a)?);
    }
    let bounded = boundedness_floor(&f);
    let is_bounded = matches!(bounded, Boundedness::BoundedWithFloor(_));
    report.boundedness = Some(bounded);
    report.conclusion = if !report.residuals.iter().all(|r| r.vanishes) {
        IntertwinerConclusion::ZeroResidual { m }
    } else if !is_bounded {
        IntertwinerConclusion::ZeroUnbounded { m }
    } else {
        IntertwinerConclusion::NonzeroIntertwiner { m }
    };
    Ok(report)
}

/// `chi * (a/d)^m`: same central character, `c` lowered by `2m`.
pub fn shift_by_ratio_power(ctx: &PrecisionContext, chi: &TorusCharacter, m: i64) -> TorusCharacter {
    chi.mul(&TorusCharacter::closed_form(ctx, m, -m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{grouplike, omega_sub};

    fn ctx(p: u64, m: usize) -> PrecisionContext {
        PrecisionContext::new(p, 16, m).unwrap()
    }

    fn trivial_elt(c: &PrecisionContext, f: TruncatedSeries) -> NChiElement {
        NChiElement::new(f, TorusCharacter::trivial(c), Side::NChi)
    }

    #[test]
    fn torus_action_basics() {
        let c = ctx(3, 16);
        let f = trivial_elt(&c, TruncatedSeries::x(&c));
        let g = act_torus(&c, &c.one(), &f).unwrap();
        assert!(g.series.agrees_with(&f.series, 16));
        let g = act_torus(&c, &c.int(2), &f).unwrap();
        assert!(g.series.agrees_with(&TruncatedSeries::from_ints(&c, &[0, 2, 1]), 16));
        assert!(act_torus(&c, &c.int(3), &f).is_err());
    }

    #[test]
    fn torus_action_composes_on_both_sides() {
        let c = ctx(5, 24);
        let chi = TorusCharacter::closed_form(&c, 2, -1);
        let f = TruncatedSeries::from_ints(&c, &[1, 3, -2, 7, 0, 11]);
        let (a, b) = (c.int(7), c.int(-3));
        for side in [Side::NChi, Side::NChiMinus] {
            let e = NChiElement::new(f.clone(), chi.clone(), side);
            let two_step = act_torus(&c, &a, &act_torus(&c, &b, &e).unwrap()).unwrap();
            let one_step = act_torus(&c, &(a * b), &e).unwrap();
            assert!(two_step.series.agrees_with(&one_step.series, 14), "{side:?}");
        }
    }

    #[test]
    fn minus_side_uses_inverse_exponent() {
        let c = ctx(5, 12);
        let e = NChiElement::new(TruncatedSeries::x(&c), TorusCharacter::trivial(&c), Side::NChiMinus);
        let got = act_torus(&c, &c.int(2), &e).unwrap().series;
        let want = omega_sub(&c, &c.ratio(1, 2).unwrap()).unwrap();
        assert!(got.agrees_with(&want, 15));
    }

    #[test]
    fn gamma_basis_round_trip() {
        let c = ctx(3, 10);
        let f = TruncatedSeries::from_ints(&c, &[4, -1, 0, 2, 5]);
        let g = gamma_basis(&c, &f);
        let mut back = TruncatedSeries::zero(&c);
        for (j, gj) in g.iter().enumerate() {
            back = back.add(&grouplike(&c, &c.int(j as i128)).unwrap().scale(gj));
        }
        assert!(back.agrees_with(&f, 16));
    }

    #[test]
    fn u_action_on_group_likes() {
        let p = 3;
        let c = ctx(p, 40);
        let one = trivial_elt(&c, TruncatedSeries::one(&c));
        assert!(act_u(&c, &one).unwrap().series.agrees_with(&TruncatedSeries::one(&c), 16));

        // gamma = 1 + x goes to gamma^(1/(1+p)).
        let gamma = trivial_elt(&c, TruncatedSeries::from_ints(&c, &[1, 1]));
        let got = act_u(&c, &gamma).unwrap().series;
        let want = grouplike(&c, &c.ratio(1, 1 + p as i128).unwrap()).unwrap();
        // Only the low coefficients are unaffected by the truncation cap.
        for i in 0..20 {
            assert!(got.coeff(i).agrees_with(&want.coeff(i), 16), "index {i}");
        }

        // (gamma - 1)^2 = gamma^2 - 2 gamma + 1.
        let sq = trivial_elt(&c, TruncatedSeries::from_ints(&c, &[0, 0, 1]));
        let got = act_u(&c, &sq).unwrap().series;
        let g2 = grouplike(&c, &c.ratio(2, 1 + 2 * p as i128).unwrap()).unwrap();
        let g1 = grouplike(&c, &c.ratio(1, 1 + p as i128).unwrap()).unwrap();
        let want = g2.sub(&g1.scale(&c.int(2))).add(&TruncatedSeries::one(&c));
        for i in 0..20 {
            assert!(got.coeff(i).agrees_with(&want.coeff(i), 16), "index {i}");
        }
    }

    #[test]
    fn u_action_twists_by_character_and_keeps_augmentation() {
        let p = 5;
        let c = ctx(p, 30);
        let chi = TorusCharacter::closed_form(&c, 0, 1);
        let gamma = NChiElement::new(TruncatedSeries::from_ints(&c, &[1, 1]), chi, Side::NChi);
        let got = act_u(&c, &gamma).unwrap().series;
        // chi(diag((1+p)^-1, 1+p)) = 1 + p
        assert!(got.coeff(0).agrees_with(&c.int(1 + p as i128), 16));

        let f = trivial_elt(&c, TruncatedSeries::from_ints(&c, &[7, 3, -4, 1]));
        let got = act_u(&c, &f).unwrap().series;
        assert!(got.coeff(0).agrees_with(&c.int(7), 16));

        let minus = NChiElement::new(TruncatedSeries::one(&c), TorusCharacter::trivial(&c), Side::NChiMinus);
        assert!(matches!(act_u(&c, &minus), Err(Error::SideMismatch(_))));
    }

    #[test]
    fn u_maps_monomials_into_powers_of_the_maximal_ideal() {
        for p in [2, 3, 5] {
            let c = ctx(p, 32);
            for chi in [TorusCharacter::trivial(&c), TorusCharacter::closed_form(&c, 1, 3)] {
                for k in 1..32 {
                    let e = NChiElement::new(TruncatedSeries::monomial(&c, k), chi.clone(), Side::NChi);
                    let u = act_u(&c, &e).unwrap().series;
                    for i in 0..k {
                        let need = ((k - i) as i64).min(16);
                        assert!(u.coeff(i).min_valuation() >= need, "p = {p}, k = {k}, i = {i}");
                    }
                }
            }
        }
    }

    #[test]
    fn finite_differences() {
        assert_eq!(finite_difference_sum(3, 2), BigInt::from(0));
        assert_eq!(finite_difference_sum(3, 3), BigInt::from(-6));
        assert_eq!(finite_difference_sum(0, 0), BigInt::from(1));
        assert_eq!(finite_difference_sum(12, 12), BigInt::from(479_001_600));
    }

    #[test]
    fn obstruction_matches_closed_form() {
        let c = ctx(5, 16);
        let cinv = CInvariant { c: c.ratio(1, 6).unwrap(), derivation_precision: 16 };
        let obs = obstruction_coefficients(&c, &cinv, 4, 10).unwrap();
        let row = binomial_row(&c, &cinv.c, 11).unwrap();
        for m in 0..=10 {
            let s: i128 = finite_difference_sum(4, m as u32).try_into().unwrap();
            assert!(obs.coefficients[m].agrees_with(&(row[m] * c.int(s)), 16), "m = {m}");
        }
        assert_eq!(obs.first_nonvanishing, Some(4));

        let zero = CInvariant { c: c.zero(), derivation_precision: 16 };
        assert!(obstruction_coefficients(&c, &zero, 3, 8).unwrap().vanishes);
        let two = CInvariant { c: c.int(2), derivation_precision: 16 };
        assert!(obstruction_coefficients(&c, &two, 3, 8).unwrap().vanishes);
        let three = CInvariant { c: c.int(3), derivation_precision: 16 };
        assert!(!obstruction_coefficients(&c, &three, 3, 8).unwrap().vanishes);
    }

    #[test]
    fn probe_trivial_character_keeps_augmentation_ideal() {
        let c = ctx(3, 32);
        let chi = TorusCharacter::trivial(&c);
        let cfg = ProbeConfig::standard(&c, 1, 1).unwrap().with_generator(TruncatedSeries::x(&c));
        let report = simplicity_probe(&c, &chi, &cfg).unwrap();
        match &report.verdict {
            ProbeVerdict::PersistentDivisor(d) => {
                assert_eq!(d.weierstrass_degree, 1);
                assert!(d.distinguished_part[0].is_zero());
            }
            other => panic!("unexpected verdict {other:?}"),
        }
        assert_eq!(report.classification.in_n0_at, Some(0));
    }

    #[test]
    fn probe_reaches_unit_ideal_off_n0() {
        let c = ctx(3, 32);
        let chi = TorusCharacter::with_c(&c, &c.ratio(1, 4).unwrap()).unwrap();
        let cfg = ProbeConfig::standard(&c, 1, 1).unwrap();
        let report = simplicity_probe(&c, &chi, &cfg).unwrap();
        assert!(matches!(report.verdict, ProbeVerdict::UnitIdealReached { .. }), "{:?}", report.verdict);
        assert_eq!(report.classification.in_n0_at, None);
        assert!(!report.obstruction.vanishes);

        let unit = ProbeConfig::standard(&c, 1, 1).unwrap().with_generator(TruncatedSeries::one(&c));
        let report = simplicity_probe(&c, &chi, &unit).unwrap();
        assert_eq!(report.verdict, ProbeVerdict::UnitIdealReached { generation: 0 });
    }

    #[test]
    fn intertwiners() {
        let c = ctx(5, 64);
        let samples = [c.int(2), c.int(3), c.int(7)];
        let chi = TorusCharacter::closed_form(&c, 1, 3);

        let same = intertwiner_solve(&c, &chi, &chi, &samples).unwrap();
        assert_eq!(same.conclusion, IntertwinerConclusion::NonzeroIntertwiner { m: 0 });
        assert!(same.residuals.iter().all(|r| r.vanishes));

        let other_centre = TorusCharacter::closed_form(&c, 2, 3);
        let r = intertwiner_solve(&c, &other_centre, &chi, &samples).unwrap();
        assert_eq!(r.conclusion, IntertwinerConclusion::ZeroByCentralCharacter);

        let shifted = shift_by_ratio_power(&c, &chi, 1);
        let r = intertwiner_solve(&c, &shifted, &chi, &samples).unwrap();
        assert_eq!(r.exponent, Some(1));
        assert!(r.residuals.iter().all(|p| p.vanishes), "{:?}", r.residuals);
        assert_eq!(r.conclusion, IntertwinerConclusion::ZeroUnbounded { m: 1 });
    }

    #[test]
    fn log_power_fails_in_the_opposite_orientation() {
        // With c(chi') - c(chi) = +2, [log(1 + x)] does not solve the equation.
        let c = ctx(5, 32);
        let chi = TorusCharacter::closed_form(&c, 1, 3);
        let chi_prime = shift_by_ratio_power(&c, &chi, -1);
        let d = c_of_chi(&c, &chi_prime).unwrap().c - c_of_chi(&c, &chi).unwrap().c;
        assert!(d.agrees_with(&c.int(2), 15));
        let f = log_series_power(&c, 1);
        let r = functional_equation_residual(&c, &chi_prime, &chi, &f, &c.int(2)).unwrap();
        assert!(!r.vanishes);
        let report = intertwiner_solve(&c, &chi_prime, &chi, &[c.int(2)]).unwrap();
        assert_eq!(report.conclusion, IntertwinerConclusion::ZeroNoCandidate);
    }
}
