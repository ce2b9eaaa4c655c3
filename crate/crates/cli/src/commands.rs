//! One function per subcommand, each producing a [`Report`].

use anyhow::{bail, ensure, Context, Result};
use iwasawa_core::characters::{c_of_chi, char_conductor, classify_c, CInvariant, CharacterSpec, Conductor, TorusCharacter};
use iwasawa_core::duality::{dual_data, exactness_suite, FreeModuleMap};
use iwasawa_core::finite::group::{bruhat_census, congruence_subgroup, enumerate_group, generate_subgroup};
use iwasawa_core::finite::induced::{bruhat_module_split, build_induced, dual_pairing_check};
use iwasawa_core::finite::{
    ideal_power_nilpotency, nakayama_dimension, random_product_containment, regular_action, FiniteGroup,
    GL2ModElement, IdealData, NilpotencyMode,
};
use iwasawa_core::iwasawa::{
    default_samples, intertwiner_solve, obstruction_coefficients, shift_by_ratio_power, simplicity_probe,
    IntertwinerConclusion, ProbeConfig,
};
use iwasawa_core::linalg::IntMatrix;
use iwasawa_core::report::{Report, RunConfig};
use iwasawa_core::selftest;
use iwasawa_core::{PadicNumber, PrecisionContext};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// Largest group whose regular representation `nakayama` will build.
const REGULAR_GUARD: usize = 400;
/// Random products drawn by `nilpotency`.
const CONTAINMENT_SAMPLES: usize = 256;

fn context(cfg: &RunConfig) -> Result<PrecisionContext> {
    Ok(PrecisionContext::new(cfg.p, cfg.prec, cfg.trunc)?)
}

fn load_character(ctx: &PrecisionContext, path: &str) -> Result<(CharacterSpec, TorusCharacter)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading character spec {path}"))?;
    let spec: CharacterSpec = text.parse().with_context(|| format!("in character spec {path}"))?;
    let chi = spec.resolve(ctx).with_context(|| format!("resolving character spec {path}"))?;
    Ok((spec, chi))
}

/// The first character file, or the trivial character.
fn character(ctx: &PrecisionContext, cfg: &RunConfig) -> Result<(String, TorusCharacter)> {
    match cfg.char_files.first() {
        Some(path) => {
            let (spec, chi) = load_character(ctx, path)?;
            Ok((spec.to_string(), chi))
        }
        None => {
            let chi = TorusCharacter::trivial(ctx);
            Ok((chi.to_spec().to_string(), chi))
        }
    }
}

fn units(ctx: &PrecisionContext, samples: &[i64]) -> Result<Vec<PadicNumber>> {
    let out: Vec<PadicNumber> = samples.iter().map(|&a| ctx.int(a as i128)).collect();
    if let Some(a) = out.iter().find(|a| !a.is_unit()) {
        bail!("torus sample {a} is not a unit of Z_{}", ctx.p());
    }
    Ok(out)
}

/// Largest classification bound below `p^digits`, capped at 100.
fn classification_bound(p: u64, digits: i64) -> u64 {
    let reach = (p as u128).saturating_pow(digits.clamp(0, 60) as u32);
    (reach.saturating_sub(1)).min(100) as u64
}

/// `x` truncated to the report precision, with the integer it matches when
/// that integer is small.
fn show(ctx: &PrecisionContext, x: &PadicNumber) -> String {
    let digits = ctx.prec() as i64;
    let t = x.truncate_abs(digits);
    let small = (0..=1000i128).flat_map(|m| [m, -m]).find(|&m| (*x - ctx.int(m)).min_valuation() >= digits);
    match small {
        Some(m) => format!("{m} ({t})"),
        None => t.to_string(),
    }
}

fn parse_ratio(ctx: &PrecisionContext, s: &str) -> Result<PadicNumber> {
    let (num, den) = s.split_once('/').unwrap_or((s, "1"));
    let num: i128 = num.trim().parse().with_context(|| format!("bad numerator in c = {s:?}"))?;
    let den: i128 = den.trim().parse().with_context(|| format!("bad denominator in c = {s:?}"))?;
    Ok(ctx.ratio(num, den)?)
}

pub fn cchi(cfg: &RunConfig) -> Result<Report> {
    let ctx = context(cfg)?;
    let (spec, chi) = character(&ctx, cfg)?;
    let c = c_of_chi(&ctx, &chi)?;
    let classification = classify_c(&ctx, &c, classification_bound(ctx.p(), c.derivation_precision))?;
    let conductor = char_conductor(&ctx, &chi)?;
    let verdict = if classification.in_n0_at.is_some() { "in_n0" } else { "not_in_n0" };
    let conductor_text = match conductor {
        Conductor::Level(n) => format!("{n}"),
        Conductor::Exceeds(n) => format!("> {}", n.saturating_sub(1)),
    };
    let report = Report::new("cchi", cfg, verdict)
        .line(format!("c(chi) = {} (certified to {} digits)", show(&ctx, &c.c), c.derivation_precision))
        .line(classification.summary())
        .line(format!("conductor: {conductor_text}"));
    Ok(report.with_result(&json!({
        "character": spec,
        "c": c.c.truncate_abs(cfg.prec as i64).to_string(),
        "derivation_precision": c.derivation_precision,
        "classification": classification,
        "conductor": conductor,
    }))?)
}

pub fn simplicity(cfg: &RunConfig) -> Result<Report> {
    let ctx = context(cfg)?;
    let (spec, chi) = character(&ctx, cfg)?;
    let mut probe = ProbeConfig::standard(&ctx, cfg.k, cfg.ell)?;
    probe.torus_samples = if cfg.samples.is_empty() { default_samples(&ctx) } else { units(&ctx, &cfg.samples)? };
    let r = simplicity_probe(&ctx, &chi, &probe)?;
    let generator = if cfg.k == 0 { format!("x^{}", cfg.ell) } else { format!("omega_{{p^{}}}(x)^{}", cfg.k, cfg.ell) };
    let report = Report::new("simplicity", cfg, r.verdict.label())
        .line(format!(
            "generator {generator}, samples {:?} and u",
            probe.torus_samples.iter().map(|a| show(&ctx, a)).collect::<Vec<_>>()
        ))
        .line(format!("verdict: {} (orbit sizes {:?}, gcd degrees {:?})", r.verdict.label(), r.generation_sizes, r.gcd_degrees))
        .line(format!("c(chi) = {}: {}", show(&ctx, &r.c.c), r.classification.summary()))
        .line(format!(
            "obstruction (l = {}): first nonvanishing coefficient {:?}; valid mod x^{}",
            r.obstruction.ell, r.obstruction.first_nonvanishing, r.valid_mod_x
        ));
    Ok(report.with_result(&json!({
        "character": spec,
        "generator": generator,
        "torus_samples": probe.torus_samples.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "probe": r,
    }))?)
}

pub fn intertwine(cfg: &RunConfig) -> Result<Report> {
    let ctx = context(cfg)?;
    ensure!(cfg.char_files.len() <= 2, "intertwine takes at most two character files (source, target)");
    let (source_spec, target_spec, source, target) = match (cfg.char_files.as_slice(), cfg.shift) {
        ([a, b], None) => {
            let (sa, ca) = load_character(&ctx, a)?;
            let (sb, cb) = load_character(&ctx, b)?;
            (sa.to_string(), sb.to_string(), ca, cb)
        }
        ([_, _], Some(_)) => bail!("--shift needs a single target character"),
        (files, shift) => {
            let (spec, chi) = character(&ctx, &RunConfig { char_files: files.to_vec(), ..cfg.clone() })?;
            let source = shift_by_ratio_power(&ctx, &chi, shift.unwrap_or(0));
            (source.to_spec().to_string(), spec, source, chi)
        }
    };
    let samples = if cfg.samples.is_empty() {
        [2i64, 3, 7].into_iter().filter(|a| a % cfg.p as i64 != 0).collect()
    } else {
        cfg.samples.clone()
    };
    let samples = units(&ctx, &samples)?;
    let r = intertwiner_solve(&ctx, &source, &target, &samples)?;
    let verdict = match r.conclusion {
        IntertwinerConclusion::NonzeroIntertwiner { .. } => "nonzero_intertwiner",
        _ => "zero",
    };
    let mut report = Report::new("intertwine", cfg, verdict)
        .line(format!("Hom(N_chi', N_chi): {:?}", r.conclusion))
        .line(format!("central characters match: {}", r.central_match))
        .line(format!(
            "c(chi') = {}, c(chi) = {}, exponent m = {:?}",
            show(&ctx, &r.c_source),
            show(&ctx, &r.c_target),
            r.exponent
        ));
    for res in &r.residuals {
        report = report.line(format!(
            "residual at a = {}: min valuation {:?} (threshold {}), vanishes: {}",
            show(&ctx, &res.a),
            res.min_valuation, res.threshold, res.vanishes
        ));
    }
    report = report.line(format!("cross-cell homomorphisms: {}", r.cross_cell_homs));
    Ok(report.with_result(&json!({ "source": source_spec, "target": target_spec, "analysis": r }))?)
}

pub fn obstruction(cfg: &RunConfig) -> Result<Report> {
    let ctx = context(cfg)?;
    let (label, inv) = match &cfg.c {
        Some(s) => ("c".to_string(), CInvariant { c: parse_ratio(&ctx, s)?, derivation_precision: cfg.prec as i64 }),
        None => {
            let (_, chi) = character(&ctx, cfg)?;
            ("c = c(chi)".to_string(), c_of_chi(&ctx, &chi)?)
        }
    };
    let degree = cfg.degree.unwrap_or(cfg.ell as usize + 6);
    let ob = obstruction_coefficients(&ctx, &inv, cfg.ell, degree)?;
    let verdict = if ob.vanishes { "vanishes" } else { "nonvanishing" };
    let valuations: Vec<Option<i64>> =
        ob.coefficients.iter().map(|v| (!v.is_exact_zero()).then(|| v.min_valuation())).collect();
    let report = Report::new("obstruction", cfg, verdict)
        .line(format!("{label} = {}, l = {}, coefficients of y^0..y^{degree}", show(&ctx, &inv.c), cfg.ell))
        .line(format!("coefficient valuations: {valuations:?} (exact zero: None)"))
        .line(match ob.first_nonvanishing {
            Some(m) => format!("first coefficient below p^{}: y^{m}", cfg.prec),
            None => format!("all coefficients vanish to p^{}", cfg.prec),
        });
    Ok(report.with_result(&json!({
        "c": inv.c.truncate_abs(cfg.prec as i64).to_string(),
        "ell": cfg.ell,
        "degree": degree,
        "coefficients": ob.coefficients.iter().map(|v| v.truncate_abs(cfg.prec as i64).to_string()).collect::<Vec<_>>(),
        "valuations": valuations,
        "finite_difference_sums": ob.integer_sums,
        "first_nonvanishing": ob.first_nonvanishing,
        "vanishes": ob.vanishes,
    }))?)
}

/// Named subgroups of `GL_2(Z/p^n)`.
fn named_subgroup(name: &str, p: u64, level: u32, group: &[GL2ModElement]) -> Result<Vec<GL2ModElement>> {
    let kernel = |j: u32| -> Result<Vec<GL2ModElement>> {
        ensure!(j >= 1 && j < level, "kernel of reduction to level {j} needs level > {j} (level is {level})");
        Ok(congruence_subgroup(p, level, j)?)
    };
    Ok(match name {
        "whole" => group.to_vec(),
        "trivial" => vec![GL2ModElement::identity(p, level)?],
        "iwahori" => group.iter().filter(|g| g.in_iwahori()).copied().collect(),
        "parabolic" => group.iter().filter(|g| g.in_parabolic()).copied().collect(),
        "unipotent" => generate_subgroup(&[GL2ModElement::u(p, level)?], (p as usize).pow(level))?,
        _ => match name.strip_prefix('k').and_then(|j| j.parse::<u32>().ok()) {
            Some(j) => kernel(j)?,
            None => bail!("unknown subgroup {name:?} (whole, trivial, iwahori, parabolic, unipotent, k1, k2, ...)"),
        },
    })
}

pub fn nilpotency(cfg: &RunConfig) -> Result<Report> {
    let (p, level) = (cfg.p, cfg.level);
    let name = cfg.subgroup.clone().unwrap_or_else(|| if level >= 2 { "k1".into() } else { "unipotent".into() });
    // The cyclic unipotent group is studied inside itself; the other
    // subgroups inside GL2(Z/p^n), where they must be normal.
    let (group, subgroup) = if name == "unipotent" {
        let h = named_subgroup(&name, p, level, &[])?;
        (FiniteGroup::new(h.clone())?, h)
    } else {
        let group = FiniteGroup::new(enumerate_group(p, level)?)?;
        let h = named_subgroup(&name, p, level, group.elements())?;
        (group, h)
    };
    let ideal = IdealData::new(subgroup.clone());
    let char_p = ideal_power_nilpotency(&group, &ideal, NilpotencyMode::CharP)?;
    let containment = ideal_power_nilpotency(&group, &ideal, NilpotencyMode::PiContainment)?;
    let m = char_p.index;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let long = random_product_containment(&group, &subgroup, m, CONTAINMENT_SAMPLES, &mut rng)?;
    let long_ok = long.iter().all(|s| s.in_p_ideal);
    let short_witness = if m > 1 {
        random_product_containment(&group, &subgroup, m - 1, CONTAINMENT_SAMPLES, &mut rng)?
            .into_iter()
            .find(|s| !s.in_p_ideal)
    } else {
        None
    };
    let mut report = Report::new("nilpotency", cfg, format!("index_{m}"))
        .line(format!(
            "H = {name} (order {}) in a group of order {}: I_H^m = 0 in F_p[G] first at m = {m}",
            char_p.subgroup_order, char_p.group_order
        ))
        .line(format!("dim I^k over F_p: {:?}; rank re-verification: {}", char_p.sizes, char_p.independently_verified))
        .line(format!("products of m elements h - 1 all in pZ[G] first at m = {}", containment.index))
        .line(format!(
            "{CONTAINMENT_SAMPLES} random products of length {m} in pZ[G]: {long_ok}; length {} witness outside: {}",
            m.saturating_sub(1),
            short_witness.is_some()
        ));
    for w in &char_p.warnings {
        report = report.line(format!("warning: {w}"));
    }
    Ok(report.with_result(&json!({
        "subgroup": name,
        "char_p": char_p,
        "pi_containment": containment,
        "random_products": CONTAINMENT_SAMPLES,
        "length_m_all_in_p_ideal": long_ok,
        "length_m_minus_1_witness": short_witness.map(|s| {
            json!({
                "left": s.left.to_string(),
                "factors": s.factors.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
            })
        }),
    }))?)
}

pub fn nakayama(cfg: &RunConfig) -> Result<Report> {
    let (p, level) = (cfg.p, cfg.level);
    let name = cfg.subgroup.clone().unwrap_or_else(|| "iwahori".into());
    let group = FiniteGroup::new(enumerate_group(p, level)?)?;
    ensure!(
        group.order() <= REGULAR_GUARD,
        "regular representation of a group of order {} exceeds the guard {REGULAR_GUARD}",
        group.order()
    );
    let h = named_subgroup(&name, p, level, group.elements())?;
    let r = nakayama_dimension(p, group.order(), &regular_action(&group, &h)?)?;
    let index = group.order() / h.len();
    let verdict = if r.coinvariant_rank == index && r.ranks_agree { "rank_equals_index" } else { "mismatch" };
    let report = Report::new("nakayama", cfg, verdict)
        .line(format!("H = {name} (order {}) in GL2(Z/{p}^{level}) (order {})", h.len(), group.order()))
        .line(format!("rank of the H-coinvariants of o[G]: {} ([G:H] = {index})", r.coinvariant_rank))
        .line(format!("torsion divisors: {:?}; dual invariant rank agrees: {}", r.torsion_divisors, r.ranks_agree));
    Ok(report.with_result(&json!({ "subgroup": name, "index": index, "coinvariants": r }))?)
}

pub fn bruhat(cfg: &RunConfig) -> Result<Report> {
    let c = bruhat_census(cfg.p, cfg.level)?;
    let ok = c.exactly_one_cell && c.iwahori_factor_remultiplies && c.cell_b + c.cell_bwp == c.order;
    let report = Report::new("bruhat", cfg, if ok { "partition" } else { "failure" })
        .line(format!("GL2(Z/{}^{}) has order {}", c.p, c.level, c.order))
        .line(format!("|B| = {}, |BwP| = {}; every element in exactly one cell: {}", c.cell_b, c.cell_bwp, c.exactly_one_cell))
        .line(format!("B = U^- x P factorization re-multiplies on all of B: {}", c.iwahori_factor_remultiplies));
    Ok(report.with_result(&c)?)
}

pub fn induce(cfg: &RunConfig) -> Result<Report> {
    let ctx = context(cfg)?;
    let (spec, chi) = character(&ctx, cfg)?;
    let ind = build_induced(&ctx, &chi, cfg.level)?;
    let pairing = dual_pairing_check(&ctx, &ind)?;
    let split = bruhat_module_split(&ctx, &chi, cfg.level)?;
    let verdict = if pairing.nonsingular && pairing.invariant { "nonsingular" } else { "singular" };
    let report = Report::new("induce", cfg, verdict)
        .line(format!("dim Ind(chi) at level {} = {}", cfg.level, ind.dim()))
        .line(format!(
            "pairing with the chi^-1 model: rank {} of {}, invariant under {} elements: {}",
            pairing.pairing_rank, pairing.dim_induced, pairing.elements_tested, pairing.invariant
        ))
        .line(format!(
            "N-block {} + N^- block {} = {}: {}; w maps N into N^-: {}",
            split.n_block.len(),
            split.minus_block.len(),
            split.dim,
            split.dims_add_up,
            split.w_maps_n_into_minus
        ))
        .line(format!(
            "non-equivariance witness: {}",
            split.non_equivariance_witness.map_or("none".to_string(), |g| g.to_string())
        ));
    Ok(report.with_result(&json!({ "character": spec, "dim": ind.dim(), "pairing": pairing, "split": split }))?)
}

/// Integer rows separated by whitespace or commas; `#` starts a comment.
pub fn parse_matrix(text: &str) -> Result<IntMatrix> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<i128>().with_context(|| format!("bad matrix entry {t:?}")))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    ensure!(!rows.is_empty(), "empty matrix");
    Ok(rows)
}

pub fn duality(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.p;
    let (source, matrix) = match &cfg.matrix_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading matrix {path}"))?;
            (path.clone(), parse_matrix(&text)?)
        }
        None => ("diag(1, p)".to_string(), vec![vec![1, 0], vec![0, p as i128]]),
    };
    let f = FreeModuleMap::from_rows(matrix)?;
    let r = exactness_suite(&f, p)?;
    let d = dual_data(&f, p)?;
    let verdict = match (r.surjective, r.dual_isometry) {
        (true, true) => "surjective_isometry",
        (false, false) => "not_surjective_not_isometry",
        _ => "biconditional_violated",
    };
    let report = Report::new("duality", cfg, verdict)
        .line(format!("f: o^{} -> o^{} ({source}), elementary divisors {:?}", r.domain_rank, r.codomain_rank, r.elementary_divisors))
        .line(format!(
            "rank ker f = {} = rank M^d / closure f^d(N^d) = {}: {}",
            r.kernel_rank, r.dual_quotient_rank, r.identity_i
        ))
        .line(format!(
            "rank coker(f)_cot = {} = rank ker f^d = {}: {}",
            r.cokernel_cot_rank, r.dual_kernel_rank, r.identity_ii
        ))
        .line(format!(
            "f {} surjective, f^d {} an isometry",
            if r.surjective { "is" } else { "is not" },
            if r.dual_isometry { "is" } else { "is not" }
        ));
    Ok(report.with_result(&json!({ "source": source, "exactness": r, "dual": d }))?)
}

pub fn selftest(cfg: &RunConfig) -> Result<Report> {
    let result = selftest::run_all(cfg);
    let verdict = if result.all_passed() { "pass" } else { "fail" };
    let mut report = Report::new("selftest", cfg, verdict);
    for c in &result.criteria {
        report = report.line(format!("[{}] {:>2} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.title, c.summary));
    }
    report = report.line(format!("{} passed, {} failed", result.passed, result.failed));
    Ok(report.with_result(&result)?)
}
