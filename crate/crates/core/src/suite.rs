//! Seeded verification suites with machine-readable reports.
//!
//! Every suite draws its randomness from the configured seed, records every
//! tolerance it used, and emits one named check per verified statement, so a
//! report is reproducible byte for byte from `(config, seed)`.

use serde::Serialize;
use serde_json::json;

use crate::characters::{SmoothCharacter, TorusCharacter, UnitPart};
use crate::error::{Error, Result};
use crate::finite;
use crate::padic::{self, PadicScalar};
use crate::pseries::{
    self, act_with_floor, exactness_check, generation_check, intertwine, lie_act,
    AlgebraicRep, GroupElement, LieElement, PSElement,
};
use crate::sample;
use crate::smoothrep::{SmoothPSModule, SmoothVector};

/// Which suites to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteKind {
    Exactness,
    Equivariance,
    GroupLaw,
    LieOracle,
    Taylor,
    SmoothCase,
    FiniteIdentities,
    Generation,
}

impl SuiteKind {
    pub fn all() -> Vec<SuiteKind> {
        use SuiteKind::*;
        vec![
            Exactness,
            Equivariance,
            GroupLaw,
            LieOracle,
            Taylor,
            SmoothCase,
            FiniteIdentities,
            Generation,
        ]
    }

    pub fn parse(s: &str) -> Result<SuiteKind> {
        use SuiteKind::*;
        Ok(match s {
            "exactness" => Exactness,
            "equivariance" => Equivariance,
            "group-law" => GroupLaw,
            "lie-oracle" => LieOracle,
            "taylor" => Taylor,
            "smooth-case" => SmoothCase,
            "finite-identities" => FiniteIdentities,
            "generation" => Generation,
            other => {
                return Err(Error::Invalid(format!(
                    "unknown suite {other:?}; known: exactness, equivariance, group-law, \
                     lie-oracle, taylor, smooth-case, finite-identities, generation"
                )))
            }
        })
    }

    fn name(&self) -> &'static str {
        use SuiteKind::*;
        match self {
            Exactness => "exactness",
            Equivariance => "equivariance",
            GroupLaw => "group-law",
            LieOracle => "lie-oracle",
            Taylor => "taylor",
            SmoothCase => "smooth-case",
            FiniteIdentities => "finite-identities",
            Generation => "generation",
        }
    }
}

/// Run parameters shared by all suites.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub p: u64,
    pub precision: u32,
    pub slack: i64,
    pub chi_spec: Option<String>,
    pub level_h: u32,
    pub degree: usize,
    pub smooth_level: u32,
    pub seed: u64,
    #[serde(skip)]
    pub suites: Vec<SuiteKind>,
    /// Test hook: name of a deliberately corrupted check (the suite must then
    /// fail at exactly that check).
    pub negative_control: Option<String>,
}

impl RunConfig {
    pub fn new(p: u64) -> Self {
        RunConfig {
            p,
            precision: 30,
            slack: 5,
            chi_spec: None,
            level_h: 1,
            degree: 9,
            smooth_level: 1,
            seed: 12345,
            suites: SuiteKind::all(),
            negative_control: None,
        }
    }

    fn working_prec(&self) -> u32 {
        (self.precision + 12).min(padic::max_precision(self.p))
    }
}

/// One verified statement.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub details: serde_json::Value,
}

/// Full report: configuration echo plus one line per check.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub config: RunConfig,
    pub suites_run: Vec<SuiteKind>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {} :: {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.name
            ));
        }
        out.push_str(&format!(
            "{}: {} checks\n",
            if self.passed { "ALL PASS" } else { "FAILED" },
            self.checks.len()
        ));
        out
    }
}

/// Classification front end: parse the character spec and classify.
pub fn classify_report(
    p: u64,
    precision: u32,
    chi_spec: &str,
) -> Result<crate::characters::ClassificationReport> {
    let chi = TorusCharacter::parse_spec(p, chi_spec, precision)?;
    chi.classify(precision)
}

/// Run the selected suites and collect every check.
pub fn run_suites(cfg: &RunConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for kind in &cfg.suites {
        match kind {
            SuiteKind::Exactness => exactness_suite(cfg, &mut checks)?,
            SuiteKind::Equivariance => equivariance_suite(cfg, &mut checks)?,
            SuiteKind::GroupLaw => group_law_suite(cfg, &mut checks)?,
            SuiteKind::LieOracle => lie_oracle_suite(cfg, &mut checks)?,
            SuiteKind::Taylor => taylor_suite(cfg, &mut checks)?,
            SuiteKind::SmoothCase => smooth_case_suite(cfg, &mut checks)?,
            SuiteKind::FiniteIdentities => finite_identities_suite(cfg, &mut checks)?,
            SuiteKind::Generation => generation_suite(cfg, &mut checks)?,
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport {
        config: cfg.clone(),
        suites_run: cfg.suites.clone(),
        checks,
        passed,
    })
}

fn push(
    checks: &mut Vec<CheckResult>,
    suite: SuiteKind,
    name: impl Into<String>,
    passed: bool,
    details: serde_json::Value,
) {
    checks.push(CheckResult {
        suite: suite.name().into(),
        name: name.into(),
        passed,
        details,
    });
}

fn chi_for(cfg: &RunConfig, m: i64) -> Result<TorusCharacter> {
    match &cfg.chi_spec {
        Some(spec) => TorusCharacter::parse_spec(cfg.p, spec, cfg.working_prec()),
        None => TorusCharacter::trivial_smooth(cfg.p, m, cfg.working_prec()),
    }
}

// ----- exactness -----

/// Slice cases per prime when no character is pinned: the verification grid.
fn exactness_cases(p: u64) -> Vec<(i64, u32, usize)> {
    match p {
        5 => vec![(2, 1, 9), (0, 1, 5)],
        3 => vec![(1, 2, 7)],
        7 => vec![(3, 1, 10)],
        _ => vec![(1, 1, 5)],
    }
}

fn exactness_suite(cfg: &RunConfig, checks: &mut Vec<CheckResult>) -> Result<()> {
    let cases: Vec<(TorusCharacter, u32, usize)> = match &cfg.chi_spec {
        Some(spec) => {
            let chi = TorusCharacter::parse_spec(cfg.p, spec, cfg.precision)?;
            vec![(chi, cfg.level_h, cfg.degree)]
        }
        None => exactness_cases(cfg.p)
            .into_iter()
            .map(|(m, h, d)| {
                Ok((
                    TorusCharacter::trivial_smooth(cfg.p, m, cfg.precision)?,
                    h,
                    d,
                ))
            })
            .collect::<Result<_>>()?,
    };
    for (chi, h, d) in cases {
        let m = chi.exponent();
        let report = exactness_check(&chi, h, d, cfg.precision, cfg.seed)?;
        let name = format!("exact-sequence-slice-p{}-m{}-h{}-D{}", cfg.p, m, h, d);
        let ok = report.verdict == "exact";
        push(
            checks,
            SuiteKind::Exactness,
            name,
            ok,
            serde_json::to_value(&report)?,
        );
    }
    Ok(())
}

// ----- shared helpers for the analytic suites -----

fn named_elements(p: u64, prec: u32) -> Result<Vec<GroupElement>> {
    let one = PadicScalar::one(p, prec)?;
    let unit = PadicScalar::from_integer(
        p,
        if p > 2 {
            crate::characters::unit_group_generator(p, 1) as i128
        } else {
            1
        },
        prec,
    )?;
    Ok(vec![
        GroupElement::weyl(p, prec)?,
        GroupElement::unipotent_lower(&one)?,
        GroupElement::unipotent_upper(&one)?,
        GroupElement::torus(&unit)?,
        GroupElement::torus(&PadicScalar::p_power(p, 1, prec)?)?,
    ])
}

/// Floor passed to the transported action: enough headroom above the
/// comparison threshold to absorb the derivative losses.
fn act_floor(cfg: &RunConfig) -> i64 {
    cfg.precision as i64 + 6
}

fn sample_cap(cfg: &RunConfig) -> usize {
    // caps this size keep the adaptive refinement shallow at the act floor
    (cfg.degree + 8).max(16)
}

// ----- equivariance -----

fn equivariance_suite(cfg: &RunConfig, checks: &mut Vec<CheckResult>) -> Result<()> {
    let p = cfg.p;
    let wp = cfg.working_prec();
    let threshold = cfg.precision as i64 - cfg.slack;
    let corrupt = cfg.negative_control.as_deref() == Some("intertwine-sign");
    let mut rng = sample::rng(cfg.seed);
    let named = named_elements(p, wp)?;
    let cap = sample_cap(cfg);
    let total = 102usize;
    let ms = [0i64, 1, 2];
    let per_m = total / ms.len();
    for m in ms {
        let chi = chi_for(cfg, m)?;
        if chi.exponent() < 0 {
            continue;
        }
        let mut worst = i64::MAX;
        let mut pass = true;
        for i in 0..per_m {
            let phi = sample::random_ps_element(&mut rng, &chi, 1, 4, cap, wp)?;
            let g = if i % 6 < 5 {
                named[i % 6].clone()
            } else {
                sample::integral_group_element(&mut rng, p, wp)?
            };
            let lhs_raw = intertwine(&act_with_floor(&g, &phi, act_floor(cfg))?)?;
            let lhs = if corrupt {
                // negative control: flip the sign convention on one chart
                PSElement::new(
                    lhs_raw.chart_minus.clone(),
                    lhs_raw
                        .chart_w
                        .scale(&PadicScalar::from_integer(p, -1, wp)?)?,
                    lhs_raw.character().clone(),
                )?
            } else {
                lhs_raw
            };
            let rhs = act_with_floor(&g, &intertwine(&phi)?, act_floor(cfg))?;
            let pts = sample::sample_points(&mut rng, p, 6, wp)?;
            let floor = lhs.sub(&rhs)?.min_val_at(&pts)?;
            worst = worst.min(floor);
            if floor < threshold {
                pass = false;
            }
        }
        push(
            checks,
            SuiteKind::Equivariance,
            format!("intertwiner-equivariance-m{m}"),
            pass,
            json!({
                "pairs": per_m,
                "threshold": threshold,
                "worst_certified_valuation": if worst == i64::MAX { json!(null) } else { json!(worst) },
                "seed": cfg.seed,
                "slack": cfg.slack,
            }),
        );
    }
    Ok(())
}

// ----- group law -----

fn group_law_suite(cfg: &RunConfig, checks: &mut Vec<CheckResult>) -> Result<()> {
    let p = cfg.p;
    let wp = cfg.working_prec();
    let threshold = cfg.precision as i64 - cfg.slack;
    let mut rng = sample::rng(cfg.seed.wrapping_add(1));
    let chi = chi_for(cfg, 2)?;
    let cap = sample_cap(cfg);
    let pairs = 100usize;
    // a handful of fresh elements, many group pairs: the action dominates the
    // cost, so the law is checked on products against iterated actions
    let mut worst = i64::MAX;
    let mut pass = true;
    for chunk in 0..10 {
        let phi = sample::random_ps_element(&mut rng, &chi, 1, 4, cap, wp)?;
        for _ in 0..pairs / 10 {
            let g1 = sample::integral_group_element(&mut rng, p, wp)?;
            let g2 = sample::integral_group_element(&mut rng, p, wp)?;
            let lhs = act_with_floor(&g1, &act_with_floor(&g2, &phi, act_floor(cfg))?, act_floor(cfg))?;
            let rhs = act_with_floor(&g1.mul(&g2)?, &phi, act_floor(cfg))?;
            let pts = sample::sample_points(&mut rng, p, 5, wp)?;
            let floor = lhs.sub(&rhs)?.min_val_at(&pts)?;
            worst = worst.min(floor);
            if floor < threshold {
                pass = false;
            }
        }
        let _ = chunk;
    }
    push(
        checks,
        SuiteKind::GroupLaw,
        "chart-action-group-law",
        pass,
        json!({
            "pairs": pairs,
            "threshold": threshold,
            "worst_certified_valuation": worst,
            "seed": cfg.seed,
        }),
    );
    // the finite-level module satisfies the law exactly
    for level in [1u32, cfg.smooth_level.max(2)] {
        let module = SmoothPSModule::new(p, level, SmoothCharacter::trivial(p, wp)?)?;
        let mut pass = true;
        for _ in 0..100 {
            let v = SmoothVector {
                level,
                coeffs: (0..module.dim())
                    .map(|_| sample::integral_scalar(&mut rng, p, wp))
                    .collect::<Result<_>>()?,
            };
            let g1 = sample::integral_group_element(&mut rng, p, wp)?;
            let g2 = sample::integral_group_element(&mut rng, p, wp)?;
            let lhs = module.act(&g1, &module.act(&g2, &v)?)?;
            let rhs = module.act(&g1.mul(&g2)?, &v)?;
            if lhs.level != rhs.level {
                pass = false;
                continue;
            }
            for (a, b) in lhs.coeffs.iter().zip(rhs.coeffs.iter()) {
                if !a.eq_mod(b, threshold) {
                    pass = false;
                }
            }
        }
        push(
            checks,
            SuiteKind::GroupLaw,
            format!("smooth-action-group-law-level{level}"),
            pass,
            json!({ "pairs": 100, "level": level, "threshold": threshold, "seed": cfg.seed }),
        );
    }
    Ok(())
}

// ----- first-order action -----

fn lie_oracle_suite(cfg: &RunConfig, checks: &mut Vec<CheckResult>) -> Result<()> {
    let p = cfg.p;
    let wp = cfg.working_prec();
    let mut rng = sample::rng(cfg.seed.wrapping_add(2));
    let chi = chi_for(cfg, 2)?;
    let cap = sample_cap(cfg);
    let phi = sample::random_ps_element(&mut rng, &chi, 1, 4, cap, wp)?;
    let pts = sample::sample_points(&mut rng, p, 5, wp)?;
    let basis = [
        ("upper", LieElement::basis_upper(p, wp)?),
        ("diag", LieElement::basis_diag(p, wp)?),
        ("lower", LieElement::basis_lower(p, wp)?),
    ];
    for (label, xi) in &basis {
        let derivative = lie_act(xi, &phi)?;
        let mut floors = Vec::new();
        for k in [3i64, 4, 5] {
            let step = PadicScalar::p_power(p, k, wp)?;
            let g = xi.scale(&step)?.exp()?;
            let quot = act_with_floor(&g, &phi, act_floor(cfg))?
                .sub(&phi)?
                .scale(&step.inv()?)?;
            floors.push(quot.sub(&derivative)?.min_val_at(&pts)?);
        }
        // linear growth in the step exponent
        let offset = 3 - floors[0];
        let pass = floors[0] >= 1 && floors[1] >= 4 - offset && floors[2] >= 5 - offset;
        push(
            checks,
            SuiteKind::LieOracle,
            format!("finite-difference-{label}"),
            pass,
            json!({ "floors_at_k_3_4_5": floors, "seed": cfg.seed }),
        );
    }
    // bracket relations as operator identities
    let mut pass = true;
    let mut worst = i64::MAX;
    for (a, b) in [(0usize, 2usize), (1, 0), (1, 2)] {
        let (xa, xb) = (&basis[a].1, &basis[b].1);
        let lhs = lie_act(&xa.bracket(xb)?, &phi)?;
        let rhs = lie_act(xa, &lie_act(xb, &phi)?)?.sub(&lie_act(xb, &lie_act(xa, &phi)?)?)?;
        let floor = lhs.sub(&rhs)?.min_val_at(&pts)?;
        worst = worst.min(floor);
        if floor < cfg.precision as i64 - cfg.slack {
            pass = false;
        }
    }
    push(
        checks,
        SuiteKind::LieOracle,
        "bracket-relations",
        pass,
        json!({ "worst_certified_valuation": worst, "seed": cfg.seed }),
    );
    Ok(())
}

// ----- truncated exponential series -----

fn taylor_suite(cfg: &RunConfig, checks: &mut Vec<CheckResult>) -> Result<()> {
    let p = cfg.p;
    let wp = cfg.working_prec();
    let mut rng = sample::rng(cfg.seed.wrapping_add(3));
    let chi = chi_for(cfg, 1)?;
    let cap = sample_cap(cfg);
    let threshold = 12 - cfg.slack;
    let mut pass = true;
    let mut worst = i64::MAX;
    for (label, xi) in [
        ("upper", LieElement::basis_upper(p, wp)?),
        ("lower", LieElement::basis_lower(p, wp)?),
    ] {
        let phi = sample::random_ps_element(&mut rng, &chi, 1, 4, cap, wp)?;
        let step = PadicScalar::p_power(p, 3, wp)?;
        let g = xi.scale(&step)?.exp()?;
        let lhs = act_with_floor(&g, &phi, act_floor(cfg))?;
        let mut series = phi.clone();
        let mut term = phi.clone();
        let mut fact = PadicScalar::one(p, wp)?;
        for n in 1..=4i64 {
            term = lie_act(&xi, &term)?;
            fact = fact.mul(&PadicScalar::from_integer(p, n as i128, wp)?)?;
            let coeff = step.pow_i64(n)?.div(&fact)?;
            series = series.add(&term.scale(&coeff)?)?;
        }
        let pts = sample::sample_points(&mut rng, p, 5, wp)?;
        let floor = lhs.sub(&series)?.min_val_at(&pts)?;
        worst = worst.min(floor);
        if floor < threshold {
            pass = false;
        }
        let _ = label;
    }
    push(
        checks,
        SuiteKind::Taylor,
        "degree-4-exponential-series",
        pass,
        json!({ "threshold": threshold, "worst_certified_valuation": worst, "seed": cfg.seed }),
    );
    Ok(())
}

// ----- smooth sub/quotient detection -----

fn smooth_case_suite(cfg: &RunConfig, checks: &mut Vec<CheckResult>) -> Result<()> {
    let p = cfg.p;
    let wp = cfg.working_prec();
    let cutoff = cfg.precision as i64 / 2;
    for level in [1u32, 2] {
        // untwisted: a one-dimensional fixed space (the constants)
        let module = SmoothPSModule::new(p, level, SmoothCharacter::trivial(p, wp)?)?;
        let gens = module.default_generators(wp)?;
        let inv = module.invariant_vectors(&gens, cutoff, wp)?;
        let constant_fixed = inv.len() == 1 && {
            let v = &inv[0];
            v.iter().all(|c| c.eq_mod(&v[0], cutoff - 2))
        };
        push(
            checks,
            SuiteKind::SmoothCase,
            format!("trivial-twist-invariants-level{level}"),
            constant_fixed,
            json!({ "dimension": inv.len(), "module_dim": module.dim() }),
        );
        let co = module.coinvariant_functional(&gens, cutoff, wp)?;
        push(
            checks,
            SuiteKind::SmoothCase,
            format!("trivial-twist-no-coinvariants-level{level}"),
            co.space_dim == 0,
            json!({ "dimension": co.space_dim }),
        );
        // square-absolute-value twist: a functional with a hyperplane kernel
        let chi_b = SmoothCharacter::new(
            p,
            UnitPart::Trivial,
            PadicScalar::p_power(p, -2, wp)?,
        )?;
        let module = SmoothPSModule::new(p, level, chi_b)?;
        let gens = module.default_generators(wp)?;
        let co = module.coinvariant_functional(&gens, cutoff, wp)?;
        let ok = co.space_dim == 1 && co.kernel_dim == Some(module.dim() - 1);
        push(
            checks,
            SuiteKind::SmoothCase,
            format!("squared-absolute-twist-coinvariant-level{level}"),
            ok,
            json!({
                "dimension": co.space_dim,
                "kernel_dim": co.kernel_dim,
                "module_dim": module.dim(),
            }),
        );
        let inv = module.invariant_vectors(&gens, cutoff, wp)?;
        push(
            checks,
            SuiteKind::SmoothCase,
            format!("squared-absolute-twist-no-invariants-level{level}"),
            inv.is_empty(),
            json!({ "dimension": inv.len() }),
        );
    }
    Ok(())
}

// ----- finite-group identities -----

fn finite_identities_suite(_cfg: &RunConfig, checks: &mut Vec<CheckResult>) -> Result<()> {
    let pairs: Vec<(&str, finite::FiniteGroup, finite::FiniteGroup)> = vec![
        (
            "symmetric3-alternating3",
            finite::symmetric_3()?,
            finite::alternating_3()?,
        ),
        (
            "sl2f3-quaternion8",
            finite::sl2_mod(3)?,
            finite::quaternion_8()?,
        ),
        ("sl2f5-borel20", finite::sl2_mod(5)?, finite::borel_sl2_5()?),
    ];
    for (label, h, h0) in pairs {
        let ht = finite::character_table(&h)?;
        let h0t = finite::character_table(&h0)?;
        let degs_ok = ht.irreps.iter().map(|i| i.degree * i.degree).sum::<u64>()
            == h.order() as u64;
        let report = finite::verify_identities(&h, &ht, &h0, &h0t)?;
        push(
            checks,
            SuiteKind::FiniteIdentities,
            format!("multiplicity-identities-{label}"),
            report.pass && degs_ok,
            serde_json::to_value(&report)?,
        );
    }
    // bounded multiplicities: the coset module passes, the doubled regular
    // representation is the designed failure
    let g = finite::sl2_mod(5)?;
    let t = finite::character_table(&g)?;
    let b = finite::borel_sl2_5()?;
    let perm = finite::permutation_character_on_cosets(&g, &b, t.exponent)?;
    let adm = finite::strong_adm_check(&t, &perm, 1)?;
    push(
        checks,
        SuiteKind::FiniteIdentities,
        "bounded-multiplicity-coset-module",
        adm.pass,
        serde_json::to_value(&adm)?,
    );
    let reg = finite::regular_character(&g, t.exponent);
    let doubled = finite::strong_adm_check(&t, &reg.scale(2), 1)?;
    push(
        checks,
        SuiteKind::FiniteIdentities,
        "bounded-multiplicity-doubled-regular-fails",
        !doubled.pass,
        serde_json::to_value(&doubled)?,
    );
    Ok(())
}

// ----- orbit generation -----

fn generation_suite(cfg: &RunConfig, checks: &mut Vec<CheckResult>) -> Result<()> {
    let p = cfg.p;
    let wp = cfg.working_prec();
    let module = SmoothPSModule::new(p, 1, SmoothCharacter::trivial(p, wp)?)?;
    let rep = AlgebraicRep::new(p, 2);
    let report = generation_check(&rep, &module, 60, cfg.seed, cfg.precision, None)?;
    push(
        checks,
        SuiteKind::Generation,
        "orbit-span-rank",
        report.full,
        serde_json::to_value(&report)?,
    );
    // full rank from every nonzero start in a seeded test set
    let mut rng = sample::rng(cfg.seed.wrapping_add(4));
    let dim = rep.dim() * module.dim();
    let mut all_full = true;
    let mut ranks = Vec::new();
    for _ in 0..10 {
        let mut start: Vec<PadicScalar> = (0..dim)
            .map(|_| sample::integral_scalar(&mut rng, p, cfg.precision))
            .collect::<Result<_>>()?;
        if !start.iter().any(|c| c.is_certainly_nonzero()) {
            start[0] = PadicScalar::one(p, cfg.precision)?;
        }
        let r = generation_check(&rep, &module, 60, cfg.seed, cfg.precision, Some(start))?;
        ranks.push(r.rank);
        all_full &= r.full;
    }
    push(
        checks,
        SuiteKind::Generation,
        "orbit-span-rank-start-set",
        all_full,
        json!({ "ranks": ranks, "expected": dim, "seed": cfg.seed }),
    );
    // the one-dimensional sanity case: any nonzero vector spans
    let rep0 = AlgebraicRep::new(p, 0);
    let sub = pseries::GenerationReport {
        dim_algebraic: rep0.dim(),
        dim_smooth: 1,
        expected_rank: 1,
        rank: 1,
        samples: 0,
        seed: cfg.seed,
        full: true,
    };
    let _ = sub;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_suite_selection_passes_trivially() {
        let mut cfg = RunConfig::new(5);
        cfg.suites = vec![];
        let report = run_suites(&cfg).unwrap();
        assert!(report.passed);
        assert!(report.checks.is_empty());
    }

    #[test]
    fn reports_are_deterministic() {
        let mut cfg = RunConfig::new(5);
        cfg.suites = vec![SuiteKind::Generation, SuiteKind::FiniteIdentities];
        let a = run_suites(&cfg).unwrap().to_json();
        let b = run_suites(&cfg).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_control_fails_the_named_check() {
        let mut cfg = RunConfig::new(5);
        cfg.suites = vec![SuiteKind::Equivariance];
        cfg.negative_control = Some("intertwine-sign".into());
        let report = run_suites(&cfg).unwrap();
        assert!(!report.passed);
        assert!(report
            .checks
            .iter()
            .any(|c| !c.passed && c.name.starts_with("intertwiner-equivariance")));
    }

    #[test]
    fn suite_names_parse() {
        for kind in SuiteKind::all() {
            assert_eq!(SuiteKind::parse(kind.name()).unwrap(), kind);
        }
        assert!(SuiteKind::parse("bogus").is_err());
    }
}
