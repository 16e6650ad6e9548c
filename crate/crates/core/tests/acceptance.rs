//! Acceptance suite: every release-gating property, one test per criterion,
//! each printing a single pass/fail line. Tolerances are pinned here, not
//! configured elsewhere.

use laps_core::characters::{SmoothCharacter, TorusCharacter};
use laps_core::finite;
use laps_core::padic::PadicScalar;
use laps_core::pseries::{exactness_check, generation_check, AlgebraicRep, GroupElement};
use laps_core::smoothrep::SmoothPSModule;
use laps_core::suite::{run_suites, RunConfig, SuiteKind};

const PRECISION: u32 = 30;
const SLACK: i64 = 5;
const SEED: u64 = 20240613;

fn line(criterion: &str, passed: bool, detail: &str) -> bool {
    println!(
        "criterion {criterion}: {} ({detail})",
        if passed { "PASS" } else { "FAIL" }
    );
    passed
}

fn suite_all_pass(p: u64, kinds: Vec<SuiteKind>) -> (bool, String) {
    let mut cfg = RunConfig::new(p);
    cfg.precision = PRECISION;
    cfg.slack = SLACK;
    cfg.seed = SEED;
    cfg.suites = kinds;
    let report = run_suites(&cfg).expect("suite runs");
    let failed: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.clone())
        .collect();
    (
        report.passed,
        if failed.is_empty() {
            format!("{} checks", report.checks.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    )
}

#[test]
fn criterion_01_exact_sequence_on_finite_slices() {
    let grid = [(5u64, 2i64, 1u32, 9usize), (5, 0, 1, 5), (3, 1, 2, 7), (7, 3, 1, 10)];
    let mut all = true;
    let mut details = Vec::new();
    for (p, m, h, d) in grid {
        let chi = TorusCharacter::trivial_smooth(p, m, PRECISION).unwrap();
        let start = std::time::Instant::now();
        let report = exactness_check(&chi, h, d, PRECISION, SEED).unwrap();
        let elapsed = start.elapsed();
        let disks = (0..h).fold(1usize, |acc, _| acc * p as usize);
        let want_kernel = 2 * disks * (m as usize + 1);
        let want_image = 2 * disks * (d - m as usize);
        let ok = report.kernel_dim == want_kernel
            && report.tau_rank == want_kernel
            && report.tau_spans_kernel
            && report.image_dim == want_image
            && report.verdict == "exact"
            && elapsed.as_secs() < 60;
        all &= ok;
        details.push(format!(
            "p={p} m={m} h={h} D={d}: kernel {}={}, image {}={}, {:?}",
            report.kernel_dim, want_kernel, report.image_dim, want_image, elapsed
        ));
    }
    assert!(
        line("1 exactness of the two-chart sequence", all, &details.join("; ")),
        "{details:?}"
    );
}

#[test]
fn criterion_02_intertwiner_equivariance() {
    let (ok, detail) = suite_all_pass(5, vec![SuiteKind::Equivariance]);
    assert!(line("2 intertwiner equivariance", ok, &detail));
}

#[test]
fn criterion_03_group_law() {
    let (ok, detail) = suite_all_pass(5, vec![SuiteKind::GroupLaw]);
    assert!(line("3 group law for both actions", ok, &detail));
}

#[test]
fn criterion_04_first_order_action_oracle() {
    let (ok, detail) = suite_all_pass(5, vec![SuiteKind::LieOracle]);
    assert!(line("4 finite-difference and bracket oracle", ok, &detail));
}

#[test]
fn criterion_05_taylor_consistency() {
    let (ok, detail) = suite_all_pass(5, vec![SuiteKind::Taylor]);
    assert!(line("5 degree-4 exponential series consistency", ok, &detail));
}

#[test]
fn criterion_06_classifier() {
    let p = 5;
    let simple = laps_core::suite::classify_report(p, PRECISION, "m=-1;cond=0;unit=;at_p=1")
        .unwrap();
    let mut ok = simple.verdict == "simple";
    for (spec, m) in [("m=0;cond=0;unit=;at_p=1", 0usize), ("m=1;cond=0;unit=;at_p=p^-2", 1)] {
        let rep = laps_core::suite::classify_report(p, PRECISION, spec).unwrap();
        ok &= rep.verdict == "reducible" && rep.topological_length == "3";
        ok &= rep.constituents.len() == 3;
        // the two non-submodule constituents are algebraic tensor factors of
        // dimension m+1 against duals of the smooth pieces
        let dim = m + 1;
        ok &= rep
            .constituents
            .iter()
            .filter(|c| c.kind == "tensor")
            .all(|c| c.description.contains(&format!("dim-{dim}")));
        ok &= rep
            .constituents
            .iter()
            .any(|c| c.description.contains("Steinberg"));
    }
    assert!(line("6 reducibility classifier", ok, "simple + cases A and B"));
}

#[test]
fn criterion_07_smooth_sub_and_quotient_detection() {
    let (ok, detail) = suite_all_pass(5, vec![SuiteKind::SmoothCase]);
    // the fixed vector in the untwisted case must survive the non-integral
    // torus element, which the suite generators include; double-check the
    // dimension count at both levels here
    let mut extra = true;
    for n in [1u32, 2] {
        let module = SmoothPSModule::new(5, n, SmoothCharacter::trivial(5, 40).unwrap()).unwrap();
        let dim = module.dim();
        extra &= dim == 5usize.pow(n) + 5usize.pow(n - 1);
    }
    assert!(line(
        "7 smooth sub/quotient detection",
        ok && extra,
        &detail
    ));
}

#[test]
fn criterion_08_multiplicity_identities() {
    let (ok, detail) = suite_all_pass(5, vec![SuiteKind::FiniteIdentities]);
    // orthogonality is asserted inside table construction; spot-check the
    // degree identity once more for the order-120 group
    let g = finite::sl2_mod(5).unwrap();
    let t = finite::character_table(&g).unwrap();
    let extra = t.irreps.iter().map(|i| i.degree * i.degree).sum::<u64>() == 120
        && t.verify_orthogonality().is_ok();
    assert!(line("8 index-multiplicity identities", ok && extra, &detail));
}

#[test]
fn criterion_09_strong_admissibility_bound() {
    let g = finite::sl2_mod(5).unwrap();
    let t = finite::character_table(&g).unwrap();
    let b = finite::borel_sl2_5().unwrap();
    let perm = finite::permutation_character_on_cosets(&g, &b, t.exponent).unwrap();
    let pass_case = finite::strong_adm_check(&t, &perm, 1).unwrap();
    let reg = finite::regular_character(&g, t.exponent);
    let fail_case = finite::strong_adm_check(&t, &reg.scale(2), 1).unwrap();
    let ok = pass_case.pass && !fail_case.pass;
    assert!(line(
        "9 bounded-multiplicity check",
        ok,
        "coset module passes, doubled regular fails"
    ));
}

#[test]
fn criterion_10_orbit_generation() {
    let p = 5;
    let module = SmoothPSModule::new(p, 1, SmoothCharacter::trivial(p, 40).unwrap()).unwrap();
    let rep = AlgebraicRep::new(p, 2);
    let main = generation_check(&rep, &module, 60, SEED, PRECISION, None).unwrap();
    let mut ok = main.rank == 18 && main.expected_rank == 18;
    let mut rng = laps_core::sample::rng(SEED + 1);
    for _ in 0..10 {
        let dim = rep.dim() * module.dim();
        let mut start: Vec<PadicScalar> = (0..dim)
            .map(|_| laps_core::sample::integral_scalar(&mut rng, p, PRECISION).unwrap())
            .collect();
        if !start.iter().any(|c| c.is_certainly_nonzero()) {
            start[0] = PadicScalar::one(p, PRECISION).unwrap();
        }
        let r = generation_check(&rep, &module, 60, SEED, PRECISION, Some(start)).unwrap();
        ok &= r.full;
    }
    assert!(line(
        "10 orbit-span generation",
        ok,
        "rank 18 from 60 seeded translates, full on a 10-element start set"
    ));
}

#[test]
fn smooth_case_a_constants_survive_the_torus_element() {
    // companion to criterion 7: the invariant line is literally fixed by the
    // non-integral diagonal element, checked by direct action
    let p = 5;
    let wp = 40;
    for n in [1u32, 2] {
        let module = SmoothPSModule::new(p, n, SmoothCharacter::trivial(p, wp).unwrap()).unwrap();
        let v = laps_core::smoothrep::SmoothVector {
            level: n,
            coeffs: vec![PadicScalar::one(p, wp).unwrap(); module.dim()],
        };
        let eta = GroupElement::new([
            PadicScalar::p_power(p, -1, wp).unwrap(),
            PadicScalar::zero(p),
            PadicScalar::zero(p),
            PadicScalar::p_power(p, 1, wp).unwrap(),
        ])
        .unwrap();
        let gv = module.act(&eta, &v).unwrap();
        let refined = module.refine_vector(&v, gv.level).unwrap();
        for (a, b) in gv.coeffs.iter().zip(refined.coeffs.iter()) {
            assert!(a.eq_mod(b, PRECISION as i64 - SLACK));
        }
    }
}
