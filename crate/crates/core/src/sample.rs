//! Seeded pseudo-random inputs for the verification suites. Everything is
//! deterministic given the seed, so reports can be reproduced byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::characters::TorusCharacter;
use crate::error::Result;
use crate::laf::{Disk, DiskSeries, ErrorVal, LocFun};
use crate::padic::PadicScalar;
use crate::pseries::{self, GroupElement, PSElement};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform integral scalar with about 20 random digits.
pub fn integral_scalar(rng: &mut ChaCha8Rng, p: u64, prec: u32) -> Result<PadicScalar> {
    let digits = 20.min(prec);
    let mut v: i128 = 0;
    let mut scale: i128 = 1;
    for _ in 0..digits {
        v += scale * rng.gen_range(0..p) as i128;
        scale *= p as i128;
    }
    PadicScalar::from_integer(p, v, prec)
}

/// Integral scalar with a nonzero first digit.
pub fn unit_scalar(rng: &mut ChaCha8Rng, p: u64, prec: u32) -> Result<PadicScalar> {
    loop {
        let v = integral_scalar(rng, p, prec)?;
        if v.val_exact() == Some(0) {
            return Ok(v);
        }
    }
}

/// Random element of the integral special linear group: unit upper-left
/// entry, solved fourth entry, and an optional extra rotation so that both
/// cells are exercised.
pub fn integral_group_element(
    rng: &mut ChaCha8Rng,
    p: u64,
    prec: u32,
) -> Result<GroupElement> {
    let a = unit_scalar(rng, p, prec)?;
    let b = integral_scalar(rng, p, prec)?;
    let c = integral_scalar(rng, p, prec)?;
    let one = PadicScalar::one(p, prec)?;
    let d = one.add(&b.mul(&c)?)?.div(&a)?;
    let g = GroupElement::new([a, b, c, d])?;
    if rng.gen_bool(0.5) {
        g.mul(&GroupElement::weyl(p, prec)?)
    } else {
        Ok(g)
    }
}

/// Sample points of `Zp` for pointwise comparisons.
pub fn sample_points(
    rng: &mut ChaCha8Rng,
    p: u64,
    count: usize,
    prec: u32,
) -> Result<Vec<PadicScalar>> {
    (0..count).map(|_| integral_scalar(rng, p, prec)).collect()
}

/// Random function on the uniform level-`level` cover with integral
/// coefficients up to degree `deg`.
pub fn random_locfun(
    rng: &mut ChaCha8Rng,
    p: u64,
    level: u32,
    deg: usize,
    cap: usize,
    prec: u32,
) -> Result<LocFun> {
    let disks = Disk::unit(p).split_to(p, level);
    let mut pieces = Vec::with_capacity(disks.len());
    for d in disks {
        let coeffs: Vec<PadicScalar> = (0..=deg)
            .map(|_| integral_scalar(rng, p, prec))
            .collect::<Result<_>>()?;
        pieces.push(DiskSeries::new(p, d, coeffs, cap, ErrorVal::Exact));
    }
    LocFun::new(p, pieces)
}

/// Random element of the two-chart model, canonicalized so that the two
/// charts agree on the overlap region.
pub fn random_ps_element(
    rng: &mut ChaCha8Rng,
    chi: &TorusCharacter,
    level: u32,
    deg: usize,
    cap: usize,
    prec: u32,
) -> Result<PSElement> {
    let p = chi.prime();
    let minus = random_locfun(rng, p, level, deg, cap, prec)?;
    let w = random_locfun(rng, p, level.max(1), deg, cap, prec)?;
    let raw = PSElement::new(minus, w, chi.clone())?;
    pseries::canonicalize(&raw)
}
