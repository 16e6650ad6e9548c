//! Locally analytic functions on compact opens of `Zp`.
//!
//! A function is a finite disjoint union of disks `a + p^h Zp`, each carrying
//! a truncated power series in the local coordinate `t` with `x = a + p^h t`,
//! `t` ranging over `Zp`. Every piece tracks an error valuation `E`: the
//! represented function is known modulo `p^E` uniformly on the disk. All
//! operations either stay exact or fold their truncation loss into `E`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{self, PadicScalar};

/// Levels are kept small enough that `p^level` fits comfortably in `i128`.
pub const MAX_LEVEL: u32 = 24;

/// Refinement depth bound for the adaptive fractional-linear pullback.
const MAX_PULLBACK_DEPTH: u32 = 40;

/// Valuations at or above this threshold are treated as infinite.
pub(crate) const VAL_INF: i64 = i64::MAX / 4;

/// Valuation addition with a proper infinity.
pub(crate) fn val_add(a: i64, b: i64) -> i64 {
    if a >= VAL_INF || b >= VAL_INF {
        VAL_INF
    } else {
        a + b
    }
}

/// The coset `center + p^level Zp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Disk {
    level: u32,
    center: u128,
}

impl Disk {
    pub fn new(p: u64, center: u128, level: u32) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::Invalid(format!("disk level {level} > {MAX_LEVEL}")));
        }
        Ok(Disk {
            level,
            center: center % padic::ppow(p, level),
        })
    }

    /// The whole of `Zp`.
    pub fn unit(_p: u64) -> Self {
        Disk {
            level: 0,
            center: 0,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn center(&self) -> u128 {
        self.center
    }

    pub fn center_scalar(&self, p: u64, prec: u32) -> Result<PadicScalar> {
        PadicScalar::from_integer(p, self.center as i128, prec)
    }

    /// Exact membership test; errors when `x` has too little precision to
    /// resolve its class mod `p^level`.
    pub fn contains(&self, p: u64, x: &PadicScalar) -> Result<bool> {
        if self.level == 0 {
            // membership in Zp itself
            return match x.valuation() {
                crate::padic::Valuation::Finite(v) => Ok(v >= 0),
                crate::padic::Valuation::Infinite => Ok(true),
                crate::padic::Valuation::AtLeast(a) if a >= 0 => Ok(true),
                _ => Err(Error::InsufficientPrecision(
                    "cannot resolve integrality".into(),
                )),
            };
        }
        let c = self.center_scalar(p, self.level.max(1))?;
        let d = x.sub(&c)?;
        if d.val_at_least(self.level as i64) {
            return Ok(true);
        }
        if d.is_certainly_nonzero() {
            return Ok(false);
        }
        Err(Error::InsufficientPrecision(format!(
            "membership in level-{} disk undecidable at O(p^{})",
            self.level,
            d.val_floor()
        )))
    }

    /// The `p` children at the next level.
    pub fn subdisks(&self, p: u64) -> Vec<Disk> {
        let step = padic::ppow(p, self.level);
        (0..p as u128)
            .map(|b| Disk {
                level: self.level + 1,
                center: self.center + b * step,
            })
            .collect()
    }

    /// All descendants at the given level.
    pub fn split_to(&self, p: u64, level: u32) -> Vec<Disk> {
        assert!(level >= self.level);
        let mut out = vec![*self];
        for _ in self.level..level {
            out = out.iter().flat_map(|d| d.subdisks(p)).collect();
        }
        out
    }

    pub fn contains_disk(&self, p: u64, other: &Disk) -> bool {
        other.level >= self.level
            && other.center % padic::ppow(p, self.level) == self.center
    }

    pub fn is_disjoint(&self, p: u64, other: &Disk) -> bool {
        !(self.contains_disk(p, other) || other.contains_disk(p, self))
    }

    /// Base-p digit string of the center, little-endian, one char per level.
    pub fn center_digits(&self, p: u64) -> String {
        let mut c = self.center;
        let mut out = String::new();
        for _ in 0..self.level {
            out.push(std::char::from_digit((c % p as u128) as u32, 36).unwrap());
            c /= p as u128;
        }
        out
    }

    pub fn parse_center_digits(p: u64, s: &str, level: u32) -> Result<Disk> {
        if s.len() != level as usize {
            return Err(Error::parse(
                0,
                format!("center digit string length {} != level {level}", s.len()),
            ));
        }
        let mut c: u128 = 0;
        for ch in s.chars().rev() {
            let d = ch
                .to_digit(36)
                .ok_or_else(|| Error::parse(0, format!("bad digit {ch:?}")))?;
            if d as u64 >= p {
                return Err(Error::parse(0, format!("digit {d} >= p")));
            }
            c = c * p as u128 + d as u128;
        }
        Disk::new(p, c, level)
    }
}

/// Uniform error valuation of a piece: the function is known modulo `p^E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorVal {
    /// Exact polynomial data.
    Exact,
    Modulo(i64),
}

impl ErrorVal {
    pub fn floor(&self) -> i64 {
        match self {
            ErrorVal::Exact => i64::MAX,
            ErrorVal::Modulo(e) => *e,
        }
    }

    pub fn min(self, other: ErrorVal) -> ErrorVal {
        ErrorVal::from_floor(self.floor().min(other.floor()))
    }

    pub fn shifted(self, d: i64) -> ErrorVal {
        match self {
            ErrorVal::Exact => ErrorVal::Exact,
            ErrorVal::Modulo(e) => ErrorVal::from_floor(val_add(e, d)),
        }
    }

    pub fn from_floor(f: i64) -> ErrorVal {
        if f >= VAL_INF {
            ErrorVal::Exact
        } else {
            ErrorVal::Modulo(f)
        }
    }
}

/// One truncated power series on one disk.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskSeries {
    pub disk: Disk,
    /// Always `cap + 1` entries; trailing entries may be exact zeros.
    pub coeffs: Vec<PadicScalar>,
    pub cap: usize,
    pub err: ErrorVal,
}

fn pad(p: u64, mut coeffs: Vec<PadicScalar>, cap: usize) -> Vec<PadicScalar> {
    coeffs.truncate(cap + 1);
    while coeffs.len() < cap + 1 {
        coeffs.push(PadicScalar::zero(p));
    }
    coeffs
}

/// Smallest certified valuation over a coefficient slice.
fn gauss_floor(coeffs: &[PadicScalar]) -> i64 {
    coeffs
        .iter()
        .map(|c| c.val_floor().min(VAL_INF))
        .min()
        .unwrap_or(VAL_INF)
}

fn add_sat(a: i64, b: i64) -> i64 {
    val_add(a.min(VAL_INF), b.min(VAL_INF))
}

impl DiskSeries {
    pub fn new(p: u64, disk: Disk, coeffs: Vec<PadicScalar>, cap: usize, err: ErrorVal) -> Self {
        DiskSeries {
            disk,
            coeffs: pad(p, coeffs, cap),
            cap,
            err,
        }
    }

    pub fn constant(p: u64, disk: Disk, value: PadicScalar, cap: usize) -> Self {
        Self::new(p, disk, vec![value], cap, ErrorVal::Exact)
    }

    fn prime(&self) -> u64 {
        self.coeffs
            .first()
            .map(|c| c.prime())
            .expect("padded coeffs are nonempty")
    }

    /// Evaluate at the local coordinate `t`.
    pub fn eval_t(&self, t: &PadicScalar) -> Result<PadicScalar> {
        let p = self.prime();
        let mut acc = PadicScalar::zero(p);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(t)?.add(c)?;
        }
        Ok(match self.err {
            ErrorVal::Exact => acc,
            ErrorVal::Modulo(e) => acc.reduce_abs(e),
        })
    }

    /// Evaluate at a point `x` of the ambient disk.
    pub fn eval_x(&self, p: u64, x: &PadicScalar) -> Result<PadicScalar> {
        let c = self.disk.center_scalar(p, padic::max_precision(p))?;
        let t = x
            .sub(&c)?
            .div(&PadicScalar::p_power(p, self.disk.level as i64, padic::max_precision(p))?)?;
        self.eval_t(&t)
    }

    /// d/dx, with the `p^{-level}` chain factor; the degree cap drops by one.
    pub fn derive(&self, p: u64) -> Result<DiskSeries> {
        let h = self.disk.level as i64;
        let scale = PadicScalar::p_power(p, -h, padic::max_precision(p))?;
        let mut out = Vec::new();
        for j in 1..self.coeffs.len() {
            let n = PadicScalar::from_integer(p, j as i128, padic::max_precision(p))?;
            out.push(self.coeffs[j].mul(&n)?.mul(&scale)?);
        }
        let cap = self.cap.saturating_sub(1);
        Ok(DiskSeries::new(p, self.disk, out, cap, self.err.shifted(-h)))
    }

    pub fn scale(&self, p: u64, s: &PadicScalar) -> Result<DiskSeries> {
        if s.is_exact_zero() {
            return Ok(DiskSeries::constant(p, self.disk, PadicScalar::zero(p), self.cap));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.mul(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiskSeries::new(
            p,
            self.disk,
            coeffs,
            self.cap,
            self.err.shifted(s.val_floor().min(1 << 40)),
        ))
    }

    pub fn add(&self, p: u64, other: &DiskSeries) -> Result<DiskSeries> {
        assert_eq!(self.disk, other.disk);
        let cap = self.cap.min(other.cap);
        let mut coeffs = Vec::with_capacity(cap + 1);
        for j in 0..=cap {
            let a = self.coeffs.get(j).cloned().unwrap_or(PadicScalar::zero(p));
            let b = other.coeffs.get(j).cloned().unwrap_or(PadicScalar::zero(p));
            coeffs.push(a.add(&b)?);
        }
        // coefficients beyond the common cap belong to the error budget
        let mut tail = i64::MAX;
        for j in cap + 1..self.coeffs.len() {
            tail = tail.min(self.coeffs[j].val_floor());
        }
        for j in cap + 1..other.coeffs.len() {
            tail = tail.min(other.coeffs[j].val_floor());
        }
        let err = self
            .err
            .min(other.err)
            .min(ErrorVal::from_floor(tail));
        Ok(DiskSeries::new(p, self.disk, coeffs, cap, err))
    }

    /// Cauchy product truncated at the common cap, overflow folded into `E`.
    pub fn mul_trunc(&self, p: u64, other: &DiskSeries) -> Result<DiskSeries> {
        assert_eq!(self.disk, other.disk);
        let cap = self.cap.min(other.cap);
        let mut coeffs = vec![PadicScalar::zero(p); cap + 1];
        let mut tail = i64::MAX;
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_exact_zero() {
                    continue;
                }
                if i + j <= cap {
                    coeffs[i + j] = coeffs[i + j].add(&a.mul(b)?)?;
                } else {
                    tail = tail.min(add_sat(a.val_floor(), b.val_floor()));
                }
            }
        }
        let vf = gauss_floor(&self.coeffs);
        let vg = gauss_floor(&other.coeffs);
        let ef = self.err.floor();
        let eg = other.err.floor();
        let err_floor = tail
            .min(add_sat(ef, vg))
            .min(add_sat(eg, vf))
            .min(add_sat(ef, eg));
        Ok(DiskSeries::new(
            p,
            self.disk,
            coeffs,
            cap,
            ErrorVal::from_floor(err_floor),
        ))
    }

    /// Series for the same function on a subdisk: substitute
    /// `t = b + p^(l'-l) s` where `b` lifts the center difference.
    pub fn restrict_to(&self, p: u64, sub: Disk) -> Result<DiskSeries> {
        assert!(self.disk.contains_disk(p, &sub), "not a subdisk");
        let delta = sub.level - self.disk.level;
        if delta == 0 {
            return Ok(self.clone());
        }
        let wp = padic::max_precision(p);
        let step = padic::ppow(p, self.disk.level);
        let b = PadicScalar::from_integer(p, ((sub.center - self.disk.center) / step) as i128, wp)?;
        let mut coeffs = taylor_shift(p, &self.coeffs, &b)?;
        let mut factor = PadicScalar::one(p, wp)?;
        let scale = PadicScalar::p_power(p, delta as i64, wp)?;
        for c in coeffs.iter_mut().skip(1) {
            factor = factor.mul(&scale)?;
            *c = c.mul(&factor)?;
        }
        Ok(DiskSeries::new(p, sub, coeffs, self.cap, self.err))
    }
}

/// Coefficients of `f(b + t)` from those of `f(t)` by repeated Horner steps.
fn taylor_shift(p: u64, coeffs: &[PadicScalar], b: &PadicScalar) -> Result<Vec<PadicScalar>> {
    let mut c = coeffs.to_vec();
    let n = c.len();
    if n < 2 || b.is_exact_zero() {
        return Ok(c);
    }
    for i in 0..n - 1 {
        for j in (i..n - 1).rev() {
            c[j] = c[j].add(&b.mul(&c[j + 1])?)?;
        }
    }
    let _ = p;
    Ok(c)
}

/// A locally analytic function: a disjoint disk cover with one series each.
#[derive(Debug, Clone, PartialEq)]
pub struct LocFun {
    prime: u64,
    pieces: Vec<DiskSeries>,
}

impl LocFun {
    pub fn new(prime: u64, mut pieces: Vec<DiskSeries>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Invalid("empty cover".into()));
        }
        pieces.sort_by_key(|s| s.disk);
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                if !pieces[i].disk.is_disjoint(prime, &pieces[j].disk) {
                    return Err(Error::Invalid(format!(
                        "cover disks overlap: {:?} and {:?}",
                        pieces[i].disk, pieces[j].disk
                    )));
                }
            }
        }
        Ok(LocFun { prime, pieces })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn pieces(&self) -> &[DiskSeries] {
        &self.pieces
    }

    pub fn domain(&self) -> Vec<Disk> {
        self.pieces.iter().map(|s| s.disk).collect()
    }

    pub fn cap(&self) -> usize {
        self.pieces.iter().map(|s| s.cap).min().unwrap_or(0)
    }

    /// Largest level appearing in the cover.
    pub fn max_level(&self) -> u32 {
        self.pieces.iter().map(|s| s.disk.level()).max().unwrap_or(0)
    }

    /// Smallest certified error floor across the pieces.
    pub fn err_floor(&self) -> i64 {
        self.pieces.iter().map(|s| s.err.floor()).min().unwrap_or(i64::MAX)
    }

    /// Constant function on `Zp`.
    pub fn constant(p: u64, value: PadicScalar, cap: usize) -> Result<Self> {
        Self::new(
            p,
            vec![DiskSeries::constant(p, Disk::unit(p), value, cap)],
        )
    }

    /// Global polynomial `sum coeffs[k] x^k` on `Zp` (one level-0 disk).
    pub fn polynomial(p: u64, coeffs: &[PadicScalar], cap: usize) -> Result<Self> {
        if coeffs.len() > cap + 1 {
            return Err(Error::DegreeBound {
                found: coeffs.len() - 1,
                bound: cap,
            });
        }
        Self::new(
            p,
            vec![DiskSeries::new(
                p,
                Disk::unit(p),
                coeffs.to_vec(),
                cap,
                ErrorVal::Exact,
            )],
        )
    }

    /// Zero function on the given cover.
    pub fn zero_on(p: u64, disks: &[Disk], cap: usize) -> Result<Self> {
        Self::new(
            p,
            disks
                .iter()
                .map(|d| DiskSeries::constant(p, *d, PadicScalar::zero(p), cap))
                .collect(),
        )
    }

    /// Does the cover partition all of `Zp`?
    pub fn covers_unit(&self) -> bool {
        let h = self.max_level();
        let total: u128 = self
            .pieces
            .iter()
            .map(|s| padic::ppow(self.prime, h - s.disk.level()))
            .sum();
        total == padic::ppow(self.prime, h)
    }

    fn piece_containing(&self, x: &PadicScalar) -> Result<&DiskSeries> {
        for s in &self.pieces {
            if s.disk.contains(self.prime, x)? {
                return Ok(s);
            }
        }
        Err(Error::OutsideDomain(x.to_compact()))
    }

    pub fn eval(&self, x: &PadicScalar) -> Result<PadicScalar> {
        self.piece_containing(x)?.eval_x(self.prime, x)
    }

    /// Refine every disk to the given uniform level.
    pub fn refine(&self, level: u32) -> Result<LocFun> {
        if level < self.max_level() {
            return Err(Error::Invalid(format!(
                "refine target {level} below current level {}",
                self.max_level()
            )));
        }
        let mut pieces = Vec::new();
        for s in &self.pieces {
            for d in s.disk.split_to(self.prime, level) {
                pieces.push(s.restrict_to(self.prime, d)?);
            }
        }
        LocFun::new(self.prime, pieces)
    }

    /// Align two functions on the common refinement of their covers.
    /// Errors when the underlying domains differ.
    pub fn common_refinement(&self, other: &LocFun) -> Result<(LocFun, LocFun)> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        let p = self.prime;
        let mut mine = Vec::new();
        let mut theirs = Vec::new();
        for a in &self.pieces {
            for b in &other.pieces {
                if b.disk.contains_disk(p, &a.disk) {
                    mine.push(a.clone());
                    theirs.push(b.restrict_to(p, a.disk)?);
                } else if a.disk.contains_disk(p, &b.disk) && a.disk != b.disk {
                    mine.push(a.restrict_to(p, b.disk)?);
                    theirs.push(b.clone());
                }
            }
        }
        // every original piece must be fully covered; measure check catches mismatches
        let f = LocFun::new(p, mine)?;
        let g = LocFun::new(p, theirs)?;
        if f.domain() != g.domain() {
            return Err(Error::DomainMismatch);
        }
        let measure = |fun: &LocFun| -> u128 {
            let h = fun.max_level().max(self.max_level()).max(other.max_level());
            fun.pieces
                .iter()
                .map(|s| padic::ppow(p, h - s.disk.level()))
                .sum()
        };
        if measure(&f) != measure(self) || measure(&g) != measure(other) {
            return Err(Error::DomainMismatch);
        }
        Ok((f, g))
    }

    /// `sum scalars[i] * funs[i]` over a common refinement.
    pub fn linear_combine(scalars: &[PadicScalar], funs: &[&LocFun]) -> Result<LocFun> {
        if scalars.len() != funs.len() || funs.is_empty() {
            return Err(Error::Invalid("combination arity mismatch".into()));
        }
        let p = funs[0].prime;
        let mut acc: Option<LocFun> = None;
        for (s, f) in scalars.iter().zip(funs.iter()) {
            let scaled = LocFun::new(
                p,
                f.pieces
                    .iter()
                    .map(|piece| piece.scale(p, s))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            acc = Some(match acc {
                None => scaled,
                Some(cur) => {
                    let (a, b) = cur.common_refinement(&scaled)?;
                    LocFun::new(
                        p,
                        a.pieces
                            .iter()
                            .zip(b.pieces.iter())
                            .map(|(x, y)| x.add(p, y))
                            .collect::<Result<Vec<_>>>()?,
                    )?
                }
            });
        }
        Ok(acc.unwrap())
    }

    pub fn add(&self, other: &LocFun) -> Result<LocFun> {
        let one = PadicScalar::one(self.prime, padic::max_precision(self.prime))?;
        LocFun::linear_combine(&[one.clone(), one], &[self, other])
    }

    pub fn sub(&self, other: &LocFun) -> Result<LocFun> {
        let one = PadicScalar::one(self.prime, padic::max_precision(self.prime))?;
        LocFun::linear_combine(&[one.clone(), one.neg()], &[self, other])
    }

    pub fn scale(&self, s: &PadicScalar) -> Result<LocFun> {
        LocFun::new(
            self.prime,
            self.pieces
                .iter()
                .map(|piece| piece.scale(self.prime, s))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Pointwise product over a common refinement, truncated at the common cap.
    pub fn multiply(&self, other: &LocFun) -> Result<LocFun> {
        let (a, b) = self.common_refinement(other)?;
        LocFun::new(
            self.prime,
            a.pieces
                .iter()
                .zip(b.pieces.iter())
                .map(|(x, y)| x.mul_trunc(self.prime, y))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Multiply by a global polynomial in the ambient coordinate.
    pub fn multiply_by_polynomial(&self, coeffs: &[PadicScalar]) -> Result<LocFun> {
        let p = self.prime;
        let mut pieces = Vec::new();
        for piece in &self.pieces {
            let local = global_poly_on_disk(p, coeffs, piece.disk, piece.cap)?;
            pieces.push(piece.mul_trunc(p, &local)?);
        }
        LocFun::new(p, pieces)
    }

    /// d/dx piecewise.
    pub fn derive(&self) -> Result<LocFun> {
        LocFun::new(
            self.prime,
            self.pieces
                .iter()
                .map(|s| s.derive(self.prime))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Certified knowledge floor of the represented function: the minimum of
    /// the error valuations and the coefficient precisions.
    pub fn intrinsic_floor(&self) -> i64 {
        let mut floor = i64::MAX;
        for s in &self.pieces {
            floor = floor.min(s.err.floor());
            for c in &s.coeffs {
                if let Some(a) = c.abs_precision() {
                    floor = floor.min(a);
                }
            }
        }
        floor
    }

    /// Pullback along `x -> (a x + b) / (c x + d)`, defined on all of `Zp`.
    ///
    /// Target disks are refined until the map is analytic on each one, its
    /// image fits inside a single cover disk of `self`, and the truncation
    /// error is pushed below the intrinsic precision of `self`.
    pub fn mobius_pullback(&self, map: &[PadicScalar; 4]) -> Result<LocFun> {
        self.mobius_pullback_with_floor(map, self.intrinsic_floor())
    }

    /// Pullback refining until each piece certifies `E >= floor` (or as far
    /// as the input data allows).
    pub fn mobius_pullback_with_floor(
        &self,
        map: &[PadicScalar; 4],
        floor: i64,
    ) -> Result<LocFun> {
        let pieces = self.pullback_onto(map, Disk::unit(self.prime), 0, floor)?;
        LocFun::new(self.prime, pieces)
    }

    /// Adaptive pullback onto one target disk (recursing into subdisks).
    pub(crate) fn pullback_onto(
        &self,
        map: &[PadicScalar; 4],
        target: Disk,
        depth: u32,
        floor: i64,
    ) -> Result<Vec<DiskSeries>> {
        if depth > MAX_PULLBACK_DEPTH {
            return Err(Error::PoleInDisk { depth });
        }
        let p = self.prime;
        match mobius_series_on_disk(p, map, target, self.cap())? {
            None => {}
            Some(mu) => {
                if let Some(piece) = self.compose_into(&mu, target, floor)? {
                    return Ok(vec![piece]);
                }
            }
        }
        let mut out = Vec::new();
        for child in target.subdisks(p) {
            out.extend(self.pullback_onto(map, child, depth + 1, floor)?);
        }
        Ok(out)
    }

    /// Compose `self` with an analytic map given as a series on `target`.
    /// Returns `None` when the image is not contained in a single cover disk
    /// or the truncation error has not yet been pushed below `floor`.
    pub(crate) fn compose_into(
        &self,
        mu: &DiskSeries,
        target: Disk,
        floor: i64,
    ) -> Result<Option<DiskSeries>> {
        let p = self.prime;
        let m0 = &mu.coeffs[0];
        if let Some(v) = m0.val_exact() {
            if v < 0 {
                return Err(Error::OutsideDomain(format!(
                    "image center {} not in Zp",
                    m0.to_compact()
                )));
            }
        } else if !m0.is_exact_zero() && m0.val_floor() < 0 {
            return Err(Error::InsufficientPrecision(
                "cannot locate the image of a disk".into(),
            ));
        }
        let rho = mu
            .coeffs
            .iter()
            .skip(1)
            .map(|c| c.val_floor())
            .min()
            .unwrap_or(i64::MAX)
            .min(mu.err.floor());
        if rho < 0 {
            // image wider than Zp at this granularity: refine
            return Ok(None);
        }
        // find the cover disk containing the whole image ball
        let mut home: Option<&DiskSeries> = None;
        for s in &self.pieces {
            if s.disk.contains(p, m0)? {
                if (s.disk.level() as i64) <= rho {
                    home = Some(s);
                }
                break;
            }
        }
        let Some(src) = home else {
            // either outside the domain or the image straddles disks: let the
            // caller refine; a genuine domain miss recurs at every depth and
            // is reported by the depth bound
            return Ok(None);
        };
        // best floor the source data can support on this piece
        let mut src_floor = src.err.floor();
        for c in &src.coeffs {
            if let Some(a) = c.abs_precision() {
                src_floor = src_floor.min(a);
            }
        }
        let wp = padic::max_precision(p);
        let h = src.disk.level();
        let shift = PadicScalar::p_power(p, -(h as i64), wp)?;
        let center = src.disk.center_scalar(p, wp)?;
        let cap = src.cap.min(mu.cap);
        let mut w = Vec::with_capacity(mu.coeffs.len());
        w.push(m0.sub(&center)?.mul(&shift)?);
        for c in mu.coeffs.iter().skip(1) {
            w.push(c.mul(&shift)?);
        }
        let w = DiskSeries::new(p, target, w, cap, mu.err.shifted(-(h as i64)));
        // Horner composition of the source series with w
        let mut acc = DiskSeries::constant(
            p,
            target,
            src.coeffs.last().cloned().unwrap_or(PadicScalar::zero(p)),
            cap,
        );
        for c in src.coeffs.iter().rev().skip(1) {
            acc = acc.mul_trunc(p, &w)?;
            acc = acc.add(p, &DiskSeries::constant(p, target, c.clone(), cap))?;
        }
        let err = acc.err.min(src.err);
        if err.floor() < floor.min(src_floor) {
            // truncation still dominates: refine the target disk further
            return Ok(None);
        }
        Ok(Some(DiskSeries::new(p, target, acc.coeffs, cap, err)))
    }

    /// Coefficient coordinates on the uniform level-`h` cover of `Zp`,
    /// degrees `0..=deg`: the slice basis used by the finite-rank checks.
    pub fn slice_coordinates(&self, h: u32, deg: usize) -> Result<Vec<PadicScalar>> {
        if !self.covers_unit() {
            return Err(Error::DomainMismatch);
        }
        let refined = self.refine(h)?;
        let p = self.prime;
        let mut out = Vec::with_capacity(refined.pieces.len() * (deg + 1));
        for s in &refined.pieces {
            for j in 0..=deg {
                out.push(s.coeffs.get(j).cloned().unwrap_or(PadicScalar::zero(p)));
            }
            for j in deg + 1..s.coeffs.len() {
                if s.coeffs[j].is_certainly_nonzero() {
                    return Err(Error::DegreeBound {
                        found: j,
                        bound: deg,
                    });
                }
            }
        }
        Ok(out)
    }

    // ----- serialization -----

    pub fn to_json(&self) -> String {
        let dto = LocFunDto {
            domain: self
                .pieces
                .iter()
                .map(|s| DiskDto {
                    center: s.disk.center_digits(self.prime),
                    level: s.disk.level(),
                })
                .collect(),
            pieces: self
                .pieces
                .iter()
                .map(|s| PieceDto {
                    center: s.disk.center_digits(self.prime),
                    level: s.disk.level(),
                    coeffs: s.coeffs.iter().map(|c| c.to_compact()).collect(),
                    error_val: match s.err {
                        ErrorVal::Exact => None,
                        ErrorVal::Modulo(e) => Some(e),
                    },
                })
                .collect(),
        };
        serde_json::to_string_pretty(&dto).expect("serializable")
    }

    pub fn from_json(p: u64, text: &str) -> Result<LocFun> {
        let dto: LocFunDto = serde_json::from_str(text)?;
        let mut pieces = Vec::new();
        for piece in &dto.pieces {
            let disk = Disk::parse_center_digits(p, &piece.center, piece.level)?;
            let coeffs = piece
                .coeffs
                .iter()
                .map(|c| PadicScalar::parse_compact(p, c))
                .collect::<Result<Vec<_>>>()?;
            if coeffs.is_empty() {
                return Err(Error::Invalid("piece without coefficients".into()));
            }
            let cap = coeffs.len() - 1;
            let err = match piece.error_val {
                None => ErrorVal::Exact,
                Some(e) => ErrorVal::Modulo(e),
            };
            pieces.push(DiskSeries::new(p, disk, coeffs, cap, err));
        }
        let fun = LocFun::new(p, pieces)?;
        // the domain block must agree with the pieces
        let declared: Result<Vec<Disk>> = dto
            .domain
            .iter()
            .map(|d| Disk::parse_center_digits(p, &d.center, d.level))
            .collect();
        let mut declared = declared?;
        declared.sort();
        if declared != fun.domain() {
            return Err(Error::Invalid("domain block disagrees with pieces".into()));
        }
        Ok(fun)
    }
}

/// Restrict a global polynomial in `x` to a disk as a local series in `t`.
pub(crate) fn global_poly_on_disk(
    p: u64,
    coeffs: &[PadicScalar],
    disk: Disk,
    cap: usize,
) -> Result<DiskSeries> {
    let wp = padic::max_precision(p);
    let center = disk.center_scalar(p, wp)?;
    let mut local = taylor_shift(p, coeffs, &center)?;
    let mut factor = PadicScalar::one(p, wp)?;
    let scale = PadicScalar::p_power(p, disk.level() as i64, wp)?;
    for c in local.iter_mut().skip(1) {
        factor = factor.mul(&scale)?;
        *c = c.mul(&factor)?;
    }
    Ok(DiskSeries::new(p, disk, local, cap, ErrorVal::Exact))
}

/// Series of `x -> (a x + b)/(c x + d)` on a disk, or `None` when the disk
/// must be refined first (denominator not dominated by its constant term).
pub(crate) fn mobius_series_on_disk(
    p: u64,
    map: &[PadicScalar; 4],
    disk: Disk,
    cap: usize,
) -> Result<Option<DiskSeries>> {
    let wp = padic::max_precision(p);
    let alpha = disk.center_scalar(p, wp)?;
    let step = PadicScalar::p_power(p, disk.level() as i64, wp)?;
    let [a, b, c, d] = map;
    let num0 = a.mul(&alpha)?.add(b)?;
    let num1 = a.mul(&step)?;
    let den0 = c.mul(&alpha)?.add(d)?;
    let den1 = c.mul(&step)?;
    if den0.is_exact_zero() {
        // pole exactly at the center: no refinement of this disk can help,
        // but sibling recursion will isolate it; report as needing refinement
        return Ok(None);
    }
    if den0.is_precision_zero() {
        return Err(Error::InsufficientPrecision(
            "cannot certify denominator valuation".into(),
        ));
    }
    let v0 = den0.val_exact().expect("certified unit");
    if den1.val_floor() <= v0 {
        // constant term does not dominate: refine (or pole nearby)
        return Ok(None);
    }
    // 1/(den0 + den1 t) = den0^{-1} sum (-den1/den0)^n t^n
    let q = den1.div(&den0)?.neg();
    let inv0 = den0.inv()?;
    let mut inv_coeffs = Vec::with_capacity(cap + 1);
    let mut acc = inv0.clone();
    inv_coeffs.push(acc.clone());
    for _ in 0..cap {
        acc = acc.mul(&q)?;
        inv_coeffs.push(acc.clone());
    }
    let tail = add_sat(acc.val_floor(), q.val_floor());
    let inv_series = DiskSeries::new(p, disk, inv_coeffs, cap, ErrorVal::from_floor(tail));
    let num_series = DiskSeries::new(p, disk, vec![num0, num1], cap, ErrorVal::Exact);
    Ok(Some(num_series.mul_trunc(p, &inv_series)?))
}

#[derive(Serialize, Deserialize)]
struct DiskDto {
    center: String,
    level: u32,
}

#[derive(Serialize, Deserialize)]
struct PieceDto {
    center: String,
    level: u32,
    coeffs: Vec<String>,
    error_val: Option<i64>,
}

#[derive(Serialize, Deserialize)]
struct LocFunDto {
    domain: Vec<DiskDto>,
    pieces: Vec<PieceDto>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u64 = 5;
    const WP: u32 = 30;

    fn s(n: i128) -> PadicScalar {
        PadicScalar::from_integer(P, n, WP).unwrap()
    }

    fn x_fun(cap: usize) -> LocFun {
        LocFun::polynomial(P, &[s(0), s(1)], cap).unwrap()
    }

    fn random_poly(rng: &mut ChaCha8Rng, deg: usize, cap: usize) -> LocFun {
        let coeffs: Vec<PadicScalar> = (0..=deg).map(|_| s(rng.gen_range(-50..50))).collect();
        LocFun::polynomial(P, &coeffs, cap).unwrap()
    }

    #[test]
    fn constant_evaluates_everywhere() {
        let f = LocFun::constant(P, s(1), 4).unwrap();
        for x in [0, 3, 17, -2] {
            assert!(f.eval(&s(x)).unwrap().eq_mod(&s(1), 25));
        }
    }

    #[test]
    fn square_evaluates() {
        let f = LocFun::polynomial(P, &[s(0), s(0), s(1)], 4).unwrap();
        assert!(f.eval(&s(2)).unwrap().eq_mod(&s(4), 25));
    }

    #[test]
    fn eval_outside_domain_errors() {
        let disks = Disk::unit(P).subdisks(P);
        let f = LocFun::zero_on(P, &disks[1..], 3).unwrap();
        match f.eval(&s(0)) {
            Err(Error::OutsideDomain(_)) => {}
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn refinement_preserves_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_poly(&mut rng, 6, 8);
        let g = f.refine(2).unwrap();
        assert_eq!(g.pieces().len(), 25);
        for _ in 0..20 {
            let x = s(rng.gen_range(-10_000..10_000));
            let a = f.eval(&x).unwrap();
            let b = g.eval(&x).unwrap();
            assert!(a.eq_mod(&b, 20), "refine changed eval at {x}");
        }
        // refining to the current level is the identity
        assert_eq!(f.refine(0).unwrap(), f);
        let c = LocFun::constant(P, s(3), 2).unwrap().refine(1).unwrap();
        for piece in c.pieces() {
            assert!(piece.coeffs[0].eq_mod(&s(3), 25));
            assert!(piece.coeffs[1].val_at_least(25));
        }
    }

    #[test]
    fn linear_combination_is_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = random_poly(&mut rng, 4, 6);
        let g = random_poly(&mut rng, 4, 6).refine(1).unwrap();
        let a = s(3);
        let b = s(-7);
        let h = LocFun::linear_combine(&[a.clone(), b.clone()], &[&f, &g]).unwrap();
        for _ in 0..10 {
            let x = s(rng.gen_range(-1000..1000));
            let want = a
                .mul(&f.eval(&x).unwrap())
                .unwrap()
                .add(&b.mul(&g.eval(&x).unwrap()).unwrap())
                .unwrap();
            assert!(h.eval(&x).unwrap().eq_mod(&want, 20));
        }
        // 1*f + 0*g = f after refinement
        let id = LocFun::linear_combine(&[s(1), PadicScalar::zero(P)], &[&f, &g]).unwrap();
        let x = s(12);
        assert!(id.eval(&x).unwrap().eq_mod(&f.eval(&x).unwrap(), 20));
        // f - f = 0 at the precision floor
        let z = f.sub(&f).unwrap();
        assert!(z.eval(&s(4)).unwrap().val_at_least(25));
    }

    #[test]
    fn multiply_matches_pointwise_and_keeps_exactness() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_poly(&mut rng, 3, 8);
        let g = random_poly(&mut rng, 4, 8);
        let h = f.multiply(&g).unwrap();
        assert_eq!(h.err_floor(), i64::MAX, "deg 3 + deg 4 <= cap 8 stays exact");
        for _ in 0..10 {
            let x = s(rng.gen_range(-1000..1000));
            let want = f.eval(&x).unwrap().mul(&g.eval(&x).unwrap()).unwrap();
            assert!(h.eval(&x).unwrap().eq_mod(&want, 20));
        }
        // f * 1 = f
        let one = LocFun::constant(P, s(1), 8).unwrap();
        let fx = f.multiply(&one).unwrap();
        let x = s(3);
        assert!(fx.eval(&x).unwrap().eq_mod(&f.eval(&x).unwrap(), 22));
        // x * x = x^2 exactly when the cap allows
        let xx = x_fun(2).multiply(&x_fun(2)).unwrap();
        assert!(xx.eval(&s(7)).unwrap().eq_mod(&s(49), 22));
    }

    #[test]
    fn truncation_is_folded_into_error() {
        // (x^2)*(x^2) with cap 3 cannot hold x^4; the error floor records it
        let sq = LocFun::polynomial(P, &[s(0), s(0), s(1)], 3).unwrap();
        let prod = sq.multiply(&sq).unwrap();
        assert_eq!(prod.err_floor(), 0, "unit coefficient lost at degree 4");
    }

    #[test]
    fn derivative_basics_and_leibniz() {
        let c = LocFun::constant(P, s(9), 4).unwrap();
        let dc = c.derive().unwrap();
        assert!(dc.eval(&s(2)).unwrap().val_at_least(25));
        let sq = LocFun::polynomial(P, &[s(0), s(0), s(1)], 4).unwrap();
        let dsq = sq.derive().unwrap();
        assert!(dsq.eval(&s(7)).unwrap().eq_mod(&s(14), 22));

        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let f = random_poly(&mut rng, 3, 9);
        let g = random_poly(&mut rng, 3, 9);
        let lhs = f.multiply(&g).unwrap().derive().unwrap();
        let rhs = f
            .derive()
            .unwrap()
            .multiply(&g)
            .unwrap()
            .add(&f.multiply(&g.derive().unwrap()).unwrap())
            .unwrap();
        for _ in 0..10 {
            let x = s(rng.gen_range(-1000..1000));
            assert!(lhs.eval(&x).unwrap().eq_mod(&rhs.eval(&x).unwrap(), 20));
        }
    }

    #[test]
    fn derivative_matches_difference_quotients() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_poly(&mut rng, 5, 8);
        let df = f.derive().unwrap();
        let x = s(repr(&mut rng));
        fn repr(rng: &mut ChaCha8Rng) -> i128 {
            rng.gen_range(-1000..1000)
        }
        for k in [3i64, 5, 7] {
            let hstep = PadicScalar::p_power(P, k, WP).unwrap();
            let quot = f
                .eval(&x.add(&hstep).unwrap())
                .unwrap()
                .sub(&f.eval(&x).unwrap())
                .unwrap()
                .div(&hstep)
                .unwrap();
            let diff = quot.sub(&df.eval(&x).unwrap()).unwrap();
            assert!(
                diff.val_at_least(k - 1),
                "difference quotient at step p^{k} off by {}",
                diff.to_compact()
            );
        }
    }

    #[test]
    fn mobius_identity_and_translation() {
        let f = x_fun(5);
        let id = [s(1), s(0), s(0), s(1)];
        let g = f.mobius_pullback(&id).unwrap();
        for x in [0i128, 2, 7, -3] {
            assert!(g.eval(&s(x)).unwrap().eq_mod(&s(x), 22));
        }
        let shift = [s(1), s(1), s(0), s(1)];
        let h = f.mobius_pullback(&shift).unwrap();
        for x in [0i128, 2, 7] {
            assert!(h.eval(&s(x)).unwrap().eq_mod(&s(x + 1), 22));
        }
    }

    #[test]
    fn mobius_pointwise_oracle() {
        // x -> x / (5x + 1) on Z5
        let f = x_fun(8);
        let map = [s(1), s(0), s(5), s(1)];
        let g = f.mobius_pullback(&map).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let x = s(rng.gen_range(-10_000..10_000));
            let denom = s(5).mul(&x).unwrap().add(&s(1)).unwrap();
            let want = x.div(&denom).unwrap();
            assert!(
                g.eval(&x).unwrap().eq_mod(&want, 20),
                "pullback disagrees at {x}"
            );
        }
    }

    #[test]
    fn mobius_contravariant_functoriality() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let f = random_poly(&mut rng, 4, 10);
        // two integral maps analytic on Zp
        let g1 = [s(1), s(2), s(5), s(11)];
        let g2 = [s(2), s(1), s(10), s(3)];
        let prod = [
            g1[0].mul(&g2[0]).unwrap().add(&g1[1].mul(&g2[2]).unwrap()).unwrap(),
            g1[0].mul(&g2[1]).unwrap().add(&g1[1].mul(&g2[3]).unwrap()).unwrap(),
            g1[2].mul(&g2[0]).unwrap().add(&g1[3].mul(&g2[2]).unwrap()).unwrap(),
            g1[2].mul(&g2[1]).unwrap().add(&g1[3].mul(&g2[3]).unwrap()).unwrap(),
        ];
        let lhs = f.mobius_pullback(&g1).unwrap().mobius_pullback(&g2).unwrap();
        let rhs = f.mobius_pullback(&prod).unwrap();
        for _ in 0..8 {
            let x = s(rng.gen_range(-1000..1000));
            assert!(
                lhs.eval(&x).unwrap().eq_mod(&rhs.eval(&x).unwrap(), 16),
                "functoriality fails at {x}"
            );
        }
    }

    #[test]
    fn pole_inside_every_refinement_is_reported() {
        let f = x_fun(4);
        // x -> 1/x has its pole at 0 inside Zp
        let map = [s(0), s(1), s(1), s(0)];
        match f.mobius_pullback(&map) {
            Err(Error::PoleInDisk { .. }) => {}
            other => panic!("expected pole detection, got {other:?}"),
        }
    }

    #[test]
    fn refinement_commutes_with_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let f = random_poly(&mut rng, 3, 8);
        let g = random_poly(&mut rng, 2, 8);
        let a = f.multiply(&g).unwrap().refine(1).unwrap();
        let b = f.refine(1).unwrap().multiply(&g.refine(1).unwrap()).unwrap();
        for _ in 0..8 {
            let x = s(rng.gen_range(-1000..1000));
            assert!(a.eval(&x).unwrap().eq_mod(&b.eval(&x).unwrap(), 20));
        }
    }

    #[test]
    fn derivative_kernel_dimension_on_slices() {
        // kernel of (d/dx)^{m+1} on the level-h degree-D slice has dimension (m+1) p^h
        for (m, h, d) in [(1usize, 1u32, 4usize), (2, 1, 5)] {
            let disks = Disk::unit(P).split_to(P, h);
            let dim = disks.len() * (d + 1);
            let mut cols = Vec::new();
            for disk in &disks {
                for j in 0..=d {
                    let mut coeffs = vec![PadicScalar::zero(P); j + 1];
                    coeffs[j] = s(1);
                    let mut pieces = vec![DiskSeries::new(P, *disk, coeffs, d, ErrorVal::Exact)];
                    for other in &disks {
                        if other != disk {
                            pieces.push(DiskSeries::constant(P, *other, PadicScalar::zero(P), d));
                        }
                    }
                    let mut f = LocFun::new(P, pieces).unwrap();
                    for _ in 0..=m {
                        f = f.derive().unwrap();
                    }
                    cols.push(f.slice_coordinates(h, d).unwrap());
                }
            }
            let mat = PMatrix::from_columns(P, dim, &cols);
            let red = mat.reduce(18).unwrap();
            assert_eq!(
                red.kernel.len(),
                (m + 1) * disks.len(),
                "kernel dimension for m={m}, h={h}"
            );
        }
    }

    #[test]
    fn json_roundtrip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let f = random_poly(&mut rng, 4, 6).refine(1).unwrap();
        let text = f.to_json();
        let back = LocFun::from_json(P, &text).unwrap();
        assert_eq!(back, f);
        // and a function with a finite error valuation
        let sq = LocFun::polynomial(P, &[s(0), s(0), s(1)], 3).unwrap();
        let lossy = sq.multiply(&sq).unwrap();
        let back = LocFun::from_json(P, &lossy.to_json()).unwrap();
        assert_eq!(back, lossy);
    }

    #[test]
    fn disk_membership_requires_precision() {
        let d = Disk::new(P, 3, 2).unwrap();
        assert!(d.contains(P, &s(3)).unwrap());
        assert!(d.contains(P, &s(28)).unwrap());
        assert!(!d.contains(P, &s(4)).unwrap());
        // one correct digit is not enough to resolve a level-2 coset
        let vague = s(3).reduce_abs(1);
        assert!(matches!(
            d.contains(P, &vague),
            Err(Error::InsufficientPrecision(_))
        ));
    }

    #[test]
    fn disks_nest_or_are_disjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..200 {
            let l1 = rng.gen_range(0..4u32);
            let l2 = rng.gen_range(0..4u32);
            let d1 = Disk::new(P, rng.gen_range(0..625) as u128, l1).unwrap();
            let d2 = Disk::new(P, rng.gen_range(0..625) as u128, l2).unwrap();
            let nested = d1.contains_disk(P, &d2) || d2.contains_disk(P, &d1);
            let disjoint = d1.is_disjoint(P, &d2);
            assert!(nested ^ disjoint);
        }
    }
}
