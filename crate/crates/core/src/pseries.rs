//! The two-chart model of the locally analytic principal series of
//! `SL2(Qp)`.
//!
//! An element is a pair of locally analytic functions on `Zp`: the value
//! along the upper-unipotent section `x -> u^-(x) = (1 x; 0 1)` and along the
//! translated section `y -> u(y) w = (1 0; y 1)(0 -1; 1 0)`. The two sections
//! hit the projective line as `[x : 1]` and `[1 : y]`; points with integral
//! affine coordinate are owned by the first chart and the rest by the second.
//! Left translation is transported through the defining twist
//! `f(g p) = chi(p^{-1}) f(g)`: inside a cell it evaluates the source chart
//! along a fractional-linear map times `sigma_chi` of an affine form, and
//! across cells it reads the other chart with the transition factor. The
//! normalizations are pinned by the group-law, defining-relation and
//! finite-difference oracles in the test suite rather than postulated.

use serde::Serialize;

use crate::characters::TorusCharacter;
use crate::error::{Error, Result};
use crate::laf::{self, Disk, DiskSeries, ErrorVal, LocFun};
use crate::linalg::PMatrix;
use crate::padic::{self, PadicScalar};
use crate::smoothrep::SmoothPSModule;

const MAX_ACT_DEPTH: u32 = 40;

/// An element of `SL2(Qp)` at working precision; the determinant must be 1
/// within the available precision.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    entries: [PadicScalar; 4], // row-major (a b; c d)
}

impl GroupElement {
    pub fn new(entries: [PadicScalar; 4]) -> Result<Self> {
        let p = entries[0].prime();
        for e in &entries {
            if e.prime() != p {
                return Err(Error::PrimeMismatch(e.prime(), p));
            }
        }
        let det = entries[0]
            .mul(&entries[3])?
            .sub(&entries[1].mul(&entries[2])?)?;
        let dev = det.sub(&PadicScalar::one(p, padic::max_precision(p))?)?;
        if dev.is_certainly_nonzero() {
            return Err(Error::Invalid(format!(
                "determinant {} differs from 1",
                det.to_compact()
            )));
        }
        Ok(GroupElement { entries })
    }

    pub fn from_integers(p: u64, m: [i128; 4], prec: u32) -> Result<Self> {
        let e = |n: i128| PadicScalar::from_integer(p, n, prec);
        Self::new([e(m[0])?, e(m[1])?, e(m[2])?, e(m[3])?])
    }

    pub fn identity(p: u64, prec: u32) -> Result<Self> {
        Self::from_integers(p, [1, 0, 0, 1], prec)
    }

    /// `w = (0 -1; 1 0)`.
    pub fn weyl(p: u64, prec: u32) -> Result<Self> {
        Self::from_integers(p, [0, -1, 1, 0], prec)
    }

    /// Upper unipotent `(1 x; 0 1)`.
    pub fn unipotent_upper(x: &PadicScalar) -> Result<Self> {
        let p = x.prime();
        let prec = padic::max_precision(p);
        Self::new([
            PadicScalar::one(p, prec)?,
            x.clone(),
            PadicScalar::zero(p),
            PadicScalar::one(p, prec)?,
        ])
    }

    /// Lower unipotent `(1 0; y 1)`.
    pub fn unipotent_lower(y: &PadicScalar) -> Result<Self> {
        let p = y.prime();
        let prec = padic::max_precision(p);
        Self::new([
            PadicScalar::one(p, prec)?,
            PadicScalar::zero(p),
            y.clone(),
            PadicScalar::one(p, prec)?,
        ])
    }

    /// Torus element `diag(s^-1, s)`.
    pub fn torus(s: &PadicScalar) -> Result<Self> {
        let p = s.prime();
        Self::new([
            s.inv()?,
            PadicScalar::zero(p),
            PadicScalar::zero(p),
            s.clone(),
        ])
    }

    pub fn prime(&self) -> u64 {
        self.entries[0].prime()
    }

    pub fn entries(&self) -> &[PadicScalar; 4] {
        &self.entries
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let [a, b, c, d] = &self.entries;
        let [e, f, g, h] = &other.entries;
        Self::new([
            a.mul(e)?.add(&b.mul(g)?)?,
            a.mul(f)?.add(&b.mul(h)?)?,
            c.mul(e)?.add(&d.mul(g)?)?,
            c.mul(f)?.add(&d.mul(h)?)?,
        ])
    }

    /// Exact inverse via the adjugate (determinant is 1).
    pub fn inverse(&self) -> Result<Self> {
        let [a, b, c, d] = &self.entries;
        Self::new([d.clone(), b.neg(), c.neg(), a.clone()])
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|e| e.val_at_least(0))
    }

    /// Largest `e >= 0` with some entry of valuation `-e`.
    pub fn denominator_exponent(&self) -> i64 {
        self.entries
            .iter()
            .map(|x| -x.val_floor().min(0))
            .max()
            .unwrap_or(0)
    }
}

/// An element of `sl2(Qp)` in the basis
/// `upper = (0 1; 0 0)`, `diag = (1 0; 0 -1)`, `lower = (0 0; 1 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieElement {
    pub upper: PadicScalar,
    pub diag: PadicScalar,
    pub lower: PadicScalar,
}

impl LieElement {
    pub fn new(upper: PadicScalar, diag: PadicScalar, lower: PadicScalar) -> Self {
        LieElement { upper, diag, lower }
    }

    pub fn zero(p: u64) -> Self {
        LieElement {
            upper: PadicScalar::zero(p),
            diag: PadicScalar::zero(p),
            lower: PadicScalar::zero(p),
        }
    }

    pub fn basis_upper(p: u64, prec: u32) -> Result<Self> {
        Ok(LieElement::new(
            PadicScalar::one(p, prec)?,
            PadicScalar::zero(p),
            PadicScalar::zero(p),
        ))
    }

    pub fn basis_diag(p: u64, prec: u32) -> Result<Self> {
        Ok(LieElement::new(
            PadicScalar::zero(p),
            PadicScalar::one(p, prec)?,
            PadicScalar::zero(p),
        ))
    }

    pub fn basis_lower(p: u64, prec: u32) -> Result<Self> {
        Ok(LieElement::new(
            PadicScalar::zero(p),
            PadicScalar::zero(p),
            PadicScalar::one(p, prec)?,
        ))
    }

    pub fn prime(&self) -> u64 {
        self.upper.prime()
    }

    /// Matrix entries `(a b; c d) = (diag, upper; lower, -diag)`.
    pub fn to_matrix(&self) -> [PadicScalar; 4] {
        [
            self.diag.clone(),
            self.upper.clone(),
            self.lower.clone(),
            self.diag.neg(),
        ]
    }

    pub fn from_matrix(m: &[PadicScalar; 4]) -> Result<Self> {
        let trace = m[0].add(&m[3])?;
        if trace.is_certainly_nonzero() {
            return Err(Error::Invalid("trace must vanish".into()));
        }
        Ok(LieElement::new(m[1].clone(), m[0].clone(), m[2].clone()))
    }

    pub fn scale(&self, s: &PadicScalar) -> Result<Self> {
        Ok(LieElement::new(
            self.upper.mul(s)?,
            self.diag.mul(s)?,
            self.lower.mul(s)?,
        ))
    }

    /// Lie bracket via the matrix commutator.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        let a = self.to_matrix();
        let b = other.to_matrix();
        let mul = |x: &[PadicScalar; 4], y: &[PadicScalar; 4]| -> Result<[PadicScalar; 4]> {
            Ok([
                x[0].mul(&y[0])?.add(&x[1].mul(&y[2])?)?,
                x[0].mul(&y[1])?.add(&x[1].mul(&y[3])?)?,
                x[2].mul(&y[0])?.add(&x[3].mul(&y[2])?)?,
                x[2].mul(&y[1])?.add(&x[3].mul(&y[3])?)?,
            ])
        };
        let ab = mul(&a, &b)?;
        let ba = mul(&b, &a)?;
        let comm = [
            ab[0].sub(&ba[0])?,
            ab[1].sub(&ba[1])?,
            ab[2].sub(&ba[2])?,
            ab[3].sub(&ba[3])?,
        ];
        LieElement::from_matrix(&comm)
    }

    /// Matrix exponential (entrywise valuation must be at least 1, or 2 for
    /// p = 2) by the factorial series.
    pub fn exp(&self) -> Result<GroupElement> {
        let p = self.prime();
        let required: i64 = if p == 2 { 2 } else { 1 };
        let m = self.to_matrix();
        let v = m.iter().map(|e| e.val_floor()).min().unwrap_or(i64::MAX);
        if v < required {
            return Err(Error::ExpDomain {
                required,
                got: format!("matrix valuation {v}"),
            });
        }
        let wp = padic::max_precision(p);
        let target = v + wp as i64 / 2;
        let one = PadicScalar::one(p, wp)?;
        let mut acc = [
            one.clone(),
            PadicScalar::zero(p),
            PadicScalar::zero(p),
            one.clone(),
        ];
        let mut term = [m[0].clone(), m[1].clone(), m[2].clone(), m[3].clone()];
        let mut n: i64 = 1;
        loop {
            for i in 0..4 {
                acc[i] = acc[i].add(&term[i])?;
            }
            let next = n + 1;
            if next * (v * (p as i64 - 1) - 1) >= (p as i64 - 1) * (target + 1) {
                break;
            }
            n = next;
            let nv = PadicScalar::from_integer(p, n as i128, wp)?;
            let prod = [
                term[0].mul(&m[0])?.add(&term[1].mul(&m[2])?)?,
                term[0].mul(&m[1])?.add(&term[1].mul(&m[3])?)?,
                term[2].mul(&m[0])?.add(&term[3].mul(&m[2])?)?,
                term[2].mul(&m[1])?.add(&term[3].mul(&m[3])?)?,
            ];
            for i in 0..4 {
                term[i] = prod[i].div(&nv)?;
            }
        }
        // the claimed precision must not exceed the series truncation bound
        for e in acc.iter_mut() {
            *e = e.reduce_abs(target);
        }
        GroupElement::new(acc)
    }
}

/// Which chart a point of the projective line is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Owner {
    ChartMinus,
    ChartW,
}

#[derive(Debug, Clone, Copy)]
enum AffineVal {
    /// Constant valuation on the whole disk.
    Decisive(i64),
    /// Only a lower bound; `imprecise` marks bounds limited by input
    /// precision rather than by geometry.
    Lower { bound: i64, imprecise: bool },
}

/// Valuation behaviour of `slope * x + constant` on a disk.
fn affine_val_on_disk(
    p: u64,
    slope: &PadicScalar,
    constant: &PadicScalar,
    disk: Disk,
) -> Result<AffineVal> {
    let wp = padic::max_precision(p);
    let center = disk.center_scalar(p, wp)?;
    let c0 = slope.mul(&center)?.add(constant)?;
    let slope_term = slope
        .val_floor()
        .saturating_add(disk.level() as i64);
    if let Some(v) = c0.val_exact() {
        if v < slope_term {
            return Ok(AffineVal::Decisive(v));
        }
        return Ok(AffineVal::Lower {
            bound: slope_term,
            imprecise: false,
        });
    }
    if c0.is_exact_zero() {
        return Ok(AffineVal::Lower {
            bound: slope_term,
            imprecise: false,
        });
    }
    // precision-zero constant term
    let f = c0.val_floor();
    Ok(AffineVal::Lower {
        bound: f.min(slope_term),
        imprecise: f < slope_term,
    })
}

enum Decision {
    Read(Owner),
    Refine,
}

/// Cell membership of the image points `[L1 : L2]` over a disk: the first
/// chart owns points with `val L1 >= val L2`.
fn decide_owner(v1: AffineVal, v2: AffineVal) -> Result<Decision> {
    use AffineVal::*;
    match (v1, v2) {
        (Decisive(a), Decisive(b)) => Ok(Decision::Read(if a >= b {
            Owner::ChartMinus
        } else {
            Owner::ChartW
        })),
        (Lower { bound, .. }, Decisive(b)) if bound >= b => Ok(Decision::Read(Owner::ChartMinus)),
        (Decisive(a), Lower { bound, .. }) if bound > a => Ok(Decision::Read(Owner::ChartW)),
        (Lower { imprecise: true, .. }, _) | (_, Lower { imprecise: true, .. }) => Err(
            Error::InsufficientPrecision("cell boundary cannot be resolved".into()),
        ),
        _ => Ok(Decision::Refine),
    }
}

/// An element of the induced representation in chart coordinates, together
/// with the character it is attached to.
#[derive(Debug, Clone, PartialEq)]
pub struct PSElement {
    pub chart_minus: LocFun,
    pub chart_w: LocFun,
    character: TorusCharacter,
}

impl PSElement {
    pub fn new(chart_minus: LocFun, chart_w: LocFun, character: TorusCharacter) -> Result<Self> {
        let p = character.prime();
        if chart_minus.prime() != p || chart_w.prime() != p {
            return Err(Error::PrimeMismatch(chart_minus.prime(), p));
        }
        if !chart_minus.covers_unit() || !chart_w.covers_unit() {
            return Err(Error::Invalid("chart functions must cover Zp".into()));
        }
        Ok(PSElement {
            chart_minus,
            chart_w,
            character,
        })
    }

    pub fn prime(&self) -> u64 {
        self.character.prime()
    }

    pub fn character(&self) -> &TorusCharacter {
        &self.character
    }

    pub fn chart(&self, owner: usize) -> &LocFun {
        if owner == 0 {
            &self.chart_minus
        } else {
            &self.chart_w
        }
    }

    pub fn sub(&self, other: &Self) -> Result<PSElement> {
        PSElement::new(
            self.chart_minus.sub(&other.chart_minus)?,
            self.chart_w.sub(&other.chart_w)?,
            self.character.clone(),
        )
    }

    pub fn scale(&self, s: &PadicScalar) -> Result<PSElement> {
        PSElement::new(
            self.chart_minus.scale(s)?,
            self.chart_w.scale(s)?,
            self.character.clone(),
        )
    }

    pub fn add(&self, other: &Self) -> Result<PSElement> {
        PSElement::new(
            self.chart_minus.add(&other.chart_minus)?,
            self.chart_w.add(&other.chart_w)?,
            self.character.clone(),
        )
    }

    /// Coefficient coordinates on the level-`h`, degree-`deg` slice: first
    /// chart then second, `2 p^h (deg+1)` scalars.
    pub fn slice_coordinates(&self, h: u32, deg: usize) -> Result<Vec<PadicScalar>> {
        let mut out = self.chart_minus.slice_coordinates(h, deg)?;
        out.extend(self.chart_w.slice_coordinates(h, deg)?);
        Ok(out)
    }

    /// Smallest certified valuation of both charts sampled at the given
    /// points (a pointwise closeness measure for oracles).
    pub fn min_val_at(&self, points: &[PadicScalar]) -> Result<i64> {
        let mut floor = i64::MAX;
        for x in points {
            floor = floor.min(self.chart_minus.eval(x)?.val_floor());
            floor = floor.min(self.chart_w.eval(x)?.val_floor());
        }
        Ok(floor)
    }

    /// Serialize as the two chart-function documents plus the character spec.
    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "character": self.character.to_spec(),
            "chart_minus": serde_json::from_str::<serde_json::Value>(&self.chart_minus.to_json())
                .expect("chart serializes"),
            "chart_w": serde_json::from_str::<serde_json::Value>(&self.chart_w.to_json())
                .expect("chart serializes"),
        });
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(p: u64, text: &str, prec: u32) -> Result<PSElement> {
        let doc: serde_json::Value = serde_json::from_str(text)?;
        let spec = doc["character"]
            .as_str()
            .ok_or_else(|| Error::Invalid("missing character spec".into()))?;
        let character = TorusCharacter::parse_spec(p, spec, prec)?;
        let minus = LocFun::from_json(p, &doc["chart_minus"].to_string())?;
        let w = LocFun::from_json(p, &doc["chart_w"].to_string())?;
        PSElement::new(minus, w, character)
    }
}

// ----- the group action -----

struct ChartJob<'a> {
    /// (slope, const) of the two affine forms whose ratio is the image point.
    l1: (PadicScalar, PadicScalar),
    l2: (PadicScalar, PadicScalar),
    /// Sign inside the torus factor when reading the first, resp. second,
    /// source chart; fixed by the section bookkeeping of each output chart.
    eps_read_minus: i64,
    eps_read_w: i64,
    source_minus: &'a LocFun,
    source_w: &'a LocFun,
    chi: &'a TorusCharacter,
    floor: i64,
    cap: usize,
}

impl<'a> ChartJob<'a> {
    fn build(&self, p: u64, disk: Disk, depth: u32) -> Result<Vec<DiskSeries>> {
        if depth > MAX_ACT_DEPTH {
            return Err(Error::PoleInDisk { depth });
        }
        match self.try_piece(p, disk)? {
            Some(piece) => Ok(vec![piece]),
            None => {
                let mut out = Vec::new();
                for child in disk.subdisks(p) {
                    out.extend(self.build(p, child, depth + 1)?);
                }
                Ok(out)
            }
        }
    }

    fn try_piece(&self, p: u64, disk: Disk) -> Result<Option<DiskSeries>> {
        let v1 = affine_val_on_disk(p, &self.l1.0, &self.l1.1, disk)?;
        let v2 = affine_val_on_disk(p, &self.l2.0, &self.l2.1, disk)?;
        let owner = match decide_owner(v1, v2)? {
            Decision::Refine => return Ok(None),
            Decision::Read(o) => o,
        };
        // reading chart one: factor sigma(1/L2) along mu = L1/L2 (epsilon
        // determined by the section bookkeeping of the caller)
        let (factor_form, eps, source, map) = match owner {
            Owner::ChartMinus => (
                &self.l2,
                self.eps_read_minus,
                self.source_minus,
                [
                    self.l1.0.clone(),
                    self.l1.1.clone(),
                    self.l2.0.clone(),
                    self.l2.1.clone(),
                ],
            ),
            Owner::ChartW => (
                &self.l1,
                self.eps_read_w,
                self.source_w,
                [
                    self.l2.0.clone(),
                    self.l2.1.clone(),
                    self.l1.0.clone(),
                    self.l1.1.clone(),
                ],
            ),
        };
        // the factor form must have constant valuation on the disk
        let wp = padic::max_precision(p);
        let center = disk.center_scalar(p, wp)?;
        let c0 = factor_form.0.mul(&center)?.add(&factor_form.1)?;
        let Some(v_l) = c0.val_exact() else {
            return Ok(None);
        };
        let slope_term = factor_form
            .0
            .val_floor()
            .saturating_add(disk.level() as i64);
        if slope_term <= v_l {
            return Ok(None);
        }
        // locally constant factor chi_lc(eps / L): its unit class must be
        // constant on the disk
        let cond = self.chi.smooth().conductor() as i64;
        if cond > 0 && slope_term - v_l < cond {
            return Ok(None);
        }
        let eps_scalar = PadicScalar::from_integer(p, eps as i128, wp)?;
        let lc_value = self.chi.smooth().eval(&eps_scalar.div(&c0)?)?;
        // polynomial factor (eps * L)^m as a series on the disk
        let s1 = factor_form
            .0
            .mul(&PadicScalar::p_power(p, disk.level() as i64, wp)?)?;
        let base = DiskSeries::new(
            p,
            disk,
            vec![c0.mul(&eps_scalar)?, s1.mul(&eps_scalar)?],
            self.cap,
            ErrorVal::Exact,
        );
        let m = self.chi.exponent();
        let poly = affine_power(p, &base, m, self.cap)?;
        // source chart composed with the fractional-linear image coordinate
        let Some(mu) = laf::mobius_series_on_disk(p, &map, disk, self.cap)? else {
            return Ok(None);
        };
        let Some(composed) = source.compose_into(&mu, disk, self.floor)? else {
            return Ok(None);
        };
        let scaled = composed.scale(p, &lc_value)?;
        Ok(Some(poly.mul_trunc(p, &scaled)?))
    }

}

/// `(base)^m` for an affine series, inverting first for negative `m`.
fn affine_power(p: u64, base: &DiskSeries, m: i64, cap: usize) -> Result<DiskSeries> {
    let wp = padic::max_precision(p);
    if m == 0 {
        return Ok(DiskSeries::constant(
            p,
            base.disk,
            PadicScalar::one(p, wp)?,
            cap,
        ));
    }
    let positive = if m > 0 {
        base.clone()
    } else {
        // 1/(c0 + s1 t) as a geometric series; c0 dominates by construction
        let c0 = &base.coeffs[0];
        let s1 = &base.coeffs[1];
        let q = s1.div(c0)?.neg();
        let inv0 = c0.inv()?;
        let mut coeffs = Vec::with_capacity(cap + 1);
        let mut acc = inv0;
        coeffs.push(acc.clone());
        for _ in 0..cap {
            acc = acc.mul(&q)?;
            coeffs.push(acc.clone());
        }
        let tail = laf::val_add(
            acc.val_floor().min(laf::VAL_INF),
            q.val_floor().min(laf::VAL_INF),
        );
        DiskSeries::new(p, base.disk, coeffs, cap, ErrorVal::from_floor(tail))
    };
    let mut out = positive.clone();
    for _ in 1..m.unsigned_abs() {
        out = out.mul_trunc(p, &positive)?;
    }
    Ok(out)
}

/// Left translation by `g`, transported to the charts, refining until the
/// result is certified to the intrinsic precision of the input.
pub fn act(g: &GroupElement, phi: &PSElement) -> Result<PSElement> {
    let floor = phi
        .chart_minus
        .intrinsic_floor()
        .min(phi.chart_w.intrinsic_floor());
    act_with_floor(g, phi, floor)
}

/// Left translation with an explicit certification floor: cover disks are
/// refined until every piece carries `E >= floor` (or as far as the input
/// data allows). Lower floors mean coarser covers and faster arithmetic.
pub fn act_with_floor(g: &GroupElement, phi: &PSElement, floor: i64) -> Result<PSElement> {
    let p = phi.prime();
    if g.prime() != p {
        return Err(Error::PrimeMismatch(g.prime(), p));
    }
    let ginv = g.inverse()?;
    let [a, b, c, d] = ginv.entries().clone();
    let cap = phi.chart_minus.cap().min(phi.chart_w.cap());
    // output chart one, coordinate x: image point [a x + b : c x + d]
    let job_minus = ChartJob {
        l1: (a.clone(), b.clone()),
        l2: (c.clone(), d.clone()),
        eps_read_minus: 1,
        eps_read_w: -1,
        source_minus: &phi.chart_minus,
        source_w: &phi.chart_w,
        chi: &phi.character,
        floor,
        cap,
    };
    let minus = LocFun::new(p, job_minus.build(p, Disk::unit(p), 0)?)?;
    // output chart two, coordinate y: image point [b y + a : d y + c]
    let job_w = ChartJob {
        l1: (b.clone(), a.clone()),
        l2: (d.clone(), c.clone()),
        eps_read_minus: -1,
        eps_read_w: 1,
        source_minus: &phi.chart_minus,
        source_w: &phi.chart_w,
        chi: &phi.character,
        floor,
        cap,
    };
    let w = LocFun::new(p, job_w.build(p, Disk::unit(p), 0)?)?;
    PSElement::new(minus, w, phi.character.clone())
}

/// Rewrite the redundant region of the second chart from the first; the
/// identity action in chart coordinates.
pub fn canonicalize(phi: &PSElement) -> Result<PSElement> {
    let id = GroupElement::identity(phi.prime(), padic::max_precision(phi.prime()))?;
    act(&id, phi)
}

/// First-order action of the Lie algebra, as per-chart differential
/// operators with polynomial coefficients of degree at most two.
pub fn lie_act(xi: &LieElement, phi: &PSElement) -> Result<PSElement> {
    let p = phi.prime();
    if xi.prime() != p {
        return Err(Error::PrimeMismatch(xi.prime(), p));
    }
    let wp = padic::max_precision(p);
    let m = PadicScalar::from_integer(p, phi.character.exponent() as i128, wp)?;
    let zero = PadicScalar::zero(p);
    let one = PadicScalar::one(p, wp)?;
    let two = PadicScalar::from_integer(p, 2, wp)?;

    // chart one: upper -> -d/dx, diag -> -2x d/dx + m, lower -> x^2 d/dx - m x
    let d_minus = phi.chart_minus.derive()?;
    let term_upper_m = d_minus.scale(&xi.upper.neg())?;
    let term_diag_m = LocFun::linear_combine(
        &[xi.diag.neg().mul(&two)?, xi.diag.mul(&m)?],
        &[
            &d_minus.multiply_by_polynomial(&[zero.clone(), one.clone()])?,
            &phi.chart_minus,
        ],
    )?;
    let term_lower_m = LocFun::linear_combine(
        &[xi.lower.clone(), xi.lower.neg().mul(&m)?],
        &[
            &d_minus.multiply_by_polynomial(&[zero.clone(), zero.clone(), one.clone()])?,
            &phi.chart_minus.multiply_by_polynomial(&[zero.clone(), one.clone()])?,
        ],
    )?;
    let minus = term_upper_m.add(&term_diag_m)?.add(&term_lower_m)?;

    // chart two: lower -> -d/dy, diag -> 2y d/dy - m, upper -> y^2 d/dy - m y
    let d_w = phi.chart_w.derive()?;
    let term_lower_w = d_w.scale(&xi.lower.neg())?;
    let term_diag_w = LocFun::linear_combine(
        &[xi.diag.mul(&two)?, xi.diag.neg().mul(&m)?],
        &[
            &d_w.multiply_by_polynomial(&[zero.clone(), one.clone()])?,
            &phi.chart_w,
        ],
    )?;
    let term_upper_w = LocFun::linear_combine(
        &[xi.upper.clone(), xi.upper.neg().mul(&m)?],
        &[
            &d_w.multiply_by_polynomial(&[zero.clone(), zero.clone(), one.clone()])?,
            &phi.chart_w.multiply_by_polynomial(&[zero.clone(), one])?,
        ],
    )?;
    let w = term_lower_w.add(&term_diag_w)?.add(&term_upper_w)?;

    PSElement::new(minus, w, phi.character.clone())
}

/// The intertwining operator: the `(m+1)`-st derivative on the first chart
/// and its sign-twisted mirror on the second, retargeting the attached
/// character by the `(m+1)`-st root twist.
pub fn intertwine(phi: &PSElement) -> Result<PSElement> {
    let m = phi.character.exponent();
    if m < 0 {
        return Err(Error::NotReducible(m));
    }
    let p = phi.prime();
    let mut minus = phi.chart_minus.clone();
    let mut w = phi.chart_w.clone();
    for _ in 0..=m {
        minus = minus.derive()?;
        w = w.derive()?;
    }
    let sign = if (m + 1) % 2 == 1 {
        PadicScalar::from_integer(p, -1, padic::max_precision(p))?
    } else {
        PadicScalar::one(p, padic::max_precision(p))?
    };
    PSElement::new(
        minus,
        w.scale(&sign)?,
        phi.character.twist_root(m + 1),
    )
}

/// Multiply chartwise a global polynomial of degree at most `m` with a
/// locally constant function; the image spans the kernel of the
/// intertwining operator.
pub fn tau(
    poly_minus: &[PadicScalar],
    poly_w: &[PadicScalar],
    lc_minus: &LocFun,
    lc_w: &LocFun,
    chi: &TorusCharacter,
) -> Result<PSElement> {
    let m = chi.exponent();
    if m < 0 {
        return Err(Error::NotReducible(m));
    }
    for poly in [poly_minus, poly_w] {
        if poly.len() as i64 > m + 1 {
            return Err(Error::DegreeBound {
                found: poly.len() - 1,
                bound: m as usize,
            });
        }
    }
    for lc in [lc_minus, lc_w] {
        for piece in lc.pieces() {
            for c in piece.coeffs.iter().skip(1) {
                if c.is_certainly_nonzero() {
                    return Err(Error::DegreeBound {
                        found: 1,
                        bound: 0,
                    });
                }
            }
        }
    }
    PSElement::new(
        lc_minus.multiply_by_polynomial(poly_minus)?,
        lc_w.multiply_by_polynomial(poly_w)?,
        chi.clone(),
    )
}

// ----- finite-slice checks -----

/// Basis element of the level-`h`, degree-`deg` slice: the monomial `t^j` on
/// one disk of one chart, zero elsewhere.
pub fn slice_basis_element(
    chi: &TorusCharacter,
    chart: usize,
    disk_index: usize,
    j: usize,
    h: u32,
    cap: usize,
    prec: u32,
) -> Result<PSElement> {
    let p = chi.prime();
    let disks = Disk::unit(p).split_to(p, h);
    let mut pieces_active = Vec::new();
    for (i, d) in disks.iter().enumerate() {
        let mut coeffs = vec![PadicScalar::zero(p); j + 1];
        if i == disk_index {
            coeffs[j] = PadicScalar::one(p, prec)?;
        }
        pieces_active.push(DiskSeries::new(p, *d, coeffs, cap, ErrorVal::Exact));
    }
    let active = LocFun::new(p, pieces_active)?;
    let zero = LocFun::zero_on(p, &disks, cap)?;
    if chart == 0 {
        PSElement::new(active, zero, chi.clone())
    } else {
        PSElement::new(zero, active, chi.clone())
    }
}

/// Machine-readable result of the finite-slice exactness verification.
#[derive(Debug, Clone, Serialize)]
pub struct ExactnessReport {
    pub slice: SliceParams,
    pub kernel_dim: usize,
    pub tau_rank: usize,
    pub image_dim: usize,
    pub expected_kernel_dim: usize,
    pub expected_image_dim: usize,
    pub tau_spans_kernel: bool,
    pub verdict: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceParams {
    pub p: u64,
    pub m: i64,
    pub h: u32,
    pub degree: usize,
    pub precision: u32,
}

/// Assemble the intertwining operator on the finite slice and verify that
/// its kernel is exactly the image of the polynomial-times-locally-constant
/// embedding, with full image in the target slice.
pub fn exactness_check(
    chi: &TorusCharacter,
    h: u32,
    degree: usize,
    prec: u32,
    seed: u64,
) -> Result<ExactnessReport> {
    let p = chi.prime();
    let m = chi.exponent();
    if m < 0 {
        return Err(Error::NotReducible(m));
    }
    let mu = m as usize;
    if degree < mu + 1 {
        return Err(Error::Invalid(format!(
            "slice degree {degree} must exceed the exponent {m}"
        )));
    }
    let disks = padic::ppow(p, h) as usize;
    let dim = 2 * disks * (degree + 1);
    let cutoff = prec as i64 - 8;

    // matrix of the operator in slice coordinates
    let mut op_cols = Vec::with_capacity(dim);
    for chart in 0..2 {
        for disk_index in 0..disks {
            for j in 0..=degree {
                let e = slice_basis_element(chi, chart, disk_index, j, h, degree, prec)?;
                let img = intertwine(&e)?;
                op_cols.push(img.slice_coordinates(h, degree)?);
            }
        }
    }
    let op = PMatrix::from_columns(p, dim, &op_cols);

    // columns of the embedding: global monomial x^i times a disk indicator
    let all = Disk::unit(p).split_to(p, h);
    let mut tau_cols = Vec::new();
    for chart in 0..2 {
        for i in 0..=mu {
            for (di, _) in all.iter().enumerate() {
                let mut poly = vec![PadicScalar::zero(p); i + 1];
                poly[i] = PadicScalar::one(p, prec)?;
                let indicator = LocFun::new(
                    p,
                    all.iter()
                        .enumerate()
                        .map(|(k, d)| {
                            DiskSeries::constant(
                                p,
                                *d,
                                if k == di {
                                    PadicScalar::one(p, prec).unwrap()
                                } else {
                                    PadicScalar::zero(p)
                                },
                                degree,
                            )
                        })
                        .collect(),
                )?;
                let full_zero = LocFun::zero_on(p, &all, degree)?;
                let el = if chart == 0 {
                    tau(&poly, &[], &indicator, &full_zero, chi)?
                } else {
                    tau(&[], &poly, &full_zero, &indicator, chi)?
                };
                tau_cols.push(el.slice_coordinates(h, degree)?);
            }
        }
    }
    let tau_mat = PMatrix::from_columns(p, dim, &tau_cols);

    let red = op.reduce(cutoff)?;
    let kernel_dim = red.kernel.len();
    let image_dim = red.rank;
    let tau_rank = tau_mat.rank(cutoff)?;
    let kernel_mat = PMatrix::from_columns(p, dim, &red.kernel);
    let tau_spans_kernel =
        tau_rank == kernel_dim && PMatrix::same_column_span(&kernel_mat, &tau_mat, cutoff)?;

    let expected_kernel_dim = 2 * disks * (mu + 1);
    let expected_image_dim = 2 * disks * (degree - mu);
    let verdict = if kernel_dim == expected_kernel_dim
        && tau_rank == expected_kernel_dim
        && tau_spans_kernel
        && image_dim == expected_image_dim
    {
        "exact"
    } else {
        "fail"
    };
    Ok(ExactnessReport {
        slice: SliceParams {
            p,
            m,
            h,
            degree,
            precision: prec,
        },
        kernel_dim,
        tau_rank,
        image_dim,
        expected_kernel_dim,
        expected_image_dim,
        tau_spans_kernel,
        verdict: verdict.into(),
        seed,
    })
}

// ----- the algebraic representation and the generation check -----

/// The `(m+1)`-dimensional symmetric-power representation of `SL2`.
#[derive(Debug, Clone)]
pub struct AlgebraicRep {
    prime: u64,
    m: usize,
}

impl AlgebraicRep {
    pub fn new(prime: u64, m: usize) -> Self {
        AlgebraicRep { prime, m }
    }

    pub fn dim(&self) -> usize {
        self.m + 1
    }

    /// Matrix of `g` on the basis `e1^(m-i) e2^i`: the image of the basis
    /// vector is read off the expansion of `(a e1 + c e2)^(m-j) (b e1 + d e2)^j`.
    pub fn matrix(&self, g: &GroupElement) -> Result<PMatrix> {
        let p = self.prime;
        let [a, b, c, d] = g.entries();
        let n = self.dim();
        let mut cols: Vec<Vec<PadicScalar>> = Vec::with_capacity(n);
        for j in 0..n {
            // polynomial in z (z tracks the e2-degree)
            let first = binomial_power(p, a, c, self.m - j)?;
            let second = binomial_power(p, b, d, j)?;
            let mut col = vec![PadicScalar::zero(p); n];
            for (i1, u) in first.iter().enumerate() {
                for (i2, v) in second.iter().enumerate() {
                    let k = i1 + i2;
                    col[k] = col[k].add(&u.mul(v)?)?;
                }
            }
            cols.push(col);
        }
        Ok(PMatrix::from_columns(p, n, &cols))
    }
}

/// Coefficients of `(x + y z)^k` in `z`.
fn binomial_power(
    p: u64,
    x: &PadicScalar,
    y: &PadicScalar,
    k: usize,
) -> Result<Vec<PadicScalar>> {
    let wp = padic::max_precision(p);
    let mut out = vec![PadicScalar::one(p, wp)?];
    for _ in 0..k {
        let mut next = vec![PadicScalar::zero(p); out.len() + 1];
        for (i, c) in out.iter().enumerate() {
            next[i] = next[i].add(&c.mul(x)?)?;
            next[i + 1] = next[i + 1].add(&c.mul(y)?)?;
        }
        out = next;
    }
    Ok(out)
}

/// Result of the orbit-span rank test on a tensor product with a smooth
/// module.
#[derive(Debug, Clone, Serialize)]
pub struct GenerationReport {
    pub dim_algebraic: usize,
    pub dim_smooth: usize,
    pub expected_rank: usize,
    pub rank: usize,
    pub samples: usize,
    pub seed: u64,
    pub full: bool,
}

/// Pick a seeded pseudo-random nonzero tensor, translate it by random
/// integral group elements, and measure the exact rank of the orbit span.
pub fn generation_check(
    rep: &AlgebraicRep,
    module: &SmoothPSModule,
    samples: usize,
    seed: u64,
    prec: u32,
    start: Option<Vec<PadicScalar>>,
) -> Result<GenerationReport> {
    use rand::SeedableRng;
    let p = rep.prime;
    if module.prime() != p {
        return Err(Error::PrimeMismatch(module.prime(), p));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let de = rep.dim();
    let dv = module.dim();
    let dim = de * dv;
    let x = match start {
        Some(v) => {
            if v.len() != dim || !v.iter().any(|c| c.is_certainly_nonzero()) {
                return Err(Error::Invalid("bad start tensor".into()));
            }
            v
        }
        None => loop {
            let v: Vec<PadicScalar> = (0..dim)
                .map(|_| crate::sample::integral_scalar(&mut rng, p, prec))
                .collect::<Result<_>>()?;
            if v.iter().any(|c| c.is_certainly_nonzero()) {
                break v;
            }
        },
    };
    let mut rows = Vec::with_capacity(samples);
    for _ in 0..samples {
        let g = crate::sample::integral_group_element(&mut rng, p, prec)?;
        let me = rep.matrix(&g)?;
        let mv = module.action_matrix(&g)?;
        // (me ⊗ mv) x
        let mut row = vec![PadicScalar::zero(p); dim];
        for i in 0..de {
            for ii in 0..de {
                let a = me.get(i, ii);
                if a.is_exact_zero() {
                    continue;
                }
                for jj in 0..dv {
                    if x[ii * dv + jj].is_exact_zero() {
                        continue;
                    }
                    for j in 0..dv {
                        let b = mv.get(j, jj);
                        if b.is_exact_zero() {
                            continue;
                        }
                        let t = a.mul(b)?.mul(&x[ii * dv + jj])?;
                        row[i * dv + j] = row[i * dv + j].add(&t)?;
                    }
                }
            }
        }
        rows.push(row);
    }
    let mat = PMatrix::from_fn(p, samples, dim, |i, j| rows[i][j].clone());
    let rank = mat.rank(prec as i64 - 10)?;
    Ok(GenerationReport {
        dim_algebraic: de,
        dim_smooth: dv,
        expected_rank: dim,
        rank,
        samples,
        seed,
        full: rank == dim,
    })
}
