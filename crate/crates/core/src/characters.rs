//! Locally analytic characters of the diagonal torus of `SL2(Qp)`.
//!
//! A character is split as an algebraic part `t -> t^{-m}` (an integer
//! exponent, negative values allowed on twisted characters) times a locally
//! constant part determined by a finite-order value on the units and a value
//! at `p`. All values live in `Qp`, so unit-part orders divide `p - 1` (only
//! signs for `p = 2`) and tame conductors are at most 1 for odd `p`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{self, PadicScalar};

/// Locally constant character of `Qp^x`, `Qp`-valued.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothCharacter {
    prime: u64,
    conductor: u32,
    unit_part: UnitPart,
    value_at_p: PadicScalar,
}

/// Value data on the unit group.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitPart {
    Trivial,
    /// Odd p: value on the fixed generator of `(Z/p^cond)^x`, stored as the
    /// residue mod p of the root of unity (Teichmueller digit).
    Odd { value_residue: u64 },
    /// p = 2: signs on the generators -1 and 5 of `(Z/2^cond)^x`.
    Two { on_minus_one: i8, on_five: i8 },
}

/// Smallest generator of the cyclic group `(Z/p^k)^x` for odd `p` (`k >= 1`).
pub fn unit_group_generator(p: u64, k: u32) -> u64 {
    let m = padic::ppow(p, k) as u64;
    let order = m / p * (p - 1);
    'cand: for g in 2..m {
        if g % p == 0 {
            continue;
        }
        // g generates iff g^(order/q) != 1 for every prime q | order
        let mut q = 2u64;
        let mut rest = order;
        while rest > 1 {
            if q * q > rest {
                q = rest;
            }
            if rest % q == 0 {
                while rest % q == 0 {
                    rest /= q;
                }
                if pow_mod(g, order / q, m) == 1 {
                    continue 'cand;
                }
            }
            q += 1;
        }
        return g;
    }
    unreachable!("cyclic group has a generator")
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc: u128 = 1;
    let mm = m as u128;
    let mut bb = b as u128 % mm;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
        b = 0;
    }
    let _ = b;
    acc as u64
}

/// Discrete log base `g` in `(Z/m)^x` by direct search (desk-scale moduli).
fn dlog(g: u64, x: u64, m: u64) -> Option<u64> {
    let mut acc = 1u64;
    let mut k = 0u64;
    loop {
        if acc == x % m {
            return Some(k);
        }
        acc = (acc as u128 * g as u128 % m as u128) as u64;
        k += 1;
        if k > 2 * m {
            return None;
        }
    }
}

impl SmoothCharacter {
    /// Trivial character (conductor 0, value 1 at p).
    pub fn trivial(p: u64, prec: u32) -> Result<Self> {
        Ok(SmoothCharacter {
            prime: p,
            conductor: 0,
            unit_part: UnitPart::Trivial,
            value_at_p: PadicScalar::one(p, prec)?,
        })
    }

    /// Build from unit-part data and the value at p. The conductor is
    /// computed from the data (0 when trivial on units). Values must be
    /// roots of unity inside `Qp`, i.e. of order dividing `p - 1` for odd
    /// `p` and signs for `p = 2`.
    pub fn new(p: u64, unit_part: UnitPart, value_at_p: PadicScalar) -> Result<Self> {
        if !value_at_p.is_certainly_nonzero() {
            return Err(Error::Invalid("value at p must be nonzero".into()));
        }
        if value_at_p.prime() != p {
            return Err(Error::PrimeMismatch(value_at_p.prime(), p));
        }
        let (unit_part, conductor) = match unit_part {
            UnitPart::Trivial => (UnitPart::Trivial, 0),
            UnitPart::Odd { value_residue } => {
                if p == 2 {
                    return Err(Error::Invalid("odd-prime unit data at p = 2".into()));
                }
                let r = value_residue % p;
                if r == 0 {
                    return Err(Error::Invalid("unit value must be a unit residue".into()));
                }
                if r == 1 {
                    (UnitPart::Trivial, 0)
                } else {
                    (UnitPart::Odd { value_residue: r }, 1)
                }
            }
            UnitPart::Two { on_minus_one, on_five } => {
                if p != 2 {
                    return Err(Error::Invalid("sign-pair unit data needs p = 2".into()));
                }
                if on_minus_one.abs() != 1 || on_five.abs() != 1 {
                    return Err(Error::Invalid("unit values at 2 must be +-1".into()));
                }
                match (on_minus_one, on_five) {
                    (1, 1) => (UnitPart::Trivial, 0),
                    (_, 1) => (UnitPart::Two { on_minus_one, on_five }, 2),
                    _ => (UnitPart::Two { on_minus_one, on_five }, 3),
                }
            }
        };
        Ok(SmoothCharacter {
            prime: p,
            conductor,
            unit_part,
            value_at_p,
        })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn value_at_p(&self) -> &PadicScalar {
        &self.value_at_p
    }

    pub fn unit_part(&self) -> &UnitPart {
        &self.unit_part
    }

    pub fn is_trivial(&self) -> bool {
        self.conductor == 0 && self.is_unramified_value(1)
    }

    /// Does `value_at_p` equal `sign * p^e` exactly at its precision?
    fn matches_p_power(&self, sign: i64, e: i64) -> bool {
        let prec = self.value_at_p.rel_precision().max(1);
        let want = PadicScalar::p_power(self.prime, e, prec)
            .map(|v| if sign < 0 { v.neg() } else { v });
        match want {
            Ok(w) => {
                let bound = self
                    .value_at_p
                    .abs_precision()
                    .unwrap_or(e + prec as i64);
                self.value_at_p.eq_mod(&w, bound)
            }
            Err(_) => false,
        }
    }

    fn is_unramified_value(&self, sign_p_exp: i64) -> bool {
        let _ = sign_p_exp;
        self.matches_p_power(1, 0)
    }

    /// Order of the unit-part value (1 for trivial).
    pub fn unit_order(&self) -> u32 {
        match &self.unit_part {
            UnitPart::Trivial => 1,
            UnitPart::Odd { value_residue } => {
                let mut k = 1;
                let mut acc = *value_residue % self.prime;
                while acc != 1 {
                    acc = acc * (*value_residue % self.prime) % self.prime;
                    k += 1;
                }
                k
            }
            UnitPart::Two { on_minus_one, on_five } => {
                if *on_minus_one == 1 && *on_five == 1 {
                    1
                } else {
                    2
                }
            }
        }
    }

    /// Evaluate on a unit residue class mod `p^max(cond,1)`, exactly as a
    /// power of the reference root of unity: the value is `zeta^power` where
    /// `zeta` is the Teichmueller lift of the canonical generator of
    /// `(Z/p)^x` (order `p - 1`; `zeta = -1` of order 2 when `p = 2`).
    /// Returns `(order_of_zeta, power)`.
    pub fn unit_value_exponent(&self, residue: u128) -> Result<(u32, u64)> {
        match &self.unit_part {
            UnitPart::Trivial => Ok((1, 0)),
            UnitPart::Odd { value_residue } => {
                let p = self.prime;
                let m = padic::ppow(p, self.conductor.max(1)) as u64;
                let g = unit_group_generator(p, self.conductor.max(1));
                let x = (residue % m as u128) as u64;
                if x % p == 0 {
                    return Err(Error::Invalid("unit class required".into()));
                }
                let k = dlog(g, x, m)
                    .ok_or_else(|| Error::Invalid("unit not generated (not a unit?)".into()))?;
                // express the declared value through the mod-p reference root
                let g1 = unit_group_generator(p, 1);
                let a = dlog(g1, *value_residue % p, p)
                    .ok_or_else(|| Error::Invalid("value residue not a unit".into()))?;
                Ok((p as u32 - 1, (a * k) % (p - 1)))
            }
            UnitPart::Two { on_minus_one, on_five } => {
                let m = padic::ppow(2, self.conductor.max(3)) as u64;
                let x = (residue % m as u128) as u64;
                if x % 2 == 0 {
                    return Err(Error::Invalid("unit class required".into()));
                }
                // write x = (-1)^a 5^b mod 2^k
                let mut found = None;
                for a in 0..2u64 {
                    let target = if a == 0 { x } else { m - x };
                    if let Some(b) = dlog(5, target, m) {
                        found = Some((a, b));
                        break;
                    }
                }
                let (a, b) = found.ok_or_else(|| Error::Invalid("not in <-1,5>".into()))?;
                let v = (if a == 1 { *on_minus_one } else { 1 })
                    * (if b % 2 == 1 { *on_five } else { 1 });
                Ok((2, if v == 1 { 0 } else { 1 }))
            }
        }
    }

    /// Evaluate the character on a unit residue as a p-adic value.
    pub fn eval_unit_class(&self, residue: u128, prec: u32) -> Result<PadicScalar> {
        let (order, power) = self.unit_value_exponent(residue)?;
        if order == 1 || power == 0 {
            return PadicScalar::one(self.prime, prec);
        }
        if self.prime == 2 {
            return PadicScalar::from_integer(2, -1, prec);
        }
        let zeta = PadicScalar::teichmuller(
            self.prime,
            unit_group_generator(self.prime, 1),
            prec,
        )?;
        zeta.pow_i64(power as i64)
    }

    /// Full evaluation at a nonzero scalar `s = p^v * u`:
    /// `unit_part(u mod p^cond) * value_at_p^v`.
    pub fn eval(&self, s: &PadicScalar) -> Result<PadicScalar> {
        if s.prime() != self.prime {
            return Err(Error::PrimeMismatch(s.prime(), self.prime));
        }
        let v = s.val_exact().ok_or_else(|| {
            Error::InsufficientPrecision("character argument has unknown valuation".into())
        })?;
        let prec = s.rel_precision();
        let need = self.conductor.max(1);
        if self.conductor > 0 && prec < self.conductor {
            return Err(Error::InsufficientPrecision(format!(
                "need {} unit digits to evaluate, have {prec}",
                self.conductor
            )));
        }
        let unit = s.div(&PadicScalar::p_power(self.prime, v, prec.max(need))?)?;
        let residue = unit.residue_mod(need)?;
        let uval = self.eval_unit_class(residue, prec.max(need))?;
        let pval = self.value_at_p.pow_i64(v)?;
        uval.mul(&pval)
    }
}

/// A locally analytic torus character split into algebraic and smooth parts:
/// on `diag(t^-1, t)` it takes the value `t^{-m} * smooth(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusCharacter {
    m: i64,
    smooth: SmoothCharacter,
}

/// Reducibility classification of the induced representation attached to a
/// torus character.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothCase {
    /// Trivial locally constant part.
    A,
    /// Square of the normalized absolute value.
    B,
    /// Absolute value times a nontrivial quadratic character.
    C,
    /// None of the special shapes: irreducible smooth part.
    IrreducibleSmooth,
}

/// One constituent in the classification report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constituent {
    pub kind: String,
    pub description: String,
}

/// Output of [`TorusCharacter::classify`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassificationReport {
    pub c_of_chi: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<SmoothCase>,
    pub constituents: Vec<Constituent>,
    pub topological_length: String,
}

impl TorusCharacter {
    pub fn new(m: i64, smooth: SmoothCharacter) -> Self {
        TorusCharacter { m, smooth }
    }

    pub fn trivial_smooth(p: u64, m: i64, prec: u32) -> Result<Self> {
        Ok(TorusCharacter {
            m,
            smooth: SmoothCharacter::trivial(p, prec)?,
        })
    }

    pub fn prime(&self) -> u64 {
        self.smooth.prime()
    }

    pub fn exponent(&self) -> i64 {
        self.m
    }

    pub fn smooth(&self) -> &SmoothCharacter {
        &self.smooth
    }

    /// `sigma(t) = t^{-m} * smooth(t)`, the value on `diag(t^-1, t)`.
    pub fn eval_sigma(&self, t: &PadicScalar) -> Result<PadicScalar> {
        let alg = t.pow_i64(-self.m)?;
        let lc = self.smooth.eval(t)?;
        alg.mul(&lc)
    }

    /// The exponent `c` with `sigma(t) = exp(c log t)` near `t = 1`: the
    /// locally constant part contributes nothing there, so `c = -m`.
    pub fn c_of(&self, prec: u32) -> Result<PadicScalar> {
        PadicScalar::from_integer(self.prime(), -(self.m as i128), prec)
    }

    /// Twist by the `k`-th power of the positive-root character `t -> t^2`:
    /// the algebraic exponent drops by `2k` and `c` rises by `2k`.
    pub fn twist_root(&self, k: i64) -> TorusCharacter {
        TorusCharacter {
            m: self.m - 2 * k,
            smooth: self.smooth.clone(),
        }
    }

    fn smooth_case(&self) -> SmoothCase {
        let s = &self.smooth;
        let p = self.prime();
        if s.conductor() == 0 {
            if s.matches_p_power(1, 0) {
                return SmoothCase::A;
            }
            if s.matches_p_power(1, -2) {
                return SmoothCase::B;
            }
            if s.matches_p_power(-1, -1) {
                return SmoothCase::C;
            }
        }
        if p != 2 && s.conductor() == 1 && s.unit_order() == 2 {
            if s.matches_p_power(1, -1) || s.matches_p_power(-1, -1) {
                return SmoothCase::C;
            }
        }
        SmoothCase::IrreducibleSmooth
    }

    /// Reducibility classification: simple unless `c` is a nonpositive
    /// integer, otherwise the constituents and topological length determined
    /// by the shape of the locally constant part.
    pub fn classify(&self, prec: u32) -> Result<ClassificationReport> {
        let c = self.c_of(prec)?;
        if self.m < 0 {
            return Ok(ClassificationReport {
                c_of_chi: c.to_compact(),
                verdict: "simple".into(),
                m: None,
                case: None,
                constituents: vec![Constituent {
                    kind: "simple".into(),
                    description: "the whole module is simple".into(),
                }],
                topological_length: "1".into(),
            });
        }
        let m = self.m;
        let dim = m + 1;
        let case = self.smooth_case();
        let sub = Constituent {
            kind: "twisted-sub".into(),
            description: format!(
                "simple submodule attached to the root-twisted character (c = {})",
                m + 2
            ),
        };
        let alg = |smooth_desc: &str| Constituent {
            kind: "tensor".into(),
            description: format!(
                "dim-{dim} algebraic representation tensor dual of {smooth_desc}"
            ),
        };
        let (constituents, length) = match case {
            SmoothCase::A => (
                vec![
                    sub,
                    alg("the trivial smooth representation (sub of the smooth induction)"),
                    alg("the special (Steinberg) smooth quotient"),
                ],
                "3".to_string(),
            ),
            SmoothCase::B => (
                vec![
                    sub,
                    alg("the special (Steinberg) smooth sub"),
                    alg("the trivial smooth quotient"),
                ],
                "3".to_string(),
            ),
            SmoothCase::C => (
                vec![
                    sub,
                    alg("the smooth induction (irreducible or a sum of two pieces; splitting not decided here)"),
                ],
                "2 or 3 pending splitting".to_string(),
            ),
            SmoothCase::IrreducibleSmooth => (
                vec![sub, alg("the irreducible smooth induction")],
                "2".to_string(),
            ),
        };
        Ok(ClassificationReport {
            c_of_chi: c.to_compact(),
            verdict: "reducible".into(),
            m: Some(m),
            case: Some(case),
            constituents,
            topological_length: length,
        })
    }

    // ----- spec-string encoding -----

    /// Parse `m=<int>;cond=<n>;unit=<values>;at_p=<scalar>`.
    pub fn parse_spec(p: u64, s: &str, prec: u32) -> Result<TorusCharacter> {
        let mut m: Option<i64> = None;
        let mut cond: Option<u32> = None;
        let mut unit: Option<String> = None;
        let mut at_p: Option<PadicScalar> = None;
        for (i, field) in s.split(';').enumerate() {
            let field = field.trim();
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::parse(i, format!("expected key=value, got {field:?}")))?;
            match key.trim() {
                "m" => {
                    m = Some(value.trim().parse().map_err(|_| {
                        Error::parse(i, format!("bad integer exponent {value:?}"))
                    })?)
                }
                "cond" => {
                    cond = Some(value.trim().parse().map_err(|_| {
                        Error::parse(i, format!("bad conductor {value:?}"))
                    })?)
                }
                "unit" => unit = Some(value.trim().to_string()),
                "at_p" => at_p = Some(PadicScalar::parse_simple(p, value.trim(), prec)?),
                other => return Err(Error::parse(i, format!("unknown key {other:?}"))),
            }
        }
        let m = m.ok_or_else(|| Error::parse(0, "missing m="))?;
        let cond = cond.ok_or_else(|| Error::parse(0, "missing cond="))?;
        let unit = unit.ok_or_else(|| Error::parse(0, "missing unit="))?;
        let at_p = at_p.ok_or_else(|| Error::parse(0, "missing at_p="))?;
        let unit_part = if unit.is_empty() {
            UnitPart::Trivial
        } else if p == 2 {
            let vals: Vec<i8> = unit
                .split(',')
                .map(|v| v.trim().parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(0, format!("bad sign list {unit:?}")))?;
            if vals.len() != 2 {
                return Err(Error::parse(0, "p=2 needs two signs (on -1 and 5)"));
            }
            UnitPart::Two {
                on_minus_one: vals[0],
                on_five: vals[1],
            }
        } else {
            let r: u64 = unit
                .parse()
                .map_err(|_| Error::parse(0, format!("bad unit residue {unit:?}")))?;
            UnitPart::Odd { value_residue: r }
        };
        let smooth = SmoothCharacter::new(p, unit_part, at_p)?;
        if smooth.conductor() != cond {
            return Err(Error::parse(
                0,
                format!(
                    "declared conductor {cond} but the unit data has conductor {}",
                    smooth.conductor()
                ),
            ));
        }
        Ok(TorusCharacter::new(m, smooth))
    }

    /// Canonical spec string; `parse_spec` is its exact inverse.
    pub fn to_spec(&self) -> String {
        let unit = match self.smooth.unit_part() {
            UnitPart::Trivial => String::new(),
            UnitPart::Odd { value_residue } => format!("{value_residue}"),
            UnitPart::Two { on_minus_one, on_five } => format!("{on_minus_one},{on_five}"),
        };
        format!(
            "m={};cond={};unit={};at_p={}",
            self.m,
            self.smooth.conductor(),
            unit,
            self.smooth.value_at_p().to_compact()
        )
    }
}
