//! Capped relative-precision arithmetic in `Qp`.
//!
//! A nonzero scalar is stored as `p^val * unit` where the unit is known modulo
//! `p^prec` (its relative precision) and has a nonzero first digit. Exact zero
//! carries an explicit infinite-valuation marker, and values that cancelled
//! down to nothing are kept as `O(p^abs)` markers recording the surviving
//! absolute precision. Arithmetic never claims more precision than the inputs
//! justify; in particular the series for `log` and `exp` account for the
//! valuation lost to the divisions by `n` and `n!`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Valuation of a scalar: finite, infinite (exact zero), or only bounded below
/// (a value that is zero at its precision).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    /// Exact zero.
    Infinite,
    /// Known only to satisfy `val >= .0`.
    AtLeast(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Value {
    /// Exact zero.
    Zero,
    /// Zero at precision: some value with `val >= abs`.
    BigO { abs: i64 },
    /// `p^val * unit`, `unit % p != 0`, `unit < p^prec`.
    Unit { val: i64, unit: u128, prec: u32 },
}

/// A p-adic number at capped relative precision.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    prime: u64,
    value: Value,
}

const SMALL_PRIMES: [u64; 11] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31];

/// Largest relative precision so that `p^prec` fits in a `u128`.
pub fn max_precision(p: u64) -> u32 {
    let mut k = 0u32;
    let mut acc: u128 = 1;
    while let Some(next) = acc.checked_mul(p as u128) {
        acc = next;
        k += 1;
        if k > 4096 {
            break;
        }
    }
    k - 1
}

fn check_prime(p: u64) -> Result<()> {
    if SMALL_PRIMES.contains(&p) {
        Ok(())
    } else {
        Err(Error::BadPrime(p))
    }
}

fn check_prec(p: u64, prec: u32) -> Result<()> {
    if prec >= 1 && prec <= max_precision(p) {
        Ok(())
    } else {
        Err(Error::BadPrecision {
            p,
            prec,
            max: max_precision(p),
        })
    }
}

/// `p^k` as `u128`; caller guarantees `k <= max_precision(p)`.
pub(crate) fn ppow(p: u64, k: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..k {
        acc *= p as u128;
    }
    acc
}

fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if let (Some(prod), true) = (a.checked_mul(b), true) {
        return prod % m;
    }
    ((BigUint::from(a) * BigUint::from(b)) % BigUint::from(m))
        .to_u128()
        .expect("remainder fits")
}

/// Inverse of `u` modulo `m = p^k` (u a unit) via extended Euclid.
fn inv_mod(u: u128, m: u128) -> u128 {
    // Extended Euclid on (m, u), tracking coefficients of u only.
    let (mut r0, mut r1) = (m as i128 as u128, u % m);
    let (mut t0, mut t1): (i128, i128) = (0, 1);
    while r1 != 0 {
        let q = r0 / r1;
        let r2 = r0 - q * r1;
        let t2 = t0 - (q as i128) * t1;
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    debug_assert_eq!(r0, 1, "inverse of a non-unit");
    let mi = m as i128;
    (((t0 % mi) + mi) % mi) as u128
}

impl PadicScalar {
    // ----- constructors -----

    pub fn zero(p: u64) -> Self {
        PadicScalar {
            prime: p,
            value: Value::Zero,
        }
    }

    /// A value known only up to `O(p^abs)`.
    pub fn big_o(p: u64, abs: i64) -> Self {
        PadicScalar {
            prime: p,
            value: Value::BigO { abs },
        }
    }

    /// Normalizing constructor from a raw `(val, unit, prec)` triple.
    pub fn from_unit(p: u64, val: i64, unit: u128, prec: u32) -> Result<Self> {
        check_prime(p)?;
        check_prec(p, prec)?;
        let m = ppow(p, prec);
        let mut u = unit % m;
        let mut v = val;
        let mut n = prec;
        while u != 0 && u % (p as u128) == 0 {
            u /= p as u128;
            v += 1;
            n -= 1;
        }
        if u == 0 {
            return Ok(PadicScalar {
                prime: p,
                value: Value::BigO {
                    abs: val + prec as i64,
                },
            });
        }
        Ok(PadicScalar {
            prime: p,
            value: Value::Unit {
                val: v,
                unit: u,
                prec: n,
            },
        })
    }

    pub fn from_integer(p: u64, n: i128, prec: u32) -> Result<Self> {
        check_prime(p)?;
        check_prec(p, prec)?;
        if n == 0 {
            return Ok(Self::zero(p));
        }
        let neg = n < 0;
        let mut mag = n.unsigned_abs();
        let mut val = 0i64;
        while mag % (p as u128) == 0 {
            mag /= p as u128;
            val += 1;
        }
        let m = ppow(p, prec);
        let mut unit = mag % m;
        if neg {
            unit = (m - unit) % m;
        }
        Self::from_unit(p, val, unit, prec)
    }

    pub fn from_ratio(p: u64, num: i128, den: i128, prec: u32) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        let n = Self::from_integer(p, num, prec)?;
        let d = Self::from_integer(p, den, prec)?;
        n.div(&d)
    }

    pub fn one(p: u64, prec: u32) -> Result<Self> {
        Self::from_integer(p, 1, prec)
    }

    /// `p^k` as an exact unit-digit-1 value.
    pub fn p_power(p: u64, k: i64, prec: u32) -> Result<Self> {
        Self::from_unit(p, k, 1, prec)
    }

    /// Teichmueller-style root of unity congruent to `r` mod `p`
    /// (the limit of `r^(p^k)`), computed to the given precision.
    pub fn teichmuller(p: u64, r: u64, prec: u32) -> Result<Self> {
        if r % p == 0 {
            return Err(Error::Invalid(format!("residue {r} not a unit mod {p}")));
        }
        let mut x = Self::from_integer(p, (r % p) as i128, prec)?;
        for _ in 0..=prec {
            x = x.pow_u32(p as u32)?;
        }
        Ok(x)
    }

    // ----- accessors -----

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn valuation(&self) -> Valuation {
        match self.value {
            Value::Zero => Valuation::Infinite,
            Value::BigO { abs } => Valuation::AtLeast(abs),
            Value::Unit { val, .. } => Valuation::Finite(val),
        }
    }

    /// Finite valuation, if exactly known.
    pub fn val_exact(&self) -> Option<i64> {
        match self.value {
            Value::Unit { val, .. } => Some(val),
            _ => None,
        }
    }

    /// Lower bound for the valuation; `i64::MAX` for exact zero.
    pub fn val_floor(&self) -> i64 {
        match self.value {
            Value::Zero => i64::MAX,
            Value::BigO { abs } => abs,
            Value::Unit { val, .. } => val,
        }
    }

    /// Absolute precision: the value is known modulo `p^abs`. `None` = exact.
    pub fn abs_precision(&self) -> Option<i64> {
        match self.value {
            Value::Zero => None,
            Value::BigO { abs } => Some(abs),
            Value::Unit { val, prec, .. } => Some(val + prec as i64),
        }
    }

    pub fn rel_precision(&self) -> u32 {
        match self.value {
            Value::Unit { prec, .. } => prec,
            _ => 0,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.value, Value::Zero)
    }

    pub fn is_precision_zero(&self) -> bool {
        matches!(self.value, Value::BigO { .. })
    }

    /// Certified nonzero at the available precision.
    pub fn is_certainly_nonzero(&self) -> bool {
        matches!(self.value, Value::Unit { .. })
    }

    /// True when the value is certified to satisfy `val >= bound`.
    pub fn val_at_least(&self, bound: i64) -> bool {
        self.val_floor() >= bound
    }

    /// Base-p digits of the unit part, little-endian, length = relative precision.
    pub fn digits(&self) -> Vec<u64> {
        match self.value {
            Value::Unit { unit, prec, .. } => {
                let mut out = Vec::with_capacity(prec as usize);
                let mut u = unit;
                for _ in 0..prec {
                    out.push((u % self.prime as u128) as u64);
                    u /= self.prime as u128;
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// Canonical residue of an integral value modulo `p^k`.
    pub fn residue_mod(&self, k: u32) -> Result<u128> {
        if k == 0 {
            return Ok(0);
        }
        check_prec(self.prime, k)?;
        let m = ppow(self.prime, k);
        match self.value {
            Value::Zero => Ok(0),
            Value::BigO { abs } => {
                if abs >= k as i64 {
                    Ok(0)
                } else {
                    Err(Error::InsufficientPrecision(format!(
                        "residue mod p^{k} of O(p^{abs})"
                    )))
                }
            }
            Value::Unit { val, unit, prec } => {
                if val < 0 {
                    return Err(Error::Invalid("residue of a non-integral value".into()));
                }
                if val >= k as i64 {
                    return Ok(0);
                }
                if val + (prec as i64) < k as i64 {
                    return Err(Error::InsufficientPrecision(format!(
                        "residue mod p^{k} needs absolute precision {k}"
                    )));
                }
                Ok(mul_mod(unit % m, ppow(self.prime, val as u32), m))
            }
        }
    }

    /// Truncate the claimed absolute precision down to `abs`.
    pub fn reduce_abs(&self, abs: i64) -> Self {
        match self.value {
            Value::Zero => PadicScalar {
                prime: self.prime,
                value: Value::BigO { abs },
            },
            Value::BigO { abs: a } => PadicScalar {
                prime: self.prime,
                value: Value::BigO { abs: a.min(abs) },
            },
            Value::Unit { val, unit, prec } => {
                let cur = val + prec as i64;
                if abs >= cur {
                    return self.clone();
                }
                if abs <= val {
                    return PadicScalar {
                        prime: self.prime,
                        value: Value::BigO { abs },
                    };
                }
                let n = (abs - val) as u32;
                let m = ppow(self.prime, n);
                PadicScalar {
                    prime: self.prime,
                    value: Value::Unit {
                        val,
                        unit: unit % m,
                        prec: n,
                    },
                }
            }
        }
    }

    /// Cap the relative precision at `n`.
    pub fn reduce_rel(&self, n: u32) -> Self {
        match self.value {
            Value::Unit { val, prec, .. } if prec > n => self.reduce_abs(val + n as i64),
            _ => self.clone(),
        }
    }

    fn same_prime(&self, other: &Self) -> Result<()> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(Error::PrimeMismatch(self.prime, other.prime))
        }
    }

    // ----- ring operations -----

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        let p = self.prime;
        let out = match (&self.value, &other.value) {
            (Value::Zero, _) => other.clone(),
            (_, Value::Zero) => self.clone(),
            (Value::BigO { abs: a }, Value::BigO { abs: b }) => Self::big_o(p, *(a.min(b))),
            (Value::BigO { abs }, Value::Unit { .. }) => other.reduce_abs(*abs),
            (Value::Unit { .. }, Value::BigO { abs }) => self.reduce_abs(*abs),
            (
                Value::Unit {
                    val: v1,
                    unit: u1,
                    prec: n1,
                },
                Value::Unit {
                    val: v2,
                    unit: u2,
                    prec: n2,
                },
            ) => {
                let floor = (v1 + *n1 as i64).min(v2 + *n2 as i64);
                let base = (*v1).min(*v2);
                let width = floor - base;
                if width <= 0 {
                    return Ok(Self::big_o(p, floor));
                }
                let width = width as u32;
                let m = ppow(p, width);
                let s1 = mul_mod(*u1 % m, ppow(p, (v1 - base) as u32), m);
                let s2 = mul_mod(*u2 % m, ppow(p, (v2 - base) as u32), m);
                let sum = (s1 + s2) % m;
                return Self::from_unit_or_o(p, base, sum, width);
            }
        };
        Ok(out)
    }

    /// Like `from_unit` but the zero case becomes `O(p^(val+prec))`.
    fn from_unit_or_o(p: u64, val: i64, unit: u128, prec: u32) -> Result<Self> {
        if unit == 0 {
            Ok(Self::big_o(p, val + prec as i64))
        } else {
            Self::from_unit(p, val, unit, prec)
        }
    }

    pub fn neg(&self) -> Self {
        match self.value {
            Value::Unit { val, unit, prec } => {
                let m = ppow(self.prime, prec);
                PadicScalar {
                    prime: self.prime,
                    value: Value::Unit {
                        val,
                        unit: (m - unit) % m,
                        prec,
                    },
                }
            }
            _ => self.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        let p = self.prime;
        let out = match (&self.value, &other.value) {
            (Value::Zero, _) | (_, Value::Zero) => Self::zero(p),
            (Value::BigO { abs: a }, Value::BigO { abs: b }) => Self::big_o(p, a + b),
            (Value::BigO { abs }, Value::Unit { val, .. })
            | (Value::Unit { val, .. }, Value::BigO { abs }) => Self::big_o(p, abs + val),
            (
                Value::Unit {
                    val: v1,
                    unit: u1,
                    prec: n1,
                },
                Value::Unit {
                    val: v2,
                    unit: u2,
                    prec: n2,
                },
            ) => {
                let n = (*n1).min(*n2);
                let m = ppow(p, n);
                PadicScalar {
                    prime: p,
                    value: Value::Unit {
                        val: v1 + v2,
                        unit: mul_mod(u1 % m, u2 % m, m),
                        prec: n,
                    },
                }
            }
        };
        Ok(out)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        let p = self.prime;
        match &other.value {
            Value::Zero => Err(Error::DivisionByZero),
            Value::BigO { abs } => Err(Error::DivisionByPrecisionZero(*abs)),
            Value::Unit {
                val: v2,
                unit: u2,
                prec: n2,
            } => match &self.value {
                Value::Zero => Ok(Self::zero(p)),
                Value::BigO { abs } => Ok(Self::big_o(p, abs - v2)),
                Value::Unit {
                    val: v1,
                    unit: u1,
                    prec: n1,
                } => {
                    let n = (*n1).min(*n2);
                    let m = ppow(p, n);
                    let inv = inv_mod(u2 % m, m);
                    Ok(PadicScalar {
                        prime: p,
                        value: Value::Unit {
                            val: v1 - v2,
                            unit: mul_mod(u1 % m, inv, m),
                            prec: n,
                        },
                    })
                }
            },
        }
    }

    pub fn inv(&self) -> Result<Self> {
        Self::one(self.prime, self.rel_precision().max(1))?.div(self)
    }

    fn pow_u32(&self, e: u32) -> Result<Self> {
        let mut base = self.clone();
        let mut e = e;
        let mut acc: Option<Self> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base)?,
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc.unwrap_or(Self::one(self.prime, max_precision(self.prime))?))
    }

    /// Integer power; negative exponents require an invertible value.
    pub fn pow_i64(&self, e: i64) -> Result<Self> {
        if e == 0 {
            // The usual convention x^0 = 1, kept at the value's precision.
            let n = self.rel_precision();
            return Self::one(self.prime, if n == 0 { max_precision(self.prime) } else { n });
        }
        if e > 0 {
            self.pow_u32(e as u32)
        } else {
            self.inv()?.pow_u32((-e) as u32)
        }
    }

    /// Certified `val(a - b) >= bound`.
    pub fn eq_mod(&self, other: &Self, bound: i64) -> bool {
        match self.sub(other) {
            Ok(d) => d.val_at_least(bound),
            Err(_) => false,
        }
    }

    // ----- log / exp -----

    fn domain_threshold(p: u64) -> i64 {
        if p == 2 {
            2
        } else {
            1
        }
    }

    /// p-adic logarithm on `1 + p Zp` (`1 + 4 Z2` for p = 2).
    pub fn p_log(&self) -> Result<Self> {
        let p = self.prime;
        let required = Self::domain_threshold(p);
        let x = self.sub(&Self::one(p, max_precision(p))?)?;
        match x.value {
            Value::Zero => Ok(Self::zero(p)),
            Value::BigO { abs } => {
                if abs >= required {
                    // log(1 + O(p^abs)) = O(p^abs)
                    Ok(Self::big_o(p, abs))
                } else {
                    Err(Error::LogDomain {
                        required,
                        got: format!("O(p^{abs})"),
                    })
                }
            }
            Value::Unit { val: v, prec, .. } => {
                if v < required {
                    return Err(Error::LogDomain {
                        required,
                        got: format!("val {v}"),
                    });
                }
                let target = v + prec as i64;
                let mut sum = Self::zero(p);
                let mut term = x.clone(); // x^n
                let mut n: i64 = 1;
                loop {
                    let nv = Self::from_integer(p, n as i128, max_precision(p))?;
                    let contrib = term.div(&nv)?;
                    let signed = if n % 2 == 1 { contrib } else { contrib.neg() };
                    sum = sum.add(&signed)?;
                    // stop once every later term is provably below the target
                    let flog = ilog_floor(p, (n + 1) as u64);
                    if (n + 1) * v - flog as i64 >= target + 2 {
                        break;
                    }
                    n += 1;
                    term = term.mul(&x)?;
                }
                Ok(sum.reduce_abs(target))
            }
        }
    }

    /// p-adic exponential on `p Zp` (`4 Z2` for p = 2).
    pub fn p_exp(&self) -> Result<Self> {
        let p = self.prime;
        let required = Self::domain_threshold(p);
        match self.value {
            Value::Zero => Self::one(p, max_precision(p)),
            Value::BigO { abs } => {
                if abs >= required {
                    // exp(O(p^abs)) = 1 + O(p^abs)
                    Ok(Self::one(p, max_precision(p))?.reduce_abs(abs).add(&Self::big_o(p, abs))?)
                } else {
                    Err(Error::ExpDomain {
                        required,
                        got: format!("O(p^{abs})"),
                    })
                }
            }
            Value::Unit { val: v, prec, .. } => {
                if v < required {
                    return Err(Error::ExpDomain {
                        required,
                        got: format!("val {v}"),
                    });
                }
                let target = v + prec as i64;
                let mut sum = Self::one(p, max_precision(p))?;
                let mut term = self.clone(); // x^n / n!
                let mut n: i64 = 1;
                loop {
                    sum = sum.add(&term)?;
                    // val(x^m/m!) >= m*(v - 1/(p-1)); stop when that bound clears the target
                    let m = n + 1;
                    if m * (v * (p as i64 - 1) - 1) >= (p as i64 - 1) * (target + 1) {
                        break;
                    }
                    n = m;
                    let nv = Self::from_integer(p, n as i128, max_precision(p))?;
                    term = term.mul(self)?.div(&nv)?;
                }
                Ok(sum.reduce_abs(target))
            }
        }
    }

    /// `t^c := exp(c * log t)` for `t` in the log domain and integral `c`.
    pub fn char_power(t: &Self, c: &Self) -> Result<Self> {
        t.same_prime(c)?;
        if c.val_floor() < 0 {
            return Err(Error::ExpDomain {
                required: 0,
                got: format!("exponent valuation {}", c.val_floor()),
            });
        }
        let l = t.p_log()?;
        c.mul(&l)?.p_exp()
    }

    // ----- text encodings -----

    /// Compact form `v:d0d1...:N` (digits base 36); `zero` and `O:abs` for the
    /// exact-zero and precision-zero cases. Round-trips bit-exactly.
    pub fn to_compact(&self) -> String {
        match &self.value {
            Value::Zero => "zero".to_string(),
            Value::BigO { abs } => format!("O:{abs}"),
            Value::Unit { val, prec, .. } => {
                let digits: String = self
                    .digits()
                    .iter()
                    .map(|d| std::char::from_digit(*d as u32, 36).unwrap())
                    .collect();
                format!("{val}:{digits}:{prec}")
            }
        }
    }

    pub fn parse_compact(p: u64, s: &str) -> Result<Self> {
        check_prime(p)?;
        let s = s.trim();
        if s == "zero" {
            return Ok(Self::zero(p));
        }
        if let Some(rest) = s.strip_prefix("O:") {
            let abs: i64 = rest
                .parse()
                .map_err(|_| Error::parse(2, format!("bad O() bound {rest:?}")))?;
            return Ok(Self::big_o(p, abs));
        }
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::parse(0, format!("expected v:digits:N, got {s:?}")));
        }
        let val: i64 = parts[0]
            .parse()
            .map_err(|_| Error::parse(0, format!("bad valuation {:?}", parts[0])))?;
        let prec: u32 = parts[2]
            .parse()
            .map_err(|_| Error::parse(0, format!("bad precision {:?}", parts[2])))?;
        check_prec(p, prec)?;
        if parts[1].len() != prec as usize {
            return Err(Error::parse(
                0,
                format!("digit string length {} != N = {prec}", parts[1].len()),
            ));
        }
        let mut unit: u128 = 0;
        for (i, ch) in parts[1].chars().rev().enumerate() {
            let d = ch
                .to_digit(36)
                .ok_or_else(|| Error::parse(i, format!("bad digit {ch:?}")))?;
            if d as u64 >= p {
                return Err(Error::parse(i, format!("digit {d} >= p = {p}")));
            }
            unit = unit * p as u128 + d as u128;
        }
        if unit % p as u128 == 0 {
            return Err(Error::parse(0, "leading digit must be nonzero".to_string()));
        }
        Self::from_unit(p, val, unit, prec)
    }

    /// Verbose form `p^v * (d0 + d1*p + d2*p^2 + ...) mod p^N` with the actual
    /// prime substituted; `0` and `O(p^abs)` for the degenerate cases.
    pub fn to_verbose(&self) -> String {
        let p = self.prime;
        match &self.value {
            Value::Zero => "0".to_string(),
            Value::BigO { abs } => format!("O({p}^{abs})"),
            Value::Unit { val, prec, .. } => {
                let terms: Vec<String> = self
                    .digits()
                    .iter()
                    .enumerate()
                    .map(|(i, d)| match i {
                        0 => format!("{d}"),
                        1 => format!("{d}*{p}"),
                        _ => format!("{d}*{p}^{i}"),
                    })
                    .collect();
                format!("{p}^{val} * ({}) mod {p}^{prec}", terms.join(" + "))
            }
        }
    }

    pub fn parse_verbose(p: u64, s: &str) -> Result<Self> {
        check_prime(p)?;
        let s = s.trim();
        if s == "0" {
            return Ok(Self::zero(p));
        }
        if let Some(rest) = s.strip_prefix(&format!("O({p}^")) {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::parse(s.len(), "expected closing )"))?;
            let abs: i64 = inner
                .parse()
                .map_err(|_| Error::parse(0, format!("bad O() bound {inner:?}")))?;
            return Ok(Self::big_o(p, abs));
        }
        let (head, tail) = s
            .split_once(" * (")
            .ok_or_else(|| Error::parse(0, "expected `p^v * (...) mod p^N`"))?;
        let val: i64 = head
            .strip_prefix(&format!("{p}^"))
            .ok_or_else(|| Error::parse(0, format!("expected prefix {p}^v")))?
            .parse()
            .map_err(|_| Error::parse(0, "bad valuation"))?;
        let (body, modpart) = tail
            .split_once(") mod ")
            .ok_or_else(|| Error::parse(0, "expected `) mod p^N`"))?;
        let prec: u32 = modpart
            .strip_prefix(&format!("{p}^"))
            .ok_or_else(|| Error::parse(0, "expected modulus p^N"))?
            .parse()
            .map_err(|_| Error::parse(0, "bad precision"))?;
        check_prec(p, prec)?;
        let mut unit: u128 = 0;
        let mut count = 0usize;
        for (i, term) in body.split(" + ").enumerate() {
            let d: u64 = if i == 0 {
                term.parse()
                    .map_err(|_| Error::parse(0, format!("bad digit {term:?}")))?
            } else {
                let (dstr, pow) = term
                    .split_once('*')
                    .ok_or_else(|| Error::parse(0, format!("bad term {term:?}")))?;
                let expect = if i == 1 {
                    format!("{p}")
                } else {
                    format!("{p}^{i}")
                };
                if pow != expect {
                    return Err(Error::parse(0, format!("expected {expect}, got {pow}")));
                }
                dstr.parse()
                    .map_err(|_| Error::parse(0, format!("bad digit {dstr:?}")))?
            };
            if d >= p {
                return Err(Error::parse(0, format!("digit {d} >= p")));
            }
            unit += d as u128 * ppow(p, i as u32);
            count = i + 1;
        }
        if count != prec as usize {
            return Err(Error::parse(
                0,
                format!("got {count} digits, precision says {prec}"),
            ));
        }
        if unit % p as u128 == 0 {
            return Err(Error::parse(0, "leading digit must be nonzero"));
        }
        Self::from_unit(p, val, unit, prec)
    }

    /// Parse simple closed forms used in character specs: an integer, a
    /// fraction `n/m`, a power `p^e`, or products `n*p^e`, `n/m*p^e`, each
    /// with an optional leading sign. Also accepts the compact encoding.
    pub fn parse_simple(p: u64, s: &str, prec: u32) -> Result<Self> {
        let s = s.trim();
        if s.contains(':') || s == "zero" {
            return Self::parse_compact(p, s);
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (rat, pexp) = match body.split_once("*p^") {
            Some((r, e)) => (r, Some(e)),
            None => match body.strip_prefix("p^") {
                Some(e) => ("1", Some(e)),
                None => (body, None),
            },
        };
        let (num, den) = match rat.split_once('/') {
            Some((n, d)) => (n, d),
            None => (rat, "1"),
        };
        let num: i128 = num
            .parse()
            .map_err(|_| Error::parse(0, format!("bad numerator {num:?}")))?;
        let den: i128 = den
            .parse()
            .map_err(|_| Error::parse(0, format!("bad denominator {den:?}")))?;
        let mut v = Self::from_ratio(p, if neg { -num } else { num }, den, prec)?;
        if let Some(e) = pexp {
            let e: i64 = e
                .parse()
                .map_err(|_| Error::parse(0, format!("bad exponent {e:?}")))?;
            v = v.mul(&Self::p_power(p, e, prec)?)?;
        }
        Ok(v)
    }
}

/// floor(log_p(n)) for n >= 1.
fn ilog_floor(p: u64, n: u64) -> u32 {
    let mut k = 0;
    let mut acc = p;
    while acc <= n {
        acc *= p;
        k += 1;
    }
    k
}

impl std::fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_compact())
    }
}

impl Serialize for PadicScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        // prime is carried by the surrounding context in all our formats
        s.serialize_str(&self.to_compact())
    }
}

impl<'de> Deserialize<'de> for PadicScalar {
    fn deserialize<D: serde::Deserializer<'de>>(_d: D) -> std::result::Result<Self, D::Error> {
        Err(serde::de::Error::custom(
            "scalars need a prime from context; use parse_compact",
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(p: u64, n: i128) -> PadicScalar {
        PadicScalar::from_integer(p, n, 12).unwrap()
    }

    #[test]
    fn integer_arithmetic_mod_precision() {
        // (2 + 1*5) mul 3 = 21 = 1 + 4*5
        let a = s(5, 7);
        let b = s(5, 3);
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.digits()[0], 1);
        assert_eq!(prod.digits()[1], 4);
        // a + 0 = a
        let z = PadicScalar::zero(5);
        assert_eq!(a.add(&z).unwrap(), a);
    }

    #[test]
    fn division_re_multiplication() {
        let p = 7;
        let third = PadicScalar::from_ratio(p, 1, 3, 10).unwrap();
        let back = third.mul(&s(7, 3).reduce_rel(10)).unwrap();
        let one = PadicScalar::one(p, 10).unwrap();
        assert!(back.eq_mod(&one, 10));
    }

    #[test]
    fn division_by_zero_and_precision_zero() {
        let a = s(5, 2);
        assert!(matches!(
            a.div(&PadicScalar::zero(5)),
            Err(Error::DivisionByZero)
        ));
        assert!(matches!(
            a.div(&PadicScalar::big_o(5, 4)),
            Err(Error::DivisionByPrecisionZero(4))
        ));
        assert!(matches!(
            a.add(&s(7, 1)),
            Err(Error::PrimeMismatch(5, 7))
        ));
    }

    #[test]
    fn cancellation_yields_precision_zero() {
        let a = s(5, 17);
        let d = a.sub(&a).unwrap();
        assert!(d.is_precision_zero());
        assert_eq!(d.abs_precision(), Some(12));
    }

    #[test]
    fn log_trivial_and_leading_valuation() {
        let one = PadicScalar::one(5, 12).unwrap();
        assert!(one.p_log().unwrap().val_at_least(12));
        // log(1+5) has valuation exactly 1: the linear term dominates the tail
        let a = s(5, 6);
        let l = a.p_log().unwrap();
        assert_eq!(l.val_exact(), Some(1));
    }

    #[test]
    fn exp_log_inverse_pair() {
        let a = s(5, 6); // 1 + 5
        let l = a.p_log().unwrap();
        let back = l.p_exp().unwrap();
        assert!(back.eq_mod(&a, 11));
    }

    #[test]
    fn exp_homomorphism() {
        let e5 = s(5, 5).p_exp().unwrap();
        let e10 = s(5, 10).p_exp().unwrap();
        let prod = e5.mul(&e5).unwrap();
        assert!(prod.eq_mod(&e10, 10));
    }

    #[test]
    fn exp_domain_boundary_at_two() {
        assert!(PadicScalar::from_integer(2, 2, 12)
            .unwrap()
            .p_exp()
            .is_err());
        assert!(PadicScalar::from_integer(2, 4, 12)
            .unwrap()
            .p_exp()
            .is_ok());
        assert!(PadicScalar::zero(2).p_exp().unwrap().eq_mod(
            &PadicScalar::one(2, 12).unwrap(),
            12
        ));
    }

    #[test]
    fn char_power_matches_integer_powers() {
        let t = s(5, 6);
        let c0 = PadicScalar::zero(5);
        assert!(PadicScalar::char_power(&t, &c0)
            .unwrap()
            .eq_mod(&PadicScalar::one(5, 12).unwrap(), 11));
        // t^3 against repeated multiplication
        let c3 = s(5, 3);
        let lhs = PadicScalar::char_power(&t, &c3).unwrap();
        let rhs = t.mul(&t).unwrap().mul(&t).unwrap();
        assert!(lhs.eq_mod(&rhs, 11));
        // t^(-2) against division
        let cm2 = s(5, -2);
        let lhs = PadicScalar::char_power(&t, &cm2).unwrap();
        let rhs = PadicScalar::one(5, 12)
            .unwrap()
            .div(&t.mul(&t).unwrap())
            .unwrap();
        assert!(lhs.eq_mod(&rhs, 11));
    }

    #[test]
    fn char_power_additive_in_exponent() {
        let t = s(7, 8); // 1 + 7
        let c1 = s(7, 4);
        let c2 = s(7, -9);
        let sum = c1.add(&c2).unwrap();
        let lhs = PadicScalar::char_power(&t, &sum).unwrap();
        let rhs = PadicScalar::char_power(&t, &c1)
            .unwrap()
            .mul(&PadicScalar::char_power(&t, &c2).unwrap())
            .unwrap();
        assert!(lhs.eq_mod(&rhs, 10));
    }

    #[test]
    fn teichmuller_is_root_of_unity() {
        let t = PadicScalar::teichmuller(5, 2, 12).unwrap();
        let t4 = t.pow_i64(4).unwrap();
        assert!(t4.eq_mod(&PadicScalar::one(5, 12).unwrap(), 12));
        assert_eq!(t.digits()[0], 2);
    }

    #[test]
    fn compact_roundtrip() {
        let cases = [
            PadicScalar::from_ratio(5, -7, 3, 9).unwrap(),
            PadicScalar::zero(5),
            PadicScalar::big_o(5, -3),
            PadicScalar::p_power(5, -2, 6).unwrap(),
        ];
        for c in &cases {
            let enc = c.to_compact();
            let dec = PadicScalar::parse_compact(5, &enc).unwrap();
            assert_eq!(&dec, c, "compact roundtrip of {enc}");
            let venc = c.to_verbose();
            let vdec = PadicScalar::parse_verbose(5, &venc).unwrap();
            assert_eq!(&vdec, c, "verbose roundtrip of {venc}");
        }
    }

    #[test]
    fn parse_simple_forms() {
        let a = PadicScalar::parse_simple(5, "p^-2", 8).unwrap();
        assert_eq!(a, PadicScalar::p_power(5, -2, 8).unwrap());
        let b = PadicScalar::parse_simple(5, "-p^-1", 8).unwrap();
        assert_eq!(b, PadicScalar::p_power(5, -1, 8).unwrap().neg());
        let c = PadicScalar::parse_simple(5, "3/2*p^4", 8).unwrap();
        assert_eq!(c, PadicScalar::from_ratio(5, 3, 2, 8).unwrap()
            .mul(&PadicScalar::p_power(5, 4, 8).unwrap()).unwrap());
        assert_eq!(
            PadicScalar::parse_simple(5, "1", 8).unwrap(),
            PadicScalar::one(5, 8).unwrap()
        );
    }

    proptest! {
        #[test]
        fn ultrametric_and_multiplicativity(x in -2000i128..2000, y in -2000i128..2000) {
            let p = 5u64;
            let a = PadicScalar::from_integer(p, x, 14).unwrap();
            let b = PadicScalar::from_integer(p, y, 14).unwrap();
            let sum = a.add(&b).unwrap();
            let va = a.val_floor();
            let vb = b.val_floor();
            prop_assert!(sum.val_floor() >= va.min(vb));
            if x != 0 && y != 0 && va != vb {
                // equality case of the ultrametric inequality
                prop_assert_eq!(sum.val_exact().unwrap(), va.min(vb));
            }
            if x != 0 && y != 0 {
                let prod = a.mul(&b).unwrap();
                prop_assert_eq!(prod.val_exact().unwrap(), va + vb);
            }
        }

        #[test]
        fn add_mul_match_integers(x in -500i128..500, y in -500i128..500) {
            let p = 3u64;
            let a = PadicScalar::from_integer(p, x, 16).unwrap();
            let b = PadicScalar::from_integer(p, y, 16).unwrap();
            let sum = PadicScalar::from_integer(p, x + y, 16).unwrap();
            let prod = PadicScalar::from_integer(p, x * y, 16).unwrap();
            prop_assert!(a.add(&b).unwrap().eq_mod(&sum, 14));
            prop_assert!(a.mul(&b).unwrap().eq_mod(&prod, 14));
        }
    }
}
