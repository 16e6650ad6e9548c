//! Exact cyclotomic integers: integer coordinate vectors on the power basis
//! of a fixed root of unity, reduced modulo the cyclotomic polynomial. No
//! floating point anywhere; equality and integrality tests are exact.

use std::fmt;

/// Element of `Z[zeta_e]`, stored as `sum coeffs[k] * zeta^k` with
/// `0 <= k < e` and reduced lazily.
#[derive(Debug, Clone)]
pub struct Cyc {
    order: u32,
    coeffs: Vec<i64>,
}

/// Cyclotomic polynomial of the given order, as integer coefficients
/// (low degree first), computed by exact division of `x^e - 1` by the
/// cyclotomic polynomials of the proper divisors.
pub fn cyclotomic_poly(e: u32) -> Vec<i64> {
    let mut num = vec![0i64; e as usize + 1];
    num[0] = -1;
    num[e as usize] = 1;
    for d in 1..e {
        if e % d == 0 {
            let phi_d = cyclotomic_poly(d);
            num = poly_div_exact(&num, &phi_d);
        }
    }
    num
}

/// Exact division of integer polynomials (the divisor is monic and divides).
fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    assert_eq!(den[dd], 1, "monic divisor");
    let n = rem.len() - 1;
    if n < dd {
        return vec![0];
    }
    let mut quot = vec![0i64; n - dd + 1];
    for k in (0..=n - dd).rev() {
        let c = rem[k + dd];
        quot[k] = c;
        if c != 0 {
            for (i, d) in den.iter().enumerate() {
                rem[k + i] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "division must be exact");
    quot
}

impl Cyc {
    pub fn zero(order: u32) -> Self {
        Cyc {
            order,
            coeffs: vec![0; order as usize],
        }
    }

    pub fn integer(order: u32, n: i64) -> Self {
        let mut c = Self::zero(order);
        c.coeffs[0] = n;
        c
    }

    /// `zeta^k`.
    pub fn root_power(order: u32, k: u64) -> Self {
        let mut c = Self::zero(order);
        c.coeffs[(k % order as u64) as usize] = 1;
        c
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn add(&self, other: &Cyc) -> Cyc {
        assert_eq!(self.order, other.order);
        Cyc {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Cyc) -> Cyc {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Cyc {
        Cyc {
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, n: i64) -> Cyc {
        Cyc {
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| a * n).collect(),
        }
    }

    /// Product: cyclic convolution of the exponent vectors.
    pub fn mul(&self, other: &Cyc) -> Cyc {
        assert_eq!(self.order, other.order);
        let e = self.order as usize;
        let mut out = vec![0i64; e];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if *b == 0 {
                    continue;
                }
                out[(i + j) % e] += a * b;
            }
        }
        Cyc {
            order: self.order,
            coeffs: out,
        }
    }

    /// Complex conjugation: `zeta -> zeta^{-1}`.
    pub fn conj(&self) -> Cyc {
        let e = self.order as usize;
        let mut out = vec![0i64; e];
        for (i, a) in self.coeffs.iter().enumerate() {
            out[(e - i) % e] += a;
        }
        Cyc {
            order: self.order,
            coeffs: out,
        }
    }

    /// Canonical coordinates on the basis `1, zeta, ..., zeta^{phi(e)-1}`:
    /// remainder modulo the cyclotomic polynomial.
    pub fn reduced(&self) -> Vec<i64> {
        let phi = cyclotomic_poly(self.order);
        let dd = phi.len() - 1;
        let mut rem = self.coeffs.clone();
        for k in (dd..rem.len()).rev() {
            let c = rem[k];
            if c != 0 {
                rem[k] = 0;
                for (i, d) in phi.iter().enumerate().take(dd) {
                    rem[k - dd + i] -= c * d;
                }
            }
        }
        rem.truncate(dd.max(1));
        rem
    }

    pub fn is_zero(&self) -> bool {
        self.reduced().iter().all(|&c| c == 0)
    }

    pub fn eq(&self, other: &Cyc) -> bool {
        self.sub(other).is_zero()
    }

    /// The rational integer this element equals, if it is one.
    pub fn as_integer(&self) -> Option<i64> {
        let red = self.reduced();
        if red.iter().skip(1).all(|&c| c == 0) {
            Some(red[0])
        } else {
            None
        }
    }

    /// Exact division by a positive integer inside `Z[zeta]`.
    pub fn divide_exact(&self, n: i64) -> Option<Cyc> {
        assert!(n > 0);
        let red = self.reduced();
        if red.iter().any(|&c| c % n != 0) {
            return None;
        }
        let mut coeffs = vec![0i64; self.order as usize];
        for (i, c) in red.iter().enumerate() {
            coeffs[i] = c / n;
        }
        Some(Cyc {
            order: self.order,
            coeffs,
        })
    }
}

impl fmt::Display for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let red = self.reduced();
        if red.iter().all(|&c| c == 0) {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in red.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                _ => write!(f, "{c}*z{}^{k}", self.order)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(2), vec![1, 1]);
        assert_eq!(cyclotomic_poly(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn root_relations() {
        // 1 + z3 + z3^2 = 0
        let s = Cyc::root_power(3, 0)
            .add(&Cyc::root_power(3, 1))
            .add(&Cyc::root_power(3, 2));
        assert!(s.is_zero());
        // z4^2 = -1
        let sq = Cyc::root_power(4, 1).mul(&Cyc::root_power(4, 1));
        assert!(sq.eq(&Cyc::integer(4, -1)));
        // conj(z5) = z5^4
        assert!(Cyc::root_power(5, 1).conj().eq(&Cyc::root_power(5, 4)));
    }

    #[test]
    fn integer_extraction_and_division() {
        let z = Cyc::root_power(6, 1);
        // z6 satisfies z^2 = z - 1, so z + conj(z) = 1
        let tr = z.add(&z.conj());
        assert_eq!(tr.as_integer(), Some(1));
        let six = Cyc::integer(12, 6);
        assert!(six.divide_exact(3).unwrap().eq(&Cyc::integer(12, 2)));
        assert!(six.divide_exact(4).is_none());
    }
}
