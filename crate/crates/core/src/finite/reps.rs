//! Characters of representations and exact multiplicity arithmetic: inner
//! products, restriction and induction, the index-multiplicity identities,
//! and the bounded-multiplicity check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite::cyclotomic::Cyc;
use crate::finite::FiniteGroup;

/// One irreducible character: degree plus one exact value per class.
#[derive(Debug, Clone)]
pub struct Irrep {
    pub degree: u64,
    pub values: Vec<Cyc>,
}

/// A complete character table, aligned with the class indices of the group
/// it was computed from.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    pub exponent: u32,
    pub class_sizes: Vec<usize>,
    pub inverse_classes: Vec<usize>,
    pub order: u64,
    pub irreps: Vec<Irrep>,
}

impl CharacterTable {
    /// Row and column orthogonality plus the degree identity, all exact.
    pub fn verify_orthogonality(&self) -> Result<()> {
        let r = self.class_sizes.len();
        if self.irreps.len() != r {
            return Err(Error::TableMismatch(format!(
                "{} characters for {r} classes",
                self.irreps.len()
            )));
        }
        let sum_sq: u64 = self.irreps.iter().map(|i| i.degree * i.degree).sum();
        if sum_sq != self.order {
            return Err(Error::TableMismatch(format!(
                "degree squares sum to {sum_sq}, group order is {}",
                self.order
            )));
        }
        for (a, ia) in self.irreps.iter().enumerate() {
            for (b, ib) in self.irreps.iter().enumerate() {
                let mut acc = Cyc::zero(self.exponent);
                for c in 0..r {
                    let term = ia.values[c]
                        .mul(&ib.values[c].conj())
                        .scale(self.class_sizes[c] as i64);
                    acc = acc.add(&term);
                }
                let want = if a == b { self.order as i64 } else { 0 };
                if !acc.eq(&Cyc::integer(self.exponent, want)) {
                    return Err(Error::TableMismatch(format!(
                        "row orthogonality fails at ({a},{b})"
                    )));
                }
            }
        }
        for c in 0..r {
            for d in 0..r {
                let mut acc = Cyc::zero(self.exponent);
                for irr in &self.irreps {
                    acc = acc.add(&irr.values[c].mul(&irr.values[d].conj()));
                }
                let want = if c == d {
                    (self.order as usize / self.class_sizes[c]) as i64
                } else {
                    0
                };
                if !acc.eq(&Cyc::integer(self.exponent, want)) {
                    return Err(Error::TableMismatch(format!(
                        "column orthogonality fails at ({c},{d})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn degrees(&self) -> Vec<u64> {
        self.irreps.iter().map(|i| i.degree).collect()
    }

    /// JSON dump: class sizes plus reduced coordinate vectors per character.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "order": self.order,
            "exponent": self.exponent,
            "class_sizes": self.class_sizes,
            "characters": self.irreps.iter().map(|irr| serde_json::json!({
                "degree": irr.degree,
                "values": irr.values.iter().map(|v| v.reduced()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Class function of an arbitrary finite-dimensional representation.
#[derive(Debug, Clone)]
pub struct RepCharacter {
    pub values: Vec<Cyc>,
}

impl RepCharacter {
    pub fn from_integers(exponent: u32, values: &[i64]) -> Self {
        RepCharacter {
            values: values.iter().map(|&v| Cyc::integer(exponent, v)).collect(),
        }
    }

    pub fn scale(&self, n: i64) -> Self {
        RepCharacter {
            values: self.values.iter().map(|v| v.scale(n)).collect(),
        }
    }
}

/// Exact multiplicity of the `pi`-th irreducible inside the representation
/// with the given character: `(1/|G|) sum |C| chi_V conj(chi_pi)`.
pub fn mult_in(table: &CharacterTable, pi: usize, rep: &RepCharacter) -> Result<u64> {
    let e = table.exponent;
    let mut acc = Cyc::zero(e);
    for (c, size) in table.class_sizes.iter().enumerate() {
        let v = embed(&rep.values[c], e)?;
        let term = v
            .mul(&table.irreps[pi].values[c].conj())
            .scale(*size as i64);
        acc = acc.add(&term);
    }
    let q = acc
        .divide_exact(table.order as i64)
        .ok_or_else(|| Error::NonIntegerMultiplicity(format!("inner product {acc}")))?;
    match q.as_integer() {
        Some(n) if n >= 0 => Ok(n as u64),
        _ => Err(Error::NonIntegerMultiplicity(format!("inner product {q}"))),
    }
}

fn embed(v: &Cyc, target: u32) -> Result<Cyc> {
    if v.order() == target {
        return Ok(v.clone());
    }
    if target % v.order() != 0 {
        return Err(Error::TableMismatch(format!(
            "cannot embed order {} into order {target}",
            v.order()
        )));
    }
    let step = (target / v.order()) as u64;
    let mut out = Cyc::zero(target);
    for (k, c) in v.reduced().iter().enumerate() {
        if *c != 0 {
            out = out.add(&Cyc::root_power(target, k as u64 * step).scale(*c));
        }
    }
    Ok(out)
}

/// Character of the restriction of an irreducible of `h` to the subgroup
/// `h0` (elements of `h0` located inside `h` by their encodings).
pub fn restricted_character(
    h: &FiniteGroup,
    ht: &CharacterTable,
    pi: usize,
    h0: &FiniteGroup,
) -> Result<RepCharacter> {
    let mut values = Vec::with_capacity(h0.class_count());
    for class in &h0.classes {
        let e = h0.elem(class.rep);
        let idx = h
            .index_of(e)
            .ok_or_else(|| Error::TableMismatch("not a subgroup".into()))?;
        values.push(ht.irreps[pi].values[h.class_of(idx)].clone());
    }
    Ok(RepCharacter { values })
}

/// Exact multiplicity of the `sigma`-th irreducible of `h0` in the
/// restriction of the `pi`-th irreducible of `h`.
pub fn branch_mult(
    h: &FiniteGroup,
    ht: &CharacterTable,
    pi: usize,
    h0: &FiniteGroup,
    h0t: &CharacterTable,
    sigma: usize,
) -> Result<u64> {
    let res = restricted_character(h, ht, pi, h0)?;
    // the restriction lives in the big exponent; lift the small table into it
    let e = lcm_u32(ht.exponent, h0t.exponent);
    let mut acc = Cyc::zero(e);
    for (c, size) in h0t.class_sizes.iter().enumerate() {
        let term = embed(&res.values[c], e)?
            .mul(&embed(&h0t.irreps[sigma].values[c], e)?.conj())
            .scale(*size as i64);
        acc = acc.add(&term);
    }
    let q = acc
        .divide_exact(h0t.order as i64)
        .ok_or_else(|| Error::NonIntegerMultiplicity(format!("branch product {acc}")))?;
    match q.as_integer() {
        Some(n) if n >= 0 => Ok(n as u64),
        _ => Err(Error::NonIntegerMultiplicity(format!("branch product {q}"))),
    }
}

fn lcm_u32(a: u32, b: u32) -> u32 {
    let g = {
        let (mut x, mut y) = (a, b);
        while y != 0 {
            let t = x % y;
            x = y;
            y = t;
        }
        x
    };
    a / g * b
}

/// Character of the regular representation.
pub fn regular_character(group: &FiniteGroup, exponent: u32) -> RepCharacter {
    let idc = group.class_of(0);
    let values = (0..group.class_count())
        .map(|c| {
            if c == idc {
                Cyc::integer(exponent, group.order() as i64)
            } else {
                Cyc::zero(exponent)
            }
        })
        .collect();
    RepCharacter { values }
}

/// Permutation character of the action on left cosets of a subgroup.
pub fn permutation_character_on_cosets(
    g: &FiniteGroup,
    h: &FiniteGroup,
    exponent: u32,
) -> Result<RepCharacter> {
    let cosets = g.left_cosets(h)?;
    let mut values = Vec::with_capacity(g.class_count());
    for class in &g.classes {
        let x = class.rep;
        let mut fixed = 0i64;
        for coset in &cosets {
            let mut image: Vec<usize> = coset.iter().map(|&c| g.mul_idx(x, c)).collect();
            image.sort_unstable();
            if &image == coset {
                fixed += 1;
            }
        }
        values.push(Cyc::integer(exponent, fixed));
    }
    Ok(RepCharacter { values })
}

/// Fixed-point character of a permutation group acting on its letters.
pub fn natural_permutation_character(g: &FiniteGroup, exponent: u32) -> Result<RepCharacter> {
    let mut values = Vec::with_capacity(g.class_count());
    for class in &g.classes {
        match g.elem(class.rep) {
            crate::finite::Elem::Perm(p) => {
                let fixed = p.iter().enumerate().filter(|(i, &x)| *i == x as usize).count();
                values.push(Cyc::integer(exponent, fixed as i64));
            }
            _ => return Err(Error::TableMismatch("not a permutation group".into())),
        }
    }
    Ok(RepCharacter { values })
}

/// Character of the induced representation of a class function of a
/// subgroup (values indexed by the subgroup's classes).
pub fn induced_character(
    g: &FiniteGroup,
    h: &FiniteGroup,
    sigma: &RepCharacter,
    exponent: u32,
) -> Result<RepCharacter> {
    if !g.contains_subgroup(h) {
        return Err(Error::TableMismatch("not a subgroup".into()));
    }
    let mut values = Vec::with_capacity(g.class_count());
    for class in &g.classes {
        let x = class.rep;
        let mut acc = Cyc::zero(exponent);
        for y in 0..g.order() {
            let conj = g.mul_idx(g.mul_idx(g.inv_idx(y), x), y);
            if let Some(hidx) = h.index_of(g.elem(conj)) {
                acc = acc.add(&embed(&sigma.values[h.class_of(hidx)], exponent)?);
            }
        }
        let v = acc
            .divide_exact(h.order() as i64)
            .ok_or_else(|| Error::NonIntegerMultiplicity("induction failed".into()))?;
        values.push(v);
    }
    Ok(RepCharacter { values })
}

/// Report of the two index-multiplicity identities over a subgroup pair,
/// with the regular-representation multiplicity taken as the degree.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub index: u64,
    pub first_identity_checked: usize,
    pub second_identity_checked: usize,
    pub violations: Vec<String>,
    pub pass: bool,
}

/// Verify, exactly and for every pair of irreducibles, that the index times
/// the small multiplicity equals the branched sum of the big ones, and that
/// each degree decomposes through the restriction.
pub fn verify_identities(
    h: &FiniteGroup,
    ht: &CharacterTable,
    h0: &FiniteGroup,
    h0t: &CharacterTable,
) -> Result<IdentityReport> {
    let index = (h.order() / h0.order()) as u64;
    let mut violations = Vec::new();
    let mut first = 0usize;
    let mut second = 0usize;
    // [H:H0] deg(sigma) = sum_pi branch(pi, sigma) deg(pi)
    for sigma in 0..h0t.irreps.len() {
        let mut rhs = 0u64;
        for pi in 0..ht.irreps.len() {
            rhs += branch_mult(h, ht, pi, h0, h0t, sigma)? * ht.irreps[pi].degree;
        }
        let lhs = index * h0t.irreps[sigma].degree;
        first += 1;
        if lhs != rhs {
            violations.push(format!(
                "index identity fails at sigma={sigma}: {lhs} != {rhs}"
            ));
        }
    }
    // deg(pi) = sum_sigma branch(pi, sigma) deg(sigma)
    for pi in 0..ht.irreps.len() {
        let mut rhs = 0u64;
        for sigma in 0..h0t.irreps.len() {
            rhs += branch_mult(h, ht, pi, h0, h0t, sigma)? * h0t.irreps[sigma].degree;
        }
        let lhs = ht.irreps[pi].degree;
        second += 1;
        if lhs != rhs {
            violations.push(format!(
                "degree identity fails at pi={pi}: {lhs} != {rhs}"
            ));
        }
    }
    Ok(IdentityReport {
        index,
        first_identity_checked: first,
        second_identity_checked: second,
        pass: violations.is_empty(),
        violations,
    })
}

/// Margin list for the bounded-multiplicity check `mult <= m * degree`.
#[derive(Debug, Clone, Serialize)]
pub struct StrongAdmReport {
    pub bound: u64,
    pub per_irrep: Vec<StrongAdmEntry>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrongAdmEntry {
    pub degree: u64,
    pub multiplicity: u64,
    pub limit: u64,
    pub ok: bool,
}

pub fn strong_adm_check(
    table: &CharacterTable,
    rep: &RepCharacter,
    m: u64,
) -> Result<StrongAdmReport> {
    let mut per_irrep = Vec::with_capacity(table.irreps.len());
    let mut pass = true;
    for pi in 0..table.irreps.len() {
        let mult = mult_in(table, pi, rep)?;
        let limit = m * table.irreps[pi].degree;
        let ok = mult <= limit;
        pass &= ok;
        per_irrep.push(StrongAdmEntry {
            degree: table.irreps[pi].degree,
            multiplicity: mult,
            limit,
            ok,
        });
    }
    Ok(StrongAdmReport {
        bound: m,
        per_irrep,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::{self, character_table};

    #[test]
    fn regular_representation_multiplicities() {
        let g = finite::symmetric_3().unwrap();
        let t = character_table(&g).unwrap();
        let reg = regular_character(&g, t.exponent);
        for (pi, irr) in t.irreps.iter().enumerate() {
            assert_eq!(mult_in(&t, pi, &reg).unwrap(), irr.degree);
        }
        // the zero representation contains nothing
        let zero = RepCharacter::from_integers(t.exponent, &vec![0; g.class_count()]);
        for pi in 0..t.irreps.len() {
            assert_eq!(mult_in(&t, pi, &zero).unwrap(), 0);
        }
    }

    #[test]
    fn trivial_in_natural_permutation_action() {
        let g = finite::symmetric_3().unwrap();
        let t = character_table(&g).unwrap();
        let perm = natural_permutation_character(&g, t.exponent).unwrap();
        // the trivial character is the degree-1 row with all-ones values
        let trivial = t
            .irreps
            .iter()
            .position(|irr| {
                irr.degree == 1
                    && irr
                        .values
                        .iter()
                        .all(|v| v.eq(&crate::finite::cyclotomic::Cyc::integer(t.exponent, 1)))
            })
            .unwrap();
        assert_eq!(mult_in(&t, trivial, &perm).unwrap(), 1);
    }

    #[test]
    fn branching_s3_to_a3() {
        let s3 = finite::symmetric_3().unwrap();
        let a3 = finite::alternating_3().unwrap();
        let ts3 = character_table(&s3).unwrap();
        let ta3 = character_table(&a3).unwrap();
        // restriction of an irreducible to the full group is itself
        for pi in 0..ts3.irreps.len() {
            for sigma in 0..ts3.irreps.len() {
                let m = branch_mult(&s3, &ts3, pi, &s3, &ts3, sigma).unwrap();
                assert_eq!(m, u64::from(pi == sigma));
            }
        }
        // the two-dimensional character restricted to the rotation subgroup
        // contains each nontrivial character once and the trivial one never
        let two = ts3.irreps.iter().position(|i| i.degree == 2).unwrap();
        let trivial_a3 = ta3
            .irreps
            .iter()
            .position(|irr| {
                irr.values
                    .iter()
                    .all(|v| v.eq(&crate::finite::cyclotomic::Cyc::integer(ta3.exponent, 1)))
            })
            .unwrap();
        let mut total = 0;
        for sigma in 0..ta3.irreps.len() {
            let m = branch_mult(&s3, &ts3, two, &a3, &ta3, sigma).unwrap();
            total += m;
            if sigma == trivial_a3 {
                assert_eq!(m, 0);
            } else {
                assert_eq!(m, 1);
            }
        }
        assert_eq!(total, 2);
    }

    #[test]
    fn frobenius_reciprocity_spot_check() {
        let s3 = finite::symmetric_3().unwrap();
        let a3 = finite::alternating_3().unwrap();
        let ts3 = character_table(&s3).unwrap();
        let ta3 = character_table(&a3).unwrap();
        for pi in 0..ts3.irreps.len() {
            for sigma in 0..ta3.irreps.len() {
                let lhs = branch_mult(&s3, &ts3, pi, &a3, &ta3, sigma).unwrap();
                let ind = induced_character(
                    &s3,
                    &a3,
                    &RepCharacter {
                        values: ta3.irreps[sigma].values.clone(),
                    },
                    ts3.exponent,
                )
                .unwrap();
                let rhs = mult_in(&ts3, pi, &ind).unwrap();
                assert_eq!(lhs, rhs, "reciprocity at pi={pi}, sigma={sigma}");
            }
        }
    }

    #[test]
    fn identities_on_the_subgroup_pairs() {
        let s3 = finite::symmetric_3().unwrap();
        let a3 = finite::alternating_3().unwrap();
        let rep = verify_identities(
            &s3,
            &character_table(&s3).unwrap(),
            &a3,
            &character_table(&a3).unwrap(),
        )
        .unwrap();
        assert!(rep.pass, "{:?}", rep.violations);
        assert_eq!(rep.index, 2);
        // degenerate pair: both identities reduce to deg = deg
        let rep = verify_identities(
            &s3,
            &character_table(&s3).unwrap(),
            &s3,
            &character_table(&s3).unwrap(),
        )
        .unwrap();
        assert!(rep.pass);
        let sl23 = finite::sl2_mod(3).unwrap();
        let q8 = finite::quaternion_8().unwrap();
        let rep = verify_identities(
            &sl23,
            &character_table(&sl23).unwrap(),
            &q8,
            &character_table(&q8).unwrap(),
        )
        .unwrap();
        assert!(rep.pass, "{:?}", rep.violations);
    }

    #[test]
    fn steinberg_branching_to_the_borel() {
        let g = finite::sl2_mod(5).unwrap();
        let b = finite::borel_sl2_5().unwrap();
        let tg = character_table(&g).unwrap();
        let tb = character_table(&b).unwrap();
        let st = tg.irreps.iter().position(|i| i.degree == 5).unwrap();
        let mut total = 0u64;
        for sigma in 0..tb.irreps.len() {
            total += branch_mult(&g, &tg, st, &b, &tb, sigma).unwrap() * tb.irreps[sigma].degree;
        }
        assert_eq!(total, 5);
    }

    #[test]
    fn bounded_multiplicity_checks() {
        let g = finite::sl2_mod(5).unwrap();
        let t = character_table(&g).unwrap();
        // the regular representation meets the bound with equality
        let reg = regular_character(&g, t.exponent);
        let rep = strong_adm_check(&t, &reg, 1).unwrap();
        assert!(rep.pass);
        assert!(rep.per_irrep.iter().all(|e| e.multiplicity == e.limit));
        // the coset module of the order-20 subgroup: trivial + degree 5, both once
        let b = finite::borel_sl2_5().unwrap();
        let perm = permutation_character_on_cosets(&g, &b, t.exponent).unwrap();
        let rep = strong_adm_check(&t, &perm, 1).unwrap();
        assert!(rep.pass);
        let nonzero: Vec<(u64, u64)> = rep
            .per_irrep
            .iter()
            .filter(|e| e.multiplicity > 0)
            .map(|e| (e.degree, e.multiplicity))
            .collect();
        assert_eq!(nonzero, vec![(1, 1), (5, 1)]);
        // doubling the regular representation breaks the bound
        let rep = strong_adm_check(&t, &reg.scale(2), 1).unwrap();
        assert!(!rep.pass);
    }
}
