//! Small finite groups with exact character-table machinery.
//!
//! Groups are given by generators (permutations or 2x2 matrices over
//! `Z/p^n`), enumerated by closure, with conjugacy classes computed by orbit
//! refinement. Character tables come from the modular eigenvalue method in
//! [`dixon`], lifted to exact cyclotomic integers from [`cyclotomic`], and
//! multiplicities are exact inner products in [`reps`].

pub mod cyclotomic;
pub mod dixon;
pub mod reps;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dixon::character_table;
pub use reps::{
    branch_mult, induced_character, mult_in, permutation_character_on_cosets,
    regular_character, strong_adm_check, verify_identities, CharacterTable, Irrep,
    RepCharacter, StrongAdmReport,
};

/// Default cap on the group order.
pub const ORDER_BOUND: usize = 10_000;

/// A group element: a permutation of `0..degree` or a 2x2 matrix modulo a
/// fixed modulus (the context lives in the owning group).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Elem {
    Perm(Vec<u16>),
    Mat2([u64; 4]),
}

impl Elem {
    fn mul(&self, other: &Elem, modulus: u64) -> Elem {
        match (self, other) {
            (Elem::Perm(a), Elem::Perm(b)) => {
                // (a b)(x) = a(b(x))
                Elem::Perm(b.iter().map(|&x| a[x as usize]).collect())
            }
            (Elem::Mat2(x), Elem::Mat2(y)) => {
                let m = modulus;
                Elem::Mat2([
                    (x[0] * y[0] + x[1] * y[2]) % m,
                    (x[0] * y[1] + x[1] * y[3]) % m,
                    (x[2] * y[0] + x[3] * y[2]) % m,
                    (x[2] * y[1] + x[3] * y[3]) % m,
                ])
            }
            _ => panic!("mixed element kinds"),
        }
    }

    fn identity_like(&self, modulus: u64) -> Elem {
        match self {
            Elem::Perm(p) => Elem::Perm((0..p.len() as u16).collect()),
            Elem::Mat2(_) => {
                let _ = modulus;
                Elem::Mat2([1, 0, 0, 1])
            }
        }
    }
}

/// One conjugacy class: a representative index and the class size.
#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub rep: usize,
    pub size: usize,
}

/// A fully enumerated finite group.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    modulus: u64,
    elems: Vec<Elem>,
    index: HashMap<Elem, usize>,
    inverse: Vec<usize>,
    pub classes: Vec<ClassInfo>,
    class_of: Vec<usize>,
    generators: Vec<usize>,
}

impl FiniteGroup {
    /// Enumerate the group generated by the given elements.
    pub fn generate(generators: Vec<Elem>, modulus: u64, bound: usize) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Invalid("need at least one generator".into()));
        }
        let id = generators[0].identity_like(modulus);
        let mut elems = vec![id.clone()];
        let mut index = HashMap::new();
        index.insert(id, 0usize);
        let mut frontier = vec![0usize];
        while let Some(i) = frontier.pop() {
            for g in &generators {
                let prod = elems[i].mul(g, modulus);
                if !index.contains_key(&prod) {
                    let k = elems.len();
                    if k >= bound {
                        return Err(Error::OrderBound(bound));
                    }
                    index.insert(prod.clone(), k);
                    elems.push(prod);
                    frontier.push(k);
                }
            }
        }
        let order = elems.len();
        // inverses by scanning (x * y = id)
        let mut inverse = vec![usize::MAX; order];
        for i in 0..order {
            if inverse[i] != usize::MAX {
                continue;
            }
            for j in 0..order {
                if elems[i].mul(&elems[j], modulus) == elems[0] {
                    inverse[i] = j;
                    inverse[j] = i;
                    break;
                }
            }
        }
        // conjugacy classes by generator-orbit closure
        let gen_idx: Vec<usize> = generators.iter().map(|g| index[g]).collect();
        let mut class_of = vec![usize::MAX; order];
        let mut classes = Vec::new();
        for start in 0..order {
            if class_of[start] != usize::MAX {
                continue;
            }
            let c = classes.len();
            let mut stack = vec![start];
            class_of[start] = c;
            let mut size = 0usize;
            while let Some(x) = stack.pop() {
                size += 1;
                for &g in &gen_idx {
                    let gi = inverse[g];
                    let y = index[&elems[g].mul(&elems[x].mul(&elems[gi], modulus), modulus)];
                    if class_of[y] == usize::MAX {
                        class_of[y] = c;
                        stack.push(y);
                    }
                }
            }
            classes.push(ClassInfo { rep: start, size });
        }
        Ok(FiniteGroup {
            modulus,
            elems,
            index,
            inverse,
            classes,
            class_of,
            generators: gen_idx,
        })
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn elems(&self) -> &[Elem] {
        &self.elems
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn elem(&self, i: usize) -> &Elem {
        &self.elems[i]
    }

    pub fn index_of(&self, e: &Elem) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn mul_idx(&self, i: usize, j: usize) -> usize {
        self.index[&self.elems[i].mul(&self.elems[j], self.modulus)]
    }

    pub fn inv_idx(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.class_of[i]
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.size).collect()
    }

    /// Class of the inverse, per class index.
    pub fn inverse_class(&self, c: usize) -> usize {
        self.class_of[self.inverse[self.classes[c].rep]]
    }

    pub fn pow_idx(&self, i: usize, k: u64) -> usize {
        let mut acc = 0usize; // identity
        let mut base = i;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul_idx(acc, base);
            }
            base = self.mul_idx(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn element_order(&self, i: usize) -> u64 {
        let mut acc = i;
        let mut n = 1u64;
        while acc != 0 {
            acc = self.mul_idx(acc, i);
            n += 1;
        }
        n
    }

    /// Exponent: least common multiple of the element orders.
    pub fn exponent(&self) -> u64 {
        let mut e = 1u64;
        for i in 0..self.order() {
            let o = self.element_order(i);
            e = lcm(e, o);
        }
        e
    }

    /// Is `other` (same element kind) contained in this group, element by
    /// element?
    pub fn contains_subgroup(&self, other: &FiniteGroup) -> bool {
        other.elems.iter().all(|e| self.index.contains_key(e))
    }

    /// Left cosets of a subgroup, as sorted element-index sets.
    pub fn left_cosets(&self, sub: &FiniteGroup) -> Result<Vec<Vec<usize>>> {
        if !self.contains_subgroup(sub) {
            return Err(Error::TableMismatch("not a subgroup".into()));
        }
        let sub_idx: Vec<usize> = sub
            .elems
            .iter()
            .map(|e| self.index[e])
            .collect();
        let mut seen = vec![false; self.order()];
        let mut cosets = Vec::new();
        for g in 0..self.order() {
            if seen[g] {
                continue;
            }
            let mut coset: Vec<usize> = sub_idx.iter().map(|&h| self.mul_idx(g, h)).collect();
            coset.sort_unstable();
            for &x in &coset {
                seen[x] = true;
            }
            cosets.push(coset);
        }
        Ok(cosets)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

// ----- stock groups used by the verification suites -----

/// Cyclic group of order `n` as rotation permutations.
pub fn cyclic(n: u16) -> Result<FiniteGroup> {
    let gen: Vec<u16> = (0..n).map(|i| (i + 1) % n).collect();
    FiniteGroup::generate(vec![Elem::Perm(gen)], 0, ORDER_BOUND)
}

/// Symmetric group on three letters.
pub fn symmetric_3() -> Result<FiniteGroup> {
    FiniteGroup::generate(
        vec![Elem::Perm(vec![1, 0, 2]), Elem::Perm(vec![1, 2, 0])],
        0,
        ORDER_BOUND,
    )
}

/// Alternating group inside [`symmetric_3`] (same permutation encoding).
pub fn alternating_3() -> Result<FiniteGroup> {
    FiniteGroup::generate(vec![Elem::Perm(vec![1, 2, 0])], 0, ORDER_BOUND)
}

/// The special linear group of 2x2 matrices over `Z/m` (m prime here).
pub fn sl2_mod(m: u64) -> Result<FiniteGroup> {
    FiniteGroup::generate(
        vec![Elem::Mat2([1, 1, 0, 1]), Elem::Mat2([0, m - 1, 1, 0])],
        m,
        ORDER_BOUND,
    )
}

/// The quaternion group of order eight inside `sl2_mod(3)`.
pub fn quaternion_8() -> Result<FiniteGroup> {
    FiniteGroup::generate(
        vec![Elem::Mat2([0, 2, 1, 0]), Elem::Mat2([1, 1, 1, 2])],
        3,
        ORDER_BOUND,
    )
}

/// The upper-triangular subgroup of order 20 inside `sl2_mod(5)`.
pub fn borel_sl2_5() -> Result<FiniteGroup> {
    FiniteGroup::generate(
        vec![Elem::Mat2([2, 0, 0, 3]), Elem::Mat2([1, 1, 0, 1])],
        5,
        ORDER_BOUND,
    )
}

// ----- group input files -----

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum GroupDto {
    Perm {
        degree: u16,
        /// Generators as lists of cycles, each cycle a list of points.
        generators: Vec<Vec<Vec<u16>>>,
    },
    Mat2 {
        modulus: u64,
        generators: Vec<[u64; 4]>,
    },
}

/// Parse a group description file (JSON: permutation cycles or matrix
/// entries mod `p^n`).
pub fn parse_group(text: &str) -> Result<FiniteGroup> {
    let dto: GroupDto = serde_json::from_str(text)?;
    match dto {
        GroupDto::Perm { degree, generators } => {
            let mut gens = Vec::new();
            for cycles in &generators {
                let mut perm: Vec<u16> = (0..degree).collect();
                for cycle in cycles {
                    for w in 0..cycle.len() {
                        let from = cycle[w];
                        let to = cycle[(w + 1) % cycle.len()];
                        if from >= degree || to >= degree {
                            return Err(Error::Invalid(format!(
                                "cycle point {from} out of range"
                            )));
                        }
                        perm[from as usize] = to;
                    }
                }
                gens.push(Elem::Perm(perm));
            }
            FiniteGroup::generate(gens, 0, ORDER_BOUND)
        }
        GroupDto::Mat2 { modulus, generators } => {
            let gens = generators
                .iter()
                .map(|m| Elem::Mat2([m[0] % modulus, m[1] % modulus, m[2] % modulus, m[3] % modulus]))
                .collect();
            FiniteGroup::generate(gens, modulus, ORDER_BOUND)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_three_has_three_singleton_classes() {
        let g = cyclic(3).unwrap();
        assert_eq!(g.order(), 3);
        assert_eq!(g.class_count(), 3);
        assert!(g.classes.iter().all(|c| c.size == 1));
    }

    #[test]
    fn symmetric_three_classes() {
        let g = symmetric_3().unwrap();
        assert_eq!(g.order(), 6);
        let mut sizes = g.class_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2, 3]);
    }

    #[test]
    fn sl2_f3_has_seven_classes() {
        let g = sl2_mod(3).unwrap();
        assert_eq!(g.order(), 24);
        assert_eq!(g.class_count(), 7);
        assert_eq!(g.class_sizes().iter().sum::<usize>(), 24);
    }

    #[test]
    fn sl2_f5_and_subgroups() {
        let g = sl2_mod(5).unwrap();
        assert_eq!(g.order(), 120);
        assert_eq!(g.exponent(), 60);
        let b = borel_sl2_5().unwrap();
        assert_eq!(b.order(), 20);
        assert!(g.contains_subgroup(&b));
        let q = quaternion_8().unwrap();
        assert_eq!(q.order(), 8);
        assert!(sl2_mod(3).unwrap().contains_subgroup(&q));
        // every element of Q8 except +-1 has order 4
        let orders: Vec<u64> = (0..q.order()).map(|i| q.element_order(i)).collect();
        assert_eq!(orders.iter().filter(|&&o| o == 4).count(), 6);
    }

    #[test]
    fn cosets_partition_the_group() {
        let g = symmetric_3().unwrap();
        let h = alternating_3().unwrap();
        let cosets = g.left_cosets(&h).unwrap();
        assert_eq!(cosets.len(), 2);
        assert!(cosets.iter().all(|c| c.len() == 3));
    }

    #[test]
    fn group_file_parsing() {
        let text = r#"{"kind":"perm","degree":3,"generators":[[[0,1]],[[0,1,2]]]}"#;
        let g = parse_group(text).unwrap();
        assert_eq!(g.order(), 6);
        let text = r#"{"kind":"mat2","modulus":3,"generators":[[1,1,0,1],[0,2,1,0]]}"#;
        let g = parse_group(text).unwrap();
        assert_eq!(g.order(), 24);
        assert!(parse_group(r#"{"kind":"perm","degree":2,"generators":[[[0,7]]]}"#).is_err());
    }

    #[test]
    fn order_bound_is_enforced() {
        let gen: Vec<u16> = (0..50).map(|i| (i + 1) % 50).collect();
        match FiniteGroup::generate(vec![Elem::Perm(gen)], 0, 10) {
            Err(Error::OrderBound(10)) => {}
            other => panic!("expected order bound error, got {other:?}"),
        }
    }
}
