//! Finite-level model of the smooth induction from the Borel subgroup: a
//! twisted permutation module on the projective line over `Z/p^n`.
//!
//! Basis points are normalized unimodular pairs, `[1 : b]` with `b` running
//! over `Z/p^n` and `[a : 1]` with `a` in `p Z/p^n`. The group acts through
//! the factorization `g^{-1} lift(point) = lift(point') * q` with `q` lower
//! triangular; the locally constant character of the torus quotient of `q`
//! supplies the scalar factor. Acting by elements with non-unit entries
//! raises the level by the minimal amount that keeps the result well defined.

use std::collections::HashMap;

use crate::characters::SmoothCharacter;
use crate::error::{Error, Result};
use crate::finite::cyclotomic::Cyc;
use crate::linalg::PMatrix;
use crate::padic::{self, PadicScalar};
use crate::pseries::GroupElement;

/// A point of the projective line over `Z/p^n` in normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum P1Point {
    /// `[1 : b]`, `b` mod `p^n`.
    W { b: u128 },
    /// `[a : 1]`, `a` in `p Z` mod `p^n`.
    A { a: u128 },
}

impl P1Point {
    /// Parent point one level down.
    fn parent(&self, p: u64, level: u32) -> P1Point {
        let m = padic::ppow(p, level - 1);
        match self {
            P1Point::W { b } => P1Point::W { b: b % m },
            P1Point::A { a } => P1Point::A { a: a % m },
        }
    }

    pub fn describe(&self) -> String {
        match self {
            P1Point::W { b } => format!("[1:{b}]"),
            P1Point::A { a } => format!("[{a}:1]"),
        }
    }
}

/// The induced module at a fixed level.
#[derive(Debug, Clone)]
pub struct SmoothPSModule {
    prime: u64,
    level: u32,
    chi: SmoothCharacter,
    points: Vec<P1Point>,
    index: HashMap<P1Point, usize>,
}

/// A vector tagged with the level its coordinates refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothVector {
    pub level: u32,
    pub coeffs: Vec<PadicScalar>,
}

/// Enumerate the points of the projective line over `Z/p^n`.
pub fn p1_points(p: u64, n: u32) -> Vec<P1Point> {
    let mut out = Vec::new();
    for b in 0..padic::ppow(p, n) {
        out.push(P1Point::W { b });
    }
    for k in 0..padic::ppow(p, n - 1) {
        out.push(P1Point::A { a: k * p as u128 });
    }
    out
}

/// Factor `M = k * b` with `k` integral of unit determinant and `b` lower
/// triangular, completing the primitive second column. Integral input is
/// returned unchanged with `b = 1`.
pub fn iwasawa_factor(m: &GroupElement) -> Result<(GroupElement, GroupElement)> {
    let p = m.prime();
    let wp = padic::max_precision(p);
    if m.is_integral() {
        return Ok((m.clone(), GroupElement::identity(p, wp)?));
    }
    let [_, b_ent, _, d_ent] = m.entries();
    let vb = match b_ent.valuation() {
        crate::padic::Valuation::Finite(v) => v,
        crate::padic::Valuation::Infinite => i64::MAX,
        crate::padic::Valuation::AtLeast(_) => {
            return Err(Error::InsufficientPrecision(
                "second column valuation unresolved".into(),
            ))
        }
    };
    let vd = match d_ent.valuation() {
        crate::padic::Valuation::Finite(v) => v,
        crate::padic::Valuation::Infinite => i64::MAX,
        crate::padic::Valuation::AtLeast(_) => {
            return Err(Error::InsufficientPrecision(
                "second column valuation unresolved".into(),
            ))
        }
    };
    if vb == i64::MAX && vd == i64::MAX {
        return Err(Error::Invalid("zero column in a determinant-1 matrix".into()));
    }
    let v = vb.min(vd);
    let scale = PadicScalar::p_power(p, -v, wp)?;
    let bp = b_ent.mul(&scale)?;
    let dp = d_ent.mul(&scale)?;
    let zero = PadicScalar::zero(p);
    let k = if dp.val_exact() == Some(0) {
        GroupElement::new([dp.inv()?, bp.clone(), zero, dp.clone()])?
    } else {
        GroupElement::new([zero, bp.clone(), bp.inv()?.neg(), dp.clone()])?
    };
    let b = k.inverse()?.mul(m)?;
    Ok((k, b))
}

impl SmoothPSModule {
    pub fn new(p: u64, level: u32, chi: SmoothCharacter) -> Result<Self> {
        if level == 0 {
            return Err(Error::Invalid("level must be at least 1".into()));
        }
        if chi.prime() != p {
            return Err(Error::PrimeMismatch(chi.prime(), p));
        }
        if chi.conductor() > level {
            return Err(Error::Invalid(format!(
                "conductor {} exceeds level {level}",
                chi.conductor()
            )));
        }
        let points = p1_points(p, level);
        let index = points.iter().enumerate().map(|(i, pt)| (*pt, i)).collect();
        Ok(SmoothPSModule {
            prime: p,
            level,
            chi,
            points,
            index,
        })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn chi(&self) -> &SmoothCharacter {
        &self.chi
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[P1Point] {
        &self.points
    }

    pub fn at_level(&self, level: u32) -> Result<SmoothPSModule> {
        SmoothPSModule::new(self.prime, level, self.chi.clone())
    }

    /// Integral lift of a basis point: `u^-(a)` for `[a : 1]` and
    /// `u(b) w = (0 -1; 1 -b)` for `[1 : b]`.
    pub fn lift(&self, pt: &P1Point, prec: u32) -> Result<GroupElement> {
        let p = self.prime;
        match pt {
            P1Point::A { a } => GroupElement::from_integers(p, [1, *a as i128, 0, 1], prec),
            P1Point::W { b } => GroupElement::from_integers(p, [0, -1, 1, -(*b as i128)], prec),
        }
    }

    /// Normalize a group element to its point at the given level and the
    /// accompanying character factor: `M = lift(point) * q` with `q` lower
    /// triangular, the factor being the character at the torus part of
    /// `q^{-1}`.
    fn normalize(&self, m: &GroupElement, level: u32) -> Result<(P1Point, PadicScalar)> {
        let p = self.prime;
        let [_, b_ent, _, d_ent] = m.entries();
        let vb = b_ent.val_floor();
        let vd = d_ent.val_floor();
        if !b_ent.is_certainly_nonzero() && !b_ent.is_exact_zero() && vb <= vd {
            return Err(Error::InsufficientPrecision(
                "cannot resolve the image point".into(),
            ));
        }
        let v = vb.min(vd);
        let wp = padic::max_precision(p);
        let scale = PadicScalar::p_power(p, -v, wp)?;
        let bp = b_ent.mul(&scale)?;
        let dp = d_ent.mul(&scale)?;
        if bp.val_exact() == Some(0) {
            // [1 : d/b]; the torus part of q is -m12
            let b = dp.div(&bp)?.residue_mod(level)?;
            let factor = self
                .chi
                .eval(&PadicScalar::from_integer(p, -1, wp)?.div(b_ent)?)?;
            Ok((P1Point::W { b }, factor))
        } else if dp.val_exact() == Some(0) {
            let a = bp.div(&dp)?.residue_mod(level)?;
            let factor = self
                .chi
                .eval(&PadicScalar::one(p, wp)?.div(d_ent)?)?;
            Ok((P1Point::A { a }, factor))
        } else {
            Err(Error::InsufficientPrecision(
                "cannot normalize the second column".into(),
            ))
        }
    }

    /// Left translation on a vector; the level rises by at most twice the
    /// denominator exponent of `g` and is compressed back to the minimal
    /// level (never below the input level) at which the result is constant
    /// on classes.
    pub fn act(&self, g: &GroupElement, v: &SmoothVector) -> Result<SmoothVector> {
        let p = self.prime;
        if g.prime() != p {
            return Err(Error::PrimeMismatch(g.prime(), p));
        }
        let ginv = g.inverse()?;
        let e = ginv.denominator_exponent().max(g.denominator_exponent());
        let n_out = v.level + 2 * e as u32;
        let out_points = p1_points(p, n_out);
        let in_module = self.at_level(v.level)?;
        if v.coeffs.len() != in_module.dim() {
            return Err(Error::Invalid("vector length mismatch".into()));
        }
        let wp = padic::max_precision(p);
        let mut coeffs = Vec::with_capacity(out_points.len());
        for pt in &out_points {
            let m = ginv.mul(&in_module.lift_at(pt, n_out, wp)?)?;
            let (src, factor) = self.normalize(&m, v.level)?;
            let idx = in_module.index[&src];
            coeffs.push(factor.mul(&v.coeffs[idx])?);
        }
        let mut out = SmoothVector {
            level: n_out,
            coeffs,
        };
        // compress to the minimal well-defined level, but not below the input
        while out.level > v.level {
            match self.try_compress(&out)? {
                Some(smaller) => out = smaller,
                None => break,
            }
        }
        Ok(out)
    }

    fn lift_at(&self, pt: &P1Point, _level: u32, prec: u32) -> Result<GroupElement> {
        self.lift(pt, prec)
    }

    fn try_compress(&self, v: &SmoothVector) -> Result<Option<SmoothVector>> {
        if v.level <= 1 {
            return Ok(None);
        }
        let p = self.prime;
        let fine = p1_points(p, v.level);
        let coarse = p1_points(p, v.level - 1);
        let coarse_index: HashMap<P1Point, usize> =
            coarse.iter().enumerate().map(|(i, pt)| (*pt, i)).collect();
        let mut reps: Vec<Option<PadicScalar>> = vec![None; coarse.len()];
        for (i, pt) in fine.iter().enumerate() {
            let parent = pt.parent(p, v.level);
            let j = coarse_index[&parent];
            match &reps[j] {
                None => reps[j] = Some(v.coeffs[i].clone()),
                Some(prev) => {
                    let floor = prev
                        .abs_precision()
                        .unwrap_or(i64::MAX)
                        .min(v.coeffs[i].abs_precision().unwrap_or(i64::MAX));
                    let floor = if floor == i64::MAX { 1 << 20 } else { floor };
                    if !prev.eq_mod(&v.coeffs[i], floor) {
                        return Ok(None);
                    }
                    let merged = prev.reduce_abs(floor);
                    reps[j] = Some(merged);
                }
            }
        }
        Ok(Some(SmoothVector {
            level: v.level - 1,
            coeffs: reps.into_iter().map(|r| r.unwrap()).collect(),
        }))
    }

    /// Refine a vector to a higher level (inclusion of the submodule of
    /// coarser functions).
    pub fn refine_vector(&self, v: &SmoothVector, level: u32) -> Result<SmoothVector> {
        if level < v.level {
            return Err(Error::Invalid("cannot refine downwards".into()));
        }
        let p = self.prime;
        let src = p1_points(p, v.level);
        let src_index: HashMap<P1Point, usize> =
            src.iter().enumerate().map(|(i, pt)| (*pt, i)).collect();
        let coeffs = p1_points(p, level)
            .iter()
            .map(|pt| {
                let mut q = *pt;
                for l in (v.level + 1..=level).rev() {
                    q = q.parent(p, l);
                }
                v.coeffs[src_index[&q]].clone()
            })
            .collect();
        Ok(SmoothVector { level, coeffs })
    }

    /// Matrix of an integral element at the module's own level.
    pub fn action_matrix(&self, g: &GroupElement) -> Result<PMatrix> {
        if !g.is_integral() {
            return Err(Error::Invalid(
                "level-preserving matrix needs an integral element".into(),
            ));
        }
        let (mat, out_level) = self.action_matrix_from(g, self.level)?;
        debug_assert_eq!(out_level, self.level);
        Ok(mat)
    }

    /// Matrix of the action from level `n` into the raised level; rows are
    /// indexed by the refined points.
    pub fn action_matrix_from(&self, g: &GroupElement, n: u32) -> Result<(PMatrix, u32)> {
        let p = self.prime;
        let ginv = g.inverse()?;
        let e = ginv.denominator_exponent().max(g.denominator_exponent());
        let n_out = n + 2 * e as u32;
        let in_module = self.at_level(n)?;
        let rows = p1_points(p, n_out);
        let wp = padic::max_precision(p);
        let mut mat = PMatrix::zero(p, rows.len(), in_module.dim());
        for (i, pt) in rows.iter().enumerate() {
            let m = ginv.mul(&in_module.lift_at(pt, n_out, wp)?)?;
            let (src, factor) = self.normalize(&m, n)?;
            mat.set(i, in_module.index[&src], factor);
        }
        Ok((mat, n_out))
    }

    /// Matrix of the inclusion of level-`n` vectors into level `n_out`.
    pub fn refinement_matrix(&self, n: u32, n_out: u32, prec: u32) -> Result<PMatrix> {
        let p = self.prime;
        let src = p1_points(p, n);
        let src_index: HashMap<P1Point, usize> =
            src.iter().enumerate().map(|(i, pt)| (*pt, i)).collect();
        let rows = p1_points(p, n_out);
        let one = PadicScalar::one(p, prec)?;
        let mut mat = PMatrix::zero(p, rows.len(), src.len());
        for (i, pt) in rows.iter().enumerate() {
            let mut q = *pt;
            for l in (n + 1..=n_out).rev() {
                q = q.parent(p, l);
            }
            mat.set(i, src_index[&q], one.clone());
        }
        Ok(mat)
    }

    /// Exact kernel of the stacked `(action - inclusion)` conditions over the
    /// given generators: the simultaneously fixed vectors at this level.
    pub fn invariant_vectors(
        &self,
        generators: &[GroupElement],
        cutoff: i64,
        prec: u32,
    ) -> Result<Vec<Vec<PadicScalar>>> {
        let mut stacked: Option<PMatrix> = None;
        for g in generators {
            let (a, n_out) = self.action_matrix_from(g, self.level)?;
            let r = self.refinement_matrix(self.level, n_out, prec)?;
            let block = a.sub(&r)?;
            stacked = Some(match stacked {
                None => block,
                Some(m) => m.vstack(&block)?,
            });
        }
        let mat = stacked.ok_or_else(|| Error::Invalid("no generators".into()))?;
        mat.kernel(cutoff)
    }

    /// Exact kernel of the transposed conditions: functionals fixed by the
    /// dual action of every generator, computed at a level high enough to
    /// express the conditions coming from non-integral generators, then
    /// restricted back. Returns the functional space dimension, the
    /// functional at this level (when one-dimensional) and the dimension of
    /// its kernel hyperplane.
    pub fn coinvariant_functional(
        &self,
        generators: &[GroupElement],
        cutoff: i64,
        prec: u32,
    ) -> Result<CoinvariantReport> {
        let p = self.prime;
        let e_max = generators
            .iter()
            .map(|g| {
                g.denominator_exponent()
                    .max(g.inverse().map(|i| i.denominator_exponent()).unwrap_or(0))
            })
            .max()
            .unwrap_or(0) as u32;
        let top = self.level + 2 * e_max;
        let mut stacked: Option<PMatrix> = None;
        for g in generators {
            let e = g
                .denominator_exponent()
                .max(g.inverse()?.denominator_exponent()) as u32;
            let from = top - 2 * e;
            let (a, n_out) = self.action_matrix_from(g, from)?;
            debug_assert_eq!(n_out, top);
            let r = self.refinement_matrix(from, top, prec)?;
            let block = a.sub(&r)?.transpose();
            stacked = Some(match stacked {
                None => block,
                Some(m) => m.vstack(&block)?,
            });
        }
        let mat = stacked.ok_or_else(|| Error::Invalid("no generators".into()))?;
        let kernel = mat.kernel(cutoff)?;
        if kernel.len() != 1 {
            return Ok(CoinvariantReport {
                space_dim: kernel.len(),
                functional: None,
                kernel_dim: None,
            });
        }
        // restrict the functional from the top level back to this level
        let r = self.refinement_matrix(self.level, top, prec)?;
        let phi_top = &kernel[0];
        let phi = r.transpose().matvec(phi_top)?;
        if !phi.iter().any(|c| c.is_certainly_nonzero()) {
            return Ok(CoinvariantReport {
                space_dim: 1,
                functional: None,
                kernel_dim: None,
            });
        }
        let row = PMatrix::from_fn(p, 1, phi.len(), |_, j| phi[j].clone());
        let kernel_dim = row.kernel(cutoff)?.len();
        Ok(CoinvariantReport {
            space_dim: 1,
            functional: Some(phi),
            kernel_dim: Some(kernel_dim),
        })
    }

    /// Default generator list: the two unipotents, the Weyl element, a
    /// torus unit generator, and the `p`-torus element.
    pub fn default_generators(&self, prec: u32) -> Result<Vec<GroupElement>> {
        let p = self.prime;
        let one = PadicScalar::one(p, prec)?;
        let mut gens = vec![
            GroupElement::unipotent_lower(&one)?,
            GroupElement::unipotent_upper(&one)?,
            GroupElement::weyl(p, prec)?,
        ];
        if p > 2 {
            let s = PadicScalar::from_integer(
                p,
                crate::characters::unit_group_generator(p, 1) as i128,
                prec,
            )?;
            gens.push(GroupElement::torus(&s)?);
        }
        gens.push(GroupElement::torus(&PadicScalar::p_power(p, 1, prec)?)?);
        Ok(gens)
    }

    /// Exact cyclotomic character values of the twisted permutation action
    /// for a list of integral class representatives, in terms of the
    /// reference root of unity of order `zeta_order`.
    pub fn class_function(
        &self,
        reps: &[GroupElement],
        zeta_order: u32,
    ) -> Result<Vec<Cyc>> {
        let p = self.prime;
        let wp = padic::max_precision(p);
        let mut out = Vec::with_capacity(reps.len());
        for g in reps {
            if !g.is_integral() {
                return Err(Error::Invalid("class representatives must be integral".into()));
            }
            let ginv = g.inverse()?;
            let mut tr = Cyc::zero(zeta_order);
            for pt in &self.points {
                let m = ginv.mul(&self.lift(pt, wp)?)?;
                let (src, _) = self.normalize(&m, self.level)?;
                if src != *pt {
                    continue;
                }
                // symbolic factor: the unit-part exponent of the twist
                let [_, b_ent, _, d_ent] = m.entries();
                let (arg_num, arg_den) = if b_ent.val_exact() == Some(0) {
                    (PadicScalar::from_integer(p, -1, wp)?, b_ent.clone())
                } else {
                    (PadicScalar::one(p, wp)?, d_ent.clone())
                };
                let arg = arg_num.div(&arg_den)?;
                let residue = arg.residue_mod(self.chi.conductor().max(1))?;
                let (order, power) = self.chi.unit_value_exponent(residue)?;
                if zeta_order % order != 0 {
                    return Err(Error::TableMismatch(format!(
                        "root order {order} does not divide the table exponent {zeta_order}"
                    )));
                }
                tr = tr.add(&Cyc::root_power(zeta_order, power * (zeta_order / order) as u64));
            }
            out.push(tr);
        }
        Ok(out)
    }

    /// Multiplicity of every irreducible in the level-one module, by exact
    /// character inner products of the twisted permutation character.
    pub fn decompose_level1(
        &self,
        group: &crate::finite::FiniteGroup,
        table: &crate::finite::CharacterTable,
    ) -> Result<Vec<u64>> {
        let p = self.prime;
        if self.level != 1 {
            return Err(Error::Invalid("decomposition works at level 1".into()));
        }
        if group.modulus() != p {
            return Err(Error::TableMismatch(format!(
                "group modulus {} against p = {p}",
                group.modulus()
            )));
        }
        let expected = (p * (p * p - 1)) as usize;
        if group.order() != expected {
            return Err(Error::TableMismatch(format!(
                "expected the full special linear group of order {expected}, got {}",
                group.order()
            )));
        }
        let wp = padic::max_precision(p);
        let reps = group
            .classes
            .iter()
            .map(|class| match group.elem(class.rep) {
                crate::finite::Elem::Mat2(m) => lift_unimodular(p, *m, wp),
                _ => Err(Error::TableMismatch("matrix group required".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        let values = self.class_function(&reps, table.exponent)?;
        let rep_char = crate::finite::RepCharacter { values };
        (0..table.irreps.len())
            .map(|pi| crate::finite::mult_in(table, pi, &rep_char))
            .collect()
    }

    /// Serializable dump: basis points and the character data.
    pub fn dump(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.prime,
            "level": self.level,
            "dimension": self.dim(),
            "conductor": self.chi.conductor(),
            "value_at_p": self.chi.value_at_p().to_compact(),
            "points": self.points.iter().map(|pt| pt.describe()).collect::<Vec<_>>(),
        })
    }

    /// Row-major export of an action matrix as compact scalar strings,
    /// together with the output level.
    pub fn export_action_matrix(&self, g: &GroupElement) -> Result<serde_json::Value> {
        let (mat, out_level) = self.action_matrix_from(g, self.level)?;
        let rows: Vec<Vec<String>> = (0..mat.rows())
            .map(|i| (0..mat.cols()).map(|j| mat.get(i, j).to_compact()).collect())
            .collect();
        Ok(serde_json::json!({
            "from_level": self.level,
            "to_level": out_level,
            "rows": rows,
        }))
    }
}

/// Result of the coinvariant-functional computation.
#[derive(Debug, Clone)]
pub struct CoinvariantReport {
    pub space_dim: usize,
    pub functional: Option<Vec<PadicScalar>>,
    pub kernel_dim: Option<usize>,
}

/// Lift a matrix with unimodular residues to an exact determinant-1 element:
/// keep three entries and solve for the fourth along a unit.
pub fn lift_unimodular(p: u64, m: [u64; 4], prec: u32) -> Result<GroupElement> {
    let [a, b, c, d] = m;
    let s = |n: u64| PadicScalar::from_integer(p, n as i128, prec);
    let one = PadicScalar::one(p, prec)?;
    if a % p != 0 {
        let aa = s(a)?;
        let bb = s(b)?;
        let cc = s(c)?;
        let dd = one.add(&bb.mul(&cc)?)?.div(&aa)?;
        GroupElement::new([aa, bb, cc, dd])
    } else {
        // det = 1 forces b to be a unit here
        let aa = s(a)?;
        let bb = s(b)?;
        let dd = s(d)?;
        let cc = aa.mul(&dd)?.sub(&one)?.div(&bb)?;
        GroupElement::new([aa, bb, cc, dd])
    }
}
