//! Character tables by the modular eigenvalue method: diagonalize the
//! class-sum multiplication matrices over a prime field `F_l` with
//! `l = 1 mod exponent` and `l > 2 sqrt(|G|)`, then lift the eigenvalue data
//! to exact cyclotomic character values through the power-map Fourier sums.

use crate::error::{Error, Result};
use crate::finite::cyclotomic::Cyc;
use crate::finite::reps::{CharacterTable, Irrep};
use crate::finite::FiniteGroup;

const PRIME_SEARCH_BOUND: u64 = 1_000_000;

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u128;
    let mm = m as u128;
    let mut bb = b as u128 % mm;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    b = 0;
    let _ = b;
    acc as u64
}

fn inv_mod(a: u64, l: u64) -> u64 {
    pow_mod(a, l - 2, l)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime `l = 1 mod e` with `l^2 > 4 |G|` and `l` not dividing `|G|`.
fn splitting_prime(e: u64, order: u64) -> Result<u64> {
    let mut l = e + 1;
    while l < PRIME_SEARCH_BOUND {
        if is_prime(l) && l * l > 4 * order && order % l != 0 {
            return Ok(l);
        }
        l += e;
    }
    Err(Error::NoSplittingPrime(PRIME_SEARCH_BOUND))
}

fn primitive_root(l: u64) -> u64 {
    let order = l - 1;
    'cand: for g in 2..l {
        let mut rest = order;
        let mut q = 2u64;
        while rest > 1 {
            if q * q > rest {
                q = rest;
            }
            if rest % q == 0 {
                while rest % q == 0 {
                    rest /= q;
                }
                if pow_mod(g, order / q, l) == 1 {
                    continue 'cand;
                }
            }
            q += 1;
        }
        return g;
    }
    unreachable!("prime fields have primitive roots")
}

// ----- small dense linear algebra over F_l -----

type Mat = Vec<Vec<u64>>;

fn mat_mul(a: &Mat, b: &Mat, l: u64) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![0u64; m]; n];
    for i in 0..n {
        for t in 0..k {
            if a[i][t] == 0 {
                continue;
            }
            let av = a[i][t] as u128;
            for j in 0..m {
                out[i][j] = ((out[i][j] as u128 + av * b[t][j] as u128) % l as u128) as u64;
            }
        }
    }
    out
}

/// Nullspace basis (as columns) of a square or rectangular matrix.
fn nullspace(a: &Mat, l: u64) -> Vec<Vec<u64>> {
    if a.is_empty() {
        return Vec::new();
    }
    let rows = a.len();
    let cols = a[0].len();
    let mut m = a.clone();
    let mut pivot_of_col = vec![usize::MAX; cols];
    let mut row = 0usize;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let mut piv = None;
        for i in row..rows {
            if m[i][col] != 0 {
                piv = Some(i);
                break;
            }
        }
        let Some(pi) = piv else { continue };
        m.swap(row, pi);
        let inv = inv_mod(m[row][col], l);
        for j in col..cols {
            m[row][j] = (m[row][j] as u128 * inv as u128 % l as u128) as u64;
        }
        for i in 0..rows {
            if i != row && m[i][col] != 0 {
                let f = m[i][col] as u128;
                for j in col..cols {
                    let sub = f * m[row][j] as u128 % l as u128;
                    m[i][j] = ((m[i][j] as u128 + l as u128 - sub) % l as u128) as u64;
                }
            }
        }
        pivot_of_col[col] = row;
        row += 1;
    }
    let mut basis = Vec::new();
    for j in 0..cols {
        if pivot_of_col[j] != usize::MAX {
            continue;
        }
        let mut v = vec![0u64; cols];
        v[j] = 1;
        for (k, &pr) in pivot_of_col.iter().enumerate() {
            if pr != usize::MAX {
                v[k] = (l - m[pr][j]) % l;
            }
        }
        basis.push(v);
    }
    basis
}

/// Solve `B X = Y` columnwise for a full-column-rank `B` (rows x s).
fn solve_in_basis(b: &Mat, y: &Mat, l: u64) -> Mat {
    let rows = b.len();
    let s = b[0].len();
    let t = y[0].len();
    // eliminate on [B | Y]
    let mut m = vec![vec![0u64; s + t]; rows];
    for i in 0..rows {
        for j in 0..s {
            m[i][j] = b[i][j];
        }
        for j in 0..t {
            m[i][s + j] = y[i][j];
        }
    }
    let mut row = 0usize;
    let mut pivots = Vec::new();
    for col in 0..s {
        let mut piv = None;
        for i in row..rows {
            if m[i][col] != 0 {
                piv = Some(i);
                break;
            }
        }
        let Some(pi) = piv else { continue };
        m.swap(row, pi);
        let inv = inv_mod(m[row][col], l);
        for j in col..s + t {
            m[row][j] = (m[row][j] as u128 * inv as u128 % l as u128) as u64;
        }
        for i in 0..rows {
            if i != row && m[i][col] != 0 {
                let f = m[i][col] as u128;
                for j in col..s + t {
                    let sub = f * m[row][j] as u128 % l as u128;
                    m[i][j] = ((m[i][j] as u128 + l as u128 - sub) % l as u128) as u64;
                }
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    let mut x = vec![vec![0u64; t]; s];
    for (r, c) in pivots {
        for j in 0..t {
            x[c][j] = m[r][s + j];
        }
    }
    x
}

/// Compute the full character table of a finite group.
pub fn character_table(group: &FiniteGroup) -> Result<CharacterTable> {
    let r = group.class_count();
    let order = group.order() as u64;
    let e = group.exponent();
    let l = splitting_prime(e, order)?;

    // structure constants a[i][j][k]: products landing on the k-th class rep
    let mut a = vec![vec![vec![0u64; r]; r]; r];
    for k in 0..r {
        let zk = group.classes[k].rep;
        for x in 0..group.order() {
            let i = group.class_of(x);
            let y = group.mul_idx(group.inv_idx(x), zk);
            let j = group.class_of(y);
            a[i][j][k] += 1;
        }
    }
    // multiplication matrices M_i[k][j] = a[i][j][k]
    let mats: Vec<Mat> = (0..r)
        .map(|i| {
            (0..r)
                .map(|k| (0..r).map(|j| a[i][j][k] % l).collect())
                .collect()
        })
        .collect();

    // split the class algebra into common eigenlines
    let mut subspaces: Vec<Mat> = vec![(0..r)
        .map(|i| (0..r).map(|j| u64::from(i == j)).collect())
        .collect()];
    for mi in &mats {
        let mut next = Vec::new();
        for basis in subspaces.into_iter() {
            let s = basis[0].len();
            if s == 1 {
                next.push(basis);
                continue;
            }
            // action of M_i on the subspace: M_i B = B S
            let mb = mat_mul(mi, &basis, l);
            let s_mat = solve_in_basis(&basis, &mb, l);
            let mut split_any = false;
            for lambda in 0..l {
                let shifted: Mat = (0..s)
                    .map(|x| {
                        (0..s)
                            .map(|y| {
                                let v = s_mat[x][y];
                                if x == y {
                                    (v + l - lambda % l) % l
                                } else {
                                    v
                                }
                            })
                            .collect()
                    })
                    .collect();
                let ns = nullspace(&shifted, l);
                if ns.is_empty() || ns.len() == s {
                    if ns.len() == s {
                        // the whole space is one eigenvalue: keep it intact
                        next.push(basis.clone());
                        split_any = true;
                        break;
                    }
                    continue;
                }
                split_any = true;
                // keep the whole eigenspace together: later matrices may
                // still have to split it
                let ns_mat: Mat = (0..s)
                    .map(|x| ns.iter().map(|v| v[x]).collect())
                    .collect();
                next.push(mat_mul(&basis, &ns_mat, l));
                // the other eigenvalues are covered by later lambda values
            }
            if !split_any {
                next.push(basis);
            }
        }
        subspaces = next;
        if subspaces.iter().all(|b| b[0].len() == 1) {
            break;
        }
    }
    if subspaces.len() != r {
        return Err(Error::TableMismatch(format!(
            "expected {r} common eigenlines, found {}",
            subspaces.len()
        )));
    }

    // eigenvalues and degrees
    let sizes = group.class_sizes();
    let z = pow_mod(primitive_root(l), (l - 1) / e, l);
    let zeta_exp = e as u32;
    let mut irreps = Vec::with_capacity(r);
    for line in &subspaces {
        let v: Vec<u64> = line.iter().map(|row| row[0]).collect();
        // omega_i = eigenvalue of M_i on the line
        let mut omega = vec![0u64; r];
        let pivot = v.iter().position(|&c| c != 0).expect("nonzero line");
        for i in 0..r {
            let mv = mat_mul(&mats[i], &line, l);
            omega[i] =
                (mv[pivot][0] as u128 * inv_mod(v[pivot], l) as u128 % l as u128) as u64;
        }
        // degree from sum_i omega_i * omega_{i'} / |C_i| = |G| / d^2
        let mut s = 0u128;
        for i in 0..r {
            let ip = group.inverse_class(i);
            let term = omega[i] as u128 * omega[ip] as u128 % l as u128
                * inv_mod(sizes[i] as u64, l) as u128
                % l as u128;
            s = (s + term) % l as u128;
        }
        let d2 = (order as u128 * inv_mod(s as u64, l) as u128 % l as u128) as u64;
        let mut degree = 0u64;
        let isqrt = (order as f64).sqrt() as u64 + 1;
        for d in 1..=isqrt {
            if d * d % l == d2 {
                degree = d;
                break;
            }
        }
        if degree == 0 {
            return Err(Error::TableMismatch("no integral degree matches".into()));
        }
        // modular character values
        let deg_inv_sizes: Vec<u64> = sizes.iter().map(|&c| inv_mod(c as u64, l)).collect();
        let chi_mod = |class: usize, omega: &[u64]| -> u64 {
            (degree as u128 * omega[class] as u128 % l as u128 * deg_inv_sizes[class] as u128
                % l as u128) as u64
        };
        // exact lift: for each class, eigenvalue multiplicities of the
        // representing matrix via the power-map Fourier sum
        let e_inv = inv_mod(e % l, l);
        let mut values = Vec::with_capacity(r);
        for class in 0..r {
            let rep = group.classes[class].rep;
            let mut coeffs = vec![0i64; e as usize];
            for k in 0..e {
                let mut acc: u128 = 0;
                for s_exp in 0..e {
                    let cls = group.class_of(group.pow_idx(rep, s_exp));
                    let zk = pow_mod(z, (k * s_exp) % e, l);
                    acc = (acc
                        + chi_mod(cls, &omega) as u128 * inv_mod(zk, l) as u128)
                        % l as u128;
                }
                let nk = (acc * e_inv as u128 % l as u128) as u64;
                if nk > degree {
                    return Err(Error::TableMismatch(format!(
                        "eigenvalue multiplicity {nk} exceeds the degree {degree}"
                    )));
                }
                coeffs[k as usize] = nk as i64;
            }
            let mut val = Cyc::zero(zeta_exp);
            for (k, c) in coeffs.iter().enumerate() {
                if *c != 0 {
                    val = val.add(&Cyc::root_power(zeta_exp, k as u64).scale(*c));
                }
            }
            values.push(val);
        }
        irreps.push(Irrep { degree, values });
    }
    // sort by degree, then by value footprint for determinism
    irreps.sort_by_key(|ir| {
        (
            ir.degree,
            ir.values
                .iter()
                .map(|v| v.reduced())
                .collect::<Vec<_>>(),
        )
    });
    let table = CharacterTable {
        exponent: zeta_exp,
        class_sizes: sizes,
        inverse_classes: (0..r).map(|c| group.inverse_class(c)).collect(),
        order: group.order() as u64,
        irreps,
    };
    table.verify_orthogonality()?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite;

    #[test]
    fn table_of_c2() {
        let g = finite::cyclic(2).unwrap();
        let t = character_table(&g).unwrap();
        let mut degs: Vec<u64> = t.irreps.iter().map(|i| i.degree).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1]);
    }

    #[test]
    fn table_of_s3() {
        let g = finite::symmetric_3().unwrap();
        let t = character_table(&g).unwrap();
        let mut degs: Vec<u64> = t.irreps.iter().map(|i| i.degree).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1, 2]);
        assert_eq!(t.irreps.iter().map(|i| i.degree * i.degree).sum::<u64>(), 6);
        let dump = t.to_json();
        assert_eq!(dump["characters"].as_array().unwrap().len(), 3);
        assert_eq!(dump["order"], 6);
    }

    #[test]
    fn table_of_sl2_f5() {
        let g = finite::sl2_mod(5).unwrap();
        let t = character_table(&g).unwrap();
        let mut degs: Vec<u64> = t.irreps.iter().map(|i| i.degree).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 2, 2, 3, 3, 4, 4, 5, 6]);
        assert_eq!(
            t.irreps.iter().map(|i| i.degree * i.degree).sum::<u64>(),
            120
        );
    }

    #[test]
    fn table_of_q8_and_borel() {
        let q = finite::quaternion_8().unwrap();
        let t = character_table(&q).unwrap();
        let mut degs: Vec<u64> = t.irreps.iter().map(|i| i.degree).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1, 1, 1, 2]);
        // the torus conjugates the unipotent part through squares, so the
        // nontrivial characters fall into two orbits of size two
        let b = finite::borel_sl2_5().unwrap();
        let t = character_table(&b).unwrap();
        let mut degs: Vec<u64> = t.irreps.iter().map(|i| i.degree).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1, 1, 1, 2, 2, 2, 2]);
        assert_eq!(t.irreps.iter().map(|i| i.degree * i.degree).sum::<u64>(), 20);
    }
}
