//! Double description method for the extreme rays of `{r : A r >= 0}`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{clear_denominators, dot_big, invert, primitive, Rat};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn with_len(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn contains(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray {
    v: Vec<BigInt>,
    zeros: Bits,
}

/// Extreme rays of the pointed cone `{r : a·r >= 0 for every row a}`.
///
/// The rows must have full column rank. Rays are primitive and sorted
/// lexicographically.
pub fn extreme_rays(rows: &[Vec<BigInt>]) -> Result<Vec<Vec<BigInt>>> {
    let dim = rows.first().map_or(0, |r| r.len());
    if dim == 0 {
        return Err(Error::EmptyPointSet);
    }
    let m = rows.len();

    // Greedy basis of independent rows.
    let mut basis: Vec<usize> = Vec::with_capacity(dim);
    let mut echelon: Vec<Vec<Rat>> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut v: Vec<Rat> = row.iter().map(|x| Rat::from_integer(x.clone())).collect();
        for e in &echelon {
            let p = e.iter().position(|x| !x.is_zero()).unwrap();
            if !v[p].is_zero() {
                let f = &v[p] / &e[p];
                for (vj, ej) in v.iter_mut().zip(e) {
                    *vj -= &f * ej;
                }
            }
        }
        if v.iter().any(|x| !x.is_zero()) {
            echelon.push(v);
            basis.push(i);
            if basis.len() == dim {
                break;
            }
        }
    }
    if basis.len() < dim {
        return Err(Error::RankDeficient { rank: basis.len(), expected: dim });
    }

    let a0: Vec<Vec<Rat>> = basis
        .iter()
        .map(|&i| rows[i].iter().map(|x| Rat::from_integer(x.clone())).collect())
        .collect();
    let inv = invert(&a0).ok_or(Error::DegenerateCone)?;
    let mut rays: Vec<Ray> = (0..dim)
        .map(|j| {
            let col: Vec<Rat> = (0..dim).map(|i| inv[i][j].clone()).collect();
            let mut zeros = Bits::with_len(m);
            for (bi, &row) in basis.iter().enumerate() {
                if bi != j {
                    zeros.set(row);
                }
            }
            Ray { v: clear_denominators(&col), zeros }
        })
        .collect();

    let mut seen = vec![false; m];
    for &b in &basis {
        seen[b] = true;
    }
    for i in 0..m {
        if seen[i] {
            continue;
        }
        let row = &rows[i];
        let vals: Vec<BigInt> = rays.iter().map(|r| dot_big(row, &r.v)).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            for (r, v) in rays.iter_mut().zip(&vals) {
                if v.is_zero() {
                    r.zeros.set(i);
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&j| vals[j].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&j| vals[j].is_negative()).collect();
        let mut fresh: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zeros.and(&rays[n].zeros);
                if common.count() + 2 < dim {
                    continue;
                }
                let adjacent = (0..rays.len())
                    .all(|j| j == p || j == n || !rays[j].zeros.contains(&common));
                if !adjacent {
                    continue;
                }
                let sp = &vals[p];
                let sn = -&vals[n];
                let v: Vec<BigInt> = rays[p]
                    .v
                    .iter()
                    .zip(&rays[n].v)
                    .map(|(a, b)| sn.clone() * a + sp * b)
                    .collect();
                let mut zeros = common;
                zeros.set(i);
                fresh.push(Ray { v: primitive(v), zeros });
            }
        }
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (j, mut r) in rays.into_iter().enumerate() {
            if vals[j].is_zero() {
                r.zeros.set(i);
                next.push(r);
            } else if vals[j].is_positive() {
                next.push(r);
            }
        }
        next.extend(fresh);
        rays = next;
    }

    let mut out: Vec<Vec<BigInt>> = rays.into_iter().map(|r| r.v).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::to_big_vec;

    #[test]
    fn square_facets() {
        // Homogenized rows (1, p) for the unit square.
        let rows: Vec<Vec<BigInt>> = [[1, 0, 0], [1, 1, 0], [1, 0, 1], [1, 1, 1]]
            .iter()
            .map(|r| to_big_vec(r))
            .collect();
        let rays = extreme_rays(&rows).unwrap();
        let expect: Vec<Vec<BigInt>> =
            [[0, 0, 1], [0, 1, 0], [1, -1, 0], [1, 0, -1]].iter().map(|r| to_big_vec(r)).collect();
        assert_eq!(rays, expect);
    }

    #[test]
    fn octahedron_has_eight_facets() {
        let pts = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
        let rows: Vec<Vec<BigInt>> = pts
            .iter()
            .map(|p| {
                let mut r = vec![1];
                r.extend_from_slice(p);
                to_big_vec(&r)
            })
            .collect();
        assert_eq!(extreme_rays(&rows).unwrap().len(), 8);
    }
}
