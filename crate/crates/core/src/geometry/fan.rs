//! Polyhedral fans, normal fans and simplicial refinement.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::dd::extreme_rays;
use super::hull::LatticePolytope;
use crate::error::{Error, Result};
use crate::linalg::{big_to_i64, det_i64, dot_rat, primitive, primitive_i64, rank_i64, solve, to_big_vec, to_rat_vec, Rat};

/// Which normal cone is attached to a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// Cone of `v` is `{y : y·v >= y·w for all w}`; rays are outer normals.
    Max,
    /// Cone of `v` is `{y : y·v <= y·w for all w}`; rays are inner normals.
    Min,
}

/// Order in which rays are placed when triangulating a cone.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PlacingOrder {
    #[default]
    Lex,
    ReverseLex,
    /// Lexicographic order rotated left by the given amount.
    Rotated(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolyhedralFan {
    dim: usize,
    rays: Vec<Vec<i64>>,
    cones: Vec<Vec<usize>>,
    complete: bool,
}

impl PolyhedralFan {
    /// Builds a fan from rays and maximal cones. Rays are made primitive.
    pub fn new(dim: usize, rays: Vec<Vec<i64>>, cones: Vec<Vec<usize>>, complete: bool) -> Result<Self> {
        for r in &rays {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
            }
            if r.iter().all(|&x| x == 0) {
                return Err(Error::InvalidFan("zero ray".into()));
            }
        }
        for c in &cones {
            if c.is_empty() || c.iter().any(|&i| i >= rays.len()) {
                return Err(Error::InvalidFan(format!("bad cone {c:?}")));
            }
        }
        let rays = rays.iter().map(|r| primitive_i64(r)).collect();
        Ok(PolyhedralFan { dim, rays, cones, complete })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn maximal_cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn generators(&self, cone: usize) -> Vec<Vec<i64>> {
        self.cones[cone].iter().map(|&i| self.rays[i].clone()).collect()
    }

    pub fn is_simplicial(&self) -> bool {
        self.cones.iter().all(|c| c.len() == self.dim && !det_i64(&self.gens_of(c)).is_zero())
    }

    fn gens_of(&self, c: &[usize]) -> Vec<Vec<i64>> {
        c.iter().map(|&i| self.rays[i].clone()).collect()
    }

    /// Inequalities `h·y >= 0` cutting out a full-dimensional cone.
    pub fn cone_inequalities(&self, cone: usize) -> Result<Vec<Vec<BigInt>>> {
        let rows: Vec<Vec<BigInt>> = self.cones[cone].iter().map(|&i| to_big_vec(&self.rays[i])).collect();
        extreme_rays(&rows)
    }

    /// Indices of the maximal cones containing `y`.
    pub fn locate(&self, y: &[Rat]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for c in 0..self.cones.len() {
            if self.cone_contains(c, y)? {
                out.push(c);
            }
        }
        Ok(out)
    }

    fn cone_contains(&self, c: usize, y: &[Rat]) -> Result<bool> {
        let gens = self.gens_of(&self.cones[c]);
        if gens.len() == self.dim {
            let cols: Vec<Vec<Rat>> = (0..self.dim)
                .map(|i| gens.iter().map(|g| Rat::from_integer(g[i].into())).collect())
                .collect();
            if let Some(l) = solve(&cols, y) {
                return Ok(l.iter().all(|x| !x.is_negative()));
            }
        }
        Ok(self.cone_inequalities(c)?.iter().all(|h| {
            let h: Vec<Rat> = h.iter().map(|x| Rat::from_integer(x.clone())).collect();
            !dot_rat(&h, y).is_negative()
        }))
    }

    /// Simplicial refinement without new rays, by placing triangulation of
    /// each cone over its own rays.
    pub fn simplicial_refine(&self, order: PlacingOrder) -> PolyhedralFan {
        let mut cones = Vec::new();
        for c in &self.cones {
            if c.len() == self.dim && !det_i64(&self.gens_of(c)).is_zero() {
                cones.push(c.clone());
            } else {
                cones.extend(self.place(c, order));
            }
        }
        let mut f = PolyhedralFan { dim: self.dim, rays: self.rays.clone(), cones, complete: self.complete };
        f.normalize();
        f
    }

    fn place(&self, cone: &[usize], order: PlacingOrder) -> Vec<Vec<usize>> {
        let mut idx = cone.to_vec();
        idx.sort_by(|&a, &b| self.rays[a].cmp(&self.rays[b]));
        match order {
            PlacingOrder::Lex => {}
            PlacingOrder::ReverseLex => idx.reverse(),
            PlacingOrder::Rotated(k) => {
                let k = k % idx.len();
                idx.rotate_left(k);
            }
        }
        let n = self.dim;
        let mut simplices: Vec<Vec<usize>> = Vec::new();
        let mut span: Vec<usize> = Vec::new();
        for &p in &idx {
            if span.is_empty() {
                simplices.push(vec![p]);
                span.push(p);
                continue;
            }
            let mut rows = self.gens_of(&span);
            rows.push(self.rays[p].clone());
            if rank_i64(&rows) > span.len() {
                for s in &mut simplices {
                    s.push(p);
                }
                span.push(p);
                continue;
            }
            let completion = standard_completion(&self.gens_of(&span), n);
            let mut boundary: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
            for s in &simplices {
                for (k, &opp) in s.iter().enumerate() {
                    let mut f = s.clone();
                    f.remove(k);
                    f.sort();
                    boundary.entry(f).or_default().push(opp);
                }
            }
            let mut fresh = Vec::new();
            for (f, opps) in boundary {
                if opps.len() != 1 {
                    continue;
                }
                let side = |v: usize| {
                    let mut m = self.gens_of(&f);
                    m.push(self.rays[v].clone());
                    m.extend(completion.iter().cloned());
                    det_i64(&m).sign()
                };
                let sp = side(p);
                let so = side(opps[0]);
                if sp != num_bigint::Sign::NoSign && sp != so {
                    let mut s = f.clone();
                    s.push(p);
                    fresh.push(s);
                }
            }
            simplices.extend(fresh);
        }
        for s in &mut simplices {
            s.sort();
        }
        simplices
    }

    /// Stellar subdivision of a simplicial fan at a new ray.
    pub fn stellar_subdivision(&self, ray: &[i64]) -> Result<PolyhedralFan> {
        if ray.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: ray.len() });
        }
        if !self.is_simplicial() {
            return Err(Error::InvalidFan("stellar subdivision needs a simplicial fan".into()));
        }
        let ray = primitive_i64(ray);
        if self.rays.contains(&ray) {
            return Ok(self.clone());
        }
        let mut rays = self.rays.clone();
        rays.push(ray.clone());
        let new = rays.len() - 1;
        let y = to_rat_vec(&ray);
        let mut cones = Vec::new();
        for c in &self.cones {
            let gens = self.gens_of(c);
            let cols: Vec<Vec<Rat>> = (0..self.dim)
                .map(|i| gens.iter().map(|g| Rat::from_integer(g[i].into())).collect())
                .collect();
            let l = solve(&cols, &y).ok_or(Error::DegenerateCone)?;
            if l.iter().any(|x| x.is_negative()) {
                cones.push(c.clone());
                continue;
            }
            for (k, lk) in l.iter().enumerate() {
                if lk.is_positive() {
                    let mut s = c.clone();
                    s[k] = new;
                    cones.push(s);
                }
            }
        }
        let mut f = PolyhedralFan { dim: self.dim, rays, cones, complete: self.complete };
        f.normalize();
        Ok(f)
    }

    /// Sorts rays lexicographically and cones by their sorted index sets.
    fn normalize(&mut self) {
        let mut order: Vec<usize> = (0..self.rays.len()).collect();
        order.sort_by(|&a, &b| self.rays[a].cmp(&self.rays[b]));
        let mut inverse = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        self.rays = order.iter().map(|&i| self.rays[i].clone()).collect();
        for c in &mut self.cones {
            for i in c.iter_mut() {
                *i = inverse[*i];
            }
            c.sort();
        }
        self.cones.sort();
        self.cones.dedup();
    }
}

fn standard_completion(rows: &[Vec<i64>], n: usize) -> Vec<Vec<i64>> {
    let mut current = rows.to_vec();
    let mut out = Vec::new();
    for i in 0..n {
        if current.len() == n {
            break;
        }
        let mut e = vec![0; n];
        e[i] = 1;
        current.push(e.clone());
        if rank_i64(&current) == current.len() {
            out.push(e);
        } else {
            current.pop();
        }
    }
    out
}

/// Normal fan of a full-dimensional polytope, one maximal cone per vertex in
/// vertex order.
pub fn normal_fan(p: &LatticePolytope, convention: Convention) -> Result<PolyhedralFan> {
    if !p.is_full_dimensional() || p.ambient_dim() == 0 {
        return Err(Error::NotFullDimensional { dim: p.dim(), ambient: p.ambient_dim() });
    }
    let normals: Vec<Vec<i64>> = p
        .facets()
        .iter()
        .map(|f| {
            let a = primitive(f.normal.clone());
            let a = match convention {
                Convention::Min => a,
                Convention::Max => a.into_iter().map(|x| -x).collect(),
            };
            big_to_i64(&a).ok_or(Error::Overflow)
        })
        .collect::<Result<_>>()?;
    let mut rays = normals.clone();
    rays.sort();
    rays.dedup();
    let index = |r: &Vec<i64>| rays.binary_search(r).unwrap();
    let cones: Vec<Vec<usize>> = (0..p.vertices().len())
        .map(|v| {
            let mut c: Vec<usize> = p.vertex_facets(v).iter().map(|&f| index(&normals[f])).collect();
            c.sort();
            c.dedup();
            c
        })
        .collect();
    Ok(PolyhedralFan { dim: p.ambient_dim(), rays, cones, complete: true })
}

/// Sum of the primitive generators of a cone, an interior point when the
/// cone is full-dimensional.
pub fn interior_point(gens: &[Vec<i64>]) -> Vec<Rat> {
    let n = gens.first().map_or(0, |g| g.len());
    (0..n).map(|i| Rat::from_integer(gens.iter().map(|g| g[i]).sum::<i64>().into())).collect()
}
