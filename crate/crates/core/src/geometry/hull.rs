//! Convex hulls of integer point sets, computed exactly.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::dd::extreme_rays;
use crate::error::{Error, Result};
use crate::linalg::{rank_rat, rref, to_rat_vec, Rat};

/// Affine hull of a point set: a base point and the pivot coordinates that
/// parametrize it injectively.
#[derive(Clone, Debug)]
pub struct AffineFrame {
    base: Vec<i64>,
    pivots: Vec<usize>,
    span: Vec<Vec<Rat>>,
}

impl AffineFrame {
    fn new(points: &[Vec<i64>]) -> Self {
        let base = points[0].clone();
        let diffs: Vec<Vec<Rat>> = points[1..]
            .iter()
            .map(|p| p.iter().zip(&base).map(|(a, b)| Rat::from_integer((a - b).into())).collect())
            .collect();
        let (span, pivots) = if diffs.is_empty() { (Vec::new(), Vec::new()) } else { rref(&diffs) };
        AffineFrame { base, pivots, span }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Coordinates of `x` in the frame (its pivot entries).
    pub fn project(&self, x: &[i64]) -> Vec<BigInt> {
        self.pivots.iter().map(|&i| BigInt::from(x[i])).collect()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        let mut rows = self.span.clone();
        rows.push(x.iter().zip(&self.base).map(|(a, b)| Rat::from_integer((a - b).into())).collect());
        rank_rat(&rows) == self.span.len()
    }
}

/// Facet inequality `offset + normal · project(x) >= 0` in frame coordinates.
/// For full-dimensional polytopes the frame is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub offset: BigInt,
}

impl Facet {
    fn slack(&self, y: &[BigInt]) -> BigInt {
        &self.offset + self.normal.iter().zip(y).map(|(a, b)| a * b).sum::<BigInt>()
    }
}

#[derive(Clone, Debug)]
pub struct LatticePolytope {
    ambient: usize,
    points: Vec<Vec<i64>>,
    vertices: Vec<Vec<i64>>,
    frame: AffineFrame,
    facets: Vec<Facet>,
    incidence: Vec<Vec<usize>>,
}

/// Convex hull of a nonempty list of integer points of equal length.
pub fn convex_hull(points: &[Vec<i64>]) -> Result<LatticePolytope> {
    let ambient = points.first().ok_or(Error::EmptyPointSet)?.len();
    if let Some(p) = points.iter().find(|p| p.len() != ambient) {
        return Err(Error::DimensionMismatch { expected: ambient, got: p.len() });
    }
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    let frame = AffineFrame::new(&pts);
    let d = frame.dim();
    if d == 0 {
        return Ok(LatticePolytope {
            ambient,
            vertices: pts.clone(),
            points: pts,
            frame,
            facets: Vec::new(),
            incidence: vec![Vec::new()],
        });
    }
    let projected: Vec<Vec<BigInt>> = pts.iter().map(|p| frame.project(p)).collect();
    let rows: Vec<Vec<BigInt>> = projected
        .iter()
        .map(|y| std::iter::once(BigInt::from(1)).chain(y.iter().cloned()).collect())
        .collect();
    let facets: Vec<Facet> = extreme_rays(&rows)?
        .into_iter()
        .map(|r| Facet { offset: r[0].clone(), normal: r[1..].to_vec() })
        .collect();

    let mut vertices = Vec::new();
    let mut incidence = Vec::new();
    for (p, y) in pts.iter().zip(&projected) {
        let inc: Vec<usize> = (0..facets.len()).filter(|&f| facets[f].slack(y).is_zero()).collect();
        if normal_rank(&facets, &inc) == d {
            vertices.push(p.clone());
            incidence.push(inc);
        }
    }
    Ok(LatticePolytope { ambient, points: pts, vertices, frame, facets, incidence })
}

fn normal_rank(facets: &[Facet], idx: &[usize]) -> usize {
    if idx.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<Rat>> = idx
        .iter()
        .map(|&f| facets[f].normal.iter().map(|x| Rat::from_integer(x.clone())).collect())
        .collect();
    rank_rat(&rows)
}

impl LatticePolytope {
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Input points, deduplicated and sorted.
    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    /// Vertices in lexicographic order.
    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    pub fn frame(&self) -> &AffineFrame {
        &self.frame
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Indices of the facets containing vertex `i`.
    pub fn vertex_facets(&self, i: usize) -> &[usize] {
        &self.incidence[i]
    }

    /// Pairs of vertex indices spanning an edge.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let d = self.dim();
        if d == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for i in 0..self.vertices.len() {
            for j in i + 1..self.vertices.len() {
                let common: Vec<usize> = self.incidence[i]
                    .iter()
                    .copied()
                    .filter(|f| self.incidence[j].contains(f))
                    .collect();
                if normal_rank(&self.facets, &common) == d - 1 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Whether `x` satisfies every facet inequality strictly and lies in the
    /// affine hull.
    pub fn strictly_contains(&self, x: &[i64]) -> bool {
        if !self.frame.contains(x) {
            return false;
        }
        let y = self.frame.project(x);
        self.facets.iter().all(|f| f.slack(&y).is_positive())
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        if !self.frame.contains(x) {
            return false;
        }
        let y = self.frame.project(x);
        self.facets.iter().all(|f| !f.slack(&y).is_negative())
    }

    /// The dilate `m·P`.
    pub fn scale(&self, m: i64) -> Result<LatticePolytope> {
        let pts: Vec<Vec<i64>> =
            self.vertices.iter().map(|v| v.iter().map(|x| x * m).collect()).collect();
        convex_hull(&pts)
    }

    /// Translate by an integer vector.
    pub fn translate(&self, t: &[i64]) -> Result<LatticePolytope> {
        if t.len() != self.ambient {
            return Err(Error::DimensionMismatch { expected: self.ambient, got: t.len() });
        }
        let pts: Vec<Vec<i64>> =
            self.vertices.iter().map(|v| v.iter().zip(t).map(|(a, b)| a + b).collect()).collect();
        convex_hull(&pts)
    }

    /// Lexicographically first vertex maximizing `y · v`, and whether the
    /// maximizer is unique.
    pub fn argmax(&self, y: &[Rat]) -> (usize, bool) {
        let vals: Vec<Rat> = self
            .vertices
            .iter()
            .map(|v| to_rat_vec(v).iter().zip(y).map(|(a, b)| a * b).sum())
            .collect();
        let mut best = 0;
        for i in 1..vals.len() {
            if vals[i] > vals[best] {
                best = i;
            }
        }
        let unique = vals.iter().filter(|v| **v == vals[best]).count() == 1;
        (best, unique)
    }
}

pub fn minkowski_sum(a: &LatticePolytope, b: &LatticePolytope) -> Result<LatticePolytope> {
    if a.ambient != b.ambient {
        return Err(Error::DimensionMismatch { expected: a.ambient, got: b.ambient });
    }
    let mut pts = Vec::with_capacity(a.vertices.len() * b.vertices.len());
    for u in &a.vertices {
        for v in &b.vertices {
            pts.push(u.iter().zip(v).map(|(x, y)| x + y).collect());
        }
    }
    convex_hull(&pts)
}

/// Whether every vertex of `q` lies in the relative interior of `p`.
pub fn relative_interior_contains(p: &LatticePolytope, q: &LatticePolytope) -> Result<bool> {
    if p.ambient != q.ambient {
        return Err(Error::DimensionMismatch { expected: p.ambient, got: q.ambient });
    }
    Ok(q.vertices.iter().all(|v| p.strictly_contains(v)))
}
