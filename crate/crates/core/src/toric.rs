//! Toric varieties given by a simplicial fan: rays, grading and the passage
//! between Cox coordinates and the torus.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det_i64, dot_i64, integer_kernel, invert, rank_i64, Rat};
use crate::poly::{PositivePolynomial, RatPoly};

/// A complete simplicial toric variety. Ray `ρ` is the column `v_ρ` of the
/// `n × k` matrix `V`; Cox coordinate `x_ρ` belongs to it.
#[derive(Clone, Debug)]
pub struct ToricData {
    n: usize,
    rays: Vec<Vec<i64>>,
    cones: Vec<Vec<usize>>,
    grading: Vec<Vec<i64>>,
    lift: Vec<Vec<Rat>>,
    lift_f64: Vec<Vec<f64>>,
    gram_inv: Vec<Vec<Rat>>,
}

/// JSON form `{"rays": [[...]], "max_cones": [[...]]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ToricJson {
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
}

impl ToricData {
    pub fn new(rays: Vec<Vec<i64>>, cones: Vec<Vec<usize>>) -> Result<Self> {
        let k = rays.len();
        let n = rays.first().map_or(0, |r| r.len());
        if n == 0 {
            return Err(Error::InvalidFan("no rays".into()));
        }
        if let Some(r) = rays.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: r.len() });
        }
        let rank = rank_i64(&rays);
        if rank != n || k <= n {
            return Err(Error::RankDeficient { rank, expected: n });
        }
        for c in &cones {
            if c.len() != n || c.iter().any(|&i| i >= k) {
                return Err(Error::InvalidFan(format!("cone {c:?} is not simplicial")));
            }
            let m: Vec<Vec<i64>> = c.iter().map(|&i| rays[i].clone()).collect();
            if det_i64(&m).is_zero() {
                return Err(Error::InvalidFan(format!("cone {c:?} is degenerate")));
            }
        }
        check_closed(&cones, n)?;

        let v: Vec<Vec<i64>> = (0..n).map(|j| rays.iter().map(|r| r[j]).collect()).collect();
        let grading = integer_kernel(&v);
        let gram: Vec<Vec<Rat>> = (0..n)
            .map(|i| (0..n).map(|j| Rat::from_integer(dot_i64(&v[i], &v[j]).into())).collect())
            .collect();
        let gram_inv = invert(&gram).ok_or(Error::RankDeficient { rank, expected: n })?;
        // lift = V^T (V V^T)^{-1}, a k × n matrix.
        let lift: Vec<Vec<Rat>> = rays
            .iter()
            .map(|r| {
                (0..n)
                    .map(|j| (0..n).map(|i| Rat::from_integer(r[i].into()) * &gram_inv[i][j]).sum())
                    .collect()
            })
            .collect();
        let lift_f64 = lift.iter().map(|row| row.iter().map(crate::poly::rat_f64).collect()).collect();
        Ok(ToricData { n, rays, cones, grading, lift, lift_f64, gram_inv })
    }

    /// Projective space `P^n` with rays `e_1, …, e_n, -(e_1+…+e_n)`.
    pub fn projective_space(n: usize) -> Self {
        let mut rays: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        rays.push(vec![-1; n]);
        let cones = (0..=n).map(|skip| (0..=n).filter(|&i| i != skip).collect()).collect();
        Self::new(rays, cones).expect("valid fan")
    }

    /// `(P^1)^d` with Cox order `(x_0, x_1, s_0, s_1, …)`: ray `2i` is `e_i`
    /// and ray `2i+1` is `-e_i`.
    pub fn product_of_lines(d: usize) -> Self {
        let mut rays = Vec::new();
        for i in 0..d {
            for s in [1, -1] {
                rays.push((0..d).map(|j| if i == j { s } else { 0 }).collect());
            }
        }
        let cones = (0..1usize << d)
            .map(|mask| (0..d).map(|i| 2 * i + ((mask >> i) & 1)).collect())
            .collect();
        Self::new(rays, cones).expect("valid fan")
    }

    /// The pentagon surface with rays `(1,0), (1,-1), (-1,-1), (-1,1), (0,1)`.
    pub fn pentagon() -> Self {
        let rays = vec![vec![1, 0], vec![1, -1], vec![-1, -1], vec![-1, 1], vec![0, 1]];
        let cones = (0..5).map(|i| vec![i, (i + 1) % 5]).collect();
        Self::new(rays, cones).expect("valid fan")
    }

    pub fn from_json(j: &ToricJson) -> Result<Self> {
        Self::new(j.rays.clone(), j.max_cones.clone())
    }

    pub fn to_json(&self) -> ToricJson {
        ToricJson { rays: self.rays.clone(), max_cones: self.cones.clone() }
    }

    /// Dimension `n` of the variety.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number `k` of rays and Cox coordinates.
    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn maximal_cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    /// The `n × k` matrix `V`.
    pub fn v_matrix(&self) -> Vec<Vec<i64>> {
        (0..self.n).map(|j| self.rays.iter().map(|r| r[j]).collect()).collect()
    }

    /// Grading matrix `W` with `W V^T = 0`, a Hermite-reduced integer kernel
    /// basis of `V`.
    pub fn grading(&self) -> &[Vec<i64>] {
        &self.grading
    }

    /// `V^T (V V^T)^{-1}`, rows indexed by rays.
    pub fn lift_matrix(&self) -> &[Vec<Rat>] {
        &self.lift
    }

    pub fn degree(&self, exp: &[i64]) -> Result<Vec<i64>> {
        if exp.len() != self.num_rays() {
            return Err(Error::DimensionMismatch { expected: self.num_rays(), got: exp.len() });
        }
        Ok(self.grading.iter().map(|w| dot_i64(w, exp)).collect())
    }

    /// Common degree of all terms, or `None` if `f` is not homogeneous.
    pub fn poly_degree(&self, f: &PositivePolynomial) -> Result<Option<Vec<i64>>> {
        let mut d: Option<Vec<i64>> = None;
        for (_, e) in f.terms() {
            let de = self.degree(e)?;
            match &d {
                None => d = Some(de),
                Some(d0) if *d0 != de => return Ok(None),
                _ => {}
            }
        }
        Ok(d)
    }

    pub fn check_same_degree(&self, f: &PositivePolynomial, g: &PositivePolynomial) -> Result<bool> {
        match (self.poly_degree(f)?, self.poly_degree(g)?) {
            (Some(a), Some(b)) => Ok(a == b),
            _ => Ok(false),
        }
    }

    /// Solves `V^T a = d` exactly. Errors if `d` is not in the rational image
    /// of `V^T` or the solution is not integral.
    pub fn torus_exponent(&self, d: &[i64]) -> Result<Vec<i64>> {
        if d.len() != self.num_rays() {
            return Err(Error::DimensionMismatch { expected: self.num_rays(), got: d.len() });
        }
        let vd: Vec<Rat> = (0..self.n)
            .map(|j| Rat::from_integer(self.rays.iter().zip(d).map(|(r, x)| r[j] * x).sum::<i64>().into()))
            .collect();
        let a: Vec<Rat> = (0..self.n)
            .map(|i| (0..self.n).map(|j| &self.gram_inv[i][j] * &vd[j]).sum())
            .collect();
        for (r, di) in self.rays.iter().zip(d) {
            let v: Rat = r.iter().zip(&a).map(|(ri, ai)| Rat::from_integer((*ri).into()) * ai).sum();
            if v != Rat::from_integer((*di).into()) {
                return Err(Error::Inhomogeneous);
            }
        }
        a.iter()
            .map(|x| {
                if x.is_integer() {
                    num_traits::ToPrimitive::to_i64(&x.to_integer()).ok_or(Error::Overflow)
                } else {
                    Err(Error::Torsion)
                }
            })
            .collect()
    }

    /// Writes a homogeneous `f` as `x^c · f̂(t)` where `t = x^V`, with `c`
    /// the exponent of the lexicographically first term. Returns `(c, f̂)`.
    pub fn dehomogenize(&self, f: &PositivePolynomial) -> Result<(Vec<i64>, PositivePolynomial)> {
        if f.nvars() != self.num_rays() {
            return Err(Error::DimensionMismatch { expected: self.num_rays(), got: f.nvars() });
        }
        let c = f.terms()[0].1.clone();
        let mut terms = Vec::with_capacity(f.len());
        for (coef, e) in f.terms() {
            let d: Vec<i64> = e.iter().zip(&c).map(|(a, b)| a - b).collect();
            terms.push((coef.clone(), self.torus_exponent(&d)?));
        }
        Ok((c, PositivePolynomial::laurent(self.n, terms)?))
    }

    /// Cox form of the torus monomial `t^a`, namely `x^{V^T a}`.
    pub fn cox_exponent(&self, a: &[i64]) -> Vec<i64> {
        self.rays.iter().map(|r| dot_i64(r, a)).collect()
    }

    /// Substitutes `t = x^V` into a Laurent polynomial with positive
    /// coefficients and clears the lowest Cox monomial. Returns `(low, p')`
    /// with `p(t(x)) = x^low · p'(x)`.
    pub fn cox_lift(&self, p: &RatPoly) -> Result<(Vec<i64>, PositivePolynomial)> {
        if p.nvars() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: p.nvars() });
        }
        let mut m: BTreeMap<Vec<i64>, Rat> = BTreeMap::new();
        for (a, c) in p.terms() {
            *m.entry(self.cox_exponent(a)).or_insert_with(Rat::zero) += c;
        }
        let k = self.num_rays();
        let low: Vec<i64> = (0..k).map(|i| m.keys().map(|e| e[i]).min().unwrap_or(0)).collect();
        let terms = m
            .into_iter()
            .map(|(e, c)| (c, e.iter().zip(&low).map(|(x, l)| x - l).collect()))
            .collect();
        Ok((low, PositivePolynomial::new(k, terms)?))
    }

    /// Lifts a ratio of Laurent polynomials on the torus to a ratio of
    /// polynomials in Cox coordinates of equal degree.
    pub fn homogenize(&self, num: &RatPoly, den: &RatPoly) -> Result<(PositivePolynomial, PositivePolynomial)> {
        let (ln, f) = self.cox_lift(num)?;
        let (ld, g) = self.cox_lift(den)?;
        // num/den = x^{ln-ld} f/g; the leftover monomial goes to whichever
        // side keeps exponents nonnegative.
        let pos: Vec<i64> = ln.iter().zip(&ld).map(|(a, b)| (a - b).max(0)).collect();
        let neg: Vec<i64> = ln.iter().zip(&ld).map(|(a, b)| (b - a).max(0)).collect();
        Ok((f.shift(&pos), g.shift(&neg)))
    }

    /// `log t = V log x`.
    pub fn log_torus(&self, log_x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| self.rays.iter().zip(log_x).map(|(r, lx)| r[j] as f64 * lx).sum())
            .collect()
    }

    /// Minimum-norm preimage `log x = V^T (V V^T)^{-1} log t`.
    pub fn log_cox(&self, log_t: &[f64]) -> Vec<f64> {
        self.lift_f64.iter().map(|row| row.iter().zip(log_t).map(|(a, b)| a * b).sum()).collect()
    }

    /// Exact rational preimage `w` of `z` with `V w = z` and minimum norm.
    pub fn lift_vector(&self, z: &[i64]) -> Vec<Rat> {
        self.lift
            .iter()
            .map(|row| row.iter().zip(z).map(|(a, b)| a * Rat::from_integer((*b).into())).sum())
            .collect()
    }

    /// Whether every maximal cone has `|det V_I| = 1`.
    pub fn is_unimodular(&self) -> bool {
        self.cones.iter().all(|c| {
            let m: Vec<Vec<i64>> = c.iter().map(|&i| self.rays[i].clone()).collect();
            det_i64(&m).magnitude().is_one()
        })
    }
}

/// Every codimension-one face of a maximal cone must lie in exactly two
/// maximal cones, a necessary condition for completeness.
fn check_closed(cones: &[Vec<usize>], n: usize) -> Result<()> {
    if cones.is_empty() {
        return Err(Error::InvalidFan("no maximal cones".into()));
    }
    let mut count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for c in cones {
        let mut c = c.clone();
        c.sort();
        for k in 0..n {
            let mut f = c.clone();
            f.remove(k);
            *count.entry(f).or_default() += 1;
        }
    }
    match count.iter().find(|(_, &v)| v != 2) {
        Some((f, _)) => Err(Error::InvalidFan(format!("face {f:?} is not shared by two cones"))),
        None => Ok(()),
    }
}

/// Checks `det(V W) = Σ_I det(V_I) det(W_I)` by expanding over all
/// `n`-subsets `I` of the `k` columns of `V` (`V` is `n × k`, `W` is `k × n`).
pub fn cauchy_binet_check(v: &[Vec<i64>], w: &[Vec<i64>]) -> Result<bool> {
    let n = v.len();
    let k = v.first().map_or(0, |r| r.len());
    if w.len() != k || w.iter().any(|r| r.len() != n) || v.iter().any(|r| r.len() != k) {
        return Err(Error::DimensionMismatch { expected: k, got: w.len() });
    }
    let prod: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| (0..k).map(|l| v[i][l] * w[l][j]).sum()).collect())
        .collect();
    let lhs = det_i64(&prod);
    let mut rhs = num_bigint::BigInt::zero();
    for subset in subsets(k, n) {
        let vi: Vec<Vec<i64>> = (0..n).map(|i| subset.iter().map(|&l| v[i][l]).collect()).collect();
        let wi: Vec<Vec<i64>> = subset.iter().map(|&l| w[l].clone()).collect();
        rhs += det_i64(&vi) * det_i64(&wi);
    }
    Ok(lhs == rhs)
}

/// All `r`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    fn poly(k: usize, terms: &[(i64, &[i64])]) -> PositivePolynomial {
        PositivePolynomial::new(k, terms.iter().map(|(c, e)| (rat(*c), e.to_vec())).collect()).unwrap()
    }

    #[test]
    fn projective_line_grading() {
        let p1 = ToricData::projective_space(1);
        assert_eq!(p1.grading(), &[vec![1, 1]]);
        assert_eq!(p1.rays(), &[vec![1], vec![-1]]);
    }

    #[test]
    fn pentagon_degrees() {
        let x = ToricData::pentagon();
        let w = x.grading();
        assert_eq!(w.len(), 3);
        for row in w {
            for j in 0..2 {
                assert_eq!((0..5).map(|i| row[i] * x.rays()[i][j]).sum::<i64>(), 0);
            }
        }
        let f = poly(5, &[(2, &[2, 2, 3, 1, 3]), (3, &[2, 1, 2, 2, 4]), (5, &[1, 2, 5, 1, 2])]);
        let g = poly(
            5,
            &[(7, &[3, 3, 2, 0, 3]), (11, &[3, 1, 0, 2, 5]), (13, &[1, 0, 3, 3, 4]), (17, &[0, 2, 7, 1, 1])],
        );
        assert!(x.check_same_degree(&f, &g).unwrap());
        let (c, fh) = x.dehomogenize(&f).unwrap();
        assert_eq!(c, vec![1, 2, 5, 1, 2]);
        let exps: Vec<Vec<i64>> = fh.exponents();
        assert_eq!(exps, vec![vec![0, 0], vec![1, 1], vec![1, 2]]);
    }

    #[test]
    fn inhomogeneous_is_rejected() {
        let p1 = ToricData::projective_space(1);
        let f = poly(2, &[(1, &[1, 0]), (1, &[2, 0])]);
        assert!(matches!(p1.dehomogenize(&f), Err(Error::Inhomogeneous)));
        let a = poly(2, &[(1, &[1, 0])]);
        let b = poly(2, &[(1, &[2, 0])]);
        assert!(!p1.check_same_degree(&a, &b).unwrap());
    }

    #[test]
    fn cubic_dehomogenizes_to_product() {
        let p1 = ToricData::projective_space(1);
        let g = poly(2, &[(5, &[3, 0]), (21, &[2, 1]), (19, &[1, 2]), (3, &[0, 3])]);
        let (c, gh) = p1.dehomogenize(&g).unwrap();
        assert_eq!(c, vec![0, 3]);
                let coeffs: Vec<(Rat, Vec<i64>)> = gh.terms().to_vec();
        assert_eq!(
            coeffs,
            vec![(rat(3), vec![0]), (rat(19), vec![1]), (rat(21), vec![2]), (rat(5), vec![3])]
        );
    }

    #[test]
    fn homogenize_roundtrip_on_line() {
        let p1 = ToricData::projective_space(1);
        let num = RatPoly::monomial(rat(1), vec![1]);
        let den = RatPoly::from_terms(1, [(rat(1), vec![0]), (rat(2), vec![1]), (rat(1), vec![2])]).unwrap();
        let (f, g) = p1.homogenize(&num, &den).unwrap();
        assert!(p1.check_same_degree(&f, &g).unwrap());
        assert_eq!(f, poly(2, &[(1, &[1, 1])]));
        assert_eq!(g, poly(2, &[(1, &[0, 2]), (2, &[1, 1]), (1, &[2, 0])]));
    }

    #[test]
    fn gram_identity() {
        let x = ToricData::pentagon();
        let v = x.v_matrix();
        let vt: Vec<Vec<i64>> = x.rays().to_vec();
        assert!(cauchy_binet_check(&v, &vt).unwrap());
    }

    #[test]
    fn cube_grading_pairs_opposite_rays() {
        let c = ToricData::product_of_lines(3);
        for i in 0..3 {
            let mut a = vec![0; 6];
            let mut b = vec![0; 6];
            a[2 * i] = 1;
            b[2 * i + 1] = 1;
            assert_eq!(c.degree(&a).unwrap(), c.degree(&b).unwrap());
        }
        assert_eq!(c.maximal_cones().len(), 8);
    }
}
