//! Simple lattice polytopes in facet form, the moment map and the lifted
//! uniform prior.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{det_rat, dot_i64, rank_i64, rat, solve, to_rat_vec, Rat};
use crate::poly::{log_sum_exp, PositivePolynomial, RatPoly};
use crate::toric::{subsets, ToricData};

/// `P = {y : <v_i, y> + alpha_i >= 0}` with the origin in its interior.
#[derive(Clone, Debug)]
pub struct PolytopeH {
    normals: Vec<Vec<i64>>,
    alpha: Vec<i64>,
    cones: Vec<Vec<usize>>,
    vertices: Vec<Vec<Rat>>,
}

impl PolytopeH {
    /// Builds the polytope from its `k` facet normals (each of length `n`)
    /// and offsets. Vertices are indexed by the `n`-sets of facets through
    /// them, in lexicographic order.
    pub fn new(normals: Vec<Vec<i64>>, alpha: Vec<i64>) -> Result<Self> {
        let k = normals.len();
        if k == 0 || alpha.len() != k {
            return Err(Error::InvalidPolytope("need one offset per facet".into()));
        }
        let n = normals[0].len();
        if normals.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: 0 });
        }
        if alpha.iter().any(|a| *a <= 0) {
            return Err(Error::InvalidPolytope("offsets must be positive".into()));
        }
        if rank_i64(&normals) != n {
            return Err(Error::RankDeficient { rank: rank_i64(&normals), expected: n });
        }
        let mut cones = Vec::new();
        let mut vertices = Vec::new();
        for s in subsets(k, n) {
            let a: Vec<Vec<Rat>> = s.iter().map(|&i| to_rat_vec(&normals[i])).collect();
            let b: Vec<Rat> = s.iter().map(|&i| rat(-alpha[i])).collect();
            let Some(y) = solve(&a, &b) else { continue };
            let mut feasible = true;
            for i in (0..k).filter(|i| !s.contains(i)) {
                let val = slack(&normals[i], alpha[i], &y);
                if val.is_negative() {
                    feasible = false;
                    break;
                }
                if val.is_zero() {
                    return Err(Error::InvalidPolytope("polytope is not simple".into()));
                }
            }
            if feasible {
                cones.push(s);
                vertices.push(y);
            }
        }
        let p = PolytopeH { normals, alpha, cones, vertices };
        p.toric().map_err(|_| Error::InvalidPolytope("polytope is unbounded".into()))?;
        Ok(p)
    }

    /// The pentagon with normals `(1,0), (1,-1), (-1,-1), (-1,1), (0,1)` and
    /// all offsets 1. Its vertices `(0,-1), (-1,-1), (-1,0), (0,1), (1,0)` are
    /// those of the lattice pentagon with vertices `(1,0), (0,0), (0,1), (1,2),
    /// (2,1)` shifted by `(-1,-1)`, so that the origin is interior. Vertices
    /// are ordered `q45, q51, q12, q23, q34`.
    pub fn pentagon() -> Self {
        let mut p = Self::new(
            vec![vec![1, 0], vec![1, -1], vec![-1, -1], vec![-1, 1], vec![0, 1]],
            vec![1; 5],
        )
        .expect("valid pentagon");
        p.reorder(&[vec![3, 4], vec![0, 4], vec![0, 1], vec![1, 2], vec![2, 3]]);
        p
    }

    /// The cube `[-1, 1]^d`; facet `2i` is `1 + y_i >= 0`, facet `2i+1` is
    /// `1 - y_i >= 0`.
    pub fn cube(d: usize) -> Self {
        let mut normals = Vec::new();
        for i in 0..d {
            let mut e = vec![0; d];
            e[i] = 1;
            normals.push(e.clone());
            e[i] = -1;
            normals.push(e);
        }
        Self::new(normals, vec![1; 2 * d]).expect("valid cube")
    }

    /// The simplex `{1 + y_i >= 0, 1 - sum y >= 0}`.
    pub fn simplex(n: usize) -> Self {
        let mut normals: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                e
            })
            .collect();
        normals.push(vec![-1; n]);
        Self::new(normals, vec![1; n + 1]).expect("valid simplex")
    }

    fn reorder(&mut self, order: &[Vec<usize>]) {
        let mut cones = Vec::new();
        let mut verts = Vec::new();
        for c in order {
            let i = self.cones.iter().position(|d| d == c).expect("known cone");
            cones.push(self.cones[i].clone());
            verts.push(self.vertices[i].clone());
        }
        self.cones = cones;
        self.vertices = verts;
    }

    pub fn dim(&self) -> usize {
        self.normals[0].len()
    }

    pub fn num_facets(&self) -> usize {
        self.normals.len()
    }

    pub fn normals(&self) -> &[Vec<i64>] {
        &self.normals
    }

    pub fn alpha(&self) -> &[i64] {
        &self.alpha
    }

    /// Maximal cones of the inner normal fan, one per vertex.
    pub fn cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn vertices(&self) -> &[Vec<Rat>] {
        &self.vertices
    }

    /// The toric variety of the inner normal fan.
    pub fn toric(&self) -> Result<ToricData> {
        ToricData::new(self.normals.clone(), self.cones.clone())
    }

    /// `q = sum_I t^{q_I}`; needs lattice vertices.
    pub fn vertex_polynomial(&self) -> Result<PositivePolynomial> {
        let mut terms = Vec::new();
        for v in &self.vertices {
            if v.iter().any(|c| !c.is_integer()) {
                return Err(Error::InvalidPolytope("vertices are not lattice points".into()));
            }
            let e: Vec<i64> = v.iter().map(|c| i64::try_from(c.to_integer()).expect("small vertex")).collect();
            terms.push((rat(1), e));
        }
        PositivePolynomial::laurent(self.dim(), terms)
    }

    /// `l_i(y) = alpha_i + <v_i, y>`.
    pub fn facet_value(&self, i: usize, y: &[Rat]) -> Rat {
        slack(&self.normals[i], self.alpha[i], y)
    }

    pub fn contains_strictly(&self, y: &[Rat]) -> bool {
        (0..self.num_facets()).all(|i| self.facet_value(i, y).is_positive())
    }

    pub fn contains_strictly_f64(&self, y: &[f64]) -> bool {
        self.normals
            .iter()
            .zip(&self.alpha)
            .all(|(v, a)| *a as f64 + v.iter().zip(y).map(|(vi, yi)| *vi as f64 * yi).sum::<f64>() > 0.0)
    }

    /// `|det Ṽ_I|` where the columns of `Ṽ_I` are `v_i / alpha_i`.
    pub fn scaled_det(&self, cone: &[usize]) -> Rat {
        let m: Vec<Vec<Rat>> = cone
            .iter()
            .map(|&i| self.normals[i].iter().map(|v| Rat::new((*v).into(), self.alpha[i].into())).collect())
            .collect();
        det_rat(&m).abs()
    }

    /// `1 + <v_i, y>/alpha_i` as a polynomial in `y`.
    pub fn scaled_form(&self, i: usize) -> RatPoly {
        let n = self.dim();
        let a = rat(self.alpha[i]);
        let mut p = RatPoly::constant(n, rat(1));
        for (j, v) in self.normals[i].iter().enumerate() {
            p = p.add(&RatPoly::var(n, j).scale(&(rat(*v) / &a)));
        }
        p
    }

    /// The adjoint `A(y) = sum_I |det Ṽ_I| prod_{i not in I} (1 + <v_i,y>/alpha_i)`.
    pub fn adjoint(&self) -> RatPoly {
        let mut a = RatPoly::zero(self.dim());
        for cone in &self.cones {
            a = a.add(&self.wachspress_numerator(cone));
        }
        a
    }

    fn wachspress_numerator(&self, cone: &[usize]) -> RatPoly {
        let mut p = RatPoly::constant(self.dim(), self.scaled_det(cone));
        for i in (0..self.num_facets()).filter(|i| !cone.contains(i)) {
            p = p.mul(&self.scaled_form(i));
        }
        p
    }

    /// Wachspress coordinates `p_I(y)` in vertex order.
    pub fn wachspress_eval(&self, y: &[Rat]) -> Vec<Rat> {
        let nums: Vec<Rat> = self.cones.iter().map(|c| self.wachspress_numerator(c).eval(y)).collect();
        let a: Rat = nums.iter().sum();
        nums.into_iter().map(|x| x / &a).collect()
    }

    /// The weights `1/gamma_i` of the linear model `p_i = l_i / gamma_i`:
    /// a positive kernel vector of `V` normalized against `alpha`. When the
    /// normals sum to zero the all-ones vector is used; otherwise the kernel
    /// vectors `w_i` with `w_ii = 1` and support on the cone containing
    /// `-v_i` are averaged.
    pub fn linear_weights(&self) -> Result<Vec<Rat>> {
        let n = self.dim();
        let k = self.num_facets();
        let w = if (0..n).all(|j| self.normals.iter().map(|v| v[j]).sum::<i64>() == 0) {
            vec![rat(1); k]
        } else {
            let mut acc = vec![Rat::zero(); k];
            for i in 0..k {
                let target: Vec<Rat> = self.normals[i].iter().map(|v| rat(-v)).collect();
                let mut found = false;
                for cone in &self.cones {
                    // columns v_j, j in cone: solve sum lambda_j v_j = -v_i
                    let a: Vec<Vec<Rat>> =
                        (0..n).map(|r| cone.iter().map(|&j| rat(self.normals[j][r])).collect()).collect();
                    if let Some(l) = solve(&a, &target) {
                        if l.iter().all(|x| !x.is_negative()) {
                            acc[i] += rat(1);
                            for (&j, x) in cone.iter().zip(&l) {
                                acc[j] += x;
                            }
                            found = true;
                            break;
                        }
                    }
                }
                if !found {
                    return Err(Error::InvalidPolytope("normal fan is not complete".into()));
                }
            }
            acc
        };
        debug_assert!((0..n).all(|j| w.iter().zip(&self.normals).map(|(x, v)| x * rat(v[j])).sum::<Rat>().is_zero()));
        if w.iter().any(|x| !x.is_positive()) {
            return Err(Error::InvalidPolytope("no positive kernel vector".into()));
        }
        let norm: Rat = w.iter().zip(&self.alpha).map(|(x, a)| x * rat(*a)).sum();
        Ok(w.into_iter().map(|x| x / &norm).collect())
    }

    /// `L_i(t) = q(t) l_i(phi(t)) = sum_a c_a (alpha_i + <v_i, a>) t^a`.
    pub fn lifted_form(&self, q: &PositivePolynomial, i: usize) -> Result<RatPoly> {
        let terms = q
            .terms()
            .iter()
            .map(|(c, a)| (c * rat(self.alpha[i] + dot_i64(&self.normals[i], a)), a.clone()))
            .filter(|(c, _)| !c.is_zero());
        RatPoly::from_terms(self.dim(), terms)
    }
}

fn slack(v: &[i64], a: i64, y: &[Rat]) -> Rat {
    v.iter().zip(y).map(|(vi, yi)| rat(*vi) * yi).sum::<Rat>() + rat(a)
}

/// `phi(t) = sum_a (c_a t^a / q(t)) a`, evaluated at `ln t`.
pub fn moment_map_log(q: &PositivePolynomial, log_t: &[f64]) -> Vec<f64> {
    let logs: Vec<f64> = q
        .terms()
        .iter()
        .map(|(c, a)| crate::linalg::ln_rat(c) + a.iter().zip(log_t).map(|(e, y)| *e as f64 * y).sum::<f64>())
        .collect();
    let z = log_sum_exp(&logs);
    let mut out = vec![0.0; q.nvars()];
    for ((_, a), l) in q.terms().iter().zip(&logs) {
        let w = (l - z).exp();
        for (o, e) in out.iter_mut().zip(a) {
            *o += w * *e as f64;
        }
    }
    out
}

pub fn moment_map(q: &PositivePolynomial, t: &[f64]) -> Result<Vec<f64>> {
    if t.iter().any(|x| x.is_nan() || *x <= 0.0) {
        return Err(Error::NonPositivePoint);
    }
    let log_t: Vec<f64> = t.iter().map(|x| x.ln()).collect();
    Ok(moment_map_log(q, &log_t))
}

/// Exact moment map at a positive rational point.
pub fn moment_map_exact(q: &PositivePolynomial, t: &[Rat]) -> Result<Vec<Rat>> {
    let z = q.eval(t)?;
    let mut out = vec![Rat::zero(); q.nvars()];
    for (c, a) in q.terms() {
        let w = RatPoly::monomial(c.clone(), a.clone()).eval(t) / &z;
        for (o, e) in out.iter_mut().zip(a) {
            *o += &w * rat(*e);
        }
    }
    Ok(out)
}

/// Numerator and power of `q` in `det H = N(t) / q(t)^e`, where `H` is the
/// toric Hessian of `ln q`. `N` comes from the Cauchy–Binet expansion
/// `sum_S prod c_a t^a det[1 a]_S^2` over `(n+1)`-sets of terms; common
/// factors of `q` are cancelled.
pub fn hessian_determinant(q: &PositivePolynomial) -> Result<(RatPoly, u32)> {
    let n = q.nvars();
    let terms = q.terms();
    if terms.len() < n + 1 {
        return Err(Error::NotFullDimensional { dim: terms.len().saturating_sub(1), ambient: n });
    }
    let mut num = RatPoly::zero(n);
    for s in subsets(terms.len(), n + 1) {
        let m: Vec<Vec<Rat>> = s
            .iter()
            .map(|&i| std::iter::once(rat(1)).chain(terms[i].1.iter().map(|e| rat(*e))).collect())
            .collect();
        let d = det_rat(&m);
        if d.is_zero() {
            continue;
        }
        let mut c = &d * &d;
        let mut e = vec![0i64; n];
        for &i in &s {
            c *= &terms[i].0;
            for (x, y) in e.iter_mut().zip(&terms[i].1) {
                *x += y;
            }
        }
        num = num.add(&RatPoly::monomial(c, e));
    }
    if num.is_zero() {
        return Err(Error::NotFullDimensional { dim: 0, ambient: n });
    }
    let qp = q.to_ratpoly();
    let mut power = n as u32 + 1;
    while power > 0 {
        match num.divide_exact(&qp) {
            Some(r) => {
                num = r;
                power -= 1;
            }
            None => break,
        }
    }
    Ok((num, power))
}

/// The pullback of `dy_1 ... dy_n` under the moment map, written as `f/g`
/// in Cox coordinates: `f Ω / g` integrates to the volume of `P`.
pub fn hessian_prior(q: &PositivePolynomial, toric: &ToricData) -> Result<(PositivePolynomial, PositivePolynomial)> {
    if q.nvars() != toric.dim() {
        return Err(Error::DimensionMismatch { expected: toric.dim(), got: q.nvars() });
    }
    let (num, power) = hessian_determinant(q)?;
    PositivePolynomial::try_from_ratpoly(&num).map_err(|_| {
        Error::InvalidModel("Hessian numerator has a nonpositive coefficient".into())
    })?;
    toric.homogenize(&num, &q.to_ratpoly().pow(power))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;
    use crate::tropical::convergence_check;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pentagon_vertices() {
        let p = PolytopeH::pentagon();
        let q = p.vertex_polynomial().unwrap();
        let exps: Vec<Vec<i64>> = q.exponents();
        for v in [[0, -1], [-1, -1], [-1, 0], [0, 1], [1, 0]] {
            assert!(exps.contains(&v.to_vec()));
        }
        assert_eq!(p.vertices()[0], vec![rat(0), rat(-1)]);
    }

    #[test]
    fn moment_map_at_one() {
        let q = PolytopeH::pentagon().vertex_polynomial().unwrap();
        let y = moment_map_exact(&q, &[rat(1), rat(1)]).unwrap();
        assert_eq!(y, vec![ratio(-1, 5), ratio(-1, 5)]);
        let sq = PolytopeH::cube(2).vertex_polynomial().unwrap();
        let y = moment_map(&sq, &[1.0, 1.0]).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn moment_map_lands_inside() {
        let p = PolytopeH::pentagon();
        let q = p.vertex_polynomial().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let lt = [rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0)];
            assert!(p.contains_strictly_f64(&moment_map_log(&q, &lt)));
        }
    }

    #[test]
    fn pentagon_hessian_numerator() {
        let q = PolytopeH::pentagon().vertex_polynomial().unwrap();
        let (num, power) = hessian_determinant(&q).unwrap();
        assert_eq!(power, 3);
        // times (t1 t2)^2 gives the polynomial numerator
        let shifted = num.shift(&[2, 2]);
        let expect = [
            (4, [3, 2]),
            (4, [2, 3]),
            (9, [2, 2]),
            (4, [2, 1]),
            (4, [1, 2]),
            (1, [2, 0]),
            (8, [1, 1]),
            (1, [0, 2]),
            (1, [0, 0]),
        ];
        assert_eq!(shifted.len(), expect.len());
        for (c, e) in expect {
            assert_eq!(shifted.coefficient(&e), rat(c));
        }
    }

    #[test]
    fn cube_prior() {
        let toric = ToricData::product_of_lines(3);
        let q = PositivePolynomial::laurent(1, vec![(rat(1), vec![0]), (rat(1), vec![1])]).unwrap();
        let q3 = {
            let mut terms = Vec::new();
            for m in 0..8 {
                terms.push((rat(1), (0..3).map(|i| (m >> i) & 1).collect()));
            }
            PositivePolynomial::laurent(3, terms).unwrap()
        };
        let (f, g) = hessian_prior(&q3, &toric).unwrap();
        assert_eq!(f.terms(), &[(rat(1), vec![1; 6])]);
        let lin = |a: usize| {
            let mut e0 = vec![0; 6];
            let mut e1 = vec![0; 6];
            e0[a] = 1;
            e1[a + 1] = 1;
            PositivePolynomial::new(6, vec![(rat(1), e0), (rat(1), e1)]).unwrap()
        };
        let expect = lin(0).mul(&lin(2)).mul(&lin(4)).pow(2);
        assert_eq!(g, expect);
        assert!(convergence_check(&f, &g, &toric).unwrap());
        let (f1, g1) = hessian_prior(&q, &ToricData::product_of_lines(1)).unwrap();
        assert_eq!(f1.terms(), &[(rat(1), vec![1, 1])]);
        assert_eq!(g1.terms().len(), 3);
    }

    #[test]
    fn priors_converge() {
        for p in [PolytopeH::pentagon(), PolytopeH::cube(2), PolytopeH::simplex(2), PolytopeH::simplex(3)] {
            let toric = p.toric().unwrap();
            let (f, g) = hessian_prior(&p.vertex_polynomial().unwrap(), &toric).unwrap();
            assert!(convergence_check(&f, &g, &toric).unwrap());
        }
    }

    #[test]
    fn adjoints() {
        let p = PolytopeH::pentagon();
        let y1 = RatPoly::var(2, 0);
        let y2 = RatPoly::var(2, 1);
        let d = y1.sub(&y2);
        let expect = RatPoly::constant(2, rat(7)).add(&y1.add(&y2).scale(&rat(2))).sub(&d.mul(&d));
        assert_eq!(p.adjoint(), expect);
        assert_eq!(PolytopeH::cube(2).adjoint(), RatPoly::constant(2, rat(4)));
        assert_eq!(PolytopeH::simplex(3).adjoint().total_degree(), Some(0));
    }

    #[test]
    fn linear_weights() {
        assert_eq!(PolytopeH::pentagon().linear_weights().unwrap(), vec![ratio(1, 5); 5]);
        assert_eq!(PolytopeH::cube(2).linear_weights().unwrap(), vec![ratio(1, 4); 4]);
        let s = PolytopeH::simplex(2).linear_weights().unwrap();
        assert_eq!(s, vec![ratio(1, 3); 3]);
        let tri = PolytopeH::new(vec![vec![1, 0], vec![0, 1], vec![-1, -2]], vec![1, 1, 2]).unwrap();
        let w = tri.linear_weights().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let y = [ratio(rng.random_range(-10..10), 37), ratio(rng.random_range(-10..10), 41)];
            let s: Rat = (0..3).map(|i| tri.facet_value(i, &y) * &w[i]).sum();
            assert_eq!(s, rat(1));
        }
    }

    #[test]
    fn wachspress_barycentric() {
        let p = PolytopeH::pentagon();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        while checked < 20 {
            let y = [ratio(rng.random_range(-100..100), 101), ratio(rng.random_range(-100..100), 103)];
            if !p.contains_strictly(&y) {
                continue;
            }
            let w = p.wachspress_eval(&y);
            assert_eq!(w.iter().sum::<Rat>(), rat(1));
            for j in 0..2 {
                let s: Rat = w.iter().zip(p.vertices()).map(|(a, v)| a * &v[j]).sum();
                assert_eq!(s, y[j]);
            }
            checked += 1;
        }
        let w = p.wachspress_eval(&[rat(0), rat(0)]);
        assert_eq!(w, vec![ratio(1, 7), ratio(1, 7), ratio(1, 7), ratio(2, 7), ratio(2, 7)]);
    }

    #[test]
    fn triangle_wachspress_is_affine() {
        let p = PolytopeH::simplex(2);
        let y = [ratio(1, 3), ratio(-1, 5)];
        let w = p.wachspress_eval(&y);
        let lin = p.linear_weights().unwrap();
        // for a simplex both constructions give barycentric coordinates
        let mut bary: Vec<Rat> = Vec::new();
        for c in p.cones() {
            let i = (0..3).find(|i| !c.contains(i)).unwrap();
            bary.push(p.facet_value(i, &y) * &lin[i]);
        }
        assert_eq!(w, bary);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PolytopeH::new(vec![vec![1, 0], vec![0, 1]], vec![1, 1]).is_err());
        assert!(PolytopeH::new(vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![1, 0, 1]).is_err());
        // square pyramid apex lies on four facets
        let pyr = PolytopeH::new(
            vec![vec![0, 0, 1], vec![1, 0, -1], vec![-1, 0, -1], vec![0, 1, -1], vec![0, -1, -1]],
            vec![1, 1, 1, 1, 1],
        );
        assert!(pyr.is_err());
    }
}
