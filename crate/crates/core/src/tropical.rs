//! Tropical approximation of `F/G` and its decomposition into sectors on
//! which `F^tr/G^tr` is a single monomial.

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    convex_hull, interior_point, minkowski_sum, normal_fan, relative_interior_contains, Convention,
    LatticePolytope, PlacingOrder, PolyhedralFan,
};
use crate::linalg::{det_i64, dot_i64, format_rat, ln_rat, rat_to_f64, Rat};
use crate::sampler::AliasTable;
use crate::poly::{dot_f, FactoredPolynomial, PositivePolynomial};
use crate::toric::ToricData;

/// One factor of a dehomogenized integrand, in torus coordinates.
#[derive(Clone, Debug)]
pub struct TorusFactor {
    poly: PositivePolynomial,
    mult: u32,
    polytope: LatticePolytope,
    log_coef: Vec<f64>,
    exps: Vec<f64>,
}

impl TorusFactor {
    fn new(poly: PositivePolynomial, mult: u32) -> Result<Self> {
        let polytope = poly.newton_polytope()?;
        let log_coef = poly.terms().iter().map(|(c, _)| ln_rat(c)).collect();
        let exps = poly.terms().iter().flat_map(|(_, e)| e.iter().map(|&x| x as f64)).collect();
        Ok(TorusFactor { poly, mult, polytope, log_coef, exps })
    }

    pub fn poly(&self) -> &PositivePolynomial {
        &self.poly
    }

    pub fn multiplicity(&self) -> u32 {
        self.mult
    }

    pub fn polytope(&self) -> &LatticePolytope {
        &self.polytope
    }

    /// `(ln p(t), max_ℓ ℓ·y)` at `y = ln t`, by a one-pass log-sum-exp.
    fn log_and_trop(&self, y: &[f64]) -> (f64, f64) {
        let n = y.len();
        let mut max_trop = f64::NEG_INFINITY;
        let mut m = f64::NEG_INFINITY;
        let mut s = 0.0;
        for (lc, e) in self.log_coef.iter().zip(self.exps.chunks_exact(n)) {
            let t: f64 = e.iter().zip(y).map(|(a, b)| a * b).sum();
            max_trop = max_trop.max(t);
            let v = lc + t;
            if v > m {
                s = s * (m - v).exp() + 1.0;
                m = v;
            } else {
                s += (v - m).exp();
            }
        }
        (m + s.ln(), max_trop)
    }
}

/// The degree-zero integrand `F/G` written on the torus as
/// `(s_F/s_G) · t^b · ∏ f̂_j^{m_j} / ∏ ĝ_j^{m_j}`.
#[derive(Clone, Debug)]
pub struct Integrand {
    toric: ToricData,
    f: FactoredPolynomial,
    g: FactoredPolynomial,
    num: Vec<TorusFactor>,
    den: Vec<TorusFactor>,
    unit: Vec<i64>,
    log_scalar: f64,
}

impl Integrand {
    pub fn new(toric: &ToricData, f: FactoredPolynomial, g: FactoredPolynomial) -> Result<Self> {
        let k = toric.num_rays();
        for p in [&f, &g] {
            if p.nvars() != k {
                return Err(Error::DimensionMismatch { expected: k, got: p.nvars() });
            }
        }
        let mut shift = vec![0i64; k];
        let mut side = |p: &FactoredPolynomial, sign: i64| -> Result<Vec<TorusFactor>> {
            let mut out = Vec::new();
            for (q, m) in p.factors() {
                let (c, qh) = toric.dehomogenize(q)?;
                for (s, ci) in shift.iter_mut().zip(&c) {
                    *s += sign * (*m as i64) * ci;
                }
                out.push(TorusFactor::new(qh, *m)?);
            }
            Ok(out)
        };
        let num = side(&f, 1)?;
        let den = side(&g, -1)?;
        let unit = toric.torus_exponent(&shift)?;
        let log_scalar = ln_rat(f.scalar()) - ln_rat(g.scalar());
        Ok(Integrand { toric: toric.clone(), f, g, num, den, unit, log_scalar })
    }

    pub fn from_polys(toric: &ToricData, f: &PositivePolynomial, g: &PositivePolynomial) -> Result<Self> {
        if !toric.check_same_degree(f, g)? {
            return Err(Error::Inhomogeneous);
        }
        Self::new(toric, FactoredPolynomial::from_poly(f), FactoredPolynomial::from_poly(g))
    }

    pub fn toric(&self) -> &ToricData {
        &self.toric
    }

    pub fn numerator(&self) -> &FactoredPolynomial {
        &self.f
    }

    pub fn denominator(&self) -> &FactoredPolynomial {
        &self.g
    }

    pub fn numerator_factors(&self) -> &[TorusFactor] {
        &self.num
    }

    pub fn denominator_factors(&self) -> &[TorusFactor] {
        &self.den
    }

    /// Exponent `b` of the torus unit collecting the dehomogenization shifts.
    pub fn unit(&self) -> &[i64] {
        &self.unit
    }

    pub fn dim(&self) -> usize {
        self.toric.dim()
    }

    /// `(ln F/G, ln F^tr/G^tr)` at `y = ln t`.
    pub fn log_value_and_trop(&self, y: &[f64]) -> (f64, f64) {
        let b = dot_f(&self.unit, y);
        let mut val = self.log_scalar + b;
        let mut trop = b;
        for (fs, sign) in [(&self.num, 1.0), (&self.den, -1.0)] {
            for fac in fs {
                if fac.mult == 0 {
                    continue;
                }
                let (v, t) = fac.log_and_trop(y);
                val += sign * fac.mult as f64 * v;
                trop += sign * fac.mult as f64 * t;
            }
        }
        (val, trop)
    }

    /// `ln h = ln (F G^tr)/(G F^tr)` at `y = ln t`.
    pub fn log_h(&self, y: &[f64]) -> f64 {
        let (v, t) = self.log_value_and_trop(y);
        v - t
    }

    /// `ln h` at Cox coordinates given as `ln x`.
    pub fn log_h_cox(&self, log_x: &[f64]) -> f64 {
        self.log_h(&self.toric.log_torus(log_x))
    }

    /// `ln F/G` computed directly from the Cox factors.
    pub fn log_value_cox(&self, log_x: &[f64]) -> f64 {
        self.f.eval_log(log_x) - self.g.eval_log(log_x)
    }

    /// Exact bounds `M1 <= h <= M2`.
    pub fn bounds(&self) -> (Rat, Rat) {
        (self.f.ratio_lower() / self.g.ratio_upper(), self.f.ratio_upper() / self.g.ratio_lower())
    }

    /// Newton polytopes of `F̂·t^b` and `Ĝ` in torus coordinates.
    pub fn newton_polytopes(&self) -> Result<(LatticePolytope, LatticePolytope)> {
        let sum = |fs: &[TorusFactor], start: Vec<i64>| -> Result<LatticePolytope> {
            let mut acc = convex_hull(&[start])?;
            for fac in fs {
                if fac.mult > 0 {
                    acc = minkowski_sum(&acc, &fac.polytope.scale(fac.mult as i64)?)?;
                }
            }
            Ok(acc)
        };
        Ok((sum(&self.num, self.unit.clone())?, sum(&self.den, vec![0; self.dim()])?))
    }

    /// `N(Ĝ)` is full-dimensional and contains `N(F̂)` in its interior.
    pub fn is_convergent(&self) -> Result<bool> {
        let (nf, ng) = self.newton_polytopes()?;
        Ok(ng.is_full_dimensional() && relative_interior_contains(&ng, &nf)?)
    }

    /// Minkowski sum of the Newton polytopes of all distinct factors, each
    /// taken once, so the result does not depend on multiplicities.
    pub fn factor_polytope(&self) -> Result<LatticePolytope> {
        let mut acc = convex_hull(&[vec![0; self.dim()]])?;
        for fac in self.num.iter().chain(&self.den) {
            acc = minkowski_sum(&acc, &fac.polytope)?;
        }
        Ok(acc)
    }

    /// Simplicial refinement of the normal fan of [`Self::factor_polytope`].
    pub fn sector_fan(&self, order: PlacingOrder) -> Result<PolyhedralFan> {
        let p = self.factor_polytope()?;
        if !p.is_full_dimensional() {
            return Err(Error::Divergent(format!(
                "Newton polytope has dimension {} < {}",
                p.dim(),
                p.ambient_dim()
            )));
        }
        Ok(normal_fan(&p, Convention::Max)?.simplicial_refine(order))
    }
}

/// Whether `∫ f/g Ω` converges.
pub fn convergence_check(f: &PositivePolynomial, g: &PositivePolynomial, toric: &ToricData) -> Result<bool> {
    Integrand::from_polys(toric, f, g)?.is_convergent()
}

/// Tropical approximation `max_ℓ x^ℓ`.
pub fn tropicalize_eval(f: &PositivePolynomial, x: &[f64]) -> Result<f64> {
    f.trop(x)
}

/// `max_ℓ ℓ·y` at `y = ln x`.
pub fn tropicalize_eval_log(f: &PositivePolynomial, y: &[f64]) -> f64 {
    f.trop_log(y)
}

#[derive(Clone, Debug)]
pub struct Sector {
    generators: Vec<Vec<i64>>,
    delta: Vec<i64>,
    cox_delta: Vec<i64>,
    nu_f: Vec<i64>,
    nu_g: Vec<i64>,
    vertex_choice: Vec<usize>,
    lifted: Vec<Vec<Rat>>,
    pairings: Vec<i64>,
    det: BigInt,
    trop_integral: Rat,
    /// Columns `z_ℓ/(z_ℓ·a)` used by the cube map.
    scaled: Vec<Vec<f64>>,
}

impl Sector {
    /// Cone generators `z_1, …, z_n` with `det Z > 0` when `n >= 2`.
    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    /// `a_σ` with `F^tr/G^tr = t^{-a_σ}` on the sector.
    pub fn delta(&self) -> &[i64] {
        &self.delta
    }

    /// `δ_σ = V^T a_σ`, the Cox exponent with `F^tr/G^tr = x^{-δ_σ}`.
    pub fn cox_delta(&self) -> &[i64] {
        &self.cox_delta
    }

    pub fn nu_f(&self) -> &[i64] {
        &self.nu_f
    }

    pub fn nu_g(&self) -> &[i64] {
        &self.nu_g
    }

    /// Index of the maximizing vertex of each factor (numerator factors
    /// first), the data-independent part of the sector.
    pub fn vertex_choice(&self) -> &[usize] {
        &self.vertex_choice
    }

    /// Minimum-norm lifts `w_ℓ` with `V w_ℓ = z_ℓ`.
    pub fn lifted_generators(&self) -> &[Vec<Rat>] {
        &self.lifted
    }

    /// `z_ℓ · a_σ`, all positive.
    pub fn pairings(&self) -> &[i64] {
        &self.pairings
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    /// `|det Z| / ∏ z_ℓ·a_σ`.
    pub fn trop_integral(&self) -> &Rat {
        &self.trop_integral
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorReport {
    pub generators: Vec<Vec<i64>>,
    pub delta: Vec<i64>,
    pub trop_integral: String,
}

#[derive(Clone, Debug)]
pub struct SectorTable {
    integrand: Integrand,
    fan: PolyhedralFan,
    sectors: Vec<Sector>,
    trop_total: Rat,
    bounds: (Rat, Rat),
    alias: AliasTable,
}

impl SectorTable {
    pub fn build(integrand: Integrand) -> Result<Self> {
        Self::build_with(integrand, PlacingOrder::Lex)
    }

    pub fn build_with(integrand: Integrand, order: PlacingOrder) -> Result<Self> {
        let fan = integrand.sector_fan(order)?;
        Self::from_fan(integrand, &fan)
    }

    pub fn from_polys(toric: &ToricData, f: &PositivePolynomial, g: &PositivePolynomial) -> Result<Self> {
        Self::build(Integrand::from_polys(toric, f, g)?)
    }

    /// Builds sectors over a given complete simplicial fan, which must refine
    /// the normal fan of every factor.
    pub fn from_fan(integrand: Integrand, fan: &PolyhedralFan) -> Result<Self> {
        let n = integrand.dim();
        if fan.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: fan.dim() });
        }
        if !fan.is_simplicial() {
            return Err(Error::InvalidFan("sector fan must be simplicial".into()));
        }
        let toric = integrand.toric.clone();
        let mut sectors = Vec::with_capacity(fan.maximal_cones().len());
        for (ci, _) in fan.maximal_cones().iter().enumerate() {
            let mut gens = fan.generators(ci);
            if n >= 2 && det_i64(&gens).is_negative() {
                gens.swap(0, 1);
            }
            let y = interior_point(&gens);
            let mut nu_f = integrand.unit.clone();
            let mut nu_g = vec![0i64; n];
            let mut choice = Vec::new();
            for (fs, nu) in [(&integrand.num, &mut nu_f), (&integrand.den, &mut nu_g)] {
                for fac in fs {
                    let (v, unique) = fac.polytope.argmax(&y);
                    if !unique {
                        return Err(Error::VertexTie { cone: ci });
                    }
                    choice.push(v);
                    let vert = &fac.polytope.vertices()[v];
                    for (a, b) in nu.iter_mut().zip(vert) {
                        *a += fac.mult as i64 * b;
                    }
                }
            }
            let delta: Vec<i64> = nu_g.iter().zip(&nu_f).map(|(g, f)| g - f).collect();
            let pairings: Vec<i64> = gens.iter().map(|z| dot_i64(z, &delta)).collect();
            if let Some(p) = pairings.iter().position(|&p| p <= 0) {
                return Err(Error::Divergent(format!(
                    "generator {:?} of sector {ci} pairs to {} with its exponent",
                    gens[p], pairings[p]
                )));
            }
            let det = det_i64(&gens);
            let denom: BigInt = pairings.iter().map(|&p| BigInt::from(p)).product();
            let trop_integral = Rat::new(det.abs(), denom);
            let scaled = gens
                .iter()
                .zip(&pairings)
                .map(|(z, &p)| z.iter().map(|&zi| zi as f64 / p as f64).collect())
                .collect();
            sectors.push(Sector {
                lifted: gens.iter().map(|z| toric.lift_vector(z)).collect(),
                cox_delta: toric.cox_exponent(&delta),
                generators: gens,
                delta,
                nu_f,
                nu_g,
                vertex_choice: choice,
                pairings,
                det,
                trop_integral,
                scaled,
            });
        }
        let trop_total = sectors.iter().map(|s| s.trop_integral.clone()).sum();
        let bounds = integrand.bounds();
        let weights: Vec<Rat> = sectors.iter().map(|s| &s.trop_integral / &trop_total).collect();
        let alias = AliasTable::from_rationals(&weights)?;
        Ok(SectorTable { integrand, fan: fan.clone(), sectors, trop_total, bounds, alias })
    }

    pub fn integrand(&self) -> &Integrand {
        &self.integrand
    }

    pub fn toric(&self) -> &ToricData {
        &self.integrand.toric
    }

    pub fn fan(&self) -> &PolyhedralFan {
        &self.fan
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    /// `I^tr = Σ_σ I^tr_σ`.
    pub fn trop_total(&self) -> &Rat {
        &self.trop_total
    }

    pub fn trop_total_f64(&self) -> f64 {
        rat_to_f64(&self.trop_total)
    }

    /// `(M1, M2)` with `M1 <= h <= M2`.
    pub fn h_bounds(&self) -> &(Rat, Rat) {
        &self.bounds
    }

    pub(crate) fn alias(&self) -> &AliasTable {
        &self.alias
    }

    /// Sector probabilities `I^tr_σ / I^tr`.
    pub fn sector_weights(&self) -> Vec<f64> {
        self.sectors.iter().map(|s| rat_to_f64(&(&s.trop_integral / &self.trop_total))).collect()
    }

    /// Torus point `ln t = -Σ_ℓ ln(q_ℓ) z_ℓ/(z_ℓ·a_σ)` for `q ∈ (0,1]^n`.
    pub fn cube_map_torus(&self, sector: usize, q: &[f64]) -> Result<Vec<f64>> {
        let s = &self.sectors[sector];
        let n = self.integrand.dim();
        if q.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: q.len() });
        }
        let mut y = vec![0.0; n];
        for (col, &ql) in s.scaled.iter().zip(q) {
            if !(ql > 0.0 && ql <= 1.0) {
                return Err(Error::CubeCoordinate(ql));
            }
            let lq = ql.ln();
            for (yi, ci) in y.iter_mut().zip(col) {
                *yi -= lq * ci;
            }
        }
        Ok(y)
    }

    /// Cox point `ln x` of the cube map, via the minimum-norm lift.
    pub fn cube_map(&self, sector: usize, q: &[f64]) -> Result<Vec<f64>> {
        Ok(self.toric().log_cox(&self.cube_map_torus(sector, q)?))
    }

    /// Cube map without the range check, for hot loops with `q` known valid.
    pub(crate) fn cube_map_torus_unchecked(&self, sector: usize, log_q: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (col, lq) in self.sectors[sector].scaled.iter().zip(log_q) {
            for (yi, ci) in y.iter_mut().zip(col) {
                *yi -= lq * ci;
            }
        }
    }

    pub fn report(&self) -> Vec<SectorReport> {
        self.sectors
            .iter()
            .map(|s| SectorReport {
                generators: s.generators.clone(),
                delta: s.delta.clone(),
                trop_integral: format_rat(&s.trop_integral),
            })
            .collect()
    }
}

/// `h = F G^tr / (G F^tr)` at a positive Cox point.
pub fn h_ratio(f: &PositivePolynomial, g: &PositivePolynomial, x: &[f64]) -> Result<f64> {
    let v = f.eval_log(&to_log(x)?) - g.eval_log(&to_log(x)?);
    let t = f.trop_log(&to_log(x)?) - g.trop_log(&to_log(x)?);
    let h = (v - t).exp();
    if h.is_finite() {
        Ok(h)
    } else {
        Err(Error::Overflow)
    }
}

/// `ln h` at `ln x`.
pub fn h_ratio_log(f: &PositivePolynomial, g: &PositivePolynomial, log_x: &[f64]) -> f64 {
    f.eval_log(log_x) - g.eval_log(log_x) - f.trop_log(log_x) + g.trop_log(log_x)
}

/// `h` evaluated exactly at a positive rational point.
pub fn h_ratio_exact(f: &PositivePolynomial, g: &PositivePolynomial, x: &[Rat]) -> Result<Rat> {
    Ok(f.eval(x)? * g.trop_exact(x)? / (g.eval(x)? * f.trop_exact(x)?))
}

fn to_log(x: &[f64]) -> Result<Vec<f64>> {
    x.iter()
        .map(|&v| if v > 0.0 { Ok(v.ln()) } else { Err(Error::NonPositivePoint) })
        .collect()
}

/// `M1 = min f / Σ g` and `M2 = Σ f / min g` over coefficients.
pub fn h_bounds(f: &PositivePolynomial, g: &PositivePolynomial) -> (Rat, Rat) {
    (f.min_coefficient() / g.coefficient_sum(), f.coefficient_sum() / g.min_coefficient())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cubic_on_line, line_density, pentagon_pair};
    use crate::linalg::{rat, ratio};

    fn sorted(t: &SectorTable) -> Vec<Rat> {
        let mut v: Vec<Rat> = t.sectors().iter().map(|s| s.trop_integral().clone()).collect();
        v.sort();
        v
    }

    #[test]
    fn cubic_sectors() {
        let (x, f, g) = cubic_on_line();
        assert!(convergence_check(&f, &g, &x).unwrap());
        let t = SectorTable::from_polys(&x, &f, &g).unwrap();
        assert_eq!(sorted(&t), vec![ratio(1, 2), rat(1)]);
        assert_eq!(*t.trop_total(), ratio(3, 2));
        assert_eq!(h_bounds(&f, &g), (ratio(1, 48), ratio(1, 3)));
        assert_eq!(*t.h_bounds(), (ratio(1, 48), ratio(1, 3)));
    }

    #[test]
    fn pentagon_sectors() {
        let (x, f, g) = pentagon_pair();
        assert!(convergence_check(&f, &g, &x).unwrap());
        let t = SectorTable::from_polys(&x, &f, &g).unwrap();
        assert_eq!(t.len(), 6);
        let mut expect = vec![rat(1), rat(2), ratio(3, 2), rat(1), ratio(1, 4), ratio(7, 2)];
        expect.sort();
        assert_eq!(sorted(&t), expect);
        assert_eq!(*t.trop_total(), ratio(37, 4));
        assert_eq!(*t.h_bounds(), (ratio(1, 24), ratio(10, 7)));
        let ones = vec![Rat::from_integer(1.into()); 5];
        assert_eq!(h_ratio_exact(&f, &g, &ones).unwrap(), ratio(5, 24));
    }

    #[test]
    fn equal_pair_diverges() {
        let (x, f, _) = cubic_on_line();
        assert!(!convergence_check(&f, &f, &x).unwrap());
        let (x, _, g) = pentagon_pair();
        assert!(!convergence_check(&g, &g, &x).unwrap());
        assert!(SectorTable::from_polys(&x, &g, &g).is_err());
    }

    #[test]
    fn line_density_total() {
        let (x, f, g) = line_density();
        let t = SectorTable::from_polys(&x, &f, &g).unwrap();
        assert_eq!(*t.trop_total(), rat(2));
    }

    #[test]
    fn cube_map_of_ones_is_origin() {
        let (x, f, g) = pentagon_pair();
        let t = SectorTable::from_polys(&x, &f, &g).unwrap();
        for s in 0..t.len() {
            let lx = t.cube_map(s, &[1.0, 1.0]).unwrap();
            assert!(lx.iter().all(|v| v.abs() < 1e-15));
        }
        assert!(t.cube_map(0, &[0.0, 0.5]).is_err());
    }

    #[test]
    fn torus_and_cox_values_agree() {
        let (x, f, g) = pentagon_pair();
        let i = Integrand::from_polys(&x, &f, &g).unwrap();
        let lx = [0.3, -0.7, 1.1, 0.2, -0.4];
        let a = i.log_value_cox(&lx);
        let (b, _) = i.log_value_and_trop(&x.log_torus(&lx));
        assert!((a - b).abs() < 1e-12);
        let h = h_ratio_log(&f, &g, &lx);
        assert!((h - i.log_h_cox(&lx)).abs() < 1e-12);
    }
}
