//! Statistical models on positive toric varieties: coordinates `p_i = q_i/r_i`
//! with a prior `f/g`, likelihood integrands and marginal likelihoods.

mod json;
mod polytope;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{PlacingOrder, PolyhedralFan};
use crate::linalg::{format_rat, rat, Rat};
use crate::poly::{log_sum_exp, FactoredPolynomial, PositivePolynomial, RatPoly};
use crate::sampler::{cubature_integral, mc_estimate, rejection_sample, BatchSummary, SampleBatch};
use crate::toric::ToricData;
use crate::tropical::{Integrand, SectorTable};

pub use json::{CoordinateJson, ModelJson, PolyJson};
pub use polytope::{hessian_determinant, hessian_prior, moment_map, moment_map_exact, moment_map_log, PolytopeH};

/// A degree-zero ratio `num/den` of factored Cox polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coordinate {
    pub num: FactoredPolynomial,
    pub den: FactoredPolynomial,
}

impl Coordinate {
    pub fn new(num: FactoredPolynomial, den: FactoredPolynomial) -> Self {
        Coordinate { num, den }
    }

    pub fn from_polys(num: &PositivePolynomial, den: &PositivePolynomial) -> Self {
        Coordinate { num: FactoredPolynomial::from_poly(num), den: FactoredPolynomial::from_poly(den) }
    }

    pub fn eval_log(&self, log_x: &[f64]) -> f64 {
        self.num.eval_log(log_x) - self.den.eval_log(log_x)
    }

    pub fn eval(&self, x: &[Rat]) -> Result<Rat> {
        Ok(self.num.eval(x)? / self.den.eval(x)?)
    }
}

/// Class-group degree of a factored polynomial, or `None` if some factor is
/// not homogeneous.
pub fn factored_degree(toric: &ToricData, p: &FactoredPolynomial) -> Result<Option<Vec<i64>>> {
    let mut d = vec![0i64; toric.grading().len()];
    for (f, m) in p.factors() {
        match toric.poly_degree(f)? {
            Some(df) => {
                for (a, b) in d.iter_mut().zip(df) {
                    *a += *m as i64 * b;
                }
            }
            None => return Ok(None),
        }
    }
    Ok(Some(d))
}

/// Lifts `(s_num ∏ a_j^{m_j}) / (s_den ∏ b_j^{n_j})`, a ratio of Laurent
/// polynomials on the torus, factor by factor to Cox coordinates. The
/// leftover monomial becomes its own factor.
pub fn lift_factored(
    toric: &ToricData,
    num: (Rat, &[(RatPoly, u32)]),
    den: (Rat, &[(RatPoly, u32)]),
) -> Result<Coordinate> {
    let k = toric.num_rays();
    let mut shift = vec![0i64; k];
    let mut side = |(s, fs): (Rat, &[(RatPoly, u32)]), sign: i64| -> Result<FactoredPolynomial> {
        let mut out = FactoredPolynomial::one(k).scale(&s)?;
        for (p, m) in fs {
            let (low, lifted) = toric.cox_lift(p)?;
            for (a, l) in shift.iter_mut().zip(low) {
                *a += sign * *m as i64 * l;
            }
            out.push(&lifted, *m);
        }
        Ok(out)
    };
    let mut n = side(num, 1)?;
    let mut d = side(den, -1)?;
    let pos: Vec<i64> = shift.iter().map(|s| (*s).max(0)).collect();
    let neg: Vec<i64> = shift.iter().map(|s| (-*s).max(0)).collect();
    if pos.iter().any(|x| *x != 0) {
        n.push(&PositivePolynomial::monomial(Rat::one(), pos)?, 1);
    }
    if neg.iter().any(|x| *x != 0) {
        d.push(&PositivePolynomial::monomial(Rat::one(), neg)?, 1);
    }
    Ok(Coordinate { num: n, den: d })
}

/// A statistical model `x ↦ (p_0(x), …, p_m(x))` on `X_{>0}` together with a
/// prior density `f/g` with respect to the canonical form. A model without
/// coordinates describes a bare integrand `f/g`.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    toric: ToricData,
    coords: Vec<Coordinate>,
    prior: Coordinate,
}

impl ModelSpec {
    /// Validates degrees, the sum-to-one identity at 20 random points and
    /// convergence of the prior.
    pub fn new(toric: ToricData, coords: Vec<Coordinate>, prior: Coordinate) -> Result<Self> {
        let k = toric.num_rays();
        for (i, c) in coords.iter().chain(std::iter::once(&prior)).enumerate() {
            let what = if i < coords.len() { format!("coordinate {i}") } else { "prior".to_string() };
            if c.num.nvars() != k || c.den.nvars() != k {
                return Err(Error::InvalidModel(format!("{what}: expected {k} Cox variables")));
            }
            let dn = factored_degree(&toric, &c.num)?;
            let dd = factored_degree(&toric, &c.den)?;
            match (dn, dd) {
                (Some(a), Some(b)) if a == b => {}
                (Some(a), Some(b)) => {
                    return Err(Error::InvalidModel(format!("{what}: degrees {a:?} and {b:?} differ")))
                }
                _ => return Err(Error::InvalidModel(format!("{what}: not homogeneous"))),
            }
        }
        let model = ModelSpec { toric, coords, prior };
        if !model.coords.is_empty() {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..20 {
                let lx: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
                let r = model.sum_residual(&lx);
                if r.is_nan() || r >= 1e-10 {
                    return Err(Error::InvalidModel(format!("coordinates do not sum to one (residual {r:e})")));
                }
            }
        }
        if !model.prior_integrand()?.is_convergent()? {
            return Err(Error::Divergent("prior is not integrable".into()));
        }
        Ok(model)
    }

    /// Looks up a built-in model: `coin(m)`, `pentagon-linear`,
    /// `pentagon-wachspress` or `pentagon-toric(c0,…,c5)`.
    pub fn builtin(name: &str) -> Result<Self> {
        let name = name.trim();
        let bad = || Error::InvalidArgument(format!("unknown model '{name}'"));
        if let Some(arg) = name.strip_prefix("coin(").and_then(|s| s.strip_suffix(')')) {
            let m: usize = arg.trim().parse().map_err(|_| bad())?;
            return coin_model(m);
        }
        if let Some(arg) = name.strip_prefix("pentagon-toric(").and_then(|s| s.strip_suffix(')')) {
            let c: Vec<Rat> = arg
                .split(',')
                .map(|s| crate::linalg::parse_rat(s.trim()).ok_or_else(bad))
                .collect::<Result<_>>()?;
            return pentagon_toric(&c);
        }
        match name {
            "pentagon-linear" => linear_model(&PolytopeH::pentagon()),
            "pentagon-wachspress" => wachspress_model(&PolytopeH::pentagon()),
            _ => Err(bad()),
        }
    }

    pub fn toric(&self) -> &ToricData {
        &self.toric
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn prior(&self) -> &Coordinate {
        &self.prior
    }

    pub fn num_states(&self) -> usize {
        self.coords.len()
    }

    /// `ln p_i` at Cox coordinates `ln x`.
    pub fn log_probabilities(&self, log_x: &[f64]) -> Vec<f64> {
        self.coords.iter().map(|c| c.eval_log(log_x)).collect()
    }

    /// `|ln Σ p_i|`.
    pub fn sum_residual(&self, log_x: &[f64]) -> f64 {
        log_sum_exp(&self.log_probabilities(log_x)).abs()
    }

    /// `ln L_u = Σ u_i ln p_i`.
    pub fn log_likelihood(&self, u: &[u32], log_x: &[f64]) -> f64 {
        self.coords.iter().zip(u).map(|(c, k)| if *k == 0 { 0.0 } else { *k as f64 * c.eval_log(log_x) }).sum()
    }

    pub fn prior_integrand(&self) -> Result<Integrand> {
        Integrand::new(&self.toric, self.prior.num.clone(), self.prior.den.clone())
    }

    /// `F/G = L_u f/g` with `F = f ∏ q_i^{u_i}` and `G = g ∏ r_i^{u_i}`, kept
    /// factored. Factors with `u_i = 0` stay with multiplicity zero so that
    /// the sector fan does not depend on `u`.
    pub fn likelihood_integrand(&self, u: &[u32]) -> Result<Integrand> {
        if u.len() != self.coords.len() {
            return Err(Error::DimensionMismatch { expected: self.coords.len(), got: u.len() });
        }
        let mut f = self.prior.num.clone();
        let mut g = self.prior.den.clone();
        for (c, k) in self.coords.iter().zip(u) {
            f = f.mul(&c.num.pow(*k));
            g = g.mul(&c.den.pow(*k));
        }
        Integrand::new(&self.toric, f, g)
    }

    /// The sector fan shared by all likelihood integrands of this model.
    pub fn sector_fan(&self) -> Result<PolyhedralFan> {
        self.likelihood_integrand(&vec![0; self.coords.len()])?.sector_fan(PlacingOrder::default())
    }

    /// Sector table of `L_u f/g`, reusing `fan` when given.
    pub fn likelihood_table(&self, u: &[u32], fan: Option<&PolyhedralFan>) -> Result<SectorTable> {
        let integrand = self.likelihood_integrand(u)?;
        match fan {
            Some(f) => SectorTable::from_fan(integrand, f),
            None => SectorTable::build(integrand),
        }
    }

    pub fn prior_table(&self) -> Result<SectorTable> {
        SectorTable::build(self.prior_integrand()?)
    }

    pub fn to_json(&self) -> ModelJson {
        json::to_json(self)
    }

    pub fn from_json(j: &ModelJson) -> Result<Self> {
        json::from_json(j)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: ModelJson = serde_json::from_str(s)?;
        json::from_json(&j)
    }
}

/// Outcome of [`check`].
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub homogeneous: bool,
    pub sums_to_one: bool,
    pub convergent: bool,
    /// Degrees of the numerator and denominator of `L_u f/g`.
    pub degrees: Vec<Option<Vec<i64>>>,
    /// Dimensions of the Newton polytopes of numerator and denominator.
    pub newton_dims: Vec<usize>,
}

/// Diagnoses a model without rejecting it: homogeneity of every ratio,
/// the sum-to-one identity and convergence of `∫ L_u f/g Ω` (of the prior
/// when `u` is absent).
pub fn check(toric: &ToricData, coords: &[Coordinate], prior: &Coordinate, u: Option<&[u32]>) -> Result<CheckReport> {
    let mut homogeneous = true;
    for c in coords.iter().chain(std::iter::once(prior)) {
        let dn = factored_degree(toric, &c.num)?;
        homogeneous &= dn.is_some() && dn == factored_degree(toric, &c.den)?;
    }
    let mut f = prior.num.clone();
    let mut g = prior.den.clone();
    if let Some(u) = u {
        if u.len() != coords.len() {
            return Err(Error::DimensionMismatch { expected: coords.len(), got: u.len() });
        }
        for (c, k) in coords.iter().zip(u) {
            f = f.mul(&c.num.pow(*k));
            g = g.mul(&c.den.pow(*k));
        }
    }
    let degrees = vec![factored_degree(toric, &f)?, factored_degree(toric, &g)?];
    let sums_to_one = coords.is_empty() || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        (0..20).all(|_| {
            let lx: Vec<f64> = (0..toric.num_rays()).map(|_| rng.random_range(-2.0..2.0)).collect();
            log_sum_exp(&coords.iter().map(|c| c.eval_log(&lx)).collect::<Vec<_>>()).abs() < 1e-10
        })
    };
    let (convergent, newton_dims) = if homogeneous {
        let it = Integrand::new(toric, f, g)?;
        let (nf, ng) = it.newton_polytopes()?;
        (it.is_convergent()?, vec![nf.dim(), ng.dim()])
    } else {
        (false, Vec::new())
    };
    Ok(CheckReport { homogeneous, sums_to_one, convergent, degrees, newton_dims })
}

/// `U! / (u_0! ⋯ u_m!)` in log form.
pub fn log_multinomial(u: &[u32]) -> f64 {
    let lf = |n: u64| (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
    lf(u.iter().map(|x| *x as u64).sum()) - u.iter().map(|x| lf(*x as u64)).sum::<f64>()
}

fn prior_from(q: &PositivePolynomial, toric: &ToricData) -> Result<Coordinate> {
    let (f, g) = hessian_prior(q, toric)?;
    Ok(Coordinate::from_polys(&f, &g))
}

/// Facet model `p_i = l_i(y)/gamma_i` pulled back along the moment map of the
/// vertex polynomial, with the lifted uniform prior.
pub fn linear_model(p: &PolytopeH) -> Result<ModelSpec> {
    let toric = p.toric()?;
    let q = p.vertex_polynomial()?;
    let qr = q.to_ratpoly();
    let w = p.linear_weights()?;
    let mut coords = Vec::new();
    for (i, wi) in w.iter().enumerate() {
        let li = p.lifted_form(&q, i)?;
        coords.push(lift_factored(&toric, (wi.clone(), &[(li, 1)]), (Rat::one(), &[(qr.clone(), 1)]))?);
    }
    ModelSpec::new(toric.clone(), coords, prior_from(&q, &toric)?)
}

/// Wachspress model: the barycentric coordinates `p_I` pulled back along the
/// moment map, one state per vertex in the order of [`PolytopeH::cones`].
pub fn wachspress_model(p: &PolytopeH) -> Result<ModelSpec> {
    let toric = p.toric()?;
    let q = p.vertex_polynomial()?;
    let k = p.num_facets();
    let lifted: Vec<RatPoly> = (0..k).map(|i| p.lifted_form(&q, i)).collect::<Result<_>>()?;
    // p_I = c_I ∏_{i∉I} L_i / Â with c_I = |det Ṽ_I| / ∏_{i∉I} alpha_i
    let mut parts = Vec::new();
    let mut adj = RatPoly::zero(p.dim());
    for cone in p.cones() {
        let outside: Vec<usize> = (0..k).filter(|i| !cone.contains(i)).collect();
        let c = p.scaled_det(cone) / outside.iter().map(|&i| rat(p.alpha()[i])).product::<Rat>();
        let mut term = RatPoly::constant(p.dim(), c.clone());
        for &i in &outside {
            term = term.mul(&lifted[i]);
        }
        adj = adj.add(&term);
        parts.push((c, outside));
    }
    let mut coords = Vec::new();
    for (c, outside) in parts {
        let fs: Vec<(RatPoly, u32)> = outside.iter().map(|&i| (lifted[i].clone(), 1)).collect();
        coords.push(lift_factored(&toric, (c, &fs), (Rat::one(), &[(adj.clone(), 1)]))?);
    }
    ModelSpec::new(toric.clone(), coords, prior_from(&q, &toric)?)
}

/// Toric model of a homogeneous `Z = Σ c_i x^{a_i}`: `p_i = c_i x^{a_i} / Z`,
/// with states in the term order of `Z` (lexicographic in the exponents).
pub fn toric_coordinates(z: &PositivePolynomial, toric: &ToricData) -> Result<Vec<Coordinate>> {
    toric_coordinates_ordered(z.terms(), toric)
}

/// As [`toric_coordinates`] with states in the given term order.
pub fn toric_coordinates_ordered(terms: &[(Rat, Vec<i64>)], toric: &ToricData) -> Result<Vec<Coordinate>> {
    let z = PositivePolynomial::new(toric.num_rays(), terms.to_vec())?;
    if z.len() != terms.len() {
        return Err(Error::InvalidModel("repeated monomial in toric model".into()));
    }
    if toric.poly_degree(&z)?.is_none() {
        return Err(Error::Inhomogeneous);
    }
    terms
        .iter()
        .map(|(c, a)| {
            Ok(Coordinate::new(
                FactoredPolynomial::from_poly(&PositivePolynomial::monomial(c.clone(), a.clone())?),
                FactoredPolynomial::from_poly(&z),
            ))
        })
        .collect()
}

pub fn toric_model(z: &PositivePolynomial, toric: &ToricData, prior: Coordinate) -> Result<ModelSpec> {
    ModelSpec::new(toric.clone(), toric_coordinates(z, toric)?, prior)
}

/// Cox exponents of the six lattice points of the pentagon, in the order
/// `(0,0), (1,0), (0,1), (1,1), (2,1), (1,2)` of the unshifted polygon.
const PENTAGON_POINTS: [[i64; 5]; 6] = [
    [0, 1, 3, 1, 0],
    [1, 2, 2, 0, 0],
    [0, 0, 2, 2, 1],
    [1, 1, 1, 1, 1],
    [2, 2, 0, 0, 1],
    [1, 0, 0, 2, 2],
];

/// Toric model on the pentagon surface with one weighted term per lattice
/// point and the lifted uniform prior.
pub fn pentagon_toric(c: &[Rat]) -> Result<ModelSpec> {
    if c.len() != 6 {
        return Err(Error::InvalidArgument(format!("pentagon toric model needs 6 weights, got {}", c.len())));
    }
    let terms: Vec<(Rat, Vec<i64>)> = c.iter().zip(PENTAGON_POINTS).map(|(ci, e)| (ci.clone(), e.to_vec())).collect();
    let p = PolytopeH::pentagon();
    let toric = p.toric()?;
    let prior = prior_from(&p.vertex_polynomial()?, &toric)?;
    ModelSpec::new(toric.clone(), toric_coordinates_ordered(&terms, &toric)?, prior)
}

/// Mixture of two independent binomials on `(P¹)³` with Cox coordinates
/// `(x0, x1, s0, s1, t0, t1)`:
/// `p_l = C(m,l) [x0 s0^l s1^{m-l} (t0+t1)^m + x1 t0^l t1^{m-l} (s0+s1)^m] / Q`
/// with `Q = (x0+x1)(s0+s1)^m(t0+t1)^m`, and the uniform prior on the cube.
pub fn coin_model(m: usize) -> Result<ModelSpec> {
    if m < 1 {
        return Err(Error::InvalidArgument("coin model needs m >= 1".into()));
    }
    let toric = ToricData::product_of_lines(3);
    let var = |i: usize| {
        let mut e = vec![0; 6];
        e[i] = 1;
        PositivePolynomial::new(6, vec![(Rat::one(), e)]).expect("monomial")
    };
    let x = var(0).add(&var(1));
    let s = var(2).add(&var(3));
    let t = var(4).add(&var(5));
    let mut den = FactoredPolynomial::one(6);
    den.push(&x, 1);
    den.push(&s, m as u32);
    den.push(&t, m as u32);
    let mut coords = Vec::new();
    let mut binom = Rat::one();
    for l in 0..=m {
        let a = var(0).mul(&var(2).pow(l as u32)).mul(&var(3).pow((m - l) as u32)).mul(&t.pow(m as u32));
        let b = var(1).mul(&var(4).pow(l as u32)).mul(&var(5).pow((m - l) as u32)).mul(&s.pow(m as u32));
        let num = a.add(&b).scale(&binom)?;
        coords.push(Coordinate::new(FactoredPolynomial::from_poly(&num), den.clone()));
        binom = binom * rat((m - l) as i64) / rat(l as i64 + 1);
    }
    let cube = PositivePolynomial::laurent(
        3,
        (0..8).map(|b: i64| (Rat::one(), (0..3).map(|i| (b >> i) & 1).collect())).collect(),
    )?;
    let prior = prior_from(&cube, &toric)?;
    ModelSpec::new(toric, coords, prior)
}

/// How to evaluate the integrals in a marginal likelihood.
#[derive(Clone, Copy, Debug)]
pub enum Method {
    MonteCarlo { n: usize, seed: u64, threads: usize },
    Cubature { nodes: usize },
}

/// One integral `∫ F/G Ω` as computed by [`Method`].
#[derive(Clone, Debug, Serialize)]
pub struct IntegralEstimate {
    pub log_value: f64,
    pub value: Option<f64>,
    /// Standard error relative to the value; absent for cubature.
    pub rel_stderr: Option<f64>,
    pub trop_total: String,
    pub sectors: usize,
}

pub fn integrate(table: &SectorTable, method: Method) -> Result<IntegralEstimate> {
    let (log_value, rel_stderr) = match method {
        Method::MonteCarlo { n, seed, threads } => {
            let e = mc_estimate(table, n, seed, threads)?;
            (e.log_value, Some((e.log_stderr - e.log_value).exp()))
        }
        Method::Cubature { nodes } => (cubature_integral(table, nodes)?.log_value, None),
    };
    Ok(IntegralEstimate {
        log_value,
        value: finite(log_value.exp()),
        rel_stderr,
        trop_total: format_rat(table.trop_total()),
        sectors: table.len(),
    })
}

/// `I_u = ∫ L_u f/g Ω / ∫ f/g Ω`.
#[derive(Clone, Debug, Serialize)]
pub struct MarginalLikelihood {
    pub log_value: f64,
    pub value: Option<f64>,
    pub rel_stderr: Option<f64>,
    /// `ln U!/(u_0!⋯u_m!)`, reported but not folded into the value.
    pub log_multinomial: f64,
    pub evidence: IntegralEstimate,
    pub prior_mass: IntegralEstimate,
}

impl MarginalLikelihood {
    /// The value with the multinomial coefficient included, in log form.
    pub fn log_value_with_multinomial(&self) -> f64 {
        self.log_value + self.log_multinomial
    }
}

pub fn marginal_likelihood(model: &ModelSpec, u: &[u32], method: Method) -> Result<MarginalLikelihood> {
    let table = model.likelihood_table(u, None)?;
    marginal_likelihood_with(model, u, &table, method)
}

/// As [`marginal_likelihood`] with a prebuilt likelihood table.
pub fn marginal_likelihood_with(
    model: &ModelSpec,
    u: &[u32],
    table: &SectorTable,
    method: Method,
) -> Result<MarginalLikelihood> {
    let evidence = integrate(table, method)?;
    let prior_mass = integrate(&model.prior_table()?, method)?;
    let log_value = evidence.log_value - prior_mass.log_value;
    let rel_stderr = match (evidence.rel_stderr, prior_mass.rel_stderr) {
        (Some(a), Some(b)) => Some((a * a + b * b).sqrt()),
        _ => None,
    };
    Ok(MarginalLikelihood {
        log_value,
        value: finite(log_value.exp()),
        rel_stderr,
        log_multinomial: log_multinomial(u),
        evidence,
        prior_mass,
    })
}

/// `K = I_u(model1) / I_u(model2)`.
#[derive(Clone, Debug, Serialize)]
pub struct BayesFactor {
    pub log_k: f64,
    pub k: Option<f64>,
    pub first: MarginalLikelihood,
    pub second: MarginalLikelihood,
}

pub fn bayes_factor(m1: &ModelSpec, m2: &ModelSpec, u: &[u32], method: Method) -> Result<BayesFactor> {
    if m1.num_states() != m2.num_states() {
        return Err(Error::InvalidArgument(format!(
            "models have {} and {} states",
            m1.num_states(),
            m2.num_states()
        )));
    }
    let first = marginal_likelihood(m1, u, method)?;
    let second = marginal_likelihood(m2, u, method)?;
    let log_k = first.log_value - second.log_value;
    Ok(BayesFactor { log_k, k: finite(log_k.exp()), first, second })
}

/// Rejection samples from the posterior `L_u f/g`.
pub fn posterior_sample(
    model: &ModelSpec,
    u: &[u32],
    attempts: usize,
    seed: u64,
    threads: usize,
) -> Result<(SampleBatch, BatchSummary)> {
    let table = model.likelihood_table(u, None)?;
    let batch = rejection_sample(&table, attempts, seed, threads)?;
    let summary = batch.summary();
    Ok((batch, summary))
}

fn finite(v: f64) -> Option<f64> {
    (v.is_finite() && v > 0.0).then_some(v)
}
