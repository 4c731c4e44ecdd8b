//! Sparse multivariate (Laurent) polynomials with exact rational coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, minkowski_sum, LatticePolytope};
use crate::linalg::{format_rat, ln_rat, rat_to_f64, Rat};

/// Polynomial with rational coefficients of any sign. Terms are kept in
/// lexicographic exponent order with zero coefficients removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly {
    nvars: usize,
    terms: BTreeMap<Vec<i64>, Rat>,
}

impl RatPoly {
    pub fn zero(nvars: usize) -> Self {
        RatPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(c, vec![0; nvars]);
        p
    }

    pub fn monomial(c: Rat, exp: Vec<i64>) -> Self {
        let mut p = Self::zero(exp.len());
        p.add_term(c, exp);
        p
    }

    /// The coordinate function `y_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(Rat::one(), e)
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Rat, Vec<i64>)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: e.len() });
            }
            p.add_term(c, e);
        }
        Ok(p)
    }

    fn add_term(&mut self, c: Rat, e: Vec<i64>) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Rat)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[i64]) -> Rat {
        self.terms.get(e).cloned().unwrap_or_else(Rat::zero)
    }

    /// Largest total degree among the terms, or `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<i64> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn add(&self, o: &RatPoly) -> RatPoly {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(c.clone(), e.clone());
        }
        p
    }

    pub fn sub(&self, o: &RatPoly) -> RatPoly {
        self.add(&o.scale(&-Rat::one()))
    }

    pub fn scale(&self, s: &Rat) -> RatPoly {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        RatPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    pub fn mul(&self, o: &RatPoly) -> RatPoly {
        let mut p = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                p.add_term(c1 * c2, e1.iter().zip(e2).map(|(a, b)| a + b).collect());
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> RatPoly {
        let mut acc = Self::constant(self.nvars, Rat::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplies by the monomial `t^s`.
    pub fn shift(&self, s: &[i64]) -> RatPoly {
        RatPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.iter().zip(s).map(|(a, b)| a + b).collect(), c.clone())).collect(),
        }
    }

    /// Entrywise minimum of the exponents.
    pub fn min_exponent(&self) -> Vec<i64> {
        let mut m: Option<Vec<i64>> = None;
        for e in self.terms.keys() {
            m = Some(match m {
                None => e.clone(),
                Some(m) => m.iter().zip(e).map(|(a, b)| *a.min(b)).collect(),
            });
        }
        m.unwrap_or_else(|| vec![0; self.nvars])
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        self.terms.iter().map(|(e, c)| c * monomial_rat(e, x)).sum()
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| rat_to_f64(c) * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// Exact division; `None` unless `self = q · d` for a Laurent polynomial `q`.
    pub fn divide_exact(&self, d: &RatPoly) -> Option<RatPoly> {
        if d.is_zero() {
            return None;
        }
        let (dlead_e, dlead_c) = d.terms.iter().next_back().map(|(e, c)| (e.clone(), c.clone()))?;
        let dmin = d.min_exponent();
        let mut rem = self.clone();
        let mut q = Self::zero(self.nvars);
        let smin = self.min_exponent();
        while let Some((e, c)) = rem.terms.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
            let qe: Vec<i64> = e.iter().zip(&dlead_e).map(|(a, b)| a - b).collect();
            // Any valid quotient term satisfies qe + dmin >= smin entrywise.
            if qe.iter().zip(&dmin).zip(&smin).any(|((a, b), s)| a + b < *s) {
                return None;
            }
            let qc = &c / &dlead_c;
            let t = RatPoly::monomial(qc.clone(), qe.clone());
            rem = rem.sub(&t.mul(d));
            q.add_term(qc, qe);
        }
        Some(q)
    }
}

fn monomial_rat(e: &[i64], x: &[Rat]) -> Rat {
    let mut v = Rat::one();
    for (&k, xi) in e.iter().zip(x) {
        let p = num_traits::pow(xi.clone(), k.unsigned_abs() as usize);
        v *= if k < 0 { p.recip() } else { p };
    }
    v
}

/// Polynomial with strictly positive rational coefficients. Exponents are
/// nonnegative unless built with [`PositivePolynomial::laurent`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositivePolynomial {
    nvars: usize,
    terms: Vec<(Rat, Vec<i64>)>,
}

impl PositivePolynomial {
    pub fn new(nvars: usize, terms: Vec<(Rat, Vec<i64>)>) -> Result<Self> {
        if terms.iter().any(|(_, e)| e.iter().any(|&x| x < 0)) {
            return Err(Error::NegativeExponent);
        }
        Self::laurent(nvars, terms)
    }

    pub fn laurent(nvars: usize, terms: Vec<(Rat, Vec<i64>)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("polynomial has no terms".into()));
        }
        let mut map: BTreeMap<Vec<i64>, Rat> = BTreeMap::new();
        for (c, e) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: e.len() });
            }
            if !c.is_positive() {
                return Err(Error::NonPositiveCoefficient(format_rat(&c)));
            }
            *map.entry(e).or_insert_with(Rat::zero) += c;
        }
        Ok(PositivePolynomial { nvars, terms: map.into_iter().map(|(e, c)| (c, e)).collect() })
    }

    pub fn monomial(c: Rat, exp: Vec<i64>) -> Result<Self> {
        Self::laurent(exp.len(), vec![(c, exp)])
    }

    pub fn constant(nvars: usize, c: Rat) -> Result<Self> {
        Self::laurent(nvars, vec![(c, vec![0; nvars])])
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Terms in lexicographic exponent order.
    pub fn terms(&self) -> &[(Rat, Vec<i64>)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_laurent(&self) -> bool {
        self.terms.iter().any(|(_, e)| e.iter().any(|&x| x < 0))
    }

    pub fn exponents(&self) -> Vec<Vec<i64>> {
        self.terms.iter().map(|(_, e)| e.clone()).collect()
    }

    pub fn to_ratpoly(&self) -> RatPoly {
        RatPoly::from_terms(self.nvars, self.terms.iter().cloned()).expect("consistent arity")
    }

    pub fn try_from_ratpoly(p: &RatPoly) -> Result<Self> {
        Self::laurent(p.nvars(), p.terms().map(|(e, c)| (c.clone(), e.clone())).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::try_from_ratpoly(&self.to_ratpoly().mul(&o.to_ratpoly())).expect("positive product")
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut t = self.terms.clone();
        t.extend(o.terms.iter().cloned());
        Self::laurent(self.nvars, t).expect("positive sum")
    }

    pub fn pow(&self, k: u32) -> Self {
        Self::try_from_ratpoly(&self.to_ratpoly().pow(k)).expect("positive power")
    }

    pub fn scale(&self, s: &Rat) -> Result<Self> {
        Self::laurent(self.nvars, self.terms.iter().map(|(c, e)| (c * s, e.clone())).collect())
    }

    /// Multiplies by the monomial `x^s`.
    pub fn shift(&self, s: &[i64]) -> Self {
        PositivePolynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(c, e)| (c.clone(), e.iter().zip(s).map(|(a, b)| a + b).collect()))
                .collect(),
        }
    }

    pub fn eval(&self, x: &[Rat]) -> Result<Rat> {
        if x.iter().any(|v| !v.is_positive()) {
            return Err(Error::NonPositivePoint);
        }
        Ok(self.terms.iter().map(|(c, e)| c * monomial_rat(e, x)).sum())
    }

    /// `ln f(x)` given `ln x`, by log-sum-exp.
    pub fn eval_log(&self, log_x: &[f64]) -> f64 {
        let vals: Vec<f64> = self.terms.iter().map(|(c, e)| ln_rat(c) + dot_f(e, log_x)).collect();
        log_sum_exp(&vals)
    }

    /// Tropical approximation `max x^ℓ` over the support.
    pub fn trop(&self, x: &[f64]) -> Result<f64> {
        if x.iter().any(|&v| v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::NonPositivePoint);
        }
        let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        Ok(self.trop_log(&lx).exp())
    }

    /// `max ℓ·y` over the support.
    pub fn trop_log(&self, y: &[f64]) -> f64 {
        self.terms.iter().map(|(_, e)| dot_f(e, y)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn trop_exact(&self, x: &[Rat]) -> Result<Rat> {
        if x.iter().any(|v| !v.is_positive()) {
            return Err(Error::NonPositivePoint);
        }
        Ok(self.terms.iter().map(|(_, e)| monomial_rat(e, x)).max().expect("nonempty"))
    }

    pub fn min_coefficient(&self) -> Rat {
        self.terms.iter().map(|(c, _)| c.clone()).min().expect("nonempty")
    }

    pub fn coefficient_sum(&self) -> Rat {
        self.terms.iter().map(|(c, _)| c.clone()).sum()
    }

    pub fn newton_polytope(&self) -> Result<LatticePolytope> {
        convex_hull(&self.exponents())
    }
}

impl std::fmt::Display for PositivePolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> =
            self.terms.iter().map(|(c, e)| format!("{}*x^{:?}", format_rat(c), e)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

pub(crate) fn dot_f(e: &[i64], y: &[f64]) -> f64 {
    e.iter().zip(y).map(|(&a, &b)| a as f64 * b).sum()
}

pub fn log_sum_exp(vals: &[f64]) -> f64 {
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// A product `scalar · ∏ p_j^{m_j}` kept unexpanded. Each factor is scaled so
/// its lexicographically first coefficient is 1, and equal factors are
/// merged. Factors with multiplicity zero are kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredPolynomial {
    nvars: usize,
    scalar: Rat,
    factors: Vec<(PositivePolynomial, u32)>,
}

impl FactoredPolynomial {
    pub fn one(nvars: usize) -> Self {
        FactoredPolynomial { nvars, scalar: Rat::one(), factors: Vec::new() }
    }

    pub fn from_poly(p: &PositivePolynomial) -> Self {
        let mut f = Self::one(p.nvars());
        f.push(p, 1);
        f
    }

    /// Multiplies in `p^m`.
    pub fn push(&mut self, p: &PositivePolynomial, m: u32) {
        assert_eq!(p.nvars(), self.nvars, "factor arity");
        let lead = p.terms()[0].0.clone();
        let normalized = p.scale(&lead.recip()).expect("positive scale");
        self.scalar *= num_traits::pow(lead, m as usize);
        match self.factors.iter_mut().find(|(q, _)| *q == normalized) {
            Some((_, k)) => *k += m,
            None => self.factors.push((normalized, m)),
        }
    }

    pub fn mul(&self, o: &FactoredPolynomial) -> FactoredPolynomial {
        let mut r = self.clone();
        r.scalar *= &o.scalar;
        for (p, m) in &o.factors {
            match r.factors.iter_mut().find(|(q, _)| q == p) {
                Some((_, k)) => *k += m,
                None => r.factors.push((p.clone(), *m)),
            }
        }
        r
    }

    /// Raises to the power `k`, keeping zero-multiplicity factors.
    pub fn pow(&self, k: u32) -> FactoredPolynomial {
        FactoredPolynomial {
            nvars: self.nvars,
            scalar: num_traits::pow(self.scalar.clone(), k as usize),
            factors: self.factors.iter().map(|(p, m)| (p.clone(), m * k)).collect(),
        }
    }

    pub fn scale(&self, s: &Rat) -> Result<FactoredPolynomial> {
        if !s.is_positive() {
            return Err(Error::NonPositiveCoefficient(s.to_string()));
        }
        let mut r = self.clone();
        r.scalar *= s;
        Ok(r)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn scalar(&self) -> &Rat {
        &self.scalar
    }

    pub fn factors(&self) -> &[(PositivePolynomial, u32)] {
        &self.factors
    }

    pub fn eval_log(&self, log_x: &[f64]) -> f64 {
        ln_rat(&self.scalar)
            + self.factors.iter().map(|(p, m)| if *m == 0 { 0.0 } else { *m as f64 * p.eval_log(log_x) }).sum::<f64>()
    }

    pub fn eval(&self, x: &[Rat]) -> Result<Rat> {
        let mut v = self.scalar.clone();
        for (p, m) in &self.factors {
            v *= num_traits::pow(p.eval(x)?, *m as usize);
        }
        Ok(v)
    }

    /// Tropical approximation in log form: `Σ m_j max ℓ·y`.
    pub fn trop_log(&self, y: &[f64]) -> f64 {
        self.factors.iter().map(|(p, m)| if *m == 0 { 0.0 } else { *m as f64 * p.trop_log(y) }).sum()
    }

    /// Lower bound on `F/F^tr`: `scalar · ∏ min_coeff^m`.
    pub fn ratio_lower(&self) -> Rat {
        self.factors
            .iter()
            .fold(self.scalar.clone(), |acc, (p, m)| acc * num_traits::pow(p.min_coefficient(), *m as usize))
    }

    /// Upper bound on `F/F^tr`: `scalar · ∏ coeff_sum^m`.
    pub fn ratio_upper(&self) -> Rat {
        self.factors
            .iter()
            .fold(self.scalar.clone(), |acc, (p, m)| acc * num_traits::pow(p.coefficient_sum(), *m as usize))
    }

    /// Newton polytope `Σ m_j N(p_j)`.
    pub fn newton_polytope(&self) -> Result<LatticePolytope> {
        let mut acc = convex_hull(&[vec![0; self.nvars]])?;
        for (p, m) in &self.factors {
            if *m == 0 {
                continue;
            }
            let np = p.newton_polytope()?.scale(*m as i64)?;
            acc = minkowski_sum(&acc, &np)?;
        }
        Ok(acc)
    }

    /// Full expansion; exponential in the multiplicities.
    pub fn expand(&self) -> PositivePolynomial {
        let mut acc = PositivePolynomial::constant(self.nvars, self.scalar.clone()).expect("positive scalar");
        for (p, m) in &self.factors {
            acc = acc.mul(&p.pow(*m));
        }
        acc
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.factors.iter().map(|(_, m)| *m as u64).sum()
    }
}

/// Best-effort conversion for display.
pub fn rat_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| rat_to_f64(x))
}
