//! JSON form of [`ModelSpec`]. Coefficients are strings such as `"3"`,
//! `"-2/7"` or `"0.25"`, parsed to exact rationals; plain JSON numbers are
//! accepted too. A polynomial is either a term list `[[c, [e...]], ...]` or a
//! factored product `{"scalar": c, "factors": [{"terms": [...], "power": m}]}`.

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{Coordinate, ModelSpec};
use crate::error::{Error, Result};
use crate::linalg::{format_rat, parse_rat, Rat};
use crate::poly::{FactoredPolynomial, PositivePolynomial};
use crate::toric::{ToricData, ToricJson};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coef {
    Str(String),
    Int(i64),
    Float(f64),
}

pub type TermsJson = Vec<(Coef, Vec<i64>)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorJson {
    pub terms: TermsJson,
    #[serde(default = "one")]
    pub power: u32,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolyJson {
    Terms(TermsJson),
    Factored {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scalar: Option<Coef>,
        factors: Vec<FactorJson>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateJson {
    pub num: PolyJson,
    pub den: PolyJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    pub toric: ToricJson,
    #[serde(default)]
    pub coords: Vec<CoordinateJson>,
    pub prior: CoordinateJson,
}

fn parse_coef(c: &Coef, ctx: &str) -> Result<Rat> {
    let s = match c {
        Coef::Str(s) => s.clone(),
        Coef::Int(i) => i.to_string(),
        Coef::Float(f) => f.to_string(),
    };
    parse_rat(&s).ok_or_else(|| Error::parse(ctx, format!("cannot parse coefficient '{s}'")))
}

fn parse_terms(t: &TermsJson, k: usize, ctx: &str) -> Result<PositivePolynomial> {
    if t.is_empty() {
        return Err(Error::parse(ctx, "empty polynomial"));
    }
    let mut terms = Vec::new();
    for (j, (c, e)) in t.iter().enumerate() {
        let tctx = format!("{ctx}[{j}]");
        if e.len() != k {
            return Err(Error::parse(&tctx, format!("exponent has length {}, expected {k}", e.len())));
        }
        terms.push((parse_coef(c, &tctx)?, e.clone()));
    }
    PositivePolynomial::new(k, terms).map_err(|e| Error::parse(ctx, e.to_string()))
}

fn parse_poly(p: &PolyJson, k: usize, ctx: &str) -> Result<FactoredPolynomial> {
    match p {
        PolyJson::Terms(t) => Ok(FactoredPolynomial::from_poly(&parse_terms(t, k, ctx)?)),
        PolyJson::Factored { scalar, factors } => {
            let s = match scalar {
                Some(c) => parse_coef(c, &format!("{ctx}.scalar"))?,
                None => Rat::one(),
            };
            let mut out = FactoredPolynomial::one(k).scale(&s).map_err(|e| Error::parse(ctx, e.to_string()))?;
            for (j, f) in factors.iter().enumerate() {
                out.push(&parse_terms(&f.terms, k, &format!("{ctx}.factors[{j}]"))?, f.power);
            }
            Ok(out)
        }
    }
}

fn parse_coord(c: &CoordinateJson, k: usize, ctx: &str) -> Result<Coordinate> {
    Ok(Coordinate::new(parse_poly(&c.num, k, &format!("{ctx}.num"))?, parse_poly(&c.den, k, &format!("{ctx}.den"))?))
}

impl ModelJson {
    /// Parses the pieces without validating the model.
    pub fn parts(&self) -> Result<(ToricData, Vec<Coordinate>, Coordinate)> {
        let toric = ToricData::from_json(&self.toric).map_err(|e| Error::parse("toric", e.to_string()))?;
        let k = toric.num_rays();
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, c)| parse_coord(c, k, &format!("coords[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let prior = parse_coord(&self.prior, k, "prior")?;
        Ok((toric, coords, prior))
    }
}

pub(super) fn from_json(j: &ModelJson) -> Result<ModelSpec> {
    let (toric, coords, prior) = j.parts()?;
    ModelSpec::new(toric, coords, prior)
}

fn terms_json(p: &PositivePolynomial) -> TermsJson {
    p.terms().iter().map(|(c, e)| (Coef::Str(format_rat(c)), e.clone())).collect()
}

fn poly_json(p: &FactoredPolynomial) -> PolyJson {
    match p.factors() {
        [(f, 1)] => PolyJson::Terms(terms_json(&f.scale(p.scalar()).expect("positive scalar"))),
        fs => PolyJson::Factored {
            scalar: (!p.scalar().is_one()).then(|| Coef::Str(format_rat(p.scalar()))),
            factors: fs.iter().map(|(f, m)| FactorJson { terms: terms_json(f), power: *m }).collect(),
        },
    }
}

fn coord_json(c: &Coordinate) -> CoordinateJson {
    CoordinateJson { num: poly_json(&c.num), den: poly_json(&c.den) }
}

pub(super) fn to_json(m: &ModelSpec) -> ModelJson {
    ModelJson {
        toric: m.toric().to_json(),
        coords: m.coords().iter().map(coord_json).collect(),
        prior: coord_json(m.prior()),
    }
}
