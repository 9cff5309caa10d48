//! JSON file formats for operators, polynomial maps, automorphism words,
//! Herglotz fields and point lists.

use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ballchain_core::automorphism::{AutomorphismWord, Factor};
use ballchain_core::linalg::Matrix;
use ballchain_core::loewner::{HerglotzField, Piece};
use ballchain_core::operator::Operator;
use ballchain_core::polymap::{MultiIndex, PolyMap, Polynomial};
use ballchain_core::resonance::GaussianRational;
use ballchain_core::sample::BallSample;
use ballchain_core::C64;

/// A real number given either as a JSON number or as an exact `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Float(f64),
    Exact(String),
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::Float(0.0)
    }
}

impl Scalar {
    fn rational(&self) -> Result<Option<BigRational>> {
        match self {
            Scalar::Float(_) => Ok(None),
            Scalar::Exact(s) => parse_rational(s).map(Some),
        }
    }

    fn value(&self) -> Result<f64> {
        match self {
            Scalar::Float(x) => Ok(*x),
            Scalar::Exact(s) => {
                let q = parse_rational(s)?;
                let v = rational_to_f64(&q);
                if !v.is_finite() {
                    bail!("rational {s} is out of floating-point range");
                }
                Ok(v)
            }
        }
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let q = match t.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| anyhow!("bad numerator in {s:?}"))?;
            let q = BigInt::from_str(q.trim()).map_err(|_| anyhow!("bad denominator in {s:?}"))?;
            if q == BigInt::from(0) {
                bail!("zero denominator in {s:?}");
            }
            BigRational::new(p, q)
        }
        None => BigRational::from_integer(BigInt::from_str(t).map_err(|_| anyhow!("expected \"p/q\", got {s:?}"))?),
    };
    Ok(q)
}

fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ComplexDto {
    #[serde(default)]
    pub re: Scalar,
    #[serde(default)]
    pub im: Scalar,
}

impl ComplexDto {
    fn value(&self) -> Result<C64> {
        Ok(C64::new(self.re.value()?, self.im.value()?))
    }

    fn exact(&self) -> Result<Option<GaussianRational>> {
        match (self.re.rational()?, self.im.rational()?) {
            (Some(re), Some(im)) => Ok(Some(GaussianRational::new(re, im))),
            (Some(re), None) if self.im == Scalar::Float(0.0) => {
                Ok(Some(GaussianRational::new(re, BigRational::from_integer(0.into()))))
            }
            _ => Ok(None),
        }
    }
}

pub fn complex_json(z: C64) -> Value {
    json!({"re": num(z.re), "im": num(z.im)})
}

pub fn vector_json(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|z| complex_json(*z)).collect())
}

/// JSON number, or a string for values JSON cannot represent.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn parse_matrix(rows: &[Vec<ComplexDto>]) -> Result<Matrix> {
    let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(ComplexDto::value).collect()).collect::<Result<_>>()?;
    Ok(Matrix::from_rows(&rows)?)
}

pub fn matrix_json(m: &Matrix) -> Value {
    Value::Array(m.rows().iter().map(|r| vector_json(r)).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorDto {
    pub dim: usize,
    pub entries: Vec<Vec<ComplexDto>>,
}

/// A parsed operator; `exact` holds the entries when every one of them was
/// given as a rational string.
#[derive(Debug, Clone)]
pub struct OperatorInput {
    pub operator: Operator,
    pub exact: Option<Vec<Vec<GaussianRational>>>,
}

impl OperatorDto {
    pub fn parse(&self) -> Result<OperatorInput> {
        if self.entries.len() != self.dim || self.entries.iter().any(|r| r.len() != self.dim) {
            bail!("operator entries must form a {0}x{0} array", self.dim);
        }
        let operator = Operator::new(parse_matrix(&self.entries)?)?;
        let exact: Option<Vec<Vec<GaussianRational>>> = self
            .entries
            .iter()
            .map(|r| r.iter().map(|c| c.exact()).collect::<Result<Option<Vec<_>>>>())
            .collect::<Result<Option<Vec<_>>>>()?;
        Ok(OperatorInput { operator, exact })
    }
}

pub fn operator_json(a: &Operator) -> Value {
    json!({"dim": a.dim(), "entries": matrix_json(a.matrix())})
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermDto {
    pub exp: Vec<u32>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PolyDto {
    #[serde(default)]
    pub terms: Vec<TermDto>,
}

impl PolyDto {
    fn parse(&self, dim: usize) -> Result<Polynomial> {
        for t in &self.terms {
            if t.exp.len() != dim {
                bail!("exponent {:?} does not have length {dim}", t.exp);
            }
        }
        let terms = self.terms.iter().map(|t| (MultiIndex::new(t.exp.clone()), C64::new(t.re, t.im)));
        Ok(Polynomial::from_terms(dim, terms)?)
    }
}

pub fn poly_json(p: &Polynomial) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .map(|(mi, c)| json!({"exp": mi.exponents(), "re": num(c.re), "im": num(c.im)}))
        .collect();
    json!({ "terms": terms })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyMapDto {
    pub dim: usize,
    pub coords: Vec<PolyDto>,
}

impl PolyMapDto {
    pub fn parse(&self) -> Result<PolyMap> {
        if self.coords.len() != self.dim {
            bail!("map has {} coordinates but dim {}", self.coords.len(), self.dim);
        }
        let coords = self.coords.iter().map(|c| c.parse(self.dim)).collect::<Result<Vec<_>>>()?;
        Ok(PolyMap::new(coords)?)
    }
}

pub fn polymap_json(f: &PolyMap) -> Value {
    let coords: Vec<Value> = f.coords().iter().map(poly_json).collect();
    json!({"dim": f.dim(), "coords": coords})
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FactorDto {
    Shear { axis: usize, poly: PolyDto },
    Overshear { axis: usize, scale: ComplexDto, poly: PolyDto },
    Linear { matrix: Vec<Vec<ComplexDto>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WordDto {
    pub dim: usize,
    pub factors: Vec<FactorDto>,
}

impl WordDto {
    pub fn parse(&self) -> Result<AutomorphismWord> {
        let factors = self
            .factors
            .iter()
            .map(|f| {
                Ok(match f {
                    FactorDto::Shear { axis, poly } => Factor::shear(*axis, poly.parse(self.dim)?),
                    FactorDto::Overshear { axis, scale, poly } => {
                        Factor::Overshear { axis: *axis, scale: scale.value()?, poly: poly.parse(self.dim)? }
                    }
                    FactorDto::Linear { matrix } => Factor::linear(parse_matrix(matrix)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AutomorphismWord::new(self.dim, factors)?)
    }
}

pub fn word_json(w: &AutomorphismWord) -> Value {
    let factors: Vec<Value> = w
        .factors()
        .iter()
        .map(|f| match f {
            Factor::Shear { axis, poly } => json!({"kind": "shear", "axis": axis, "poly": poly_json(poly)}),
            Factor::Overshear { axis, scale, poly } => {
                json!({"kind": "overshear", "axis": axis, "scale": complex_json(*scale), "poly": poly_json(poly)})
            }
            Factor::Linear { matrix } => json!({"kind": "linear", "matrix": matrix_json(matrix)}),
        })
        .collect();
    json!({"dim": w.dim(), "factors": factors})
}

/// Either a polynomial map or a word; words are expanded and normalized.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapOrWord {
    Word(WordDto),
    Map(PolyMapDto),
}

impl MapOrWord {
    pub fn parse(&self) -> Result<PolyMap> {
        match self {
            MapOrWord::Map(m) => m.parse(),
            MapOrWord::Word(w) => Ok(w.parse()?.normalize()?.to_polymap()?),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PieceDto {
    Linear { duration: f64 },
    Spirallike { duration: f64, map: MapOrWord },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldDto {
    #[serde(rename = "A")]
    pub a: OperatorDto,
    pub pieces: Vec<PieceDto>,
}

impl FieldDto {
    pub fn pieces(&self) -> Result<Vec<Piece>> {
        self.pieces
            .iter()
            .map(|p| {
                Ok(match p {
                    PieceDto::Linear { duration } => Piece::linear(*duration),
                    PieceDto::Spirallike { duration, map } => Piece::spirallike(*duration, map.parse()?),
                })
            })
            .collect()
    }

    pub fn operator(&self) -> Result<Operator> {
        Ok(self.a.parse()?.operator)
    }

    /// Builds the field, validating spirallike pieces on `sample`.
    pub fn parse(&self, sample: &BallSample) -> std::result::Result<HerglotzField, FieldError> {
        let a = self.operator().map_err(FieldError::Input)?;
        let pieces = self.pieces().map_err(FieldError::Input)?;
        HerglotzField::with_sample(a, pieces, sample).map_err(FieldError::Core)
    }
}

/// Core errors are kept apart so that a spirallike rejection can be reported
/// as a criterion failure rather than an input error.
#[derive(Debug)]
pub enum FieldError {
    Input(anyhow::Error),
    Core(ballchain_core::Error),
}

/// Candidate list: a bare array of words or `{"candidates": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CandidatesDto {
    List(Vec<WordDto>),
    Wrapped { candidates: Vec<WordDto> },
}

impl CandidatesDto {
    pub fn parse(&self) -> Result<Vec<AutomorphismWord>> {
        let list = match self {
            CandidatesDto::List(l) | CandidatesDto::Wrapped { candidates: l } => l,
        };
        list.iter().map(WordDto::parse).collect()
    }
}

/// `{"points": [[{"re","im"}, ...], ...]}` or a bare array of points.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointsDto {
    List(Vec<Vec<ComplexDto>>),
    Wrapped { points: Vec<Vec<ComplexDto>> },
}

impl PointsDto {
    pub fn parse(&self) -> Result<Vec<Vec<C64>>> {
        let list = match self {
            PointsDto::List(l) | PointsDto::Wrapped { points: l } => l,
        };
        list.iter().map(|p| p.iter().map(ComplexDto::value).collect()).collect()
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
