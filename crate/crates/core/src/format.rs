//! JSON text format for incidence structures (`.wss`) and correspondence
//! families (`.corr`).
//!
//! Integers are written as exact decimal JSON numbers, object keys are
//! sorted, and strata, edges and classes appear in key order, so identical
//! data always serializes to identical bytes.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::chow::{ChowClass, ChowPresentation, GradedMap, MapKind, Origin};
use crate::engine::{CorrespondenceFamily, CycleComponent, Level, LevelOneInput};
use crate::strata::{Edge, IncidenceStructure, StratumKey};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    /// Not well-formed: bad JSON, wrong types, malformed integers.
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    /// Well-formed but inconsistent with the model.
    #[error("invalid data: {0}")]
    Invalid(String),
}

impl FormatError {
    pub fn exit_code(&self) -> i32 {
        match self {
            FormatError::Parse { .. } => 1,
            FormatError::Invalid(_) => 2,
        }
    }
}

fn invalid(m: impl Into<String>) -> FormatError {
    FormatError::Invalid(m.into())
}

/// An exact integer that (de)serializes as a JSON number.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Int(BigInt);

impl Serialize for Int {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let n = serde_json::Number::from_str(&self.0.to_string()).map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let n = serde_json::Number::deserialize(d)?;
        let text = n.to_string();
        BigInt::from_str(&text)
            .map(Int)
            .map_err(|_| D::Error::custom(format!("{text} is not an integer")))
    }
}

fn ints(v: &[BigInt]) -> Vec<Int> {
    v.iter().cloned().map(Int).collect()
}

fn bigs(v: Vec<Int>) -> Vec<BigInt> {
    v.into_iter().map(|x| x.0).collect()
}

type Images = Vec<Vec<Vec<Int>>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructure {
    edges: Vec<RawEdge>,
    n: usize,
    strata: Vec<RawStratum>,
    t: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStratum {
    key: Vec<usize>,
    presentation: RawPresentation,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPresentation {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basis: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    structure_constants: Option<Vec<RawProduct>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<Vec<Int>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProduct {
    left: String,
    right: String,
    value: Vec<Int>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    inner: Vec<usize>,
    outer: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pullback: Option<Images>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pushforward: Option<Images>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cycles: Option<Vec<RawCycle>>,
    levels: Vec<RawClass>,
    n: usize,
    t: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClass {
    #[serde(rename = "I")]
    i: Vec<usize>,
    #[serde(rename = "J")]
    j: Vec<usize>,
    codim: usize,
    coeffs: Vec<Int>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCycle {
    #[serde(rename = "I")]
    i: Vec<usize>,
    #[serde(rename = "J")]
    j: Vec<usize>,
    mult: Int,
    perm: Vec<usize>,
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        FormatError::Parse {
            path: if path == "." { "top level".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })
}

/// Pretty JSON with sorted keys and a trailing newline.
fn render<T: Serialize>(x: &T) -> String {
    let v = serde_json::to_value(x).expect("in-memory data serializes");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

fn key_of(v: &[usize], what: &str) -> Result<StratumKey, FormatError> {
    StratumKey::new(v.to_vec()).map_err(|_| invalid(format!("{what}: {v:?} is not a sorted nonempty key")))
}

fn presentation_from_raw(raw: RawPresentation, key: &StratumKey) -> Result<Arc<ChowPresentation>, FormatError> {
    match raw.kind.as_str() {
        "projective_product" => {
            let dims = raw
                .dims
                .ok_or_else(|| invalid(format!("stratum {key}: projective_product needs dims")))?;
            Ok(ChowPresentation::projective_product(&dims))
        }
        "explicit" => {
            let missing = |f: &str| invalid(format!("stratum {key}: explicit presentation needs {f}"));
            let dim = raw.dim.ok_or_else(|| missing("dim"))?;
            let basis = raw.basis.ok_or_else(|| missing("basis"))?;
            let degree = bigs(raw.degree.ok_or_else(|| missing("degree"))?);
            let mut products = BTreeMap::new();
            for p in raw.structure_constants.unwrap_or_default() {
                products.insert((p.left, p.right), bigs(p.value));
            }
            ChowPresentation::explicit(dim, basis, &products, degree)
                .map_err(|e| invalid(format!("stratum {key}: {e}")))
        }
        other => Err(invalid(format!("stratum {key}: unknown presentation kind {other:?}"))),
    }
}

fn presentation_to_raw(p: &ChowPresentation) -> RawPresentation {
    if let Origin::ProjectiveProduct(dims) = p.origin() {
        return RawPresentation {
            kind: "projective_product".into(),
            dims: Some(dims.clone()),
            dim: None,
            basis: None,
            structure_constants: None,
            degree: None,
        };
    }
    let mut products = Vec::new();
    let elems: Vec<(usize, usize)> = (0..=p.dim())
        .flat_map(|k| (0..p.rank(k)).map(move |a| (k, a)))
        .collect();
    for (x, &(k, a)) in elems.iter().enumerate() {
        for &(l, b) in &elems[x..] {
            if k == 0 || l == 0 || k + l > p.dim() {
                continue;
            }
            let value = p.mul_basis(k, a, l, b);
            if value.iter().any(|v| v.sign() != num_bigint::Sign::NoSign) {
                products.push(RawProduct {
                    left: p.basis(k)[a].clone(),
                    right: p.basis(l)[b].clone(),
                    value: ints(&value),
                });
            }
        }
    }
    RawPresentation {
        kind: "explicit".into(),
        dims: None,
        dim: Some(p.dim()),
        basis: Some((0..=p.dim()).map(|k| p.basis(k).to_vec()).collect()),
        structure_constants: Some(products),
        degree: Some(ints(p.degree_functional())),
    }
}

fn images_to_raw(m: &GradedMap) -> Images {
    m.images()
        .iter()
        .map(|piece| piece.iter().map(|v| ints(v)).collect())
        .collect()
}

fn images_from_raw(raw: Images) -> Vec<Vec<Vec<BigInt>>> {
    raw.into_iter()
        .map(|piece| piece.into_iter().map(bigs).collect())
        .collect()
}

pub fn read_structure(text: &str) -> Result<IncidenceStructure, FormatError> {
    let raw: RawStructure = parse(text)?;
    let mut s = IncidenceStructure::new(raw.t, raw.n);
    for st in raw.strata {
        let key = key_of(&st.key, "strata")?;
        if s.is_present(&key) {
            return Err(invalid(format!("stratum {key} is listed twice")));
        }
        let pres = presentation_from_raw(st.presentation, &key)?;
        s.add_stratum(key, pres);
    }
    for e in raw.edges {
        let outer = key_of(&e.outer, "edges.outer")?;
        let inner = key_of(&e.inner, "edges.inner")?;
        let (Ok(po), Ok(pi)) = (s.presentation(&outer).cloned(), s.presentation(&inner).cloned()) else {
            s.record_issue("edge_shape", format!("edge {outer} -> {inner} joins an absent stratum"));
            continue;
        };
        let mut edge = Edge::default();
        if let Some(images) = e.pullback {
            match GradedMap::new(MapKind::Ring, &po, &pi, 0, images_from_raw(images)) {
                Ok(m) => edge.pullback = Some(m),
                Err(err) => s.record_issue("edge_shape", format!("{outer} -> {inner} pullback: {err}")),
            }
        }
        if let Some(images) = e.pushforward {
            match GradedMap::new(MapKind::Additive, &pi, &po, 1, images_from_raw(images)) {
                Ok(m) => edge.pushforward = Some(m),
                Err(err) => s.record_issue("edge_shape", format!("{outer} -> {inner} pushforward: {err}")),
            }
        }
        s.set_edge(outer, inner, edge);
    }
    Ok(s)
}

pub fn write_structure(s: &IncidenceStructure) -> String {
    let raw = RawStructure {
        t: s.t(),
        n: s.n(),
        strata: s
            .strata()
            .iter()
            .map(|(k, p)| RawStratum {
                key: k.elems().to_vec(),
                presentation: presentation_to_raw(p),
            })
            .collect(),
        edges: s
            .edges()
            .iter()
            .map(|((o, i), e)| RawEdge {
                outer: o.elems().to_vec(),
                inner: i.elems().to_vec(),
                pullback: e.pullback.as_ref().map(images_to_raw),
                pushforward: e.pushforward.as_ref().map(images_to_raw),
            })
            .collect(),
    };
    render(&raw)
}

pub fn read_family(text: &str, s: &IncidenceStructure) -> Result<CorrespondenceFamily, FormatError> {
    let raw: RawFamily = parse(text)?;
    if raw.t != s.t() || raw.n != s.n() {
        return Err(invalid(format!(
            "family is for t={}, n={} but the structure has t={}, n={}",
            raw.t,
            raw.n,
            s.t(),
            s.n()
        )));
    }
    let mut levels: BTreeMap<usize, Level> = BTreeMap::new();
    for c in raw.levels {
        let i = key_of(&c.i, "levels.I")?;
        let j = key_of(&c.j, "levels.J")?;
        if i.len() != j.len() {
            return Err(invalid(format!("class on {i} x {j}: |I| != |J|")));
        }
        let m = i.len();
        let p = s
            .stratum_product(&i, &j)
            .map_err(|e| invalid(format!("class on {i} x {j}: {e}")))?;
        if c.codim + m != s.n() {
            return Err(invalid(format!(
                "class on {i} x {j} must have codimension {}",
                s.n() - m
            )));
        }
        let class =
            ChowClass::new(&p, c.codim, bigs(c.coeffs)).map_err(|e| invalid(format!("class on {i} x {j}: {e}")))?;
        if levels
            .entry(m)
            .or_default()
            .insert((i.clone(), j.clone()), class)
            .is_some()
        {
            return Err(invalid(format!("class on {i} x {j} is listed twice")));
        }
    }
    let cycles = match raw.cycles {
        None => None,
        Some(cs) => Some(
            cs.into_iter()
                .map(|c| match (c.i.as_slice(), c.j.as_slice()) {
                    ([i], [j]) => Ok(CycleComponent {
                        i: *i,
                        j: *j,
                        perm: c.perm,
                        mult: c.mult.0,
                    }),
                    _ => Err(invalid("cycle components live on level 1: I and J must be singletons")),
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    Ok(CorrespondenceFamily { levels, cycles })
}

pub fn write_family(s: &IncidenceStructure, f: &CorrespondenceFamily) -> String {
    let levels = f
        .levels
        .values()
        .flat_map(|l| l.iter())
        .map(|((i, j), c)| RawClass {
            i: i.elems().to_vec(),
            j: j.elems().to_vec(),
            codim: c.codim(),
            coeffs: ints(c.coeffs()),
        })
        .collect();
    let cycles = f.cycles.as_ref().map(|cs| {
        let mut v: Vec<RawCycle> = cs
            .iter()
            .map(|c| RawCycle {
                i: vec![c.i],
                j: vec![c.j],
                mult: Int(c.mult.clone()),
                perm: c.perm.clone(),
            })
            .collect();
        v.sort_by(|a, b| (&a.i, &a.j, &a.perm).cmp(&(&b.i, &b.j, &b.perm)));
        v
    });
    render(&RawFamily {
        cycles,
        levels,
        n: s.n(),
        t: s.t(),
    })
}

/// Level-1 data as a family holding only level 1.
pub fn level_one_family(g: &LevelOneInput) -> CorrespondenceFamily {
    let mut level = Level::new();
    for (&(i, j), c) in &g.classes {
        level.insert((StratumKey::singleton(i), StratumKey::singleton(j)), c.clone());
    }
    CorrespondenceFamily {
        levels: BTreeMap::from([(1, level)]),
        cycles: g.cycles.clone(),
    }
}
