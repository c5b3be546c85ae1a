//! Chow rings of smooth proper cellular varieties, presented as graded free
//! integer modules with structure constants, and the maps between them.
//!
//! Odd cohomology vanishes in this model, so `A^k` doubles as `H^{2k}`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{unimodular_inverse, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChowError {
    #[error("classes live on different presentations")]
    PresentationMismatch,
    #[error("cannot combine a ring map with an additive map")]
    KindMismatch,
    #[error("presentation is not a tensor product")]
    NotTensor,
    #[error("intersection pairing in codimension {codim} is not unimodular")]
    NonUnimodularPairing { codim: usize },
    #[error("codimension {0} is out of range for this map")]
    CodimOutOfRange(isize),
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
}

/// How a presentation was produced. Only used for serialization and display;
/// it does not take part in equality.
#[derive(Clone, Debug)]
pub enum Origin {
    Explicit,
    ProjectiveProduct(Vec<usize>),
    Tensor,
}

#[derive(Clone, Debug)]
enum Shape {
    /// `(k, a, l, b) -> e_a * e_b` over the basis of `A^{k+l}`; absent = 0.
    Table(BTreeMap<(usize, usize, usize, usize), Vec<BigInt>>),
    Tensor {
        left: Arc<ChowPresentation>,
        right: Arc<ChowPresentation>,
        /// For each codimension `k`, the pairs `(left codim, left index,
        /// right index)` in basis order.
        parts: Vec<Vec<(usize, usize, usize)>>,
        /// `offsets[k][kl]`: first basis index of the block with left
        /// codimension `kl`.
        offsets: Vec<Vec<usize>>,
    },
}

/// A graded free module `A = ⊕ A^k` with a commutative multiplication and a
/// degree functional on the top piece.
#[derive(Clone, Debug)]
pub struct ChowPresentation {
    dim: usize,
    basis: Vec<Vec<String>>,
    degree: Vec<BigInt>,
    shape: Shape,
    origin: Origin,
}

impl PartialEq for ChowPresentation {
    fn eq(&self, other: &Self) -> bool {
        if std::ptr::eq(self, other) {
            return true;
        }
        if self.dim != other.dim || self.basis != other.basis || self.degree != other.degree {
            return false;
        }
        match (&self.shape, &other.shape) {
            (Shape::Table(a), Shape::Table(b)) => a == b,
            (
                Shape::Tensor {
                    left: l1, right: r1, ..
                },
                Shape::Tensor {
                    left: l2, right: r2, ..
                },
            ) => l1 == l2 && r1 == r2,
            // same ring written two ways: compare the full multiplication
            _ => (0..=self.dim).all(|k| {
                (0..=self.dim - k).all(|l| {
                    (0..self.rank(k))
                        .all(|a| (0..self.rank(l)).all(|b| self.mul_basis(k, a, l, b) == other.mul_basis(k, a, l, b)))
                })
            }),
        }
    }
}

impl Eq for ChowPresentation {}

fn zeros(n: usize) -> Vec<BigInt> {
    vec![BigInt::zero(); n]
}

impl ChowPresentation {
    /// The point: `A = A^0 = Z`, degree of the unit is 1.
    pub fn point() -> Arc<Self> {
        Self::projective_product(&[])
    }

    pub fn projective_space(d: usize) -> Arc<Self> {
        Self::projective_product(&[d])
    }

    /// `P^{d_1} x ... x P^{d_r}` as the Künneth product of the factors, with
    /// basis symbols such as `h⊗1`.
    pub fn projective_product(dims: &[usize]) -> Arc<Self> {
        let mut p = match dims {
            [] => (*Self::truncated(0)).clone(),
            [d] => (*Self::truncated(*d)).clone(),
            [first, rest @ ..] => rest
                .iter()
                .fold(Self::truncated(*first), |acc, &d| tensor(&acc, &Self::truncated(d)))
                .as_ref()
                .clone(),
        };
        p.origin = Origin::ProjectiveProduct(dims.to_vec());
        Arc::new(p)
    }

    /// `Z[h]/(h^{d+1})` with `deg(h^d) = 1`.
    fn truncated(d: usize) -> Arc<Self> {
        let name = |e: usize| match e {
            0 => "1".to_string(),
            1 => "h".to_string(),
            _ => format!("h^{e}"),
        };
        let basis = (0..=d).map(|e| vec![name(e)]).collect();
        let mut table = BTreeMap::new();
        for k in 0..=d {
            for l in 0..=d - k {
                table.insert((k, 0, l, 0), vec![BigInt::one()]);
            }
        }
        Arc::new(ChowPresentation {
            dim: d,
            basis,
            degree: vec![BigInt::one()],
            shape: Shape::Table(table),
            origin: Origin::ProjectiveProduct(vec![d]),
        })
    }

    /// Builds a presentation from named basis symbols and products.
    ///
    /// `products` maps unordered symbol pairs to coefficient vectors over the
    /// basis in the sum of codimensions; missing pairs multiply to zero and
    /// products with the unit are implied. The unit must be the single
    /// symbol of codimension 0.
    pub fn explicit(
        dim: usize,
        basis: Vec<Vec<String>>,
        products: &BTreeMap<(String, String), Vec<BigInt>>,
        degree: Vec<BigInt>,
    ) -> Result<Arc<Self>, ChowError> {
        let bad = |m: String| Err(ChowError::InvalidPresentation(m));
        if basis.len() != dim + 1 {
            return bad(format!("expected {} graded pieces, found {}", dim + 1, basis.len()));
        }
        if basis[0].len() != 1 {
            return bad("A^0 must have exactly one basis element (the unit)".into());
        }
        if degree.len() != basis[dim].len() {
            return bad("degree functional has the wrong length".into());
        }
        let mut index = BTreeMap::new();
        for (k, piece) in basis.iter().enumerate() {
            for (a, sym) in piece.iter().enumerate() {
                if index.insert(sym.clone(), (k, a)).is_some() {
                    return bad(format!("duplicate basis symbol {sym:?}"));
                }
            }
        }
        let mut table: BTreeMap<(usize, usize, usize, usize), Vec<BigInt>> = BTreeMap::new();
        for k in 0..=dim {
            for a in 0..basis[k].len() {
                let mut unit = zeros(basis[k].len());
                unit[a] = BigInt::one();
                table.insert((0, 0, k, a), unit.clone());
                table.insert((k, a, 0, 0), unit);
            }
        }
        for ((x, y), coeffs) in products {
            let (Some(&(k, a)), Some(&(l, b))) = (index.get(x), index.get(y)) else {
                return bad(format!("unknown symbol in product {x}*{y}"));
            };
            if k + l > dim {
                if coeffs.iter().any(|c| !c.is_zero()) {
                    return bad(format!("product {x}*{y} exceeds the dimension"));
                }
                continue;
            }
            if coeffs.len() != basis[k + l].len() {
                return bad(format!("product {x}*{y} has the wrong length"));
            }
            for key in [(k, a, l, b), (l, b, k, a)] {
                if let Some(prev) = table.get(&key) {
                    if prev != coeffs {
                        return bad(format!("inconsistent product {x}*{y}"));
                    }
                }
                table.insert(key, coeffs.clone());
            }
        }
        table.retain(|_, v| v.iter().any(|c| !c.is_zero()));
        let p = ChowPresentation {
            dim,
            basis,
            degree,
            shape: Shape::Table(table),
            origin: Origin::Explicit,
        };
        if let Some(v) = p.law_violations().into_iter().next() {
            return bad(v);
        }
        Ok(Arc::new(p))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    /// Basis symbols of `A^k`; empty outside `0..=dim`.
    pub fn basis(&self, k: usize) -> &[String] {
        self.basis.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn rank(&self, k: usize) -> usize {
        self.basis(k).len()
    }

    pub fn total_rank(&self) -> usize {
        self.basis.iter().map(Vec::len).sum()
    }

    /// Sizes of the graded pieces, `A^0` first.
    pub fn ranks(&self) -> Vec<usize> {
        self.basis.iter().map(Vec::len).collect()
    }

    pub fn degree_functional(&self) -> &[BigInt] {
        &self.degree
    }

    pub fn factors(&self) -> Option<(&Arc<ChowPresentation>, &Arc<ChowPresentation>)> {
        match &self.shape {
            Shape::Tensor { left, right, .. } => Some((left, right)),
            Shape::Table(_) => None,
        }
    }

    /// Product of two basis elements, as a dense vector over `A^{k+l}`
    /// (empty when `k + l > dim`).
    pub fn mul_basis(&self, k: usize, a: usize, l: usize, b: usize) -> Vec<BigInt> {
        if k + l > self.dim {
            return Vec::new();
        }
        match &self.shape {
            Shape::Table(t) => t.get(&(k, a, l, b)).cloned().unwrap_or_else(|| zeros(self.rank(k + l))),
            Shape::Tensor {
                left,
                right,
                parts,
                offsets,
            } => {
                let (k1, a1, b1) = parts[k][a];
                let (l1, a2, b2) = parts[l][b];
                let mut out = zeros(self.rank(k + l));
                let lp = left.mul_basis(k1, a1, l1, a2);
                let rp = right.mul_basis(k - k1, b1, l - l1, b2);
                if lp.is_empty() || rp.is_empty() {
                    return out;
                }
                let off = offsets[k + l][k1 + l1];
                let width = right.rank(k + l - k1 - l1);
                for (i, x) in lp.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                    for (j, y) in rp.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                        out[off + i * width + j] = x * y;
                    }
                }
                out
            }
        }
    }

    /// Index of `e_a ⊗ e_b` in a tensor presentation.
    fn tensor_index(&self, kl: usize, a: usize, kr: usize, b: usize) -> Result<usize, ChowError> {
        match &self.shape {
            Shape::Tensor { right, offsets, .. } => Ok(offsets[kl + kr][kl] + a * right.rank(kr) + b),
            Shape::Table(_) => Err(ChowError::NotTensor),
        }
    }

    fn tensor_parts(&self, k: usize) -> Result<&[(usize, usize, usize)], ChowError> {
        match &self.shape {
            Shape::Tensor { parts, .. } => Ok(parts.get(k).map_or(&[], Vec::as_slice)),
            Shape::Table(_) => Err(ChowError::NotTensor),
        }
    }

    pub fn unit(self: &Arc<Self>) -> ChowClass {
        ChowClass::basis_element(self, 0, 0)
    }

    /// Finite check of the ring axioms on basis elements. Empty means the
    /// presentation is a commutative, associative, unital graded ring.
    pub fn law_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.rank(0) != 1 {
            out.push("A^0 must be spanned by the unit".to_string());
            return out;
        }
        let elems: Vec<(usize, usize)> = (0..=self.dim)
            .flat_map(|k| (0..self.rank(k)).map(move |a| (k, a)))
            .collect();
        for &(k, a) in &elems {
            let mut e = zeros(self.rank(k));
            e[a] = BigInt::one();
            if self.mul_basis(0, 0, k, a) != e {
                out.push(format!("unit does not act trivially on {}", self.basis[k][a]));
            }
            for &(l, b) in &elems {
                if self.mul_basis(k, a, l, b) != self.mul_basis(l, b, k, a) {
                    out.push(format!(
                        "{} * {} is not commutative",
                        self.basis[k][a], self.basis[l][b]
                    ));
                }
            }
        }
        for &(k, a) in &elems {
            for &(l, b) in &elems {
                if k + l > self.dim {
                    continue;
                }
                for &(m, c) in &elems {
                    if k + l + m > self.dim {
                        continue;
                    }
                    let ab = self.mul_basis(k, a, l, b);
                    let bc = self.mul_basis(l, b, m, c);
                    let left = self.mul_coeffs(k + l, &ab, m, &unit_vec(self.rank(m), c));
                    let right = self.mul_coeffs(k, &unit_vec(self.rank(k), a), l + m, &bc);
                    if left != right {
                        out.push(format!(
                            "({} * {}) * {} is not associative",
                            self.basis[k][a], self.basis[l][b], self.basis[m][c]
                        ));
                    }
                }
            }
        }
        out
    }

    fn mul_coeffs(&self, k: usize, x: &[BigInt], l: usize, y: &[BigInt]) -> Vec<BigInt> {
        let mut out = zeros(if k + l <= self.dim { self.rank(k + l) } else { 0 });
        if out.is_empty() {
            return out;
        }
        for (a, xa) in x.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            for (b, yb) in y.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                let p = self.mul_basis(k, a, l, b);
                let s = xa * yb;
                for (o, pv) in out.iter_mut().zip(p) {
                    if !pv.is_zero() {
                        *o += &s * pv;
                    }
                }
            }
        }
        out
    }

    /// Matrix `M^k` with entries `deg(e_a * e_b)`, `e_a ∈ A^k`,
    /// `e_b ∈ A^{dim-k}`.
    pub fn pairing_matrix(&self, k: usize) -> IntMatrix {
        let (r, c) = (self.rank(k), self.rank(self.dim - k));
        let mut m = IntMatrix::zeros(r, c);
        for a in 0..r {
            for b in 0..c {
                let p = self.mul_basis(k, a, self.dim - k, b);
                m[(a, b)] = p.iter().zip(&self.degree).map(|(x, d)| x * d).sum();
            }
        }
        m
    }
}

fn unit_vec(n: usize, i: usize) -> Vec<BigInt> {
    let mut v = zeros(n);
    v[i] = BigInt::one();
    v
}

impl fmt::Display for ChowPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            Origin::ProjectiveProduct(d) if d.is_empty() => write!(f, "pt"),
            Origin::ProjectiveProduct(d) => {
                let parts: Vec<String> = d.iter().map(|x| format!("P{x}")).collect();
                write!(f, "{}", parts.join("x"))
            }
            Origin::Tensor => {
                let (l, r) = self.factors().expect("tensor origin");
                write!(f, "({l})⊗({r})")
            }
            Origin::Explicit => write!(f, "explicit(dim {}, ranks {:?})", self.dim, self.ranks()),
        }
    }
}

/// Künneth product of two presentations.
pub fn tensor(p: &Arc<ChowPresentation>, q: &Arc<ChowPresentation>) -> Arc<ChowPresentation> {
    let dim = p.dim + q.dim;
    let mut basis = vec![Vec::new(); dim + 1];
    let mut parts = vec![Vec::new(); dim + 1];
    let mut offsets = vec![vec![0; dim + 1]; dim + 1];
    for k in 0..=dim {
        for kl in 0..=k {
            offsets[k][kl] = parts[k].len();
            let kr = k - kl;
            if kl > p.dim || kr > q.dim {
                continue;
            }
            for a in 0..p.rank(kl) {
                for b in 0..q.rank(kr) {
                    parts[k].push((kl, a, b));
                    basis[k].push(format!("{}⊗{}", p.basis[kl][a], q.basis[kr][b]));
                }
            }
        }
    }
    let mut degree = Vec::with_capacity(p.rank(p.dim) * q.rank(q.dim));
    for x in &p.degree {
        for y in &q.degree {
            degree.push(x * y);
        }
    }
    Arc::new(ChowPresentation {
        dim,
        basis,
        degree,
        shape: Shape::Tensor {
            left: p.clone(),
            right: q.clone(),
            parts,
            offsets,
        },
        origin: Origin::Tensor,
    })
}

/// A homogeneous class `Σ c_a e_a ∈ A^k`.
#[derive(Clone, PartialEq, Eq)]
pub struct ChowClass {
    pres: Arc<ChowPresentation>,
    codim: usize,
    coeffs: Vec<BigInt>,
}

impl ChowClass {
    pub fn new(pres: &Arc<ChowPresentation>, codim: usize, coeffs: Vec<BigInt>) -> Result<Self, ChowError> {
        if coeffs.len() != pres.rank(codim) {
            return Err(ChowError::InvalidPresentation(format!(
                "class in codimension {codim} needs {} coefficients, got {}",
                pres.rank(codim),
                coeffs.len()
            )));
        }
        Ok(ChowClass {
            pres: pres.clone(),
            codim,
            coeffs,
        })
    }

    pub fn from_i64(pres: &Arc<ChowPresentation>, codim: usize, coeffs: &[i64]) -> Result<Self, ChowError> {
        Self::new(pres, codim, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(pres: &Arc<ChowPresentation>, codim: usize) -> Self {
        ChowClass {
            pres: pres.clone(),
            codim,
            coeffs: zeros(pres.rank(codim)),
        }
    }

    pub fn basis_element(pres: &Arc<ChowPresentation>, codim: usize, index: usize) -> Self {
        ChowClass {
            pres: pres.clone(),
            codim,
            coeffs: unit_vec(pres.rank(codim), index),
        }
    }

    /// Looks a basis element up by its symbol.
    pub fn symbol(pres: &Arc<ChowPresentation>, sym: &str) -> Option<Self> {
        (0..=pres.dim).find_map(|k| {
            pres.basis(k)
                .iter()
                .position(|s| s == sym)
                .map(|a| Self::basis_element(pres, k, a))
        })
    }

    pub fn presentation(&self) -> &Arc<ChowPresentation> {
        &self.pres
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn check_same(&self, other: &ChowClass) -> Result<(), ChowError> {
        if Arc::ptr_eq(&self.pres, &other.pres) || self.pres == other.pres {
            Ok(())
        } else {
            Err(ChowError::PresentationMismatch)
        }
    }

    pub fn add(&self, other: &ChowClass) -> Result<ChowClass, ChowError> {
        self.check_same(other)?;
        if self.codim != other.codim {
            return Err(ChowError::InvalidPresentation(format!(
                "adding classes of codimension {} and {}",
                self.codim, other.codim
            )));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(ChowClass {
            pres: self.pres.clone(),
            codim: self.codim,
            coeffs,
        })
    }

    pub fn scale(&self, s: &BigInt) -> ChowClass {
        ChowClass {
            pres: self.pres.clone(),
            codim: self.codim,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn neg(&self) -> ChowClass {
        self.scale(&BigInt::from(-1))
    }

    /// Re-homes the coefficients on an equal presentation.
    pub fn rebase(&self, pres: &Arc<ChowPresentation>) -> Result<ChowClass, ChowError> {
        if self.pres.ranks() != pres.ranks() {
            return Err(ChowError::PresentationMismatch);
        }
        Ok(ChowClass {
            pres: pres.clone(),
            codim: self.codim,
            coeffs: self.coeffs.clone(),
        })
    }
}

impl fmt::Debug for ChowClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ChowClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .zip(self.pres.basis(self.codim))
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, s)| if c.is_one() { s.clone() } else { format!("{c}*{s}") })
            .collect();
        if terms.is_empty() {
            write!(f, "0[codim {}]", self.codim)
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

pub fn mul(x: &ChowClass, y: &ChowClass) -> Result<ChowClass, ChowError> {
    x.check_same(y)?;
    let coeffs = x.pres.mul_coeffs(x.codim, &x.coeffs, y.codim, &y.coeffs);
    Ok(ChowClass {
        pres: x.pres.clone(),
        codim: x.codim + y.codim,
        coeffs,
    })
}

/// Degree of the top-codimension part; zero for lower codimension.
pub fn degree(x: &ChowClass) -> BigInt {
    if x.codim != x.pres.dim {
        return BigInt::zero();
    }
    x.coeffs.iter().zip(&x.pres.degree).map(|(c, d)| c * d).sum()
}

/// `x ⊗ y` on the tensor presentation `t`, which must be `tensor(P, Q)` for
/// the presentations of `x` and `y`.
pub fn tensor_classes(t: &Arc<ChowPresentation>, x: &ChowClass, y: &ChowClass) -> Result<ChowClass, ChowError> {
    let (p, q) = t.factors().ok_or(ChowError::NotTensor)?;
    if **p != *x.pres || **q != *y.pres {
        return Err(ChowError::PresentationMismatch);
    }
    let k = x.codim + y.codim;
    let mut coeffs = zeros(t.rank(k));
    if k <= t.dim {
        for (a, xa) in x.coeffs.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            for (b, yb) in y.coeffs.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                coeffs[t.tensor_index(x.codim, a, y.codim, b)?] = xa * yb;
            }
        }
    }
    Ok(ChowClass {
        pres: t.clone(),
        codim: k,
        coeffs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    /// Graded ring homomorphism (pullback); degree-preserving.
    Ring,
    /// Graded additive map shifting codimension (pushforward).
    Additive,
}

/// A graded linear map between presentations, given on basis elements.
///
/// Ring maps are pullbacks and keep codimension; additive maps are
/// pushforwards and shift it by `shift`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMap {
    kind: MapKind,
    source: Arc<ChowPresentation>,
    target: Arc<ChowPresentation>,
    shift: isize,
    /// `images[k][a]`: coefficients over `A^{k+shift}` of the target.
    images: Vec<Vec<Vec<BigInt>>>,
}

pub type RingMap = GradedMap;
pub type AdditiveMap = GradedMap;

impl GradedMap {
    /// Builds a map from per-codimension image lists.
    pub fn new(
        kind: MapKind,
        source: &Arc<ChowPresentation>,
        target: &Arc<ChowPresentation>,
        shift: isize,
        images: Vec<Vec<Vec<BigInt>>>,
    ) -> Result<Self, ChowError> {
        if kind == MapKind::Ring && shift != 0 {
            return Err(ChowError::InvalidMap("ring maps preserve codimension".into()));
        }
        if images.len() != source.dim + 1 {
            return Err(ChowError::InvalidMap(format!(
                "expected images for {} graded pieces",
                source.dim + 1
            )));
        }
        for (k, piece) in images.iter().enumerate() {
            if piece.len() != source.rank(k) {
                return Err(ChowError::InvalidMap(format!(
                    "wrong number of images in codimension {k}"
                )));
            }
            let tk = k as isize + shift;
            let width = if tk < 0 { 0 } else { target.rank(tk as usize) };
            if piece.iter().any(|v| v.len() != width) {
                return Err(ChowError::InvalidMap(format!(
                    "images of codimension {k} must have {width} coefficients"
                )));
            }
        }
        Ok(GradedMap {
            kind,
            source: source.clone(),
            target: target.clone(),
            shift,
            images,
        })
    }

    pub fn from_fn(
        kind: MapKind,
        source: &Arc<ChowPresentation>,
        target: &Arc<ChowPresentation>,
        shift: isize,
        mut f: impl FnMut(usize, usize) -> Vec<BigInt>,
    ) -> Result<Self, ChowError> {
        let images = (0..=source.dim)
            .map(|k| (0..source.rank(k)).map(|a| f(k, a)).collect())
            .collect();
        Self::new(kind, source, target, shift, images)
    }

    pub fn identity(p: &Arc<ChowPresentation>) -> Self {
        Self::from_fn(MapKind::Ring, p, p, 0, |k, a| unit_vec(p.rank(k), a)).expect("identity is well formed")
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn source(&self) -> &Arc<ChowPresentation> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ChowPresentation> {
        &self.target
    }

    pub fn shift(&self) -> isize {
        self.shift
    }

    pub fn images(&self) -> &[Vec<Vec<BigInt>>] {
        &self.images
    }

    pub fn image_of(&self, k: usize, a: usize) -> ChowClass {
        let tk = (k as isize + self.shift).max(0) as usize;
        ChowClass {
            pres: self.target.clone(),
            codim: tk,
            coeffs: self.images[k][a].clone(),
        }
    }

    /// Unit-preservation and multiplicativity on basis pairs; empty when the
    /// map is a ring homomorphism.
    pub fn ring_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.shift != 0 {
            out.push("ring map shifts codimension".into());
            return out;
        }
        if self.images[0][0] != unit_vec(self.target.rank(0), 0) {
            out.push("unit is not sent to the unit".into());
        }
        let s = &self.source;
        for k in 0..=s.dim {
            for a in 0..s.rank(k) {
                for l in 0..=s.dim - k {
                    for b in 0..s.rank(l) {
                        let lhs = self.apply_coeffs(k + l, &s.mul_basis(k, a, l, b));
                        let rhs = self.target.mul_coeffs(k, &self.images[k][a], l, &self.images[l][b]);
                        if lhs != rhs {
                            out.push(format!(
                                "map is not multiplicative on {} * {}",
                                s.basis[k][a], s.basis[l][b]
                            ));
                        }
                    }
                }
            }
        }
        out
    }

    fn apply_coeffs(&self, k: usize, coeffs: &[BigInt]) -> Vec<BigInt> {
        let tk = k as isize + self.shift;
        let width = if tk < 0 { 0 } else { self.target.rank(tk as usize) };
        let mut out = zeros(width);
        for (a, c) in coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            for (o, v) in out.iter_mut().zip(&self.images[k][a]) {
                if !v.is_zero() {
                    *o += c * v;
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &ChowClass) -> Result<ChowClass, ChowError> {
        if !(Arc::ptr_eq(&x.pres, &self.source) || *x.pres == *self.source) {
            return Err(ChowError::PresentationMismatch);
        }
        let tk = x.codim as isize + self.shift;
        if tk < 0 {
            return Err(ChowError::CodimOutOfRange(tk));
        }
        if x.codim > self.source.dim {
            return Ok(ChowClass::zero(&self.target, tk as usize));
        }
        Ok(ChowClass {
            pres: self.target.clone(),
            codim: tk as usize,
            coeffs: self.apply_coeffs(x.codim, &x.coeffs),
        })
    }

    /// `self ∘ first` (apply `first`, then `self`).
    pub fn compose(&self, first: &GradedMap) -> Result<GradedMap, ChowError> {
        if *first.target != *self.source {
            return Err(ChowError::PresentationMismatch);
        }
        let kind = if self.kind == MapKind::Ring && first.kind == MapKind::Ring {
            MapKind::Ring
        } else {
            MapKind::Additive
        };
        let shift = self.shift + first.shift;
        GradedMap::from_fn(kind, &first.source, &self.target, shift, |k, a| {
            let mid = k as isize + first.shift;
            if mid < 0 || mid as usize > self.source.dim {
                let tk = k as isize + shift;
                return zeros(if tk < 0 { 0 } else { self.target.rank(tk as usize) });
            }
            self.apply_coeffs(mid as usize, &first.images[k][a])
        })
    }
}

/// Applies a map to a class.
pub fn apply(m: &GradedMap, x: &ChowClass) -> Result<ChowClass, ChowError> {
    m.apply(x)
}

/// `f ⊗ g`, acting factorwise on `e_a ⊗ e_b`.
pub fn tensor_map(f: &GradedMap, g: &GradedMap) -> Result<GradedMap, ChowError> {
    if f.kind != g.kind {
        return Err(ChowError::KindMismatch);
    }
    let source = tensor(&f.source, &g.source);
    let target = tensor(&f.target, &g.target);
    let shift = f.shift + g.shift;
    let mut images = Vec::with_capacity(source.dim + 1);
    for k in 0..=source.dim {
        let tk = k as isize + shift;
        let width = if tk < 0 { 0 } else { target.rank(tk as usize) };
        let mut piece = Vec::with_capacity(source.rank(k));
        for &(kl, a, b) in source.tensor_parts(k)? {
            let kr = k - kl;
            let mut v = zeros(width);
            let (tl, tr) = (kl as isize + f.shift, kr as isize + g.shift);
            if tl >= 0 && tr >= 0 && width > 0 {
                let (tl, tr) = (tl as usize, tr as usize);
                for (i, x) in f.images[kl][a].iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                    for (j, y) in g.images[kr][b].iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                        v[target.tensor_index(tl, i, tr, j)?] = x * y;
                    }
                }
            }
            piece.push(v);
        }
        images.push(piece);
    }
    GradedMap::new(f.kind, &source, &target, shift, images)
}

/// Pushforward along a projection of `P ⊗ Q` onto one factor: integrates the
/// other factor against its degree functional.
pub fn proj_pushforward(t: &Arc<ChowPresentation>, keep_first: bool) -> Result<GradedMap, ChowError> {
    let (p, q) = t.factors().ok_or(ChowError::NotTensor)?;
    let (kept, gone) = if keep_first { (p, q) } else { (q, p) };
    let shift = -(gone.dim as isize);
    let images = (0..=t.dim)
        .map(|k| {
            let tk = k as isize + shift;
            let width = if tk < 0 { 0 } else { kept.rank(tk as usize) };
            t.tensor_parts(k)
                .expect("tensor")
                .iter()
                .map(|&(kl, a, b)| {
                    let mut v = zeros(width);
                    let (kk, ki, kg, gi) = if keep_first {
                        (kl, a, k - kl, b)
                    } else {
                        (k - kl, b, kl, a)
                    };
                    if kg == gone.dim && width > 0 {
                        v[ki] = gone.degree[gi].clone();
                        debug_assert_eq!(kk as isize, tk);
                    }
                    v
                })
                .collect()
        })
        .collect();
    GradedMap::new(MapKind::Additive, t, kept, shift, images)
}

/// On `(A ⊗ B) ⊗ C`, the pushforward to `A ⊗ C` integrating out `B`.
pub fn integrate_middle(t: &Arc<ChowPresentation>) -> Result<GradedMap, ChowError> {
    let (ab, c) = t.factors().ok_or(ChowError::NotTensor)?;
    let (a, b) = ab.factors().ok_or(ChowError::NotTensor)?;
    let target = tensor(a, c);
    let shift = -(b.dim as isize);
    let mut images = Vec::with_capacity(t.dim + 1);
    for k in 0..=t.dim {
        let tk = k as isize + shift;
        let width = if tk < 0 { 0 } else { target.rank(tk as usize) };
        let mut piece = Vec::new();
        for &(kab, iab, ic) in t.tensor_parts(k)? {
            let mut v = zeros(width);
            let (ka, ia, ib) = ab.tensor_parts(kab)?[iab];
            let kb = kab - ka;
            if kb == b.dim && width > 0 {
                v[target.tensor_index(ka, ia, k - kab, ic)?] = b.degree[ib].clone();
            }
            piece.push(v);
        }
        images.push(piece);
    }
    GradedMap::new(MapKind::Additive, t, &target, shift, images)
}

/// Re-brackets a class on `A ⊗ (B ⊗ C)` as a class on `(A ⊗ B) ⊗ C`.
pub fn reassociate_left(x: &ChowClass, target: &Arc<ChowPresentation>) -> Result<ChowClass, ChowError> {
    let src = &x.pres;
    let (a, bc) = src.factors().ok_or(ChowError::NotTensor)?;
    let (b, c) = bc.factors().ok_or(ChowError::NotTensor)?;
    let (tab, tc) = target.factors().ok_or(ChowError::NotTensor)?;
    let (ta, tb) = tab.factors().ok_or(ChowError::NotTensor)?;
    if **ta != **a || **tb != **b || **tc != **c {
        return Err(ChowError::PresentationMismatch);
    }
    let k = x.codim;
    let mut coeffs = zeros(target.rank(k));
    for (idx, &(ka, ia, ibc)) in src.tensor_parts(k)?.iter().enumerate() {
        if x.coeffs[idx].is_zero() {
            continue;
        }
        let (kb, ib, ic) = bc.tensor_parts(k - ka)?[ibc];
        let iab = tab.tensor_index(ka, ia, kb, ib)?;
        let pos = target.tensor_index(ka + kb, iab, k - ka - kb, ic)?;
        coeffs[pos] = x.coeffs[idx].clone();
    }
    Ok(ChowClass {
        pres: target.clone(),
        codim: k,
        coeffs,
    })
}

/// The diagonal class `Δ_P` on `P ⊗ P`, characterized by
/// `pr_{1*}(Δ · (1 ⊗ x)) = x` for every `x`.
pub fn diagonal_class(p: &Arc<ChowPresentation>) -> Result<ChowClass, ChowError> {
    let t = tensor(p, p);
    diagonal_on(p, &t)
}

/// Same as [`diagonal_class`], on a caller-supplied copy of `tensor(p, p)`.
pub fn diagonal_on(p: &Arc<ChowPresentation>, t: &Arc<ChowPresentation>) -> Result<ChowClass, ChowError> {
    let n = p.dim;
    let mut coeffs = zeros(t.rank(n));
    for k in 0..=n {
        let m = p.pairing_matrix(k);
        if m.rows() != m.cols() {
            return Err(ChowError::NonUnimodularPairing { codim: k });
        }
        let inv = unimodular_inverse(&m).ok_or(ChowError::NonUnimodularPairing { codim: k })?;
        for a in 0..p.rank(k) {
            for b in 0..p.rank(n - k) {
                let c = &inv[(b, a)];
                if !c.is_zero() {
                    coeffs[t.tensor_index(k, a, n - k, b)?] = c.clone();
                }
            }
        }
    }
    Ok(ChowClass {
        pres: t.clone(),
        codim: n,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(p: &Arc<ChowPresentation>, s: &str) -> ChowClass {
        ChowClass::symbol(p, s).unwrap_or_else(|| panic!("no symbol {s} in {:?}", p.basis))
    }

    #[test]
    fn p1xp1_square_of_hyperplane_sum() {
        let p = ChowPresentation::projective_product(&[1, 1]);
        let x = sym(&p, "h⊗1").add(&sym(&p, "1⊗h")).unwrap();
        let sq = mul(&x, &x).unwrap();
        assert_eq!(sq, sym(&p, "h⊗h").scale(&BigInt::from(2)));
        assert_eq!(
            *p,
            *tensor(
                &ChowPresentation::projective_space(1),
                &ChowPresentation::projective_space(1)
            )
        );
    }

    #[test]
    fn unit_is_neutral_and_p2_square() {
        let p2 = ChowPresentation::projective_space(2);
        let h = sym(&p2, "h");
        assert_eq!(mul(&h, &p2.unit()).unwrap(), h);
        assert_eq!(mul(&h, &h).unwrap(), sym(&p2, "h^2"));
        assert!(mul(&mul(&h, &h).unwrap(), &h).unwrap().coeffs().is_empty());
    }

    #[test]
    fn degrees() {
        let p = ChowPresentation::projective_product(&[1, 1]);
        assert_eq!(degree(&sym(&p, "h⊗h")), BigInt::one());
        assert_eq!(degree(&sym(&p, "h⊗h").scale(&BigInt::from(2))), BigInt::from(2));
        assert_eq!(degree(&sym(&p, "h⊗1")), BigInt::zero());
    }

    #[test]
    fn tensor_ranks() {
        let pt = ChowPresentation::point();
        let p1 = ChowPresentation::projective_space(1);
        let p2 = ChowPresentation::projective_space(2);
        let t = tensor(&pt, &pt);
        assert_eq!((t.dim(), t.ranks()), (0, vec![1]));
        assert_eq!(tensor(&p1, &p1).ranks(), vec![1, 2, 1]);
        assert_eq!(tensor(&p2, &p1).ranks(), vec![1, 2, 2, 1]);
        assert!(tensor(&p2, &p1).law_violations().is_empty());
    }

    fn line_in_plane() -> (GradedMap, GradedMap) {
        let p1 = ChowPresentation::projective_space(1);
        let p2 = ChowPresentation::projective_space(2);
        let v = |xs: &[i64]| xs.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        let pull = GradedMap::new(
            MapKind::Ring,
            &p2,
            &p1,
            0,
            vec![vec![v(&[1])], vec![v(&[1])], vec![v(&[])]],
        )
        .unwrap();
        let push = GradedMap::new(MapKind::Additive, &p1, &p2, 1, vec![vec![v(&[1])], vec![v(&[1])]]).unwrap();
        (pull, push)
    }

    fn point_in_line() -> (GradedMap, GradedMap) {
        let pt = ChowPresentation::point();
        let p1 = ChowPresentation::projective_space(1);
        let v = |xs: &[i64]| xs.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        let pull = GradedMap::new(MapKind::Ring, &p1, &pt, 0, vec![vec![v(&[1])], vec![v(&[])]]).unwrap();
        let push = GradedMap::new(MapKind::Additive, &pt, &p1, 1, vec![vec![v(&[1])]]).unwrap();
        (pull, push)
    }

    #[test]
    fn apply_examples() {
        let (pull, push) = point_in_line();
        let p1 = push.target().clone();
        let pt = push.source().clone();
        assert_eq!(push.apply(&pt.unit()).unwrap(), sym(&p1, "h"));
        let (pull2, _) = line_in_plane();
        let p2 = pull2.source().clone();
        let image = pull2.apply(&sym(&p2, "h^2")).unwrap();
        assert!(image.is_zero());
        assert!(pull.ring_violations().is_empty());
        assert!(pull2.ring_violations().is_empty());
        let id = GradedMap::identity(&p2);
        assert_eq!(id.apply(&sym(&p2, "h")).unwrap(), sym(&p2, "h"));
    }

    #[test]
    fn tensor_map_examples() {
        let (pull, push) = point_in_line();
        let p1 = pull.source().clone();
        let id1 = GradedMap::identity(&p1);
        let f = tensor_map(&pull, &id1).unwrap();
        let src = f.source().clone();
        let x = sym(&src, "h⊗1").add(&sym(&src, "1⊗h")).unwrap();
        assert_eq!(f.apply(&x).unwrap(), sym(f.target(), "1⊗h"));

        let pt = push.source().clone();
        let id_pt_add = GradedMap::from_fn(MapKind::Additive, &p1, &p1, 0, |k, a| unit_vec(p1.rank(k), a)).unwrap();
        let g = tensor_map(&id_pt_add, &push).unwrap();
        let one = ChowClass::basis_element(g.source(), 0, 0);
        assert_eq!(g.apply(&one).unwrap(), sym(g.target(), "1⊗h"));
        let _ = pt;

        let idt = tensor_map(&id1, &id1).unwrap();
        assert_eq!(idt, GradedMap::identity(&tensor(&p1, &p1)));
        assert_eq!(tensor_map(&pull, &push), Err(ChowError::KindMismatch));
    }

    #[test]
    fn projection_pushforward() {
        let p1 = ChowPresentation::projective_space(1);
        let t = tensor(&p1, &p1);
        let pr = proj_pushforward(&t, true).unwrap();
        assert_eq!(pr.apply(&sym(&t, "h⊗h")).unwrap(), sym(&p1, "h"));
        assert!(pr.apply(&sym(&t, "h⊗1")).unwrap().is_zero());
        let pt = ChowPresentation::point();
        let tp = tensor(&pt, &pt);
        let prp = proj_pushforward(&tp, true).unwrap();
        assert_eq!(prp.apply(&tp.unit()).unwrap(), pt.unit());
        assert_eq!(proj_pushforward(&p1, true).unwrap_err(), ChowError::NotTensor);
    }

    #[test]
    fn diagonal_examples() {
        let pt = ChowPresentation::point();
        let d = diagonal_class(&pt).unwrap();
        assert_eq!(d, d.presentation().unit());

        let p1 = ChowPresentation::projective_space(1);
        let d1 = diagonal_class(&p1).unwrap();
        let t1 = d1.presentation().clone();
        assert_eq!(d1, sym(&t1, "h⊗1").add(&sym(&t1, "1⊗h")).unwrap());

        let p2 = ChowPresentation::projective_space(2);
        let d2 = diagonal_class(&p2).unwrap();
        let t2 = d2.presentation().clone();
        let expect = sym(&t2, "h^2⊗1")
            .add(&sym(&t2, "h⊗h"))
            .unwrap()
            .add(&sym(&t2, "1⊗h^2"))
            .unwrap();
        assert_eq!(d2, expect);

        assert_eq!(degree(&mul(&d1, &d1).unwrap()), BigInt::from(2));
        assert_eq!(degree(&mul(&d2, &d2).unwrap()), BigInt::from(3));
    }

    #[test]
    fn diagonal_reproduces_classes() {
        for p in [
            ChowPresentation::projective_space(2),
            ChowPresentation::projective_product(&[1, 2]),
            ChowPresentation::projective_product(&[1, 1, 1]),
        ] {
            let d = diagonal_class(&p).unwrap();
            let t = d.presentation().clone();
            let pr = proj_pushforward(&t, true).unwrap();
            for k in 0..=p.dim() {
                for a in 0..p.rank(k) {
                    let x = ChowClass::basis_element(&p, k, a);
                    let lifted = tensor_classes(&t, &p.unit(), &x).unwrap();
                    let back = pr.apply(&mul(&d, &lifted).unwrap()).unwrap();
                    assert_eq!(back, x);
                }
            }
        }
    }

    #[test]
    fn non_unimodular_pairing_rejected() {
        // P^1 with the point class scaled: deg(h) = 2
        let basis = vec![vec!["1".to_string()], vec!["h".to_string()]];
        let p = ChowPresentation::explicit(1, basis, &BTreeMap::new(), vec![BigInt::from(2)]).unwrap();
        assert_eq!(
            diagonal_class(&p).unwrap_err(),
            ChowError::NonUnimodularPairing { codim: 0 }
        );
    }

    #[test]
    fn explicit_matches_generated() {
        let basis = vec![vec!["1".to_string()], vec!["h".to_string()], vec!["h^2".to_string()]];
        let mut prods = BTreeMap::new();
        prods.insert(("h".to_string(), "h".to_string()), vec![BigInt::one()]);
        let p = ChowPresentation::explicit(2, basis, &prods, vec![BigInt::one()]).unwrap();
        assert_eq!(*p, *ChowPresentation::projective_space(2));
    }

    #[test]
    fn explicit_rejects_bad_unit() {
        // A^0 must be one-dimensional
        let basis = vec![vec!["1".to_string(), "u".to_string()]];
        assert!(ChowPresentation::explicit(0, basis, &BTreeMap::new(), vec![BigInt::one(), BigInt::one()]).is_err());
    }

    #[test]
    fn integrate_middle_on_triple() {
        let p1 = ChowPresentation::projective_space(1);
        let t12 = tensor(&p1, &p1);
        let t = tensor(&t12, &p1);
        let m = integrate_middle(&t).unwrap();
        // (1⊗h)⊗1 ↦ 1⊗1
        let x = sym(&t, "1⊗h⊗1");
        assert_eq!(m.apply(&x).unwrap(), m.target().unit());
        assert!(m.apply(&sym(&t, "h⊗1⊗h")).unwrap().is_zero());
        assert!(m.apply(&t.unit()).is_err());
        assert!(m.apply(&sym(&t, "h⊗1⊗1")).unwrap().is_zero());
    }

    #[test]
    fn reassociation_preserves_symbols() {
        let p1 = ChowPresentation::projective_space(1);
        let p2 = ChowPresentation::projective_space(2);
        let right = tensor(&p1, &tensor(&p2, &p1));
        let left = tensor(&tensor(&p1, &p2), &p1);
        let x = sym(&right, "h⊗h^2⊗1");
        let y = reassociate_left(&x, &left).unwrap();
        assert_eq!(y, sym(&left, "h⊗h^2⊗1"));
    }
}
