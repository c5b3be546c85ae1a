//! The combinatorial skeleton of a strictly semistable special fiber.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::chow::{mul, tensor, tensor_map, ChowClass, ChowError, ChowPresentation, GradedMap, MapKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrataError {
    #[error("stratum {0} is absent")]
    Absent(StratumKey),
    #[error("component {0} already belongs to the key")]
    AlreadyPresent(usize),
    #[error("invalid stratum key {0:?}: must be nonempty, strictly increasing, positive")]
    InvalidKey(Vec<usize>),
    #[error(transparent)]
    Chow(#[from] ChowError),
}

/// A nonempty, strictly increasing subset `I` of the components.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StratumKey(Vec<usize>);

impl StratumKey {
    pub fn new(elems: Vec<usize>) -> Result<Self, StrataError> {
        let ok = !elems.is_empty() && elems[0] >= 1 && elems.windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(StratumKey(elems))
        } else {
            Err(StrataError::InvalidKey(elems))
        }
    }

    /// Builds a key from any list of distinct components, sorting it.
    pub fn from_unsorted(mut elems: Vec<usize>) -> Result<Self, StrataError> {
        elems.sort_unstable();
        Self::new(elems)
    }

    pub fn singleton(i: usize) -> Self {
        StratumKey(vec![i])
    }

    pub fn elems(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset(&self, other: &StratumKey) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn with(&self, i: usize) -> StratumKey {
        let mut v = self.0.clone();
        if let Err(p) = v.binary_search(&i) {
            v.insert(p, i);
        }
        StratumKey(v)
    }

    /// `I ∖ {i}`, or `None` when that is empty.
    pub fn without(&self, i: usize) -> Option<StratumKey> {
        let v: Vec<usize> = self.0.iter().copied().filter(|&x| x != i).collect();
        (!v.is_empty()).then_some(StratumKey(v))
    }

    /// Image under a 1-based permutation `perm[i-1] = σ(i)`.
    pub fn permuted(&self, perm: &[usize]) -> StratumKey {
        let mut v: Vec<usize> = self.0.iter().map(|&i| perm[i - 1]).collect();
        v.sort_unstable();
        StratumKey(v)
    }
}

impl fmt::Display for StratumKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `h(j)`: the 1-based position of `j` in the increasing ordering of `J ∪ {j}`.
pub fn position(j_set: &[usize], j: usize) -> Result<usize, StrataError> {
    if j_set.contains(&j) {
        return Err(StrataError::AlreadyPresent(j));
    }
    Ok(1 + j_set.iter().filter(|&&x| x < j).count())
}

/// Pullback and pushforward along the divisor inclusion `Y_{I∪{i}} ⊂ Y_I`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Edge {
    pub pullback: Option<GradedMap>,
    pub pushforward: Option<GradedMap>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub check: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.check, self.detail)
    }
}

fn violation(check: &'static str, detail: impl Into<String>) -> Violation {
    Violation {
        check,
        detail: detail.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceStructure {
    t: usize,
    n: usize,
    strata: BTreeMap<StratumKey, Arc<ChowPresentation>>,
    /// Keyed by `(I, I ∪ {i})`.
    edges: BTreeMap<(StratumKey, StratumKey), Edge>,
    /// Problems found while assembling the structure from raw data.
    issues: Vec<Violation>,
}

impl IncidenceStructure {
    pub fn new(t: usize, n: usize) -> Self {
        IncidenceStructure {
            t,
            n,
            strata: BTreeMap::new(),
            edges: BTreeMap::new(),
            issues: Vec::new(),
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_stratum(&mut self, key: StratumKey, pres: Arc<ChowPresentation>) {
        self.strata.insert(key, pres);
    }

    pub fn remove_stratum(&mut self, key: &StratumKey) {
        self.strata.remove(key);
    }

    pub fn set_edge(&mut self, outer: StratumKey, inner: StratumKey, edge: Edge) {
        self.edges.insert((outer, inner), edge);
    }

    pub fn edge_mut(&mut self, outer: &StratumKey, inner: &StratumKey) -> Option<&mut Edge> {
        self.edges.get_mut(&(outer.clone(), inner.clone()))
    }

    pub fn record_issue(&mut self, check: &'static str, detail: impl Into<String>) {
        self.issues.push(violation(check, detail));
    }

    pub fn strata(&self) -> &BTreeMap<StratumKey, Arc<ChowPresentation>> {
        &self.strata
    }

    pub fn edges(&self) -> &BTreeMap<(StratumKey, StratumKey), Edge> {
        &self.edges
    }

    pub fn presentation(&self, key: &StratumKey) -> Result<&Arc<ChowPresentation>, StrataError> {
        self.strata.get(key).ok_or_else(|| StrataError::Absent(key.clone()))
    }

    pub fn is_present(&self, key: &StratumKey) -> bool {
        self.strata.contains_key(key)
    }

    /// Present strata with `|I| = m`, in lexicographic order.
    pub fn strata_of_size(&self, m: usize) -> Vec<&StratumKey> {
        self.strata.keys().filter(|k| k.len() == m).collect()
    }

    /// Largest `m` with a present `|I| = m` stratum.
    pub fn max_level(&self) -> usize {
        self.strata.keys().map(StratumKey::len).max().unwrap_or(0)
    }

    pub fn pullback(&self, outer: &StratumKey, inner: &StratumKey) -> Option<&GradedMap> {
        self.edges
            .get(&(outer.clone(), inner.clone()))
            .and_then(|e| e.pullback.as_ref())
    }

    pub fn pushforward(&self, outer: &StratumKey, inner: &StratumKey) -> Option<&GradedMap> {
        self.edges
            .get(&(outer.clone(), inner.clone()))
            .and_then(|e| e.pushforward.as_ref())
    }

    /// Pullback along `Y_inner ⊂ Y_outer`, the zero map when the data is missing.
    fn pullback_or_zero(&self, outer: &StratumKey, inner: &StratumKey) -> Result<GradedMap, StrataError> {
        match self.pullback(outer, inner) {
            Some(m) => Ok(m.clone()),
            None => Ok(zero_map(
                MapKind::Ring,
                self.presentation(outer)?,
                self.presentation(inner)?,
                0,
            )),
        }
    }

    fn pushforward_or_zero(&self, outer: &StratumKey, inner: &StratumKey) -> Result<GradedMap, StrataError> {
        match self.pushforward(outer, inner) {
            Some(m) => Ok(m.clone()),
            None => Ok(zero_map(
                MapKind::Additive,
                self.presentation(inner)?,
                self.presentation(outer)?,
                1,
            )),
        }
    }

    /// `A(Y_I) ⊗ A(Y_J)`.
    pub fn stratum_product(&self, i: &StratumKey, j: &StratumKey) -> Result<Arc<ChowPresentation>, StrataError> {
        Ok(tensor(self.presentation(i)?, self.presentation(j)?))
    }

    /// Restriction `A(Y_{I∖{i_h}, J}) → A(Y_{I,J})` along the first factor.
    pub fn gysin_first(&self, i: &StratumKey, i_h: usize, j: &StratumKey) -> Result<GradedMap, StrataError> {
        let outer = i.without(i_h).ok_or_else(|| StrataError::InvalidKey(vec![]))?;
        let pull = self.pullback_or_zero(&outer, i)?;
        let id = GradedMap::identity(self.presentation(j)?);
        Ok(tensor_map(&pull, &id)?)
    }

    /// Pushforward `A(Y_{I, J∪{j}}) → A(Y_{I,J})` along the second factor.
    pub fn push_second(&self, i: &StratumKey, j_set: &StratumKey, j: usize) -> Result<GradedMap, StrataError> {
        let inner = j_set.with(j);
        let push = self.pushforward_or_zero(j_set, &inner)?;
        let id = additive_identity(self.presentation(i)?);
        Ok(tensor_map(&id, &push)?)
    }

    /// Present pairs `(I, J)` with `|I| = |J| = m`, lexicographically.
    pub fn enumerate_level(&self, m: usize) -> Vec<(StratumKey, StratumKey)> {
        let keys = self.strata_of_size(m);
        keys.iter()
            .flat_map(|i| keys.iter().map(move |j| ((*i).clone(), (*j).clone())))
            .collect()
    }

    /// Every violated invariant; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.issues.clone();
        for (key, pres) in &self.strata {
            if key.elems().iter().any(|&i| i > self.t) {
                out.push(violation(
                    "key_range",
                    format!("{key} uses a component outside 1..={}", self.t),
                ));
            }
            if key.len() > self.n || pres.dim() != self.n - key.len() {
                out.push(violation(
                    "dimension",
                    format!(
                        "{key} has dimension {}, expected n - |I| = {}",
                        pres.dim(),
                        self.n as isize - key.len() as isize
                    ),
                ));
            }
            for law in pres.law_violations() {
                out.push(violation("presentation", format!("{key}: {law}")));
            }
            for &i in key.elems() {
                if let Some(sub) = key.without(i) {
                    if !self.is_present(&sub) {
                        out.push(violation(
                            "downward_closure",
                            format!("{key} is present but {sub} is absent"),
                        ));
                    }
                }
            }
        }
        for (outer, inner) in self.edges.keys() {
            let ok = outer.len() + 1 == inner.len() && outer.is_subset(inner);
            if !ok {
                out.push(violation(
                    "edge_shape",
                    format!("{outer} -> {inner} is not a codimension-one inclusion"),
                ));
            } else if !self.is_present(outer) || !self.is_present(inner) {
                out.push(violation(
                    "edge_shape",
                    format!("edge {outer} -> {inner} joins an absent stratum"),
                ));
            }
        }
        for inner in self.strata.keys() {
            for &i in inner.elems() {
                let Some(outer) = inner.without(i) else { continue };
                let (Ok(po), Ok(pi)) = (self.presentation(&outer), self.presentation(inner)) else {
                    continue;
                };
                let pair = format!("{outer} -> {inner}");
                let edge = self.edges.get(&(outer.clone(), inner.clone()));
                let pull = edge.and_then(|e| e.pullback.as_ref());
                let push = edge.and_then(|e| e.pushforward.as_ref());
                match pull {
                    None => out.push(violation("missing_edge", format!("{pair}: no pullback data"))),
                    Some(f) => {
                        if **f.source() != **po || **f.target() != **pi || f.kind() != MapKind::Ring {
                            out.push(violation(
                                "edge_shape",
                                format!("{pair}: pullback has the wrong signature"),
                            ));
                        } else {
                            for v in f.ring_violations() {
                                out.push(violation("multiplicativity", format!("{pair}: {v}")));
                            }
                        }
                    }
                }
                match push {
                    None => out.push(violation("missing_edge", format!("{pair}: no pushforward data"))),
                    Some(g) => {
                        if **g.source() != **pi || **g.target() != **po || g.shift() != 1 {
                            out.push(violation(
                                "edge_shape",
                                format!("{pair}: pushforward has the wrong signature"),
                            ));
                        }
                    }
                }
                if let (Some(f), Some(g)) = (pull, push) {
                    if **f.source() == **po && **f.target() == **pi && **g.source() == **pi && **g.target() == **po {
                        out.extend(
                            projection_formula_violations(f, g)
                                .into_iter()
                                .map(|v| violation(v.check, format!("{pair}: {}", v.detail))),
                        );
                    }
                }
            }
        }
        out.extend(self.square_violations());
        out
    }

    /// Pullback and pushforward compositions around every square
    /// `I ⊂ I∪{a}, I∪{b} ⊂ I∪{a,b}` agree.
    fn square_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for top in self.strata.keys().filter(|k| k.len() >= 2) {
            let elems = top.elems();
            for (x, &a) in elems.iter().enumerate() {
                for &b in &elems[x + 1..] {
                    let Some(base) = top.without(a).and_then(|k| k.without(b)) else {
                        continue;
                    };
                    let (via_a, via_b) = (base.with(a), base.with(b));
                    let get = |o: &StratumKey, i: &StratumKey| (self.pullback(o, i), self.pushforward(o, i));
                    let (p1, q1) = get(&base, &via_a);
                    let (p2, q2) = get(&via_a, top);
                    let (p3, q3) = get(&base, &via_b);
                    let (p4, q4) = get(&via_b, top);
                    if let (Some(p1), Some(p2), Some(p3), Some(p4)) = (p1, p2, p3, p4) {
                        if p2.compose(p1).ok() != p4.compose(p3).ok() {
                            out.push(violation(
                                "square_pullback",
                                format!("pullbacks {base} -> {top} via {via_a} and {via_b} differ"),
                            ));
                        }
                    }
                    if let (Some(q1), Some(q2), Some(q3), Some(q4)) = (q1, q2, q3, q4) {
                        if q1.compose(q2).ok() != q3.compose(q4).ok() {
                            out.push(violation(
                                "square_pushforward",
                                format!("pushforwards {top} -> {base} via {via_a} and {via_b} differ"),
                            ));
                        }
                    }
                }
            }
        }
        out
    }

    /// Normal-crossing balance on every `|I| ≥ 2` stratum:
    /// `Σ_{c∈I} ι*ι_*(1) + Σ_{c∉I} [Y_{I∪{c}}] = 0` in `A^1(Y_I)`.
    /// `d1 ∘ d1 = 0` on the E1 page needs this.
    pub fn balance_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (key, pres) in self.strata.iter().filter(|(k, _)| k.len() >= 2) {
            let mut total = ChowClass::zero(pres, 1);
            for &c in key.elems() {
                let outer = key.without(c).expect("|I| >= 2");
                if let (Some(f), Some(g)) = (self.pullback(&outer, key), self.pushforward(&outer, key)) {
                    if let Ok(x) = g.apply(&pres.unit()).and_then(|y| f.apply(&y)) {
                        total = total.add(&x).unwrap_or(total);
                    }
                }
            }
            for c in 1..=self.t {
                if key.contains(c) {
                    continue;
                }
                let inner = key.with(c);
                if let (Some(f), Some(g)) = (self.pullback(key, &inner), self.pushforward(key, &inner)) {
                    if let Ok(x) = f.apply(&pres.unit()).and_then(|y| g.apply(&y)) {
                        total = total.add(&x).unwrap_or(total);
                    }
                }
            }
            if !total.is_zero() {
                out.push(violation(
                    "balance",
                    format!("{key}: normal classes sum to {total}, not 0"),
                ));
            }
        }
        out
    }

    /// Transversal base change on every square `K ⊂ K∪{a}, K∪{b}`:
    /// `ι*_{K∪b⊂K} ι_{K∪a⊂K *} = ι_{K∪a∪b⊂K∪b *} ι*_{K∪a∪b⊂K∪a}`, the right
    /// side being zero when `Y_{K∪{a,b}}` is empty.
    pub fn base_change_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for base in self.strata.keys() {
            for a in 1..=self.t {
                for b in 1..=self.t {
                    if a == b || base.contains(a) || base.contains(b) {
                        continue;
                    }
                    let (ka, kb) = (base.with(a), base.with(b));
                    let (Some(push_a), Some(pull_b)) = (self.pushforward(base, &ka), self.pullback(base, &kb)) else {
                        continue;
                    };
                    let Ok(lhs) = pull_b.compose(push_a) else { continue };
                    let top = ka.with(b);
                    let rhs = match (self.pullback(&ka, &top), self.pushforward(&kb, &top)) {
                        (Some(f), Some(g)) => g.compose(f).ok(),
                        _ => Some(zero_map(MapKind::Additive, lhs.source(), lhs.target(), lhs.shift())),
                    };
                    if rhs.as_ref().map(GradedMap::images) != Some(lhs.images()) {
                        out.push(violation(
                            "base_change",
                            format!("{ka} -> {base} -> {kb} disagrees with the route through {top}"),
                        ));
                    }
                }
            }
        }
        out
    }

    /// Violations of `perm` being an automorphism of the strata containing
    /// `root` (or of all strata), with equal presentations and edge data.
    pub fn automorphism_violations(&self, perm: &[usize], root: Option<usize>) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = perm.to_vec();
        seen.sort_unstable();
        if perm.len() != self.t || seen != (1..=self.t).collect::<Vec<_>>() {
            out.push(format!("{perm:?} is not a permutation of 1..={}", self.t));
            return out;
        }
        let in_scope = |k: &StratumKey| root.is_none_or(|r| k.contains(r));
        for (key, pres) in self.strata.iter().filter(|(k, _)| in_scope(k)) {
            let image = key.permuted(perm);
            match self.strata.get(&image) {
                None => out.push(format!("{key} maps to absent {image}")),
                Some(p) if **p != **pres => out.push(format!("{key} and {image} have different presentations")),
                Some(_) => {}
            }
        }
        for ((outer, inner), edge) in self.edges.iter().filter(|((o, _), _)| in_scope(o)) {
            let image = (outer.permuted(perm), inner.permuted(perm));
            if self.edges.get(&image) != Some(edge) {
                out.push(format!(
                    "edge {outer} -> {inner} is not carried to {} -> {}",
                    image.0, image.1
                ));
            }
        }
        out
    }

    /// The same structure with component `i` renamed to `perm[i-1]`.
    pub fn relabel(&self, perm: &[usize]) -> IncidenceStructure {
        let mut s = IncidenceStructure::new(self.t, self.n);
        for (k, p) in &self.strata {
            s.add_stratum(k.permuted(perm), p.clone());
        }
        for ((o, i), e) in &self.edges {
            s.set_edge(o.permuted(perm), i.permuted(perm), e.clone());
        }
        s.issues = self.issues.clone();
        s
    }
}

/// `ι_*(ι* x · y) = x · ι_* y` and `ι_*(ι* x · ι* y) = ι_*(1) · x · y` on
/// basis elements.
pub fn projection_formula_violations(pull: &GradedMap, push: &GradedMap) -> Vec<Violation> {
    let mut out = Vec::new();
    let (outer, inner) = (pull.source(), pull.target());
    let basis = |p: &Arc<ChowPresentation>| -> Vec<ChowClass> {
        (0..=p.dim())
            .flat_map(|k| (0..p.rank(k)).map(move |a| (k, a)))
            .map(|(k, a)| ChowClass::basis_element(p, k, a))
            .collect()
    };
    let outer_basis = basis(outer);
    let inner_basis = basis(inner);
    let divisor = push.apply(&inner.unit());
    for x in &outer_basis {
        let Ok(rx) = pull.apply(x) else { continue };
        for y in &inner_basis {
            let lhs = mul(&rx, y).and_then(|p| push.apply(&p));
            let rhs = push.apply(y).and_then(|p| mul(x, &p));
            if lhs != rhs {
                out.push(violation(
                    "projection_formula",
                    format!("push(pull({x}) * {y}) != {x} * push({y})"),
                ));
            }
        }
        for z in &outer_basis {
            let Ok(rz) = pull.apply(z) else { continue };
            let lhs = mul(&rx, &rz).and_then(|p| push.apply(&p));
            let rhs = divisor.clone().and_then(|d| mul(x, z).and_then(|xz| mul(&d, &xz)));
            if lhs != rhs {
                out.push(violation(
                    "divisor_multiplicativity",
                    format!("push(pull({x}) * pull({z})) != [D] * {x} * {z}"),
                ));
            }
        }
    }
    out
}

pub(crate) fn zero_map(
    kind: MapKind,
    source: &Arc<ChowPresentation>,
    target: &Arc<ChowPresentation>,
    shift: isize,
) -> GradedMap {
    GradedMap::from_fn(kind, source, target, shift, |k, _| {
        let tk = k as isize + shift;
        let width = if tk < 0 { 0 } else { target.rank(tk as usize) };
        vec![BigInt::from(0); width]
    })
    .expect("zero map is well formed")
}

pub(crate) fn additive_identity(p: &Arc<ChowPresentation>) -> GradedMap {
    let id = GradedMap::identity(p);
    GradedMap::new(MapKind::Additive, p, p, 0, id.images().to_vec()).expect("identity is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{chain_p1, cycle_p1, triple_plane};

    fn key(v: &[usize]) -> StratumKey {
        StratumKey::new(v.to_vec()).unwrap()
    }

    #[test]
    fn position_examples() {
        assert_eq!(position(&[1, 4], 3), Ok(2));
        assert_eq!(position(&[], 5), Ok(1));
        assert_eq!(position(&[2, 5], 7), Ok(3));
        assert_eq!(position(&[2, 5], 5), Err(StrataError::AlreadyPresent(5)));
    }

    #[test]
    fn keys_are_canonical() {
        assert!(StratumKey::new(vec![]).is_err());
        assert!(StratumKey::new(vec![2, 1]).is_err());
        assert!(StratumKey::new(vec![0, 1]).is_err());
        assert_eq!(StratumKey::from_unsorted(vec![3, 1]).unwrap(), key(&[1, 3]));
        assert_eq!(key(&[1, 3]).with(2), key(&[1, 2, 3]));
        assert_eq!(key(&[1]).without(1), None);
        assert_eq!(key(&[1, 2]).permuted(&[3, 1, 2]), key(&[1, 3]));
    }

    #[test]
    fn generators_validate() {
        for s in [chain_p1(2), chain_p1(5), cycle_p1(3), cycle_p1(5), triple_plane()] {
            assert_eq!(s.validate(), vec![]);
        }
    }

    #[test]
    fn downward_closure_violation() {
        let mut s = chain_p1(2);
        s.remove_stratum(&key(&[2]));
        let v = s.validate();
        assert!(v.iter().any(|v| v.check == "downward_closure"), "{v:?}");
    }

    #[test]
    fn dropped_unit_violates_multiplicativity() {
        let mut s = chain_p1(2);
        let edge = s.edge_mut(&key(&[1]), &key(&[1, 2])).unwrap();
        let f = edge.pullback.as_ref().unwrap();
        let mut images = f.images().to_vec();
        images[0][0] = vec![BigInt::from(0)];
        edge.pullback = Some(GradedMap::new(MapKind::Ring, f.source(), f.target(), 0, images).unwrap());
        let v = s.validate();
        assert!(v.iter().any(|v| v.check == "multiplicativity"), "{v:?}");
    }

    #[test]
    fn missing_pushforward_is_reported() {
        let mut s = chain_p1(2);
        s.edge_mut(&key(&[1]), &key(&[1, 2])).unwrap().pushforward = None;
        assert!(s.validate().iter().any(|v| v.check == "missing_edge"));
    }

    #[test]
    fn stratum_products() {
        let s = chain_p1(2);
        assert_eq!(
            s.stratum_product(&key(&[1]), &key(&[2])).unwrap().ranks(),
            vec![1, 2, 1]
        );
        assert_eq!(s.stratum_product(&key(&[1, 2]), &key(&[1, 2])).unwrap().dim(), 0);
        assert_eq!(s.stratum_product(&key(&[1]), &key(&[1, 2])).unwrap().dim(), 1);
        assert!(s.stratum_product(&key(&[1, 3]), &key(&[1])).is_err());
    }

    #[test]
    fn gysin_first_restricts_the_diagonal() {
        let s = chain_p1(2);
        let g = s.gysin_first(&key(&[1, 2]), 2, &key(&[1])).unwrap();
        let diag = crate::chow::diagonal_class(s.presentation(&key(&[1])).unwrap()).unwrap();
        let image = g.apply(&diag).unwrap();
        assert_eq!(image, ChowClass::symbol(g.target(), "1⊗h").unwrap());
        let src = g.source().clone();
        assert!(g.apply(&ChowClass::zero(&src, 1)).unwrap().is_zero());
        assert_eq!(g.apply(&src.unit()).unwrap(), g.target().unit());
    }

    #[test]
    fn push_second_examples() {
        let s = chain_p1(2);
        let p = s.push_second(&key(&[1, 2]), &key(&[1]), 2).unwrap();
        let one = p.source().unit();
        let image = p.apply(&one).unwrap();
        assert_eq!(image, ChowClass::symbol(p.target(), "1⊗h").unwrap());
        assert_eq!(
            p.apply(&one.scale(&BigInt::from(2))).unwrap(),
            image.scale(&BigInt::from(2))
        );
        assert!(p.apply(&ChowClass::zero(p.source(), 0)).unwrap().is_zero());
    }

    #[test]
    fn enumerate_examples() {
        let s = chain_p1(2);
        let l1: Vec<_> = s.enumerate_level(1);
        assert_eq!(
            l1,
            vec![
                (key(&[1]), key(&[1])),
                (key(&[1]), key(&[2])),
                (key(&[2]), key(&[1])),
                (key(&[2]), key(&[2]))
            ]
        );
        assert_eq!(s.enumerate_level(2), vec![(key(&[1, 2]), key(&[1, 2]))]);
        assert_eq!(cycle_p1(3).enumerate_level(2).len(), 9);
    }

    #[test]
    fn diagnostics_separate_the_shipped_structures() {
        for s in [chain_p1(3), cycle_p1(3), cycle_p1(4)] {
            assert!(s.balance_violations().is_empty());
            assert!(s.base_change_violations().is_empty());
        }
        assert!(!triple_plane().balance_violations().is_empty());
    }

    #[test]
    fn automorphisms() {
        let s = cycle_p1(4);
        assert!(s.automorphism_violations(&[2, 3, 4, 1], None).is_empty());
        assert!(!s.automorphism_violations(&[2, 1, 3, 4], None).is_empty());
        assert!(s.automorphism_violations(&[1, 4, 3, 2], None).is_empty());
        let c = chain_p1(3);
        assert!(c.automorphism_violations(&[3, 2, 1], None).is_empty());
        assert!(!c.automorphism_violations(&[2, 3, 1], None).is_empty());
        // a map of the strata through component 1 need not extend globally
        assert!(c.automorphism_violations(&[2, 3, 1], Some(1)).is_empty());
    }

    #[test]
    fn relabeling_round_trips() {
        let s = cycle_p1(4);
        let back = s.relabel(&[3, 1, 4, 2]).relabel(&[2, 4, 1, 3]);
        assert_eq!(back, s);
        assert!(s.relabel(&[3, 1, 4, 2]).validate().is_empty());
    }
}
