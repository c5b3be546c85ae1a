//! Correspondence families: the level-by-level recursion, composition, and
//! the action on stratum classes.
//!
//! Two solvers share one contract. The class route solves the recursion
//! directly on Chow classes of `Y_I × Y_J`. Its systems are underdetermined
//! as soon as the dual graph has a cycle, because classes forget which
//! component of the support a piece of `Γ_{I,J}` lives on. The cycle route
//! keeps that information: level-1 input is a list of graph components
//! `(i, j, σ, mult)`, every component at level `m` is identified by the map it
//! induces on the strata through its root, and the recursion is solved
//! component by component. Its output is checked against the class
//! equations, so both routes enforce the same identity.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::chow::{
    diagonal_on, integrate_middle, mul, proj_pushforward, reassociate_left, tensor, tensor_classes, tensor_map,
    ChowClass, ChowError, GradedMap,
};
use crate::linalg::{solve_unique, IntMatrix, Solve};
use crate::strata::{additive_identity, position, IncidenceStructure, StrataError, StratumKey};

pub type Pair = (StratumKey, StratumKey);
pub type Level = BTreeMap<Pair, ChowClass>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("inconsistent data at level {m}, I = {key}: {detail}")]
    Inconsistent { m: usize, key: StratumKey, detail: String },
    #[error("non-unique decomposition at level {m}, I = {key}")]
    NonUnique { m: usize, key: StratumKey },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("family has no level {0}")]
    MissingLevel(usize),
    #[error("{which} family: {source}")]
    InFamily {
        which: &'static str,
        #[source]
        source: Box<EngineError>,
    },
    #[error(transparent)]
    Strata(#[from] StrataError),
    #[error(transparent)]
    Chow(#[from] ChowError),
}

impl EngineError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            EngineError::Inconsistent { .. } => 3,
            EngineError::NonUnique { .. } => 4,
            EngineError::InFamily { source, .. } => source.exit_code(),
            _ => 2,
        }
    }

    fn in_family(self, which: &'static str) -> EngineError {
        EngineError::InFamily {
            which,
            source: Box::new(self),
        }
    }
}

/// One component of a level-1 cycle: `mult` times the graph of the
/// automorphism `perm` restricted to `Y_i`, landing in `Y_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleComponent {
    pub i: usize,
    pub j: usize,
    pub perm: Vec<usize>,
    pub mult: BigInt,
}

/// Level-1 classes `Γ_{i,j}`, optionally with the cycles they come from.
/// Missing pairs are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelOneInput {
    pub classes: BTreeMap<(usize, usize), ChowClass>,
    pub cycles: Option<Vec<CycleComponent>>,
}

impl LevelOneInput {
    /// All-zero input, carrying an empty cycle list.
    pub fn zero(s: &IncidenceStructure) -> Result<Self, EngineError> {
        let mut classes = BTreeMap::new();
        for (i, j) in s.enumerate_level(1) {
            let p = s.stratum_product(&i, &j)?;
            classes.insert((i.elems()[0], j.elems()[0]), ChowClass::zero(&p, s.n() - 1));
        }
        Ok(LevelOneInput {
            classes,
            cycles: Some(Vec::new()),
        })
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        LevelOneInput {
            classes: self.classes.iter().map(|(k, v)| (*k, v.scale(c))).collect(),
            cycles: self.cycles.as_ref().map(|cs| {
                cs.iter()
                    .map(|x| CycleComponent {
                        mult: &x.mult * c,
                        ..x.clone()
                    })
                    .collect()
            }),
        }
    }

    /// Sum; cycles survive only when both sides have them.
    pub fn add(&self, other: &Self) -> Result<Self, EngineError> {
        let mut classes = self.classes.clone();
        for (k, v) in &other.classes {
            let sum = match classes.get(k) {
                Some(x) => x.add(v)?,
                None => v.clone(),
            };
            classes.insert(*k, sum);
        }
        let cycles = match (&self.cycles, &other.cycles) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        Ok(LevelOneInput { classes, cycles })
    }

    /// The same classes with the cycle data dropped.
    pub fn without_cycles(&self) -> Self {
        LevelOneInput {
            classes: self.classes.clone(),
            cycles: None,
        }
    }
}

/// `Γ_{I,J}` for every level; every present pair is stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorrespondenceFamily {
    pub levels: BTreeMap<usize, Level>,
    pub cycles: Option<Vec<CycleComponent>>,
}

impl CorrespondenceFamily {
    pub fn level(&self, m: usize) -> Result<&Level, EngineError> {
        self.levels.get(&m).ok_or(EngineError::MissingLevel(m))
    }

    pub fn get(&self, m: usize, i: &StratumKey, j: &StratumKey) -> Option<&ChowClass> {
        self.levels.get(&m).and_then(|l| l.get(&(i.clone(), j.clone())))
    }

    pub fn level_one(&self) -> LevelOneInput {
        let classes = self
            .levels
            .get(&1)
            .map(|l| {
                l.iter()
                    .map(|((i, j), c)| ((i.elems()[0], j.elems()[0]), c.clone()))
                    .collect()
            })
            .unwrap_or_default();
        LevelOneInput {
            classes,
            cycles: self.cycles.clone(),
        }
    }

    pub fn max_level(&self) -> usize {
        self.levels.keys().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Stop the recursion after this level.
    pub max_level: Option<usize>,
    /// Worker threads; `Some(0)` runs serially, `None` uses the global pool.
    pub threads: Option<usize>,
}

/// The graph of the identification `Y_I ≅ Y_J` (equal presentations, bases
/// matched), i.e. the diagonal transported to `Y_I × Y_J`.
pub fn graph_class(s: &IncidenceStructure, i: &StratumKey, j: &StratumKey) -> Result<ChowClass, EngineError> {
    let (pi, pj) = (s.presentation(i)?, s.presentation(j)?);
    if **pi != **pj {
        return Err(EngineError::InvalidInput(format!(
            "{i} and {j} have different presentations"
        )));
    }
    Ok(diagonal_on(pi, &tensor(pi, pj))?)
}

fn sign(e: usize) -> BigInt {
    if e.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

fn check_level_one(s: &IncidenceStructure, g1: &LevelOneInput) -> Result<(), EngineError> {
    for (&(i, j), class) in &g1.classes {
        let (ki, kj) = (StratumKey::singleton(i), StratumKey::singleton(j));
        let p = s
            .stratum_product(&ki, &kj)
            .map_err(|_| EngineError::InvalidInput(format!("level-1 class on absent Y_{i} x Y_{j}")))?;
        if **class.presentation() != *p || class.codim() + 1 != s.n() {
            return Err(EngineError::InvalidInput(format!(
                "Γ_{{{i},{j}}} must be a codimension-{} class on Y_{i} x Y_{j}",
                s.n() - 1
            )));
        }
    }
    for c in g1.cycles.iter().flatten() {
        if c.perm.len() != s.t() || c.i == 0 || c.i > s.t() || c.perm[c.i - 1] != c.j {
            return Err(EngineError::InvalidInput(format!(
                "cycle component ({}, {}) does not match its permutation {:?}",
                c.i, c.j, c.perm
            )));
        }
        if let Some(v) = s.automorphism_violations(&c.perm, Some(c.i)).into_iter().next() {
            return Err(EngineError::InvalidInput(format!(
                "cycle component ({}, {}): {v}",
                c.i, c.j
            )));
        }
    }
    Ok(())
}

/// Runs `f` over `keys`, in parallel unless told otherwise; output order
/// follows `keys`.
fn map_keys<K: Sync, T: Send>(keys: &[K], opts: &SolveOptions, f: impl Fn(&K) -> T + Sync + Send) -> Vec<T> {
    match opts.threads {
        Some(0) => keys.iter().map(f).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| keys.par_iter().map(&f).collect()),
            Err(_) => keys.iter().map(f).collect(),
        },
        None => keys.par_iter().map(f).collect(),
    }
}

/// A component at level `m`: the stratum map it induces on the present
/// strata containing its root.
type StratumMap = BTreeMap<StratumKey, StratumKey>;
type Components = BTreeMap<StratumKey, BTreeMap<StratumMap, BigInt>>;

fn restrict(map: &StratumMap, root: &StratumKey) -> StratumMap {
    map.iter()
        .filter(|(k, _)| root.is_subset(k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

fn level_one_components(s: &IncidenceStructure, cycles: &[CycleComponent]) -> Components {
    let mut out: Components = BTreeMap::new();
    for c in cycles {
        let root = StratumKey::singleton(c.i);
        let map: StratumMap = s
            .strata()
            .keys()
            .filter(|k| k.contains(c.i))
            .map(|k| (k.clone(), k.permuted(&c.perm)))
            .collect();
        *out.entry(root).or_default().entry(map).or_insert_with(BigInt::zero) += &c.mult;
    }
    for comps in out.values_mut() {
        comps.retain(|_, m| !m.is_zero());
    }
    out
}

/// Level-1 classes of the cycle data.
pub fn cycle_classes(s: &IncidenceStructure, cycles: &[CycleComponent]) -> Result<Level, EngineError> {
    let mut level = Level::new();
    for (i, j) in s.enumerate_level(1) {
        let p = s.stratum_product(&i, &j)?;
        level.insert((i, j), ChowClass::zero(&p, s.n() - 1));
    }
    for (root, comps) in level_one_components(s, cycles) {
        for (map, mult) in comps {
            let target = map[&root].clone();
            let g = graph_class(s, &root, &target)?.scale(&mult);
            let slot = level.get_mut(&(root.clone(), target)).expect("present pair");
            *slot = slot.add(&g)?;
        }
    }
    Ok(level)
}

/// The joint class-level system for one `I`: unknown blocks are
/// `Γ_{I,J'}`, `|J'| = m`; equation blocks are the `J` with `|J| = m − 1`.
struct ClassSystem {
    a: IntMatrix,
    b: Vec<BigInt>,
    /// `(J', first column, presentation of Y_I × Y_J')`
    blocks: Vec<(StratumKey, usize, std::sync::Arc<crate::chow::ChowPresentation>)>,
}

fn class_system(
    s: &IncidenceStructure,
    prev: &Level,
    i_key: &StratumKey,
    m: usize,
) -> Result<ClassSystem, EngineError> {
    let n = s.n();
    let codim = n - m;
    let mut blocks = Vec::new();
    let mut cols = 0;
    for jp in s.strata_of_size(m) {
        let p = s.stratum_product(i_key, jp)?;
        blocks.push((jp.clone(), cols, p.clone()));
        cols += p.rank(codim);
    }
    let col_of: BTreeMap<&StratumKey, usize> = blocks.iter().map(|(k, c, _)| (k, *c)).collect();
    let eq_keys = s.strata_of_size(m - 1);
    let mut row_offsets = Vec::new();
    let mut rows = 0;
    for j in &eq_keys {
        let p = s.stratum_product(i_key, j)?;
        row_offsets.push(rows);
        rows += p.rank(codim + 1);
    }
    let mut a = IntMatrix::zeros(rows, cols);
    let mut b = vec![BigInt::zero(); rows];
    for (j, &r0) in eq_keys.iter().zip(&row_offsets) {
        for jj in 1..=s.t() {
            if j.contains(jj) {
                continue;
            }
            let target = j.with(jj);
            let Some(&c0) = col_of.get(&target) else { continue };
            let sg = sign(position(j.elems(), jj)?);
            let push = s.push_second(i_key, j, jj)?;
            for (col, image) in push.images()[codim].iter().enumerate() {
                for (row, v) in image.iter().enumerate() {
                    if !v.is_zero() {
                        a[(r0 + row, c0 + col)] += &sg * v;
                    }
                }
            }
        }
        for (h, &ih) in i_key.elems().iter().enumerate() {
            let sub = i_key.without(ih).expect("m >= 2");
            let Some(g) = prev.get(&(sub, (*j).clone())) else {
                continue;
            };
            let restricted = s.gysin_first(i_key, ih, j)?.apply(g)?;
            let sg = sign(h + 1);
            for (row, v) in restricted.coeffs().iter().enumerate() {
                if !v.is_zero() {
                    b[r0 + row] += &sg * v;
                }
            }
        }
    }
    Ok(ClassSystem { a, b, blocks })
}

fn split_solution(
    sys: &ClassSystem,
    i_key: &StratumKey,
    codim: usize,
    x: &[BigInt],
) -> Result<Vec<(Pair, ChowClass)>, EngineError> {
    sys.blocks
        .iter()
        .map(|(jp, c0, p)| {
            let coeffs = x[*c0..*c0 + p.rank(codim)].to_vec();
            Ok(((i_key.clone(), jp.clone()), ChowClass::new(p, codim, coeffs)?))
        })
        .collect()
}

fn solve_by_classes(
    s: &IncidenceStructure,
    prev: &Level,
    i_key: &StratumKey,
    m: usize,
) -> Result<Vec<(Pair, ChowClass)>, EngineError> {
    let sys = class_system(s, prev, i_key, m)?;
    match solve_unique(&sys.a, &sys.b) {
        Solve::Unique(x) => split_solution(&sys, i_key, s.n() - m, &x),
        Solve::NoSolution => Err(EngineError::Inconsistent {
            m,
            key: i_key.clone(),
            detail: "the recursion has no integral solution".into(),
        }),
        Solve::NonUnique => Err(EngineError::NonUnique { m, key: i_key.clone() }),
    }
}

type CycleStep = (Vec<(Pair, ChowClass)>, BTreeMap<StratumMap, BigInt>);

fn solve_by_cycles(
    s: &IncidenceStructure,
    prev: &Level,
    prev_comps: &Components,
    i_key: &StratumKey,
    m: usize,
) -> Result<CycleStep, EngineError> {
    // (restricted component, J) -> Σ_h (-1)^h mult
    let mut rhs: BTreeMap<(StratumMap, StratumKey), BigInt> = BTreeMap::new();
    for (h, &ih) in i_key.elems().iter().enumerate() {
        let sub = i_key.without(ih).expect("m >= 2");
        for (map, mult) in prev_comps.get(&sub).into_iter().flatten() {
            let j = map[&sub].clone();
            let c = restrict(map, i_key);
            *rhs.entry((c, j)).or_insert_with(BigInt::zero) += sign(h + 1) * mult;
        }
    }
    let candidates: Vec<StratumMap> = {
        let mut v: Vec<StratumMap> = rhs.keys().map(|(c, _)| c.clone()).collect();
        v.dedup();
        v
    };
    let mut rows: Vec<(usize, BigInt, BigInt)> = Vec::new();
    for (col, c) in candidates.iter().enumerate() {
        let target = &c[i_key];
        for &j in target.elems() {
            let rest = target.without(j).expect("m >= 2");
            let coeff = sign(position(rest.elems(), j)?);
            let value = rhs.get(&(c.clone(), rest)).cloned().unwrap_or_default();
            rows.push((col, coeff, value));
        }
    }
    let mut a = IntMatrix::zeros(rows.len(), candidates.len());
    let mut b = Vec::with_capacity(rows.len());
    for (r, (col, coeff, value)) in rows.into_iter().enumerate() {
        a[(r, col)] = coeff;
        b.push(value);
    }
    let x = match solve_unique(&a, &b) {
        Solve::Unique(x) => x,
        Solve::NoSolution => {
            return Err(EngineError::Inconsistent {
                m,
                key: i_key.clone(),
                detail: "the component equations disagree".into(),
            })
        }
        Solve::NonUnique => return Err(EngineError::NonUnique { m, key: i_key.clone() }),
    };
    let comps: BTreeMap<StratumMap, BigInt> = candidates.into_iter().zip(x).filter(|(_, v)| !v.is_zero()).collect();

    let sys = class_system(s, prev, i_key, m)?;
    let codim = s.n() - m;
    let mut xs = vec![BigInt::zero(); sys.a.cols()];
    for (map, mult) in &comps {
        let target = &map[i_key];
        let g = graph_class(s, i_key, target)?;
        let (_, c0, _) = sys.blocks.iter().find(|(k, _, _)| k == target).expect("present target");
        for (d, v) in g.coeffs().iter().enumerate() {
            xs[c0 + d] += mult * v;
        }
    }
    if sys.a.mul_vec(&xs) != sys.b {
        return Err(EngineError::Inconsistent {
            m,
            key: i_key.clone(),
            detail: "the component solution violates the class equations".into(),
        });
    }
    Ok((split_solution(&sys, i_key, codim, &xs)?, comps))
}

/// Solves the recursion level by level from the level-1 data.
pub fn compute_all_levels(s: &IncidenceStructure, g1: &LevelOneInput) -> Result<CorrespondenceFamily, EngineError> {
    compute_all_levels_with(s, g1, &SolveOptions::default())
}

pub fn compute_all_levels_with(
    s: &IncidenceStructure,
    g1: &LevelOneInput,
    opts: &SolveOptions,
) -> Result<CorrespondenceFamily, EngineError> {
    check_level_one(s, g1)?;
    let mut level1 = Level::new();
    for (i, j) in s.enumerate_level(1) {
        let key = (i.elems()[0], j.elems()[0]);
        let class = match g1.classes.get(&key) {
            Some(c) => c.clone(),
            None => ChowClass::zero(&s.stratum_product(&i, &j)?, s.n() - 1),
        };
        level1.insert((i, j), class);
    }
    let mut comps = match &g1.cycles {
        Some(cycles) => {
            let from_cycles = cycle_classes(s, cycles)?;
            if let Some(((i, j), _)) = level1.iter().find(|(k, v)| from_cycles.get(*k) != Some(*v)) {
                return Err(EngineError::Inconsistent {
                    m: 1,
                    key: i.clone(),
                    detail: format!("level-1 class on {i} x {j} does not match the cycle data"),
                });
            }
            Some(level_one_components(s, cycles))
        }
        None => None,
    };
    let mut family = CorrespondenceFamily {
        levels: BTreeMap::from([(1, level1)]),
        cycles: g1.cycles.clone(),
    };
    let top = opts.max_level.map_or(s.max_level(), |l| l.min(s.max_level()));
    for m in 2..=top {
        let prev = &family.levels[&(m - 1)];
        let keys: Vec<StratumKey> = s.strata_of_size(m).into_iter().cloned().collect();
        let mut level = Level::new();
        match &comps {
            Some(prev_comps) => {
                let results = map_keys(&keys, opts, |i| solve_by_cycles(s, prev, prev_comps, i, m));
                let mut next = Components::new();
                for (i, r) in keys.iter().zip(results) {
                    let (classes, c) = r?;
                    level.extend(classes);
                    next.insert(i.clone(), c);
                }
                comps = Some(next);
            }
            None => {
                let results = map_keys(&keys, opts, |i| solve_by_classes(s, prev, i, m));
                for r in results {
                    level.extend(r?);
                }
            }
        }
        family.levels.insert(m, level);
    }
    Ok(family)
}

/// `p_{13*}((A ⊗ 1) · (1 ⊗ B))` on `Y_I × Y_J × Y_K`.
pub fn compose_pair(a: &ChowClass, b: &ChowClass) -> Result<ChowClass, EngineError> {
    let (pi, pj) = a.presentation().factors().ok_or(ChowError::NotTensor)?;
    let (pj2, pk) = b.presentation().factors().ok_or(ChowError::NotTensor)?;
    if **pj != **pj2 {
        return Err(ChowError::PresentationMismatch.into());
    }
    let triple = tensor(a.presentation(), pk);
    let left = tensor_classes(&triple, a, &pk.unit())?;
    let right = tensor(pi, b.presentation());
    let lifted = reassociate_left(&tensor_classes(&right, &pi.unit(), b)?, &triple)?;
    let product = mul(&left, &lifted)?;
    Ok(integrate_middle(&triple)?.apply(&product)?)
}

/// `(B ∘ A)_{I,K} = Σ_J p_{13*}((A_{I,J} ⊗ 1) · (1 ⊗ B_{J,K}))` over present
/// `|J| = m`.
pub fn compose_level(s: &IncidenceStructure, a: &Level, b: &Level, m: usize) -> Result<Level, EngineError> {
    let mut out = Level::new();
    let codim = s.n() - m;
    for (i, k) in s.enumerate_level(m) {
        let p = s.stratum_product(&i, &k)?;
        let mut total: Option<ChowClass> = None;
        for j in s.strata_of_size(m) {
            let (Some(x), Some(y)) = (a.get(&(i.clone(), j.clone())), b.get(&(j.clone(), k.clone()))) else {
                continue;
            };
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let c = compose_pair(x, y)?.rebase(&p)?;
            total = Some(match total {
                Some(t) => t.add(&c)?,
                None => c,
            });
        }
        out.insert((i, k), total.unwrap_or_else(|| ChowClass::zero(&p, codim)));
    }
    Ok(out)
}

/// Level-1 data of `B ∘ A`; cycles compose as permutations when both sides
/// carry them.
pub fn compose_level_one(
    s: &IncidenceStructure,
    a: &LevelOneInput,
    b: &LevelOneInput,
) -> Result<LevelOneInput, EngineError> {
    let lift = |g: &LevelOneInput| -> Result<Level, EngineError> {
        let mut l = Level::new();
        for (i, j) in s.enumerate_level(1) {
            let key = (i.elems()[0], j.elems()[0]);
            let c = match g.classes.get(&key) {
                Some(c) => c.clone(),
                None => ChowClass::zero(&s.stratum_product(&i, &j)?, s.n() - 1),
            };
            l.insert((i, j), c);
        }
        Ok(l)
    };
    let composed = compose_level(s, &lift(a)?, &lift(b)?, 1)?;
    let classes = composed
        .into_iter()
        .map(|((i, j), c)| ((i.elems()[0], j.elems()[0]), c))
        .collect();
    let cycles = match (&a.cycles, &b.cycles) {
        (Some(ca), Some(cb)) => {
            let mut out = Vec::new();
            for x in ca {
                for y in cb.iter().filter(|y| y.i == x.j) {
                    out.push(CycleComponent {
                        i: x.i,
                        j: y.j,
                        perm: x.perm.iter().map(|&v| y.perm[v - 1]).collect(),
                        mult: &x.mult * &y.mult,
                    });
                }
            }
            Some(out)
        }
        _ => None,
    };
    Ok(LevelOneInput { classes, cycles })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub m: usize,
    pub i: StratumKey,
    pub k: StratumKey,
    pub expected: ChowClass,
    pub found: ChowClass,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionReport {
    /// `(m, pairs compared)`
    pub levels: Vec<(usize, usize)>,
    pub mismatches: Vec<Mismatch>,
}

impl CompositionReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares the family generated by `b1 ∘ a1` with the level-wise
/// composition of the families generated by `a1` and `b1`.
pub fn check_composition(
    s: &IncidenceStructure,
    a1: &LevelOneInput,
    b1: &LevelOneInput,
    opts: &SolveOptions,
) -> Result<CompositionReport, EngineError> {
    let fa = compute_all_levels_with(s, a1, opts).map_err(|e| e.in_family("first"))?;
    let fb = compute_all_levels_with(s, b1, opts).map_err(|e| e.in_family("second"))?;
    let c1 = compose_level_one(s, a1, b1)?;
    let fc = compute_all_levels_with(s, &c1, opts).map_err(|e| e.in_family("composite"))?;
    let mut report = CompositionReport {
        levels: Vec::new(),
        mismatches: Vec::new(),
    };
    for (&m, expected) in &fc.levels {
        let composed = compose_level(s, fa.level(m)?, fb.level(m)?, m)?;
        report.levels.push((m, expected.len()));
        for ((i, k), e) in expected {
            let found = &composed[&(i.clone(), k.clone())];
            if found != e {
                report.mismatches.push(Mismatch {
                    m,
                    i: i.clone(),
                    k: k.clone(),
                    expected: e.clone(),
                    found: found.clone(),
                });
            }
        }
    }
    Ok(report)
}

/// `Γ^*` on a class `x` of `Y_J`: `pr_{1*}(Γ_{I,J} · (1 ⊗ x))` for each
/// present `|I| = m`.
pub fn act(
    s: &IncidenceStructure,
    f: &CorrespondenceFamily,
    m: usize,
    j: &StratumKey,
    x: &ChowClass,
) -> Result<BTreeMap<StratumKey, ChowClass>, EngineError> {
    let pj = s.presentation(j)?;
    if **x.presentation() != **pj {
        return Err(ChowError::PresentationMismatch.into());
    }
    let level = f.level(m)?;
    let mut out = BTreeMap::new();
    for i in s.strata_of_size(m) {
        let pi = s.presentation(i)?;
        let image = match level.get(&(i.clone(), j.clone())) {
            Some(g) if !g.is_zero() && !x.is_zero() => {
                let p = g.presentation();
                let lifted = tensor_classes(p, &pi.unit(), &x.rebase(pj)?)?;
                proj_pushforward(p, true)?.apply(&mul(g, &lifted)?)?.rebase(pi)?
            }
            _ => ChowClass::zero(pi, x.codim()),
        };
        out.insert(i.clone(), image);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransposeReport {
    pub checked: usize,
    /// `(m, I, J)` with `|I| = m − 1`, `|J| = m` where the identity fails.
    pub failures: Vec<(usize, StratumKey, StratumKey)>,
}

impl TransposeReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The mirrored recursion, with the roles of `I` and `J` swapped:
/// `Σ_h (−1)^h (1 ⊗ ι*) Γ_{I, J∖j_h} = Σ_{i∉I} (−1)^{h(i)} (ι_* ⊗ 1) Γ_{I∪i, J}`.
pub fn transpose_check(s: &IncidenceStructure, f: &CorrespondenceFamily) -> Result<TransposeReport, EngineError> {
    let mut report = TransposeReport {
        checked: 0,
        failures: Vec::new(),
    };
    for m in 2..=f.max_level() {
        let (prev, cur) = (f.level(m - 1)?, f.level(m)?);
        for i in s.strata_of_size(m - 1) {
            for j in s.strata_of_size(m) {
                let p = s.stratum_product(i, j)?;
                let codim = s.n() - m + 1;
                let mut lhs = ChowClass::zero(&p, codim);
                for (h, &jh) in j.elems().iter().enumerate() {
                    let sub = j.without(jh).expect("m >= 2");
                    let Some(g) = prev.get(&(i.clone(), sub.clone())) else {
                        continue;
                    };
                    let Some(pull) = s.pullback(&sub, j) else { continue };
                    let map = tensor_map(&GradedMap::identity(s.presentation(i)?), pull)?;
                    lhs = lhs.add(&map.apply(g)?.rebase(&p)?.scale(&sign(h + 1)))?;
                }
                let mut rhs = ChowClass::zero(&p, codim);
                for c in 1..=s.t() {
                    if i.contains(c) {
                        continue;
                    }
                    let sup = i.with(c);
                    let Some(g) = cur.get(&(sup.clone(), j.clone())) else {
                        continue;
                    };
                    let Some(push) = s.pushforward(i, &sup) else { continue };
                    let map = tensor_map(push, &additive_identity(s.presentation(j)?))?;
                    let sg = sign(position(i.elems(), c)?);
                    rhs = rhs.add(&map.apply(g)?.rebase(&p)?.scale(&sg))?;
                }
                report.checked += 1;
                if lhs != rhs {
                    report.failures.push((m, i.clone(), j.clone()));
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chow::{diagonal_class, ChowPresentation};
    use crate::generators::*;

    fn key(v: &[usize]) -> StratumKey {
        StratumKey::new(v.to_vec()).unwrap()
    }

    fn serial() -> SolveOptions {
        SolveOptions {
            threads: Some(0),
            ..Default::default()
        }
    }

    #[test]
    fn chain2_identity_level_two_is_the_point() {
        let s = chain_p1(2);
        let id = identity_family(&s).unwrap();
        for g in [id.clone(), id.without_cycles()] {
            let f = compute_all_levels(&s, &g).unwrap();
            let c = f.get(2, &key(&[1, 2]), &key(&[1, 2])).unwrap();
            assert_eq!(c.coeffs(), &[BigInt::from(1)]);
        }
    }

    #[test]
    fn zero_and_doubled_inputs() {
        let s = chain_p1(2);
        let zero = LevelOneInput::zero(&s).unwrap();
        let f = compute_all_levels(&s, &zero).unwrap();
        assert!(f.levels.values().flat_map(|l| l.values()).all(ChowClass::is_zero));
        let two = identity_family(&s).unwrap().scale(&BigInt::from(2));
        let f2 = compute_all_levels(&s, &two.without_cycles()).unwrap();
        assert_eq!(
            f2.get(2, &key(&[1, 2]), &key(&[1, 2])).unwrap().coeffs(),
            &[BigInt::from(2)]
        );
    }

    #[test]
    fn sign_flip_is_inconsistent() {
        let s = chain_p1(2);
        let mut g = identity_family(&s).unwrap().without_cycles();
        let c = g.classes.get_mut(&(1, 1)).unwrap();
        *c = c.neg();
        let err = compute_all_levels(&s, &g).unwrap_err();
        assert!(matches!(err, EngineError::Inconsistent { m: 2, .. }), "{err}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn class_route_is_underdetermined_on_a_cycle() {
        let s = cycle_p1(3);
        let g = identity_family(&s).unwrap().without_cycles();
        let err = compute_all_levels(&s, &g).unwrap_err();
        assert_eq!(
            err,
            EngineError::NonUnique {
                m: 2,
                key: key(&[1, 2])
            }
        );
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn rotations_and_reflections_share_level_one_classes_on_cycle3() {
        // the sum of the rotations and the sum of the reflections have equal
        // level-1 classes but different level-2 cycles
        let s = cycle_p1(3);
        let fam = |p: Vec<usize>| graph_family(&s, &p).unwrap();
        let rots = combination(
            &s,
            &[
                (1, &fam(vec![1, 2, 3])),
                (1, &fam(vec![2, 3, 1])),
                (1, &fam(vec![3, 1, 2])),
            ],
        )
        .unwrap();
        let refl = combination(
            &s,
            &[
                (1, &fam(vec![1, 3, 2])),
                (1, &fam(vec![3, 2, 1])),
                (1, &fam(vec![2, 1, 3])),
            ],
        )
        .unwrap();
        assert_eq!(rots.classes, refl.classes);
        let fr = compute_all_levels(&s, &rots).unwrap();
        let ff = compute_all_levels(&s, &refl).unwrap();
        assert_ne!(fr.levels[&2], ff.levels[&2]);
    }

    #[test]
    fn identity_propagates_diagonals() {
        for s in [chain_p1(3), cycle_p1(4), triple_plane()] {
            let f = compute_all_levels_with(&s, &identity_family(&s).unwrap(), &serial()).unwrap();
            for (m, level) in &f.levels {
                assert_eq!(level.len(), s.enumerate_level(*m).len());
                for ((i, j), c) in level {
                    if i == j {
                        let d = diagonal_class(s.presentation(i).unwrap()).unwrap();
                        assert_eq!(*c, d.rebase(c.presentation()).unwrap(), "{i}");
                    } else {
                        assert!(c.is_zero(), "{i} {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn routes_agree_on_trees() {
        for t in 2..=4 {
            let s = chain_p1(t);
            let rev = graph_family(&s, &reversal_perm(t)).unwrap();
            let id = identity_family(&s).unwrap();
            let g = combination(&s, &[(2, &id), (-1, &rev)]).unwrap();
            let by_cycles = compute_all_levels(&s, &g).unwrap();
            let by_classes = compute_all_levels(&s, &g.without_cycles()).unwrap();
            assert_eq!(by_cycles.levels, by_classes.levels);
        }
    }

    #[test]
    fn reversal_on_chain2_has_sign() {
        let s = chain_p1(2);
        let f = compute_all_levels(&s, &graph_family(&s, &[2, 1]).unwrap()).unwrap();
        assert_eq!(
            f.get(2, &key(&[1, 2]), &key(&[1, 2])).unwrap().coeffs(),
            &[BigInt::from(-1)]
        );
    }

    #[test]
    fn thread_settings_do_not_change_results() {
        let s = cycle_p1(5);
        let g = graph_family(&s, &rotation_perm(5, 2)).unwrap();
        let a = compute_all_levels_with(&s, &g, &serial()).unwrap();
        let b = compute_all_levels_with(
            &s,
            &g,
            &SolveOptions {
                threads: Some(3),
                max_level: None,
            },
        )
        .unwrap();
        assert_eq!(a, b);
        let capped = compute_all_levels_with(
            &s,
            &g,
            &SolveOptions {
                threads: None,
                max_level: Some(1),
            },
        )
        .unwrap();
        assert_eq!(capped.max_level(), 1);
    }

    #[test]
    fn mismatched_cycles_are_rejected() {
        let s = chain_p1(2);
        let mut g = identity_family(&s).unwrap();
        g.cycles = Some(graph_family(&s, &[2, 1]).unwrap().cycles.unwrap());
        assert!(matches!(
            compute_all_levels(&s, &g),
            Err(EngineError::Inconsistent { m: 1, .. })
        ));
    }

    fn p1_level(c: ChowClass) -> Level {
        let k = key(&[1]);
        BTreeMap::from([((k.clone(), k), c)])
    }

    #[test]
    fn compose_examples() {
        let s = single_projective(1);
        let p1 = ChowPresentation::projective_space(1);
        let diag = diagonal_class(&p1).unwrap();
        let t = diag.presentation().clone();
        let k = key(&[1]);
        let out = compose_level(&s, &p1_level(diag.clone()), &p1_level(diag.clone()), 1).unwrap();
        assert_eq!(out[&(k.clone(), k.clone())], diag);
        let hh = ChowClass::symbol(&t, "h⊗h").unwrap();
        let out = compose_level(&s, &p1_level(hh.clone()), &p1_level(hh.clone()), 1).unwrap();
        assert!(out[&(k.clone(), k.clone())].is_zero());
        let zero = ChowClass::zero(&t, 1);
        let out = compose_level(&s, &p1_level(diag), &p1_level(zero), 1).unwrap();
        assert!(out[&(k.clone(), k)].is_zero());
    }

    #[test]
    fn act_examples() {
        let s = single_projective(1);
        let p1 = ChowPresentation::projective_space(1);
        let t = tensor(&p1, &p1);
        let k = key(&[1]);
        let hh = ChowClass::symbol(&t, "h⊗h").unwrap();
        let f = CorrespondenceFamily {
            levels: BTreeMap::from([(1, p1_level(hh))]),
            cycles: None,
        };
        let h = ChowClass::symbol(&p1, "h").unwrap();
        assert_eq!(act(&s, &f, 1, &k, &p1.unit()).unwrap()[&k], h);
        assert!(act(&s, &f, 1, &k, &h).unwrap()[&k].is_zero());
    }

    #[test]
    fn transpose_holds_for_generators() {
        let s = chain_p1(2);
        let f = compute_all_levels(&s, &identity_family(&s).unwrap()).unwrap();
        assert!(transpose_check(&s, &f).unwrap().passed());
        let c = cycle_p1(3);
        let f = compute_all_levels(&c, &graph_family(&c, &reversal_perm(3)).unwrap()).unwrap();
        assert!(transpose_check(&c, &f).unwrap().passed());
        let z = compute_all_levels(&c, &LevelOneInput::zero(&c).unwrap()).unwrap();
        assert!(transpose_check(&c, &z).unwrap().passed());
    }

    #[test]
    fn composition_examples() {
        let s = chain_p1(2);
        let id = identity_family(&s).unwrap();
        assert!(check_composition(&s, &id, &id, &serial()).unwrap().passed());
        let zero = LevelOneInput::zero(&s).unwrap();
        assert!(check_composition(&s, &zero, &id, &serial()).unwrap().passed());
        let c = cycle_p1(3);
        let rev = graph_family(&c, &reversal_perm(3)).unwrap();
        let report = check_composition(&c, &rev, &rev, &serial()).unwrap();
        assert!(report.passed());
        let both = compose_level_one(&c, &rev, &rev).unwrap();
        assert_eq!(both.classes, identity_family(&c).unwrap().classes);
    }
}
