//! Built-in incidence structures and their generator families.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::chow::{ChowPresentation, GradedMap, MapKind};
use crate::engine::{graph_class, CycleComponent, EngineError, LevelOneInput};
use crate::strata::{Edge, IncidenceStructure, StratumKey};

/// Restriction and Gysin data for a linear `P^{d-1} ⊂ P^d`.
fn hyperplane_edge(outer: &Arc<ChowPresentation>, inner: &Arc<ChowPresentation>) -> Edge {
    let d = outer.dim();
    let one = || vec![BigInt::from(1)];
    let pull = GradedMap::from_fn(
        MapKind::Ring,
        outer,
        inner,
        0,
        |k, _| if k < d { one() } else { vec![] },
    )
    .expect("hyperplane pullback");
    let push = GradedMap::from_fn(MapKind::Additive, inner, outer, 1, |_, _| one()).expect("hyperplane pushforward");
    Edge {
        pullback: Some(pull),
        pushforward: Some(push),
    }
}

fn key(v: &[usize]) -> StratumKey {
    StratumKey::from_unsorted(v.to_vec()).expect("generator keys are valid")
}

/// Fills in the hyperplane edges between all present strata, assuming every
/// stratum of size `m` is `P^{n-m}`.
fn with_projective_edges(mut s: IncidenceStructure) -> IncidenceStructure {
    let keys: Vec<StratumKey> = s.strata().keys().cloned().collect();
    for inner in &keys {
        for &i in inner.elems() {
            if let Some(outer) = inner.without(i) {
                if s.is_present(&outer) {
                    let edge = hyperplane_edge(
                        &s.presentation(&outer).unwrap().clone(),
                        &s.presentation(inner).unwrap().clone(),
                    );
                    s.set_edge(outer, inner.clone(), edge);
                }
            }
        }
    }
    s
}

/// `t` projective lines, consecutive ones meeting in a point.
pub fn chain_p1(t: usize) -> IncidenceStructure {
    let mut s = IncidenceStructure::new(t, 2);
    let (p1, pt) = (ChowPresentation::projective_space(1), ChowPresentation::point());
    for i in 1..=t {
        s.add_stratum(key(&[i]), p1.clone());
        if i < t {
            s.add_stratum(key(&[i, i + 1]), pt.clone());
        }
    }
    with_projective_edges(s)
}

/// `t ≥ 3` projective lines in a cycle.
pub fn cycle_p1(t: usize) -> IncidenceStructure {
    assert!(t >= 3, "a cycle needs at least three components");
    let mut s = IncidenceStructure::new(t, 2);
    let (p1, pt) = (ChowPresentation::projective_space(1), ChowPresentation::point());
    for i in 1..=t {
        s.add_stratum(key(&[i]), p1.clone());
        s.add_stratum(key(&[i, i % t + 1]), pt.clone());
    }
    with_projective_edges(s)
}

/// Three planes meeting pairwise in lines through a common point.
pub fn triple_plane() -> IncidenceStructure {
    let mut s = IncidenceStructure::new(3, 3);
    for i in 1..=3 {
        s.add_stratum(key(&[i]), ChowPresentation::projective_space(2));
    }
    for (a, b) in [(1, 2), (1, 3), (2, 3)] {
        s.add_stratum(key(&[a, b]), ChowPresentation::projective_space(1));
    }
    s.add_stratum(key(&[1, 2, 3]), ChowPresentation::point());
    with_projective_edges(s)
}

/// A single smooth `P^d` (no degeneration at all).
pub fn single_projective(d: usize) -> IncidenceStructure {
    let mut s = IncidenceStructure::new(1, d + 1);
    s.add_stratum(key(&[1]), ChowPresentation::projective_space(d));
    s
}

/// Looks up a built-in structure by CLI name.
pub fn structure_by_name(name: &str, t: Option<usize>) -> Option<IncidenceStructure> {
    match name {
        "chain_p1" => Some(chain_p1(t.unwrap_or(2).max(1))),
        "cycle_p1" => t.unwrap_or(3).ge(&3).then(|| cycle_p1(t.unwrap_or(3))),
        "triple_plane" => Some(triple_plane()),
        _ => None,
    }
}

/// File stem used for a built-in structure, e.g. `chain2`.
pub fn structure_stem(name: &str, t: usize) -> String {
    match name {
        "chain_p1" => format!("chain{t}"),
        "cycle_p1" => format!("cycle{t}"),
        other => other.to_string(),
    }
}

pub fn identity_perm(t: usize) -> Vec<usize> {
    (1..=t).collect()
}

/// `i ↦ i + 1 (mod t)`.
pub fn rotation_perm(t: usize, steps: usize) -> Vec<usize> {
    (0..t).map(|i| (i + steps) % t + 1).collect()
}

/// The reflection fixing 1: `i ↦ 2 − i (mod t)`.
pub fn reflection_perm(t: usize) -> Vec<usize> {
    (0..t).map(|i| (t - i) % t + 1).collect()
}

/// `i ↦ t + 1 − i`.
pub fn reversal_perm(t: usize) -> Vec<usize> {
    (1..=t).rev().collect()
}

/// The named automorphisms shipped with each built-in structure.
pub fn named_perms(name: &str, t: usize) -> Vec<(&'static str, Vec<usize>)> {
    match name {
        "chain_p1" => vec![("identity", identity_perm(t)), ("reversal", reversal_perm(t))],
        "cycle_p1" => vec![
            ("identity", identity_perm(t)),
            ("rotation", rotation_perm(t, 1)),
            ("rotation2", rotation_perm(t, 2)),
            ("reflection", reflection_perm(t)),
            ("reversal", reversal_perm(t)),
        ],
        _ => vec![("identity", identity_perm(t))],
    }
}

/// Level-1 data of the graph of a structure automorphism, as classes and
/// as cycles.
pub fn graph_family(s: &IncidenceStructure, perm: &[usize]) -> Result<LevelOneInput, EngineError> {
    let bad = s.automorphism_violations(perm, None);
    if let Some(v) = bad.into_iter().next() {
        return Err(EngineError::InvalidInput(format!("not an automorphism: {v}")));
    }
    let mut input = LevelOneInput::zero(s)?;
    let mut cycles = Vec::new();
    for key in s.strata_of_size(1) {
        let i = key.elems()[0];
        let j = perm[i - 1];
        let class = graph_class(s, key, &StratumKey::singleton(j))?;
        input.classes.insert((i, j), class);
        cycles.push(CycleComponent {
            i,
            j,
            perm: perm.to_vec(),
            mult: BigInt::from(1),
        });
    }
    input.cycles = Some(cycles);
    Ok(input)
}

pub fn identity_family(s: &IncidenceStructure) -> Result<LevelOneInput, EngineError> {
    graph_family(s, &identity_perm(s.t()))
}

/// `Σ c_g · g` over generator families.
pub fn combination(s: &IncidenceStructure, terms: &[(i64, &LevelOneInput)]) -> Result<LevelOneInput, EngineError> {
    let mut out = LevelOneInput::zero(s)?;
    for (c, g) in terms {
        out = out.add(&g.scale(&BigInt::from(*c)))?;
    }
    Ok(out)
}
