//! The E1 page of the weight spectral sequence, its differential, E2 ranks,
//! and the action of correspondence families.
//!
//! `E1^{i,j} = ⊕_s A^k(Y^{(m)})` with `m = i + 2s + 1`, `j = 2k + 2s`,
//! `s ≥ max(0, −i)`. On the `s`-summand, `d1 = ρ + θ` where
//! `ρ = Σ_{c∉I} (−1)^{pos(c, I∪c)−1} ι*` lands in summand `s` of `Y^{(m+1)}`
//! and `θ = Σ_{c∈I} (−1)^{pos(c, I)−1} ι_*` lands in summand `s − 1` of
//! `Y^{(m−1)}`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::chow::ChowClass;
use crate::engine::{act, CorrespondenceFamily, EngineError};
use crate::linalg::{rank, IntMatrix};
use crate::strata::{IncidenceStructure, StratumKey};

pub type Bidegree = (isize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Summand {
    pub m: usize,
    pub k: usize,
    pub s: usize,
}

impl Summand {
    pub fn bidegree(&self) -> Bidegree {
        (self.m as isize - 2 * self.s as isize - 1, 2 * self.k + 2 * self.s)
    }

    /// Tate twist tag `−s`.
    pub fn twist(&self) -> isize {
        -(self.s as isize)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub summand: Summand,
    pub offset: usize,
    /// `(I, first index, rank of A^k(Y_I))`
    pub strata: Vec<(StratumKey, usize, usize)>,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct E1Term {
    pub blocks: Vec<Block>,
    pub dim: usize,
}

impl E1Term {
    fn locate(&self, summand: &Summand, key: &StratumKey) -> Option<usize> {
        let b = self.blocks.iter().find(|b| b.summand == *summand)?;
        let (_, off, _) = b.strata.iter().find(|(k, _, _)| k == key)?;
        Some(b.offset + off)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct E1Page {
    pub n: usize,
    pub terms: BTreeMap<Bidegree, E1Term>,
    /// `d1: E1^{i,j} → E1^{i+1,j}`, keyed by the source.
    pub d1: BTreeMap<Bidegree, IntMatrix>,
}

fn sign(e: usize) -> BigInt {
    if e.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

pub fn build_e1(s: &IncidenceStructure) -> E1Page {
    let n = s.n();
    let mut terms: BTreeMap<Bidegree, E1Term> = BTreeMap::new();
    for m in 1..=s.max_level().min(n) {
        for sm in 0..m {
            for k in 0..=n - m {
                let summand = Summand { m, k, s: sm };
                let mut strata = Vec::new();
                let mut dim = 0;
                for key in s.strata_of_size(m) {
                    let r = s.presentation(key).map_or(0, |p| p.rank(k));
                    strata.push((key.clone(), dim, r));
                    dim += r;
                }
                if dim == 0 {
                    continue;
                }
                let term = terms.entry(summand.bidegree()).or_insert(E1Term {
                    blocks: Vec::new(),
                    dim: 0,
                });
                term.blocks.push(Block {
                    summand,
                    offset: term.dim,
                    strata,
                    dim,
                });
                term.dim += dim;
            }
        }
    }
    let mut d1 = BTreeMap::new();
    for (&(i, j), term) in &terms {
        let target = terms.get(&(i + 1, j));
        let rows = target.map_or(0, |t| t.dim);
        let mut d = IntMatrix::zeros(rows, term.dim);
        if let Some(target) = target {
            for block in &term.blocks {
                let Summand { m, k, s: sm } = block.summand;
                for (key, off, r) in &block.strata {
                    for a in 0..*r {
                        let col = block.offset + off + a;
                        for c in 1..=s.t() {
                            if key.contains(c) {
                                let Some(sub) = key.without(c) else { continue };
                                if sm == 0 {
                                    continue;
                                }
                                let Some(push) = s.pushforward(&sub, key) else { continue };
                                let to = Summand {
                                    m: m - 1,
                                    k: k + 1,
                                    s: sm - 1,
                                };
                                let Some(row0) = target.locate(&to, &sub) else { continue };
                                let pos = key.elems().iter().position(|&x| x == c).unwrap();
                                let sg = sign(pos);
                                for (row, v) in push.images()[k][a].iter().enumerate() {
                                    if !v.is_zero() {
                                        d[(row0 + row, col)] += &sg * v;
                                    }
                                }
                            } else {
                                let sup = key.with(c);
                                let Some(pull) = s.pullback(key, &sup) else { continue };
                                let to = Summand { m: m + 1, k, s: sm };
                                let Some(row0) = target.locate(&to, &sup) else { continue };
                                let pos = sup.elems().iter().position(|&x| x == c).unwrap();
                                let sg = sign(pos);
                                for (row, v) in pull.images()[k][a].iter().enumerate() {
                                    if !v.is_zero() {
                                        d[(row0 + row, col)] += &sg * v;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        d1.insert((i, j), d);
    }
    E1Page { n, terms, d1 }
}

impl E1Page {
    pub fn dim(&self, bd: Bidegree) -> usize {
        self.terms.get(&bd).map_or(0, |t| t.dim)
    }

    /// Human-readable name of basis vector `col` of `E1^{i,j}`.
    pub fn basis_label(&self, s: &IncidenceStructure, bd: Bidegree, col: usize) -> String {
        let Some(term) = self.terms.get(&bd) else {
            return format!("#{col}");
        };
        for b in &term.blocks {
            for (key, off, r) in &b.strata {
                let start = b.offset + off;
                if (start..start + r).contains(&col) {
                    let sym = s
                        .presentation(key)
                        .map(|p| p.basis(b.summand.k)[col - start].clone())
                        .unwrap_or_default();
                    return format!("s={} Y_{key} {sym}", b.summand.s);
                }
            }
        }
        format!("#{col}")
    }

    fn d_or_empty(&self, bd: Bidegree) -> IntMatrix {
        self.d1
            .get(&bd)
            .cloned()
            .unwrap_or_else(|| IntMatrix::zeros(self.dim((bd.0 + 1, bd.1)), self.dim(bd)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub bidegree: Bidegree,
    /// First source basis vector exhibiting the failure.
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub checked: usize,
    pub failures: Vec<Failure>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn first_nonzero_column(m: &IntMatrix) -> Option<usize> {
    (0..m.cols()).find(|&c| (0..m.rows()).any(|r| !m[(r, c)].is_zero()))
}

fn first_differing_column(a: &IntMatrix, b: &IntMatrix) -> Option<usize> {
    (0..a.cols()).find(|&c| (0..a.rows()).any(|r| a[(r, c)] != b[(r, c)]))
}

/// `d1 ∘ d1 = 0` at every bidegree.
pub fn check_d1_squared(page: &E1Page) -> CheckReport {
    let mut report = CheckReport {
        checked: 0,
        failures: Vec::new(),
    };
    for (&(i, j), d) in &page.d1 {
        let next = page.d_or_empty((i + 1, j));
        let sq = next.mul(d);
        report.checked += 1;
        if let Some(column) = first_nonzero_column(&sq) {
            report.failures.push(Failure {
                bidegree: (i, j),
                column,
            });
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct D1NotZero(pub Bidegree);

/// `dim ker − dim im` at each bidegree, over the rationals.
pub fn e2_ranks(page: &E1Page) -> Result<BTreeMap<Bidegree, usize>, D1NotZero> {
    if let Some(f) = check_d1_squared(page).failures.first() {
        return Err(D1NotZero(f.bidegree));
    }
    let mut out = BTreeMap::new();
    for (&(i, j), term) in &page.terms {
        let out_rank = rank(&page.d_or_empty((i, j)));
        let in_rank = rank(&page.d_or_empty((i - 1, j)));
        out.insert((i, j), term.dim - out_rank - in_rank);
    }
    Ok(out)
}

/// E2 ranks summed along each weight `w = i + j`, from 0 to the top weight.
pub fn e2_totals(page: &E1Page, ranks: &BTreeMap<Bidegree, usize>) -> Vec<usize> {
    let top = 2 * page.n.saturating_sub(1);
    let mut totals = vec![0; top + 1];
    for (&(i, j), &r) in ranks {
        let w = i + j as isize;
        if (0..=top as isize).contains(&w) {
            totals[w as usize] += r;
        }
    }
    totals
}

/// Matrix of `F^*` on `A^k(Y^{(m)})`, columns and rows ordered like the
/// blocks of the page.
fn action_block(s: &IncidenceStructure, f: &CorrespondenceFamily, block: &Block) -> Result<IntMatrix, EngineError> {
    let Summand { m, k, .. } = block.summand;
    let mut a = IntMatrix::zeros(block.dim, block.dim);
    for (j, col0, r) in &block.strata {
        let pj = s.presentation(j)?;
        for b in 0..*r {
            let x = ChowClass::basis_element(pj, k, b);
            let images = act(s, f, m, j, &x)?;
            for (i, row0, _) in &block.strata {
                for (d, v) in images[i].coeffs().iter().enumerate() {
                    if !v.is_zero() {
                        a[(row0 + d, col0 + b)] = v.clone();
                    }
                }
            }
        }
    }
    Ok(a)
}

/// Block-diagonal action of `⊕ Γ^{(m)*}` on every E1 term.
pub fn corr_action_on_e1(
    s: &IncidenceStructure,
    page: &E1Page,
    f: &CorrespondenceFamily,
) -> Result<BTreeMap<Bidegree, IntMatrix>, EngineError> {
    let mut cache: BTreeMap<(usize, usize), IntMatrix> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for (&bd, term) in &page.terms {
        let mut a = IntMatrix::zeros(term.dim, term.dim);
        for block in &term.blocks {
            let key = (block.summand.m, block.summand.k);
            let sub = match cache.entry(key) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(action_block(s, f, block)?),
            };
            for r in 0..block.dim {
                for c in 0..block.dim {
                    a[(block.offset + r, block.offset + c)] = sub[(r, c)].clone();
                }
            }
        }
        out.insert(bd, a);
    }
    Ok(out)
}

/// `d1 ∘ F^* = F^* ∘ d1` at every bidegree.
pub fn check_equivariance(
    s: &IncidenceStructure,
    page: &E1Page,
    f: &CorrespondenceFamily,
) -> Result<CheckReport, EngineError> {
    let action = corr_action_on_e1(s, page, f)?;
    let mut report = CheckReport {
        checked: 0,
        failures: Vec::new(),
    };
    for (&(i, j), d) in &page.d1 {
        let src = &action[&(i, j)];
        let lhs = d.mul(src);
        let rhs = match action.get(&(i + 1, j)) {
            Some(tgt) => tgt.mul(d),
            None => IntMatrix::zeros(d.rows(), d.cols()),
        };
        report.checked += 1;
        if let Some(column) = first_differing_column(&lhs, &rhs) {
            report.failures.push(Failure {
                bidegree: (i, j),
                column,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{compute_all_levels, LevelOneInput};
    use crate::generators::*;

    fn dims(page: &E1Page) -> Vec<(Bidegree, usize)> {
        page.terms.iter().map(|(k, t)| (*k, t.dim)).collect()
    }

    #[test]
    fn chain2_terms() {
        let page = build_e1(&chain_p1(2));
        assert_eq!(dims(&page), vec![((-1, 2), 1), ((0, 0), 2), ((0, 2), 2), ((1, 0), 1)]);
    }

    #[test]
    fn cycle3_double_points() {
        let page = build_e1(&cycle_p1(3));
        assert_eq!(page.dim((1, 0)), 3);
    }

    #[test]
    fn single_component_has_zero_differential() {
        let s = single_projective(1);
        let page = build_e1(&s);
        assert!(page.d1.values().all(IntMatrix::is_zero));
        assert!(check_d1_squared(&page).passed());
        let ranks = e2_ranks(&page).unwrap();
        assert_eq!(e2_totals(&page, &ranks), vec![1, 0, 1]);
    }

    #[test]
    fn e2_totals_of_curves() {
        for t in 2..=5 {
            let page = build_e1(&chain_p1(t));
            assert!(check_d1_squared(&page).passed());
            let r = e2_ranks(&page).unwrap();
            assert_eq!(e2_totals(&page, &r), vec![1, 0, 1], "chain {t}");
        }
        for t in 3..=5 {
            let page = build_e1(&cycle_p1(t));
            let r = e2_ranks(&page).unwrap();
            assert_eq!(e2_totals(&page, &r), vec![1, 2, 1], "cycle {t}");
        }
    }

    #[test]
    fn triple_plane_differential_does_not_square_to_zero() {
        let page = build_e1(&triple_plane());
        let report = check_d1_squared(&page);
        assert_eq!(report.failures.first().map(|f| f.bidegree), Some((-1, 2)));
        assert!(e2_ranks(&page).is_err());
    }

    #[test]
    fn actions_of_simple_families() {
        let s = cycle_p1(3);
        let page = build_e1(&s);
        let id = compute_all_levels(&s, &identity_family(&s).unwrap()).unwrap();
        for (bd, a) in corr_action_on_e1(&s, &page, &id).unwrap() {
            assert_eq!(a, IntMatrix::identity(page.dim(bd)));
        }
        let zero = compute_all_levels(&s, &LevelOneInput::zero(&s).unwrap()).unwrap();
        for a in corr_action_on_e1(&s, &page, &zero).unwrap().values() {
            assert!(a.is_zero());
        }
        let rev = compute_all_levels(&s, &graph_family(&s, &reversal_perm(3)).unwrap()).unwrap();
        let a = &corr_action_on_e1(&s, &page, &rev).unwrap()[&(1, 0)];
        // every row and column has exactly one ±1
        for r in 0..3 {
            let nz: Vec<_> = (0..3).filter(|&c| !a[(r, c)].is_zero()).collect();
            assert_eq!(nz.len(), 1);
            assert_eq!(num_traits::Signed::abs(&a[(r, nz[0])]), BigInt::one());
        }
        assert!(check_equivariance(&s, &page, &rev).unwrap().passed());
    }

    #[test]
    fn missing_level_is_an_error() {
        let s = chain_p1(2);
        let page = build_e1(&s);
        let mut f = compute_all_levels(&s, &identity_family(&s).unwrap()).unwrap();
        f.levels.remove(&2);
        assert_eq!(
            corr_action_on_e1(&s, &page, &f).unwrap_err(),
            EngineError::MissingLevel(2)
        );
    }
}
