//! Line-oriented text reports. Each finding is one line starting with a
//! stable upper-case tag.

use std::fmt::Write;

use crate::engine::{CompositionReport, TransposeReport};
use crate::strata::{IncidenceStructure, Violation};
use crate::wss::{check_d1_squared, e2_ranks, e2_totals, CheckReport, E1Page};

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn validation(violations: &[Violation]) -> String {
    let mut out = String::new();
    for v in violations {
        writeln!(out, "VIOLATION {v}").unwrap();
    }
    writeln!(
        out,
        "RESULT validate {} violations={}",
        verdict(violations.is_empty()),
        violations.len()
    )
    .unwrap();
    out
}

/// The E1 report and whether `d1 ∘ d1 = 0`.
pub fn e1(s: &IncidenceStructure, page: &E1Page) -> (String, bool) {
    let mut out = String::new();
    writeln!(out, "STRUCTURE t={} n={} strata={}", s.t(), s.n(), s.strata().len()).unwrap();
    for (&(i, j), term) in &page.terms {
        writeln!(out, "TERM i={i} j={j} dim={}", term.dim).unwrap();
        for b in &term.blocks {
            let sm = b.summand;
            writeln!(
                out,
                "SUMMAND i={i} j={j} s={} m={} k={} twist={} dim={}",
                sm.s,
                sm.m,
                sm.k,
                sm.twist(),
                b.dim
            )
            .unwrap();
        }
    }
    let sq = check_d1_squared(page);
    match sq.failures.first() {
        None => writeln!(out, "CHECK d1_squared PASS bidegrees={}", sq.checked).unwrap(),
        Some(f) => writeln!(
            out,
            "CHECK d1_squared FAIL i={} j={} basis=[{}]",
            f.bidegree.0,
            f.bidegree.1,
            page.basis_label(s, f.bidegree, f.column)
        )
        .unwrap(),
    }
    for v in s.balance_violations().iter().chain(&s.base_change_violations()) {
        writeln!(out, "DIAG {v}").unwrap();
    }
    if let Ok(ranks) = e2_ranks(page) {
        for (&(i, j), r) in &ranks {
            writeln!(out, "E2 i={i} j={j} rank={r}").unwrap();
        }
        for (w, r) in e2_totals(page, &ranks).iter().enumerate() {
            writeln!(out, "E2_TOTAL w={w} rank={r}").unwrap();
        }
    }
    writeln!(out, "RESULT e1 {}", verdict(sq.passed())).unwrap();
    (out, sq.passed())
}

pub fn composition(r: &CompositionReport) -> String {
    let mut out = String::new();
    for (m, pairs) in &r.levels {
        writeln!(out, "LEVEL m={m} pairs={pairs}").unwrap();
    }
    for x in &r.mismatches {
        writeln!(
            out,
            "MISMATCH m={} I={} K={} expected=[{}] found=[{}]",
            x.m, x.i, x.k, x.expected, x.found
        )
        .unwrap();
    }
    writeln!(out, "RESULT compose-check {}", verdict(r.passed())).unwrap();
    out
}

pub fn equivariance(s: &IncidenceStructure, page: &E1Page, r: &CheckReport) -> String {
    let mut out = String::new();
    for f in &r.failures {
        writeln!(
            out,
            "NONCOMMUTING i={} j={} basis=[{}]",
            f.bidegree.0,
            f.bidegree.1,
            page.basis_label(s, f.bidegree, f.column)
        )
        .unwrap();
    }
    writeln!(
        out,
        "RESULT equivariance {} bidegrees={}",
        verdict(r.passed()),
        r.checked
    )
    .unwrap();
    out
}

pub fn transpose(r: &TransposeReport) -> String {
    let mut out = String::new();
    for (m, i, j) in &r.failures {
        writeln!(out, "DIAG transpose m={m} I={i} J={j} FAIL").unwrap();
    }
    writeln!(out, "DIAG transpose {} checked={}", verdict(r.passed()), r.checked).unwrap();
    out
}
