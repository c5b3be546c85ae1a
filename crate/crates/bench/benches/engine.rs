use criterion::{black_box, criterion_group, criterion_main, Criterion};

use strata_corr::engine::{check_composition, compute_all_levels_with, SolveOptions};
use strata_corr::generators::{chain_p1, cycle_p1, graph_family, reflection_perm, rotation_perm, triple_plane};
use strata_corr::wss::{build_e1, check_equivariance, e2_ranks};
use strata_corr::{hnf, solve_unique, IntMatrix};

fn serial() -> SolveOptions {
    SolveOptions {
        max_level: None,
        threads: Some(0),
    }
}

fn linalg(c: &mut Criterion) {
    // deterministic 12x12 matrix with small entries
    let rows: Vec<Vec<i64>> = (0..12)
        .map(|i| (0..12).map(|j| ((i * 7 + j * 13 + i * j) % 7) as i64 - 3).collect())
        .collect();
    let m = IntMatrix::from_rows(&rows);
    let b: Vec<_> = (0..12).map(|i| num_bigint::BigInt::from(i % 5 - 2)).collect();
    c.bench_function("hnf_12x12", |bch| bch.iter(|| hnf(black_box(&m))));
    c.bench_function("solve_unique_12x12", |bch| {
        bch.iter(|| solve_unique(black_box(&m), black_box(&b)))
    });
}

fn levels(c: &mut Criterion) {
    for (name, s) in [
        ("chain5", chain_p1(5)),
        ("cycle5", cycle_p1(5)),
        ("triple_plane", triple_plane()),
    ] {
        let id = graph_family(&s, &(1..=s.t()).collect::<Vec<_>>()).unwrap();
        c.bench_function(&format!("levels_identity_{name}"), |bch| {
            bch.iter(|| compute_all_levels_with(&s, black_box(&id), &serial()).unwrap())
        });
    }
    let s = cycle_p1(4);
    let rot = graph_family(&s, &rotation_perm(4, 1)).unwrap();
    let refl = graph_family(&s, &reflection_perm(4)).unwrap();
    c.bench_function("compose_check_cycle4", |bch| {
        bch.iter(|| check_composition(&s, black_box(&rot), black_box(&refl), &serial()).unwrap())
    });
}

fn spectral(c: &mut Criterion) {
    let s = cycle_p1(5);
    c.bench_function("e1_e2_cycle5", |bch| {
        bch.iter(|| {
            let page = build_e1(black_box(&s));
            e2_ranks(&page).unwrap()
        })
    });
    let page = build_e1(&s);
    let f = compute_all_levels_with(&s, &graph_family(&s, &rotation_perm(5, 1)).unwrap(), &serial()).unwrap();
    c.bench_function("equivariance_cycle5_rotation", |bch| {
        bch.iter(|| check_equivariance(&s, &page, black_box(&f)).unwrap())
    });
}

criterion_group!(benches, linalg, levels, spectral);
criterion_main!(benches);
