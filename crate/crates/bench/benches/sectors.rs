use criterion::{criterion_group, criterion_main, Criterion};
use tropibayes::{fixtures, ModelSpec, SectorTable};

fn sector_tables(c: &mut Criterion) {
    let (t, f, g) = fixtures::pentagon_pair();
    c.bench_function("table/pentagon", |b| b.iter(|| SectorTable::from_polys(&t, &f, &g).unwrap()));

    let coin = ModelSpec::builtin("coin(2)").unwrap();
    c.bench_function("table/coin2", |b| b.iter(|| coin.likelihood_table(&[2, 1, 2], None).unwrap()));

    let fan = coin.sector_fan().unwrap();
    c.bench_function("table/coin2_shared_fan", |b| {
        b.iter(|| coin.likelihood_table(&[2, 1, 2], Some(&fan)).unwrap())
    });
}

criterion_group!(benches, sector_tables);
criterion_main!(benches);
