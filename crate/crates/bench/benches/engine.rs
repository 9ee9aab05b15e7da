use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use radocolor_core::engine::search_escalating;
use radocolor_core::{
    check_proof_table, enumerate_colorings, find_monochromatic, parse_equation, search,
    ColoringSpec, SearchOptions, SearchOutcome, Seeds, UniverseConfig,
};

fn ratios(c: &mut Criterion) {
    let eqs: Vec<_> = ["E(2,3)", "E(2,5)", "E(3/2,3)", "1,1,1,-4"]
        .iter()
        .map(|t| parse_equation(t).unwrap())
        .collect();
    c.bench_function("forbidden_ratios", |b| {
        b.iter(|| {
            eqs.iter()
                .map(|e| e.forbidden_ratios().len())
                .sum::<usize>()
        })
    });
}

fn freeness(c: &mut Criterion) {
    let eq = parse_equation("E(2,3)").unwrap();
    let cfg = UniverseConfig {
        full_box: true,
        ..Default::default()
    };
    let u = cfg.build(&eq, &[]).unwrap();
    let spec = ColoringSpec::Cpn { p: 2, n: 3 };
    c.bench_function("find_monochromatic cpn:2:3 on E(2,3)", |b| {
        b.iter(|| find_monochromatic(&spec, &eq, u.values(), 1).unwrap())
    });
}

fn engine(c: &mut Criterion) {
    let opts = SearchOptions::default();
    let e23 = parse_equation("E(2,3)").unwrap();
    let u23 = UniverseConfig::default().build(&e23, &[]).unwrap();
    c.bench_function("search E(2,3) r=2", |b| {
        b.iter(|| search(&e23, 2, &u23, &Seeds::default(), &opts).unwrap())
    });

    let e32 = parse_equation("E(3/2,3)").unwrap();
    let small = UniverseConfig {
        values: Some((1..=12).map(|k| radocolor_core::rat(k, 1)).collect()),
        ..Default::default()
    }
    .build(&e32, &[])
    .unwrap();
    c.bench_function("enumerate E(3/2,3) r=3 on 1..12", |b| {
        b.iter(|| enumerate_colorings(&e32, 3, &small, &Seeds::default(), &opts).unwrap())
    });

    let triple = parse_equation("1,1,1,-4").unwrap();
    let mut seeds = Seeds::default();
    seeds.add("c(1)=c(3)").unwrap();
    let ladder = [UniverseConfig::default(), UniverseConfig::extended()];
    let mut group = c.benchmark_group("triple ratio");
    group.sample_size(10);
    group.bench_function("prove r=4 with escalation", |b| {
        b.iter(|| search_escalating(&triple, 4, &ladder, &seeds, &opts).unwrap())
    });
    let esc = search_escalating(&triple, 4, &ladder, &seeds, &opts).unwrap();
    let SearchOutcome::Unsat { proof } = esc.result.outcome else {
        panic!("expected a proof")
    };
    group.bench_function("check proof", |b| {
        b.iter_batched(
            || proof.clone(),
            |p| check_proof_table(&p, &triple, 4),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, ratios, freeness, engine);
criterion_main!(benches);
