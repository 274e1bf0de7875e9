//! Throughput of each pipeline stage on the library fixtures.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use pbcheck_core::{
    check_expectations, check_obligations, emit, parse_machine, translate, CheckOptions, StateBox,
    Valuation, Value,
};

const UNSAFE: &str = include_str!("../../core/examples/library_unsafe.pb");

fn constants(books: i64) -> Valuation {
    [
        ("totalBooks", Value::int(books)),
        ("cost", Value::int(1)),
        ("pp", Value::ratio(1, 2)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn front_end(c: &mut Criterion) {
    let machine = parse_machine(UNSAFE).unwrap();
    let model = translate(&machine).unwrap();
    c.bench_function("parse", |b| b.iter(|| parse_machine(black_box(UNSAFE))));
    c.bench_function("translate", |b| b.iter(|| translate(black_box(&machine))));
    c.bench_function("emit", |b| b.iter(|| emit(black_box(&model))));
}

fn obligations(c: &mut Criterion) {
    let machine = parse_machine(UNSAFE).unwrap();
    let mut group = c.benchmark_group("obligations");
    for books in [2, 4] {
        let constants = constants(books);
        let state_box = StateBox::for_machine(&machine, &constants).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(books), &books, |b, _| {
            b.iter(|| check_obligations(&machine, &constants, &state_box, 10))
        });
    }
    group.finish();
}

fn check(c: &mut Criterion) {
    let machine = parse_machine(UNSAFE).unwrap();
    let mut group = c.benchmark_group("check");
    group.sample_size(20);
    for (books, max_count) in [(1, 2), (3, 6), (6, 10)] {
        let constants = constants(books);
        let id = BenchmarkId::from_parameter(format!("books={books},max={max_count}"));
        group.bench_with_input(id, &max_count, |b, &max_count| {
            b.iter(|| check_expectations(&machine, &constants, max_count, CheckOptions::default()))
        });
    }
    group.finish();
}

criterion_group!(benches, front_end, obligations, check);
criterion_main!(benches);
