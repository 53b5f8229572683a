use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regen_core::channel::{resilient_ip_transmit, EdgeChannel, RsCodec};
use regen_core::codes::{DetCode, GpmCode, MoulinCode, PmMbrCode, PmMsrCode};
use regen_core::engine::{simulate_repair, Rational, Strategy};
use regen_core::retrieval::{plan_retrieval, retrieve_mbr_optimal, retrieve_relay, select_retrieval_set};
use regen_core::{build_repair_tree, select_helpers, Field, Graph, RegeneratingCode, RepairTree};

fn tree() -> RepairTree {
    let g = Graph::running_example();
    build_repair_tree(&g, 0, &select_helpers(&g, 0, 6).unwrap()).unwrap()
}

fn repair(c: &mut Criterion) {
    let f = Field::default();
    let codes: Vec<(&str, Box<dyn RegeneratingCode>)> = vec![
        ("pm-msr", Box::new(PmMsrCode::new(f, 7, 4).unwrap())),
        ("gpm", Box::new(GpmCode::new(f, 7, 5, 3, 1).unwrap())),
        ("moulin", Box::new(MoulinCode::new(f, 7, 5, 6, 4, 1).unwrap())),
        ("det", Box::new(DetCode::new(f, 7, 6, 3).unwrap())),
    ];
    let t = tree();
    let mut group = c.benchmark_group("repair");
    for (name, code) in &codes {
        let cw = code.encode(&code.random_file(&mut ChaCha8Rng::seed_from_u64(1))).unwrap();
        for strategy in [Strategy::Af, Strategy::Ip] {
            group.bench_function(format!("{name}/{strategy}"), |b| {
                b.iter(|| simulate_repair(code.as_ref(), &t, black_box(&cw), strategy).unwrap())
            });
        }
    }
    group.finish();
}

fn retrieval(c: &mut Criterion) {
    let code = PmMbrCode::new(Field::default(), 7, 5, 6).unwrap();
    let g = Graph::running_example();
    let plan = plan_retrieval(&g, &select_retrieval_set(&g, &[0], 5).unwrap(), &[0], 6).unwrap();
    let cw = code.encode(&code.random_file(&mut ChaCha8Rng::seed_from_u64(2))).unwrap();
    let mut group = c.benchmark_group("retrieval");
    group.bench_function("relay", |b| b.iter(|| retrieve_relay(&code, &plan, black_box(&cw)).unwrap()));
    group.bench_function("triangular", |b| b.iter(|| retrieve_mbr_optimal(&code, &plan, black_box(&cw)).unwrap()));
    group.finish();
}

fn channel(c: &mut Criterion) {
    let f = Field::default();
    let rho = Rational::new(1, 10);
    let rs = RsCodec::new(f, 22, rho).unwrap();
    let msg: Vec<u64> = (1..=22).collect();
    let block = rs.encode(&msg).unwrap();
    let mut ch = EdgeChannel::new(f, rho, 3).unwrap().worst_case();
    let noisy = ch.transmit(&block);
    c.bench_function("rs/decode-22-28", |b| b.iter(|| rs.decode(black_box(&noisy)).unwrap()));

    let code = PmMsrCode::new(f, 7, 4).unwrap();
    let t = tree();
    let cw = code.encode(&code.random_file(&mut ChaCha8Rng::seed_from_u64(4))).unwrap();
    c.bench_function("repair/pm-msr/noisy", |b| {
        b.iter(|| {
            let mut ch = EdgeChannel::new(f, rho, 5).unwrap().worst_case();
            resilient_ip_transmit(&code, &t, black_box(&cw), &mut ch).unwrap()
        })
    });
}

criterion_group!(benches, repair, retrieval, channel);
criterion_main!(benches);
