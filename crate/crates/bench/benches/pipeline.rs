use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use xtalk_bench::{channel, full_pair};
use xtalk_core::channel::{compose_dense, effective_channel_ap_ue, effective_channel_enb_ap};
use xtalk_core::matrices::{assemble_k_ap_ue, assemble_k_enb_ap};
use xtalk_core::montecarlo::draw_effective_channel;
use xtalk_core::{resolve_ap_layout, resolve_ue_layout, CampaignConfig};

fn timing(c: &mut Criterion) {
    let (laa, wifi) = full_pair();
    c.bench_function("resolve_ue_layout", |b| {
        b.iter(|| resolve_ue_layout(&laa, &wifi, black_box(3.5e-6)).unwrap())
    });
    c.bench_function("resolve_ap_layout", |b| {
        b.iter(|| resolve_ap_layout(&laa, &wifi, black_box(-2e-6)).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    let (laa, wifi) = full_pair();
    let ue = resolve_ue_layout(&laa, &wifi, 3.5e-6).unwrap();
    let ap = resolve_ap_layout(&laa, &wifi, -2e-6).unwrap();
    let mut g = c.benchmark_group("assemble_k");
    g.sample_size(20);
    g.bench_function("ap_ue", |b| {
        b.iter(|| assemble_k_ap_ue(black_box(&ue), &wifi, &laa).unwrap())
    });
    g.bench_function("enb_ap", |b| {
        b.iter(|| assemble_k_enb_ap(black_box(&ap), &laa, &wifi).unwrap())
    });
    g.finish();
}

fn composition(c: &mut Criterion) {
    let (laa, wifi) = full_pair();
    let ch = channel(3);
    let k_ue = assemble_k_ap_ue(
        &resolve_ue_layout(&laa, &wifi, 3.5e-6).unwrap(),
        &wifi,
        &laa,
    )
    .unwrap();
    let k_ap =
        assemble_k_enb_ap(&resolve_ap_layout(&laa, &wifi, -2e-6).unwrap(), &laa, &wifi).unwrap();
    let mut g = c.benchmark_group("effective_channel");
    g.sample_size(10);
    g.bench_function("ap_ue_fft", |b| {
        b.iter(|| effective_channel_ap_ue(&ch, black_box(&k_ue), &laa, &wifi).unwrap())
    });
    g.bench_function("enb_ap_fft", |b| {
        b.iter(|| effective_channel_enb_ap(&ch, black_box(&k_ap), &laa, &wifi).unwrap())
    });
    g.bench_function("enb_ap_dense", |b| {
        b.iter(|| compose_dense(&ch, black_box(&k_ap), &wifi).unwrap())
    });
    g.finish();
}

fn campaign_draw(c: &mut Criterion) {
    let (laa, wifi) = full_pair();
    let enb_ap = CampaignConfig::enb_to_ap(&laa, &wifi);
    let ap_ue = CampaignConfig::ap_to_ue();
    let mut g = c.benchmark_group("campaign_draw");
    g.sample_size(10);
    g.bench_function("enb_ap", |b| {
        b.iter(|| draw_effective_channel(&enb_ap, &laa, &wifi, black_box(0), None).unwrap())
    });
    g.bench_function("ap_ue", |b| {
        b.iter(|| draw_effective_channel(&ap_ue, &laa, &wifi, black_box(0), None).unwrap())
    });
    g.finish();
}

criterion_group!(benches, timing, sampling, composition, campaign_draw);
criterion_main!(benches);
