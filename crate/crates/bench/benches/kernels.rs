use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pdcshape_bench::{ck_jsa, ck_pump, ck_spec, phasematch};
use pdcshape_core::{
    build_jsa, default_joint_grids, richardson_lucy, schmidt_weights, simulate_tof_jsi, Psf, ToFSpec,
};

fn svd(c: &mut Criterion) {
    let mut group = c.benchmark_group("schmidt_weights");
    group.sample_size(10);
    for points in [256, 512] {
        let jsa = ck_jsa(5, points);
        group.bench_with_input(BenchmarkId::from_parameter(points), &jsa, |b, jsa| {
            b.iter(|| schmidt_weights(jsa).unwrap())
        });
    }
    group.finish();
}

fn jsa_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_jsa");
    for points in [256, 512] {
        let pump = ck_pump(10, points);
        let pm = phasematch();
        let (sg, ig) = default_joint_grids(&pm, ck_spec(10).fwhm_thz, points).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(points), &pump, |b, pump| {
            b.iter(|| build_jsa(pump, &pm, &sg, &ig).unwrap())
        });
    }
    group.finish();
}

fn deconvolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("richardson_lucy_10_iterations");
    group.sample_size(10);
    let tof = ToFSpec {
        dispersion_ps_per_nm: -418.0,
        psf: Psf::gaussian(5.0).unwrap(),
        total_counts: 1e6,
        seed: 1,
    };
    for points in [256, 512] {
        let counts = simulate_tof_jsi(&ck_jsa(10, points), &tof).unwrap().counts_f64();
        group.bench_with_input(BenchmarkId::from_parameter(points), &counts, |b, counts| {
            b.iter(|| richardson_lucy(counts, &tof.psf, 10).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, svd, jsa_build, deconvolution);
criterion_main!(benches);
