use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use hilmod::bundle::CurvatureOptions;
use hilmod::{
    bundle_curvature_with, char_function, hilbert_samuel, kernel_eval, power_frame, quotient_dim,
    reducing_curvatures, vanishing_submodule, CurvatureMethod, FiniteContraction, KernelSpec,
    PointInDomain, TruncatedModule, C64,
};
use hilmod_bench::{damped_block, spiral};

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_eval");
    let pts = spiral(64, 0.9);
    let cases = [
        ("bergman", KernelSpec::bergman(), 1),
        ("drury_arveson_3", KernelSpec::drury_arveson(3).unwrap(), 3),
        (
            "hardy_polydisk_2",
            KernelSpec::hardy_polydisk(2).unwrap(),
            2,
        ),
    ];
    for (name, spec, vars) in cases {
        let scale = if name.starts_with("drury") {
            1.0 / (vars as f64).sqrt()
        } else {
            1.0
        };
        let points: Vec<PointInDomain> = pts
            .iter()
            .map(|&z| PointInDomain::new(vec![z * scale; vars], 1e-3).unwrap())
            .collect();
        group.bench_function(name, |b| {
            b.iter(|| {
                for p in &points {
                    black_box(kernel_eval(&spec, p, &points[0], 400).unwrap());
                }
            })
        });
    }
    // a moment table has no closed form, so this exercises the series
    let custom = KernelSpec::custom(
        1,
        (0..64u32)
            .map(|n| (vec![n], 1.0 / f64::from(n + 1)))
            .collect(),
        hilmod::TailRule::Geometric,
    )
    .unwrap();
    let p = PointInDomain::disk(C64::new(0.5, 0.2)).unwrap();
    group.bench_function("custom_series", |b| {
        b.iter(|| black_box(kernel_eval(&custom, &p, &p, 200).unwrap()))
    });
    group.finish();
}

fn curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("bundle_curvature");
    let spec = KernelSpec::bergman();
    let w = C64::new(0.4, -0.3);
    let opts = CurvatureOptions::default();
    for m in [2u32, 4, 6] {
        let frame = power_frame(&spec, m).unwrap();
        for (label, method) in [
            ("exact", CurvatureMethod::Exact),
            ("fd", CurvatureMethod::FiniteDifference),
        ] {
            group.bench_with_input(BenchmarkId::new(label, m), &frame, |b, f| {
                b.iter(|| black_box(bundle_curvature_with(f, w, method, &opts).unwrap()))
            });
        }
    }
    group.bench_function("reducing_m6", |b| {
        b.iter(|| black_box(reducing_curvatures(&spec, 6).unwrap()))
    });
    group.finish();
}

fn localization(c: &mut Criterion) {
    let mut group = c.benchmark_group("quotient_dim");
    let spec = KernelSpec::hardy_polydisk(2).unwrap();
    let origin = [C64::new(0.0, 0.0); 2];
    for degree in [4u32, 8] {
        let full = TruncatedModule::full(&spec, degree).unwrap();
        let vanishing = vanishing_submodule(&spec, 2, degree, &origin).unwrap();
        group.bench_with_input(BenchmarkId::new("full", degree), &full, |b, m| {
            b.iter(|| black_box(quotient_dim(m, &origin, 2).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("vanishing", degree), &vanishing, |b, m| {
            b.iter(|| black_box(quotient_dim(m, &origin, 2).unwrap()))
        });
    }
    let full = TruncatedModule::full(&spec, 8).unwrap();
    group.bench_function("hilbert_samuel_k6", |b| {
        b.iter(|| black_box(hilbert_samuel(&full, &origin, 6).unwrap()))
    });
    group.finish();
}

fn characteristic(c: &mut Criterion) {
    let mut group = c.benchmark_group("char_function");
    let pts = spiral(32, 0.95);
    for d in [2usize, 8, 32] {
        let t = FiniteContraction::new(damped_block(d, 0.3)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &t, |b, t| {
            b.iter(|| {
                for &z in &pts {
                    black_box(char_function(t, z).unwrap());
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, kernels, curvature, localization, characteristic);
criterion_main!(benches);
