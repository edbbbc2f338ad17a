//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! with its measured error and runtime; the test fails if any line fails.

mod common;

use std::time::{Duration, Instant};

use common::{
    bergman_m2_entry00, bergman_m2_entry11, bergman_norm2, c, closed_curvature, lattice_count,
    polar_grid, power_norm, random_complex_matrix, random_contraction, random_disk_point,
};
use hilmod::bundle::{bundle_curvature_with, fd_line_curvature, CurvatureOptions};
use hilmod::kernel::kernel_gram;
use hilmod::numeric::hermitian_eigen;
use hilmod::shift::DEFAULT_DEPTH;
use hilmod::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_err(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs
        .into_iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn criterion_1() -> Check {
    let grid = polar_grid(0.9, 4, 6);
    ensure(grid.len() == 25, || "grid size".into())?;
    let mut worst: f64 = 0.0;
    for w in &grid {
        let r = w.norm_sqr();
        worst = worst.max(
            (metric_h(&RadialMetric::hardy(), *w).map_err(|e| e.to_string())? - (1.0 - r)).abs(),
        );
        for alpha in [0.0f64, 0.5, 1.0, 3.0] {
            let want = (1.0 - r) / (2.0 + alpha).sqrt();
            let closed = RadialMetric::weighted_bergman(alpha).unwrap();
            worst = worst.max((metric_h(&closed, *w).unwrap() - want).abs());
            // the same metric assembled from the moments of the space
            let spec = KernelSpec::weighted_bergman(alpha).unwrap();
            let shift = restriction_shift(&spec, 1, 0, 2000).unwrap();
            let series = RadialMetric::series(shift_kernel_metric(&shift, 2000).unwrap()).unwrap();
            worst = worst.max((metric_h(&series, *w).map_err(|e| e.to_string())? - want).abs());
        }
    }
    ensure(worst < 1e-9, || format!("max error {worst:e}"))?;
    Ok(format!("max error {worst:.1e} over 25 points"))
}

fn criterion_2() -> Check {
    let frame = power_frame(&KernelSpec::bergman(), 2).unwrap();
    let at0 = bundle_curvature(&frame, c(0.0, 0.0), CurvatureMethod::FiniteDifference)
        .map_err(|e| e.to_string())?;
    let e0 = max_err([
        (at0.matrix[(0, 0)].re, -3.0),
        (at0.matrix[(1, 1)].re, -2.0),
        (at0.matrix[(0, 1)].norm(), 0.0),
        (at0.matrix[(0, 0)].im, 0.0),
    ]);
    ensure(e0 < 1e-8, || format!("origin error {e0:e}"))?;
    let grid = polar_grid(0.7, 2, 4);
    ensure(grid.len() == 9, || "grid size".into())?;
    let (mut golden, mut paths) = (0.0f64, 0.0f64);
    for w in grid {
        let r = w.norm_sqr();
        let exact =
            bundle_curvature(&frame, w, CurvatureMethod::Exact).map_err(|e| e.to_string())?;
        let fd = bundle_curvature(&frame, w, CurvatureMethod::FiniteDifference)
            .map_err(|e| e.to_string())?;
        for rep in [&exact, &fd] {
            golden = golden.max(max_err([
                (rep.matrix[(0, 0)].re, bergman_m2_entry00(r)),
                (rep.matrix[(1, 1)].re, bergman_m2_entry11(r)),
            ]));
        }
        let d = (&exact.matrix - &fd.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        paths = paths.max(d);
    }
    ensure(golden < 1e-6, || {
        format!("rational expression error {golden:e}")
    })?;
    ensure(paths < 1e-6, || format!("FD vs series {paths:e}"))?;
    Ok(format!(
        "origin {e0:.1e}, golden {golden:.1e}, FD vs series {paths:.1e}"
    ))
}

fn criterion_3() -> Check {
    let b = KernelSpec::bergman();
    let t0 = restriction_shift(&b, 2, 0, DEFAULT_DEPTH).unwrap();
    let t1 = restriction_shift(&b, 2, 1, DEFAULT_DEPTH).unwrap();
    let mz = restriction_shift(&b, 1, 0, DEFAULT_DEPTH).unwrap();
    let mut worst: f64 = 0.0;
    for l in 0..DEFAULT_DEPTH {
        let lf = l as f64;
        worst =
            worst.max((t0.weight(l).unwrap() - ((2.0 * lf + 1.0) / (2.0 * lf + 3.0)).sqrt()).abs());
        worst = worst.max((t1.weight(l).unwrap() - ((lf + 1.0) / (lf + 2.0)).sqrt()).abs());
    }
    ensure(worst < 1e-12, || format!("weight error {worst:e}"))?;
    let eq = unitarily_equivalent(&t1, &mz, DEFAULT_DEPTH, 1e-12).unwrap();
    ensure(eq.equivalence == Equivalence::UnitarilyEquivalent, || {
        format!("T1 vs M_z: {:?}", eq.equivalence)
    })?;
    let ne = unitarily_equivalent(&t0, &t1, DEFAULT_DEPTH, 1e-12).unwrap();
    ensure(ne.equivalence != Equivalence::UnitarilyEquivalent, || {
        "T0 ≅ T1".into()
    })?;
    let y = similarity_intertwiner(&mz, &t0, DEFAULT_DEPTH).unwrap();
    ensure(y.equivalence == Equivalence::SimilarNotUnitary, || {
        format!("verdict {:?}", y.equivalence)
    })?;
    ensure(y.bounds.0 >= 0.7 && y.bounds.1 <= 1.0 + 1e-12, || {
        format!("bounds {:?}", y.bounds)
    })?;
    Ok(format!(
        "weights {worst:.1e}, intertwiner bounds [{:.4}, {:.4}]",
        y.bounds.0, y.bounds.1
    ))
}

fn criterion_4() -> Check {
    let b = KernelSpec::bergman();
    let mut worst: f64 = 0.0;
    for m in 1..=6u32 {
        let rep = reducing_curvatures(&b, m).map_err(|e| e.to_string())?;
        ensure(rep.verdict == LatticeVerdict::FiniteDiscrete, || {
            format!("m = {m}: {:?}", rep.verdict)
        })?;
        for k in 0..m {
            let got = rep.curvatures[k as usize];
            let formula = -f64::from(m + k + 1) / f64::from(k + 1);
            // a_1/a_0 = ‖z^k‖²/‖z^{m+k}‖² from Beta integrals
            let oracle = -bergman_norm2(0.0, k) / bergman_norm2(0.0, m + k);
            let shift = restriction_shift(&b, m, k, 400).unwrap();
            let g = RadialMetric::series(shift_kernel_metric(&shift, 400).unwrap()).unwrap();
            let (fd, _) =
                fd_line_curvature(&g, c(0.0, 0.0), 1e-3, true).map_err(|e| e.to_string())?;
            worst = worst.max(max_err([(got, formula), (got, oracle), (got, fd)]));
        }
        if m == 2 {
            ensure(
                max_err([(rep.curvatures[0], -3.0), (rep.curvatures[1], -2.0)]) < 1e-12,
                || format!("m = 2 gives {:?}", rep.curvatures),
            )?;
        }
    }
    ensure(worst < 1e-8, || format!("max error {worst:e}"))?;
    Ok(format!("max error {worst:.1e} for m ≤ 6"))
}

fn criterion_5() -> Check {
    let spec = KernelSpec::hardy_polydisk(2).unwrap();
    let o = [c(0.0, 0.0), c(0.0, 0.0)];
    for d in 3..=5 {
        let full = quotient_dim(&TruncatedModule::full(&spec, d).unwrap(), &o, 1)
            .map_err(|e| e.to_string())?;
        let v = vanishing_submodule(&spec, 2, d, &o).unwrap();
        let vanish = quotient_dim(&v, &o, 1).map_err(|e| e.to_string())?;
        ensure(full.dim == 1 && !full.approximate, || {
            format!("D = {d}: full {full:?}")
        })?;
        ensure(vanish.dim == 2 && !vanish.approximate, || {
            format!("D = {d}: vanishing {vanish:?}")
        })?;
    }
    Ok("dims 1 and 2 for D = 3, 4, 5".into())
}

fn criterion_6() -> Check {
    let disk = TruncatedModule::full(&KernelSpec::hardy_disk(), 9).unwrap();
    let f1 = hilbert_samuel(&disk, &[c(0.0, 0.0)], 8).map_err(|e| e.to_string())?;
    ensure(f1.degree == 1 && f1.poly_string() == "k", || {
        format!("disk fit {}", f1.poly_string())
    })?;
    let o = [c(0.0, 0.0), c(0.0, 0.0)];
    let bidisk = TruncatedModule::full(&KernelSpec::hardy_polydisk(2).unwrap(), 9).unwrap();
    let f2 = hilbert_samuel(&bidisk, &o, 8).map_err(|e| e.to_string())?;
    ensure(f2.degree == 2 && f2.poly_string() == "k*(k+1)/2", || {
        format!("bidisk fit {}", f2.poly_string())
    })?;
    for k in 1..=6u64 {
        let i = (k - 1) as usize;
        ensure(f1.dims[i] as u64 == lattice_count(1, k), || {
            format!("disk d_{k}")
        })?;
        ensure(f2.dims[i] as u64 == lattice_count(2, k), || {
            format!("bidisk d_{k}")
        })?;
        ensure(f2.eval(k as i128) == (f2.dims[i] as i128).into(), || {
            format!("h({k})")
        })?;
    }
    let doubled = bidisk.with_multiplicity(2).unwrap();
    let f3 = hilbert_samuel(&doubled, &o, 6).map_err(|e| e.to_string())?;
    ensure(
        f3.dims.iter().zip(&f2.dims).all(|(a, b)| *a == 2 * b),
        || "doubling".into(),
    )?;
    Ok(format!(
        "h = {}, {}; doubled {}",
        f1.poly_string(),
        f2.poly_string(),
        f3.poly_string()
    ))
}

fn criterion_7() -> Check {
    let zero = FiniteContraction::new(nalgebra::DMatrix::from_element(1, 1, c(0.0, 0.0))).unwrap();
    let z = c(0.37, 0.1);
    let s = char_function(&zero, z).unwrap();
    ensure(s.theta[(0, 0)] == z, || format!("Θ = {}", s.theta[(0, 0)]))?;
    let jordan = nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
    );
    let t = FiniteContraction::new(jordan).unwrap();
    let mut worst: f64 = 0.0;
    for w in polar_grid(0.9, 3, 3) {
        let det = char_function(&t, w).unwrap().abs_det.unwrap();
        worst = worst.max((det - w.norm_sqr()).abs());
    }
    ensure(worst < 1e-9, || format!("|det Θ| error {worst:e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0;
    for _ in 0..50 {
        let d = rng.gen_range(1..=6);
        let t = FiniteContraction::new(random_contraction(&mut rng, d)).unwrap();
        for _ in 0..20 {
            let s =
                char_function(&t, random_disk_point(&mut rng, 0.95)).map_err(|e| e.to_string())?;
            if power_norm(&s.theta) > 1.0 + 1e-8 {
                violations += 1;
            }
        }
    }
    ensure(violations == 0, || {
        format!("{violations} contractivity violations")
    })?;
    Ok(format!(
        "Jordan |det| error {worst:.1e}, 0 of 1000 contractivity violations"
    ))
}

fn criterion_8() -> Check {
    let mut worst: f64 = 0.0;
    for (alpha, beta) in [(0.0, 1.0), (0.5, 2.0), (1.0, 0.0)] {
        for w in polar_grid(0.95, 5, 4).into_iter().skip(1) {
            let q = quasi_similarity_ratio(alpha, beta, w).unwrap();
            let slope = q.ratio.ln() / (1.0 - w.norm_sqr()).ln();
            worst = worst.max((slope - (alpha - beta) / 2.0).abs());
            let want = if alpha < beta {
                Obstruction::NoNonzeroMap
            } else {
                Obstruction::Unobstructed
            };
            ensure(q.verdict == want, || {
                format!("(α, β) = ({alpha}, {beta}): {:?}", q.verdict)
            })?;
        }
    }
    ensure(worst < 1e-10, || format!("slope error {worst:e}"))?;
    Ok(format!("slope error {worst:.1e}"))
}

fn criterion_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    // frame-scaling invariance
    let opts = CurvatureOptions {
        step: 1e-2,
        ..Default::default()
    };
    let frame = power_frame(&KernelSpec::bergman(), 3).unwrap();
    let mut scaling: f64 = 0.0;
    for w in polar_grid(0.6, 1, 4) {
        let base =
            bundle_curvature_with(&frame, w, CurvatureMethod::FiniteDifference, &opts).unwrap();
        let d =
            random_complex_matrix(&mut rng, 3, 3) + nalgebra::DMatrix::identity(3, 3) * c(2.0, 0.0);
        let mixed = bundle_curvature_with(
            &frame.mixed(d).unwrap(),
            w,
            CurvatureMethod::FiniteDifference,
            &opts,
        )
        .map_err(|e| e.to_string())?;
        scaling = scaling.max(max_err(
            base.eigenvalues
                .iter()
                .copied()
                .zip(mixed.eigenvalues.iter().copied()),
        ));
    }
    ensure(scaling < 1e-9, || format!("frame scaling {scaling:e}"))?;

    // kernel positivity
    let families = [
        KernelSpec::hardy_disk(),
        KernelSpec::bergman(),
        KernelSpec::weighted_bergman(1.5).unwrap(),
    ];
    for spec in &families {
        let pts: Vec<PointInDomain> = (0..8)
            .map(|_| PointInDomain::new(vec![random_disk_point(&mut rng, 0.95)], 0.05).unwrap())
            .collect();
        let (ev, _) = hermitian_eigen(&kernel_gram(spec, &pts, 400).unwrap());
        ensure(ev[0] >= -1e-10 * ev[7], || {
            format!("Gram eigenvalue {}", ev[0])
        })?;
    }

    // Richardson order
    let g = RadialMetric::weighted_bergman(0.0).unwrap();
    for w in polar_grid(0.5, 1, 4) {
        let exact = closed_curvature(2.0, w.norm_sqr());
        let (coarse, _) = fd_line_curvature(&g, w, 0.04, false).unwrap();
        let (fine, _) = fd_line_curvature(&g, w, 0.02, false).unwrap();
        let ratio = (coarse - exact).abs() / (fine - exact).abs();
        ensure((3.5..=4.5).contains(&ratio), || {
            format!("Richardson ratio {ratio}")
        })?;
    }

    // orthogonal decomposition completeness
    let b = KernelSpec::bergman();
    for m in 1..=5u32 {
        for _ in 0..20 {
            let z = PointInDomain::disk(random_disk_point(&mut rng, 0.9)).unwrap();
            let w = PointInDomain::disk(random_disk_point(&mut rng, 0.9)).unwrap();
            let full = kernel_eval(&b, &z, &w, 1).unwrap().value;
            let (mut sum, mut tail) = (c(0.0, 0.0), 0.0);
            for k in 0..m {
                let part = subspace_kernel(&b, m, k, &z, &w, 600).unwrap();
                sum += part.value;
                tail += part.tail_bound;
            }
            ensure((sum - full).norm() <= tail + 1e-11 * full.norm(), || {
                format!("m = {m}: {sum} vs {full}")
            })?;
        }
    }

    // Drury–Arveson slices
    let da = KernelSpec::drury_arveson(2).unwrap();
    for l in 0..=4u32 {
        let slice = coordinate_slice_shift(&da, 0, &[0, l], 50).unwrap();
        let model = if l == 0 {
            restriction_shift(&KernelSpec::hardy_disk(), 1, 0, 50).unwrap()
        } else {
            restriction_shift(
                &KernelSpec::weighted_bergman(f64::from(l) - 1.0).unwrap(),
                1,
                0,
                50,
            )
            .unwrap()
        };
        let v = unitarily_equivalent(&slice, &model, 50, 1e-12).unwrap();
        ensure(v.equivalence == Equivalence::UnitarilyEquivalent, || {
            format!("slice ℓ = {l}")
        })?;
    }
    Ok(format!(
        "frame scaling {scaling:.1e}; positivity, Richardson, decomposition, slices ok"
    ))
}

#[test]
fn acceptance_criteria() {
    type Criterion = (u32, &'static str, u64, fn() -> Check);
    let criteria: [Criterion; 9] = [
        (
            1,
            "h-invariants of Hardy and weighted Bergman spaces",
            1,
            criterion_1,
        ),
        (
            2,
            "curvature matrix of the m = 2 power frame",
            5,
            criterion_2,
        ),
        (
            3,
            "restriction shift weights, equivalence and similarity",
            1,
            criterion_3,
        ),
        (4, "reducing curvatures of Bergman M_{z^m}", 2, criterion_4),
        (5, "bidisk quotient dimensions", 1, criterion_5),
        (6, "Hilbert-Samuel polynomials", 10, criterion_6),
        (7, "characteristic functions", 5, criterion_7),
        (8, "weighted Bergman norm-ratio obstruction", 1, criterion_8),
        (9, "property suites", 60, criterion_9),
    ];
    let mut failed = Vec::new();
    for (n, title, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(budget);
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {budget} s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        println!(
            "criterion {n} {status}: {title} ({:.3} s) {detail}",
            elapsed.as_secs_f64()
        );
        if status == "FAIL" {
            failed.push(n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
