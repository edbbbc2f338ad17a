mod common;

use common::{bergman_norm2, c, polar_grid};
use hilmod::kernel::kernel_gram;
use hilmod::numeric::hermitian_eigen;
use hilmod::{
    eigenvector_residual, kernel_eval, kernel_series, KernelSpec, PointInDomain, Polynomial, C64,
};
use proptest::prelude::*;

fn families() -> Vec<KernelSpec> {
    vec![
        KernelSpec::hardy_disk(),
        KernelSpec::bergman(),
        KernelSpec::weighted_bergman(1.5).unwrap(),
        KernelSpec::drury_arveson(2).unwrap(),
        KernelSpec::hardy_polydisk(2).unwrap(),
    ]
}

fn point_strategy(vars: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..std::f64::consts::TAU), vars)
}

/// Scales raw polar samples into the domain of `spec` with margin 0.05.
fn place(spec: &KernelSpec, raw: &[(f64, f64)]) -> PointInDomain {
    let n = raw.len() as f64;
    let coords: Vec<C64> = raw
        .iter()
        .map(|(rho, t)| {
            let scale = match spec.shape() {
                hilmod::DomainShape::Ball => 0.95 / n.sqrt(),
                _ => 0.95,
            };
            C64::from_polar(rho * scale, *t)
        })
        .collect();
    PointInDomain::new(coords, 0.05).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gram_matrices_are_positive(
        family in 0usize..5,
        raw in prop::collection::vec(point_strategy(2), 1..=8),
    ) {
        let spec = &families()[family];
        let points: Vec<PointInDomain> = raw
            .iter()
            .map(|r| place(spec, &r[..spec.vars()]))
            .collect();
        let g = kernel_gram(spec, &points, 400).unwrap();
        let (ev, _) = hermitian_eigen(&g);
        let top = ev.last().copied().unwrap();
        prop_assert!(ev[0] >= -1e-10 * top, "min eigenvalue {} vs top {}", ev[0], top);
    }

    #[test]
    fn evaluation_is_hermitian_bit_exact(
        family in 0usize..5,
        a in point_strategy(2),
        b in point_strategy(2),
    ) {
        let spec = &families()[family];
        let z = place(spec, &a[..spec.vars()]);
        let w = place(spec, &b[..spec.vars()]);
        let k1 = kernel_eval(spec, &z, &w, 400).unwrap().value;
        let k2 = kernel_eval(spec, &w, &z, 400).unwrap().value;
        prop_assert_eq!(k1.re.to_bits(), k2.re.to_bits());
        prop_assert_eq!(k1.im.to_bits(), (-k2.im).to_bits());
    }

    #[test]
    fn series_agrees_with_closed_form(
        family in 0usize..5,
        a in point_strategy(2),
        b in point_strategy(2),
    ) {
        let spec = &families()[family];
        let z = place(spec, &a[..spec.vars()]);
        let w = place(spec, &b[..spec.vars()]);
        let closed = kernel_eval(spec, &z, &w, 1).unwrap().value;
        let s = kernel_series(spec, &z, &w, 700, 1e-8).unwrap();
        let slack = s.tail_bound + 1e-11 * closed.norm().max(1.0);
        prop_assert!((s.value - closed).norm() <= slack,
            "{} vs {} (tail {})", s.value, closed, s.tail_bound);
    }
}

#[test]
fn weighted_bergman_series_matches_beta_integrals() {
    // K(z, w) = Σ s^n / ‖z^n‖² with the norms from Beta integrals
    for alpha in [0.0, 0.5, 2.0] {
        let spec = KernelSpec::weighted_bergman(alpha).unwrap();
        let z = PointInDomain::disk(c(0.5, 0.2)).unwrap();
        let w = PointInDomain::disk(c(-0.1, 0.6)).unwrap();
        let s = z.coords()[0] * w.coords()[0].conj();
        let oracle: C64 = (0..400).map(|n| s.powu(n) / bergman_norm2(alpha, n)).sum();
        let k = kernel_eval(&spec, &z, &w, 1).unwrap().value;
        assert!(
            (k - oracle).norm() < 1e-10 * oracle.norm(),
            "α = {alpha}: {k} vs {oracle}"
        );
    }
}

#[test]
fn eigenvector_residual_decays_in_truncation() {
    let delta = 0.05;
    let start = (2.0 / delta) as usize;
    for spec in [KernelSpec::hardy_disk(), KernelSpec::bergman()] {
        for w in polar_grid(0.94, 1, 4) {
            let p = PointInDomain::new(vec![w], delta).unwrap();
            let poly = Polynomial::monomial(2);
            let mut prev = f64::INFINITY;
            for n in (start..=start + 200).step_by(20) {
                let r = eigenvector_residual(&spec, &p, &poly, n).unwrap().residual;
                assert!(r <= prev * (1.0 + 1e-9) + 1e-15, "N = {n}: {r} > {prev}");
                prev = r;
            }
        }
    }
}

#[test]
fn hardy_eigenvector_example() {
    let spec = KernelSpec::hardy_disk();
    let w = c(0.3, 0.0);
    let chk = eigenvector_residual(
        &spec,
        &PointInDomain::disk(w).unwrap(),
        &Polynomial::monomial(2),
        40,
    )
    .unwrap();
    assert!(chk.residual < 1e-8);
    assert!((chk.rayleigh - (w * w).conj()).norm() < 1e-8);
}
