mod common;

use common::{c, lattice_count};
use hilmod::localization::fit_polynomial;
use hilmod::{hilbert_samuel, quotient_dim, vanishing_submodule, KernelSpec, TruncatedModule, C64};

fn origin(n: usize) -> Vec<C64> {
    vec![c(0.0, 0.0); n]
}

fn spaces() -> Vec<KernelSpec> {
    vec![
        KernelSpec::hardy_disk(),
        KernelSpec::bergman(),
        KernelSpec::hardy_polydisk(2).unwrap(),
        KernelSpec::drury_arveson(2).unwrap(),
        KernelSpec::hardy_polydisk(3).unwrap(),
    ]
}

#[test]
fn origin_counts_do_not_depend_on_truncation() {
    for spec in spaces() {
        let n = spec.vars();
        for k in 1..=3u32 {
            let mut full = Vec::new();
            let mut vanish = Vec::new();
            for d in [k + 1, k + 3] {
                let m = TruncatedModule::full(&spec, d).unwrap();
                full.push(quotient_dim(&m, &origin(n), k).unwrap().dim);
                let v = vanishing_submodule(&spec, n, d, &origin(n)).unwrap();
                vanish.push(quotient_dim(&v, &origin(n), k).unwrap().dim);
            }
            assert_eq!(full[0], full[1]);
            assert_eq!(vanish[0], vanish[1]);
            assert_eq!(full[0] as u64, lattice_count(n as u64, u64::from(k)));
        }
    }
}

#[test]
fn dims_grow_with_polynomial_differences() {
    for spec in spaces() {
        let n = spec.vars();
        let m = TruncatedModule::full(&spec, 8).unwrap();
        let fit = hilbert_samuel(&m, &origin(n), 7).unwrap();
        assert!(fit.dims.windows(2).all(|w| w[0] <= w[1]));
        let diffs: Vec<usize> = fit.dims.windows(2).map(|w| w[1] - w[0]).collect();
        let (coeffs, _) = fit_polynomial(&diffs).unwrap();
        assert_eq!(coeffs.len(), n, "first differences have degree n − 1");
    }
}

#[test]
fn multiplicity_scales_every_dimension() {
    for spec in spaces().into_iter().take(4) {
        let n = spec.vars();
        let one = TruncatedModule::full(&spec, 6).unwrap();
        let base = hilbert_samuel(&one, &origin(n), 5).unwrap();
        for mult in [2usize, 3] {
            let many = one.clone().with_multiplicity(mult).unwrap();
            let fit = hilbert_samuel(&many, &origin(n), 5).unwrap();
            for (a, b) in base.dims.iter().zip(&fit.dims) {
                assert_eq!(a * mult, *b);
            }
        }
    }
}

#[test]
fn hilbert_samuel_degree_is_dimension() {
    for n in 1..=3usize {
        let spec = if n == 1 {
            KernelSpec::hardy_disk()
        } else {
            KernelSpec::hardy_polydisk(n).unwrap()
        };
        let m = TruncatedModule::full(&spec, 7).unwrap();
        let fit = hilbert_samuel(&m, &origin(n), 6).unwrap();
        assert_eq!(fit.degree, n);
        for (i, d) in fit.dims.iter().enumerate() {
            let k = i as u64 + 1;
            assert_eq!(*d as u64, lattice_count(n as u64, k));
            assert_eq!(fit.eval(k as i128), (*d as i128).into());
        }
    }
}

#[test]
fn vanishing_module_adds_one_generator_direction() {
    // [I^k·H²₀] = span{z^α : |α| ≥ k+1}, so the quotient is {1 ≤ |α| ≤ k}
    let spec = KernelSpec::hardy_polydisk(2).unwrap();
    let v = vanishing_submodule(&spec, 2, 8, &origin(2)).unwrap();
    for k in 1..=5u32 {
        let q = quotient_dim(&v, &origin(2), k).unwrap().dim as u64;
        assert_eq!(q, lattice_count(2, u64::from(k) + 1) - 1);
    }
}

#[test]
fn off_origin_agrees_with_origin_for_disk() {
    // translation is exact for a single variable on finite truncations
    let m = TruncatedModule::full(&KernelSpec::hardy_disk(), 10).unwrap();
    for k in 1..=4u32 {
        let q = quotient_dim(&m, &[c(0.25, -0.1)], k).unwrap();
        assert_eq!(q.dim, k as usize);
        assert!(q.approximate);
    }
}
