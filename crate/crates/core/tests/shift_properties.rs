mod common;

use common::{c, random_disk_point};
use hilmod::shift::DEFAULT_DEPTH;
use hilmod::{
    coordinate_slice_shift, kernel_eval, restriction_shift, similarity_intertwiner,
    subspace_kernel, unitarily_equivalent, Equivalence, KernelSpec, PointInDomain, ShiftDescriptor,
    WeightedShift,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn catalogue() -> Vec<WeightedShift> {
    let b = KernelSpec::bergman();
    let mut out = vec![
        restriction_shift(&KernelSpec::hardy_disk(), 1, 0, DEFAULT_DEPTH).unwrap(),
        restriction_shift(&b, 1, 0, DEFAULT_DEPTH).unwrap(),
    ];
    for m in 2..=3 {
        for k in 0..m {
            out.push(restriction_shift(&b, m, k, DEFAULT_DEPTH).unwrap());
        }
    }
    out.push(
        ShiftDescriptor::BergmanPower {
            m: 2,
            k: 0,
            alpha: 1.0,
        }
        .build(DEFAULT_DEPTH)
        .unwrap(),
    );
    out
}

#[test]
fn equivalence_implies_unit_intertwiner() {
    let shifts = catalogue();
    for a in &shifts {
        for b in &shifts {
            let v = unitarily_equivalent(a, b, DEFAULT_DEPTH, 1e-12).unwrap();
            if v.equivalence == Equivalence::UnitarilyEquivalent {
                let y = similarity_intertwiner(a, b, DEFAULT_DEPTH).unwrap();
                assert!(y.coefficients.iter().all(|c| (c - 1.0).abs() < 1e-12));
            }
        }
    }
}

#[test]
fn intertwiners_compose() {
    let shifts = catalogue();
    for a in &shifts {
        for b in &shifts {
            for t in &shifts {
                let ab = similarity_intertwiner(a, b, 256).unwrap().coefficients;
                let bt = similarity_intertwiner(b, t, 256).unwrap().coefficients;
                let at = similarity_intertwiner(a, t, 256).unwrap().coefficients;
                for l in 0..256 {
                    let composed = ab[l] * bt[l];
                    assert!((composed - at[l]).abs() <= 1e-12 * at[l].abs(), "ℓ = {l}");
                }
            }
        }
    }
}

#[test]
fn subspace_kernels_sum_to_bergman_kernel() {
    let spec = KernelSpec::bergman();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in 1..=5u32 {
        for _ in 0..20 {
            let z = PointInDomain::disk(random_disk_point(&mut rng, 0.9)).unwrap();
            let w = PointInDomain::disk(random_disk_point(&mut rng, 0.9)).unwrap();
            let full = kernel_eval(&spec, &z, &w, 1).unwrap().value;
            let mut sum = c(0.0, 0.0);
            let mut tails = 0.0;
            for k in 0..m {
                let part = subspace_kernel(&spec, m, k, &z, &w, 600).unwrap();
                sum += part.value;
                tails += part.tail_bound;
            }
            assert!(
                (sum - full).norm() <= tails + 1e-11 * full.norm(),
                "m = {m}: {sum} vs {full}"
            );
        }
    }
}

#[test]
fn drury_arveson_slices_are_weighted_bergman_shifts() {
    let da = KernelSpec::drury_arveson(2).unwrap();
    for l in 0..=4u32 {
        let slice = coordinate_slice_shift(&da, 0, &[0, l], 50).unwrap();
        for a in 0..50usize {
            let expected = ((a as f64 + 1.0) / (a as f64 + f64::from(l) + 1.0)).sqrt();
            let got = slice.weight(a).unwrap();
            assert!((got - expected).abs() < 1e-12, "ℓ = {l}, a = {a}");
        }
        let model = if l == 0 {
            restriction_shift(&KernelSpec::hardy_disk(), 1, 0, 50).unwrap()
        } else {
            let spec = KernelSpec::weighted_bergman(f64::from(l) - 1.0).unwrap();
            restriction_shift(&spec, 1, 0, 50).unwrap()
        };
        let v = unitarily_equivalent(&slice, &model, 50, 1e-12).unwrap();
        assert_eq!(v.equivalence, Equivalence::UnitarilyEquivalent);
    }
}

#[test]
fn last_residue_class_recovers_bergman_shift() {
    let b = KernelSpec::bergman();
    let mz = restriction_shift(&b, 1, 0, DEFAULT_DEPTH).unwrap();
    for m in 1..=6 {
        let s = restriction_shift(&b, m, m - 1, DEFAULT_DEPTH).unwrap();
        for l in 0..DEFAULT_DEPTH {
            let want = ((l as f64 + 1.0) / (l as f64 + 2.0)).sqrt();
            assert!((s.weight(l).unwrap() - want).abs() < 1e-12);
            assert!((mz.weight(l).unwrap() - want).abs() < 1e-12);
        }
        let v = unitarily_equivalent(&s, &mz, DEFAULT_DEPTH, 1e-12).unwrap();
        assert_eq!(v.equivalence, Equivalence::UnitarilyEquivalent);
    }
}

#[test]
fn csv_round_trip() {
    let s = restriction_shift(&KernelSpec::bergman(), 2, 0, 16).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let back = WeightedShift::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.weights(), s.weights());
}
