use proptest::prelude::*;

use da_thermo::srb::Histogram;
use da_thermo::torus::{dist, reduce, ToralAutomorphism};

fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, d)
}

proptest! {
    #[test]
    fn reduce_is_idempotent(x in point(3)) {
        let once = reduce(&x).unwrap();
        let twice = reduce(once.coords()).unwrap();
        prop_assert_eq!(once.coords(), twice.coords());
        prop_assert!(once.coords().iter().all(|c| (0.0..1.0).contains(c)));
    }

    #[test]
    fn distance_is_a_bounded_metric(x in point(3), y in point(3), z in point(3)) {
        let (dxy, dyz, dxz) = (dist(&x, &y), dist(&y, &z), dist(&x, &z));
        prop_assert!(dxz <= dxy + dyz + 1e-12);
        prop_assert!((dxy - dist(&y, &x)).abs() < 1e-15);
        prop_assert!(dxy <= 3f64.sqrt() / 2.0 + 1e-15);
    }

    #[test]
    fn distance_ignores_integer_translates(x in point(4), k in prop::collection::vec(-3i32..3, 4)) {
        let y: Vec<f64> = x.iter().zip(&k).map(|(a, b)| a + f64::from(*b)).collect();
        prop_assert!(dist(&x, &y) < 1e-12);
    }
}

#[test]
fn biorthogonal_expansion_reconstructs_matrix() {
    let a = ToralAutomorphism::demo();
    let rec = a.spectral.reconstruct();
    for (row, want) in rec.iter().zip(&a.matrix) {
        for (r, w) in row.iter().zip(want) {
            assert!((r - *w as f64).abs() < 1e-8);
        }
    }
}

#[test]
fn automorphism_preserves_lebesgue() {
    use rand::{Rng, SeedableRng};
    let a = ToralAutomorphism::demo();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let mut h = Histogram::new(8, 3);
    let mut y = [0.0; 3];
    for _ in 0..200_000 {
        let x: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
        a.apply_into(&x, &mut y);
        let c = h.cell(&y);
        h.counts[c] += 1;
    }
    let (_, p) = h.chi_square_uniform();
    assert!(p > 1e-3, "pushed-forward sample fails uniformity: p = {p}");
}
