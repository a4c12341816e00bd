use proptest::prelude::*;

use da_thermo::decomposition::{chi_sequence, decompose, decompose_seq, in_g_seq, sample_g_segments, OrbitSegment};
use da_thermo::hp::{self, Fixed, Real};
use da_thermo::mane::{estimate_center_stable, DAMap};
use da_thermo::torus::{dist, reduce};

fn demo() -> &'static DAMap {
    static MAP: std::sync::OnceLock<DAMap> = std::sync::OnceLock::new();
    MAP.get_or_init(DAMap::demo_mane)
}

proptest! {
    #[test]
    fn decomposition_is_maximal(chis in prop::collection::vec(0u8..=1, 0..40), r in 0.01f64..0.99) {
        let d = decompose_seq(&chis, r);
        prop_assert_eq!(d.p + d.g + d.s, chis.len());
        prop_assert!(in_g_seq(&chis[d.p..], r));
        if d.p >= 1 {
            prop_assert!(f64::from(d.chi_prefix[d.p]) < d.p as f64 * r);
        }
        // No longer prefix is bad.
        for p in d.p + 1..=chis.len() {
            prop_assert!(f64::from(d.chi_prefix[p]) >= p as f64 * r);
        }
    }

    #[test]
    fn chi_sums_are_additive(x in prop::collection::vec(0.0f64..1.0, 3), p in 1usize..30, k in 1usize..30) {
        let m = demo();
        let (q, rho) = (m.q().unwrap(), 0.2);
        let whole: u32 = chi_sequence(m, q, rho, &x, p + k).iter().map(|&c| u32::from(c)).sum();
        let orbit = m.orbit(&x, p + 1);
        let gp = &orbit[p * 3..p * 3 + 3];
        let head: u32 = chi_sequence(m, q, rho, &x, p).iter().map(|&c| u32::from(c)).sum();
        let tail: u32 = chi_sequence(m, q, rho, gp, k).iter().map(|&c| u32::from(c)).sum();
        prop_assert_eq!(whole, head + tail);
    }

    #[test]
    fn map_decomposition_sums_to_length(x in prop::collection::vec(0.0f64..1.0, 3), n in 1usize..40) {
        let m = demo();
        let seg = OrbitSegment::new(reduce(&x).unwrap(), n);
        let d = decompose(m, m.q().unwrap(), m.rho().unwrap(), 0.3, &seg).unwrap();
        prop_assert_eq!(d.p + d.g + d.s, n);
        prop_assert!(d.suffix_in_g);
    }
}

/// Center-stable disks of good segments stay inside the doubled Bowen ball.
///
/// An `f64` offset carries a rounding component along `E^u` that grows like
/// `λ_u^k`, so the disk is built from the fixed-point `F^{cs}` eigenvectors
/// (which the estimated `E^{cs}` matches) and iterated in fixed point.
#[test]
fn center_stable_disks_lie_in_bowen_balls() {
    let m = demo();
    let (q, rho) = (m.q().unwrap().to_vec(), m.rho().unwrap());
    let delta = 0.45 * rho;
    let eig = m.eigen_hp();
    let sp = &m.base.spectral;
    let iu = sp.index_u();
    let cs: Vec<Vec<Fixed>> = (0..3)
        .filter(|&i| i != iu)
        .map(|i| {
            let v = &eig.vectors[i];
            let n = hp::dot(v, v).sqrt();
            v.iter().map(|c| c.clone() / n.clone()).collect()
        })
        .collect();
    let segs = sample_g_segments(m, &q, rho, 0.1, 25, 200, 21).unwrap();
    let mut worst = 0.0f64;
    for (i, s) in segs.iter().enumerate() {
        let basis = estimate_center_stable(m, s.x.coords(), 30).unwrap();
        // The estimated plane has no component along the dual of E^u.
        for c in 0..2 {
            let along_u: f64 = (0..3).map(|j| basis[(j, c)] * sp.dual_u()[j]).sum();
            assert!(along_u.abs() < 1e-9);
        }
        let x: Vec<Fixed> = hp::to_real_vec(s.x.coords());
        let ang = i as f64 * 0.37;
        let (a, b) = (Fixed::from_f64(delta * ang.cos()), Fixed::from_f64(delta * ang.sin()));
        let mut y: Vec<Fixed> =
            (0..3).map(|j| x[j].clone() + a.clone() * cs[0][j].clone() + b.clone() * cs[1][j].clone()).collect();
        let mut xk = x;
        for k in 0..s.n {
            if k > 0 {
                xk = m.eval_hp(&xk).unwrap();
                y = m.eval_hp(&y).unwrap();
            }
            let d = dist(&hp::to_f64_vec(&xk), &hp::to_f64_vec(&y));
            worst = worst.max(d / (2.0 * delta));
        }
    }
    assert!(worst <= 1.0, "max d_n / 2δ = {worst}");
}
