//! Cross-module invariants under random inputs.

use freqext::extrapolation::{extrapolate, reconstruct_space_box};
use freqext::family::sinc;
use freqext::gram::approximation_error;
use freqext::{
    gram_matrix, make_translates, project_spectral, tensor_rule, FrequencyDomain, FunctionFamily, GridField,
    GridGeometry, HermitianMatrix, LowSource, MemberSpec, SigmaMultiplier, SpectralSet,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn hermitian(entries: &[f64]) -> HermitianMatrix {
    let a = DMatrix::from_fn(3, 3, |i, j| Complex64::new(entries[3 * i + j], entries[9 + 3 * i + j]));
    HermitianMatrix::symmetrized(&a + a.adjoint())
}

/// Unitary from the QR factor of a random complex matrix.
fn unitary(entries: &[f64]) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(3, 3, |i, j| Complex64::new(entries[3 * i + j], entries[9 + 3 * i + j]));
    a.qr().q()
}

fn sets() -> impl Strategy<Value = SpectralSet> {
    prop_oneof![
        (0.1..3.0f64).prop_map(|radius| SpectralSet::NuclearBall { radius }),
        (0.1..3.0f64).prop_map(|radius| SpectralSet::OperatorBall { radius }),
        (0.1..3.0f64).prop_map(|cap| SpectralSet::TraceCap { cap }),
    ]
}

fn entries() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 18)
}

fn domains() -> impl Strategy<Value = FrequencyDomain> {
    prop_oneof![
        (0.2..2.0f64).prop_map(|h| FrequencyDomain::cube(2, h).unwrap()),
        (0.2..2.0f64).prop_map(|r| FrequencyDomain::ball(2, r).unwrap()),
        (0.1..1.0f64, 1.1..2.0f64).prop_map(|(a, b)| FrequencyDomain::annulus(2, a, b).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn domain_membership_dilates_and_is_symmetric(d in domains(), x in -3.0..3.0f64, y in -3.0..3.0f64, alpha in 1.1..4.0f64) {
        let dd = d.dilate(alpha).unwrap();
        let inside = d.contains(&[x, y]).unwrap();
        prop_assert_eq!(dd.contains(&[alpha * x, alpha * y]).unwrap(), inside);
        prop_assert_eq!(d.contains(&[-x, -y]).unwrap(), inside);
        if inside {
            let (lo, hi) = d.bounding_box();
            prop_assert!(lo[0] <= x && x <= hi[0] && lo[1] <= y && y <= hi[1]);
        }
    }

    #[test]
    fn projection_is_unitarily_equivariant(w in sets(), x in entries(), q in entries()) {
        let x = hermitian(&x);
        let q = unitary(&q);
        let lhs = project_spectral(&w, &x.conjugated_by(&q)).unwrap();
        let rhs = project_spectral(&w, &x).unwrap().conjugated_by(&q);
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-8);
    }

    #[test]
    fn projection_is_nonexpansive_and_idempotent(w in sets(), x in entries(), y in entries()) {
        let (x, y) = (hermitian(&x), hermitian(&y));
        let (px, py) = (project_spectral(&w, &x).unwrap(), project_spectral(&w, &y).unwrap());
        prop_assert!(px.distance(&py).unwrap() <= x.distance(&y).unwrap() + 1e-10);
        prop_assert!(project_spectral(&w, &px).unwrap().distance(&px).unwrap() <= 1e-10);
    }

    #[test]
    fn projection_never_flips_signs(r in 0.1..3.0f64, v in prop::collection::vec(-3.0..3.0f64, 1..8)) {
        // a coordinate may be thresholded to 0, but never changes sign
        for w in [SpectralSet::NuclearBall { radius: r }, SpectralSet::OperatorBall { radius: r }] {
            let p = w.project_vector(&v);
            for (pi, vi) in p.iter().zip(&v) {
                prop_assert!(*pi * *vi >= 0.0);
                prop_assert!(*pi >= 0.0 || *vi < 0.0);
                prop_assert!(*pi <= 0.0 || *vi > 0.0);
            }
        }
    }

    #[test]
    fn multiplier_is_scale_invariant(c in 0.01..100.0f64, x in entries(), xi in -0.5..0.5f64) {
        let family = make_translates(MemberSpec::sinc_power(2, 1), &[vec![0.3], vec![0.7]]).unwrap();
        let a = DMatrix::from_fn(3, 3, |i, j| Complex64::new(x[3 * i + j], x[9 + 3 * i + j]));
        let sigma = HermitianMatrix::symmetrized(&a * a.adjoint());
        let m = SigmaMultiplier::new(family.clone(), 2.0, sigma.clone(), 0.0).unwrap();
        let mc = SigmaMultiplier::new(family, 2.0, sigma.scale(c), 0.0).unwrap();
        prop_assert!((m.eval(&[xi]) - mc.eval(&[xi])).norm() <= 1e-10 * (1.0 + m.eval(&[xi]).norm()));
    }

    #[test]
    fn rank_one_sigma_recovers_the_member_multiplier(xi in -0.49..0.49f64, alpha in 1.5..3.0f64) {
        let family = make_translates(MemberSpec::sinc_power(2, 1), &[vec![0.25]]).unwrap();
        let m = SigmaMultiplier::new(family, alpha, HermitianMatrix::from_real_diagonal(&[1.0, 0.0]), 0.0).unwrap();
        let mf = sinc(alpha * xi).powi(2) / sinc(xi).powi(2);
        prop_assert!((m.eval(&[xi]) - mf).norm() <= 1e-10);
    }

    #[test]
    fn translate_phase_law(x0 in -2.0..2.0f64, xi in -3.0..3.0f64) {
        let base = MemberSpec::sinc_power(2, 1);
        let family = make_translates(base.clone(), &[vec![x0]]).unwrap();
        let f = family.eval(&[xi]);
        let restored = f[1] * Complex64::from_polar(1.0, 2.0 * PI * xi * x0);
        prop_assert!((restored - base.eval(&[xi])).norm() <= 1e-14);
        prop_assert_eq!(family.eval_dilated(2.0, &[xi]), family.eval(&[2.0 * xi]));
    }

    #[test]
    fn approximation_error_is_nonnegative(c in prop::collection::vec(-1.0..1.0f64, 4)) {
        let family = make_translates(MemberSpec::sinc_power(2, 1), &[vec![0.2]]).unwrap();
        let omega0 = FrequencyDomain::cube(1, 0.5).unwrap();
        let m = SigmaMultiplier::trace(family.clone(), 2.0).unwrap();
        let g = gram_matrix(&family, 2.0, &m, &tensor_rule(&omega0, 128).unwrap()).unwrap().g;
        let c = [Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3])];
        prop_assert!(approximation_error(&c, &g).unwrap() >= 0.0);
    }

    #[test]
    fn extrapolation_is_linear(a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let family = make_translates(MemberSpec::sinc_power(2, 1), &[vec![0.3]]).unwrap();
        let omega0 = FrequencyDomain::cube(1, 0.5).unwrap();
        let m = SigmaMultiplier::trace(family.clone(), 2.0).unwrap();
        let target = GridGeometry::symmetric(1, 65, 1.0).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let run = |c: Vec<Complex64>| extrapolate(&m, &LowSource::exact(family.clone(), c).unwrap(), 2.0, &omega0, &target).unwrap();
        let e1 = run(vec![one, zero]);
        let e2 = run(vec![zero, one]);
        let both = run(vec![one * a, one * b]);
        let mixed = e1.combine(a, &e2, b).unwrap();
        let gap = both.values.iter().zip(&mixed.values).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        prop_assert!(gap <= 1e-12);
    }
}

#[test]
fn small_negative_coordinates_are_thresholded_to_zero() {
    let p = SpectralSet::NuclearBall { radius: 1.0 }.project_vector(&[3.0, -0.1]);
    assert_eq!(p, vec![1.0, 0.0]);
}

#[test]
fn extrapolation_keeps_the_known_data() {
    let family = FunctionFamily::new(vec![MemberSpec::sinc_power(2, 1)]).unwrap();
    let omega0 = FrequencyDomain::cube(1, 0.5).unwrap();
    let m = SigmaMultiplier::trace(family.clone(), 2.0).unwrap();
    let target = GridGeometry::symmetric(1, 129, 1.0).unwrap();
    let low = LowSource::exact(family.clone(), vec![Complex64::new(1.0, 0.0)]).unwrap();
    let pred = extrapolate(&m, &low, 2.0, &omega0, &target).unwrap();
    for i in 0..target.len() {
        let xi = target.node(i);
        if omega0.contains(&xi).unwrap() {
            assert!((pred.values[i] - family.eval(&xi)[0]).norm() < 1e-15);
        }
    }
}

#[test]
fn synthesis_at_zero_is_the_weighted_sum() {
    let g = GridGeometry::symmetric(1, 101, 2.0).unwrap();
    let f = GridField::from_fn(g.clone(), |xi| Complex64::new(sinc(xi[0]).powi(2), 0.3 * xi[0]));
    let u = reconstruct_space_box(&f, &[0.0], &[1.0], &[4]).unwrap();
    let sum: Complex64 = f.values.iter().sum::<Complex64>() * g.cell_volume();
    assert!((u.values[0] - sum).norm() < 1e-12);
}
