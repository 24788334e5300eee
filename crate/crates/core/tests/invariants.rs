//! Randomized structural invariants.

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use opweigh::constraint::gauge_rescale_family;
use opweigh::instances::{random_instance, InstanceShape};
use opweigh::oracle::{codeterminant, comatrix, det2};
use opweigh::spectral::{decompose_flux, fundamental_eigenpair, FluxPair};
use opweigh::{weight_scale, CombinedFamily, Instrument, SeriesBundle};

fn instance(seed: u64, dim: usize, general: bool) -> Instrument<f64> {
    let shape = if general { InstanceShape::general(dim) } else { InstanceShape::linear_remote(dim) };
    random_instance(&mut ChaCha8Rng::seed_from_u64(seed), shape)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn vec_rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1.0)
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn reciprocity(seed in any::<u64>(), dim in 2usize..=8, general in any::<bool>(), z in -0.3f64..0.3, eps in -0.2f64..0.2) {
        let inst = instance(seed, dim, general);
        let t = inst.family.eval(eps, z);
        if let Ok(fp) = FluxPair::solve(&t) {
            prop_assert!(rel(fp.gauge, fp.adjoint_gauge(&t.q)) <= 1e-10, "{} vs {}", fp.gauge, fp.adjoint_gauge(&t.q));
        }
    }

    #[test]
    fn closure_reconstruction(seed in any::<u64>(), dim in 2usize..=8, general in any::<bool>()) {
        let inst = instance(seed, dim, general);
        let bp = inst.balance_at(0.0).unwrap();
        let t = inst.family.base.eval(bp.z_bal);
        let sd = fundamental_eigenpair(&t.l).unwrap();
        let dec = decompose_flux(&t, &sd).unwrap();
        let rounding = 1e4 * f64::EPSILON * t.l.norm() * (1.0 + dec.omega.abs());
        prop_assert!(vec_rel(&dec.recomposed, &bp.flux_pair.flux) <= rounding);
        prop_assert!(rel(dec.sigma_from_gauge, sd.sigma) <= rounding);
        let split = &sd.phi * dec.amplitude + &dec.harmonic;
        prop_assert!(vec_rel(&split, &bp.flux_pair.flux) <= rounding);
    }

    #[test]
    fn gauge_scaling_invariance(seed in any::<u64>(), dim in 2usize..=6, general in any::<bool>(), alpha in prop_oneof![-4.0f64..-0.25, 0.25f64..4.0]) {
        let inst = instance(seed, dim, general);
        let (family, r0) = gauge_rescale_family(&inst.family, inst.r0, alpha).unwrap();
        let scaled = Instrument::new(family, r0, inst.bracket);
        let (a, b) = (inst.series(6).unwrap(), scaled.series(6).unwrap());
        for n in 0..=6 {
            prop_assert!(rel(a.z.coeff(n), b.z.coeff(n)) <= 1e-10);
            prop_assert!(vec_rel(a.flux.coeff(n), b.flux.coeff(n)) <= 1e-10);
            prop_assert!(vec_rel(&(a.adjoint_flux.coeff(n) * alpha), b.adjoint_flux.coeff(n)) <= 1e-10);
        }
        let (wa, wb) = (weight_scale(&a, 6).unwrap(), weight_scale(&b, 6).unwrap());
        for (x, y) in wa.coeffs().iter().zip(wb.coeffs()) {
            prop_assert!(rel(*x, *y) <= 1e-10);
        }
    }

    #[test]
    fn homogeneity(seed in any::<u64>(), dim in 2usize..=6, general in any::<bool>(), alpha in prop_oneof![-2.0f64..-0.5, 0.5f64..2.0]) {
        let inst = instance(seed, dim, general);
        let family = CombinedFamily::new(inst.family.base.clone(), inst.family.pert.scaled(alpha)).unwrap();
        let scaled = Instrument::new(family, inst.r0, inst.bracket);
        let order = 6;
        let (a, b): (SeriesBundle<f64>, SeriesBundle<f64>) = (inst.series(order).unwrap(), scaled.series(order).unwrap());
        let (wa, wb) = (weight_scale(&a, order).unwrap(), weight_scale(&b, order).unwrap());
        let zscale = a.z.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
        for n in 1..=order {
            let an = alpha.powi(n as i32);
            prop_assert!((a.z.coeff(n) * an - b.z.coeff(n)).abs() <= 1e-10 * zscale * an.abs().max(1.0), "z order {}", n);
            prop_assert!(vec_rel(&(a.flux.coeff(n) * an), b.flux.coeff(n)) <= 1e-10 * an.abs().max(1.0));
            prop_assert!(vec_rel(&(a.adjoint_flux.coeff(n) * an), b.adjoint_flux.coeff(n)) <= 1e-10 * an.abs().max(1.0));
        }
        let wscale = wa.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
        for n in 0..=order {
            let an = alpha.powi(n as i32 + 1);
            prop_assert!((wa.coeffs()[n] * an - wb.coeffs()[n]).abs() <= 1e-10 * wscale * an.abs().max(1.0), "weight order {}", n);
        }
    }

    #[test]
    fn comatrix_identities_float(entries in prop::collection::vec(-1.0f64..1.0, 12)) {
        let m = |k: usize| DMatrix::from_row_slice(2, 2, &entries[4 * k..4 * k + 4]);
        let (a, b, c) = (m(0), m(1), m(2));
        let (abar, det) = (comatrix(&a).unwrap(), det2(&a).unwrap());
        let tol = 1e-12;
        prop_assert!((&abar * &a - DMatrix::identity(2, 2) * det).amax() <= tol);
        prop_assert!((&a * &abar - DMatrix::identity(2, 2) * det).amax() <= tol);
        prop_assert!((comatrix(&abar).unwrap() - &a).amax() <= tol);
        prop_assert!((codeterminant(&a, &a).unwrap() - 2.0 * det).abs() <= tol);
        prop_assert!((codeterminant(&a, &b).unwrap() - codeterminant(&b, &a).unwrap()).abs() <= tol);
        let sum = det2(&(&a + &b)).unwrap() - det - det2(&b).unwrap();
        prop_assert!((codeterminant(&a, &b).unwrap() - sum).abs() <= tol);
        let lhs = &abar * &c * &abar;
        let rhs = &abar * codeterminant(&c, &a).unwrap() - comatrix(&c).unwrap() * det;
        prop_assert!((lhs - rhs).amax() <= tol);
        let a0 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -1.0]);
        let (a0bar, bbar, cbar) = (comatrix(&a0).unwrap(), comatrix(&b).unwrap(), comatrix(&c).unwrap());
        let lhs = &a0bar * &c * &bbar + &bbar * &c * &a0bar;
        let rhs = &a0bar * codeterminant(&c, &b).unwrap() + &cbar * b[(0, 0)] - &bbar * c[(0, 0)];
        prop_assert!((lhs - rhs).amax() <= tol);
    }

    #[test]
    fn comatrix_identities_exact(entries in prop::collection::vec((-20i64..=20, 1i64..=9), 12)) {
        let r: Vec<Rational64> = entries.iter().map(|&(n, d)| Rational64::new(n, d)).collect();
        let m = |k: usize| DMatrix::from_row_slice(2, 2, &r[4 * k..4 * k + 4]);
        let (a, b, c) = (m(0), m(1), m(2));
        let (abar, det) = (comatrix(&a).unwrap(), det2(&a).unwrap());
        prop_assert_eq!(&abar * &a, DMatrix::identity(2, 2) * det);
        prop_assert_eq!(comatrix(&abar).unwrap(), a.clone());
        prop_assert_eq!(codeterminant(&a, &a).unwrap(), det * Rational64::from_integer(2));
        prop_assert_eq!(&abar * &c * &abar, &abar * codeterminant(&c, &a).unwrap() - comatrix(&c).unwrap() * det);
        let sum = det2(&(&a + &b)).unwrap() - det - det2(&b).unwrap();
        prop_assert_eq!(codeterminant(&a, &b).unwrap(), sum);
    }
}
