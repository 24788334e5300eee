//! Self-check suite behind `opweigh verify`: consistency checks on one
//! instrument, and the closed-form oracles on built-in instruments.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::family::{CombinedFamily, GaugeReference, PolyMatrix, PolyVector, SystemParams};
use crate::instances::{random_instance, InstanceShape};
use crate::oracle::{brute_force_oracle, chebyshev_grid, codeterminant, comatrix, det2, one_d_oracle, TwoDInstance};
use crate::series::{bilinear_series, first_order_flux, first_order_z, second_order_z, Derivation, SeriesBundle};
use crate::weighing::{differential_weight, weighing_integral, weight_scale, Instrument, DEFAULT_QUAD_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn run(name: impl Into<String>, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let (passed, detail) = f().unwrap_or_else(|e| (false, e.to_string()));
    Check { name: name.into(), passed, detail }
}

fn within(value: f64, tol: f64) -> (bool, String) {
    (value <= tol, format!("{value:.2e} (tol {tol:.0e})"))
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Worst scale-normalized deviation of coefficients `0..=4` of `z̲` and
/// of each flux component from a brute-force fit.
pub fn brute_force_deviation(inst: &Instrument<f64>, bundle: &SeriesBundle<f64>, half_width: f64) -> Result<f64> {
    let fit = brute_force_oracle(inst, &chebyshev_grid(half_width, 25), 16)?;
    let mut columns: Vec<(Vec<f64>, Vec<f64>)> = vec![((0..=4).map(|k| bundle.z.coeff(k)).collect(), fit.z[..=4].to_vec())];
    for c in 0..inst.family.dim() {
        columns.push(((0..=4).map(|k| bundle.flux.coeff(k)[c]).collect(), (0..=4).map(|k| fit.flux[k][c]).collect()));
    }
    Ok(columns.iter().fold(0.0, |worst, (s, b)| {
        let scale = max_abs(s.iter().copied()).max(f64::MIN_POSITIVE);
        s.iter().zip(b).fold(worst, |w, (x, y)| w.max((x - y).abs() / scale))
    }))
}

/// Consistency checks on one instrument, with series to `order`.
pub fn instrument_checks(label: &str, inst: &Instrument<f64>, order: usize) -> Vec<Check> {
    let mut out = Vec::new();
    let name = |s: &str| format!("{label}: {s}");
    let bundle = match inst.series(order.max(4)) {
        Ok(b) => b,
        Err(e) => {
            out.push(Check { name: name("series"), passed: false, detail: e.to_string() });
            return out;
        }
    };
    let r = &bundle.reference;
    out.push(run(name("balance residual"), || {
        Ok(within(inst.balance_at(0.0)?.r_residual, 1e-12))
    }));
    out.push(run(name("differential observability"), || {
        let bp = inst.balance_at(0.0)?;
        let dw = differential_weight(&inst.family.base, inst.r0, &bp)?;
        Ok(within((dw.bracket - dw.finite_difference).abs() / dw.bracket.abs(), 1e-6))
    }));
    out.push(run(name("adjoint recursion control"), || {
        let scale = max_abs(bundle.z.coeffs().iter().copied()).max(1.0);
        let d = max_abs(bundle.z.coeffs().iter().zip(bundle.adjoint_z.coeffs()).map(|(a, b)| a - b));
        Ok(within(d / scale, 1e-10))
    }));
    out.push(run(name("closed forms"), || {
        let d = (first_order_z(r) - bundle.z.coeff(1))
            .abs()
            .max((second_order_z(r)? - bundle.z.coeff(2)).abs())
            .max((first_order_flux(r)? - bundle.flux.coeff(1)).amax());
        Ok(within(d, 1e-10))
    }));
    out.push(run(name("identity bracket series"), || {
        let s = bilinear_series(Derivation::Identity, &bundle, bundle.order())?;
        let d = max_abs(s.coeffs().iter().enumerate().map(|(n, c)| if n == 0 { c / r.gauge - 1.0 } else { c / r.gauge }));
        Ok(within(d, 1e-10))
    }));
    out.push(run(name("weight scale"), || {
        let ws = weight_scale(&bundle, bundle.order())?;
        Ok((true, format!("<dT>_0 = {:.6e}, radius {:?}", ws.coeffs()[0], ws.radius())))
    }));
    let half_width = bundle.radius().map_or(0.1, |r| (r / 4.0).min(0.1));
    out.push(run(name("brute-force agreement"), || Ok(within(brute_force_deviation(inst, &bundle, half_width)?, 1e-6))));
    out.push(run(name("balance identity"), || {
        let ws = weight_scale(&bundle, bundle.order())?;
        let eps = half_width;
        let residual = (ws.eval(eps) + weighing_integral(inst, eps, DEFAULT_QUAD_TOL)?).abs();
        Ok(within(residual, 1e-8 + ws.tail_bound(eps)))
    }));
    out
}

fn scalar_family(b: f64, c: f64, q: f64, qdag: f64) -> CombinedFamily<f64> {
    let m = |x: f64| DMatrix::from_element(1, 1, x);
    let v = |x: f64| DVector::from_element(1, x);
    let base = SystemParams::new(PolyMatrix::new(1, vec![m(0.0), m(b)]).expect("1×1"), PolyVector::constant(v(q)), PolyVector::constant(v(qdag)))
        .expect("1×1");
    let pert = SystemParams::new(PolyMatrix::constant(m(c)), PolyVector::zeros(1), PolyVector::zeros(1)).expect("1×1");
    CombinedFamily::new(base, pert).expect("1×1")
}

/// The worked two-dimensional instrument.
pub fn worked_two_d() -> TwoDInstance<f64> {
    TwoDInstance::new(
        DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]),
        DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]),
        DVector::from_vec(vec![1.0, 0.0]),
        DVector::from_vec(vec![2.0, 1.0]),
    )
    .expect("worked instance is valid")
}

/// Closed-form oracles against the pipeline, the 2×2 identities, and the
/// instrument checks on built-in and random instruments.
pub fn oracle_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let one_d = Instrument::new(scalar_family(2.0, 1.0, 3.0, 1.0), GaugeReference::unit(), (-3.0, -0.75));
    out.push(run("1D oracle", || {
        let z0 = one_d.balance_at(0.0)?.z_bal;
        let ws = weight_scale(&one_d.series(4)?, 4)?;
        let mut worst = 0.0f64;
        for eps in [-0.5, 0.0, 0.6, 1.0] {
            let o = one_d_oracle(2.0, 1.0, 3.0, 1.0, eps)?;
            let bp = one_d.balance_at(eps)?;
            worst = worst
                .max((bp.z_bal - z0 - o.z_bal).abs())
                .max((ws.eval(eps) - o.z1).abs())
                .max((weighing_integral(&one_d, eps, 1e-12)? - o.delta_z2).abs());
        }
        Ok(within(worst, 1e-10))
    }));

    let two_d = worked_two_d();
    let two_d_inst = Instrument::new(two_d.family(), GaugeReference::unit(), (-3.5, -0.5));
    out.push(run("2D oracle constants", || {
        let bundle = two_d_inst.series(8)?;
        let ws = weight_scale(&bundle, 8)?;
        let k = two_d.constants;
        let alpha1 = bundle.z.coeff(0);
        let d = [
            alpha1 - k.alpha1,
            bundle.z.coeff(1) - k.alpha2,
            ws.coeffs()[2] / ws.coeffs()[1] - k.alpha4,
            ws.coeffs()[0] - k.delta_t0,
            two_d.identity_residual(),
        ];
        Ok(within(max_abs(d), 1e-10))
    }));
    out.push(run("2D weight scale", || {
        let bundle = two_d_inst.series(24)?;
        let ws = weight_scale(&bundle, 24)?;
        let d = max_abs((0..=9).map(|i| {
            let eps = 0.1 * i as f64;
            ws.eval(eps) - two_d.weight_scale(eps)
        }));
        Ok(within(d, 1e-7))
    }));

    out.push(run("2x2 identities", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut worst = 0.0f64;
        let a_ref = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -1.0]);
        for _ in 0..1000 {
            let mut draw = || DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-1.0..1.0));
            let (a, b, c) = (draw(), draw(), draw());
            let abar = comatrix(&a)?;
            let det: f64 = det2(&a)?;
            let e1 = (&abar * &a - DMatrix::identity(2, 2) * det).amax();
            let e2 = (codeterminant(&a, &a)? - 2.0 * det).abs();
            let e3 = (&abar * &c * &abar - (&abar * codeterminant(&c, &a)? - comatrix(&c)? * det)).amax();
            let (a0bar, bbar, cbar) = (comatrix(&a_ref)?, comatrix(&b)?, comatrix(&c)?);
            let e4 = (&a0bar * &c * &bbar + &bbar * &c * &a0bar
                - (&a0bar * codeterminant(&c, &b)? + &cbar * b[(0, 0)] - &bbar * c[(0, 0)]))
                .amax();
            worst = worst.max(e1).max(e2).max(e3).max(e4);
        }
        Ok(within(worst, 1e-12))
    }));

    out.extend(instrument_checks("1D", &one_d, 8));
    out.extend(instrument_checks("2D", &two_d_inst, 8));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (i, shape) in [InstanceShape::linear_remote(3), InstanceShape::linear_remote(5), InstanceShape::general(4)]
        .into_iter()
        .enumerate()
    {
        let inst = random_instance(&mut rng, shape);
        out.extend(instrument_checks(&format!("random #{i} (dim {})", shape.dim), &inst, 8));
    }
    out
}
