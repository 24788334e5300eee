//! Series coefficients from direct constrained solves: balance at each grid
//! point, then a least-squares polynomial fit of `z̲`, `Φ̲` and `Φ̲†`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::weighing::Instrument;

/// Largest accepted normalized fit residual on exact data.
pub const FIT_RESIDUAL_LIMIT: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct BruteFit<T: Real> {
    pub z: Vec<T>,
    pub flux: Vec<DVector<T>>,
    pub adjoint_flux: Vec<DVector<T>>,
    /// Largest root-mean-square residual over the fitted columns, relative
    /// to the column's largest magnitude.
    pub residual: T,
    /// Condition number of the scaled fit matrix.
    pub condition: T,
}

/// `{−kh, …, −h, 0, h, …, kh}`.
pub fn equispaced_grid<T: Real>(h: T, k: usize) -> Vec<T> {
    (-(k as i64)..=k as i64).map(|i| h * T::lit(i as f64)).collect()
}

/// `n` Chebyshev points of the first kind on `[−a, a]`.
pub fn chebyshev_grid<T: Real>(a: T, n: usize) -> Vec<T> {
    (0..n)
        .map(|i| a * T::lit((std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos()))
        .collect()
}

pub fn brute_force_oracle<T: Real>(inst: &Instrument<T>, grid: &[T], degree: usize) -> Result<BruteFit<T>> {
    if grid.len() < degree + 1 {
        return Err(Error::InsufficientSamples);
    }
    let states = grid
        .par_iter()
        .map(|&eps| {
            let bp = inst.balance_at(eps)?;
            let fp = bp.flux_pair;
            let mut row = vec![bp.z_bal];
            row.extend(fp.flux.iter().copied());
            row.extend(fp.adjoint_flux.iter().copied());
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = inst.family.dim();
    let scale = grid.iter().fold(T::zero(), |m, e| m.max(e.abs()));
    let v = DMatrix::from_fn(grid.len(), degree + 1, |i, j| (grid[i] / scale).powi(j as i32));
    let unscale: Vec<T> = (0..=degree).map(|j| scale.powi(j as i32)).collect();

    let mut columns = Vec::with_capacity(1 + 2 * dim);
    let mut residual = T::zero();
    let mut condition = T::zero();
    for c in 0..1 + 2 * dim {
        let y = DVector::from_iterator(grid.len(), states.iter().map(|r| r[c]));
        let (x, cond) = linalg::least_squares(&v, &y).ok_or(Error::RankDeficientSamples)?;
        condition = cond;
        let ymax = y.amax();
        if ymax > T::zero() {
            let rms = ((&v * &x - &y).norm_squared() / T::lit(grid.len() as f64)).sqrt();
            residual = residual.max(rms / ymax);
        }
        columns.push((0..=degree).map(|j| x[j] / unscale[j]).collect::<Vec<T>>());
    }
    if residual > T::lit(FIT_RESIDUAL_LIMIT) {
        return Err(Error::FitResidual(residual.to_f64()));
    }
    let vector = |offset: usize| -> Vec<DVector<T>> {
        (0..=degree)
            .map(|j| DVector::from_iterator(dim, (0..dim).map(|i| columns[offset + i][j])))
            .collect()
    };
    Ok(BruteFit { z: columns[0].clone(), flux: vector(1), adjoint_flux: vector(1 + dim), residual, condition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::GaugeReference;
    use crate::oracle::TwoDInstance;

    #[test]
    fn worked_instance_control_is_linear() {
        let w = TwoDInstance::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]),
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![2.0, 1.0]),
        )
        .unwrap();
        let inst = Instrument::new(w.family(), GaugeReference::unit(), (-3.5, -0.5));
        let fit = brute_force_oracle(&inst, &equispaced_grid(0.25f64 / 4.0, 4), 7).unwrap();
        assert!((fit.z[0] + 2.0).abs() < 1e-12);
        assert!((fit.z[1] - 1.0).abs() < 1e-10);
        assert!(fit.z[2..].iter().all(|c| c.abs() < 1e-8));
        let fit = brute_force_oracle(&inst, &chebyshev_grid(0.25, 25), 16).unwrap();
        for p in 0..=4 {
            assert!((&fit.flux[p] - w.flux_coeff(p).unwrap()).amax() < 1e-9, "order {p}");
            assert!((&fit.adjoint_flux[p] - w.adjoint_flux_coeff(p).unwrap()).amax() < 1e-9, "order {p}");
        }
    }

    #[test]
    fn grids() {
        let g = equispaced_grid(0.01, 4);
        assert_eq!(g.len(), 9);
        assert_eq!(g[4], 0.0);
        let c = chebyshev_grid(0.5, 5);
        assert!(c.iter().all(|x: &f64| x.abs() < 0.5));
        assert!((c[2]).abs() < 1e-16);
    }
}
