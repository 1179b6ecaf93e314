use serde::Serialize;

use super::busemann::{busemann_mayer_second, default_schedule, FlatField};
use super::FinslerNorm;
use crate::error::{DkitError, Result};
use crate::geom::{Point, Vector};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Serialize)]
pub struct QuadraticityReport<T: Scalar> {
    pub directions: Vec<Vector<T>>,
    /// Recovered `F(v)^2` per direction.
    pub values: Vec<T>,
    /// Fitted form `A t^2 + B t x + C x^2`.
    pub coefficients: [T; 3],
    /// Residual norm over value norm.
    pub deficit: T,
}

/// Recovers `F^2` on cone directions `(1, s)`, `s` evenly spread over
/// `[-0.6, 0.6]`, and measures how far it is from a quadratic form.
pub fn quadraticity_test<T: Scalar>(
    norm: &FinslerNorm<T>,
    p: Point<T>,
    n_dirs: usize,
) -> Result<QuadraticityReport<T>> {
    if n_dirs < 6 {
        return Err(DkitError::Input(format!(
            "quadraticity needs at least 6 directions, got {n_dirs}"
        )));
    }
    let field = FlatField { norm: *norm };
    let schedule = default_schedule::<T>();
    let zero = Vector::new(T::zero(), T::zero());
    let lo = T::lit(-0.6);
    let step = T::lit(1.2) / T::lit((n_dirs - 1) as f64);
    let directions: Vec<Vector<T>> = (0..n_dirs)
        .map(|k| Vector::new(T::one(), lo + step * T::lit(k as f64)))
        .collect();
    let values = directions
        .iter()
        .map(|&v| Ok(busemann_mayer_second(&field, p, v, zero, &schedule)?.estimate))
        .collect::<Result<Vec<T>>>()?;
    let basis = |v: Vector<T>| [v.t * v.t, v.t * v.x, v.x * v.x];
    let mut ata = [[T::zero(); 3]; 3];
    let mut atb = [T::zero(); 3];
    for (v, &q) in directions.iter().zip(&values) {
        let b = basis(*v);
        for i in 0..3 {
            atb[i] = atb[i] + b[i] * q;
            for j in 0..3 {
                ata[i][j] = ata[i][j] + b[i] * b[j];
            }
        }
    }
    let coefficients = solve3(ata, atb)?;
    let mut res2 = T::zero();
    let mut val2 = T::zero();
    for (v, &q) in directions.iter().zip(&values) {
        let b = basis(*v);
        let fit = coefficients[0] * b[0] + coefficients[1] * b[1] + coefficients[2] * b[2];
        res2 = res2 + (q - fit) * (q - fit);
        val2 = val2 + q * q;
    }
    Ok(QuadraticityReport {
        directions,
        values,
        coefficients,
        deficit: (res2 / val2).sqrt(),
    })
}

/// Gaussian elimination with partial pivoting on a 3x3 system.
fn solve3<T: Scalar>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Result<[T; 3]> {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() <= T::epsilon() {
            return Err(DkitError::Input(
                "degenerate direction set for the quadratic fit".into(),
            ));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (x, &y) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                *x = *x - f * y;
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for k in row + 1..3 {
            s = s - a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Ok(x)
}
