use serde::Serialize;

use crate::scalar::Scalar;

#[derive(Clone, Debug, Serialize)]
pub struct Richardson<T: Scalar> {
    /// `tableau[k][j]`: `j` elimination steps applied up to row `k`.
    pub tableau: Vec<Vec<T>>,
    pub estimate: T,
    /// Difference between the chosen entry and the one above it.
    pub error_estimate: T,
    /// Convergence order of the raw sequence from its last three terms.
    pub empirical_order: Option<T>,
}

/// Richardson extrapolation of values `f(t0 / 2^k)` assuming an expansion
/// `f(t) = L + c1 t + c2 t^2 + ...`. The reported estimate is the last-row
/// entry whose difference to the row above is smallest.
pub fn richardson<T: Scalar>(values: &[T]) -> Richardson<T> {
    let k_max = values.len();
    let mut tableau: Vec<Vec<T>> = Vec::with_capacity(k_max);
    for (k, &v) in values.iter().enumerate() {
        let mut row = vec![v];
        for j in 1..=k {
            let factor = T::lit(2f64.powi(j as i32) - 1.0);
            let prev = tableau[k - 1][j - 1];
            let cur = row[j - 1];
            row.push(cur + (cur - prev) / factor);
        }
        tableau.push(row);
    }
    let (estimate, error_estimate) = match k_max {
        0 => (T::nan(), T::infinity()),
        1 => (values[0], T::infinity()),
        _ => {
            let last = &tableau[k_max - 1];
            let above = &tableau[k_max - 2];
            (0..above.len()).map(|j| (last[j], (last[j] - above[j]).abs())).fold(
                (last[0], T::infinity()),
                |best, cand| if cand.1 < best.1 { cand } else { best },
            )
        }
    };
    let empirical_order = if k_max >= 3 {
        let d1 = values[k_max - 2] - values[k_max - 3];
        let d2 = values[k_max - 1] - values[k_max - 2];
        if d1 != T::zero() && d2 != T::zero() {
            Some((d1 / d2).abs().log2())
        } else {
            None
        }
    } else {
        None
    };
    Richardson {
        tableau,
        estimate,
        error_estimate,
        empirical_order,
    }
}

/// `t0 / 2^k` for `k = 0..count`.
pub fn halving_schedule<T: Scalar>(t0: T, count: usize) -> Vec<T> {
    (0..count).map(|k| t0 / T::lit(2f64.powi(k as i32))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removes_polynomial_error_terms() {
        let ts = halving_schedule(0.1f64, 11);
        let vals: Vec<f64> = ts.iter().map(|t| 2.0 + 3.0 * t - 5.0 * t * t + t.powi(3)).collect();
        let r = richardson(&vals);
        assert!((r.estimate - 2.0).abs() < 1e-13, "{}", r.estimate);
        let order = r.empirical_order.unwrap();
        assert!((order - 1.0).abs() < 0.05);
    }

    #[test]
    fn constant_sequence_has_no_order() {
        let r = richardson(&[1.0f64; 5]);
        assert_eq!(r.estimate, 1.0);
        assert!(r.empirical_order.is_none());
    }
}
