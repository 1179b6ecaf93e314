use serde::{Deserialize, Serialize};

use crate::error::{DkitError, Result};
use crate::geom::{Point, Vector};
use crate::scalar::Scalar;

/// Geodesic spray coefficients `G(x, y)`, homogeneous of degree two in `y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spray<T> {
    Flat,
    /// `G(y) = eps * (y_x^2, y_t y_x)`.
    Polynomial {
        eps: T,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeodesicState<T> {
    pub x: Point<T>,
    pub y: Vector<T>,
    pub t: T,
}

impl<T: Scalar> Spray<T> {
    pub fn coefficients(&self, _x: Point<T>, y: Vector<T>) -> Vector<T> {
        match *self {
            Spray::Flat => Vector::new(T::zero(), T::zero()),
            Spray::Polynomial { eps } => Vector::new(eps * y.x * y.x, eps * y.t * y.x),
        }
    }
}

/// Fixed-step fourth-order Runge-Kutta for `x' = y`, `y' = -2 G(x, y)`.
/// The position is integrated as a displacement from `p`.
pub fn spray_flow<T: Scalar>(
    spray: &Spray<T>,
    p: Point<T>,
    v: Vector<T>,
    t_end: T,
    steps: usize,
) -> Result<GeodesicState<T>> {
    if steps < 16 {
        return Err(DkitError::Input(format!(
            "spray_flow needs at least 16 steps, got {steps}"
        )));
    }
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let h = t_end / T::lit(steps as f64);
    let rhs = |z: Vector<T>, y: Vector<T>| (y, spray.coefficients(p + z, y) * (-two));
    let mut z = Vector::new(T::zero(), T::zero());
    let mut y = v;
    for _ in 0..steps {
        let (k1z, k1y) = rhs(z, y);
        let (k2z, k2y) = rhs(z + k1z * (h / two), y + k1y * (h / two));
        let (k3z, k3y) = rhs(z + k2z * (h / two), y + k2y * (h / two));
        let (k4z, k4y) = rhs(z + k3z * h, y + k3y * h);
        z = z + (k1z + k2z * two + k3z * two + k4z) * (h / six);
        y = y + (k1y + k2y * two + k3y * two + k4y) * (h / six);
        if !(z.is_finite() && y.is_finite()) {
            return Err(DkitError::Integration("non-finite geodesic state".into()));
        }
    }
    Ok(GeodesicState { x: p + z, y, t: t_end })
}

/// `exp_p(v)`: the time-one position of the geodesic from `(p, v)`.
pub fn exp_map<T: Scalar>(spray: &Spray<T>, p: Point<T>, v: Vector<T>, steps: usize) -> Result<Point<T>> {
    Ok(spray_flow(spray, p, v, T::one(), steps)?.x)
}

/// Central finite-difference Jacobian of `v -> exp_p(v)`, rows indexed by
/// output coordinate `(t, x)`.
pub fn exp_jacobian<T: Scalar>(spray: &Spray<T>, p: Point<T>, v: Vector<T>, h: T, steps: usize) -> Result<[[T; 2]; 2]> {
    let two = T::lit(2.0);
    let mut jac = [[T::zero(); 2]; 2];
    for (col, e) in [Vector::new(T::one(), T::zero()), Vector::new(T::zero(), T::one())]
        .into_iter()
        .enumerate()
    {
        let plus = exp_map(spray, p, v + e * h, steps)?;
        let minus = exp_map(spray, p, v - e * h, steps)?;
        let diff = (plus - minus) * (T::one() / (two * h));
        jac[0][col] = diff.t;
        jac[1][col] = diff.x;
    }
    Ok(jac)
}

/// Solves `exp_p(v) = q` for `v` by Newton iteration from `v = q - p`.
pub fn exp_inverse<T: Scalar>(spray: &Spray<T>, p: Point<T>, q: Point<T>, steps: usize, tol: T) -> Result<Vector<T>> {
    let mut v = q - p;
    for _ in 0..50 {
        let r = exp_map(spray, p, v, steps)? - q;
        if r.norm() <= tol {
            return Ok(v);
        }
        let j = exp_jacobian(spray, p, v, T::lit(1e-6), steps)?;
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() <= T::epsilon() {
            return Err(DkitError::Integration("singular exponential map in shooting".into()));
        }
        let dt = (j[1][1] * r.t - j[0][1] * r.x) / det;
        let dx = (j[0][0] * r.x - j[1][0] * r.t) / det;
        v = v - Vector::new(dt, dx);
    }
    Err(DkitError::Integration("shooting did not converge".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfConvergence<T: Scalar> {
    pub reference_steps: usize,
    pub steps: Vec<usize>,
    pub errors: Vec<T>,
    /// `log2` of successive error ratios.
    pub orders: Vec<T>,
}

impl<T: Scalar> SelfConvergence<T> {
    pub fn min_order(&self) -> Option<T> {
        self.orders.iter().copied().reduce(T::min)
    }
}

/// Endpoint errors at the given step counts against a fine reference run.
pub fn self_convergence<T: Scalar>(
    spray: &Spray<T>,
    p: Point<T>,
    v: Vector<T>,
    t_end: T,
    steps: &[usize],
    reference_steps: usize,
) -> Result<SelfConvergence<T>> {
    let reference = spray_flow(spray, p, v, t_end, reference_steps)?;
    let errors = steps
        .iter()
        .map(|&n| {
            let s = spray_flow(spray, p, v, t_end, n)?;
            Ok((s.x - reference.x).norm().max((s.y - reference.y).norm()))
        })
        .collect::<Result<Vec<T>>>()?;
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(SelfConvergence {
        reference_steps,
        steps: steps.to_vec(),
        errors,
        orders,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct JacobianReport<T: Scalar> {
    pub radius: T,
    /// Probe magnitudes `radius / 2^j`, decreasing.
    pub magnitudes: Vec<T>,
    /// Largest entrywise deviation of the Jacobian from the identity over
    /// all directions, per magnitude.
    pub deviations: Vec<T>,
    /// Deviation at the smallest magnitude.
    pub deviation_at_zero: T,
    /// Largest `|J(v) - J(0)| / |v|` over all probes.
    pub lipschitz: T,
}

/// Probes the differential of `exp_p` near the zero section.
pub fn exp_zero_section_probe<T: Scalar>(
    spray: &Spray<T>,
    p: Point<T>,
    radius: T,
    n_dirs: usize,
) -> Result<JacobianReport<T>> {
    let steps = 64;
    let h = T::lit(1e-5);
    let deviation = |j: [[T; 2]; 2], k: [[T; 2]; 2]| {
        let mut m = T::zero();
        for r in 0..2 {
            for c in 0..2 {
                m = m.max((j[r][c] - k[r][c]).abs());
            }
        }
        m
    };
    let identity = [[T::one(), T::zero()], [T::zero(), T::one()]];
    let j0 = exp_jacobian(spray, p, Vector::new(T::zero(), T::zero()), h, steps)?;
    let magnitudes: Vec<T> = (0..15).map(|j| radius / T::lit(2f64.powi(j))).collect();
    let mut deviations = Vec::with_capacity(magnitudes.len());
    let mut lipschitz = T::zero();
    let n = n_dirs.max(1);
    for &m in &magnitudes {
        let mut worst = T::zero();
        for k in 0..n {
            let angle = T::TAU() * T::lit(k as f64) / T::lit(n as f64);
            let v = Vector::new(angle.cos(), angle.sin()) * m;
            let j = exp_jacobian(spray, p, v, h, steps)?;
            worst = worst.max(deviation(j, identity));
            lipschitz = lipschitz.max(deviation(j, j0) / m);
        }
        deviations.push(worst);
    }
    Ok(JacobianReport {
        radius,
        deviation_at_zero: *deviations.last().unwrap(),
        magnitudes,
        deviations,
        lipschitz,
    })
}
