//! Periodic cubic spline interpolation on a uniform grid.
//!
//! Wigner functions live on uniform wavenumber grids but the collision
//! integrals evaluate them at constraint-solver output, which lands between
//! nodes. A C² periodic spline keeps that evaluation smooth enough for the
//! quadrature rules to retain their order.

use crate::scalar::Real;

/// C² cubic spline through n uniformly spaced samples of a periodic function.
///
/// Sample j sits at x = j·period/n; evaluation wraps x by the period.
#[derive(Debug, Clone)]
pub struct PeriodicCubicSpline<T> {
    values: Vec<T>,
    /// second derivatives at the nodes (spline moments)
    moments: Vec<T>,
    period: T,
    h: T,
}

impl<T: Real> PeriodicCubicSpline<T> {
    pub fn new(values: Vec<T>, period: T) -> Self {
        let n = values.len();
        assert!(n >= 3, "periodic spline needs at least 3 samples");
        assert!(period > T::zero());
        let h = period / T::of_usize(n);
        let six_over_h2 = T::of(6.0) / (h * h);
        let rhs: Vec<T> = (0..n)
            .map(|j| {
                let ym = values[(j + n - 1) % n];
                let y0 = values[j];
                let yp = values[(j + 1) % n];
                six_over_h2 * (ym - T::of(2.0) * y0 + yp)
            })
            .collect();
        let moments = solve_cyclic_sym(T::of(4.0), T::one(), &rhs);
        PeriodicCubicSpline {
            values,
            moments,
            period,
            h,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period(&self) -> T {
        self.period
    }

    #[inline]
    fn locate(&self, x: T) -> (usize, usize, T) {
        let n = self.values.len();
        let mut s = (x / self.period).fract() * T::of_usize(n);
        if s < T::zero() {
            s += T::of_usize(n);
        }
        let mut j = s.floor().to_f64() as usize;
        if j >= n {
            j = 0;
            s = T::zero();
        }
        let t = s - T::of_usize(j);
        (j, (j + 1) % n, t)
    }

    /// Spline value at x (any real; wrapped by the period).
    pub fn eval(&self, x: T) -> T {
        let (j, jp, t) = self.locate(x);
        let omt = T::one() - t;
        let h2_6 = self.h * self.h / T::of(6.0);
        self.values[j] * omt
            + self.values[jp] * t
            + h2_6 * ((omt * omt * omt - omt) * self.moments[j] + (t * t * t - t) * self.moments[jp])
    }

    /// Spline derivative at x.
    pub fn eval_deriv(&self, x: T) -> T {
        let (j, jp, t) = self.locate(x);
        let omt = T::one() - t;
        let three = T::of(3.0);
        (self.values[jp] - self.values[j]) / self.h
            + self.h / T::of(6.0)
                * ((three * t * t - T::one()) * self.moments[jp]
                    - (three * omt * omt - T::one()) * self.moments[j])
    }
}

/// Solves the cyclic tridiagonal system with constant diagonal d and
/// off-diagonal e (symmetric, wrap entries e in the corners) by
/// Sherman-Morrison on top of a Thomas sweep. Requires d > 2e (diagonal
/// dominance), which holds for the spline system d=4, e=1.
fn solve_cyclic_sym<T: Real>(d: T, e: T, rhs: &[T]) -> Vec<T> {
    let n = rhs.len();
    if n == 3 {
        // wrap terms and off-diagonals coincide: dense 3x3 with rows
        // [d, e+e, ...]: handle directly via the circulant structure
        let s: T = rhs.iter().copied().sum();
        let two_e = e + e;
        // eigenvalues of circulant(d, e, e): d + 2e on the constant vector,
        // d - e on the complement
        let lam0 = d + two_e;
        let lam1 = d - e;
        let mean = s / T::of(3.0);
        return rhs.iter().map(|&r| mean / lam0 + (r - mean) / lam1).collect();
    }
    // A = T + u vᵀ with T the open tridiagonal matrix whose first and last
    // diagonal entries are modified: gamma choice below keeps T well posed.
    let gamma = -d;
    let mut dia = vec![d; n];
    dia[0] = d - gamma;
    dia[n - 1] = d - e * e / gamma;
    let x = thomas_const_offdiag(&dia, e, rhs);
    let mut u_vec = vec![T::zero(); n];
    u_vec[0] = gamma;
    u_vec[n - 1] = e;
    let z = thomas_const_offdiag(&dia, e, &u_vec);
    // v = (1, 0, ..., 0, e/gamma)
    let vx = x[0] + e / gamma * x[n - 1];
    let vz = z[0] + e / gamma * z[n - 1];
    let factor = vx / (T::one() + vz);
    x.into_iter().zip(z).map(|(xi, zi)| xi - factor * zi).collect()
}

/// Thomas algorithm for a tridiagonal system with given diagonal and constant
/// symmetric off-diagonal e.
fn thomas_const_offdiag<T: Real>(dia: &[T], e: T, rhs: &[T]) -> Vec<T> {
    let n = dia.len();
    let mut c = vec![T::zero(); n];
    let mut x = vec![T::zero(); n];
    c[0] = e / dia[0];
    x[0] = rhs[0] / dia[0];
    for i in 1..n {
        let m = dia[i] - e * c[i - 1];
        c[i] = e / m;
        x[i] = (rhs[i] - e * x[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    #[test]
    fn reproduces_nodes_exactly() {
        let n = 17;
        let values: Vec<f64> = (0..n).map(|j| (TAU * j as f64 / n as f64).sin() + 0.3).collect();
        let spline = PeriodicCubicSpline::new(values.clone(), TAU);
        for (j, &v) in values.iter().enumerate() {
            assert_relative_eq!(spline.eval(TAU * j as f64 / n as f64), v, epsilon = 1e-13);
        }
    }

    #[test]
    fn converges_fourth_order_on_smooth_periodic_data() {
        let f = |x: f64| (x.sin() + 0.5 * (2.0 * x).cos()).exp();
        let err = |n: usize| {
            let values: Vec<f64> = (0..n).map(|j| f(TAU * j as f64 / n as f64)).collect();
            let spline = PeriodicCubicSpline::new(values, TAU);
            (0..1000)
                .map(|i| {
                    let x = TAU * (i as f64 + 0.31) / 1000.0;
                    (spline.eval(x) - f(x)).abs()
                })
                .fold(0.0, f64::max)
        };
        let e1 = err(64);
        let e2 = err(128);
        let order = (e1 / e2).log2();
        assert!(order > 3.7, "observed order {order}");
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let n = 96;
        let f = |x: f64| (3.0 * x).sin() + x.cos();
        let values: Vec<f64> = (0..n).map(|j| f(TAU * j as f64 / n as f64)).collect();
        let spline = PeriodicCubicSpline::new(values, TAU);
        for i in 0..50 {
            let x = TAU * (i as f64 + 0.47) / 50.0;
            let h = 1e-6;
            let fd = (spline.eval(x + h) - spline.eval(x - h)) / (2.0 * h);
            assert_relative_eq!(spline.eval_deriv(x), fd, epsilon = 1e-6, max_relative = 1e-5);
        }
    }

    #[test]
    fn wrapping_is_seamless_across_the_period() {
        let n = 31;
        let values: Vec<f64> = (0..n).map(|j| ((TAU * j as f64 / n as f64).cos()).powi(2)).collect();
        let spline = PeriodicCubicSpline::new(values, TAU);
        for i in 0..20 {
            let x = 0.05 * i as f64;
            assert_relative_eq!(spline.eval(x), spline.eval(x + TAU), epsilon = 1e-12);
            assert_relative_eq!(spline.eval(x), spline.eval(x - 3.0 * TAU), epsilon = 1e-12);
        }
    }

    #[test]
    fn three_point_system_solves_exactly() {
        // smallest admissible spline: check the circulant fast path against a
        // dense solve of [4 1 1; 1 4 1; 1 1 4]
        let rhs = [1.0f64, -2.0, 5.0];
        let m = solve_cyclic_sym(4.0, 1.0, &rhs);
        for i in 0..3 {
            let lhs = 4.0 * m[i] + m[(i + 1) % 3] + m[(i + 2) % 3];
            assert_relative_eq!(lhs, rhs[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn cyclic_solver_matches_direct_residual() {
        let n = 40;
        let rhs: Vec<f64> = (0..n).map(|j| ((j * 7 % 11) as f64) - 4.0).collect();
        let m = solve_cyclic_sym(4.0, 1.0, &rhs);
        for i in 0..n {
            let lhs = 4.0 * m[i] + m[(i + 1) % n] + m[(i + n - 1) % n];
            assert_relative_eq!(lhs, rhs[i], epsilon = 1e-12);
        }
    }
}
