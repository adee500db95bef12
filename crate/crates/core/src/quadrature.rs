//! Quadrature toolkit tuned to the integrands of this crate.
//!
//! The collision kernels produce three recurring difficulties, each with a
//! dedicated rule here:
//!
//! * smooth periodic integrands: uniform (trapezoidal) sums converge
//!   spectrally; [`trapezoid_periodic`] with a doubling error estimate;
//! * inverse-square-root factors 1/√F with F vanishing linearly at interval
//!   endpoints: the sine substitution t = m + h·sinθ removes the singularity
//!   exactly; [`integrate_inv_sqrt`];
//! * algebraic endpoint singularities like p^{-1/3}: the septic smoothstep
//!   reparametrization [`ClusteredRule`] clusters Gauss nodes at both ends and
//!   regularizes any integrable power.
//!
//! [`adaptive_simpson`] is the general fallback and the independent oracle
//! used by tests against the specialized rules.

use crate::scalar::Real;

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Computed by Newton iteration on the Legendre recurrence in f64 and then
/// converted, which is exact at f64 working precision.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Reusable Gauss-Legendre rule over arbitrary intervals.
#[derive(Debug, Clone)]
pub struct GlRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GlRule<T> {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        GlRule {
            nodes: x.into_iter().map(T::of).collect(),
            weights: w.into_iter().map(T::of).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫_a^b f dt.
    pub fn integrate(&self, a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
        let half = T::of(0.5);
        let mid = half * (a + b);
        let rad = half * (b - a);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + rad * x);
        }
        acc * rad
    }

    /// Nodes and weights mapped to [a, b], for callers that fuse several
    /// integrals over one node set.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = T::of(0.5);
        let mid = half * (a + b);
        let rad = half * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + rad * x, w * rad))
    }
}

/// Uniform sum over one period for a smooth periodic integrand: the
/// trapezoidal rule, spectrally accurate in this setting. Integrates f over
/// [0, period) with n equispaced nodes.
pub fn trapezoid_periodic<T: Real>(n: usize, period: T, mut f: impl FnMut(T) -> T) -> T {
    let h = period / T::of_usize(n);
    let mut acc = T::zero();
    for j in 0..n {
        acc += f(h * T::of_usize(j));
    }
    acc * h
}

/// Same as [`trapezoid_periodic`] but with the nodes offset to cell centers,
/// which avoids placing a node on a removable singularity at t = 0.
pub fn midpoint_periodic<T: Real>(n: usize, period: T, mut f: impl FnMut(T) -> T) -> T {
    let h = period / T::of_usize(n);
    let half = T::of(0.5);
    let mut acc = T::zero();
    for j in 0..n {
        acc += f(h * (T::of_usize(j) + half));
    }
    acc * h
}

/// Adaptive Simpson integration with an absolute-error budget.
///
/// Returns the estimate together with the accumulated error bound. Recursion
/// that bottoms out (depth 0) contributes its local Richardson estimate to
/// the error instead of aborting, so integrable endpoint singularities
/// degrade the error report rather than the run.
pub fn adaptive_simpson<T: Real>(
    mut f: impl FnMut(T) -> T,
    a: T,
    b: T,
    tol: T,
    max_depth: u32,
) -> (T, T) {
    let c = T::of(0.5) * (a + b);
    let fa = f(a);
    let fb = f(b);
    let fc = f(c);
    let whole = simpson(a, b, fa, fc, fb);
    let mut err = T::zero();
    let val = simpson_rec(&mut f, a, b, fa, fc, fb, whole, tol, max_depth, &mut err);
    (val, err)
}

fn simpson<T: Real>(a: T, b: T, fa: T, fc: T, fb: T) -> T {
    (b - a) / T::of(6.0) * (fa + T::of(4.0) * fc + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<T: Real>(
    f: &mut impl FnMut(T) -> T,
    a: T,
    b: T,
    fa: T,
    fc: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
    err: &mut T,
) -> T {
    let c = T::of(0.5) * (a + b);
    let d = T::of(0.5) * (a + c);
    let e = T::of(0.5) * (c + b);
    let fd = f(d);
    let fe = f(e);
    let left = simpson(a, c, fa, fd, fc);
    let right = simpson(c, b, fc, fe, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::of(15.0) * tol {
        *err += delta.abs() / T::of(15.0);
        return left + right + delta / T::of(15.0);
    }
    let half_tol = T::of(0.5) * tol;
    simpson_rec(f, a, c, fa, fd, fc, left, half_tol, depth - 1, err)
        + simpson_rec(f, c, b, fc, fe, fb, right, half_tol, depth - 1, err)
}

/// ∫_a^b g(t) / √F(t) dt where F > 0 on (a, b) and is allowed simple zeros
/// exactly at the endpoints.
///
/// The substitution t = m + h·sinθ with m = (a+b)/2, h = (b-a)/2 turns the
/// integrand into g·h·cosθ/√F, and at an endpoint zero F ~ (t-a)(b-t)·R the
/// cosθ factor cancels the root exactly, leaving a smooth integrand for the
/// supplied Gauss rule. Endpoints where F stays positive are also handled
/// (the integrand simply vanishes like cosθ there).
pub fn integrate_inv_sqrt<T: Real>(
    rule: &GlRule<T>,
    a: T,
    b: T,
    mut g: impl FnMut(T) -> T,
    mut big_f: impl FnMut(T) -> T,
) -> T {
    let half = T::of(0.5);
    let m = half * (a + b);
    let h = half * (b - a);
    let frac_pi_2 = T::frac_pi_2();
    let mut acc = T::zero();
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let theta = frac_pi_2 * x;
        let (s, c) = (theta.sin(), theta.cos());
        let t = m + h * s;
        let fv = big_f(t);
        if fv <= T::zero() {
            // only reachable through round-off right at a root
            continue;
        }
        acc += w * g(t) * c / fv.sqrt();
    }
    acc * h * frac_pi_2
}

/// Septic smoothstep B: [0,1] → [0,1] with B ~ u⁴ near 0 and 1-B ~ (1-u)⁴
/// near 1; B'(u) = 140 u³(1-u)³.
///
/// Used to cluster quadrature nodes at both interval endpoints: composing an
/// integrand with t = t₀ + (t₁-t₀)·B(u) regularizes any endpoint singularity
/// weaker than |t - t_end|^{-3/4}.
#[inline]
pub fn smoothstep7<T: Real>(u: T) -> (T, T) {
    let u2 = u * u;
    let u3 = u2 * u;
    let b = u3 * u * (T::of(35.0) - T::of(84.0) * u + T::of(70.0) * u2 - T::of(20.0) * u3);
    let omu = T::one() - u;
    let db = T::of(140.0) * u3 * omu * omu * omu;
    (b, db)
}

/// Gauss rule composed with the septic smoothstep map onto [a, b].
#[derive(Debug, Clone)]
pub struct ClusteredRule<T> {
    /// (t, weight) pairs over the unit interval, before affine mapping.
    unit: Vec<(T, T)>,
}

impl<T: Real> ClusteredRule<T> {
    pub fn new(n: usize) -> Self {
        let gl = GlRule::<T>::new(n);
        let half = T::of(0.5);
        let unit = gl
            .nodes
            .iter()
            .zip(&gl.weights)
            .map(|(&x, &w)| {
                let u = half * (x + T::one());
                let (b, db) = smoothstep7(u);
                (b, w * half * db)
            })
            .collect();
        ClusteredRule { unit }
    }

    pub fn len(&self) -> usize {
        self.unit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unit.is_empty()
    }

    /// ∫_a^b f dt with nodes clustered at a and b.
    pub fn integrate(&self, a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
        let len = b - a;
        let mut acc = T::zero();
        for &(u, w) in &self.unit {
            acc += w * f(a + len * u);
        }
        acc * len
    }

    /// Mapped (node, weight) view on [a, b].
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let len = b - a;
        self.unit.iter().map(move |&(u, w)| (a + len * u, w * len))
    }
}

/// All roots of f in (a, b), located by a sign-change scan over `samples`
/// cells followed by bisection to ~60 bits. Roots closer than the scan
/// resolution may be missed; callers choose `samples` from the known
/// structure of their integrand.
pub fn scan_roots<T: Real>(mut f: impl FnMut(T) -> T, a: T, b: T, samples: usize) -> Vec<T> {
    let mut roots = Vec::new();
    let h = (b - a) / T::of_usize(samples);
    let mut x0 = a;
    let mut f0 = f(x0);
    for j in 1..=samples {
        let x1 = a + h * T::of_usize(j);
        let f1 = f(x1);
        if f0 == T::zero() {
            roots.push(x0);
        } else if f0 * f1 < T::zero() {
            roots.push(bisect(&mut f, x0, x1, f0));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == T::zero() {
        roots.push(x0);
    }
    roots
}

fn bisect<T: Real>(f: &mut impl FnMut(T) -> T, mut lo: T, mut hi: T, flo: T) -> T {
    let mut sign_lo = flo;
    for _ in 0..90 {
        let mid = T::of(0.5) * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if sign_lo * fm < T::zero() {
            hi = mid;
        } else {
            lo = mid;
            sign_lo = fm;
        }
    }
    T::of(0.5) * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GlRule::<f64>::new(8);
        // degree 15 is exact for an 8-point rule
        let val = rule.integrate(0.0, 1.0, |x| x.powi(15));
        assert_relative_eq!(val, 1.0 / 16.0, max_relative = 1e-13);
    }

    #[test]
    fn trapezoid_is_spectral_on_periodic_integrands() {
        let tau = std::f64::consts::TAU;
        let val = trapezoid_periodic(32, tau, |p| (1.0 - 0.6 * p.cos()).sqrt());
        let (oracle, _) = adaptive_simpson(|p: f64| (1.0 - 0.6 * p.cos()).sqrt(), 0.0, tau, 1e-13, 40);
        assert_relative_eq!(val, oracle, max_relative = 1e-12);
    }

    #[test]
    fn inverse_sqrt_rule_handles_endpoint_roots() {
        // ∫_0^1 dt/√(t(1-t)) = π with g ≡ 1, F = t(1-t)
        let rule = GlRule::<f64>::new(48);
        let val = integrate_inv_sqrt(&rule, 0.0, 1.0, |_| 1.0, |t| t * (1.0 - t));
        assert_relative_eq!(val, std::f64::consts::PI, max_relative = 1e-12);
    }

    #[test]
    fn inverse_sqrt_rule_is_exact_when_f_has_no_root() {
        let rule = GlRule::<f64>::new(48);
        let val = integrate_inv_sqrt(&rule, 0.0, 2.0, |t| t, |_| 4.0);
        assert_relative_eq!(val, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn clustered_rule_resolves_cube_root_singularities() {
        // ∫_0^1 t^{-1/3} dt = 3/2
        let rule = ClusteredRule::<f64>::new(200);
        let val = rule.integrate(0.0, 1.0, |t| t.powf(-1.0 / 3.0));
        assert_relative_eq!(val, 1.5, max_relative = 1e-9);
    }

    #[test]
    fn adaptive_simpson_reports_tight_error() {
        let (val, err) = adaptive_simpson(|x: f64| (3.0 * x).sin().exp(), 0.0, 2.0, 1e-11, 40);
        let oracle = {
            let rule = GlRule::<f64>::new(200);
            rule.integrate(0.0, 2.0, |x| (3.0 * x).sin().exp())
        };
        assert!(err < 1e-9);
        assert_relative_eq!(val, oracle, max_relative = 1e-10);
    }

    #[test]
    fn root_scan_finds_all_simple_roots() {
        let roots = scan_roots(|x: f64| (x * x - 2.0) * (x - 3.0), 0.0, 4.0, 400);
        assert_eq!(roots.len(), 2);
        assert_relative_eq!(roots[0], std::f64::consts::SQRT_2, max_relative = 1e-12);
        assert_relative_eq!(roots[1], 3.0, max_relative = 1e-12);
    }

    #[test]
    fn smoothstep_endpoints_and_monotonicity() {
        let (b0, d0) = smoothstep7(0.0f64);
        let (b1, d1) = smoothstep7(1.0f64);
        assert_eq!((b0, d0), (0.0, 0.0));
        assert!((b1 - 1.0).abs() < 1e-15 && d1.abs() < 1e-12);
        let mut prev = 0.0;
        for i in 1..=50 {
            let (b, db) = smoothstep7(i as f64 / 50.0);
            assert!(b >= prev && db >= 0.0);
            prev = b;
        }
    }
}
