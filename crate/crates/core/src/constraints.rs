//! Collisional constraints and their exact solutions.
//!
//! An n-phonon process conserves momentum and, on the kinetic time scale,
//! energy: with band signs σ_ℓ = ±1 the energy constraint is
//!
//! ```text
//! Ω_n = Σ_{ℓ<n} σ_ℓ ω(k_ℓ),   Σ_{ℓ<n} σ_ℓ k_ℓ ≡ 0 (mod 1).
//! ```
//!
//! For the nearest-neighbour dispersion three-phonon processes are frozen
//! out: |Ω₃| has a strictly positive lower bound for δ < 1/2
//! ([`omega3_gap`]), while checking a generic dispersion for Ω₃ zeros is a
//! scan problem ([`omega3_zero_scan`]).
//!
//! Four-phonon pair collisions (σ = (+,+,-,-)) admit closed-form solutions:
//! after eliminating momentum through p₃ = p₀ + p₁ - p₂, the energy
//! constraint is solved for p₁ as an explicit branch p₁ = h(p₀, p₂), one
//! formula for the unpinned chain ([`h_fpu`]) and one for the pinned chain
//! ([`h_pinned`]). Both are exact: residuals vanish to round-off, which the
//! tests enforce at 10⁻¹⁰ ω̄.
//!
//! The kernel functions F_± of the unpinned chain and the change of
//! variables between the p₂- and p₁-parametrizations of the solution
//! manifold ([`change_of_variables_check`]) are used by the collision
//! operator and its linearization.

use crate::dispersion::DispersionRelation;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, integrate_inv_sqrt, scan_roots, GlRule};
use crate::scalar::Real;
use crate::torus::{sign_pos, wrap_p, wrap_p_sym};

/// Σ_ℓ σ_ℓ ω(k_ℓ) for an arbitrary frequency law.
pub fn omega_n<T: Real>(omega: impl Fn(T) -> T, ks: &[T], sigmas: &[i8]) -> T {
    assert_eq!(ks.len(), sigmas.len(), "one band sign per wavenumber");
    ks.iter()
        .zip(sigmas)
        .map(|(&k, &s)| {
            let w = omega(k);
            if s >= 0 {
                w
            } else {
                -w
            }
        })
        .sum()
}

/// Ω₃ for the fusion pattern (+,+,-) with momentum eliminated:
/// ω(k₀) + ω(k₁) - ω(k₀+k₁). All other sign patterns reduce to this one by
/// relabelling up to a global sign.
pub fn omega3<T: Real>(omega: &impl Fn(T) -> T, k0: T, k1: T) -> T {
    omega(k0) + omega(k1) - omega(k0 + k1)
}

/// Grid certificate for the three-phonon gap of the pinned chain.
#[derive(Debug, Clone)]
pub struct GapReport<T> {
    /// (1 - e^{-r}) ω_min with r the dispersion decay exponent
    pub lower_bound: T,
    /// min |Ω₃| over the scan grid
    pub grid_min: T,
    /// grid point attaining the minimum
    pub argmin: (T, T),
    /// grid points per axis
    pub grid: usize,
}

impl<T: Real> GapReport<T> {
    /// True when the scanned minimum respects the analytic bound.
    pub fn bound_holds(&self) -> bool {
        self.grid_min >= self.lower_bound
    }
}

/// Scans |Ω₃| on an n×n wavenumber grid and compares with the analytic
/// lower bound (1 - e^{-r}) ω_min, which is positive for δ < 1/2.
pub fn omega3_gap<T: Real>(disp: &DispersionRelation<T>, n: usize) -> GapReport<T> {
    assert!(n >= 2);
    let omega = |k: T| disp.omega(k);
    let mut grid_min = T::max_value().unwrap();
    let mut argmin = (T::zero(), T::zero());
    for i in 0..n {
        let k0 = T::of_usize(i) / T::of_usize(n);
        for j in 0..n {
            let k1 = T::of_usize(j) / T::of_usize(n);
            let v = omega3(&omega, k0, k1).abs();
            if v < grid_min {
                grid_min = v;
                argmin = (k0, k1);
            }
        }
    }
    let decay = (-disp.gap_exponent()).exp();
    GapReport {
        lower_bound: (T::one() - decay) * disp.omega_min(),
        grid_min,
        argmin,
        grid: n,
    }
}

/// Located zeros of Ω₃ for a user-supplied dispersion.
#[derive(Debug, Clone)]
pub struct ZeroScanReport<T> {
    /// min |Ω₃| over the scan grid
    pub grid_min: T,
    /// (k₀, k₁) points with Ω₃ = 0, one bisected root per sign change of
    /// Ω₃(k₀, ·) along each scanned row
    pub zeros: Vec<(T, T)>,
    /// rows and columns of the scan
    pub grid: usize,
}

impl<T> ZeroScanReport<T> {
    pub fn has_zeros(&self) -> bool {
        !self.zeros.is_empty()
    }
}

/// Scans a generic 1-periodic frequency law for zeros of Ω₃. Each grid row
/// k₀ = i/n is swept in k₁; sign changes are bisected to full precision.
/// Dispersion laws with a three-phonon gap produce an empty zero list.
pub fn omega3_zero_scan<T: Real>(omega: impl Fn(T) -> T, n: usize) -> ZeroScanReport<T> {
    assert!(n >= 4);
    let mut zeros = Vec::new();
    let mut grid_min = T::max_value().unwrap();
    for i in 0..n {
        let k0 = T::of_usize(i) / T::of_usize(n);
        for root in scan_roots(|k1| omega3(&omega, k0, k1), T::zero(), T::one(), n) {
            zeros.push((k0, root));
        }
        for j in 0..n {
            let k1 = T::of_usize(j) / T::of_usize(n);
            grid_min = grid_min.min(omega3(&omega, k0, k1).abs());
        }
    }
    ZeroScanReport {
        grid_min,
        zeros,
        grid: n,
    }
}

/// One solved pair collision: the explicit branch p₁ and the momentum
/// partner p₃ = p₀ + p₁ - p₂ (wrapped to the window of its chain).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSolution<T> {
    pub p1: T,
    pub p3: T,
}

impl<T: Real> ConstraintSolution<T> {
    /// Ω₄ = ω(p₀) + ω(p₁) - ω(p₂) - ω(p₃) of the solved quadruple.
    pub fn residual(&self, disp: &DispersionRelation<T>, p0: T, p2: T) -> T {
        disp.omega_p(p0) + disp.omega_p(self.p1) - disp.omega_p(p2) - disp.omega_p(self.p3)
    }
}

/// Clamps an inverse-trigonometric argument to [-1, 1], tolerating only
/// round-off overshoot.
fn clamp_branch<T: Real>(t: T, func: &'static str, p0: T, p2: T) -> Result<T> {
    let tol = T::of(1e-12).max(T::default_epsilon() * T::of(64.0));
    if t.abs() > T::one() + tol {
        return Err(Error::BranchDomain {
            func,
            arg: t.to_f64(),
            p0: p0.to_f64(),
            p2: p2.to_f64(),
        });
    }
    Ok(t.clamp(-T::one(), T::one()))
}

/// Guarded Newton correction of a closed-form constraint root. The closed
/// forms lose digits where their inverse-trigonometric arguments approach
/// ±1, and the collision kernels amplify any leftover Ω₄ residual by
/// inverse frequencies; a step is taken only while it strictly shrinks the
/// residual and the constraint slope is well away from a branch collision.
fn polish_root<T: Real>(f: impl Fn(T) -> T, df: impl Fn(T) -> T, start: T) -> T {
    let slope_floor = T::default_epsilon().sqrt();
    let mut p = start;
    let mut best = f(p).abs();
    for _ in 0..2 {
        if best == T::zero() {
            break;
        }
        let slope = df(p);
        if slope.abs() < slope_floor {
            break;
        }
        let trial = p - f(p) / slope;
        let trial_res = f(trial).abs();
        if trial_res < best {
            p = trial;
            best = trial_res;
        } else {
            break;
        }
    }
    p
}

/// Exact pair-collision branch of the unpinned chain.
///
/// For ω(p) ∝ sin(p/2) on [0, 2π) the constraint
/// ω(x) + ω(p₁) - ω(y) - ω(x + p₁ - y) = 0 is solved by
///
/// ```text
/// p₁ = h(x, y) = (y - x)/2 + 2 arcsin( tan(|y - x|/4) cos((y + x)/4) )
/// ```
///
/// Inputs are wrapped to [0, 2π); the branch satisfies h(x, x) = 0 and
/// h(0, y) = y. Near the corners (0, 2π) and (2π, 0) the arcsin argument
/// reaches 1; overshoot beyond round-off is a [`Error::BranchDomain`].
pub fn h_fpu<T: Real>(x: T, y: T) -> Result<ConstraintSolution<T>> {
    let x = wrap_p(x);
    let y = wrap_p(y);
    let half = T::of(0.5);
    let quarter = T::of(0.25);
    let t = ((y - x).abs() * quarter).tan() * ((y + x) * quarter).cos();
    let t = clamp_branch(t, "h_fpu", x, y)?;
    let p1 = wrap_p((y - x) / T::of(2.0) + T::of(2.0) * t.asin());
    let omega = |p: T| (wrap_p(p) * half).sin();
    let p1 = wrap_p(polish_root(
        |p1| omega(x) + omega(p1) - omega(y) - omega(x + p1 - y),
        |p1| ((wrap_p(p1) * half).cos() - (wrap_p(x + p1 - y) * half).cos()) * half,
        p1,
    ));
    let p3 = wrap_p(x + p1 - y);
    Ok(ConstraintSolution { p1, p3 })
}

/// Exact pair-collision branch of the pinned chain.
///
/// For ν(p) = (1 - 2δ cos p)^{1/2} on (-π, π] the constraint
/// ν(p₀) + ν(p₁) - ν(p₂) - ν(p₀ + p₁ - p₂) = 0 is solved by
///
/// ```text
/// p₁ = (p₂ - p₀)/2 + sign(s) arccos( -cos s + 2δ (sin p₀ + sin p₂) sin s / D ),
/// s = (p₂ + p₀)/2,   D = 1 - δ(cos p₀ + cos p₂) + ν(p₀) ν(p₂),
/// ```
///
/// with sign(0) = +1. Inputs are wrapped to (-π, π]. The branch satisfies
/// h(p₀, -p₀) = π - p₀ and tends to π - p₀ - δ(sin p₀ + sin p₂) + O(δ²) for
/// small δ.
pub fn h_pinned<T: Real>(p0: T, p2: T, delta: T) -> Result<ConstraintSolution<T>> {
    assert!(
        delta > T::zero() && delta < T::of(0.5),
        "pinned chain requires 0 < δ < 1/2"
    );
    let p0 = wrap_p_sym(p0);
    let p2 = wrap_p_sym(p2);
    let half = T::of(0.5);
    let s = half * (p2 + p0);
    let nu0 = (T::one() - T::of(2.0) * delta * p0.cos()).sqrt();
    let nu2 = (T::one() - T::of(2.0) * delta * p2.cos()).sqrt();
    let den = T::one() - delta * (p0.cos() + p2.cos()) + nu0 * nu2;
    let arg = -s.cos() + T::of(2.0) * delta * (p0.sin() + p2.sin()) * s.sin() / den;
    let arg = clamp_branch(arg, "h_pinned", p0, p2)?;
    let p1 = wrap_p_sym(half * (p2 - p0) + sign_pos(s) * arg.acos());
    let nu = |p: T| (T::one() - T::of(2.0) * delta * p.cos()).sqrt();
    let p1 = wrap_p_sym(polish_root(
        |p1| nu0 + nu(p1) - nu2 - nu(p0 + p1 - p2),
        |p1| delta * (p1.sin() / nu(p1) - (p0 + p1 - p2).sin() / nu(p0 + p1 - p2)),
        p1,
    ));
    let p3 = wrap_p_sym(p0 + p1 - p2);
    Ok(ConstraintSolution { p1, p3 })
}

/// Kernel function F₊(x, y) = (cos x/2 + cos y/2)² + 4 sin(x/2) sin(y/2),
/// nonnegative on [0, 2π)² and vanishing only at the corners (0, 2π), (2π, 0).
#[inline]
pub fn f_plus<T: Real>(x: T, y: T) -> T {
    let half = T::of(0.5);
    let c = (half * x).cos() + (half * y).cos();
    c * c + T::of(4.0) * (half * x).sin() * (half * y).sin()
}

/// Kernel function F₋(x, y) = (cos x/2 + cos y/2)² - 4 sin(x/2) sin(y/2).
/// Changes sign; its positivity region in y at fixed x parametrizes the
/// p₁-side of the solution manifold.
#[inline]
pub fn f_minus<T: Real>(x: T, y: T) -> T {
    let half = T::of(0.5);
    let c = (half * x).cos() + (half * y).cos();
    c * c - T::of(4.0) * (half * x).sin() * (half * y).sin()
}

/// Two quadrature routes across the pair-collision manifold of the unpinned
/// chain at fixed p₀.
#[derive(Debug, Clone, Copy)]
pub struct ChangeOfVariablesCheck<T> {
    /// ∫ dp₂ G(p₀, h(p₀, p₂)) / √F₊(p₀, p₂)
    pub via_p2: T,
    /// 2 ∫ dp₁ 1(F₋ > 0) G(p₀, p₁) / √F₋(p₀, p₁)
    pub via_p1: T,
}

impl<T: Real> ChangeOfVariablesCheck<T> {
    pub fn relative_error(&self) -> T {
        (self.via_p2 - self.via_p1).abs() / self.via_p1.abs().max(T::default_epsilon())
    }
}

/// Evaluates both sides of the change-of-variables identity
///
/// ```text
/// ∫₀^{2π} dp₂ G(p₀, h(p₀,p₂)) / √F₊(p₀,p₂)
///     = 2 ∫₀^{2π} dp₁ 1(F₋(p₀,p₁) > 0) G(p₀,p₁) / √F₋(p₀,p₁)
/// ```
///
/// at fixed p₀ ∈ (0, 2π). The left side is smooth apart from cusps of h and
/// integrated adaptively; the right side has inverse-square-root endpoint
/// singularities at the F₋ sign changes, removed per interval by the sine
/// substitution.
pub fn change_of_variables_check<T: Real>(
    p0: T,
    g: impl Fn(T, T) -> T,
    tol: T,
) -> Result<ChangeOfVariablesCheck<T>> {
    let two_pi = T::two_pi();
    let mut branch_failure = None;
    let (via_p2, _) = adaptive_simpson(
        |p2| match h_fpu(p0, p2) {
            Ok(sol) => g(p0, sol.p1) / f_plus(p0, p2).sqrt(),
            Err(e) => {
                branch_failure.get_or_insert(e);
                T::zero()
            }
        },
        T::of(1e-9),
        two_pi - T::of(1e-9),
        tol,
        28,
    );
    if let Some(e) = branch_failure {
        return Err(e);
    }

    // roots of F₋(p₀, ·) bound the admissible p₁ intervals
    let mut cuts = vec![T::zero()];
    cuts.extend(scan_roots(|p1| f_minus(p0, p1), T::zero(), two_pi, 4096));
    if *cuts.last().unwrap() < two_pi {
        cuts.push(two_pi);
    }
    let rule = GlRule::new(80);
    let mut via_p1 = T::zero();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < T::of(1e-13) {
            continue;
        }
        let mid = T::of(0.5) * (a + b);
        if f_minus(p0, mid) > T::zero() {
            via_p1 += integrate_inv_sqrt(&rule, a, b, |p1| g(p0, p1), |p1| f_minus(p0, p1));
        }
    }
    via_p1 *= T::of(2.0);
    Ok(ChangeOfVariablesCheck { via_p2, via_p1 })
}
