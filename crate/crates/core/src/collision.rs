//! Reduced four-phonon collision operators.
//!
//! For pair collisions (σ = (+,+,-,-)) the momentum and energy constraints
//! are eliminated exactly through the solution branches of [`crate::constraints`],
//! leaving a single quadrature over p₂ at each output angle p₀:
//!
//! ```text
//! FPU chain       (9√2/π) λ₄² ω̄⁻⁸ ∫ dp₂ F₊^{-1/2} Π ω_ℓ · B
//! onsite, δ=1/2   9/(2^{7/2}π) λ₄² ∫ dp₂ F₊^{-1/2} (Π ω_ℓ)⁻¹ · B
//! onsite, δ<1/2   9/(16πδ) λ₄² ∫ dp₂ [ω₀ω₂ |ω₃ sin p₁ - ω₁ sin p₃|]⁻¹ · B
//! ```
//!
//! with the gain-loss bracket B = W₁W₂W₃ + W₀W₂W₃ - W₀W₁W₃ - W₀W₁W₂ and
//! p₁ the exact solution branch. Trivial solutions (p₂ = p₀ or p₃ = p₀) are
//! excluded structurally: the quadrature only traverses the non-perturbative
//! branch, on which the bracket vanishes at the residual trivial crossings,
//! keeping every integrand bounded.
//!
//! All three kernels share the symmetric factorization
//! Π_ℓ G(ω_ℓ)W_ℓ · (W₀⁻¹ + W₁⁻¹ - W₂⁻¹ - W₃⁻¹) with a per-mode positive
//! weight G, the form behind the H-theorem; [`c4_symmetric_form`] evaluates
//! it as an independent arithmetic route.

use crate::constraints::{h_fpu, h_pinned, omega3_zero_scan, GapReport, ZeroScanReport};
use crate::constraints::{f_plus, omega3_gap};
use crate::dispersion::DispersionRelation;
use crate::error::{Error, Result};
use crate::interp::PeriodicCubicSpline;
use crate::quadrature::scan_roots;
use crate::scalar::Real;
use crate::torus::{wrap_p, wrap_p_sym};
use rayon::prelude::*;

/// Positive phonon occupation on a uniform wavenumber grid with periodic
/// cubic interpolation between nodes.
#[derive(Debug, Clone)]
pub struct WignerFunction<T> {
    values: Vec<T>,
    spline: PeriodicCubicSpline<T>,
}

impl<T: Real> WignerFunction<T> {
    /// Grid values W(k_j), k_j = j/n. All entries must be finite and > 0.
    pub fn from_values(values: Vec<T>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::domain("Wigner grid needs at least 3 nodes"));
        }
        let mut min = values[0];
        let mut min_index = 0;
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::domain(format!("non-finite occupation at node {i}")));
            }
            if v < min {
                min = v;
                min_index = i;
            }
        }
        if min <= T::zero() {
            return Err(Error::NonPositiveWigner {
                min: min.to_f64(),
                index: min_index,
            });
        }
        let spline = PeriodicCubicSpline::new(values.clone(), T::two_pi());
        Ok(WignerFunction { values, spline })
    }

    /// Samples W(k) at k_j = j/n.
    pub fn from_fn(n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        Self::from_values((0..n).map(|j| f(T::of_usize(j) / T::of_usize(n))).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(self.values[0], |a, b| a.min(b))
    }

    /// Interpolated value at wavenumber k (any real, period 1).
    pub fn eval_k(&self, k: T) -> T {
        self.spline.eval(T::two_pi() * k)
    }
}

/// Read access to a Wigner function at an arbitrary angle p = 2πk.
///
/// Implemented by [`WignerFunction`] (periodic cubic interpolation) and by
/// any closure p ↦ W, which evaluates analytically known states without
/// interpolation error.
pub trait WignerEval<T: Real> {
    fn eval_p(&self, p: T) -> T;
}

impl<T: Real> WignerEval<T> for WignerFunction<T> {
    fn eval_p(&self, p: T) -> T {
        self.spline.eval(p)
    }
}

impl<T: Real, F: Fn(T) -> T> WignerEval<T> for F {
    fn eval_p(&self, p: T) -> T {
        self(p)
    }
}

/// One solved inner node of a prepared quadrature row: the partner angles
/// (p₁, p₂, p₃) and the kernel already multiplied by the cell weight.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PreparedNode<T> {
    pub(crate) angles: [T; 3],
    pub(crate) kernel_weight: T,
}

/// All W-independent geometry of the resolved quadrature at one output
/// angle.
#[derive(Debug, Clone)]
pub(crate) struct PreparedRow<T> {
    pub(crate) p0: T,
    pub(crate) nodes: Vec<PreparedNode<T>>,
}

/// Which reduced four-phonon operator to evaluate, with its couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CollisionModel<T> {
    /// Unpinned chain with quartic interparticle potential.
    Fpu { omega_bar: T, lambda4: T },
    /// Unpinned chain with quartic onsite potential.
    OnsiteUnpinned { omega_bar: T, lambda4: T },
    /// Pinned chain (0 < δ < 1/2) with quartic onsite potential.
    OnsitePinned { omega_bar: T, delta: T, lambda4: T },
}

impl<T: Real> CollisionModel<T> {
    pub fn fpu(omega_bar: T, lambda4: T) -> Result<Self> {
        DispersionRelation::unpinned(omega_bar)?;
        Ok(CollisionModel::Fpu { omega_bar, lambda4 })
    }

    pub fn onsite_unpinned(omega_bar: T, lambda4: T) -> Result<Self> {
        DispersionRelation::unpinned(omega_bar)?;
        Ok(CollisionModel::OnsiteUnpinned { omega_bar, lambda4 })
    }

    pub fn onsite_pinned(omega_bar: T, delta: T, lambda4: T) -> Result<Self> {
        if !(delta > T::zero() && delta < T::of(0.5)) {
            return Err(Error::domain(format!(
                "pinned model requires 0 < δ < 1/2, got {delta}"
            )));
        }
        DispersionRelation::new(omega_bar, delta)?;
        Ok(CollisionModel::OnsitePinned {
            omega_bar,
            delta,
            lambda4,
        })
    }

    pub fn dispersion(&self) -> DispersionRelation<T> {
        match *self {
            CollisionModel::Fpu { omega_bar, .. }
            | CollisionModel::OnsiteUnpinned { omega_bar, .. } => {
                DispersionRelation::unpinned(omega_bar).unwrap()
            }
            CollisionModel::OnsitePinned {
                omega_bar, delta, ..
            } => DispersionRelation::new(omega_bar, delta).unwrap(),
        }
    }

    pub fn lambda4(&self) -> T {
        match *self {
            CollisionModel::Fpu { lambda4, .. }
            | CollisionModel::OnsiteUnpinned { lambda4, .. }
            | CollisionModel::OnsitePinned { lambda4, .. } => lambda4,
        }
    }

    /// Constant in front of the p₂ quadrature.
    pub fn prefactor(&self) -> T {
        let l4 = self.lambda4();
        let l4sq = l4 * l4;
        match *self {
            CollisionModel::Fpu { omega_bar, .. } => {
                T::of(9.0) * T::of(2.0).sqrt() / T::pi() * l4sq / omega_bar.powi(8)
            }
            CollisionModel::OnsiteUnpinned { .. } => {
                T::of(9.0) / (T::of(2.0).powf(T::of(3.5)) * T::pi()) * l4sq
            }
            CollisionModel::OnsitePinned { delta, .. } => {
                T::of(9.0) / (T::of(16.0) * T::pi() * delta) * l4sq
            }
        }
    }

    /// Per-mode weight G(ω) of the symmetric factorization; positive for
    /// ω > 0.
    pub fn mode_weight(&self, omega: T) -> T {
        match self {
            CollisionModel::Fpu { .. } => omega,
            CollisionModel::OnsiteUnpinned { .. } | CollisionModel::OnsitePinned { .. } => {
                T::one() / omega
            }
        }
    }

    /// Quadrature cells (node, weight) of the inner p₂ integral at this p₀,
    /// composite midpoint with roughly n cells in total. Unpinned cells are
    /// anchored at 0, keeping the zero mode (where W may be
    /// equilibrium-singular) off the node set.
    ///
    /// The resolved integrands are smooth except where the solution branch
    /// meets the trivial one: there the bracket and the Jacobian vanish
    /// together and kernel · bracket is left with a bounded, sign-flipping
    /// jump. For the unpinned kernels ∂Ω/∂p₁ ∝ √F₊ never vanishes, so the
    /// branches stay disjoint and the only jump is the one at p₂ = p₀; for
    /// the pinned kernel the branch also crosses p₁ = p₂ wherever the signed
    /// Jacobian ω₃ sin p₁ - ω₁ sin p₃ changes sign along it. Pinned cells
    /// are therefore laid out in panels anchored at p₀ and at every detected
    /// sign change, so each panel integrates a smooth piece and the
    /// composite rule keeps its O(h²) envelope with a doubling-stable error
    /// estimate.
    pub(crate) fn p2_cells(&self, p0: T, n: usize) -> Vec<(T, T)> {
        let two_pi = T::two_pi();
        let half = T::of(0.5);
        if !matches!(self, CollisionModel::OnsitePinned { .. }) {
            let h = two_pi / T::of_usize(n);
            return (0..n).map(|j| (h * (T::of_usize(j) + half), h)).collect();
        }
        let signed_jac = |t: T| match self.quadruple(p0, wrap_p_sym(p0 + t)) {
            Some((ps, ws)) => ws[3] * ps[1].sin() - ws[1] * ps[3].sin(),
            None => T::of(f64::NAN),
        };
        let samples = n.max(512);
        let margin = two_pi / T::of_usize(samples) * half;
        let crossings = scan_roots(signed_jac, margin, two_pi - margin, samples);
        let mut bounds = Vec::with_capacity(crossings.len() + 2);
        bounds.push(T::zero());
        let sep = T::of(1e-9);
        for t in crossings {
            if t - bounds[bounds.len() - 1] > sep && two_pi - t > sep {
                bounds.push(t);
            }
        }
        bounds.push(two_pi);
        let mut cells = Vec::with_capacity(n + bounds.len());
        for pair in bounds.windows(2) {
            let len = pair[1] - pair[0];
            let m = (T::of_usize(n) * len / two_pi).round().to_f64() as usize;
            let m = m.max(1);
            let h = len / T::of_usize(m);
            for j in 0..m {
                let t = pair[0] + h * (T::of_usize(j) + half);
                cells.push((wrap_p_sym(p0 + t), h));
            }
        }
        cells
    }

    /// Angles and frequencies of the solved quadruple at (p₀, p₂), or None
    /// at the measure-zero branch-domain corners.
    pub(crate) fn quadruple(&self, p0: T, p2: T) -> Option<([T; 4], [T; 4])> {
        let disp = self.dispersion();
        let sol = match self {
            CollisionModel::OnsitePinned { delta, .. } => h_pinned(p0, p2, *delta).ok()?,
            _ => h_fpu(p0, p2).ok()?,
        };
        let ps = [p0, sol.p1, p2, sol.p3];
        let ws = [
            disp.omega_p(p0),
            disp.omega_p(sol.p1),
            disp.omega_p(p2),
            disp.omega_p(sol.p3),
        ];
        Some((ps, ws))
    }

    /// Kernel of the resolved integral (everything multiplying the bracket
    /// except the prefactor).
    fn kernel(&self, p0: T, p2: T, ps: &[T; 4], ws: &[T; 4]) -> T {
        match self {
            CollisionModel::Fpu { .. } => {
                ws[0] * ws[1] * ws[2] * ws[3] / f_plus(p0, p2).sqrt()
            }
            CollisionModel::OnsiteUnpinned { .. } => {
                T::one() / (ws[0] * ws[1] * ws[2] * ws[3] * f_plus(p0, p2).sqrt())
            }
            CollisionModel::OnsitePinned { .. } => {
                let jac = (ws[3] * ps[1].sin() - ws[1] * ps[3].sin()).abs();
                T::one() / (ws[0] * ws[2] * jac)
            }
        }
    }

    /// 𝒞[W](p₀) by the resolved quadrature with n inner nodes.
    ///
    /// The gain-loss bracket is evaluated in product form, so W is never
    /// divided by; only strict positivity of the supplied values matters.
    pub fn rate(&self, w: &impl WignerEval<T>, p0: T, n: usize) -> T {
        self.rate_prepared(w, &self.prepared_row(p0, n))
    }

    /// Geometry of one output angle solved once: the quadruple angles and
    /// kernel · cell-weight of every inner node. Everything here is
    /// independent of W, so time stepping reuses it across stages.
    pub(crate) fn prepared_row(&self, p0: T, n: usize) -> PreparedRow<T> {
        let p0 = self.wrap(p0);
        let nodes = self
            .p2_cells(p0, n)
            .into_iter()
            .filter_map(|(p2, dp)| {
                let (ps, ws) = self.quadruple(p0, p2)?;
                Some(PreparedNode {
                    angles: [ps[1], ps[2], ps[3]],
                    kernel_weight: self.kernel(p0, p2, &ps, &ws) * dp,
                })
            })
            .collect();
        PreparedRow { p0, nodes }
    }

    /// Rate over a precomputed row; four W evaluations per node.
    pub(crate) fn rate_prepared(&self, w: &impl WignerEval<T>, row: &PreparedRow<T>) -> T {
        let w0 = w.eval_p(row.p0);
        let mut acc = T::zero();
        for node in &row.nodes {
            let w1 = w.eval_p(node.angles[0]);
            let w2 = w.eval_p(node.angles[1]);
            let w3 = w.eval_p(node.angles[2]);
            let bracket = w1 * w2 * w3 + w0 * w2 * w3 - w0 * w1 * w3 - w0 * w1 * w2;
            acc += node.kernel_weight * bracket;
        }
        self.prefactor() * acc
    }

    /// Prepared rows for the output grid k_j = j/n_out.
    pub(crate) fn prepared_grid(&self, n_out: usize, n_quad: usize) -> Vec<PreparedRow<T>>
    where
        T: Send + Sync,
    {
        (0..n_out)
            .into_par_iter()
            .map(|j| self.prepared_row(T::two_pi() * T::of_usize(j) / T::of_usize(n_out), n_quad))
            .collect()
    }

    /// Same as [`CollisionModel::rate`] with a doubling-based error
    /// estimate; reports quadrature nonconvergence instead of returning a
    /// poor value.
    pub fn rate_checked(&self, w: &impl WignerEval<T>, p0: T, n: usize, tol: T) -> Result<T> {
        let coarse = self.rate(w, p0, n);
        let fine = self.rate(w, p0, 2 * n);
        let err = (fine - coarse).abs();
        if err > tol {
            return Err(Error::Quadrature {
                error: err.to_f64(),
                tol: tol.to_f64(),
                context: format!("collision rate at p0 = {}", p0.to_f64()),
            });
        }
        Ok(fine)
    }

    /// 𝒞[W] on the output grid k_j = j/n_out, inner quadrature n_quad,
    /// evaluated in parallel.
    pub fn rate_grid(
        &self,
        w: &(impl WignerEval<T> + Sync),
        n_out: usize,
        n_quad: usize,
    ) -> Vec<T>
    where
        T: Send + Sync,
    {
        (0..n_out)
            .into_par_iter()
            .map(|j| {
                let p0 = T::two_pi() * T::of_usize(j) / T::of_usize(n_out);
                self.rate(w, p0, n_quad)
            })
            .collect()
    }

    /// Inner quadrature of the symmetric factorization at fixed p₀, with the
    /// difference of inverse occupations raised to `power`:
    ///
    /// ```text
    /// Σ_nodes J(p₀,p₂) Π_ℓ G(ω_ℓ)W_ℓ · (W₀⁻¹ + W₁⁻¹ - W₂⁻¹ - W₃⁻¹)^power
    /// ```
    ///
    /// power = 1 recovers the collision rate, power = 2 the entropy
    /// production cell, nonnegative term by term.
    pub fn symmetric_cell(&self, w: &impl WignerEval<T>, p0: T, n: usize, power: u32) -> T {
        let p0 = self.wrap(p0);
        let w0 = w.eval_p(p0);
        let mut acc = T::zero();
        for (p2, dp) in self.p2_cells(p0, n) {
            let Some((ps, ws)) = self.quadruple(p0, p2) else {
                continue;
            };
            let occ = [w0, w.eval_p(ps[1]), w.eval_p(ps[2]), w.eval_p(ps[3])];
            let mut gw = T::one();
            for l in 0..4 {
                gw *= self.mode_weight(ws[l]) * occ[l];
            }
            let diff = T::one() / occ[0] + T::one() / occ[1]
                - T::one() / occ[2]
                - T::one() / occ[3];
            let measure = match self {
                CollisionModel::OnsitePinned { .. } => {
                    // 1/|sin p₁/ω₁ - sin p₃/ω₃|, the symmetric form of the
                    // resolved Jacobian
                    T::one() / (ps[1].sin() / ws[1] - ps[3].sin() / ws[3]).abs()
                }
                _ => T::one() / f_plus(p0, p2).sqrt(),
            };
            acc += measure * gw * diff.powi(power as i32) * dp;
        }
        self.prefactor() * acc
    }

    /// Largest |kernel · bracket| summand of the resolved quadrature; for
    /// twice continuously differentiable W this stays bounded as n grows,
    /// which is the admissibility condition of the pinned kernel.
    pub fn boundedness_diagnostic(&self, w: &impl WignerEval<T>, p0: T, n: usize) -> T {
        let p0 = self.wrap(p0);
        let w0 = w.eval_p(p0);
        let mut worst = T::zero();
        for (p2, _) in self.p2_cells(p0, n) {
            let Some((ps, ws)) = self.quadruple(p0, p2) else {
                continue;
            };
            let w1 = w.eval_p(ps[1]);
            let w2 = w.eval_p(ps[2]);
            let w3 = w.eval_p(ps[3]);
            let bracket = w1 * w2 * w3 + w0 * w2 * w3 - w0 * w1 * w3 - w0 * w1 * w2;
            worst = worst.max((self.kernel(p0, p2, &ps, &ws) * bracket).abs());
        }
        worst
    }

    fn wrap(&self, p0: T) -> T {
        match self {
            CollisionModel::OnsitePinned { .. } => wrap_p_sym(p0),
            _ => wrap_p(p0),
        }
    }
}

/// Resolved collision rate of the FPU chain at angle p₀.
pub fn c4_fpu<T: Real>(
    model: &CollisionModel<T>,
    w: &impl WignerEval<T>,
    p0: T,
    n: usize,
) -> T {
    assert!(
        matches!(model, CollisionModel::Fpu { .. }),
        "c4_fpu evaluates the unpinned interparticle model"
    );
    model.rate(w, p0, n)
}

/// Resolved collision rate of the pinned onsite chain at angle p₀.
pub fn c4_onsite_pinned<T: Real>(
    model: &CollisionModel<T>,
    w: &impl WignerEval<T>,
    p0: T,
    n: usize,
) -> T {
    assert!(
        matches!(model, CollisionModel::OnsitePinned { .. }),
        "c4_onsite_pinned evaluates the pinned onsite model"
    );
    model.rate(w, p0, n)
}

/// Collision rate through the symmetric Π G(ω)W · (Σ ±W⁻¹) factorization at
/// wavenumber k₀; agrees with the resolved route to round-off on smooth
/// positive W.
pub fn c4_symmetric_form<T: Real>(
    model: &CollisionModel<T>,
    w: &impl WignerEval<T>,
    k0: T,
    n: usize,
) -> T {
    model.symmetric_cell(w, T::two_pi() * k0, n, 1)
}

/// Why the three-phonon operator vanishes for a given chain.
#[derive(Debug, Clone)]
pub enum ThreePhononEvidence<T> {
    /// Pinned chain: |Ω₃| is bounded away from zero.
    SpectralGap(GapReport<T>),
    /// Unpinned chain: Ω₃ vanishes only where a mode hits k = 0, and the
    /// vertex prefactor Π |sin πk_ℓ| vanishes there.
    VanishingPrefactor {
        scan: ZeroScanReport<T>,
        /// max of Π |sin πk_ℓ| over the located zero set
        max_prefactor: T,
    },
}

/// The three-phonon operator of a nearest-neighbour chain: identically zero,
/// carrying the machine-checked reason.
#[derive(Debug, Clone)]
pub struct ThreePhononOperator<T> {
    pub evidence: ThreePhononEvidence<T>,
}

impl<T: Real> ThreePhononOperator<T> {
    /// The operator itself: zero for every state and wavenumber.
    pub fn rate(&self, _w: &impl WignerEval<T>, _k0: T) -> T {
        T::zero()
    }
}

/// Dispersion whose three-phonon processes are to be classified.
pub enum DispersionInput<'a, T> {
    NearestNeighbour(DispersionRelation<T>),
    /// ω sampled at k_j = j/len; must match a nearest-neighbour law to be
    /// accepted.
    Sampled(&'a [T]),
}

/// Builds the vanishing three-phonon operator, or refuses when the
/// dispersion genuinely admits three-phonon processes.
///
/// Pinned chains are certified by the spectral gap of Ω₃; the unpinned chain
/// by its vertex prefactor vanishing on the Ω₃ zero set. Sampled dispersions
/// are matched against the nearest-neighbour family first; anything else is
/// rejected with a pointer to [`omega3_zero_scan`] since a nontrivial zero
/// set (e.g. ω = 1 - cos 2πk) carries genuine processes.
pub fn c3_nearest_neighbour<T: Real>(
    input: DispersionInput<'_, T>,
    grid: usize,
) -> Result<ThreePhononOperator<T>> {
    let disp = match input {
        DispersionInput::NearestNeighbour(d) => d,
        DispersionInput::Sampled(values) => fit_nearest_neighbour(values)?,
    };
    if disp.gapless() {
        let scan = omega3_zero_scan(|k| disp.omega(k), grid);
        let mut max_prefactor = T::zero();
        for &(k0, k1) in &scan.zeros {
            let pf = (T::pi() * k0).sin().abs()
                * (T::pi() * k1).sin().abs()
                * (T::pi() * (k0 + k1)).sin().abs();
            max_prefactor = max_prefactor.max(pf);
        }
        let tol = T::of(1e-10);
        if max_prefactor > tol {
            return Err(Error::NonNearestNeighbour(format!(
                "three-phonon vertex does not vanish on the zero set (max {}); \
                 inspect the dispersion with omega3_zero_scan",
                max_prefactor.to_f64()
            )));
        }
        return Ok(ThreePhononOperator {
            evidence: ThreePhononEvidence::VanishingPrefactor {
                scan,
                max_prefactor,
            },
        });
    }
    let report = omega3_gap(&disp, grid);
    if !report.bound_holds() || report.lower_bound <= T::zero() {
        return Err(Error::NonNearestNeighbour(format!(
            "three-phonon gap not certified (grid min {}, bound {}); \
             inspect the dispersion with omega3_zero_scan",
            report.grid_min.to_f64(),
            report.lower_bound.to_f64()
        )));
    }
    Ok(ThreePhononOperator {
        evidence: ThreePhononEvidence::SpectralGap(report),
    })
}

/// Least-squares fit of sampled ω against ω² = a - b cos 2πk; accepts only
/// an essentially exact match with a > 0 and 0 < b/(2a) ≤ 1/2.
fn fit_nearest_neighbour<T: Real>(values: &[T]) -> Result<DispersionRelation<T>> {
    let n = values.len();
    if n < 8 {
        return Err(Error::domain("need at least 8 dispersion samples"));
    }
    let mut a = T::zero();
    let mut b = T::zero();
    for (j, &w) in values.iter().enumerate() {
        let phase = T::two_pi() * T::of_usize(j) / T::of_usize(n);
        a += w * w;
        b += -(w * w) * phase.cos() * T::of(2.0);
    }
    a /= T::of_usize(n);
    b /= T::of_usize(n);
    let mut residual = T::zero();
    for (j, &w) in values.iter().enumerate() {
        let phase = T::two_pi() * T::of_usize(j) / T::of_usize(n);
        residual = residual.max((w * w - (a - b * phase.cos())).abs());
    }
    let scale = a.abs().max(b.abs());
    if residual > T::of(1e-8) * scale || !(a > T::zero()) {
        return Err(Error::NonNearestNeighbour(format!(
            "sampled dispersion is not of nearest-neighbour form \
             (fit residual {:.3e}); inspect it with omega3_zero_scan",
            residual.to_f64()
        )));
    }
    let omega_bar = a.sqrt();
    let delta = b / (T::of(2.0) * a);
    DispersionRelation::new(omega_bar, delta).map_err(|_| {
        Error::NonNearestNeighbour(format!(
            "fitted coupling ratio {} outside (0, 1/2]",
            delta.to_f64()
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::TAU;

    fn smooth_positive(p: f64) -> f64 {
        0.8 + 0.3 * p.cos() + 0.1 * (2.0 * p).sin()
    }

    fn models() -> Vec<CollisionModel<f64>> {
        vec![
            CollisionModel::fpu(1.0, 0.7).unwrap(),
            CollisionModel::onsite_unpinned(1.0, 0.7).unwrap(),
            CollisionModel::onsite_pinned(1.0, 0.3, 0.7).unwrap(),
        ]
    }

    #[test]
    fn wigner_rejects_nonpositive_and_nonfinite() {
        assert!(WignerFunction::from_values(vec![1.0, 2.0, -0.1]).is_err());
        assert!(WignerFunction::from_values(vec![1.0, 0.0, 1.0]).is_err());
        assert!(WignerFunction::from_values(vec![1.0, f64::NAN, 1.0]).is_err());
        let w = WignerFunction::from_values(vec![1.0, 2.0, 3.0, 2.0]).unwrap();
        assert_eq!(w.min_value(), 1.0);
    }

    #[test]
    fn wigner_interpolation_hits_nodes() {
        let w = WignerFunction::from_fn(32, |k: f64| 1.0 + 0.5 * (TAU * k).cos()).unwrap();
        for j in 0..32 {
            let k = j as f64 / 32.0;
            assert_relative_eq!(w.eval_k(k), 1.0 + 0.5 * (TAU * k).cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn rate_scales_as_coupling_squared() {
        let w = |p: f64| smooth_positive(p);
        for model in models() {
            let doubled = match model {
                CollisionModel::Fpu { omega_bar, lambda4 } => {
                    CollisionModel::fpu(omega_bar, 2.0 * lambda4).unwrap()
                }
                CollisionModel::OnsiteUnpinned { omega_bar, lambda4 } => {
                    CollisionModel::onsite_unpinned(omega_bar, 2.0 * lambda4).unwrap()
                }
                CollisionModel::OnsitePinned {
                    omega_bar,
                    delta,
                    lambda4,
                } => CollisionModel::onsite_pinned(omega_bar, delta, 2.0 * lambda4).unwrap(),
            };
            let r1 = model.rate(&w, 1.3, 256);
            let r4 = doubled.rate(&w, 1.3, 256);
            assert_relative_eq!(r4, 4.0 * r1, max_relative = 1e-14);
        }
    }

    #[test]
    fn equilibrium_is_annihilated_pointwise() {
        for model in models() {
            let disp = model.dispersion();
            let beta = 1.7;
            let mu = -0.2;
            let weq = move |p: f64| 1.0 / (beta * (disp.omega_p(p) - mu));
            let scale = model.rate(&|p: f64| smooth_positive(p), 1.1, 512).abs();
            // The bracket carries an absolute round-off floor of order
            // W³·eps however accurately the angles solve the constraint;
            // the inverse-frequency kernel of the gapless onsite chain
            // amplifies that floor near the band-bottom corners, while the
            // interparticle kernel vanishes there and the pinned kernel is
            // gapped.
            let tol = match model {
                CollisionModel::OnsiteUnpinned { .. } => 1e-7,
                _ => 1e-10,
            };
            for &p0 in &[0.4, 1.1, 2.0, 3.0, -1.3] {
                let r = model.rate(&weq, p0, 512);
                assert!(
                    r.abs() <= tol * scale.max(1e-30),
                    "equilibrium not annihilated for {model:?} at p0={p0}: {r}"
                );
            }
        }
    }

    #[test]
    fn symmetric_form_matches_resolved_route() {
        for model in models() {
            for &p0 in &[0.7, 1.9, 2.6] {
                let resolved = model.rate(&|p: f64| smooth_positive(p), p0, 384);
                let symmetric =
                    model.symmetric_cell(&|p: f64| smooth_positive(p), p0, 384, 1);
                assert_relative_eq!(resolved, symmetric, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn symmetric_form_free_function_takes_wavenumber() {
        let model = CollisionModel::onsite_pinned(1.0, 0.3, 0.5).unwrap();
        let k0 = 0.37;
        let via_k = c4_symmetric_form(&model, &|p: f64| smooth_positive(p), k0, 256);
        let via_p = model.symmetric_cell(&|p: f64| smooth_positive(p), TAU * k0, 256, 1);
        assert_relative_eq!(via_k, via_p, max_relative = 1e-14);
    }

    #[test]
    fn entropy_cell_is_nonnegative_and_zero_at_equilibrium() {
        for model in models() {
            let disp = model.dispersion();
            let cell = model.symmetric_cell(&|p: f64| smooth_positive(p), 0.9, 256, 2);
            assert!(cell >= 0.0);
            let weq = move |p: f64| 1.0 / (2.0 * (disp.omega_p(p) + 0.3));
            let cell_eq = model.symmetric_cell(&weq, 0.9, 256, 2);
            let scale = cell.max(1e-30);
            assert!(cell_eq <= 1e-18 * scale, "entropy cell at equilibrium: {cell_eq}");
        }
    }

    #[test]
    fn mode_weight_is_positive() {
        for model in models() {
            for i in 1..50 {
                let omega = 0.05 * i as f64;
                assert!(model.mode_weight(omega) > 0.0);
            }
        }
    }

    #[test]
    fn pinned_integrand_stays_bounded_under_refinement() {
        let model = CollisionModel::onsite_pinned(1.0, 0.3, 0.7).unwrap();
        let w = |p: f64| smooth_positive(p);
        let coarse = model.boundedness_diagnostic(&w, 1.1, 512);
        let fine = model.boundedness_diagnostic(&w, 1.1, 4096);
        assert!(
            fine < 1.5 * coarse + 1e-12,
            "pinned summand grows under refinement: {coarse} -> {fine}"
        );
    }

    #[test]
    fn rate_checked_converges_on_smooth_data() {
        let model = CollisionModel::onsite_pinned(1.0, 0.3, 0.7).unwrap();
        let v = model
            .rate_checked(&|p: f64| smooth_positive(p), 1.3, 512, 1e-6)
            .unwrap();
        let oracle = model.rate(&|p: f64| smooth_positive(p), 1.3, 8192);
        assert_relative_eq!(v, oracle, max_relative = 1e-5);
    }

    #[test]
    fn grid_evaluation_matches_pointwise() {
        let model = CollisionModel::fpu(1.0, 0.5).unwrap();
        let w = WignerFunction::from_fn(64, |k: f64| 1.0 + 0.4 * (TAU * k).cos()).unwrap();
        let grid = model.rate_grid(&w, 16, 128);
        for (j, &g) in grid.iter().enumerate() {
            let p0 = TAU * j as f64 / 16.0;
            assert_relative_eq!(g, model.rate(&w, p0, 128), max_relative = 1e-13);
        }
    }

    #[test]
    fn fpu_rate_vanishes_at_the_zero_mode() {
        let model = CollisionModel::fpu(1.0, 0.5).unwrap();
        let r = model.rate(&|p: f64| smooth_positive(p), 0.0, 256);
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn three_phonon_pinned_is_certified_by_the_gap() {
        let disp = DispersionRelation::new(1.0, 0.3f64).unwrap();
        let op = c3_nearest_neighbour(DispersionInput::NearestNeighbour(disp), 128).unwrap();
        match &op.evidence {
            ThreePhononEvidence::SpectralGap(report) => {
                assert!(report.lower_bound > 0.0);
                assert!(report.bound_holds());
            }
            other => panic!("expected gap evidence, got {other:?}"),
        }
        assert_eq!(op.rate(&|p: f64| smooth_positive(p), 0.3), 0.0);
    }

    #[test]
    fn three_phonon_unpinned_is_certified_by_the_prefactor() {
        let disp = DispersionRelation::unpinned(1.0f64).unwrap();
        let op = c3_nearest_neighbour(DispersionInput::NearestNeighbour(disp), 96).unwrap();
        match &op.evidence {
            ThreePhononEvidence::VanishingPrefactor {
                scan,
                max_prefactor,
            } => {
                assert!(scan.has_zeros());
                assert!(*max_prefactor < 1e-10);
            }
            other => panic!("expected prefactor evidence, got {other:?}"),
        }
    }

    #[test]
    fn three_phonon_rejects_genuine_processes() {
        let n = 256;
        let sampled: Vec<f64> = (0..n)
            .map(|j| 1.0 - (TAU * j as f64 / n as f64).cos())
            .collect();
        let err = c3_nearest_neighbour(DispersionInput::Sampled(&sampled), 96).unwrap_err();
        assert!(matches!(err, Error::NonNearestNeighbour(_)));
    }

    #[test]
    fn sampled_nearest_neighbour_dispersion_is_recognised() {
        let disp = DispersionRelation::new(1.4, 0.3f64).unwrap();
        let n = 256;
        let sampled: Vec<f64> = (0..n).map(|j| disp.omega(j as f64 / n as f64)).collect();
        let op = c3_nearest_neighbour(DispersionInput::Sampled(&sampled), 64).unwrap();
        assert!(matches!(op.evidence, ThreePhononEvidence::SpectralGap(_)));
    }
}
