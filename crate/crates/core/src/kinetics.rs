//! Homogeneous phonon Boltzmann dynamics: thermal states, entropy and its
//! production rate, adaptive time integration, and recovery of the steady
//! state from the conserved integrals.
//!
//! The collision operators conserve phonon number ∫W dk and energy
//! ∫ωW dk, and the entropy S[W] = ∫ ln W dk never decreases along
//! solutions. The relaxation endpoint is therefore the two-parameter
//! family W^eq = 1/(β(ω - μ)) selected by the initial invariants, with
//! μ < min ω required for positivity and integrability.

use crate::collision::{CollisionModel, WignerEval, WignerFunction};
use crate::dispersion::DispersionRelation;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus::wrap_p;
use rayon::prelude::*;

/// Thermal state W^eq(k) = 1/(β(ω(k) - μ)).
#[derive(Debug, Clone, Copy)]
pub struct EquilibriumState<T> {
    beta: T,
    mu: T,
    disp: DispersionRelation<T>,
}

impl<T: Real> EquilibriumState<T> {
    /// Requires β > 0 and μ < min_k ω(k); for a gapless dispersion this
    /// means μ < 0 (μ = 0 gives the integrable but unbounded W = 1/(βω),
    /// which is representable through closures instead).
    pub fn new(beta: T, mu: T, disp: DispersionRelation<T>) -> Result<Self> {
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(Error::domain(format!("inverse temperature must be positive, got {beta}")));
        }
        let omega_min = disp.omega_min();
        if !(mu < omega_min) {
            return Err(Error::domain(format!(
                "chemical potential must lie below the band, got mu = {mu} with min omega = {omega_min}"
            )));
        }
        Ok(EquilibriumState { beta, mu, disp })
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn dispersion(&self) -> &DispersionRelation<T> {
        &self.disp
    }

    /// W^eq at angle p.
    pub fn occupation_p(&self, p: T) -> T {
        T::one() / (self.beta * (self.disp.omega_p(p) - self.mu))
    }

    /// W^eq at wavenumber k.
    pub fn occupation_k(&self, k: T) -> T {
        self.occupation_p(T::two_pi() * k)
    }

    /// Samples on the uniform grid k_j = j/n.
    pub fn sample(&self, n: usize) -> Vec<T> {
        (0..n)
            .map(|j| self.occupation_k(T::of_usize(j) / T::of_usize(n)))
            .collect()
    }
}

impl<T: Real> WignerEval<T> for EquilibriumState<T> {
    fn eval_p(&self, p: T) -> T {
        self.occupation_p(p)
    }
}

/// Entropy density S[W] = ∫ ln W dk of a state on the uniform grid,
/// evaluated as the grid mean (1/N) Σ ln W_j; exponentially accurate for
/// analytic W. Requires every value strictly positive.
pub fn entropy<T: Real>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::domain("entropy of an empty grid"));
    }
    let mut acc = T::zero();
    for (i, &v) in values.iter().enumerate() {
        if !(v > T::zero()) {
            return Err(Error::NonPositiveWigner {
                min: v.to_f64(),
                index: i,
            });
        }
        acc += v.ln();
    }
    Ok(acc / T::of_usize(values.len()))
}

/// Entropy production rate dS/dt = ∫ 𝒞[W]/W dk in its manifestly
/// nonnegative quarter-symmetrized form,
///
/// ```text
/// (1/4) ∫∫ dk₀ dp₂ J(p₀,p₂) Π_ℓ G(ω_ℓ)W_ℓ · (W₀⁻¹ + W₁⁻¹ - W₂⁻¹ - W₃⁻¹)²
/// ```
///
/// with m_outer midpoint nodes in k₀ and n_inner nodes per inner
/// quadrature. Nonnegative term by term, zero exactly on the equilibrium
/// family.
pub fn entropy_production<T: Real>(
    model: &CollisionModel<T>,
    w: &(impl WignerEval<T> + Sync),
    m_outer: usize,
    n_inner: usize,
) -> T
where
    T: Send + Sync,
{
    let quarter = T::of(0.25);
    let sum: T = (0..m_outer)
        .into_par_iter()
        .map(|j| {
            let p0 = T::two_pi() * (T::of_usize(j) + T::of(0.5)) / T::of_usize(m_outer);
            model.symmetric_cell(w, p0, n_inner, 2)
        })
        .sum();
    quarter * sum / T::of_usize(m_outer)
}

/// Step-size and accuracy policy of [`evolve`].
#[derive(Debug, Clone, Copy)]
pub struct StepControl<T> {
    /// Relative tolerance of the embedded error estimate.
    pub rtol: T,
    /// Absolute tolerance floor.
    pub atol: T,
    /// First step; None picks one from the initial rate magnitude.
    pub initial_dt: Option<T>,
    /// Abort after this many accepted steps.
    pub max_steps: usize,
    /// Inner quadrature nodes per collision evaluation.
    pub inner_nodes: usize,
}

impl<T: Real> Default for StepControl<T> {
    fn default() -> Self {
        StepControl {
            rtol: T::of(1e-7),
            atol: T::of(1e-10),
            initial_dt: None,
            max_steps: 100_000,
            inner_nodes: 256,
        }
    }
}

/// One recorded instant of an evolution.
#[derive(Debug, Clone)]
pub struct TraceEntry<T> {
    pub t: T,
    pub state: Vec<T>,
    /// S[W_t]
    pub entropy: T,
    /// Quarter-symmetrized production rate D[W_t] ≥ 0.
    pub production: T,
    /// ∫W dk (grid mean)
    pub number: T,
    /// ∫ωW dk (grid mean)
    pub energy: T,
}

/// Accepted-step history of one [`evolve`] run.
#[derive(Debug, Clone)]
pub struct EvolutionTrace<T> {
    pub entries: Vec<TraceEntry<T>>,
}

impl<T: Real> EvolutionTrace<T> {
    pub fn initial(&self) -> &TraceEntry<T> {
        self.entries.first().expect("trace has at least the initial entry")
    }

    pub fn last(&self) -> &TraceEntry<T> {
        self.entries.last().expect("trace has at least the initial entry")
    }

    /// Largest decrease of entropy between consecutive entries (0 when
    /// monotone nondecreasing).
    pub fn worst_entropy_decrease(&self) -> T {
        let mut worst = T::zero();
        for pair in self.entries.windows(2) {
            worst = worst.max(pair[0].entropy - pair[1].entropy);
        }
        worst
    }

    /// Maximum relative drift of (∫W, ∫ωW) from their initial values.
    pub fn conservation_drift(&self) -> (T, T) {
        let n0 = self.initial().number;
        let e0 = self.initial().energy;
        let mut dn = T::zero();
        let mut de = T::zero();
        for entry in &self.entries {
            dn = dn.max((entry.number - n0).abs() / n0.abs());
            de = de.max((entry.energy - e0).abs() / e0.abs());
        }
        (dn, de)
    }
}

/// Grid means (∫W, ∫ωW) of a state sampled at k_j = j/N.
pub fn invariants<T: Real>(disp: &DispersionRelation<T>, values: &[T]) -> (T, T) {
    let n = T::of_usize(values.len());
    let mut number = T::zero();
    let mut energy = T::zero();
    for (j, &v) in values.iter().enumerate() {
        number += v;
        energy += disp.omega(T::of_usize(j) / T::of_usize(values.len())) * v;
    }
    (number / n, energy / n)
}

// Cash-Karp embedded pair: 6 stages, 5th-order solution with 4th-order
// error estimate. The equation is autonomous, so only the stage weights
// matter.
const CK_A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [0.3, -0.9, 1.2, 0.0, 0.0],
    [-11.0 / 54.0, 2.5, -70.0 / 27.0, 35.0 / 27.0, 0.0],
    [
        1631.0 / 55296.0,
        175.0 / 512.0,
        575.0 / 13824.0,
        44275.0 / 110592.0,
        253.0 / 4096.0,
    ],
];
const CK_B5: [f64; 6] = [
    37.0 / 378.0,
    0.0,
    250.0 / 621.0,
    125.0 / 594.0,
    0.0,
    512.0 / 1771.0,
];
const CK_B4: [f64; 6] = [
    2825.0 / 27648.0,
    0.0,
    18575.0 / 48384.0,
    13525.0 / 55296.0,
    277.0 / 14336.0,
    0.25,
];

/// Integrates ∂_t W = 𝒞₄[W] from the grid state w0 (values at k_j = j/N)
/// to t_end with an explicit embedded Runge-Kutta pair and a positivity
/// guard: steps that take any grid value nonpositive are rejected and
/// halved. Persistent rejection drives the step below resolution and
/// aborts with [`Error::StepUnderflow`]; the three-phonon channel of
/// nearest-neighbour chains vanishes identically and contributes nothing.
pub fn evolve<T: Real + Send + Sync>(
    model: &CollisionModel<T>,
    w0: &[T],
    t_end: T,
    control: &StepControl<T>,
) -> Result<EvolutionTrace<T>> {
    if w0.len() < 3 {
        return Err(Error::domain("evolution grid needs at least 3 nodes"));
    }
    if !(t_end > T::zero()) {
        return Err(Error::domain(format!("t_end must be positive, got {t_end}")));
    }
    let disp = model.dispersion();
    let rows = model.prepared_grid(w0.len(), control.inner_nodes);
    let rhs = |values: &[T]| -> Result<Vec<T>> {
        let w = WignerFunction::from_values(values.to_vec())?;
        Ok(rows
            .par_iter()
            .map(|row| model.rate_prepared(&w, row))
            .collect())
    };

    let mut trace = EvolutionTrace { entries: Vec::new() };
    let record = |trace: &mut EvolutionTrace<T>, t: T, state: &[T]| -> Result<()> {
        let w = WignerFunction::from_values(state.to_vec())?;
        let (number, energy) = invariants(&disp, state);
        trace.entries.push(TraceEntry {
            t,
            state: state.to_vec(),
            entropy: entropy(state)?,
            production: entropy_production(model, &w, state.len(), control.inner_nodes),
            number,
            energy,
        });
        Ok(())
    };

    let mut t = T::zero();
    let mut state = w0.to_vec();
    record(&mut trace, t, &state)?;

    let f0 = rhs(&state)?;
    let sup = |v: &[T]| v.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let mut dt = control.initial_dt.unwrap_or_else(|| {
        let scale = control.atol + control.rtol * sup(&state);
        (T::of(0.1) * scale / (sup(&f0) + T::of(1e-30))).min(t_end)
    });
    let dt_floor = T::of(1e-13) * t_end.max(T::one());

    let mut stages: Vec<Vec<T>> = vec![f0; 6];
    let n = state.len();
    for _ in 0..control.max_steps {
        if t >= t_end {
            return Ok(trace);
        }
        dt = dt.min(t_end - t);
        if dt < dt_floor {
            return Err(Error::StepUnderflow {
                t: t.to_f64(),
                dt: dt.to_f64(),
                reason: "positivity or accuracy guard kept rejecting steps",
            });
        }

        stages[0] = rhs(&state)?;
        let mut rejected = false;
        for s in 1..6 {
            let mut ys = state.clone();
            for (i, y) in ys.iter_mut().enumerate() {
                let mut inc = T::zero();
                for (r, stage) in stages.iter().enumerate().take(s) {
                    inc += T::of(CK_A[s][r]) * stage[i];
                }
                *y += dt * inc;
            }
            match rhs(&ys) {
                Ok(f) => stages[s] = f,
                Err(Error::NonPositiveWigner { .. }) => {
                    rejected = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if rejected {
            dt *= T::of(0.5);
            continue;
        }

        let mut y5 = state.clone();
        let mut err = T::zero();
        for i in 0..n {
            let mut inc5 = T::zero();
            let mut inc4 = T::zero();
            for s in 0..6 {
                inc5 += T::of(CK_B5[s]) * stages[s][i];
                inc4 += T::of(CK_B4[s]) * stages[s][i];
            }
            y5[i] = state[i] + dt * inc5;
            let scale = control.atol + control.rtol * state[i].abs().max(y5[i].abs());
            let e = dt * (inc5 - inc4) / scale;
            err += e * e;
        }
        let err = (err / T::of_usize(n)).sqrt();

        let positive = y5.iter().all(|&v| v > T::zero());
        if err <= T::one() && positive {
            t += dt;
            state = y5;
            record(&mut trace, t, &state)?;
            let growth = if err == T::zero() {
                T::of(5.0)
            } else {
                (T::of(0.9) * err.powf(T::of(-0.2))).min(T::of(5.0))
            };
            dt *= growth.max(T::of(0.2));
        } else {
            let shrink = if positive {
                (T::of(0.9) * err.powf(T::of(-0.25))).max(T::of(0.2))
            } else {
                T::of(0.5)
            };
            dt *= shrink;
        }
    }
    Err(Error::StepUnderflow {
        t: t.to_f64(),
        dt: dt.to_f64(),
        reason: "step budget exhausted before t_end",
    })
}

/// Recovers the equilibrium (β, μ) whose grid means match the conserved
/// integrals: bisection on μ (the ratio ∫ωW/∫W is strictly decreasing in
/// μ), then β in closed form from the number integral.
pub fn steady_state_from_invariants<T: Real>(
    number: T,
    energy: T,
    disp: &DispersionRelation<T>,
) -> Result<EquilibriumState<T>> {
    if !(number > T::zero()) || !number.is_finite() || !energy.is_finite() {
        return Err(Error::InfeasibleInvariants(format!(
            "need finite invariants with positive number, got ({number}, {energy})"
        )));
    }
    let m = 4096;
    // midpoint sampling keeps a gapless band bottom off the node set
    let omega = |j: usize| disp.omega((T::of_usize(j) + T::of(0.5)) / T::of_usize(m));
    let moments = |mu: T| {
        let mut i0 = T::zero();
        let mut i1 = T::zero();
        for j in 0..m {
            let w = T::one() / (omega(j) - mu);
            i0 += w;
            i1 += omega(j) * w;
        }
        (i0 / T::of_usize(m), i1 / T::of_usize(m))
    };
    let ratio_target = energy / number;
    let mut hi = disp.omega_min() - T::of(1e-12);
    let ratio_gap = |mu: T| {
        let (i0, i1) = moments(mu);
        i1 / i0 - ratio_target
    };
    if !(ratio_gap(hi) < T::zero()) {
        return Err(Error::InfeasibleInvariants(format!(
            "energy per phonon {ratio_target} at or below the band bottom"
        )));
    }
    let omega_bar = disp.omega_bar();
    let mut lo = -T::of(10.0) * omega_bar;
    let mut expansions = 0;
    while !(ratio_gap(lo) > T::zero()) {
        lo *= T::of(4.0);
        expansions += 1;
        if expansions > 20 {
            return Err(Error::InfeasibleInvariants(format!(
                "energy per phonon {ratio_target} at or above the band mean"
            )));
        }
    }
    for _ in 0..200 {
        let mid = T::of(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ratio_gap(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = T::of(0.5) * (lo + hi);
    let (i0, _) = moments(mu);
    let beta = i0 / number;
    EquilibriumState::new(beta, mu, *disp)
}

/// Residual of the steady-state functional equation for f = a + bω on one
/// solved quadruple: f(p₀) + f(p₁) - f(p₂) - f(p₃).
pub fn collisional_invariant_residual<T: Real>(
    disp: &DispersionRelation<T>,
    a: T,
    b: T,
    angles: [T; 4],
) -> T {
    let f = |p: T| a + b * disp.omega_p(wrap_p(p));
    f(angles[0]) + f(angles[1]) - f(angles[2]) - f(angles[3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{h_fpu, h_pinned};
    use crate::quadrature::adaptive_simpson;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn pinned_model() -> CollisionModel<f64> {
        CollisionModel::onsite_pinned(1.0, 0.3, 1.0).unwrap()
    }

    #[test]
    fn entropy_of_constant_states() {
        assert_relative_eq!(entropy(&vec![1.0; 37]).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(
            entropy(&vec![std::f64::consts::E; 16]).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn entropy_rejects_nonpositive_grids() {
        assert!(entropy(&[1.0, 0.0, 2.0]).is_err());
        assert!(entropy::<f64>(&[]).is_err());
    }

    #[test]
    fn entropy_of_zero_mu_equilibrium_matches_quadrature() {
        let disp = DispersionRelation::new(1.0, 0.3).unwrap();
        let values: Vec<f64> = (0..512)
            .map(|j| 1.0 / disp.omega(j as f64 / 512.0))
            .collect();
        let grid = entropy(&values).unwrap();
        let (oracle, est) = adaptive_simpson(
            |k: f64| -disp.omega(k).ln(),
            0.0,
            1.0,
            1e-12,
            30,
        );
        assert!(est < 1e-10);
        assert_relative_eq!(grid, oracle, epsilon = 1e-8);
        // closed form: ∫ln(1 - 2δ cos 2πk)dk = ln((1 + sqrt(1 - 4δ²))/2)
        let closed = -0.5 * ((1.0 + (1.0f64 - 0.36).sqrt()) / 2.0).ln();
        assert_relative_eq!(grid, closed, epsilon = 1e-10);
    }

    #[test]
    fn equilibrium_state_validates_inputs() {
        let disp = DispersionRelation::new(1.0, 0.3).unwrap();
        assert!(EquilibriumState::new(1.0, -0.5, disp).is_ok());
        assert!(EquilibriumState::new(1.0, disp.omega_min(), disp).is_err());
        assert!(EquilibriumState::new(0.0, -0.5, disp).is_err());
        let gapless = DispersionRelation::unpinned(1.0).unwrap();
        assert!(EquilibriumState::new(1.0, 0.0, gapless).is_err());
    }

    #[test]
    fn production_is_nonnegative_and_vanishes_at_equilibrium() {
        let model = pinned_model();
        let disp = model.dispersion();
        let w = |p: f64| 0.8 + 0.3 * p.sin() + 0.1 * (2.0 * p).cos();
        let d = entropy_production(&model, &w, 32, 128);
        assert!(d > 0.0);
        let eq = EquilibriumState::new(1.4, -0.3, disp).unwrap();
        let d_eq = entropy_production(&model, &eq, 32, 128);
        assert!(d_eq.abs() <= 1e-16 * d, "production at equilibrium: {d_eq}");
    }

    #[test]
    fn production_scales_quartically_minus_two_in_the_state() {
        // Π(GW)·(ΣW⁻¹)² maps W ↦ cW to c² times itself
        let model = pinned_model();
        let w1 = |p: f64| 0.8 + 0.3 * p.sin();
        let w2 = |p: f64| 2.0 * (0.8 + 0.3 * p.sin());
        let d1 = entropy_production(&model, &w1, 24, 96);
        let d2 = entropy_production(&model, &w2, 24, 96);
        assert_relative_eq!(d2, 4.0 * d1, max_relative = 1e-12);
    }

    #[test]
    fn production_matches_entropy_slope_of_the_evolver() {
        // dS/dt of the grid system is the node sum of C/W, which approaches
        // the symmetric production functional only as the grid refines: C(p)
        // has derivative kinks where constraint branches collide, so the node
        // sum carries O(N⁻²) error (2.3% at N = 64, 6e-4 at N = 256).
        let model = pinned_model();
        let disp = model.dispersion();
        let eq = EquilibriumState::new(1.2, -0.2, disp).unwrap();
        let n = 256;
        let w0: Vec<f64> = (0..n)
            .map(|j| {
                let k = j as f64 / n as f64;
                eq.occupation_k(k) * (1.0 + 0.15 * (TAU * k).cos())
            })
            .collect();
        let control = StepControl {
            rtol: 1e-9,
            atol: 1e-12,
            initial_dt: Some(1e-4),
            inner_nodes: 256,
            ..StepControl::default()
        };
        let trace = evolve(&model, &w0, 3e-4, &control).unwrap();
        let first = trace.initial();
        let second = &trace.entries[1];
        let slope = (second.entropy - first.entropy) / (second.t - first.t);
        assert_relative_eq!(slope, first.production, max_relative = 5e-3);
    }

    #[test]
    fn equilibrium_initial_data_stays_put() {
        let model = pinned_model();
        let disp = model.dispersion();
        let eq = EquilibriumState::new(1.7, -0.2, disp).unwrap();
        let w0 = eq.sample(128);
        let control = StepControl {
            rtol: 1e-8,
            atol: 1e-12,
            inner_nodes: 192,
            ..StepControl::default()
        };
        let trace = evolve(&model, &w0, 1.0, &control).unwrap();
        let wt = &trace.last().state;
        let drift = wt
            .iter()
            .zip(&w0)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        // the sampled equilibrium is stationary only up to the interpolant's
        // error between nodes, which leaves a residual velocity near 1e-7;
        // dynamical velocities for O(1) perturbations are near 1e-2
        assert!(drift <= 1e-6, "equilibrium drifted by {drift}");
    }

    #[test]
    fn perturbed_equilibrium_relaxes_with_monotone_entropy() {
        let model = pinned_model();
        let disp = model.dispersion();
        let eq = EquilibriumState::new(1.0, -0.2, disp).unwrap();
        let n = 48;
        let w0: Vec<f64> = (0..n)
            .map(|j| {
                let k = j as f64 / n as f64;
                eq.occupation_k(k) * (1.0 + 0.1 * (TAU * k).cos())
            })
            .collect();
        let control = StepControl {
            rtol: 1e-8,
            atol: 1e-11,
            inner_nodes: 192,
            ..StepControl::default()
        };
        let trace = evolve(&model, &w0, 400.0, &control).unwrap();
        assert!(trace.worst_entropy_decrease() <= 1e-8);
        // collocation conserves the node means only to quadrature accuracy,
        // so over t = 400 they drift at the per-step O(h²) defect
        let (dn, de) = trace.conservation_drift();
        assert!(dn <= 1e-2, "number drift {dn}");
        assert!(de <= 1e-2, "energy drift {de}");

        // the relaxed state maximises entropy on the invariant shell the
        // discrete flow actually ends on, so match against the endpoint means
        let endpoint = &trace.last().state;
        let (nt, et) = invariants(&disp, endpoint);
        let target = steady_state_from_invariants(nt, et, &disp).unwrap();
        let sup = endpoint
            .iter()
            .enumerate()
            .fold(0.0f64, |a, (j, &v)| {
                a.max((v - target.occupation_k(j as f64 / n as f64)).abs())
            });
        assert!(sup <= 1e-3, "relaxation endpoint off by {sup}");
        assert!(trace.last().production < trace.initial().production);
    }

    #[test]
    fn doubling_the_coupling_quarters_the_clock() {
        let disp = DispersionRelation::new(1.0, 0.3).unwrap();
        let eq = EquilibriumState::new(1.0, -0.2, disp).unwrap();
        let n = 32;
        let w0: Vec<f64> = (0..n)
            .map(|j| {
                let k = j as f64 / n as f64;
                eq.occupation_k(k) * (1.0 + 0.1 * (TAU * k).cos())
            })
            .collect();
        let control = StepControl {
            rtol: 1e-10,
            atol: 1e-13,
            inner_nodes: 128,
            ..StepControl::default()
        };
        let slow = CollisionModel::onsite_pinned(1.0, 0.3, 1.0).unwrap();
        let fast = CollisionModel::onsite_pinned(1.0, 0.3, 2.0).unwrap();
        let t1 = evolve(&slow, &w0, 8.0, &control).unwrap();
        let t2 = evolve(&fast, &w0, 2.0, &control).unwrap();
        let (a, b) = (&t1.last().state, &t2.last().state);
        let sup = a
            .iter()
            .zip(b)
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
        assert!(sup <= 1e-7, "scaled trajectories differ by {sup}");
    }

    #[test]
    fn steady_state_round_trips() {
        let disp = DispersionRelation::new(1.0, 0.3).unwrap();
        for (beta, mu) in [(2.0, -0.5), (1.0, 0.0), (0.7, -2.3)] {
            let eq = EquilibriumState::new(beta, mu, disp).unwrap();
            let m = 4096;
            let vals: Vec<f64> = (0..m)
                .map(|j| eq.occupation_k((j as f64 + 0.5) / m as f64))
                .collect();
            let number = vals.iter().sum::<f64>() / m as f64;
            let energy = vals
                .iter()
                .enumerate()
                .map(|(j, &v)| disp.omega((j as f64 + 0.5) / m as f64) * v)
                .sum::<f64>()
                / m as f64;
            let rec = steady_state_from_invariants(number, energy, &disp).unwrap();
            assert_relative_eq!(rec.beta(), beta, max_relative = 1e-8);
            assert!((rec.mu() - mu).abs() <= 1e-8, "mu: {} vs {mu}", rec.mu());
        }
    }

    #[test]
    fn steady_state_rejects_out_of_band_targets() {
        let disp = DispersionRelation::new(1.0, 0.3).unwrap();
        // energy per phonon below the band bottom
        assert!(steady_state_from_invariants(1.0, 0.5 * disp.omega_min(), &disp).is_err());
        // above the band mean
        assert!(steady_state_from_invariants(1.0, 2.0, &disp).is_err());
        assert!(steady_state_from_invariants(-1.0, 1.0, &disp).is_err());
    }

    #[test]
    fn linear_in_omega_functions_are_collisional_invariants() {
        let disp = DispersionRelation::new(1.0, 0.3).unwrap();
        let gapless = DispersionRelation::unpinned(1.0).unwrap();
        let mut rng = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            TAU * (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let (p0, p2) = (next(), next());
            let sol = h_pinned(p0, p2, 0.3).unwrap();
            let r = collisional_invariant_residual(&disp, 0.7, 1.3, [p0, sol.p1, p2, sol.p3]);
            assert!(r.abs() <= 1e-10, "pinned invariant residual {r}");
            let sol = h_fpu(p0, p2).unwrap();
            let r = collisional_invariant_residual(&gapless, -0.4, 2.1, [p0, sol.p1, p2, sol.p3]);
            assert!(r.abs() <= 1e-10, "unpinned invariant residual {r}");
        }
    }

    #[test]
    fn evolve_validates_inputs() {
        let model = pinned_model();
        let control = StepControl::default();
        assert!(evolve(&model, &[1.0, 1.0], 1.0, &control).is_err());
        assert!(evolve(&model, &[1.0; 8], 0.0, &control).is_err());
        assert!(evolve(&model, &[1.0, -1.0, 1.0, 1.0], 1.0, &control).is_err());
    }
}
