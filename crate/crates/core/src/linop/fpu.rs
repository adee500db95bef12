//! Linearized operator of the unpinned quartic chain.
//!
//! In normalized units ω(k) = sin πk the operator acts as L₀ = V - A with
//! multiplication part V(p) = ∫ K₂(p, p') dp' and integral part carrying
//! the kernel 2K₂ - K₁. Matrix elements are taken in the resolved
//! (p₀, p₂) chart, where the quadruple (p₀, p₁, p₂, p₃) follows from the
//! constraint branch and every leg of the gain-loss difference is sampled
//! at once:
//!
//!   ⟨f, L₀ g⟩ = (2π)⁻¹ ∬ dp₀ dp₂ K₂(p₀, p₂) f(k₀) Δg,
//!   Δg = g₀ + g₁ - g₂ - g₃.
//!
//! The inner integrand is smooth except for a kink across p₂ = p₀ and the
//! inverse-square-root corners of F₊, so each row uses end-clustered
//! Gauss panels split at the diagonal. The multiplication part is also
//! computed by an independent one-dimensional route (an endpoint-exact
//! substitution rule), which feeds the stored V/A split; the difference
//! between the split and the directly assembled matrix is kept as a
//! cross-route diagnostic.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::constraints::{f_minus, f_plus, h_fpu};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_inv_sqrt, ClusteredRule, GlRule};
use crate::scalar::Real;

use super::basis::{BasisFamily, GalerkinBasis};
use super::{AssembledParts, LinearizedOperator};

/// Collision kernels (K₁, K₂) at angles (p₀, p₂) ∈ [0, 2π)².
///
/// K₂ = 2/√F₊ and K₁ = 4/√F₋ where F₋ > 0, else 0; F₊ vanishes only at
/// the corners (0, 2π) and (2π, 0), where K₂ is unbounded.
pub fn fpu_kernels<T: Real>(p0: T, p2: T) -> (T, T) {
    let fp = f_plus(p0, p2);
    let fm = f_minus(p0, p2);
    let k2 = T::of(2.0) / fp.sqrt();
    let k1 = if fm > T::zero() {
        T::of(4.0) / fm.sqrt()
    } else {
        T::zero()
    };
    (k1, k2)
}

/// Multiplication part V(p) = ∫₀^{2π} K₂(p, p') dp' with an n-node rule.
///
/// F₊(p, ·) is positive inside the interval and may vanish only at an
/// endpoint (as p approaches a corner), which the substitution rule
/// absorbs exactly; V itself grows like p^{-1/3} toward the zone ends.
pub fn fpu_v<T: Real>(p: T, n: usize) -> T {
    let rule = GlRule::<T>::new(n);
    fpu_v_with(&rule, p)
}

fn fpu_v_with<T: Real>(rule: &GlRule<T>, p: T) -> T {
    integrate_inv_sqrt(
        rule,
        T::zero(),
        T::two_pi(),
        |_| T::of(2.0),
        |pp| f_plus(p, pp),
    )
}

struct Accum<T: Real> {
    plain: DMatrix<T>,
    weighted: DMatrix<T>,
    integral: DMatrix<T>,
    mult: DMatrix<T>,
    raw: [DVector<T>; 4],
    left: DVector<T>,
    delta_w: DVector<T>,
    a_leg: DVector<T>,
    delta_p: DVector<T>,
}

impl<T: Real> Accum<T> {
    fn new(n_raw: usize) -> Self {
        Accum {
            plain: DMatrix::zeros(n_raw, n_raw),
            weighted: DMatrix::zeros(n_raw, n_raw),
            integral: DMatrix::zeros(n_raw, n_raw),
            mult: DMatrix::zeros(n_raw, n_raw),
            raw: std::array::from_fn(|_| DVector::zeros(n_raw)),
            left: DVector::zeros(n_raw),
            delta_w: DVector::zeros(n_raw),
            a_leg: DVector::zeros(n_raw),
            delta_p: DVector::zeros(n_raw),
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.plain += other.plain;
        self.weighted += other.weighted;
        self.integral += other.integral;
        self.mult += other.mult;
        self
    }
}

/// Assemble the unpinned operator over the given basis with `outer` nodes
/// in p₀ and `inner` nodes per half-row panel in p₂.
pub fn assemble_fpu<T: Real + Send + Sync>(
    basis: &GalerkinBasis<T>,
    outer: usize,
    inner: usize,
) -> Result<LinearizedOperator<T>> {
    if !matches!(basis.family(), BasisFamily::Fpu) {
        return Err(Error::domain(
            "unpinned assembly needs a basis of the Fpu family".to_string(),
        ));
    }
    if outer < 8 || inner < 8 {
        return Err(Error::domain(format!(
            "assembly grid too coarse: outer {outer}, inner {inner}"
        )));
    }
    let two_pi = T::two_pi();
    let half = T::of(0.5);
    let n_raw = basis.raw_dim();
    let outer_rule = ClusteredRule::<T>::new(outer);
    let inner_rule = ClusteredRule::<T>::new(inner);
    let v_rule = GlRule::<T>::new((2 * inner).max(256));
    let outer_nodes: Vec<(T, T)> = outer_rule.mapped(T::zero(), two_pi).collect();

    let acc = outer_nodes
        .par_iter()
        .fold(
            || Accum::<T>::new(n_raw),
            |mut acc, &(p0, w_out)| {
                let w0 = (half * p0).sin();
                // The raw family lives on k ∈ [0, 1): it contains half-angle
                // harmonics that are antiperiodic in k, so the symmetric
                // wrapped window would flip their signs. All angles here are
                // already reduced to [0, 2π), making the plain ratio exact.
                basis.eval_raw_into(p0 / two_pi, acc.raw[0].as_mut_slice());

                // Independent 1D route for the multiplication part.
                let v_val = fpu_v_with(&v_rule, p0);
                acc.mult
                    .ger(w0 * w0 * w_out * v_val, &acc.raw[0], &acc.raw[0], T::one());
                for i in 0..n_raw {
                    acc.left[i] = w0 * acc.raw[0][i];
                }

                for panel in [(T::zero(), p0), (p0, two_pi)] {
                    for (p2, w_in) in inner_rule.mapped(panel.0, panel.1) {
                        let Ok(sol) = h_fpu(p0, p2) else {
                            continue;
                        };
                        // F₊ cancels to a round-off negative right at the
                        // zone corners; those nodes carry no measure.
                        let fp = f_plus(p0, p2);
                        if fp <= T::zero() {
                            continue;
                        }
                        let k2 = T::of(2.0) / fp.sqrt();
                        let (p1, p3) = (sol.p1, sol.p3);
                        let (w1, w2, w3) =
                            ((half * p1).sin(), (half * p2).sin(), (half * p3).sin());
                        basis.eval_raw_into(p1 / two_pi, acc.raw[1].as_mut_slice());
                        basis.eval_raw_into(p2 / two_pi, acc.raw[2].as_mut_slice());
                        basis.eval_raw_into(p3 / two_pi, acc.raw[3].as_mut_slice());
                        for i in 0..n_raw {
                            let (r0, r1, r2, r3) =
                                (acc.raw[0][i], acc.raw[1][i], acc.raw[2][i], acc.raw[3][i]);
                            acc.delta_p[i] = r0 + r1 - r2 - r3;
                            acc.delta_w[i] = w0 * r0 + w1 * r1 - w2 * r2 - w3 * r3;
                            acc.a_leg[i] = acc.left[i] - acc.delta_w[i];
                        }
                        let w = w_out * w_in * k2;
                        acc.plain.ger(w, &acc.raw[0], &acc.delta_p, T::one());
                        acc.weighted.ger(w, &acc.left, &acc.delta_w, T::one());
                        acc.integral.ger(w, &acc.left, &acc.a_leg, T::one());
                    }
                }
                acc
            },
        )
        .reduce(|| Accum::<T>::new(n_raw), Accum::merge);

    let scale = T::one() / two_pi;
    let parts = AssembledParts {
        plain: basis.congruence(&acc.plain) * scale,
        weighted: basis.congruence(&acc.weighted) * scale,
        multiplication: Some(basis.congruence(&acc.mult) * scale),
        integral: Some(basis.congruence(&acc.integral) * scale),
    };
    LinearizedOperator::from_parts(basis.clone(), parts)
}
