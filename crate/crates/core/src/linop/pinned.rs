//! Linearized operator of the pinned on-site chain.
//!
//! With ν(k) = √(1 - 2δ cos 2πk) the pair-exchange operator resolved over
//! the constraint branch has the quadratic form
//!
//!   ⟨f, L₀ g⟩ = ¼ (2π)⁻² ∬ dp₀ dp₂ J Δf Δg,
//!   J = [ |D| ν₀² ν₂² ν₁ ν₃ ]⁻¹,  D = ν₃ sin p₁ - ν₁ sin p₃,
//!
//! where (p₁, p₃) complete the quadruple at (p₀, p₂) and Δf sums the four
//! legs with signs + + - -. A multiplication/integral split of this
//! operator has divergent halves, so only the combined form is ever
//! assembled; the symmetrized chart makes the matrix symmetric positive
//! semidefinite term by term. Where D changes sign along the branch the
//! solved pair collides with the trivial one and Δf vanishes with D, so
//! the integrand stays bounded; the inner panels are anchored at those
//! crossings by the collision-cell layout.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::collision::CollisionModel;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus::{wrap_k, wrap_p_sym};

use super::basis::{BasisFamily, GalerkinBasis};
use super::{AssembledParts, LinearizedOperator};

struct Accum<T: Real> {
    plain: DMatrix<T>,
    weighted: DMatrix<T>,
    raw: [DVector<T>; 4],
    delta_p: DVector<T>,
    delta_w: DVector<T>,
}

impl<T: Real> Accum<T> {
    fn new(n_raw: usize) -> Self {
        Accum {
            plain: DMatrix::zeros(n_raw, n_raw),
            weighted: DMatrix::zeros(n_raw, n_raw),
            raw: std::array::from_fn(|_| DVector::zeros(n_raw)),
            delta_p: DVector::zeros(n_raw),
            delta_w: DVector::zeros(n_raw),
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.plain += other.plain;
        self.weighted += other.weighted;
        self
    }
}

/// Assemble the pinned operator over the given basis with `outer`
/// midpoint cells in p₀ and about `inner` panel-split cells per row in p₂.
pub fn assemble_pinned<T: Real + Send + Sync>(
    basis: &GalerkinBasis<T>,
    outer: usize,
    inner: usize,
) -> Result<LinearizedOperator<T>> {
    let BasisFamily::Pinned { delta } = *basis.family() else {
        return Err(Error::domain(
            "pinned assembly needs a basis of the Pinned family".to_string(),
        ));
    };
    if outer < 8 || inner < 8 {
        return Err(Error::domain(format!(
            "assembly grid too coarse: outer {outer}, inner {inner}"
        )));
    }
    let model = CollisionModel::onsite_pinned(T::one(), delta, T::one())?;
    let two_pi = T::two_pi();
    let half = T::of(0.5);
    let n_raw = basis.raw_dim();
    let h_out = two_pi / T::of_usize(outer);

    let acc = (0..outer)
        .into_par_iter()
        .fold(
            || Accum::<T>::new(n_raw),
            |mut acc, j| {
                let p0 = wrap_p_sym(h_out * (T::of_usize(j) + half));
                basis.eval_raw_into(wrap_k(p0 / two_pi), acc.raw[0].as_mut_slice());
                for (p2, w_in) in model.p2_cells(p0, inner) {
                    let Some((ps, ws)) = model.quadruple(p0, p2) else {
                        continue;
                    };
                    let d = ws[3] * ps[1].sin() - ws[1] * ps[3].sin();
                    if d == T::zero() {
                        continue;
                    }
                    let jk =
                        T::one() / (d.abs() * ws[0] * ws[0] * ws[2] * ws[2] * ws[1] * ws[3]);
                    basis.eval_raw_into(wrap_k(ps[1] / two_pi), acc.raw[1].as_mut_slice());
                    basis.eval_raw_into(wrap_k(ps[2] / two_pi), acc.raw[2].as_mut_slice());
                    basis.eval_raw_into(wrap_k(ps[3] / two_pi), acc.raw[3].as_mut_slice());
                    for i in 0..n_raw {
                        let (r0, r1, r2, r3) =
                            (acc.raw[0][i], acc.raw[1][i], acc.raw[2][i], acc.raw[3][i]);
                        acc.delta_p[i] = r0 + r1 - r2 - r3;
                        acc.delta_w[i] = ws[0] * r0 + ws[1] * r1 - ws[2] * r2 - ws[3] * r3;
                    }
                    let w = h_out * w_in * jk;
                    acc.plain.ger(w, &acc.delta_p, &acc.delta_p, T::one());
                    acc.weighted.ger(w, &acc.delta_w, &acc.delta_w, T::one());
                }
                acc
            },
        )
        .reduce(|| Accum::<T>::new(n_raw), Accum::merge);

    let scale = T::of(0.25) / (two_pi * two_pi);
    let parts = AssembledParts {
        plain: basis.congruence(&acc.plain) * scale,
        weighted: basis.congruence(&acc.weighted) * scale,
        multiplication: None,
        integral: None,
    };
    LinearizedOperator::from_parts(basis.clone(), parts)
}
