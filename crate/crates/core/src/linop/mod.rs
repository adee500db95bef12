//! Linearized collision operators as Galerkin matrices.
//!
//! Both chains share the same packaging: an orthonormal basis on the
//! wavenumber interval, the plain operator L₀, and the weighted operator
//! ω L₀ ω whose quadratic form drives current correlations. The unpinned
//! operator additionally carries its multiplication/integral split
//! V - A, assembled by two independent quadrature routes so the stored
//! split doubles as a cross-check of the direct matrix. All spectral
//! work (semigroups, resolvents, inverses on the invariant complement)
//! goes through a dense symmetric eigendecomposition; at the dimensions
//! the basis stays well conditioned for, that costs microseconds and
//! avoids iterative-solver tuning.

mod basis;
mod fpu;
mod pinned;

pub use basis::{BasisFamily, GalerkinBasis};
pub use fpu::{assemble_fpu, fpu_kernels, fpu_v};
pub use pinned::assemble_pinned;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative asymmetry beyond which an assembled matrix is rejected.
const SYMMETRY_TOL: f64 = 1e-6;

/// Relative eigenvalue threshold separating the invariant null modes of
/// the plain operator from its physical spectrum. The pinned chain grows
/// soft modes near δ → 0 (around 1e-6 relative at δ = 1e-3) that must
/// stay on the physical side, while genuine null modes assemble at
/// working precision, so the cut sits well below the soft scale.
const NULL_CUT: f64 = 1e-10;

pub(crate) struct AssembledParts<T: Real> {
    pub plain: DMatrix<T>,
    pub weighted: DMatrix<T>,
    pub multiplication: Option<DMatrix<T>>,
    pub integral: Option<DMatrix<T>>,
}

/// Galerkin matrices of one linearized operator, with the basis that
/// defines their meaning.
#[derive(Debug, Clone)]
pub struct LinearizedOperator<T: Real> {
    basis: GalerkinBasis<T>,
    plain: DMatrix<T>,
    weighted: DMatrix<T>,
    multiplication: Option<DMatrix<T>>,
    integral: Option<DMatrix<T>>,
    plain_defect: T,
    weighted_defect: T,
    split_defect: Option<T>,
}

fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
}

fn asymmetry<T: Real>(m: &DMatrix<T>) -> T {
    let scale = max_abs(m);
    if scale == T::zero() {
        return T::zero();
    }
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

fn symmetrized<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = T::of(0.5);
    let mut s = m.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            s[(i, j)] = half * (m[(i, j)] + m[(j, i)]);
        }
    }
    s
}

/// Eigenvalues ascending with matching eigenvector columns, computed on
/// the symmetrized matrix.
fn spectrum<T: Real>(m: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let eig = symmetrized(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues are finite")
    });
    let mut vals = DVector::<T>::zeros(n);
    let mut vecs = DMatrix::<T>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vals[dst] = eig.eigenvalues[src];
        vecs.column_mut(dst).copy_from(&eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

impl<T: Real> LinearizedOperator<T> {
    pub(crate) fn from_parts(basis: GalerkinBasis<T>, parts: AssembledParts<T>) -> Result<Self> {
        let plain_defect = asymmetry(&parts.plain);
        let weighted_defect = asymmetry(&parts.weighted);
        let worst = plain_defect.max(weighted_defect);
        if worst > T::of(SYMMETRY_TOL) {
            return Err(Error::Assembly(format!(
                "assembled matrix asymmetry {worst:.3e} beyond {SYMMETRY_TOL:.1e}; \
                 the quadrature grid is too coarse for this basis"
            )));
        }
        let split_defect = match (&parts.multiplication, &parts.integral) {
            (Some(v), Some(a)) => {
                let recon = v - a;
                let scale = max_abs(&parts.weighted).max(max_abs(&recon));
                let diff = max_abs(&(&parts.weighted - recon));
                Some(if scale == T::zero() { T::zero() } else { diff / scale })
            }
            _ => None,
        };
        Ok(LinearizedOperator {
            basis,
            plain: parts.plain,
            weighted: parts.weighted,
            multiplication: parts.multiplication,
            integral: parts.integral,
            plain_defect,
            weighted_defect,
            split_defect,
        })
    }

    pub fn basis(&self) -> &GalerkinBasis<T> {
        &self.basis
    }

    pub fn family(&self) -> &BasisFamily<T> {
        self.basis.family()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Matrix of L₀ in the orthonormal basis.
    pub fn plain(&self) -> &DMatrix<T> {
        &self.plain
    }

    /// Matrix of ω L₀ ω (ν L₀ ν for the pinned chain).
    pub fn weighted(&self) -> &DMatrix<T> {
        &self.weighted
    }

    /// Multiplication part ω V ω of the weighted operator, assembled by
    /// the independent one-dimensional route. Unpinned only.
    pub fn multiplication(&self) -> Option<&DMatrix<T>> {
        self.multiplication.as_ref()
    }

    /// Integral part ω A ω of the weighted operator. Unpinned only.
    pub fn integral(&self) -> Option<&DMatrix<T>> {
        self.integral.as_ref()
    }

    /// Relative asymmetry of (plain, weighted) as assembled.
    pub fn symmetry_defect(&self) -> (T, T) {
        (self.plain_defect, self.weighted_defect)
    }

    /// Relative difference between the weighted matrix and its stored
    /// V - A split; measures agreement of the two assembly routes.
    pub fn split_defect(&self) -> Option<T> {
        self.split_defect
    }

    /// ⟨v, L₀ v⟩.
    pub fn quadratic_form(&self, v: &DVector<T>) -> T {
        v.dot(&(&self.plain * v))
    }

    /// ⟨v, ωL₀ω v⟩.
    pub fn weighted_quadratic_form(&self, v: &DVector<T>) -> T {
        v.dot(&(&self.weighted * v))
    }

    /// Relative size of L₀ applied to the two collision invariants;
    /// both vanish up to quadrature error.
    pub fn invariant_residuals(&self) -> (T, T) {
        let scale = max_abs(&self.plain);
        let rel = |coords: &DVector<T>| -> T {
            if scale == T::zero() {
                return T::zero();
            }
            (&self.plain * coords).norm() / (scale * coords.norm())
        };
        (
            rel(self.basis.number_coords()),
            rel(self.basis.frequency_coords()),
        )
    }

    /// Eigenvalues of the symmetrized plain matrix, ascending.
    pub fn plain_eigenvalues(&self) -> DVector<T> {
        spectrum(&self.plain).0
    }

    /// Eigenvalues of the symmetrized weighted matrix, ascending.
    pub fn weighted_eigenvalues(&self) -> DVector<T> {
        spectrum(&self.weighted).0
    }

    /// ⟨v, e^{-t ωL₀ω} v⟩ for every requested time, through one spectral
    /// decomposition of the weighted matrix.
    pub fn semigroup_form(&self, v: &DVector<T>, ts: &[T]) -> Vec<T> {
        let (vals, vecs) = spectrum(&self.weighted);
        let q = vecs.transpose() * v;
        ts.iter()
            .map(|&t| {
                let mut acc = T::zero();
                for i in 0..vals.len() {
                    acc += (-vals[i] * t).exp() * q[i] * q[i];
                }
                acc
            })
            .collect()
    }

    /// ⟨v, (ε + ωL₀ω)⁻¹ v⟩ for ε > 0.
    pub fn resolvent_form(&self, v: &DVector<T>, eps: T) -> Result<T> {
        Self::resolvent_of(&spectrum(&self.weighted), v, eps)
    }

    fn resolvent_of(spec: &(DVector<T>, DMatrix<T>), v: &DVector<T>, eps: T) -> Result<T> {
        let (vals, vecs) = spec;
        if eps + vals[0] <= T::zero() {
            return Err(Error::domain(format!(
                "resolvent shift {eps} does not clear the lowest eigenvalue {}",
                vals[0]
            )));
        }
        let q = vecs.transpose() * v;
        let mut acc = T::zero();
        for i in 0..vals.len() {
            acc += q[i] * q[i] / (eps + vals[i]);
        }
        Ok(acc)
    }

    /// Both sides of the three-term resolvent expansion through the stored
    /// V - A split:
    ///
    ///   ⟨v, R v⟩ = ⟨v, R_V v⟩ + ⟨v, R_V A R_V v⟩ + ⟨u, R u⟩,
    ///   u = A R_V v,  R = (ε + ωL₀ω)⁻¹,  R_V = (ε + ωVω)⁻¹.
    ///
    /// Exact matrix algebra when the direct matrix equals the split, so
    /// the gap between the returned pair measures the cross-route error
    /// propagated through resolvents.
    pub fn resolvent_three_term(&self, v: &DVector<T>, eps: T) -> Result<(T, T)> {
        let (mult, integ) = match (&self.multiplication, &self.integral) {
            (Some(m), Some(a)) => (m, a),
            _ => {
                return Err(Error::domain(
                    "operator carries no multiplication/integral split".to_string(),
                ))
            }
        };
        let spec_w = spectrum(&self.weighted);
        let lhs = Self::resolvent_of(&spec_w, v, eps)?;

        let (vals_v, vecs_v) = spectrum(mult);
        if eps + vals_v[0] <= T::zero() {
            return Err(Error::domain(format!(
                "resolvent shift {eps} does not clear the multiplication spectrum floor {}",
                vals_v[0]
            )));
        }
        let solve_v = |y: &DVector<T>| -> DVector<T> {
            let mut q = vecs_v.transpose() * y;
            for i in 0..q.len() {
                q[i] /= eps + vals_v[i];
            }
            &vecs_v * q
        };
        let a_sym = symmetrized(integ);
        let x1 = solve_v(v);
        let t1 = v.dot(&x1);
        let ax1 = &a_sym * &x1;
        let t2 = x1.dot(&ax1);
        let t3 = Self::resolvent_of(&spec_w, &ax1, eps)?;
        Ok((lhs, t1 + t2 + t3))
    }

    /// ⟨rhs, L₀⁻¹ rhs⟩ on the orthogonal complement of the two collision
    /// invariants.
    ///
    /// The two eigenvalues below NULL_CUT · λ_max must be exactly the
    /// invariant pair; rhs may overlap them by at most leak_tol of its
    /// norm, otherwise the inverse is meaningless and an error reports
    /// the leakage.
    pub fn inverse_form(&self, rhs: &DVector<T>, leak_tol: T) -> Result<T> {
        let (vals, vecs) = spectrum(&self.plain);
        let n = vals.len();
        let lam_max = vals[n - 1].abs();
        if lam_max == T::zero() {
            return Err(Error::Assembly("plain matrix is zero".to_string()));
        }
        let cut = T::of(NULL_CUT) * lam_max;
        let null_count = (0..n).filter(|&i| vals[i].abs() < cut).count();
        if null_count != 2 {
            return Err(Error::Assembly(format!(
                "expected the two invariant null modes below {cut:.3e}, found {null_count}"
            )));
        }
        let q = vecs.transpose() * rhs;
        let mut leak_sq = T::zero();
        let mut acc = T::zero();
        for i in 0..n {
            if vals[i].abs() < cut {
                leak_sq += q[i] * q[i];
            } else {
                acc += q[i] * q[i] / vals[i];
            }
        }
        let leak = leak_sq.sqrt() / rhs.norm();
        if leak > leak_tol {
            return Err(Error::NullSpaceLeak {
                leak: leak.to_f64(),
                tol: leak_tol.to_f64(),
                context: "right-hand side overlaps the collision invariants",
            });
        }
        Ok(acc)
    }
}
