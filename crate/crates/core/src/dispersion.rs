//! Dispersion relation of the harmonic chain and the lattice to phonon-mode
//! change of variables.
//!
//! The nearest-neighbour chain has dispersion
//!
//! ```text
//! ω(k) = ω̄ (1 - 2δ cos 2πk)^{1/2},   k ∈ [-1/2, 1/2),  δ ∈ (0, 1/2]
//! ```
//!
//! with δ < 1/2 for the pinned (onsite) chain, whose spectrum has the gap
//! ω_min = ω̄√(1-2δ), and δ = 1/2 for the unpinned chain, where
//! ω(k) = ω̄√2 |sin πk| closes the gap at k = 0.
//!
//! Phonon modes a(k,σ), σ = ±1, diagonalize the harmonic dynamics:
//!
//! ```text
//! a(k,σ) = (2ω(k))^{-1/2} (ω(k) q̂(k) + iσ p̂(k))
//! ```
//!
//! with q̂ the discrete Fourier transform of the positions. The zero mode of
//! the unpinned chain (ω(0) = 0) is removed by projecting out the lattice
//! means, which are decoupled conserved quantities of the dynamics.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Frequency law ω(k) of the harmonic chain, ω(k) = ω̄(1 - 2δ cos 2πk)^{1/2}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionRelation<T> {
    omega_bar: T,
    delta: T,
}

impl<T: Real> DispersionRelation<T> {
    /// Requires ω̄ > 0 and δ ∈ (0, 1/2].
    pub fn new(omega_bar: T, delta: T) -> Result<Self> {
        if !(omega_bar > T::zero()) {
            return Err(Error::domain(format!(
                "dispersion scale must be positive, got {omega_bar}"
            )));
        }
        if !(delta > T::zero() && delta <= T::of(0.5)) {
            return Err(Error::domain(format!(
                "coupling ratio must lie in (0, 1/2], got {delta}"
            )));
        }
        Ok(DispersionRelation { omega_bar, delta })
    }

    /// Unpinned chain, δ = 1/2: ω(k) = ω̄ √2 |sin πk|.
    pub fn unpinned(omega_bar: T) -> Result<Self> {
        Self::new(omega_bar, T::of(0.5))
    }

    pub fn omega_bar(&self) -> T {
        self.omega_bar
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// True exactly when δ = 1/2, i.e. the spectrum touches zero at k = 0.
    pub fn gapless(&self) -> bool {
        self.delta == T::of(0.5)
    }

    /// ω(k); periodic in k with period 1.
    #[inline]
    pub fn omega(&self, k: T) -> T {
        self.omega_p(T::two_pi() * k)
    }

    /// ω̃(p) = ω̄ (1 - 2δ cos p)^{1/2} on the 2π-periodic angle p = 2πk.
    #[inline]
    pub fn omega_p(&self, p: T) -> T {
        // written as (1 - 2δ) + 4δ sin²(p/2), which stays fully accurate
        // near the band bottom where the direct form cancels
        let s = (T::of(0.5) * p).sin();
        let arg = (T::one() - T::of(2.0) * self.delta) + T::of(4.0) * self.delta * s * s;
        self.omega_bar * arg.max(T::zero()).sqrt()
    }

    /// dω̃/dp = ω̄² δ sin p / ω̃(p).
    ///
    /// At the gapless point p = 0 (mod 2π), δ = 1/2 the derivative has a kink
    /// with one-sided limits ±ω̄/√2; the symmetric value 0 is returned there.
    #[inline]
    pub fn omega_p_deriv(&self, p: T) -> T {
        let w = self.omega_p(p);
        if w == T::zero() {
            return T::zero();
        }
        self.omega_bar * self.omega_bar * self.delta * p.sin() / w
    }

    /// dω/dk = 2π dω̃/dp at p = 2πk.
    #[inline]
    pub fn group_velocity(&self, k: T) -> T {
        T::two_pi() * self.omega_p_deriv(T::two_pi() * k)
    }

    /// Bottom of the band, ω̄ √(1-2δ); zero when gapless.
    pub fn omega_min(&self) -> T {
        self.omega_bar * (T::one() - T::of(2.0) * self.delta).max(T::zero()).sqrt()
    }

    /// Top of the band, ω̄ √(1+2δ).
    pub fn omega_max(&self) -> T {
        self.omega_bar * (T::one() + T::of(2.0) * self.delta).sqrt()
    }

    /// Decay exponent of the complexified dispersion,
    /// r = arcosh(1/(2δ)) / 2; controls |ω(k) - ω(k+q)| ≤ e^{-r} ω(q).
    /// Zero when gapless.
    pub fn gap_exponent(&self) -> T {
        let x = T::one() / (T::of(2.0) * self.delta);
        // arcosh x = ln(x + √(x² - 1)), x >= 1
        (x + (x * x - T::one()).max(T::zero()).sqrt()).ln() / T::of(2.0)
    }

    /// ω sampled on the uniform grid k_j = j/n, j = 0..n.
    pub fn omega_grid(&self, n: usize) -> Vec<T> {
        (0..n)
            .map(|j| self.omega(T::of_usize(j) / T::of_usize(n)))
            .collect()
    }

    /// Harmonic coupling table α(y): α(0) = ω̄², α(±1) = -δω̄², else 0, so
    /// that the Fourier multiplier Σ_y α(y) e^{-i2πky} equals ω(k)².
    pub fn coupling(&self, y: isize) -> T {
        match y {
            0 => self.omega_bar * self.omega_bar,
            1 | -1 => -self.delta * self.omega_bar * self.omega_bar,
            _ => T::zero(),
        }
    }
}

/// Phonon-mode amplitudes a(k,σ) on the N-site lattice, sampled at
/// k_j = j/N. Index j and σ = ±1 address one mode; reality of the underlying
/// (q, p) is the constraint a(k,σ)* = a(-k,-σ).
#[derive(Debug, Clone)]
pub struct PhononField<T> {
    a_plus: Vec<Complex<T>>,
    a_minus: Vec<Complex<T>>,
}

impl<T: Real> PhononField<T> {
    pub fn sites(&self) -> usize {
        self.a_plus.len()
    }

    /// Amplitude a(k_j, σ). Panics if σ is not ±1.
    #[inline]
    pub fn a(&self, j: usize, sigma: i8) -> Complex<T> {
        match sigma {
            1 => self.a_plus[j],
            -1 => self.a_minus[j],
            _ => panic!("phonon band index must be +1 or -1, got {sigma}"),
        }
    }

    pub fn a_plus(&self) -> &[Complex<T>] {
        &self.a_plus
    }

    pub fn a_minus(&self) -> &[Complex<T>] {
        &self.a_minus
    }

    /// Largest violation of a(k,σ)* = a(-k,-σ) over the grid; zero up to
    /// round-off for fields built from real (q, p).
    pub fn reality_defect(&self) -> T {
        let n = self.sites();
        let mut worst = T::zero();
        for j in 0..n {
            let jneg = (n - j) % n;
            let d = self.a_plus[j].conj() - self.a_minus[jneg];
            worst = worst.max((d.re * d.re + d.im * d.im).sqrt());
        }
        worst
    }

    /// Harmonic energy (1/2) Σ_σ N^{-1} Σ_k ω(k) |a(k,σ)|², equal to the
    /// quadratic lattice energy (1/2)Σp² + (1/2)Σ α(x-y) q_x q_y.
    pub fn harmonic_energy(&self, disp: &DispersionRelation<T>) -> T {
        let n = self.sites();
        let mut acc = T::zero();
        for j in 0..n {
            let w = disp.omega(T::of_usize(j) / T::of_usize(n));
            acc += w * (self.a_plus[j].norm_sqr() + self.a_minus[j].norm_sqr());
        }
        acc / (T::of(2.0) * T::of_usize(n))
    }
}

/// Cached-plan transform between lattice coordinates (q, p) and phonon modes.
///
/// For the gapless dispersion the k = 0 column of the transform is singular;
/// [`PhononTransform::analyze`] then projects out the lattice means of q and
/// p and stores exact zeros in that mode, and [`PhononTransform::synthesize`]
/// returns the zero-mean representative.
pub struct PhononTransform<T: Real> {
    disp: DispersionRelation<T>,
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    omega: Vec<T>,
}

impl<T: Real> std::fmt::Debug for PhononTransform<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhononTransform")
            .field("disp", &self.disp)
            .field("n", &self.n)
            .finish()
    }
}

impl<T: Real> PhononTransform<T> {
    pub fn new(disp: DispersionRelation<T>, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("lattice needs at least 2 sites, got {n}")));
        }
        let mut planner = FftPlanner::new();
        Ok(PhononTransform {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            omega: disp.omega_grid(n),
            disp,
            n,
        })
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn dispersion(&self) -> &DispersionRelation<T> {
        &self.disp
    }

    /// Phonon amplitudes of the lattice configuration,
    /// a(k,σ) = (2ω)^{-1/2} (ω q̂ + iσ p̂) with q̂(k) = Σ_x e^{-i2πkx} q_x.
    pub fn analyze(&self, q: &[T], p: &[T]) -> PhononField<T> {
        assert_eq!(q.len(), self.n, "position array length mismatch");
        assert_eq!(p.len(), self.n, "momentum array length mismatch");
        let (qm, pm) = if self.disp.gapless() {
            let inv_n = T::one() / T::of_usize(self.n);
            (
                q.iter().copied().sum::<T>() * inv_n,
                p.iter().copied().sum::<T>() * inv_n,
            )
        } else {
            (T::zero(), T::zero())
        };
        let mut qhat: Vec<Complex<T>> =
            q.iter().map(|&v| Complex::new(v - qm, T::zero())).collect();
        let mut phat: Vec<Complex<T>> =
            p.iter().map(|&v| Complex::new(v - pm, T::zero())).collect();
        self.forward.process(&mut qhat);
        self.forward.process(&mut phat);
        let mut a_plus = Vec::with_capacity(self.n);
        let mut a_minus = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let w = self.omega[j];
            if w == T::zero() {
                a_plus.push(Complex::new(T::zero(), T::zero()));
                a_minus.push(Complex::new(T::zero(), T::zero()));
                continue;
            }
            let norm = T::one() / (T::of(2.0) * w).sqrt();
            let i_p = Complex::new(T::zero(), T::one()) * phat[j];
            a_plus.push((qhat[j] * w + i_p) * norm);
            a_minus.push((qhat[j] * w - i_p) * norm);
        }
        PhononField { a_plus, a_minus }
    }

    /// Lattice configuration of a phonon field:
    /// q̂ = (2ω)^{-1/2} Σ_σ a(·,σ), p̂ = (√(2ω)/2) Σ_σ (-iσ) a(·,σ),
    /// followed by the inverse transform. Imaginary parts left by a field
    /// violating the reality constraint are discarded.
    pub fn synthesize(&self, field: &PhononField<T>) -> (Vec<T>, Vec<T>) {
        assert_eq!(field.sites(), self.n, "field size mismatch");
        let mut qhat = Vec::with_capacity(self.n);
        let mut phat = Vec::with_capacity(self.n);
        let half = T::of(0.5);
        for j in 0..self.n {
            let w = self.omega[j];
            if w == T::zero() {
                qhat.push(Complex::new(T::zero(), T::zero()));
                phat.push(Complex::new(T::zero(), T::zero()));
                continue;
            }
            let sum = field.a_plus[j] + field.a_minus[j];
            let diff = field.a_plus[j] - field.a_minus[j];
            let root = (T::of(2.0) * w).sqrt();
            qhat.push(sum / root);
            // (-i·(+1)·a₊) + (-i·(-1)·a₋) = -i (a₊ - a₋)
            phat.push(Complex::new(T::zero(), -T::one()) * diff * root * half);
        }
        self.inverse.process(&mut qhat);
        self.inverse.process(&mut phat);
        let inv_n = T::one() / T::of_usize(self.n);
        let q = qhat.iter().map(|c| c.re * inv_n).collect();
        let p = phat.iter().map(|c| c.re * inv_n).collect();
        (q, p)
    }
}
