//! Squeezing model of an ideal parametric oscillator below threshold.
//!
//! In the rotating frame the cavity emits pure squeezed vacuum: each sideband
//! pair at `+-omega` is squeezed by a frequency-dependent parameter
//! `r_tilde(omega)` after a phase rotation `phi(omega)` that survives even at
//! vanishing pump. The antisqueezing spectrum is the shifted-Lorentzian ratio
//! `v_plus = ((gamma+eps)^2 + w^2) / ((gamma-eps)^2 + w^2)` and the squeezing
//! spectrum is its exact reciprocal, so every sideband alone stays minimum
//! uncertainty; impurity only appears once a wavepacket averages over
//! sidebands, which is the wavepacket module's subject.
//!
//! The time-domain two-photon correlation is the inverse transform of
//! `r_tilde`. No closed form exists at finite pump, so [`OpoParams::correlation_time`]
//! runs on the sampled route with the slowly decaying Lorentzian head of
//! `r_tilde` split off and transformed analytically; the weak-pump limit
//! `eps * sqrt(2 pi) * exp(-gamma |t|)` is kept exactly as a closed form.

use crate::error::{Error, Result};
use crate::grid::{Grid, DEFAULT_GRID_POINTS};
use crate::scalar::{lit, Scalar};
use crate::signal::{Domain, Form, Signal, AUTO_SPAN_DECAY};
use num_complex::Complex;

/// Cavity decay constant and pump amplitude of the squeezer.
///
/// Below-threshold operation requires `0 <= epsilon < gamma`. The pump phase
/// is fixed so that `epsilon` is real and nonnegative; every closed form here
/// assumes that frame. Fields are validated on construction and stay private.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpoParams<T> {
    gamma: T,
    epsilon: T,
}

/// One sideband pair's squeezing data.
///
/// `v_plus * v_minus = 1` identically: the structure is carried entirely by
/// the squeezing parameter `r_tilde = ln(v_plus) / 2` and the cavity phase
/// `phi`, which is odd in `omega` and nonzero even at zero pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingSpectrumPoint<T> {
    pub omega: T,
    pub v_plus: T,
    pub v_minus: T,
    pub r_tilde: T,
    pub phi: T,
}

impl<T: Scalar> OpoParams<T> {
    pub fn new(gamma: T, epsilon: T) -> Result<Self> {
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::NonPositiveRate(gamma.to_f64().unwrap_or(f64::NAN)));
        }
        if !(epsilon >= T::zero() && epsilon < gamma) {
            return Err(Error::PumpOutOfRange {
                epsilon: epsilon.to_f64().unwrap_or(f64::NAN),
                gamma: gamma.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { gamma, epsilon })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// Antisqueezing level, squeezing level, squeezing parameter and cavity
    /// phase at one sideband frequency.
    pub fn spectrum(&self, omega: T) -> SqueezingSpectrumPoint<T> {
        let sum = self.gamma + self.epsilon;
        let gap = self.gamma - self.epsilon;
        let num = sum * sum + omega * omega;
        let den = gap * gap + omega * omega;
        // 4*gamma*eps = sum^2 - gap^2, so v_plus = 1 + drive/den; ln_1p keeps
        // r_tilde fully accurate when the pump sits far below threshold.
        let drive = lit::<T>(4.0) * self.gamma * self.epsilon;
        SqueezingSpectrumPoint {
            omega,
            v_plus: num / den,
            v_minus: den / num,
            r_tilde: (drive / den).ln_1p() / lit::<T>(2.0),
            phi: omega.atan2(sum) + omega.atan2(gap),
        }
    }

    /// Antisqueezing level in decibels, `10 log10 v_plus(omega)`.
    pub fn squeezing_db(&self, omega: T) -> T {
        lit::<T>(10.0) * self.spectrum(omega).v_plus.log10()
    }

    /// `sinh(r_tilde(omega))` in the closed form
    /// `2*gamma*eps / sqrt(((gamma+eps)^2+w^2) ((gamma-eps)^2+w^2))`,
    /// which avoids the cancellation of the exponential difference.
    pub fn sinh_r_tilde(&self, omega: T) -> T {
        let sum = self.gamma + self.epsilon;
        let gap = self.gamma - self.epsilon;
        let num = lit::<T>(2.0) * self.gamma * self.epsilon;
        num / ((sum * sum + omega * omega) * (gap * gap + omega * omega)).sqrt()
    }

    /// Time grid resolving the slowest correlation tail `exp(-(gamma-eps)|t|)`.
    fn correlation_grid(&self) -> Result<Grid<T>> {
        let gap = self.gamma - self.epsilon;
        Grid::symmetric(lit::<T>(AUTO_SPAN_DECAY) / gap, DEFAULT_GRID_POINTS)
    }

    /// The squeezing parameter `r_tilde(omega)` as a frequency-domain signal.
    ///
    /// Real, even, nonnegative, peaked at zero. The cavity phase `phi` is
    /// deliberately not folded in: this is the kernel whose inverse transform
    /// is the two-photon correlation. Zero pump gives the zero signal.
    pub fn correlation_spectrum(&self) -> Result<Signal<T>> {
        let grid = self.correlation_grid()?.fourier_partner();
        let values = grid
            .points()
            .map(|w| Complex::new(self.spectrum(w).r_tilde, T::zero()))
            .collect();
        Signal::sampled(Domain::Frequency, grid, values)
    }

    /// Normalized two-photon correlation `N(r)(t)`.
    ///
    /// Inverse transform of [`Self::correlation_spectrum`]. The Lorentzian
    /// head `(drive/2) / (gap^2 + w^2)` of `r_tilde` transforms exactly to
    /// `K exp(-gap |t|)` and is split off, so the FFT only sees the remainder
    /// `(ln_1p(u) - u) / 2`, which decays like `1/w^4`; truncating the head
    /// at the grid edge instead would cost about `1e-5` pointwise. Zero pump
    /// creates no photon pairs and is rejected as a zero-norm signal.
    pub fn correlation_time(&self) -> Result<Signal<T>> {
        if self.epsilon == T::zero() {
            return Err(Error::ZeroNorm);
        }
        let gap = self.gamma - self.epsilon;
        let drive = lit::<T>(4.0) * self.gamma * self.epsilon;
        let half = lit::<T>(0.5);
        let freq_grid = self.correlation_grid()?.fourier_partner();
        let remainder = freq_grid
            .points()
            .map(|w| {
                let u = drive / (gap * gap + w * w);
                Complex::new(half * (u.ln_1p() - u), T::zero())
            })
            .collect();
        let time = Signal::sampled(Domain::Frequency, freq_grid, remainder)?.inverse_fourier()?;
        let (grid, mut values) = match time.form {
            Form::Sampled { grid, values } => (grid, values),
            Form::Closed(_) => unreachable!("sampled spectra invert to sampled signals"),
        };
        let head_amp = drive / (lit::<T>(2.0) * gap) * T::FRAC_PI_2().sqrt();
        for (n, v) in values.iter_mut().enumerate() {
            let t = grid.point(n);
            v.re = v.re + head_amp * (-gap * t.abs()).exp();
        }
        Signal::sampled(Domain::Time, grid, values)?.normalize()
    }

    /// Weak-pump correlation `eps * sqrt(2 pi) * exp(-gamma |t|)`, exact in
    /// the piecewise-exponential family. Valid to second order in
    /// `eps / gamma`; callers needing the finite-pump kernel use
    /// [`Self::correlation_time`].
    pub fn correlation_weak_pump(&self) -> Signal<T> {
        let amp = self.epsilon * (lit::<T>(2.0) * T::PI()).sqrt();
        Signal::pieces(
            Domain::Time,
            crate::signal::exp_poly::ExpPoly::both_side_exp(self.gamma, amp),
        )
    }
}

/// Correlation of a parametric source with distinct signal and idler decays:
/// the signal envelope convolved with the time reverse of the idler envelope,
/// unnormalized. Equal one-sided exponential decays reproduce the both-side
/// exponential; a delta-like signal decay leaves the time-reversed idler, an
/// exponentially rising wavepacket.
pub fn correlation_from_decays<T: Scalar>(
    lambda_sig: &Signal<T>,
    lambda_idl: &Signal<T>,
) -> Result<Signal<T>> {
    lambda_sig.convolve(&lambda_idl.time_reverse()?)
}
