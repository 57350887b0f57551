//! Discrete Fourier transforms scaled to the continuous convention
//! `F(w) = (1/sqrt(2 pi)) integral f(t) exp(+i w t) dt`.
//!
//! A time grid and its `fourier_partner` satisfy `d_omega * dt = 2 pi / N`, so
//! the twiddle factors below make the pair exactly unitary: `inverse(forward)`
//! reproduces the input samples to rounding error, independent of grid offsets.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{lit, Scalar};
use num_complex::Complex;
use rustfft::FftPlanner;

fn check_len<T: Scalar>(grid: &Grid<T>, n: usize) -> Result<()> {
    if grid.count != n {
        return Err(Error::GridMismatch(format!(
            "grid holds {} points but {} samples were supplied",
            grid.count, n
        )));
    }
    Ok(())
}

/// `exp(2 pi i c)` with the cycle count reduced to `[-1/2, 1/2]` before any
/// trigonometry, so half-integer cycle counts in the hundreds of thousands
/// (the centered-grid case) cost one rounding error instead of one per cycle.
fn unit_phase<T: Scalar>(cycles: T) -> Complex<T> {
    let r = cycles - cycles.round();
    Complex::from_polar(T::one(), lit::<T>(2.0) * T::PI() * r)
}

/// Centered grids make the per-index cycle increments exactly +-1/2 and the
/// constant offsets exact quarter-multiples of the point count; snapping
/// recovers those values from their float approximations so that the cycle
/// products below stay exact dyadics.
fn snap_half_integer<T: Scalar>(c: T) -> T {
    let doubled = c + c;
    let nearest = doubled.round();
    if (doubled - nearest).abs() <= lit::<T>(1e-9) * (T::one() + nearest.abs()) {
        nearest / lit::<T>(2.0)
    } else {
        c
    }
}

/// Sampled forward transform. Returns the frequency grid and spectrum samples.
///
/// `F_k = (dt / sqrt(2 pi)) e^(i w_k t0) * sum_n f_n e^(i w0 n dt) e^(2 pi i k n / N)`
pub fn forward<T: Scalar>(
    grid: &Grid<T>,
    samples: &[Complex<T>],
) -> Result<(Grid<T>, Vec<Complex<T>>)> {
    check_len(grid, samples.len())?;
    let freq = grid.fourier_partner();
    let n = grid.count;
    let two_pi = lit::<T>(2.0) * T::PI();
    let c_step = snap_half_integer(freq.start * grid.step / two_pi);
    let mut buf: Vec<Complex<T>> = (0..n)
        .map(|i| samples[i] * unit_phase(c_step * lit::<T>(i as f64)))
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = grid.step / two_pi.sqrt();
    let c_zero = snap_half_integer(freq.start * grid.start / two_pi);
    let c_k = snap_half_integer(freq.step * grid.start / two_pi);
    let out = (0..n)
        .map(|k| buf[k] * unit_phase(c_zero + c_k * lit::<T>(k as f64)).scale(scale))
        .collect();
    Ok((freq, out))
}

/// Sampled inverse transform, the exact adjoint of [`forward`].
///
/// `f_n = (dw / sqrt(2 pi)) e^(-i w0 t_n) * sum_k F_k e^(-i k dw t0) e^(-2 pi i k n / N)`
pub fn inverse<T: Scalar>(
    freq_grid: &Grid<T>,
    spectrum: &[Complex<T>],
) -> Result<(Grid<T>, Vec<Complex<T>>)> {
    check_len(freq_grid, spectrum.len())?;
    let time = freq_grid.fourier_partner();
    let n = freq_grid.count;
    let two_pi = lit::<T>(2.0) * T::PI();
    let c_k = snap_half_integer(freq_grid.step * time.start / two_pi);
    let mut buf: Vec<Complex<T>> = (0..n)
        .map(|k| spectrum[k] * unit_phase(-c_k * lit::<T>(k as f64)))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = freq_grid.step / two_pi.sqrt();
    let c_zero = snap_half_integer(freq_grid.start * time.start / two_pi);
    let c_step = snap_half_integer(freq_grid.start * time.step / two_pi);
    let out = (0..n)
        .map(|i| buf[i] * unit_phase(-c_zero - c_step * lit::<T>(i as f64)).scale(scale))
        .collect();
    Ok((time, out))
}

/// Largest edge-sample magnitude relative to the peak magnitude.
///
/// A transform of samples whose support reaches the grid boundary wraps
/// around; callers compare this ratio against their aliasing tolerance
/// before trusting the spectral route.
pub fn relative_edge_leak<T: Scalar>(samples: &[Complex<T>]) -> T {
    let mut peak = T::zero();
    for v in samples {
        peak = peak.max(v.norm_sqr());
    }
    if peak == T::zero() {
        return T::zero();
    }
    let edge = samples[0].norm_sqr().max(samples[samples.len() - 1].norm_sqr());
    (edge / peak).sqrt()
}
