//! Impurity metrics for squeezing observed through a wavepacket.
//!
//! A single temporal mode `g(t)` carved out of a continuously squeezed beam
//! sees the variance averages `v_plus_g = integral |g_tilde|^2 v_plus` and
//! `v_minus_g` likewise. Unless the spectrum is flat across the packet
//! bandwidth those averages multiply to more than one: wavepacket squeezing
//! from a continuous source is intrinsically impure even though every
//! sideband pair alone is pure. This module quantifies that three ways:
//!
//! - the variance pair itself and the equivalent loss `L` that would produce
//!   the same asymmetry from a pure squeezed state,
//! - the mode-matching rate `M = |<N(g), N(g* conv r)>|^2`, the fraction of
//!   pair creation acting as single-mode squeezing on `g`,
//! - the pair-operator mode ladder: Gram-Schmidt orthogonalization of the
//!   successive images `g_k* conv r`, giving the tridiagonal coefficients
//!   `c_kk`, `c_kk+1` of the pair operator in an orthonormal mode family.

use crate::error::{Error, Result};
use crate::opo::OpoParams;
use crate::scalar::{lit, Scalar};
use crate::signal::exp_poly::ExpPoly;
use crate::signal::{Domain, Form, Signal};
use num_complex::Complex;

/// Quadrature variances of one wavepacket mode, vacuum normalized to 1.
///
/// For squeezed input `v_plus_g >= 1 >= v_minus_g`, and the product exceeds
/// one whenever the sideband spectra vary over the packet's band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketVariances<T> {
    pub v_plus_g: T,
    pub v_minus_g: T,
}

/// Orthonormal mode family and pair-operator coefficients from repeated
/// Gram-Schmidt orthogonalization of `g_k* conv r`.
///
/// `modes` holds `g_0 .. g_K`; `diag_coeffs[k] = <g_k, g_k* conv r>` and
/// `offdiag_coeffs[k]` is the magnitude of the part of `g_k* conv r` outside
/// the span built so far (phase absorbed into `g_k+1`). A full run yields
/// one more mode than coefficients; a ladder whose residual fell below
/// tolerance stops short and sets `terminated_early`.
#[derive(Debug, Clone)]
pub struct ModeLadder<T> {
    pub modes: Vec<Signal<T>>,
    pub diag_coeffs: Vec<Complex<T>>,
    pub offdiag_coeffs: Vec<Complex<T>>,
    /// Number of orthogonalization steps actually performed.
    pub depth: usize,
    /// The pair operator was fully captured before the requested depth.
    pub terminated_early: bool,
}

/// Residual tolerance ending the ladder: below this fraction of the image
/// norm, the next mode would be numerical noise.
const LADDER_RESIDUAL_TOL: f64 = 1e-10;

/// Normalization slack accepted on wavepacket inputs.
const NORMALIZED_TOL: f64 = 1e-6;

/// The normalized both-side exponential `sqrt(b) * exp(-b |t|)` with
/// `b = gamma_rel * gamma`, exact in the piecewise-exponential family.
pub fn lorentz_wavepacket<T: Scalar>(gamma_rel: T, gamma: T) -> Result<Signal<T>> {
    if !(gamma_rel > T::zero()) || !gamma_rel.is_finite() {
        return Err(Error::NonPositiveRate(gamma_rel.to_f64().unwrap_or(f64::NAN)));
    }
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::NonPositiveRate(gamma.to_f64().unwrap_or(f64::NAN)));
    }
    let rate = gamma_rel * gamma;
    Ok(Signal::pieces(Domain::Time, ExpPoly::both_side_exp(rate, rate.sqrt())))
}

struct VarianceSums<T> {
    s_norm: T,
    i_plus: T,
    i_minus: T,
}

/// Accumulate `integral |g_tilde|^2 * {1, v_plus - 1, v_minus - 1}` with one
/// spectrum evaluation per node. Using the same nodes for all three sums
/// makes the discrete Cauchy-Schwarz bound `v_plus_g * v_minus_g >= 1` exact
/// up to rounding, independent of quadrature error.
fn accumulate<T: Scalar>(
    p: &OpoParams<T>,
    nodes: impl Iterator<Item = (T, T)>, // (omega, |g_tilde(omega)|^2 * weight)
) -> VarianceSums<T> {
    let gap = p.gamma() - p.epsilon();
    let sum = p.gamma() + p.epsilon();
    let drive = lit::<T>(4.0) * p.gamma() * p.epsilon();
    let mut acc = VarianceSums { s_norm: T::zero(), i_plus: T::zero(), i_minus: T::zero() };
    for (w, gw) in nodes {
        acc.s_norm += gw;
        acc.i_plus += gw * drive / (gap * gap + w * w);
        acc.i_minus -= gw * drive / (sum * sum + w * w);
    }
    acc
}

fn converged<T: Scalar>(fine: T, coarse: T) -> Result<()> {
    let tol = lit::<T>(1e-8);
    let change = (fine - coarse).abs() / (T::one() + fine.abs());
    if change > tol {
        return Err(Error::QuadratureNotConverged {
            change: change.to_f64().unwrap_or(f64::NAN),
            tol: 1e-8,
        });
    }
    Ok(())
}

/// Quadrature variances of a normalized real time-domain wavepacket against
/// an OPO spectrum.
///
/// Closed-form packets integrate their exact pointwise spectrum over the
/// whole line by the tan-substituted rule; sampled packets transform once and
/// integrate over the spectral grid. Both routes check their own convergence
/// under node halving and verify `integral |g_tilde|^2 = 1` as a side
/// condition before it is divided out.
pub fn wavepacket_variances<T: Scalar>(
    g: &Signal<T>,
    p: &OpoParams<T>,
) -> Result<WavepacketVariances<T>> {
    if g.domain != Domain::Time {
        return Err(Error::WrongDomain { expected: Domain::Time, found: g.domain });
    }
    let norm = g.norm()?;
    let deviation = (norm - T::one()).abs();
    if deviation > lit::<T>(NORMALIZED_TOL) {
        return Err(Error::NotNormalized { deviation: deviation.to_f64().unwrap_or(f64::NAN) });
    }

    let (coarse, fine) = if let Some(poly) = g.as_exp_poly() {
        // norm() succeeded, so every unbounded piece decays and the pointwise
        // transform below cannot diverge.
        let gap = p.gamma() - p.epsilon();
        let packet_width = match poly.decay_rates()? {
            Some((l, r)) => l.min(r).min(lit::<T>(1e6) * gap),
            None => gap,
        };
        let scale = (packet_width * gap).sqrt();
        let n_fine = 8193usize;
        let half_pi = T::PI() / lit::<T>(2.0);
        let h = T::PI() / lit::<T>((n_fine - 1) as f64);
        let node = |i: usize| {
            let u = -half_pi + h * lit::<T>(i as f64);
            let (s, c) = u.sin_cos();
            let w = scale * s / c;
            let weight = scale / (c * c);
            let gw = poly
                .fourier_at(w)
                .expect("square-integrable packet has a convergent transform")
                .norm_sqr();
            (w, gw * weight)
        };
        let fine = {
            let mut v = accumulate(p, (1..n_fine - 1).map(node));
            v.s_norm *= h;
            v.i_plus *= h;
            v.i_minus *= h;
            v
        };
        let coarse = {
            // every other node is the n = 4097 rule exactly
            let mut v = accumulate(p, (2..n_fine - 1).step_by(2).map(node));
            let h2 = h + h;
            v.s_norm *= h2;
            v.i_plus *= h2;
            v.i_minus *= h2;
            v
        };
        (coarse, fine)
    } else {
        if let Form::Sampled { values, .. } = &g.form {
            let peak = values.iter().fold(T::zero(), |m, v| m.max(v.norm()));
            let im_max = values.iter().fold(T::zero(), |m, v| m.max(v.im.abs()));
            if im_max > lit::<T>(1e-9) * peak {
                return Err(Error::ComplexWavepacket {
                    im_max: (im_max / peak).to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let spec = g.fourier()?;
        let grid = spec.sample_grid().expect("transform of samples is sampled").clone();
        let needed = lit::<T>(crate::signal::AUTO_SPAN_DECAY) * p.gamma();
        if grid.end() < needed {
            return Err(Error::GridTooShort {
                required_span: 2.0 * needed.to_f64().unwrap_or(f64::NAN),
            });
        }
        let values = spec.sample_values().unwrap();
        let node = |k: usize| (grid.point(k), values[k].norm_sqr());
        let fine = {
            let mut v = accumulate(p, (0..grid.count).map(node));
            v.s_norm *= grid.step;
            v.i_plus *= grid.step;
            v.i_minus *= grid.step;
            v
        };
        let coarse = {
            let mut v = accumulate(p, (0..grid.count).step_by(2).map(node));
            let h2 = grid.step + grid.step;
            v.s_norm *= h2;
            v.i_plus *= h2;
            v.i_minus *= h2;
            v
        };
        (coarse, fine)
    };

    converged(fine.s_norm, coarse.s_norm)?;
    converged(fine.i_plus, coarse.i_plus)?;
    converged(fine.i_minus, coarse.i_minus)?;
    let side = (fine.s_norm - T::one()).abs();
    if side > lit::<T>(1e-5) {
        return Err(Error::NotNormalized { deviation: side.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(WavepacketVariances {
        v_plus_g: T::one() + fine.i_plus / fine.s_norm,
        v_minus_g: T::one() + fine.i_minus / fine.s_norm,
    })
}

/// Loss fraction reproducing the observed variance asymmetry from a pure
/// squeezed state: `L = (v+ v- - 1) / (v+ + v- - 2)`.
///
/// The flat case `v+ = v- = 1` leaves every loss value consistent, so it is
/// reported as indefinite instead of a number.
pub fn equivalent_loss<T: Scalar>(v: &WavepacketVariances<T>) -> Result<T> {
    let denom = v.v_plus_g + v.v_minus_g - lit::<T>(2.0);
    if denom <= lit::<T>(1e-14) {
        return Err(Error::IndefiniteLoss);
    }
    Ok((v.v_plus_g * v.v_minus_g - T::one()) / denom)
}

/// Equivalent loss of the Lorentzian wavepacket across relative bandwidths.
pub fn equiv_loss_curve<T: Scalar>(
    p: &OpoParams<T>,
    gamma_rel_list: &[T],
) -> Result<Vec<(T, T)>> {
    gamma_rel_list
        .iter()
        .map(|&rel| {
            let g = lorentz_wavepacket(rel, p.gamma())?;
            let v = wavepacket_variances(&g, p)?;
            Ok((rel, equivalent_loss(&v)?))
        })
        .collect()
}

/// Mode-matching rate `M = |<N(g), N(g* conv r)>|^2`: the fraction of the
/// pair creation seen by `g` that squeezes `g` itself. Normalization is part
/// of the definition, so both arguments may come unscaled.
pub fn mode_match<T: Scalar>(g: &Signal<T>, r: &Signal<T>) -> Result<T> {
    let gn = g.normalize()?;
    let image = gn.conjugate().convolve(r)?.normalize()?;
    Ok(gn.overlap_report(&image)?.overlap)
}

fn subtract_scaled<T: Scalar>(w: &Signal<T>, g: &Signal<T>, c: Complex<T>) -> Result<Signal<T>> {
    let real_c = c.im.abs() <= lit::<T>(1e-12) * (T::one() + c.norm());
    if real_c {
        if let (Some(we), Some(ge)) = (w.as_exp_poly(), g.as_exp_poly()) {
            return Ok(Signal::pieces(w.domain, we.sub(&ge.scale(c.re))));
        }
    }
    let grid = w.binary_grid(g)?;
    let ws = w.render(&grid)?;
    let gs = g.render(&grid)?;
    let vals = ws.iter().zip(&gs).map(|(a, b)| *a - *b * c).collect();
    Signal::sampled(w.domain, grid, vals)
}

/// Decompose the pair operator over an orthonormal mode family seeded by `g`.
///
/// Step `k` convolves the latest mode with `r`, projects the image against
/// every mode built so far (full re-orthogonalization, which keeps the family
/// orthonormal where the idealized recursion would drift), records the
/// diagonal coefficient and the leftover magnitude, and normalizes the
/// leftover into the next mode. Stops early once the leftover drops below
/// `1e-10` of the image norm.
pub fn pair_mode_ladder<T: Scalar>(
    g: &Signal<T>,
    r: &Signal<T>,
    depth: usize,
) -> Result<ModeLadder<T>> {
    if depth == 0 {
        return Err(Error::InvalidParameter("ladder depth must be at least 1".into()));
    }
    let norm = g.norm()?;
    let deviation = (norm - T::one()).abs();
    if deviation > lit::<T>(NORMALIZED_TOL) {
        return Err(Error::NotNormalized { deviation: deviation.to_f64().unwrap_or(f64::NAN) });
    }
    let mut modes = vec![g.clone()];
    let mut diag_coeffs = Vec::with_capacity(depth);
    let mut offdiag_coeffs = Vec::with_capacity(depth);
    let mut terminated_early = false;
    for k in 0..depth {
        let image = modes[k].conjugate().convolve(r)?;
        let image_norm = image.norm()?;
        let mut leftover = image;
        let mut diag = Complex::new(T::zero(), T::zero());
        for (j, mode) in modes.iter().enumerate() {
            let c = mode.inner_product(&leftover)?;
            leftover = subtract_scaled(&leftover, mode, c)?;
            if j == k {
                diag = c;
            }
        }
        let residual = leftover.norm()?;
        diag_coeffs.push(diag);
        offdiag_coeffs.push(Complex::new(residual, T::zero()));
        if residual <= lit::<T>(LADDER_RESIDUAL_TOL) * image_norm.max(T::one()) {
            terminated_early = true;
            break;
        }
        modes.push(leftover.normalize()?);
    }
    let depth = diag_coeffs.len();
    Ok(ModeLadder { modes, diag_coeffs, offdiag_coeffs, depth, terminated_early })
}
