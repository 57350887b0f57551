//! Truncated Fock-space simulator for one to three bosonic modes.
//!
//! Carries just enough operator algebra to verify the identities the
//! continuous-beam story leans on: tapping a beam on a weak beamsplitter and
//! heralding one photon acts as annihilation, subtracting a photon from
//! squeezed vacuum lands in the squeezed single-photon state, losses commute
//! with subtraction, and a pair operator applied to an existing photon biases
//! the outcome 3:4 between doubling and spreading.
//!
//! Unitaries are matrix exponentials of the truncated generators, computed
//! by scaling and squaring. A truncated antisymmetric generator still
//! exponentiates to an orthogonal matrix, so norms are preserved exactly and
//! truncation shows up only as amplitude misplacement near the cutoff, which
//! the leakage monitor bounds. Identities are checked between two in-simulator
//! routes so both sides share the same truncation; analytic values enter only
//! where a closed-form oracle is stated.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use num_complex::Complex;

/// Probability allowed in a top shell before an operation that would push it
/// over the edge is refused.
const LEAKAGE_TOL: f64 = 1e-10;

/// Hard cap on the per-mode photon cutoff; the dense-exponential design is
/// sized for small spaces.
const MAX_CUTOFF: usize = 60;

/// State of 1..=3 bosonic modes with per-mode photon cutoff, stored as a
/// dense complex tensor with mode 0 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState<T> {
    mode_count: usize,
    cutoff: usize,
    amps: Vec<Complex<T>>,
}

/// Outcome of a heralded (post-selected) operation.
#[derive(Debug, Clone)]
pub struct HeraldResult<T> {
    /// Renormalized conditional state.
    pub state: FockState<T>,
    /// Probability of the heralding click, the squared norm of the
    /// unnormalized projection.
    pub success_prob: T,
}

fn check_shape(mode_count: usize, cutoff: usize) -> Result<usize> {
    if !(1..=3).contains(&mode_count) {
        return Err(Error::InvalidParameter(format!(
            "mode count must be 1..=3, got {mode_count}"
        )));
    }
    if cutoff == 0 || cutoff > MAX_CUTOFF {
        return Err(Error::InvalidParameter(format!(
            "cutoff must be 1..={MAX_CUTOFF}, got {cutoff}"
        )));
    }
    Ok((cutoff + 1).pow(mode_count as u32))
}

impl<T: Scalar> FockState<T> {
    pub fn vacuum(mode_count: usize, cutoff: usize) -> Result<Self> {
        let len = check_shape(mode_count, cutoff)?;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); len];
        amps[0] = Complex::new(T::one(), T::zero());
        Ok(Self { mode_count, cutoff, amps })
    }

    pub fn number_state(mode_count: usize, cutoff: usize, occupation: &[usize]) -> Result<Self> {
        let len = check_shape(mode_count, cutoff)?;
        if occupation.len() != mode_count || occupation.iter().any(|&n| n > cutoff) {
            return Err(Error::InvalidParameter(format!(
                "occupation {occupation:?} does not fit {mode_count} modes at cutoff {cutoff}"
            )));
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); len];
        let mut s = Self { mode_count, cutoff, amps: Vec::new() };
        let idx = s.index(occupation);
        amps[idx] = Complex::new(T::one(), T::zero());
        s.amps = amps;
        Ok(s)
    }

    pub fn from_amplitudes(
        mode_count: usize,
        cutoff: usize,
        amps: Vec<Complex<T>>,
    ) -> Result<Self> {
        let len = check_shape(mode_count, cutoff)?;
        if amps.len() != len {
            return Err(Error::InvalidParameter(format!(
                "amplitude tensor has {} entries, shape needs {len}",
                amps.len()
            )));
        }
        Ok(Self { mode_count, cutoff, amps })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    fn stride(&self, mode: usize) -> usize {
        (self.cutoff + 1).pow((self.mode_count - 1 - mode) as u32)
    }

    fn index(&self, occupation: &[usize]) -> usize {
        assert_eq!(occupation.len(), self.mode_count);
        occupation.iter().fold(0, |acc, &n| {
            assert!(n <= self.cutoff);
            acc * (self.cutoff + 1) + n
        })
    }

    fn occupation(&self, mut idx: usize) -> Vec<usize> {
        let mut ns = vec![0; self.mode_count];
        for m in (0..self.mode_count).rev() {
            ns[m] = idx % (self.cutoff + 1);
            idx /= self.cutoff + 1;
        }
        ns
    }

    pub fn amp(&self, occupation: &[usize]) -> Complex<T> {
        self.amps[self.index(occupation)]
    }

    pub fn norm(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).fold(T::zero(), |s, v| s + v).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.norm() <= lit::<T>(1e-150)
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n <= lit::<T>(1e-150) {
            return Err(Error::ZeroNorm);
        }
        let inv = T::one() / n;
        Ok(self.scale(Complex::new(inv, T::zero())))
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self {
            mode_count: self.mode_count,
            cutoff: self.cutoff,
            amps: self.amps.iter().map(|a| *a * c).collect(),
        }
    }

    pub fn add_scaled(&self, other: &Self, c: Complex<T>) -> Result<Self> {
        if self.mode_count != other.mode_count || self.cutoff != other.cutoff {
            return Err(Error::InvalidParameter("state shapes differ".into()));
        }
        Ok(Self {
            mode_count: self.mode_count,
            cutoff: self.cutoff,
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| *a + *b * c).collect(),
        })
    }

    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.mode_count != other.mode_count || self.cutoff != other.cutoff {
            return Err(Error::InvalidParameter("state shapes differ".into()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * *b)
            .fold(Complex::new(T::zero(), T::zero()), |s, v| s + v))
    }

    /// Squared overlap of the normalized states.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        let a = self.normalize()?;
        let b = other.normalize()?;
        Ok(a.inner(&b)?.norm_sqr())
    }

    /// Append one more mode in vacuum.
    pub fn with_vacuum_ancilla(&self) -> Result<Self> {
        if self.mode_count >= 3 {
            return Err(Error::InvalidParameter("no room for another mode".into()));
        }
        let mut out = Self::vacuum(self.mode_count + 1, self.cutoff)?;
        for a in out.amps.iter_mut() {
            *a = Complex::new(T::zero(), T::zero());
        }
        let c1 = self.cutoff + 1;
        for (idx, a) in self.amps.iter().enumerate() {
            out.amps[idx * c1] = *a;
        }
        Ok(out)
    }

    /// Total probability currently sitting in the top shell of `mode`.
    pub fn top_shell_population(&self, mode: usize) -> T {
        let stride = self.stride(mode);
        let c1 = self.cutoff + 1;
        self.amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| (idx / stride) % c1 == self.cutoff)
            .map(|(_, a)| a.norm_sqr())
            .fold(T::zero(), |s, v| s + v)
    }

    /// Probability in the top two shells of `mode`, the leakage monitor.
    pub fn top_two_shell_population(&self, mode: usize) -> T {
        let stride = self.stride(mode);
        let c1 = self.cutoff + 1;
        self.amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| (idx / stride) % c1 + 1 >= self.cutoff)
            .map(|(_, a)| a.norm_sqr())
            .fold(T::zero(), |s, v| s + v)
    }

    /// CSV dump of amplitudes with magnitude above 1e-12, one row per basis
    /// state: occupation numbers, then real and imaginary parts.
    pub fn dump_csv(&self) -> String {
        let mut out = String::new();
        for m in 0..self.mode_count {
            out.push_str(&format!("n{}", m + 1));
            out.push(',');
        }
        out.push_str("re,im\n");
        let floor = lit::<T>(1e-12);
        for (idx, a) in self.amps.iter().enumerate() {
            if a.norm() <= floor {
                continue;
            }
            for n in self.occupation(idx) {
                out.push_str(&format!("{n},"));
            }
            out.push_str(&format!(
                "{:.12e},{:.12e}\n",
                a.re.to_f64().unwrap_or(f64::NAN),
                a.im.to_f64().unwrap_or(f64::NAN)
            ));
        }
        out
    }

    fn mode_in_range(&self, mode: usize) -> Result<()> {
        if mode >= self.mode_count {
            return Err(Error::ModeOutOfRange { mode, mode_count: self.mode_count });
        }
        Ok(())
    }

    /// Largest total photon number carrying any amplitude; sectors above it
    /// are exactly empty and number-preserving unitaries can skip them.
    fn max_total_occupied(&self) -> usize {
        let mut top = 0;
        for (idx, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > T::zero() {
                let total: usize = self.occupation(idx).iter().sum();
                top = top.max(total);
            }
        }
        top
    }
}

fn mat_identity<T: Scalar>(d: usize) -> Vec<Vec<T>> {
    let mut m = vec![vec![T::zero(); d]; d];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

fn mat_mul<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let d = a.len();
    let mut out = vec![vec![T::zero(); d]; d];
    for i in 0..d {
        for (k, &aik) in a[i].iter().enumerate() {
            if aik != T::zero() {
                for (o, &bkj) in out[i].iter_mut().zip(b[k].iter()) {
                    *o += aik * bkj;
                }
            }
        }
    }
    out
}

fn mat_inf_norm<T: Scalar>(a: &[Vec<T>]) -> T {
    a.iter()
        .map(|row| row.iter().fold(T::zero(), |s, v| s + v.abs()))
        .fold(T::zero(), |m, v| m.max(v))
}

/// Dense matrix exponential by scaling and squaring with a Taylor core.
/// Generators here are real and antisymmetric, so the result is orthogonal
/// to within the series truncation of ~1e-16.
fn mat_exp<T: Scalar>(g: &[Vec<T>]) -> Vec<Vec<T>> {
    let d = g.len();
    let mut squarings = 0usize;
    let mut scaled_norm = mat_inf_norm(g);
    let half = lit::<T>(0.5);
    while scaled_norm > half && squarings < 64 {
        scaled_norm = scaled_norm * half;
        squarings += 1;
    }
    let scale = half.powi(squarings as i32);
    let a: Vec<Vec<T>> = g.iter().map(|row| row.iter().map(|&v| v * scale).collect()).collect();
    let mut result = mat_identity(d);
    let mut term = mat_identity(d);
    for k in 1..=30 {
        term = mat_mul(&term, &a);
        let inv_k = T::one() / lit::<T>(k as f64);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v *= inv_k;
            }
        }
        for (r_row, t_row) in result.iter_mut().zip(&term) {
            for (r, t) in r_row.iter_mut().zip(t_row) {
                *r += *t;
            }
        }
        if mat_inf_norm(&term) < lit::<T>(1e-20) {
            break;
        }
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    result
}

fn apply_real_matrix<T: Scalar>(m: &[Vec<T>], v: &[Complex<T>]) -> Vec<Complex<T>> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .map(|(&c, a)| Complex::new(a.re * c, a.im * c))
                .fold(Complex::new(T::zero(), T::zero()), |s, x| s + x)
        })
        .collect()
}

/// Raising operator on one mode; the result is unnormalized. Amplitude
/// already at the cutoff has nowhere to go: above the leakage tolerance the
/// operation is refused, below it the remnant is discarded.
pub fn apply_creation<T: Scalar>(s: &FockState<T>, mode: usize) -> Result<FockState<T>> {
    s.mode_in_range(mode)?;
    let top = s.top_shell_population(mode);
    if top > lit::<T>(LEAKAGE_TOL) {
        return Err(Error::HeadroomExhausted {
            mode,
            population: top.to_f64().unwrap_or(f64::NAN),
        });
    }
    let stride = s.stride(mode);
    let c1 = s.cutoff + 1;
    let mut out = s.clone();
    for a in out.amps.iter_mut() {
        *a = Complex::new(T::zero(), T::zero());
    }
    for (idx, a) in s.amps.iter().enumerate() {
        let n = (idx / stride) % c1;
        if n < s.cutoff {
            let f = lit::<T>((n + 1) as f64).sqrt();
            out.amps[idx + stride] += Complex::new(a.re * f, a.im * f);
        }
    }
    Ok(out)
}

/// Lowering operator on one mode; the result is unnormalized, and lowering
/// vacuum yields the zero state (detectable via `is_zero`) rather than an
/// error.
pub fn apply_annihilation<T: Scalar>(s: &FockState<T>, mode: usize) -> Result<FockState<T>> {
    s.mode_in_range(mode)?;
    let stride = s.stride(mode);
    let c1 = s.cutoff + 1;
    let mut out = s.clone();
    for a in out.amps.iter_mut() {
        *a = Complex::new(T::zero(), T::zero());
    }
    for (idx, a) in s.amps.iter().enumerate() {
        let n = (idx / stride) % c1;
        if n > 0 {
            let f = lit::<T>(n as f64).sqrt();
            out.amps[idx - stride] += Complex::new(a.re * f, a.im * f);
        }
    }
    Ok(out)
}

/// Beamsplitter of reflectivity `r_refl` mixing two modes, with the
/// convention B |1,0> = sqrt(1-R) |1,0> + sqrt(R) |0,1>.
///
/// The generator conserves total photon number, so it exponentiates block by
/// block over the occupied sectors; each block is antisymmetric and its
/// exponential orthogonal, preserving the norm even where the sector is
/// clipped by the cutoff.
pub fn apply_beamsplitter<T: Scalar>(
    s: &FockState<T>,
    modes: (usize, usize),
    r_refl: T,
) -> Result<FockState<T>> {
    let (mi, mj) = modes;
    s.mode_in_range(mi)?;
    s.mode_in_range(mj)?;
    if mi == mj {
        return Err(Error::InvalidParameter("beamsplitter needs two distinct modes".into()));
    }
    if !(r_refl >= T::zero() && r_refl <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "reflectivity must lie in [0, 1], got {:?}",
            r_refl
        )));
    }
    let theta = r_refl.sqrt().asin();
    if theta == T::zero() {
        return Ok(s.clone());
    }
    let c = s.cutoff;
    let n_top = s.max_total_occupied().min(2 * c);
    // per-sector mixing matrices over k = photons in mode mi
    let mut blocks: Vec<Vec<Vec<T>>> = Vec::with_capacity(n_top + 1);
    for n in 0..=n_top {
        let k_lo = n.saturating_sub(c);
        let k_hi = n.min(c);
        let d = k_hi - k_lo + 1;
        let mut gen = vec![vec![T::zero(); d]; d];
        for local in 0..d {
            let k = k_lo + local;
            // theta * (down-coupling to k-1 minus up-coupling to k+1)
            if k > k_lo {
                gen[local - 1][local] = theta * lit::<T>((k * (n - k + 1)) as f64).sqrt();
            }
            if k < k_hi {
                gen[local + 1][local] = -theta * lit::<T>(((k + 1) * (n - k)) as f64).sqrt();
            }
        }
        blocks.push(mat_exp(&gen));
    }
    let stride_i = s.stride(mi);
    let stride_j = s.stride(mj);
    let mut out = s.clone();
    for base in 0..s.amps.len() {
        let ns = s.occupation(base);
        if ns[mi] != 0 || ns[mj] != 0 {
            continue;
        }
        for (n, block) in blocks.iter().enumerate() {
            let k_lo = n.saturating_sub(c);
            let k_hi = n.min(c);
            let gather: Vec<Complex<T>> = (k_lo..=k_hi)
                .map(|k| s.amps[base + k * stride_i + (n - k) * stride_j])
                .collect();
            let mixed = apply_real_matrix(block, &gather);
            for (local, v) in mixed.into_iter().enumerate() {
                let k = k_lo + local;
                out.amps[base + k * stride_i + (n - k) * stride_j] = v;
            }
        }
    }
    Ok(out)
}

/// Single-mode squeezer exp[(r/2)(a^dag a^dag - a a)] along `mode`.
///
/// The truncated generator is antisymmetric, so the norm is preserved
/// exactly; what truncation distorts is flagged by the top-two-shell leakage
/// monitor, with a cutoff suggestion scaled from the tanh(r) shell decay.
pub fn apply_squeeze<T: Scalar>(s: &FockState<T>, mode: usize, r: T) -> Result<FockState<T>> {
    s.mode_in_range(mode)?;
    if !r.is_finite() {
        return Err(Error::InvalidParameter("squeeze parameter must be finite".into()));
    }
    if r == T::zero() {
        return Ok(s.clone());
    }
    let c = s.cutoff;
    let d = c + 1;
    let half_r = r * lit::<T>(0.5);
    let mut gen = vec![vec![T::zero(); d]; d];
    for n in 0..=c {
        if n + 2 <= c {
            let f = lit::<T>(((n + 1) * (n + 2)) as f64).sqrt();
            gen[n + 2][n] = half_r * f;
            gen[n][n + 2] = -half_r * f;
        }
    }
    let m = mat_exp(&gen);
    let stride = s.stride(mode);
    let c1 = c + 1;
    let mut out = s.clone();
    for base in 0..s.amps.len() {
        if (base / stride) % c1 != 0 {
            continue;
        }
        let gather: Vec<Complex<T>> = (0..=c).map(|n| s.amps[base + n * stride]).collect();
        let mixed = apply_real_matrix(&m, &gather);
        for (n, v) in mixed.into_iter().enumerate() {
            out.amps[base + n * stride] = v;
        }
    }
    let leakage = out.top_two_shell_population(mode);
    if leakage > lit::<T>(LEAKAGE_TOL) {
        let shell_ratio = r.abs().tanh().powi(2);
        let leak_f64 = leakage.to_f64().unwrap_or(1.0);
        let ratio_f64 = shell_ratio.to_f64().unwrap_or(0.5).min(0.99);
        let extra_pairs = ((leak_f64 / LEAKAGE_TOL).ln() / (1.0 / ratio_f64).ln()).ceil();
        let suggested = c + 2 * (extra_pairs.max(1.0) as usize) + 2;
        return Err(Error::TruncationLeakage {
            leakage: leak_f64,
            tol: LEAKAGE_TOL,
            suggested_cutoff: suggested.min(MAX_CUTOFF),
        });
    }
    Ok(out)
}

/// Tap a single-mode state on a beamsplitter of reflectivity `r_refl`
/// against a vacuum ancilla and herald on exactly one ancilla photon.
///
/// The heralded state approaches the annihilated input as the tap weakens,
/// up to the noiseless attenuation sqrt(1-R)^n; success probability is
/// R <n> to leading order. Tapping vacuum never heralds and is reported as
/// `VacuumSubtraction`.
pub fn subtract_via_tap<T: Scalar>(s: &FockState<T>, r_refl: T) -> Result<HeraldResult<T>> {
    if s.mode_count != 1 {
        return Err(Error::InvalidParameter(
            "tap needs a single-mode input with a free ancilla slot".into(),
        ));
    }
    if !(r_refl > T::zero() && r_refl < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "tap reflectivity must lie in (0, 1), got {:?}",
            r_refl
        )));
    }
    let ext = s.with_vacuum_ancilla()?;
    let mixed = apply_beamsplitter(&ext, (0, 1), r_refl)?;
    let c1 = s.cutoff + 1;
    let heralded: Vec<Complex<T>> = (0..c1).map(|n| mixed.amps[n * c1 + 1]).collect();
    let success_prob =
        heralded.iter().map(|a| a.norm_sqr()).fold(T::zero(), |acc, v| acc + v);
    let unnorm = FockState { mode_count: 1, cutoff: s.cutoff, amps: heralded };
    if unnorm.is_zero() {
        return Err(Error::VacuumSubtraction);
    }
    Ok(HeraldResult { state: unnorm.normalize()?, success_prob })
}

/// Fidelity between the photon-subtracted squeezed vacuum and the squeezed
/// single photon, both built in the same truncated space.
pub fn squeezed_single_photon_check<T: Scalar>(r: T, cutoff: usize) -> Result<T> {
    let vac = FockState::vacuum(1, cutoff)?;
    let squeezed = apply_squeeze(&vac, 0, r)?;
    let subtracted = apply_annihilation(&squeezed, 0)?;
    if subtracted.is_zero() {
        return Err(Error::VacuumSubtraction);
    }
    let one = FockState::number_state(1, cutoff, &[1])?;
    let squeezed_photon = apply_squeeze(&one, 0, r)?;
    subtracted.fidelity(&squeezed_photon)
}

/// Norm distance between subtracting after a loss beamsplitter and losing
/// after subtraction, both renormalized; the two orders agree exactly for
/// the ideal operators.
pub fn loss_commutation_check<T: Scalar>(psi: &FockState<T>, loss: T) -> Result<T> {
    if psi.mode_count != 1 {
        return Err(Error::InvalidParameter("loss check expects a single-mode state".into()));
    }
    if !(loss >= T::zero() && loss <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "loss fraction must lie in [0, 1], got {:?}",
            loss
        )));
    }
    let lossy_first = {
        let ext = psi.with_vacuum_ancilla()?;
        let lossy = apply_beamsplitter(&ext, (0, 1), loss)?;
        let subtracted = apply_annihilation(&lossy, 0)?;
        if subtracted.is_zero() {
            return Err(Error::VacuumSubtraction);
        }
        subtracted.normalize()?
    };
    let subtract_first = {
        let subtracted = apply_annihilation(psi, 0)?;
        if subtracted.is_zero() {
            return Err(Error::VacuumSubtraction);
        }
        let ext = subtracted.with_vacuum_ancilla()?;
        apply_beamsplitter(&ext, (0, 1), loss)?.normalize()?
    };
    let diff = lossy_first.add_scaled(&subtract_first, Complex::new(-T::one(), T::zero()))?;
    Ok(diff.norm())
}

/// Apply the two-mode pair operator `c_gg adag_0^2 + 2 c_ggp adag_0 adag_1`
/// to |1,0> and report the normalized probabilities of |3,0> and |2,1>.
///
/// Equal coefficients give the 3:4 bias: the doubled-up branch carries
/// sqrt(6) against 2 sqrt(2) for the spread branch.
pub fn pair_apply_ratio_check<T: Scalar>(c_gg: T, c_ggp: T) -> Result<(T, T)> {
    if c_gg == T::zero() && c_ggp == T::zero() {
        return Err(Error::InvalidParameter("pair coefficients are both zero".into()));
    }
    let seed = FockState::number_state(2, 5, &[1, 0])?;
    let doubled = apply_creation(&apply_creation(&seed, 0)?, 0)?;
    let spread = apply_creation(&apply_creation(&seed, 0)?, 1)?;
    let combined = doubled
        .scale(Complex::new(c_gg, T::zero()))
        .add_scaled(&spread, Complex::new(lit::<T>(2.0) * c_ggp, T::zero()))?;
    let total = combined.norm().powi(2);
    let p_30 = combined.amp(&[3, 0]).norm_sqr() / total;
    let p_21 = combined.amp(&[2, 1]).norm_sqr() / total;
    Ok((p_30, p_21))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    /// Deterministic filler state with the top `clear` shells of every mode
    /// left empty.
    fn pseudo_state(mode_count: usize, cutoff: usize, seed: u64, clear: usize) -> FockState<f64> {
        let len = (cutoff + 1).pow(mode_count as u32);
        let mut x = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut amps: Vec<Complex<f64>> = (0..len).map(|_| Complex::new(next(), next())).collect();
        let s = FockState::from_amplitudes(mode_count, cutoff, amps.clone()).unwrap();
        for (idx, a) in amps.iter_mut().enumerate() {
            let ns = s.occupation(idx);
            if ns.iter().any(|&n| n + clear > cutoff) {
                *a = Complex::new(0.0, 0.0);
            }
        }
        FockState::from_amplitudes(mode_count, cutoff, amps).unwrap().normalize().unwrap()
    }

    #[test]
    fn construction_checks_shapes() {
        let v = FockState::<f64>::vacuum(2, 5).unwrap();
        assert_eq!(v.amplitudes().len(), 36);
        assert_abs_diff_eq!(v.norm(), 1.0);
        assert_eq!(v.amp(&[0, 0]).re, 1.0);
        assert!(FockState::<f64>::vacuum(4, 5).is_err());
        assert!(FockState::<f64>::vacuum(1, 0).is_err());
        assert!(FockState::<f64>::vacuum(1, 61).is_err());
        assert!(FockState::<f64>::number_state(1, 5, &[6]).is_err());
        assert!(matches!(
            FockState::from_amplitudes(1, 5, vec![Complex::new(1.0f64, 0.0); 7]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn creation_climbs_the_ladder() {
        let vac = FockState::<f64>::vacuum(1, 5).unwrap();
        let one = apply_creation(&vac, 0).unwrap();
        assert_abs_diff_eq!(one.amp(&[1]).re, 1.0, epsilon = 1e-15);
        let two = apply_creation(&one, 0).unwrap();
        assert_abs_diff_eq!(two.amp(&[2]).re, 2.0f64.sqrt(), epsilon = 1e-15);
        let top = FockState::<f64>::number_state(1, 4, &[4]).unwrap();
        assert!(matches!(apply_creation(&top, 0), Err(Error::HeadroomExhausted { .. })));
        assert!(matches!(apply_creation(&vac, 1), Err(Error::ModeOutOfRange { .. })));
    }

    #[test]
    fn annihilation_descends_and_kills_vacuum() {
        let two = FockState::<f64>::number_state(1, 5, &[2]).unwrap();
        let one = apply_annihilation(&two, 0).unwrap();
        assert_abs_diff_eq!(one.amp(&[1]).re, 2.0f64.sqrt(), epsilon = 1e-15);
        let vac = FockState::<f64>::vacuum(1, 5).unwrap();
        let dead = apply_annihilation(&vac, 0).unwrap();
        assert!(dead.is_zero());
    }

    #[test]
    fn ladder_operators_are_adjoint_with_unit_commutator() {
        let psi = pseudo_state(2, 8, 7, 2);
        let phi = pseudo_state(2, 8, 13, 2);
        for mode in 0..2 {
            let lhs = psi.inner(&apply_creation(&phi, mode).unwrap()).unwrap();
            let rhs = apply_annihilation(&psi, mode).unwrap().inner(&phi).unwrap();
            assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-12);
            assert_abs_diff_eq!(lhs.im, rhs.im, epsilon = 1e-12);

            let up_down = apply_annihilation(&apply_creation(&psi, mode).unwrap(), mode).unwrap();
            let down_up = apply_creation(&apply_annihilation(&psi, mode).unwrap(), mode).unwrap();
            let comm = up_down.add_scaled(&down_up, Complex::new(-1.0, 0.0)).unwrap();
            let diff = comm.add_scaled(&psi, Complex::new(-1.0, 0.0)).unwrap();
            assert!(diff.norm() <= 1e-12, "commutator off by {}", diff.norm());
        }
    }

    #[test]
    fn beamsplitter_splits_one_photon_by_reflectivity() {
        for r in [0.2f64, 0.5, 1e-3] {
            let s = FockState::<f64>::number_state(2, 4, &[1, 0]).unwrap();
            let out = apply_beamsplitter(&s, (0, 1), r).unwrap();
            assert_abs_diff_eq!(out.amp(&[1, 0]).re, (1.0 - r).sqrt(), epsilon = 1e-12);
            assert_abs_diff_eq!(out.amp(&[0, 1]).re, r.sqrt(), epsilon = 1e-12);
        }
        let vac = FockState::<f64>::vacuum(2, 4).unwrap();
        let out = apply_beamsplitter(&vac, (0, 1), 0.37).unwrap();
        assert_abs_diff_eq!(out.amp(&[0, 0]).re, 1.0, epsilon = 1e-15);

        let s = pseudo_state(2, 6, 3, 0);
        let id = apply_beamsplitter(&s, (0, 1), 0.0).unwrap();
        let diff = id.add_scaled(&s, Complex::new(-1.0, 0.0)).unwrap();
        assert!(diff.norm() <= 1e-12);

        assert!(apply_beamsplitter(&s, (0, 0), 0.5).is_err());
        assert!(apply_beamsplitter(&s, (0, 1), 1.5).is_err());
        assert!(apply_beamsplitter(&s, (0, 1), f64::NAN).is_err());
    }

    #[test]
    fn beamsplitter_preserves_norm_and_photon_number() {
        let s = pseudo_state(2, 7, 42, 0);
        let out = apply_beamsplitter(&s, (0, 1), 0.31).unwrap();
        assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-10);
        for total in 0..=14usize {
            let weight = |st: &FockState<f64>| -> f64 {
                st.amplitudes()
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| st.occupation(*idx).iter().sum::<usize>() == total)
                    .map(|(_, a)| a.norm_sqr())
                    .sum()
            };
            assert_abs_diff_eq!(weight(&s), weight(&out), epsilon = 1e-12);
        }
    }

    #[test]
    fn squeezed_vacuum_is_even_with_the_right_weight() {
        let vac = FockState::<f64>::vacuum(1, 40).unwrap();
        let sq = apply_squeeze(&vac, 0, 0.5).unwrap();
        assert_abs_diff_eq!(sq.norm(), 1.0, epsilon = 1e-8);
        for n in (1..=39).step_by(2) {
            assert!(sq.amp(&[n]).norm() <= 1e-10, "odd shell {n} populated");
        }
        // disentangled-form oracle for the vacuum amplitude
        let expect = 1.0 / 0.5f64.cosh().sqrt();
        assert_abs_diff_eq!(sq.amp(&[0]).re, expect, epsilon = 1e-10);
        assert_abs_diff_eq!(sq.amp(&[0]).im, 0.0, epsilon = 1e-14);

        let undone = apply_squeeze(&sq, 0, -0.5).unwrap();
        let diff = undone.add_scaled(&vac, Complex::new(-1.0, 0.0)).unwrap();
        assert!(diff.norm() <= 1e-8, "inverse squeeze residue {}", diff.norm());
    }

    #[test]
    fn squeeze_flags_insufficient_cutoff() {
        let vac = FockState::<f64>::vacuum(1, 10).unwrap();
        match apply_squeeze(&vac, 0, 2.0) {
            Err(Error::TruncationLeakage { leakage, tol, suggested_cutoff }) => {
                assert!(leakage > tol);
                assert!(suggested_cutoff > 10);
            }
            other => panic!("expected leakage error, got {other:?}"),
        }
    }

    #[test]
    fn tap_on_two_photons_heralds_one_exactly() {
        let two = FockState::<f64>::number_state(1, 6, &[2]).unwrap();
        let r = 0.01;
        let herald = subtract_via_tap(&two, r).unwrap();
        assert_abs_diff_eq!(herald.state.amp(&[1]).re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(herald.success_prob, 2.0 * r * (1.0 - r), epsilon = 1e-12);
        // leading order: R times the mean photon number
        assert_relative_eq!(herald.success_prob, r * 2.0, max_relative = 0.02);
    }

    #[test]
    fn tap_converges_to_annihilation_linearly() {
        let vac = FockState::<f64>::vacuum(1, 40).unwrap();
        let sq = apply_squeeze(&vac, 0, 0.5).unwrap();
        let direct = apply_annihilation(&sq, 0).unwrap().normalize().unwrap();

        let sweep = [1e-2f64, 1e-3, 1e-4];
        let distances: Vec<f64> = sweep
            .iter()
            .map(|&r| {
                let herald = subtract_via_tap(&sq, r).unwrap();
                (1.0 - herald.state.fidelity(&direct).unwrap()).max(0.0).sqrt()
            })
            .collect();
        assert!(
            1.0 - distances[1] * distances[1] >= 1.0 - 5e-3,
            "fidelity at R=1e-3 too low"
        );
        assert!(distances[0] > distances[1] && distances[1] > distances[2]);

        // straight-line fit of distance against R
        let n = sweep.len() as f64;
        let sx: f64 = sweep.iter().sum();
        let sy: f64 = distances.iter().sum();
        let sxx: f64 = sweep.iter().map(|r| r * r).sum();
        let sxy: f64 = sweep.iter().zip(&distances).map(|(r, d)| r * d).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        let ss_res: f64 = sweep
            .iter()
            .zip(&distances)
            .map(|(r, d)| (d - (slope * r + intercept)).powi(2))
            .sum();
        let mean = sy / n;
        let ss_tot: f64 = distances.iter().map(|d| (d - mean).powi(2)).sum();
        let r_sq = 1.0 - ss_res / ss_tot;
        assert!(slope > 0.0);
        assert!(r_sq >= 0.999, "linear fit quality {r_sq}");
    }

    #[test]
    fn tap_from_vacuum_never_heralds() {
        let vac = FockState::<f64>::vacuum(1, 6).unwrap();
        assert!(matches!(subtract_via_tap(&vac, 1e-3), Err(Error::VacuumSubtraction)));
        let two = FockState::<f64>::number_state(1, 6, &[2]).unwrap();
        assert!(subtract_via_tap(&two, 0.0).is_err());
        assert!(subtract_via_tap(&two, 1.0).is_err());
    }

    #[test]
    fn subtracted_squeezed_vacuum_is_squeezed_single_photon() {
        let fidelity = squeezed_single_photon_check(0.5f64, 40).unwrap();
        assert!(fidelity >= 1.0 - 1e-8, "fidelity {fidelity}");
        assert!(matches!(
            squeezed_single_photon_check(0.0f64, 40),
            Err(Error::VacuumSubtraction)
        ));

        // the heralded state carries odd photon numbers only
        let vac = FockState::<f64>::vacuum(1, 40).unwrap();
        let heralded = apply_annihilation(&apply_squeeze(&vac, 0, 0.5).unwrap(), 0)
            .unwrap()
            .normalize()
            .unwrap();
        for n in (0..=40).step_by(2) {
            assert!(heralded.amp(&[n]).norm() <= 1e-8, "even shell {n} populated");
        }
    }

    #[test]
    fn loss_and_subtraction_commute() {
        let vac = FockState::<f64>::vacuum(1, 40).unwrap();
        let sq = apply_squeeze(&vac, 0, 0.3).unwrap();
        assert!(loss_commutation_check(&sq, 0.2).unwrap() <= 1e-9);
        assert!(loss_commutation_check(&sq, 0.0).unwrap() <= 1e-14);
        let one = FockState::<f64>::number_state(1, 6, &[1]).unwrap();
        assert!(loss_commutation_check(&one, 0.5).unwrap() <= 1e-12);
        assert!(matches!(
            loss_commutation_check(&FockState::<f64>::vacuum(1, 6).unwrap(), 0.2),
            Err(Error::VacuumSubtraction)
        ));
    }

    #[test]
    fn pair_application_prefers_doubling_three_to_four() {
        let (p30, p21) = pair_apply_ratio_check(1.0f64, 1.0).unwrap();
        assert_abs_diff_eq!(p30 + p21, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p30 / p21, 0.75, max_relative = 1e-10);

        let (_, p21_solo) = pair_apply_ratio_check(1.0f64, 0.0).unwrap();
        assert_eq!(p21_solo, 0.0);

        // a 9:1 power split between the coefficients tilts the bias to 27:4
        let (p30_h, p21_h) = pair_apply_ratio_check(3.0f64, 1.0).unwrap();
        assert_relative_eq!(p30_h / p21_h, 27.0 / 4.0, max_relative = 1e-10);

        assert!(matches!(
            pair_apply_ratio_check(0.0f64, 0.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn dump_lists_only_significant_amplitudes() {
        let vac = FockState::<f64>::vacuum(1, 26).unwrap();
        let sq = apply_squeeze(&vac, 0, 0.4).unwrap();
        let dump = sq.dump_csv();
        let mut lines = dump.lines();
        assert_eq!(lines.next(), Some("n1,re,im"));
        for line in lines {
            let n: usize = line.split(',').next().unwrap().parse().unwrap();
            assert_eq!(n % 2, 0, "odd shell {n} in dump");
        }
        let two_mode = FockState::<f64>::number_state(2, 3, &[2, 1]).unwrap();
        assert!(two_mode.dump_csv().starts_with("n1,n2,re,im\n"));
        assert!(two_mode.dump_csv().contains("2,1,"));
    }
}
