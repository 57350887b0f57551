//! Spectral and mode-matching toolkit for photon subtraction from
//! continuous-wave squeezed light.
//!
//! A continuously pumped parametric oscillator emits squeezing spread over a
//! Lorentzian band of sidebands. Subtracting one photon from that beam heralds
//! a wavepacket whose squeezing is impure: the heralded mode and the squeezed
//! mode do not coincide. This crate models the chain quantitatively:
//!
//! - [`signal`]: mode functions as closed-form or sampled [`signal::Signal`]s,
//!   with exact exponential-family algebra and a unitary FFT twin,
//! - [`opo`]: squeezing spectra, the frequency-dependent squeezing parameter,
//!   and two-photon correlation functions of the source,
//! - [`wavepacket`]: wavepacket quadrature variances, equivalent-loss and
//!   mode-matching figures of merit, and the pair-operator mode ladder,
//! - [`filter`]: heralding through a narrowband filter cavity, its closed-form
//!   filtered modes, and the purification trade-off curve,
//! - [`fock`]: a small truncated Fock simulator used as an independent check
//!   of the beamsplitter-model identities.
//!
//! Everything numeric is generic over the floating-point [`scalar::Scalar`];
//! the `*64` aliases below fix the common double-precision choices.

pub mod error;
pub mod fock;
pub mod grid;
pub mod filter;
pub mod opo;
pub mod wavepacket;
pub mod scalar;
pub mod signal;

pub use error::{Error, Result};
pub use fock::{FockState, HeraldResult};
pub use grid::{Grid, DEFAULT_GRID_POINTS};
pub use filter::{FilterParams, ModeMatchReport};
pub use opo::{OpoParams, SqueezingSpectrumPoint};
pub use scalar::Scalar;
pub use signal::{ClosedForm, Domain, Form, Signal};
pub use wavepacket::{ModeLadder, WavepacketVariances};

/// Double-precision aliases for the main value types.
pub type Grid64 = grid::Grid<f64>;
pub type Signal64 = signal::Signal<f64>;
pub type OpoParams64 = opo::OpoParams<f64>;
pub type FockState64 = fock::FockState<f64>;

/// Single-precision aliases, for quick scans where 1e-6 accuracy suffices.
pub type Grid32 = grid::Grid<f32>;
pub type Signal32 = signal::Signal<f32>;
pub type OpoParams32 = opo::OpoParams<f32>;
