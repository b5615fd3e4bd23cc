//! Carrier-envelope-phase-resolved photoelectron interference for few-cycle
//! laser pulses.
//!
//! A few-cycle pulse ionizes an atom during sub-cycle windows near the field
//! extrema; the released electron wave packets interfere in the final energy
//! spectrum like light behind a temporal double slit. This crate computes the
//! resulting directional spectra with three models of increasing cost:
//!
//! * [`semiclassical`]: real release times from `p + A(t0) = 0`, coherent
//!   sum of action phases,
//! * [`saddle`]: complex release times (strong-field approximation), giving
//!   access to classically forbidden energies,
//! * [`tdse1d`]: split-operator solution of the one-dimensional
//!   time-dependent Schrödinger equation with a soft-core potential,
//!
//! and reduces them to the fringe observables (visibility, spacing, envelope
//! width, sub-slit separation) in [`analysis`].
//!
//! All internal quantities are in Hartree atomic units; file output uses eV
//! and attoseconds (see [`constants`]).

pub mod analysis;
pub mod cli;
pub mod config;
pub mod constants;
pub mod ionization;
pub mod output;
pub mod pulse;
mod quad;
pub mod run;
pub mod saddle;
pub mod semiclassical;
pub mod spectrum;
pub mod tdse1d;

pub use ionization::Atom;
pub use pulse::{Envelope, ExperimentalParams, Pulse};
pub use spectrum::DirectionalSpectrum;
