//! Physical constants and unit conversions (Hartree atomic units internally).

/// Speed of light in atomic units (1/alpha).
pub const SPEED_OF_LIGHT_AU: f64 = 137.035999084;

/// Energy conversion, eV per hartree.
pub const EV_PER_HARTREE: f64 = 27.211386;

/// Time conversion, attoseconds per atomic time unit.
pub const AS_PER_AU: f64 = 24.188843266;

/// Length conversion, Bohr radii per nanometre.
pub const BOHR_PER_NM: f64 = 18.897261246;

/// Atomic unit of intensity in W/cm^2: the intensity whose field amplitude
/// is one atomic unit.
pub const INTENSITY_AU_W_CM2: f64 = 3.50945e16;

/// Carrier angular frequency (a.u.) of light with the given vacuum
/// wavelength in nanometres.
pub fn omega_from_wavelength_nm(wavelength_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_AU / (wavelength_nm * BOHR_PER_NM)
}

/// Peak electric field (a.u.) for the given intensity in W/cm^2.
pub fn field_from_intensity(intensity_w_cm2: f64) -> f64 {
    (intensity_w_cm2 / INTENSITY_AU_W_CM2).sqrt()
}

pub fn hartree_to_ev(e: f64) -> f64 {
    e * EV_PER_HARTREE
}

pub fn ev_to_hartree(e: f64) -> f64 {
    e / EV_PER_HARTREE
}
