//! Unit conversions. Everything inside the crate works in THz and ps.

/// Speed of light in nm·THz.
pub const SPEED_OF_LIGHT_NM_THZ: f64 = 299_792.458;

pub fn wavelength_nm_to_thz(lambda_nm: f64) -> f64 {
    SPEED_OF_LIGHT_NM_THZ / lambda_nm
}

pub fn thz_to_wavelength_nm(nu_thz: f64) -> f64 {
    SPEED_OF_LIGHT_NM_THZ / nu_thz
}

/// Frequency width of a wavelength band `width_nm` centred at `center_nm`.
///
/// Uses the exact band edges rather than the linearized `c·Δλ/λ²`.
pub fn bandwidth_nm_to_thz(center_nm: f64, width_nm: f64) -> f64 {
    let lo = center_nm - 0.5 * width_nm;
    let hi = center_nm + 0.5 * width_nm;
    wavelength_nm_to_thz(lo) - wavelength_nm_to_thz(hi)
}

/// Standard deviation of a Gaussian intensity profile with the given FWHM.
pub fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}
