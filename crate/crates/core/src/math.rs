//! Scalar functions routed through `libm` so results do not depend on
//! whether `std` is linked.

use crate::linalg::C64;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// Modulus of a complex number.
#[inline]
pub fn cabs(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// `e^{i phi}`.
#[inline]
pub fn cis(phi: f64) -> C64 {
    C64::new(libm::cos(phi), libm::sin(phi))
}

/// Representative of `x` modulo `period` in `[-period/2, period/2)`.
#[inline]
pub fn wrap_centered(x: f64, period: f64) -> f64 {
    let y = x - period * floor(x / period + 0.5);
    if y >= period / 2.0 {
        y - period
    } else {
        y
    }
}
