//! The signed power `z^<β> = |z|^(β-1) · conj(z)`.
//!
//! Every stable-case formula is written in terms of this map. At `β = 1` it is
//! plain conjugation, which is why the `α = 2` equations come out linear.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Checks that `z` has finite components.
pub fn check_finite(z: Complex64) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::domain(format!("non-finite complex value {z}")))
    }
}

/// `|z|^(β-1) · conj(z)`.
///
/// At `z = 0` the result is zero for `β ≥ 1` (the limit value) and an error
/// for `β < 1`, where the map is unbounded near the origin.
pub fn signed_pow(z: Complex64, beta: f64) -> Result<Complex64> {
    check_finite(z)?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("signed power needs beta > 0, got {beta}")));
    }
    let r = z.norm();
    if r == 0.0 {
        return if beta >= 1.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(Error::domain(format!(
                "signed power of zero is unbounded for beta = {beta} < 1"
            )))
        };
    }
    Ok(z.conj() * r.powf(beta - 1.0))
}

/// Inverse of [`signed_pow`]: returns `z` with `signed_pow(z, β) = v`, namely
/// `|v|^((1-β)/β) · conj(v)`.
pub fn signed_root(v: Complex64, beta: f64) -> Result<Complex64> {
    check_finite(v)?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("signed root needs beta > 0, got {beta}")));
    }
    let r = v.norm();
    if r == 0.0 {
        return if beta <= 1.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(Error::domain(format!(
                "signed root of zero is unbounded for beta = {beta} > 1"
            )))
        };
    }
    Ok(v.conj() * r.powf((1.0 - beta) / beta))
}

/// Unchecked `|z|^(β-1) · conj(z)` for hot loops; zero maps to zero.
#[inline]
pub(crate) fn signed_pow_unchecked(z: Complex64, beta: f64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z.conj() * r.powf(beta - 1.0)
    }
}
