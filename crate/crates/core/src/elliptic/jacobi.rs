use serde::Serialize;

use super::{ellip_k, EllipticModulus};
use crate::error::{Error, Result};

/// Descend until the modulus is this small; the residual first-order
/// correction is then below `1e-16` and the second-order one negligible.
const BOTTOM_MODULUS: f64 = 1e-8;

/// `sn`, `cn` and `dn` at one argument.
///
/// `cn` is carried with full relative accuracy even when it is tiny, so
/// `1 - sn` should be taken from [`JacobiTriple::one_minus_sn`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

impl JacobiTriple {
    pub fn one_minus_sn(&self) -> f64 {
        if self.sn >= 0.0 {
            self.cn * self.cn / (1.0 + self.sn)
        } else {
            1.0 - self.sn
        }
    }

    pub fn one_plus_sn(&self) -> f64 {
        if self.sn <= 0.0 {
            self.cn * self.cn / (1.0 - self.sn)
        } else {
            1.0 + self.sn
        }
    }
}

/// Jacobi elliptic functions on the principal real branch `|u| ≤ K(k)`.
///
/// Descending Landen transformations `k ↦ (1-k')/(1+k')` reduce the modulus
/// to below `1e-8`, where `sn ≈ sin`; the ascent back uses
///
/// ```text
/// sn = (1+k₁)·sn₁ / (1 + k₁ sn₁²)
/// cn = cn₁·dn₁   / (1 + k₁ sn₁²)
/// dn = √(k'² + k² cn²)
/// ```
///
/// which has no cancellation, so `cn` keeps its relative accuracy for `k`
/// arbitrarily close to one.
pub fn jacobi_elliptic(u: f64, m: &EllipticModulus) -> Result<JacobiTriple> {
    if !u.is_finite() {
        return Err(Error::Domain(format!("sn argument {u} is not finite")));
    }
    let quarter_period = ellip_k(m);
    if u.abs() > quarter_period * (1.0 + 8.0 * f64::EPSILON) {
        return Err(Error::Domain(format!(
            "sn argument |u| = {} exceeds K(k) = {quarter_period}",
            u.abs()
        )));
    }

    // (k_{n+1}, parent k_n, parent k'_n)
    let mut levels: Vec<(f64, f64, f64)> = Vec::with_capacity(16);
    let (mut k, mut kc) = (m.k(), m.k_comp());
    let mut v = u.abs();
    while k > BOTTOM_MODULUS {
        let denom = 1.0 + kc;
        let k_next = k * k / (denom * denom);
        let kc_next = 2.0 * kc.sqrt() / denom;
        levels.push((k_next, k, kc));
        v /= 1.0 + k_next;
        k = k_next;
        kc = kc_next;
    }

    let m_bottom = k * k;
    let (s, c) = v.sin_cos();
    let lag = 0.25 * m_bottom * (v - s * c);
    let mut sn = s - lag * c;
    let mut cn = c + lag * s;
    let mut dn = 1.0 - 0.5 * m_bottom * s * s;

    for &(k_next, k_parent, kc_parent) in levels.iter().rev() {
        let denom = 1.0 + k_next * sn * sn;
        sn = (1.0 + k_next) * sn / denom;
        cn = cn * dn / denom;
        dn = (kc_parent * kc_parent + k_parent * k_parent * cn * cn).sqrt();
    }

    let sn = sn.min(1.0).copysign(u);
    Ok(JacobiTriple {
        sn,
        cn: cn.max(0.0),
        dn,
    })
}

/// Jacobi elliptic sine on `|u| ≤ K(k)`.
pub fn jacobi_sn(u: f64, m: &EllipticModulus) -> Result<f64> {
    jacobi_elliptic(u, m).map(|t| t.sn)
}
