//! Asymptotic modules for long frames and long slit quadrilaterals.

use serde::Serialize;

use crate::elliptic::{ellip_k, jacobi_elliptic, k_ratio, solve_k_ratio};
use crate::elliptic::{EllipticModulus, Tolerance};
use crate::error::{Error, Result};
use crate::estimate::{Method, ModuleEstimate};
use crate::frame_exact::FrameGeometry;

/// Leading-order asymptote `(1-σ)/(4σH)`.
pub fn module_leading(geom: &FrameGeometry) -> ModuleEstimate {
    let value = (1.0 - geom.sigma()) / (4.0 * geom.sigma() * geom.h());
    ModuleEstimate::analytic(value, Method::Leading).expect("leading term is positive")
}

/// Intermediates of [`module_large_h`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LargeHTrace {
    pub k: EllipticModulus,
    pub a: f64,
    /// `1 - a`, accurate when `a` is within rounding of one (may underflow
    /// to zero; the chain itself uses `√(1-a) = cn/√(1+a)`).
    pub one_minus_a: f64,
    pub nu: EllipticModulus,
    pub m_p: f64,
    pub module: f64,
}

/// `ν` from `(1-ν)/(1+ν) = √((1-a)/(1+ka)) · √((1-k)/2)`.
pub fn nu_of(a: f64, k: &EllipticModulus) -> Result<EllipticModulus> {
    if !(a > -1.0 && a <= 1.0) {
        return Err(Error::Domain(format!("a must lie in (-1, 1], got {a}")));
    }
    nu_of_sqrt_rho((((1.0 - a) / (1.0 + k.k() * a)).sqrt() * (0.5 * k.one_minus_k()).sqrt()).sqrt())
}

/// `√((1-k)/2) = k' / √(2(1+k))`, which stays representable after `1-k`
/// underflows.
fn sqrt_half_one_minus_k(k: &EllipticModulus) -> f64 {
    k.k_comp() / (2.0 * (1.0 + k.k())).sqrt()
}

/// `ν = (1-ρ)/(1+ρ)`, `ν' = 2√ρ/(1+ρ)`; `ρ` may underflow while `√ρ` does not.
fn nu_of_sqrt_rho(sqrt_rho: f64) -> Result<EllipticModulus> {
    let rho = sqrt_rho * sqrt_rho;
    if !(sqrt_rho > 0.0 && rho < 1.0) {
        return Err(Error::DegenerateGeometry(format!(
            "rho = {rho} gives nu on the boundary"
        )));
    }
    let nu = (1.0 - rho) / (1.0 + rho);
    let nu_comp = 2.0 * sqrt_rho / (1.0 + rho);
    EllipticModulus::from_pair(nu, nu_comp).map_err(|e| Error::DegenerateGeometry(e.to_string()))
}

/// Large-`H` estimator of the frame module:
///
/// ```text
/// 2K(k)/K(k') = ((1-σ)² + σ)/(1-σ) · H
/// a           = sn(((σ - (1-σ)²)/(σ + (1-σ)²)) · K(k), k)
/// m(P)        = 2K(ν)/K(ν')
/// module      = 1 / (4 m(P))
/// ```
///
/// with `ν` from [`nu_of`]. Asymptotically exact as `H → ∞`; no error bound
/// is attached for finite `H`.
pub fn module_large_h(
    geom: &FrameGeometry,
    tol: &Tolerance,
) -> Result<(ModuleEstimate, LargeHTrace)> {
    let s = geom.sigma();
    let gap = (1.0 - s) * (1.0 - s);
    let k = solve_k_ratio((gap + s) / (1.0 - s) * geom.h(), tol)?;
    // σ - (1-σ)² = -(σ² - 3σ + 1)
    let frac = -s.mul_add(s - 3.0, 1.0) / (s + gap);
    let sn = jacobi_elliptic(frac * ellip_k(&k), &k)?;
    let a = sn.sn;
    let one_minus_a = sn.one_minus_sn();
    // 1 + ka = (1 + a) - (1-k)·a
    let one_plus_ka = sn.one_plus_sn() - k.one_minus_k() * a;
    // √(1-a) = cn / √(1+a) for a ≥ 0
    let sqrt_one_minus_a = if a >= 0.0 {
        sn.cn / sn.one_plus_sn().sqrt()
    } else {
        one_minus_a.sqrt()
    };
    let sqrt_rho =
        (sqrt_one_minus_a / one_plus_ka.sqrt()).sqrt() * sqrt_half_one_minus_k(&k).sqrt();
    let nu = nu_of_sqrt_rho(sqrt_rho)?;
    let m_p = k_ratio(&nu);
    let module = 1.0 / (4.0 * m_p);
    let trace = LargeHTrace {
        k,
        a,
        one_minus_a,
        nu,
        m_p,
        module,
    };
    Ok((ModuleEstimate::analytic(module, Method::LargeH)?, trace))
}

/// Leading asymptote `(1-c)H` of the slit quadrilateral `Q_H`.
pub fn slit_quad_module_asymptotic(c: f64, h: f64) -> Result<ModuleEstimate> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("c must lie in (0, 1), got {c}")));
    }
    if !(h >= 1.0 && h.is_finite()) {
        return Err(Error::Domain(format!(
            "H must be a finite value ≥ 1, got {h}"
        )));
    }
    ModuleEstimate::analytic((1.0 - c) * h, Method::Leading)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame_exact::module_sigma_half;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn geom(s: f64, h: f64) -> FrameGeometry {
        FrameGeometry::new(s, h).unwrap()
    }

    // mpmath at 300 digits: ratio to the leading term at H = 8, 16, 32, 64
    const RATIOS: [(f64, [f64; 4]); 3] = [
        (0.25, [0.85802, 0.92358, 0.96027, 0.97973]),
        (0.5, [0.94772, 0.97316, 0.98640, 0.99315]),
        (0.75, [0.98190, 0.99089, 0.99542, 0.99771]),
    ];

    #[test]
    fn leading_examples() {
        assert_relative_eq!(
            module_leading(&geom(0.5, 7.0)).value(),
            1.0 / 28.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            module_leading(&geom(1.0 / 3.0, 10.0)).value(),
            0.05,
            max_relative = 1e-15
        );
        let a = module_leading(&geom(0.3, 5.0)).value();
        let b = module_leading(&geom(0.3, 10.0)).value();
        assert_eq!(a, 2.0 * b);
    }

    #[test]
    fn nu_examples() {
        let half = EllipticModulus::new(0.5).unwrap();
        assert_relative_eq!(
            nu_of(0.0, &half).unwrap().k(),
            1.0 / 3.0,
            max_relative = 1e-15
        );
        assert!(matches!(
            nu_of(1.0, &half),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(nu_of(-1.0, &half).is_err());
        let near_one = EllipticModulus::from_complement(1e-8).unwrap();
        assert!(nu_of(0.3, &near_one).unwrap().k_comp() < 1e-3);
    }

    #[test]
    fn golden_sigma_gives_zero_a() {
        // the double nearest (3-√5)/2 misses the root by ~3e-17, which the
        // sn argument scales by K(k) ≈ 15
        let s = (3.0 - 5f64.sqrt()) / 2.0;
        let (_, t) = module_large_h(&geom(s, 16.0), &tol()).unwrap();
        assert!(t.a.abs() < 1e-14, "a = {}", t.a);
    }

    #[test]
    fn unrepresentable_modulus_is_an_error() {
        // 2K/K' = 49·64 needs k' far below 1e-300
        assert!(module_large_h(&geom(0.98, 64.0), &tol()).is_err());
    }

    #[test]
    fn reference_ratios() {
        for (s, ratios) in RATIOS {
            for (i, h) in [8.0, 16.0, 32.0, 64.0].into_iter().enumerate() {
                let g = geom(s, h);
                let (est, _) = module_large_h(&g, &tol()).unwrap();
                assert_relative_eq!(
                    g.ratio_to_leading(est.value()),
                    ratios[i],
                    max_relative = 1e-4
                );
            }
        }
    }

    #[test]
    fn half_at_h32_tracks_exact_chain() {
        let (lh, _) = module_large_h(&geom(0.5, 32.0), &tol()).unwrap();
        let (ex, _) = module_sigma_half(32.0, &tol()).unwrap();
        assert!((lh.value() - ex.value()).abs() / ex.value() < 0.03);
        assert_relative_eq!(lh.value(), 0.007_706_233_163_811_63, max_relative = 1e-9);
    }

    #[test]
    fn gap_to_exact_shrinks() {
        let mut prev = f64::INFINITY;
        for n in 3..=6 {
            let h = f64::from(1 << n);
            let (lh, _) = module_large_h(&geom(0.5, h), &tol()).unwrap();
            let (ex, _) = module_sigma_half(h, &tol()).unwrap();
            let gap = (lh.value() - ex.value()).abs() / ex.value();
            assert!(gap < prev);
            prev = gap;
        }
    }

    #[test]
    fn trace_is_consistent() {
        let (est, t) = module_large_h(&geom(0.75, 64.0), &tol()).unwrap();
        assert_eq!(t.module, 1.0 / (4.0 * t.m_p));
        assert_eq!(est.value(), t.module);
        assert!(t.one_minus_a > 0.0 && t.one_minus_a < 1e-20);
    }

    #[test]
    fn slit_examples() {
        assert_eq!(slit_quad_module_asymptotic(0.5, 16.0).unwrap().value(), 8.0);
        assert_relative_eq!(
            slit_quad_module_asymptotic(1e-12, 3.0).unwrap().value(),
            3.0,
            max_relative = 1e-11
        );
        assert!(slit_quad_module_asymptotic(0.0, 3.0).is_err());
        assert!(slit_quad_module_asymptotic(0.5, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn sign_of_a_follows_sigma(s in 0.02f64..0.98, e in 0.0f64..6.0) {
            let h = 2f64.powf(e);
            prop_assume!(((1.0 - s) * (1.0 - s) + s) / (1.0 - s) * h < 800.0);
            let (_, t) = module_large_h(&geom(s, h), &tol()).unwrap();
            // a may round to ±1 in the trace; the chain works from cn instead
            prop_assert!(t.a.abs() <= 1.0 && t.one_minus_a >= 0.0);
            prop_assert!(t.module > 0.0 && t.module.is_finite());
            let d = s - (1.0 - s) * (1.0 - s);
            if d.abs() > 1e-12 {
                prop_assert_eq!(t.a > 0.0, d > 0.0);
            }
        }
    }
}
