//! Exact modules: the elliptic chain for `σ = 1/2` and the Bowman closed
//! form for the unstretched frame `H = 1`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::Serialize;

use crate::elliptic::{ellip_k, ellip_k_comp, k_ratio, mu, mu_inv, solve_k_ratio};
use crate::elliptic::{EllipticModulus, Tolerance};
use crate::error::{Error, Result};
use crate::estimate::{Method, ModuleEstimate};

/// The frame `f_H([-1,1]² \ [-σ,σ]²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameGeometry {
    sigma: f64,
    #[serde(rename = "H")]
    h: f64,
}

impl FrameGeometry {
    pub fn new(sigma: f64, h: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::Domain(format!(
                "sigma must lie in (0, 1), got {sigma}"
            )));
        }
        if !(h >= 1.0 && h.is_finite()) {
            return Err(Error::Domain(format!(
                "H must be a finite value ≥ 1, got {h}"
            )));
        }
        Ok(Self { sigma, h })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `value · 4σH / (1-σ)`, the ratio of a module to the leading term.
    pub fn ratio_to_leading(&self, value: f64) -> f64 {
        value * 4.0 * self.sigma * self.h / (1.0 - self.sigma)
    }
}

/// Every intermediate of [`module_sigma_half`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfChainTrace {
    pub k: EllipticModulus,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `π - β = 2κ/3`, kept separately since `β` rounds to `π` for large `H`.
    pub pi_minus_beta: f64,
    pub l: EllipticModulus,
    pub module: f64,
}

/// `κ = arcsin((1-k)/(1+k))`.
pub fn kappa_of_k(k: &EllipticModulus) -> f64 {
    // (1-k)/(1+k) = k'²/(1+k)²
    let q = k.k_comp() / (1.0 + k.k());
    (q * q).asin()
}

/// `α = (π - 2κ)/3` and `β = π - 2κ/3`.
pub fn angles_of_kappa(kappa: f64) -> Result<(f64, f64)> {
    if !(0.0..=FRAC_PI_2).contains(&kappa) {
        return Err(Error::Domain(format!(
            "kappa must lie in [0, π/2], got {kappa}"
        )));
    }
    Ok(((PI - 2.0 * kappa) / 3.0, PI - 2.0 * kappa / 3.0))
}

/// Modulus `l` from the angles:
///
/// ```text
/// l = (√(1-cos(α+β)) - √(2 sin α sin β)) / (√(1-cos(α+β)) + √(2 sin α sin β))
/// ```
pub fn l_of_angles(alpha: f64, beta: f64) -> Result<EllipticModulus> {
    if !(alpha > 0.0 && beta < PI && alpha + beta < 2.0 * PI) {
        return Err(Error::Domain(format!(
            "angles must satisfy 0 < α < β < π, got α = {alpha}, β = {beta}"
        )));
    }
    if alpha > beta {
        return Err(Error::Domain(format!("α = {alpha} exceeds β = {beta}")));
    }
    if alpha == beta {
        return Err(Error::DegenerateGeometry(format!(
            "α = β = {alpha} gives l = 0"
        )));
    }
    // 1 - cos(α+β) = 2 sin²((α+β)/2)
    let a = SQRT_2 * (0.5 * (alpha + beta)).sin();
    let b = (2.0 * alpha.sin() * beta.sin()).sqrt();
    l_of_parts(a, b)
}

fn l_of_parts(a: f64, b: f64) -> Result<EllipticModulus> {
    let l = (a - b) / (a + b);
    let l_comp = 2.0 * (a * b).sqrt() / (a + b);
    if l <= 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "l = {l}: the angles coincide"
        )));
    }
    EllipticModulus::from_pair(l, l_comp).map_err(|e| Error::DegenerateGeometry(e.to_string()))
}

/// `l` straight from `κ`, using `sin β = sin(2κ/3)` so nothing is lost when
/// `β` is within rounding of `π`.
fn l_of_kappa(kappa: f64) -> Result<EllipticModulus> {
    let third = 2.0 * kappa / 3.0;
    let a = SQRT_2 * (2.0 * PI / 3.0 - third).sin();
    let b = (2.0 * ((PI - 2.0 * kappa) / 3.0).sin() * third.sin()).sqrt();
    l_of_parts(a, b)
}

/// Module of `D_H^{1/2}`:
/// `k` from `2K(k)/K(k') = H`, then `κ`, `(α, β)`, `l` and finally
/// `m = K(l') / (16 K(l))`.
pub fn module_sigma_half(h: f64, tol: &Tolerance) -> Result<(ModuleEstimate, HalfChainTrace)> {
    if !(h >= 1.0 && h.is_finite()) {
        return Err(Error::Domain(format!(
            "H must be a finite value ≥ 1, got {h}"
        )));
    }
    let k = solve_k_ratio(h, tol)?;
    let kappa = kappa_of_k(&k);
    let (alpha, beta) = angles_of_kappa(kappa)?;
    let l = l_of_kappa(kappa)?;
    let module = ellip_k_comp(&l) / (16.0 * ellip_k(&l));
    let trace = HalfChainTrace {
        k,
        kappa,
        alpha,
        beta,
        pi_minus_beta: 2.0 * kappa / 3.0,
        l,
        module,
    };
    let estimate = ModuleEstimate::analytic(module, Method::ExactSigmaHalf)?;
    Ok((estimate, trace))
}

/// The same module assembled from the extremal length of the quarter
/// domain, `1 / (4·2·(2K(l)/K(l')))`.
pub fn module_from_quarter_length(l: &EllipticModulus) -> f64 {
    1.0 / (4.0 * (2.0 * k_ratio(l)))
}

/// Which constant to use inside `μ⁻¹` in the Bowman formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BowmanVariant {
    /// `l = μ⁻¹((2/π)(1-σ)/(1+σ))`.
    AsPrinted,
    /// `l = μ⁻¹((π/2)(1-σ)/(1+σ))`.
    Reciprocal,
}

impl BowmanVariant {
    pub const ALL: [BowmanVariant; 2] = [BowmanVariant::AsPrinted, BowmanVariant::Reciprocal];

    /// The variant whose values agree with the `σ = 1/2` chain and the
    /// capacity oracle.
    pub const ARBITRATED: BowmanVariant = BowmanVariant::Reciprocal;

    pub fn name(self) -> &'static str {
        match self {
            BowmanVariant::AsPrinted => "AS_PRINTED",
            BowmanVariant::Reciprocal => "RECIPROCAL",
        }
    }
}

/// Module of the square frame `D_1^σ`: `μ(((l-l')/(l+l'))²) / (4π)`.
///
/// The Grötzsch value is a logarithmic modulus of the doubled domain, hence
/// the `1/(4π)` for the `(1/2π) ln(r₂/r₁)` normalization.
pub fn bowman_module(sigma: f64, variant: BowmanVariant) -> Result<ModuleEstimate> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!(
            "sigma must lie in (0, 1), got {sigma}"
        )));
    }
    let shape = (1.0 - sigma) / (1.0 + sigma);
    let arg = match variant {
        BowmanVariant::AsPrinted => shape * 2.0 / PI,
        BowmanVariant::Reciprocal => shape * FRAC_PI_2,
    };
    let l = mu_inv(arg, &Tolerance::default())?;
    let (lk, lc) = (l.k(), l.k_comp());
    let sum = lk + lc;
    let r = ((lk - lc) / sum).powi(2);
    let r_comp = (8.0 * lk * lc).sqrt() / (sum * sum);
    let r = EllipticModulus::from_pair(r, r_comp)
        .map_err(|e| Error::DegenerateGeometry(e.to_string()))?;
    ModuleEstimate::analytic(mu(&r) / (4.0 * PI), Method::Bowman)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // mpmath at 150 digits: (H, m)
    const REFERENCE: [(f64, f64); 7] = [
        (1.0, 0.097_712_620_168_506_969_184),
        (2.0, 0.079_681_633_947_329_960_515),
        (4.0, 0.049_477_862_497_863_586_139),
        (8.0, 0.027_627_043_725_066_830_922),
        (16.0, 0.014_663_532_812_803_994_806),
        (32.0, 0.007_564_503_094_827_090_311_5),
        (64.0, 0.003_843_250_863_896_712_922_4),
    ];
    // l' for each H above (H = 1 onwards, skipping H = 1)
    const L_COMP: [(f64, f64); 6] = [
        (2.0, 0.864_309_393_573_083_306_35),
        (4.0, 0.510_979_601_410_727_548_23),
        (8.0, 0.114_114_440_780_320_884_67),
        (16.0, 0.004_947_481_232_755_410_533_7),
        (32.0, 9.239_194_406_907_557_768_4e-6),
        (64.0, 3.222_023_399_314_557_681e-11),
    ];

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn kappa_examples() {
        let third = EllipticModulus::new(1.0 / 3.0).unwrap();
        assert_relative_eq!(kappa_of_k(&third), PI / 6.0, max_relative = 1e-15);
        let near_one = EllipticModulus::from_complement(1e-20).unwrap();
        assert!(kappa_of_k(&near_one) < 1e-40);
        let near_zero = EllipticModulus::new(1e-12).unwrap();
        assert_relative_eq!(kappa_of_k(&near_zero), FRAC_PI_2, max_relative = 1e-5);
    }

    #[test]
    fn angle_examples() {
        let (a, b) = angles_of_kappa(0.0).unwrap();
        assert_eq!((a, b), (PI / 3.0, PI));
        let (a, b) = angles_of_kappa(FRAC_PI_2).unwrap();
        assert_eq!(a, 0.0);
        assert_relative_eq!(b, 2.0 * PI / 3.0, max_relative = 1e-15);
        let (a, b) = angles_of_kappa(PI / 4.0).unwrap();
        assert_relative_eq!(a, PI / 6.0, max_relative = 1e-15);
        assert_relative_eq!(b, 5.0 * PI / 6.0, max_relative = 1e-15);
        assert!(angles_of_kappa(2.0).is_err());
    }

    #[test]
    fn l_examples() {
        let l = l_of_angles(PI / 6.0, 5.0 * PI / 6.0).unwrap();
        assert_relative_eq!(l.k(), 1.0 / 3.0, max_relative = 1e-15);
        assert!(matches!(
            l_of_angles(0.7, 0.7),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(matches!(l_of_angles(1.0, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn chain_at_h4_matches_extended_precision() {
        let (_, t) = module_sigma_half(4.0, &tol()).unwrap();
        assert_relative_eq!(t.k.k(), 0.985_171_431_009_416_038_69, max_relative = 1e-13);
        assert_relative_eq!(
            t.kappa,
            0.007_469_736_194_076_241_987_5,
            max_relative = 1e-11
        );
        assert_relative_eq!(t.alpha, 1.042_217_727_067_213_584_8, max_relative = 1e-14);
        assert_relative_eq!(t.beta, 3.136_612_829_460_409_077_1, max_relative = 1e-14);
        assert_relative_eq!(t.l.k(), 0.859_592_837_884_386_983_1, max_relative = 1e-12);
    }

    #[test]
    fn reference_modules() {
        for (h, m) in REFERENCE {
            let (est, _) = module_sigma_half(h, &tol()).unwrap();
            assert_relative_eq!(est.value(), m, max_relative = 1e-11);
            assert_eq!(est.method(), Method::ExactSigmaHalf);
        }
        for (h, lc) in L_COMP {
            let (_, t) = module_sigma_half(h, &tol()).unwrap();
            assert_relative_eq!(t.l.k_comp(), lc, max_relative = 1e-9);
        }
    }

    #[test]
    fn h1_chain_is_exact() {
        let (_, t) = module_sigma_half(1.0, &tol()).unwrap();
        assert_relative_eq!(t.k.k(), 3.0 - 2.0 * SQRT_2, max_relative = 1e-12);
        assert_relative_eq!(t.kappa, PI / 4.0, max_relative = 1e-12);
        assert_relative_eq!(t.l.k(), 1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn factor_wiring_identity() {
        for (h, _) in REFERENCE {
            let (est, t) = module_sigma_half(h, &tol()).unwrap();
            assert_relative_eq!(
                est.value(),
                module_from_quarter_length(&t.l),
                max_relative = 4.0 * f64::EPSILON
            );
        }
    }

    #[test]
    fn quarter_over_h_limit_at_h64() {
        let (est, _) = module_sigma_half(64.0, &tol()).unwrap();
        let r = 4.0 * 64.0 * est.value();
        assert!((0.95..=1.05).contains(&r), "4Hm = {r}");
    }

    #[test]
    fn rejects_short_frames() {
        assert!(module_sigma_half(0.5, &tol()).is_err());
        assert!(FrameGeometry::new(0.5, 0.9).is_err());
        assert!(FrameGeometry::new(1.0, 2.0).is_err());
        assert!(FrameGeometry::new(0.0, 2.0).is_err());
    }

    #[test]
    fn bowman_arbitration_at_half() {
        let (exact, _) = module_sigma_half(1.0, &tol()).unwrap();
        let rec = bowman_module(0.5, BowmanVariant::Reciprocal).unwrap();
        let printed = bowman_module(0.5, BowmanVariant::AsPrinted).unwrap();
        assert!((rec.value() - exact.value()).abs() < 1e-9);
        assert!((printed.value() - exact.value()).abs() > 1e-2);
    }

    #[test]
    fn bowman_reference_values() {
        assert_relative_eq!(
            bowman_module(0.25, BowmanVariant::Reciprocal)
                .unwrap()
                .value(),
            0.206_423_079_17,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            bowman_module(0.75, BowmanVariant::Reciprocal)
                .unwrap()
                .value(),
            0.038_117_142_46,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            bowman_module(0.5, BowmanVariant::AsPrinted)
                .unwrap()
                .value()
                * 4.0
                * PI,
            0.451_317_813_235_136,
            max_relative = 1e-12
        );
    }

    #[test]
    fn bowman_decreases_towards_thin_frames() {
        for v in BowmanVariant::ALL {
            let mut prev = f64::INFINITY;
            for s in [0.1, 0.5, 0.8, 0.95] {
                let m = bowman_module(s, v).unwrap().value();
                assert!(m < prev);
                prev = m;
            }
        }
        assert!(
            bowman_module(0.99, BowmanVariant::Reciprocal)
                .unwrap()
                .value()
                < 5e-3
        );
    }

    #[test]
    fn bowman_out_of_range_is_an_error() {
        // the modulus l' would be below 1e-300
        assert!(bowman_module(1.0 - 1e-6, BowmanVariant::Reciprocal).is_err());
        assert!(bowman_module(1.0, BowmanVariant::Reciprocal).is_err());
    }

    proptest! {
        #[test]
        fn trace_satisfies_angle_identities(e in 0.0f64..6.0) {
            let h = 2f64.powf(e);
            let (_, t) = module_sigma_half(h, &tol()).unwrap();
            let (a, b) = angles_of_kappa(t.kappa).unwrap();
            prop_assert_eq!(a, t.alpha);
            prop_assert_eq!(b, t.beta);
            prop_assert!(t.kappa > 0.0 && t.kappa < FRAC_PI_2);
            prop_assert!(0.0 < t.alpha && t.alpha < t.beta && t.beta <= PI);
            prop_assert!(t.l.k() > 0.0 && t.l.k() <= 1.0 && t.l.k_comp() > 0.0);
        }

        #[test]
        fn decreasing_in_h(e in 0.0f64..6.0, step in 0.01f64..1.0) {
            let h = 2f64.powf(e);
            let (m1, _) = module_sigma_half(h, &tol()).unwrap();
            let (m2, _) = module_sigma_half(h * (1.0 + step), &tol()).unwrap();
            prop_assert!(m2.value() < m1.value());
        }
    }
}
