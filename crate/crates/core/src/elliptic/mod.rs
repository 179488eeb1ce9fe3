//! Complete elliptic integrals of the first kind, the Grötzsch ring modulus,
//! Jacobi elliptic functions and the associated inverse problems.
//!
//! A modulus is always carried together with its complement `k' = √(1-k²)`.
//! Every formula in this crate that needs `1 - k` for `k` close to one reads
//! it from the complement (`1 - k = k'² / (1 + k)`), so chains that drive `k`
//! to within `1e-60` of one stay accurate in double precision.

mod jacobi;
mod quadrature;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::increasing_root;

pub use jacobi::{jacobi_elliptic, jacobi_sn, JacobiTriple};
pub use quadrature::{incomplete_f, integrate_adaptive};

/// Smallest admissible value of `k` and of `k'`.
pub const MODULUS_FLOOR: f64 = 1e-300;

/// Bracket for the solvers' parameter `x = ln(k/k')`; `e^{-690}` is just
/// above [`MODULUS_FLOOR`].
const LOGIT_LIMIT: f64 = 690.0;

/// Stopping rule and iteration budget for iterative routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol >= 0.0 && rel_tol >= 0.0) || !abs_tol.is_finite() || !rel_tol.is_finite() {
            return Err(Error::InvalidTolerance(format!(
                "tolerances must be finite and non-negative (abs {abs_tol}, rel {rel_tol})"
            )));
        }
        if abs_tol == 0.0 && rel_tol == 0.0 {
            return Err(Error::InvalidTolerance(
                "at least one of abs_tol, rel_tol must be positive".into(),
            ));
        }
        if max_iter == 0 {
            return Err(Error::InvalidTolerance("max_iter must be positive".into()));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_iter,
        })
    }

    /// Relative tolerance `rel_tol`, no absolute floor.
    pub fn relative(rel_tol: f64) -> Result<Self> {
        Self::new(0.0, rel_tol, Self::default().max_iter)
    }

    /// Largest admissible error for a quantity of size `scale`.
    pub fn bound(&self, scale: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * scale.abs())
    }

    pub fn with_max_iter(self, max_iter: usize) -> Result<Self> {
        Self::new(self.abs_tol, self.rel_tol, max_iter)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-14,
            max_iter: 200,
        }
    }
}

/// An elliptic modulus `k ∈ (0, 1)` together with its complement.
///
/// The smaller of the two is stored as given and the larger one is derived
/// from it, which keeps `k² + k'² = 1` to a few ulps on the whole range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticModulus {
    k: f64,
    k_comp: f64,
}

impl EllipticModulus {
    /// `k = k' = 1/√2`.
    pub const SELF_COMPLEMENTARY: EllipticModulus = EllipticModulus {
        k: FRAC_1_SQRT_2,
        k_comp: FRAC_1_SQRT_2,
    };

    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::InvalidModulus(format!("k = {k} is not in (0, 1)")));
        }
        Self::from_pair(k, complement_of(k))
    }

    pub fn from_complement(k_comp: f64) -> Result<Self> {
        if !(k_comp > 0.0 && k_comp < 1.0) {
            return Err(Error::InvalidModulus(format!(
                "k' = {k_comp} is not in (0, 1)"
            )));
        }
        Self::from_pair(complement_of(k_comp), k_comp)
    }

    /// Builds a modulus from a consistent pair `(k, k')`.
    ///
    /// The smaller member is trusted and the larger one recomputed from it;
    /// the pair must satisfy `k² + k'² = 1` to `1e-6`.
    pub fn from_pair(k: f64, k_comp: f64) -> Result<Self> {
        if !(k.is_finite() && k_comp.is_finite()) {
            return Err(Error::InvalidModulus(format!(
                "non-finite pair ({k}, {k_comp})"
            )));
        }
        if k <= MODULUS_FLOOR || k_comp <= MODULUS_FLOOR {
            return Err(Error::InvalidModulus(format!(
                "pair (k = {k:e}, k' = {k_comp:e}) touches the boundary of (0, 1)"
            )));
        }
        if ((k * k + k_comp * k_comp) - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidModulus(format!(
                "inconsistent pair: k² + k'² = {}",
                k * k + k_comp * k_comp
            )));
        }
        Ok(if k <= k_comp {
            Self {
                k,
                k_comp: complement_of(k),
            }
        } else {
            Self {
                k: complement_of(k_comp),
                k_comp,
            }
        })
    }

    /// Modulus with `ln(k/k') = x`.
    pub fn from_logit(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidModulus(format!("logit {x} is not finite")));
        }
        let e = (-2.0 * x.abs()).exp();
        let large = 1.0 / (1.0 + e).sqrt();
        let small = (-x.abs()).exp() * large;
        if x >= 0.0 {
            Self::from_pair(large, small)
        } else {
            Self::from_pair(small, large)
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn k_comp(&self) -> f64 {
        self.k_comp
    }

    /// The modulus `k'`.
    pub fn complementary(&self) -> Self {
        Self {
            k: self.k_comp,
            k_comp: self.k,
        }
    }

    /// `1 - k`, accurate even when it is far below machine epsilon.
    pub fn one_minus_k(&self) -> f64 {
        self.k_comp * self.k_comp / (1.0 + self.k)
    }

    /// `ln(k/k')`, the solvers' parameterization.
    pub fn logit(&self) -> f64 {
        self.k.ln() - self.k_comp.ln()
    }
}

fn complement_of(s: f64) -> f64 {
    ((1.0 - s) * (1.0 + s)).sqrt()
}

/// Arithmetic–geometric mean of `a ≥ b ≥ 0`.
///
/// Stops once `|a_n - b_n| ≤ max(abs_tol·max(1, a_n), rel_tol·a_n)`.
pub fn agm(a: f64, b: f64, tol: &Tolerance) -> Result<f64> {
    if !(a > 0.0 && a.is_finite() && b >= 0.0 && b <= a) {
        return Err(Error::Domain(format!(
            "agm requires a ≥ b ≥ 0 and a > 0, got ({a}, {b})"
        )));
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    let (mut a, mut b) = (a, b);
    for _ in 0..tol.max_iter {
        if (a - b).abs() <= (tol.abs_tol * a.max(1.0)).max(tol.rel_tol * a) {
            return Ok(0.5 * (a + b));
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    Err(Error::IterationLimit {
        what: "agm",
        max_iter: tol.max_iter,
    })
}

/// AGM to full double precision. Converges in at most ~15 steps for any
/// `b ≥ MODULUS_FLOOR`.
fn agm_unit(b: f64) -> f64 {
    let (mut a, mut b) = (1.0_f64, b);
    for _ in 0..64 {
        if (a - b).abs() <= 2.0 * f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind `K(k) = π / (2·agm(1, k'))`.
pub fn ellip_k(m: &EllipticModulus) -> f64 {
    FRAC_PI_2 / agm_unit(m.k_comp)
}

/// `K(k')`.
pub fn ellip_k_comp(m: &EllipticModulus) -> f64 {
    FRAC_PI_2 / agm_unit(m.k)
}

/// Modulus of the Grötzsch ring, `μ(r) = (π/2)·K(r')/K(r)`.
pub fn mu(r: &EllipticModulus) -> f64 {
    FRAC_PI_2 * ellip_k_comp(r) / ellip_k(r)
}

/// `2K(k)/K(k')`: the module of the upper half-plane with vertices
/// `-1/k, -1, 1, 1/k`.
pub fn k_ratio(m: &EllipticModulus) -> f64 {
    2.0 * ellip_k(m) / ellip_k_comp(m)
}

/// Inverse of [`mu`]: the `r` with `μ(r) = y`.
pub fn mu_inv(y: f64, tol: &Tolerance) -> Result<EllipticModulus> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Domain(format!("mu_inv requires y > 0, got {y}")));
    }
    let ln_y = y.ln();
    // μ decreases in x, so ln y - ln μ increases
    let objective = |x: f64| match EllipticModulus::from_logit(x) {
        Ok(r) => ln_y - mu(&r).ln(),
        Err(_) => f64::NAN,
    };
    let f_tol = tol.rel_tol.max(tol.abs_tol / y);
    let x = increasing_root(
        objective,
        -LOGIT_LIMIT,
        LOGIT_LIMIT,
        f_tol,
        tol.max_iter,
        "mu_inv",
    )?;
    EllipticModulus::from_logit(x)
}

/// Solves `2K(k)/K(k') = t` for `k`.
pub fn solve_k_ratio(t: f64, tol: &Tolerance) -> Result<EllipticModulus> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "solve_k_ratio requires t > 0, got {t}"
        )));
    }
    let ln_t = t.ln();
    let objective = |x: f64| match EllipticModulus::from_logit(x) {
        Ok(k) => k_ratio(&k).ln() - ln_t,
        Err(_) => f64::NAN,
    };
    let f_tol = tol.rel_tol.max(tol.abs_tol / t);
    let x = increasing_root(
        objective,
        -LOGIT_LIMIT,
        LOGIT_LIMIT,
        f_tol,
        tol.max_iter,
        "solve_k_ratio",
    )?;
    EllipticModulus::from_logit(x)
}

/// `μ(r)·μ(r') = π²/4` for every `r`; exported for validation reports.
pub const MU_PRODUCT: f64 = PI * PI / 4.0;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // mpmath, 150 digits
    const AGM_1_INV_SQRT2: f64 = 0.847_213_084_793_979_086_606_499_123_482_191_6;
    const K_0_9: f64 = 2.280_549_138_422_770_204_613_751_944_555_530_4;
    const MU_0_1: f64 = 3.686_369_237_552_851_940_419_569_761_632_187_2;
    const MU_INV_0_2_COMP: f64 = 1.754_553_352_718_004_870_208_061_973_085_063e-5;

    #[test]
    fn agm_fixed_points() {
        let tol = Tolerance::default();
        assert_eq!(agm(1.0, 1.0, &tol).unwrap(), 1.0);
        assert_eq!(agm(1.0, 0.0, &tol).unwrap(), 0.0);
        assert_relative_eq!(
            agm(1.0, FRAC_1_SQRT_2, &tol).unwrap(),
            AGM_1_INV_SQRT2,
            max_relative = 1e-15
        );
    }

    #[test]
    fn agm_rejects_bad_order() {
        assert!(matches!(
            agm(0.5, 1.0, &Tolerance::default()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            agm(0.0, 0.0, &Tolerance::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn agm_iteration_limit() {
        let tol = Tolerance::new(0.0, 1e-15, 2).unwrap();
        assert_eq!(
            agm(1.0, 1e-10, &tol),
            Err(Error::IterationLimit {
                what: "agm",
                max_iter: 2
            })
        );
    }

    #[test]
    fn tolerance_requires_positive_component() {
        assert!(Tolerance::new(0.0, 0.0, 10).is_err());
        assert!(Tolerance::new(-1.0, 1e-3, 10).is_err());
        assert!(Tolerance::new(1e-3, 0.0, 0).is_err());
        assert!(Tolerance::new(1e-3, 0.0, 1).is_ok());
    }

    #[test]
    fn modulus_constructor_guards() {
        assert!(EllipticModulus::new(0.0).is_err());
        assert!(EllipticModulus::new(1.0).is_err());
        assert!(EllipticModulus::new(-0.2).is_err());
        assert!(EllipticModulus::new(f64::NAN).is_err());
        assert!(EllipticModulus::new(1e-301).is_err());
        assert!(EllipticModulus::from_complement(1e-301).is_err());
        assert!(EllipticModulus::from_logit(700.0).is_err());
        assert!(EllipticModulus::from_pair(0.5, 0.5).is_err());
        assert!(EllipticModulus::from_complement(1e-200).is_ok());
    }

    #[test]
    fn k_small_limit() {
        let m = EllipticModulus::new(1e-9).unwrap();
        assert_relative_eq!(ellip_k(&m), FRAC_PI_2, max_relative = 1e-15);
        assert!(ellip_k(&EllipticModulus::new(1e-3).unwrap()) > FRAC_PI_2);
    }

    #[test]
    fn k_self_complementary() {
        let m = EllipticModulus::SELF_COMPLEMENTARY;
        assert_eq!(ellip_k(&m), ellip_k_comp(&m));
        assert_relative_eq!(mu(&m), FRAC_PI_2, max_relative = 1e-15);
    }

    #[test]
    fn k_reference_value() {
        let m = EllipticModulus::new(0.9).unwrap();
        assert_relative_eq!(ellip_k(&m), K_0_9, max_relative = 1e-14);
    }

    #[test]
    fn k_comp_limits() {
        let near_one = EllipticModulus::from_complement(1e-12).unwrap();
        assert_relative_eq!(ellip_k_comp(&near_one), FRAC_PI_2, max_relative = 1e-15);
        // K(r') - ln(4/r) → 0
        let r = EllipticModulus::new(1e-4).unwrap();
        assert!((ellip_k_comp(&r) - (4.0 / r.k()).ln()).abs() < 1e-6);
    }

    #[test]
    fn mu_reference_value() {
        assert_relative_eq!(
            mu(&EllipticModulus::new(0.1).unwrap()),
            MU_0_1,
            max_relative = 1e-14
        );
    }

    #[test]
    fn mu_inv_examples() {
        let tol = Tolerance::default();
        let r = mu_inv(FRAC_PI_2, &tol).unwrap();
        assert_relative_eq!(r.k(), FRAC_1_SQRT_2, max_relative = 1e-13);
        for k in [0.1, 0.5, 0.9] {
            let r = mu_inv(mu(&EllipticModulus::new(k).unwrap()), &tol).unwrap();
            assert!((r.k() - k).abs() < 1e-10, "k = {k}: {}", r.k());
        }
        let r = mu_inv(0.2, &tol).unwrap();
        assert_relative_eq!(r.k_comp(), MU_INV_0_2_COMP, max_relative = 1e-11);
        assert!(mu_inv(0.0, &tol).is_err());
        assert!(mu_inv(1e-4, &tol).is_err());
    }

    #[test]
    fn solve_k_ratio_examples() {
        let tol = Tolerance::default();
        let k = solve_k_ratio(2.0, &tol).unwrap();
        assert_relative_eq!(k.k(), FRAC_1_SQRT_2, max_relative = 1e-13);
        // H = 1 of the σ = 1/2 chain: k = 3 - 2√2
        let k = solve_k_ratio(1.0, &tol).unwrap();
        assert_relative_eq!(k.k(), 3.0 - 2.0 * 2f64.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn solve_k_ratio_asymptotics() {
        let tol = Tolerance::default();
        // ln(1/(1-k)) ~ π K/K' only in ratio; the additive gap is 3 ln 2
        let k = solve_k_ratio(8.0, &tol).unwrap();
        let lhs = (1.0 / k.one_minus_k()).ln();
        let rhs = std::f64::consts::PI * 4.0;
        assert_relative_eq!(rhs - lhs, 3.0 * 2f64.ln(), max_relative = 1e-4);
        // sharp form: K(k) - ln(4/k') → 0
        assert!((ellip_k(&k) - (4.0 / k.k_comp()).ln()).abs() < 1e-4 * ellip_k(&k));
        let k = solve_k_ratio(64.0, &tol).unwrap();
        let ratio = (1.0 / k.one_minus_k()).ln() / (std::f64::consts::PI * 32.0);
        assert!((ratio - 1.0).abs() < 0.03, "ratio {ratio}");
    }

    #[test]
    fn solve_k_ratio_extreme_target() {
        let tol = Tolerance::default();
        let k = solve_k_ratio(208.0, &tol).unwrap();
        assert!(k.k_comp() < 1e-60);
        assert_relative_eq!(k_ratio(&k), 208.0, max_relative = 1e-13);
        assert!(solve_k_ratio(2000.0, &tol).is_err());
    }

    proptest! {
        #[test]
        fn pair_is_consistent(x in -680.0f64..680.0) {
            let m = EllipticModulus::from_logit(x).unwrap();
            let s = m.k() * m.k() + m.k_comp() * m.k_comp();
            prop_assert!((s - 1.0).abs() <= 4.0 * f64::EPSILON);
            // k itself rounds to 1.0 once k' < 1e-8; k' carries the information
            prop_assert!(m.k() > 0.0 && m.k() <= 1.0 && m.k_comp() > 0.0 && m.k_comp() <= 1.0);
        }

        #[test]
        fn mu_reciprocal_identity(x in -40.0f64..40.0) {
            let r = EllipticModulus::from_logit(x).unwrap();
            let p = mu(&r) * mu(&r.complementary());
            prop_assert!((p - MU_PRODUCT).abs() < 1e-10);
        }

        #[test]
        fn k_ratio_round_trip(k in 0.1f64..0.99) {
            let m = EllipticModulus::new(k).unwrap();
            let back = solve_k_ratio(k_ratio(&m), &Tolerance::default()).unwrap();
            prop_assert!((back.k() - k).abs() < 1e-10);
        }

        #[test]
        fn mu_strictly_decreasing(a in 0.01f64..0.98, d in 1e-3f64..0.01) {
            let lo = EllipticModulus::new(a).unwrap();
            let hi = EllipticModulus::new(a + d).unwrap();
            prop_assert!(mu(&lo) > mu(&hi));
            prop_assert!(ellip_k(&lo) < ellip_k(&hi));
        }
    }
}
