use std::f64::consts::FRAC_PI_2;

use super::EllipticModulus;
use crate::error::{Error, Result};

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate is below `tol`, or fails after `max_intervals` subdivisions.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    let (value, error) = gauss_kronrod(&f, a, b);
    let mut pieces = vec![(a, b, value, error)];
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        if total_err <= tol {
            return Ok(pieces.iter().map(|p| p.2).sum());
        }
        if pieces.len() >= max_intervals {
            return Err(Error::IterationLimit {
                what: "adaptive quadrature",
                max_iter: max_intervals,
            });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gauss_kronrod(&f, lo, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// Incomplete elliptic integral of the first kind
/// `F(φ, k) = ∫₀^φ dθ / √(1 - k² sin²θ)` for `φ ∈ [0, π/2]`, by adaptive
/// quadrature.
pub fn incomplete_f(phi: f64, m: &EllipticModulus) -> Result<f64> {
    if !(0.0..=FRAC_PI_2 * (1.0 + 4.0 * f64::EPSILON)).contains(&phi) {
        return Err(Error::Domain(format!("amplitude {phi} is not in [0, π/2]")));
    }
    if phi == 0.0 {
        return Ok(0.0);
    }
    let phi = phi.min(FRAC_PI_2);
    let kc2 = m.k_comp() * m.k_comp();
    // 1 - k² sin²θ = cos²θ + k'² sin²θ, free of cancellation near θ = π/2
    let integrand = |theta: f64| {
        let (s, c) = theta.sin_cos();
        1.0 / (c * c + kc2 * s * s).sqrt()
    };
    integrate_adaptive(integrand, 0.0, phi, 1e-15 * phi.max(1.0), 4000)
}
