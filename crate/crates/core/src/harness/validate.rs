use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use serde::Serialize;
use serde_json::json;

use super::report::{fmt_sig, Format};
use crate::elliptic::{
    ellip_k, ellip_k_comp, integrate_adaptive, mu, EllipticModulus, Tolerance, MU_PRODUCT,
};
use crate::frame_asymptotic::module_large_h;
use crate::frame_exact::{
    bowman_module, module_from_quarter_length, module_sigma_half, BowmanVariant, FrameGeometry,
};
use crate::oracle::{
    default_solver_tol, halving, quad_module_numeric, ring_module_numeric, RectilinearDomain,
    SidePairing,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Profile {
    /// Analytic checks only.
    #[default]
    Fast,
    /// Analytic checks plus every oracle comparison.
    Full,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Fast => "FAST",
            Profile::Full => "FULL",
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fast" => Ok(Profile::Fast),
            "full" => Ok(Profile::Full),
            _ => Err(format!("unknown profile '{s}' (expected fast or full)")),
        }
    }
}

/// Deliberate corruption used to prove the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// `μ` reported at twice its value.
    DoubledMu,
}

impl FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "double-mu" => Ok(Fault::DoubledMu),
            _ => Err(format!("unknown fault '{s}'")),
        }
    }
}

/// Outcome of one criterion (or one part of it).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub measured: String,
    pub required: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub profile: Profile,
    pub results: Vec<CriterionResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(!self.passed())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let doc = json!({
                    "criteria": self.results,
                    "passed": self.passed(),
                    "meta": {
                        "version": env!("CARGO_PKG_VERSION"),
                        "command": "validate",
                        "profile": self.profile.name(),
                    },
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(vec![]);
                w.write_record([
                    "criterion",
                    "title",
                    "passed",
                    "measured",
                    "required",
                    "runtime_ms",
                ])
                .expect("writing to memory");
                for r in &self.results {
                    let ms = r.runtime_ms.map(|v| format!("{v:.3}")).unwrap_or_default();
                    let passed = if r.passed { "true" } else { "false" };
                    w.write_record([r.id, r.title, passed, &r.measured, &r.required, &ms])
                        .expect("writing to memory");
                }
                String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
            }
            Format::Text => {
                let mut out = format!("validate profile {}\n", self.profile.name());
                for r in &self.results {
                    let tag = if r.passed { "PASS" } else { "FAIL" };
                    out += &format!("[{tag}] {:<3} {}\n", r.id, r.title);
                    out += &format!(
                        "        measured: {}\n        required: {}\n",
                        r.measured, r.required
                    );
                    if let Some(ms) = r.runtime_ms {
                        out += &format!("        runtime:  {ms:.1} ms\n");
                    }
                }
                let failed = self.results.iter().filter(|r| !r.passed).count();
                out += &format!(
                    "{} of {} checks passed\n",
                    self.results.len() - failed,
                    self.results.len()
                );
                out
            }
        }
    }
}

/// Options for [`run_validation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ValidateOptions {
    pub profile: Profile,
    pub fault: Option<Fault>,
    /// Record wall-clock time per check.
    pub timings: bool,
}

struct Check {
    passed: bool,
    measured: String,
    required: String,
}

fn g(v: f64) -> String {
    fmt_sig(v, 4)
}

fn g12(v: f64) -> String {
    fmt_sig(v, 12)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn q(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn faulty_mu(fault: Option<Fault>) -> impl Fn(&EllipticModulus) -> f64 {
    move |r| match fault {
        Some(Fault::DoubledMu) => 2.0 * mu(r),
        None => mu(r),
    }
}

fn exact_half(h: f64) -> Result<f64, String> {
    module_sigma_half(h, &tol())
        .map(|(e, _)| e.value())
        .map_err(|e| e.to_string())
}

fn criterion_1(fault: Option<Fault>) -> Result<Check, String> {
    let mu = faulty_mu(fault);
    let mut worst_mu = 0.0f64;
    for i in 0..50 {
        // r from 1e-12 to 0.99
        let t = f64::from(i) / 49.0;
        let r = 10f64.powf(-12.0 + t * (0.99f64.log10() + 12.0));
        let m = EllipticModulus::new(r).map_err(|e| e.to_string())?;
        worst_mu = worst_mu.max((mu(&m) * mu(&m.complementary()) - MU_PRODUCT).abs());
    }
    let mut worst_k = 0.0f64;
    for k in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99] {
        let m = EllipticModulus::new(k).map_err(|e| e.to_string())?;
        let integral = integrate_adaptive(
            |th: f64| 1.0 / (1.0 - (k * th.sin()).powi(2)).sqrt(),
            0.0,
            FRAC_PI_2,
            1e-14,
            2000,
        )
        .map_err(|e| e.to_string())?;
        worst_k = worst_k.max((ellip_k(&m) - integral).abs() / integral);
    }
    Ok(Check {
        passed: worst_mu <= 1e-10 && worst_k <= 1e-10,
        measured: format!(
            "max |μ(r)μ(r') - π²/4| = {}, max rel |K_agm - K_quad| = {}",
            g(worst_mu),
            g(worst_k)
        ),
        required: "both ≤ 1e-10".into(),
    })
}

fn criterion_2() -> Result<Check, String> {
    let gaps: Vec<f64> = (1..=6)
        .map(|e| {
            let r = 10f64.powi(-e);
            let m = EllipticModulus::new(r).map_err(|e| e.to_string())?;
            Ok((ellip_k_comp(&m) - (4.0 / r).ln()).abs())
        })
        .collect::<Result<_, String>>()?;
    let at_1e4 = gaps[3];
    Ok(Check {
        passed: at_1e4 < 1e-6 && strictly_decreasing(&gaps),
        measured: format!(
            "|K(r') - ln(4/r)| at r = 1e-4: {}; sequence over r = 1e-1..1e-6: [{}]",
            g(at_1e4),
            gaps.iter().map(|v| g(*v)).collect::<Vec<_>>().join(", ")
        ),
        required: "< 1e-6 at r = 1e-4, strictly decreasing".into(),
    })
}

fn criterion_3() -> Result<Check, String> {
    let mut worst = 0.0f64;
    for h in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
        let (est, trace) = module_sigma_half(h, &tol()).map_err(|e| e.to_string())?;
        let direct = ellip_k_comp(&trace.l) / (16.0 * ellip_k(&trace.l));
        let via_length = module_from_quarter_length(&trace.l);
        let rel = |a: f64, b: f64| (a - b).abs() / b;
        worst = worst
            .max(rel(direct, via_length))
            .max(rel(est.value(), via_length));
    }
    Ok(Check {
        passed: worst <= 64.0 * f64::EPSILON,
        measured: format!("max relative mismatch over H = 1..64: {}", g(worst)),
        required: format!("≤ 64 ulp ({})", g(64.0 * f64::EPSILON)),
    })
}

fn criterion_4() -> Result<Check, String> {
    let gaps: Vec<f64> = [8.0, 16.0, 32.0, 64.0]
        .iter()
        .map(|&h| exact_half(h).map(|m| (4.0 * h * m - 1.0).abs()))
        .collect::<Result<_, _>>()?;
    let scaled = 4.0 * 64.0 * exact_half(64.0)?;
    Ok(Check {
        passed: (0.95..=1.05).contains(&scaled) && strictly_decreasing(&gaps),
        measured: format!(
            "4H·m at H = 64: {}; |4H·m - 1| over H = 8..64: [{}]",
            g12(scaled),
            gaps.iter().map(|v| g(*v)).collect::<Vec<_>>().join(", ")
        ),
        required: "in [0.95, 1.05], strictly decreasing".into(),
    })
}

fn bowman_values() -> Vec<(BowmanVariant, Result<f64, String>)> {
    BowmanVariant::ALL
        .iter()
        .map(|&v| {
            (
                v,
                bowman_module(0.5, v)
                    .map(|e| e.value())
                    .map_err(|e| e.to_string()),
            )
        })
        .collect()
}

fn describe_variants(values: &[(BowmanVariant, Result<f64, String>)], agrees: &[bool]) -> String {
    values
        .iter()
        .zip(agrees)
        .map(|((v, m), ok)| {
            let val = match m {
                Ok(m) => g12(*m),
                Err(e) => format!("error ({e})"),
            };
            format!("{} = {val}{}", v.name(), if *ok { " [agrees]" } else { "" })
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn criterion_5a() -> Result<Check, String> {
    let exact = exact_half(1.0)?;
    let values = bowman_values();
    let agrees: Vec<bool> = values
        .iter()
        .map(|(_, m)| matches!(m, Ok(m) if (m - exact).abs() <= 1e-9))
        .collect();
    let count = agrees.iter().filter(|a| **a).count();
    Ok(Check {
        passed: count == 1,
        measured: format!(
            "exact m(1) = {}; {}",
            g12(exact),
            describe_variants(&values, &agrees)
        ),
        required: "exactly one variant within 1e-9 of the exact chain".into(),
    })
}

fn criterion_5b() -> Result<Check, String> {
    let exact = exact_half(1.0)?;
    let oracle = ring_module_numeric(
        q(1, 2),
        q(1, 1),
        &halving(q(1, 64), 3),
        &default_solver_tol(),
    )
    .map_err(|e| e.to_string())?;
    let values = bowman_values();
    let agrees: Vec<bool> = values
        .iter()
        .map(|(_, m)| {
            matches!(m, Ok(m) if (m - exact).abs() <= 1e-9 && (m - oracle.module).abs() <= 5e-3 * oracle.module)
        })
        .collect();
    let winner = values
        .iter()
        .zip(&agrees)
        .find(|(_, a)| **a)
        .map(|((v, _), _)| v.name());
    let count = agrees.iter().filter(|a| **a).count();
    Ok(Check {
        passed: count == 1,
        measured: format!(
            "oracle m(1) = {} ± {}; {}; arbitration: {}",
            g12(oracle.module),
            fmt_sig(oracle.est_error, 3),
            describe_variants(&values, &agrees),
            winner.unwrap_or("no unique winner")
        ),
        required: "exactly one variant within 1e-9 of the exact chain and 0.5% of the oracle"
            .into(),
    })
}

fn criterion_6() -> Result<Check, String> {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for h in [1i64, 2, 4] {
        let exact = exact_half(h as f64)?;
        let oracle = ring_module_numeric(
            q(1, 2),
            q(h, 1),
            &halving(q(1, 32), 3),
            &default_solver_tol(),
        )
        .map_err(|e| e.to_string())?;
        let rel = (oracle.module - exact).abs() / exact;
        worst = worst.max(rel);
        parts.push(format!("H = {h}: {}", g(rel)));
    }
    Ok(Check {
        passed: worst < 0.01,
        measured: format!("relative deviation oracle vs exact: {}", parts.join(", ")),
        required: "< 1% each".into(),
    })
}

fn large_h_ratio(sigma: f64, h: f64) -> Result<f64, String> {
    let geom = FrameGeometry::new(sigma, h).map_err(|e| e.to_string())?;
    let (est, _) = module_large_h(&geom, &tol()).map_err(|e| e.to_string())?;
    Ok(geom.ratio_to_leading(est.value()))
}

fn criterion_7a() -> Result<Check, String> {
    let mut ok = true;
    let mut parts = Vec::new();
    for sigma in [0.25, 0.5, 0.75] {
        let ratios: Vec<f64> = [8.0, 16.0, 32.0, 64.0]
            .iter()
            .map(|&h| large_h_ratio(sigma, h))
            .collect::<Result<_, _>>()?;
        let gaps: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
        ok &= (0.9..=1.1).contains(&ratios[3]) && strictly_decreasing(&gaps);
        parts.push(format!(
            "σ = {sigma}: [{}]",
            ratios.iter().map(|r| g(*r)).collect::<Vec<_>>().join(", ")
        ));
    }
    Ok(Check {
        passed: ok,
        measured: format!(
            "large-H ratio to leading over H = 8..64: {}",
            parts.join("; ")
        ),
        required: "in [0.9, 1.1] at H = 64, |ratio - 1| strictly decreasing".into(),
    })
}

fn criterion_7b() -> Result<Check, String> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (sn, sd) in [(1i64, 4i64), (3, 4)] {
        let sigma = sn as f64 / sd as f64;
        let mut ratios = Vec::new();
        for h in [4i64, 8] {
            let oracle = ring_module_numeric(
                q(sn, sd),
                q(h, 1),
                &halving(q(1, 16), 3),
                &default_solver_tol(),
            )
            .map_err(|e| e.to_string())?;
            let geom = FrameGeometry::new(sigma, h as f64).map_err(|e| e.to_string())?;
            ratios.push(geom.ratio_to_leading(oracle.module));
        }
        ok &= (ratios[1] - 1.0).abs() <= 0.2 && (ratios[1] - 1.0).abs() < (ratios[0] - 1.0).abs();
        parts.push(format!(
            "σ = {sigma}: H = 4 → {}, H = 8 → {}",
            g(ratios[0]),
            g(ratios[1])
        ));
    }
    Ok(Check {
        passed: ok,
        measured: format!("oracle ratio to leading: {}", parts.join("; ")),
        required: "within 20% of 1 at H = 8, gap shrinking from H = 4".into(),
    })
}

fn criterion_8() -> Result<Check, String> {
    let domain = RectilinearDomain::quad_slit(q(1, 2), q(32, 1)).map_err(|e| e.to_string())?;
    let r = quad_module_numeric(
        &domain,
        SidePairing::Primary,
        &halving(q(1, 8), 3),
        &default_solver_tol(),
    )
    .map_err(|e| e.to_string())?;
    let ratio = r.module / 16.0;
    Ok(Check {
        passed: (0.95..=1.05).contains(&ratio),
        measured: format!(
            "m(Q_32) = {} ± {}, ratio {}",
            g12(r.module),
            fmt_sig(r.est_error, 3),
            g(ratio)
        ),
        required: "ratio in [0.95, 1.05]".into(),
    })
}

fn criterion_9() -> Result<Check, String> {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [2u32, 4] {
        let nn = i64::from(n);
        let gn = RectilinearDomain::quad_slitted_square(q(1, 2), n).map_err(|e| e.to_string())?;
        let qn = RectilinearDomain::quad_slit(q(1, 2), q(2 * nn, 1)).map_err(|e| e.to_string())?;
        let a = quad_module_numeric(
            &gn,
            SidePairing::Primary,
            &halving(q(1, 16 * nn), 3),
            &default_solver_tol(),
        )
        .map_err(|e| e.to_string())?;
        let b = quad_module_numeric(
            &qn,
            SidePairing::Primary,
            &halving(q(1, 8), 3),
            &default_solver_tol(),
        )
        .map_err(|e| e.to_string())?;
        let scale = 2.0 * nn as f64;
        let gap = (a.module - b.module / scale).abs();
        let allowed = a.est_error + b.est_error / scale;
        ok &= gap <= allowed;
        parts.push(format!("n = {n}: |Δ| = {} vs {}", g(gap), g(allowed)));
    }
    Ok(Check {
        passed: ok,
        measured: parts.join("; "),
        required: "|m(G_n) - m(Q_2n)/(2n)| ≤ sum of estimated errors".into(),
    })
}

fn criterion_10() -> Result<Check, String> {
    let mut worst_m = 0.0f64;
    let mut worst_dual = 0.0f64;
    for w in [1i64, 2, 5] {
        let d = RectilinearDomain::quad_rect(q(w, 1), q(1, 1)).map_err(|e| e.to_string())?;
        let h = [q(1, 8)];
        let m = quad_module_numeric(&d, SidePairing::Primary, &h, &default_solver_tol())
            .map_err(|e| e.to_string())?;
        let md = quad_module_numeric(&d, SidePairing::Dual, &h, &default_solver_tol())
            .map_err(|e| e.to_string())?;
        worst_m = worst_m.max((m.module - w as f64).abs());
        worst_dual = worst_dual.max((m.module * md.module - 1.0).abs());
    }
    Ok(Check {
        passed: worst_m <= 1e-6 && worst_dual <= 1e-6,
        measured: format!(
            "max |m - w| = {}, max |m·m' - 1| = {}",
            g(worst_m),
            g(worst_dual)
        ),
        required: "both ≤ 1e-6".into(),
    })
}

type CheckFn = Box<dyn Fn() -> Result<Check, String>>;

fn checks(opts: ValidateOptions) -> Vec<(&'static str, &'static str, Duration, CheckFn)> {
    let s = Duration::from_secs;
    let fault = opts.fault;
    let mut list: Vec<(&'static str, &'static str, Duration, CheckFn)> = vec![
        (
            "1",
            "elliptic identities",
            s(1),
            Box::new(move || criterion_1(fault)),
        ),
        (
            "2",
            "K(r') - ln(4/r) asymptote",
            s(1),
            Box::new(criterion_2),
        ),
        (
            "3",
            "exact chain factor wiring",
            s(1),
            Box::new(criterion_3),
        ),
        (
            "4",
            "σ = 1/2 limit 4H·m → 1",
            s(1),
            Box::new(criterion_4),
        ),
        (
            "5a",
            "Bowman arbitration (analytic part)",
            s(1),
            Box::new(criterion_5a),
        ),
    ];
    if opts.profile == Profile::Full {
        list.push((
            "5b",
            "Bowman arbitration (with oracle)",
            s(120),
            Box::new(criterion_5b),
        ));
        list.push(("6", "oracle vs exact chain", s(300), Box::new(criterion_6)));
    }
    list.push((
        "7a",
        "general σ asymptote (large-H chain)",
        s(1),
        Box::new(criterion_7a),
    ));
    if opts.profile == Profile::Full {
        list.push((
            "7b",
            "general σ asymptote (oracle)",
            s(300),
            Box::new(criterion_7b),
        ));
        list.push((
            "8",
            "slit quadrilateral asymptote",
            s(180),
            Box::new(criterion_8),
        ));
        list.push((
            "9",
            "slitted square symmetry",
            s(180),
            Box::new(criterion_9),
        ));
        list.push((
            "10",
            "oracle exactness on rectangles",
            s(10),
            Box::new(criterion_10),
        ));
    }
    list
}

/// Runs the acceptance checks of `opts.profile`. Each check also has to
/// finish inside its time budget.
pub fn run_validation(opts: ValidateOptions) -> ValidationReport {
    let results = checks(opts)
        .into_iter()
        .map(|(id, title, budget, f)| {
            let start = Instant::now();
            let outcome = f();
            let elapsed = start.elapsed();
            let mut res = match outcome {
                Ok(c) => CriterionResult {
                    id,
                    title,
                    passed: c.passed,
                    measured: c.measured,
                    required: c.required,
                    runtime_ms: None,
                },
                Err(e) => CriterionResult {
                    id,
                    title,
                    passed: false,
                    measured: format!("computation failed: {e}"),
                    required: "a result".into(),
                    runtime_ms: None,
                },
            };
            if elapsed > budget {
                res.passed = false;
                res.measured += &format!("; took {:.1} s", elapsed.as_secs_f64());
                res.required += &format!("; within {} s", budget.as_secs());
            }
            if opts.timings {
                res.runtime_ms = Some(elapsed.as_secs_f64() * 1e3);
            }
            res
        })
        .collect();
    ValidationReport {
        profile: opts.profile,
        results,
    }
}
