use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_integer::Integer;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use super::number::{to_f64, Number};
use super::report::{render, Format, Meta, Record, RecordGeometry};
use crate::elliptic::Tolerance;
use crate::estimate::Method;
use crate::frame_asymptotic::{module_large_h, module_leading, slit_quad_module_asymptotic};
use crate::frame_exact::{bowman_module, module_sigma_half, BowmanVariant, FrameGeometry};
use crate::oracle::{
    default_solver_tol, halving, layout_module_numeric, DiscreteField, Layout, RectilinearDomain,
};

/// Largest `H` the oracle is run at.
pub const ORACLE_MAX_H: i64 = 32;
/// Cap on the number of cells of the finest oracle grid.
pub const ORACLE_MAX_CELLS: f64 = 4.0e6;
/// Coarsest automatic grid has at least this many cells per unit length.
const ORACLE_MIN_RESOLUTION: i64 = 16;

/// Failure of a command, with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommandError {
    /// Bad or inapplicable arguments (exit code 2).
    Usage(String),
    /// A computation failed (exit code 1).
    Compute(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Usage(_) => 2,
            CommandError::Compute(_) => 1,
        }
    }
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommandError::Usage(m) => write!(f, "usage error: {m}"),
            CommandError::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

impl std::error::Error for CommandError {}

fn usage(msg: impl Into<String>) -> CommandError {
    CommandError::Usage(msg.into())
}

/// Flags shared by all commands.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub format: Format,
    /// Relative tolerance for root finding and the oracle's linear solves.
    pub tol: Option<f64>,
    /// Keep the finest oracle field for dumping.
    pub want_field: bool,
    /// Fill `runtime_ms`; off by default so output is reproducible.
    pub timings: bool,
}

impl RunOptions {
    fn analytic_tol(&self) -> Result<Tolerance, CommandError> {
        match self.tol {
            None => Ok(Tolerance::default()),
            Some(t) => Tolerance::new(0.0, t, Tolerance::default().max_iter)
                .map_err(|e| usage(format!("--tol: {e}"))),
        }
    }

    fn solver_tol(&self) -> Result<Tolerance, CommandError> {
        match self.tol {
            None => Ok(default_solver_tol()),
            Some(t) => Tolerance::new(0.0, t, default_solver_tol().max_iter)
                .map_err(|e| usage(format!("--tol: {e}"))),
        }
    }
}

/// Oracle grid: explicit coarsest spacing or an automatic one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleGrid {
    pub h0: Option<Rational64>,
    pub levels: usize,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self {
            h0: None,
            levels: 3,
        }
    }
}

impl OracleGrid {
    /// Halving spacings aligned with every coordinate in `coords`, for a
    /// region of area `area`.
    fn h_list(&self, coords: &[Rational64], area: f64) -> Result<Vec<Rational64>, String> {
        if self.levels == 0 {
            return Err("at least one grid level is required".into());
        }
        let h0 = match self.h0 {
            Some(h0) => h0,
            None => {
                let mut n = coords.iter().fold(1i64, |acc, c| acc.lcm(c.denom()));
                while n < ORACLE_MIN_RESOLUTION {
                    n *= 2;
                }
                Rational64::new(1, n)
            }
        };
        let finest = to_f64(h0) / f64::from(1u32 << (self.levels - 1).min(30));
        let cells = area / (finest * finest);
        if cells > ORACLE_MAX_CELLS {
            return Err(format!(
                "finest oracle grid would have {cells:.3e} cells (limit {ORACLE_MAX_CELLS:e}); pass a coarser --h0 or fewer --levels"
            ));
        }
        Ok(halving(h0, self.levels))
    }
}

fn trace_value<T: Serialize>(t: &T) -> Option<Value> {
    serde_json::to_value(t).ok()
}

struct Outcome {
    value: f64,
    est_error: Option<f64>,
    trace: Option<Value>,
    field: Option<DiscreteField>,
}

fn oracle_outcome(
    layout: &Layout,
    h_list: &[Rational64],
    opts: &RunOptions,
) -> Result<Outcome, String> {
    let tol = opts.solver_tol().map_err(|e| e.to_string())?;
    let (result, field) = layout_module_numeric(layout, h_list, &tol).map_err(|e| e.to_string())?;
    Ok(Outcome {
        value: result.module,
        est_error: Some(result.est_error),
        trace: trace_value(&result),
        field: opts.want_field.then_some(field),
    })
}

/// Why `method` cannot be applied to the frame `(σ, H)`, if it cannot.
fn frame_inapplicable(sigma: &Number, h: &Number, method: Method) -> Option<String> {
    match method {
        Method::ExactSigmaHalf if !sigma.equals(1, 2) => {
            Some(format!("method exact needs sigma = 1/2, got {sigma}"))
        }
        Method::Bowman if !h.equals(1, 1) => Some(format!("method bowman needs H = 1, got {h}")),
        Method::Oracle if sigma.exact().is_none() || h.exact().is_none() => {
            Some("method oracle needs sigma and H as exact decimals or rationals".into())
        }
        Method::Oracle if h.value() > ORACLE_MAX_H as f64 => Some(format!(
            "method oracle is limited to H ≤ {ORACLE_MAX_H}, got {h}"
        )),
        _ => None,
    }
}

fn frame_outcome(
    sigma: &Number,
    h: &Number,
    method: Method,
    grid: &OracleGrid,
    opts: &RunOptions,
) -> Result<Outcome, String> {
    let geom = FrameGeometry::new(sigma.value(), h.value()).map_err(|e| e.to_string())?;
    let tol = opts.analytic_tol().map_err(|e| e.to_string())?;
    let plain = |value: f64| Outcome {
        value,
        est_error: None,
        trace: None,
        field: None,
    };
    match method {
        Method::ExactSigmaHalf => {
            let (est, trace) = module_sigma_half(geom.h(), &tol).map_err(|e| e.to_string())?;
            Ok(Outcome {
                trace: trace_value(&trace),
                ..plain(est.value())
            })
        }
        Method::Bowman => bowman_module(geom.sigma(), BowmanVariant::ARBITRATED)
            .map(|e| plain(e.value()))
            .map_err(|e| e.to_string()),
        Method::Leading => Ok(plain(module_leading(&geom).value())),
        Method::LargeH => {
            let (est, trace) = module_large_h(&geom, &tol).map_err(|e| e.to_string())?;
            Ok(Outcome {
                trace: trace_value(&trace),
                ..plain(est.value())
            })
        }
        Method::Oracle => {
            let (s, hh) = (sigma.exact().expect("checked"), h.exact().expect("checked"));
            let domain = RectilinearDomain::ring_frame(s, hh).map_err(|e| e.to_string())?;
            let layout = domain.default_layout().map_err(|e| e.to_string())?;
            let area = geom.h() * (1.0 - geom.sigma()) * (1.0 + geom.sigma());
            let h_list = grid.h_list(&[s, hh, s * hh], area)?;
            oracle_outcome(&layout, &h_list, opts)
        }
    }
}

fn timed<T>(timings: bool, f: impl FnOnce() -> T) -> (T, Option<f64>) {
    let start = Instant::now();
    let out = f();
    (out, timings.then(|| start.elapsed().as_secs_f64() * 1e3))
}

fn frame_record(
    sigma: &Number,
    h: &Number,
    method: Method,
    grid: &OracleGrid,
    opts: &RunOptions,
) -> (Record, Option<DiscreteField>) {
    let mut rec = Record::new(
        RecordGeometry::Frame {
            sigma: sigma.value(),
            h: h.value(),
        },
        method,
    );
    let (outcome, ms) = timed(opts.timings, || frame_outcome(sigma, h, method, grid, opts));
    rec.runtime_ms = ms;
    match outcome {
        Ok(o) => {
            rec.value = Some(o.value);
            rec.est_error = o.est_error;
            rec.trace = o.trace;
            rec.ratio_to_leading = FrameGeometry::new(sigma.value(), h.value())
                .ok()
                .map(|g| g.ratio_to_leading(o.value));
            (rec, o.field)
        }
        Err(e) => {
            rec.error = Some(e);
            (rec, None)
        }
    }
}

/// Rendered command output.
#[derive(Debug, Clone)]
pub struct Output {
    pub body: String,
    pub exit_code: i32,
    /// Finest oracle field, when requested and computed.
    pub field: Option<DiscreteField>,
}

fn check_methods(methods: &[Method]) -> Result<(), CommandError> {
    if methods.is_empty() {
        Err(usage("the method set is empty"))
    } else {
        Ok(())
    }
}

/// Parses a comma-separated method list such as `exact,leading`.
pub fn parse_methods(s: &str) -> Result<Vec<Method>, CommandError> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: Method = part
            .parse()
            .map_err(|e: crate::Error| usage(e.to_string()))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleArgs {
    pub sigma: Number,
    pub h: Number,
    pub methods: Vec<Method>,
    pub grid: OracleGrid,
}

/// One estimate per requested method for a single frame.
pub fn cmd_module(args: &ModuleArgs, opts: &RunOptions) -> Result<Output, CommandError> {
    check_methods(&args.methods)?;
    FrameGeometry::new(args.sigma.value(), args.h.value()).map_err(|e| usage(e.to_string()))?;
    for &m in &args.methods {
        if let Some(why) = frame_inapplicable(&args.sigma, &args.h, m) {
            return Err(usage(why));
        }
    }
    if opts.want_field && !args.methods.contains(&Method::Oracle) {
        return Err(usage("--dump-field needs the oracle method"));
    }
    let mut records = Vec::new();
    let mut field = None;
    for &m in &args.methods {
        let (rec, f) = frame_record(&args.sigma, &args.h, m, &args.grid, opts);
        if let Some(e) = &rec.error {
            return Err(CommandError::Compute(format!(
                "method {}: {e}",
                m.cli_name()
            )));
        }
        field = field.or(f);
        records.push(rec);
    }
    let body = render(
        &records,
        opts.format,
        Meta {
            command: "module",
            profile: None,
        },
    );
    Ok(Output {
        body,
        exit_code: 0,
        field,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lin" | "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            _ => Err(format!("unknown spacing '{s}' (expected linear or log)")),
        }
    }
}

/// `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HRange {
    pub start: Number,
    pub stop: Number,
    pub count: usize,
}

impl FromStr for HRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(format!("H range '{s}' is not start:stop:count"));
        };
        let start: Number = start.parse().map_err(|e| format!("{e}"))?;
        let stop: Number = stop.parse().map_err(|e| format!("{e}"))?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| format!("bad count in '{s}'"))?;
        if count == 0 {
            return Err("H range needs count ≥ 1".into());
        }
        if count == 1 && start != stop {
            return Err("a one-point H range needs start = stop".into());
        }
        Ok(Self { start, stop, count })
    }
}

fn rational_from_i128(n: i128, d: i128) -> Option<Rational64> {
    let g = n.gcd(&d);
    let (n, d) = (n / g, d / g);
    Some(Rational64::new(
        i64::try_from(n).ok()?,
        i64::try_from(d).ok()?,
    ))
}

fn exact_pow(q: Rational64, k: u32) -> Option<Rational64> {
    let n = i128::from(*q.numer()).checked_pow(k)?;
    let d = i128::from(*q.denom()).checked_pow(k)?;
    rational_from_i128(n, d)
}

impl HRange {
    /// The sample points; exact when the end points and the step allow it.
    pub fn points(&self, spacing: Spacing) -> Vec<Number> {
        let n = self.count;
        if n == 1 {
            return vec![self.start];
        }
        let steps = (n - 1) as i128;
        let exact = match (self.start.exact(), self.stop.exact(), spacing) {
            (Some(a), Some(b), Spacing::Linear) => (0..n as i128)
                .map(|i| {
                    let (an, ad) = (i128::from(*a.numer()), i128::from(*a.denom()));
                    let (bn, bd) = (i128::from(*b.numer()), i128::from(*b.denom()));
                    // a + (b - a)·i/steps over the common denominator
                    let num = an * bd * (steps - i) + bn * ad * i;
                    rational_from_i128(num, ad * bd * steps).map(Number::from_rational)
                })
                .collect::<Option<Vec<_>>>(),
            (Some(a), Some(b), Spacing::Log) => {
                geometric_ratio(b / a, (n - 1) as u32).and_then(|q| {
                    (0..n as u32)
                        .map(|i| Some(Number::from_rational(a * exact_pow(q, i)?)))
                        .collect::<Option<Vec<_>>>()
                })
            }
            _ => None,
        };
        exact.unwrap_or_else(|| {
            let (a, b) = (self.start.value(), self.stop.value());
            (0..n)
                .map(|i| {
                    let t = i as f64 / (n - 1) as f64;
                    Number::from_f64(match spacing {
                        Spacing::Linear => a + (b - a) * t,
                        Spacing::Log => a * (b / a).powf(t),
                    })
                })
                .collect()
        })
    }
}

/// A rational `q` with `q^k = ratio` and a small denominator, if any.
fn geometric_ratio(ratio: Rational64, k: u32) -> Option<Rational64> {
    if ratio <= Rational64::from_integer(0) {
        return None;
    }
    let qf = to_f64(ratio).powf(1.0 / f64::from(k));
    (1..=1000i64).find_map(|den| {
        let num = (qf * den as f64).round() as i64;
        let q = Rational64::new(num.max(1), den);
        (exact_pow(q, k)? == ratio).then_some(q)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepArgs {
    pub sigmas: Vec<Number>,
    pub h_range: HRange,
    pub spacing: Spacing,
    pub methods: Vec<Method>,
    pub grid: OracleGrid,
}

/// One record per applicable (geometry, method) pair, in input order.
/// Failed rows carry their error; the exit code is 1 only if every row
/// failed.
pub fn cmd_sweep(args: &SweepArgs, opts: &RunOptions) -> Result<Output, CommandError> {
    check_methods(&args.methods)?;
    if args.sigmas.is_empty() {
        return Err(usage("no sigma values given"));
    }
    if opts.want_field {
        return Err(usage("--dump-field is not supported for sweeps"));
    }
    let hs = args.h_range.points(args.spacing);
    let mut jobs = Vec::new();
    for sigma in &args.sigmas {
        for h in &hs {
            FrameGeometry::new(sigma.value(), h.value()).map_err(|e| usage(e.to_string()))?;
            for &m in &args.methods {
                if matches!(m, Method::ExactSigmaHalf | Method::Bowman)
                    && frame_inapplicable(sigma, h, m).is_some()
                {
                    continue;
                }
                jobs.push((*sigma, *h, m));
            }
        }
    }
    if jobs.is_empty() {
        return Err(usage("no requested method applies to any sweep point"));
    }
    let records: Vec<Record> = jobs
        .par_iter()
        .map(|(s, h, m)| match frame_inapplicable(s, h, *m) {
            Some(why) => {
                let mut rec = Record::new(
                    RecordGeometry::Frame {
                        sigma: s.value(),
                        h: h.value(),
                    },
                    *m,
                );
                rec.error = Some(why);
                rec
            }
            None => frame_record(s, h, *m, &args.grid, opts).0,
        })
        .collect();
    let all_failed = records.iter().all(|r| r.error.is_some());
    let body = render(
        &records,
        opts.format,
        Meta {
            command: "sweep",
            profile: None,
        },
    );
    Ok(Output {
        body,
        exit_code: i32::from(all_failed),
        field: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadKind {
    Slit,
    SlittedSquare,
}

impl FromStr for QuadKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "slit" => Ok(QuadKind::Slit),
            "slitted-square" => Ok(QuadKind::SlittedSquare),
            _ => Err(format!(
                "unknown quadrilateral kind '{s}' (expected slit or slitted-square)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadArgs {
    pub kind: QuadKind,
    pub c: Number,
    pub h: Option<Number>,
    pub n: Option<u32>,
    pub methods: Vec<Method>,
    pub grid: OracleGrid,
}

/// Asymptotic and/or oracle module of the slit quadrilateral `Q_H` or the
/// slitted square `G_n`.
pub fn cmd_quad(args: &QuadArgs, opts: &RunOptions) -> Result<Output, CommandError> {
    check_methods(&args.methods)?;
    let c = args.c;
    if !(c.value() > 0.0 && c.value() < 1.0) {
        return Err(usage(format!(
            "c must lie in the open interval (0, 1), got {c}"
        )));
    }
    for &m in &args.methods {
        if !matches!(m, Method::Leading | Method::Oracle) {
            return Err(usage(format!(
                "method {} does not apply to quadrilaterals",
                m.cli_name()
            )));
        }
    }
    let wants_oracle = args.methods.contains(&Method::Oracle);
    if opts.want_field && !wants_oracle {
        return Err(usage("--dump-field needs the oracle method"));
    }
    if wants_oracle && c.exact().is_none() {
        return Err(usage(
            "method oracle needs c as an exact decimal or rational",
        ));
    }
    let (geometry, leading, domain) = match args.kind {
        QuadKind::Slit => {
            let h = args.h.ok_or_else(|| usage("quad slit needs --H"))?;
            if args.n.is_some() {
                return Err(usage("quad slit takes --H, not --n"));
            }
            let leading = slit_quad_module_asymptotic(c.value(), h.value())
                .map_err(|e| usage(e.to_string()))?
                .value();
            let domain = if wants_oracle {
                let hx = h.exact().ok_or_else(|| {
                    usage("method oracle needs H as an exact decimal or rational")
                })?;
                if h.value() > ORACLE_MAX_H as f64 {
                    return Err(usage(format!(
                        "method oracle is limited to H ≤ {ORACLE_MAX_H}"
                    )));
                }
                let cx = c.exact().expect("checked");
                let d = RectilinearDomain::quad_slit(cx, hx).map_err(|e| usage(e.to_string()))?;
                Some((d, vec![cx, hx, cx * hx], h.value()))
            } else {
                None
            };
            (
                RecordGeometry::Slit {
                    c: c.value(),
                    h: h.value(),
                },
                leading,
                domain,
            )
        }
        QuadKind::SlittedSquare => {
            let n = args
                .n
                .ok_or_else(|| usage("quad slitted-square needs --n"))?;
            if args.h.is_some() {
                return Err(usage("quad slitted-square takes --n, not --H"));
            }
            if n == 0 {
                return Err(usage("n must be positive"));
            }
            let domain = if wants_oracle {
                let cx = c.exact().expect("checked");
                let d = RectilinearDomain::quad_slitted_square(cx, n)
                    .map_err(|e| usage(e.to_string()))?;
                Some((d, vec![cx, Rational64::new(1, i64::from(n))], 1.0))
            } else {
                None
            };
            // m(G_n) = m(Q_2n)/(2n) ~ (1-c)
            (
                RecordGeometry::SlittedSquare { c: c.value(), n },
                1.0 - c.value(),
                domain,
            )
        }
    };

    let mut records = Vec::new();
    let mut field = None;
    for &m in &args.methods {
        let mut rec = Record::new(geometry, m);
        let (outcome, ms) = timed(opts.timings, || -> Result<Outcome, String> {
            match (m, &domain) {
                (Method::Oracle, Some((d, coords, area))) => {
                    let layout = d.default_layout().map_err(|e| e.to_string())?;
                    let h_list = args.grid.h_list(coords, *area)?;
                    oracle_outcome(&layout, &h_list, opts)
                }
                _ => Ok(Outcome {
                    value: leading,
                    est_error: None,
                    trace: None,
                    field: None,
                }),
            }
        });
        let o =
            outcome.map_err(|e| CommandError::Compute(format!("method {}: {e}", m.cli_name())))?;
        rec.value = Some(o.value);
        rec.est_error = o.est_error;
        rec.trace = o.trace;
        rec.ratio_to_leading = Some(o.value / leading);
        rec.runtime_ms = ms;
        field = field.or(o.field);
        records.push(rec);
    }
    let body = render(
        &records,
        opts.format,
        Meta {
            command: "quad",
            profile: None,
        },
    );
    Ok(Output {
        body,
        exit_code: 0,
        field,
    })
}
