//! Finite-difference capacity oracle for rectilinear condensers.
//!
//! A layout is meshed with a uniform grid, the discrete Dirichlet problem
//! is solved with potentials 0 and 1 on the labeled boundary parts, and
//! the module is the reciprocal of the Dirichlet energy. Modules from
//! grids `h, h/2, h/4` are combined by Richardson extrapolation at an
//! order fitted from the data, since reentrant corners and slit tips spoil
//! second-order convergence.

mod domain;
mod grid;
mod solver;

use num_rational::Rational64;
use rayon::prelude::*;
use serde::Serialize;

pub use domain::{
    BoundaryLabel, LabeledSegment, Layout, Rect, RectilinearDomain, RingCut, Segment, SidePairing,
};
pub use grid::{
    default_solver_tol, dirichlet_energy, solve_laplace, DiscreteField, Discretization, GridProblem,
};

use crate::elliptic::Tolerance;
use crate::error::{Error, Result};
use crate::estimate::ModuleEstimate;

/// Differences below this fraction of the module count as converged.
const CONVERGED: f64 = 1e-13;

/// `m_fine + (m_fine - m_coarse) / (2^order - 1)`.
pub fn richardson(m_coarse: f64, m_fine: f64, order: f64) -> f64 {
    m_fine + (m_fine - m_coarse) / (order.exp2() - 1.0)
}

/// Convergence order `log₂(d₁/d₂)` from three successive values, if the
/// differences shrink without changing sign.
pub fn fitted_order(m: [f64; 3]) -> Option<f64> {
    let (d1, d2) = (m[1] - m[0], m[2] - m[1]);
    (d1 * d2 > 0.0 && d2.abs() < d1.abs()).then(|| (d1 / d2).log2())
}

/// Outcome of an oracle run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub module: f64,
    /// Dirichlet energy of the meshed region on the finest grid.
    pub energy: f64,
    /// `(h, raw module)` per grid, coarse to fine.
    pub grids_used: Vec<(f64, f64)>,
    pub extrapolated: bool,
    /// `|finest raw - extrapolated|` after extrapolation, otherwise the
    /// last grid-to-grid change (zero for a single grid).
    pub est_error: f64,
    pub fitted_order: Option<f64>,
    /// Whether the raw modules move in one direction with shrinking steps.
    pub monotone: bool,
}

impl OracleResult {
    pub fn estimate(&self) -> Result<ModuleEstimate> {
        ModuleEstimate::oracle(self.module, self.est_error)
    }
}

/// Combines raw modules from grids halving in size.
pub fn extrapolate(grids: &[(f64, f64)], energy: f64) -> Result<OracleResult> {
    let m: Vec<f64> = grids.iter().map(|g| g.1).collect();
    let Some(&finest) = m.last() else {
        return Err(Error::Domain("no grid levels".into()));
    };
    let steps: Vec<f64> = m.windows(2).map(|w| w[1] - w[0]).collect();
    let converged = |d: f64| d.abs() <= CONVERGED * finest.abs();
    let monotone = steps
        .windows(2)
        .all(|d| converged(d[1]) || (d[0] * d[1] > 0.0 && d[1].abs() < d[0].abs()));
    let mut result = OracleResult {
        module: finest,
        energy,
        grids_used: grids.to_vec(),
        extrapolated: false,
        est_error: steps.last().map_or(0.0, |d| d.abs()),
        fitted_order: None,
        monotone,
    };
    if m.len() >= 3 && monotone {
        let last = [m[m.len() - 3], m[m.len() - 2], finest];
        if !converged(last[2] - last[1]) {
            if let Some(p) = fitted_order(last) {
                result.module = richardson(last[1], last[2], p);
                result.est_error = (finest - result.module).abs();
                result.extrapolated = true;
                result.fitted_order = Some(p);
            }
        }
    }
    Ok(result)
}

fn check_h_list(h_list: &[Rational64]) -> Result<()> {
    if h_list.is_empty() {
        return Err(Error::Domain(
            "at least one mesh spacing is required".into(),
        ));
    }
    for w in h_list.windows(2) {
        if w[0] != w[1] * 2 {
            return Err(Error::Domain(format!(
                "mesh spacings must halve successively, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Module of `layout` on each grid of `h_list` (coarse to fine, halving),
/// extrapolated; also returns the finest field.
pub fn layout_module_numeric(
    layout: &Layout,
    h_list: &[Rational64],
    solver_tol: &Tolerance,
) -> Result<(OracleResult, DiscreteField)> {
    check_h_list(h_list)?;
    let solved: Vec<(f64, f64, f64, DiscreteField)> = h_list
        .par_iter()
        .map(|&h| {
            let p = GridProblem::new(layout.clone(), h, *solver_tol)?;
            let field = solve_laplace(&p)?;
            let energy = dirichlet_energy(&field);
            let module = grid::module_of_energy(&field, energy);
            Ok((*h.numer() as f64 / *h.denom() as f64, module, energy, field))
        })
        .collect::<Result<_>>()?;
    let grids: Vec<(f64, f64)> = solved.iter().map(|s| (s.0, s.1)).collect();
    let (_, _, energy, field) = solved.into_iter().last().expect("non-empty h_list");
    Ok((extrapolate(&grids, energy)?, field))
}

/// Module of the frame `D_H^σ` from the quarter domain, `1/(4E)`.
pub fn ring_module_numeric(
    sigma: Rational64,
    h: Rational64,
    h_list: &[Rational64],
    solver_tol: &Tolerance,
) -> Result<OracleResult> {
    let layout = RectilinearDomain::ring_frame(sigma, h)?.ring_layout(RingCut::Quarter)?;
    layout_module_numeric(&layout, h_list, solver_tol).map(|r| r.0)
}

/// As [`ring_module_numeric`] but meshing the whole frame.
pub fn ring_module_numeric_full(
    sigma: Rational64,
    h: Rational64,
    h_list: &[Rational64],
    solver_tol: &Tolerance,
) -> Result<OracleResult> {
    let layout = RectilinearDomain::ring_frame(sigma, h)?.ring_layout(RingCut::Full)?;
    layout_module_numeric(&layout, h_list, solver_tol).map(|r| r.0)
}

/// Module of a quadrilateral, `1/E` for the potential problem on the
/// chosen side pair.
pub fn quad_module_numeric(
    domain: &RectilinearDomain,
    pairing: SidePairing,
    h_list: &[Rational64],
    solver_tol: &Tolerance,
) -> Result<OracleResult> {
    let layout = domain.quad_layout(pairing)?;
    layout_module_numeric(&layout, h_list, solver_tol).map(|r| r.0)
}

/// `[h₀, h₀/2, …]` with `levels` entries.
pub fn halving(h0: Rational64, levels: usize) -> Vec<Rational64> {
    (0..levels)
        .map(|k| h0 / Rational64::from_integer(1 << k))
        .collect()
}

#[cfg(test)]
mod tests;
