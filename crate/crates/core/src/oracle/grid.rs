use std::io::{self, Write};

use num_rational::Rational64;

use super::domain::{Layout, Segment};
use super::solver::{pcg_ssor, Csr};
use crate::elliptic::Tolerance;
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

// corner slots of a node, named by the incident cell
const SW: usize = 0;
const SE: usize = 1;
const NW: usize = 2;
const NE: usize = 3;

/// A layout meshed with uniform spacing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProblem {
    pub layout: Layout,
    pub h: Rational64,
    pub solver_tol: Tolerance,
}

/// Solver tolerance used when none is given: relative residual `1e-10`.
pub fn default_solver_tol() -> Tolerance {
    Tolerance::new(0.0, 1e-10, 200_000).expect("valid constant tolerance")
}

impl GridProblem {
    pub fn new(layout: Layout, h: Rational64, solver_tol: Tolerance) -> Result<Self> {
        if h <= Rational64::from_integer(0) {
            return Err(Error::GridMismatch(format!(
                "mesh spacing must be positive, got {h}"
            )));
        }
        Ok(Self {
            layout,
            h,
            solver_tol,
        })
    }

    /// Number the degrees of freedom. A node on a slit gets one unknown per
    /// side; a slit tip keeps a single one.
    pub fn discretize(&self) -> Result<Discretization> {
        let layout = &self.layout;
        if layout.rects.is_empty() {
            return Err(Error::DegenerateGeometry("layout has no rectangles".into()));
        }
        let x_min = layout.rects.iter().map(|r| r.x0).min().expect("non-empty");
        let y_min = layout.rects.iter().map(|r| r.y0).min().expect("non-empty");
        let x_max = layout.rects.iter().map(|r| r.x1).max().expect("non-empty");
        let y_max = layout.rects.iter().map(|r| r.y1).max().expect("non-empty");
        let to_ix = |v: Rational64, what: &str| -> Result<i64> {
            let t = (v - x_min) / self.h;
            if t.is_integer() {
                Ok(t.to_integer())
            } else {
                Err(misaligned(what, v, self.h))
            }
        };
        let to_iy = |v: Rational64, what: &str| -> Result<i64> {
            let t = (v - y_min) / self.h;
            if t.is_integer() {
                Ok(t.to_integer())
            } else {
                Err(misaligned(what, v, self.h))
            }
        };
        let nx = to_ix(x_max, "x extent")? as usize;
        let ny = to_iy(y_max, "y extent")? as usize;
        if nx == 0 || ny == 0 {
            return Err(Error::DegenerateGeometry("layout has zero extent".into()));
        }
        if (nx + 1)
            .checked_mul(ny + 1)
            .map_or(true, |n| n >= NONE as usize)
        {
            return Err(Error::GridMismatch(format!(
                "{nx} × {ny} cells is too many"
            )));
        }

        let mut active = vec![false; nx * ny];
        for rect in &layout.rects {
            let (i0, i1) = (to_ix(rect.x0, "corner")?, to_ix(rect.x1, "corner")?);
            let (j0, j1) = (to_iy(rect.y0, "corner")?, to_iy(rect.y1, "corner")?);
            if i1 <= i0 || j1 <= j0 {
                return Err(Error::DegenerateGeometry(format!(
                    "empty rectangle {rect:?}"
                )));
            }
            for j in j0 as usize..j1 as usize {
                active[j * nx + i0 as usize..j * nx + i1 as usize].fill(true);
            }
        }

        // slit edges: horizontal edge (i,j)-(i+1,j) at i + j·nx,
        // vertical edge (i,j)-(i,j+1) at i + j·(nx+1)
        let mut h_slit = vec![false; nx * (ny + 1)];
        let mut v_slit = vec![false; (nx + 1) * ny];
        for slit in &layout.slits {
            for edge in grid_edges(slit, &to_ix, &to_iy)? {
                match edge {
                    Edge::Horizontal(i, j) => h_slit[i + j * nx] = true,
                    Edge::Vertical(i, j) => v_slit[i + j * (nx + 1)] = true,
                }
            }
        }

        let cell = |i: isize, j: isize| -> bool {
            i >= 0
                && j >= 0
                && (i as usize) < nx
                && (j as usize) < ny
                && active[j as usize * nx + i as usize]
        };
        let mut node_dofs = vec![[NONE; 4]; (nx + 1) * (ny + 1)];
        let mut n_dofs: u32 = 0;
        for j in 0..=ny {
            for i in 0..=nx {
                let (ii, jj) = (i as isize, j as isize);
                let present = [
                    cell(ii - 1, jj - 1),
                    cell(ii, jj - 1),
                    cell(ii - 1, jj),
                    cell(ii, jj),
                ];
                if !present.iter().any(|&p| p) {
                    continue;
                }
                let mut parent = [SW, SE, NW, NE];
                let mut join = |a: usize, b: usize, cut: bool| {
                    if present[a] && present[b] && !cut {
                        let (ra, rb) = (root(&parent, a), root(&parent, b));
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                };
                join(SW, SE, j > 0 && v_slit[i + (j - 1) * (nx + 1)]);
                join(NW, NE, j < ny && v_slit[i + j * (nx + 1)]);
                join(SW, NW, i > 0 && h_slit[i - 1 + j * nx]);
                join(SE, NE, i < nx && h_slit[i + j * nx]);
                let slots = &mut node_dofs[j * (nx + 1) + i];
                for s in 0..4 {
                    if !present[s] {
                        continue;
                    }
                    let r = root(&parent, s);
                    if slots[r] == NONE {
                        slots[r] = n_dofs;
                        n_dofs += 1;
                    }
                    slots[s] = slots[r];
                }
            }
        }

        let mut cells = Vec::new();
        let mut cell_id = vec![NONE; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                if active[j * nx + i] {
                    cell_id[j * nx + i] = cells.len() as u32;
                    let node = |i: usize, j: usize| &node_dofs[j * (nx + 1) + i];
                    cells.push([
                        node(i, j)[NE],
                        node(i + 1, j)[NW],
                        node(i, j + 1)[SE],
                        node(i + 1, j + 1)[SW],
                    ]);
                }
            }
        }
        let cell_index = |i: usize, j: usize| -> Option<usize> {
            (i < nx && j < ny && active[j * nx + i]).then(|| cell_id[j * nx + i] as usize)
        };

        let mut fixed: Vec<Option<f64>> = vec![None; n_dofs as usize];
        let mut has_level = [false, false];
        for seg in &layout.segments {
            let Some(value) = seg.label.potential() else {
                continue;
            };
            let mut touched = false;
            for edge in grid_edges(&seg.segment, &to_ix, &to_iy)? {
                // (cell, its two corners on this edge)
                let sides: [(Option<usize>, [usize; 2]); 2] = match edge {
                    Edge::Horizontal(i, j) => [
                        (j.checked_sub(1).and_then(|jb| cell_index(i, jb)), [2, 3]),
                        (cell_index(i, j), [0, 1]),
                    ],
                    Edge::Vertical(i, j) => [
                        (i.checked_sub(1).and_then(|il| cell_index(il, j)), [1, 3]),
                        (cell_index(i, j), [0, 2]),
                    ],
                };
                for (c, corners) in sides {
                    let Some(c) = c else { continue };
                    touched = true;
                    for corner in corners {
                        let dof = cells[c][corner] as usize;
                        match fixed[dof] {
                            Some(v) if v != value => {
                                return Err(Error::DegenerateGeometry(
                                    "potentials 0 and 1 meet at a grid node".into(),
                                ));
                            }
                            _ => fixed[dof] = Some(value),
                        }
                    }
                }
            }
            if !touched {
                return Err(Error::DegenerateGeometry(format!(
                    "labeled segment {:?} does not border the region",
                    seg.segment
                )));
            }
            has_level[usize::from(value > 0.5)] = true;
        }
        if !(has_level[0] && has_level[1]) {
            return Err(Error::DegenerateGeometry(
                "both potentials 0 and 1 are required".into(),
            ));
        }

        Ok(Discretization {
            nx,
            ny,
            h: to_f64(self.h),
            origin: (to_f64(x_min), to_f64(y_min)),
            node_dofs,
            cells,
            fixed,
            copies: layout.copies,
        })
    }
}

fn misaligned(what: &str, v: Rational64, h: Rational64) -> Error {
    Error::GridMismatch(format!("{what} at {v} is not on the grid of spacing {h}"))
}

fn to_f64(v: Rational64) -> f64 {
    *v.numer() as f64 / *v.denom() as f64
}

fn root(parent: &[usize; 4], mut s: usize) -> usize {
    while parent[s] != s {
        s = parent[s];
    }
    s
}

enum Edge {
    Horizontal(usize, usize),
    Vertical(usize, usize),
}

fn grid_edges(
    seg: &Segment,
    to_ix: &dyn Fn(Rational64, &str) -> Result<i64>,
    to_iy: &dyn Fn(Rational64, &str) -> Result<i64>,
) -> Result<Vec<Edge>> {
    let (x0, y0) = (
        to_ix(seg.start.0, "segment end")?,
        to_iy(seg.start.1, "segment end")?,
    );
    let (x1, y1) = (
        to_ix(seg.end.0, "segment end")?,
        to_iy(seg.end.1, "segment end")?,
    );
    if [x0, y0, x1, y1].iter().any(|&v| v < 0) {
        return Err(Error::DegenerateGeometry(format!(
            "segment {seg:?} leaves the layout"
        )));
    }
    if y0 == y1 {
        let (a, b) = (x0.min(x1), x0.max(x1));
        Ok((a..b)
            .map(|i| Edge::Horizontal(i as usize, y0 as usize))
            .collect())
    } else if x0 == x1 {
        let (a, b) = (y0.min(y1), y0.max(y1));
        Ok((a..b)
            .map(|j| Edge::Vertical(x0 as usize, j as usize))
            .collect())
    } else {
        Err(Error::DegenerateGeometry(format!(
            "segment {seg:?} is not axis-aligned"
        )))
    }
}

/// Unknowns of a meshed layout: per node, one unknown for each side of a
/// slit; per cell, its four corner unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    nx: usize,
    ny: usize,
    h: f64,
    origin: (f64, f64),
    node_dofs: Vec<[u32; 4]>,
    /// corners (x0,y0), (x1,y0), (x0,y1), (x1,y1)
    cells: Vec<[u32; 4]>,
    fixed: Vec<Option<f64>>,
    copies: u32,
}

impl Discretization {
    pub fn n_dofs(&self) -> usize {
        self.fixed.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn node_xy(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + i as f64 * self.h,
            self.origin.1 + j as f64 * self.h,
        )
    }

    /// Samples `f(x, y)` at every node, ignoring the prescribed potentials.
    pub fn field_from_fn(&self, f: impl Fn(f64, f64) -> f64) -> DiscreteField {
        let mut values = vec![0.0; self.n_dofs()];
        for j in 0..=self.ny {
            for i in 0..=self.nx {
                let (x, y) = self.node_xy(i, j);
                for &d in &self.node_dofs[j * (self.nx + 1) + i] {
                    if d != NONE {
                        values[d as usize] = f(x, y);
                    }
                }
            }
        }
        DiscreteField {
            disc: self.clone(),
            values,
            residual: f64::NAN,
            iterations: 0,
        }
    }

    /// Cell-edge stiffness matrix: every cell edge couples its endpoints
    /// with weight 1/2, so interior edges carry 1 and boundary edges 1/2.
    fn assemble(&self) -> (Csr, Vec<f64>, Vec<u32>) {
        let n = self.n_dofs();
        let mut free_index = vec![NONE; n];
        let mut free = Vec::new();
        for (d, f) in self.fixed.iter().enumerate() {
            if f.is_none() {
                free_index[d] = free.len() as u32;
                free.push(d as u32);
            }
        }
        let mut diag = vec![0.0; free.len()];
        let mut rhs = vec![0.0; free.len()];
        let mut triplets: Vec<(u32, u32)> = Vec::with_capacity(self.cells.len() * 8);
        for c in &self.cells {
            for (a, b) in [(c[0], c[1]), (c[2], c[3]), (c[0], c[2]), (c[1], c[3])] {
                for (p, q) in [(a, b), (b, a)] {
                    let fp = free_index[p as usize];
                    if fp == NONE {
                        continue;
                    }
                    diag[fp as usize] += 0.5;
                    let fq = free_index[q as usize];
                    match self.fixed[q as usize] {
                        Some(v) => rhs[fp as usize] += 0.5 * v,
                        None => triplets.push((fp, fq)),
                    }
                }
            }
        }
        // each triplet carries weight -1/2; merge duplicates
        triplets.sort_unstable();
        let mut row_ptr = vec![0usize; free.len() + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(u32, u32)> = None;
        for &(r, c) in &triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("merged entry exists") -= 0.5;
            } else {
                cols.push(c);
                vals.push(-0.5);
                row_ptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..free.len() {
            row_ptr[i + 1] += row_ptr[i];
        }
        (Csr::new(row_ptr, cols, vals, diag), rhs, free)
    }
}

/// Solves the discrete Dirichlet problem by preconditioned conjugate
/// gradients with a symmetric SOR preconditioner. The iteration is
/// sequential, so the result is bit-reproducible.
pub fn solve_laplace(p: &GridProblem) -> Result<DiscreteField> {
    let disc = p.discretize()?;
    let (a, b, free) = disc.assemble();
    let mut values: Vec<f64> = disc.fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    let (x, residual, iterations) = pcg_ssor(&a, &b, &p.solver_tol)?;
    for (k, &d) in free.iter().enumerate() {
        values[d as usize] = x[k];
    }
    Ok(DiscreteField {
        disc,
        values,
        residual,
        iterations,
    })
}

/// A discrete potential on a meshed layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    disc: Discretization,
    values: Vec<f64>,
    residual: f64,
    iterations: usize,
}

impl DiscreteField {
    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    /// Relative residual `‖b - Au‖/‖b‖` reached by the solver.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// All values at node `(i, j)`: one per slit side, empty outside.
    pub fn node_values(&self, i: usize, j: usize) -> Vec<f64> {
        let slots = &self.disc.node_dofs[j * (self.disc.nx + 1) + i];
        let mut out: Vec<f64> = Vec::with_capacity(2);
        let mut seen = [NONE; 4];
        for (k, &d) in slots.iter().enumerate() {
            if d != NONE && !seen[..k].contains(&d) {
                out.push(self.values[d as usize]);
            }
            seen[k] = d;
        }
        out
    }

    /// Value at node `(i, j)` if the node lies in the closed region; the
    /// mean of the sides on a slit.
    pub fn node_value(&self, i: usize, j: usize) -> Option<f64> {
        let v = self.node_values(i, j);
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Relative residual of the free equations, recomputed from the field.
    pub fn recompute_residual(&self) -> f64 {
        let (a, b, free) = self.disc.assemble();
        let x: Vec<f64> = free.iter().map(|&d| self.values[d as usize]).collect();
        let ax = a.apply(&x);
        let r2: f64 = ax.iter().zip(&b).map(|(p, q)| (q - p) * (q - p)).sum();
        let b2: f64 = b.iter().map(|v| v * v).sum();
        (r2 / b2).sqrt()
    }

    /// Writes the node values row by row (`j = 0` first) after a header
    /// `h rows cols`; nodes outside the region are `nan`.
    pub fn write_matrix<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        let (nx, ny) = (self.disc.nx, self.disc.ny);
        writeln!(out, "{} {} {}", self.disc.h, ny + 1, nx + 1)?;
        for j in 0..=ny {
            let row: Vec<String> = (0..=nx)
                .map(|i| match self.node_value(i, j) {
                    Some(v) => format!("{v:.12e}"),
                    None => "nan".to_string(),
                })
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// `∬|∇u|²` of the meshed region: per cell, the mean of the squared
/// differences along its two horizontal edges plus the same for its two
/// vertical edges. Exact for affine fields.
pub fn dirichlet_energy(field: &DiscreteField) -> f64 {
    let u = &field.values;
    field
        .disc
        .cells
        .iter()
        .map(|c| {
            let d = |a: u32, b: u32| {
                let t = u[a as usize] - u[b as usize];
                t * t
            };
            0.5 * (d(c[0], c[1]) + d(c[2], c[3]) + d(c[0], c[2]) + d(c[1], c[3]))
        })
        .sum()
}

/// Module of the meshed domain, `1 / (copies · energy)`.
pub(crate) fn module_of_energy(field: &DiscreteField, energy: f64) -> f64 {
    1.0 / (f64::from(field.disc.copies) * energy)
}
