//! Discrete energies `h^d Σ_cells F_c(offset + ∇_h u)` over nodal fields,
//! shared by the cell problem, the oscillating problem and the
//! homogenized problem.

use crate::field::{GridRole, PeriodicGrid};
use crate::precond::LaplaceInverse;
use crate::solver::Objective;

/// Energy density attached to each cell.
pub trait CellDensity: Sync {
    fn value_grad(&self, cell: usize, xi: &[f64], grad: &mut [f64]) -> f64;
}

/// `a_c · W(ξ)` with the coefficient sampled once per cell.
pub struct SampledIntegrand<'a> {
    pub coefficients: Vec<f64>,
    pub potential: &'a crate::integrand::Potential,
}

impl CellDensity for SampledIntegrand<'_> {
    #[inline]
    fn value_grad(&self, cell: usize, xi: &[f64], grad: &mut [f64]) -> f64 {
        let a = self.coefficients[cell];
        let v = self.potential.value_grad(xi, grad);
        grad.iter_mut().for_each(|g| *g *= a);
        a * v
    }
}

pub enum Constraint {
    /// Periodic fields modulo constants; gradients are projected to zero mean.
    ZeroMean,
    /// Boundary nodes of a domain grid are held fixed.
    FixedBoundary(Vec<bool>),
}

pub struct LatticeEnergy<D> {
    grid: PeriodicGrid,
    base: Vec<usize>,
    neighbors: [Vec<usize>; 2],
    offset: [f64; 2],
    density: D,
    constraint: Constraint,
    laplace: LaplaceInverse,
}

impl<D: CellDensity> LatticeEnergy<D> {
    /// `grid` is the nodal grid (cell-Y or domain-Ω).
    pub fn new(grid: PeriodicGrid, offset: &[f64], density: D) -> Self {
        let n = grid.n();
        let d = grid.dim();
        let (base, neighbors) = match (grid.role(), d) {
            (GridRole::CellY, 1) => (
                (0..n).collect(),
                [(0..n).map(|i| (i + 1) % n).collect(), Vec::new()],
            ),
            (GridRole::CellY, _) => {
                let base: Vec<usize> = (0..n * n).collect();
                let n0 = (0..n * n).map(|c| ((c / n + 1) % n) * n + c % n).collect();
                let n1 = (0..n * n).map(|c| (c / n) * n + (c % n + 1) % n).collect();
                (base, [n0, n1])
            }
            (GridRole::DomainOmega, 1) => ((0..n).collect(), [(1..=n).collect(), Vec::new()]),
            (GridRole::DomainOmega, _) => {
                let s = n + 1;
                let base: Vec<usize> = (0..n * n).map(|c| (c / n) * s + c % n).collect();
                let n0 = base.iter().map(|b| b + s).collect();
                let n1 = base.iter().map(|b| b + 1).collect();
                (base, [n0, n1])
            }
            (GridRole::DomainCells, _) => panic!("energies act on nodal grids"),
        };
        let constraint = match grid.role() {
            GridRole::CellY => Constraint::ZeroMean,
            _ => Constraint::FixedBoundary((0..grid.len()).map(|i| grid.is_boundary(i)).collect()),
        };
        let mut off = [0.0; 2];
        off[..d].copy_from_slice(&offset[..d]);
        Self {
            grid,
            base,
            neighbors,
            offset: off,
            density,
            constraint,
            laplace: LaplaceInverse::new(grid),
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; x.len()];
        self.value_grad(x, &mut g)
    }
}

impl<D: CellDensity> Objective for LatticeEnergy<D> {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.grid.dim();
        let inv_h = self.grid.n() as f64;
        let w = self.grid.cell_volume();
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        let mut xi = [0.0; 2];
        let mut gw = [0.0; 2];
        for (c, &b) in self.base.iter().enumerate() {
            let xb = x[b];
            for k in 0..d {
                xi[k] = self.offset[k] + (x[self.neighbors[k][c]] - xb) * inv_h;
            }
            total += self.density.value_grad(c, &xi[..d], &mut gw[..d]);
            for k in 0..d {
                let flux = w * inv_h * gw[k];
                grad[self.neighbors[k][c]] += flux;
                grad[b] -= flux;
            }
        }
        total * w
    }

    fn precondition(&self, grad: &[f64], out: &mut [f64]) {
        self.laplace.apply(grad, out);
    }

    fn project(&self, grad: &mut [f64]) {
        match &self.constraint {
            Constraint::ZeroMean => {
                let mean = grad.iter().sum::<f64>() / grad.len() as f64;
                grad.iter_mut().for_each(|g| *g -= mean);
            }
            Constraint::FixedBoundary(mask) => {
                for (g, &fixed) in grad.iter_mut().zip(mask) {
                    if fixed {
                        *g = 0.0;
                    }
                }
            }
        }
    }
}
