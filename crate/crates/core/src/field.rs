//! Uniform grids on the unit cell `Y = (0,1)^d` and the domain `Ω = (0,1)^d`,
//! sampled scalar and vector fields, forward-difference gradients,
//! rectangle-rule quadrature, modulars and Luxemburg norms.
//!
//! Three sample layouts share one grid type:
//!
//! * `CellY`: `n` nodes per axis at `i/n`, periodic wraparound.
//! * `DomainOmega`: `n + 1` nodes per axis at `i/n`, boundary nodes included.
//! * `DomainCells`: `n` cells per axis, each represented by its lower-left
//!   node `i/n`. Gradients of domain fields live here.
//!
//! Quadrature is always `h^d` times the sum over the `n^d` cell
//! representatives, so every layout integrates over a unit measure.

use std::io::Write;

use crate::error::{Error, Result};
use crate::nfunc::NFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridRole {
    CellY,
    DomainOmega,
    DomainCells,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PeriodicGrid {
    dim: usize,
    n: usize,
    role: GridRole,
}

impl PeriodicGrid {
    pub fn new(dim: usize, n: usize, role: GridRole) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::Grid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n < 4 {
            return Err(Error::Grid(format!("need at least 4 nodes per axis, got {n}")));
        }
        Ok(Self { dim, n, role })
    }

    pub fn cell(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, GridRole::CellY)
    }

    pub fn domain(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, GridRole::DomainOmega)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn role(&self) -> GridRole {
        self.role
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Quadrature weight `h^d` of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    /// Samples per axis for this layout.
    pub fn per_axis(&self) -> usize {
        match self.role {
            GridRole::DomainOmega => self.n + 1,
            GridRole::CellY | GridRole::DomainCells => self.n,
        }
    }

    pub fn len(&self) -> usize {
        self.per_axis().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of cells, `n^d`.
    pub fn cell_count(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Layout on which gradients of fields on this grid are stored.
    pub fn gradient_grid(&self) -> PeriodicGrid {
        match self.role {
            GridRole::CellY => *self,
            _ => PeriodicGrid {
                role: GridRole::DomainCells,
                ..*self
            },
        }
    }

    /// Row-major flat index, last axis fastest.
    #[inline]
    pub fn index(&self, multi: &[usize]) -> usize {
        let s = self.per_axis();
        match self.dim {
            1 => multi[0],
            _ => multi[0] * s + multi[1],
        }
    }

    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        let s = self.per_axis();
        match self.dim {
            1 => [idx, 0],
            _ => [idx / s, idx % s],
        }
    }

    /// Coordinates of sample `idx`; the second entry is unused when `dim = 1`.
    #[inline]
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let m = self.multi_index(idx);
        let h = self.h();
        [m[0] as f64 * h, m[1] as f64 * h]
    }

    /// Flat indices of the `n^d` cell representatives.
    pub fn cell_indices(&self) -> Vec<usize> {
        let n = self.n;
        match self.dim {
            1 => (0..n).collect(),
            _ => (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| self.index(&[i, j]))
                .collect(),
        }
    }

    /// Whether sample `idx` lies on the boundary of Ω (domain layout only).
    pub fn is_boundary(&self, idx: usize) -> bool {
        if self.role != GridRole::DomainOmega {
            return false;
        }
        let m = self.multi_index(idx);
        (0..self.dim).any(|k| m[k] == 0 || m[k] == self.n)
    }

    fn check_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self != other {
            return Err(Error::Shape(format!("grids differ: {self:?} vs {other:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value {} at sample {i}", values[i])));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f` at the grid coordinates.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let d = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.coords(i)[..d])).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Periodic multilinear interpolation of a cell field at any `y`.
    pub fn sample_periodic(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(self.grid.role, GridRole::CellY);
        let n = self.grid.n;
        let locate = |t: f64| {
            let s = t.rem_euclid(1.0) * n as f64;
            let i = (s.floor() as usize).min(n - 1);
            (i, s - i as f64)
        };
        match self.grid.dim {
            1 => {
                let (i, w) = locate(y[0]);
                (1.0 - w) * self.values[i] + w * self.values[(i + 1) % n]
            }
            _ => {
                let (i, wi) = locate(y[0]);
                let (j, wj) = locate(y[1]);
                let v = |a: usize, b: usize| self.values[(a % n) * n + (b % n)];
                (1.0 - wi) * ((1.0 - wj) * v(i, j) + wj * v(i, j + 1))
                    + wi * ((1.0 - wj) * v(i + 1, j) + wj * v(i + 1, j + 1))
            }
        }
    }

    /// Writes `x[,y],value` rows, one per sample.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.grid.dim();
        if d == 1 {
            w.write_record(["x", "value"])?;
        } else {
            w.write_record(["x", "y", "value"])?;
        }
        for (i, v) in self.values.iter().enumerate() {
            let c = self.grid.coords(i);
            let mut rec: Vec<String> = c[..d].iter().map(|x| format!("{x}")).collect();
            rec.push(format!("{v:e}"));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: PeriodicGrid,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: PeriodicGrid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::Shape(format!(
                "expected {} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        for c in &components {
            if c.len() != grid.len() || c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Shape("component length or finiteness mismatch".into()));
            }
        }
        Ok(Self { grid, components })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn component(&self, k: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.components[k].clone(),
        }
    }

    /// Gradient vector at sample `idx`.
    pub fn at(&self, idx: usize) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (k, c) in self.components.iter().enumerate() {
            out[k] = c[idx];
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Forward differences `(u_{i+e_k} - u_i)/h`. Periodic wrap on cell grids;
/// on domain grids the last node per axis closes the final cell.
pub fn gradient(u: &ScalarField) -> VectorField {
    let g = u.grid;
    let out_grid = g.gradient_grid();
    let n = g.n;
    let inv_h = n as f64;
    let v = &u.values;
    let components = match (g.role, g.dim) {
        (GridRole::CellY, 1) => vec![(0..n).map(|i| (v[(i + 1) % n] - v[i]) * inv_h).collect()],
        (GridRole::CellY, _) => {
            let mut c0 = vec![0.0; n * n];
            let mut c1 = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let here = v[i * n + j];
                    c0[i * n + j] = (v[((i + 1) % n) * n + j] - here) * inv_h;
                    c1[i * n + j] = (v[i * n + (j + 1) % n] - here) * inv_h;
                }
            }
            vec![c0, c1]
        }
        (GridRole::DomainOmega, 1) => vec![(0..n).map(|i| (v[i + 1] - v[i]) * inv_h).collect()],
        (GridRole::DomainOmega, _) => {
            let s = n + 1;
            let mut c0 = vec![0.0; n * n];
            let mut c1 = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let here = v[i * s + j];
                    c0[i * n + j] = (v[(i + 1) * s + j] - here) * inv_h;
                    c1[i * n + j] = (v[i * s + j + 1] - here) * inv_h;
                }
            }
            vec![c0, c1]
        }
        (GridRole::DomainCells, _) => panic!("cell-sampled fields have no nodal gradient"),
    };
    VectorField {
        grid: out_grid,
        components,
    }
}

/// Periodic forward-difference gradient of a cell field.
pub fn gradient_periodic(u: &ScalarField) -> Result<VectorField> {
    if u.grid.role != GridRole::CellY {
        return Err(Error::Grid("periodic gradient needs a cell-Y grid".into()));
    }
    Ok(gradient(u))
}

/// Rectangle rule `h^d Σ u` over the cell representatives.
pub fn integrate(u: &ScalarField) -> f64 {
    let g = u.grid;
    let sum: f64 = match g.role {
        GridRole::DomainOmega => g.cell_indices().into_iter().map(|i| u.values[i]).sum(),
        _ => u.values.iter().sum(),
    };
    sum * g.cell_volume()
}

/// `u - ∫u`, so the result has zero mean over the unit measure.
pub fn zero_mean_project(u: &ScalarField) -> ScalarField {
    let mean = integrate(u);
    let mut out = u.map(|v| v - mean);
    // one correction pass removes the rounding left by the first subtraction
    let residual = integrate(&out);
    out.values.iter_mut().for_each(|v| *v -= residual);
    out
}

/// Weighted samples entering a modular: `weight · Σ B(|v|)`.
fn quadrature_samples(u: &ScalarField) -> Vec<f64> {
    match u.grid.role {
        GridRole::DomainOmega => u.grid.cell_indices().into_iter().map(|i| u.values[i]).collect(),
        _ => u.values.clone(),
    }
}

/// `∫ B(|u|)`.
pub fn modular(u: &ScalarField, nf: &NFunction) -> f64 {
    modular_samples(&quadrature_samples(u), u.grid.cell_volume(), nf)
}

pub fn modular_samples(values: &[f64], weight: f64, nf: &NFunction) -> f64 {
    weight * values.iter().map(|v| nf.value(v.abs())).sum::<f64>()
}

/// Luxemburg norm `inf { k > 0 : ∫ B(|u|/k) ≤ 1 }`.
pub fn luxemburg_norm(u: &ScalarField, nf: &NFunction) -> Result<f64> {
    luxemburg_norm_samples(&quadrature_samples(u), u.grid.cell_volume(), nf)
}

/// Luxemburg norm of equally weighted samples, e.g. on a tensor grid Ω×Y.
pub fn luxemburg_norm_samples(values: &[f64], weight: f64, nf: &NFunction) -> Result<f64> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite sample {v}")));
    }
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(0.0);
    }
    let m = |k: f64| weight * values.iter().map(|v| nf.value(v.abs() / k)).sum::<f64>();
    let (mut lo, mut hi) = (peak, peak);
    while m(hi) > 1.0 {
        hi *= 2.0;
    }
    while m(lo) < 1.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::Domain("Luxemburg bracket collapsed".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-15 * hi || mid <= lo || mid >= hi {
            break;
        }
        if m(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    debug_assert!(hi - lo <= 1e-10 * (1.0 + k));
    Ok(k)
}

/// `‖u‖_B + Σ_k ‖∂_k u‖_B` with forward-difference derivatives.
pub fn sobolev_norm(u: &ScalarField, nf: &NFunction) -> Result<f64> {
    let grad = gradient(u);
    let mut total = luxemburg_norm(u, nf)?;
    for k in 0..u.grid.dim() {
        total += luxemburg_norm(&grad.component(k), nf)?;
    }
    Ok(total)
}
