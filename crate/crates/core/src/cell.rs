//! The periodic cell problem
//! `f_hom(ξ) = inf { ∫_Y f(y, ξ + ∇u) dy : u Y-periodic }`
//! and tabulation of `f_hom` on a regular ξ-grid.

use rand::Rng;
use rayon::prelude::*;

use crate::energy::{LatticeEnergy, SampledIntegrand};
use crate::error::{Error, Result};
use crate::field::{integrate, zero_mean_project, GridRole, PeriodicGrid, ScalarField};
use crate::integrand::Integrand;
use crate::sampling::lin_space;
use crate::solver::{minimize, Objective, SolverSettings};

#[derive(Debug, Clone)]
pub struct CellProblem {
    pub integrand: Integrand,
    pub grid: PeriodicGrid,
    pub xi: Vec<f64>,
    pub settings: SolverSettings,
}

impl CellProblem {
    pub fn new(integrand: Integrand, grid: PeriodicGrid, xi: &[f64]) -> Result<Self> {
        if grid.role() != GridRole::CellY {
            return Err(Error::Grid("cell problems live on a cell-Y grid".into()));
        }
        if xi.len() != grid.dim() || xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("xi = {xi:?} must be finite with {} entries", grid.dim())));
        }
        if integrand.coefficient.needs_even_grid() && !grid.n().is_multiple_of(2) {
            return Err(Error::Grid(format!(
                "phase interfaces need an even node count, got n = {}",
                grid.n()
            )));
        }
        Ok(Self {
            integrand,
            grid,
            xi: xi.to_vec(),
            settings: SolverSettings::default(),
        })
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }

    fn lattice_energy(&self) -> LatticeEnergy<SampledIntegrand<'_>> {
        let d = self.grid.dim();
        let coefficients = (0..self.grid.len())
            .map(|i| self.integrand.coefficient.eval(&self.grid.coords(i)[..d]))
            .collect();
        LatticeEnergy::new(
            self.grid,
            &self.xi,
            SampledIntegrand {
                coefficients,
                potential: &self.integrand.potential,
            },
        )
    }
}

#[derive(Debug, Clone)]
pub struct CellSolution {
    /// Zero-mean minimizer.
    pub corrector: ScalarField,
    /// Discrete `f_hom(ξ)`.
    pub value: f64,
    pub gradient_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `h^d Σ f(y_i, ξ + (∇_h u)_i)`.
pub fn discrete_energy(p: &CellProblem, u: &ScalarField) -> Result<f64> {
    if u.grid() != &p.grid {
        return Err(Error::Shape("corrector does not live on the problem grid".into()));
    }
    Ok(p.lattice_energy().energy(u.values()))
}

/// Minimizes the discrete cell energy over zero-mean periodic fields,
/// starting from `u = 0`.
pub fn solve_cell(p: &CellProblem) -> CellSolution {
    let energy = p.lattice_energy();
    let mut u = vec![0.0; p.grid.len()];
    let stats = minimize(&energy, &mut u, &p.settings);
    let corrector = zero_mean_project(&ScalarField::new(p.grid, u).expect("solver keeps values finite"));
    CellSolution {
        value: energy.energy(corrector.values()),
        corrector,
        gradient_residual: stats.residual,
        iterations: stats.iterations,
        converged: stats.converged,
    }
}

/// Largest `|⟨∇E(u), d⟩|` over `count` random zero-mean directions `d`
/// with entries in `[-1, 1]`. Near zero at a minimizer.
pub fn minimizer_certificate<R: Rng>(p: &CellProblem, sol: &CellSolution, count: usize, rng: &mut R) -> f64 {
    let energy = p.lattice_energy();
    let mut g = vec![0.0; p.grid.len()];
    energy.value_grad(sol.corrector.values(), &mut g);
    (0..count)
        .map(|_| {
            let d = ScalarField::new(p.grid, (0..p.grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect())
                .expect("finite");
            let d = zero_mean_project(&d);
            let dd = d.values();
            g.iter().zip(dd).map(|(a, b)| a * b).sum::<f64>().abs()
        })
        .fold(0.0, f64::max)
}

/// `f_hom` sampled on a regular ξ-grid, interpolated multilinearly.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogenizedDensity {
    /// `(lo, hi, count)` per axis.
    pub axes: Vec<(f64, f64, usize)>,
    /// Row-major over the axes, last axis fastest.
    pub values: Vec<f64>,
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
}

impl HomogenizedDensity {
    /// Builds a table from values already computed (e.g. a closed form).
    pub fn from_values(axes: Vec<(f64, f64, usize)>, values: Vec<f64>) -> Result<Self> {
        let count: usize = axes.iter().map(|a| a.2).product();
        if axes.is_empty() || axes.len() > 2 || axes.iter().any(|a| a.2 < 2 || !(a.0 < a.1)) {
            return Err(Error::Domain("each table axis needs lo < hi and at least 2 nodes".into()));
        }
        if values.len() != count || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("table needs {count} finite values")));
        }
        Ok(Self {
            axes,
            values,
            iterations: vec![0; count],
            residuals: vec![0.0; count],
            converged: vec![true; count],
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn is_complete(&self) -> bool {
        self.converged.iter().all(|c| *c)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn axis_points(&self, k: usize) -> Vec<f64> {
        let (lo, hi, c) = self.axes[k];
        lin_space(lo, hi, c)
    }

    /// ξ at flat node index `idx`.
    pub fn node(&self, idx: usize) -> Vec<f64> {
        match self.dim() {
            1 => vec![self.axis_points(0)[idx]],
            _ => {
                let c1 = self.axes[1].2;
                vec![self.axis_points(0)[idx / c1], self.axis_points(1)[idx % c1]]
            }
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        match self.dim() {
            1 => self.values[i],
            _ => self.values[i * self.axes[1].2 + j],
        }
    }

    /// Locates `t` on axis `k`: lower node index and local weight in `[0,1]`.
    fn locate(&self, k: usize, t: f64) -> Option<(usize, f64, f64)> {
        let (lo, hi, c) = self.axes[k];
        let span = hi - lo;
        if !(t >= lo - 1e-12 * span && t <= hi + 1e-12 * span) {
            return None;
        }
        let h = span / (c - 1) as f64;
        let s = ((t - lo) / h).clamp(0.0, (c - 1) as f64);
        let i = (s.floor() as usize).min(c - 2);
        Some((i, s - i as f64, h))
    }

    /// Multilinear interpolation; outside the table range is an error.
    pub fn evaluate(&self, xi: &[f64]) -> Result<f64> {
        let mut g = [0.0; 2];
        self.value_grad(xi, &mut g[..xi.len()])
    }

    /// Interpolated value and the gradient of the interpolant.
    pub fn value_grad(&self, xi: &[f64], grad: &mut [f64]) -> Result<f64> {
        if xi.len() != self.dim() {
            return Err(Error::Shape(format!("xi has {} entries, table has {} axes", xi.len(), self.dim())));
        }
        let out = || Error::Extrapolation { xi: xi.to_vec() };
        match self.dim() {
            1 => {
                let (i, w, h) = self.locate(0, xi[0]).ok_or_else(out)?;
                let (a, b) = (self.at(i, 0), self.at(i + 1, 0));
                grad[0] = (b - a) / h;
                Ok((1.0 - w) * a + w * b)
            }
            _ => {
                let (i, wi, hi) = self.locate(0, xi[0]).ok_or_else(out)?;
                let (j, wj, hj) = self.locate(1, xi[1]).ok_or_else(out)?;
                let (v00, v01, v10, v11) = (self.at(i, j), self.at(i, j + 1), self.at(i + 1, j), self.at(i + 1, j + 1));
                let low = (1.0 - wj) * v00 + wj * v01;
                let high = (1.0 - wj) * v10 + wj * v11;
                grad[0] = (high - low) / hi;
                grad[1] = ((1.0 - wi) * (v01 - v00) + wi * (v11 - v10)) / hj;
                Ok((1.0 - wi) * low + wi * high)
            }
        }
    }
}

/// Solves one cell problem per ξ-node, in parallel.
pub fn tabulate_fhom(
    integrand: &Integrand,
    grid: PeriodicGrid,
    ranges: &[(f64, f64)],
    counts: &[usize],
    settings: &SolverSettings,
) -> Result<HomogenizedDensity> {
    if ranges.len() != grid.dim() || counts.len() != grid.dim() {
        return Err(Error::Shape("one xi range and count per dimension".into()));
    }
    let axes: Vec<(f64, f64, usize)> = ranges.iter().zip(counts).map(|(r, c)| (r.0, r.1, *c)).collect();
    let count: usize = counts.iter().product();
    let mut table = HomogenizedDensity::from_values(axes, vec![0.0; count])?;
    let problems = (0..count)
        .map(|i| CellProblem::new(integrand.clone(), grid, &table.node(i)).map(|p| p.with_settings(*settings)))
        .collect::<Result<Vec<_>>>()?;
    let solutions: Vec<CellSolution> = problems.par_iter().map(solve_cell).collect();
    for (i, s) in solutions.into_iter().enumerate() {
        table.values[i] = s.value;
        table.iterations[i] = s.iterations;
        table.residuals[i] = s.gradient_residual;
        table.converged[i] = s.converged;
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableConvexityReport {
    /// Smallest `(f(i-k) + f(i+k))/2 - f(i)` over axis-aligned triples.
    pub worst_slack: f64,
    pub worst_node: Vec<f64>,
    pub triples: usize,
}

/// Midpoint convexity of the tabulated values along every grid line.
pub fn fhom_convexity_check(table: &HomogenizedDensity) -> TableConvexityReport {
    let mut report = TableConvexityReport {
        worst_slack: f64::INFINITY,
        worst_node: Vec::new(),
        triples: 0,
    };
    let counts: Vec<usize> = table.axes.iter().map(|a| a.2).collect();
    let (c0, c1) = (counts[0], counts.get(1).copied().unwrap_or(1));
    let mut visit = |mid: (usize, usize), lo: (usize, usize), hi: (usize, usize)| {
        let slack = 0.5 * (table.at(lo.0, lo.1) + table.at(hi.0, hi.1)) - table.at(mid.0, mid.1);
        report.triples += 1;
        if slack < report.worst_slack {
            report.worst_slack = slack;
            report.worst_node = table.node(mid.0 * c1 + mid.1);
        }
    };
    for i in 0..c0 {
        for j in 0..c1 {
            for k in 1..=i.min(c0 - 1 - i) {
                visit((i, j), (i - k, j), (i + k, j));
            }
            if table.dim() == 2 {
                for k in 1..=j.min(c1 - 1 - j) {
                    visit((i, j), (i, j - k), (i, j + k));
                }
            }
        }
    }
    report
}

/// Mean of the corrector, which is zero by construction.
pub fn corrector_mean(sol: &CellSolution) -> f64 {
    integrate(&sol.corrector)
}
