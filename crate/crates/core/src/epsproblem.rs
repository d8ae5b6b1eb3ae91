//! Oscillating problems `min ∫_Ω f(x/ε, ∇u)` with affine Dirichlet data,
//! the homogenized problem, and recovery sequences `u + ε v(x, x/ε)`.

use crate::cell::HomogenizedDensity;
use crate::energy::{CellDensity, LatticeEnergy, SampledIntegrand};
use crate::error::{Error, Result};
use crate::field::{gradient, luxemburg_norm, luxemburg_norm_samples, sobolev_norm, GridRole, PeriodicGrid, ScalarField};
use crate::integrand::Integrand;
use crate::nfunc::NFunction;
use crate::solver::{minimize, SolverSettings};

/// Fewest grid nodes allowed per period of the coefficient.
pub const MIN_NODES_PER_PERIOD: usize = 8;

/// Checks that `1/eps` is an integer `m` with `m | n` and at least
/// [`MIN_NODES_PER_PERIOD`] nodes per period; returns `m`.
pub fn admissible_periods(eps: f64, n: usize) -> Result<usize> {
    let bad = |reason: String| Err(Error::Epsilon { eps, reason });
    if !(eps > 0.0 && eps <= 1.0) {
        return bad("epsilon must lie in (0, 1]".into());
    }
    let inv = 1.0 / eps;
    let m = inv.round();
    if (inv - m).abs() > 1e-9 * m {
        return bad(format!("1/epsilon = {inv} is not an integer"));
    }
    let m = m as usize;
    if !n.is_multiple_of(m) {
        return bad(format!("1/epsilon = {m} does not divide the node count n = {n}"));
    }
    if n / m < MIN_NODES_PER_PERIOD {
        return bad(format!(
            "only {} nodes per period (n = {n}, 1/epsilon = {m}); at least {MIN_NODES_PER_PERIOD} required",
            n / m
        ));
    }
    Ok(m)
}

/// Fractional part of `x_i / ε` for node index `i` along one axis, computed
/// exactly as `(i mod q) / q` with `q = n ε` nodes per period.
#[inline]
pub fn fast_variable(i: usize, nodes_per_period: usize) -> f64 {
    (i % nodes_per_period) as f64 / nodes_per_period as f64
}

#[derive(Debug, Clone)]
pub struct OscillatingProblem {
    pub integrand: Integrand,
    pub grid: PeriodicGrid,
    periods: usize,
    pub xi: Vec<f64>,
    pub settings: SolverSettings,
}

impl OscillatingProblem {
    pub fn new(integrand: Integrand, grid: PeriodicGrid, eps: f64, xi: &[f64]) -> Result<Self> {
        if grid.role() != GridRole::DomainOmega {
            return Err(Error::Grid("oscillating problems live on a domain-Ω grid".into()));
        }
        if xi.len() != grid.dim() || xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("xi = {xi:?} must be finite with {} entries", grid.dim())));
        }
        let periods = admissible_periods(eps, grid.n())?;
        if integrand.coefficient.needs_even_grid() && !(grid.n() / periods).is_multiple_of(2) {
            return Err(Error::Epsilon {
                eps,
                reason: "phase interfaces need an even number of nodes per period".into(),
            });
        }
        Ok(Self {
            integrand,
            grid,
            periods,
            xi: xi.to_vec(),
            settings: SolverSettings::default(),
        })
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / self.periods as f64
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn nodes_per_period(&self) -> usize {
        self.grid.n() / self.periods
    }

    /// Affine boundary data `ξ·x` at every node.
    pub fn affine_data(&self) -> ScalarField {
        let xi = self.xi.clone();
        ScalarField::from_fn(self.grid, move |x| x.iter().zip(&xi).map(|(a, b)| a * b).sum())
    }

    fn lattice_energy(&self) -> LatticeEnergy<SampledIntegrand<'_>> {
        LatticeEnergy::new(
            self.grid,
            &[0.0, 0.0],
            SampledIntegrand {
                coefficients: oscillating_coefficients(&self.integrand, &self.grid, self.nodes_per_period()),
                potential: &self.integrand.potential,
            },
        )
    }

    /// Discrete energy `h^d Σ f(x_c/ε, (∇_h u)_c)` of any field on the grid.
    pub fn energy_of(&self, u: &ScalarField) -> Result<f64> {
        if u.grid() != &self.grid {
            return Err(Error::Shape("field does not live on the problem grid".into()));
        }
        Ok(self.lattice_energy().energy(u.values()))
    }
}

/// Coefficient per cell, sampled at the lower-left node reduced modulo the period.
fn oscillating_coefficients(integrand: &Integrand, grid: &PeriodicGrid, q: usize) -> Vec<f64> {
    let n = grid.n();
    let d = grid.dim();
    (0..grid.cell_count())
        .map(|c| {
            let (i, j) = if d == 1 { (c, 0) } else { (c / n, c % n) };
            let y = [fast_variable(i, q), fast_variable(j, q)];
            integrand.coefficient.eval(&y[..d])
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct EpsSolution {
    pub epsilon: f64,
    pub minimizer: ScalarField,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes the oscillating energy over fields equal to `ξ·x` on ∂Ω,
/// starting from the affine data.
pub fn solve_eps(p: &OscillatingProblem) -> EpsSolution {
    let energy = p.lattice_energy();
    let mut u = p.affine_data().into_values();
    let stats = minimize(&energy, &mut u, &p.settings);
    EpsSolution {
        epsilon: p.epsilon(),
        minimizer: ScalarField::new(p.grid, u).expect("solver keeps values finite"),
        energy: stats.value,
        residual: stats.residual,
        iterations: stats.iterations,
        converged: stats.converged,
    }
}

struct TableDensity<'a>(&'a HomogenizedDensity);

impl CellDensity for TableDensity<'_> {
    fn value_grad(&self, _cell: usize, xi: &[f64], grad: &mut [f64]) -> f64 {
        match self.0.value_grad(xi, grad) {
            Ok(v) => v,
            Err(_) => {
                grad.iter_mut().for_each(|g| *g = 0.0);
                f64::INFINITY
            }
        }
    }
}

/// Minimizes `∫_Ω f_hom(∇u)` with `f_hom` read from `table`, affine data `ξ·x`.
pub fn solve_homogenized(
    table: &HomogenizedDensity,
    grid: PeriodicGrid,
    xi: &[f64],
    settings: &SolverSettings,
) -> Result<EpsSolution> {
    if grid.role() != GridRole::DomainOmega {
        return Err(Error::Grid("the homogenized problem lives on a domain-Ω grid".into()));
    }
    if !table.is_complete() {
        return Err(Error::Domain("homogenized table has non-converged nodes".into()));
    }
    table.evaluate(xi)?;
    let energy = LatticeEnergy::new(grid, &[0.0, 0.0], TableDensity(table));
    let xi_owned = xi.to_vec();
    let mut u = ScalarField::from_fn(grid, move |x| x.iter().zip(&xi_owned).map(|(a, b)| a * b).sum()).into_values();
    let stats = minimize(&energy, &mut u, settings);
    Ok(EpsSolution {
        epsilon: 0.0,
        minimizer: ScalarField::new(grid, u)?,
        energy: stats.value,
        residual: stats.residual,
        iterations: stats.iterations,
        converged: stats.converged,
    })
}

/// One separable corrector term `φ(x) ψ(y)`: `φ` on the domain grid,
/// `ψ` a zero-mean field on a cell grid.
#[derive(Debug, Clone)]
pub struct SeparableTerm {
    pub macro_factor: ScalarField,
    pub micro_factor: ScalarField,
}

impl SeparableTerm {
    pub fn new(macro_factor: ScalarField, micro_factor: ScalarField) -> Result<Self> {
        if macro_factor.grid().role() != GridRole::DomainOmega {
            return Err(Error::Grid("macro factor must live on a domain-Ω grid".into()));
        }
        if micro_factor.grid().role() != GridRole::CellY {
            return Err(Error::Grid("micro factor must live on a cell-Y grid".into()));
        }
        if macro_factor.grid().dim() != micro_factor.grid().dim() {
            return Err(Error::Shape("macro and micro factors differ in dimension".into()));
        }
        Ok(Self {
            macro_factor,
            micro_factor,
        })
    }
}

fn micro_samples(grid: &PeriodicGrid, q: usize, psi: &ScalarField) -> Vec<f64> {
    let d = grid.dim();
    (0..grid.len())
        .map(|idx| {
            let m = grid.multi_index(idx);
            let y = [fast_variable(m[0], q), fast_variable(m[1], q)];
            psi.sample_periodic(&y[..d])
        })
        .collect()
}

/// `u(x) + ε Σ φ(x) ψ(x/ε mod 1)` at every node.
pub fn build_recovery(u: &ScalarField, terms: &[SeparableTerm], eps: f64) -> Result<ScalarField> {
    let grid = *u.grid();
    if grid.role() != GridRole::DomainOmega {
        return Err(Error::Grid("recovery fields live on a domain-Ω grid".into()));
    }
    let m = admissible_periods(eps, grid.n())?;
    let q = grid.n() / m;
    let eps = 1.0 / m as f64;
    let mut values = u.values().to_vec();
    for t in terms {
        if t.macro_factor.grid() != &grid {
            return Err(Error::Shape("macro factor grid differs from u".into()));
        }
        let psi = micro_samples(&grid, q, &t.micro_factor);
        for ((v, phi), s) in values.iter_mut().zip(t.macro_factor.values()).zip(psi) {
            *v += eps * phi * s;
        }
    }
    ScalarField::new(grid, values)
}

/// `δ(ε) = factor · ε^exponent`; `δ = 0` leaves the corrector uncut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSchedule {
    pub factor: f64,
    pub exponent: f64,
}

impl Default for DeltaSchedule {
    fn default() -> Self {
        Self {
            factor: 1.0,
            exponent: 0.5,
        }
    }
}

impl DeltaSchedule {
    pub fn delta(&self, eps: f64) -> f64 {
        self.factor * eps.powf(self.exponent)
    }
}

/// Boundary cutoff equal to 1 at distance `≥ δ` from ∂Ω and 0 on ∂Ω,
/// with profile `1 - (1 - s/δ)²` in the layer.
pub fn boundary_cutoff(grid: PeriodicGrid, delta: f64) -> ScalarField {
    let ramp = move |dist: f64| {
        if delta <= 0.0 || dist >= delta {
            1.0
        } else {
            let s = 1.0 - dist / delta;
            1.0 - s * s
        }
    };
    ScalarField::from_fn(grid, move |x| x.iter().map(|&t| ramp(t.min(1.0 - t))).product())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryMetrics {
    pub epsilon: f64,
    pub delta: f64,
    /// `‖u_{δ,ε} - u‖_{L^B(Ω)}`
    pub term1: f64,
    /// `‖u_{δ,ε} - u‖_{W¹L^B(Ω)}`
    pub term1_sobolev: f64,
    /// `|‖Du_{δ,ε}‖_{L^B(Ω)} - ‖Du + D_y u₁‖_{L^B(Ω×Y)}|`
    pub term2_plus: f64,
    /// `|‖Du_{δ,ε}‖_{L^B(Ω)} - ‖Du - D_y u₁‖_{L^B(Ω×Y)}|`
    pub term2_minus: f64,
    /// `term1 + term2_plus`; tends to 0 along a recovery sequence.
    pub c_delta_eps: f64,
    /// `term1_sobolev + term2_minus`, the distance taken at face value.
    pub c_delta_eps_literal: f64,
    pub energy_of_recovery: f64,
    /// `∬_{Ω×Y} f(y, Du + D_y u₁)`
    pub target_two_scale_energy: f64,
}

/// Norms, energies and two-scale target for the recovery field
/// `u + ε (φ_δ ⊗ ψ)(x, x/ε)`, where `φ_δ` is `φ` times the boundary cutoff.
pub fn recovery_metrics(
    integrand: &Integrand,
    u: &ScalarField,
    terms: &[SeparableTerm],
    eps: f64,
    schedule: &DeltaSchedule,
    nf: &NFunction,
) -> Result<RecoveryMetrics> {
    let grid = *u.grid();
    let m = admissible_periods(eps, grid.n())?;
    let eps = 1.0 / m as f64;
    let delta = schedule.delta(eps);
    let cutoff = boundary_cutoff(grid, delta);
    let cut_terms = terms
        .iter()
        .map(|t| SeparableTerm::new(t.macro_factor.mul(&cutoff)?, t.micro_factor.clone()))
        .collect::<Result<Vec<_>>>()?;
    let recovery = build_recovery(u, &cut_terms, eps)?;
    let diff = recovery.sub(u)?;
    let term1 = luxemburg_norm(&diff, nf)?;
    let term1_sobolev = sobolev_norm(&diff, nf)?;

    let d = grid.dim();
    let rec_grad = gradient(&recovery);
    let mut rec_norm = 0.0;
    for k in 0..d {
        rec_norm += luxemburg_norm(&rec_grad.component(k), nf)?;
    }

    // tensor samples of Du ± D_y u1 over (Ω cells) × (Y nodes)
    let ygrid = match terms.first() {
        Some(t) => *t.micro_factor.grid(),
        None => PeriodicGrid::cell(d, 64)?,
    };
    if terms.iter().any(|t| t.micro_factor.grid() != &ygrid) {
        return Err(Error::Shape("all micro factors must share one cell grid".into()));
    }
    let du = gradient(u);
    let cells = grid.cell_indices();
    let micro_grads: Vec<_> = terms.iter().map(|t| gradient(&t.micro_factor)).collect();
    let y_len = ygrid.len();
    let weight = grid.cell_volume() * ygrid.cell_volume();
    let mut plus: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut plus_norm = 0.0;
    let mut minus_norm = 0.0;
    let mut minus = vec![0.0; cells.len() * y_len];
    for k in 0..d {
        let mut pk = vec![0.0; cells.len() * y_len];
        for (ci, &node) in cells.iter().enumerate() {
            let base = du.components()[k][ci];
            for j in 0..y_len {
                let micro: f64 = terms
                    .iter()
                    .zip(&micro_grads)
                    .map(|(t, g)| t.macro_factor.values()[node] * g.components()[k][j])
                    .sum();
                pk[ci * y_len + j] = base + micro;
                minus[ci * y_len + j] = base - micro;
            }
        }
        plus_norm += luxemburg_norm_samples(&pk, weight, nf)?;
        minus_norm += luxemburg_norm_samples(&minus, weight, nf)?;
        plus.push(pk);
    }

    let a: Vec<f64> = (0..y_len).map(|j| integrand.coefficient.eval(&ygrid.coords(j)[..d])).collect();
    let mut target = 0.0;
    let mut xi = [0.0; 2];
    for ci in 0..cells.len() {
        for (j, aj) in a.iter().enumerate() {
            for k in 0..d {
                xi[k] = plus[k][ci * y_len + j];
            }
            target += aj * integrand.potential.value(&xi[..d]);
        }
    }
    let target = target * weight;

    let problem = OscillatingProblem::new(integrand.clone(), grid, eps, &vec![0.0; d])?;
    let energy_of_recovery = problem.energy_of(&recovery)?;
    let term2_plus = (rec_norm - plus_norm).abs();
    let term2_minus = (rec_norm - minus_norm).abs();
    Ok(RecoveryMetrics {
        epsilon: eps,
        delta,
        term1,
        term1_sobolev,
        term2_plus,
        term2_minus,
        c_delta_eps: term1 + term2_plus,
        c_delta_eps_literal: term1_sobolev + term2_minus,
        energy_of_recovery,
        target_two_scale_energy: target,
    })
}
