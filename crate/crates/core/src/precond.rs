//! Spectral inverse of the unit-coefficient lattice Laplacian, used as the
//! metric of the descent solver.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::field::{GridRole, PeriodicGrid};

enum Transform {
    /// Zero-mean periodic fields, DFT of length n.
    Periodic { fwd: Arc<dyn Fft<f64>>, inv: Arc<dyn Fft<f64>> },
    /// Interior nodes with zero boundary values, DST-I of length n-1 through a DFT of length 2n.
    Dirichlet { fft: Arc<dyn Fft<f64>> },
}

/// Applies `(h^{d-2} L)^{-1}` where `L` is the graph Laplacian of the grid.
pub(crate) struct LaplaceInverse {
    grid: PeriodicGrid,
    m: usize,
    eig: Vec<f64>,
    transform: Transform,
}

impl LaplaceInverse {
    pub(crate) fn new(grid: PeriodicGrid) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let (m, eig, transform) = match grid.role() {
            GridRole::CellY => (
                n,
                (0..n).map(|k| 4.0 * (PI * k as f64 / n as f64).sin().powi(2)).collect(),
                Transform::Periodic {
                    fwd: planner.plan_fft_forward(n),
                    inv: planner.plan_fft_inverse(n),
                },
            ),
            GridRole::DomainOmega => (
                n - 1,
                (1..n).map(|k| 4.0 * (PI * k as f64 / (2 * n) as f64).sin().powi(2)).collect(),
                Transform::Dirichlet {
                    fft: planner.plan_fft_forward(2 * n),
                },
            ),
            GridRole::DomainCells => panic!("the Laplacian acts on nodal grids"),
        };
        Self { grid, m, eig, transform }
    }

    fn node(&self, line: &[usize]) -> usize {
        let n = self.grid.n();
        match self.grid.role() {
            GridRole::CellY => line.iter().fold(0, |acc, &i| acc * n + i),
            _ => line.iter().fold(0, |acc, &i| acc * (n + 1) + i + 1),
        }
    }

    pub(crate) fn apply(&self, g: &[f64], out: &mut [f64]) {
        let d = self.grid.dim();
        let m = self.m;
        let total = m.pow(d as u32);
        let index = |flat: usize| -> [usize; 2] {
            if d == 1 {
                [flat, 0]
            } else {
                [flat / m, flat % m]
            }
        };
        let mut buf: Vec<Complex64> = (0..total)
            .map(|f| Complex64::new(g[self.node(&index(f)[..d])], 0.0))
            .collect();

        self.transform_all(&mut buf, false);
        for (f, v) in buf.iter_mut().enumerate() {
            let ix = index(f);
            let lam: f64 = ix[..d].iter().map(|&k| self.eig[k]).sum();
            *v = if lam > 0.0 { *v / lam } else { Complex64::new(0.0, 0.0) };
        }
        self.transform_all(&mut buf, true);

        let h = 1.0 / self.grid.n() as f64;
        let scale = h.powi(2 - d as i32)
            * match self.transform {
                Transform::Periodic { .. } => 1.0 / total as f64,
                Transform::Dirichlet { .. } => (2.0 / self.grid.n() as f64).powi(d as i32),
            };
        out.iter_mut().for_each(|o| *o = 0.0);
        for (f, v) in buf.iter().enumerate() {
            out[self.node(&index(f)[..d])] = v.re * scale;
        }
    }

    fn transform_all(&self, buf: &mut [Complex64], inverse: bool) {
        let m = self.m;
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let mut work = match self.transform {
            Transform::Dirichlet { .. } => vec![Complex64::new(0.0, 0.0); 2 * (m + 1)],
            Transform::Periodic { .. } => Vec::new(),
        };
        let mut run = |line: &mut [Complex64]| match &self.transform {
            Transform::Periodic { fwd, inv } => {
                if inverse {
                    inv.process(line)
                } else {
                    fwd.process(line)
                }
            }
            Transform::Dirichlet { fft } => dst1(fft.as_ref(), line, &mut work),
        };
        if self.grid.dim() == 1 {
            run(buf);
            return;
        }
        for row in buf.chunks_mut(m) {
            run(row);
        }
        for col in 0..m {
            for r in 0..m {
                line[r] = buf[r * m + col];
            }
            run(&mut line);
            for r in 0..m {
                buf[r * m + col] = line[r];
            }
        }
    }
}

/// In-place DST-I `y_k = Σ_j x_j sin(π j k / (N+1))` of the real parts of `line`.
fn dst1(fft: &dyn Fft<f64>, line: &mut [Complex64], work: &mut [Complex64]) {
    let big_n = line.len();
    let half = big_n + 1;
    work.iter_mut().for_each(|w| *w = Complex64::new(0.0, 0.0));
    for j in 0..big_n {
        work[j + 1] = Complex64::new(line[j].re, 0.0);
        work[2 * half - j - 1] = Complex64::new(-line[j].re, 0.0);
    }
    fft.process(work);
    for k in 0..big_n {
        line[k] = Complex64::new(-0.5 * work[k + 1].im, 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(grid: &PeriodicGrid, u: &[f64]) -> Vec<f64> {
        // h^{d-2} L u with L the graph Laplacian, boundary rows zeroed
        let n = grid.n();
        let d = grid.dim();
        let h = 1.0 / n as f64;
        let mut out = vec![0.0; u.len()];
        for idx in 0..grid.len() {
            if grid.role() == GridRole::DomainOmega && grid.is_boundary(idx) {
                continue;
            }
            let mi = grid.multi_index(idx);
            let mut acc = 0.0;
            for k in 0..d {
                for s in [-1i64, 1] {
                    let mut nb = mi;
                    let span = grid.per_axis() as i64;
                    nb[k] = (nb[k] as i64 + s).rem_euclid(span) as usize;
                    let j = nb[..d].iter().fold(0, |a, &i| a * grid.per_axis() + i);
                    acc += u[idx] - u[j];
                }
            }
            out[idx] = acc * h.powi(d as i32 - 2);
        }
        out
    }

    fn roundtrip(grid: PeriodicGrid) {
        let inv = LaplaceInverse::new(grid);
        let mut u: Vec<f64> = (0..grid.len()).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        match grid.role() {
            GridRole::CellY => {
                let mean = u.iter().sum::<f64>() / u.len() as f64;
                u.iter_mut().for_each(|v| *v -= mean);
            }
            _ => (0..grid.len()).filter(|&i| grid.is_boundary(i)).for_each(|i| u[i] = 0.0),
        }
        let g = laplacian(&grid, &u);
        let mut back = vec![0.0; u.len()];
        inv.apply(&g, &mut back);
        let err = u.iter().zip(&back).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-9, "{:?}: {err}", grid.role());
    }

    #[test]
    fn inverts_the_lattice_laplacian() {
        roundtrip(PeriodicGrid::cell(1, 12).unwrap());
        roundtrip(PeriodicGrid::cell(2, 8).unwrap());
        roundtrip(PeriodicGrid::domain(1, 10).unwrap());
        roundtrip(PeriodicGrid::domain(2, 9).unwrap());
    }
}
