//! Gradient descent with Barzilai–Borwein steps and a nonmonotone
//! sufficient-decrease safeguard, optionally in a preconditioned metric.

/// A smooth objective on `R^N` with an optional linear constraint realized
/// as a projection of the gradient.
pub trait Objective {
    fn len(&self) -> usize;

    /// Returns the value at `x` and writes the gradient into `grad`.
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;

    /// Projects a gradient onto the admissible directions.
    fn project(&self, _grad: &mut [f64]) {}

    /// Maps a projected gradient to a descent direction `P⁻¹ grad`, with `P`
    /// symmetric positive definite on the admissible directions.
    fn precondition(&self, grad: &[f64], out: &mut [f64]) {
        out.copy_from_slice(grad);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Stop when `max|∇E| ≤ tol · (1 + |E|)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Window of the nonmonotone reference value.
    pub memory: usize,
    /// Sufficient-decrease constant.
    pub armijo: f64,
    /// Take steps along `P⁻¹∇E` instead of `∇E`.
    pub precondition: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 100_000,
            memory: 10,
            armijo: 1e-4,
            precondition: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub value: f64,
    /// `max|∇E|` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `obj` starting from `x`, which is overwritten with the result.
pub fn minimize<O: Objective + ?Sized>(obj: &O, x: &mut [f64], settings: &SolverSettings) -> SolveStats {
    let n = obj.len();
    assert_eq!(x.len(), n);
    let mut g = vec![0.0; n];
    let mut f = obj.value_grad(x, &mut g);
    obj.project(&mut g);

    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let direction = |g: &[f64], dir: &mut [f64]| {
        if settings.precondition {
            obj.precondition(g, dir);
            obj.project(dir);
        } else {
            dir.copy_from_slice(g);
        }
    };
    direction(&g, &mut dir);
    let mut history = std::collections::VecDeque::with_capacity(settings.memory);
    history.push_back(f);

    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    let mut residual = max_abs(&g);
    let dir_max = max_abs(&dir);
    let mut step = if dir_max > 0.0 { 1.0 / dir_max } else { 1.0 };

    for iter in 0..settings.max_iter {
        if residual <= settings.tol * (1.0 + f.abs()) {
            return SolveStats {
                value: f,
                residual,
                iterations: iter,
                converged: true,
            };
        }
        let reference = history.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let slope: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let noise = 8.0 * f64::EPSILON * (1.0 + reference.abs());

        let mut lambda = step;
        let mut f_new;
        let mut accepted = false;
        let mut tries = 0;
        loop {
            for i in 0..n {
                x_new[i] = x[i] - lambda * dir[i];
            }
            f_new = obj.value_grad(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= reference - settings.armijo * lambda * slope + noise {
                accepted = true;
                break;
            }
            tries += 1;
            if tries > 60 {
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return SolveStats {
                value: f,
                residual,
                iterations: iter,
                converged: false,
            };
        }
        obj.project(&mut g_new);

        // BB1 in the metric P: s = -λ P⁻¹g, so sᵀPs = λ² gᵀP⁻¹g
        let mut sy = 0.0;
        for i in 0..n {
            sy += (x_new[i] - x[i]) * (g_new[i] - g[i]);
        }
        let ss = lambda * lambda * slope;
        step = if sy > 0.0 { (ss / sy).clamp(1e-20, 1e20) } else { 1e3 * lambda };

        x.copy_from_slice(&x_new);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
        residual = max_abs(&g);
        direction(&g, &mut dir);
        if history.len() == settings.memory.max(1) {
            history.pop_front();
        }
        history.push_back(f);
    }
    SolveStats {
        value: f,
        residual,
        iterations: settings.max_iter,
        converged: residual <= settings.tol * (1.0 + f.abs()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic {
        diag: Vec<f64>,
        target: Vec<f64>,
    }

    impl Objective for Quadratic {
        fn len(&self) -> usize {
            self.diag.len()
        }
        fn value_grad(&self, x: &[f64], g: &mut [f64]) -> f64 {
            let mut f = 0.0;
            for i in 0..x.len() {
                let r = x[i] - self.target[i];
                f += 0.5 * self.diag[i] * r * r;
                g[i] = self.diag[i] * r;
            }
            f
        }
    }

    #[test]
    fn ill_conditioned_quadratic() {
        let n = 200;
        let q = Quadratic {
            diag: (0..n).map(|i| 1.0 + 1e4 * i as f64 / n as f64).collect(),
            target: (0..n).map(|i| (i as f64).sin()).collect(),
        };
        let mut x = vec![0.0; n];
        let stats = minimize(&q, &mut x, &SolverSettings::default());
        assert!(stats.converged, "{stats:?}");
        for i in 0..n {
            assert!((x[i] - q.target[i]).abs() < 1e-8);
        }
    }

    struct Rosenbrock;

    impl Objective for Rosenbrock {
        fn len(&self) -> usize {
            2
        }
        fn value_grad(&self, x: &[f64], g: &mut [f64]) -> f64 {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        }
    }

    #[test]
    fn nonconvex_valley_still_converges() {
        let mut x = vec![-1.2, 1.0];
        let stats = minimize(&Rosenbrock, &mut x, &SolverSettings { tol: 1e-10, ..Default::default() });
        assert!(stats.converged);
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let mut x = vec![-1.2, 1.0];
        let stats = minimize(&Rosenbrock, &mut x, &SolverSettings { max_iter: 3, ..Default::default() });
        assert!(!stats.converged);
        assert_eq!(stats.iterations, 3);
    }
}
