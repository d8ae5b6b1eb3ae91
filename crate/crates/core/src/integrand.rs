//! Periodic convex integrands `f(y, ξ) = a(y) · W(ξ)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::nfunc::{GrowthConstants, NFunction};
use crate::sampling::log_space;

/// Smoothing radius for Orlicz potentials, `B(√(δ²+|ξ|²)) - B(δ)`.
pub const ORLICZ_SMOOTHING: f64 = 1e-8;

/// Y-periodic coefficient `a(y)`, bounded below by a positive constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientField {
    Constant { a0: f64 },
    /// `alpha + beta · sin(2π y₁)`
    Sine { alpha: f64, beta: f64 },
    /// `a1` where `y_axis < 1/2`, `a2` elsewhere.
    Laminate { a1: f64, a2: f64, axis: usize },
    /// `a1` on the cells where `y₁ < 1/2` and `y₂ < 1/2` agree, `a2` elsewhere.
    Checkerboard { a1: f64, a2: f64 },
}

impl CoefficientField {
    pub fn constant(a0: f64) -> Result<Self> {
        Self::Constant { a0 }.validated()
    }

    pub fn sine(alpha: f64, beta: f64) -> Result<Self> {
        Self::Sine { alpha, beta }.validated()
    }

    pub fn laminate(a1: f64, a2: f64, axis: usize) -> Result<Self> {
        Self::Laminate { a1, a2, axis }.validated()
    }

    pub fn checkerboard(a1: f64, a2: f64) -> Result<Self> {
        Self::Checkerboard { a1, a2 }.validated()
    }

    fn validated(self) -> Result<Self> {
        let finite = match self {
            Self::Constant { a0 } => a0.is_finite(),
            Self::Sine { alpha, beta } => alpha.is_finite() && beta.is_finite(),
            Self::Laminate { a1, a2, axis } => a1.is_finite() && a2.is_finite() && axis < 2,
            Self::Checkerboard { a1, a2 } => a1.is_finite() && a2.is_finite(),
        };
        if !finite || !(self.lower_bound() > 0.0) {
            return Err(Error::Integrand(format!("coefficient {self:?} must be finite with positive infimum")));
        }
        Ok(self)
    }

    /// Essential infimum of `a`.
    pub fn lower_bound(&self) -> f64 {
        match *self {
            Self::Constant { a0 } => a0,
            Self::Sine { alpha, beta } => alpha - beta.abs(),
            Self::Laminate { a1, a2, .. } | Self::Checkerboard { a1, a2 } => a1.min(a2),
        }
    }

    pub fn upper_bound(&self) -> f64 {
        match *self {
            Self::Constant { a0 } => a0,
            Self::Sine { alpha, beta } => alpha + beta.abs(),
            Self::Laminate { a1, a2, .. } | Self::Checkerboard { a1, a2 } => a1.max(a2),
        }
    }

    pub fn is_discontinuous(&self) -> bool {
        matches!(self, Self::Laminate { .. } | Self::Checkerboard { .. })
    }

    /// Smallest spacing multiple that keeps phase interfaces on grid lines.
    pub fn needs_even_grid(&self) -> bool {
        self.is_discontinuous()
    }

    /// `a(y)`; `y` is reduced modulo 1 in every coordinate.
    #[inline]
    pub fn eval(&self, y: &[f64]) -> f64 {
        let frac = |t: f64| t.rem_euclid(1.0);
        match *self {
            Self::Constant { a0 } => a0,
            Self::Sine { alpha, beta } => alpha + beta * (2.0 * PI * frac(y[0])).sin(),
            Self::Laminate { a1, a2, axis } => {
                if frac(y[axis.min(y.len() - 1)]) < 0.5 {
                    a1
                } else {
                    a2
                }
            }
            Self::Checkerboard { a1, a2 } => {
                let first = frac(y[0]) < 0.5;
                let second = y.get(1).is_none_or(|t| frac(*t) < 0.5);
                if first == second {
                    a1
                } else {
                    a2
                }
            }
        }
    }
}

type CustomValue = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type CustomGrad = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// The ξ-dependence `W(ξ)`.
#[derive(Clone)]
pub enum Potential {
    /// `|ξ|²`
    Quadratic,
    /// `|ξ|^p / p`, `p ≥ 2`
    Power { p: f64 },
    /// `B(√(δ² + |ξ|²)) - B(δ)`
    Orlicz { nf: NFunction, delta: f64 },
    Custom {
        label: String,
        value: CustomValue,
        grad: CustomGrad,
    },
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Quadratic => write!(f, "Quadratic"),
            Self::Power { p } => write!(f, "Power {{ p: {p} }}"),
            Self::Orlicz { nf, delta } => write!(f, "Orlicz {{ nf: {}, delta: {delta} }}", nf.label()),
            Self::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

impl Potential {
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::Integrand(format!("power potential needs p >= 2, got {p}")));
        }
        Ok(Self::Power { p })
    }

    pub fn orlicz(nf: NFunction) -> Self {
        Self::Orlicz {
            nf,
            delta: ORLICZ_SMOOTHING,
        }
    }

    pub fn custom<V, G>(label: impl Into<String>, value: V, grad: G) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self::Custom {
            label: label.into(),
            value: Arc::new(value),
            grad: Arc::new(grad),
        }
    }

    /// Builtin potentials are radial, hence even in ξ.
    pub fn is_even(&self) -> bool {
        !matches!(self, Self::Custom { .. })
    }

    /// `(W(ξ), ∇W(ξ))`.
    #[inline]
    pub fn value_grad(&self, xi: &[f64], grad: &mut [f64]) -> f64 {
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        let (value, scale) = match self {
            Self::Quadratic => (r2, 2.0),
            Self::Power { p } => {
                if r2 == 0.0 {
                    (0.0, 0.0)
                } else if *p == 2.0 {
                    (0.5 * r2, 1.0)
                } else {
                    let r = r2.sqrt();
                    let rp2 = r.powf(p - 2.0);
                    (rp2 * r2 / p, rp2)
                }
            }
            Self::Orlicz { nf, delta } => {
                let s = (delta * delta + r2).sqrt();
                (nf.value(s) - nf.value(*delta), nf.derivative(s) / s)
            }
            Self::Custom { value, grad: g, .. } => {
                g(xi, grad);
                return value(xi);
            }
        };
        for (g, x) in grad.iter_mut().zip(xi) {
            *g = scale * x;
        }
        value
    }

    pub fn value(&self, xi: &[f64]) -> f64 {
        let mut g = [0.0; 2];
        self.value_grad(xi, &mut g[..xi.len()])
    }
}

/// `f(y, ξ) = a(y) · W(ξ)` with optional growth constants.
#[derive(Debug, Clone)]
pub struct Integrand {
    pub coefficient: CoefficientField,
    pub potential: Potential,
    pub growth: Option<GrowthConstants>,
}

impl Integrand {
    pub fn new(coefficient: CoefficientField, potential: Potential) -> Self {
        Self {
            coefficient,
            potential,
            growth: None,
        }
    }

    pub fn with_growth(mut self, growth: GrowthConstants) -> Self {
        self.growth = Some(growth);
        self
    }

    pub fn eval(&self, y: &[f64], xi: &[f64]) -> f64 {
        self.coefficient.eval(y) * self.potential.value(xi)
    }

    pub fn grad_xi(&self, y: &[f64], xi: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; xi.len()];
        let a = self.coefficient.eval(y);
        self.potential.value_grad(xi, &mut g);
        g.iter_mut().for_each(|v| *v *= a);
        g
    }

    pub fn is_even(&self) -> bool {
        self.potential.is_even()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthReport {
    /// Smallest `f - (c B'(|ξ|) - c')`.
    pub worst_lower_slack: f64,
    pub worst_lower_norm: f64,
    /// Smallest `C (1 + B(|ξ|)) - f`.
    pub worst_upper_slack: f64,
    pub worst_upper_norm: f64,
    pub samples: usize,
    pub discontinuous_coefficient: bool,
}

impl GrowthReport {
    pub fn holds(&self) -> bool {
        self.worst_lower_slack >= 0.0 && self.worst_upper_slack >= 0.0
    }
}

fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> [f64; 2] {
    if dim == 1 {
        return [if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0];
    }
    let th = rng.random::<f64>() * 2.0 * PI;
    [th.cos(), th.sin()]
}

/// Samples both sides of the growth bound; `|ξ|` runs log-spaced over
/// `[1e-3, 1e3]` with random directions and random `y`.
pub fn check_growth<R: Rng>(f: &Integrand, gc: &GrowthConstants, dim: usize, samples: usize, rng: &mut R) -> GrowthReport {
    assert!(samples >= 1);
    let mut report = GrowthReport {
        worst_lower_slack: f64::INFINITY,
        worst_lower_norm: 0.0,
        worst_upper_slack: f64::INFINITY,
        worst_upper_norm: 0.0,
        samples,
        discontinuous_coefficient: f.coefficient.is_discontinuous(),
    };
    for r in log_space(1e-3, 1e3, samples) {
        let y = [rng.random::<f64>(), rng.random::<f64>()];
        let dir = random_unit(rng, dim);
        let xi = [r * dir[0], r * dir[1]];
        let v = f.eval(&y[..dim], &xi[..dim]);
        let lower = v - (gc.c * gc.lower.value(r) - gc.c_prime);
        let upper = gc.big_c * (1.0 + gc.upper.value(r)) - v;
        if lower < report.worst_lower_slack {
            report.worst_lower_slack = lower;
            report.worst_lower_norm = r;
        }
        if upper < report.worst_upper_slack {
            report.worst_upper_slack = upper;
            report.worst_upper_norm = r;
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityReport {
    /// Smallest `((f(ξ)+f(η))/2 - f((ξ+η)/2)) / (1 + |(f(ξ)+f(η))/2|)`.
    pub worst_slack: f64,
    pub samples: usize,
}

/// Midpoint convexity in ξ on random `(y, ξ, η)` with components in `[-10, 10]`.
pub fn check_convexity<R: Rng>(f: &Integrand, dim: usize, samples: usize, rng: &mut R) -> ConvexityReport {
    assert!(samples >= 1);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let y = [rng.random::<f64>(), rng.random::<f64>()];
        let xi = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
        let eta = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
        let mid = [0.5 * (xi[0] + eta[0]), 0.5 * (xi[1] + eta[1])];
        let avg = 0.5 * (f.eval(&y[..dim], &xi[..dim]) + f.eval(&y[..dim], &eta[..dim]));
        let slack = (avg - f.eval(&y[..dim], &mid[..dim])) / (1.0 + avg.abs());
        worst = worst.min(slack);
    }
    ConvexityReport {
        worst_slack: worst,
        samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quad(c: CoefficientField) -> Integrand {
        Integrand::new(c, Potential::Quadratic)
    }

    #[test]
    fn eval_examples() {
        let f = quad(CoefficientField::constant(1.0).unwrap());
        assert_eq!(f.eval(&[0.3], &[3.0]), 9.0);
        let lam = quad(CoefficientField::laminate(1.0, 4.0, 0).unwrap());
        assert_eq!(lam.eval(&[0.75], &[1.0]), 4.0);
        assert_eq!(lam.eval(&[0.25], &[1.0]), 1.0);
        let sine = quad(CoefficientField::sine(2.0, 1.0).unwrap());
        assert!((sine.eval(&[0.25], &[2.0]) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn coefficient_validation() {
        assert!(CoefficientField::constant(0.0).is_err());
        assert!(CoefficientField::sine(1.0, 1.0).is_err());
        assert!(CoefficientField::sine(1.0, -0.5).is_ok());
        assert!(CoefficientField::laminate(1.0, -4.0, 0).is_err());
        assert!(CoefficientField::laminate(1.0, 4.0, 2).is_err());
        assert!(CoefficientField::checkerboard(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn checkerboard_phases() {
        let c = CoefficientField::checkerboard(1.0, 4.0).unwrap();
        assert_eq!(c.eval(&[0.25, 0.25]), 1.0);
        assert_eq!(c.eval(&[0.75, 0.75]), 1.0);
        assert_eq!(c.eval(&[0.25, 0.75]), 4.0);
        assert_eq!(c.eval(&[0.75, 0.25]), 4.0);
        assert_eq!(c.eval(&[0.5, 0.0]), 4.0);
    }

    #[test]
    fn grad_examples() {
        let one = CoefficientField::constant(1.0).unwrap();
        assert_eq!(quad(one).grad_xi(&[0.1], &[3.0]), vec![6.0]);
        let cubic = Integrand::new(one, Potential::power(3.0).unwrap());
        assert!((cubic.grad_xi(&[0.1], &[2.0])[0] - 4.0).abs() < 1e-14);
        for pot in [
            Potential::Quadratic,
            Potential::power(3.0).unwrap(),
            Potential::power(2.0).unwrap(),
            Potential::orlicz(NFunction::power_log(2.0).unwrap()),
        ] {
            let f = Integrand::new(one, pot);
            assert_eq!(f.eval(&[0.2, 0.4], &[0.0, 0.0]), 0.0);
            assert_eq!(f.grad_xi(&[0.2, 0.4], &[0.0, 0.0]), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn power_potential_needs_p_at_least_two() {
        assert!(Potential::power(1.5).is_err());
    }

    #[test]
    fn growth_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p2 = NFunction::power(2.0).unwrap();
        let f = quad(CoefficientField::sine(2.0, 1.0).unwrap());
        let gc = GrowthConstants::new(1.0, 0.0, 3.0, p2.clone(), p2.clone()).unwrap();
        let rep = check_growth(&f, &gc, 1, 200, &mut rng);
        assert!(rep.holds(), "{rep:?}");

        let cubic = Integrand::new(CoefficientField::constant(1.0).unwrap(), Potential::power(3.0).unwrap());
        let gc = GrowthConstants::new(0.1, 0.0, 10.0, p2.clone(), p2.clone()).unwrap();
        let rep = check_growth(&cubic, &gc, 2, 200, &mut rng);
        assert!(rep.worst_upper_slack < 0.0 && rep.worst_upper_norm > 29.0);

        let zero = Integrand::new(
            CoefficientField::constant(1.0).unwrap(),
            Potential::custom("zero", |_| 0.0, |_, g| g.iter_mut().for_each(|v| *v = 0.0)),
        );
        let gc = GrowthConstants::new(1.0, 1.0, 1.0, p2.clone(), p2).unwrap();
        let rep = check_growth(&zero, &gc, 1, 200, &mut rng);
        assert!(rep.worst_lower_slack < 0.0 && rep.worst_lower_norm > 1.0);
        assert!(!rep.discontinuous_coefficient);
    }

    #[test]
    fn convexity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lam = CoefficientField::laminate(1.0, 4.0, 0).unwrap();
        assert!(check_convexity(&quad(lam), 2, 500, &mut rng).worst_slack >= -1e-12);
        let cubic = Integrand::new(lam, Potential::power(3.0).unwrap());
        assert!(check_convexity(&cubic, 1, 500, &mut rng).worst_slack >= -1e-12);
        let concave = Integrand::new(
            lam,
            Potential::custom(
                "-|xi|^2",
                |x| -x.iter().map(|v| v * v).sum::<f64>(),
                |x, g| g.iter_mut().zip(x).for_each(|(g, x)| *g = -2.0 * x),
            ),
        );
        assert!(check_convexity(&concave, 1, 50, &mut rng).worst_slack < 0.0);
    }

    #[test]
    fn orlicz_potential_matches_nfunction_away_from_zero() {
        let nf = NFunction::power_log(2.0).unwrap();
        let pot = Potential::orlicz(nf.clone());
        let v = pot.value(&[0.6, 0.8]);
        assert!((v - nf.value(1.0)).abs() < 1e-12);
    }
}
