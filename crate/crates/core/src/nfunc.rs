//! N-functions (Young functions) and their numerical calculus.
//!
//! An N-function `B` is stored together with its right derivative `b`, so
//! that `B(t) = ∫_0^t b`. The complementary function is computed by solving
//! the first-order condition `b(s) = t` of `sup_s { s t - B(s) }`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sampling::{adaptive_simpson, log_space};

/// Smallest sample point used when a range starts at zero.
pub const TAU_MIN: f64 = 1e-12;

/// Largest bracket exponent for the conjugate root search, `s ≤ 2^60`.
pub const MAX_BRACKET_EXPONENT: u32 = 60;

type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `scale · t^p`
    Power { p: f64, scale: f64 },
    /// `t^p · ln(1 + t)`
    PowerLog { p: f64 },
    /// `t² / 2`
    Quadratic,
    /// `e^t - t - 1`; fails Δ2 and is only meant for diagnostics.
    Exponential,
    Custom,
}

#[derive(Clone)]
enum Kind {
    Builtin(Family),
    Custom { eval: ScalarMap, density: ScalarMap },
}

/// A Young function `B` together with its density `b = B'`.
#[derive(Clone)]
pub struct NFunction {
    label: String,
    kind: Kind,
}

impl fmt::Debug for NFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NFunction")
            .field("label", &self.label)
            .field("family", &self.family())
            .finish()
    }
}

impl NFunction {
    /// `t^p`, `p > 1`.
    pub fn power(p: f64) -> Result<Self> {
        Self::scaled_power(p, 1.0)
    }

    /// `scale · t^p`, `p > 1`, `scale > 0`.
    pub fn scaled_power(p: f64, scale: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidNFunction(format!("power exponent must exceed 1, got {p}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidNFunction(format!("power scale must be positive, got {scale}")));
        }
        let label = if scale == 1.0 {
            format!("t^{p}")
        } else {
            format!("{scale}*t^{p}")
        };
        Ok(Self {
            label,
            kind: Kind::Builtin(Family::Power { p, scale }),
        })
    }

    /// `t^p ln(1+t)`, `p ≥ 1`.
    pub fn power_log(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidNFunction(format!("power-log exponent must be at least 1, got {p}")));
        }
        Ok(Self {
            label: format!("t^{p}*ln(1+t)"),
            kind: Kind::Builtin(Family::PowerLog { p }),
        })
    }

    pub fn quadratic() -> Self {
        Self {
            label: "t^2/2".into(),
            kind: Kind::Builtin(Family::Quadratic),
        }
    }

    pub fn exponential() -> Self {
        Self {
            label: "exp(t)-t-1".into(),
            kind: Kind::Builtin(Family::Exponential),
        }
    }

    /// A user-supplied N-function. Both `B` and `b` must be provided; the
    /// pair is validated on a log-spaced sample before it is accepted.
    pub fn custom<E, D>(label: impl Into<String>, eval: E, density: D) -> Result<Self>
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let nf = Self::custom_unchecked(label, eval, density);
        nf.validate()?;
        Ok(nf)
    }

    pub(crate) fn custom_unchecked<E, D>(label: impl Into<String>, eval: E, density: D) -> Self
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            kind: Kind::Custom {
                eval: Arc::new(eval),
                density: Arc::new(density),
            },
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn family(&self) -> Family {
        match &self.kind {
            Kind::Builtin(f) => *f,
            Kind::Custom { .. } => Family::Custom,
        }
    }

    /// `B(t)` without argument checks. Callers guarantee `t ≥ 0`.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Builtin(Family::Power { p, scale }) => scale * t.powf(*p),
            Kind::Builtin(Family::PowerLog { p }) => t.powf(*p) * t.ln_1p(),
            Kind::Builtin(Family::Quadratic) => 0.5 * t * t,
            Kind::Builtin(Family::Exponential) => t.exp_m1() - t,
            Kind::Builtin(Family::Custom) => unreachable!(),
            Kind::Custom { eval, .. } => eval(t),
        }
    }

    /// `b(t) = B'(t)` without argument checks.
    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Builtin(Family::Power { p, scale }) => scale * p * t.powf(p - 1.0),
            Kind::Builtin(Family::PowerLog { p }) => {
                if t == 0.0 {
                    0.0
                } else {
                    p * t.powf(p - 1.0) * t.ln_1p() + t.powf(*p) / (1.0 + t)
                }
            }
            Kind::Builtin(Family::Quadratic) => t,
            Kind::Builtin(Family::Exponential) => t.exp_m1(),
            Kind::Builtin(Family::Custom) => unreachable!(),
            Kind::Custom { density, .. } => density(t),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_arg(t)?;
        Ok(self.value(t))
    }

    pub fn density(&self, t: f64) -> Result<f64> {
        check_arg(t)?;
        Ok(self.derivative(t))
    }

    /// Smallest `s ≥ 0` with `b(s) ≥ t`: the maximizer in the conjugate sup.
    pub fn density_inverse(&self, t: f64) -> Result<f64> {
        check_arg(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0_f64;
        let mut k = 0;
        while self.derivative(hi) < t {
            if k == MAX_BRACKET_EXPONENT {
                return Err(Error::UnboundedConjugate {
                    t,
                    max_exponent: MAX_BRACKET_EXPONENT,
                });
            }
            hi *= 2.0;
            k += 1;
        }
        let mut lo = 0.0_f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.derivative(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// Complementary function `B̃(t) = sup_{s≥0} { s t - B(s) }`.
    pub fn conjugate(&self, t: f64) -> Result<f64> {
        check_arg(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let s = self.density_inverse(t)?;
        if matches!(self.kind, Kind::Custom { .. }) && !self.density_monotone_on(2.0 * s.max(1.0)) {
            return Ok(self.conjugate_golden(t, 2.0 * s.max(1.0)));
        }
        Ok((s * t - self.value(s)).max(0.0))
    }

    fn density_monotone_on(&self, hi: f64) -> bool {
        let mut prev = self.derivative(0.0);
        (1..=64).all(|i| {
            let b = self.derivative(hi * i as f64 / 64.0);
            let ok = b >= prev;
            prev = b;
            ok
        })
    }

    fn conjugate_golden(&self, t: f64, hi: f64) -> f64 {
        let g = |s: f64| s * t - self.value(s);
        let r = 0.5 * (5.0_f64.sqrt() - 1.0);
        let (mut a, mut b) = (0.0, hi);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        for _ in 0..200 {
            if g(c) > g(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - r * (b - a);
            d = a + r * (b - a);
        }
        g(0.5 * (a + b)).max(0.0)
    }

    /// The complementary N-function as a standalone `NFunction`; its density
    /// is the generalized inverse of `b`.
    pub fn conjugate_function(&self) -> NFunction {
        let primal = self.clone();
        let primal2 = self.clone();
        Self::custom_unchecked(
            format!("conj({})", self.label),
            move |t| primal.conjugate(t).unwrap_or(f64::INFINITY),
            move |t| primal2.density_inverse(t).unwrap_or(f64::INFINITY),
        )
    }

    /// Empirical Δ2 constant: sup of `B(2t)/B(t)` over a log-spaced sample
    /// of `[max(t0, τ_min), t_max]`.
    pub fn delta2_estimate(&self, t0: f64, t_max: f64) -> Result<Delta2Estimate> {
        if !(t0 >= 0.0 && t0 < t_max && t_max.is_finite()) {
            return Err(Error::Domain(format!("delta2 range needs 0 <= t0 < T, got [{t0}, {t_max}]")));
        }
        let lo = t0.max(TAU_MIN);
        let samples = log_space(lo, t_max, 256);
        let mut alpha = 0.0_f64;
        for &t in &samples {
            let bt = self.value(t);
            if !(bt > 0.0) {
                return Err(Error::InvalidNFunction(format!("B({t}) = {bt} is not positive")));
            }
            alpha = alpha.max(self.value(2.0 * t) / bt);
        }
        Ok(Delta2Estimate {
            alpha,
            t_lo: lo,
            t_hi: t_max,
            samples: samples.len(),
        })
    }

    /// Checks the defining properties on a log-spaced sample: positivity,
    /// midpoint convexity, the limits of `B(t)/t`, and `B = ∫ b`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidNFunction(format!("{}: {msg}", self.label)));
        if self.value(0.0) != 0.0 {
            return bad(format!("B(0) = {}", self.value(0.0)));
        }
        let ts = log_space(1e-6, 1e6, 61);
        for &t in &ts {
            let v = self.value(t);
            if !(v > 0.0) || v.is_nan() {
                return bad(format!("B({t}) = {v} is not positive"));
            }
        }
        for (i, &s) in ts.iter().enumerate().step_by(3) {
            for &t in ts.iter().skip(i + 1).step_by(5) {
                let mid = self.value(0.5 * (s + t));
                let avg = 0.5 * (self.value(s) + self.value(t));
                if mid.is_finite() && avg.is_finite() && mid > avg * (1.0 + 1e-12) + 1e-300 {
                    return bad(format!("midpoint convexity fails on ({s}, {t})"));
                }
            }
        }
        let ratio = |t: f64| self.value(t) / t;
        if !(ratio(1e-6) < ratio(1e-3)) {
            return bad("B(t)/t does not vanish at 0".into());
        }
        if !(ratio(1e6) > 2.0 * ratio(1.0)) {
            return bad("B(t)/t does not blow up at infinity".into());
        }
        for &t in &[1e-3, 0.1, 1.0, 10.0, 100.0] {
            let v = self.value(t);
            let q = adaptive_simpson(&|s| self.derivative(s), 0.0, t, 1e-12 * v.max(1e-300));
            if (q - v).abs() > 1e-8 * v {
                return bad(format!("B({t}) = {v} differs from integral of b = {q}"));
            }
        }
        Ok(())
    }

    /// `(B̃(b(t)), t·b(t), B(2t))`, which must be ordered increasingly.
    pub fn lemma21_check(&self, t: f64) -> Result<(f64, f64, f64)> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("chain check needs t > 0, got {t}")));
        }
        let b = self.derivative(t);
        Ok((self.conjugate(b)?, t * b, self.value(2.0 * t)))
    }
}

fn check_arg(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("N-function argument must be finite and >= 0, got {t}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta2Estimate {
    pub alpha: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub samples: usize,
}

impl Delta2Estimate {
    /// Δ2 holds empirically when the sampled ratio stays under `threshold`.
    pub fn certifies(&self, threshold: f64) -> bool {
        self.alpha.is_finite() && self.alpha <= threshold
    }
}

/// An N-function and its complementary function.
#[derive(Debug, Clone)]
pub struct ConjugatePair {
    pub primal: NFunction,
    pub dual: NFunction,
    pub tolerance: f64,
}

impl ConjugatePair {
    /// Pairs `B` with its numerically computed conjugate.
    pub fn new(primal: NFunction) -> Self {
        let dual = primal.conjugate_function();
        Self {
            primal,
            dual,
            tolerance: 1e-10,
        }
    }

    /// Pairs `B` with a known closed-form conjugate.
    pub fn with_dual(primal: NFunction, dual: NFunction) -> Self {
        Self {
            primal,
            dual,
            tolerance: 1e-10,
        }
    }

    /// `B(s) + B̃(t) - s t`; Young's inequality says this is nonnegative.
    pub fn young_slack(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.primal.eval(s)? + self.dual.eval(t)? - s * t)
    }

    pub fn lemma21_check(&self, t: f64) -> Result<(f64, f64, f64)> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("chain check needs t > 0, got {t}")));
        }
        let b = self.primal.density(t)?;
        Ok((self.dual.eval(b)?, t * b, self.primal.eval(2.0 * t)?))
    }
}

/// Lower and upper growth bounds `c·B'(|ξ|) - c' ≤ f(y, ξ) ≤ C(1 + B(|ξ|))`.
#[derive(Debug, Clone)]
pub struct GrowthConstants {
    pub c: f64,
    pub c_prime: f64,
    pub big_c: f64,
    pub lower: NFunction,
    pub upper: NFunction,
}

impl GrowthConstants {
    pub fn new(c: f64, c_prime: f64, big_c: f64, lower: NFunction, upper: NFunction) -> Result<Self> {
        if !(c > 0.0 && big_c > 0.0 && c_prime >= 0.0) {
            return Err(Error::Domain(format!(
                "growth constants need c > 0, C > 0, c' >= 0; got c={c}, c'={c_prime}, C={big_c}"
            )));
        }
        Ok(Self {
            c,
            c_prime,
            big_c,
            lower,
            upper,
        })
    }
}

/// `Bp(k1 t) ≤ B(t) ≤ Bp(k2 t)` on a log sample of `[t0, t_max]`.
pub fn equivalence_check(b: &NFunction, bp: &NFunction, k1: f64, k2: f64, t0: f64, t_max: f64) -> bool {
    assert!(k1 > 0.0 && k1 <= k2, "equivalence check needs 0 < k1 <= k2");
    let lo = t0.max(TAU_MIN);
    if lo >= t_max {
        return true;
    }
    log_space(lo, t_max, 200).into_iter().all(|t| {
        let v = b.value(t);
        let slack = 1e-12 * v;
        bp.value(k1 * t) <= v + slack && v <= bp.value(k2 * t) + slack
    })
}
