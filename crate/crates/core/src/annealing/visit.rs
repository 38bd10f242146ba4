//! Tsallis visiting distribution, cooling schedule and generalized
//! Metropolis acceptance.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use super::config::AnnealConfig;
use crate::scalar::Real;

/// `T_v(k) = T₀ (2^{q_v−1} − 1) / ((1 + k)^{q_v−1} − 1)` for `k ≥ 1`.
pub fn visiting_temperature(k: usize, cfg: &AnnealConfig) -> f64 {
    let k = k.max(1) as f64;
    let e = cfg.visit - 1.0;
    cfg.initial_temp * (2f64.powf(e) - 1.0) / ((1.0 + k).powf(e) - 1.0)
}

/// Acceptance temperature paired with step `k`: `T_v(k) / k`.
pub fn acceptance_temperature(k: usize, t_visit: f64) -> f64 {
    t_visit / k.max(1) as f64
}

/// `ln|Γ(x)|` for any non-integer-pole `x`, via reflection for `x ≤ 0`.
fn ln_abs_gamma(x: f64) -> f64 {
    if x > 0.0 {
        ln_gamma(x)
    } else {
        std::f64::consts::PI.ln() - (std::f64::consts::PI * x).sin().abs().ln() - ln_gamma(1.0 - x)
    }
}

/// Heavy-tailed displacement sampler for a fixed `q_v`.
#[derive(Clone, Debug)]
pub struct VisitingDistribution {
    q: f64,
    /// `(q_v − 1)(ln f₆ − ln f₄′)`; the temperature-independent part of the log width.
    log_width_offset: f64,
    tail_limit: f64,
}

impl VisitingDistribution {
    pub fn new(q: f64, tail_limit: f64) -> Self {
        use std::f64::consts::{LN_2, PI};
        let qm1 = q - 1.0;
        let ln_f2 = (4.0 - q) * qm1.ln();
        let ln_f3 = (2.0 - q) * LN_2 / qm1;
        let ln_f4p = 0.5 * PI.ln() + ln_f2 - ln_f3 - (3.0 - q).ln();
        let f5 = 1.0 / qm1 - 0.5;
        let d1 = 2.0 - f5;
        let w = 1.0 - f5;
        let sin = (PI * w).sin();
        // πw / sin(πw) → 1 as w → 0
        let ratio = if w.abs() < 1e-12 { 1.0 } else { (PI * w / sin).abs() };
        let ln_f6 = ratio.ln() - ln_abs_gamma(d1);
        Self { q, log_width_offset: qm1 * (ln_f6 - ln_f4p), tail_limit }
    }

    pub fn from_config(cfg: &AnnealConfig) -> Self {
        Self::new(cfg.visit, cfg.tail_limit)
    }

    /// Gaussian scale of the numerator at temperature `t`.
    fn width(&self, t: f64) -> f64 {
        ((t.ln() - self.log_width_offset) / (3.0 - self.q)).exp()
    }

    /// One displacement: a scaled Gaussian divided by a power of an independent Gaussian magnitude.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R, t: f64) -> f64 {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let den = ((self.q - 1.0) * y.abs().ln() / (3.0 - self.q)).exp();
        let v = x * self.width(t) / den;
        if v.is_nan() {
            0.0
        } else {
            v.clamp(-self.tail_limit, self.tail_limit)
        }
    }

    pub fn sample<T: Real, R: Rng + ?Sized>(&self, rng: &mut R, t: f64, dim: usize) -> Vec<T> {
        (0..dim).map(|_| T::lit(self.sample_one(rng, t))).collect()
    }
}

/// Draws `dim` independent displacements with the default tail cap.
pub fn visit_sample<T: Real, R: Rng + ?Sized>(rng: &mut R, t_visit: f64, q_v: f64, dim: usize) -> Vec<T> {
    VisitingDistribution::new(q_v, AnnealConfig::default().tail_limit).sample(rng, t_visit, dim)
}

/// Probability of accepting an uphill move of size `delta`.
pub fn acceptance_probability(delta: f64, t_accept: f64, q_a: f64) -> f64 {
    if delta <= 0.0 {
        return 1.0;
    }
    if !delta.is_finite() {
        return 0.0;
    }
    if q_a == 1.0 {
        return (-delta / t_accept).exp();
    }
    let bracket = 1.0 + (q_a - 1.0) * delta / t_accept;
    if bracket <= 0.0 {
        0.0
    } else {
        (bracket.ln() / (1.0 - q_a)).exp().min(1.0)
    }
}

pub fn accept<R: Rng + ?Sized>(rng: &mut R, delta: f64, t_accept: f64, q_a: f64) -> bool {
    if delta <= 0.0 {
        return true;
    }
    let p = acceptance_probability(delta, t_accept, q_a);
    rng.random::<f64>() < p
}

/// Translates `x` into `[lo, hi]` by folding modulo the span.
pub fn wrap_into<T: Real>(x: T, lo: T, hi: T) -> T {
    if x >= lo && x <= hi {
        return x;
    }
    let span = hi - lo;
    let mut r = (x - lo) % span;
    if r < T::zero() {
        r += span;
    }
    let y = lo + r;
    if y > hi {
        hi
    } else if y < lo {
        lo
    } else {
        y
    }
}
