//! Closed-form security and correctness parameters.

use std::fmt;

use crate::adversary::eps_tilde;
use crate::election::{ceil_log2, coin_count, ElectionConfig};
use crate::error::Result;

/// A probability clamped to `[0, 1]`, with the unclamped value kept.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Clamped {
    pub raw: f64,
    pub value: f64,
}

impl Clamped {
    pub fn new(raw: f64) -> Self {
        Clamped { raw, value: raw.clamp(0.0, 1.0) }
    }

    pub fn was_clamped(&self) -> bool {
        self.raw != self.value
    }
}

/// `exp(−2^M (ε²−4δ)² / (16Nε²))`, the no-abort probability bound for an
/// ε-far source. `m` may be fractional.
pub fn abort_bound(n: usize, eps: f64, delta: f64, m: f64) -> f64 {
    let gap = eps * eps - 4.0 * delta;
    (-(m.exp2()) * gap * gap / (16.0 * n as f64 * eps * eps)).exp()
}

/// `S = (1 − 2^{−Γ})^Σ`.
pub fn security(gamma: u32, sigma: u32) -> f64 {
    (1.0 - (-(gamma as f64)).exp2()).powi(sigma as i32)
}

/// `σ_H = [1 − ε(1−S)]^N`.
pub fn sigma_h(n: usize, eps: f64, s: f64) -> f64 {
    (1.0 - eps * (1.0 - s)).powi(n as i32)
}

/// `γ = (1+λ)[ε(1−η) + η]`.
pub fn gamma_threshold(eps: f64, eta: f64, lambda: f64) -> f64 {
    (1.0 + lambda) * (eps * (1.0 - eta) + eta)
}

/// `σ_D = S^{Nγ}`.
pub fn sigma_d(n: usize, gamma: f64, s: f64) -> f64 {
    s.powf(n as f64 * gamma)
}

/// `ζ = (1−η)^N ε̃ + (1 − (1−η)^N)`.
pub fn zeta(n: usize, eps: f64, eta: f64) -> f64 {
    let clean = (1.0 - eta).powi(n as i32);
    clean * eps_tilde(eps) + (1.0 - clean)
}

/// Probability that at least one of `digits` independent events of
/// probability `p` happens: `1 − (1−p)^digits`.
pub fn at_least_once(p: f64, digits: u32) -> f64 {
    1.0 - (1.0 - p).powi(digits as i32)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundSet {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub eta: f64,
    pub lambda: f64,
    pub candidates: u32,
    pub amplification_rounds: u32,
    pub s: f64,
    pub m_raw: f64,
    pub m_ceil: u32,
    /// Coins actually used (the configured override, else the ceiling).
    pub m_used: u32,
    pub abort_bound: Clamped,
    /// The bound one coin lower than the ceiling, i.e. at the rounded-down M.
    pub abort_bound_floor: Clamped,
    pub eps_tilde: f64,
    pub sigma_h: Clamped,
    pub gamma_threshold: Clamped,
    pub sigma_d: Clamped,
    pub zeta: Clamped,
    pub epsilon_star: Clamped,
    pub sigma_h_star: Clamped,
    pub zeta_star: Clamped,
    pub zeta_tilde: Clamped,
}

pub fn compute_bounds(config: &ElectionConfig) -> Result<BoundSet> {
    config.validate()?;
    let n = config.n_agents;
    let (eps, delta, eta) = (config.epsilon, config.delta, config.eta);
    let coins = coin_count(n, eps, delta, eta)?;
    let m_used = config.m()?;
    let s = security(config.gamma, config.sigma);
    let digits = ceil_log2(config.candidates);
    let gamma = gamma_threshold(eps, eta, config.lambda);
    let z = zeta(n, eps, eta);
    let eps_star = at_least_once(eps, digits);
    Ok(BoundSet {
        n,
        epsilon: eps,
        delta,
        eta,
        lambda: config.lambda,
        candidates: config.candidates,
        amplification_rounds: config.amplification_rounds,
        s,
        m_raw: coins.raw,
        m_ceil: coins.m,
        m_used,
        abort_bound: Clamped::new(abort_bound(n, eps, delta, m_used as f64)),
        abort_bound_floor: Clamped::new(abort_bound(n, eps, delta, coins.raw.floor())),
        eps_tilde: eps_tilde(eps),
        sigma_h: Clamped::new(sigma_h(n, eps, s)),
        gamma_threshold: Clamped::new(gamma),
        sigma_d: Clamped::new(sigma_d(n, gamma, s)),
        zeta: Clamped::new(z),
        epsilon_star: Clamped::new(eps_star),
        sigma_h_star: Clamped::new(sigma_h(n, eps_star, s)),
        zeta_star: Clamped::new(at_least_once(z, digits)),
        zeta_tilde: Clamped::new(z.powi(config.amplification_rounds as i32)),
    })
}

impl BoundSet {
    fn clamped(&self) -> [(&'static str, Clamped); 10] {
        [
            ("abort_bound", self.abort_bound),
            ("abort_bound_floor", self.abort_bound_floor),
            ("sigma_H", self.sigma_h),
            ("gamma", self.gamma_threshold),
            ("sigma_D", self.sigma_d),
            ("zeta", self.zeta),
            ("epsilon_star", self.epsilon_star),
            ("sigma_H_star", self.sigma_h_star),
            ("zeta_star", self.zeta_star),
            ("zeta_tilde", self.zeta_tilde),
        ]
    }

    pub fn any_clamped(&self) -> bool {
        self.clamped().iter().any(|(_, c)| c.was_clamped())
    }
}

impl fmt::Display for BoundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "parameters: N={} eps={} delta={} eta={} lambda={} K={} Q={}",
            self.n, self.epsilon, self.delta, self.eta, self.lambda, self.candidates, self.amplification_rounds
        )?;
        writeln!(f, "{:<22} {:.6}", "S", self.s)?;
        writeln!(f, "{:<22} {:.4}", "M (raw)", self.m_raw)?;
        writeln!(f, "{:<22} {}", "M (ceiling)", self.m_ceil)?;
        writeln!(f, "{:<22} {}", "M (rounded down)", self.m_raw.floor())?;
        writeln!(f, "{:<22} {}", "M (used)", self.m_used)?;
        writeln!(f, "{:<22} {:.6}", "eps_tilde", self.eps_tilde)?;
        for (name, c) in self.clamped() {
            let label = match name {
                "abort_bound" => format!("{name} @M={}", self.m_used),
                "abort_bound_floor" => format!("abort_bound @M={}", self.m_raw.floor()),
                _ => name.to_string(),
            };
            write!(f, "{label:<22} {:.6}", c.value)?;
            if c.was_clamped() {
                write!(f, "  (raw {:.6}, clamped)", c.raw)?;
            }
            writeln!(f)?;
        }
        write!(f, "fidelity convention: trace distance eps, |<psi|GHZ>|^2 = 1 - eps^2")
    }
}
