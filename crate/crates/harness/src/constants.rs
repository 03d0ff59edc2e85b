//! Constants assembled from the proof chains; derivations are in
//! `docs/constants.md`.

use sparse_poincare_core::weights::AInftyEstimate;

/// `p′ = p/(p−1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Strong-type bound of the weighted dyadic maximal operator by
/// interpolation between weak (1,1) and L∞, both with constant 1:
/// `∫(M^{d,w}f)^p w ≤ p2^p/(p−1) ∫|f|^p w`.
pub fn strong_maximal(p: f64) -> f64 {
    p * 2f64.powf(p) / (p - 1.0)
}

/// `η = 1 − Cρ^{−δ}`.
pub fn eta(c: f64, delta: f64, rho: f64) -> f64 {
    1.0 - c * rho.powf(-delta)
}

/// `∫|f − f_{Q₀}|^p w ≤ C ∫(M♯f)^p w` with
/// `C = (ρ2ⁿ)^p η^{−p} (p′2^{p′}/(p′−1))^{p/p′}`.
pub fn fefferman_stein(n: usize, p: f64, rho: f64, eta: f64) -> f64 {
    let pp = conjugate(p);
    (rho * (1u64 << n) as f64).powf(p) * eta.powf(-p) * strong_maximal(pp).powf(p / pp)
}

/// `‖M^d_α f‖_{L^q(w)} ≤ C ‖f‖_{L^p(v)}` with
/// `C = (a^{2p} K p2^p / (η(p−1)))^{1/p}`.
pub fn two_weight_maximal(p: f64, a: f64, k: f64, eta: f64) -> f64 {
    (a.powf(2.0 * p) * k * strong_maximal(p) / eta).powf(1.0 / p)
}

/// Sparse parameters derived from an A∞ estimate.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SparseParams {
    pub c: f64,
    pub delta: f64,
    pub rho: f64,
    pub eta: f64,
}

impl SparseParams {
    /// `ρ = max(ρ_min, (2C)^{1/δ})`, so that `η ≥ 1/2`.
    pub fn from_estimate(e: &AInftyEstimate, rho_min: f64) -> Self {
        let rho = rho_min.max((2.0 * e.c).powf(1.0 / e.delta));
        Self { c: e.c, delta: e.delta, rho, eta: eta(e.c, e.delta, rho) }
    }

    /// Fixed `ρ`; `None` when `η ≤ 0`.
    pub fn with_rho(e: &AInftyEstimate, rho: f64) -> Option<Self> {
        let eta = eta(e.c, e.delta, rho);
        (eta > 0.0).then_some(Self { c: e.c, delta: e.delta, rho, eta })
    }
}

/// The admissible parameters minimizing `cost` over the estimates, with its
/// value. A fixed `ρ` is used as is; otherwise `ρ_min` is raised as needed.
pub fn best_params(
    estimates: &[AInftyEstimate],
    rho: Option<f64>,
    rho_min: f64,
    cost: impl Fn(&SparseParams) -> f64,
) -> Option<(SparseParams, f64)> {
    estimates
        .iter()
        .filter_map(|e| match rho {
            Some(r) => SparseParams::with_rho(e, r),
            None => Some(SparseParams::from_estimate(e, rho_min)),
        })
        .map(|s| (s, cost(&s)))
        .filter(|(_, c)| c.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_weight_values() {
        // ρ = 2, η = 1/2, n = 1, p = 2: 16 · 4 · 8 = 512.
        assert!((fefferman_stein(1, 2.0, 2.0, 0.5) - 512.0).abs() < 1e-9);
        // a = 4, K = 1, η = 1/2, p = 2: (256 · 8 / 0.5)^{1/2} = 64.
        assert!((two_weight_maximal(2.0, 4.0, 1.0, 0.5) - 64.0).abs() < 1e-12);
        assert_eq!(strong_maximal(2.0), 8.0);
    }
}
