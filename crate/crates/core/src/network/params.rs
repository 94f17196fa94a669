use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Recirculation length of every optical line, in units of T.
pub const CYCLE_STEPS: u64 = 12;

/// Source modules attempt a distillation once per this many steps.
pub const SOURCE_PERIOD: u64 = 3;

/// How the source attempt times of different lines relate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourcePhasing {
    /// Line `i` attempts at steps `t ≡ 2i (mod 3)`.
    #[default]
    Staggered,
    /// Every source attempts at `t ≡ 0 (mod 3)`.
    InPhase,
}

impl SourcePhasing {
    pub fn offset(self, line: usize) -> u64 {
        match self {
            // Runs against the shunt direction: a shunt photon advances one
            // line per step, so `i mod 3` would put every source photon on the
            // same ring slots.
            Self::Staggered => (2 * line as u64) % SOURCE_PERIOD,
            Self::InPhase => 0,
        }
    }
}

/// Simulation parameters. `p_s` and `p_L` follow from `N` and `B` unless an
/// explicit override is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub n_lines: usize,
    pub bias: f64,
    pub p_m: f64,
    pub t_max: u64,
    pub seed: u64,
    pub source_phasing: SourcePhasing,
    pub p_s_override: Option<f64>,
    pub p_loss_override: Option<f64>,
}

impl SimParams {
    /// `t_max` defaults to `300 N`.
    pub fn new(n_lines: usize, bias: f64) -> Result<Self> {
        let p = Self {
            n_lines,
            bias,
            p_m: 0.0,
            t_max: 300 * n_lines as u64,
            seed: 0,
            source_phasing: SourcePhasing::Staggered,
            p_s_override: None,
            p_loss_override: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_t_max(mut self, t_max: u64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_p_m(mut self, p_m: f64) -> Result<Self> {
        self.p_m = p_m;
        self.validate()?;
        Ok(self)
    }

    pub fn with_phasing(mut self, phasing: SourcePhasing) -> Self {
        self.source_phasing = phasing;
        self
    }

    /// Overrides the source success probability (normally `1/(3N)`).
    pub fn with_p_s(mut self, p_s: f64) -> Result<Self> {
        self.p_s_override = Some(p_s);
        self.validate()?;
        Ok(self)
    }

    /// Overrides the per-component loss probability (normally `p_s/B`).
    pub fn with_p_loss(mut self, p_loss: f64) -> Result<Self> {
        self.p_loss_override = Some(p_loss);
        self.validate()?;
        Ok(self)
    }

    pub fn p_s(&self) -> f64 {
        self.p_s_override
            .unwrap_or(1.0 / (SOURCE_PERIOD as f64 * self.n_lines as f64))
    }

    pub fn p_loss(&self) -> f64 {
        self.p_loss_override.unwrap_or(self.p_s() / self.bias)
    }

    pub fn has_overrides(&self) -> bool {
        self.p_s_override.is_some() || self.p_loss_override.is_some()
    }

    /// Ring slots available to photons: `9N/2`.
    pub fn capacity(&self) -> usize {
        9 * self.n_lines / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_lines < 2 || !self.n_lines.is_multiple_of(2) {
            return Err(invalid(
                "n_lines",
                format!("must be even and >= 2, got {}", self.n_lines),
            ));
        }
        if !self.bias.is_finite() || self.bias <= 0.0 {
            return Err(invalid(
                "bias",
                format!("must be finite and > 0, got {}", self.bias),
            ));
        }
        for (name, p) in [
            ("p_m", self.p_m),
            ("p_s", self.p_s()),
            ("p_loss", self.p_loss()),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(name, format!("must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Probability that a photon is lost somewhere in one full recirculation.
pub fn per_cycle_loss(p_loss: f64) -> f64 {
    -(CYCLE_STEPS as f64 * (-p_loss).ln_1p()).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn derived_probabilities() {
        let p = SimParams::new(88, 32.0).unwrap();
        assert_abs_diff_eq!(p.p_s(), 1.0 / 264.0);
        assert_abs_diff_eq!(p.p_loss(), 1.0 / (3.0 * 32.0 * 88.0));
        assert_eq!(p.capacity(), 396);
        assert_eq!(p.t_max, 26_400);
        assert!(!p.has_overrides());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SimParams::new(7, 32.0).is_err());
        assert!(SimParams::new(0, 32.0).is_err());
        assert!(SimParams::new(8, 0.0).is_err());
        assert!(SimParams::new(8, f64::INFINITY).is_err());
        assert!(SimParams::new(8, 1.0).unwrap().with_p_m(1.5).is_err());
        assert!(SimParams::new(8, 1.0).unwrap().with_p_loss(-0.1).is_err());
        // p_s/B > 1
        assert!(SimParams::new(2, 0.1).is_err());
    }

    #[test]
    fn cycle_loss() {
        assert_eq!(per_cycle_loss(0.0), 0.0);
        // 1 - 0.999^12
        assert_abs_diff_eq!(
            per_cycle_loss(1e-3),
            0.011_934_219_505_791_08,
            epsilon = 1e-15
        );
        for p in [1e-5, 1e-4, 1e-3, 1e-2] {
            let rel = (per_cycle_loss(p) - 12.0 * p).abs() / per_cycle_loss(p);
            assert!(rel < 0.07, "p = {p}: {rel}");
        }
        assert_eq!(per_cycle_loss(1.0), 1.0);
    }

    #[test]
    fn stagger_offsets() {
        let offs: Vec<u64> = (0..6).map(|i| SourcePhasing::Staggered.offset(i)).collect();
        assert_eq!(offs, vec![0, 2, 1, 0, 2, 1]);
        assert!((0..6).all(|i| SourcePhasing::InPhase.offset(i) == 0));
    }
}
