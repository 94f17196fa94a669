//! Truncated Fock-space model of the photonic module.
//!
//! The module is an atom with two ground states `|g1>`, `|g2>` coupled
//! dispersively to a cavity mode. A photon number `n` in the cavity imprints a
//! phase `exp(i * 2 * theta * n)` on the `|g1>` branch, where `theta` is the
//! product of the effective coupling and the interaction time. Measuring the
//! atom in the `|+>/|->` basis (`|±> = (|g2> ± |g1>)/√2`) at `theta = π/2`
//! splits the field into its even and odd photon-number parts, which is what
//! turns the module into a QND parity detector and a heralded single-photon
//! distiller for weak coherent pulses.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Default photon-number cutoff.
pub const DEFAULT_N_MAX: usize = 40;

/// Largest neglected tail weight accepted by [`coherent_fock`].
pub const TAIL_TOL: f64 = 1e-15;

/// Amplitudes over photon numbers `0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<Complex64>,
    tail_bound: f64,
}

impl FockVector {
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(invalid("amplitudes", "need at least the vacuum component"));
        }
        Ok(Self {
            amps,
            tail_bound: 0.0,
        })
    }

    /// Number state `|n>` with cutoff `n_max`.
    pub fn number_state(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(invalid("n", format!("{n} exceeds n_max = {n_max}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); n_max + 1];
        amps[n] = Complex64::new(1.0, 0.0);
        Self::from_amplitudes(amps)
    }

    pub fn vacuum(n_max: usize) -> Self {
        Self::number_state(0, n_max).expect("0 <= n_max")
    }

    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, n: usize) -> Complex64 {
        self.amps.get(n).copied().unwrap_or_default()
    }

    /// Weight dropped by truncation before renormalizing (0 for exact states).
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|<n|self>|^2` for a normalized vector.
    pub fn population(&self, n: usize) -> f64 {
        self.amplitude(n).norm_sqr()
    }

    /// Returns `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        Some(Self {
            amps: self.amps.iter().map(|a| a / norm).collect(),
            tail_bound: self.tail_bound,
        })
    }
}

/// Weight of a Poisson(`alpha_sq`) distribution above `n_max`.
fn poisson_tail(alpha_sq: f64, n_max: usize) -> f64 {
    if alpha_sq == 0.0 {
        return 0.0;
    }
    // log of the first neglected term, then sum the geometric-ish remainder
    let first = n_max + 1;
    let log_first = -alpha_sq + first as f64 * alpha_sq.ln()
        - (1..=first).map(|k| (k as f64).ln()).sum::<f64>();
    let mut term = log_first.exp();
    let mut sum = 0.0;
    let mut n = first;
    while term > 0.0 && term > sum * 1e-17 {
        sum += term;
        n += 1;
        term *= alpha_sq / n as f64;
        if n > first + 10_000 {
            break;
        }
    }
    sum
}

/// Leading terms `exp(-|α|²/2) α^n / √n!` of a coherent state, with no
/// renormalization and no truncation check.
pub fn coherent_expansion(alpha_sq: f64, n_max: usize) -> Result<FockVector> {
    check_alpha_sq(alpha_sq)?;
    let alpha = alpha_sq.sqrt();
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut c = (-alpha_sq / 2.0).exp();
    for n in 0..=n_max {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        amps.push(Complex64::new(c, 0.0));
    }
    let mut v = FockVector::from_amplitudes(amps)?;
    v.tail_bound = poisson_tail(alpha_sq, n_max);
    Ok(v)
}

/// Coherent state with real `α = √alpha_sq`, truncated at `n_max` and
/// renormalized. Fails if the dropped tail weight exceeds [`TAIL_TOL`].
pub fn coherent_fock(alpha_sq: f64, n_max: usize) -> Result<FockVector> {
    let raw = coherent_expansion(alpha_sq, n_max)?;
    if raw.tail_bound >= TAIL_TOL {
        return Err(Error::Truncation {
            n_max,
            tail: raw.tail_bound,
            budget: TAIL_TOL,
        });
    }
    let tail = raw.tail_bound;
    let mut v = raw
        .normalized()
        .expect("coherent state has nonzero vacuum weight");
    v.tail_bound = tail;
    Ok(v)
}

fn check_alpha_sq(alpha_sq: f64) -> Result<()> {
    if !alpha_sq.is_finite() || alpha_sq < 0.0 {
        return Err(invalid(
            "alpha_sq",
            format!("must be finite and >= 0, got {alpha_sq}"),
        ));
    }
    Ok(())
}

/// Interaction angle `βt`. `π/2` gives the π phase per photon on `|g1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersivePhase(pub f64);

impl DispersivePhase {
    pub const TUNED: Self = Self(FRAC_PI_2);

    pub fn theta(self) -> f64 {
        self.0
    }
}

/// Joint atom-field state, one field vector per atomic ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomFieldState {
    g1: FockVector,
    g2: FockVector,
}

impl AtomFieldState {
    /// Atom in `(|g1> + |g2>)/√2`, field in `field`. This is the only
    /// preparation the module supports.
    pub fn prepare(field: &FockVector) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let branch = FockVector {
            amps: field.amps.iter().map(|a| a * s).collect(),
            tail_bound: field.tail_bound,
        };
        Self {
            g1: branch.clone(),
            g2: branch,
        }
    }

    pub fn branch_g1(&self) -> &FockVector {
        &self.g1
    }

    pub fn branch_g2(&self) -> &FockVector {
        &self.g2
    }

    pub fn norm_sqr(&self) -> f64 {
        self.g1.norm_sqr() + self.g2.norm_sqr()
    }
}

/// Applies the dispersive evolution: amplitude `n` of the `|g1>` branch picks
/// up `exp(i * 2 * theta * n)`.
pub fn dispersive_evolve(state: &AtomFieldState, phase: DispersivePhase) -> AtomFieldState {
    let g1 = state
        .g1
        .amps
        .iter()
        .enumerate()
        .map(|(n, a)| a * Complex64::from_polar(1.0, 2.0 * phase.theta() * n as f64))
        .collect();
    AtomFieldState {
        g1: FockVector {
            amps: g1,
            tail_bound: state.g1.tail_bound,
        },
        g2: state.g2.clone(),
    }
}

/// Outcome of measuring the atom in the `|±>` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DistillationResult {
    pub p_plus: f64,
    pub p_minus: f64,
    /// `None` when the outcome has zero probability.
    pub state_plus: Option<FockVector>,
    pub state_minus: Option<FockVector>,
    /// `|<1|state_minus>|^2`, or `None` if `|->` cannot occur.
    pub fidelity_minus: Option<f64>,
}

pub fn measure_atom_pm(state: &AtomFieldState) -> DistillationResult {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let project = |sign: f64| -> FockVector {
        let amps = state
            .g2
            .amps
            .iter()
            .zip(&state.g1.amps)
            .map(|(b, a)| (b + a * sign) * s)
            .collect();
        FockVector {
            amps,
            tail_bound: state.g1.tail_bound,
        }
    };
    let plus = project(1.0);
    let minus = project(-1.0);
    let p_plus = plus.norm_sqr();
    let p_minus = minus.norm_sqr();
    let state_plus = plus.normalized();
    let state_minus = minus.normalized();
    let fidelity_minus = state_minus.as_ref().map(|v| v.population(1));
    DistillationResult {
        p_plus,
        p_minus,
        state_plus,
        state_minus,
        fidelity_minus,
    }
}

/// Closed-form outcome probabilities `(e^{-a} cosh a, e^{-a} sinh a)`.
pub fn distill_probability(alpha_sq: f64) -> Result<(f64, f64)> {
    check_alpha_sq(alpha_sq)?;
    // (1 - e^{-2a})/2 keeps precision for small a
    let p_minus = -(-2.0 * alpha_sq).exp_m1() / 2.0;
    Ok((1.0 - p_minus, p_minus))
}

/// Closed-form distilled-photon fidelity `6 / (6 + a^2)`.
pub fn distill_fidelity(alpha_sq: f64) -> Result<f64> {
    check_alpha_sq(alpha_sq)?;
    Ok(6.0 / (6.0 + alpha_sq * alpha_sq))
}

/// Pulse strength `|α|^2` whose distillation success probability is
/// `p_success`.
pub fn alpha_sq_for_success(p_success: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&p_success) {
        return Err(invalid(
            "p_success",
            format!("must lie in [0, 0.5), got {p_success}"),
        ));
    }
    // p = (1 - e^{-2a})/2  =>  a = -ln(1 - 2p)/2
    Ok(-(-2.0 * p_success).ln_1p() / 2.0)
}

/// Full distillation of a coherent pulse at the tuned interaction angle.
pub fn distill(alpha_sq: f64, n_max: usize) -> Result<DistillationResult> {
    let field = coherent_fock(alpha_sq, n_max)?;
    let evolved = dispersive_evolve(&AtomFieldState::prepare(&field), DispersivePhase::TUNED);
    Ok(measure_atom_pm(&evolved))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum XOutcome {
    Plus,
    Minus,
}

/// Photonic qubit `a0|0> + a1|1>`; encoding agnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonQubit {
    pub a0: Complex64,
    pub a1: Complex64,
}

impl PhotonQubit {
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self> {
        let n = a0.norm_sqr() + a1.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(invalid("photon", format!("squared norm {n} != 1")));
        }
        Ok(Self { a0, a1 })
    }

    pub fn zero() -> Self {
        Self {
            a0: Complex64::new(1.0, 0.0),
            a1: Complex64::new(0.0, 0.0),
        }
    }

    pub fn one() -> Self {
        Self {
            a0: Complex64::new(0.0, 0.0),
            a1: Complex64::new(1.0, 0.0),
        }
    }

    pub fn plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            a0: Complex64::new(s, 0.0),
            a1: Complex64::new(s, 0.0),
        }
    }

    pub fn minus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            a0: Complex64::new(s, 0.0),
            a1: Complex64::new(-s, 0.0),
        }
    }

    fn overlap_sqr(&self, other: &Self) -> f64 {
        (other.a0.conj() * self.a0 + other.a1.conj() * self.a1).norm_sqr()
    }
}

/// One branch of a non-demolition X measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QndBranch {
    pub outcome: XOutcome,
    pub probability: f64,
    /// The photon survives, projected onto the eigenstate.
    pub projected: PhotonQubit,
}

/// Both branches of an X-basis QND measurement, `+` first.
pub fn x_basis_qnd(photon: &PhotonQubit) -> [QndBranch; 2] {
    let plus = PhotonQubit::plus();
    let minus = PhotonQubit::minus();
    [
        QndBranch {
            outcome: XOutcome::Plus,
            probability: photon.overlap_sqr(&plus),
            projected: plus,
        },
        QndBranch {
            outcome: XOutcome::Minus,
            probability: photon.overlap_sqr(&minus),
            projected: minus,
        },
    ]
}

/// Samples an X-basis QND measurement given a uniform draw in `[0, 1)`.
pub fn x_basis_qnd_sample(photon: &PhotonQubit, u: f64) -> QndBranch {
    let [p, m] = x_basis_qnd(photon);
    if u < p.probability {
        p
    } else {
        m
    }
}
