//! Seeded Monte-Carlo trials over the network simulator and the statistics
//! built on them: photon-count time series, bias sweeps, saturated-sample
//! fractions, boot-up times and their linear scaling fit.
//!
//! Trial `k` of a run with master seed `s` always uses the generator seeded
//! with [`trial_seed`]`(s, k)`, so results do not depend on how trials are
//! scheduled across worker threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{EventKind, NetworkState, SimParams, CYCLE_STEPS, DETECTION_POS};

/// Default sampling interval of recorded series: one full recirculation.
pub const DEFAULT_CADENCE: u64 = CYCLE_STEPS;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of trial `k`'s generator.
pub fn trial_seed(seed: u64, k: u64) -> u64 {
    splitmix64(seed ^ splitmix64(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SeriesPoint {
    pub t: u64,
    pub computational: usize,
    pub shunt: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: u64,
    pub params: SimParams,
    pub series: Vec<SeriesPoint>,
    /// First recorded `t` with more than `9N/2` photons.
    pub saturated_at: Option<u64>,
}

impl TrialResult {
    pub fn last(&self) -> &SeriesPoint {
        self.series.last().expect("series always holds t = 0")
    }
}

/// Recorded times: `0, cadence, 2*cadence, ...` and always `t_max`.
pub fn record_times(t_max: u64, cadence: u64) -> Vec<u64> {
    let cadence = cadence.max(1);
    let mut ts: Vec<u64> = (0..=t_max / cadence).map(|i| i * cadence).collect();
    if *ts.last().unwrap() != t_max {
        ts.push(t_max);
    }
    ts
}

fn trial_network(params: &SimParams, k: u64) -> Result<NetworkState> {
    let mut p = params.clone();
    p.seed = trial_seed(params.seed, k);
    NetworkState::new(p)
}

/// Runs trial `k` and calls `visit` at every recorded time.
fn drive_trial(
    params: &SimParams,
    k: u64,
    cadence: u64,
    mut visit: impl FnMut(&NetworkState),
) -> Result<()> {
    let mut net = trial_network(params, k)?;
    let cadence = cadence.max(1);
    visit(&net);
    while net.clock() < params.t_max {
        net.step();
        if net.clock() % cadence == 0 || net.clock() == params.t_max {
            visit(&net);
        }
    }
    Ok(())
}

pub fn run_trial(params: &SimParams, k: u64, cadence: u64) -> Result<TrialResult> {
    let capacity = params.capacity();
    let mut series = Vec::with_capacity((params.t_max / cadence.max(1)) as usize + 2);
    let mut saturated_at = None;
    drive_trial(params, k, cadence, |net| {
        let m = net.metrics();
        if saturated_at.is_none() && m.total_count > capacity {
            saturated_at = Some(net.clock());
        }
        series.push(SeriesPoint {
            t: net.clock(),
            computational: m.computational_count,
            shunt: m.shunt_count,
            total: m.total_count,
        });
    })?;
    Ok(TrialResult {
        trial: k,
        params: params.clone(),
        series,
        saturated_at,
    })
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(crate::error::invalid("trials", "need at least one trial"));
    }
    Ok(())
}

/// Runs `trials` independent trials, returned in trial order.
pub fn run_trials(params: &SimParams, trials: u64, cadence: u64) -> Result<Vec<TrialResult>> {
    check_trials(trials)?;
    params.validate()?;
    (0..trials)
        .into_par_iter()
        .map(|k| run_trial(params, k, cadence))
        .collect()
}

/// Mean, sample standard deviation and normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub ci95: f64,
    pub n: u64,
}

impl Summary {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as u64;
        if n == 0 {
            return Self {
                mean: f64::NAN,
                sd: f64::NAN,
                ci95: f64::NAN,
                n,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            sd,
            ci95: Z95 * sd / (n as f64).sqrt(),
            n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Bias,
    Lines,
    Time,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub n_lines: usize,
    pub bias: f64,
    pub t: u64,
    /// Mean total photon count, or the saturated fraction.
    pub mean: f64,
    pub sd: f64,
    pub ci95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub trials: u64,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn axis_value(&self, p: &SweepPoint) -> f64 {
        match self.axis {
            SweepAxis::Bias => p.bias,
            SweepAxis::Lines => p.n_lines as f64,
            SweepAxis::Time => p.t as f64,
        }
    }

    /// First axis value where `value(point)` reaches `level`, linearly
    /// interpolated between grid points.
    pub fn crossing_by(&self, level: f64, value: impl Fn(&SweepPoint) -> f64) -> Option<f64> {
        let first = self.points.first()?;
        if value(first) >= level {
            return Some(self.axis_value(first));
        }
        self.points.windows(2).find_map(|w| {
            let (y0, y1) = (value(&w[0]), value(&w[1]));
            (y0 < level && y1 >= level).then(|| {
                let (x0, x1) = (self.axis_value(&w[0]), self.axis_value(&w[1]));
                x0 + (level - y0) * (x1 - x0) / (y1 - y0)
            })
        })
    }

    /// Where the mean first reaches `level`.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        self.crossing_by(level, |p| p.mean)
    }

    /// Crossing band from the upper and lower 95% envelopes of the mean.
    pub fn crossing_interval(&self, level: f64) -> Option<(f64, f64)> {
        let lo = self.crossing_by(level, |p| p.mean + p.ci95)?;
        let hi = self.crossing_by(level, |p| p.mean - p.ci95)?;
        Some((lo, hi))
    }
}

/// Final-time photon count of each trial.
fn final_totals(params: &SimParams, trials: u64) -> Result<Vec<f64>> {
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut net = trial_network(params, k)?;
            Ok(net.run_to_end().total_count as f64)
        })
        .collect()
}

/// Mean total photon count at `t_max` for every bias value.
pub fn sweep_bias(base: &SimParams, biases: &[f64], trials: u64) -> Result<SweepResult> {
    check_trials(trials)?;
    let mut points = Vec::with_capacity(biases.len());
    for &bias in biases {
        let mut p = base.clone();
        p.bias = bias;
        p.validate()?;
        let s = Summary::from_values(&final_totals(&p, trials)?);
        points.push(SweepPoint {
            n_lines: p.n_lines,
            bias,
            t: p.t_max,
            mean: s.mean,
            sd: s.sd,
            ci95: s.ci95,
        });
    }
    Ok(SweepResult {
        axis: SweepAxis::Bias,
        trials,
        points,
    })
}

/// Bias grid `2, 12, 22, ..., 192`.
pub fn default_bias_grid() -> Vec<f64> {
    (0..20).map(|i| 2.0 + 10.0 * i as f64).collect()
}

/// Fraction of trials holding more than `9N/2` photons at each recorded time.
pub fn saturation_fraction(params: &SimParams, trials: u64, cadence: u64) -> Result<SweepResult> {
    check_trials(trials)?;
    params.validate()?;
    let times = record_times(params.t_max, cadence);
    let capacity = params.capacity();
    let counts = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut hits = vec![0u64; times.len()];
            let mut i = 0;
            drive_trial(params, k, cadence, |net| {
                hits[i] = (net.metrics().total_count > capacity) as u64;
                i += 1;
            })?;
            Ok(hits)
        })
        .try_reduce(
            || vec![0u64; times.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    let n = trials as f64;
    let points = times
        .iter()
        .zip(counts)
        .map(|(&t, c)| {
            let f = c as f64 / n;
            let sd = if trials > 1 {
                (f * (1.0 - f) * n / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            SweepPoint {
                n_lines: params.n_lines,
                bias: params.bias,
                t,
                mean: f,
                sd,
                ci95: Z95 * sd / n.sqrt(),
            }
        })
        .collect();
    Ok(SweepResult {
        axis: SweepAxis::Time,
        trials,
        points,
    })
}

/// First recorded time at which at least half the samples are saturated.
pub fn bootup_from_fraction(fraction: &SweepResult) -> Result<u64> {
    fraction
        .points
        .iter()
        .find(|p| p.mean >= 0.5)
        .map(|p| p.t)
        .ok_or_else(|| Error::NoBootup {
            t_max: fraction.points.last().map_or(0, |p| p.t),
            peak_fraction: fraction.points.iter().map(|p| p.mean).fold(0.0, f64::max),
        })
}

pub fn bootup_time(params: &SimParams, trials: u64, cadence: u64) -> Result<u64> {
    bootup_from_fraction(&saturation_fraction(params, trials, cadence)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootupFit {
    pub points: Vec<(usize, u64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of boot-up time against `N`.
pub fn fit_bootup_scaling(points: &[(usize, u64)]) -> Result<BootupFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|&(x, _)| x as f64).sum::<f64>() / n;
    let my = points.iter().map(|&(_, y)| y as f64).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|&(x, _)| (x as f64 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all N values are equal".into()));
    }
    let sxy: f64 = points
        .iter()
        .map(|&(x, y)| (x as f64 - mx) * (y as f64 - my))
        .sum();
    let syy: f64 = points.iter().map(|&(_, y)| (y as f64 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(BootupFit {
        points: points.to_vec(),
        slope,
        intercept,
        r_squared,
    })
}

/// Tokens that went around from one detection pass to the next, and how
/// many of them were lost on the way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CycleLoss {
    pub cycles: u64,
    pub losses: u64,
}

impl CycleLoss {
    pub fn rate(&self) -> f64 {
        self.losses as f64 / self.cycles as f64
    }

    pub fn std_error(&self) -> f64 {
        let r = self.rate();
        (r * (1.0 - r) / self.cycles as f64).sqrt()
    }
}

/// Runs one network (ignoring `t_max`) until at least `min_cycles` full
/// token cycles have been observed. Requires `p_m = 0` so that every herald
/// is a real loss.
pub fn measure_cycle_loss(params: &SimParams, min_cycles: u64) -> Result<CycleLoss> {
    if params.p_m != 0.0 {
        return Err(crate::error::invalid(
            "p_m",
            "cycle-loss measurement needs p_m = 0",
        ));
    }
    let mut net = NetworkState::new(params.clone())?;
    net.record_events();
    let mut armed = std::collections::HashSet::new();
    let mut out = CycleLoss {
        cycles: 0,
        losses: 0,
    };
    let max_steps = min_cycles
        .saturating_mul(CYCLE_STEPS)
        .saturating_mul(1000)
        .max(1_000_000);
    while out.cycles < min_cycles {
        if net.clock() >= max_steps {
            return Err(crate::error::invalid(
                "params",
                "network never carries photons",
            ));
        }
        let t = net.clock();
        net.step();
        for e in net.take_events() {
            if e.kind == EventKind::Herald && armed.remove(&e.token_id) {
                out.cycles += 1;
                out.losses += 1;
            }
        }
        let slot = ((t + CYCLE_STEPS - DETECTION_POS) % CYCLE_STEPS) as usize;
        for line in net.lines() {
            if let Some(tok) = line.ring[slot].filter(|tok| tok.actually_present) {
                if !armed.insert(tok.id) {
                    out.cycles += 1;
                }
            }
        }
    }
    Ok(out)
}
