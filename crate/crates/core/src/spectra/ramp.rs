//! Time-dependent ramps of the Raman amplitude `Ω₀`.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::FockBasis;
use crate::linalg::{self, CMat};
use crate::model::{build_qubit_hamiltonian, build_raman_hamiltonian, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampShape {
    Linear,
    Smoothstep,
}

impl RampShape {
    fn fraction(self, s: f64) -> f64 {
        match self {
            Self::Linear => s,
            Self::Smoothstep => s * s * (3.0 - 2.0 * s),
        }
    }

    /// Peak of `d(fraction)/ds`.
    fn peak_slope(self) -> f64 {
        match self {
            Self::Linear => 1.0,
            Self::Smoothstep => 1.5,
        }
    }
}

/// Ramp of `Ω₀` from `start` to `end` over `duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule {
    pub start: f64,
    pub end: f64,
    /// Zero means a sudden quench.
    pub duration: f64,
    pub shape: RampShape,
    /// Initial integrator step.
    pub step: f64,
    /// Accepted change of tracked populations and fidelity between step
    /// `h` and `h/2`.
    pub tolerance: f64,
    pub norm_tolerance: f64,
    pub max_halvings: u32,
    /// Points of the `Ω₀` grid used for the gap scan.
    pub scan_points: usize,
}

impl RampSchedule {
    pub fn new(start: f64, end: f64, duration: f64) -> Self {
        Self {
            start,
            end,
            duration,
            shape: RampShape::Linear,
            step: 0.2,
            tolerance: 1e-6,
            norm_tolerance: 1e-8,
            max_halvings: 8,
            scan_points: 201,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start >= 0.0 && self.end >= 0.0) {
            return Err(invalid("ramp", "start and end must be nonnegative"));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(invalid("ramp_duration", "must be finite and nonnegative"));
        }
        if !(self.step > 0.0) {
            return Err(invalid("ramp_step", "must be positive"));
        }
        if !(self.tolerance > 0.0 && self.norm_tolerance > 0.0) {
            return Err(invalid("ramp_tolerance", "must be positive"));
        }
        if self.scan_points < 2 {
            return Err(invalid("ramp_scan_points", "need at least 2"));
        }
        Ok(())
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        let s = if self.duration > 0.0 {
            (t / self.duration).clamp(0.0, 1.0)
        } else {
            1.0
        };
        self.start + (self.end - self.start) * self.shape.fraction(s)
    }

    /// Largest `|dΩ₀/dt|`.
    pub fn max_rate(&self) -> f64 {
        if self.duration == 0.0 {
            return f64::INFINITY;
        }
        (self.end - self.start).abs() * self.shape.peak_slope() / self.duration
    }
}

/// Ground energy and level spacings along an `Ω₀` grid.
#[derive(Debug, Clone, Serialize)]
pub struct GapProfile {
    pub omega: Vec<f64>,
    pub ground: Vec<f64>,
    /// `gaps[i][k] = E_{k+2} − E_{k+1}` at `omega[i]`.
    pub gaps: Vec<Vec<f64>>,
}

impl GapProfile {
    pub fn min_gap(&self) -> f64 {
        self.gaps
            .iter()
            .flat_map(|g| g.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    fn ground_at(&self, w: f64) -> f64 {
        let x = &self.omega;
        let (lo, hi) = if x[0] <= x[x.len() - 1] {
            (0, x.len() - 1)
        } else {
            (x.len() - 1, 0)
        };
        if w <= x[lo] {
            return self.ground[lo];
        }
        if w >= x[hi] {
            return self.ground[hi];
        }
        let k = x
            .windows(2)
            .position(|p| (p[0] - w) * (p[1] - w) <= 0.0)
            .unwrap_or(0);
        let t = (w - x[k]) / (x[k + 1] - x[k]);
        self.ground[k] + t * (self.ground[k + 1] - self.ground[k])
    }
}

/// Spacings between the lowest `tracked + 1` levels along the ramp path.
pub fn gap_profile(
    params: &ModelParams,
    start: f64,
    end: f64,
    points: usize,
    tracked: usize,
) -> Result<GapProfile> {
    let basis = FockBasis::new(params.n_atoms, 3)?;
    let omega = super::linspace(start, end, points.max(2));
    let rows: Vec<(f64, Vec<f64>)> = omega
        .par_iter()
        .map(|&w| {
            let e = super::energies(&params.with_omega0(w), &basis)?;
            let gaps = (0..tracked.min(e.len() - 1))
                .map(|k| e[k + 1] - e[k])
                .collect();
            Ok((e[0], gaps))
        })
        .collect::<Result<_>>()?;
    let (ground, gaps) = rows.into_iter().unzip();
    Ok(GapProfile {
        omega,
        ground,
        gaps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RampResult {
    #[serde(skip)]
    pub final_state: Vec<c64>,
    /// `|⟨ψ_k(start)|ψ(0)⟩|²` for the tracked levels.
    pub initial_populations: Vec<f64>,
    /// `|⟨ψ_k(end)|ψ(T)⟩|²` for the tracked levels.
    pub final_populations: Vec<f64>,
    /// Overlap with the adiabatically mapped state, maximized over the
    /// relative phases of the tracked levels.
    pub fidelity: f64,
    pub min_gap: f64,
    pub max_rate: f64,
    /// `(min gap)² / max|dΩ₀/dt|`.
    pub margin: f64,
    pub steps: usize,
    pub step: f64,
    pub richardson_error: f64,
    pub norm_drift: f64,
}

struct Evolution {
    state: Vec<c64>,
    norm_drift: f64,
    steps: usize,
}

fn integrate(
    diag: &CMat,
    raman: &CMat,
    schedule: &RampSchedule,
    profile: &GapProfile,
    initial: &[c64],
    h_target: f64,
) -> Evolution {
    let n = initial.len();
    let steps = (schedule.duration / h_target).ceil().max(1.0) as usize;
    let h = schedule.duration / steps as f64;
    let mut psi = Mat::<c64>::from_fn(n, 1, |i, _| initial[i]);
    let mut drift = 0.0f64;
    let half = c64::new(0.0, 0.5 * h);
    for k in 0..steps {
        let w = schedule.omega_at((k as f64 + 0.5) * h);
        // the ground-energy shift only changes a global phase and keeps the
        // midpoint rule accurate at large energies
        let shift = profile.ground_at(w);
        let hm = Mat::<c64>::from_fn(n, n, |i, j| {
            let d = if i == j {
                diag[(i, j)] - shift
            } else {
                diag[(i, j)]
            };
            d + raman[(i, j)] * w
        });
        let a = Mat::<c64>::from_fn(n, n, |i, j| {
            if i == j {
                linalg::ONE + half * hm[(i, j)]
            } else {
                half * hm[(i, j)]
            }
        });
        let rhs = &psi - (&hm * &psi) * faer::Scale(half);
        psi = a.partial_piv_lu().solve(&rhs);
        let norm = (0..n).map(|i| psi[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
        drift = drift.max((norm - 1.0).abs());
    }
    Evolution {
        state: (0..n).map(|i| psi[(i, 0)]).collect(),
        norm_drift: drift,
        steps,
    }
}

fn populations(vectors: &CMat, tracked: usize, psi: &[c64]) -> Vec<c64> {
    (0..tracked)
        .map(|k| linalg::dot(&linalg::column(vectors.as_ref(), k), psi))
        .collect()
}

fn phase_free_fidelity(initial: &[c64], overlaps: &[c64]) -> f64 {
    let s: f64 = initial
        .iter()
        .zip(overlaps)
        .map(|(c, o)| c.norm() * o.norm())
        .sum();
    s * s
}

/// Integrates the Schrödinger equation along the ramp with the implicit
/// midpoint rule, halving the step until successive halvings agree.
///
/// `tracked` lowest levels are followed; the fidelity compares the final
/// state with `Σ c_k |ψ_k(end)⟩` where `c_k = ⟨ψ_k(start)|ψ(0)⟩`.
pub fn adiabatic_ramp(
    params: &ModelParams,
    schedule: &RampSchedule,
    initial: &[c64],
    tracked: usize,
) -> Result<RampResult> {
    schedule.validate()?;
    let basis = FockBasis::new(params.n_atoms, 3)?;
    if initial.len() != basis.len() {
        return Err(Error::Dimension {
            expected: basis.len(),
            got: initial.len(),
        });
    }
    let norm = linalg::norm(initial);
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm });
    }
    let tracked = tracked.clamp(1, basis.len());

    let h_start = build_qubit_hamiltonian(&params.with_omega0(schedule.start), &basis)?;
    let h_end = build_qubit_hamiltonian(&params.with_omega0(schedule.end), &basis)?;
    let (_, v_start) = linalg::eigh(h_start.matrix())?;
    let (_, v_end) = linalg::eigh(h_end.matrix())?;
    let c0 = populations(&v_start, tracked, initial);
    let initial_populations = c0.iter().map(|c| c.norm_sqr()).collect();

    let profile = gap_profile(
        params,
        schedule.start,
        schedule.end,
        schedule.scan_points,
        tracked,
    )?;
    let min_gap = profile.min_gap();
    let max_rate = schedule.max_rate();
    let margin = if max_rate == 0.0 {
        f64::INFINITY
    } else {
        min_gap * min_gap / max_rate
    };

    let finish = |state: Vec<c64>, steps, step, err, drift| {
        let overlaps = populations(&v_end, tracked, &state);
        RampResult {
            fidelity: phase_free_fidelity(&c0, &overlaps),
            final_populations: overlaps.iter().map(|c| c.norm_sqr()).collect(),
            initial_populations: Vec::clone(&initial_populations),
            final_state: state,
            min_gap,
            max_rate,
            margin,
            steps,
            step,
            richardson_error: err,
            norm_drift: drift,
        }
    };

    if schedule.duration == 0.0 {
        return Ok(finish(initial.to_vec(), 0, 0.0, 0.0, 0.0));
    }

    let diag = build_qubit_hamiltonian(&params.with_omega0(0.0), &basis)?.into_matrix();
    let raman = build_raman_hamiltonian(&params.with_omega0(1.0), &basis)?.into_matrix();
    let measure = |ev: &Evolution| {
        let o = populations(&v_end, tracked, &ev.state);
        let mut m: Vec<f64> = o.iter().map(|c| c.norm_sqr()).collect();
        m.push(phase_free_fidelity(&c0, &o));
        m
    };

    let mut h = schedule.step;
    let mut coarse = integrate(&diag, &raman, schedule, &profile, initial, h);
    let mut last = (h, f64::INFINITY, coarse.norm_drift);
    for _ in 0..=schedule.max_halvings {
        let fine = integrate(&diag, &raman, schedule, &profile, initial, h / 2.0);
        let err = measure(&coarse)
            .iter()
            .zip(measure(&fine))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let drift = coarse.norm_drift.max(fine.norm_drift);
        if err < schedule.tolerance && drift < schedule.norm_tolerance {
            let step = schedule.duration / fine.steps as f64;
            return Ok(finish(fine.state, fine.steps, step, err, drift));
        }
        last = (h / 2.0, err, drift);
        coarse = fine;
        h /= 2.0;
    }
    Err(Error::Integrator {
        tolerance: schedule.tolerance,
        halvings: schedule.max_halvings,
        step: last.0,
        error: last.1,
        norm_drift: last.2,
    })
}
