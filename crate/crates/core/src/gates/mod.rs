//! Bang-bang gates: products of exponentials of two fixed generators with
//! optimized durations.

mod two_qubit;

pub use two_qubit::{
    build_two_qubit_hamiltonian, nearest_product_distance, optimize_two_bit_gate, TwoQubitSystem,
};

use faer::{c64, Mat, MatRef};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fock::FockBasis;
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::model::{build_qubit_hamiltonian, ModelParams};
use crate::operator::HermitianOperator;
use crate::optim::{self, NelderMeadOptions};

/// `exp(−iHt)` from the spectral decomposition.
pub fn propagator(h: &HermitianOperator, t: f64) -> Result<CMat> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", "duration must be finite and nonnegative"));
    }
    let (values, vectors) = linalg::eigh(h.matrix())?;
    Ok(linalg::spectral_function(&values, vectors.as_ref(), |e| {
        let x = -e * t;
        c64::new(x.cos(), x.sin())
    }))
}

/// Alternating pulses `… e^{−iH_A t₂} e^{−iH_B t₁}`: even positions of
/// `durations` use `H_B`, odd positions `H_A`, and the first entry acts first.
#[derive(Debug, Clone)]
pub struct PulseSequence {
    pub generator_a: HermitianOperator,
    pub generator_b: HermitianOperator,
    pub durations: Vec<f64>,
}

impl PulseSequence {
    pub fn new(
        generator_a: HermitianOperator,
        generator_b: HermitianOperator,
        durations: Vec<f64>,
    ) -> Result<Self> {
        if !generator_a.same_space(&generator_b) {
            return Err(Error::BasisMismatch(
                "pulse generators act on different spaces".into(),
            ));
        }
        if durations.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(invalid("durations", "must be finite and nonnegative"));
        }
        Ok(Self {
            generator_a,
            generator_b,
            durations,
        })
    }

    pub fn total_time(&self) -> f64 {
        self.durations.iter().sum()
    }

    /// Label of pulse `k`: `'B'` for even `k`, `'A'` for odd.
    pub fn label(k: usize) -> char {
        if k % 2 == 0 {
            'B'
        } else {
            'A'
        }
    }
}

pub fn sequence_unitary(seq: &PulseSequence) -> Result<CMat> {
    let (ea, va) = linalg::eigh(seq.generator_a.matrix())?;
    let (eb, vb) = linalg::eigh(seq.generator_b.matrix())?;
    let n = seq.generator_a.dim();
    let mut u = linalg::identity(n);
    for (k, &t) in seq.durations.iter().enumerate() {
        if t == 0.0 {
            continue;
        }
        let (e, v) = if k % 2 == 0 { (&eb, &vb) } else { (&ea, &va) };
        let p = linalg::spectral_function(e, v.as_ref(), |x| {
            let y = -x * t;
            c64::new(y.cos(), y.sin())
        });
        u = p * u;
    }
    Ok(u)
}

/// Propagates a fixed set of window columns through a pulse sequence,
/// working in the eigenbasis of `H_A`.
#[derive(Debug, Clone)]
pub struct WindowPropagator {
    energies_a: Vec<f64>,
    energies_b: Vec<f64>,
    /// `V_A† V_B`.
    overlap: CMat,
    overlap_adj: CMat,
    /// Window columns in the `H_A` eigenbasis.
    start: CMat,
}

impl WindowPropagator {
    /// `window` holds orthonormal columns in the basis of the generators.
    pub fn new(
        h_a: MatRef<'_, c64>,
        h_b: MatRef<'_, c64>,
        window: MatRef<'_, c64>,
    ) -> Result<Self> {
        let (ea, va) = linalg::eigh(h_a)?;
        let (eb, vb) = linalg::eigh(h_b)?;
        // a common offset only changes the global phase and keeps the
        // exponent arguments small
        let offset = ea[0].min(eb[0]);
        let overlap = va.adjoint() * &vb;
        Ok(Self {
            energies_a: ea.iter().map(|e| e - offset).collect(),
            energies_b: eb.iter().map(|e| e - offset).collect(),
            overlap_adj: overlap.adjoint().to_owned(),
            overlap,
            start: va.adjoint() * window,
        })
    }

    pub fn window_size(&self) -> usize {
        self.start.ncols()
    }

    pub fn dim(&self) -> usize {
        self.start.nrows()
    }

    /// `W† U W_q`: the window projection of `U` applied to the first `cols`
    /// window states.
    pub fn propagate(&self, durations: &[f64], cols: usize) -> CMat {
        let n = self.start.nrows();
        let cols = cols.min(self.start.ncols());
        let mut m = self.start.subcols(0, cols).to_owned();
        let mut in_b = false;
        for (k, &t) in durations.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let is_b = k % 2 == 0;
            if is_b && !in_b {
                m = &self.overlap_adj * &m;
                in_b = true;
            } else if !is_b && in_b {
                m = &self.overlap * &m;
                in_b = false;
            }
            let e = if is_b {
                &self.energies_b
            } else {
                &self.energies_a
            };
            for i in 0..n {
                let x = -e[i] * t;
                let p = c64::new(x.cos(), x.sin());
                for j in 0..cols {
                    m[(i, j)] *= p;
                }
            }
        }
        if in_b {
            m = &self.overlap * &m;
        }
        self.start.adjoint() * m
    }

    /// Objective and its gradient in the durations for the first `q` window
    /// columns, by one forward and one adjoint sweep. With `smooth` the
    /// leakage term uses `Σ|U_ij|²` over block columns, an upper bound on
    /// the squared maximum that is differentiable everywhere.
    fn objective_gradient(
        &self,
        durations: &[f64],
        spec: &GateSpec,
        settings: &OptimizerSettings,
        smooth: bool,
    ) -> (f64, Vec<f64>) {
        let n = self.start.nrows();
        let q = spec.target.nrows();
        let phase = |m: &mut CMat, e: &[f64], t: f64| {
            for i in 0..n {
                let x = -e[i] * t;
                let p = c64::new(x.cos(), x.sin());
                for j in 0..m.ncols() {
                    m[(i, j)] *= p;
                }
            }
        };
        let mut m = self.start.subcols(0, q).to_owned();
        let mut in_b = false;
        let mut after = Vec::with_capacity(durations.len());
        for (k, &t) in durations.iter().enumerate() {
            let is_b = k % 2 == 0;
            if is_b != in_b {
                m = if is_b {
                    &self.overlap_adj * &m
                } else {
                    &self.overlap * &m
                };
                in_b = is_b;
            }
            phase(
                &mut m,
                if is_b {
                    &self.energies_b
                } else {
                    &self.energies_a
                },
                t,
            );
            after.push(m.clone());
        }
        if in_b {
            m = &self.overlap * &m;
        }
        let u = self.start.adjoint() * &m;
        let metrics = gate_metrics(u.as_ref(), spec.target.as_ref());
        let total: f64 = durations.iter().sum();
        let mut value = gate_objective(&metrics, total, spec, settings);

        // G = ∂J/∂conj(U)
        let w = u.nrows();
        let mut g = Mat::<c64>::zeros(w, q);
        let mut tr = ZERO;
        for i in 0..q {
            for j in 0..q {
                tr += spec.target[(i, j)].conj() * u[(i, j)];
            }
        }
        if tr.norm() > 0.0 {
            let s = tr / (2.0 * q as f64 * tr.norm());
            for i in 0..q {
                for j in 0..q {
                    g[(i, j)] -= s * spec.target[(i, j)];
                }
            }
        }
        if smooth {
            let mut leaked = 0.0;
            for i in q..w {
                for j in 0..q {
                    leaked += u[(i, j)].norm_sqr();
                    g[(i, j)] += u[(i, j)] * settings.leakage_weight;
                }
            }
            value += settings.leakage_weight * (leaked - metrics.leakage * metrics.leakage);
        } else {
            let mut arg = None;
            let mut largest = -1.0;
            for i in q..w {
                for j in 0..q {
                    if u[(i, j)].norm() > largest {
                        largest = u[(i, j)].norm();
                        arg = Some((i, j));
                    }
                }
            }
            if let Some((i, j)) = arg {
                g[(i, j)] += u[(i, j)] * settings.leakage_weight;
            }
        }

        let excess = (total - spec.max_total_time).max(0.0);
        let mut grad = vec![2.0 * settings.time_weight * excess; durations.len()];
        let mut lam = &self.start * &g;
        let mut in_b = false;
        for k in (0..durations.len()).rev() {
            let is_b = k % 2 == 0;
            if is_b != in_b {
                lam = if is_b {
                    &self.overlap_adj * &lam
                } else {
                    &self.overlap * &lam
                };
                in_b = is_b;
            }
            let e = if is_b {
                &self.energies_b
            } else {
                &self.energies_a
            };
            let psi = &after[k];
            let mut d = 0.0;
            for i in 0..n {
                let mut z = ZERO;
                for j in 0..q {
                    z += lam[(i, j)].conj() * psi[(i, j)];
                }
                d += e[i] * z.im;
            }
            grad[k] += 2.0 * d;
            phase(&mut lam, e, -durations[k]);
        }
        (value, grad)
    }

    /// Full `W† U W`.
    pub fn window_unitary(&self, durations: &[f64]) -> CMat {
        self.propagate(durations, self.start.ncols())
    }
}

/// Fidelity and leakage of a window unitary (all columns, or only the
/// first `q`) whose first `q` states form the computational block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateMetrics {
    /// `|tr(T† U_block)| / q`.
    pub fidelity: f64,
    /// Largest `|U_ij|` from a block state `j` to a non-block state `i`.
    pub leakage: f64,
}

pub fn gate_metrics(window_unitary: MatRef<'_, c64>, target: MatRef<'_, c64>) -> GateMetrics {
    let q = target.nrows();
    let w = window_unitary.nrows();
    let mut tr = ZERO;
    for i in 0..q {
        for j in 0..q {
            tr += target[(i, j)].conj() * window_unitary[(i, j)];
        }
    }
    let mut leakage = 0.0f64;
    for i in q..w {
        for j in 0..q {
            leakage = leakage.max(window_unitary[(i, j)].norm());
        }
    }
    GateMetrics {
        fidelity: (tr.norm() / q as f64).min(1.0),
        leakage,
    }
}

pub mod targets {
    use super::*;

    pub fn identity(n: usize) -> CMat {
        linalg::identity(n)
    }

    pub fn not() -> CMat {
        Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
    }

    pub fn hadamard() -> CMat {
        let s = 1.0 / 2f64.sqrt();
        Mat::from_fn(2, 2, |i, j| {
            c64::new(if i == 1 && j == 1 { -s } else { s }, 0.0)
        })
    }

    /// `diag(1, 1, 1, −1)`.
    pub fn cphase() -> CMat {
        Mat::from_fn(4, 4, |i, j| match (i == j, i) {
            (true, 3) => -ONE,
            (true, _) => ONE,
            _ => ZERO,
        })
    }

    pub fn by_name(name: &str) -> Option<CMat> {
        match name {
            "identity" => Some(identity(2)),
            "not" => Some(not()),
            "hadamard" => Some(hadamard()),
            "cphase" => Some(cphase()),
            _ => None,
        }
    }
}

/// What the gate should do and within which limits.
#[derive(Debug, Clone)]
pub struct GateSpec {
    pub target: CMat,
    /// Number of lowest `H_A` eigenstates in the working window.
    pub window: usize,
    pub leakage_tolerance: f64,
    pub max_total_time: f64,
}

impl GateSpec {
    pub fn new(target: CMat, window: usize, max_total_time: f64) -> Self {
        Self {
            target,
            window,
            leakage_tolerance: 0.01,
            max_total_time,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.target.nrows();
        if self.target.ncols() != q || q == 0 {
            return Err(invalid("target", "must be square"));
        }
        if linalg::unitarity_residual(self.target.as_ref()) > 1e-10 {
            return Err(invalid("target", "must be unitary"));
        }
        if self.window < q {
            return Err(invalid("window", format!("must hold at least {q} states")));
        }
        if !(self.max_total_time > 0.0) {
            return Err(invalid("max_total_time", "must be positive"));
        }
        Ok(())
    }
}

/// Optimizer knobs shared by the one- and two-bit searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub seed: u64,
    /// Weight of `leakage²` in the objective.
    pub leakage_weight: f64,
    /// Weight of the squared excess over the time budget.
    pub time_weight: f64,
    pub nelder_mead: NelderMeadOptions,
    /// L-BFGS iterations applied to each restart after the simplex stage;
    /// zero keeps the search derivative-free.
    pub gradient_iterations: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            leakage_weight: 10.0,
            time_weight: 10.0,
            nelder_mead: NelderMeadOptions::default(),
            gradient_iterations: 300,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GateResult {
    pub durations: Vec<f64>,
    #[serde(skip)]
    pub window_unitary: CMat,
    pub fidelity: f64,
    pub leakage: f64,
    pub total_time: f64,
    pub objective: f64,
    /// Leakage below tolerance and nothing left to gain within `f_tol`.
    pub converged: bool,
    pub best_restart: usize,
    pub restart_objectives: Vec<f64>,
}

/// `(1 − F) + λ·leakage² + μ·max(0, T − T_max)²`.
pub fn gate_objective(
    metrics: &GateMetrics,
    total_time: f64,
    spec: &GateSpec,
    settings: &OptimizerSettings,
) -> f64 {
    let excess = (total_time - spec.max_total_time).max(0.0);
    (1.0 - metrics.fidelity)
        + settings.leakage_weight * metrics.leakage * metrics.leakage
        + settings.time_weight * excess * excess
}

/// Multi-start search over pulse durations (parameterized as squares).
pub(crate) fn optimize_durations(
    prop: &WindowPropagator,
    spec: &GateSpec,
    n_pulses: usize,
    settings: &OptimizerSettings,
) -> Result<GateResult> {
    spec.validate()?;
    if n_pulses == 0 {
        return Err(invalid("pulses", "need at least one pulse"));
    }
    let q = spec.target.nrows();
    let evaluate = |x: &[f64]| {
        let t: Vec<f64> = x.iter().map(|v| v * v).collect();
        let u = prop.propagate(&t, q);
        let m = gate_metrics(u.as_ref(), spec.target.as_ref());
        gate_objective(&m, t.iter().sum(), spec, settings)
    };
    let finish = |x: &[f64], best_restart, restart_objectives| {
        let durations: Vec<f64> = x.iter().map(|v| v * v).collect();
        let u = prop.window_unitary(&durations);
        let m = gate_metrics(u.as_ref(), spec.target.as_ref());
        let total_time = durations.iter().sum();
        GateResult {
            objective: gate_objective(&m, total_time, spec, settings),
            converged: m.leakage < spec.leakage_tolerance
                && total_time <= spec.max_total_time * (1.0 + 1e-9),
            fidelity: m.fidelity,
            leakage: m.leakage,
            total_time,
            window_unitary: u,
            durations,
            best_restart,
            restart_objectives,
        }
    };

    let zero = vec![0.0; n_pulses];
    if evaluate(&zero) <= 1e-14 {
        return Ok(finish(&zero, 0, vec![0.0]));
    }
    let scale = (2.0 * spec.max_total_time / n_pulses as f64).sqrt();
    let sample = |rng: &mut ChaCha8Rng| {
        (0..n_pulses)
            .map(|_| rng.random_range(0.0..scale))
            .collect()
    };
    let mut nm = settings.nelder_mead;
    nm.initial_step *= scale;
    let surrogate = |x: &[f64]| {
        let t: Vec<f64> = x.iter().map(|v| v * v).collect();
        let (v, g) = prop.objective_gradient(&t, spec, settings, true);
        (
            v,
            g.iter()
                .zip(x)
                .map(|(g, x)| 2.0 * x * g)
                .collect::<Vec<f64>>(),
        )
    };
    // the gradient stage descends the smooth bound; the restart keeps
    // whichever point is better under the true objective
    let refine = |m: optim::Minimum| {
        if settings.gradient_iterations == 0 {
            return m;
        }
        let start = optim::Minimum {
            value: surrogate(&m.x).0,
            ..m.clone()
        };
        let r = optim::gradient_polish(&surrogate, start, settings.gradient_iterations);
        let value = evaluate(&r.x);
        if value < m.value {
            optim::Minimum { value, ..r }
        } else {
            optim::Minimum {
                evaluations: r.evaluations,
                ..m
            }
        }
    };
    let r = optim::multi_start_refined(
        &evaluate,
        &sample,
        &refine,
        settings.restarts,
        settings.seed,
        &nm,
    );
    Ok(finish(&r.best.x, r.best_restart, r.values))
}

/// Generators and window of the single-qubit gate problem.
#[derive(Debug, Clone)]
pub struct OneBitProblem {
    pub h_a: HermitianOperator,
    pub h_b: HermitianOperator,
    pub propagator: WindowPropagator,
}

/// `H_A = H(f = 0.495)` and `H_B = H(f = 0.5)` (with the flux of `params`
/// used for `H_A`); the window is the lowest `window` eigenstates of `H_A`.
pub fn one_bit_problem(params: &ModelParams, window: usize, flux_b: f64) -> Result<OneBitProblem> {
    let basis = FockBasis::new(params.n_atoms, 3)?;
    if window > basis.len() {
        return Err(invalid(
            "window",
            format!("exceeds the {} basis states", basis.len()),
        ));
    }
    let h_a = build_qubit_hamiltonian(params, &basis)?;
    let h_b = build_qubit_hamiltonian(&params.with_flux(flux_b), &basis)?;
    let n = basis.len();
    let start = Mat::<c64>::from_fn(n, window, |i, j| if i == j { ONE } else { ZERO });
    let (_, va) = linalg::eigh(h_a.matrix())?;
    let window_cols = &va * &start;
    let propagator = WindowPropagator::new(h_a.matrix(), h_b.matrix(), window_cols.as_ref())?;
    Ok(OneBitProblem {
        h_a,
        h_b,
        propagator,
    })
}

pub fn optimize_one_bit_gate(
    params: &ModelParams,
    spec: &GateSpec,
    n_pulses: usize,
    settings: &OptimizerSettings,
) -> Result<GateResult> {
    spec.validate()?;
    let problem = one_bit_problem(params, spec.window, 0.5)?;
    optimize_durations(&problem.propagator, spec, n_pulses, settings)
}

/// `Ω_t ≈ (ω_⊥/2π) exp(−ΔU/ħω_⊥)`, with `barrier` in the energy units of
/// `ħ omega_perp`. Order of magnitude only.
pub fn wkb_tunneling(omega_perp: f64, barrier: f64) -> Result<f64> {
    if !(omega_perp > 0.0) {
        return Err(invalid("omega_perp", "must be positive"));
    }
    if !(barrier >= 0.0) {
        return Err(invalid("barrier", "must be nonnegative"));
    }
    Ok(omega_perp / (2.0 * std::f64::consts::PI) * (-barrier / omega_perp).exp())
}
