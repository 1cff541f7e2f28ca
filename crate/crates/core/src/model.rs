//! The three-mode qubit Hamiltonian, its current operator, the generic
//! two-body interaction, and the phase-space view of a state.
//!
//! Modes are indexed `a = 0`, `b = 1`, `c = 2`. Energies are in units of
//! the collision strength `U₀` of the working point, and times in units of
//! `ħ/U₀`.
//!
//! The Raman couplings enter with a negative sign,
//!
//! ```text
//! H = s U₀ Σ_α N̂_α² − [ Ω₀ (a†c + b†c) + Ω₁ e^{i2πf} a†b + h.c. ]
//! ```
//!
//! so that the single-particle spectrum is frustrated (doubly degenerate
//! ground level at `Ω₁ = Ω₀`) at `f = 1/2`, where the two lowest many-body
//! levels form the qubit. `s = +1` for the symmetric interaction and `−1`
//! for the negative variant.

use std::f64::consts::PI;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{hopping_operator, FockBasis};
use crate::linalg::{self, CMat, ZERO};
use crate::operator::HermitianOperator;

pub const MODE_A: usize = 0;
pub const MODE_B: usize = 1;
pub const MODE_C: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    Symmetric,
    NegativeSymmetric,
    TwoBodyTensor,
}

impl InteractionKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Symmetric => "symmetric",
            Self::NegativeSymmetric => "negative_symmetric",
            Self::TwoBodyTensor => "two_body_tensor",
        }
    }
}

/// Physical knobs of one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_atoms: usize,
    pub u0: f64,
    pub omega0: f64,
    /// `r₀ = Ω₁ / Ω₀`.
    pub ratio: f64,
    /// `f = φ₀ / 2π`.
    pub flux: f64,
    pub interaction: InteractionKind,
}

/// Coupling ratio at which the 15-atom working point reproduces the quoted
/// qubit gap (see the acceptance suite calibration).
pub const CALIBRATED_RATIO: f64 = 0.75;

/// `2 Ω₀ ⟨N_α⟩ / U₀` with `⟨N_α⟩ = N_t / 3` at the working point.
pub const WORKING_JOSEPHSON_RATIO: f64 = 70.0;

impl Default for ModelParams {
    fn default() -> Self {
        Self::working_point()
    }
}

impl ModelParams {
    /// `N_t = 15`, `U₀ = 1`, `2Ω₀N_t/3 = 70 U₀`, `r₀ = 0.75`, `f = 0.495`.
    pub fn working_point() -> Self {
        let n_atoms = 15;
        Self {
            n_atoms,
            u0: 1.0,
            omega0: omega0_for(WORKING_JOSEPHSON_RATIO, n_atoms, 1.0),
            ratio: CALIBRATED_RATIO,
            flux: 0.495,
            interaction: InteractionKind::Symmetric,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms < 1 {
            return Err(invalid("n_atoms", "must be at least 1"));
        }
        for (name, v) in [
            ("u0", self.u0),
            ("omega0", self.omega0),
            ("ratio", self.ratio),
            ("flux", self.flux),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.omega0 < 0.0 {
            return Err(invalid("omega0", "must be nonnegative"));
        }
        if self.ratio < 0.0 {
            return Err(invalid("ratio", "must be nonnegative"));
        }
        if self.u0 < 0.0 && self.interaction != InteractionKind::TwoBodyTensor {
            return Err(invalid(
                "u0",
                "must be nonnegative; use negative_symmetric for attraction",
            ));
        }
        Ok(())
    }

    pub fn with_flux(mut self, flux: f64) -> Self {
        self.flux = flux;
        self
    }

    pub fn with_ratio(mut self, ratio: f64) -> Self {
        self.ratio = ratio;
        self
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn with_u0(mut self, u0: f64) -> Self {
        self.u0 = u0;
        self
    }

    pub fn with_interaction(mut self, interaction: InteractionKind) -> Self {
        self.interaction = interaction;
        self
    }

    /// Same physics at a different atom number: `U₀` fixed and `Ω₀` scaled
    /// so that `Ω₀ N_t` is unchanged.
    pub fn coscaled(mut self, n_atoms: usize) -> Self {
        self.omega0 *= self.n_atoms as f64 / n_atoms as f64;
        self.n_atoms = n_atoms;
        self
    }

    /// Same couplings at a different atom number.
    pub fn with_atoms(mut self, n_atoms: usize) -> Self {
        self.n_atoms = n_atoms;
        self
    }

    /// Flux fraction reduced to `[0, 1)`.
    pub fn reduced_flux(&self) -> f64 {
        let f = self.flux.rem_euclid(1.0);
        if f >= 1.0 {
            0.0
        } else {
            f
        }
    }

    pub fn omega1(&self) -> f64 {
        self.ratio * self.omega0
    }

    /// `Ω_ab = Ω₁ e^{i 2π f}`.
    pub fn omega_ab(&self) -> c64 {
        let phase = 2.0 * PI * self.reduced_flux();
        c64::new(phase.cos(), phase.sin()) * self.omega1()
    }

    /// `2 Ω₀ ⟨N_α⟩ / U₀` with `⟨N_α⟩ = N_t/3`.
    pub fn josephson_ratio(&self) -> f64 {
        2.0 * self.omega0 * self.n_atoms as f64 / (3.0 * self.u0)
    }

    /// Coefficient multiplying `Σ N̂_α²`.
    pub fn collision_coefficient(&self) -> Result<f64> {
        match self.interaction {
            InteractionKind::Symmetric => Ok(self.u0),
            InteractionKind::NegativeSymmetric => Ok(-self.u0),
            InteractionKind::TwoBodyTensor => Err(Error::TensorRequired),
        }
    }

    /// Single-particle Raman matrix `h` with `H_Raman = Σ h_{αβ} a_α† a_β`.
    pub fn single_particle_matrix(&self) -> [[c64; 3]; 3] {
        let w = c64::new(-self.omega0, 0.0);
        let wab = -self.omega_ab();
        [[ZERO, wab, w], [wab.conj(), ZERO, w], [w, w, ZERO]]
    }
}

/// `Ω₀` giving `2 Ω₀ N_t / (3 U₀) = josephson_ratio`.
pub fn omega0_for(josephson_ratio: f64, n_atoms: usize, u0: f64) -> f64 {
    josephson_ratio * 3.0 * u0 / (2.0 * n_atoms as f64)
}

fn check_qubit_basis(params: &ModelParams, basis: &FockBasis) -> Result<()> {
    if basis.modes() != 3 {
        return Err(Error::BasisMismatch(format!(
            "qubit Hamiltonian needs 3 modes, basis has {}",
            basis.modes()
        )));
    }
    if basis.particles() != params.n_atoms {
        return Err(Error::BasisMismatch(format!(
            "params have N_t = {}, basis has N = {}",
            params.n_atoms,
            basis.particles()
        )));
    }
    Ok(())
}

/// Adds `Σ h_{αβ} a_α† a_β` into `m`.
fn add_raman(m: &mut CMat, h: &[[c64; 3]; 3], basis: &FockBasis) {
    let mut scratch = [0u32; 3];
    for (col, occ) in basis.iter().enumerate() {
        for alpha in 0..3 {
            m[(col, col)] += h[alpha][alpha] * occ[alpha] as f64;
        }
        for beta in 0..3 {
            if occ[beta] == 0 {
                continue;
            }
            for alpha in 0..3 {
                if alpha == beta || h[alpha][beta] == ZERO {
                    continue;
                }
                scratch.copy_from_slice(occ);
                let amp = (scratch[beta] as f64).sqrt();
                scratch[beta] -= 1;
                scratch[alpha] += 1;
                let amp = amp * (scratch[alpha] as f64).sqrt();
                let row = basis.index_of(&scratch).expect("hop conserves N");
                m[(row, col)] += h[alpha][beta] * amp;
            }
        }
    }
}

fn raman_matrix(params: &ModelParams, basis: &FockBasis) -> CMat {
    let n = basis.len();
    let mut m = Mat::<c64>::zeros(n, n);
    add_raman(&mut m, &params.single_particle_matrix(), basis);
    m
}

/// Three-mode qubit Hamiltonian with the symmetric (or negated) collision term.
pub fn build_qubit_hamiltonian(
    params: &ModelParams,
    basis: &FockBasis,
) -> Result<HermitianOperator> {
    params.validate()?;
    check_qubit_basis(params, basis)?;
    let g = params.collision_coefficient()?;
    let mut m = raman_matrix(params, basis);
    for (k, occ) in basis.iter().enumerate() {
        let n2: f64 = occ.iter().map(|&n| (n as f64) * (n as f64)).sum();
        m[(k, k)] += c64::new(g * n2, 0.0);
    }
    HermitianOperator::for_basis(basis, m)
}

/// Only the Raman part of the qubit Hamiltonian (equals `U₀ = 0`).
pub fn build_raman_hamiltonian(
    params: &ModelParams,
    basis: &FockBasis,
) -> Result<HermitianOperator> {
    params.validate()?;
    check_qubit_basis(params, basis)?;
    HermitianOperator::for_basis(basis, raman_matrix(params, basis))
}

/// `Î_{αβ} = iΩ₀ (a_α† a_β − a_β† a_α)`.
pub fn build_current_operator(
    params: &ModelParams,
    basis: &FockBasis,
    pair: (usize, usize),
) -> Result<HermitianOperator> {
    hopping_operator(pair, c64::new(0.0, params.omega0), basis)
}

/// Coefficients `U_{αβα'β'}` of `Σ U a_α† a_β† a_β' a_α'`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTensor {
    modes: usize,
    values: Vec<c64>,
}

impl InteractionTensor {
    pub fn zero(modes: usize) -> Self {
        Self {
            modes,
            values: vec![ZERO; modes.pow(4)],
        }
    }

    /// `U_{αβα'β'} = δ_{αβ} δ_{αα'} δ_{ββ'} U₀`, i.e. `U₀ Σ_α n_α (n_α − 1)`.
    pub fn symmetric(modes: usize, u0: f64) -> Self {
        let mut t = Self::zero(modes);
        for a in 0..modes {
            t.set(a, a, a, a, c64::new(u0, 0.0));
        }
        t
    }

    /// Spin-exchange `c₂ F⃗₁·F⃗₂` for spin-1 atoms, with modes `(a, b, c)`
    /// carrying `M_F = (+1, −1, 0)`. Coefficients are
    /// `(c₂/2) Σ_k (F_k)_{αα'} (F_k)_{ββ'}`.
    pub fn spin_exchange(c2: f64) -> Self {
        // spin-1 matrices in the (+1, 0, -1) ordering
        let s = 1.0 / 2f64.sqrt();
        let fx = [[0.0, s, 0.0], [s, 0.0, s], [0.0, s, 0.0]];
        let fy_im = [[0.0, -s, 0.0], [s, 0.0, -s], [0.0, s, 0.0]];
        let fz = [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]];
        // mode index -> M_F row in the (+1, 0, -1) ordering
        let row = [0usize, 2, 1];
        let f = |k: usize, i: usize, j: usize| -> c64 {
            let (i, j) = (row[i], row[j]);
            match k {
                0 => c64::new(fx[i][j], 0.0),
                1 => c64::new(0.0, fy_im[i][j]),
                _ => c64::new(fz[i][j], 0.0),
            }
        };
        let mut t = Self::zero(3);
        for a in 0..3 {
            for b in 0..3 {
                for ap in 0..3 {
                    for bp in 0..3 {
                        let v: c64 = (0..3).map(|k| f(k, a, ap) * f(k, b, bp)).sum();
                        t.set(a, b, ap, bp, v * (0.5 * c2));
                    }
                }
            }
        }
        t
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    fn offset(&self, a: usize, b: usize, ap: usize, bp: usize) -> usize {
        ((a * self.modes + b) * self.modes + ap) * self.modes + bp
    }

    pub fn get(&self, a: usize, b: usize, ap: usize, bp: usize) -> c64 {
        self.values[self.offset(a, b, ap, bp)]
    }

    pub fn set(&mut self, a: usize, b: usize, ap: usize, bp: usize, v: c64) {
        let k = self.offset(a, b, ap, bp);
        self.values[k] = v;
    }

    /// Largest violation of `U_{α'β'αβ} = conj(U_{αβα'β'})`.
    pub fn hermiticity_residual(&self) -> f64 {
        let m = self.modes;
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                for ap in 0..m {
                    for bp in 0..m {
                        let d = self.get(ap, bp, a, b) - self.get(a, b, ap, bp).conj();
                        worst = worst.max(d.norm());
                    }
                }
            }
        }
        worst
    }
}

/// Raman term plus the general normal-ordered two-body interaction.
///
/// For the symmetric tensor this differs from [`build_qubit_hamiltonian`]
/// by the constant `−U₀ N_t`, because `Σ n_α(n_α − 1) = Σ n_α² − N_t` on a
/// fixed-number sector.
pub fn build_two_body_tensor_hamiltonian(
    params: &ModelParams,
    tensor: &InteractionTensor,
    basis: &FockBasis,
) -> Result<HermitianOperator> {
    params.validate()?;
    check_qubit_basis(params, basis)?;
    if tensor.modes() != 3 {
        return Err(Error::BasisMismatch(format!(
            "tensor has {} modes, basis has 3",
            tensor.modes()
        )));
    }
    let residual = tensor.hermiticity_residual();
    if residual > 1e-12 {
        return Err(Error::NotHermitian { residual });
    }
    let mut m = raman_matrix(params, basis);
    let mut scratch = [0u32; 3];
    for (col, occ) in basis.iter().enumerate() {
        for ap in 0..3 {
            for bp in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        let u = tensor.get(a, b, ap, bp);
                        if u == ZERO {
                            continue;
                        }
                        scratch.copy_from_slice(occ);
                        let mut amp = 1.0;
                        // a_α' first, then a_β', then a_β†, then a_α†
                        for (mode, raise) in [(ap, false), (bp, false), (b, true), (a, true)] {
                            if raise {
                                scratch[mode] += 1;
                                amp *= (scratch[mode] as f64).sqrt();
                            } else {
                                if scratch[mode] == 0 {
                                    amp = 0.0;
                                    break;
                                }
                                amp *= (scratch[mode] as f64).sqrt();
                                scratch[mode] -= 1;
                            }
                        }
                        if amp == 0.0 {
                            continue;
                        }
                        let row = basis.index_of(&scratch).expect("two-body term conserves N");
                        m[(row, col)] += u * amp;
                    }
                }
            }
        }
    }
    HermitianOperator::for_basis(basis, m)
}

/// Samples of `⟨φ_a, φ_b|ψ⟩` on a uniform periodic grid.
#[derive(Debug, Clone)]
pub struct PhaseGrid {
    grid_a: usize,
    grid_b: usize,
    amplitudes: Vec<c64>,
}

impl PhaseGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.grid_a, self.grid_b)
    }

    pub fn phi_a(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.grid_a as f64
    }

    pub fn phi_b(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.grid_b as f64
    }

    pub fn amplitude(&self, i: usize, j: usize) -> c64 {
        self.amplitudes[i * self.grid_b + j]
    }

    /// `|ψ(φ_a, φ_b)|²`, row-major in `φ_a`.
    pub fn probability(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn mean_probability(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() / self.amplitudes.len() as f64
    }

    /// Strict local maxima of `|ψ|²` over the periodic 8-neighbourhood that
    /// exceed `floor_fraction` times the global maximum.
    pub fn local_maxima(&self, floor_fraction: f64) -> Vec<(usize, usize)> {
        let p = self.probability();
        let (ga, gb) = (self.grid_a, self.grid_b);
        let top = p.iter().cloned().fold(0.0, f64::max);
        let floor = floor_fraction * top;
        let at = |i: isize, j: isize| {
            let i = i.rem_euclid(ga as isize) as usize;
            let j = j.rem_euclid(gb as isize) as usize;
            p[i * gb + j]
        };
        let mut peaks = Vec::new();
        for i in 0..ga {
            for j in 0..gb {
                let v = p[i * gb + j];
                if v < floor {
                    continue;
                }
                let (ii, jj) = (i as isize, j as isize);
                let is_peak = (-1..=1)
                    .flat_map(|di| (-1..=1).map(move |dj| (di, dj)))
                    .filter(|&d| d != (0, 0))
                    .all(|(di, dj)| v > at(ii + di, jj + dj));
                if is_peak {
                    peaks.push((i, j));
                }
            }
        }
        peaks
    }
}

/// `ψ(φ_a, φ_b) = Σ c_{n_a n_b} e^{−iφ_a n_a − iφ_b n_b}` for a 3-mode state.
pub fn phase_wavefunction(
    state: &[c64],
    basis: &FockBasis,
    grid: (usize, usize),
) -> Result<PhaseGrid> {
    if basis.modes() != 3 {
        return Err(Error::BasisMismatch("phase view needs 3 modes".into()));
    }
    if state.len() != basis.len() {
        return Err(Error::Dimension {
            expected: basis.len(),
            got: state.len(),
        });
    }
    let norm = linalg::norm(state);
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm });
    }
    let n = basis.particles();
    let (ga, gb) = grid;
    if ga <= 2 * n || gb <= 2 * n {
        return Err(invalid(
            "grid",
            format!("both sizes must exceed 2 N_t = {}", 2 * n),
        ));
    }
    // coefficients c[n_a][n_b]
    let mut coeff = vec![ZERO; (n + 1) * (n + 1)];
    for (k, occ) in basis.iter().enumerate() {
        coeff[occ[0] as usize * (n + 1) + occ[1] as usize] = state[k];
    }
    let phase = |g: usize, k: usize, m: usize| {
        let x = -2.0 * PI * ((k * m) % g) as f64 / g as f64;
        c64::new(x.cos(), x.sin())
    };
    // partial sums over n_b for every φ_b
    let mut partial = vec![ZERO; (n + 1) * gb];
    for na in 0..=n {
        for j in 0..gb {
            partial[na * gb + j] = (0..=n - na)
                .map(|nb| coeff[na * (n + 1) + nb] * phase(gb, j, nb))
                .sum();
        }
    }
    let mut amplitudes = vec![ZERO; ga * gb];
    for i in 0..ga {
        for na in 0..=n {
            let e = phase(ga, i, na);
            for j in 0..gb {
                amplitudes[i * gb + j] += e * partial[na * gb + j];
            }
        }
    }
    Ok(PhaseGrid {
        grid_a: ga,
        grid_b: gb,
        amplitudes,
    })
}

/// Parameters of the equivalent flux-qubit phase model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseModelParams {
    /// `E_J = 2 Ω₀ N_t / 3`.
    pub josephson_energy: f64,
    /// `E_c = 3 U₀ / 4`.
    pub charging_energy: f64,
    /// `α = r₀`.
    pub alpha: f64,
}

impl PhaseModelParams {
    pub fn ej_over_ec(&self) -> f64 {
        self.josephson_energy / self.charging_energy
    }
}

pub fn phase_model_params(params: &ModelParams) -> PhaseModelParams {
    PhaseModelParams {
        josephson_energy: 2.0 * params.omega0 * params.n_atoms as f64 / 3.0,
        charging_energy: 0.75 * params.u0,
        alpha: params.ratio,
    }
}
