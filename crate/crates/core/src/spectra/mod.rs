//! Diagonalization, parameter sweeps and qubit observables.

mod rabi;
mod ramp;

pub use rabi::{
    qnd_readout, rabi_fock_state, rabi_states, s2_occupation_operator, QndStatistics, RabiStates,
};
pub use ramp::{adiabatic_ramp, gap_profile, GapProfile, RampResult, RampSchedule, RampShape};

use faer::{c64, MatRef};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fock::FockBasis;
use crate::linalg::{self, CMat};
use crate::model::{build_current_operator, build_qubit_hamiltonian, ModelParams, MODE_A, MODE_C};
use crate::operator::HermitianOperator;

/// Sorted spectrum with phase-fixed eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub params: Option<ModelParams>,
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenstates, phase fixed so the largest entry is real
    /// and positive.
    pub eigenvectors: CMat,
    /// `⟨Î_ac⟩` of the lowest states, when computed from a model.
    pub currents: Vec<f64>,
}

impl SpectrumResult {
    /// `ω_q = E₂ − E₁`.
    pub fn qubit_gap(&self) -> f64 {
        self.eigenvalues[1] - self.eigenvalues[0]
    }

    pub fn state(&self, k: usize) -> Vec<c64> {
        linalg::column(self.eigenvectors.as_ref(), k)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest `‖Hv − Ev‖` over the stored pairs.
    pub fn max_residual(&self, h: MatRef<'_, c64>) -> f64 {
        let hv = h * self.eigenvectors.as_ref();
        let mut worst = 0.0f64;
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            let r: f64 = (0..hv.nrows())
                .map(|i| (hv[(i, k)] - self.eigenvectors[(i, k)] * e).norm_sqr())
                .sum();
            worst = worst.max(r.sqrt());
        }
        worst
    }
}

/// Full (`levels = None`) or truncated eigendecomposition.
pub fn diagonalize(h: &HermitianOperator, levels: Option<usize>) -> Result<SpectrumResult> {
    let (mut values, vectors) = linalg::eigh(h.matrix())?;
    let k = levels.unwrap_or(values.len()).min(values.len());
    values.truncate(k);
    Ok(SpectrumResult {
        params: None,
        eigenvalues: values,
        eigenvectors: vectors.subcols(0, k).to_owned(),
        currents: Vec::new(),
    })
}

/// Diagonalizes the qubit Hamiltonian of `params`, keeping `levels` states
/// and their currents.
pub fn solve(params: &ModelParams, basis: &FockBasis, levels: usize) -> Result<SpectrumResult> {
    let h = build_qubit_hamiltonian(params, basis)?;
    let mut s = diagonalize(&h, Some(levels))?;
    let current = build_current_operator(params, basis, (MODE_A, MODE_C))?;
    s.currents = (0..s.len())
        .map(|k| current.expectation(&s.state(k)))
        .collect();
    s.params = Some(*params);
    Ok(s)
}

/// Ascending eigenvalues only.
pub fn energies(params: &ModelParams, basis: &FockBasis) -> Result<Vec<f64>> {
    let h = build_qubit_hamiltonian(params, basis)?;
    linalg::eigvalsh(h.matrix())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxRow {
    pub flux: f64,
    pub energies: Vec<f64>,
    /// `⟨Î_ac⟩` of the two lowest states.
    pub currents: [f64; 2],
    pub qubit_gap: f64,
}

fn check_grid(name: &'static str, grid: &[f64], lo: f64, hi: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid(name, "grid is empty"));
    }
    if let Some(x) = grid.iter().find(|x| !(**x >= lo && **x < hi)) {
        return Err(invalid(name, format!("value {x} outside [{lo}, {hi})")));
    }
    Ok(())
}

/// Spectrum and currents along a flux grid. Rows come back in grid order.
pub fn sweep_flux(params: &ModelParams, f_grid: &[f64], levels: usize) -> Result<Vec<FluxRow>> {
    check_grid("flux", f_grid, 0.0, 1.0)?;
    let basis = FockBasis::new(params.n_atoms, 3)?;
    let levels = levels.max(2);
    f_grid
        .par_iter()
        .map(|&f| {
            let s = solve(&params.with_flux(f), &basis, levels)?;
            Ok(FluxRow {
                flux: f,
                qubit_gap: s.qubit_gap(),
                currents: [s.currents[0], s.currents[1]],
                energies: s.eigenvalues,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingRow {
    pub ratio: f64,
    /// `t₀ = E₂ − E₁` at `f = 1/2`.
    pub splitting: f64,
}

pub fn splitting_vs_ratio(params: &ModelParams, r_grid: &[f64]) -> Result<Vec<SplittingRow>> {
    check_grid("ratio", r_grid, 0.0, f64::INFINITY)?;
    let basis = FockBasis::new(params.n_atoms, 3)?;
    r_grid
        .par_iter()
        .map(|&r| {
            let e = energies(&params.with_ratio(r).with_flux(0.5), &basis)?;
            Ok(SplittingRow {
                ratio: r,
                splitting: e[1] - e[0],
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomSweep {
    pub n_atoms: usize,
    pub omega0: f64,
    pub rows: Vec<FluxRow>,
}

/// Flux sweeps at several atom numbers with `Ω₀ N_t` held fixed.
pub fn sweep_atoms(
    params: &ModelParams,
    n_list: &[usize],
    f_grid: &[f64],
    levels: usize,
) -> Result<Vec<AtomSweep>> {
    if let Some(&n) = n_list.iter().find(|&&n| n == 0) {
        return Err(invalid(
            "n_atoms",
            format!("{n} is not a valid atom number"),
        ));
    }
    n_list
        .iter()
        .map(|&n| {
            let p = params.coscaled(n);
            Ok(AtomSweep {
                n_atoms: n,
                omega0: p.omega0,
                rows: sweep_flux(&p, f_grid, levels)?,
            })
        })
        .collect()
}

/// Qubit gap at one flux for each atom number, under the co-scaling rule.
pub fn gap_vs_atoms(params: &ModelParams, n_list: &[usize]) -> Result<Vec<(usize, f64)>> {
    n_list
        .iter()
        .map(|&n| {
            let p = params.coscaled(n);
            let basis = FockBasis::new(n, 3)?;
            let e = energies(&p, &basis)?;
            if e.len() < 2 {
                return Err(Error::Dimension {
                    expected: 2,
                    got: e.len(),
                });
            }
            Ok((n, e[1] - e[0]))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingRow {
    pub omega0: f64,
    pub energies: Vec<f64>,
    /// `⟨Î_ac⟩ / Ω₀` of the two lowest states.
    pub normalized_currents: [f64; 2],
    pub qubit_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingSweep {
    pub rows: Vec<CouplingRow>,
    /// Row with the smallest qubit gap.
    pub min_gap_index: usize,
}

pub fn sweep_coupling(
    params: &ModelParams,
    omega_grid: &[f64],
    levels: usize,
) -> Result<CouplingSweep> {
    check_grid("omega0", omega_grid, f64::MIN_POSITIVE, f64::INFINITY)?;
    if omega_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("omega0", "grid must be strictly ascending"));
    }
    let basis = FockBasis::new(params.n_atoms, 3)?;
    let levels = levels.max(2);
    let rows: Vec<CouplingRow> = omega_grid
        .par_iter()
        .map(|&w| {
            let s = solve(&params.with_omega0(w), &basis, levels)?;
            Ok(CouplingRow {
                omega0: w,
                qubit_gap: s.qubit_gap(),
                normalized_currents: [s.currents[0] / w, s.currents[1] / w],
                energies: s.eigenvalues,
            })
        })
        .collect::<Result<_>>()?;
    let min_gap_index = rows.iter().enumerate().fold(0, |best, (k, r)| {
        if r.qubit_gap < rows[best].qubit_gap {
            k
        } else {
            best
        }
    });
    Ok(CouplingSweep {
        rows,
        min_gap_index,
    })
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}
