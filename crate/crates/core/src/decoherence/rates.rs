//! Effective qubit decoherence rates from particle loss.
//!
//! For a qubit state `|Ψ⟩ = cos(θ/2)|ψ₁⟩ + e^{iχ} sin(θ/2)|ψ₂⟩` the rate
//! bracket is `Σ_α ⟨Ψ|L_α†L_α|Ψ⟩ − Σ_α |⟨Ψ̃|L_α|Ψ⟩|²`, where `|Ψ̃⟩` carries
//! the same coefficients in the qubit eigenbasis of the depleted sector.

use std::f64::consts::PI;

use faer::c64;
use rayon::prelude::*;
use serde::Serialize;

use super::{collapse_matrix, LossKind};
use crate::error::{invalid, Error, Result};
use crate::fock::FockBasis;
use crate::linalg::{self, ZERO};
use crate::model::{build_qubit_hamiltonian, ModelParams};

type Mat2 = [[c64; 2]; 2];

/// Qubit states of the full and depleted sectors with the matrices the
/// bracket needs.
#[derive(Debug, Clone)]
pub struct QubitPair {
    pub kind: LossKind,
    pub n_atoms: usize,
    /// `⟨ψ_k|Σ L†L|ψ_l⟩`.
    pub decay: Mat2,
    /// `⟨ψ̃_k|L_α|ψ_l⟩` per mode.
    pub transfer: Vec<Mat2>,
}

fn lowest_two(params: &ModelParams, n: usize) -> Result<(Vec<c64>, Vec<c64>)> {
    let basis = FockBasis::new(n, 3)?;
    let h = build_qubit_hamiltonian(&params.with_atoms(n), &basis)?;
    let (e, v) = linalg::eigh(h.matrix())?;
    if e.len() < 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: e.len(),
        });
    }
    let scale = e.iter().map(|x| x.abs()).fold(1.0, f64::max);
    for (lower, upper) in [(0usize, 1usize), (1, 2)] {
        let gap = e[upper] - e[lower];
        if gap < 1e-10 * scale {
            return Err(Error::DegenerateQubit { lower, upper, gap });
        }
    }
    Ok((linalg::column(v.as_ref(), 0), linalg::column(v.as_ref(), 1)))
}

pub fn qubit_pair(params: &ModelParams, kind: LossKind) -> Result<QubitPair> {
    let n = params.n_atoms;
    let s = kind.step();
    if n < s + 2 {
        return Err(invalid("n_atoms", format!("need at least {} atoms", s + 2)));
    }
    let top = lowest_two(params, n)?;
    let low = lowest_two(params, n - s)?;
    let top = [top.0, top.1];
    let mut low = [low.0, low.1];

    let ls: Vec<_> = (0..3)
        .map(|a| collapse_matrix(kind, a, n))
        .collect::<Result<_>>()?;
    let applied: Vec<[Vec<c64>; 2]> = ls
        .iter()
        .map(|l| {
            [
                linalg::mat_vec(l.as_ref(), &top[0]),
                linalg::mat_vec(l.as_ref(), &top[1]),
            ]
        })
        .collect();

    // align the depleted-sector phases so Σ_α ⟨ψ̃_k|L_α|ψ_k⟩ is real positive
    for k in 0..2 {
        let diag: c64 = applied.iter().map(|a| linalg::dot(&low[k], &a[k])).sum();
        if diag.norm() > 0.0 {
            let phase = diag / diag.norm();
            for x in low[k].iter_mut() {
                *x *= phase;
            }
        }
    }

    let mut decay = [[ZERO; 2]; 2];
    for a in &applied {
        for k in 0..2 {
            for l in 0..2 {
                decay[k][l] += linalg::dot(&a[k], &a[l]);
            }
        }
    }
    let transfer = applied
        .iter()
        .map(|a| std::array::from_fn(|k| std::array::from_fn(|l| linalg::dot(&low[k], &a[l]))))
        .collect();
    Ok(QubitPair {
        kind,
        n_atoms: n,
        decay,
        transfer,
    })
}

/// The rate bracket as a function on the Bloch sphere.
#[derive(Debug, Clone)]
pub struct LossBracket<'a> {
    pub pair: &'a QubitPair,
    pub include_second_term: bool,
}

fn quad(m: &Mat2, c: &[c64; 2]) -> c64 {
    let mut s = ZERO;
    for k in 0..2 {
        for l in 0..2 {
            s += c[k].conj() * m[k][l] * c[l];
        }
    }
    s
}

impl LossBracket<'_> {
    pub fn coefficients(theta: f64, chi: f64) -> [c64; 2] {
        let (s, c) = (0.5 * theta).sin_cos();
        [c64::new(c, 0.0), c64::new(chi.cos(), chi.sin()) * s]
    }

    pub fn first_term(&self, c: &[c64; 2]) -> f64 {
        quad(&self.pair.decay, c).re
    }

    pub fn second_term(&self, c: &[c64; 2]) -> f64 {
        self.pair
            .transfer
            .iter()
            .map(|m| quad(m, c).norm_sqr())
            .sum()
    }

    pub fn value(&self, c: &[c64; 2]) -> f64 {
        let first = self.first_term(c);
        if self.include_second_term {
            first - self.second_term(c)
        } else {
            first
        }
    }

    pub fn at(&self, theta: f64, chi: f64) -> f64 {
        self.value(&Self::coefficients(theta, chi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossRateOptions {
    pub theta_points: usize,
    pub chi_points: usize,
    /// Final grid spacing of the local refinement.
    pub resolution: f64,
    pub include_second_term: bool,
}

impl Default for LossRateOptions {
    fn default() -> Self {
        Self {
            theta_points: 33,
            chi_points: 64,
            resolution: 1e-3,
            include_second_term: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossRateResult {
    pub n_atoms: usize,
    pub flux: f64,
    /// `γ_eff / γ₀`.
    pub ratio: f64,
    pub theta: f64,
    pub chi: f64,
    pub first_term: f64,
    pub second_term: f64,
}

/// Maximizes the bracket on a `(θ, χ)` grid, then refines locally.
pub fn maximize_bracket(bracket: &LossBracket<'_>, options: &LossRateOptions) -> (f64, f64, f64) {
    let nt = options.theta_points.max(3);
    let nc = options.chi_points.max(4);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..nt {
        let th = PI * i as f64 / (nt - 1) as f64;
        for j in 0..nc {
            let ch = 2.0 * PI * j as f64 / nc as f64;
            let v = bracket.at(th, ch);
            if v > best.0 {
                best = (v, th, ch);
            }
        }
    }
    let mut h = (PI / (nt - 1) as f64).max(2.0 * PI / nc as f64);
    while h > options.resolution {
        h *= 0.5;
        let (_, th0, ch0) = best;
        for di in -2i32..=2 {
            for dj in -2i32..=2 {
                let th = (th0 + di as f64 * h).clamp(0.0, PI);
                let ch = (ch0 + dj as f64 * h).rem_euclid(2.0 * PI);
                let v = bracket.at(th, ch);
                if v > best.0 {
                    best = (v, th, ch);
                }
            }
        }
    }
    best
}

/// `γ_eff/γ₀` for single-atom loss (or the dimensionless bracket maximum
/// for three-body loss).
pub fn effective_loss_rate(
    params: &ModelParams,
    kind: LossKind,
    options: &LossRateOptions,
) -> Result<LossRateResult> {
    let pair = qubit_pair(params, kind)?;
    let bracket = LossBracket {
        pair: &pair,
        include_second_term: options.include_second_term,
    };
    let (ratio, theta, chi) = maximize_bracket(&bracket, options);
    let c = LossBracket::coefficients(theta, chi);
    Ok(LossRateResult {
        n_atoms: params.n_atoms,
        flux: params.reduced_flux(),
        ratio,
        theta,
        chi,
        first_term: bracket.first_term(&c),
        second_term: bracket.second_term(&c),
    })
}

/// `γ₀⁽³⁾ = K₃ (3π³)^{−3/2} ρ² / (72 N_t²)`, in s⁻¹ for `K₃` in cm⁶/s and
/// `ρ` in cm⁻³.
pub fn three_body_base_rate(k3: f64, density: f64, n_atoms: usize) -> Result<f64> {
    if !(k3 > 0.0) {
        return Err(invalid("k3", "must be positive"));
    }
    if !(density > 0.0) {
        return Err(invalid("density", "must be positive"));
    }
    if n_atoms == 0 {
        return Err(invalid("n_atoms", "must be at least 1"));
    }
    let n = n_atoms as f64;
    Ok(k3 * (3.0 * PI.powi(3)).powf(-1.5) * density * density / (72.0 * n * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeBodyRow {
    pub n_atoms: usize,
    /// `γ₀⁽³⁾` in s⁻¹.
    pub base_rate: f64,
    pub bracket: f64,
    /// `γ_eff` in s⁻¹.
    pub effective_rate: f64,
    /// `γ_eff / (γ₀⁽³⁾ N_t²)`.
    pub normalized: f64,
}

/// Three-body rates for each atom number, with `Ω₀ N_t` held fixed.
pub fn three_body_effective_rate(
    params: &ModelParams,
    k3: f64,
    density: f64,
    n_list: &[usize],
    options: &LossRateOptions,
) -> Result<Vec<ThreeBodyRow>> {
    n_list
        .par_iter()
        .map(|&n| {
            let base = three_body_base_rate(k3, density, n)?;
            let p = params.coscaled(n);
            let r = effective_loss_rate(&p, LossKind::ThreeBody, options)?;
            let nf = n as f64;
            Ok(ThreeBodyRow {
                n_atoms: n,
                base_rate: base,
                bracket: r.ratio,
                effective_rate: base * r.ratio,
                normalized: r.ratio / (nf * nf),
            })
        })
        .collect()
}
