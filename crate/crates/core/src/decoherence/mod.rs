//! Particle-loss master equation on sector-decomposed density matrices.
//!
//! With collapse operators `L_α` (`a_α` for single-atom loss, `a_α³` for
//! three-body loss) the evolution is
//!
//! ```text
//! dρ/dt = −i[H, ρ] − γ Σ_α (L_α†L_α ρ + ρ L_α†L_α − 2 L_α ρ L_α†)
//! ```
//!
//! Loss only moves weight from sector `n` to `n − s` (`s = 1` or `3`), so
//! each step is solved sector by sector from the top down.

mod rates;

pub use rates::{
    effective_loss_rate, qubit_pair, three_body_base_rate, three_body_effective_rate, LossBracket,
    LossRateOptions, LossRateResult, QubitPair, ThreeBodyRow,
};

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{annihilation_matrix, FockBasis};
use crate::linalg::{self, CMat, ONE};
use crate::model::{build_qubit_hamiltonian, ModelParams};
use crate::operator::HermitianOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    SingleAtom,
    ThreeBody,
}

impl LossKind {
    /// Atoms removed per event.
    pub fn step(self) -> usize {
        match self {
            Self::SingleAtom => 1,
            Self::ThreeBody => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossChannel {
    pub kind: LossKind,
    /// `γ₀` or `γ₀⁽³⁾`, in units of `U₀`.
    pub rate: f64,
}

impl LossChannel {
    pub fn single_atom(rate: f64) -> Self {
        Self {
            kind: LossKind::SingleAtom,
            rate,
        }
    }

    pub fn three_body(rate: f64) -> Self {
        Self {
            kind: LossKind::ThreeBody,
            rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(invalid("rate", "must be finite and nonnegative"));
        }
        Ok(())
    }

    /// Sectors reachable from `top`, in descending order.
    pub fn sectors(&self, top: usize) -> Vec<usize> {
        let s = self.kind.step();
        (0..=top / s).map(|k| top - k * s).collect()
    }
}

/// `L_α = a_α^s` from `from` to `from − s` atoms, as a Fock-basis matrix.
pub fn collapse_matrix(kind: LossKind, mode: usize, from: usize) -> Result<CMat> {
    let s = kind.step();
    if from < s {
        return Err(invalid("sector", format!("{from} atoms cannot lose {s}")));
    }
    let mut out: Option<CMat> = None;
    for k in 0..s {
        let hi = FockBasis::new(from - k, 3)?;
        let lo = FockBasis::new(from - k - 1, 3)?;
        let a = annihilation_matrix(mode, &hi, &lo)?;
        out = Some(match out {
            None => a.matrix().to_owned(),
            Some(m) => a.matrix() * m,
        });
    }
    Ok(out.expect("at least one factor"))
}

/// Block-diagonal density matrix over particle-number sectors (Fock basis).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    /// `(n, ρ⁽ⁿ⁾)`, descending in `n`.
    blocks: Vec<(usize, CMat)>,
}

impl DensityMatrix {
    pub fn from_blocks(mut blocks: Vec<(usize, CMat)>) -> Result<Self> {
        blocks.sort_by(|a, b| b.0.cmp(&a.0));
        if blocks.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("blocks", "duplicate sector"));
        }
        for (n, m) in &blocks {
            let d = FockBasis::dimension(*n, 3);
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Dimension {
                    expected: d,
                    got: m.nrows().max(m.ncols()),
                });
            }
        }
        let rho = Self { blocks };
        let norm = rho.trace();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` in the `n`-atom sector.
    pub fn pure(state: &[c64], n: usize) -> Result<Self> {
        let d = FockBasis::dimension(n, 3);
        if state.len() != d {
            return Err(Error::Dimension {
                expected: d,
                got: state.len(),
            });
        }
        let norm = linalg::norm(state);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm });
        }
        let m = Mat::from_fn(d, d, |i, j| state[i] * state[j].conj());
        Ok(Self {
            blocks: vec![(n, m)],
        })
    }

    pub fn blocks(&self) -> &[(usize, CMat)] {
        &self.blocks
    }

    pub fn block(&self, n: usize) -> Option<MatRef<'_, c64>> {
        self.blocks.iter().find(|b| b.0 == n).map(|b| b.1.as_ref())
    }

    pub fn top(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.0)
    }

    pub fn sector_trace(&self, n: usize) -> f64 {
        self.block(n)
            .map_or(0.0, |m| (0..m.nrows()).map(|i| m[(i, i)].re).sum())
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|(n, _)| self.sector_trace(*n)).sum()
    }

    /// Smallest eigenvalue over all blocks (after Hermitian symmetrization).
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut worst = f64::INFINITY;
        for (_, m) in &self.blocks {
            let h = Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
                (m[(i, j)] + m[(j, i)].conj()) * 0.5
            });
            let e = linalg::eigvalsh(h.as_ref())?;
            worst = worst.min(e[0]);
        }
        Ok(worst)
    }

    pub fn hermitian_residual(&self) -> f64 {
        self.blocks
            .iter()
            .map(|(_, m)| linalg::hermitian_residual(m.as_ref()))
            .fold(0.0, f64::max)
    }

    /// Sorted eigenvalues of the whole block-diagonal matrix.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let mut all = Vec::new();
        for (_, m) in &self.blocks {
            let h = Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
                (m[(i, j)] + m[(j, i)].conj()) * 0.5
            });
            all.extend(linalg::eigvalsh(h.as_ref())?);
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }

    /// Largest entry-wise difference over all sectors of either matrix.
    pub fn max_difference(&self, other: &Self) -> f64 {
        let mut sectors: Vec<usize> = self
            .blocks
            .iter()
            .chain(&other.blocks)
            .map(|b| b.0)
            .collect();
        sectors.sort_unstable();
        sectors.dedup();
        let mut worst = 0.0f64;
        for n in sectors {
            match (self.block(n), other.block(n)) {
                (Some(a), Some(b)) => worst = worst.max(linalg::max_abs((a - b).as_ref())),
                (Some(a), None) | (None, Some(a)) => worst = worst.max(linalg::max_abs(a)),
                (None, None) => {}
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .map(|(_, m)| linalg::max_abs(m.as_ref()))
            .fold(0.0, f64::max)
    }
}

/// Sector Hamiltonians for every sector reachable from `top`: the qubit
/// Hamiltonian of `params` at each atom number.
pub fn sector_hamiltonians(
    params: &ModelParams,
    top: usize,
    channel: &LossChannel,
) -> Result<Vec<HermitianOperator>> {
    channel
        .sectors(top)
        .into_iter()
        .map(|n| {
            if n == 0 {
                return HermitianOperator::new(0, 3, Mat::zeros(1, 1));
            }
            let basis = FockBasis::new(n, 3)?;
            build_qubit_hamiltonian(&params.with_atoms(n), &basis)
        })
        .collect()
}

/// `H = 0` in every reachable sector (interaction picture).
pub fn zero_hamiltonians(top: usize, channel: &LossChannel) -> Result<Vec<HermitianOperator>> {
    channel
        .sectors(top)
        .into_iter()
        .map(|n| {
            let d = FockBasis::dimension(n, 3);
            HermitianOperator::new(n, 3, Mat::zeros(d, d))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindbladOptions {
    /// Initial step.
    pub step: f64,
    /// Accepted accumulated step-doubling error estimate (max entry).
    pub tolerance: f64,
    pub max_halvings: u32,
    /// Record trace and positivity after every step.
    pub monitor: bool,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        Self {
            step: 0.01,
            tolerance: 1e-9,
            max_halvings: 12,
            monitor: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LindbladSample {
    pub time: f64,
    pub trace: f64,
    pub top_trace: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct LindbladResult {
    pub rho: DensityMatrix,
    pub steps: usize,
    pub step: f64,
    pub error_estimate: f64,
    pub samples: Vec<LindbladSample>,
}

/// Per-sector data: `M = H − iγK` diagonalized as `P D P⁻¹`.
struct Sector {
    n: usize,
    p: CMat,
    p_inv: CMat,
    d: Vec<c64>,
    m: CMat,
    /// `L_α` into the sector below, when one exists.
    lowering: Vec<CMat>,
}

fn decay_diagonal(kind: LossKind, basis: &FockBasis) -> Vec<f64> {
    basis
        .iter()
        .map(|occ| {
            occ.iter()
                .map(|&n| {
                    let n = n as f64;
                    match kind {
                        LossKind::SingleAtom => n,
                        LossKind::ThreeBody => n * (n - 1.0) * (n - 2.0),
                    }
                })
                .sum()
        })
        .collect()
}

fn build_sector(h: &HermitianOperator, channel: &LossChannel, has_lower: bool) -> Result<Sector> {
    let n = h.particles();
    let basis = FockBasis::new(n, 3)?;
    let k = decay_diagonal(channel.kind, &basis);
    let dim = basis.len();
    let g = channel.rate;
    let m = Mat::<c64>::from_fn(dim, dim, |i, j| {
        let mut v = h.matrix()[(i, j)];
        if i == j {
            v -= c64::new(0.0, g * k[i]);
        }
        v
    });
    // K commutes with H when it is a multiple of the identity
    let scalar_k = k.iter().all(|x| (x - k[0]).abs() == 0.0);
    let (p, d, p_inv) = if scalar_k || g == 0.0 {
        let (e, v) = linalg::eigh(h.matrix())?;
        let d = e.iter().map(|&x| c64::new(x, -g * k[0])).collect();
        let vi = v.adjoint().to_owned();
        (v, d, vi)
    } else {
        let evd = m
            .eigen()
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let p = evd.U().to_owned();
        let s = evd.S().column_vector();
        let d = (0..dim).map(|i| s[i]).collect();
        let p_inv = p.partial_piv_lu().solve(linalg::identity(dim).as_ref());
        (p, d, p_inv)
    };
    let lowering = if has_lower {
        (0..3)
            .map(|a| collapse_matrix(channel.kind, a, n))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(Sector {
        n,
        p,
        p_inv,
        d,
        m,
        lowering,
    })
}

impl Sector {
    /// `L(ρ) = −i(Mρ − ρM†)`.
    fn generator(&self, rho: MatRef<'_, c64>) -> CMat {
        let a = &self.m * rho;
        let b = rho * self.m.adjoint();
        linalg::scaled((a - b).as_ref(), c64::new(0.0, -1.0))
    }

    /// `2γ Σ_α L_α ρ L_α†` fed into the sector below.
    fn feed(&self, rho: MatRef<'_, c64>, rate: f64) -> Option<CMat> {
        let mut out: Option<CMat> = None;
        for l in &self.lowering {
            let t = l * rho * l.adjoint();
            out = Some(match out {
                None => t,
                Some(o) => o + t,
            });
        }
        out.map(|o| linalg::scaled(o.as_ref(), c64::new(2.0 * rate, 0.0)))
    }

    /// Implicit midpoint step with midpoint source `source`.
    fn step(&self, rho: MatRef<'_, c64>, h: f64, source: Option<&CMat>) -> CMat {
        let mut rhs =
            rho.to_owned() + linalg::scaled(self.generator(rho).as_ref(), c64::new(0.5 * h, 0.0));
        if let Some(s) = source {
            rhs += linalg::scaled(s.as_ref(), c64::new(h, 0.0));
        }
        let mut x = &self.p_inv * rhs * self.p_inv.adjoint();
        let half = c64::new(0.0, 0.5 * h);
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                x[(i, j)] /= ONE + half * (self.d[i] - self.d[j].conj());
            }
        }
        &self.p * x * self.p.adjoint()
    }
}

/// One implicit-midpoint step of the whole cascade.
fn cascade_step(sectors: &[Sector], blocks: &[CMat], h: f64, rate: f64) -> Vec<CMat> {
    let mut out: Vec<CMat> = Vec::with_capacity(blocks.len());
    for (k, sector) in sectors.iter().enumerate() {
        let source = if k == 0 {
            None
        } else {
            let up = &sectors[k - 1];
            let old = up.feed(blocks[k - 1].as_ref(), rate);
            let new = up.feed(out[k - 1].as_ref(), rate);
            match (old, new) {
                (Some(a), Some(b)) => Some(linalg::scaled((a + b).as_ref(), c64::new(0.5, 0.0))),
                _ => None,
            }
        };
        out.push(sector.step(blocks[k].as_ref(), h, source.as_ref()));
    }
    out
}

fn to_density(sectors: &[Sector], blocks: Vec<CMat>) -> DensityMatrix {
    DensityMatrix {
        blocks: sectors.iter().map(|s| s.n).zip(blocks).collect(),
    }
}

/// Integrates the loss master equation for time `t`.
///
/// Each step combines one step of `h` and two of `h/2` by Richardson
/// extrapolation; the summed differences form the error estimate, and the
/// whole run is repeated with half the step until it meets the tolerance.
/// Both partial results preserve the trace exactly, so the combination does
/// as well.
pub fn lindblad_evolve(
    rho0: &DensityMatrix,
    hamiltonians: &[HermitianOperator],
    channel: &LossChannel,
    t: f64,
    options: &LindbladOptions,
) -> Result<LindbladResult> {
    channel.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", "must be finite and nonnegative"));
    }
    if !(options.step > 0.0 && options.tolerance > 0.0) {
        return Err(invalid("lindblad", "step and tolerance must be positive"));
    }
    let top = rho0.top();
    let levels = channel.sectors(top);
    let mut sectors = Vec::with_capacity(levels.len());
    for (k, &n) in levels.iter().enumerate() {
        let h = hamiltonians
            .iter()
            .find(|h| h.particles() == n && h.modes() == 3)
            .ok_or_else(|| {
                Error::BasisMismatch(format!("no Hamiltonian supplied for the {n}-atom sector"))
            })?;
        sectors.push(build_sector(h, channel, k + 1 < levels.len())?);
    }
    let start: Vec<CMat> = levels
        .iter()
        .map(|&n| match rho0.block(n) {
            Some(b) => b.to_owned(),
            None => {
                let d = FockBasis::dimension(n, 3);
                Mat::zeros(d, d)
            }
        })
        .collect();
    if rho0.blocks.iter().any(|(n, _)| !levels.contains(n)) {
        return Err(Error::BasisMismatch(
            "density matrix has sectors not reachable by this channel".into(),
        ));
    }

    if t == 0.0 {
        return Ok(LindbladResult {
            rho: to_density(&sectors, start),
            steps: 0,
            step: 0.0,
            error_estimate: 0.0,
            samples: Vec::new(),
        });
    }

    let mut h_target = options.step;
    let mut last_error = f64::INFINITY;
    let mut last_step = h_target;
    for _ in 0..=options.max_halvings {
        let steps = (t / h_target).ceil().max(1.0) as usize;
        let h = t / steps as f64;
        let mut blocks = start.clone();
        let mut error = 0.0;
        let mut samples = Vec::new();
        for s in 0..steps {
            let coarse = cascade_step(&sectors, &blocks, h, channel.rate);
            let half = cascade_step(&sectors, &blocks, 0.5 * h, channel.rate);
            let fine = cascade_step(&sectors, &half, 0.5 * h, channel.rate);
            let mut diff = 0.0f64;
            blocks = fine
                .iter()
                .zip(&coarse)
                .map(|(f, c)| {
                    diff = diff.max(linalg::max_abs((f - c).as_ref()));
                    Mat::from_fn(f.nrows(), f.ncols(), |i, j| {
                        (f[(i, j)] * 4.0 - c[(i, j)]) / 3.0
                    })
                })
                .collect();
            error += diff / 3.0;
            if error > options.tolerance {
                break;
            }
            if options.monitor {
                let rho = to_density(&sectors, blocks.clone());
                samples.push(LindbladSample {
                    time: (s + 1) as f64 * h,
                    trace: rho.trace(),
                    top_trace: rho.sector_trace(top),
                    min_eigenvalue: rho.min_eigenvalue()?,
                });
            }
        }
        if error <= options.tolerance {
            return Ok(LindbladResult {
                rho: to_density(&sectors, blocks),
                steps,
                step: h,
                error_estimate: error,
                samples,
            });
        }
        last_error = error;
        last_step = h;
        h_target = 0.5 * h;
    }
    Err(Error::Integrator {
        tolerance: options.tolerance,
        halvings: options.max_halvings,
        step: last_step,
        error: last_error,
        norm_drift: 0.0,
    })
}

/// Eigenbasis matrices of the `top` and `top − s` sectors.
pub struct SectorEigenbases {
    pub top: CMat,
    pub lower: CMat,
}

pub fn sector_eigenbases(params: &ModelParams, channel: &LossChannel) -> Result<SectorEigenbases> {
    let n = params.n_atoms;
    let s = channel.kind.step();
    if n < s + 1 {
        return Err(invalid("n_atoms", format!("need more than {s} atoms")));
    }
    let top = FockBasis::new(n, 3)?;
    let low = FockBasis::new(n - s, 3)?;
    let (_, vt) = linalg::eigh(build_qubit_hamiltonian(params, &top)?.matrix())?;
    let (_, vl) = linalg::eigh(build_qubit_hamiltonian(&params.with_atoms(n - s), &low)?.matrix())?;
    Ok(SectorEigenbases { top: vt, lower: vl })
}

/// First-order loss update in the sector eigenbases:
///
/// `ρ⁽ᴺ⁾ = ρ⁰ − δtγ Σ (A†Aρ⁰ + ρ⁰A†A)` and `ρ⁽ᴺ⁻ˢ⁾ = 2δtγ Σ A ρ⁰ A†`,
/// with `A_α = V_low† L_α V_top`. `rho0` is given in the top eigenbasis.
pub fn first_order_sectors(
    params: &ModelParams,
    rho0: MatRef<'_, c64>,
    channel: &LossChannel,
    dt: f64,
) -> Result<(CMat, CMat)> {
    channel.validate()?;
    let n = params.n_atoms;
    let s = channel.kind.step();
    let d_top = FockBasis::dimension(n, 3);
    if rho0.nrows() != d_top || rho0.ncols() != d_top {
        return Err(Error::Dimension {
            expected: d_top,
            got: rho0.nrows().max(rho0.ncols()),
        });
    }
    if !(dt >= 0.0) {
        return Err(invalid("dt", "must be nonnegative"));
    }
    if dt * channel.rate * n as f64 >= 0.1 {
        return Err(invalid("dt", "first-order update needs dt·γ·N < 0.1"));
    }
    let bases = sector_eigenbases(params, channel)?;
    let d_low = FockBasis::dimension(n - s, 3);
    let mut top = rho0.to_owned();
    let mut low = Mat::<c64>::zeros(d_low, d_low);
    let g = c64::new(dt * channel.rate, 0.0);
    for a in 0..3 {
        let l = collapse_matrix(channel.kind, a, n)?;
        let am = bases.lower.adjoint() * l * &bases.top;
        let ata = am.adjoint() * &am;
        let anti = &ata * rho0 + rho0 * &ata;
        top -= linalg::scaled(anti.as_ref(), g);
        let fed = &am * rho0 * am.adjoint();
        low += linalg::scaled(fed.as_ref(), g * 2.0);
    }
    Ok((top, low))
}

/// `V ρ V†`: eigenbasis to Fock basis.
pub fn from_eigenbasis(v: MatRef<'_, c64>, rho: MatRef<'_, c64>) -> CMat {
    v * rho * v.adjoint()
}

/// `V† ρ V`: Fock basis to eigenbasis.
pub fn to_eigenbasis(v: MatRef<'_, c64>, rho: MatRef<'_, c64>) -> CMat {
    v.adjoint() * rho * v
}
