//! Two tunnel-coupled qubits on a truncated joint space.
//!
//! The joint space has three sectors of conserved total atom number,
//! `(N, N)`, `(N+1, N−1)` and `(N−1, N+1)`, each spanned by products of the
//! `K` lowest eigenstates of the two sites in that sector. Within a sector
//! the state `(i, j)` sits at offset `i·K + j`.

use faer::{c64, Mat, MatRef};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{optimize_durations, GateResult, GateSpec, OptimizerSettings, WindowPropagator};
use crate::error::{invalid, Error, Result};
use crate::fock::{annihilation_matrix, FockBasis};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::model::{build_qubit_hamiltonian, ModelParams};
use crate::optim::{self, NelderMeadOptions};

struct SiteSectors {
    /// Energies and eigenvectors of the `N−1`, `N`, `N+1` sectors.
    energies: [Vec<f64>; 3],
    vectors: [CMat; 3],
    bases: [FockBasis; 3],
}

fn site_sectors(params: &ModelParams, k: usize) -> Result<SiteSectors> {
    let n = params.n_atoms;
    if n < 2 {
        return Err(invalid(
            "n_atoms",
            "two-qubit sectors need at least 2 atoms",
        ));
    }
    let mut energies: [Vec<f64>; 3] = Default::default();
    let mut vectors: [CMat; 3] = std::array::from_fn(|_| Mat::zeros(0, 0));
    let mut bases = Vec::with_capacity(3);
    for (s, m) in [n - 1, n, n + 1].into_iter().enumerate() {
        let basis = FockBasis::new(m, 3)?;
        if k > basis.len() {
            return Err(invalid(
                "truncation",
                format!(
                    "K = {k} exceeds the {} states of the {m}-atom sector",
                    basis.len()
                ),
            ));
        }
        let h = build_qubit_hamiltonian(&params.with_atoms(m), &basis)?;
        let (e, v) = linalg::eigh(h.matrix())?;
        energies[s] = e[..k].to_vec();
        vectors[s] = v.subcols(0, k).to_owned();
        bases.push(basis);
    }
    let bases: [FockBasis; 3] = bases.try_into().expect("three sectors");
    Ok(SiteSectors {
        energies,
        vectors,
        bases,
    })
}

/// `⟨i_{N−1}|a_α|j_N⟩` and `⟨i_{N+1}|a_α†|j_N⟩` in the truncated eigenbases.
fn ladder_blocks(site: &SiteSectors, mode: usize) -> Result<(CMat, CMat)> {
    let lower = annihilation_matrix(mode, &site.bases[1], &site.bases[0])?;
    let raise = annihilation_matrix(mode, &site.bases[2], &site.bases[1])?.adjoint();
    let down = site.vectors[0].adjoint() * lower.matrix() * &site.vectors[1];
    let up = site.vectors[2].adjoint() * raise.matrix() * &site.vectors[1];
    Ok((down, up))
}

fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    let (ra, ca) = (a.nrows(), a.ncols());
    let (rb, cb) = (b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

/// Joint Hamiltonians of two coupled qubits.
#[derive(Debug, Clone)]
pub struct TwoQubitSystem {
    pub truncation: usize,
    pub n_atoms: usize,
    pub tunneling: f64,
    /// `H₀⁽¹⁾ + H₀⁽²⁾`, diagonal in the product basis.
    pub sites: CMat,
    /// `H₂ = Ω_t Σ_α (a₁α† a₂α + h.c.)`.
    pub coupling: CMat,
}

impl TwoQubitSystem {
    pub fn dim(&self) -> usize {
        self.sites.nrows()
    }

    /// `H₂ + H₀⁽¹⁾ + H₀⁽²⁾`.
    pub fn hamiltonian(&self) -> CMat {
        &self.sites + &self.coupling
    }

    /// Joint index of the `(N, N)` product state `(i, j)`.
    pub fn product_index(&self, i: usize, j: usize) -> usize {
        i * self.truncation + j
    }

    /// `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` with `↑` the site ground state.
    pub fn qubit_indices(&self) -> [usize; 4] {
        [
            self.product_index(0, 0),
            self.product_index(0, 1),
            self.product_index(1, 0),
            self.product_index(1, 1),
        ]
    }

    /// The qubit block first, then every other joint state in order.
    pub fn window(&self) -> CMat {
        let q = self.qubit_indices();
        let mut order: Vec<usize> = q.to_vec();
        order.extend((0..self.dim()).filter(|i| !q.contains(i)));
        Mat::from_fn(self.dim(), order.len(), |i, j| {
            if order[j] == i {
                ONE
            } else {
                ZERO
            }
        })
    }
}

pub fn build_two_qubit_hamiltonian(
    site1: &ModelParams,
    site2: &ModelParams,
    omega_t: f64,
    truncation: usize,
) -> Result<TwoQubitSystem> {
    if site1.n_atoms != site2.n_atoms {
        return Err(Error::BasisMismatch(
            "both sites must hold the same atom number".into(),
        ));
    }
    if !omega_t.is_finite() {
        return Err(invalid("omega_t", "must be finite"));
    }
    if truncation == 0 {
        return Err(invalid("truncation", "must be at least 1"));
    }
    let k = truncation;
    let s1 = site_sectors(site1, k)?;
    let s2 = site_sectors(site2, k)?;
    let block = k * k;
    let dim = 3 * block;

    let mut sites = Mat::<c64>::zeros(dim, dim);
    // joint sector -> (site-1 sector, site-2 sector) in N−1, N, N+1 order
    let layout = [(1usize, 1usize), (2, 0), (0, 2)];
    for (b, &(a1, a2)) in layout.iter().enumerate() {
        for i in 0..k {
            for j in 0..k {
                let idx = b * block + i * k + j;
                sites[(idx, idx)] = c64::new(s1.energies[a1][i] + s2.energies[a2][j], 0.0);
            }
        }
    }

    let mut coupling = Mat::<c64>::zeros(dim, dim);
    for mode in 0..3 {
        let (down1, up1) = ladder_blocks(&s1, mode)?;
        let (down2, up2) = ladder_blocks(&s2, mode)?;
        // a₁† a₂ : (N, N) -> (N+1, N−1);  a₂† a₁ : (N, N) -> (N−1, N+1)
        let to_plus = kron(up1.as_ref(), down2.as_ref());
        let to_minus = kron(down1.as_ref(), up2.as_ref());
        for r in 0..block {
            for c in 0..block {
                let v = to_plus[(r, c)] * omega_t;
                coupling[(block + r, c)] += v;
                coupling[(c, block + r)] += v.conj();
                let v = to_minus[(r, c)] * omega_t;
                coupling[(2 * block + r, c)] += v;
                coupling[(c, 2 * block + r)] += v.conj();
            }
        }
    }
    let residual = linalg::hermitian_residual(coupling.as_ref());
    if residual > 1e-12 {
        return Err(Error::NotHermitian { residual });
    }
    Ok(TwoQubitSystem {
        truncation,
        n_atoms: site1.n_atoms,
        tunneling: omega_t,
        sites,
        coupling,
    })
}

/// 36-pulse style search with `H_A = H₂ + H₀⁽¹⁾ + H₀⁽²⁾` and
/// `H_B = H₀⁽¹⁾ + H₀⁽²⁾`. The window is the full truncated joint space.
pub fn optimize_two_bit_gate(
    system: &TwoQubitSystem,
    spec: &GateSpec,
    n_pulses: usize,
    settings: &OptimizerSettings,
) -> Result<GateResult> {
    if spec.target.nrows() != 4 {
        return Err(invalid("target", "two-bit target must be 4x4"));
    }
    let window = system.window();
    let spec = GateSpec {
        window: window.ncols(),
        ..spec.clone()
    };
    let h_a = system.hamiltonian();
    let prop = WindowPropagator::new(h_a.as_ref(), system.sites.as_ref(), window.as_ref())?;
    optimize_durations(&prop, &spec, n_pulses, settings)
}

fn su2(p: &[f64]) -> [[c64; 2]; 2] {
    // e^{iδ} [[e^{iα} cos θ, e^{iβ} sin θ], [−e^{−iβ} sin θ, e^{−iα} cos θ]]
    let (d, th, a, b) = (p[0], p[1], p[2], p[3]);
    let e = |x: f64| c64::new(x.cos(), x.sin());
    let (c, s) = (th.cos(), th.sin());
    [[e(d + a) * c, e(d + b) * s], [-e(d - b) * s, e(d - a) * c]]
}

/// `min ‖B − U₁⊗U₂‖` (operator norm) over single-site unitaries, by a
/// seeded multi-start simplex search.
pub fn nearest_product_distance(block: MatRef<'_, c64>, restarts: usize, seed: u64) -> Result<f64> {
    if block.nrows() != 4 || block.ncols() != 4 {
        return Err(Error::Dimension {
            expected: 4,
            got: block.nrows().max(block.ncols()),
        });
    }
    let f = |p: &[f64]| {
        let u1 = su2(&p[..4]);
        let u2 = su2(&p[4..]);
        let d = Mat::<c64>::from_fn(4, 4, |i, j| {
            block[(i, j)] - u1[i / 2][j / 2] * u2[i % 2][j % 2]
        });
        linalg::operator_norm(d.as_ref())
    };
    let sample = |rng: &mut ChaCha8Rng| {
        (0..8)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect()
    };
    let opts = NelderMeadOptions {
        max_evals: 6000,
        initial_step: 0.5,
        ..Default::default()
    };
    Ok(optim::multi_start(&f, &sample, restarts, seed, &opts)
        .best
        .value)
}
