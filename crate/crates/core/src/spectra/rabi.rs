use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::linalg::{self, CMat, ZERO};
use crate::model::ModelParams;
use crate::operator::HermitianOperator;

/// Independent-atom (Rabi-regime) description of the qubit.
#[derive(Debug, Clone, Serialize)]
pub struct RabiStates {
    pub n_atoms: usize,
    /// Ascending single-particle energies.
    pub epsilon: [f64; 3],
    /// `modes[i][α]`: amplitude of bare mode `α` in single-particle mode `S_i`.
    #[serde(skip)]
    pub modes: [[c64; 3]; 3],
    /// `E₁ᴶ, E₂ᴶ, E₃ᴶ`.
    pub many_body: [f64; 3],
    /// `2(ε₂ − ε₁) < ε₃ − ε₁`.
    pub anharmonic: bool,
}

pub fn rabi_states(params: &ModelParams) -> Result<RabiStates> {
    let h = params.single_particle_matrix();
    let m = Mat::from_fn(3, 3, |i, j| h[i][j]);
    let (e, v) = linalg::eigh(m.as_ref())?;
    let n = params.n_atoms as f64;
    let epsilon = [e[0], e[1], e[2]];
    let modes = std::array::from_fn(|i| std::array::from_fn(|a| v[(a, i)]));
    Ok(RabiStates {
        n_atoms: params.n_atoms,
        epsilon,
        modes,
        many_body: [
            n * e[0],
            (n - 1.0) * e[0] + e[1],
            (n - 2.0) * e[0] + 2.0 * e[1],
        ],
        anharmonic: 2.0 * (e[1] - e[0]) < e[2] - e[0],
    })
}

impl RabiStates {
    /// `|ψ₁ᴶ⟩`, `|ψ₂ᴶ⟩`, `|ψ₃ᴶ⟩` for `k = 0, 1, 2`.
    pub fn state(&self, k: usize, basis: &FockBasis) -> Result<Vec<c64>> {
        let counts = match k {
            0 => [self.n_atoms, 0, 0],
            1 => [self.n_atoms.saturating_sub(1), 1, 0],
            2 => [self.n_atoms.saturating_sub(2), 2, 0],
            _ => {
                return Err(Error::Dimension {
                    expected: 3,
                    got: k + 1,
                })
            }
        };
        if counts.iter().sum::<usize>() != self.n_atoms {
            return Err(Error::BasisMismatch(format!(
                "state {k} needs at least {k} atoms"
            )));
        }
        rabi_fock_state(self, basis, counts)
    }
}

/// `Π_i (S_i†)^{k_i} |0⟩`, normalized, in the bare-mode basis.
pub fn rabi_fock_state(
    rabi: &RabiStates,
    basis: &FockBasis,
    counts: [usize; 3],
) -> Result<Vec<c64>> {
    if basis.modes() != 3 || basis.particles() != counts.iter().sum::<usize>() {
        return Err(Error::BasisMismatch(format!(
            "counts {counts:?} do not fit a basis of {} atoms in {} modes",
            basis.particles(),
            basis.modes()
        )));
    }
    let mut current = FockBasis::new(0, 3)?;
    let mut psi = vec![c64::new(1.0, 0.0)];
    let mut scratch = [0u32; 3];
    for (i, &k) in counts.iter().enumerate() {
        for _ in 0..k {
            let next = FockBasis::new(current.particles() + 1, 3)?;
            let mut out = vec![ZERO; next.len()];
            for (col, occ) in current.iter().enumerate() {
                if psi[col] == ZERO {
                    continue;
                }
                for a in 0..3 {
                    scratch.copy_from_slice(occ);
                    scratch[a] += 1;
                    let row = next.index_of(&scratch).expect("raised state exists");
                    out[row] += rabi.modes[i][a] * psi[col] * (scratch[a] as f64).sqrt();
                }
            }
            current = next;
            psi = out;
        }
    }
    let norm = linalg::norm(&psi);
    Ok(psi.into_iter().map(|x| x / norm).collect())
}

/// `S₂†S₂ = Σ u_α ū_β a_α† a_β` with `u` the amplitudes of `S₂`.
pub fn s2_occupation_operator(rabi: &RabiStates, basis: &FockBasis) -> Result<HermitianOperator> {
    let u = rabi.modes[1];
    let n = basis.len();
    let mut m: CMat = Mat::zeros(n, n);
    let mut scratch = [0u32; 3];
    for (col, occ) in basis.iter().enumerate() {
        for b in 0..3 {
            if occ[b] == 0 {
                continue;
            }
            for a in 0..3 {
                scratch.copy_from_slice(occ);
                let amp = (scratch[b] as f64).sqrt();
                scratch[b] -= 1;
                scratch[a] += 1;
                let amp = amp * (scratch[a] as f64).sqrt();
                let row = basis.index_of(&scratch).expect("transfer conserves N");
                m[(row, col)] += u[a] * u[b].conj() * amp;
            }
        }
    }
    HermitianOperator::for_basis(basis, m)
}

/// Photon-count statistics of the dark-state measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QndStatistics {
    /// `⟨S₂†S₂⟩`.
    pub expected_excitations: f64,
    pub p_zero: f64,
    pub p_at_least_one: f64,
}

/// Expected `S₂` excitations and the zero/nonzero outcome probabilities.
pub fn qnd_readout(state: &[c64], rabi: &RabiStates, basis: &FockBasis) -> Result<QndStatistics> {
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
    let op = s2_occupation_operator(rabi, basis)?;
    let expected = op.expectation(state);
    let (values, vectors) = linalg::eigh(op.matrix())?;
    let p_zero: f64 = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < 0.5)
        .map(|(k, _)| linalg::dot(&linalg::column(vectors.as_ref(), k), state).norm_sqr())
        .sum();
    Ok(QndStatistics {
        expected_excitations: expected,
        p_zero,
        p_at_least_one: 1.0 - p_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InteractionKind;

    fn params(n: usize, ratio: f64, flux: f64) -> ModelParams {
        ModelParams {
            n_atoms: n,
            u0: 1.0,
            omega0: 2.0,
            ratio,
            flux,
            interaction: InteractionKind::Symmetric,
        }
    }

    #[test]
    fn frustrated_point_is_degenerate() {
        // with the negative Raman sign the frustrated point sits at f = 0
        let r = rabi_states(&params(3, 1.0, 0.0)).unwrap();
        assert!((r.epsilon[0] + 4.0).abs() < 1e-12);
        assert!((r.epsilon[1] - 2.0).abs() < 1e-12);
        assert!((r.epsilon[2] - 2.0).abs() < 1e-12);
        assert!(!r.anharmonic);
    }

    #[test]
    fn many_body_law() {
        let r = rabi_states(&params(15, 0.85, 0.495)).unwrap();
        assert_eq!(r.many_body[0], 15.0 * r.epsilon[0]);
        assert!(r.epsilon[0] < r.epsilon[1] && r.epsilon[1] < r.epsilon[2]);
    }

    #[test]
    fn readout_counts_excitations() {
        let p = params(5, 0.85, 0.495);
        let r = rabi_states(&p).unwrap();
        let b = FockBasis::new(5, 3).unwrap();
        let s1 = r.state(0, &b).unwrap();
        let s2 = r.state(1, &b).unwrap();
        assert!(linalg::dot(&s1, &s2).norm() < 1e-12);
        let q1 = qnd_readout(&s1, &r, &b).unwrap();
        let q2 = qnd_readout(&s2, &r, &b).unwrap();
        assert!(q1.expected_excitations.abs() < 1e-12);
        assert!((q1.p_zero - 1.0).abs() < 1e-10);
        assert!((q2.expected_excitations - 1.0).abs() < 1e-12);
        assert!(q2.p_zero.abs() < 1e-10);
        let mix: Vec<c64> = s1
            .iter()
            .zip(&s2)
            .map(|(a, b)| (a + b) / 2f64.sqrt())
            .collect();
        let qm = qnd_readout(&mix, &r, &b).unwrap();
        assert!((qm.expected_excitations - 0.5).abs() < 1e-12);
        assert!((qm.p_zero - 0.5).abs() < 1e-10);
    }
}
