//! Bosonic Fock bases at fixed particle number and the ladder-operator
//! matrices built on them.
//!
//! States are ordered lexicographically *descending* on the occupation
//! vector, so for three modes and two particles the order is
//! `(2,0,0), (1,1,0), (1,0,1), (0,2,0), (0,1,1), (0,0,2)`.

use std::collections::HashMap;

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::operator::HermitianOperator;

/// Ordered occupation-number basis for `particles` bosons in `modes` modes.
#[derive(Debug, Clone)]
pub struct FockBasis {
    particles: usize,
    modes: usize,
    occupations: Vec<u32>,
    index: HashMap<Box<[u32]>, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.particles == other.particles && self.modes == other.modes
    }
}

impl FockBasis {
    pub fn new(particles: usize, modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::NoModes);
        }
        let dim = Self::dimension(particles, modes);
        let mut occupations = Vec::with_capacity(dim * modes);
        let mut current = vec![0u32; modes];
        fill(&mut current, 0, particles as u32, &mut occupations);

        let index = occupations
            .chunks_exact(modes)
            .enumerate()
            .map(|(k, s)| (s.to_vec().into_boxed_slice(), k))
            .collect();
        Ok(Self {
            particles,
            modes,
            occupations,
            index,
        })
    }

    /// `C(N + M - 1, M - 1)`.
    pub fn dimension(particles: usize, modes: usize) -> usize {
        if modes == 0 {
            return 0;
        }
        let k = modes - 1;
        let n = particles + k;
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc as usize
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.occupations.len() / self.modes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state(&self, k: usize) -> &[u32] {
        &self.occupations[k * self.modes..(k + 1) * self.modes]
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.occupations.chunks_exact(self.modes)
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.modes {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                mode,
                modes: self.modes,
            })
        }
    }
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<u32>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.extend_from_slice(current);
        return;
    }
    for n in (0..=remaining).rev() {
        current[pos] = n;
        fill(current, pos + 1, remaining - n, out);
    }
}

/// Rectangular matrix between two particle-number sectors.
#[derive(Debug, Clone)]
pub struct SectorMatrix {
    row_particles: usize,
    col_particles: usize,
    modes: usize,
    matrix: CMat,
}

impl SectorMatrix {
    pub fn row_particles(&self) -> usize {
        self.row_particles
    }

    pub fn col_particles(&self) -> usize {
        self.col_particles
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    /// Conjugate transpose; turns an annihilation matrix into the creation
    /// matrix between the same two sectors.
    pub fn adjoint(&self) -> Self {
        Self {
            row_particles: self.col_particles,
            col_particles: self.row_particles,
            modes: self.modes,
            matrix: self.matrix.adjoint().to_owned(),
        }
    }
}

/// `⟨m| a_mode |n⟩` with `n` in `from` (N particles) and `m` in `to`
/// (N - 1 particles).
pub fn annihilation_matrix(mode: usize, from: &FockBasis, to: &FockBasis) -> Result<SectorMatrix> {
    if from.modes != to.modes {
        return Err(Error::BasisMismatch(format!(
            "mode counts differ ({} vs {})",
            from.modes, to.modes
        )));
    }
    if from.particles == 0 || to.particles + 1 != from.particles {
        return Err(Error::BasisMismatch(format!(
            "annihilation maps N to N-1 particles, got {} -> {}",
            from.particles, to.particles
        )));
    }
    from.check_mode(mode)?;
    let mut matrix = Mat::<c64>::zeros(to.len(), from.len());
    let mut scratch = vec![0u32; from.modes];
    for (col, occ) in from.iter().enumerate() {
        let n = occ[mode];
        if n == 0 {
            continue;
        }
        scratch.copy_from_slice(occ);
        scratch[mode] -= 1;
        let row = to
            .index_of(&scratch)
            .expect("lowered occupation lies in the N-1 basis");
        matrix[(row, col)] = c64::new((n as f64).sqrt(), 0.0);
    }
    Ok(SectorMatrix {
        row_particles: to.particles,
        col_particles: from.particles,
        modes: from.modes,
        matrix,
    })
}

pub fn creation_matrix(mode: usize, from: &FockBasis, to: &FockBasis) -> Result<SectorMatrix> {
    Ok(annihilation_matrix(mode, to, from)?.adjoint())
}

/// Diagonal number operator `N̂_mode`.
pub fn number_operator(mode: usize, basis: &FockBasis) -> Result<HermitianOperator> {
    basis.check_mode(mode)?;
    let n = basis.len();
    let matrix = Mat::from_fn(n, n, |i, j| {
        if i == j {
            c64::new(basis.state(i)[mode] as f64, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    Ok(HermitianOperator::from_parts_unchecked(
        basis.particles,
        basis.modes,
        matrix,
    ))
}

/// Matrix of the (non-Hermitian) transfer `a_to† a_from` within one sector.
pub fn transfer_matrix(to: usize, from: usize, basis: &FockBasis) -> Result<CMat> {
    basis.check_mode(to)?;
    basis.check_mode(from)?;
    let n = basis.len();
    let mut m = Mat::<c64>::zeros(n, n);
    let mut scratch = vec![0u32; basis.modes];
    for (col, occ) in basis.iter().enumerate() {
        if occ[from] == 0 {
            continue;
        }
        if to == from {
            m[(col, col)] = c64::new(occ[from] as f64, 0.0);
            continue;
        }
        scratch.copy_from_slice(occ);
        let amp = (scratch[from] as f64).sqrt();
        scratch[from] -= 1;
        scratch[to] += 1;
        let amp = amp * (scratch[to] as f64).sqrt();
        let row = basis.index_of(&scratch).expect("transfer conserves N");
        m[(row, col)] = c64::new(amp, 0.0);
    }
    Ok(m)
}

/// `Ω a_α† a_β + Ω* a_β† a_α`.
pub fn hopping_operator(
    pair: (usize, usize),
    amplitude: c64,
    basis: &FockBasis,
) -> Result<HermitianOperator> {
    let (alpha, beta) = pair;
    if alpha == beta {
        return Err(Error::SameModes(alpha));
    }
    let forward = transfer_matrix(alpha, beta, basis)?;
    let n = basis.len();
    let matrix = Mat::from_fn(n, n, |i, j| {
        amplitude * forward[(i, j)] + amplitude.conj() * forward[(j, i)]
    });
    Ok(HermitianOperator::from_parts_unchecked(
        basis.particles,
        basis.modes,
        matrix,
    ))
}
