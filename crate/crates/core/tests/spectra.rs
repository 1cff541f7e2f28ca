use ajja_core::linalg;
use ajja_core::model::{build_raman_hamiltonian, phase_wavefunction};
use ajja_core::spectra::{self, adiabatic_ramp, qnd_readout, rabi_states, RampSchedule, RampShape};
use ajja_core::{c64, FockBasis, ModelParams};
use approx::assert_relative_eq;
use proptest::prelude::*;

fn small(n: usize) -> ModelParams {
    ModelParams::working_point().coscaled(n)
}

#[test]
fn sudden_quench_keeps_the_state() {
    let p = small(4);
    let basis = FockBasis::new(4, 3).unwrap();
    let psi = spectra::solve(&p, &basis, 1).unwrap().state(0);
    let r = adiabatic_ramp(&p, &RampSchedule::new(p.omega0, 60.0, 0.0), &psi, 3).unwrap();
    assert_eq!(r.final_state, psi);
    assert_eq!(r.steps, 0);
    assert_relative_eq!(r.initial_populations[0], 1.0, epsilon = 1e-12);
    let end = spectra::solve(&p.with_omega0(60.0), &basis, 1)
        .unwrap()
        .state(0);
    assert_relative_eq!(
        r.final_populations[0],
        linalg::dot(&end, &psi).norm_sqr(),
        epsilon = 1e-12
    );
}

#[test]
fn slow_ramp_is_adiabatic() {
    let p = small(4);
    let basis = FockBasis::new(4, 3).unwrap();
    let s = spectra::solve(&p, &basis, 2).unwrap();
    let psi: Vec<c64> = s
        .state(0)
        .iter()
        .zip(s.state(1))
        .map(|(a, b)| a * 0.8 + b * c64::new(0.0, 0.6))
        .collect();
    let mut sched = RampSchedule::new(p.omega0, 40.0, 150.0);
    sched.shape = RampShape::Smoothstep;
    let r = adiabatic_ramp(&p, &sched, &psi, 3).unwrap();
    assert!(r.fidelity > 0.99, "fidelity {}", r.fidelity);
    assert!(r.norm_drift < 1e-8);
    assert_relative_eq!(r.final_populations[0], 0.64, epsilon = 0.01);
    let quick = adiabatic_ramp(&p, &RampSchedule::new(p.omega0, 40.0, 0.0), &psi, 3).unwrap();
    assert!(quick.fidelity < r.fidelity);
}

#[test]
fn ramp_inputs_are_checked() {
    let p = small(3);
    let psi = vec![c64::new(1.0, 0.0); FockBasis::dimension(3, 3)];
    assert!(adiabatic_ramp(&p, &RampSchedule::new(1.0, 2.0, 1.0), &psi, 2).is_err());
    let mut one = vec![c64::new(0.0, 0.0); FockBasis::dimension(3, 3)];
    one[0] = c64::new(1.0, 0.0);
    assert!(adiabatic_ramp(&p, &RampSchedule::new(1.0, 2.0, -1.0), &one, 2).is_err());
    assert!(adiabatic_ramp(&p, &RampSchedule::new(1.0, 2.0, 1.0), &one[1..], 2).is_err());
}

#[test]
fn readout_counts_rabi_excitations() {
    let p = small(5).with_omega0(50.0);
    let basis = FockBasis::new(5, 3).unwrap();
    let rabi = rabi_states(&p).unwrap();
    for k in 0..3 {
        let psi = rabi.state(k, &basis).unwrap();
        let q = qnd_readout(&psi, &rabi, &basis).unwrap();
        assert_relative_eq!(q.expected_excitations, k as f64, epsilon = 1e-10);
        assert_relative_eq!(q.p_zero, if k == 0 { 1.0 } else { 0.0 }, epsilon = 1e-10);
        assert_relative_eq!(q.p_zero + q.p_at_least_one, 1.0, epsilon = 1e-12);
    }
}

#[test]
fn rabi_energies_match_the_free_spectrum() {
    let p = small(6);
    let basis = FockBasis::new(6, 3).unwrap();
    let free = build_raman_hamiltonian(&p, &basis).unwrap();
    let e = linalg::eigvalsh(free.matrix()).unwrap();
    let rabi = rabi_states(&p).unwrap();
    assert_relative_eq!(rabi.many_body[0], e[0], epsilon = 1e-9);
    assert_relative_eq!(rabi.many_body[1], e[1], epsilon = 1e-9);
    let s = rabi.state(1, &basis).unwrap();
    assert_relative_eq!(free.expectation(&s), rabi.many_body[1], epsilon = 1e-9);
}

#[test]
fn coupling_sweep_locates_the_smallest_gap() {
    let p = small(6);
    let grid = spectra::linspace(1.0, 40.0, 12);
    let sweep = spectra::sweep_coupling(&p, &grid, 3).unwrap();
    let gaps: Vec<f64> = sweep.rows.iter().map(|r| r.qubit_gap).collect();
    let min = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(gaps[sweep.min_gap_index], min);
    assert!(spectra::sweep_coupling(&p, &[2.0, 1.0], 3).is_err());
}

#[test]
fn splitting_is_positive_and_grid_ordered() {
    let grid = spectra::linspace(0.7, 1.5, 5);
    let rows = spectra::splitting_vs_ratio(&small(6), &grid).unwrap();
    for (r, &x) in rows.iter().zip(&grid) {
        assert_eq!(r.ratio, x);
        assert!(r.splitting > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn phase_grid_is_parseval(n in 1usize..8, level in 0usize..3, extra in 1usize..6, flux in 0.0..1.0f64) {
        let basis = FockBasis::new(n, 3).unwrap();
        let s = spectra::solve(&small(n).with_flux(flux), &basis, 3).unwrap();
        let level = level.min(s.len() - 1);
        let g = 2 * n + extra;
        let grid = phase_wavefunction(&s.state(level), &basis, (g, g + 1)).unwrap();
        prop_assert!((grid.mean_probability() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn eigenpairs_have_small_residuals(n in 1usize..9, flux in 0.0..1.0f64, ratio in 0.0..2.0f64) {
        let p = small(n).with_flux(flux).with_ratio(ratio);
        let basis = FockBasis::new(n, 3).unwrap();
        let h = ajja_core::model::build_qubit_hamiltonian(&p, &basis).unwrap();
        let s = spectra::diagonalize(&h, None).unwrap();
        prop_assert_eq!(s.len(), basis.len());
        prop_assert!(s.max_residual(h.matrix()) < 1e-9);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
}
