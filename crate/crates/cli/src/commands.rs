//! One function per subcommand; each turns a config into a [`Report`].

use std::f64::consts::PI;

use ajja_core::decoherence::{
    effective_loss_rate, three_body_effective_rate, LossKind, LossRateOptions,
};
use ajja_core::gates::{
    build_two_qubit_hamiltonian, nearest_product_distance, optimize_one_bit_gate,
    optimize_two_bit_gate, targets, GateResult, GateSpec, OptimizerSettings, PulseSequence,
};
use ajja_core::linalg::{self, CMat};
use ajja_core::model::{omega0_for, phase_wavefunction};
use ajja_core::optim::NelderMeadOptions;
use ajja_core::spectra::{
    self, adiabatic_ramp, gap_profile, qnd_readout, rabi_states, RampSchedule, RampShape,
};
use ajja_core::{c64, FockBasis, InteractionKind, ModelParams};
use faer::Mat;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{Cell, Report, Table};

type Result<T> = std::result::Result<T, ajja_core::Error>;

pub fn run(cfg: &RunConfig) -> Result<Report> {
    match cfg.text("subcommand") {
        "spectrum" => spectrum(cfg),
        "wavefunction" => wavefunction(cfg),
        "splitting" => splitting(cfg),
        "coupling-sweep" => coupling_sweep(cfg),
        "gate" => gate(cfg),
        "two-qubit" => two_qubit(cfg),
        "ramp" => ramp(cfg),
        "readout" => readout(cfg),
        "loss" => loss(cfg),
        other => unreachable!("subcommand {other} passed validation"),
    }
}

fn params(cfg: &RunConfig) -> ModelParams {
    let n = cfg.usize("n_atoms");
    ModelParams {
        n_atoms: n,
        u0: 1.0,
        omega0: omega0_for(cfg.float("josephson_ratio"), n, 1.0),
        ratio: cfg.float("ratio"),
        flux: cfg.float("flux"),
        interaction: match cfg.text("interaction") {
            "negative_symmetric" => InteractionKind::NegativeSymmetric,
            _ => InteractionKind::Symmetric,
        },
    }
}

fn hz(cfg: &RunConfig, energy: f64) -> f64 {
    energy * cfg.float("u0_hz")
}

/// Times are in `ħ/U₀`; with `U₀` quoted as an ordinary frequency the
/// conversion carries a factor `2π`.
fn ms(cfg: &RunConfig, t: f64) -> f64 {
    1e3 * t / (2.0 * PI * cfg.float("u0_hz"))
}

fn flux_grid(cfg: &RunConfig) -> Vec<f64> {
    spectra::linspace(
        cfg.float("flux_min"),
        cfg.float("flux_max"),
        cfg.usize("flux_points"),
    )
}

fn spectrum(cfg: &RunConfig) -> Result<Report> {
    let p = params(cfg);
    let levels = cfg.usize("levels");
    let grid = flux_grid(cfg);
    let rows = spectra::sweep_flux(&p, &grid, levels)?;
    let levels = rows[0].energies.len();

    let mut cols = vec!["flux".to_string()];
    cols.extend((0..levels).map(|k| format!("E{k}_U0")));
    cols.extend((0..levels).map(|k| format!("E{k}_hz")));
    cols.extend(["omega_q_U0", "omega_q_hz", "current0_U0", "current1_U0"].map(String::from));
    let mut table = Table::with_columns("spectrum", cols);
    for r in &rows {
        let mut row: Vec<Cell> = vec![r.flux.into()];
        row.extend(r.energies.iter().map(|&e| Cell::from(e)));
        row.extend(r.energies.iter().map(|&e| Cell::from(hz(cfg, e))));
        row.extend(
            [
                r.qubit_gap,
                hz(cfg, r.qubit_gap),
                r.currents[0],
                r.currents[1],
            ]
            .map(Cell::from),
        );
        table.push(row);
    }

    let atoms = cfg.ints("atom_list");
    let sweeps = spectra::sweep_atoms(&p, &atoms, &grid, 2)?;
    let mut conv = Table::new(
        "spectrum_atoms",
        &["n_atoms", "omega0_U0", "flux", "omega_q_U0", "omega_q_hz"],
    );
    for s in &sweeps {
        for r in &s.rows {
            conv.push(vec![
                s.n_atoms.into(),
                s.omega0.into(),
                r.flux.into(),
                r.qubit_gap.into(),
                hz(cfg, r.qubit_gap).into(),
            ]);
        }
    }

    let basis = FockBasis::new(p.n_atoms, 3)?;
    let at = spectra::solve(&p, &basis, levels.max(2))?;
    let mut report = Report::default();
    report.number("omega0_U0", p.omega0);
    report.number("omega_q_U0", at.qubit_gap());
    report.number("omega_q_hz", hz(cfg, at.qubit_gap()));
    report.summary("energies_U0", at.eigenvalues.clone());
    report.summary("currents_U0", at.currents.clone());
    report.tables = vec![table, conv];
    Ok(report)
}

fn wavefunction(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.usize("n_atoms");
    let g = cfg.usize("wavefunction_grid");
    let floor = cfg.float("wavefunction_floor");
    let basis = FockBasis::new(n, 3)?;
    let mut table = Table::new(
        "wavefunction",
        &["u0_over_omega0", "level", "phi_a", "phi_b", "probability"],
    );
    let mut peaks = Vec::new();
    for &ratio in cfg.floats("wavefunction_ratios") {
        let p = params(cfg)
            .with_flux(cfg.float("wavefunction_flux"))
            .with_omega0(1.0 / ratio);
        let s = spectra::solve(&p, &basis, 2)?;
        for level in 0..2 {
            let grid = phase_wavefunction(&s.state(level), &basis, (g, g))?;
            let prob = grid.probability();
            for i in 0..g {
                for j in 0..g {
                    table.push(vec![
                        ratio.into(),
                        level.into(),
                        grid.phi_a(i).into(),
                        grid.phi_b(j).into(),
                        prob[i * g + j].into(),
                    ]);
                }
            }
            let maxima: Vec<[f64; 2]> = grid
                .local_maxima(floor)
                .iter()
                .map(|&(i, j)| [grid.phi_a(i), grid.phi_b(j)])
                .collect();
            peaks.push(json!({
                "u0_over_omega0": ratio,
                "level": level,
                "peak_count": maxima.len(),
                "peaks": maxima,
            }));
        }
    }
    let mut report = Report::default();
    report.summary("peaks", peaks);
    report.tables = vec![table];
    Ok(report)
}

fn splitting(cfg: &RunConfig) -> Result<Report> {
    let p = params(cfg);
    let grid = spectra::linspace(
        cfg.float("ratio_min"),
        cfg.float("ratio_max"),
        cfg.usize("ratio_points"),
    );
    let rows = spectra::splitting_vs_ratio(&p, &grid)?;
    let mut table = Table::new("splitting", &["ratio", "t0_U0", "t0_hz"]);
    for r in &rows {
        table.push(vec![
            r.ratio.into(),
            r.splitting.into(),
            hz(cfg, r.splitting).into(),
        ]);
    }
    let at = spectra::splitting_vs_ratio(&p, &[p.ratio])?[0];
    let mut report = Report::default();
    report.number("t0_U0", at.splitting);
    report.number("t0_hz", hz(cfg, at.splitting));
    report.tables = vec![table];
    Ok(report)
}

fn coupling_sweep(cfg: &RunConfig) -> Result<Report> {
    let p = params(cfg);
    let grid = spectra::linspace(
        cfg.float("coupling_min"),
        cfg.float("coupling_max"),
        cfg.usize("coupling_points"),
    );
    let sweep = spectra::sweep_coupling(&p, &grid, cfg.usize("levels"))?;
    let levels = sweep.rows[0].energies.len();
    let mut cols = vec!["omega0_U0".to_string(), "omega0_hz".to_string()];
    cols.extend((0..levels).map(|k| format!("E{k}_U0")));
    cols.extend((1..levels).map(|k| format!("gap{k}_U0")));
    cols.extend((1..levels).map(|k| format!("gap{k}_hz")));
    cols.extend(["current0_over_omega0", "current1_over_omega0"].map(String::from));
    let mut table = Table::with_columns("coupling_sweep", cols);
    for r in &sweep.rows {
        let gaps: Vec<f64> = r.energies.windows(2).map(|w| w[1] - w[0]).collect();
        let mut row: Vec<Cell> = vec![r.omega0.into(), hz(cfg, r.omega0).into()];
        row.extend(r.energies.iter().map(|&e| Cell::from(e)));
        row.extend(gaps.iter().map(|&e| Cell::from(e)));
        row.extend(gaps.iter().map(|&e| Cell::from(hz(cfg, e))));
        row.extend(r.normalized_currents.map(Cell::from));
        table.push(row);
    }
    let min = &sweep.rows[sweep.min_gap_index];
    let mut report = Report::default();
    report.number("min_gap_omega0_U0", min.omega0);
    report.number("min_gap_U0", min.qubit_gap);
    report.tables = vec![table];
    Ok(report)
}

fn settings(cfg: &RunConfig) -> OptimizerSettings {
    OptimizerSettings {
        restarts: cfg.usize("restarts"),
        seed: cfg.int("seed") as u64,
        leakage_weight: cfg.float("leakage_weight"),
        time_weight: cfg.float("time_weight"),
        nelder_mead: NelderMeadOptions {
            max_evals: cfg.usize("max_evals"),
            ..Default::default()
        },
        gradient_iterations: cfg.int("gradient_iterations") as u64,
    }
}

fn durations_table(cfg: &RunConfig, name: &str, r: &GateResult) -> Table {
    let mut table = Table::new(
        name,
        &[
            "pulse",
            "generator",
            "start_U0",
            "duration_U0",
            "duration_ms",
        ],
    );
    let mut start = 0.0;
    for (k, &t) in r.durations.iter().enumerate() {
        table.push(vec![
            k.into(),
            PulseSequence::label(k).to_string().as_str().into(),
            start.into(),
            t.into(),
            ms(cfg, t).into(),
        ]);
        start += t;
    }
    table
}

fn magnitude_table(name: &str, m: &CMat) -> Table {
    let mut cols = vec!["row".to_string()];
    cols.extend((0..m.ncols()).map(|j| format!("abs_u{j}")));
    let mut table = Table::with_columns(name, cols);
    for i in 0..m.nrows() {
        let mut row: Vec<Cell> = vec![i.into()];
        row.extend((0..m.ncols()).map(|j| Cell::from(m[(i, j)].norm())));
        table.push(row);
    }
    table
}

fn gate_summary(cfg: &RunConfig, report: &mut Report, r: &GateResult) {
    report.number("fidelity", r.fidelity);
    report.number("leakage", r.leakage);
    report.number("objective", r.objective);
    report.number("total_time_U0", r.total_time);
    report.number("total_time_ms", ms(cfg, r.total_time));
    report.summary("converged", r.converged);
    report.summary("best_restart", r.best_restart);
    report.summary("durations_U0", r.durations.clone());
}

fn gate(cfg: &RunConfig) -> Result<Report> {
    let target = targets::by_name(cfg.text("gate_target")).expect("validated target");
    let spec = GateSpec::new(
        target,
        cfg.usize("gate_window"),
        cfg.float("gate_max_total_time"),
    );
    let r = optimize_one_bit_gate(
        &params(cfg),
        &spec,
        cfg.usize("gate_pulses"),
        &settings(cfg),
    )?;
    let mut report = Report::default();
    gate_summary(cfg, &mut report, &r);
    report.tables = vec![
        durations_table(cfg, "gate_durations", &r),
        magnitude_table("gate_matrix", &r.window_unitary),
    ];
    report
        .matrices
        .push(("window_unitary".into(), r.window_unitary.clone()));
    Ok(report)
}

fn two_qubit(cfg: &RunConfig) -> Result<Report> {
    let p = params(cfg);
    let system =
        build_two_qubit_hamiltonian(&p, &p, cfg.float("tunneling"), cfg.usize("truncation"))?;
    let target = match cfg.text("two_qubit_target") {
        "identity" => targets::identity(4),
        _ => targets::cphase(),
    };
    let spec = GateSpec::new(target, 4, cfg.float("two_qubit_max_total_time"));
    let r = optimize_two_bit_gate(
        &system,
        &spec,
        cfg.usize("two_qubit_pulses"),
        &settings(cfg),
    )?;
    let block: CMat = Mat::from_fn(4, 4, |i, j| r.window_unitary[(i, j)]);
    let distance = nearest_product_distance(block.as_ref(), 8, cfg.int("seed") as u64)?;
    let mut report = Report::default();
    gate_summary(cfg, &mut report, &r);
    report.summary("joint_dimension", system.dim());
    report.number("nearest_product_distance", distance);
    report.tables = vec![
        durations_table(cfg, "two_qubit_durations", &r),
        magnitude_table("two_qubit_block", &block),
    ];
    report.matrices.push(("qubit_block".into(), block));
    Ok(report)
}

fn schedule(cfg: &RunConfig, duration: f64) -> RampSchedule {
    let mut s = RampSchedule::new(cfg.float("ramp_start"), cfg.float("ramp_end"), duration);
    s.shape = match cfg.text("ramp_shape") {
        "smoothstep" => RampShape::Smoothstep,
        _ => RampShape::Linear,
    };
    s.step = cfg.float("ramp_step");
    s.tolerance = cfg.float("ramp_tolerance");
    s
}

/// `√q |ψ₁⟩ + e^{iφ} √(1−q) |ψ₂⟩` at the start of the ramp.
fn initial_state(cfg: &RunConfig, p: &ModelParams, basis: &FockBasis) -> Result<Vec<c64>> {
    let s = spectra::solve(&p.with_omega0(cfg.float("ramp_start")), basis, 2)?;
    let q = cfg.float("qubit_population");
    let phi = cfg.float("qubit_phase");
    let beta = c64::new(phi.cos(), phi.sin()) * (1.0 - q).sqrt();
    Ok(s.state(0)
        .iter()
        .zip(s.state(1))
        .map(|(a, b)| a * q.sqrt() + b * beta)
        .collect())
}

fn ramp(cfg: &RunConfig) -> Result<Report> {
    let p = params(cfg);
    let basis = FockBasis::new(p.n_atoms, 3)?;
    let initial = initial_state(cfg, &p, &basis)?;
    let tracked = cfg.usize("ramp_tracked");

    let mut cols: Vec<String> = [
        "duration_U0",
        "duration_ms",
        "fidelity",
        "margin",
        "min_gap_U0",
        "max_rate_U0",
        "steps",
        "richardson_error",
    ]
    .map(String::from)
    .to_vec();
    cols.extend((0..tracked).map(|k| format!("population{k}")));
    let mut table = Table::with_columns("ramp", cols);
    for &t in cfg.floats("ramp_durations") {
        let r = adiabatic_ramp(&p, &schedule(cfg, t), &initial, tracked)?;
        let mut row: Vec<Cell> = [t, ms(cfg, t), r.fidelity, r.margin, r.min_gap, r.max_rate]
            .map(Cell::from)
            .to_vec();
        row.push(r.steps.into());
        row.push(r.richardson_error.into());
        row.extend(
            (0..tracked).map(|k| Cell::from(r.final_populations.get(k).copied().unwrap_or(0.0))),
        );
        table.push(row);
    }

    let profile = gap_profile(
        &p,
        cfg.float("ramp_start"),
        cfg.float("ramp_end"),
        201,
        tracked,
    )?;
    let mut cols = vec!["omega0_U0".to_string(), "ground_U0".to_string()];
    cols.extend((0..tracked).map(|k| format!("gap{}_U0", k + 1)));
    let mut gaps = Table::with_columns("ramp_gaps", cols);
    for (i, &w) in profile.omega.iter().enumerate() {
        let mut row: Vec<Cell> = vec![w.into(), profile.ground[i].into()];
        row.extend(
            (0..tracked).map(|k| Cell::from(profile.gaps[i].get(k).copied().unwrap_or(f64::NAN))),
        );
        gaps.push(row);
    }
    let mut report = Report::default();
    report.number("min_gap_U0", profile.min_gap());
    report.tables = vec![table, gaps];
    Ok(report)
}

fn readout(cfg: &RunConfig) -> Result<Report> {
    let p = params(cfg);
    let basis = FockBasis::new(p.n_atoms, 3)?;
    let initial = initial_state(cfg, &p, &basis)?;
    let r = adiabatic_ramp(
        &p,
        &schedule(cfg, cfg.float("readout_duration")),
        &initial,
        cfg.usize("ramp_tracked"),
    )?;
    let rabi = rabi_states(&p.with_omega0(cfg.float("ramp_end")))?;

    let mut table = Table::new(
        "readout",
        &[
            "state",
            "expected_excitations",
            "p_zero",
            "p_at_least_one",
            "overlap_rabi1",
            "overlap_rabi2",
        ],
    );
    let ideal: Vec<Vec<c64>> = (0..2)
        .map(|k| rabi.state(k, &basis))
        .collect::<Result<_>>()?;
    let states = [
        ("ramped", r.final_state.clone()),
        ("rabi1", ideal[0].clone()),
        ("rabi2", ideal[1].clone()),
    ];
    for (name, psi) in &states {
        let q = qnd_readout(psi, &rabi, &basis)?;
        let overlap = |v: &[c64]| linalg::dot(v, psi).norm_sqr();
        table.push(vec![
            (*name).into(),
            q.expected_excitations.into(),
            q.p_zero.into(),
            q.p_at_least_one.into(),
            overlap(&ideal[0]).into(),
            overlap(&ideal[1]).into(),
        ]);
    }
    let mut report = Report::default();
    report.number("ramp_fidelity", r.fidelity);
    report.number("ramp_margin", r.margin);
    report.summary("rabi_anharmonic", rabi.anharmonic);
    report.summary("rabi_many_body_U0", rabi.many_body.to_vec());
    report.tables = vec![table];
    Ok(report)
}

fn loss(cfg: &RunConfig) -> Result<Report> {
    let p = params(cfg);
    let opts = LossRateOptions::default();
    let atoms = cfg.ints("loss_atoms");

    let mut single = Table::new(
        "loss_single",
        &[
            "n_atoms",
            "omega0_U0",
            "gamma_ratio",
            "first_term",
            "second_term",
            "theta",
            "chi",
        ],
    );
    for &n in &atoms {
        let q = p.coscaled(n);
        let r = effective_loss_rate(&q, LossKind::SingleAtom, &opts)?;
        let mut row = vec![Cell::from(n)];
        row.extend(
            [
                q.omega0,
                r.ratio,
                r.first_term,
                r.second_term,
                r.theta,
                r.chi,
            ]
            .map(Cell::from),
        );
        single.push(row);
    }

    let mut by_flux = Table::new(
        "loss_flux",
        &["flux", "gamma_ratio", "first_term", "second_term"],
    );
    for f in spectra::linspace(
        cfg.float("flux_min"),
        cfg.float("flux_max"),
        cfg.usize("loss_flux_points"),
    ) {
        let r = effective_loss_rate(&p.with_flux(f), LossKind::SingleAtom, &opts)?;
        by_flux.push(
            [f, r.ratio, r.first_term, r.second_term]
                .map(Cell::from)
                .to_vec(),
        );
    }

    let three_atoms: Vec<usize> = atoms.iter().copied().filter(|&n| n >= 5).collect();
    let rows = three_body_effective_rate(
        &p,
        cfg.float("k3"),
        cfg.float("density"),
        &three_atoms,
        &opts,
    )?;
    let mut three = Table::new(
        "loss_three_body",
        &[
            "n_atoms",
            "base_rate_per_s",
            "bracket",
            "effective_rate_per_s",
            "normalized",
        ],
    );
    for r in &rows {
        three.push(vec![
            r.n_atoms.into(),
            r.base_rate.into(),
            r.bracket.into(),
            r.effective_rate.into(),
            r.normalized.into(),
        ]);
    }

    let head = effective_loss_rate(&p, LossKind::SingleAtom, &opts)?;
    let mut report = Report::default();
    report.number("gamma_ratio", head.ratio);
    report.number("slowdown", head.first_term / head.ratio);
    if let Some(r) = rows.iter().find(|r| r.n_atoms == p.n_atoms) {
        report.number("three_body_rate_per_s", r.effective_rate);
    }
    report.tables = vec![single, by_flux, three];
    Ok(report)
}
