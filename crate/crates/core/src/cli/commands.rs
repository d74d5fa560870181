use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{InitialState, RunConfig, Subcommand};
use super::io::{decomposition_csv, field_csv, field_pgm, parse_field_csv, read_to_string, OutputDir};
use super::CliError;
use crate::connection::{derivative_matrix, derivative_stencil};
use crate::diagnostics::{cat_state, coherent_state, compare, report, DiagnosticsReport};
use crate::gdr::{cutoff_level, evolve, march, EvolveOptions, GmresSettings};
use crate::moyal::{add_decoherence, assemble_moyal, assemble_moyal_with, poly_potential, CoefficientField, MoyalOperator, PhaseSpaceGrid};
use crate::scales::{fock_norm, slow_fast_split, FockComponent, FockStateList};
use crate::transform::{best_basis, compress_operator, fwt_forward_1d, fwt_inverse_1d, nonstandard_form, PacketBasis, PacketTree};
use crate::wavelets::make_family;

/// Boundary mass above which a run warns about the periodic seam.
const SEAM_WARNING: f64 = 1e-8;

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    /// Emitted files and their SHA-256 digests (the manifest itself excluded).
    pub files: Vec<(String, String)>,
    /// Human-readable result lines also printed to standard output.
    pub lines: Vec<String>,
}

/// Executes `config.subcommand`.
pub fn run(config: &RunConfig) -> Result<RunSummary, CliError> {
    config.validate()?;
    match config.subcommand {
        Subcommand::Evolve => run_evolve(config),
        Subcommand::Gdr => run_gdr(config),
        Subcommand::Analyze => run_analyze(config),
        Subcommand::Selftest => {
            let lines = selftest(config.seed);
            let failed = lines.iter().filter(|l| !l.passed).count();
            let text: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
            for l in &text {
                println!("{l}");
            }
            if failed > 0 {
                return Err(CliError::SelftestFailed(failed));
            }
            Ok(RunSummary {
                output_dir: config.output_dir.clone(),
                files: Vec::new(),
                lines: text,
            })
        }
    }
}

fn operator(config: &RunConfig, grid: &PhaseSpaceGrid) -> Result<MoyalOperator, CliError> {
    let op = assemble_moyal_with(
        &config.potential()?,
        grid,
        config.moyal_cut,
        &config.family("family_q")?,
        &config.family("family_p")?,
    )?;
    Ok(add_decoherence(&op, config.decoherence)?)
}

fn initial_field(config: &RunConfig, grid: &PhaseSpaceGrid) -> CoefficientField {
    match config.initial {
        InitialState::Coherent => coherent_state(config.q0, config.p0, config.omega, grid),
        InitialState::Cat => cat_state(config.q0, config.omega, grid),
    }
}

fn diagnostics_table(rows: &[DiagnosticsReport]) -> String {
    let mut out = String::from(DiagnosticsReport::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

fn scales_rows(config: &RunConfig, field: &CoefficientField, out: &mut String) -> Result<(), CliError> {
    let split = slow_fast_split(field, &config.family("family_q")?, config.coarse_level, config.slow_level)?;
    for (level, energy, fraction) in split.energy_rows() {
        let label = level.map_or_else(|| "slow".to_string(), |l| l.to_string());
        let _ = writeln!(out, "{:.16e},{label},{energy:.16e},{fraction:.16e}", field.time);
    }
    Ok(())
}

const SCALES_HEADER: &str = "time,component,energy,fraction\n";

fn warn_seam(r: &DiagnosticsReport) {
    if r.boundary_mass > SEAM_WARNING {
        eprintln!(
            "warning: boundary mass {:.3e} at t = {:.6} exceeds {SEAM_WARNING:e}; widen the periodic box",
            r.boundary_mass, r.time
        );
    }
}

fn run_evolve(config: &RunConfig) -> Result<RunSummary, CliError> {
    let grid = config.grid()?;
    let op = operator(config, &grid)?;
    let potential = config.potential()?;
    let w0 = initial_field(config, &grid);
    eprintln!(
        "evolve: {}x{} grid, {} terms, t_end = {}, dt = {}",
        grid.nq(),
        grid.np(),
        op.all_terms().count(),
        config.t_end,
        config.dt
    );
    let options = EvolveOptions {
        method: config.method,
        stride: config.stride,
        courant: config.courant,
    };
    let traj = evolve(&op, &w0, config.t_end, config.dt, &options)?;
    let mut out = OutputDir::create(&config.output_dir)?;
    let mut rows = Vec::new();
    let mut scales = String::from(SCALES_HEADER);
    for (index, field) in traj.fields.iter().enumerate() {
        let r = report(field, &potential);
        warn_seam(&r);
        out.write(&format!("snapshot_{index:04}.csv"), &field_csv(field))?;
        out.write(&format!("snapshot_{index:04}.pgm"), &field_pgm(field, config.pgm_clip))?;
        scales_rows(config, field, &mut scales)?;
        rows.push(r);
    }
    out.write("diagnostics.csv", &diagnostics_table(&rows))?;
    out.write("scales.csv", &scales)?;

    let mut lines = vec![format!(
        "evolve: {} steps of dt = {:e}, {} snapshots",
        traj.steps,
        traj.dt,
        traj.fields.len()
    )];
    let mut extra = vec![
        ("effective_dt", format!("{:?}", traj.dt)),
        ("steps", traj.steps.to_string()),
        ("stable_dt", format!("{:?}", op.stable_dt(config.courant))),
    ];
    if config.cutoff {
        let result = cutoff_level(
            |n| {
                let level = n.trailing_zeros();
                let g = config.grid_at(level, level).map_err(|e| crate::gdr::GdrError::InvalidArgument(e.to_string()))?;
                let op = assemble_moyal_with(&potential, &g, config.moyal_cut, op.family(), op.family_p())?;
                let op = add_decoherence(&op, config.decoherence)?;
                let dt = config.dt.min(op.stable_dt(config.courant));
                eprintln!("cutoff: solving at N = {n}");
                let t = evolve(&op, &initial_field(config, &g), config.t_end, dt, &options)?;
                Ok(t.last().clone())
            },
            &config.ladder,
            config.epsilon,
        )?;
        let mut table = String::from("n,difference\n");
        for (n, d) in &result.differences {
            let _ = writeln!(table, "{n},{d:.16e}");
        }
        out.write("cutoff.csv", &table)?;
        lines.push(format!("cutoff: N = {} converged = {}", result.n, result.converged));
        extra.push(("cutoff_n", result.n.to_string()));
        extra.push(("cutoff_converged", result.converged.to_string()));
    }
    out.write_manifest(&config.entries(), &extra)?;
    for l in &lines {
        println!("{l}");
    }
    Ok(RunSummary {
        output_dir: config.output_dir.clone(),
        files: out.files().to_vec(),
        lines,
    })
}

fn run_gdr(config: &RunConfig) -> Result<RunSummary, CliError> {
    let grid = config.grid_at(config.gdr_level, config.gdr_level)?;
    let op = operator(config, &grid)?;
    let w0 = initial_field(config, &grid);
    let family_t = config.family("family_t")?;
    let settings = GmresSettings {
        tol: config.tol,
        max_iter: config.max_iter,
        restart: config.restart,
    };
    eprintln!(
        "gdr: {}x{} grid, N_t = {}, horizon {} in windows of {}",
        grid.nq(),
        grid.np(),
        config.n_t,
        config.gdr_t_end,
        config.window
    );
    let windows = march(&op, &w0, config.gdr_t_end, config.window, config.n_t, &family_t, config.ic_weight, &settings)?;
    let dt = config.dt.min(op.stable_dt(config.courant));
    let options = EvolveOptions {
        method: config.method,
        stride: usize::MAX,
        courant: config.courant,
    };
    let mol = evolve(&op, &w0, config.gdr_t_end, dt, &options)?;
    let (gdr_final, last) = windows.last().expect("at least one window");
    let discrepancy = compare(gdr_final, mol.last())?;
    let worst = windows.iter().filter_map(|(_, s)| s.residual_norm).fold(0.0f64, f64::max);

    let mut out = OutputDir::create(&config.output_dir)?;
    let mut table = String::from("window,t0,t1,unknowns,iterations,residual\n");
    for (i, (_, s)) in windows.iter().enumerate() {
        let (t0, t1) = s.window();
        let _ = writeln!(
            table,
            "{i},{t0:.16e},{t1:.16e},{},{},{:.16e}",
            s.unknown_count(),
            s.iterations,
            s.residual_norm.unwrap_or(f64::NAN)
        );
    }
    out.write("gdr.csv", &table)?;
    out.write("gdr_final.csv", &field_csv(gdr_final))?;
    out.write("mol_final.csv", &field_csv(mol.last()))?;
    out.write("gdr_final.pgm", &field_pgm(gdr_final, config.pgm_clip))?;
    let line = format!(
        "gdr: unknowns = {} residual = {worst:.3e} discrepancy = {discrepancy:.3e} windows = {}",
        last.unknown_count(),
        windows.len()
    );
    out.write_manifest(
        &config.entries(),
        &[
            ("effective_dt", format!("{:?}", mol.dt)),
            ("gdr_residual", format!("{worst:?}")),
            ("gdr_discrepancy", format!("{discrepancy:?}")),
        ],
    )?;
    println!("{line}");
    Ok(RunSummary {
        output_dir: config.output_dir.clone(),
        files: out.files().to_vec(),
        lines: vec![line],
    })
}

fn run_analyze(config: &RunConfig) -> Result<RunSummary, CliError> {
    let input = config.input.as_ref().ok_or_else(|| CliError::Config {
        key: "input".into(),
        line: None,
        message: "analyze needs a snapshot CSV".into(),
    })?;
    let field = parse_field_csv(&read_to_string(input)?, config.hbar, config.mass).map_err(|message| CliError::Config {
        key: "input".into(),
        line: None,
        message: format!("{}: {message}", input.display()),
    })?;
    let finest = field.grid.jq.min(field.grid.jp) as usize;
    if config.slow_level >= finest {
        return Err(CliError::Config {
            key: "slow_level".into(),
            line: None,
            message: format!("snapshot has only {finest} levels"),
        });
    }
    let potential = config.potential()?;
    let r = report(&field, &potential);
    warn_seam(&r);
    let mut out = OutputDir::create(&config.output_dir)?;
    out.write("diagnostics.csv", &diagnostics_table(std::slice::from_ref(&r)))?;
    let mut scales = String::from(SCALES_HEADER);
    scales_rows(config, &field, &mut scales)?;
    out.write("scales.csv", &scales)?;
    let decomposition = crate::scales::decompose(&field, &config.family("family_q")?, config.coarse_level)?;
    out.write("coefficients.csv", &decomposition_csv(&decomposition))?;
    out.write("heatmap.pgm", &field_pgm(&field, config.pgm_clip))?;
    out.write_manifest(&config.entries(), &[])?;
    let line = format!(
        "analyze: normalization = {:.6} purity = {:.6} negativity = {:.3e} energy = {:.6}",
        r.normalization, r.purity, r.negativity_volume, r.energy
    );
    println!("{line}");
    Ok(RunSummary {
        output_dir: config.output_dir.clone(),
        files: out.files().to_vec(),
        lines: vec![line],
    })
}

/// One property checked by [`selftest`].
#[derive(Debug, Clone, PartialEq)]
pub struct SelftestLine {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl std::fmt::Display for SelftestLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: {:.3e} (bound {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.bound
        )
    }
}

fn check(name: &'static str, value: Result<f64, CliError>, bound: f64) -> SelftestLine {
    let value = value.unwrap_or(f64::INFINITY);
    SelftestLine {
        name,
        value,
        bound,
        passed: value <= bound,
    }
}

/// Runs a fast invariant suite on small problems.
pub fn selftest(seed: u64) -> Vec<SelftestLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signal: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let field_grid = PhaseSpaceGrid::symmetric(6.0, 5).expect("fixed grid");
    let random_field = CoefficientField::from_fn(&field_grid, |_, _| rng.gen_range(-1.0..1.0));
    let d6 = || make_family("daubechies-6").map_err(CliError::from);

    vec![
        check(
            "fwt reconstruction",
            (|| {
                let f = d6()?;
                let dec = fwt_forward_1d(&signal, &f, 0)?;
                let back = fwt_inverse_1d(&dec, &f)?;
                let err = back.iter().zip(&signal).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                Ok(err / signal.iter().map(|v| v * v).sum::<f64>().sqrt())
            })(),
            1e-10,
        ),
        check(
            "parseval",
            (|| {
                let dec = fwt_forward_1d(&signal, &d6()?, 0)?;
                let e: f64 = signal.iter().map(|v| v * v).sum();
                Ok((dec.total_energy() - e).abs() / e)
            })(),
            1e-10,
        ),
        check(
            "connection moments",
            (|| {
                let f = d6()?;
                let mut worst = 0.0f64;
                for d in 1..=3 {
                    let stencil = derivative_stencil(&f, d)?;
                    let moment: f64 = stencil.iter().map(|(k, w)| (*k as f64).powi(d as i32) * w).sum();
                    let want = if d % 2 == 0 { 1.0 } else { -1.0 } * (1..=d).product::<usize>() as f64;
                    worst = worst.max((moment - want).abs());
                }
                Ok(worst)
            })(),
            1e-8,
        ),
        check(
            "derivative symmetry",
            (|| {
                let f = d6()?;
                let mut worst = 0.0f64;
                for d in 1..=3 {
                    let m = derivative_matrix(&f, d, 6, 1.0)?.to_dense();
                    let s = if d % 2 == 0 { 1.0 } else { -1.0 };
                    worst = worst.max((&m.t() * s - &m).iter().fold(0.0f64, |a, v| a.max(v.abs())));
                }
                Ok(worst)
            })(),
            0.0,
        ),
        check(
            "moyal truncation",
            (|| {
                let u = poly_potential(&[0.0, 0.0, -1.0, 0.0, 0.1])?;
                let a = assemble_moyal(&u, &field_grid, 1, &d6()?)?;
                let b = assemble_moyal(&u, &field_grid, 5, &d6()?)?;
                let diff = &a.apply_array(&random_field.data) - &b.apply_array(&random_field.data);
                Ok(diff.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            })(),
            1e-12,
        ),
        check(
            "slow/fast reconstruction",
            (|| Ok(slow_fast_split(&random_field, &d6()?, 1, 3)?.reconstruction_error))(),
            1e-10,
        ),
        check(
            "fock additivity",
            (|| {
                let a = FockComponent::from_field(&random_field);
                let b = FockComponent::from_field(&coherent_state(0.0, 0.0, 1.0, &field_grid));
                let one = |c: &FockComponent| fock_norm(&FockStateList { w0: 0.0, states: vec![c.clone()] });
                let both = fock_norm(&FockStateList { w0: 0.0, states: vec![a.clone(), b.clone()] })?;
                Ok((both.powi(2) - one(&a)?.powi(2) - one(&b)?.powi(2)).abs())
            })(),
            1e-12,
        ),
        check(
            "best basis entropy",
            (|| {
                let f = d6()?;
                let basis = best_basis(&signal[..64], &f, 3)?;
                let tree = PacketTree::build(&signal[..64], &f, 3)?;
                let root = PacketBasis::cost_of(&tree, &[(0, 0)].into_iter().collect());
                let standard = PacketBasis::cost_of(&tree, &PacketBasis::standard_wavelet_nodes(3));
                Ok((basis.entropy - root.min(standard)).max(0.0))
            })(),
            0.0,
        ),
        check(
            "operator compression sparsity",
            (|| {
                let f = d6()?;
                let dense = derivative_matrix(&f, 1, 8, 1.0)?.to_dense();
                let ns = nonstandard_form(dense.view(), &f, 2)?;
                Ok(compress_operator(ns.view(), 1e-6)?.sparsity())
            })(),
            0.2,
        ),
        check(
            "gdr against method of lines",
            (|| {
                let op = assemble_moyal(&poly_potential(&[0.0, 0.0, 0.5])?, &field_grid, 1, &d6()?)?;
                let w0 = coherent_state(1.0, 0.0, 1.0, &field_grid);
                let windows = march(&op, &w0, 0.25, 0.25, 64, &d6()?, 1e3, &GmresSettings::default())?;
                let mol = evolve(&op, &w0, 0.25, op.stable_dt(0.5), &EvolveOptions::default())?;
                Ok(compare(&windows[0].0, mol.last())?)
            })(),
            1e-3,
        ),
    ]
}
