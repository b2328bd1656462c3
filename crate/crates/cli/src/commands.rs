use std::io::Write;

use magframe::filterbank::FilterBank;
use magframe::framelet::{
    framelet_atom, mgft, read_coefficients_csv, reconstruct as inverse, write_coefficients_csv, FrameletSystem,
    TransformConfig,
};
use magframe::graph::{hermitian_residual, Digraph, MagneticLaplacian};
use magframe::pipeline::{run_denoise, run_experiment, write_denoise_csv, Dataset, ExperimentConfig};
use magframe::spectral::eig_hermitian;

use crate::files::{output, read_signal, read_triplets, write_signal};
use crate::{
    AtomsArgs, BankArgs, CliError, DenoiseArgs, ExperimentArgs, ReconstructArgs, SystemArgs, TrainArgs,
    TransformArgs, VerifyArgs,
};

type CliResult = Result<(), CliError>;

const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const IDENTITY_TOL: f64 = 1e-9;
const IDENTITY_GRID: usize = 10_001;
const TIGHTNESS_TOL: f64 = 1e-8;
const MRA_TOL: f64 = 1e-9;
const MRA_GRID: usize = 101;

fn filter_bank(b: &BankArgs) -> FilterBank {
    FilterBank::new(b.bank).with_sigmoid_alpha(b.sigmoid_alpha)
}

fn build_system(a: &SystemArgs) -> Result<FrameletSystem, CliError> {
    if a.levels == 0 {
        return Err(CliError::Usage("--levels must be at least 1".into()));
    }
    let g = Digraph::load(&a.graph)?;
    let config = TransformConfig {
        sigmoid_alpha: a.bank.sigmoid_alpha,
        levels: a.levels,
        cheb_degree: a.cheb_degree,
        ..TransformConfig::new(a.bank.bank, a.q, a.mode)
    };
    Ok(config.build(&g)?)
}

pub fn transform(a: &TransformArgs) -> CliResult {
    let sys = build_system(&a.system)?;
    let x = read_signal(&a.signal)?;
    let coeffs = mgft(&sys, &x)?;
    let mut w = output(a.out.as_deref())?;
    write_coefficients_csv(&coeffs, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn reconstruct(a: &ReconstructArgs) -> CliResult {
    let sys = build_system(&a.system)?;
    let coeffs = read_coefficients_csv(std::fs::File::open(&a.coeffs)?, sys.labels(), sys.n_nodes())?;
    let x = inverse(&sys, &coeffs)?;
    write_signal(&x, output(a.out.as_deref())?)?;
    Ok(())
}

struct Check {
    name: &'static str,
    value: Option<f64>,
    passed: bool,
}

impl Check {
    fn below(name: &'static str, value: f64, tol: f64) -> Self {
        Self {
            name,
            value: Some(value),
            passed: value <= tol,
        }
    }
}

pub fn verify(a: &VerifyArgs) -> CliResult {
    if a.levels == 0 {
        return Err(CliError::Usage("--levels must be at least 1".into()));
    }
    let l = match (&a.graph, &a.laplacian) {
        (Some(g), None) => MagneticLaplacian::new(&Digraph::load(g)?, a.q)?,
        (None, Some(path)) => MagneticLaplacian::from_matrix(a.q, read_triplets(path)?)?,
        _ => return Err(CliError::Usage("give exactly one of --graph and --laplacian".into())),
    };
    let bank = filter_bank(&a.bank);
    let eig = eig_hermitian(&l)?;
    let min_eig = eig.lambda_min();
    let sys = FrameletSystem::exact(&eig, bank.clone(), a.levels, a.q)?;

    let mut checks = vec![
        Check::below("hermitian_residual", hermitian_residual(l.matrix()), HERMITIAN_TOL),
        Check {
            name: "min_eigenvalue",
            value: Some(min_eig),
            passed: min_eig >= -PSD_TOL,
        },
        Check::below("identity_deviation", bank.verify_identity(IDENTITY_GRID), IDENTITY_TOL),
        Check::below("tightness_residual", sys.tightness_residual(), TIGHTNESS_TOL),
    ];
    let mra = (0..MRA_GRID)
        .map(|k| bank.mra_scaling_check(std::f64::consts::PI * k as f64 / (MRA_GRID - 1) as f64))
        .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)));
    checks.push(match mra {
        Ok(v) => Check::below("mra_scaling", v, MRA_TOL),
        Err(magframe::Error::NotMraBank(_)) => Check {
            name: "mra_scaling",
            value: None,
            passed: true,
        },
        Err(e) => return Err(e.into()),
    });

    let mut out = std::io::stdout().lock();
    for c in &checks {
        match c.value {
            Some(v) => writeln!(out, "{}\t{v:e}\t{}", c.name, if c.passed { "ok" } else { "FAIL" })?,
            None => writeln!(out, "{}\t-\tskipped", c.name)?,
        }
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

fn load_config(a: &ExperimentArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(n) = a.n_repeats {
        cfg.n_repeats = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(b) = a.bank {
        cfg.bank = b;
    }
    if let Some(alpha) = a.sigmoid_alpha {
        cfg.sigmoid_alpha = alpha;
    }
    if a.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    Ok(cfg)
}

pub fn train(a: &TrainArgs) -> CliResult {
    let cfg = load_config(&a.experiment)?;
    let outcome = run_experiment(&cfg, a.experiment.jobs)?;
    eprintln!(
        "test accuracy {:.4} +- {:.4} over {} repeats ({:.1}s)",
        outcome.report.mean,
        outcome.report.std,
        outcome.report.repeats.len(),
        outcome.report.wall_clock_seconds
    );
    if let Some(path) = &a.checkpoint {
        match &outcome.checkpoint {
            Some(c) => c.save(path)?,
            None => eprintln!("no checkpoint for the {} model", cfg.model.as_str()),
        }
    }
    let mut w = output(a.report.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &outcome.report).map_err(magframe::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn denoise(a: &DenoiseArgs) -> CliResult {
    let cfg = load_config(&a.experiment)?;
    let ds = Dataset::load(&cfg.dataset)?;
    let rows = run_denoise(&ds, &cfg, &a.sigmas, a.experiment.jobs)?;
    let mut w = output(a.out.as_deref())?;
    write_denoise_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn atoms(a: &AtomsArgs) -> CliResult {
    if a.level == 0 {
        return Err(CliError::Usage("--level must be at least 1".into()));
    }
    let g = Digraph::load(&a.graph)?;
    let bank = filter_bank(&a.bank);
    let eig = eig_hermitian(&MagneticLaplacian::new(&g, a.q)?)?;
    let centres: Vec<usize> = if a.nodes.is_empty() {
        (0..g.n_nodes()).collect()
    } else {
        a.nodes.clone()
    };
    let mut w = output(a.out.as_deref())?;
    writeln!(w, "center,level,band,node,real,imag")?;
    for &c in &centres {
        for band in 0..bank.n_filters() {
            let atom = framelet_atom(&eig, &bank, c, a.level, band)?;
            for (node, v) in atom.iter().enumerate() {
                writeln!(w, "{c},{},{band},{node},{},{}", a.level, v.re, v.im)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

