use std::path::Path;
use std::time::Instant;

use hetlearn_core::complexity::{local_gc_linear, local_gc_lipschitz, rademacher_l1, rademacher_l2};
use hetlearn_core::optim::DEFAULT_TOL;
use hetlearn_core::rates::{critical_for_class, gamma_threshold, ClassTag};
use hetlearn_core::verify::{check_bias_mgf, check_norm_tail, check_wbar, default_norm_tail_cases, default_t_grid, default_verify_cases, TailCheckReport};
use hetlearn_core::{derive_stream, Dataset, RngStream};
use hetlearn_harness::config::MixtureSpec;
use hetlearn_harness::sweep::{calibrated_mixture, fit_class, sample_regression};
use hetlearn_harness::{check_table, emit_csv, read_config, read_csv, run_sweep, Cell, Manifest, Table};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Cli, CliError, CliResult, Command, ComplexityArg};

const DEFAULT_SEED: u64 = 0;

pub(crate) fn run(cli: &Cli) -> CliResult<()> {
    let stream = derive_stream(cli.seed.unwrap_or(DEFAULT_SEED), 0);
    match &cli.command {
        Command::Sample { class, n, gamma, zeta } => {
            let spec = class.spec();
            let cov = MixtureSpec::default().resolve(spec)?;
            let m = calibrated_mixture(&cov, *gamma)?.ok_or_else(|| CliError::Usage(format!("gamma {gamma} is unreachable for this covariate family")))?;
            let data = sample_regression(spec, &cov, &m, *zeta, *n, stream.replicate(0))?;
            output(cli, &dataset_table(&data, None))
        }
        Command::Fit { class, data, tol } => {
            let data = read_dataset(data)?;
            let f = fit_class(class.spec(), &data, *tol)?;
            output(cli, &dataset_table(&data, Some(&f.predict(&data.x))))
        }
        Command::Complexity { kind, n, d, radius, l, draws } => {
            let est = match kind {
                ComplexityArg::GaussianLipschitz => {
                    let mut r = stream.child(0).rng();
                    let mut x: Vec<f64> = (0..*n).map(|_| r.random::<f64>()).collect();
                    x.sort_by(f64::total_cmp);
                    local_gc_lipschitz(&x, *l, *radius, *draws, stream.child(1), DEFAULT_TOL)?
                }
                _ => {
                    let x = gaussian_design(*n, *d, stream.child(0));
                    match kind {
                        ComplexityArg::RademacherL2 => rademacher_l2(&x, *radius, *draws, stream.child(1))?,
                        ComplexityArg::RademacherL1 => rademacher_l1(&x, *radius, *draws, stream.child(1))?,
                        _ => local_gc_linear(&x, *radius, *draws, stream.child(1))?,
                    }
                }
            };
            let mut t = Table::new(&["n", "kind", "value", "std_error", "draws"]);
            t.push(vec![(*n).into(), est.kind.name().into(), est.value.into(), est.std_error.into(), est.draws.into()]);
            output(cli, &t)
        }
        Command::Rates { class, n, gamma, zeta } => {
            let tag = ClassTag::from(class.spec());
            let mut t = Table::new(&["n", "gamma", "delta_star", "rate", "residual", "gamma_threshold"]);
            for &nn in n {
                let r = critical_for_class(tag, *zeta, nn, *gamma)?;
                let thr = gamma_threshold(tag, *zeta, nn)?;
                t.push(vec![nn.into(), (*gamma).into(), r.delta_star.into(), r.rate.into(), r.residual.into(), thr.into()]);
            }
            output(cli, &t)
        }
        Command::Sweep => sweep(cli),
        Command::Verify { replicates } => verify(cli, *replicates, stream),
    }
}

fn output(cli: &Cli, table: &Table) -> CliResult<()> {
    match &cli.out {
        Some(path) => Ok(emit_csv(table, path)?),
        None => {
            print!("{}", table.to_csv_string());
            Ok(())
        }
    }
}

fn gaussian_design(n: usize, d: usize, rng: RngStream) -> DMatrix<f64> {
    let mut r = rng.rng();
    DMatrix::from_fn(n, d, |_, _| r.sample(StandardNormal))
}

fn dataset_table(data: &Dataset, fitted: Option<&[f64]>) -> Table {
    let mut cols: Vec<String> = (0..data.dim()).map(|k| format!("x{k}")).collect();
    cols.push("y".into());
    cols.push(if fitted.is_some() { "fitted" } else { "component" }.into());
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(&cols);
    for i in 0..data.n() {
        let mut row: Vec<Cell> = (0..data.dim()).map(|k| data.x[(i, k)].into()).collect();
        row.push(data.y[i].into());
        row.push(match fitted {
            Some(f) => f[i].into(),
            None => data.assignment.as_ref().map_or(0, |a| a[i]).into(),
        });
        t.push(row);
    }
    t
}

fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let t = read_csv(path)?;
    let xcols: Vec<&String> = t.columns.iter().filter(|c| c.starts_with('x') && c[1..].parse::<usize>().is_ok()).collect();
    if xcols.is_empty() {
        return Err(CliError::Usage(format!("{}: no covariate columns x0, x1, ...", path.display())));
    }
    let y = t.column("y")?;
    let cols: Vec<Vec<f64>> = xcols.iter().map(|c| t.column(c)).collect::<Result<_, _>>()?;
    let x = DMatrix::from_fn(y.len(), cols.len(), |i, k| cols[k][i]);
    Ok(Dataset::new(x, DVector::from_vec(y), None)?)
}

fn sweep(cli: &Cli) -> CliResult<()> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("sweep requires --config".into()))?;
    let mut cfg = read_config(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let start = Instant::now();
    let table = run_sweep(&cfg)?;
    let manifest = Manifest::new(&cfg, table.len(), start.elapsed());
    output(cli, &table)?;
    match &cli.out {
        Some(out) => {
            let mpath = out.with_extension("manifest.json");
            manifest.write(&mpath)?;
        }
        None => eprintln!("{}", manifest.to_json()),
    }
    if cli.check {
        let outcomes = check_table(&cfg, &table)?;
        for o in &outcomes {
            eprintln!("{}", o.line());
        }
        let failed = outcomes.iter().filter(|o| !o.passed).count();
        if failed > 0 {
            return Err(CliError::CheckFailed(failed));
        }
    }
    Ok(())
}

fn report_row(t: &mut Table, check: &str, case: String, r: &TailCheckReport) {
    let excess = (0..r.grid.len()).map(|k| r.empirical[k] - r.bound[k]).fold(f64::NEG_INFINITY, f64::max);
    t.push(vec![check.into(), Cell::Text(case), r.violations.into(), r.replicates.into(), excess.into()]);
}

fn verify(cli: &Cli, replicates: usize, stream: RngStream) -> CliResult<()> {
    let mut t = Table::new(&["check", "case", "violations", "replicates", "max_excess"]);
    let grid = default_t_grid();
    for (k, (v2, alpha, d)) in default_norm_tail_cases().into_iter().enumerate() {
        let r = check_norm_tail(v2, alpha, d, &grid, replicates, stream.child(k as u64))?;
        report_row(&mut t, "norm_tail", format!("v2={v2} alpha={alpha} d={d}"), &r);
    }
    for (k, case) in default_verify_cases().iter().enumerate() {
        let label = format!("d={} n={} m={}", case.d, case.n, case.mixture.regressors.len());
        let r = check_bias_mgf(&case.mixture, case.n, 8, replicates, stream.child(100 + k as u64))?;
        report_row(&mut t, "bias_mgf", label.clone(), &r);
        let r = check_wbar(&case.mixture, case.n, 0.05, replicates, stream.child(200 + k as u64))?;
        report_row(&mut t, "wbar", label, &r);
    }
    output(cli, &t)?;
    if cli.check {
        let failed = t.column("violations")?.iter().filter(|v| **v > 0.0).count();
        eprintln!("{} verify: {failed} of {} checks with violations", if failed == 0 { "PASS" } else { "FAIL" }, t.len());
        if failed > 0 {
            return Err(CliError::CheckFailed(failed));
        }
    }
    Ok(())
}
