//! Subcommand bodies: stdout reports and CSV artifacts.

use std::fs;
use std::path::Path;

use opweigh::verify::{instrument_checks, oracle_checks, Check};
use opweigh::weighing::with_uniform_noise;
use opweigh::{balance_check, criticality_report, recover_coefficients, Instrument};

use crate::config::{SeriesArgs, SolveArgs, VerifyArgs, WeighArgs};
use crate::Failure;

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<fs::File>, Failure> {
    fs::create_dir_all(dir)?;
    Ok(csv::Writer::from_path(dir.join(name))?)
}

fn num(x: f64) -> String {
    format!("{:e}", if x == 0.0 { 0.0 } else { x })
}

fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.12e}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let inst = Instrument::from(&args.problem.load()?);
    let bp = inst.balance_at(args.eps)?;
    let t = inst.family.eval(args.eps, bp.z_bal);
    let fp = &bp.flux_pair;
    println!("eps                {:.12e}", args.eps);
    println!("z_bal              {:.15e}", bp.z_bal);
    println!("R                  {:.15e}", fp.gauge);
    println!("R residual         {:.3e}", bp.r_residual);
    println!("flux               {}", vector(fp.flux.as_slice()));
    println!("adjoint flux       {}", vector(fp.adjoint_flux.as_slice()));
    match criticality_report(&t) {
        Ok(report) => {
            println!("sigma              {:.12e}", report.sigma);
            if t.l.nrows() > 1 {
                println!("spectral gap       {:.12e}", report.gap);
                println!("|sigma| / gap      {:.6e}", report.separation);
            }
            println!("harmonicity        {:.12e}", report.omega);
            println!("source coupling    {:.12e}", report.source_coupling);
            println!("gauge coupling     {:.12e}", report.gauge_coupling);
        }
        Err(e) => println!("spectral report    unavailable: {e}"),
    }
    Ok(())
}

pub fn series(args: &SeriesArgs) -> Result<(), Failure> {
    let inst = Instrument::from(&args.problem.load()?);
    let bundle = inst.series(args.order)?;
    let dim = inst.family.dim();
    let mut w = writer(&args.out, "series.csv")?;
    let mut header = vec!["n".to_string(), "z_n".to_string()];
    header.extend((0..dim).map(|i| format!("flux_{i}")));
    header.extend((0..dim).map(|i| format!("adjoint_{i}")));
    w.write_record(&header)?;
    for n in 0..=args.order {
        let mut row = vec![n.to_string(), num(bundle.z.coeff(n))];
        row.extend(bundle.flux.coeff(n).iter().map(|&x| num(x)));
        row.extend(bundle.adjoint_flux.coeff(n).iter().map(|&x| num(x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    println!("wrote {}", args.out.join("series.csv").display());
    Ok(())
}

pub fn weigh(args: &WeighArgs) -> Result<(), Failure> {
    let inst = Instrument::from(&args.problem.load()?);
    let report = balance_check(&inst, &args.eps_grid.0, args.order, args.quad_tol)?;

    let mut w = writer(&args.out, "weighing_report.csv")?;
    w.write_record(["eps", "z_bal", "Z1_series", "Z2_integral", "balance_residual"])?;
    for s in &report.samples {
        w.write_record([num(s.eps), num(s.z_bal), num(s.z1_series), num(s.z2_integral), num(s.balance_residual)])?;
    }
    w.flush()?;

    let measured = with_uniform_noise(&report.measured(), args.noise, args.seed);
    let informative = measured.iter().filter(|(e, _)| *e != 0.0).count();
    let recovery = match informative {
        0 => None,
        k => Some(recover_coefficients(&measured, args.order.min(k - 1))?),
    };
    let mut w = writer(&args.out, "coefficients.csv")?;
    w.write_record(["n", "series_value", "recovered_value", "abs_error"])?;
    for (n, &c) in report.weight_scale.coeffs().iter().enumerate() {
        let (recovered, error) = match recovery.as_ref().and_then(|r| r.get(n)) {
            Some(r) => (num(r), num((r - c).abs())),
            None => (String::new(), String::new()),
        };
        w.write_record([n.to_string(), num(c), recovered, error])?;
    }
    w.flush()?;

    let worst = report.samples.iter().fold(0.0f64, |m, s| m.max(s.balance_residual));
    println!("samples            {}", report.samples.len());
    println!("max |Z1 + dZ2|     {worst:.3e}");
    if let Some(r) = &recovery {
        println!("recovered order    {}", r.order());
        println!("fit condition      {:.3e}{}", r.condition, if r.scaled_basis { " (scaled basis)" } else { "" });
    }
    println!("wrote {}", args.out.join("weighing_report.csv").display());
    println!("wrote {}", args.out.join("coefficients.csv").display());
    Ok(())
}

fn print_table(checks: &[Check]) {
    let width = checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:<width$}  {}", c.name, c.detail);
    }
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let mut checks = oracle_checks();
    for path in &args.problems {
        let problem = opweigh::Problem::load(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let label = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        checks.extend(instrument_checks(&label, &Instrument::from(&problem), args.order));
    }
    print_table(&checks);
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} failed", checks.len(), failed);
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}
