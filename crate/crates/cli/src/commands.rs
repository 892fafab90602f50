use crate::config::RunConfig;
use crate::{
    EXIT_INVARIANT, EXIT_NONCONVERGENCE, EXIT_OK, EXIT_PROJECTION, EXIT_THRESHOLD, EXIT_USAGE,
};
use gsw_core::monopole::{
    critical_t, extract_divisor, holomorphic_data, project_pi, read_bundle, residuals, solve_hk,
    threshold, write_bundle, Configuration, Divisor,
};
use gsw_core::suite::{run_suite, SuiteOptions};
use gsw_core::{Error, ResidualReport, Threshold, TorusGrid, CONVENTIONS_VERSION};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::BelowThreshold { .. } | Error::Unstable => EXIT_THRESHOLD,
        Error::NonConvergence { .. } | Error::Overflow { .. } | Error::NotCertified(_) => {
            EXIT_NONCONVERGENCE
        }
        Error::HolomorphyFailure { .. } | Error::ZeroClusterAmbiguous(_) => EXIT_PROJECTION,
        Error::InvalidInput(_) | Error::Format(_) | Error::Io(_) => EXIT_USAGE,
    }
}

fn fail(err: Error) -> u8 {
    match &err {
        Error::BelowThreshold { margin } => {
            eprintln!("error: stability threshold not met, margin t - 4*pi*d/V = {margin:.6e}")
        }
        Error::NonConvergence {
            iterations,
            residual,
            ..
        } => {
            eprintln!(
                "error: no convergence after {iterations} iterations, residual {residual:.3e}"
            )
        }
        _ => eprintln!("error: {err}"),
    }
    exit_for(&err)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn describe(cfg: &Configuration, rep: &mut String) {
    let g = &cfg.grid;
    let _ = writeln!(rep, "conventions: {CONVENTIONS_VERSION}");
    let _ = writeln!(rep, "dim: {}", g.dim());
    let _ = writeln!(rep, "sizes: {:?}", g.sizes());
    let _ = writeln!(rep, "lengths: {:?}", g.lengths());
    let _ = writeln!(rep, "volume: {:.15e}", g.volume());
    let _ = writeln!(rep, "degree: {}", cfg.degree());
    let _ = writeln!(rep, "n: {}", cfg.n());
    let _ = writeln!(rep, "t: {:.15e}", cfg.t);
    let _ = writeln!(
        rep,
        "critical_t: {:.15e}",
        critical_t(cfg.degree(), g.volume())
    );
    let _ = writeln!(rep, "threshold_margin: {:.15e}", threshold(cfg).margin());
}

fn residual_lines(r: &ResidualReport, rep: &mut String) {
    let names = ["dirac", "moment", "mu_c", "f02"];
    for (name, v) in names.iter().zip(r.norms()) {
        let _ = writeln!(rep, "residual_{name}: {v:.6e}");
    }
}

fn divisor_lines(d: &Divisor, rep: &mut String) {
    let _ = writeln!(rep, "divisor_total: {}", d.total);
    let _ = writeln!(rep, "divisor_points: {}", d.points.len());
    let _ = writeln!(rep, "winding_sum: {:.12e}", d.winding_sum);
}

pub fn invariants(cfg: &RunConfig) -> u8 {
    let report = run_suite(&SuiteOptions {
        seed: cfg.seed,
        samples: 100,
        flip_omega1: cfg.flip_omega_sign,
        jobs: cfg.jobs,
    });
    print!("{}", report.to_table());
    let mut text = format!("conventions: {CONVENTIONS_VERSION}\nseed: {}\n", cfg.seed);
    let _ = writeln!(text, "flip_omega_sign: {}", cfg.flip_omega_sign);
    let _ = writeln!(text, "passed: {}", report.passed());
    let written = write_out(&cfg.out, "invariants.csv", &report.to_csv())
        .and_then(|_| write_out(&cfg.out, "report.txt", &text));
    if let Err(e) = written {
        return fail(e);
    }
    if report.passed() {
        println!("all invariants hold");
        EXIT_OK
    } else {
        for r in report.rows.iter().filter(|r| !r.passed) {
            eprintln!(
                "failed: {} (worst {:.3e} > tol {:.1e})",
                r.name, r.worst, r.tol
            );
        }
        EXIT_INVARIANT
    }
}

pub fn solve(cfg: &RunConfig) -> u8 {
    match try_solve(cfg) {
        Ok(code) => code,
        Err(e) => fail(e),
    }
}

fn try_solve(cfg: &RunConfig) -> Result<u8, Error> {
    let grid = TorusGrid::new(&cfg.sizes(), &cfg.lengths())?;
    let t = cfg.t.resolve(cfg.degree, grid.volume());
    let holo = holomorphic_data(&grid, cfg.degree, cfg.n, t, cfg.constant_alpha, cfg.seed)?;
    let margin = threshold(&holo).margin();
    println!(
        "t = {t:.12e}, critical 4*pi*d/V = {:.12e}, margin = {margin:.6e}",
        critical_t(cfg.degree, grid.volume())
    );
    if let Threshold::Below(m) = threshold(&holo) {
        return Err(Error::BelowThreshold { margin: m });
    }
    let sol = solve_hk(&holo, cfg.tol)?;
    let res = residuals(&sol.config)?;
    println!(
        "converged in {} Newton steps, KW residual {:.3e}, max residual {:.3e}",
        sol.kw.iterations,
        sol.kw.residual_norm,
        res.max_norm()
    );

    let out = &cfg.out;
    write_bundle(&out.join("solution"), &sol.config, Some(cfg.seed))?;
    write_out(out, "residuals.csv", &res.to_csv())?;
    let mut trace = Vec::new();
    sol.kw.write_trace(&mut trace)?;
    write_out(out, "kw_trace.csv", &String::from_utf8_lossy(&trace))?;

    let mut rep = String::from("command: solve\n");
    describe(&sol.config, &mut rep);
    let _ = writeln!(rep, "seed: {}", cfg.seed);
    let _ = writeln!(
        rep,
        "alpha: {}",
        if cfg.constant_alpha { "const" } else { "theta" }
    );
    let _ = writeln!(rep, "tol: {:e}", cfg.tol);
    let _ = writeln!(rep, "kw_iterations: {}", sol.kw.iterations);
    let _ = writeln!(rep, "kw_residual: {:.6e}", sol.kw.residual_norm);
    let _ = writeln!(rep, "kw_min_ritz: {:.6e}", sol.kw.min_ritz);
    residual_lines(&res, &mut rep);

    // the divisor is read off the classical projection when n > 1
    let classical = if sol.config.n() == 1 {
        Ok(sol.config.clone())
    } else {
        project_pi(&sol.config, cfg.tol)
    };
    let divisor = classical.and_then(|c| extract_divisor(&c));
    let code = match divisor {
        Ok(d) => {
            write_out(out, "divisor.csv", &d.to_csv())?;
            divisor_lines(&d, &mut rep);
            println!(
                "divisor total {} from {} zero clusters",
                d.total,
                d.points.len()
            );
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(rep, "divisor_error: {e}");
            eprintln!("error: divisor extraction failed: {e}");
            exit_for(&e)
        }
    };
    write_out(out, "report.txt", &rep)?;
    for (name, v) in ["dirac", "moment", "mu_c", "f02"].iter().zip(res.norms()) {
        if v > cfg.tol {
            eprintln!(
                "warning: {name} residual {v:.3e} exceeds tol {:.1e}",
                cfg.tol
            );
        }
    }
    Ok(code)
}

pub fn project(cfg: &RunConfig, bundle: &Path) -> u8 {
    match try_project(cfg, bundle) {
        Ok(code) => code,
        Err(e) => fail(e),
    }
}

fn try_project(cfg: &RunConfig, bundle: &Path) -> Result<u8, Error> {
    let (sol, meta) = read_bundle(bundle)?;
    if meta.conventions != CONVENTIONS_VERSION {
        eprintln!(
            "warning: bundle written under conventions '{}'",
            meta.conventions
        );
    }
    let sw = project_pi(&sol, cfg.tol)?;
    let res = residuals(&sw)?;
    println!("projected: holomorphy residual {:.3e}", res.r_dbar);
    let out = &cfg.out;
    write_bundle(&out.join("projected"), &sw, meta.seed)?;
    write_out(out, "residuals.csv", &res.to_csv())?;
    let mut rep = String::from("command: project\n");
    describe(&sw, &mut rep);
    let _ = writeln!(rep, "source_n: {}", sol.n());
    let _ = writeln!(rep, "holomorphy_residual: {:.6e}", res.r_dbar);
    residual_lines(&res, &mut rep);
    let code = match extract_divisor(&sw) {
        Ok(d) => {
            write_out(out, "divisor.csv", &d.to_csv())?;
            divisor_lines(&d, &mut rep);
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(rep, "divisor_error: {e}");
            exit_for(&e)
        }
    };
    write_out(out, "report.txt", &rep)?;
    Ok(code)
}
