//! Command implementations and the exit-code contract:
//! 0 success, 1 malformed input, 2 no solution (target below the critical
//! radius), 3 solver non-convergence, 4 verification failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use annuli::energy::total_energy;
use annuli::error::Error;
use annuli::kinematics::{elasticity, jacobian, lagrangian_density, AnnulusProblem, RadialProfile};
use annuli::quadratic;
use annuli::solver::{critical_radius, solve_bvp, BvpOutcome, SolverConfig, SweepRow};
use annuli::verify::{self, Injection};

use crate::output::{
    fmt_f64, to_json_string, CheckJson, CsvWriter, EnergyJson, EnergySummary, NoSolutionSummary,
    RcircSummary, SolveSummary, VerifyJson,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NO_SOLUTION: u8 = 2;
pub const EXIT_NO_CONVERGENCE: u8 = 3;
pub const EXIT_VERIFY_FAILED: u8 = 4;

/// Map solver errors onto the exit-code contract.
pub fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::InvalidParameter(_)
        | Error::EnergyNotPositive { .. }
        | Error::EnergyNotConvex { .. }
        | Error::MissingTarget
        | Error::Inadmissible { .. } => EXIT_INPUT,
        _ => EXIT_NO_CONVERGENCE,
    }
}

fn fail(error: &Error) -> u8 {
    eprintln!("error: {error}");
    exit_code_for(error)
}

fn write_profile_csv(path: &Path, problem: &AnnulusProblem, profile: &RadialProfile, nodes: usize) -> std::io::Result<()> {
    let file = File::create(path)?;
    let mut csv = CsvWriter::new(BufWriter::new(file));
    csv.header(&["t", "H", "Hdot", "mu", "J", "density"])?;
    let r = problem.r_outer;
    let grid: Vec<f64> = (0..nodes)
        .map(|i| 1.0 + (r - 1.0) * i as f64 / (nodes - 1) as f64)
        .collect();
    for &t in &grid {
        let (h, hdot) = profile.eval(t);
        let mu = elasticity(t, h, hdot);
        let j = jacobian(problem.n, t, h, hdot);
        let density = lagrangian_density(problem.n, &problem.phi, t, h, hdot).unwrap_or(f64::NAN);
        csv.row(&[fmt_f64(t), fmt_f64(h), fmt_f64(hdot), fmt_f64(mu), fmt_f64(j), fmt_f64(density)])?;
    }
    csv.flush()
}

pub struct ProblemSpec {
    pub n: u32,
    pub r_outer: f64,
    pub r_star: Option<f64>,
    pub phi_spec: String,
    pub config: SolverConfig,
}

impl ProblemSpec {
    fn build(&self) -> Result<AnnulusProblem, Error> {
        let phi = annuli::material::parse_phi_spec(&self.phi_spec)?;
        Ok(AnnulusProblem::new(self.n, self.r_outer, self.r_star, phi)?.with_config(self.config))
    }
}

pub fn cmd_solve(spec: &ProblemSpec, profile_out: Option<&Path>, profile_nodes: usize) -> u8 {
    let problem = match spec.build() {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    if problem.r_star.is_none() {
        return fail(&Error::MissingTarget);
    }
    match solve_bvp(&problem) {
        Ok(BvpOutcome::Solved(outcome)) => {
            let summary = SolveSummary {
                lambda: outcome.lambda,
                outer_image: outcome.outer_image,
                r_circ: outcome.r_circ,
                regime: outcome.profile.regime().as_str().to_string(),
                energy: EnergyJson::from(&outcome.energy),
            };
            match to_json_string(&summary) {
                Ok(json) => print!("{json}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_NO_CONVERGENCE;
                }
            }
            if let Some(path) = profile_out {
                if let Err(e) = write_profile_csv(path, &problem, &outcome.profile, profile_nodes) {
                    eprintln!("error: cannot write profile CSV: {e}");
                    return EXIT_NO_CONVERGENCE;
                }
            }
            EXIT_OK
        }
        Ok(BvpOutcome::NoSolution { r_circ }) => {
            let summary = NoSolutionSummary { no_solution: true, r_circ };
            match to_json_string(&summary) {
                Ok(json) => print!("{json}"),
                Err(e) => eprintln!("error: {e}"),
            }
            EXIT_NO_SOLUTION
        }
        Err(e) => fail(&e),
    }
}

pub fn cmd_rcirc(spec: &ProblemSpec) -> u8 {
    let problem = match spec.build() {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let r_circ = match critical_radius(problem.n, &problem.phi, problem.r_outer, &problem.config) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    // second, independent route for the planar quadratic family
    let closed = if problem.n == 2 {
        problem
            .phi
            .quadratic_kappa()
            .and_then(|kappa| quadratic::nitsche_bound(kappa, problem.r_outer).ok())
    } else {
        None
    };
    let summary = RcircSummary {
        n: problem.n,
        r_outer: problem.r_outer,
        r_circ,
        r_circ_closed_form: closed,
        gap: closed.map(|c| (r_circ - c).abs()),
    };
    match to_json_string(&summary) {
        Ok(json) => {
            print!("{json}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_NO_CONVERGENCE
        }
    }
}

pub fn cmd_energy(spec: &ProblemSpec) -> u8 {
    let problem = match spec.build() {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    match solve_bvp(&problem) {
        Ok(BvpOutcome::Solved(outcome)) => {
            let energy = match total_energy(&problem, &outcome.profile) {
                Ok(e) => e,
                Err(e) => return fail(&e),
            };
            let summary = EnergySummary {
                lambda: outcome.lambda,
                regime: outcome.profile.regime().as_str().to_string(),
                energy: EnergyJson::from(&energy),
            };
            match to_json_string(&summary) {
                Ok(json) => {
                    print!("{json}");
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_NO_CONVERGENCE
                }
            }
        }
        Ok(BvpOutcome::NoSolution { r_circ }) => {
            let summary = NoSolutionSummary { no_solution: true, r_circ };
            if let Ok(json) = to_json_string(&summary) {
                print!("{json}");
            }
            EXIT_NO_SOLUTION
        }
        Err(e) => fail(&e),
    }
}

fn sweep_rows_csv<W: Write>(rows: &[SweepRow], out: W) -> std::io::Result<()> {
    let mut csv = CsvWriter::new(out);
    csv.header(&["kappa", "R", "r_circ", "status"])?;
    for row in rows {
        let (value, status) = match (&row.r_circ, &row.error) {
            (Some(v), _) => (fmt_f64(*v), "ok".to_string()),
            (None, Some(e)) => (String::new(), e.replace(',', ";")),
            (None, None) => (String::new(), "unknown".to_string()),
        };
        csv.row(&[fmt_f64(row.kappa), fmt_f64(row.r_outer), value, status])?;
    }
    csv.flush()
}

pub fn cmd_sweep(kappas: &[f64], r_values: &[f64], config: SolverConfig, out: Option<&Path>) -> u8 {
    if kappas.is_empty() || r_values.is_empty() {
        eprintln!("error: sweep needs a non-empty kappa list and R range");
        return EXIT_INPUT;
    }
    if kappas.iter().any(|&k| !(k > 0.0)) {
        eprintln!("error: sweep kappas must be positive");
        return EXIT_INPUT;
    }
    let mut kappas = kappas.to_vec();
    kappas.sort_by(f64::total_cmp);
    let mut r_values = r_values.to_vec();
    r_values.sort_by(f64::total_cmp);
    let rows = annuli::solver::rcirc_sweep(&kappas, &r_values, &config);
    let ok_rows = rows.iter().filter(|r| r.r_circ.is_some()).count();
    let result = match out {
        Some(path) => File::create(path).and_then(|f| sweep_rows_csv(&rows, BufWriter::new(f))),
        None => {
            let stdout = std::io::stdout();
            sweep_rows_csv(&rows, stdout.lock())
        }
    };
    if let Err(e) = result {
        eprintln!("error: cannot write sweep CSV: {e}");
        return EXIT_NO_CONVERGENCE;
    }
    if ok_rows > 0 {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    }
}

pub fn cmd_verify(suite: Option<&str>, inject_rhs_sign_flip: bool) -> u8 {
    if let Some(name) = suite {
        if !verify::SUITES.contains(&name) {
            eprintln!("error: unknown suite {name:?}; available: {}", verify::SUITES.join(", "));
            return EXIT_INPUT;
        }
    }
    let injection = if inject_rhs_sign_flip { Injection::FlipElRhsSign } else { Injection::None };
    let report = verify::run(suite, injection);
    let json = VerifyJson {
        passed: report.passed(),
        checks: report
            .checks
            .iter()
            .map(|c| CheckJson {
                suite: c.suite.to_string(),
                name: c.name.clone(),
                passed: c.passed,
                measured: c.measured,
                tolerance: c.tolerance,
                detail: c.detail.clone(),
            })
            .collect(),
    };
    match to_json_string(&json) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NO_CONVERGENCE;
        }
    }
    if json.passed {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

/// Parse a comma-separated float list.
pub fn parse_float_list(text: &str) -> Result<Vec<f64>, String> {
    if text.trim().is_empty() {
        return Err("empty list".into());
    }
    text.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("cannot parse number {p:?}")))
        .collect()
}

/// Parse an inclusive range spec `start:stop:step`.
pub fn parse_range(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("range must look like start:stop:step, got {text:?}"));
    }
    let nums: Result<Vec<f64>, String> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("cannot parse number {p:?}")))
        .collect();
    let nums = nums?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || stop < start {
        return Err(format!("range needs step > 0 and stop >= start, got {text:?}"));
    }
    let mut values = Vec::new();
    let mut i = 0u32;
    loop {
        let v = start + step * i as f64;
        if v > stop + 1e-9 * step.max(1.0) {
            break;
        }
        values.push(v);
        i += 1;
    }
    Ok(values)
}
