//! `annuli` — minimal-energy radial deformations between concentric annuli.
//!
//! Subcommands: `solve` (boundary-value solve), `rcirc` (critical outer
//! radius), `energy` (energy of the solved profile), `sweep` (critical
//! radius over a κ × R grid, CSV), `verify` (cross-module invariant suite).

// precondition guards are written as `!(x > 0.0)` so NaN inputs fail them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use annuli::solver::SolverConfig;
use commands::{parse_float_list, parse_range, ProblemSpec, EXIT_INPUT};

#[derive(Parser, Debug)]
#[command(name = "annuli", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ToleranceArgs {
    /// Relative integration tolerance.
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Absolute integration tolerance.
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    /// Largest integrator step in radius units.
    #[arg(long, default_value_t = 0.01)]
    max_step: f64,
    /// Tolerance on |H(R) - R*| for the boundary-value solve.
    #[arg(long, default_value_t = 1e-9)]
    root_tol: f64,
}

impl ToleranceArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            root_tol: self.root_tol,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
struct ProblemArgs {
    /// Space dimension (>= 2).
    #[arg(long)]
    n: u32,
    /// Outer radius of the reference annulus (> 1; inner radius is 1).
    #[arg(long = "R")]
    r_outer: f64,
    /// Outer radius of the target annulus (> 1).
    #[arg(long = "Rstar")]
    r_star: Option<f64>,
    /// Stored energy: `quad:a=<r>,b=<r>,kappa=<r>` or `poly:c0,c1,c2,...`.
    #[arg(long)]
    phi: String,
    #[command(flatten)]
    tolerances: ToleranceArgs,
}

impl ProblemArgs {
    fn spec(&self) -> ProblemSpec {
        ProblemSpec {
            n: self.n,
            r_outer: self.r_outer,
            r_star: self.r_star,
            phi_spec: self.phi.clone(),
            config: self.tolerances.config(),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the boundary-value problem H(1) = 1, H(R) = R*.
    ///
    /// Prints a JSON summary; exits 2 with a no-solution report when R* is
    /// below the critical radius.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Write the solved profile as CSV (t, H, Hdot, mu, J, density).
        #[arg(long)]
        profile_out: Option<PathBuf>,
        /// Number of profile CSV sample nodes.
        #[arg(long, default_value_t = 513)]
        profile_nodes: usize,
    },
    /// Critical outer radius R∘ below which no diffeomorphic minimizer exists.
    Rcirc {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Energy breakdown of the solved profile.
    Energy {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Critical radius over a kappa × R grid (planar quadratic material), CSV.
    Sweep {
        /// Comma-separated kappa values, e.g. `0.125,0.5,2`.
        #[arg(long)]
        kappas: String,
        /// Inclusive R range as `start:stop:step`, e.g. `1.1:5:0.1`.
        #[arg(long)]
        r_range: String,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tolerances: ToleranceArgs,
    },
    /// Run the cross-module verification suites and print a JSON report.
    Verify {
        /// Run a single suite: quadratic, residual, comparison, energy, shooting.
        #[arg(long)]
        suite: Option<String>,
        /// Negative-control hook: integrate with a sign-flipped right-hand
        /// side; the verification must fail.
        #[arg(long, hide = true)]
        inject_rhs_sign_flip: bool,
    },
}

fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::Solve { problem, profile_out, profile_nodes } => {
            if profile_nodes < 2 {
                eprintln!("error: --profile-nodes must be >= 2");
                return EXIT_INPUT;
            }
            commands::cmd_solve(&problem.spec(), profile_out.as_deref(), profile_nodes)
        }
        Command::Rcirc { problem } => commands::cmd_rcirc(&problem.spec()),
        Command::Energy { problem } => commands::cmd_energy(&problem.spec()),
        Command::Sweep { kappas, r_range, out, tolerances } => {
            let kappas = match parse_float_list(&kappas) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: bad --kappas: {e}");
                    return EXIT_INPUT;
                }
            };
            let r_values = match parse_range(&r_range) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: bad --r-range: {e}");
                    return EXIT_INPUT;
                }
            };
            commands::cmd_sweep(&kappas, &r_values, tolerances.config(), out.as_deref())
        }
        Command::Verify { suite, inject_rhs_sign_flip } => {
            commands::cmd_verify(suite.as_deref(), inject_rhs_sign_flip)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_INPUT,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(run(cli))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::fmt_f64;

    impl ToleranceArgs {
        fn canonical(&self, out: &mut Vec<String>) {
            for (flag, value) in [
                ("--rel-tol", self.rel_tol),
                ("--abs-tol", self.abs_tol),
                ("--max-step", self.max_step),
                ("--root-tol", self.root_tol),
            ] {
                out.push(flag.into());
                out.push(fmt_f64(value));
            }
        }
    }

    impl ProblemArgs {
        fn canonical(&self, out: &mut Vec<String>) {
            out.push("--n".into());
            out.push(self.n.to_string());
            out.push("--R".into());
            out.push(fmt_f64(self.r_outer));
            if let Some(rs) = self.r_star {
                out.push("--Rstar".into());
                out.push(fmt_f64(rs));
            }
            out.push("--phi".into());
            out.push(self.phi.clone());
            self.tolerances.canonical(out);
        }
    }

    /// Canonical command line for a parsed request: fixed flag order,
    /// round-trip-safe float rendering.
    fn canonical_args(cli: &Cli) -> Vec<String> {
        let mut out = vec!["annuli".to_string()];
        match &cli.command {
            Command::Solve { problem, profile_out, profile_nodes } => {
                out.push("solve".into());
                problem.canonical(&mut out);
                if let Some(path) = profile_out {
                    out.push("--profile-out".into());
                    out.push(path.display().to_string());
                }
                out.push("--profile-nodes".into());
                out.push(profile_nodes.to_string());
            }
            Command::Rcirc { problem } => {
                out.push("rcirc".into());
                problem.canonical(&mut out);
            }
            Command::Energy { problem } => {
                out.push("energy".into());
                problem.canonical(&mut out);
            }
            Command::Sweep { kappas, r_range, out: path, tolerances } => {
                out.push("sweep".into());
                out.push("--kappas".into());
                out.push(kappas.clone());
                out.push("--r-range".into());
                out.push(r_range.clone());
                if let Some(p) = path {
                    out.push("--out".into());
                    out.push(p.display().to_string());
                }
                tolerances.canonical(&mut out);
            }
            Command::Verify { suite, inject_rhs_sign_flip } => {
                out.push("verify".into());
                if let Some(s) = suite {
                    out.push("--suite".into());
                    out.push(s.clone());
                }
                if *inject_rhs_sign_flip {
                    out.push("--inject-rhs-sign-flip".into());
                }
            }
        }
        out
    }

    #[test]
    fn request_parse_canonicalize_round_trip() {
        let inputs: Vec<Vec<&str>> = vec![
            vec!["annuli", "solve", "--n", "2", "--R", "2", "--Rstar", "3", "--phi", "quad:a=0,b=0,kappa=1"],
            vec!["annuli", "rcirc", "--n", "3", "--R", "2.5", "--phi", "poly:0.5,0.1,1", "--rel-tol", "1e-9"],
            vec!["annuli", "energy", "--n", "2", "--R", "2", "--Rstar", "1.5", "--phi", "quad:a=1,b=0,kappa=0.5"],
            vec!["annuli", "sweep", "--kappas", "0.125,0.5,2", "--r-range", "1.1:5:0.1", "--out", "rows.csv"],
            vec!["annuli", "verify", "--suite", "quadratic"],
        ];
        for args in inputs {
            let parsed = Cli::try_parse_from(&args).expect("parse");
            let canonical = canonical_args(&parsed);
            let reparsed = Cli::try_parse_from(&canonical).expect("reparse canonical form");
            assert_eq!(
                format!("{:?}", parsed.command),
                format!("{:?}", reparsed.command),
                "canonical form changed the request: {canonical:?}"
            );
            // canonicalization is idempotent
            assert_eq!(canonical, canonical_args(&reparsed));
        }
    }
}
