//! Command-line front end: every library computation behind a
//! subcommand, with machine-readable (JSON or CSV) output.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure,
//! 3 unphysical input.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hoepr::criteria::{self, CriterionId};
use hoepr::gaussian;
use hoepr::spectral::{
    build_bipartite_matrix, min_bipartite_eigenpair, min_eigenvalue_for_order,
    verify_scaling_identity, Sign,
};
use hoepr::states::StateSpec;
use hoepr::wavefunc::{derivatives_at_zero, fit_bessel_gauss, HermiteSeries};
use hoepr::Error;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "hoepr", version, about = "Higher-order quadrature bounds and entanglement criteria")]
struct Cli {
    /// Worker-thread cap (also honored via HOEPR_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Sign {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    /// √(1−λ²) Σ λᵏ |k,k⟩ (two-mode squeezed vacuum).
    SqueezedVacuum,
    /// The n-th-power entangled family ψ⁽ⁿ⁾_ξ.
    PsiN,
    /// The alternative second-power family ψ′⁽²⁾_ξ.
    Psi2Prime,
    /// |0,0⟩ (bound-saturating sanity state).
    Vacuum,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    /// ⟨(x_a ± x_b)^{2n} + (p_a ∓ p_b)^{2n}⟩ against Λ^{(2n)}.
    Duan,
    /// ⟨(â†ⁿ ± b̂ⁿ)(âⁿ ± b̂†ⁿ)⟩ against n!.
    Power,
    /// Centered fourth-order combination against 2.
    Dbs,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal eigenvalue λ^{(2n)} of the truncated x^{2n} + p^{2n} matrix.
    Lambda {
        #[arg(long, default_value_t = 4)]
        order: u32,
        #[arg(long, default_value_t = 2000)]
        trunc: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Bipartite minimal eigenvalue Λ^{(2n)} and the 2ⁿ-scaling check.
    Bipartite {
        #[arg(long, default_value_t = 4)]
        order: u32,
        #[arg(long, value_enum, default_value_t = SignArg::Plus)]
        sign: SignArg,
        #[arg(long, default_value_t = 40)]
        trunc: usize,
        /// Relative tolerance for the scaling identity.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Minimizing wave function on a grid (CSV), with derivatives at zero.
    Wavefunction {
        #[arg(long, default_value_t = 4)]
        order: u32,
        #[arg(long, default_value_t = 300)]
        trunc: usize,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
        #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
        grid_min: f64,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        grid_max: f64,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        /// Highest derivative order reported at x = 0.
        #[arg(long, default_value_t = 10)]
        derivs: usize,
    },
    /// Bessel–Gauss approximant parameters for the minimizer.
    Fit {
        #[arg(long, default_value_t = 4)]
        order: u32,
        #[arg(long, default_value_t = 300)]
        trunc: usize,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
    },
    /// Evaluate an entanglement criterion on an analytic state family.
    State {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Squeezing parameter λ (squeezed-vacuum family).
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        /// Family power n (psi-n family).
        #[arg(long)]
        n: Option<u32>,
        /// Family parameter ξ (psi-n and psi2-prime families).
        #[arg(long, allow_negative_numbers = true)]
        xi: Option<f64>,
        #[arg(long, value_enum)]
        criterion: CriterionArg,
        /// Moment order 2n for duan, power n for power; ignored by dbs.
        #[arg(long)]
        order: Option<u32>,
        #[arg(long, value_enum, default_value_t = SignArg::Plus)]
        sign: SignArg,
        /// Evaluate both signs and report the smaller value.
        #[arg(long, default_value_t = false)]
        best_sign: bool,
        /// Per-mode Fock truncation (auto-selected when omitted).
        #[arg(long)]
        trunc: Option<usize>,
    },
    /// Random physical covariance scan against the fourth-order bound.
    GaussianScan {
        #[arg(long, default_value_t = 10000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Serialize)]
struct LambdaOutput {
    schema: u32,
    command: &'static str,
    order: u32,
    truncation: usize,
    tol: f64,
    lambda: f64,
    residual: f64,
    converged: bool,
    solver: hoepr::spectral::Solver,
}

#[derive(Serialize)]
struct BipartiteOutput {
    schema: u32,
    command: &'static str,
    order: u32,
    sign: Sign,
    truncation: usize,
    tol: f64,
    capital_lambda: f64,
    residual: f64,
    scaling: hoepr::spectral::ScalingCheck,
}

#[derive(Serialize)]
struct FitOutput {
    schema: u32,
    command: &'static str,
    order: u32,
    truncation: usize,
    tol: f64,
    lambda: f64,
    #[serde(flatten)]
    fit: hoepr::wavefunc::BesselGaussFit,
}

#[derive(Serialize)]
struct StateOutput {
    schema: u32,
    command: &'static str,
    family: String,
    parameters: serde_json::Value,
    #[serde(flatten)]
    report: criteria::CriterionReport,
}

#[derive(Serialize)]
struct ScanOutput {
    schema: u32,
    command: &'static str,
    #[serde(flatten)]
    report: gaussian::ScanReport,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::InvalidInput(_) => 1,
                Error::Unphysical { .. } => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), String> {
    let from_env = match std::env::var("HOEPR_THREADS") {
        Ok(s) => Some(
            s.parse::<usize>()
                .map_err(|_| format!("HOEPR_THREADS must be a positive integer, got {s:?}"))?,
        ),
        Err(_) => None,
    };
    if let Some(n) = flag.or(from_env) {
        if n == 0 {
            return Err("thread cap must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn emit_json<T: Serialize>(value: &T) -> Result<(), Error> {
    // serde_json refuses non-finite floats, so this doubles as the
    // no-NaN output guarantee
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::OptimizerFailure(format!("output serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Lambda { order, trunc, tol } => {
            let result = min_eigenvalue_for_order(order, trunc, tol)?;
            emit_json(&LambdaOutput {
                schema: SCHEMA_VERSION,
                command: "lambda",
                order,
                truncation: trunc,
                tol,
                lambda: result.eigenvalue,
                residual: result.residual_norm,
                converged: true,
                solver: result.solver,
            })
        }
        Command::Bipartite {
            order,
            sign,
            trunc,
            tol,
        } => {
            let sign = Sign::from(sign);
            let matrix = build_bipartite_matrix(order, sign, trunc)?;
            let (capital_lambda, _, residual) = min_bipartite_eigenpair(&matrix, 1e-10)?;
            let scaling = verify_scaling_identity(order, trunc, tol)?;
            emit_json(&BipartiteOutput {
                schema: SCHEMA_VERSION,
                command: "bipartite",
                order,
                sign,
                truncation: trunc,
                tol,
                capital_lambda,
                residual,
                scaling,
            })
        }
        Command::Wavefunction {
            order,
            trunc,
            tol,
            grid_min,
            grid_max,
            grid_step,
            derivs,
        } => {
            if !(grid_step > 0.0 && grid_max > grid_min) {
                return Err(Error::InvalidInput(
                    "grid requires step > 0 and max > min".into(),
                ));
            }
            let result = min_eigenvalue_for_order(order, trunc, tol)?;
            let series = HermiteSeries::from_fock(&result.vector);
            let derivatives = derivatives_at_zero(&result.vector, derivs);

            // residual of x^{2n}ψ + (−1)ⁿ ψ^{(2n)} − λψ on the grid
            let n = order / 2;
            let mut high = series.clone();
            for _ in 0..order {
                high = high.derivative();
            }
            let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
            let steps = ((grid_max - grid_min) / grid_step).round() as usize;
            let mut rows = Vec::with_capacity(steps + 1);
            let mut max_residual = 0.0f64;
            for i in 0..=steps {
                let x = grid_min + grid_step * i as f64;
                let psi = series.eval(x);
                let residual =
                    x.powi(order as i32) * psi + parity * high.eval(x) - result.eigenvalue * psi;
                max_residual = max_residual.max(residual.abs());
                rows.push((x, psi));
            }

            println!("# command=wavefunction order={order} truncation={trunc} tol={tol:e}");
            println!("# grid_min={grid_min} grid_max={grid_max} grid_step={grid_step}");
            println!("# lambda={:.12} residual={:.3e}", result.eigenvalue, result.residual_norm);
            for (k, d) in derivatives.iter().enumerate() {
                if !d.is_finite() {
                    return Err(Error::OptimizerFailure(format!(
                        "non-finite derivative at order {k}"
                    )));
                }
                println!("# derivative_at_zero[{k}]={d:.12}");
            }
            println!("# max_ode_residual={max_residual:.6e}");
            println!("x,psi");
            for (x, psi) in rows {
                if !psi.is_finite() {
                    return Err(Error::OptimizerFailure(format!(
                        "non-finite wave-function value at x={x}"
                    )));
                }
                println!("{x:.6},{psi:.12e}");
            }
            Ok(())
        }
        Command::Fit { order, trunc, tol } => {
            let result = min_eigenvalue_for_order(order, trunc, tol)?;
            let fit = fit_bessel_gauss(&result.vector)?;
            emit_json(&FitOutput {
                schema: SCHEMA_VERSION,
                command: "fit",
                order,
                truncation: trunc,
                tol,
                lambda: result.eigenvalue,
                fit,
            })
        }
        Command::State {
            family,
            lambda,
            n,
            xi,
            criterion,
            order,
            sign,
            best_sign,
            trunc,
        } => {
            let (spec, family_name, parameters) = build_state(family, lambda, n, xi)?;
            let sign = Sign::from(sign);
            let make_id = |sign: Sign| -> Result<CriterionId, Error> {
                Ok(match criterion {
                    CriterionArg::Duan => CriterionId::DuanHigher {
                        order: order.unwrap_or(4),
                        sign,
                    },
                    CriterionArg::Power => CriterionId::Power {
                        n: order.unwrap_or(2),
                        sign,
                    },
                    CriterionArg::Dbs => CriterionId::Dbs { sign },
                })
            };
            let report = if best_sign {
                let a = criteria::evaluate(&spec, make_id(Sign::Plus)?, trunc)?;
                let b = criteria::evaluate(&spec, make_id(Sign::Minus)?, trunc)?;
                if a.value <= b.value {
                    a
                } else {
                    b
                }
            } else {
                criteria::evaluate(&spec, make_id(sign)?, trunc)?
            };
            emit_json(&StateOutput {
                schema: SCHEMA_VERSION,
                command: "state",
                family: family_name,
                parameters,
                report,
            })
        }
        Command::GaussianScan { samples, seed } => {
            let report = gaussian::theorem3_scan(samples, seed)?;
            emit_json(&ScanOutput {
                schema: SCHEMA_VERSION,
                command: "gaussian-scan",
                report,
            })
        }
    }
}

fn build_state(
    family: FamilyArg,
    lambda: Option<f64>,
    n: Option<u32>,
    xi: Option<f64>,
) -> Result<(StateSpec, String, serde_json::Value), Error> {
    match family {
        FamilyArg::SqueezedVacuum => {
            let lambda = lambda.ok_or_else(|| {
                Error::InvalidInput("squeezed-vacuum requires --lambda".into())
            })?;
            let spec = StateSpec::SqueezedVacuum { lambda };
            spec.validate()?;
            Ok((
                spec,
                "squeezed_vacuum".into(),
                serde_json::json!({ "lambda": lambda }),
            ))
        }
        FamilyArg::PsiN => {
            let n = n.unwrap_or(2);
            let xi = xi.ok_or_else(|| Error::InvalidInput("psi-n requires --xi".into()))?;
            let spec = StateSpec::PsiN { n, xi };
            spec.validate()?;
            Ok((spec, "psi_n".into(), serde_json::json!({ "n": n, "xi": xi })))
        }
        FamilyArg::Psi2Prime => {
            let xi = xi.ok_or_else(|| Error::InvalidInput("psi2-prime requires --xi".into()))?;
            let spec = StateSpec::Psi2Prime { xi };
            spec.validate()?;
            Ok((spec, "psi2_prime".into(), serde_json::json!({ "xi": xi })))
        }
        FamilyArg::Vacuum => {
            let mut coefficients = vec![0.0; 4];
            coefficients[0] = 1.0;
            let spec = StateSpec::Explicit(hoepr::spectral::BipartiteFockVector::new(
                2,
                coefficients,
            )?);
            Ok((spec, "vacuum".into(), serde_json::json!({})))
        }
    }
}
