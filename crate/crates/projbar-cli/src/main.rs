//! Command-line front end for the barrier calculus: JSON problem
//! intake, path-following solves, sampling-based certification, and
//! CSV emission of approximation regions and step-size curves.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use projbar::duality::{dual_point, dual_value};
use projbar::geometry::classic_outer_radius;
use projbar::ipm::{analytic_center, optimal_lambda, solve, DecrementModel, SolveMethod};
use projbar::numfmt::g15;
use projbar::problem::{build_instance, parse_problem, Instance};
use projbar::verify::{
    estimate_gamma_report, fd_consistency, sample_interior, verify_lift_equivalence,
};
use projbar::{nu_from_gamma, Barrier, Error, EvalBundle};

const EXIT_IO: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;
const EXIT_VIOLATION: u8 = 4;
const EXIT_NOT_2D: u8 = 5;
const EXIT_OUTSIDE_BIJECTION: u8 = 6;

/// Interior points the derivative audit probes in `verify`.
const FD_PROBES: usize = 8;

#[derive(Parser)]
#[command(name = "projbar", version)]
#[command(about = "Barrier-based convex optimization over JSON problem files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the objective of a problem file over its domain.
    Solve(SolveArgs),
    /// Certify the declared barrier constant and derivatives by sampling.
    Verify(VerifyArgs),
    /// Emit per-ray radii of the nested approximation regions of a 2D set.
    Approx(ApproxArgs),
    /// Emit optimal step sizes and decrement bounds over a grid of constants.
    Curves(CurvesArgs),
    /// Map an interior point through the duality map and back.
    Dual(DualArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file (JSON).
    path: PathBuf,
    /// Path-following method.
    #[arg(long, value_enum, default_value_t = MethodArg::Affine)]
    method: MethodArg,
    /// Target duality-gap bound.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Write the per-iteration trace to this CSV file.
    #[arg(long, value_name = "OUT.CSV")]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Rescaled-barrier short steps with exact penalty updates.
    Affine,
    /// Fixed hyperbolic-distance steps on the local model.
    Projective,
}

#[derive(Args)]
struct VerifyArgs {
    /// Problem file (JSON).
    path: PathBuf,
    /// Number of sampled interior points per check.
    #[arg(long, default_value_t = 500)]
    samples: usize,
    /// Sampling seed; the PROJBAR_SEED environment variable overrides it.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Certify against this constant instead of the declared one.
    #[arg(long, value_name = "GAMMA")]
    declare_gamma: Option<f64>,
}

#[derive(Args)]
struct ApproxArgs {
    /// Problem file (JSON) with a two-dimensional domain.
    path: PathBuf,
    /// Anchor point "x,y"; defaults to the analytic center.
    #[arg(long, value_name = "X,Y", value_delimiter = ',', allow_hyphen_values = true)]
    center: Option<Vec<f64>>,
    /// Number of equally spaced sampling rays.
    #[arg(long, default_value_t = 64)]
    rays: usize,
}

#[derive(Args)]
struct CurvesArgs {
    /// Grid "a:b:n": n values of the projective constant from a to b.
    #[arg(long, value_name = "A:B:N")]
    gamma_grid: String,
}

#[derive(Args)]
struct DualArgs {
    /// Problem file (JSON).
    path: PathBuf,
    /// Interior point "x1,..,xn" to map.
    #[arg(
        long,
        value_name = "X1,..,XN",
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    point: Vec<f64>,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Approx(a) => cmd_approx(a),
        Command::Curves(a) => cmd_curves(a),
        Command::Dual(a) => cmd_dual(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Reads, parses, and validates a problem file. Parse errors carry the
/// line and column of the offending token.
fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
    let file = parse_problem(&text)
        .map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    build_instance(&file).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

/// Sampling seed: the PROJBAR_SEED environment variable wins over the
/// command-line flag when both are set.
fn effective_seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var("PROJBAR_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|e| fail(EXIT_PARSE, format!("PROJBAR_SEED {text:?}: {e}"))),
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(e) => Err(fail(EXIT_PARSE, format!("PROJBAR_SEED: {e}"))),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn join_g15(v: &DVector<f64>) -> String {
    v.iter().map(|&x| g15(x)).collect::<Vec<_>>().join(", ")
}

fn cmd_solve(args: &SolveArgs) -> CmdResult {
    if !(args.eps > 0.0) {
        return Err(fail(EXIT_PARSE, format!("--eps must be positive, got {}", args.eps)));
    }
    let inst = load_instance(&args.path)?;
    let method = match args.method {
        MethodArg::Affine => SolveMethod::Affine,
        MethodArg::Projective => SolveMethod::Projective,
    };
    let trace = solve(inst.set.as_ref(), &inst.objective, &inst.start, method, args.eps)
        .map_err(|e| fail(EXIT_NO_CONVERGENCE, format!("solver: {e}")))?;
    if let Some(out) = &args.trace {
        let mut csv = String::from("iter,obj,decrement,step_dist,tau_hat,gap\n");
        for rec in &trace.records {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                rec.iter,
                g15(rec.objective),
                g15(rec.decrement),
                g15(rec.step_distance),
                g15(rec.tau_estimate),
                g15(rec.gap_bound)
            ));
        }
        std::fs::write(out, csv)
            .map_err(|e| fail(EXIT_IO, format!("cannot write {}: {e}", out.display())))?;
    }
    println!("objective: {}", g15(trace.objective));
    println!("iterations: {}", trace.iterations);
    println!("gap bound: {}", g15(trace.gap_bound));
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let inst = load_instance(&args.path)?;
    let seed = effective_seed(args.seed)?;
    let declared = args.declare_gamma.unwrap_or(inst.set.params().gamma);

    let est = estimate_gamma_report(inst.set.as_ref(), &inst.start, args.samples, seed)
        .map_err(|e| fail(EXIT_IO, format!("sampling: {e}")))?;
    let gamma_ok = est.gamma_hat <= declared + 1e-6;

    let lift = verify_lift_equivalence(&inst.set, &inst.start, args.samples, seed)
        .map_err(|e| fail(EXIT_IO, format!("lift check: {e}")))?;

    let b: &dyn Barrier = inst.set.as_ref();
    let probes = sample_interior(inst.set.as_ref(), &inst.start, FD_PROBES, seed)
        .map_err(|e| fail(EXIT_IO, format!("sampling: {e}")))?;
    let mut fd_ok = true;
    let mut fd_worst = (0.0f64, inst.start.clone());
    for x in std::iter::once(&inst.start).chain(probes.iter()) {
        let rep = fd_consistency(b, x)
            .map_err(|e| fail(EXIT_IO, format!("derivative audit: {e}")))?;
        let err = rep.grad_err.max(rep.hess_err).max(rep.third_err);
        if err > fd_worst.0 {
            fd_worst = (err, x.clone());
        }
        fd_ok &= rep.pass;
    }

    println!("gamma_hat: {}", g15(est.gamma_hat));
    println!("declared gamma: {}", g15(declared));
    println!("cubic bound: {}", verdict(gamma_ok));
    println!(
        "lift equivalence: {} (cone ratio {}, base excess {})",
        verdict(lift.pass),
        g15(lift.cone_max_ratio),
        g15(lift.base_max_excess)
    );
    println!(
        "derivative consistency: {} (worst error {})",
        verdict(fd_ok),
        g15(fd_worst.0)
    );
    if gamma_ok && lift.pass && fd_ok {
        return Ok(());
    }
    if !gamma_ok {
        println!(
            "worst sample: point [{}], direction [{}], ratio {}",
            join_g15(&est.worst_point),
            join_g15(&est.worst_direction),
            g15(est.gamma_hat)
        );
    } else if !lift.pass {
        println!(
            "worst sample: point [{}], direction [{}], ratio {}",
            join_g15(&lift.worst_point),
            join_g15(&lift.worst_direction),
            g15(lift.cone_max_ratio)
        );
    } else {
        println!(
            "worst sample: point [{}], error {}",
            join_g15(&fd_worst.1),
            g15(fd_worst.0)
        );
    }
    Err(fail(EXIT_VIOLATION, "certification failed"))
}

/// Radii of the inner ellipsoid, inner region, and outer region along
/// `h` from the point evaluated in `e`, as `(r_EF, r_Ep, r_Gp)`.
///
/// Each region meets the ray where one scalar condition turns to
/// equality, so the radius is the reciprocal of the listed denominator,
/// or `inf` when the denominator is not positive. Working from the
/// evaluation bundle alone keeps flat directions (zero metric length)
/// representable instead of rejecting the whole domain.
fn ray_radii(e: &EvalBundle, nu: f64, h: &DVector<f64>) -> (f64, f64, f64) {
    let p0 = e.grad.dot(h);
    let s0 = (h.transpose() * &e.hess * h)[(0, 0)];
    let g0 = (s0 - p0 * p0).max(0.0).sqrt();
    let kappa = (nu - 1.0).sqrt();
    let recip = |denom: f64| if denom > 0.0 { 1.0 / denom } else { f64::INFINITY };
    (
        recip((nu * s0).sqrt()),
        recip(p0 + kappa * g0),
        recip(p0 + g0 / kappa),
    )
}

fn cmd_approx(args: &ApproxArgs) -> CmdResult {
    let inst = load_instance(&args.path)?;
    if inst.set.dim() != 2 {
        return Err(fail(
            EXIT_NOT_2D,
            format!(
                "approx needs a two-dimensional domain, got dimension {}",
                inst.set.dim()
            ),
        ));
    }
    if args.rays == 0 {
        return Err(fail(EXIT_PARSE, "--rays must be positive"));
    }
    let b: &dyn Barrier = inst.set.as_ref();
    let nu = inst.set.params().nu;

    // The outermost ball is anchored at the analytic center no matter
    // where the other regions are probed from, because its containment
    // guarantee holds only there. Domains without a center (unbounded
    // or flat ones) get an unbounded outer ball.
    let center_star = analytic_center(b, &inst.start).ok();
    let e_star = match &center_star {
        Some(star) => Some(b.eval(star).map_err(|e| fail(EXIT_IO, format!("{e}")))?),
        None => None,
    };

    let x0 = match &args.center {
        Some(coords) => {
            if coords.len() != 2 {
                return Err(fail(
                    EXIT_PARSE,
                    format!("--center needs 2 coordinates, got {}", coords.len()),
                ));
            }
            let x = DVector::from_column_slice(coords);
            b.eval(&x)
                .map_err(|_| fail(EXIT_PARSE, "--center point is not interior"))?;
            x
        }
        None => center_star.clone().ok_or_else(|| {
            fail(EXIT_PARSE, "domain has no analytic center; supply --center")
        })?,
    };
    let e0 = b.eval(&x0).map_err(|e| fail(EXIT_IO, format!("{e}")))?;

    let mut out = String::from("angle,r_EF,r_Ep,r_X,r_Gp,r_GF\n");
    for k in 0..args.rays {
        let angle = std::f64::consts::TAU * k as f64 / args.rays as f64;
        let h = DVector::from_column_slice(&[angle.cos(), angle.sin()]);
        let (r_ef, r_ep, r_gp) = ray_radii(&e0, nu, &h);
        let sigma = inst
            .set
            .sigma(&x0, &h)
            .map_err(|e| fail(EXIT_IO, format!("{e}")))?;
        let r_x = if sigma > 0.0 { 1.0 / sigma } else { f64::INFINITY };
        let r_gf = match &e_star {
            Some(e) => {
                let s0 = (h.transpose() * &e.hess * &h)[(0, 0)];
                if s0 > 0.0 {
                    classic_outer_radius(nu, s0)
                        .map_err(|e| fail(EXIT_IO, format!("{e}")))?
                } else {
                    f64::INFINITY
                }
            }
            None => f64::INFINITY,
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            g15(angle),
            g15(r_ef),
            g15(r_ep),
            g15(r_x),
            g15(r_gp),
            g15(r_gf)
        ));
    }
    print!("{out}");
    Ok(())
}

/// Parses a grid description "a:b:n" into n evenly spaced values.
fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = |why: &str| fail(EXIT_PARSE, format!("--gamma-grid {text:?}: {why}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected a:b:n"));
    }
    let a: f64 = parts[0].parse().map_err(|_| bad("start is not a number"))?;
    let b: f64 = parts[1].parse().map_err(|_| bad("end is not a number"))?;
    let n: usize = parts[2].parse().map_err(|_| bad("count is not an integer"))?;
    if !(a >= 0.0) || !(b >= a) || n == 0 {
        return Err(bad("need 0 <= a <= b and n >= 1"));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect())
}

fn cmd_curves(args: &CurvesArgs) -> CmdResult {
    let grid = parse_grid(&args.gamma_grid)?;
    let mut out = String::from("gamma,lambda_star,lambda_low,norm_lambda_star,norm_lambda_low\n");
    for &gamma in &grid {
        let (star, low) = optimal_lambda(DecrementModel::Projective(gamma))
            .map_err(|e| fail(EXIT_PARSE, format!("gamma {}: {e}", g15(gamma))))?;
        let scale = nu_from_gamma(gamma)
            .map_err(|e| fail(EXIT_PARSE, format!("gamma {}: {e}", g15(gamma))))?
            .sqrt();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            g15(gamma),
            g15(star),
            g15(low),
            g15(star * scale),
            g15(low * scale)
        ));
    }
    // Reference row: the affine model has no constant to normalize
    // away, so its optimal step and guaranteed decrement appear in both
    // column pairs.
    let (a_star, a_low) = optimal_lambda(DecrementModel::Affine)
        .map_err(|e| fail(EXIT_IO, format!("{e}")))?;
    out.push_str(&format!(
        "affine,{},{},{},{}\n",
        g15(a_star),
        g15(a_low),
        g15(a_star),
        g15(a_low)
    ));
    print!("{out}");
    Ok(())
}

fn cmd_dual(args: &DualArgs) -> CmdResult {
    let inst = load_instance(&args.path)?;
    if args.point.len() != inst.set.dim() {
        return Err(fail(
            EXIT_PARSE,
            format!(
                "--point has {} coordinates, domain has dimension {}",
                args.point.len(),
                inst.set.dim()
            ),
        ));
    }
    let b: &dyn Barrier = inst.set.as_ref();
    let x = DVector::from_column_slice(&args.point);
    let p = dual_point(b, &x).map_err(dual_failure)?;
    let f_star = dual_value(b, &p, &x).map_err(dual_failure)?;
    let residual = (&f_star.minimizer - &x).norm();
    println!("p: [{}]", join_g15(&p));
    println!("f_star: {}", g15(f_star.value));
    println!("round-trip residual: {}", g15(residual));
    Ok(())
}

fn dual_failure(e: Error) -> Failure {
    let code = match e {
        Error::OutsideBijection => EXIT_OUTSIDE_BIJECTION,
        Error::NotInterior => EXIT_PARSE,
        _ => EXIT_IO,
    };
    fail(code, format!("dual map: {e}"))
}
