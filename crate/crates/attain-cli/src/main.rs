//! Command-line driver: seeded instance generation, certified pipeline
//! runs with trace export, standalone certificate-suite checks, and
//! parameter sweeps.
//!
//! Exit codes: 0 on success, 1 when a certificate fails or a run stays
//! partial, 2 on input errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use attain::{
    classify_case, closed_form_attainment, dual_sup_bruteforce, gen_instance, lift, reduce,
    report_text, run, sweep, sweep_csv, variation_identity_check, verify_trace, weighted_variation,
    Error, InstanceFile, IterationConfig, MeasureField, PhaseMode, ReductionParams, RunRecord,
    SweepOptions, SweepStatus, WeightFunction,
};

#[derive(Parser)]
#[command(
    name = "attain",
    about = "Certified approximation of measure-field operators by norm-attaining ones",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum ModeArg {
    #[default]
    Exact,
    Faithful,
}

impl From<ModeArg> for PhaseMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Exact => PhaseMode::Exact,
            ModeArg::Faithful => PhaseMode::Faithful,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random instance file.
    Gen(GenArgs),
    /// Run the full pipeline on an instance and certify the result.
    Run(RunArgs),
    /// Check one certificate suite on an instance.
    Check(CheckArgs),
    /// Run the pipeline over a parameter grid and aggregate the results.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of points in the domain set.
    k_size: usize,
    /// Number of points in the codomain set.
    s_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Field norm of the generated instance.
    #[arg(long, default_value_t = 1.0)]
    norm_scale: f64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    instance: PathBuf,
    /// Target distance to the returned norm-attaining field.
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
    /// Contraction ratio of the defect schedule, in (1/2, 1).
    #[arg(long, default_value_t = 0.81)]
    r: f64,
    #[arg(long, value_enum, default_value_t)]
    mode: ModeArg,
    /// Arc count for the faithful-mode lift partition.
    #[arg(long)]
    arcs: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    defect_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Override the derived starting tolerance.
    #[arg(long)]
    epsilon0: Option<f64>,
    /// Write the per-step trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the certificate summary here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    /// Which certificate suite to run: 1 (measure identities),
    /// 2 (phase lift), 3 (defect reduction).
    #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
    suite: u8,
    /// Tolerance: delta for the lift, epsilon for the reduction.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0.81)]
    r: f64,
    #[arg(long, value_enum, default_value_t)]
    mode: ModeArg,
    #[arg(long)]
    arcs: Option<usize>,
    /// Phase-grid resolution for the brute-force dual oracle.
    #[arg(long, default_value_t = 720)]
    grid: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    /// Instance sizes as KxS pairs, e.g. 4x3,8x8.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    rhos: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.81")]
    rs: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    norm_scale: f64,
    #[arg(long, value_enum, default_value_t)]
    mode: ModeArg,
    /// Output path for the aggregate CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::CertificateFailed { .. }
        | Error::HypothesisViolated { .. }
        | Error::CasePrecondition { .. }
        | Error::StepFailed { .. } => 1,
        _ => 2,
    }
}

/// Writes to stdout, ignoring broken pipes so `attain ... | head` stays
/// quiet.
fn emit(text: &str) {
    use std::io::Write;
    let _ = write!(std::io::stdout(), "{text}");
}

fn emit_line(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn write_or_print(path: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            emit(text);
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<MeasureField, Error> {
    InstanceFile::read_from(path)?.to_field()
}

fn cmd_gen(args: &GenArgs) -> Result<(), Error> {
    let instance = gen_instance(args.seed, args.k_size, args.s_size, args.norm_scale)?;
    write_or_print(&args.out, &instance.to_json()?)
}

fn cmd_run(args: &RunArgs) -> Result<bool, Error> {
    let instance = InstanceFile::read_from(&args.instance)?;
    let seed = instance.meta.as_ref().and_then(|m| m.seed);
    let field = instance.to_field()?;
    let mut config = IterationConfig::new(args.rho);
    config.r = args.r;
    config.mode = args.mode.into();
    config.arcs = args.arcs;
    config.defect_tol = args.defect_tol;
    config.max_iter = args.max_iter;
    config.epsilon0 = args.epsilon0;
    let output = run(&field, &config)?;
    let record = RunRecord { seed, output };
    if let Some(trace_path) = &args.trace {
        std::fs::write(trace_path, record.trace_csv())?;
    }
    let report = verify_trace(
        &record.output.trace,
        record.output.certificate.nu0_norm,
        record.output.certificate.rho,
    );
    let mut summary = record.summary();
    summary.push_str("offline trace verification\n");
    summary.push_str(&report_text(&report));
    emit(&summary);
    if let Some(out) = &args.out {
        std::fs::write(out, &summary)?;
    }
    Ok(record.passed() && report.pass)
}

fn print_line(label: &str, lhs: f64, rhs: f64, pass: bool) {
    emit_line(&format!(
        "  {label}: lhs={lhs} rhs={rhs} slack={:e} {}",
        rhs - lhs,
        if pass { "PASS" } else { "FAIL" }
    ));
}

fn check_measure_identities(field: &MeasureField, grid: usize) -> Result<bool, Error> {
    emit_line(&format!("measure identity checks (grid = {grid})"));
    let mut all_pass = true;
    for (s, row) in field.rows().iter().enumerate() {
        let tv = row.total_variation();
        let ones = WeightFunction::constant(1.0, row.k_size())?;
        let sup = dual_sup_bruteforce(&ones, row, grid)?;
        let gap = tv - sup;
        let gap_bound = tv * (1.0 - (std::f64::consts::PI / grid as f64).cos());
        let pass = gap >= -1e-12 && gap <= gap_bound + 1e-12;
        print_line(
            &format!("row {s}: dual-sup gap within grid bound"),
            gap,
            gap_bound,
            pass,
        );
        all_pass &= pass;

        let attained = closed_form_attainment(&ones, row)?;
        let pass = (attained - tv).abs() <= 1e-12 * tv.max(1.0);
        print_line(
            &format!("row {s}: closed-form attainment"),
            attained,
            tv,
            pass,
        );
        all_pass &= pass;

        let ramp = WeightFunction::new(
            (0..row.k_size())
                .map(|t| 0.5 + t as f64 / (2.0 * row.k_size() as f64))
                .collect(),
        )?;
        let report = variation_identity_check(&ramp, row)?;
        print_line(
            &format!("row {s}: weighted variation identity"),
            report.lhs,
            report.rhs,
            report.holds,
        );
        all_pass &= report.holds;

        let wv = weighted_variation(&ramp, row)?;
        let sup_ramp = dual_sup_bruteforce(&ramp, row, grid)?;
        let pass = sup_ramp <= wv + 1e-12;
        print_line(
            &format!("row {s}: dual-sup below weighted variation"),
            sup_ramp,
            wv,
            pass,
        );
        all_pass &= pass;
    }
    Ok(all_pass)
}

fn check_lift(
    field: &MeasureField,
    delta: f64,
    mode: PhaseMode,
    arcs: Option<usize>,
) -> Result<bool, Error> {
    emit_line(&format!(
        "phase-lift check (delta = {delta}, mode = {mode})"
    ));
    let lifted = lift(field, delta, mode, arcs)?;
    let unimodular_dev = lifted
        .h
        .values()
        .iter()
        .map(|v| (v.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    print_line(
        "witness unimodular",
        unimodular_dev,
        1e-12,
        unimodular_dev <= 1e-12,
    );
    emit_line(&format!(
        "  peak row {} of {}; witness set has {} rows",
        lifted.peak,
        field.s_size(),
        lifted.witness_set.len()
    ));
    let min_slack = lifted.slack.iter().copied().fold(f64::INFINITY, f64::min);
    print_line(
        "witness set nonempty with positive slack",
        0.0,
        min_slack,
        !lifted.witness_set.is_empty() && min_slack > 0.0,
    );
    if let Some(q) = &lifted.quantization {
        emit_line(&format!(
            "  quantization: {} arcs, diameter {}, l1 error {} < bound {}, residual mass {}",
            q.arc_count, q.arc_diameter, q.l1_error, q.l1_bound, q.residual_mass
        ));
    }
    for cert in &lifted.certificates {
        emit_line(&format!("  check {cert}"));
    }
    Ok(!lifted.witness_set.is_empty() && min_slack > 0.0 && unimodular_dev <= 1e-12)
}

fn check_reduction(
    field: &MeasureField,
    eps: f64,
    r: f64,
    mode: PhaseMode,
    arcs: Option<usize>,
) -> Result<bool, Error> {
    emit_line(&format!(
        "defect-reduction check (epsilon = {eps}, r = {r}, mode = {mode})"
    ));
    if field.field_norm() == 0.0 {
        let u: Vec<usize> = (0..field.s_size()).collect();
        let params = ReductionParams::new(r, eps)?;
        let outcome = reduce(field, &u, &params)?;
        emit_line("  zero field: trivial branch, field unchanged");
        print_line(
            "perturbation",
            outcome.perturbation,
            0.0,
            outcome.perturbation == 0.0,
        );
        return Ok(outcome.perturbation == 0.0);
    }
    // lift first so the hypothesis holds on the witness set
    let lifted = lift(field, eps, PhaseMode::Exact, None)?;
    let nu = field.scale_rows(lifted.h.values())?;
    let norm = nu.field_norm();
    let u: Vec<usize> = (0..nu.s_size())
        .filter(|&s| nu.row(s).total_mass().re - (norm - eps) >= 1e-12)
        .collect();
    let params = ReductionParams::new(r, eps)?
        .with_mode(mode)
        .with_arcs(arcs);
    let case = classify_case(&nu, &u, norm, &params)?;
    emit_line(&format!("  case: {case}"));
    let outcome = reduce(&nu, &u, &params)?;
    for cert in &outcome.certificates {
        emit_line(&format!("  check {cert}"));
    }
    print_line(
        "perturbation within bound",
        outcome.perturbation,
        outcome.bound,
        outcome.perturbation <= outcome.bound + 1e-12,
    );
    emit_line(&format!(
        "  surviving rows: {} of {} (case {})",
        outcome.surviving.len(),
        u.len(),
        outcome.case
    ));
    Ok(outcome.case == case && !outcome.surviving.is_empty())
}

fn cmd_check(args: &CheckArgs) -> Result<bool, Error> {
    let field = load_instance(&args.instance)?;
    match args.suite {
        1 => check_measure_identities(&field, args.grid),
        2 => check_lift(&field, args.delta, args.mode.into(), args.arcs),
        3 => check_reduction(&field, args.delta, args.r, args.mode.into(), args.arcs),
        _ => unreachable!("clap restricts the suite to 1..=3"),
    }
}

fn parse_sizes(raw: &[String]) -> Result<Vec<(usize, usize)>, Error> {
    raw.iter()
        .map(|s| {
            let (k, sz) = s.split_once('x').ok_or_else(|| {
                Error::InvalidInstance(format!("size '{s}' must look like KxS, e.g. 4x3"))
            })?;
            let k = k
                .parse::<usize>()
                .map_err(|_| Error::InvalidInstance(format!("bad domain size in '{s}'")))?;
            let sz = sz
                .parse::<usize>()
                .map_err(|_| Error::InvalidInstance(format!("bad codomain size in '{s}'")))?;
            Ok((k, sz))
        })
        .collect()
}

fn cmd_sweep(args: &SweepArgs) -> Result<bool, Error> {
    let sizes = parse_sizes(&args.sizes)?;
    let points = attain::expand_grid(&args.seeds, &sizes, &args.rhos, &args.rs);
    let opts = SweepOptions {
        norm_scale: args.norm_scale,
        mode: args.mode.into(),
        ..SweepOptions::default()
    };
    let rows = sweep(&points, &opts);
    let mode_text = format!("{}", opts.mode);
    write_or_print(&args.out, &sweep_csv(&rows, opts.norm_scale, &mode_text))?;
    Ok(rows.iter().all(|row| row.status == SweepStatus::Pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(args) => cmd_gen(args).map(|_| true),
        Command::Run(args) => cmd_run(args),
        Command::Check(args) => cmd_check(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
