//! Command-line front end: `attribute`, `compare`, `verify`, `kernels`.
//!
//! Exit codes: 0 success, 1 usage, 2 validation or parse failure,
//! 3 numerical failure (including failed invariants in `verify`).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{AfaError, ErrorClass, Result};
use crate::game::{grand_gap, CoalitionGame};
use crate::io::{load_dataset_csv, load_game_json, load_model_json};
use crate::kernels::KernelSpec;
use crate::model::{estimate_value_function, feature_means, Dataset, InstanceRef, PredictionModel};
use crate::oracle::{wls_oracle_constrained, wls_oracle_unconstrained};
use crate::reference::{es, fesp_raw, linear_model_attribution, ls_prenucleolus_oracle, shapley};
use crate::solver::{max_abs_diff, solve_constrained, solve_unconstrained, Attribution};
use crate::verify::{run_verify, VerifyConfig, DEFAULT_TOLERANCE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "afa", version, about = "Kernel-generated additive feature attributions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one attribution.
    Attribute(AttributeArgs),
    /// Compute several attributions side by side.
    Compare(CompareArgs),
    /// Run the invariant suites on seeded random games.
    Verify(VerifyArgs),
    /// Print kernel weight tables.
    Kernels(KernelsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    /// Closed-form solution.
    Closed,
    /// Dense least-squares solve.
    Oracle,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["game", "data"])))]
pub struct InputArgs {
    /// Game JSON file.
    #[arg(long, conflicts_with_all = ["data", "model"])]
    pub game: Option<PathBuf>,
    /// Background dataset CSV.
    #[arg(long, requires = "model")]
    pub data: Option<PathBuf>,
    /// Model JSON file.
    #[arg(long, requires = "data")]
    pub model: Option<PathBuf>,
    /// Row index (0-based) of the instance within the dataset.
    #[arg(long, conflicts_with = "instance_values")]
    pub instance: Option<usize>,
    /// Explicit instance values, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub instance_values: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value_t = SolveMethod::Closed)]
    pub method: SolveMethod,
    /// Drop the efficiency constraint.
    #[arg(long)]
    pub unconstrained: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Relative tolerance constant for efficiency reporting.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct AttributeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Kernel spec (shap, shap-orig, es, fesp:<w>, uniform, linear, exp, exp:<sigma>,
    /// concave, custom:<w1,...,wn>) or reference method (shapley, fesp-raw:<w>,
    /// lsprenucleolus, lm, ref:es).
    #[arg(long)]
    pub kernel: String,
    #[command(flatten)]
    pub solve: SolveArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated kernel specs or reference methods.
    #[arg(long)]
    pub kernels: String,
    #[command(flatten)]
    pub solve: SolveArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct KernelsArgs {
    #[arg(long)]
    pub n: usize,
    /// Comma-separated kernel specs.
    #[arg(long, default_value = "shap,es,uniform,linear,exp,concave")]
    pub kernels: String,
    /// Show weights divided by the total weight on sizes 1..n-1.
    #[arg(long)]
    pub normalized: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

/// Reference attributions computed without a kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceMethod {
    Shapley,
    Es,
    FespRaw(f64),
    LsPrenucleolus,
    LinearModel,
}

/// What one column of output is computed from.
#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    Kernel(KernelSpec),
    Reference(ReferenceMethod),
}

impl FromStr for Selector {
    type Err = AfaError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let reference = match s {
            "shapley" => Some(ReferenceMethod::Shapley),
            "ref:es" => Some(ReferenceMethod::Es),
            "lsprenucleolus" => Some(ReferenceMethod::LsPrenucleolus),
            "lm" => Some(ReferenceMethod::LinearModel),
            _ => match s.strip_prefix("fesp-raw:") {
                Some(w) => Some(ReferenceMethod::FespRaw(w.trim().parse().map_err(|_| {
                    AfaError::Validation(format!("invalid fesp-raw weight '{w}'"))
                })?)),
                None => None,
            },
        };
        match reference {
            Some(r) => Ok(Selector::Reference(r)),
            None => s.parse().map(Selector::Kernel),
        }
    }
}

/// Splits a comma-separated selector list, keeping the numeric arguments of
/// `custom:` specs attached to their head.
pub fn split_selectors(list: &str) -> Result<Vec<Selector>> {
    let mut items: Vec<String> = Vec::new();
    for part in list.split(',') {
        let continues = part.trim().parse::<f64>().is_ok()
            && items.last().is_some_and(|l| l.starts_with("custom:"));
        match items.last_mut() {
            Some(last) if continues => {
                last.push(',');
                last.push_str(part.trim());
            }
            _ => items.push(part.trim().to_string()),
        }
    }
    items.iter().filter(|s| !s.is_empty()).map(|s| s.parse()).collect()
}

struct Problem {
    game: CoalitionGame,
    names: Vec<String>,
    linear: Option<(f64, Vec<f64>, Vec<f64>, Vec<f64>)>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Afa(AfaError),
    Invariants(String),
}

impl From<AfaError> for CliError {
    fn from(e: AfaError) -> Self {
        CliError::Afa(e)
    }
}

fn load_problem(input: &InputArgs) -> std::result::Result<Problem, CliError> {
    if let Some(path) = &input.game {
        let game = load_game_json(path)?;
        let names = (1..=game.n()).map(|j| format!("x{j}")).collect();
        return Ok(Problem { game, names, linear: None });
    }
    let (Some(data), Some(model)) = (&input.data, &input.model) else {
        return Err(usage("either --game or both --data and --model are required"));
    };
    let instance = match (&input.instance, &input.instance_values) {
        (Some(i), None) => InstanceRef::Row(*i),
        (None, Some(v)) => InstanceRef::Values(v.clone()),
        _ => return Err(usage("dataset input needs --instance or --instance-values")),
    };
    let ds: Dataset = load_dataset_csv(data)?;
    let model: PredictionModel = load_model_json(model)?;
    let game = estimate_value_function(&model, &ds, &instance)?;
    let names = match ds.names() {
        Some(n) => n.to_vec(),
        None => (1..=ds.n()).map(|j| format!("x{j}")).collect(),
    };
    let linear = match &model {
        PredictionModel::Linear { beta0, beta } => Some((
            *beta0,
            beta.clone(),
            feature_means(&ds),
            instance.resolve(&ds)?,
        )),
        _ => None,
    };
    Ok(Problem { game, names, linear })
}

fn compute(problem: &Problem, sel: &Selector, solve: &SolveArgs) -> Result<Attribution> {
    let game = &problem.game;
    match sel {
        Selector::Kernel(spec) => {
            let k = spec.build(game.n())?;
            let mut att = match (solve.method, solve.unconstrained) {
                (SolveMethod::Closed, false) => solve_constrained(game, &k)?,
                (SolveMethod::Closed, true) => solve_unconstrained(game, &k)?.0,
                (SolveMethod::Oracle, false) => wls_oracle_constrained(game, &k)?.0,
                (SolveMethod::Oracle, true) => wls_oracle_unconstrained(game, &k)?.0,
            };
            att.method = spec.to_string();
            Ok(att)
        }
        Selector::Reference(r) => match r {
            ReferenceMethod::Shapley => Ok(shapley(game)),
            ReferenceMethod::Es => Ok(es(game)),
            ReferenceMethod::FespRaw(w) => fesp_raw(game, *w),
            ReferenceMethod::LsPrenucleolus => ls_prenucleolus_oracle(game),
            ReferenceMethod::LinearModel => {
                let Some((b0, beta, means, x)) = &problem.linear else {
                    return Err(AfaError::Validation(
                        "lm requires --data with a linear --model".into(),
                    ));
                };
                let mut att = linear_model_attribution(*b0, beta, means, x)?;
                att.efficiency_gap = att.total() - grand_gap(game);
                Ok(att)
            }
        },
    }
}

/// Formats `x` with `digits` significant digits, in positional notation
/// for moderate exponents and scientific notation otherwise.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

fn full(x: f64) -> String {
    format_sig(x, 17)
}

fn short(x: f64) -> String {
    format_sig(x, 4)
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn json_array(xs: impl IntoIterator<Item = String>) -> String {
    format!("[{}]", xs.into_iter().collect::<Vec<_>>().join(","))
}

fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        let mut out = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i == 0 {
                let _ = write!(out, "{cell:<w$}", w = widths[i]);
            } else {
                let _ = write!(out, "  {cell:>w$}", w = widths[i]);
            }
        }
        out.trim_end().to_string()
    };
    let mut out = line(header) + "\n";
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (cols - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

fn render_attribution(p: &Problem, att: &Attribution, format: Format) -> String {
    let gap = grand_gap(&p.game);
    match format {
        Format::Json => format!(
            "{{\"method\":{},\"features\":{},\"phi\":{},\"grand_gap\":{},\"efficiency_gap\":{}}}\n",
            json_str(&att.method),
            json_array(p.names.iter().map(|s| json_str(s))),
            json_array(att.phi.iter().map(|&x| full(x))),
            full(gap),
            full(att.efficiency_gap)
        ),
        Format::Csv => {
            let mut out = String::from("feature,phi\n");
            for (name, x) in p.names.iter().zip(&att.phi) {
                let _ = writeln!(out, "{name},{}", full(*x));
            }
            let _ = writeln!(out, "grand_gap,{}", full(gap));
            let _ = writeln!(out, "efficiency_gap,{}", full(att.efficiency_gap));
            out
        }
        Format::Table => {
            let mut rows: Vec<Vec<String>> = p
                .names
                .iter()
                .zip(&att.phi)
                .map(|(n, x)| vec![n.clone(), short(*x)])
                .collect();
            rows.push(vec!["grand gap".into(), short(gap)]);
            rows.push(vec!["efficiency gap".into(), short(att.efficiency_gap)]);
            format!("method: {}\n", att.method)
                + &render_table(&["feature".into(), "phi".into()], &rows)
        }
    }
}

fn render_comparison(p: &Problem, atts: &[Attribution], format: Format) -> String {
    let methods: Vec<String> = atts.iter().map(|a| a.method.clone()).collect();
    let diffs: Vec<Vec<f64>> = atts
        .iter()
        .map(|a| atts.iter().map(|b| max_abs_diff(&a.phi, &b.phi)).collect())
        .collect();
    let gap = grand_gap(&p.game);
    match format {
        Format::Json => {
            let cols = atts.iter().map(|a| {
                format!(
                    "{{\"method\":{},\"phi\":{},\"efficiency_gap\":{}}}",
                    json_str(&a.method),
                    json_array(a.phi.iter().map(|&x| full(x))),
                    full(a.efficiency_gap)
                )
            });
            let diff_rows = diffs.iter().map(|r| json_array(r.iter().map(|&x| full(x))));
            format!(
                "{{\"features\":{},\"grand_gap\":{},\"methods\":{},\"max_abs_diff\":{}}}\n",
                json_array(p.names.iter().map(|s| json_str(s))),
                full(gap),
                json_array(cols),
                json_array(diff_rows)
            )
        }
        Format::Csv | Format::Table => {
            let cell: fn(f64) -> String = if format == Format::Csv { full } else { short };
            let mut rows: Vec<Vec<String>> = Vec::new();
            for (j, name) in p.names.iter().enumerate() {
                let mut row = vec![name.clone()];
                row.extend(atts.iter().map(|a| cell(a.phi[j])));
                rows.push(row);
            }
            let mut row = vec!["efficiency_gap".to_string()];
            row.extend(atts.iter().map(|a| cell(a.efficiency_gap)));
            rows.push(row);
            for (m, drow) in methods.iter().zip(&diffs) {
                let mut row = vec![format!("max_abs_diff:{m}")];
                row.extend(drow.iter().map(|&d| cell(d)));
                rows.push(row);
            }
            let mut header = vec!["feature".to_string()];
            header.extend(methods.iter().cloned());
            if format == Format::Csv {
                let mut out = header.join(",") + "\n";
                for row in rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                out
            } else {
                format!("grand gap: {}\n", short(gap)) + &render_table(&header, &rows)
            }
        }
    }
}

fn check_efficiency(att: &Attribution, game: &CoalitionGame, solve: &SolveArgs, kernel: bool) -> Result<()> {
    if kernel && !solve.unconstrained {
        let limit = solve.tolerance * game.scale().max(grand_gap(game).abs());
        if !(att.efficiency_gap.abs() <= limit) {
            return Err(AfaError::NumericalFailure(format!(
                "efficiency gap {:e} exceeds {limit:e}",
                att.efficiency_gap
            )));
        }
    }
    Ok(())
}

fn run_attribute(args: &AttributeArgs) -> std::result::Result<String, CliError> {
    if !(args.solve.tolerance > 0.0) {
        return Err(usage("--tolerance must be positive"));
    }
    let sel: Selector = args.kernel.parse()?;
    let problem = load_problem(&args.input)?;
    let att = compute(&problem, &sel, &args.solve)?;
    check_efficiency(&att, &problem.game, &args.solve, matches!(sel, Selector::Kernel(_)))?;
    Ok(render_attribution(&problem, &att, args.solve.format))
}

fn run_compare(args: &CompareArgs) -> std::result::Result<String, CliError> {
    if !(args.solve.tolerance > 0.0) {
        return Err(usage("--tolerance must be positive"));
    }
    let selectors = split_selectors(&args.kernels)?;
    if selectors.len() < 2 {
        return Err(usage("compare needs at least two kernels or methods"));
    }
    let problem = load_problem(&args.input)?;
    let atts = selectors
        .iter()
        .map(|s| {
            let att = compute(&problem, s, &args.solve)?;
            check_efficiency(&att, &problem.game, &args.solve, matches!(s, Selector::Kernel(_)))?;
            Ok(att)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(render_comparison(&problem, &atts, args.solve.format))
}

fn run_verify_cmd(args: &VerifyArgs) -> std::result::Result<String, CliError> {
    let cfg = VerifyConfig {
        seed: args.seed,
        trials: args.trials,
        n_max: args.n_max,
        tolerance: args.tolerance,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let report = run_verify(&cfg)?;
    if report.all_passed() {
        Ok(report.render())
    } else {
        Err(CliError::Invariants(report.render()))
    }
}

fn run_kernels(args: &KernelsArgs) -> std::result::Result<String, CliError> {
    if args.n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    let specs = split_selectors(&args.kernels)?
        .into_iter()
        .map(|s| match s {
            Selector::Kernel(k) => Ok(k),
            Selector::Reference(_) => Err(usage("kernels accepts kernel specs only")),
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let tables = specs
        .iter()
        .map(|s| {
            let k = s.build(args.n)?;
            Ok(if args.normalized { k.normalized_weights() } else { k.weights().to_vec() })
        })
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<String> = specs.iter().map(|s| s.to_string()).collect();
    let out = match args.format {
        Format::Json => {
            let items = labels.iter().zip(&tables).map(|(l, w)| {
                format!(
                    "{{\"kernel\":{},\"weights\":{}}}",
                    json_str(l),
                    json_array(w[1..].iter().map(|&x| full(x)))
                )
            });
            format!("{{\"n\":{},\"normalized\":{},\"kernels\":{}}}\n", args.n, args.normalized, json_array(items))
        }
        Format::Csv | Format::Table => {
            let cell: fn(f64) -> String = if args.format == Format::Csv { full } else { short };
            let mut header = vec!["size".to_string()];
            header.extend(labels.iter().cloned());
            let rows: Vec<Vec<String>> = (1..=args.n)
                .map(|s| {
                    let mut row = vec![s.to_string()];
                    row.extend(tables.iter().map(|w| cell(w[s])));
                    row
                })
                .collect();
            if args.format == Format::Csv {
                let mut out = header.join(",") + "\n";
                for row in rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                out
            } else {
                render_table(&header, &rows)
            }
        }
    };
    Ok(out)
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Attribute(a) => run_attribute(a),
        Command::Compare(a) => run_compare(a),
        Command::Verify(a) => run_verify_cmd(a),
        Command::Kernels(a) => run_kernels(a),
    };
    match result {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Afa(e)) => {
            let _ = writeln!(err, "error: {e}");
            match e.class() {
                ErrorClass::Validation => EXIT_VALIDATION,
                ErrorClass::Numerical => EXIT_NUMERICAL,
            }
        }
        Err(CliError::Invariants(report)) => {
            let _ = out.write_all(report.as_bytes());
            let _ = writeln!(err, "error: invariant failures");
            EXIT_NUMERICAL
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(2.0 / 3.0, 4), "0.6667");
        assert_eq!(format_sig(1.0 / 6.0, 4), "0.1667");
        assert_eq!(format_sig(0.0, 4), "0");
        assert_eq!(format_sig(1234.5, 4), "1234");
        assert_eq!(format_sig(1.5e-9, 4), "1.500e-9");
        let s = format_sig(2.0 / 3.0, 17);
        assert_eq!(s, "0.66666666666666663");
        assert_eq!(s.parse::<f64>().unwrap(), 2.0 / 3.0);
        for x in [1e300, -3.3e-200, 123456789.123, 1.0 / 3.0, -7.0] {
            assert_eq!(format_sig(x, 17).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn selector_lists() {
        let s = split_selectors("shap,custom:0,0,1,es,fesp-raw:0.5,ref:es").unwrap();
        assert_eq!(
            s,
            vec![
                Selector::Kernel(KernelSpec::Shap),
                Selector::Kernel(KernelSpec::Custom(vec![0.0, 0.0, 1.0])),
                Selector::Kernel(KernelSpec::Es),
                Selector::Reference(ReferenceMethod::FespRaw(0.5)),
                Selector::Reference(ReferenceMethod::Es),
            ]
        );
        assert!(split_selectors("shap,nope").is_err());
    }
}
