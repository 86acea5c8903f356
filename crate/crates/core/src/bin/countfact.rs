use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use countfact::bounds::BoundReport;
use countfact::factorizations::DENSE_BUDGET;
use countfact::mechanism::{estimate_errors, MechanismConfig};
use countfact::report::{self, SweepConfig, SweepMetric};
use countfact::{factorize, verify_reconstruction, CoefficientTable, Error, ErrorReport, Method};

/// Explicit factorizations of the prefix-sum matrix and their error norms.
#[derive(Parser, Debug)]
#[command(name = "countfact", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Write the text report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// CSV output. `sweep` writes its rows here; other commands append one record.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// SVG residual chart (sweep only).
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// Exit with status 1 if any invariant fails.
    #[arg(long, global = true)]
    check: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Wallis coefficients, inverse coefficients, column norms and alpha.
    Coeffs {
        #[arg(long)]
        n: usize,
    },
    /// Build a factorization and verify L R = M_count.
    Factorize {
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long)]
        n: usize,
        /// Directory to receive left.csv and right.csv.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// MaxSE / MeanSE, direct and closed form.
    Metrics {
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long)]
        n: usize,
    },
    /// Nuclear and Mathias lower bounds and G(n).
    Bounds {
        #[arg(long)]
        n: usize,
    },
    /// Residual sweep over n.
    Sweep {
        /// Comma-separated; empty is an error.
        #[arg(long, value_delimiter = ',', default_value = "sqrt,nsr,group-algebra")]
        methods: Vec<String>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "maxse,meanse,nuclear_lb,mathias_lb"
        )]
        metrics: Vec<String>,
        #[arg(long, default_value_t = 4)]
        n_min: usize,
        #[arg(long, default_value_t = 8192)]
        n_max: usize,
        /// Every integer in range rather than powers of two.
        #[arg(long)]
        linear: bool,
    },
    /// Monte Carlo run of the Gaussian matrix mechanism.
    Simulate {
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `zeros`, `ones`, or a CSV file with n numbers.
        #[arg(long, default_value = "zeros")]
        input: String,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Violations(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Violations(v)) => {
            for line in &v {
                eprintln!("violation: {line}");
            }
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = cli.global;
    if let Some(t) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }

    let (text, violations) = match cli.command {
        Command::Coeffs { n } => coeffs(n)?,
        Command::Factorize { method, n, dump } => {
            factorize_cmd(method, n, dump.as_deref(), g.csv.as_deref())?
        }
        Command::Metrics { method, n } => {
            let r = ErrorReport::new(&factorize(method, n)?)?;
            if let Some(p) = &g.csv {
                let (h, rec) = report::error_report_csv(&r);
                report::append_csv(p, &h, &[rec])?;
            }
            (report::format_error_report(&r), r.violations()?)
        }
        Command::Bounds { n } => {
            let r = BoundReport::new(n)?;
            if let Some(p) = &g.csv {
                let (h, rec) = report::bound_report_csv(&r);
                report::append_csv(p, &h, &[rec])?;
            }
            (report::format_bound_report(&r), r.violations())
        }
        Command::Sweep {
            methods,
            metrics,
            n_min,
            n_max,
            linear,
        } => {
            let cfg = SweepConfig {
                methods: methods
                    .iter()
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse())
                    .collect::<Result<_, _>>()?,
                metrics: metrics
                    .iter()
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse::<SweepMetric>())
                    .collect::<Result<_, _>>()?,
                n_min,
                n_max,
                geometric: !linear,
            };
            let rows = match &g.csv {
                Some(p) => report::sweep(&cfg, p, g.svg.as_deref())?,
                None => {
                    let rows = report::run_sweep(&cfg)?;
                    if let Some(svg) = &g.svg {
                        File::create(svg)?.write_all(report::render_svg(&rows).as_bytes())?;
                    }
                    rows
                }
            };
            let text = if g.csv.is_some() {
                format!("{} rows\n", rows.len())
            } else {
                let mut buf = Vec::new();
                report::write_sweep_csv(&mut buf, &rows)?;
                String::from_utf8(buf).expect("csv is utf-8")
            };
            (text, report::ordering_violations(&rows))
        }
        Command::Simulate {
            method,
            n,
            mu,
            trials,
            seed,
            input,
        } => {
            let f = factorize(method, n)?;
            let x = match input.as_str() {
                "zeros" => vec![0.0; n],
                "ones" => vec![1.0; n],
                path => report::read_vector_csv(File::open(path)?)?,
            };
            let r = estimate_errors(&MechanismConfig::new(&f, mu, trials, seed, x))?;
            if let Some(p) = &g.csv {
                let (h, rec) = report::simulation_csv(method, n, mu, seed, &r);
                report::append_csv(p, &h, &[rec])?;
            }
            let v = r
                .gaussianity_failures()
                .into_iter()
                .map(|i| format!("coordinate {i}: standardized error fails the normality check"))
                .collect();
            (report::format_simulation(&r), v)
        }
    };

    let mut out = report::stdout_or_file(g.out.as_deref())?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    if g.check && !violations.is_empty() {
        return Err(Failure::Violations(violations));
    }
    Ok(())
}

fn coeffs(n: usize) -> Result<(String, Vec<String>), Failure> {
    let t = CoefficientTable::new(n)?;
    let mut v = Vec::new();
    for m in 1..=n {
        let a = t.alpha(m);
        if !(1.0 - 1e-15..=1.0663).contains(&a) {
            v.push(format!("alpha_{m} = {a} outside [1, 1.0663]"));
        }
        if m < n && t.d_sq(m) <= t.d_sq(m + 1) {
            v.push(format!("d_{m}^2 not strictly decreasing"));
        }
    }
    for j in 0..n {
        let prefix: f64 = t.rtilde()[..=j].iter().sum();
        if (prefix - t.r()[j]).abs() > 1e-13 {
            v.push(format!(
                "prefix identity off by {} at j = {j}",
                (prefix - t.r()[j]).abs()
            ));
        }
    }
    Ok((report::format_coefficients(&t), v))
}

fn factorize_cmd(
    method: Method,
    n: usize,
    dump: Option<&Path>,
    csv: Option<&Path>,
) -> Result<(String, Vec<String>), Failure> {
    let f = factorize(method, n)?;
    let mut v = Vec::new();
    let residual = if n <= DENSE_BUDGET {
        Some(verify_reconstruction(&f)?)
    } else {
        None
    };
    if let Some(r) = residual {
        if r > 1e-9 {
            v.push(format!("max |LR - M_count| = {r}"));
        }
    }
    if method == Method::Nsr {
        let worst = f
            .col_norms_sq_right()
            .iter()
            .map(|c| (c - 1.0).abs())
            .fold(0.0, f64::max);
        if worst > 1e-12 {
            v.push(format!(
                "right factor column norms deviate from 1 by {worst}"
            ));
        }
    }
    if let Some(dir) = dump {
        fs::create_dir_all(dir)?;
        f.dense_left()?
            .write_csv(File::create(dir.join("left.csv"))?)?;
        f.dense_right()?
            .write_csv(File::create(dir.join("right.csv"))?)?;
    }
    let max_row = f.row_norms_sq_left().iter().copied().fold(0.0, f64::max);
    let max_col = f.col_norms_sq_right().iter().copied().fold(0.0, f64::max);
    let residual_str = residual.map(report::fmt_f64).unwrap_or_else(|| "-".into());
    if let Some(p) = csv {
        report::append_csv(
            p,
            &[
                "method",
                "n",
                "inner_dim",
                "max_row_norm_sq_left",
                "max_col_norm_sq_right",
                "frobenius_sq_left",
                "reconstruction_error",
            ],
            &[vec![
                method.to_string(),
                n.to_string(),
                f.inner_dim().to_string(),
                report::fmt_f64(max_row),
                report::fmt_f64(max_col),
                report::fmt_f64(f.frobenius_sq_left()),
                residual.map(report::fmt_f64).unwrap_or_default(),
            ]],
        )?;
    }
    let text = report::aligned(&[
        ("method".into(), method.to_string()),
        ("n".into(), n.to_string()),
        ("inner_dim".into(), f.inner_dim().to_string()),
        (
            "left".into(),
            format!("{}x{}", f.left().rows(), f.left().cols()),
        ),
        (
            "right".into(),
            format!("{}x{}", f.right().rows(), f.right().cols()),
        ),
        ("max_row_norm_sq_left".into(), report::fmt_f64(max_row)),
        ("max_col_norm_sq_right".into(), report::fmt_f64(max_col)),
        (
            "frobenius_sq_left".into(),
            report::fmt_f64(f.frobenius_sq_left()),
        ),
        ("reconstruction_error".into(), residual_str),
    ]);
    Ok((text, v))
}
