//! Residual sweeps, CSV/SVG emitters and the text reports printed by the
//! command-line tool.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bounds::{mathias_lower_bound, nuclear_lower_bound, BoundReport};
use crate::error::{Error, Result};
use crate::factorizations::{factorize, Method};
use crate::mechanism::SimulationResult;
use crate::metrics::{ErrorReport, Metric};
use crate::sequences::{constants, log_baseline, CoefficientTable};

pub const CSV_HEADER: [&str; 6] = [
    "n",
    "method",
    "metric",
    "value",
    "residual",
    "predicted_residual",
];

/// Method label used for lower-bound rows.
pub const BOUND_METHOD: &str = "bound";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweepMetric {
    MaxSe,
    MeanSe,
    NuclearLb,
    MathiasLb,
}

impl SweepMetric {
    pub const ALL: [SweepMetric; 4] = [
        SweepMetric::MaxSe,
        SweepMetric::MeanSe,
        SweepMetric::NuclearLb,
        SweepMetric::MathiasLb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepMetric::MaxSe => "maxse",
            SweepMetric::MeanSe => "meanse",
            SweepMetric::NuclearLb => "nuclear_lb",
            SweepMetric::MathiasLb => "mathias_lb",
        }
    }

    fn error_metric(self) -> Option<Metric> {
        match self {
            SweepMetric::MaxSe => Some(Metric::MaxSe),
            SweepMetric::MeanSe => Some(Metric::MeanSe),
            _ => None,
        }
    }
}

impl fmt::Display for SweepMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepMetric::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

/// One CSV record: a metric value at one `n` and its residual against
/// `log(n)/pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub method: String,
    pub metric: String,
    pub value: f64,
    pub residual: f64,
    pub predicted_residual: f64,
}

impl SweepRow {
    fn new(
        n: usize,
        method: &str,
        metric: SweepMetric,
        value: f64,
        predicted_residual: f64,
    ) -> Self {
        Self {
            n,
            method: method.to_string(),
            metric: metric.as_str().to_string(),
            value,
            residual: value - log_baseline(n),
            predicted_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    pub metrics: Vec<SweepMetric>,
    pub n_min: usize,
    pub n_max: usize,
    /// Powers of two in `[n_min, n_max]` instead of every integer.
    pub geometric: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            metrics: SweepMetric::ALL.to_vec(),
            n_min: 1 << 2,
            n_max: 1 << 13,
            geometric: true,
        }
    }
}

impl SweepConfig {
    pub fn grid(&self) -> Result<Vec<usize>> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= n_min <= n_max, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        if self.geometric {
            Ok((0..usize::BITS)
                .map(|e| 1usize << e)
                .take_while(|&n| n <= self.n_max)
                .filter(|&n| n >= self.n_min)
                .collect())
        } else {
            Ok((self.n_min..=self.n_max).collect())
        }
    }
}

/// Evaluates every requested (method, metric) on the grid. Rows come back
/// sorted by (method, metric, n).
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.methods.is_empty() {
        return Err(Error::InvalidParameter("method set is empty".into()));
    }
    let grid = cfg.grid()?;
    let error_metrics: Vec<SweepMetric> = cfg
        .metrics
        .iter()
        .copied()
        .filter(|m| m.error_metric().is_some())
        .collect();
    let c = constants();

    let jobs: Vec<(Method, usize)> = cfg
        .methods
        .iter()
        .flat_map(|&m| grid.iter().map(move |&n| (m, n)))
        .collect();
    let mut rows: Vec<SweepRow> = if error_metrics.is_empty() {
        Vec::new()
    } else {
        jobs.par_iter()
            .map(|&(method, n)| -> Result<Vec<SweepRow>> {
                let report = ErrorReport::new(&factorize(method, n)?)?;
                Ok(error_metrics
                    .iter()
                    .map(|&sm| {
                        let m = sm.error_metric().expect("filtered");
                        let predicted = match m {
                            Metric::MaxSe => report.predicted_maxse_residual,
                            Metric::MeanSe => report.predicted_meanse_residual,
                        };
                        SweepRow::new(n, method.as_str(), sm, report.value(m), predicted)
                    })
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect()
    };

    for &sm in &cfg.metrics {
        let (bound, predicted): (fn(usize) -> Result<f64>, f64) = match sm {
            SweepMetric::NuclearLb => (nuclear_lower_bound, c.lb_const),
            SweepMetric::MathiasLb => (mathias_lower_bound, c.mathias_lb_const),
            _ => continue,
        };
        for &n in &grid {
            rows.push(SweepRow::new(n, BOUND_METHOD, sm, bound(n)?, predicted));
        }
    }

    rows.sort_by(|a, b| (&a.method, &a.metric, a.n).cmp(&(&b.method, &b.metric, b.n)));
    rows.dedup_by(|a, b| a.method == b.method && a.metric == b.metric && a.n == b.n);
    Ok(rows)
}

/// Runs the sweep and writes the CSV (and optionally the SVG). Nothing is
/// written if the sweep fails.
pub fn sweep(cfg: &SweepConfig, out_csv: &Path, out_svg: Option<&Path>) -> Result<Vec<SweepRow>> {
    let rows = run_sweep(cfg)?;
    write_sweep_csv(File::create(out_csv)?, &rows)?;
    if let Some(path) = out_svg {
        File::create(path)?.write_all(render_svg(&rows).as_bytes())?;
    }
    Ok(rows)
}

/// Shortest decimal that parses back to the same `f64`, in exponent form
/// for very small or very large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.method.clone(),
            r.metric.clone(),
            fmt_f64(r.value),
            fmt_f64(r.residual),
            fmt_f64(r.predicted_residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::InvalidParameter(format!(
            "unexpected CSV header {headers:?}"
        )));
    }
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::InvalidParameter(format!("bad number `{s}`")))
    };
    rd.records()
        .map(|rec| {
            let rec = rec?;
            Ok(SweepRow {
                n: rec[0]
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad n `{}`", &rec[0])))?,
                method: rec[1].to_string(),
                metric: rec[2].to_string(),
                value: num(&rec[3])?,
                residual: num(&rec[4])?,
                predicted_residual: num(&rec[5])?,
            })
        })
        .collect()
}

/// Ordering properties that must hold at every sweep point:
/// MeanSE <= MaxSE, nuclear bound <= every MaxSE, and NSR MaxSE <= square-root
/// MaxSE for `n >= 4`.
pub fn ordering_violations(rows: &[SweepRow]) -> Vec<String> {
    let mut by_point: BTreeMap<usize, BTreeMap<(&str, &str), f64>> = BTreeMap::new();
    for r in rows {
        by_point
            .entry(r.n)
            .or_default()
            .insert((r.method.as_str(), r.metric.as_str()), r.value);
    }
    let mut out = Vec::new();
    for (n, vals) in &by_point {
        for method in Method::ALL.map(Method::as_str) {
            let max = vals.get(&(method, "maxse"));
            if let (Some(mean), Some(max)) = (vals.get(&(method, "meanse")), max) {
                if *mean > max * (1.0 + 1e-12) {
                    out.push(format!("n={n} {method}: meanse {mean} > maxse {max}"));
                }
            }
            if let (Some(lb), Some(max)) = (vals.get(&(BOUND_METHOD, "nuclear_lb")), max) {
                if *lb > max * (1.0 + 1e-12) {
                    out.push(format!("n={n} {method}: nuclear bound {lb} > maxse {max}"));
                }
            }
        }
        if *n >= 4 {
            if let (Some(nsr), Some(sq)) =
                (vals.get(&("nsr", "maxse")), vals.get(&("sqrt", "maxse")))
            {
                if nsr > sq {
                    out.push(format!("n={n}: nsr maxse {nsr} > sqrt maxse {sq}"));
                }
            }
        }
    }
    out
}

const SVG_WIDTH: f64 = 960.0;
const SVG_HEIGHT: f64 = 540.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Line chart of residual against `log2(n)`, one polyline per
/// (method, metric) with a dashed line at its predicted residual.
pub fn render_svg(rows: &[SweepRow]) -> String {
    let (left, right, top, bottom) = (70.0, 220.0, 30.0, 50.0);
    let plot_w = SVG_WIDTH - left - right;
    let plot_h = SVG_HEIGHT - top - bottom;

    let mut series: BTreeMap<(&str, &str), Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        series
            .entry((r.method.as_str(), r.metric.as_str()))
            .or_default()
            .push(r);
    }

    let xs = rows.iter().map(|r| (r.n as f64).log2());
    let (x_min, x_max) = min_max(xs);
    let ys = rows.iter().flat_map(|r| [r.residual, r.predicted_residual]);
    let (y_min, y_max) = min_max(ys);
    let pad = 0.05 * (y_max - y_min).max(1e-3);
    let (y_min, y_max) = (y_min - pad, y_max + pad);
    let x_span = (x_max - x_min).max(1.0);
    let sx = |x: f64| left + (x - x_min) / x_span * plot_w;
    let sy = |y: f64| top + (y_max - y) / (y_max - y_min) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for e in (x_min.ceil() as i64)..=(x_max.floor() as i64) {
        let x = sx(e as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">2^{e}</text>"#,
            top + plot_h,
            top + plot_h + 5.0,
            top + plot_h + 20.0
        );
    }
    for i in 0..=5 {
        let y = y_min + (y_max - y_min) * i as f64 / 5.0;
        let py = sy(y);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{left}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{y:.3}</text>"#,
            left - 5.0,
            left - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">n (log2 scale)</text>"#,
        left + plot_w / 2.0,
        SVG_HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">value - log(n)/pi</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );

    for (i, ((method, metric), pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", sx((r.n as f64).log2()), sy(r.residual)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        if let Some(first) = pts.first() {
            let py = sy(first.predicted_residual);
            let _ = writeln!(
                s,
                r#"<line x1="{left}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="{color}" stroke-dasharray="6 4"/>"#,
                left + plot_w
            );
        }
        let ly = top + 15.0 + 18.0 * i as f64;
        let lx = left + plot_w + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{method} {metric}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

/// Two-column aligned `key  value` listing.
pub fn aligned(pairs: &[(String, String)]) -> String {
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    pairs
        .iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "-".into())
}

pub fn format_coefficients(t: &CoefficientTable) -> String {
    let width = t.n().to_string().len().max(1);
    let mut s = format!(
        "{:>width$}  {:<22}  {:<22}  {:<22}  {}\n",
        "k", "r_k", "rtilde_k", "d_(k+1)^2", "alpha_(k+1)"
    );
    for k in 0..t.n() {
        let _ = writeln!(
            s,
            "{k:>width$}  {:<22}  {:<22}  {:<22}  {}",
            fmt_f64(t.r()[k]),
            fmt_f64(t.rtilde()[k]),
            fmt_f64(t.d_sq_slice()[k]),
            fmt_f64(t.alpha_slice()[k])
        );
    }
    s
}

pub fn format_error_report(r: &ErrorReport) -> String {
    aligned(&[
        kv("method", r.method),
        kv("n", r.n),
        kv("maxse", fmt_f64(r.maxse)),
        kv("meanse", fmt_f64(r.meanse)),
        kv("maxse_residual", fmt_f64(r.maxse_residual)),
        kv("meanse_residual", fmt_f64(r.meanse_residual)),
        kv("closed_form_maxse", opt(r.closed_form_maxse)),
        kv("closed_form_meanse", opt(r.closed_form_meanse)),
        kv(
            "predicted_maxse_residual",
            fmt_f64(r.predicted_maxse_residual),
        ),
        kv(
            "predicted_meanse_residual",
            fmt_f64(r.predicted_meanse_residual),
        ),
    ])
}

pub fn format_bound_report(r: &BoundReport) -> String {
    aligned(&[
        kv("n", r.n),
        kv("nuclear_lb", fmt_f64(r.nuclear_lb)),
        kv("mathias_lb", fmt_f64(r.mathias_lb)),
        kv("nuclear_residual", fmt_f64(r.nuclear_residual)),
        kv("mathias_residual", fmt_f64(r.mathias_residual)),
        kv("g_n", opt(r.g_n)),
        kv("g_n_predicted", opt(r.g_n_predicted)),
    ])
}

pub fn format_simulation(r: &SimulationResult) -> String {
    let worst_mean = r.z_scores.iter().map(|z| z.mean.abs()).fold(0.0, f64::max);
    let worst_var = r
        .z_scores
        .iter()
        .map(|z| (z.variance - 1.0).abs())
        .fold(0.0, f64::max);
    aligned(&[
        kv("trials", r.trials),
        kv("sigma", fmt_f64(r.sigma)),
        kv("empirical_err_inf", fmt_f64(r.empirical_err_inf)),
        kv("theory_err_inf", fmt_f64(r.theory_err_inf)),
        kv("empirical_err_2", fmt_f64(r.empirical_err_2)),
        kv("theory_err_2", fmt_f64(r.theory_err_2)),
        kv("max_abs_z_mean", fmt_f64(worst_mean)),
        kv("max_abs_z_var_minus_1", fmt_f64(worst_var)),
    ])
}

/// Appends records to a CSV file, writing `header` first if the file is new
/// or empty.
pub fn append_csv(path: &Path, header: &[&str], records: &[Vec<String>]) -> Result<()> {
    let fresh = std::fs::metadata(path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(header)?;
    }
    for r in records {
        w.write_record(r)?;
    }
    w.flush().map_err(Error::from)
}

pub fn error_report_csv(r: &ErrorReport) -> (Vec<&'static str>, Vec<String>) {
    (
        vec![
            "method",
            "n",
            "maxse",
            "meanse",
            "maxse_residual",
            "meanse_residual",
            "closed_form_maxse",
            "closed_form_meanse",
            "predicted_maxse_residual",
            "predicted_meanse_residual",
        ],
        vec![
            r.method.to_string(),
            r.n.to_string(),
            fmt_f64(r.maxse),
            fmt_f64(r.meanse),
            fmt_f64(r.maxse_residual),
            fmt_f64(r.meanse_residual),
            r.closed_form_maxse.map(fmt_f64).unwrap_or_default(),
            r.closed_form_meanse.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.predicted_maxse_residual),
            fmt_f64(r.predicted_meanse_residual),
        ],
    )
}

pub fn bound_report_csv(r: &BoundReport) -> (Vec<&'static str>, Vec<String>) {
    (
        vec![
            "n",
            "nuclear_lb",
            "mathias_lb",
            "nuclear_residual",
            "mathias_residual",
            "g_n",
            "g_n_predicted",
        ],
        vec![
            r.n.to_string(),
            fmt_f64(r.nuclear_lb),
            fmt_f64(r.mathias_lb),
            fmt_f64(r.nuclear_residual),
            fmt_f64(r.mathias_residual),
            r.g_n.map(fmt_f64).unwrap_or_default(),
            r.g_n_predicted.map(fmt_f64).unwrap_or_default(),
        ],
    )
}

pub fn simulation_csv(
    method: Method,
    n: usize,
    mu: f64,
    seed: u64,
    r: &SimulationResult,
) -> (Vec<&'static str>, Vec<String>) {
    (
        vec![
            "method",
            "n",
            "mu",
            "trials",
            "seed",
            "sigma",
            "empirical_err_inf",
            "theory_err_inf",
            "empirical_err_2",
            "theory_err_2",
        ],
        vec![
            method.to_string(),
            n.to_string(),
            fmt_f64(mu),
            r.trials.to_string(),
            seed.to_string(),
            fmt_f64(r.sigma),
            fmt_f64(r.empirical_err_inf),
            fmt_f64(r.theory_err_inf),
            fmt_f64(r.empirical_err_2),
            fmt_f64(r.theory_err_2),
        ],
    )
}

/// Reads a single column (or single row) of numbers from a CSV file.
pub fn read_vector_csv<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut out = Vec::new();
    for rec in rd.records() {
        for field in rec?.iter() {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            out.push(
                field
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad number `{field}`")))?,
            );
        }
    }
    Ok(out)
}

pub fn stdout_or_file(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}
