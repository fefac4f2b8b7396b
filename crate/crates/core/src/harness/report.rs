use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::io;

use super::{Axis, ConvergenceReport, ErrorMeasure};

/// `log2` data of a convergence report with an optional least-squares slope.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLog {
    /// `(log2 size, log2 error)`, rows with a zero error left out.
    pub points: Vec<[f64; 2]>,
    pub slope: Option<f64>,
    /// Number of trailing points the slope is fitted to.
    pub fit_points: usize,
}

/// Least-squares slope through `(x, y)`; `None` with fewer than two points or
/// a degenerate abscissa.
pub fn least_squares_slope(points: &[[f64; 2]]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p[0] - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p[0] - mx) * (p[1] - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Log-log data from `(size, error)` pairs; the slope uses the last `fit_last`
/// points, or all of them.
pub fn loglog_from(data: &[(f64, f64)], fit_last: Option<usize>) -> LogLog {
    let points: Vec<[f64; 2]> =
        data.iter().filter(|(_, e)| *e > 0.0).map(|&(s, e)| [s.log2(), e.log2()]).collect();
    let m = fit_last.unwrap_or(points.len()).min(points.len());
    LogLog { slope: least_squares_slope(&points[points.len() - m..]), fit_points: m, points }
}

pub fn emit_loglog(report: &ConvergenceReport, fit_last: Option<usize>) -> LogLog {
    let data: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.size, r.error)).collect();
    loglog_from(&data, fit_last)
}

impl LogLog {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["log2_size", "log2_error"]).expect("in-memory write");
        for p in &self.points {
            w.write_record([p[0].to_string(), p[1].to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }

    /// Whitespace-separated columns for gnuplot, slope in a comment line.
    pub fn to_gnuplot(&self) -> String {
        let mut s = String::from("# log2(size) log2(error)\n");
        if let Some(k) = self.slope {
            let _ = writeln!(s, "# slope {k:.4} (last {} points)", self.fit_points);
        }
        for p in &self.points {
            let _ = writeln!(s, "{} {}", p[0], p[1]);
        }
        s
    }
}

fn fraction(size: f64) -> String {
    let inv = 1.0 / size;
    if (inv - inv.round()).abs() < 1e-9 {
        format!("1/{}", inv.round() as u64)
    } else {
        format!("{size}")
    }
}

/// Three-row table: sizes, relative errors, orders.
pub fn format_table(report: &ConvergenceReport) -> String {
    const W: usize = 12;
    let label = match report.measure {
        ErrorMeasure::FinalTime => "|v-v^hk|_V/|v|_V",
        ErrorMeasure::MaxOverSteps => "max_j |v-v^hk|_V/|v|_V",
    };
    let lw = label.len().max("Convergence order".len()) + 2;
    let mut t = String::new();
    let _ = write!(t, "{:<lw$}", report.axis.symbol());
    for r in &report.rows {
        let _ = write!(t, "{:>W$}", fraction(r.size));
    }
    t.push('\n');
    let _ = write!(t, "{label:<lw$}");
    for r in &report.rows {
        let _ = write!(t, "{:>W$}", format!("{:.4e}", r.error));
    }
    t.push('\n');
    let _ = write!(t, "{:<lw$}", "Convergence order");
    for r in &report.rows {
        let _ = write!(t, "{:>W$}", r.order.map_or(String::new(), |o| format!("{o:.4}")));
    }
    t.push('\n');
    let (fixed, reference) = match report.axis {
        Axis::Time => (format!("h = 1/{}", report.fixed), format!("k_ref = 1/{}", report.reference)),
        Axis::Space => (format!("k = 1/{}", report.fixed), format!("h_ref = 1/{}", report.reference)),
    };
    let _ = writeln!(t, "fixed {fixed}, reference {reference}");
    let _ = writeln!(
        t,
        "reference |v(T)|_V = {:.5e}, max_j |v_j|_V = {:.5e}",
        report.reference_final_norm, report.reference_max_norm
    );
    t
}

/// Writes the report as CSV, table text and log-log data into `dir`.
pub fn write_report(dir: &Path, report: &ConvergenceReport, fit_last: Option<usize>) -> Result<Vec<PathBuf>> {
    let stem = match report.axis {
        Axis::Time => "time",
        Axis::Space => "space",
    };
    let mut out = Vec::new();
    let path = dir.join(format!("{stem}_sweep.csv"));
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                r.size.to_string(),
                r.error.to_string(),
                r.order.map_or(String::new(), |o| o.to_string()),
                r.degraded.to_string(),
            ]
        })
        .collect();
    io::write_csv_file(&path, &["level", report.axis.symbol(), "relative_error", "order", "degraded"], &rows)?;
    out.push(path);

    let ll = emit_loglog(report, fit_last);
    let mut table = format_table(report);
    if let Some(k) = ll.slope {
        let _ = writeln!(table, "least-squares slope {k:.4} over the last {} points", ll.fit_points);
    }
    for (name, text) in [
        (format!("{stem}_sweep.txt"), table),
        (format!("{stem}_loglog.csv"), ll.to_csv()),
        (format!("{stem}_loglog.dat"), ll.to_gnuplot()),
    ] {
        let path = dir.join(name);
        io::write_text_file(&path, &text)?;
        out.push(path);
    }
    Ok(out)
}
