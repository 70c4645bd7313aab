//! Work-precision (efficiency-curve) harness and the family-curve parameter
//! scan over the `(c3, c'3)` plane.

use std::fmt::Write as _;

use crate::derive::{family_cp3, type_c_roots, AbFamily, DeriveError};
use crate::integrate::{integrate_adaptive, ControllerConfig};
use crate::problems::NamedProblem;
use crate::scalar::Scalar;
use crate::tableau::ButcherPair;

/// One `(pair, ATOL)` cell of an efficiency curve.
#[derive(Clone, Debug)]
pub struct WorkPrecisionRecord {
    pub pair_id: String,
    pub problem_id: String,
    pub atol: f64,
    pub n_rhs: u64,
    pub n_accept: u64,
    pub n_reject: u64,
    /// Achieved error per the problem's rule; NaN on a failed run.
    pub error: f64,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct WorkPrecisionReport {
    pub records: Vec<WorkPrecisionRecord>,
    /// Descriptions of error-vs-ATOL monotonicity violations beyond 10x.
    pub monotonicity_flags: Vec<String>,
}

impl WorkPrecisionReport {
    pub fn for_pair<'a>(&'a self, pair_id: &'a str) -> impl Iterator<Item = &'a WorkPrecisionRecord> {
        self.records.iter().filter(move |r| r.pair_id == pair_id)
    }
}

/// The default tolerance grid: 25 logarithmic points over 1e-3 .. 1e-11.
pub fn default_atol_grid() -> Vec<f64> {
    let n = 25;
    (0..n)
        .map(|k| 10f64.powf(-3.0 - 8.0 * k as f64 / (n - 1) as f64))
        .collect()
}

/// Runs every pair over the tolerance grid on one problem. Integration
/// failures become error rows, not panics. Deterministic given its inputs.
pub fn work_precision(
    pairs: &[ButcherPair<f64>],
    problem: &NamedProblem,
    atol_grid: &[f64],
) -> WorkPrecisionReport {
    let mut report = WorkPrecisionReport::default();
    for pair in pairs {
        let mut prev: Option<(f64, f64)> = None;
        for &atol in atol_grid {
            let cfg = ControllerConfig::new(atol);
            let record = match integrate_adaptive(pair, problem, problem.t0, problem.tend, &problem.x0, &cfg)
            {
                Ok(stats) => {
                    let error = problem.measure_error(&stats).unwrap_or(f64::NAN);
                    WorkPrecisionRecord {
                        pair_id: pair.name.clone(),
                        problem_id: problem.id.name().to_string(),
                        atol,
                        n_rhs: stats.n_rhs,
                        n_accept: stats.n_accept,
                        n_reject: stats.n_reject,
                        error,
                        failure: None,
                    }
                }
                Err(e) => WorkPrecisionRecord {
                    pair_id: pair.name.clone(),
                    problem_id: problem.id.name().to_string(),
                    atol,
                    n_rhs: 0,
                    n_accept: 0,
                    n_reject: 0,
                    error: f64::NAN,
                    failure: Some(e.to_string()),
                },
            };
            if let Some((prev_atol, prev_error)) = prev {
                // tighter tolerance should not grow the error by over 10x
                if record.error.is_finite() && record.error > 10.0 * prev_error {
                    report.monotonicity_flags.push(format!(
                        "{} on {}: error rose {:.3e} -> {:.3e} as ATOL fell {prev_atol:e} -> {atol:e}",
                        record.pair_id, record.problem_id, prev_error, record.error
                    ));
                }
            }
            if record.error.is_finite() {
                prev = Some((atol, record.error));
            }
            report.records.push(record);
        }
    }
    report
}

/// CSV emission: `pair_id,problem_id,atol,n_rhs,n_accept,n_reject,error`.
pub fn work_precision_csv(report: &WorkPrecisionReport) -> String {
    let mut out = String::from("pair_id,problem_id,atol,n_rhs,n_accept,n_reject,error\n");
    for r in &report.records {
        let _ = writeln!(
            out,
            "{},{},{:e},{},{},{},{}",
            r.pair_id,
            r.problem_id,
            r.atol,
            r.n_rhs,
            r.n_accept,
            r.n_reject,
            if r.error.is_finite() {
                format!("{:e}", r.error)
            } else {
                "nan".to_string()
            }
        );
    }
    out
}

/// A gnuplot script rendering the efficiency curves of a CSV produced by
/// [`work_precision_csv`]. One plot clause per pair filters rows by name.
pub fn work_precision_plot_script(csv_path: &str, pair_ids: &[String], out_path: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set logscale xy");
    let _ = writeln!(s, "set xlabel 'achieved error'");
    let _ = writeln!(s, "set ylabel 'right-hand-side evaluations'");
    let _ = writeln!(s, "set key top right");
    let _ = writeln!(s, "set terminal pngcairo size 900,700");
    let _ = writeln!(s, "set output '{out_path}'");
    let clauses: Vec<String> = pair_ids
        .iter()
        .map(|id| {
            format!(
                "'{csv_path}' using (stringcolumn(1) eq '{id}' ? $7 : NaN):($4) \
                 with linespoints title '{id}'"
            )
        })
        .collect();
    let _ = writeln!(s, "plot {}", clauses.join(", \\\n     "));
    s
}

/// One row of the family-curve scan in the `(c3, c'3)` plane.
#[derive(Clone, Debug)]
pub struct ScanRow<S: Scalar> {
    pub c3: S,
    pub cp3_a: Option<S>,
    pub cp3_b: Option<S>,
    pub cp3_c_plus: Option<S>,
    pub cp3_c_minus: Option<S>,
}

/// The two-dimensional cut through the parameter space: `c2` and `c5` fixed,
/// `c6 = 1`, and for each `c3` the `c'3` making the pair type A, B, or C
/// (both quadratic roots for C; gaps where roots are complex or, in exact
/// mode, irrational).
pub fn family_scan<S: Scalar>(c2: &S, c5: &S, c3_grid: &[S]) -> Vec<ScanRow<S>> {
    let c6 = S::one();
    c3_grid
        .iter()
        .map(|c3| {
            let cp3_a = family_cp3(AbFamily::A, c2, c3).ok();
            let cp3_b = family_cp3(AbFamily::B, c2, c3).ok();
            let (cp3_c_plus, cp3_c_minus) = match type_c_roots(c2, c3, c5, &c6) {
                Ok(roots) => {
                    let plus = roots.first().cloned();
                    let minus = roots.get(1).cloned();
                    (plus, minus)
                }
                Err(DeriveError::IrrationalInExactMode { .. }) | Err(_) => (None, None),
            };
            ScanRow {
                c3: c3.clone(),
                cp3_a,
                cp3_b,
                cp3_c_plus,
                cp3_c_minus,
            }
        })
        .collect()
}

/// Scan CSV: `c3,cp3_A,cp3_B,cp3_C_plus,cp3_C_minus`, empty fields for gaps.
pub fn family_scan_csv<S: Scalar>(rows: &[ScanRow<S>]) -> String {
    let mut out = String::from("c3,cp3_A,cp3_B,cp3_C_plus,cp3_C_minus\n");
    let fmt = |v: &Option<S>| v.as_ref().map(|x| format!("{}", x.to_f64())).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.c3.to_f64(),
            fmt(&r.cp3_a),
            fmt(&r.cp3_b),
            fmt(&r.cp3_c_plus),
            fmt(&r.cp3_c_minus)
        );
    }
    out
}

/// Gnuplot script for a scan CSV.
pub fn family_scan_plot_script(csv_path: &str, out_path: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set xlabel 'c3'");
    let _ = writeln!(s, "set ylabel \"c'3\"");
    let _ = writeln!(s, "set key top left");
    let _ = writeln!(s, "set terminal pngcairo size 900,700");
    let _ = writeln!(s, "set output '{out_path}'");
    let _ = writeln!(
        s,
        "plot '{csv_path}' using 1:2 skip 1 with lines dashtype 2 title 'type A', \\\n     \
         '{csv_path}' using 1:3 skip 1 with lines dashtype 3 title 'type B', \\\n     \
         '{csv_path}' using 1:4 skip 1 with lines title 'type C (+)', \\\n     \
         '{csv_path}' using 1:5 skip 1 with lines title 'type C (-)'"
    );
    s
}

/// Stability-boundary CSV: `re,im` rows.
pub fn boundary_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("re,im\n");
    for (x, y) in points {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}
