//! Output formatting and atomic file writes.
//!
//! Every float is printed with nine significant digits so repeated runs diff
//! cleanly; files are written to a temporary sibling and renamed into place
//! so a failing command never leaves a partial output behind.

use std::io;
use std::path::Path;

use nalgebra::DMatrix;

use flexlink::sim::{SimResult, SimSummary};

/// Nine significant digits, exponent form.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_else(|| "none".to_string())
}

/// Write-to-temp, rename-on-success.
pub fn write_atomic(path: &Path, content: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp_path, content)?;
    std::fs::rename(&tmp_path, path)?;
    Ok(())
}

/// Labeled matrix blocks: `# NAME rows x cols` followed by comma-separated
/// rows, blocks separated by a blank line.
pub fn matrix_blocks_csv(blocks: &[(&str, &DMatrix<f64>)]) -> String {
    let mut out = String::new();
    for (label, matrix) in blocks {
        out.push_str(&format!(
            "# {label} {}x{}\n",
            matrix.nrows(),
            matrix.ncols()
        ));
        for i in 0..matrix.nrows() {
            let row: Vec<String> = (0..matrix.ncols())
                .map(|j| fmt_float(matrix[(i, j)]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Header of the per-step trace for a plant with `n` modes and, when an
/// observer runs, order `v`. Frozen; guarded by a golden test.
pub fn trace_header(n: usize, v: Option<usize>) -> String {
    let mut cols = vec!["t".to_string(), "theta".to_string()];
    cols.extend((1..=n).map(|i| format!("p{i}")));
    cols.push("dtheta".to_string());
    cols.extend((1..=n).map(|i| format!("dp{i}")));
    cols.extend(["theta_c", "theta_t", "sigma", "u"].map(String::from));
    if let Some(v) = v {
        cols.push("ghat1".to_string());
        cols.push("ghat2".to_string());
        cols.extend((1..=v).map(|i| format!("e{i}")));
    }
    cols.join(",")
}

/// Full trace CSV, one row per step.
pub fn trace_csv(result: &SimResult<f64>, n: usize) -> String {
    let v = result.est_err.as_ref().map(|e| e[0].len());
    let mut out = trace_header(n, v);
    out.push('\n');
    for k in 0..result.time.len() {
        let mut row = Vec::with_capacity(2 * n + 8);
        row.push(fmt_float(result.time[k]));
        let x = &result.states[k];
        for i in 0..x.len() {
            row.push(fmt_float(x[i]));
        }
        row.push(fmt_float(result.theta_c[k]));
        row.push(fmt_float(result.theta_t[k]));
        row.push(fmt_float(result.sigma[k]));
        row.push(fmt_float(result.u[k]));
        if let (Some(g_hat), Some(err)) = (&result.g_hat, &result.est_err) {
            row.push(fmt_float(g_hat[k][0]));
            row.push(fmt_float(g_hat[k][1]));
            for value in err[k].iter() {
                row.push(fmt_float(*value));
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Key = value summary block.
pub fn summary_text(
    scenario: &str,
    mode: &str,
    dt: f64,
    t_final: f64,
    summary: &SimSummary<f64>,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("scenario = {scenario}\n"));
    out.push_str(&format!("mode = {mode}\n"));
    out.push_str(&format!("steps = {}\n", summary.steps));
    out.push_str(&format!("dt = {}\n", fmt_float(dt)));
    out.push_str(&format!("t_final = {}\n", fmt_float(t_final)));
    out.push_str(&format!("max_abs_u = {}\n", fmt_float(summary.max_abs_u)));
    out.push_str(&format!("t_reach = {}\n", fmt_opt(summary.t_reach)));
    out.push_str(&format!("reach_held = {}\n", summary.reach_held));
    out.push_str(&format!(
        "max_abs_u_after_reach = {}\n",
        fmt_opt(summary.max_abs_u_after_reach)
    ));
    out.push_str(&format!("t_settle = {}\n", fmt_opt(summary.t_settle)));
    out.push_str(&format!(
        "theta_t_final = {}\n",
        fmt_float(summary.theta_t_final)
    ));
    out.push_str(&format!(
        "sigma_final = {}\n",
        fmt_float(summary.sigma_final)
    ));
    out
}
