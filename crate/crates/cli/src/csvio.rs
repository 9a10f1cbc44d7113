//! CSV and key-value emission. All floats are printed with 17 significant
//! digits so files round-trip bit-exactly; every file starts with `#`
//! comment lines echoing the configuration that produced it, followed by
//! the mandatory header row.

use std::io::Write;

use anyhow::Result;
use onefifth_core::theory::TheoryReport;
use onefifth_core::trace::Trace;

use crate::harness::{HittingTimeResult, ScalingRow};

/// 17 significant digits; `NaN` for quantities that do not exist.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Writes the `# key=value` preamble.
pub fn write_preamble<W: Write>(w: &mut W, config_echo: &[(String, String)]) -> Result<()> {
    for (key, value) in config_echo {
        writeln!(w, "# {key}={value}")?;
    }
    Ok(())
}

pub const TRACE_HEADER: &str = "t,evals,f,dist,f_mu,sigma,sigma_bar,potential,cond_sigma,accepted";

pub fn write_trace<W: Write>(
    w: &mut W,
    trace: &Trace,
    config_echo: &[(String, String)],
) -> Result<()> {
    write_preamble(w, config_echo)?;
    writeln!(w, "{TRACE_HEADER}")?;
    for row in &trace.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            row.t,
            row.evals,
            fmt_float(row.f),
            fmt_float(row.dist),
            fmt_float(row.f_mu),
            fmt_float(row.sigma),
            fmt_float(row.sigma_bar),
            row.potential.map(fmt_float).unwrap_or_default(),
            fmt_float(row.cond_sigma),
            row.accepted,
        )?;
    }
    Ok(())
}

pub const HITTING_HEADER: &str = "d,kappa_f,strategy,replicate,epsilon,metric,hit_evals,censored";

/// Hitting-time rows. Censored replicates keep an empty `hit_evals` field;
/// the preamble reports how many were censored so statistics downstream
/// cannot silently mix them with completed runs.
pub fn write_hitting<W: Write>(
    w: &mut W,
    d: usize,
    kappa_f: Option<f64>,
    strategy: &str,
    results: &[HittingTimeResult],
    config_echo: &[(String, String)],
) -> Result<()> {
    write_preamble(w, config_echo)?;
    let censored = results.iter().filter(|r| r.censored).count();
    writeln!(w, "# censored={censored}")?;
    writeln!(w, "{HITTING_HEADER}")?;
    for r in results {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            d,
            kappa_f.map(fmt_float).unwrap_or_default(),
            strategy,
            r.replicate,
            fmt_float(r.epsilon),
            r.metric.name(),
            r.hit_evals.map(|e| e.to_string()).unwrap_or_default(),
            r.censored,
        )?;
    }
    Ok(())
}

pub const SCALING_HEADER: &str = "d,mean_T,ratio,lower_bound";

pub fn write_scaling<W: Write>(
    w: &mut W,
    rows: &[ScalingRow],
    config_echo: &[(String, String)],
) -> Result<()> {
    write_preamble(w, config_echo)?;
    let censored: u32 = rows.iter().map(|r| r.censored).sum();
    writeln!(w, "# censored={censored}")?;
    writeln!(w, "{SCALING_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.d,
            fmt_float(r.mean_t),
            fmt_float(r.ratio),
            fmt_float(r.lower_bound),
        )?;
    }
    Ok(())
}

/// Best-so-far curves: one step function per replicate, or an aggregated one.
pub fn write_curve<W: Write>(
    w: &mut W,
    points: &[(u64, f64)],
    replicate: Option<u32>,
    config_echo: &[(String, String)],
) -> Result<()> {
    write_preamble(w, config_echo)?;
    match replicate {
        Some(rep) => {
            writeln!(w, "evals,f,replicate")?;
            for (evals, f) in points {
                writeln!(w, "{},{},{}", evals, fmt_float(*f), rep)?;
            }
        }
        None => {
            writeln!(w, "evals,f")?;
            for (evals, f) in points {
                writeln!(w, "{},{}", evals, fmt_float(*f))?;
            }
        }
    }
    Ok(())
}

/// Multi-replicate curve file: `evals,f,replicate` rows sorted by
/// (replicate, evals).
pub fn write_curves<W: Write>(
    w: &mut W,
    curves: &[Vec<(u64, f64)>],
    config_echo: &[(String, String)],
) -> Result<()> {
    write_preamble(w, config_echo)?;
    writeln!(w, "evals,f,replicate")?;
    for (rep, curve) in curves.iter().enumerate() {
        for (evals, f) in curve {
            writeln!(w, "{},{},{}", evals, fmt_float(*f), rep)?;
        }
    }
    Ok(())
}

/// The flat `key = value` text block of a theory report.
pub fn render_report_text(report: &TheoryReport) -> String {
    let mut out = String::new();
    let width = report
        .entries
        .iter()
        .map(|e| e.quantity.len())
        .max()
        .unwrap_or(0);
    for e in &report.entries {
        let se = e
            .std_error
            .map(|s| format!("  (std error {})", fmt_float(s)))
            .unwrap_or_default();
        out.push_str(&format!(
            "{:width$} = {}{}\n",
            e.quantity,
            fmt_float(e.value),
            se,
            width = width
        ));
    }
    out
}

pub const REPORT_HEADER: &str = "quantity,value,std_error,note";

/// CSV form of a theory report: `quantity,value,std_error,note`.
pub fn write_report_csv<W: Write>(
    w: &mut W,
    report: &TheoryReport,
    config_echo: &[(String, String)],
) -> Result<()> {
    write_preamble(w, config_echo)?;
    writeln!(w, "{REPORT_HEADER}")?;
    for e in &report.entries {
        writeln!(
            w,
            "{},{},{},\"{}\"",
            e.quantity,
            fmt_float(e.value),
            e.std_error.map(fmt_float).unwrap_or_default(),
            e.note,
        )?;
    }
    Ok(())
}
