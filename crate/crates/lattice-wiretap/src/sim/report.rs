//! Report generation: Wilson intervals, C-style `%.10g` numeric formatting,
//! and the CSV / plot-data writers.

use thiserror::Error;

use super::config::AttackKind;
use super::run::{Summary, TrialRecord};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no records to report")]
    EmptyInput,
    #[error("records csv line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

const WILSON_Z95: f64 = 1.959963984540054;

/// Wilson 95% score interval for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0, "interval needs at least one trial");
    let z = WILSON_Z95;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Exact endpoints at the boundaries; the algebra only reaches them up
    // to rounding error.
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// C-style `%.10g` formatting: 10 significant digits, scientific notation
/// outside [1e-4, 1e10), trailing zeros stripped.
pub fn format_g(x: f64) -> String {
    format_g_sig(x, 10)
}

fn format_g_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    // Exponent of the value after rounding to `sig` significant digits.
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp_part) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp_part.parse().expect("numeric exponent");
    if exp < -4 || exp >= sig as i32 {
        let mantissa = strip_trailing_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        if fixed.contains('.') {
            strip_trailing_zeros(&fixed).to_string()
        } else {
            fixed
        }
    }
}

fn strip_trailing_zeros(s: &str) -> &str {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.')
}

/// Per-trial records as CSV; enabled attacks get one correctness column
/// each. Wall time is intentionally not serialized so identical seeds give
/// byte-identical files.
pub fn records_csv(records: &[TrialRecord], attacks: &[AttackKind]) -> Result<String, ReportError> {
    if records.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let mut out = String::from("trial_id,snr,bob_correct");
    for a in attacks {
        out.push_str(&format!(",eve_{}_correct", a.label()));
    }
    out.push_str(",unitarity_dev,cov_offdiag_ratio,resample_count\n");
    for rec in records {
        out.push_str(&format!("{},{}", rec.trial_id, format_g(rec.snr)));
        out.push(',');
        out.push(if rec.bob_correct { '1' } else { '0' });
        for a in attacks {
            let correct = rec.eve_correct.get(a).copied().unwrap_or(false);
            out.push(',');
            out.push(if correct { '1' } else { '0' });
        }
        out.push_str(&format!(
            ",{},{},{}\n",
            format_g(rec.unitarity_dev),
            format_g(rec.cov_offdiag_ratio),
            rec.resample_count
        ));
    }
    Ok(out)
}

/// Parses a records CSV written by [`records_csv`] back into trial records
/// (wall time is not persisted and comes back as zero).
pub fn parse_records_csv(
    text: &str,
    attacks: &[AttackKind],
) -> Result<Vec<TrialRecord>, ReportError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ReportError::EmptyInput)?;
    let mut expected = String::from("trial_id,snr,bob_correct");
    for a in attacks {
        expected.push_str(&format!(",eve_{}_correct", a.label()));
    }
    expected.push_str(",unitarity_dev,cov_offdiag_ratio,resample_count");
    if header != expected {
        return Err(ReportError::Malformed {
            line: 1,
            reason: format!("header mismatch: expected `{expected}`, got `{header}`"),
        });
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 + attacks.len() {
            return Err(ReportError::Malformed {
                line: idx + 1,
                reason: format!("expected {} fields, got {}", 6 + attacks.len(), fields.len()),
            });
        }
        let bad = |reason: String| ReportError::Malformed { line: idx + 1, reason };
        let parse_f64 = |s: &str| {
            if s == "inf" {
                Ok(f64::INFINITY)
            } else {
                s.parse::<f64>().map_err(|e| bad(format!("bad number `{s}`: {e}")))
            }
        };
        let parse_bool = |s: &str| match s {
            "1" => Ok(true),
            "0" => Ok(false),
            other => Err(bad(format!("bad flag `{other}`"))),
        };
        let mut eve_correct = std::collections::BTreeMap::new();
        for (k, &a) in attacks.iter().enumerate() {
            eve_correct.insert(a, parse_bool(fields[3 + k])?);
        }
        records.push(TrialRecord {
            trial_id: fields[0].parse().map_err(|e| bad(format!("bad trial_id: {e}")))?,
            snr: parse_f64(fields[1])?,
            bob_correct: parse_bool(fields[2])?,
            eve_correct,
            unitarity_dev: parse_f64(fields[3 + attacks.len()])?,
            cov_offdiag_ratio: parse_f64(fields[4 + attacks.len()])?,
            resample_count: fields[5 + attacks.len()]
                .parse()
                .map_err(|e| bad(format!("bad resample_count: {e}")))?,
            wall_time: std::time::Duration::ZERO,
        });
    }
    if records.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    Ok(records)
}

/// Aggregate sweep report: `snr,party,attack,ser,ci_lo,ci_hi,trials`.
pub fn report_csv(summary: &Summary) -> Result<String, ReportError> {
    if summary.points.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let mut out = String::from("snr,party,attack,ser,ci_lo,ci_hi,trials\n");
    for point in &summary.points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_g(point.snr),
            point.party,
            point.attack.map(|a| a.label()).unwrap_or("-"),
            format_g(point.ser),
            format_g(point.ci_lo),
            format_g(point.ci_hi),
            point.trials
        ));
    }
    Ok(out)
}

/// Gnuplot-style plot data: one block per party/attack series.
pub fn plotdata(summary: &Summary) -> Result<String, ReportError> {
    if summary.points.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let mut series: Vec<(String, Vec<&super::run::SummaryPoint>)> = Vec::new();
    for point in &summary.points {
        let name = match point.attack {
            Some(a) => format!("{}/{}", point.party, a.label()),
            None => point.party.clone(),
        };
        match series.iter_mut().find(|(n, _)| *n == name) {
            Some((_, rows)) => rows.push(point),
            None => series.push((name, vec![point])),
        }
    }
    let mut out = String::new();
    for (name, rows) in series {
        out.push_str(&format!("# series: {name}\n"));
        out.push_str("# snr ser ci_lo ci_hi\n");
        for p in rows {
            out.push_str(&format!(
                "{} {} {} {}\n",
                format_g(p.snr),
                format_g(p.ser),
                format_g(p.ci_lo),
                format_g(p.ci_hi)
            ));
        }
        out.push('\n');
    }
    Ok(out)
}
