use std::fmt::Write as _;

use super::{Scheme, SimResult};

/// Header of the long-form statistics table.
pub const CSV_HEADER: &str =
    "experiment,point,d_r_wavelengths,kappa,users,ris_elements,bs_antennas,layout,scheme,user,statistic,unit,value";

struct Row<'a> {
    prefix: &'a str,
    scheme: &'a str,
    user: String,
}

impl Row<'_> {
    fn push(&self, out: &mut String, statistic: &str, unit: &str, value: f64) {
        let _ = writeln!(out, "{},{},{},{},{},{}", self.prefix, self.scheme, self.user, statistic, unit, value);
    }
}

/// Long-form CSV, one row per grid point × scheme × user × statistic.
///
/// Rows appear in a fixed order and floats use the shortest round-trip
/// formatting, so equal results give byte-identical files.
pub fn to_csv(result: &SimResult) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in &result.points {
        let cfg = &p.config;
        let prefix = format!(
            "{},{},{},{},{},{},{},{}",
            result.name,
            p.index,
            cfg.ris_spacing,
            p.rician_factor,
            cfg.users(),
            cfg.n(),
            cfg.m(),
            cfg.layout
        );
        if let Some(analytic) = &p.analytic {
            for (k, b) in analytic.iter().enumerate() {
                let row = Row {
                    prefix: &prefix,
                    scheme: "analytic",
                    user: k.to_string(),
                };
                let scale = result.symbol_energy / cfg.noise_variance;
                row.push(&mut out, "snr_mean", "linear", b.snr(result.symbol_energy, cfg.noise_variance));
                row.push(&mut out, "rate_bound", "bits/s/Hz", crate::analysis::rate_upper_bound(b.total() * scale));
                row.push(&mut out, "term_direct", "linear", b.direct * scale);
                row.push(&mut out, "term_cross", "linear", b.cross * scale);
                row.push(&mut out, "term_designed", "linear", b.designed * scale);
                row.push(&mut out, "term_uncontrolled", "linear", b.uncontrolled * scale);
            }
        }
        for c in &p.cells {
            let row = Row {
                prefix: &prefix,
                scheme: c.scheme.label(),
                user: c.user.to_string(),
            };
            push_summary(&mut out, &row, "snr", "linear", &c.snr);
            row.push(&mut out, "rate_mean", "bits/s/Hz", c.rate.mean);
            row.push(&mut out, "rate_var", "(bits/s/Hz)^2", c.rate.variance);
            row.push(&mut out, "system_rate_mean", "bits/s/Hz", c.system_rate_mean);
            row.push(&mut out, "jensen_bound", "bits/s/Hz", c.jensen_bound);
            if let Some(t) = c.term_means {
                let scale = result.symbol_energy / cfg.noise_variance;
                for (name, v) in ["term_direct", "term_cross", "term_designed", "term_uncontrolled"].iter().zip(t) {
                    row.push(&mut out, name, "linear", v * scale);
                }
            }
            row.push(&mut out, "flagged_replicates", "count", c.flagged as f64);
        }
        for (scheme, s) in &p.pooled {
            let row = Row {
                prefix: &prefix,
                scheme: scheme.label(),
                user: "all".to_string(),
            };
            push_summary(&mut out, &row, "snr", "linear", s);
            if let Some((_, j)) = p.fairness.iter().find(|(f, _)| f == scheme) {
                row.push(&mut out, "jain_fairness", "1", *j);
            }
        }
        for (label, count) in [("sd", p.complexity_sd), ("tmse", p.complexity_tmse)] {
            let row = Row {
                prefix: &prefix,
                scheme: label,
                user: "all".to_string(),
            };
            row.push(&mut out, "complexity", "complex_multiplies", count as f64);
        }
    }
    out
}

fn push_summary(out: &mut String, row: &Row<'_>, name: &str, unit: &str, s: &super::Summary) {
    row.push(out, &format!("{name}_mean"), unit, s.mean);
    row.push(out, &format!("{name}_var"), &format!("{unit}^2"), s.variance);
    row.push(out, &format!("{name}_min"), unit, s.min);
    row.push(out, &format!("{name}_max"), unit, s.max);
    for (p, v) in s.quantiles.iter() {
        row.push(out, &format!("{name}_q{p:02}"), unit, v);
    }
}

/// Raw per-replicate SNR samples, one row per replicate × cell. Empty
/// (header only) unless the experiment kept samples.
pub fn samples_csv(result: &SimResult) -> String {
    let mut out = String::from("experiment,point,scheme,user,replicate,snr_linear\n");
    for p in &result.points {
        for c in &p.cells {
            if let Some(samples) = &c.samples {
                for (r, v) in samples.iter().enumerate() {
                    let _ = writeln!(out, "{},{},{},{},{},{}", result.name, p.index, c.scheme, c.user, r, v);
                }
            }
        }
    }
    out
}

/// Mean SNR of `scheme` averaged over users at one point.
pub fn mean_over_users(result: &SimResult, point: usize, scheme: Scheme) -> Option<f64> {
    let p = result.points.get(point)?;
    let cells: Vec<_> = p.cells.iter().filter(|c| c.scheme == scheme).collect();
    if cells.is_empty() {
        return None;
    }
    Some(cells.iter().map(|c| c.snr.mean).sum::<f64>() / cells.len() as f64)
}
