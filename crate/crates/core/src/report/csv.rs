use std::path::Path;

use crate::config::{Modality, Style};
use crate::error::{Error, Result};
use crate::experiment::{ConditionSummary, PhiMatrix, ResultSet, SampleRecord};

pub const SAMPLES_HEADER: &str =
    "domain,modality,style,sample_id,i_m,load,ce,duration_s,msg_entropy_bits,q_true,trust,tce,degenerate";
pub const SUMMARY_HEADER: &str =
    "modality,style,mean_ce,var_ce,mean_tce,var_tce,pooled_i_m,mean_load,phi_default";

/// Canonical decimal with 9 significant digits, trailing zeros removed.
/// Fixed notation for exponents in [-5, 9), scientific otherwise.
pub fn fmt_sig9(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn samples_csv(records: &[SampleRecord]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 160);
    out.push_str(SAMPLES_HEADER);
    out.push('\n');
    for r in records {
        let fields = [
            r.domain.clone(),
            r.modality.to_string(),
            r.style.to_string(),
            r.sample_id.to_string(),
            fmt_sig9(r.i_m),
            fmt_sig9(r.load),
            fmt_sig9(r.ce),
            fmt_sig9(r.duration_s),
            fmt_sig9(r.message_entropy_bits),
            fmt_sig9(r.q_true),
            fmt_sig9(r.trust),
            fmt_sig9(r.tce_abs),
            r.degenerate.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_samples_csv(rs: &ResultSet, path: &Path) -> Result<()> {
    write_file(path, &samples_csv(&rs.records))
}

fn bad_line(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parses a samples CSV as written by [`write_samples_csv`].
pub fn parse_samples_csv(path: &Path, text: &str) -> Result<Vec<SampleRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SAMPLES_HEADER => {}
        _ => return Err(bad_line(path, 1, "unexpected samples header")),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i as u64 + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 13 {
            return Err(bad_line(path, row, format!("expected 13 fields, found {}", cells.len())));
        }
        let num = |col: usize| -> Result<f64> {
            cells[col].parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row,
                column: col + 1,
                cell: cells[col].to_string(),
            })
        };
        let modality: Modality = cells[1].parse().map_err(|_| bad_line(path, row, "bad modality"))?;
        let style: Style = cells[2].parse().map_err(|_| bad_line(path, row, "bad style"))?;
        let sample_id = cells[3].parse::<u64>().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            row,
            column: 4,
            cell: cells[3].to_string(),
        })?;
        let degenerate = match cells[12] {
            "true" => true,
            "false" => false,
            _ => return Err(bad_line(path, row, "degenerate must be true or false")),
        };
        out.push(SampleRecord {
            domain: cells[0].to_string(),
            modality,
            style,
            sample_id,
            i_m: num(4)?,
            load: num(5)?,
            ce: num(6)?,
            duration_s: num(7)?,
            message_entropy_bits: num(8)?,
            q_true: num(9)?,
            trust: num(10)?,
            tce_abs: num(11)?,
            degenerate,
        });
    }
    Ok(out)
}

pub fn read_samples_csv(path: &Path) -> Result<Vec<SampleRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_samples_csv(path, &text)
}

pub fn summary_csv(summaries: &[ConditionSummary]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in summaries {
        let fields = [
            s.modality.to_string(),
            s.style.to_string(),
            fmt_sig9(s.mean_ce),
            fmt_sig9(s.var_ce),
            fmt_sig9(s.mean_tce),
            fmt_sig9(s.var_tce),
            fmt_sig9(s.pooled_i_m),
            fmt_sig9(s.mean_load),
            fmt_sig9(s.phi_default),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_summary_csv(summaries: &[ConditionSummary], path: &Path) -> Result<()> {
    write_file(path, &summary_csv(summaries))
}

/// Φ at the configured weights as a modality × style grid.
pub fn phi_grid_csv(summaries: &[ConditionSummary]) -> String {
    let mut out = String::from("modality");
    for s in Style::ALL {
        out.push(',');
        out.push_str(s.as_str());
    }
    out.push('\n');
    for m in Modality::ALL {
        out.push_str(m.as_str());
        for s in Style::ALL {
            out.push(',');
            let v = summaries
                .iter()
                .find(|x| x.modality == m && x.style == s)
                .map(|x| x.phi_default)
                .unwrap_or(f64::NAN);
            out.push_str(&fmt_sig9(v));
        }
        out.push('\n');
    }
    out
}

pub fn write_phi_csv(summaries: &[ConditionSummary], path: &Path) -> Result<()> {
    write_file(path, &phi_grid_csv(summaries))
}

/// `lambda2` followed by one column per condition.
pub fn sweep_csv(m: &PhiMatrix) -> String {
    let mut out = String::from("lambda2");
    for c in &m.conditions {
        out.push(',');
        out.push_str(&c.key());
    }
    out.push('\n');
    for (l2, row) in m.lambda2_values.iter().zip(&m.phi) {
        out.push_str(&fmt_sig9(*l2));
        for v in row {
            out.push(',');
            out.push_str(&fmt_sig9(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_sweep_csv(m: &PhiMatrix, path: &Path) -> Result<()> {
    write_file(path, &sweep_csv(m))
}

pub(crate) fn write_text(path: &Path, contents: &str) -> Result<()> {
    write_file(path, contents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(-0.0), "0");
        assert_eq!(fmt_sig9(1.0), "1");
        assert_eq!(fmt_sig9(0.5), "0.5");
        assert_eq!(fmt_sig9(120.0 / 4.17), "28.7769784");
        assert_eq!(fmt_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig9(-2.0 / 3.0), "-0.666666667");
        assert_eq!(fmt_sig9(9.9999999999), "10");
        assert_eq!(fmt_sig9(1.5e-7), "1.5e-7");
        assert_eq!(fmt_sig9(123456789012.0), "1.23456789e11");
    }

    proptest! {
        #[test]
        fn sig9_is_canonical(x in -1e6f64..1e6) {
            let s = fmt_sig9(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(fmt_sig9(back), s);
            if x != 0.0 {
                prop_assert!(((back - x) / x).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn empty_records_give_header_only() {
        assert_eq!(samples_csv(&[]), format!("{SAMPLES_HEADER}\n"));
    }

    #[test]
    fn bad_header_rejected() {
        let err = parse_samples_csv(Path::new("x.csv"), "a,b\n").unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }));
    }
}
