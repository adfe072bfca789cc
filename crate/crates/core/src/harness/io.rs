use std::io::{self, Write};

use super::ComparedRun;
use crate::error::{Error, Result};
use crate::solvers::{BoundKind, IterationRecord, SolverTrace};

pub const CSV_HEADER: &str = "k,f_plus,v,gap,g_classical,grad_norm,elapsed_s";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv_trace(trace: &SolverTrace, w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in &trace.records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.k,
            format_float(r.f_plus),
            format_float(r.v),
            format_float(r.gap),
            format_float(r.g_classical),
            format_float(r.grad_norm),
            format_float(r.elapsed)
        )?;
    }
    Ok(())
}

pub fn write_json_trace(trace: &SolverTrace, w: &mut dyn Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, trace)?;
    writeln!(w)
}

/// Reads back a file written by [`write_csv_trace`].
pub fn parse_csv_trace(text: &str) -> Result<Vec<IterationRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header {CSV_HEADER}"),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: i + 1, message };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(err(format!("expected 7 fields, got {}", fields.len())));
        }
        let k = fields[0]
            .parse()
            .map_err(|_| err(format!("bad iteration {:?}", fields[0])))?;
        let mut nums = [0.0; 6];
        for (slot, f) in nums.iter_mut().zip(&fields[1..]) {
            *slot = f.parse().map_err(|_| err(format!("bad number {f:?}")))?;
        }
        let [f_plus, v, gap, g_classical, grad_norm, elapsed] = nums;
        out.push(IterationRecord {
            k,
            f_plus,
            v,
            gap,
            g_classical,
            grad_norm,
            elapsed,
            center: None,
            iterate: None,
            squared_radius: None,
        });
    }
    Ok(out)
}

/// `(G_k - g_k) / G_k`, zero when `G_k` is.
pub fn relative_gap(r: &IterationRecord) -> f64 {
    if r.g_classical == 0.0 {
        0.0
    } else {
        (r.g_classical - r.gap) / r.g_classical
    }
}

/// Wide table keyed by `k`: one gap column per run, then a relative-gap
/// column for each run whose `v` is a lower bound. Finished runs leave
/// their cells empty.
pub fn write_compare_csv(runs: &[ComparedRun], w: &mut dyn Write) -> io::Result<()> {
    let with_rel: Vec<&ComparedRun> = runs.iter().filter(|r| r.trace.bound == BoundKind::LowerBound).collect();
    let mut header = vec!["k".to_string()];
    header.extend(runs.iter().map(|r| format!("{}_gap", r.label)));
    header.extend(with_rel.iter().map(|r| format!("{}_relgap", r.label)));
    writeln!(w, "{}", header.join(","))?;
    let rows = runs.iter().map(|r| r.trace.records.len()).max().unwrap_or(0);
    for k in 0..rows {
        let mut cells = vec![k.to_string()];
        cells.extend(runs.iter().map(|r| {
            r.trace
                .records
                .get(k)
                .map_or(String::new(), |rec| format_float(rec.gap))
        }));
        cells.extend(with_rel.iter().map(|r| {
            r.trace
                .records
                .get(k)
                .map_or(String::new(), |rec| format_float(relative_gap(rec)))
        }));
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(k: usize, f_plus: f64, v: f64, g_classical: f64) -> IterationRecord {
        IterationRecord {
            k,
            f_plus,
            v,
            gap: f_plus - v,
            g_classical,
            grad_norm: (2.0 * g_classical).sqrt(),
            elapsed: 0.0,
            center: None,
            iterate: None,
            squared_radius: None,
        }
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let mut t = SolverTrace::new("oqa", BoundKind::LowerBound);
        t.records = vec![
            record(0, 1.0 / 3.0, -2.0f64.sqrt(), 0.1),
            record(1, 1e-300, -1e300, 5e-324),
            record(2, 0.0, -0.0, 123456789.12345679),
        ];
        let mut buf = Vec::new();
        write_csv_trace(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,f_plus,v,gap,g_classical,grad_norm,elapsed_s\n"));
        assert!(text.contains("3.3333333333333331e-1"));
        let back = parse_csv_trace(&text).unwrap();
        assert_eq!(back, t.records);
    }

    #[test]
    fn csv_parse_errors() {
        assert!(parse_csv_trace("k,f\n").is_err());
        let e = parse_csv_trace(&format!("{CSV_HEADER}\n0,1,2\n")).unwrap_err();
        assert_eq!(
            e,
            Error::Parse {
                line: 2,
                message: "expected 7 fields, got 3".into()
            }
        );
        assert!(parse_csv_trace(&format!("{CSV_HEADER}\n0,1,2,3,4,5,x\n")).is_err());
    }

    #[test]
    fn compare_table_layout() {
        let mut a = SolverTrace::new("oqa", BoundKind::LowerBound);
        a.records = vec![record(0, 2.0, 0.0, 4.0), record(1, 1.0, 0.5, 1.0)];
        let mut b = SolverTrace::new("nesterov", BoundKind::EstimateSequence);
        b.records = vec![record(0, 2.0, 3.0, 4.0)];
        let runs = [
            ComparedRun {
                label: "oqa".into(),
                trace: a,
                error: None,
            },
            ComparedRun {
                label: "nesterov".into(),
                trace: b,
                error: None,
            },
        ];
        let mut buf = Vec::new();
        write_compare_csv(&runs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,oqa_gap,nesterov_gap,oqa_relgap");
        assert_eq!(
            lines[1],
            "0,2.0000000000000000e0,-1.0000000000000000e0,5.0000000000000000e-1"
        );
        assert_eq!(lines[2], "1,5.0000000000000000e-1,,5.0000000000000000e-1");
    }
}
