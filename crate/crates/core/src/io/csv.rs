//! Curve CSV (`angle_deg,voltage_v`) and the report CSVs written by the CLI.
//!
//! Curve files carry metadata as `# key: value` lines before the header and
//! write every number in shortest round-trip form, so write-then-read is
//! lossless. Report files (outlines, shapes, sweeps) use 9 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use super::{fmt_sig, read_text, write_text};
use crate::design::ScoredDesign;
use crate::error::{Error, Result};
use crate::shape::ChainShape;
use crate::sim::{ResponseCurve, Sample};

pub const CURVE_HEADER: &str = "angle_deg,voltage_v";

pub fn curve_csv(curve: &ResponseCurve) -> String {
    let mut out = String::new();
    for (k, v) in curve.metadata() {
        if k.is_empty() {
            writeln!(out, "# {v}").unwrap();
        } else {
            writeln!(out, "# {k}: {v}").unwrap();
        }
    }
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for s in curve.samples() {
        writeln!(out, "{},{}", s.angle_deg, s.voltage_v).unwrap();
    }
    out
}

pub fn parse_curve_csv(text: &str) -> Result<ResponseCurve> {
    let mut metadata = Vec::new();
    let mut samples: Vec<Sample> = Vec::new();
    let mut header_seen = false;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            match comment.split_once(": ") {
                Some((k, v)) if !k.is_empty() && !k.contains(' ') => metadata.push((k.to_owned(), v.to_owned())),
                _ => metadata.push((String::new(), comment.to_owned())),
            }
            continue;
        }
        if !header_seen {
            if line != CURVE_HEADER {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected header `{CURVE_HEADER}`, found `{line}`"),
                });
            }
            header_seen = true;
            continue;
        }
        let (a, v) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected two fields in `{line}`"),
        })?;
        let field = |s: &str, name: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("invalid {name} `{}`", s.trim()),
                })
        };
        let sample = Sample {
            angle_deg: field(a, "angle")?,
            voltage_v: field(v, "voltage")?,
        };
        if let Some(prev) = samples.last() {
            if !(sample.angle_deg > prev.angle_deg) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "angle {} not greater than previous {}",
                        sample.angle_deg, prev.angle_deg
                    ),
                });
            }
        }
        samples.push(sample);
        last_line = line_no;
    }
    if !header_seen {
        return Err(Error::Parse {
            line: last_line + 1,
            message: format!("missing header `{CURVE_HEADER}`"),
        });
    }
    ResponseCurve::new(samples, metadata)
}

pub fn write_curve_csv(curve: &ResponseCurve, path: &Path) -> Result<()> {
    write_text(path, &curve_csv(curve))
}

pub fn read_curve_csv(path: &Path) -> Result<ResponseCurve> {
    parse_curve_csv(&read_text(path)?)
}

/// `x_mm,y_mm` polyline.
pub fn xy_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("x_mm,y_mm\n");
    for &(x, y) in points {
        writeln!(out, "{},{}", fmt_sig(x), fmt_sig(y)).unwrap();
    }
    out
}

/// Backbone polyline with the joint angles and tip pose as comments.
pub fn shape_csv(shape: &ChainShape) -> String {
    let angles: Vec<String> = shape.angles.iter().map(|a| fmt_sig(*a)).collect();
    let tip = shape.tip_pose;
    format!(
        "# angles_deg: {}\n# tip: {} {} {}\n{}",
        angles.join(" "),
        fmt_sig(tip.x),
        fmt_sig(tip.y),
        fmt_sig(tip.heading_deg),
        xy_csv(&shape.joint_positions)
    )
}

pub fn sweep_csv(results: &[ScoredDesign]) -> String {
    let mut out = String::from("t_min,t_max,alpha_deg,reflectance,score\n");
    for r in results {
        let d = r.design;
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_sig(d.t_min_mm),
            fmt_sig(d.t_max_mm),
            fmt_sig(d.alpha_deg),
            fmt_sig(d.reflectance),
            fmt_sig(r.score)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_only_is_empty_curve() {
        assert!(matches!(
            parse_curve_csv("angle_deg,voltage_v\n"),
            Err(Error::EmptyCurve)
        ));
    }

    #[test]
    fn bad_row_reports_line() {
        let err = parse_curve_csv("# source: measured\nangle_deg,voltage_v\n0,1.0\n60,abc\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        assert!(err.to_string().contains("abc"));
    }

    #[test]
    fn non_monotone_angles_rejected() {
        let err = parse_curve_csv("angle_deg,voltage_v\n0,1\n5,2\n5,3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }));
    }

    #[test]
    fn missing_or_wrong_header() {
        assert!(matches!(parse_curve_csv(""), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_curve_csv("q,v\n0,1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn metadata_preserved() {
        let text = "# source: measured\n# rig log from bench 2\nangle_deg,voltage_v\n0,0.5\n1,0.52\n";
        let c = parse_curve_csv(text).unwrap();
        assert_eq!(c.meta("source"), Some("measured"));
        assert_eq!(curve_csv(&c), text);
    }

    proptest! {
        #[test]
        fn round_trip_is_lossless(steps in proptest::collection::vec((1e-6f64..10.0, -1e3f64..1e3), 1..50)) {
            let mut q = -5.0;
            let pairs: Vec<(f64, f64)> = steps.iter().map(|&(dq, v)| { q += dq; (q, v) }).collect();
            let mut c = ResponseCurve::from_pairs(pairs).unwrap();
            c.set_meta("profile", "demo");
            let back = parse_curve_csv(&curve_csv(&c)).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
