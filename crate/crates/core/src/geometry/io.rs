//! Reader and writer for the `blade.def` text format.
//!
//! ```text
//! # comment
//! r0 = 0.1
//! R = 0.5
//! n_blades = 6
//!
//! [section]
//! radius_fraction = 0.2
//! pitch = 1.0
//! chord = 0.225
//! rake = 0          # optional, default 0
//! skew = 0          # optional, default 0 (radians)
//! chord_fraction,camber,thickness
//! 0,0,0
//! 0.5,0.0045,0.0121
//! 1,0,0
//! ```
//!
//! Header keys come before the first `[section]`; every section carries its
//! scalar keys followed by a CSV table whose header line is exactly
//! `chord_fraction,camber,thickness`. Blank lines and `#` comments are
//! ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::blade::{BladeDefinition, SectionDefinition};
use crate::error::{Error, Result};

const TABLE_HEADER: &str = "chord_fraction,camber,thickness";

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("blade definition line {line}: {msg}"))
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| parse_err(line, format!("{key}: cannot parse '{v}' as a number")))
}

#[derive(Default)]
struct PartialSection {
    radius_fraction: Option<f64>,
    pitch: Option<f64>,
    chord: Option<f64>,
    rake: f64,
    skew: f64,
    rows: Vec<(f64, f64, f64)>,
    in_table: bool,
    start_line: usize,
}

impl PartialSection {
    fn finish(self) -> Result<SectionDefinition> {
        let line = self.start_line;
        let need = |v: Option<f64>, k: &str| {
            v.ok_or_else(|| parse_err(line, format!("section missing '{k}'")))
        };
        if self.rows.is_empty() {
            return Err(parse_err(line, "section has no chord_fraction table"));
        }
        Ok(SectionDefinition {
            radius_fraction: need(self.radius_fraction, "radius_fraction")?,
            pitch: need(self.pitch, "pitch")?,
            chord: need(self.chord, "chord")?,
            camber: self.rows.iter().map(|r| (r.0, r.1)).collect(),
            thickness: self.rows.iter().map(|r| (r.0, r.2)).collect(),
            rake: self.rake,
            skew: self.skew,
        })
    }
}

/// Parses and validates a blade definition.
pub fn parse_blade(text: &str) -> Result<BladeDefinition> {
    let (mut r0, mut big_r, mut n_blades) = (None, None, None);
    let mut sections = Vec::new();
    let mut current: Option<PartialSection> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "[section]" {
            if let Some(s) = current.take() {
                sections.push(s.finish()?);
            }
            current = Some(PartialSection {
                start_line: line_no,
                ..Default::default()
            });
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            let (k, v) = (k.trim(), v.trim());
            match current.as_mut() {
                None => match k {
                    "r0" => r0 = Some(parse_f64(line_no, k, v)?),
                    "R" => big_r = Some(parse_f64(line_no, k, v)?),
                    "n_blades" => {
                        n_blades = Some(v.parse::<usize>().map_err(|_| {
                            parse_err(line_no, format!("n_blades: '{v}' is not a count"))
                        })?)
                    }
                    _ => return Err(parse_err(line_no, format!("unknown header key '{k}'"))),
                },
                Some(s) => {
                    if s.in_table {
                        return Err(parse_err(line_no, "key after the section table"));
                    }
                    let val = parse_f64(line_no, k, v)?;
                    match k {
                        "radius_fraction" => s.radius_fraction = Some(val),
                        "pitch" => s.pitch = Some(val),
                        "chord" => s.chord = Some(val),
                        "rake" => s.rake = val,
                        "skew" => s.skew = val,
                        _ => return Err(parse_err(line_no, format!("unknown section key '{k}'"))),
                    }
                }
            }
            continue;
        }
        let s = current
            .as_mut()
            .ok_or_else(|| parse_err(line_no, format!("unexpected line '{line}'")))?;
        if line.replace(' ', "") == TABLE_HEADER {
            s.in_table = true;
            continue;
        }
        if !s.in_table {
            return Err(parse_err(
                line_no,
                format!("expected '{TABLE_HEADER}' header"),
            ));
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(parse_err(
                line_no,
                format!("expected 3 columns, got {}", cols.len()),
            ));
        }
        s.rows.push((
            parse_f64(line_no, "chord_fraction", cols[0])?,
            parse_f64(line_no, "camber", cols[1])?,
            parse_f64(line_no, "thickness", cols[2])?,
        ));
    }
    if let Some(s) = current.take() {
        sections.push(s.finish()?);
    }
    let blade = BladeDefinition {
        hub_radius: r0.ok_or_else(|| Error::Format("blade definition missing 'r0'".into()))?,
        tip_radius: big_r.ok_or_else(|| Error::Format("blade definition missing 'R'".into()))?,
        n_blades: n_blades.unwrap_or(6),
        sections,
    };
    blade.validate()?;
    Ok(blade)
}

/// Serializes a blade; floats use the shortest exact representation so the
/// text round-trips bit for bit.
pub fn format_blade(blade: &BladeDefinition) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "r0 = {}", blade.hub_radius);
    let _ = writeln!(out, "R = {}", blade.tip_radius);
    let _ = writeln!(out, "n_blades = {}", blade.n_blades);
    for s in &blade.sections {
        let _ = writeln!(out, "\n[section]");
        let _ = writeln!(out, "radius_fraction = {}", s.radius_fraction);
        let _ = writeln!(out, "pitch = {}", s.pitch);
        let _ = writeln!(out, "chord = {}", s.chord);
        let _ = writeln!(out, "rake = {}", s.rake);
        let _ = writeln!(out, "skew = {}", s.skew);
        let _ = writeln!(out, "{TABLE_HEADER}");
        // Camber and thickness share stations in this format.
        for ((u, c), (_, t)) in s.camber.iter().zip(&s.thickness) {
            let _ = writeln!(out, "{u},{c},{t}");
        }
    }
    out
}

pub fn read_blade(path: &Path) -> Result<BladeDefinition> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_blade(&text)
}

pub fn write_blade(path: &Path, blade: &BladeDefinition) -> Result<()> {
    if blade.sections.iter().any(|s| {
        s.camber.len() != s.thickness.len()
            || s.camber.iter().zip(&s.thickness).any(|(a, b)| a.0 != b.0)
    }) {
        return Err(Error::InvalidInput(
            "blade.def requires camber and thickness on the same chord stations".into(),
        ));
    }
    std::fs::write(path, format_blade(blade)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let b = BladeDefinition::synthetic_baseline();
        let text = format_blade(&b);
        assert_eq!(parse_blade(&text).unwrap(), b);
        assert_eq!(format_blade(&parse_blade(&text).unwrap()), text);
    }

    #[test]
    fn comments_and_defaults() {
        let mut text = String::from("# synthetic\n");
        text.push_str(
            &format_blade(&BladeDefinition::synthetic_baseline()).replace("n_blades = 6\n", ""),
        );
        let text = text.replace("rake = 0\n", "");
        let b = parse_blade(&text).unwrap();
        assert_eq!(b.n_blades, 6);
        assert!(b.sections.iter().all(|s| s.rake == 0.0));
    }

    #[test]
    fn schema_violations_are_reported() {
        let good = format_blade(&BladeDefinition::synthetic_baseline());
        let cases = [
            good.replace("r0 = 0.1\n", ""),
            good.replacen("pitch = 1\n", "pitch = abc\n", 1),
            good.replacen("chord_fraction,camber,thickness\n", "", 1),
            good.replacen("[section]", "[section]\nbogus = 1", 1),
            good.replacen("0.5,", "0.5,1,2,", 1),
        ];
        for (i, c) in cases.iter().enumerate() {
            assert!(parse_blade(c).is_err(), "case {i} parsed");
        }
    }
}
