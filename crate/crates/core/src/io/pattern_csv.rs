//! Pattern-grid CSV: optional `# element_position=x,y,z` comment, a fixed
//! header, then one θ-major row per sample with angles in degrees to two
//! decimals. Values use the shortest round-trip representation.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::patterns::{AngleGrid, PatternGrid};

pub const PATTERN_HEADER: &str = "theta_deg,phi_deg,re_etheta,im_etheta,re_ephi,im_ephi";

pub fn format_pattern_csv(p: &PatternGrid) -> String {
    let g = p.grid();
    let [x, y, z] = p.position();
    let mut out = String::new();
    let _ = writeln!(out, "# element_position={x:e},{y:e},{z:e}");
    let _ = writeln!(out, "{PATTERN_HEADER}");
    for (i, th) in g.theta().iter().enumerate() {
        for (j, ph) in g.phi().iter().enumerate() {
            let k = i * g.n_phi() + j;
            let (et, ep) = (p.e_theta()[k], p.e_phi()[k]);
            let _ = writeln!(
                out,
                "{:.2},{:.2},{:e},{:e},{:e},{:e}",
                th.to_degrees(),
                ph.to_degrees(),
                et.re,
                et.im,
                ep.re,
                ep.im
            );
        }
    }
    out
}

pub fn save_pattern_grid(p: &PatternGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_pattern_csv(p)).map_err(|e| Error::io(path, e))
}

pub fn load_pattern_grid(path: impl AsRef<Path>) -> Result<PatternGrid> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pattern_csv(&text)
}

fn parse_position(rest: &str, line: usize) -> Result<Vec3> {
    let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Parse {
            line,
            message: "element_position needs three components".into(),
        });
    }
    let mut v = [0.0f64; 3];
    for (slot, s) in v.iter_mut().zip(parts) {
        *slot = s.parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad position component '{s}'"),
        })?;
    }
    if !v.iter().all(|c| c.is_finite()) {
        return Err(Error::Data {
            line,
            message: "non-finite element position".into(),
        });
    }
    Ok(v)
}

pub fn parse_pattern_csv(text: &str) -> Result<PatternGrid> {
    let mut position = [0.0; 3];
    let mut header_seen = false;
    let mut rows: Vec<(usize, [f64; 6])> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() {
            continue;
        }
        if let Some(comment) = body.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("element_position=") {
                position = parse_position(rest, line)?;
            }
            continue;
        }
        if !header_seen {
            let normalized: String = body.chars().filter(|c| !c.is_whitespace()).collect();
            if normalized != PATTERN_HEADER {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header '{PATTERN_HEADER}'"),
                });
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = body.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                line,
                message: format!("expected 6 fields, found {}", fields.len()),
            });
        }
        let mut v = [0.0f64; 6];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f.parse().map_err(|_| Error::Parse {
                line,
                message: format!("non-numeric field '{f}'"),
            })?;
        }
        if v.iter().any(|x| x.is_nan() || x.is_infinite()) {
            return Err(Error::Data {
                line,
                message: "non-finite value".into(),
            });
        }
        rows.push((line, v));
    }
    if !header_seen {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "missing header".into(),
        });
    }
    let Some((first_line, _)) = rows.first().copied() else {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "no data rows".into(),
        });
    };

    // φ axis from the first θ block, θ axis from block starts.
    let theta0 = rows[0].1[0];
    let n_phi = rows.iter().take_while(|(_, v)| v[0] == theta0).count();
    let phi_deg: Vec<f64> = rows[..n_phi].iter().map(|(_, v)| v[1]).collect();
    if let Some(w) = phi_deg.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Format {
            line: rows[w + 1].0,
            message: "φ axis not strictly ascending".into(),
        });
    }
    if !rows.len().is_multiple_of(n_phi) {
        return Err(Error::Parse {
            line: rows.last().unwrap().0,
            message: format!("{} rows do not fill whole θ blocks of {n_phi}", rows.len()),
        });
    }
    let n_theta = rows.len() / n_phi;
    let mut theta_deg = Vec::with_capacity(n_theta);
    for block in 0..n_theta {
        let (line, v) = rows[block * n_phi];
        if let Some(prev) = theta_deg.last() {
            if v[0] <= *prev {
                return Err(Error::Format {
                    line,
                    message: "θ axis not strictly ascending".into(),
                });
            }
        }
        theta_deg.push(v[0]);
        for (j, (line, v)) in rows[block * n_phi..(block + 1) * n_phi].iter().enumerate() {
            if v[0] != theta_deg[block] || v[1] != phi_deg[j] {
                return Err(Error::Format {
                    line: *line,
                    message: "row does not continue the θ-major grid".into(),
                });
            }
        }
    }

    let grid = AngleGrid::from_degrees(&theta_deg, &phi_deg).map_err(|e| Error::Format {
        line: first_line,
        message: e.to_string(),
    })?;
    let e_theta = rows
        .iter()
        .map(|(_, v)| Complex64::new(v[2], v[3]))
        .collect();
    let e_phi = rows
        .iter()
        .map(|(_, v)| Complex64::new(v[4], v[5]))
        .collect();
    PatternGrid::new(grid, e_theta, e_phi, position)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{element_over_reflector, translate_pattern};

    #[test]
    fn round_trip_is_bit_exact() {
        let p = element_over_reflector(0.5, 0.0, 37, 72).unwrap();
        let p = translate_pattern(&p, [0.3, 0.0, 0.1]);
        let back = parse_pattern_csv(&format_pattern_csv(&p)).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn descending_theta_is_format_error() {
        let text = format!("{PATTERN_HEADER}\n10.00,0.00,1,0,0,0\n10.00,180.00,1,0,0,0\n5.00,0.00,1,0,0,0\n5.00,180.00,1,0,0,0\n");
        assert!(matches!(
            parse_pattern_csv(&text),
            Err(Error::Format { line: 4, .. })
        ));
    }

    #[test]
    fn truncated_row_names_line() {
        let text = format!("{PATTERN_HEADER}\n0.00,0.00,1,0,0,0\n0.00,180.00,1,0,0,0\n90.00,0.00,1,0,0,0\n90.00,180.00,1,0\n");
        assert!(matches!(
            parse_pattern_csv(&text),
            Err(Error::Parse { line: 5, .. })
        ));
    }

    #[test]
    fn bad_header_and_nan() {
        assert!(matches!(
            parse_pattern_csv("theta,phi\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        let text = format!("{PATTERN_HEADER}\n0.00,0.00,NaN,0,0,0\n");
        assert!(matches!(
            parse_pattern_csv(&text),
            Err(Error::Data { line: 2, .. })
        ));
    }
}
