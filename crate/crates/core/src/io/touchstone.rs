//! Touchstone v1.1 (`.sNp`) reader and writer for S-parameters.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kronecker::ScatteringMatrix;
use crate::linalg::CMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FrequencyUnit {
    pub fn multiplier(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::KHz => 1e3,
            FrequencyUnit::MHz => 1e6,
            FrequencyUnit::GHz => 1e9,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "HZ",
            FrequencyUnit::KHz => "KHZ",
            FrequencyUnit::MHz => "MHZ",
            FrequencyUnit::GHz => "GHZ",
        }
    }
}

/// Value-pair convention of the data lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataFormat {
    /// Real, imaginary.
    Ri,
    /// Magnitude, angle in degrees.
    Ma,
    /// 20·log10 magnitude, angle in degrees.
    Db,
}

impl DataFormat {
    fn keyword(self) -> &'static str {
        match self {
            DataFormat::Ri => "RI",
            DataFormat::Ma => "MA",
            DataFormat::Db => "DB",
        }
    }

    fn decode(self, a: f64, b: f64) -> Complex64 {
        match self {
            DataFormat::Ri => Complex64::new(a, b),
            DataFormat::Ma => Complex64::from_polar(a, b.to_radians()),
            DataFormat::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }

    fn encode(self, z: Complex64) -> (f64, f64) {
        match self {
            DataFormat::Ri => (z.re, z.im),
            DataFormat::Ma => (z.norm(), z.arg().to_degrees()),
            DataFormat::Db => (20.0 * z.norm().log10(), z.arg().to_degrees()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionLine {
    pub unit: FrequencyUnit,
    pub format: DataFormat,
    pub reference_impedance: f64,
}

impl Default for OptionLine {
    /// The v1.1 defaults: `# GHZ S MA R 50`.
    fn default() -> Self {
        Self {
            unit: FrequencyUnit::GHz,
            format: DataFormat::Ma,
            reference_impedance: 50.0,
        }
    }
}

/// A parsed file: option line, comments and one S matrix per frequency (Hz, RI).
#[derive(Clone, Debug, PartialEq)]
pub struct TouchstoneDocument {
    pub options: OptionLine,
    pub comments: Vec<String>,
    pub port_count: usize,
    pub frequencies: Vec<f64>,
    pub matrices: Vec<CMatrix>,
    /// True when a trailing 2-port noise-parameter section was skipped.
    pub noise_ignored: bool,
}

impl TouchstoneDocument {
    pub fn to_scattering(&self) -> Result<ScatteringMatrix> {
        ScatteringMatrix::new(
            self.frequencies.clone(),
            self.matrices.clone(),
            self.options.reference_impedance,
        )
    }
}

/// Port count from an `.sNp` extension, N in 1..=99.
pub fn port_count_from_path(path: &Path) -> Result<usize> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let digits = ext
        .strip_prefix('s')
        .and_then(|rest| rest.strip_suffix('p'))
        .filter(|d| !d.is_empty() && d.len() <= 2 && d.bytes().all(|b| b.is_ascii_digit()));
    match digits.and_then(|d| d.parse::<usize>().ok()) {
        Some(n) if (1..=99).contains(&n) => Ok(n),
        _ => Err(Error::invalid(format!(
            "{}: expected a .sNp extension with N in 1..99",
            path.display()
        ))),
    }
}

pub fn parse_touchstone(path: impl AsRef<Path>) -> Result<ScatteringMatrix> {
    read_touchstone(path)?.to_scattering()
}

pub fn read_touchstone(path: impl AsRef<Path>) -> Result<TouchstoneDocument> {
    let path = path.as_ref();
    let ports = port_count_from_path(path)?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_touchstone_str(&text, ports)
}

fn parse_option_line(rest: &str, line: usize) -> Result<OptionLine> {
    let mut opts = OptionLine::default();
    let mut tokens = rest.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opts.unit = FrequencyUnit::Hz,
            "KHZ" => opts.unit = FrequencyUnit::KHz,
            "MHZ" => opts.unit = FrequencyUnit::MHz,
            "GHZ" => opts.unit = FrequencyUnit::GHz,
            "RI" => opts.format = DataFormat::Ri,
            "MA" => opts.format = DataFormat::Ma,
            "DB" => opts.format = DataFormat::Db,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(Error::Format {
                    line,
                    message: format!("only S parameters are supported, found {tok}"),
                })
            }
            "R" => {
                let value = tokens.next().ok_or(Error::Parse {
                    line,
                    message: "R without a reference impedance".into(),
                })?;
                let z0: f64 = value.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad reference impedance '{value}'"),
                })?;
                if !(z0 > 0.0) || !z0.is_finite() {
                    return Err(Error::Data {
                        line,
                        message: format!("reference impedance must be positive, got {z0}"),
                    });
                }
                opts.reference_impedance = z0;
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown option token '{tok}'"),
                })
            }
        }
    }
    Ok(opts)
}

/// Parse v1.1 text for a file with `port_count` ports.
///
/// A data line with an odd number of tokens starts a frequency block (the
/// frequency plus whole value pairs); lines with an even count continue it.
pub fn parse_touchstone_str(text: &str, port_count: usize) -> Result<TouchstoneDocument> {
    if port_count == 0 || port_count > 99 {
        return Err(Error::invalid(format!(
            "port count {port_count} outside 1..99"
        )));
    }
    let per_block = 1 + 2 * port_count * port_count;
    let mut options: Option<OptionLine> = None;
    let mut comments = Vec::new();
    // (line of first token, tokens)
    let mut blocks: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut noise_ignored = false;
    let mut last_freq = f64::NEG_INFINITY;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (body, comment) = match raw.find('!') {
            Some(p) => (&raw[..p], Some(&raw[p + 1..])),
            None => (raw, None),
        };
        if let Some(c) = comment {
            comments.push(c.trim().to_string());
        }
        let body = body.trim();
        if body.is_empty() || noise_ignored {
            continue;
        }
        if body.starts_with('[') {
            return Err(Error::UnsupportedVersion {
                line,
                message: format!(
                    "keyword {} belongs to Touchstone 2.0",
                    body.split_whitespace().next().unwrap_or(body)
                ),
            });
        }
        if let Some(rest) = body.strip_prefix('#') {
            if options.is_some() {
                return Err(Error::Format {
                    line,
                    message: "second option line".into(),
                });
            }
            if !blocks.is_empty() {
                return Err(Error::Format {
                    line,
                    message: "option line after data".into(),
                });
            }
            options = Some(parse_option_line(rest, line)?);
            continue;
        }
        let Some(opts) = options else {
            return Err(Error::Parse {
                line,
                message: "data before the option line".into(),
            });
        };

        let values = body
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("non-numeric token '{t}'"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data {
                line,
                message: format!("non-finite value {bad}"),
            });
        }

        if values.len() % 2 == 1 {
            let freq = values[0] * opts.unit.multiplier();
            if freq <= last_freq {
                if port_count == 2 {
                    log::warn!("line {line}: noise parameter section ignored");
                    noise_ignored = true;
                    continue;
                }
                return Err(Error::Format {
                    line,
                    message: format!("frequency {} not above the previous one", values[0]),
                });
            }
            if let Some((start, prev)) = blocks.last() {
                if prev.len() != per_block {
                    return Err(incomplete(*start, prev.len(), per_block));
                }
            }
            last_freq = freq;
            blocks.push((line, values));
        } else {
            match blocks.last_mut() {
                Some((_, tokens)) if tokens.len() < per_block => tokens.extend(values),
                Some((start, tokens)) => {
                    return Err(Error::Format {
                        line,
                        message: format!(
                            "block starting at line {start} already holds {} values",
                            tokens.len()
                        ),
                    })
                }
                None => {
                    return Err(Error::Format {
                        line,
                        message: "continuation line without a frequency".into(),
                    })
                }
            }
        }
    }

    let options = options.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        message: "missing option line".into(),
    })?;
    if let Some((start, tokens)) = blocks.last() {
        if tokens.len() != per_block {
            return Err(incomplete(*start, tokens.len(), per_block));
        }
    }

    let mult = options.unit.multiplier();
    let mut frequencies = Vec::with_capacity(blocks.len());
    let mut matrices = Vec::with_capacity(blocks.len());
    for (_, tokens) in &blocks {
        frequencies.push(tokens[0] * mult);
        let mut m = CMatrix::zeros(port_count, port_count);
        for (k, pair) in tokens[1..].chunks_exact(2).enumerate() {
            let (r, c) = entry_position(k, port_count);
            m[(r, c)] = options.format.decode(pair[0], pair[1]);
        }
        matrices.push(m);
    }
    Ok(TouchstoneDocument {
        options,
        comments,
        port_count,
        frequencies,
        matrices,
        noise_ignored,
    })
}

fn incomplete(line: usize, got: usize, want: usize) -> Error {
    Error::Format {
        line,
        message: format!("frequency block has {got} numbers, expected {want}"),
    }
}

/// Row/column of the k-th value pair: row-major, except 2-ports list S21 before S12.
fn entry_position(k: usize, ports: usize) -> (usize, usize) {
    if ports == 2 {
        [(0, 0), (1, 0), (0, 1), (1, 1)][k]
    } else {
        (k / ports, k % ports)
    }
}

/// Canonical text: option line `# HZ S <fmt> R <Z0>`, 17 significant digits,
/// at most four pairs per line for three or more ports.
pub fn format_touchstone(s: &ScatteringMatrix, format: DataFormat) -> Result<String> {
    if s.frequencies().is_empty() {
        return Err(Error::RefusedWrite(
            "S-parameter set has no frequencies".into(),
        ));
    }
    let n = s.port_count();
    let mut out = String::new();
    let _ = writeln!(out, "! {n}-port S-parameters");
    let _ = writeln!(
        out,
        "# {} S {} R {}",
        FrequencyUnit::Hz.keyword(),
        format.keyword(),
        s.reference_impedance()
    );
    let num = |v: f64| format!("{v:.16e}");
    for (f, m) in s.frequencies().iter().zip(s.data()) {
        let pairs: Vec<String> = (0..n * n)
            .map(|k| {
                let (r, c) = entry_position(k, n);
                let (a, b) = format.encode(m[(r, c)]);
                format!("{} {}", num(a), num(b))
            })
            .collect();
        if n <= 2 {
            let _ = writeln!(out, "{} {}", num(*f), pairs.join(" "));
            continue;
        }
        for (row, row_pairs) in pairs.chunks(n).enumerate() {
            for (li, chunk) in row_pairs.chunks(4).enumerate() {
                if row == 0 && li == 0 {
                    let _ = writeln!(out, "{} {}", num(*f), chunk.join(" "));
                } else {
                    let _ = writeln!(out, "{}", chunk.join(" "));
                }
            }
        }
    }
    Ok(out)
}

pub fn write_touchstone(
    s: &ScatteringMatrix,
    path: impl AsRef<Path>,
    format: DataFormat,
) -> Result<()> {
    let path = path.as_ref();
    let text = format_touchstone(s, format)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
