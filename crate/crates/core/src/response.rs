//! Finite impulse response of the closed loop, and its on-disk text format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// FIR closed-loop response pair: `x = sum_tau phi_x[tau] w_delayed` and
/// `u = sum_tau phi_u[tau] w_delayed`, with taps `tau = 1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemResponse {
    phi_x: Vec<DMatrix<f64>>,
    phi_u: Vec<DMatrix<f64>>,
}

impl SystemResponse {
    pub fn new(phi_x: Vec<DMatrix<f64>>, phi_u: Vec<DMatrix<f64>>) -> Result<Self> {
        if phi_x.is_empty() || phi_x.len() != phi_u.len() {
            return Err(Error::DimensionMismatch(format!(
                "response needs matching nonempty tap lists, got {} state and {} input taps",
                phi_x.len(),
                phi_u.len()
            )));
        }
        let n = phi_x[0].nrows();
        let m = phi_u[0].nrows();
        for (tau, px) in phi_x.iter().enumerate() {
            if px.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "phi_x tap {} must be {n}x{n}, got {}x{}",
                    tau + 1,
                    px.nrows(),
                    px.ncols()
                )));
            }
        }
        for (tau, pu) in phi_u.iter().enumerate() {
            if pu.shape() != (m, n) {
                return Err(Error::DimensionMismatch(format!(
                    "phi_u tap {} must be {m}x{n}, got {}x{}",
                    tau + 1,
                    pu.nrows(),
                    pu.ncols()
                )));
            }
        }
        let finite = phi_x
            .iter()
            .chain(&phi_u)
            .all(|m| m.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::InvalidArgument(
                "response contains non-finite entries".into(),
            ));
        }
        Ok(Self { phi_x, phi_u })
    }

    pub fn zeros(n_states: usize, n_inputs: usize, horizon: usize) -> Result<Self> {
        if n_states == 0 || horizon == 0 {
            return Err(Error::InvalidArgument(
                "response needs at least one state and one tap".into(),
            ));
        }
        Ok(Self {
            phi_x: vec![DMatrix::zeros(n_states, n_states); horizon],
            phi_u: vec![DMatrix::zeros(n_inputs, n_states); horizon],
        })
    }

    pub fn horizon(&self) -> usize {
        self.phi_x.len()
    }

    pub fn n_states(&self) -> usize {
        self.phi_x[0].nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.phi_u[0].nrows()
    }

    /// State tap `tau` (1-based).
    pub fn x_at(&self, tau: usize) -> &DMatrix<f64> {
        &self.phi_x[tau - 1]
    }

    /// Input tap `tau` (1-based).
    pub fn u_at(&self, tau: usize) -> &DMatrix<f64> {
        &self.phi_u[tau - 1]
    }

    pub fn x_taps(&self) -> &[DMatrix<f64>] {
        &self.phi_x
    }

    pub fn u_taps(&self) -> &[DMatrix<f64>] {
        &self.phi_u
    }

    /// Count of stored entries that are not positive zero.
    pub fn nonzero_entries(&self) -> usize {
        self.phi_x
            .iter()
            .chain(&self.phi_u)
            .map(|m| m.iter().filter(|v| v.to_bits() != 0).count())
            .sum()
    }

    pub fn total_entries(&self) -> usize {
        let n = self.n_states();
        self.horizon() * (n * n + self.n_inputs() * n)
    }

    /// Writes the response in the `sls-phi v1` format: a header followed by
    /// one record per nonzero entry, `kind tau row col value`, with values
    /// printed to 17 significant digits so the round trip is bit exact.
    /// Negative zeros are kept to preserve exact bit patterns.
    pub fn write_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            out,
            "sls-phi v1 n={} m={} T={}",
            self.n_states(),
            self.n_inputs(),
            self.horizon()
        )?;
        for (kind, taps) in [("x", &self.phi_x), ("u", &self.phi_u)] {
            for (k, tap) in taps.iter().enumerate() {
                for row in 0..tap.nrows() {
                    for col in 0..tap.ncols() {
                        let v = tap[(row, col)];
                        if v.to_bits() != 0 {
                            writeln!(out, "{kind} {} {row} {col} {v:.16e}", k + 1)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// Parses the `sls-phi v1` format, rejecting unknown versions, malformed
    /// records, out-of-range indices, and duplicate entries.
    pub fn read_from(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("missing header line".into()))?
            .map_err(Error::Io)?;
        let (n, m, horizon) = parse_header(&header)?;
        let mut phi_x = vec![DMatrix::zeros(n, n); horizon];
        let mut phi_u = vec![DMatrix::zeros(m, n); horizon];
        let mut seen_x = vec![DMatrix::from_element(n, n, false); horizon];
        let mut seen_u = vec![DMatrix::from_element(m, n, false); horizon];
        for (idx, line) in lines.enumerate() {
            let line = line.map_err(Error::Io)?;
            let lineno = idx + 2;
            if line.trim().is_empty() {
                return Err(Error::Format(format!("line {lineno}: blank line")));
            }
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::Format(format!(
                    "line {lineno}: expected 5 fields, got {}",
                    fields.len()
                )));
            }
            let tau: usize = parse_field(fields[1], "tap", lineno)?;
            let row: usize = parse_field(fields[2], "row", lineno)?;
            let col: usize = parse_field(fields[3], "col", lineno)?;
            let value: f64 = parse_field(fields[4], "value", lineno)?;
            if !value.is_finite() {
                return Err(Error::Format(format!("line {lineno}: non-finite value")));
            }
            if tau == 0 || tau > horizon {
                return Err(Error::Format(format!(
                    "line {lineno}: tap {tau} outside 1..={horizon}"
                )));
            }
            let (target, seen, nrows) = match fields[0] {
                "x" => (&mut phi_x[tau - 1], &mut seen_x[tau - 1], n),
                "u" => (&mut phi_u[tau - 1], &mut seen_u[tau - 1], m),
                other => {
                    return Err(Error::Format(format!(
                        "line {lineno}: unknown kind {other:?}"
                    )))
                }
            };
            if row >= nrows || col >= n {
                return Err(Error::Format(format!(
                    "line {lineno}: entry ({row}, {col}) outside {nrows}x{n}"
                )));
            }
            if seen[(row, col)] {
                return Err(Error::Format(format!(
                    "line {lineno}: duplicate entry {} {tau} {row} {col}",
                    fields[0]
                )));
            }
            seen[(row, col)] = true;
            target[(row, col)] = value;
        }
        Self::new(phi_x, phi_u)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn parse_header(header: &str) -> Result<(usize, usize, usize)> {
    let fields: Vec<&str> = header.split_ascii_whitespace().collect();
    if fields.len() != 5 || fields[0] != "sls-phi" {
        return Err(Error::Format(format!("unrecognized header {header:?}")));
    }
    if fields[1] != "v1" {
        return Err(Error::Format(format!(
            "unsupported format version {:?}",
            fields[1]
        )));
    }
    let mut dims = [0usize; 3];
    for (slot, (field, key)) in dims
        .iter_mut()
        .zip(fields[2..].iter().zip(["n=", "m=", "T="]))
    {
        let value = field
            .strip_prefix(key)
            .ok_or_else(|| Error::Format(format!("expected {key}<int>, got {field:?}")))?;
        *slot = value
            .parse()
            .map_err(|_| Error::Format(format!("invalid {key} value {value:?}")))?;
    }
    let [n, m, horizon] = dims;
    if n == 0 || horizon == 0 {
        return Err(Error::Format("header requires n >= 1 and T >= 1".into()));
    }
    Ok((n, m, horizon))
}

fn parse_field<T: std::str::FromStr>(field: &str, what: &str, lineno: usize) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Format(format!("line {lineno}: invalid {what} {field:?}")))
}
