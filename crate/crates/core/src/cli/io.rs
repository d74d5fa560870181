//! Plain-text outputs: field CSV, PGM heatmaps, tables and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use sha2::{Digest, Sha256};

use super::CliError;
use crate::moyal::{CoefficientField, PhaseSpaceGrid};
use crate::transform::MultiresolutionDecomposition;

/// Gray level of `W = 0`; `127.5` rounds half away from zero.
pub const PGM_MID_GRAY: u8 = 128;

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Scientific notation with 17 significant digits (exact for binary64).
fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// `q,p,w` rows, `q` outer.
pub fn field_csv(field: &CoefficientField) -> String {
    let q = field.grid.q_values();
    let p = field.grid.p_values();
    let mut out = String::with_capacity(48 * field.data.len() + 8);
    out.push_str("q,p,w\n");
    for ((i, j), v) in field.data.indexed_iter() {
        let _ = writeln!(out, "{},{},{}", float(q[i]), float(p[j]), float(*v));
    }
    out
}

/// Reads a field written by [`field_csv`], recovering a grid with the given `ħ`, `m`.
pub fn parse_field_csv(text: &str, hbar: f64, mass: f64) -> Result<CoefficientField, String> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("q,p,w") {
        return Err("missing `q,p,w` header".into());
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(format!("line {}: expected three columns", n + 2));
        }
        let mut vals = [0.0; 3];
        for (slot, s) in vals.iter_mut().zip(&parts) {
            *slot = s.trim().parse().map_err(|_| format!("line {}: `{s}` is not a number", n + 2))?;
        }
        rows.push(vals);
    }
    let np = rows.iter().take_while(|r| r[0] == rows[0][0]).count();
    if np == 0 || rows.len() % np != 0 {
        return Err("rows do not form a rectangular grid".into());
    }
    let nq = rows.len() / np;
    if !nq.is_power_of_two() || !np.is_power_of_two() || nq < 2 || np < 2 {
        return Err(format!("grid {nq}x{np} is not dyadic"));
    }
    let dq = rows[np][0] - rows[0][0];
    let dp = rows[1][1] - rows[0][1];
    let grid = PhaseSpaceGrid::new(
        rows[0][0],
        dq * nq as f64,
        rows[0][1],
        dp * np as f64,
        nq.trailing_zeros(),
        np.trailing_zeros(),
        hbar,
        mass,
    )
    .map_err(|e| e.to_string())?;
    let data = Array2::from_shape_fn((nq, np), |(i, j)| rows[i * np + j][2]);
    CoefficientField::new(grid, data, 0.0).map_err(|e| e.to_string())
}

/// Plain P2 image, rows = momentum (high at the top), columns = position.
///
/// `[-clip, clip]` maps linearly onto `[0, 255]`; `clip = 0` uses `max|W|`.
pub fn field_pgm(field: &CoefficientField, clip: f64) -> String {
    let (nq, np) = field.data.dim();
    let max = field.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let clip = if clip > 0.0 { clip } else { max };
    let level = |v: f64| -> u8 {
        if clip == 0.0 {
            return PGM_MID_GRAY;
        }
        let x = 127.5 * (v / clip + 1.0);
        x.clamp(0.0, 255.0).round() as u8
    };
    let mut out = format!("P2\n{nq} {np}\n255\n");
    for j in (0..np).rev() {
        let row: Vec<String> = (0..nq).map(|i| level(field.data[(i, j)]).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// `level,band,i,j,value` rows; the coarse block uses `band = a`.
pub fn decomposition_csv(decomp: &MultiresolutionDecomposition) -> String {
    let mut out = String::from("level,band,i,j,value\n");
    let mut block = |level: usize, band: &str, b: &Array2<f64>| {
        for ((i, j), v) in b.indexed_iter() {
            let _ = writeln!(out, "{level},{band},{i},{j},{}", float(*v));
        }
    };
    block(decomp.coarse_level(), "a", decomp.coarse_block());
    let names: &[&str] = if decomp.is_two_dimensional() { &["h", "v", "d"] } else { &["d"] };
    for (level, blocks) in decomp.detail_blocks() {
        for (b, name) in blocks.iter().zip(names) {
            block(*level, name, b);
        }
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes files into one directory and remembers their checksums.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<(String, String)>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| io_error(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
        self.written.push((name.to_string(), sha256_hex(contents.as_bytes())));
        Ok(path)
    }

    /// Files written so far with their SHA-256 digests.
    pub fn files(&self) -> &[(String, String)] {
        &self.written
    }

    /// Writes `manifest.txt`: parameters, extra facts, then one line per file.
    pub fn write_manifest(&mut self, parameters: &[(&str, String)], extra: &[(&str, String)]) -> Result<PathBuf, CliError> {
        let mut text = format!("# wigner-mra {}\n", env!("CARGO_PKG_VERSION"));
        for (k, v) in parameters.iter().chain(extra) {
            let _ = writeln!(text, "{k} = {v}");
        }
        for (name, digest) in &self.written {
            let _ = writeln!(text, "file {name} sha256 {digest}");
        }
        let path = self.root.join("manifest.txt");
        fs::write(&path, &text).map_err(|e| io_error(&path, e))?;
        Ok(path)
    }
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::cat_state;
    use proptest::prelude::*;

    fn grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::symmetric(4.0, 5).unwrap()
    }

    #[test]
    fn csv_shape_and_header() {
        let g = grid();
        let f = CoefficientField::from_fn(&g, |q, p| q - p);
        let text = field_csv(&f);
        assert_eq!(text.lines().count(), 1 + 32 * 32);
        assert_eq!(text.lines().next(), Some("q,p,w"));
        // 2x2 block of the same writer
        let mut tiny = String::from("q,p,w\n");
        for line in text.lines().skip(1).take(2) {
            tiny.push_str(line);
            tiny.push('\n');
        }
        assert_eq!(tiny.lines().count(), 3);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let f = cat_state(2.0, 1.0, &grid());
        let back = parse_field_csv(&field_csv(&f), 1.0, 1.0).unwrap();
        assert_eq!(back.data, f.data);
        assert!((back.grid.dq() - f.grid.dq()).abs() < 1e-15);
        assert_eq!(back.grid.shape(), f.grid.shape());
    }

    #[test]
    fn pgm_conventions() {
        let g = grid();
        let zero = CoefficientField::zeros(&g);
        let img = field_pgm(&zero, 0.0);
        let mut lines = img.lines();
        assert_eq!(lines.next(), Some("P2"));
        assert_eq!(lines.next(), Some("32 32"));
        assert_eq!(lines.next(), Some("255"));
        assert!(lines.flat_map(|l| l.split(' ')).all(|v| v == "128"));

        let cat = cat_state(2.0, 1.0, &g);
        let pixels: Vec<u32> = field_pgm(&cat, 0.0).lines().skip(3).flat_map(|l| l.split(' ').map(|v| v.parse().unwrap()).collect::<Vec<_>>()).collect();
        assert!(pixels.iter().any(|&v| v < 128));
        assert_eq!(*pixels.iter().max().unwrap(), 255);

        let clipped = field_pgm(&cat, 1e-3);
        assert!(clipped.lines().skip(3).flat_map(|l| l.split(' ')).any(|v| v == "0"));
    }

    #[test]
    fn manifest_lists_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(&dir.path().join("nested")).unwrap();
        out.write("a.csv", "x\n").unwrap();
        let path = out.write_manifest(&[("dt", "0.1".into())], &[("effective_dt", "0.05".into())]).unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert!(text.contains("dt = 0.1"));
        assert!(text.contains("effective_dt = 0.05"));
        assert!(text.contains(&format!("file a.csv sha256 {}", sha256_hex(b"x\n"))));
        assert_eq!(sha256_hex(b"").len(), 64);
    }

    proptest! {
        #[test]
        fn float_text_round_trips(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
