//! `CFS1` snapshot files.
//!
//! Layout: the line `CFS1`, then ASCII `key value` lines
//!
//! ```text
//! CFS1
//! model qg
//! n1 128
//! n2 128
//! t 2.5000000000000000e-1
//! fields theta
//! end
//! ```
//!
//! followed by each listed field as `n1 * n2` little-endian `f64` values in
//! row-major order (x1 slow). Passive-scalar snapshots also carry `psi`,
//! the prescribed stream function at `t`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::RunError;
use crate::models::ModelState;
use crate::spectral::{GridSpec, RealField};

pub const MAGIC: &str = "CFS1";

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub model: String,
    pub grid: GridSpec,
    pub t: f64,
    pub fields: Vec<(String, RealField)>,
}

impl Snapshot {
    pub fn from_state(state: &ModelState, psi: Option<&RealField>) -> Self {
        let mut fields = Vec::new();
        if let Some(theta) = &state.theta {
            fields.push(("theta".to_string(), theta.clone()));
        }
        if let Some(omega) = &state.omega {
            fields.push(("omega".to_string(), omega.clone()));
        }
        if let Some(psi) = psi {
            fields.push(("psi".to_string(), psi.clone()));
        }
        Self { model: state.kind.name().to_string(), grid: state.grid(), t: state.t, fields }
    }

    pub fn field(&self, name: &str) -> Option<&RealField> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let names: Vec<&str> = self.fields.iter().map(|(n, _)| n.as_str()).collect();
        let header = format!(
            "{MAGIC}\nmodel {}\nn1 {}\nn2 {}\nt {:.16e}\nfields {}\nend\n",
            self.model,
            self.grid.n1(),
            self.grid.n2(),
            self.t,
            names.join(" ")
        );
        let mut out = header.into_bytes();
        out.reserve(8 * self.grid.len() * self.fields.len());
        for (_, f) in &self.fields {
            for v in f.values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), RunError> {
        let mut file = fs::File::create(path).map_err(|e| RunError::io(path, e))?;
        file.write_all(&self.to_bytes()).map_err(|e| RunError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, RunError> {
        let file = fs::File::open(path).map_err(|e| RunError::io(path, e))?;
        Self::parse(BufReader::new(file)).map_err(|msg| RunError::Snapshot(format!("{}: {msg}", path.display())))
    }

    pub fn parse(mut reader: impl BufRead) -> Result<Self, String> {
        let mut line = String::new();
        let mut next_line = |reader: &mut dyn BufRead| -> Result<String, String> {
            line.clear();
            match reader.read_line(&mut line) {
                Ok(0) => Err("truncated header".to_string()),
                Ok(_) => Ok(line.trim_end_matches('\n').to_string()),
                Err(e) => Err(e.to_string()),
            }
        };
        if next_line(&mut reader)? != MAGIC {
            return Err(format!("missing {MAGIC} magic"));
        }
        let (mut model, mut n1, mut n2, mut t, mut names) = (None, None, None, None, None);
        loop {
            let l = next_line(&mut reader)?;
            if l == "end" {
                break;
            }
            let (key, value) = l.split_once(' ').unwrap_or((l.as_str(), ""));
            let num_err = |e: &dyn std::fmt::Display| format!("bad `{key}` value `{value}`: {e}");
            match key {
                "model" => model = Some(value.to_string()),
                "n1" => n1 = Some(value.parse::<usize>().map_err(|e| num_err(&e))?),
                "n2" => n2 = Some(value.parse::<usize>().map_err(|e| num_err(&e))?),
                "t" => t = Some(value.parse::<f64>().map_err(|e| num_err(&e))?),
                "fields" => names = Some(value.split_whitespace().map(str::to_string).collect::<Vec<_>>()),
                other => return Err(format!("unknown header key `{other}`")),
            }
        }
        let missing = |k: &str| format!("header lacks `{k}`");
        let model = model.ok_or_else(|| missing("model"))?;
        let grid = GridSpec::new(n1.ok_or_else(|| missing("n1"))?, n2.ok_or_else(|| missing("n2"))?)
            .map_err(|e| e.to_string())?;
        let t = t.ok_or_else(|| missing("t"))?;
        if !t.is_finite() {
            return Err("non-finite time".into());
        }
        let names = names.ok_or_else(|| missing("fields"))?;
        let mut fields = Vec::with_capacity(names.len());
        let mut buf = vec![0u8; 8 * grid.len()];
        for name in names {
            reader.read_exact(&mut buf).map_err(|_| format!("truncated data for field `{name}`"))?;
            let values = buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
            let field = RealField::new(grid, values).map_err(|e| format!("field `{name}`: {e}"))?;
            fields.push((name, field));
        }
        let mut rest = [0u8; 1];
        if reader.read(&mut rest).map_err(|e| e.to_string())? != 0 {
            return Err("trailing bytes after the last field".into());
        }
        Ok(Self { model, grid, t, fields })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;

    #[test]
    fn round_trip_is_exact() {
        let g = GridSpec::new(8, 10).unwrap();
        let theta = RealField::from_fn(g, |x1, x2| (x1 * 3.0).sin() + x2 / 7.0);
        let omega = RealField::from_fn(g, |x1, x2| x1 * x2 - 1.0 / 3.0);
        let s = ModelState::new(ModelKind::MHD, Some(theta), Some(omega), 0.1 + 0.2).unwrap();
        let snap = Snapshot::from_state(&s, None);
        let back = Snapshot::parse(&snap.to_bytes()[..]).unwrap();
        assert_eq!(back, snap);
        assert_eq!(back.t, 0.1 + 0.2);
    }

    #[test]
    fn malformed_headers_are_rejected() {
        assert!(Snapshot::parse(&b"CFS2\n"[..]).unwrap_err().contains("magic"));
        assert!(Snapshot::parse(&b"CFS1\nmodel qg\nn1 8\nend\n"[..]).unwrap_err().contains("n2"));
        assert!(Snapshot::parse(&b"CFS1\nmodel qg\nn1 8\nn2 8\nt 0\nfields theta\nend\n"[..])
            .unwrap_err()
            .contains("truncated"));
        assert!(Snapshot::parse(&b"CFS1\ncolour red\nend\n"[..]).unwrap_err().contains("colour"));
    }
}
