//! Binary coefficient cache and field snapshots (little-endian), and the
//! CSV writers for energy logs and derivative ladders.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{LandauError, Result};
use crate::evolution::{DerivativeLadder, EnergyRow};
use crate::field::{ScalarField, VelocityGrid};
use crate::kernel::{KernelParams, LandauCoefficients, QuadratureSpec, SymMatrixField};

pub const COEF_MAGIC: &[u8; 12] = b"LANDAU-COEF1";
pub const FIELD_MAGIC: &[u8; 11] = b"LANDAU-FLD1";

pub const ENERGY_HEADER: &str = "t,l2sq,asq,gf,lff";
pub const LADDER_HEADER: &str = "k,norm_l2,norm_a,a_k,a_k_root";

/// File name keyed by everything the coefficients depend on. Floats enter
/// by their bit patterns so distinct configurations never collide.
pub fn cache_file_name(grid: &VelocityGrid, params: &KernelParams, quad: &QuadratureSpec) -> String {
    format!(
        "coef-N{}-R{:016x}-g{:016x}-m{}-q{}x{}-t{:016x}.bin",
        grid.n(),
        grid.half_width().to_bits(),
        params.gamma().to_bits(),
        u8::from(params.mu_normalized()),
        quad.radial_order,
        quad.angular_order,
        quad.rtol.to_bits()
    )
}

fn put_values(out: &mut Vec<u8>, values: &[f64]) {
    out.reserve(8 * values.len());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_coefficients(coeffs: &LandauCoefficients) -> Vec<u8> {
    let grid = coeffs.grid();
    let params = coeffs.params();
    let quad = coeffs.quadrature();
    let mut out = Vec::new();
    out.extend_from_slice(COEF_MAGIC);
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.extend_from_slice(&params.gamma().to_le_bytes());
    out.push(u8::from(params.mu_normalized()));
    out.extend_from_slice(&(quad.radial_order as u32).to_le_bytes());
    out.extend_from_slice(&(quad.angular_order as u32).to_le_bytes());
    out.extend_from_slice(&quad.rtol.to_le_bytes());
    for c in coeffs.abar().comps() {
        put_values(&mut out, c);
    }
    put_values(&mut out, coeffs.c1());
    put_values(&mut out, coeffs.c2());
    out
}

/// Reads back what [`encode_coefficients`] wrote and rebuilds the derived
/// data (faces, tables, cross-check) with convolution padding `pad`.
pub fn decode_coefficients(bytes: &[u8], pad: usize) -> Result<LandauCoefficients> {
    let mut r = Reader::new(bytes);
    r.magic(COEF_MAGIC)?;
    let n = r.u32()? as usize;
    let half_width = r.f64()?;
    let gamma = r.f64()?;
    let mu_normalized = match r.u8()? {
        0 => false,
        1 => true,
        b => return Err(LandauError::Format(format!("bad mu_normalized flag {b}"))),
    };
    let quad = QuadratureSpec {
        radial_order: r.u32()? as usize,
        angular_order: r.u32()? as usize,
        rtol: r.f64()?,
    };
    let grid = VelocityGrid::new(half_width, n)?;
    let params = KernelParams::new(gamma, mu_normalized)?;
    let len = grid.len();
    let mut comps: [Vec<f64>; 6] = Default::default();
    for c in comps.iter_mut() {
        *c = r.values(len)?;
    }
    let c1 = r.values(len)?;
    let c2 = r.values(len)?;
    r.finish()?;
    let abar = SymMatrixField::from_comps(grid, comps)?;
    LandauCoefficients::from_parts(params, quad, abar, c1, c2, pad)
}

pub fn save_coefficients(path: &Path, coeffs: &LandauCoefficients) -> Result<()> {
    write_atomic(path, &encode_coefficients(coeffs))
}

pub fn load_coefficients(path: &Path, pad: usize) -> Result<LandauCoefficients> {
    decode_coefficients(&read_all(path)?, pad)
}

/// A field with the time stamp it was taken at.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub gamma: f64,
    pub step_index: u64,
    pub t: f64,
    pub field: ScalarField,
}

pub fn encode_snapshot(snap: &Snapshot) -> Vec<u8> {
    let grid = snap.field.grid();
    let mut out = Vec::new();
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.extend_from_slice(&snap.gamma.to_le_bytes());
    out.extend_from_slice(&snap.step_index.to_le_bytes());
    out.extend_from_slice(&snap.t.to_le_bytes());
    put_values(&mut out, snap.field.values());
    out
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Snapshot> {
    let mut r = Reader::new(bytes);
    r.magic(FIELD_MAGIC)?;
    let n = r.u32()? as usize;
    let half_width = r.f64()?;
    let gamma = r.f64()?;
    let step_index = r.u64()?;
    let t = r.f64()?;
    let grid = VelocityGrid::new(half_width, n)?;
    let values = r.values(grid.len())?;
    r.finish()?;
    Ok(Snapshot {
        gamma,
        step_index,
        t,
        field: ScalarField::from_values(grid, values)?,
    })
}

pub fn save_snapshot(path: &Path, snap: &Snapshot) -> Result<()> {
    write_atomic(path, &encode_snapshot(snap))
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    decode_snapshot(&read_all(path)?)
}

/// Energy log as CSV. A `# config <fingerprint>` comment precedes the
/// header when a fingerprint is given.
pub fn write_energy_csv<W: Write>(out: W, rows: &[EnergyRow], fingerprint: Option<&str>) -> Result<()> {
    let mut w = BufWriter::new(out);
    if let Some(fp) = fingerprint {
        writeln!(w, "# config {fp}")?;
    }
    writeln!(w, "{ENERGY_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.t, r.l2sq, r.asq, r.gf, r.lff)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ladder_csv<W: Write>(out: W, ladder: &DerivativeLadder, fingerprint: Option<&str>) -> Result<()> {
    let mut w = BufWriter::new(out);
    if let Some(fp) = fingerprint {
        writeln!(w, "# config {fp}")?;
    }
    writeln!(w, "{LADDER_HEADER}")?;
    for r in ladder.rows() {
        writeln!(w, "{},{},{},{},{}", r.k, r.norm_l2, r.norm_a, r.a_k, r.a_k_root)?;
    }
    w.flush()?;
    Ok(())
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    Ok(bytes)
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| LandauError::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn magic(&mut self, m: &[u8]) -> Result<()> {
        if self.take(m.len())? != m {
            return Err(LandauError::Format(format!(
                "bad magic, expected {}",
                String::from_utf8_lossy(m)
            )));
        }
        Ok(())
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn values(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(8 * n)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(LandauError::Format(format!(
                "{} trailing bytes",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_layout() {
        let grid = VelocityGrid::new(8.0, 16).unwrap();
        let field = ScalarField::from_fn(grid, |v| v[0] - 2.0 * v[2]);
        let snap = Snapshot {
            gamma: -1.0,
            step_index: 7,
            t: 0.25,
            field,
        };
        let bytes = encode_snapshot(&snap);
        assert_eq!(&bytes[..11], b"LANDAU-FLD1");
        assert_eq!(u32::from_le_bytes(bytes[11..15].try_into().unwrap()), 16);
        assert_eq!(bytes.len(), 11 + 4 + 8 * 4 + 8 * 16 * 16 * 16);
        // first value is node (0, 0, 0): v = (-R + h/2) (1, 1, 1), h = 1
        let first = f64::from_le_bytes(bytes[47..55].try_into().unwrap());
        assert_eq!(first, -7.5 + 2.0 * 7.5);
        assert_eq!(decode_snapshot(&bytes).unwrap(), snap);
    }

    #[test]
    fn truncated_and_trailing_rejected() {
        let grid = VelocityGrid::new(8.0, 16).unwrap();
        let snap = Snapshot {
            gamma: -1.0,
            step_index: 0,
            t: 0.0,
            field: ScalarField::zeros(grid),
        };
        let mut bytes = encode_snapshot(&snap);
        assert!(matches!(decode_snapshot(&bytes[..bytes.len() - 1]), Err(LandauError::Format(_))));
        bytes.push(0);
        assert!(matches!(decode_snapshot(&bytes), Err(LandauError::Format(_))));
        bytes[0] = b'X';
        assert!(matches!(decode_snapshot(&bytes), Err(LandauError::Format(_))));
    }

    #[test]
    fn energy_csv_format() {
        let rows = [EnergyRow {
            t: 0.5,
            l2sq: 1.0,
            asq: 2.5,
            gf: 0.0,
            lff: -0.125,
        }];
        let mut buf = Vec::new();
        write_energy_csv(&mut buf, &rows, Some("abc")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# config abc\nt,l2sq,asq,gf,lff\n0.5,1,2.5,0,-0.125\n");
    }

    #[test]
    fn cache_names_distinguish_configs() {
        let grid = VelocityGrid::new(8.0, 16).unwrap();
        let quad = QuadratureSpec::default();
        let a = cache_file_name(&grid, &KernelParams::new(-1.0, true).unwrap(), &quad);
        let b = cache_file_name(&grid, &KernelParams::new(-1.0, false).unwrap(), &quad);
        let c = cache_file_name(&grid, &KernelParams::new(-1.0 + 1e-15, true).unwrap(), &quad);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
