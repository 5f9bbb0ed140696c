//! Binary spinor field files.
//!
//! Layout, all integers and floats little-endian:
//!
//! | offset | size | content |
//! |-------:|-----:|---------|
//! | 0 | 5 | magic `SPNF1` |
//! | 5 | 1 | endianness tag `L` |
//! | 6 | 1 | domain: 0 torus, 1 disk, 2 sphere, 3 cylinder |
//! | 7 | 1 | spin structure tag, `0xFF` off the torus |
//! | 8 | 4 | `nx` (u32) |
//! | 12 | 4 | `ny` (u32) |
//! | 16 | 4 | `n` (u32), spinor blocks per node |
//! | 20 | 8 | first domain parameter (f64) |
//! | 28 | 8 | second domain parameter (f64) |
//! | 36 | | payload |
//!
//! Domain parameters are the two periods of a torus, the radius of a disk
//! (second slot 0), zeros for the sphere and `t_min, t_max` for a cylinder.
//! The payload holds `nx * ny * 2n` complex values as `(re, im)` pairs of
//! f64, node-major (node `i + nx * j`) and then component-major. Inactive
//! disk nodes are stored as `+0.0`.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::chart::{Domain, GridChart, SpinStructure};
use crate::error::{Result, SpinflowError};
use crate::spinor::{SpinorField, C64};

pub const MAGIC: &[u8; 5] = b"SPNF1";
pub const HEADER_LEN: usize = 36;
const LITTLE: u8 = b'L';
const NO_SPIN: u8 = 0xFF;

fn domain_tag(domain: Domain) -> (u8, [f64; 2]) {
    match domain {
        Domain::Torus { period_x, period_y } => (0, [period_x, period_y]),
        Domain::Disk { radius } => (1, [radius, 0.0]),
        Domain::SphereChart => (2, [0.0, 0.0]),
        Domain::Cylinder { t_min, t_max } => (3, [t_min, t_max]),
    }
}

/// Serializes `psi` to the file format.
pub fn write_field_bytes(psi: &SpinorField) -> Vec<u8> {
    let chart = psi.chart();
    let (tag, params) = domain_tag(chart.domain());
    let mut out = Vec::with_capacity(HEADER_LEN + psi.values().len() * 16);
    out.extend_from_slice(MAGIC);
    out.push(LITTLE);
    out.push(tag);
    out.push(chart.spin_structure().map_or(NO_SPIN, SpinStructure::tag));
    for v in [chart.nx(), chart.ny(), psi.n()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for p in params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    for v in psi.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn format_err(msg: impl Into<String>) -> SpinflowError {
    SpinflowError::Format(msg.into())
}

fn u32_at(bytes: &[u8], at: usize) -> usize {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")) as usize
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

/// Parses a field file. Any structural problem is a [`SpinflowError::Format`].
pub fn read_field_bytes(bytes: &[u8]) -> Result<SpinorField> {
    if bytes.len() < HEADER_LEN {
        return Err(format_err(format!("file is {} bytes, shorter than the header", bytes.len())));
    }
    if &bytes[..5] != MAGIC {
        return Err(format_err("bad magic, not a spinor field file"));
    }
    if bytes[5] != LITTLE {
        return Err(format_err(format!("unsupported endianness tag {:#04x}", bytes[5])));
    }
    let (tag, spin_tag) = (bytes[6], bytes[7]);
    let (nx, ny, n) = (u32_at(bytes, 8), u32_at(bytes, 12), u32_at(bytes, 16));
    let params = [f64_at(bytes, 20), f64_at(bytes, 28)];
    if n == 0 {
        return Err(format_err("zero spinor blocks"));
    }
    let spin = match (tag, spin_tag) {
        (0, t) => Some(SpinStructure::from_tag(t).ok_or_else(|| format_err(format!("unknown spin structure tag {t}")))?),
        (_, NO_SPIN) => None,
        (_, t) => return Err(format_err(format!("spin structure tag {t} on a non-torus domain"))),
    };
    let chart = match tag {
        0 => GridChart::torus(params[0], params[1], nx, ny, spin.expect("torus tag carries a spin structure")),
        1 if nx == ny && params[1] == 0.0 => GridChart::disk(params[0], nx),
        1 => return Err(format_err("disk header must have nx = ny and a zero second parameter")),
        2 if nx == 2 * ny && params == [0.0, 0.0] => GridChart::sphere(ny),
        2 => return Err(format_err("sphere header must have nx = 2 ny and zero parameters")),
        3 => GridChart::cylinder(params[0], params[1], nx, ny),
        t => return Err(format_err(format!("unknown domain tag {t}"))),
    }
    .map_err(|e| format_err(format!("header describes an invalid chart: {e}")))?;

    let count = nx
        .checked_mul(ny)
        .and_then(|v| v.checked_mul(2 * n))
        .ok_or_else(|| format_err("payload size overflows"))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != count * 16 {
        return Err(format_err(format!("payload is {} bytes, expected {}", payload.len(), count * 16)));
    }
    let values: Vec<C64> = payload.chunks_exact(16).map(|c| C64::new(f64_at(c, 0), f64_at(c, 8))).collect();
    let stride = 2 * n;
    for k in (0..chart.len()).filter(|&k| !chart.is_active(k)) {
        if values[k * stride..(k + 1) * stride].iter().any(|v| v.re.to_bits() != 0 || v.im.to_bits() != 0) {
            return Err(format_err(format!("inactive node {k} carries a nonzero value")));
        }
    }
    SpinorField::from_values(Arc::new(chart), n, values).map_err(|e| format_err(e.to_string()))
}

pub fn write_field(path: &Path, psi: &SpinorField) -> Result<()> {
    fs::write(path, write_field_bytes(psi))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<SpinorField> {
    read_field_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinor::ZERO;

    #[test]
    fn header_layout() {
        let chart = Arc::new(GridChart::unit_torus(8, SpinStructure::PeriodicAnti).unwrap());
        let psi = SpinorField::zeros(chart, 2);
        let bytes = write_field_bytes(&psi);
        assert_eq!(bytes.len(), HEADER_LEN + 64 * 4 * 16);
        assert_eq!(&bytes[..8], b"SPNF1L\x00\x01");
        assert_eq!(u32_at(&bytes, 16), 2);
        assert_eq!(f64_at(&bytes, 28), 1.0);
    }

    #[test]
    fn disk_round_trip() {
        let chart = Arc::new(GridChart::disk(1.5, 17).unwrap());
        let psi = SpinorField::from_fn(chart, 1, |[x, y]| vec![C64::new(x, -0.0), C64::new(y.sin(), x * y)]);
        let bytes = write_field_bytes(&psi);
        let back = read_field_bytes(&bytes).unwrap();
        assert_eq!(back, psi);
        assert_eq!(write_field_bytes(&back), bytes);
    }

    #[test]
    fn rejects_corruption() {
        let chart = Arc::new(GridChart::disk(1.0, 9).unwrap());
        let psi = SpinorField::constant(chart.clone(), &[ZERO, C64::new(1.0, 0.0)]);
        let good = write_field_bytes(&psi);

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(read_field_bytes(&bad), Err(SpinflowError::Format(_))));
        assert!(matches!(read_field_bytes(&good[..good.len() - 1]), Err(SpinflowError::Format(_))));
        assert!(matches!(read_field_bytes(&good[..10]), Err(SpinflowError::Format(_))));

        // node 0 is a lattice corner, outside the disk
        assert!(!chart.is_active(0));
        let mut bad = good.clone();
        bad[HEADER_LEN..HEADER_LEN + 8].copy_from_slice(&1.0f64.to_le_bytes());
        assert!(matches!(read_field_bytes(&bad), Err(SpinflowError::Format(_))));

        let mut bad = good;
        bad[6] = 9;
        assert!(matches!(read_field_bytes(&bad), Err(SpinflowError::Format(_))));
    }
}
