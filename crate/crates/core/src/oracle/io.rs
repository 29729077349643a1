//! LatticePmf export: CSV (coordinates, prob) and the binary grid format
//! (magic "PPMF", version u16, d u16, radius u64, then f64 row-major).

use std::io::{Read, Write};

use super::{LatticePmf, OracleError};

pub const PPMF_MAGIC: &[u8; 4] = b"PPMF";
pub const PPMF_VERSION: u16 = 1;

fn coord_names(d: usize) -> Vec<String> {
    match d {
        2 => vec!["x".into(), "y".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        _ => (1..=d).map(|i| format!("x{i}")).collect(),
    }
}

/// One row per cell with positive mass, probabilities to 17 significant
/// digits.
pub fn write_csv<W: Write>(mut w: W, pmf: &LatticePmf) -> Result<(), OracleError> {
    let mut out = coord_names(pmf.dim()).join(",");
    out.push_str(",prob\n");
    for (x, p) in pmf.iter() {
        for c in x.coords() {
            out.push_str(&c.to_string());
            out.push(',');
        }
        out.push_str(&format!("{p:.16e}\n"));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

pub fn write_ppmf<W: Write>(mut w: W, pmf: &LatticePmf) -> Result<(), OracleError> {
    let mut buf = Vec::with_capacity(16 + 8 * pmf.mass().len());
    buf.extend_from_slice(PPMF_MAGIC);
    buf.extend_from_slice(&PPMF_VERSION.to_le_bytes());
    buf.extend_from_slice(&(pmf.dim() as u16).to_le_bytes());
    buf.extend_from_slice(&pmf.box_radius().to_le_bytes());
    for p in pmf.mass() {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a grid written by [`write_ppmf`]; the leaked mass is not stored and
/// comes back as 1 - total.
pub fn read_ppmf<R: Read>(mut r: R) -> Result<LatticePmf, OracleError> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[..4] != PPMF_MAGIC {
        return Err(OracleError::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != PPMF_VERSION {
        return Err(OracleError::Format(format!("unsupported version {version}")));
    }
    let d = u16::from_le_bytes([header[6], header[7]]) as usize;
    let radius = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    let cells = LatticePmf::zeros(d, radius)?.mass().len();
    if body.len() != cells * 8 {
        return Err(OracleError::Format(format!("expected {} payload bytes, found {}", cells * 8, body.len())));
    }
    let mass: Vec<f64> = body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
    let total: f64 = mass.iter().sum();
    Ok(LatticePmf::from_parts(d, radius, mass, (1.0 - total).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticePoint;
    use crate::law::JumpLaw;
    use crate::oracle::n_step_pmf;

    #[test]
    fn csv_layout() {
        let pmf = n_step_pmf(&JumpLaw::lazy_srw(2).unwrap(), &LatticePoint::origin(2), 1, 1).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &pmf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,prob");
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[1], "-1,0,2.0000000000000001e-1");
    }

    #[test]
    fn ppmf_round_trip() {
        let pmf = n_step_pmf(&JumpLaw::product_lazy(3).unwrap(), &LatticePoint::origin(3), 3, 3).unwrap();
        let mut buf = Vec::new();
        write_ppmf(&mut buf, &pmf).unwrap();
        assert_eq!(&buf[..4], b"PPMF");
        assert_eq!(buf.len(), 16 + 7usize.pow(3) * 8);
        let back = read_ppmf(&buf[..]).unwrap();
        assert_eq!(back.mass(), pmf.mass());
        assert!(back.leaked() < 1e-15);
        buf.truncate(100);
        assert!(matches!(read_ppmf(&buf[..]), Err(OracleError::Format(_))));
    }
}
