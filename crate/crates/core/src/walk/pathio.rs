//! Binary path export: 16-byte header (magic "PWLK", version u16, d u16,
//! n u64), then X_0..=X_n as little-endian i32 coordinates, d per point.

use std::io::{Read, Write};

use super::{FullPath, WalkError};

pub const PATH_MAGIC: &[u8; 4] = b"PWLK";
pub const PATH_VERSION: u16 = 1;

pub fn write_path<W: Write>(mut w: W, path: &FullPath) -> Result<(), WalkError> {
    let mut header = [0u8; 16];
    header[..4].copy_from_slice(PATH_MAGIC);
    header[4..6].copy_from_slice(&PATH_VERSION.to_le_bytes());
    header[6..8].copy_from_slice(&(path.d as u16).to_le_bytes());
    header[8..16].copy_from_slice(&path.horizon.to_le_bytes());
    let mut body = Vec::with_capacity(16 + 4 * path.d * (path.horizon as usize + 1));
    body.extend_from_slice(&header);
    for p in path.within_horizon() {
        for &c in p {
            let c = i32::try_from(c).map_err(|_| WalkError::PathRange)?;
            body.extend_from_slice(&c.to_le_bytes());
        }
    }
    w.write_all(&body)?;
    Ok(())
}

pub fn read_path<R: Read>(mut r: R) -> Result<FullPath, WalkError> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[..4] != PATH_MAGIC {
        return Err(WalkError::PathFormat("bad magic".into()));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != PATH_VERSION {
        return Err(WalkError::PathFormat(format!("unsupported version {version}")));
    }
    let d = u16::from_le_bytes([header[6], header[7]]) as usize;
    let horizon = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
    if d == 0 {
        return Err(WalkError::PathFormat("zero dimension".into()));
    }
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    let expected = (horizon as u128 + 1) * d as u128 * 4;
    if body.len() as u128 != expected {
        return Err(WalkError::PathFormat(format!("expected {expected} payload bytes, found {}", body.len())));
    }
    let points = body.chunks_exact(4).map(|b| i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as i64).collect();
    Ok(FullPath { d, horizon, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let path = FullPath { d: 2, horizon: 2, points: vec![0, 0, 1, 0, 1, -1, 7, 7] };
        let mut buf = Vec::new();
        write_path(&mut buf, &path).unwrap();
        assert_eq!(buf.len(), 16 + 3 * 2 * 4);
        assert_eq!(&buf[..4], b"PWLK");
        let back = read_path(&buf[..]).unwrap();
        // the continuation past the horizon is not exported
        assert_eq!(back.points, vec![0, 0, 1, 0, 1, -1]);
        assert_eq!(back.horizon, 2);
    }

    #[test]
    fn rejects_out_of_range_and_corrupt_input() {
        let path = FullPath { d: 2, horizon: 0, points: vec![1 << 40, 0] };
        assert_eq!(write_path(Vec::new(), &path), Err(WalkError::PathRange));
        let mut buf = Vec::new();
        write_path(&mut buf, &FullPath { d: 2, horizon: 1, points: vec![0, 0, 1, 0] }).unwrap();
        buf.pop();
        assert!(matches!(read_path(&buf[..]), Err(WalkError::PathFormat(_))));
        buf[0] = b'X';
        assert!(matches!(read_path(&buf[..]), Err(WalkError::PathFormat(_))));
    }
}
