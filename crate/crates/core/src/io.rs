//! `LOGSP1` field files: an ASCII header line `LOGSP1 <n> <L>\n` followed by
//! `n·n` little-endian `f64` samples, row-major.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

const MAGIC: &str = "LOGSP1";

pub fn encode_field(u: &GridFunction) -> Vec<u8> {
    let spec = u.spec();
    let header = format!("{MAGIC} {} {:?}\n", spec.n(), spec.half_width());
    let mut out = Vec::with_capacity(header.len() + 8 * spec.len());
    out.extend_from_slice(header.as_bytes());
    for v in u.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<GridFunction> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::Format("header is not ASCII".into()))?;
    let mut parts = header.split(' ');
    if parts.next() != Some(MAGIC) {
        return Err(Error::Format(format!("expected {MAGIC} magic")));
    }
    let n: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("bad point count".into()))?;
    let l: f64 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("bad half width".into()))?;
    if parts.next().is_some() {
        return Err(Error::Format("trailing header fields".into()));
    }
    let spec = GridSpec::new(l, n)?;
    let body = &bytes[nl + 1..];
    if body.len() != 8 * spec.len() {
        return Err(Error::Format(format!(
            "expected {} bytes of samples, found {}",
            8 * spec.len(),
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    GridFunction::from_values(spec, values)
}

pub fn write_field(path: &Path, u: &GridFunction) -> Result<()> {
    fs::write(path, encode_field(u)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_field(path: &Path) -> Result<GridFunction> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_field(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let spec = GridSpec::new(12.0, 16).unwrap();
        let bytes = encode_field(&GridFunction::zeros(spec));
        assert!(bytes.starts_with(b"LOGSP1 16 12.0\n"));
        assert_eq!(bytes.len(), 15 + 8 * 256);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(decode_field(b"LOGSP2 16 1.0\n").is_err());
        assert!(decode_field(b"LOGSP1 16 1.0").is_err());
        assert!(decode_field(b"LOGSP1 16 1.0\n\0\0").is_err());
        assert!(decode_field(b"LOGSP1 15 1.0\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip(l in 0.5f64..50.0, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let spec = GridSpec::new(l, 16).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..spec.len()).map(|_| rng.gen_range(-1e3..1e3)).collect();
            let u = GridFunction::from_values(spec, v).unwrap();
            let back = decode_field(&encode_field(&u)).unwrap();
            prop_assert_eq!(back, u);
        }
    }
}
