//! Binary storage for phase functions.
//!
//! Layout (all little-endian):
//!
//! | offset | size | field |
//! |---|---|---|
//! | 0 | 8 | magic `b"NONOSCPF"` |
//! | 8 | 4 | version (u32, currently 1) |
//! | 12 | 4 | reserved, zero |
//! | 16 | 8 | λ (f64) |
//! | 24 | 8 | a (f64) |
//! | 32 | 8 | b (f64) |
//! | 40 | 8 | n, number of intervals (u64) |
//! | 48 | 8 | m, order (u64) |
//! | 56 | 8(n+1) | breakpoints |
//!
//! followed by the node tables of α, α', α'', r, r' in that order, each
//! holding `n (m+1)` values, interval by interval. Every write also produces
//! a JSON sidecar at `<path>.json` with the same metadata.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chebcore::PiecewiseChebyshev;
use crate::kummer::PhaseFunction;
use crate::{Error, Result};

pub const MAGIC: [u8; 8] = *b"NONOSCPF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 56;
pub const TABLES: [&str; 5] = ["alpha", "alpha_prime", "alpha_second", "r", "r_prime"];

/// Sidecar contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseFileMeta {
    pub format: String,
    pub version: u32,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub intervals: usize,
    pub order: usize,
    pub breakpoints: Vec<f64>,
    pub tables: Vec<String>,
    pub bytes: usize,
}

impl PhaseFileMeta {
    pub fn of(phase: &PhaseFunction) -> Self {
        let intervals = phase.breakpoints().len() - 1;
        let order = phase.order();
        PhaseFileMeta {
            format: String::from_utf8_lossy(&MAGIC).into_owned(),
            version: VERSION,
            lambda: phase.lambda(),
            a: phase.a(),
            b: phase.b(),
            intervals,
            order,
            breakpoints: phase.breakpoints().to_vec(),
            tables: TABLES.iter().map(|s| s.to_string()).collect(),
            bytes: encoded_len(intervals, order),
        }
    }
}

fn encoded_len(n: usize, m: usize) -> usize {
    HEADER_LEN + 8 * (n + 1) + 8 * TABLES.len() * n * (m + 1)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode_phase(phase: &PhaseFunction) -> Vec<u8> {
    let n = phase.breakpoints().len() - 1;
    let m = phase.order();
    let mut out = Vec::with_capacity(encoded_len(n, m));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for x in [phase.lambda(), phase.a(), phase.b()] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(m as u64).to_le_bytes());
    let tables = [phase.alpha(), phase.alpha_prime(), phase.alpha_second(), phase.r(), phase.r_prime()];
    for x in phase.breakpoints().iter().chain(tables.iter().flat_map(|t| t.values())) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(bytes.try_into().unwrap())
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        (0..count).map(|_| self.f64()).collect()
    }
}

pub fn decode_phase(buf: &[u8]) -> Result<PhaseFunction> {
    let mut rd = Reader { buf, pos: 0 };
    if rd.take::<8>()? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(rd.take()?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    rd.take::<4>()?;
    let lambda = rd.f64()?;
    let a = rd.f64()?;
    let b = rd.f64()?;
    let n = rd.u64()? as usize;
    let m = rd.u64()? as usize;
    if n == 0 || m == 0 || buf.len() != encoded_len(n, m) {
        return Err(Error::Format(format!(
            "size {} does not match {n} intervals of order {m}",
            buf.len()
        )));
    }
    let breakpoints = rd.f64s(n + 1)?;
    if breakpoints[0] != a || breakpoints[n] != b {
        return Err(Error::Format("header interval disagrees with breakpoints".into()));
    }
    let mut parts = Vec::with_capacity(TABLES.len());
    for _ in TABLES {
        let values = rd.f64s(n * (m + 1))?;
        parts.push(PiecewiseChebyshev::new(breakpoints.clone(), m, values)?);
    }
    let [alpha, alpha_prime, alpha_second, r, rp]: [PiecewiseChebyshev; 5] = parts.try_into().unwrap();
    PhaseFunction::from_parts(lambda, alpha, alpha_prime, alpha_second, r, rp)
}

/// Writes the binary file and its JSON sidecar.
pub fn write_phase(path: &Path, phase: &PhaseFunction) -> Result<()> {
    fs::write(path, encode_phase(phase)).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(&PhaseFileMeta::of(phase)).expect("metadata serializes");
    fs::write(&side, json + "\n").map_err(|e| Error::io(&side, e))
}

pub fn read_phase(path: &Path) -> Result<PhaseFunction> {
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_phase(&buf)
}

pub fn read_meta(path: &Path) -> Result<PhaseFileMeta> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", side.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kummer::{build_phase, CoefficientProblem, PhaseOptions};

    fn sample() -> PhaseFunction {
        let prob = CoefficientProblem::new(|t| 1.0 + t * t, 40.0, -1.0, 1.0).unwrap();
        build_phase(&prob, &PhaseOptions::uniform(-1.0, 1.0, 4, 12)).unwrap()
    }

    #[test]
    fn encode_decode_is_exact() {
        let phase = sample();
        let bytes = encode_phase(&phase);
        assert_eq!(bytes.len(), HEADER_LEN + 8 * 5 + 8 * 5 * 4 * 13);
        let back = decode_phase(&bytes).unwrap();
        for t in [-1.0, -0.3, 0.0, 0.77, 1.0] {
            let (x, y) = (phase.eval(t).unwrap(), back.eval(t).unwrap());
            assert_eq!(x.alpha.to_bits(), y.alpha.to_bits());
            assert_eq!(x.alpha_prime.to_bits(), y.alpha_prime.to_bits());
        }
        assert_eq!(encode_phase(&back), bytes);
    }

    #[test]
    fn rejects_damage() {
        let bytes = encode_phase(&sample());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_phase(&bad), Err(Error::Format(_))));
        assert!(matches!(decode_phase(&bytes[..bytes.len() - 1]), Err(Error::Format(_))));
        let mut v2 = bytes.clone();
        v2[8] = 2;
        assert!(matches!(decode_phase(&v2), Err(Error::Format(_))));
    }

    #[test]
    fn file_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.pfn");
        let phase = sample();
        write_phase(&path, &phase).unwrap();
        let meta = read_meta(&path).unwrap();
        assert_eq!(meta, PhaseFileMeta::of(&phase));
        assert_eq!(meta.bytes, fs::metadata(&path).unwrap().len() as usize);
        assert_eq!(encode_phase(&read_phase(&path).unwrap()), encode_phase(&phase));
        assert!(matches!(read_phase(&dir.path().join("missing")), Err(Error::Io { .. })));
    }
}
