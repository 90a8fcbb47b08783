//! `GDYN1` snapshot files.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 5     | magic `GDYN1` |
//! | 4 × 3 | `l_max`, `n_r_inner`, `n_r_outer` as u32 |
//! | 8 × 3 | mode counts of the magnetic, velocity and buoyancy spaces as u64 |
//! | 8     | time as f64 |
//! | 8     | parameter hash as u64 |
//! | 8 × n | magnetic, then velocity, then buoyancy coefficients as f64 |
//!
//! Within each space coefficients follow the basis layout: l ascending, then
//! m from -l to l, then family (toroidal before poloidal), then radial index.

use crate::dynamo::StateVector;
use crate::error::{Error, Result};
use std::path::Path;

pub const MAGIC: &[u8; 5] = b"GDYN1";
const HEADER_LEN: usize = 5 + 12 + 24 + 16;

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotFile {
    pub l_max: usize,
    pub n_r_inner: usize,
    pub n_r_outer: usize,
    pub params_hash: u64,
    pub state: StateVector,
}

impl SnapshotFile {
    pub fn counts(&self) -> [usize; 3] {
        [self.state.g_b.len(), self.state.g_u.len(), self.state.g_t.len()]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let s = &self.state;
        let n: usize = self.counts().iter().sum();
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * n);
        out.extend_from_slice(MAGIC);
        for v in [self.l_max, self.n_r_inner, self.n_r_outer] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for v in self.counts() {
            out.extend_from_slice(&(v as u64).to_le_bytes());
        }
        out.extend_from_slice(&s.t.to_le_bytes());
        out.extend_from_slice(&self.params_hash.to_le_bytes());
        for x in s.g_b.iter().chain(&s.g_u).chain(&s.g_t) {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() < HEADER_LEN {
            return Err(Error::Snapshot(format!("file too short: {} bytes", b.len())));
        }
        if &b[..5] != MAGIC {
            return Err(Error::Snapshot("bad magic, expected GDYN1".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(b[o..o + 4].try_into().expect("4 bytes")) as usize;
        let u64_at = |o: usize| u64::from_le_bytes(b[o..o + 8].try_into().expect("8 bytes"));
        let f64_at = |o: usize| f64::from_le_bytes(b[o..o + 8].try_into().expect("8 bytes"));
        let (l_max, n_r_inner, n_r_outer) = (u32_at(5), u32_at(9), u32_at(13));
        let counts = [u64_at(17) as usize, u64_at(25) as usize, u64_at(33) as usize];
        let t = f64_at(41);
        let params_hash = u64_at(49);
        let n: usize = counts.iter().sum();
        if b.len() != HEADER_LEN + 8 * n {
            return Err(Error::Snapshot(format!(
                "payload holds {} bytes, header promises {} coefficients",
                b.len() - HEADER_LEN,
                n
            )));
        }
        let mut vals = (0..n).map(|k| f64_at(HEADER_LEN + 8 * k));
        let mut take = |k: usize| (&mut vals).take(k).collect::<Vec<f64>>();
        let state = StateVector {
            t,
            g_b: take(counts[0]),
            g_u: take(counts[1]),
            g_t: take(counts[2]),
        };
        Ok(Self {
            l_max,
            n_r_inner,
            n_r_outer,
            params_hash,
            state,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// Checks resolution, mode counts and parameter hash against a model.
    pub fn check_compatible(&self, l_max: usize, n_r: [usize; 2], counts: [usize; 3], hash: u64) -> Result<()> {
        if self.l_max != l_max || [self.n_r_inner, self.n_r_outer] != n_r {
            return Err(Error::Snapshot(format!(
                "resolution mismatch: expected l_max={l_max}, n_r_inner={}, n_r_outer={}; snapshot has l_max={}, n_r_inner={}, n_r_outer={}",
                n_r[0], n_r[1], self.l_max, self.n_r_inner, self.n_r_outer
            )));
        }
        if self.counts() != counts {
            return Err(Error::Snapshot(format!(
                "mode counts mismatch: expected {:?}, snapshot has {:?}",
                counts,
                self.counts()
            )));
        }
        if self.params_hash != hash {
            return Err(Error::Snapshot(format!(
                "parameter hash mismatch: expected {hash:016x}, snapshot has {:016x}",
                self.params_hash
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> SnapshotFile {
        SnapshotFile {
            l_max: 3,
            n_r_inner: 4,
            n_r_outer: 5,
            params_hash: 0xdead_beef_0123_4567,
            state: StateVector {
                t: 0.25,
                g_b: vec![1.0, -2.5, 3.0e-300],
                g_u: vec![f64::MIN_POSITIVE],
                g_t: vec![],
            },
        }
    }

    #[test]
    fn header_layout() {
        let b = sample().to_bytes();
        assert_eq!(&b[..5], b"GDYN1");
        assert_eq!(b.len(), HEADER_LEN + 8 * 4);
        assert_eq!(u32::from_le_bytes(b[5..9].try_into().unwrap()), 3);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let b = sample().to_bytes();
        assert!(SnapshotFile::from_bytes(&b[..b.len() - 1]).is_err());
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(SnapshotFile::from_bytes(&bad).is_err());
        let s = sample();
        let e = s.check_compatible(4, [4, 5], [3, 1, 0], s.params_hash).unwrap_err();
        assert!(e.to_string().contains("l_max=4"));
        assert!(s.check_compatible(3, [4, 5], [3, 1, 0], 1).is_err());
        assert!(s.check_compatible(3, [4, 5], [3, 1, 0], s.params_hash).is_ok());
    }

    proptest! {
        #[test]
        fn write_read_write_is_identical(
            gb in proptest::collection::vec(any::<f64>(), 0..20),
            gu in proptest::collection::vec(-1e3f64..1e3, 0..20),
            t in any::<f64>(),
            hash in any::<u64>(),
        ) {
            let s = SnapshotFile { l_max: 2, n_r_inner: 3, n_r_outer: 4, params_hash: hash,
                state: StateVector { t, g_b: gb, g_u: gu, g_t: vec![0.5] } };
            let b = s.to_bytes();
            let back = SnapshotFile::from_bytes(&b).unwrap();
            prop_assert_eq!(back.to_bytes(), b);
        }
    }
}
