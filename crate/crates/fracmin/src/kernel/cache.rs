//! Binary cache for kernel tables, keyed by the exact build parameters.
//!
//! Layout: magic + version, the key fields as little-endian bit patterns,
//! then the weight and tail arrays as f64. Loading verifies every key field
//! bit-for-bit and rejects anything else.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{KernelError, KernelTable};
use crate::geometry::ProblemSpec;
use crate::scalar::Scalar;

const MAGIC: &[u8; 8] = b"FRACMKT\x01";

/// Cache file name for a problem's table parameters.
pub fn cache_file_name<T: Scalar>(problem: &ProblemSpec<T>) -> String {
    format!(
        "kt-n{}-s{:016x}-h{:016x}-m{:016x}-hh{:016x}-k{}.bin",
        problem.grid.n,
        problem.s.f64().to_bits(),
        problem.grid.h.f64().to_bits(),
        problem.m.f64().to_bits(),
        problem.grid.half_height.f64().to_bits(),
        problem.kernel_extent()
    )
}

pub fn save<T: Scalar>(table: &KernelTable<T>, path: &Path) -> Result<(), KernelError> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(table.n as u64).to_le_bytes());
    buf.extend_from_slice(&table.s.f64().to_bits().to_le_bytes());
    buf.extend_from_slice(&table.h.f64().to_bits().to_le_bytes());
    buf.extend_from_slice(&table.m.f64().to_bits().to_le_bytes());
    buf.extend_from_slice(&table.half_height.f64().to_bits().to_le_bytes());
    buf.extend_from_slice(&(table.extent as u64).to_le_bytes());
    buf.extend_from_slice(&(table.nz as u64).to_le_bytes());
    buf.extend_from_slice(&(table.weights.len() as u64).to_le_bytes());
    for w in &table.weights {
        buf.extend_from_slice(&w.f64().to_bits().to_le_bytes());
    }
    for (a, b) in &table.tails {
        buf.extend_from_slice(&a.f64().to_bits().to_le_bytes());
        buf.extend_from_slice(&b.f64().to_bits().to_le_bytes());
    }
    let tmp: PathBuf = path.with_extension("tmp");
    let io = |e: std::io::Error| KernelError::Cache(e.to_string());
    let mut file = fs::File::create(&tmp).map_err(io)?;
    file.write_all(&buf).map_err(io)?;
    file.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}

pub fn load<T: Scalar>(problem: &ProblemSpec<T>, path: &Path) -> Result<KernelTable<T>, KernelError> {
    let io = |e: std::io::Error| KernelError::Cache(e.to_string());
    let mut data = Vec::new();
    fs::File::open(path).map_err(io)?.read_to_end(&mut data).map_err(io)?;
    struct Reader<'a> {
        data: &'a [u8],
        cursor: usize,
    }
    impl<'a> Reader<'a> {
        fn take(&mut self, len: usize) -> Result<&'a [u8], KernelError> {
            if self.cursor + len > self.data.len() {
                return Err(KernelError::Cache("truncated cache file".into()));
            }
            let out = &self.data[self.cursor..self.cursor + len];
            self.cursor += len;
            Ok(out)
        }
        fn u64(&mut self) -> Result<u64, KernelError> {
            Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
        }
    }
    let mut rd = Reader { data: &data, cursor: 0 };

    if rd.take(8)? != MAGIC {
        return Err(KernelError::Cache("bad magic/version".into()));
    }
    let n = rd.u64()? as usize;
    let s_bits = rd.u64()?;
    let h_bits = rd.u64()?;
    let m_bits = rd.u64()?;
    let hh_bits = rd.u64()?;
    let extent = rd.u64()? as usize;
    let nz = rd.u64()? as usize;
    let wlen = rd.u64()? as usize;

    let expect_extent = problem.kernel_extent();
    if n != problem.grid.n
        || s_bits != problem.s.f64().to_bits()
        || h_bits != problem.grid.h.f64().to_bits()
        || m_bits != problem.m.f64().to_bits()
        || hh_bits != problem.grid.half_height.f64().to_bits()
        || extent != expect_extent
        || nz != problem.grid.nz
    {
        return Err(KernelError::Cache("key mismatch".into()));
    }
    let side = 2 * extent + 1;
    let expect_wlen = if n == 2 { side * side } else { side * side * side };
    if wlen != expect_wlen {
        return Err(KernelError::Cache("weight count mismatch".into()));
    }

    let mut weights = Vec::with_capacity(wlen);
    for _ in 0..wlen {
        weights.push(T::of(f64::from_bits(rd.u64()?)));
    }
    let mut tails = Vec::with_capacity(nz);
    for _ in 0..nz {
        let a = T::of(f64::from_bits(rd.u64()?));
        let b = T::of(f64::from_bits(rd.u64()?));
        tails.push((a, b));
    }
    Ok(KernelTable {
        n,
        s: problem.s,
        h: problem.grid.h,
        m: problem.m,
        half_height: problem.grid.half_height,
        extent,
        nz,
        weights,
        tails,
    })
}

/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "FRACMIN_CACHE_DIR";

/// Builds the table, consulting `FRACMIN_CACHE_DIR` when set.
pub fn build_cached<T: Scalar>(problem: &ProblemSpec<T>) -> Result<KernelTable<T>, KernelError> {
    if let Ok(dir) = std::env::var(CACHE_DIR_ENV) {
        let dir = PathBuf::from(dir);
        let path = dir.join(cache_file_name(problem));
        if path.exists() {
            if let Ok(table) = load(problem, &path) {
                return Ok(table);
            }
        }
        let table = super::build_kernel_table(problem)?;
        let _ = fs::create_dir_all(&dir);
        // best effort: a failed write must not fail the run
        let _ = save(&table, &path);
        return Ok(table);
    }
    super::build_kernel_table(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_problem;
    use crate::kernel::build_kernel_table;

    #[test]
    fn save_load_round_trip_is_exact() {
        let p = make_problem(2, 0.5f64, 0.5, 0.25, 1.0, true, 1.0).unwrap();
        let table = build_kernel_table(&p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(cache_file_name(&p));
        save(&table, &path).unwrap();
        let loaded = load::<f64>(&p, &path).unwrap();
        assert_eq!(table, loaded);
    }

    #[test]
    fn key_mismatch_rejected() {
        let p = make_problem(2, 0.5f64, 0.5, 0.25, 1.0, true, 1.0).unwrap();
        let table = build_kernel_table(&p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.bin");
        save(&table, &path).unwrap();
        let other = make_problem(2, 0.6f64, 0.5, 0.25, 1.0, true, 1.0).unwrap();
        assert!(load::<f64>(&other, &path).is_err());
    }
}
