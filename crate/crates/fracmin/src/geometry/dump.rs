//! Text dump of a label field over the whole window.
//!
//! Format: a fixed magic line, one header line with the problem parameters,
//! one line with the raster dimensions, then one run-length-encoded line per
//! vertical level (bottom first, row-major within a level). Runs are encoded
//! as `count*bit`. Encoding is canonical (maximal runs), so dump -> load ->
//! dump is byte-identical.

use std::io::{BufRead, Write};
use std::sync::Arc;

use thiserror::Error;

use super::{make_problem, GeometryError, LabelField, ProblemSpec};
use crate::scalar::Scalar;

const MAGIC: &str = "fracmin grid v1";

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a grid dump (bad magic line)")]
    BadMagic,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("malformed run-length data at level {0}")]
    BadRuns(usize),
    #[error("raster does not match the declared dimensions")]
    BadShape,
    #[error("fixed cell {0} disagrees with its implied label")]
    InconsistentFixed(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub fn write_dump<T: Scalar, W: Write>(field: &LabelField<T>, out: &mut W) -> Result<(), DumpError> {
    let p = field.problem();
    let g = &p.grid;
    writeln!(out, "{MAGIC}")?;
    writeln!(
        out,
        "n={} s={} M={} h={} pad={} clamp={}",
        g.n,
        p.s.f64(),
        p.m.f64(),
        g.h.f64(),
        g.pad.f64(),
        p.clamp_band
    )?;
    if g.n == 2 {
        writeln!(out, "{}x{}", g.nx, g.nz)?;
    } else {
        writeln!(out, "{}x{}x{}", g.nx, g.nx, g.nz)?;
    }
    let raster = field.window_raster();
    let layer = g.layer_len();
    for iz in 0..g.nz {
        let row = &raster[iz * layer..(iz + 1) * layer];
        let mut first = true;
        let mut i = 0;
        while i < row.len() {
            let bit = row[i];
            let mut j = i;
            while j < row.len() && row[j] == bit {
                j += 1;
            }
            if !first {
                write!(out, " ")?;
            }
            write!(out, "{}*{}", j - i, if bit { 1 } else { 0 })?;
            first = false;
            i = j;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads a dump back into a label field. `trunc_radius` is not part of the
/// format; pass `None` to use the default policy `max(4, 2M)`.
pub fn read_dump<T: Scalar, R: BufRead>(
    input: &mut R,
    trunc_radius: Option<T>,
) -> Result<LabelField<T>, DumpError> {
    let mut lines = input.lines();
    let magic = lines.next().ok_or(DumpError::BadMagic)??;
    if magic != MAGIC {
        return Err(DumpError::BadMagic);
    }
    let header = lines
        .next()
        .ok_or_else(|| DumpError::BadHeader("missing".into()))??;
    let mut n = None;
    let mut s = None;
    let mut m = None;
    let mut h = None;
    let mut pad = None;
    let mut clamp = None;
    for part in header.split_whitespace() {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| DumpError::BadHeader(part.to_string()))?;
        let bad = || DumpError::BadHeader(part.to_string());
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
            "s" => s = Some(value.parse::<f64>().map_err(|_| bad())?),
            "M" => m = Some(value.parse::<f64>().map_err(|_| bad())?),
            "h" => h = Some(value.parse::<f64>().map_err(|_| bad())?),
            "pad" => pad = Some(value.parse::<f64>().map_err(|_| bad())?),
            "clamp" => clamp = Some(value.parse::<bool>().map_err(|_| bad())?),
            other => return Err(DumpError::BadHeader(other.to_string())),
        }
    }
    let missing = |k: &str| DumpError::BadHeader(format!("missing key {k}"));
    let n = n.ok_or_else(|| missing("n"))?;
    let s = T::of(s.ok_or_else(|| missing("s"))?);
    let m = T::of(m.ok_or_else(|| missing("M"))?);
    let h = T::of(h.ok_or_else(|| missing("h"))?);
    let pad = T::of(pad.ok_or_else(|| missing("pad"))?);
    let clamp = clamp.ok_or_else(|| missing("clamp"))?;
    let trunc = trunc_radius.unwrap_or_else(|| super::default_trunc_radius(m));

    let problem: ProblemSpec<T> = make_problem(n, s, m, h, pad, clamp, trunc)?;
    let dims_line = lines
        .next()
        .ok_or_else(|| DumpError::BadHeader("missing dims".into()))??;
    let dims: Vec<usize> = dims_line
        .split('x')
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| DumpError::BadHeader(dims_line.clone()))?;
    let expect: Vec<usize> = if n == 2 {
        vec![problem.grid.nx, problem.grid.nz]
    } else {
        vec![problem.grid.nx, problem.grid.nx, problem.grid.nz]
    };
    if dims != expect {
        return Err(DumpError::BadShape);
    }

    let layer = problem.grid.layer_len();
    let mut raster = Vec::with_capacity(problem.grid.window_len());
    for iz in 0..problem.grid.nz {
        let line = lines.next().ok_or(DumpError::BadRuns(iz))??;
        let mut row_len = 0usize;
        for token in line.split_whitespace() {
            let (count, bit) = token.split_once('*').ok_or(DumpError::BadRuns(iz))?;
            let count: usize = count.parse().map_err(|_| DumpError::BadRuns(iz))?;
            let bit = match bit {
                "0" => false,
                "1" => true,
                _ => return Err(DumpError::BadRuns(iz)),
            };
            raster.extend(std::iter::repeat(bit).take(count));
            row_len += count;
        }
        if row_len != layer {
            return Err(DumpError::BadShape);
        }
    }

    let problem = Arc::new(problem);
    let exterior = problem.exterior_datum();
    let mut labels = vec![false; problem.num_free()];
    for w in 0..problem.grid.window_len() {
        let c = problem.grid.coord_of_window(w);
        match problem.free_index(c) {
            Some(f) => labels[f] = raster[w],
            None => {
                if problem.implied_label(c, &exterior) != raster[w] {
                    return Err(DumpError::InconsistentFixed(w));
                }
            }
        }
    }
    Ok(LabelField::new(problem, labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_problem;
    use std::io::BufReader;

    #[test]
    fn round_trip_is_byte_identical() {
        let p = Arc::new(make_problem(2, 0.5, 1.0, 0.25, 1.0, true, 2.0).unwrap());
        let mut field = LabelField::from_datum(p.clone());
        field.set(3, true);
        field.set(17, true);
        let mut buf = Vec::new();
        write_dump(&field, &mut buf).unwrap();
        let loaded = read_dump::<f64, _>(&mut BufReader::new(&buf[..]), Some(2.0)).unwrap();
        assert_eq!(loaded.labels(), field.labels());
        let mut buf2 = Vec::new();
        write_dump(&loaded, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn inconsistent_fixed_cells_rejected() {
        let p = Arc::new(make_problem(2, 0.5, 1.0, 0.25, 1.0, true, 2.0).unwrap());
        let field = LabelField::from_datum(p);
        let mut buf = Vec::new();
        write_dump(&field, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // flip the bottom row (fixed band) to zeros
        let mut lines: Vec<&str> = text.lines().collect();
        let flipped = "8*0";
        lines[3] = flipped;
        let broken = lines.join("\n") + "\n";
        let err = read_dump::<f64, _>(&mut BufReader::new(broken.as_bytes()), Some(2.0));
        assert!(matches!(err, Err(DumpError::InconsistentFixed(_))));
    }

    #[test]
    fn unknown_header_key_rejected() {
        let text = "fracmin grid v1\nn=2 s=0.5 M=1 h=0.25 pad=1 clamp=true mm=3\n8x16\n";
        let err = read_dump::<f64, _>(&mut BufReader::new(text.as_bytes()), None);
        assert!(matches!(err, Err(DumpError::BadHeader(_))));
    }
}
