//! Binary checkpoint container, little-endian throughout.
//!
//! Header: magic "OFL1", format version u32, grid n u32, box length f64,
//! viscosity f64, time f64, step u64, CRC32 of payload u32.
//! Payload: the three velocity component arrays as f64, axis-major with z
//! fastest. Read-after-write is bit-exact.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::solver::SolverState;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"OFL1";
const FORMAT_VERSION: u32 = 1;

pub fn checkpoint_write(state: &SolverState, path: &Path) -> Result<()> {
    let grid = state.grid();
    let n = grid.n();
    let count = grid.node_count();
    let mut payload = Vec::with_capacity(3 * count * 8);
    for c in 0..3 {
        for &v in state.velocity().component(c).values() {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut hasher = crc32fast::Hasher::new();
    hasher.update(&payload);
    let crc = hasher.finalize();

    let mut file = std::fs::File::create(path)?;
    file.write_all(MAGIC)?;
    file.write_all(&FORMAT_VERSION.to_le_bytes())?;
    file.write_all(&(n as u32).to_le_bytes())?;
    file.write_all(&grid.length().to_le_bytes())?;
    file.write_all(&state.viscosity().to_le_bytes())?;
    file.write_all(&state.time().to_le_bytes())?;
    file.write_all(&state.step_count().to_le_bytes())?;
    file.write_all(&crc.to_le_bytes())?;
    file.write_all(&payload)?;
    file.sync_all()?;
    Ok(())
}

pub fn checkpoint_read(path: &Path) -> Result<SolverState> {
    let mut file = std::fs::File::open(path)?;
    let mut header = [0u8; 4 + 4 + 4 + 8 + 8 + 8 + 8 + 4];
    file.read_exact(&mut header)
        .map_err(|_| Error::Checkpoint("truncated header".into()))?;
    if &header[0..4] != MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic {:?}, expected {:?}",
            &header[0..4],
            MAGIC
        )));
    }
    let u32_at = |off: usize| u32::from_le_bytes(header[off..off + 4].try_into().unwrap());
    let f64_at = |off: usize| f64::from_le_bytes(header[off..off + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "format version {version} not supported (reader handles {FORMAT_VERSION})"
        )));
    }
    let n = u32_at(8) as usize;
    let length = f64_at(12);
    let viscosity = f64_at(20);
    let time = f64_at(28);
    let step = u64::from_le_bytes(header[36..44].try_into().unwrap());
    let crc_expected = u32_at(44);

    let grid = Grid::new(n, length)
        .map_err(|e| Error::Checkpoint(format!("invalid grid in header: {e}")))?;
    let count = grid.node_count();
    let mut payload = vec![0u8; 3 * count * 8];
    file.read_exact(&mut payload)
        .map_err(|_| Error::Checkpoint("truncated payload".into()))?;
    let mut trailing = [0u8; 1];
    if file.read(&mut trailing)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after payload".into()));
    }

    let mut hasher = crc32fast::Hasher::new();
    hasher.update(&payload);
    let crc = hasher.finalize();
    if crc != crc_expected {
        return Err(Error::Checkpoint(format!(
            "payload checksum mismatch: stored {crc_expected:#010x}, computed {crc:#010x}"
        )));
    }

    let mut comps = Vec::with_capacity(3);
    for c in 0..3 {
        let base = c * count * 8;
        let values: Vec<f64> = (0..count)
            .map(|i| {
                f64::from_le_bytes(payload[base + i * 8..base + i * 8 + 8].try_into().unwrap())
            })
            .collect();
        comps.push(
            ScalarField::new(grid, values)
                .map_err(|e| Error::Checkpoint(format!("invalid component {c}: {e}")))?,
        );
    }
    let velocity = VectorField::new([
        comps.remove(0),
        comps.remove(0),
        comps.remove(0),
    ])?;
    SolverState::new(velocity, time, viscosity, step)
        .map_err(|e| Error::Checkpoint(format!("state validation failed: {e}")))
}
