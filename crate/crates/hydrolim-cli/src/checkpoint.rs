//! Binary checkpoint format for the compressible state.
//!
//! Layout (little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "HLIM"
//! 4       4     u32 version (1)
//! 8       12    u32 nx, ny, nz
//! 20      8     f64 epsilon
//! 28      8     f64 time
//! 36      -     four f64 arrays of nx*ny*nz physical samples in the order
//!               sigma, v1, v2, w, row-major with x fastest
//! ```

use crate::error::HarnessError;
use hydrolim_core::{CfState, Grid, Parity, SpectralField};
use ndarray::Array3;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"HLIM";
const VERSION: u32 = 1;

fn write_field(buf: &mut Vec<u8>, field: &SpectralField, grid: Grid) {
    let phys = field.to_physical();
    for iz in 0..grid.nz {
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                buf.extend_from_slice(&phys[[ix, iy, iz]].to_le_bytes());
            }
        }
    }
}

pub fn checkpoint_write(state: &CfState, path: &Path) -> Result<(), HarnessError> {
    let grid = state.grid();
    let mut buf = Vec::with_capacity(36 + 4 * 8 * grid.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(grid.nx as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.ny as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.nz as u32).to_le_bytes());
    buf.extend_from_slice(&state.epsilon.to_le_bytes());
    buf.extend_from_slice(&state.time.to_le_bytes());
    for field in [&state.sigma, &state.v1, &state.v2, &state.w] {
        write_field(&mut buf, field, grid);
    }
    let mut file = std::fs::File::create(path).map_err(|source| HarnessError::WriteFile {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(&buf).map_err(|source| HarnessError::WriteFile {
        path: path.to_path_buf(),
        source,
    })
}

struct Cursor<'a> {
    data: &'a [u8],
    offset: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], HarnessError> {
        if self.offset + n > self.data.len() {
            return Err(HarnessError::Checkpoint {
                offset: self.offset as u64,
                reason: format!(
                    "truncated while reading {what}: need {n} bytes, have {}",
                    self.data.len() - self.offset
                ),
            });
        }
        let slice = &self.data[self.offset..self.offset + n];
        self.offset += n;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32, HarnessError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64, HarnessError> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn checkpoint_read(path: &Path) -> Result<CfState, HarnessError> {
    let mut data = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(|source| HarnessError::ReadFile {
            path: path.to_path_buf(),
            source,
        })?;
    let mut cur = Cursor {
        data: &data,
        offset: 0,
    };

    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(HarnessError::Checkpoint {
            offset: 0,
            reason: format!("bad magic {magic:02x?}, expected {MAGIC:02x?}"),
        });
    }
    let version = cur.u32("version")?;
    if version != VERSION {
        return Err(HarnessError::Checkpoint {
            offset: 4,
            reason: format!("unsupported version {version}"),
        });
    }
    let nx = cur.u32("nx")? as usize;
    let ny = cur.u32("ny")? as usize;
    let nz = cur.u32("nz")? as usize;
    let grid = Grid::new(nx, ny, nz).map_err(|e| HarnessError::Checkpoint {
        offset: 8,
        reason: e.to_string(),
    })?;
    let epsilon = cur.f64("epsilon")?;
    let time = cur.f64("time")?;

    let mut read_field = |parity: Parity, what: &str| -> Result<SpectralField, HarnessError> {
        let mut phys = Array3::zeros((nx, ny, nz));
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    phys[[ix, iy, iz]] = cur.f64(what)?;
                }
            }
        }
        let field = SpectralField::from_physical(grid, &phys)
            .map_err(|e| HarnessError::Checkpoint {
                offset: cur.offset as u64,
                reason: e.to_string(),
            })?;
        Ok(field.project_parity(parity))
    };

    let sigma = read_field(Parity::EvenZ, "sigma")?;
    let v1 = read_field(Parity::EvenZ, "v1")?;
    let v2 = read_field(Parity::EvenZ, "v2")?;
    let w = read_field(Parity::OddZ, "w")?;

    let state = CfState::new(sigma, v1, v2, w, epsilon, time)?;
    if cur.offset != data.len() {
        return Err(HarnessError::Checkpoint {
            offset: cur.offset as u64,
            reason: format!("{} trailing bytes", data.len() - cur.offset),
        });
    }
    Ok(state)
}
