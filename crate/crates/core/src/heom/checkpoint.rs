//! Binary checkpoints of a full hierarchy.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      8 bytes  "QHEOMCKP"
//! version    u32
//! depth      u32
//! ado dim    u32      (always 4)
//! ado count  u64
//! scaling    u8 tag (0 unscaled, 1 balanced) + 2 x f64 factors
//! params     32 bytes SHA-256 of the model parameters
//! time       f64
//! data       ado count * 16 * (re f64, im f64), stored representation
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use sha2::{Digest, Sha256};

use super::hierarchy::{ado_count, AdoScaling, HierarchyState, ADO_LEN};
use super::{HeomError, Result};
use crate::model::ModelSpec;

const MAGIC: &[u8; 8] = b"QHEOMCKP";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub t: f64,
    pub state: HierarchyState,
    pub parameter_hash: [u8; 32],
}

/// SHA-256 over the Hamiltonian entries and bath parameters.
pub fn parameter_hash(model: &ModelSpec) -> [u8; 32] {
    let mut h = Sha256::new();
    for z in model.hamiltonian().as_slice() {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    for bath in model.baths() {
        for v in [bath.lambda_b, bath.gamma, bath.temperature] {
            h.update(v.to_le_bytes());
        }
    }
    h.finalize().into()
}

fn io(e: std::io::Error) -> HeomError {
    HeomError::Checkpoint(e.to_string())
}

pub fn write_checkpoint(
    path: &Path,
    state: &HierarchyState,
    t: f64,
    model: &ModelSpec,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let (tag, factors) = match state.scaling() {
        AdoScaling::Unscaled => (0u8, [1.0, 1.0]),
        AdoScaling::Balanced(s) => (1u8, s),
    };
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(io);
    put(MAGIC)?;
    put(&CHECKPOINT_VERSION.to_le_bytes())?;
    put(&(state.depth() as u32).to_le_bytes())?;
    put(&4u32.to_le_bytes())?;
    put(&(state.ado_count() as u64).to_le_bytes())?;
    put(&[tag])?;
    put(&factors[0].to_le_bytes())?;
    put(&factors[1].to_le_bytes())?;
    put(&parameter_hash(model))?;
    put(&t.to_le_bytes())?;
    for z in state.raw() {
        put(&z.re.to_le_bytes())?;
        put(&z.im.to_le_bytes())?;
    }
    w.flush().map_err(io)
}

struct Reader<R>(R);

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b).map_err(io)?;
        Ok(b)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

/// Reads a checkpoint, rejecting it when written for different parameters.
pub fn read_checkpoint(path: &Path, model: &ModelSpec) -> Result<Checkpoint> {
    let mut r = Reader(BufReader::new(File::open(path).map_err(io)?));
    if &r.bytes::<8>()? != MAGIC {
        return Err(HeomError::Checkpoint("not a hierarchy checkpoint".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(HeomError::Checkpoint(format!("unsupported version {version}")));
    }
    let depth = r.u32()? as usize;
    let dim = r.u32()?;
    let count = r.u64()? as usize;
    if dim != 4 || depth == 0 || count != ado_count(depth) {
        return Err(HeomError::Checkpoint("inconsistent header".into()));
    }
    let tag = r.bytes::<1>()?[0];
    let factors = [r.f64()?, r.f64()?];
    let scaling = match tag {
        0 => AdoScaling::Unscaled,
        1 => AdoScaling::Balanced(factors),
        _ => return Err(HeomError::Checkpoint(format!("unknown scaling tag {tag}"))),
    };
    let parameter_hash = r.bytes::<32>()?;
    if parameter_hash != self::parameter_hash(model) {
        return Err(HeomError::Checkpoint("parameter hash mismatch".into()));
    }
    let t = r.f64()?;
    let mut data = Vec::with_capacity(count * ADO_LEN);
    for _ in 0..count * ADO_LEN {
        data.push(C64::new(r.f64()?, r.f64()?));
    }
    let mut trailing = [0u8; 1];
    if r.0.read(&mut trailing).map_err(io)? != 0 {
        return Err(HeomError::Checkpoint("trailing bytes".into()));
    }
    Ok(Checkpoint { t, state: HierarchyState::from_raw(depth, scaling, data)?, parameter_hash })
}
