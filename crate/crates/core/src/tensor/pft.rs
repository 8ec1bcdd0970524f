//! PFT1 binary tensor encoding.
//!
//! Layout: the four magic bytes `PFT1`, a little-endian `u32` rank, `rank`
//! little-endian `u32` dimensions, then `product(dims)` little-endian `f32`
//! values in row-major order. Encoding is bit-exact: NaN payloads and signed
//! zeros survive a round trip.

use alloc::vec::Vec;

use super::Tensor;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PFT1";

pub fn encode(t: &Tensor<f32>) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 4 * t.rank() + 4 * t.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(t.rank() as u32).to_le_bytes());
    for &d in t.shape() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in t.data() {
        out.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format(alloc::format!("truncated header at byte {at}")))
}

pub fn decode(bytes: &[u8]) -> Result<Tensor<f32>> {
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing PFT1 magic".into()));
    }
    let rank = read_u32(bytes, 4)? as usize;
    let mut shape = Vec::with_capacity(rank);
    for i in 0..rank {
        shape.push(read_u32(bytes, 8 + 4 * i)? as usize);
    }
    let start = 8 + 4 * rank;
    let n = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format("dimension product overflows".into()))?;
    let payload = &bytes[start.min(bytes.len())..];
    if payload.len() != n * 4 {
        return Err(Error::Format(alloc::format!(
            "payload has {} bytes, shape {:?} needs {}",
            payload.len(),
            shape,
            n * 4
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|b| f32::from_bits(u32::from_le_bytes([b[0], b[1], b[2], b[3]])))
        .collect();
    Tensor::new(shape, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_exact() {
        let t = Tensor::new([1, 2], alloc::vec![1.0f32, -0.0]).unwrap();
        let b = encode(&t);
        let mut expect = Vec::new();
        expect.extend_from_slice(b"PFT1");
        expect.extend_from_slice(&2u32.to_le_bytes());
        expect.extend_from_slice(&1u32.to_le_bytes());
        expect.extend_from_slice(&2u32.to_le_bytes());
        expect.extend_from_slice(&1.0f32.to_le_bytes());
        expect.extend_from_slice(&(-0.0f32).to_le_bytes());
        assert_eq!(b, expect);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(decode(b"PFT0\0\0\0\0").is_err());
        let mut b = encode(&Tensor::<f32>::zeros([3]));
        b.pop();
        assert!(decode(&b).is_err());
    }
}
