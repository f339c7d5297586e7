//! Little-endian encode/decode helpers shared by the binary container
//! formats (bagged-tree models and compressed language models).
//!
//! Readers track their offset and fail loudly on truncation, so corrupt
//! or clipped files surface as format errors instead of panics.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Writer { buf: Vec::new() }
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_bits().to_le_bytes());
    }

    /// Length-prefixed UTF-8 (u32 byte count).
    pub fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.bytes(s.as_bytes());
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

impl Default for Writer {
    fn default() -> Self {
        Self::new()
    }
}

pub struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    path: PathBuf,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8], path: &Path) -> Self {
        Reader { data, pos: 0, path: path.to_path_buf() }
    }

    fn fail(&self, message: impl Into<String>) -> Error {
        Error::ModelFormat { path: self.path.clone(), message: message.into() }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(self.fail(format!(
                "truncated: needed {} bytes at offset {}, file has {}",
                n,
                self.pos,
                self.data.len()
            )));
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    pub fn str(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| self.fail("string field is not UTF-8"))
    }

    pub fn expect_magic(&mut self, magic: &[u8; 4], what: &str) -> Result<()> {
        let got = self.take(4)?;
        if got != magic {
            return Err(self.fail(format!("not a {what} file (bad magic)")));
        }
        Ok(())
    }

    pub fn done(&self) -> bool {
        self.pos == self.data.len()
    }
}

/// Fixed-width bit packing, LSB-first within each byte. Entry `i` of width
/// `w` occupies bits `[i*w, (i+1)*w)` of the stream.
#[derive(Debug, Clone)]
pub struct BitVec {
    bits: Vec<u8>,
    len: usize,
    width: u32,
}

impl BitVec {
    pub fn new(width: u32, entries: usize) -> Self {
        assert!((1..=32).contains(&width));
        let total_bits = width as usize * entries;
        BitVec { bits: vec![0u8; total_bits.div_ceil(8)], len: entries, width }
    }

    pub fn from_raw(bits: Vec<u8>, width: u32, entries: usize) -> Self {
        assert_eq!(bits.len(), (width as usize * entries).div_ceil(8));
        BitVec { bits, len: entries, width }
    }

    pub fn set(&mut self, i: usize, value: u32) {
        debug_assert!(i < self.len);
        debug_assert!(self.width == 32 || value < (1u32 << self.width));
        let base = i * self.width as usize;
        for (k, bit) in (base..base + self.width as usize).enumerate() {
            if value >> k & 1 == 1 {
                self.bits[bit / 8] |= 1 << (bit % 8);
            }
        }
    }

    pub fn get(&self, i: usize) -> u32 {
        debug_assert!(i < self.len);
        let mut out = 0u32;
        let base = i * self.width as usize;
        for (k, bit) in (base..base + self.width as usize).enumerate() {
            if self.bits[bit / 8] >> (bit % 8) & 1 == 1 {
                out |= 1 << k;
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn raw(&self) -> &[u8] {
        &self.bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_scalars() {
        let mut w = Writer::new();
        w.bytes(b"TEST");
        w.u8(7);
        w.u16(65535);
        w.u32(123456);
        w.u64(u64::MAX - 1);
        w.f64(-0.517029995663981);
        w.str("olá");
        let buf = w.finish();

        let mut r = Reader::new(&buf, Path::new("mem"));
        r.expect_magic(b"TEST", "test").unwrap();
        assert_eq!(r.u8().unwrap(), 7);
        assert_eq!(r.u16().unwrap(), 65535);
        assert_eq!(r.u32().unwrap(), 123456);
        assert_eq!(r.u64().unwrap(), u64::MAX - 1);
        assert_eq!(r.f64().unwrap(), -0.517029995663981);
        assert_eq!(r.str().unwrap(), "olá");
        assert!(r.done());
    }

    #[test]
    fn truncation_is_an_error() {
        let mut w = Writer::new();
        w.u64(42);
        let buf = w.finish();
        let mut r = Reader::new(&buf[..5], Path::new("mem"));
        assert!(r.u64().is_err());
    }

    #[test]
    fn bitvec_roundtrip_odd_width() {
        let mut bv = BitVec::new(12, 100);
        for i in 0..100 {
            bv.set(i, (i as u32 * 37) % 4096);
        }
        for i in 0..100 {
            assert_eq!(bv.get(i), (i as u32 * 37) % 4096, "entry {i}");
        }
        let packed = BitVec::from_raw(bv.raw().to_vec(), 12, 100);
        for i in 0..100 {
            assert_eq!(packed.get(i), (i as u32 * 37) % 4096);
        }
    }
}
