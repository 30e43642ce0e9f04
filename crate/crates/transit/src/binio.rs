//! Little-endian helpers shared by the binary file formats.

use std::io::{self, Read, Write};

pub(crate) struct Out<W: Write> {
    inner: W,
}

impl<W: Write> Out<W> {
    pub fn new(inner: W) -> Self {
        Out { inner }
    }

    pub fn into_inner(self) -> W {
        self.inner
    }

    pub fn bytes(&mut self, b: &[u8]) -> io::Result<()> {
        self.inner.write_all(b)
    }

    pub fn u32(&mut self, v: u32) -> io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    pub fn u64(&mut self, v: u64) -> io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    pub fn f64(&mut self, v: f64) -> io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    pub fn usize(&mut self, v: usize) -> io::Result<()> {
        let v = u32::try_from(v).map_err(|_| io::Error::other("value exceeds u32"))?;
        self.u32(v)
    }

    pub fn str(&mut self, s: &str) -> io::Result<()> {
        self.usize(s.len())?;
        self.bytes(s.as_bytes())
    }

    /// Writes a section as `u64 byte length` followed by its payload.
    pub fn section(&mut self, payload: &[u8]) -> io::Result<()> {
        self.u64(payload.len() as u64)?;
        self.bytes(payload)
    }
}

pub(crate) struct In<R: Read> {
    inner: R,
}

fn invalid(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

impl<R: Read> In<R> {
    pub fn new(inner: R) -> Self {
        In { inner }
    }

    pub fn array<const N: usize>(&mut self) -> io::Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b)?;
        Ok(b)
    }

    pub fn u32(&mut self) -> io::Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    pub fn u64(&mut self) -> io::Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    pub fn f64(&mut self) -> io::Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    pub fn usize(&mut self) -> io::Result<usize> {
        Ok(self.u32()? as usize)
    }

    pub fn str(&mut self) -> io::Result<String> {
        let n = self.usize()?;
        let mut b = vec![0u8; n];
        self.inner.read_exact(&mut b)?;
        String::from_utf8(b).map_err(|_| invalid("string is not utf-8"))
    }

    pub fn section(&mut self) -> io::Result<Vec<u8>> {
        let n = self.u64()?;
        let n = usize::try_from(n).map_err(|_| invalid("section too large"))?;
        let mut b = vec![0u8; n];
        self.inner.read_exact(&mut b)?;
        Ok(b)
    }

    pub fn expect_magic(&mut self, magic: &[u8; 4]) -> io::Result<()> {
        if &self.array::<4>()? != magic {
            return Err(invalid("bad magic"));
        }
        Ok(())
    }
}

pub(crate) fn invalid_data(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}
