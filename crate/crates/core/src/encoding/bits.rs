use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// Mask selecting the valid bits of the last word of a `len`-bit string.
#[inline]
pub(crate) fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => u64::MAX,
        rem => (1u64 << rem) - 1,
    }
}

/// Fixed-length bit-string backed by 64-bit words. Bits past `len` are kept
/// zero so word-level popcounts and comparisons stay exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

/// A subset of the vertex set in indicator form: bit `j` is set iff vertex
/// `j` is selected.
pub type Solution = BitString;

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut words = vec![u64::MAX; words_for(len)];
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        BitString { words, len }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = BitString::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                out.set(i, true);
            }
        }
        out
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut out = BitString::zeros(len);
        for i in indices {
            out.set(i, true);
        }
        out
    }

    /// Builds a bit-string from raw words. Stray bits beyond `len` are an error.
    pub(crate) fn from_words(words: Vec<u64>, len: usize) -> Result<Self> {
        if words.len() != words_for(len) {
            return Err(Error::invalid(format!(
                "{} words cannot hold exactly {len} bits",
                words.len()
            )));
        }
        if let Some(&last) = words.last() {
            if last & !tail_mask(len) != 0 {
                return Err(Error::invalid("bits set beyond declared length"));
            }
        }
        Ok(BitString { words, len })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hamming(&self, other: &BitString) -> usize {
        assert_eq!(self.len, other.len, "hamming distance needs equal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of set bits in ascending order.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        iter_set_bits(&self.words)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    /// Concatenates bit-strings in order.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a BitString>) -> BitString {
        let parts: Vec<&BitString> = parts.into_iter().collect();
        let total = parts.iter().map(|p| p.len).sum();
        let mut out = BitString::zeros(total);
        let mut offset = 0;
        for p in parts {
            for i in p.ones_iter() {
                out.set(offset + i, true);
            }
            offset += p.len;
        }
        out
    }

    /// Copies `len` bits starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = BitString::zeros(len);
        for i in 0..len {
            if self.get(start + i) {
                out.set(i, true);
            }
        }
        out
    }

    /// Packs the bits MSB-first into bytes and renders them as lowercase hex.
    /// Bit `p` lands in byte `p / 8` at position `7 - p % 8`; trailing pad
    /// bits are zero.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.len.div_ceil(8)];
        for p in self.ones_iter() {
            bytes[p / 8] |= 0x80 >> (p % 8);
        }
        let mut out = String::with_capacity(bytes.len() * 2);
        for b in bytes {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        if hex.len() != 2 * len.div_ceil(8) {
            return Err(Error::invalid(format!(
                "hex genome has {} digits, expected {} for {len} bits",
                hex.len(),
                2 * len.div_ceil(8)
            )));
        }
        let mut out = BitString::zeros(len);
        for (byte_idx, chunk) in hex.as_bytes().chunks(2).enumerate() {
            let s = std::str::from_utf8(chunk).map_err(|_| Error::invalid("non-ascii hex"))?;
            let byte = u8::from_str_radix(s, 16)
                .map_err(|_| Error::invalid(format!("bad hex digits `{s}`")))?;
            for bit in 0..8 {
                if byte & (0x80 >> bit) != 0 {
                    let p = byte_idx * 8 + bit;
                    if p >= len {
                        return Err(Error::invalid("hex genome has bits set past its length"));
                    }
                    out.set(p, true);
                }
            }
        }
        Ok(out)
    }
}

pub(crate) fn iter_set_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut rest = w;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD_BITS + tz)
            }
        })
    })
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid(format!("`{other}` is not a bit"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BitString::from_bools(&bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_masks_tail() {
        let b = BitString::ones(70);
        assert_eq!(b.count_ones(), 70);
        assert_eq!(b.words()[1], (1 << 6) - 1);
    }

    #[test]
    fn parse_and_display() {
        let b: BitString = "10110".parse().unwrap();
        assert_eq!(b.to_string(), "10110");
        assert_eq!(b.ones_iter().collect::<Vec<_>>(), vec![0, 2, 3]);
        assert!("10a".parse::<BitString>().is_err());
    }

    #[test]
    fn hex_is_msb_first() {
        let b: BitString = "1000000001".parse().unwrap();
        assert_eq!(b.to_hex(), "8040");
        assert_eq!(BitString::from_hex("8040", 10).unwrap(), b);
        assert!(BitString::from_hex("8060", 10).is_err());
        assert!(BitString::from_hex("80", 10).is_err());
    }

    #[test]
    fn concat_and_slice() {
        let a: BitString = "101".parse().unwrap();
        let b: BitString = "010".parse().unwrap();
        let c = BitString::concat([&a, &b]);
        assert_eq!(c.to_string(), "101010");
        assert_eq!(c.slice(3, 3), b);
    }

    #[test]
    fn from_words_rejects_stray_bits() {
        assert!(BitString::from_words(vec![0b1000], 3).is_err());
        assert!(BitString::from_words(vec![0b100], 3).is_ok());
    }
}
