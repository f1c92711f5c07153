//! Bit-sequence primitives: a plain bitvector with rank/select support and a
//! sparse-set dictionary with satellite payloads.
//!
//! Everything here is immutable after construction and safe for concurrent
//! reads. Directory layout is block/superblock based; individual probes may
//! scan one superblock, so a probe costs O(log n) at worst but stays cheap in
//! practice.

use crate::error::{Error, Result};

/// Bits per rank block (one machine word).
const BLOCK_BITS: usize = 64;
/// Words per rank superblock.
const SUPER_WORDS: usize = 16;
/// Bits per superblock.
const SUPER_BITS: usize = SUPER_WORDS * BLOCK_BITS;
/// One select sample is kept per this many one-bits (and zero-bits).
const SELECT_SAMPLE: usize = 4096;

/// Immutable bitvector with rank and select directories.
///
/// `rank` uses the strictly-before convention: `rank1(i)` counts ones at
/// positions `< i`. `select` is 1-indexed and returns 0-based positions:
/// `select1(1)` is the position of the first one.
#[derive(Clone, Debug)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
    // Cumulative ones before each superblock.
    super_ranks: Vec<u64>,
    // Ones before each word, relative to its superblock.
    sub_ranks: Vec<u16>,
    // Superblock index containing the (k*SELECT_SAMPLE+1)-th one/zero.
    select1_samples: Vec<u32>,
    select0_samples: Vec<u32>,
    ones: usize,
}

impl BitVector {
    /// Builds a bitvector from a bool sequence.
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut b = Builder::with_capacity(bits.len());
        for &bit in bits {
            b.push(bit);
        }
        b.finish()
    }

    /// Builds a bitvector of `len` bits from little-endian packed words.
    pub fn from_words(words: Vec<u64>, len: usize) -> Self {
        assert!(words.len() == (len + 63) / 64, "word count mismatch");
        let mut words = words;
        // Clear any tail bits beyond `len` so popcounts are exact.
        if len % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
        Self::index(words, len)
    }

    fn index(words: Vec<u64>, len: usize) -> Self {
        let n_super = words.len() / SUPER_WORDS + 1;
        let mut super_ranks = Vec::with_capacity(n_super);
        let mut sub_ranks = Vec::with_capacity(words.len());
        let mut select1_samples = Vec::new();
        let mut select0_samples = Vec::new();
        let mut total: u64 = 0;
        let mut zeros: u64 = 0;
        for (i, &w) in words.iter().enumerate() {
            if i % SUPER_WORDS == 0 {
                super_ranks.push(total);
            }
            sub_ranks.push((total - super_ranks[i / SUPER_WORDS]) as u16);
            let ones_here = w.count_ones() as u64;
            let bits_here = (len - i * 64).min(64) as u64;
            // Sample the superblock of every SELECT_SAMPLE-th set/unset bit.
            record_samples(&mut select1_samples, total, total + ones_here, i / SUPER_WORDS);
            record_samples(&mut select0_samples, zeros, zeros + bits_here - ones_here, i / SUPER_WORDS);
            total += ones_here;
            zeros += bits_here - ones_here;
        }
        if words.len() % SUPER_WORDS == 0 {
            super_ranks.push(total);
        }
        BitVector {
            len,
            ones: total as usize,
            words,
            super_ranks,
            sub_ranks,
            select1_samples,
            select0_samples,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of one bits in the whole vector.
    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.ones
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {} out of range {}", i, self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Number of ones strictly before position `i`; `0 <= i <= len`.
    #[inline]
    pub fn rank1(&self, i: usize) -> usize {
        assert!(i <= self.len, "rank index {} out of range {}", i, self.len);
        let w = i / 64;
        if w >= self.words.len() {
            return self.ones;
        }
        let base = self.super_ranks[w / SUPER_WORDS] + self.sub_ranks[w] as u64;
        let masked = if i % 64 == 0 {
            0
        } else {
            (self.words[w] & ((1u64 << (i % 64)) - 1)).count_ones() as u64
        };
        (base + masked) as usize
    }

    /// Number of zeros strictly before position `i`.
    #[inline]
    pub fn rank0(&self, i: usize) -> usize {
        assert!(i <= self.len, "rank index {} out of range {}", i, self.len);
        i - self.rank1(i)
    }

    /// Rank for either bit value.
    #[inline]
    pub fn rank(&self, bit: bool, i: usize) -> usize {
        if bit {
            self.rank1(i)
        } else {
            self.rank0(i)
        }
    }

    /// 0-based position of the `j`-th one, `1 <= j <= count_ones()`.
    pub fn select1(&self, j: usize) -> usize {
        assert!(j >= 1 && j <= self.ones, "select1({}) out of range", j);
        let target = (j - 1) as u64;
        let hint = self.select1_samples[(j - 1) / SELECT_SAMPLE] as usize;
        let mut sb = hint;
        while sb + 1 < self.super_ranks.len() && self.super_ranks[sb + 1] <= target {
            sb += 1;
        }
        let mut w = sb * SUPER_WORDS;
        let mut seen = self.super_ranks[sb];
        loop {
            let ones = self.words[w].count_ones() as u64;
            if seen + ones > target {
                break;
            }
            seen += ones;
            w += 1;
        }
        w * 64 + select_in_word(self.words[w], (target - seen) as u32)
    }

    /// 0-based position of the `j`-th zero, `1 <= j <= count_zeros()`.
    pub fn select0(&self, j: usize) -> usize {
        assert!(j >= 1 && j <= self.count_zeros(), "select0({}) out of range", j);
        let target = (j - 1) as u64;
        let hint = self.select0_samples[(j - 1) / SELECT_SAMPLE] as usize;
        let mut sb = hint;
        // Zeros before superblock s = bits before it minus ones before it.
        let zeros_before = |s: usize| (s * SUPER_BITS) as u64 - self.super_ranks[s];
        while sb + 1 < self.super_ranks.len()
            && (sb + 1) * SUPER_WORDS <= self.words.len()
            && zeros_before(sb + 1) <= target
        {
            sb += 1;
        }
        let mut w = sb * SUPER_WORDS;
        let mut seen = zeros_before(sb);
        loop {
            let bits_here = (self.len - w * 64).min(64);
            let zeros = bits_here as u64 - (self.words[w].count_ones() as u64);
            if seen + zeros > target {
                break;
            }
            seen += zeros;
            w += 1;
        }
        let inv = !self.words[w];
        w * 64 + select_in_word(inv, (target - seen) as u32)
    }

    /// Select for either bit value.
    pub fn select(&self, bit: bool, j: usize) -> usize {
        if bit {
            self.select1(j)
        } else {
            self.select0(j)
        }
    }

    /// Total bits held by the structure, including directories.
    pub fn bit_size(&self) -> usize {
        self.raw_bits() + self.overhead_bits()
    }

    /// Bits of payload (the packed words).
    pub fn raw_bits(&self) -> usize {
        self.words.len() * 64
    }

    /// Bits spent on rank/select directories.
    pub fn overhead_bits(&self) -> usize {
        self.super_ranks.len() * 64
            + self.sub_ranks.len() * 16
            + (self.select1_samples.len() + self.select0_samples.len()) * 32
    }

    /// Serializes as `u64` length followed by packed words, little-endian.
    /// Directories are rebuilt on load and are not serialized.
    pub fn serialize(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }

    pub fn deserialize(input: &mut &[u8]) -> Result<Self> {
        let len = read_u64(input)? as usize;
        let n_words = (len + 63) / 64;
        let mut words = Vec::with_capacity(n_words);
        for _ in 0..n_words {
            words.push(read_u64(input)?);
        }
        Ok(Self::from_words(words, len))
    }
}

// Appends the superblock index for every k-th sample whose target bit falls
// inside [before, after).
fn record_samples(samples: &mut Vec<u32>, before: u64, after: u64, superblock: usize) {
    let step = SELECT_SAMPLE as u64;
    let mut k = (before + step - 1) / step;
    while k * step < after {
        debug_assert_eq!(samples.len() as u64, k);
        samples.push(superblock as u32);
        k += 1;
    }
}

/// Position of the `r`-th (0-based) set bit inside a word.
#[inline]
fn select_in_word(mut w: u64, mut r: u32) -> usize {
    let mut pos = 0usize;
    let c = (w & 0xFFFF_FFFF).count_ones();
    if r >= c {
        r -= c;
        w >>= 32;
        pos += 32;
    }
    let c = (w & 0xFFFF).count_ones();
    if r >= c {
        r -= c;
        w >>= 16;
        pos += 16;
    }
    let c = (w & 0xFF).count_ones();
    if r >= c {
        r -= c;
        w >>= 8;
        pos += 8;
    }
    loop {
        if w & 1 == 1 {
            if r == 0 {
                return pos;
            }
            r -= 1;
        }
        w >>= 1;
        pos += 1;
    }
}

/// Incremental bitvector builder.
pub struct Builder {
    words: Vec<u64>,
    len: usize,
}

impl Builder {
    pub fn new() -> Self {
        Builder { words: Vec::new(), len: 0 }
    }

    pub fn with_capacity(bits: usize) -> Self {
        Builder { words: Vec::with_capacity((bits + 63) / 64), len: 0 }
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1u64 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn finish(self) -> BitVector {
        BitVector::index(self.words, self.len)
    }
}

impl Default for Builder {
    fn default() -> Self {
        Self::new()
    }
}

/// Fixed-width packed integer array.
#[derive(Clone, Debug)]
pub struct PackedArray {
    width: usize,
    len: usize,
    data: Vec<u64>,
}

impl PackedArray {
    pub fn build(width: usize, values: impl ExactSizeIterator<Item = u64>) -> Self {
        assert!(width <= 64);
        let len = values.len();
        let mut data = vec![0u64; (len * width + 63) / 64];
        for (i, v) in values.enumerate() {
            debug_assert!(width == 64 || v < (1u64 << width), "value exceeds width");
            let bit = i * width;
            let (w, off) = (bit / 64, bit % 64);
            data[w] |= v << off;
            if off + width > 64 {
                data[w + 1] |= v >> (64 - off);
            }
        }
        PackedArray { width, len, data }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        assert!(i < self.len, "packed index {} out of range {}", i, self.len);
        let bit = i * self.width;
        let (w, off) = (bit / 64, bit % 64);
        let mut v = self.data[w] >> off;
        if off + self.width > 64 {
            v |= self.data[w + 1] << (64 - off);
        }
        if self.width == 64 {
            v
        } else {
            v & ((1u64 << self.width) - 1)
        }
    }

    pub fn bit_size(&self) -> usize {
        self.data.len() * 64
    }

    pub fn serialize(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.width as u64).to_le_bytes());
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        for w in &self.data {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }

    pub fn deserialize(input: &mut &[u8]) -> Result<Self> {
        let width = read_u64(input)? as usize;
        let len = read_u64(input)? as usize;
        if width > 64 {
            return Err(Error::Corrupt("packed array width"));
        }
        let n_words = (len * width + 63) / 64;
        let mut data = Vec::with_capacity(n_words);
        for _ in 0..n_words {
            data.push(read_u64(input)?);
        }
        Ok(PackedArray { width, len, data })
    }
}

fn width_for(universe: u64) -> usize {
    if universe <= 1 {
        1
    } else {
        64 - (universe - 1).leading_zeros() as usize
    }
}

/// Sparse-set dictionary over `[0, universe)` with one fixed-width satellite
/// payload per member. Supports membership, rank, select and satellite access.
///
/// Rank is strictly-before; select is 1-indexed.
#[derive(Clone, Debug)]
pub struct SparseDict {
    universe: u64,
    members: PackedArray,
    satellite: PackedArray,
}

impl SparseDict {
    /// Builds from strictly increasing member positions and their payloads.
    pub fn build(universe: u64, members: &[u64], satellite: &[u64]) -> Result<Self> {
        if members.len() != satellite.len() {
            return Err(Error::Invalid("satellite length must match member count"));
        }
        for w in members.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Invalid("dictionary members must be strictly increasing"));
            }
        }
        if let Some(&last) = members.last() {
            if last >= universe {
                return Err(Error::Invalid("dictionary member exceeds universe"));
            }
        }
        let sat_width = width_for(satellite.iter().copied().max().map_or(1, |m| m + 1));
        Ok(SparseDict {
            universe,
            members: PackedArray::build(width_for(universe), members.iter().copied()),
            satellite: PackedArray::build(sat_width, satellite.iter().copied()),
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    /// Number of members strictly below `x`.
    pub fn rank(&self, x: u64) -> usize {
        let mut lo = 0usize;
        let mut hi = self.members.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.members.get(mid) < x {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    pub fn contains(&self, x: u64) -> bool {
        let r = self.rank(x);
        r < self.members.len() && self.members.get(r) == x
    }

    /// Position of the `j`-th member, `1 <= j <= len()`.
    pub fn select(&self, j: usize) -> u64 {
        assert!(j >= 1 && j <= self.members.len(), "dict select({}) out of range", j);
        self.members.get(j - 1)
    }

    /// Payload of the `j`-th member, `1 <= j <= len()`.
    pub fn satellite(&self, j: usize) -> u64 {
        assert!(j >= 1 && j <= self.satellite.len(), "dict satellite({}) out of range", j);
        self.satellite.get(j - 1)
    }

    pub fn bit_size(&self) -> usize {
        128 + self.members.bit_size() + self.satellite.bit_size()
    }

    pub fn serialize(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.universe.to_le_bytes());
        self.members.serialize(out);
        self.satellite.serialize(out);
    }

    pub fn deserialize(input: &mut &[u8]) -> Result<Self> {
        let universe = read_u64(input)?;
        let members = PackedArray::deserialize(input)?;
        let satellite = PackedArray::deserialize(input)?;
        Ok(SparseDict { universe, members, satellite })
    }
}

pub(crate) fn read_u64(input: &mut &[u8]) -> Result<u64> {
    if input.len() < 8 {
        return Err(Error::Corrupt("truncated input"));
    }
    let (head, rest) = input.split_at(8);
    *input = rest;
    Ok(u64::from_le_bytes(head.try_into().unwrap()))
}
