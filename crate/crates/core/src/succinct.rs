//! Bit vectors, rank/select dictionaries and fixed-width packed arrays.
//!
//! These back every o(n)-bit side structure of the encoding: deletion flags,
//! boundary-set dictionaries, label translation arrays and degree arrays.

use crate::error::{Error, Result};

/// Plain packed bit vector with constant-time access.
#[derive(Debug, Clone, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn new(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0u64; (len + 63) / 64],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut bv = BitVector::new(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                bv.set(i, true);
            }
        }
        bv
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let word = &mut self.words[i / 64];
        if v {
            *word |= 1 << (i % 64);
        } else {
            *word &= !(1 << (i % 64));
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Bits occupied by the payload.
    pub fn size_bits(&self) -> usize {
        self.words.len() * 64
    }
}

/// Indexable dictionary over a set S within a fixed universe `[0, u)`.
///
/// Dense sets use a bitmap with a two-level rank directory (constant-probe
/// rank, select by directory search); sparse sets fall back to a packed
/// sorted member array (constant-time select, rank by binary search), which
/// keeps the space within a small constant of `s log(u/s) + s` bits.
#[derive(Debug, Clone)]
pub struct IndexableDictionary {
    universe: usize,
    size: usize,
    repr: Repr,
}

#[derive(Debug, Clone)]
enum Repr {
    Dense {
        bits: BitVector,
        // cumulative popcount before each superblock of SUPER_WORDS words
        superblocks: Vec<u32>,
        // popcount within the superblock before each word
        blocks: Vec<u16>,
    },
    Sparse {
        members: CompactArray,
    },
}

const SUPER_WORDS: usize = 8; // 512-bit superblocks

impl IndexableDictionary {
    /// Builds the dictionary for a strictly increasing member list.
    pub fn build(universe: usize, members: &[u32]) -> Result<Self> {
        let mut prev: Option<u32> = None;
        for &m in members {
            if (m as usize) >= universe {
                return Err(Error::OutOfUniverse(m as u64, universe as u64));
            }
            if let Some(p) = prev {
                if m <= p {
                    return Err(Error::InvalidConfig(format!(
                        "members not strictly increasing at {m}"
                    )));
                }
            }
            prev = Some(m);
        }
        let width = CompactArray::width_for(universe.max(2) as u64 - 1);
        if members.len() * width * 2 <= universe {
            let mut arr = CompactArray::new(members.len(), width);
            for (i, &m) in members.iter().enumerate() {
                arr.set(i, m as u64);
            }
            return Ok(IndexableDictionary {
                universe,
                size: members.len(),
                repr: Repr::Sparse { members: arr },
            });
        }
        let mut bits = BitVector::new(universe);
        for &m in members {
            bits.set(m as usize, true);
        }
        Ok(Self::from_bitvector(bits))
    }

    pub fn from_bitvector(bits: BitVector) -> Self {
        let words = bits.words();
        let n_super = words.len() / SUPER_WORDS + 1;
        let mut superblocks = Vec::with_capacity(n_super);
        let mut blocks = Vec::with_capacity(words.len());
        let mut total: u32 = 0;
        let mut in_super: u16 = 0;
        for (w, word) in words.iter().enumerate() {
            if w % SUPER_WORDS == 0 {
                superblocks.push(total);
                in_super = 0;
            }
            blocks.push(in_super);
            in_super += word.count_ones() as u16;
            total += word.count_ones();
        }
        if words.len() % SUPER_WORDS == 0 {
            superblocks.push(total);
        }
        IndexableDictionary {
            universe: bits.len(),
            size: total as usize,
            repr: Repr::Dense {
                bits,
                superblocks,
                blocks,
            },
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Number of members of S.
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// `|{y in S : y < x}|`; defined for `x <= universe`.
    pub fn rank(&self, x: usize) -> Result<usize> {
        if x > self.universe {
            return Err(Error::OutOfUniverse(x as u64, self.universe as u64));
        }
        match &self.repr {
            Repr::Sparse { members } => {
                let mut lo = 0usize;
                let mut hi = self.size;
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if (members.get(mid) as usize) < x {
                        lo = mid + 1;
                    } else {
                        hi = mid;
                    }
                }
                Ok(lo)
            }
            Repr::Dense {
                bits,
                superblocks,
                blocks,
            } => {
                if x == 0 {
                    return Ok(0);
                }
                let w = x / 64;
                let mut r = if w < blocks.len() {
                    superblocks[w / SUPER_WORDS] as usize + blocks[w] as usize
                } else {
                    self.size
                };
                if w < bits.words().len() {
                    let rem = x % 64;
                    if rem > 0 {
                        let mask = (1u64 << rem) - 1;
                        r += (bits.words()[w] & mask).count_ones() as usize;
                    }
                }
                Ok(r)
            }
        }
    }

    /// Position of the member with rank `i` (i.e. the `i`-th smallest).
    pub fn select(&self, i: usize) -> Result<usize> {
        if i >= self.size {
            return Err(Error::IndexOutOfRange(i as u64, self.size as u64));
        }
        match &self.repr {
            Repr::Sparse { members } => Ok(members.get(i) as usize),
            Repr::Dense {
                bits, superblocks, ..
            } => {
                let mut lo = 0usize;
                let mut hi = superblocks.len() - 1;
                while lo < hi {
                    let mid = (lo + hi + 1) / 2;
                    if (superblocks[mid] as usize) <= i {
                        lo = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
                let mut rem = i - superblocks[lo] as usize;
                let words = bits.words();
                let start = lo * SUPER_WORDS;
                for w in start..words.len().min(start + SUPER_WORDS) {
                    let pc = words[w].count_ones() as usize;
                    if rem < pc {
                        let mut word = words[w];
                        for _ in 0..rem {
                            word &= word - 1;
                        }
                        return Ok(w * 64 + word.trailing_zeros() as usize);
                    }
                    rem -= pc;
                }
                unreachable!("select fell off the directory")
            }
        }
    }

    pub fn member(&self, x: usize) -> bool {
        if x >= self.universe {
            return false;
        }
        match &self.repr {
            Repr::Sparse { .. } => {
                let r = self.rank(x).unwrap();
                r < self.size && self.select(r).unwrap() == x
            }
            Repr::Dense { bits, .. } => bits.get(x),
        }
    }

    pub fn size_bits(&self) -> usize {
        match &self.repr {
            Repr::Sparse { members } => members.size_bits() + 64,
            Repr::Dense {
                bits,
                superblocks,
                blocks,
            } => bits.size_bits() + superblocks.len() * 32 + blocks.len() * 16,
        }
    }
}

/// Packed array of fixed-width entries.
#[derive(Debug, Clone)]
pub struct CompactArray {
    width: usize,
    len: usize,
    words: Vec<u64>,
}

impl CompactArray {
    /// Width is fixed at build time; values must satisfy `v < 2^width`.
    pub fn new(len: usize, width: usize) -> Self {
        assert!(width <= 64);
        let total_bits = len * width;
        CompactArray {
            width,
            len,
            words: vec![0u64; (total_bits + 63) / 64 + 1],
        }
    }

    /// Smallest width able to hold `max`.
    pub fn width_for(max: u64) -> usize {
        (64 - max.leading_zeros() as usize).max(1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        if self.width == 0 {
            return 0;
        }
        let bit = i * self.width;
        let word = bit / 64;
        let off = bit % 64;
        let mask = if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        };
        let lo = self.words[word] >> off;
        let v = if off + self.width > 64 {
            lo | (self.words[word + 1] << (64 - off))
        } else {
            lo
        };
        v & mask
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: u64) {
        debug_assert!(i < self.len);
        if self.width == 0 {
            debug_assert!(v == 0);
            return;
        }
        let mask = if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        };
        debug_assert!(v <= mask);
        let bit = i * self.width;
        let word = bit / 64;
        let off = bit % 64;
        self.words[word] = (self.words[word] & !(mask << off)) | (v << off);
        if off + self.width > 64 {
            let hi_bits = off + self.width - 64;
            let hi_mask = (1u64 << hi_bits) - 1;
            self.words[word + 1] = (self.words[word + 1] & !hi_mask) | (v >> (64 - off));
        }
    }

    pub fn size_bits(&self) -> usize {
        self.len * self.width
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_examples() {
        // u=8, S={2,5,7}
        let d = IndexableDictionary::build(8, &[2, 5, 7]).unwrap();
        assert_eq!(d.rank(5).unwrap(), 1);
        assert_eq!(d.rank(8).unwrap(), 3);
        assert_eq!(d.select(0).unwrap(), 2);
        assert_eq!(d.select(2).unwrap(), 7);
        assert!(!d.member(3));
        assert!(d.member(5));
        assert_eq!(d.rank(0).unwrap(), 0);
    }

    #[test]
    fn id_empty_and_full() {
        let d = IndexableDictionary::build(10, &[]).unwrap();
        for x in 0..=10 {
            assert_eq!(d.rank(x).unwrap(), 0);
            assert!(!d.member(x.min(9)));
        }
        assert!(d.select(0).is_err());

        let all: Vec<u32> = (0..10).collect();
        let d = IndexableDictionary::build(10, &all).unwrap();
        for i in 0..10 {
            assert_eq!(d.select(i).unwrap(), i);
            assert_eq!(d.rank(i).unwrap(), i);
        }
    }

    #[test]
    fn id_select_rank_roundtrip_random() {
        // random S of size 50 in u=1000 versus a linear-scan oracle,
        // exercised on both representations
        let mut members = Vec::new();
        let mut x = 7u64;
        while members.len() < 50 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let cand = (x >> 33) as u32 % 1000;
            if !members.contains(&cand) {
                members.push(cand);
            }
        }
        members.sort_unstable();
        for universe in [1000usize, 120] {
            let ms: Vec<u32> = members.iter().copied().filter(|&m| (m as usize) < universe).collect();
            let d = IndexableDictionary::build(universe, &ms).unwrap();
            for x in 0..universe {
                let oracle_rank = ms.iter().filter(|&&m| (m as usize) < x).count();
                assert_eq!(d.rank(x).unwrap(), oracle_rank);
                assert_eq!(d.member(x), ms.contains(&(x as u32)));
            }
            for (i, &m) in ms.iter().enumerate() {
                assert_eq!(d.select(i).unwrap(), m as usize);
                assert_eq!(d.rank(m as usize).unwrap(), i);
            }
        }
    }

    #[test]
    fn id_space_bound() {
        // space <= 4 (s log(u/s) + s) + O(log u) bits
        for &(u, s) in &[(1024usize, 32usize), (4096, 64), (65536, 256), (1024, 512), (512, 400)] {
            let members: Vec<u32> = (0..s as u32).map(|i| i * (u / s) as u32).collect();
            let d = IndexableDictionary::build(u, &members).unwrap();
            let ideal = s as f64 * ((u as f64 / s as f64).log2() + 1.0);
            let bound = 4.0 * ideal + 20.0 * 64.0;
            assert!(
                (d.size_bits() as f64) <= bound,
                "u={u} s={s} bits={} bound={bound}",
                d.size_bits()
            );
        }
    }

    #[test]
    fn compact_array_roundtrip() {
        let mut a = CompactArray::new(100, 7);
        for i in 0..100 {
            a.set(i, (i as u64 * 13) % 128);
        }
        for i in 0..100 {
            assert_eq!(a.get(i), (i as u64 * 13) % 128);
        }
    }

    #[test]
    fn compact_array_random_writes() {
        let mut a = CompactArray::new(1 << 10, 11);
        let mut model = vec![0u64; 1 << 10];
        let mut x = 99u64;
        for _ in 0..100_000 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let i = ((x >> 20) as usize) % (1 << 10);
            let v = (x >> 40) & ((1 << 11) - 1);
            a.set(i, v);
            model[i] = v;
            let j = ((x >> 5) as usize) % (1 << 10);
            assert_eq!(a.get(j), model[j]);
        }
    }
}
