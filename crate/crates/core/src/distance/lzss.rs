//! A small deterministic LZSS codec.
//!
//! Format: a 4-byte little-endian length of the original data, then groups
//! of up to eight tokens, each group preceded by a flag byte whose bit `i`
//! says whether token `i` is a literal byte (1) or a back-reference (0).
//! A back-reference is two bytes, `oooooooo oooollll`: a 12-bit offset minus
//! one and a 4-bit length minus three. Length nibble 15 is followed by
//! extension bytes that are added to the length; an extension byte of 255
//! means another one follows.

pub const WINDOW: usize = 4096;
pub const MIN_MATCH: usize = 3;
const NIBBLE_MAX: usize = 15;
const HASH_BITS: u32 = 12;
const MAX_CHAIN: usize = 512;

fn hash3(d: &[u8], i: usize) -> usize {
    let v = (d[i] as u32) << 16 | (d[i + 1] as u32) << 8 | d[i + 2] as u32;
    (v.wrapping_mul(2_654_435_761) >> (32 - HASH_BITS)) as usize
}

struct Writer {
    out: Vec<u8>,
    flag_pos: usize,
    count: u8,
}

impl Writer {
    fn token_slot(&mut self) {
        if self.count == 8 {
            self.count = 0;
        }
        if self.count == 0 {
            self.flag_pos = self.out.len();
            self.out.push(0);
        }
    }

    fn literal(&mut self, b: u8) {
        self.token_slot();
        self.out[self.flag_pos] |= 1 << self.count;
        self.out.push(b);
        self.count += 1;
    }

    fn reference(&mut self, offset: usize, len: usize) {
        self.token_slot();
        let o = offset - 1;
        let l = len - MIN_MATCH;
        let nib = l.min(NIBBLE_MAX);
        self.out.push((o >> 4) as u8);
        self.out.push(((o & 0xF) << 4 | nib) as u8);
        if nib == NIBBLE_MAX {
            let mut rest = l - NIBBLE_MAX;
            loop {
                let b = rest.min(255);
                self.out.push(b as u8);
                rest -= b;
                if b < 255 {
                    break;
                }
            }
        }
        self.count += 1;
    }
}

/// Compresses `data`. Greedy parse, longest match within the window,
/// nearest position on ties.
pub fn compress(data: &[u8]) -> Vec<u8> {
    let n = data.len();
    let mut w = Writer { out: Vec::with_capacity(n / 2 + 8), flag_pos: 0, count: 0 };
    w.out.extend_from_slice(&(n as u32).to_le_bytes());
    let mut head = vec![usize::MAX; 1 << HASH_BITS];
    let mut prev = vec![usize::MAX; n];
    let insert = |head: &mut Vec<usize>, prev: &mut Vec<usize>, i: usize| {
        if i + MIN_MATCH <= n {
            let h = hash3(data, i);
            prev[i] = head[h];
            head[h] = i;
        }
    };
    let mut i = 0;
    while i < n {
        let mut best_len = 0;
        let mut best_off = 0;
        if i + MIN_MATCH <= n {
            let mut cand = head[hash3(data, i)];
            let mut chain = 0;
            while cand != usize::MAX && i - cand <= WINDOW && chain < MAX_CHAIN {
                let mut l = 0;
                while i + l < n && data[cand + l] == data[i + l] {
                    l += 1;
                }
                if l > best_len {
                    best_len = l;
                    best_off = i - cand;
                }
                cand = prev[cand];
                chain += 1;
            }
        }
        if best_len >= MIN_MATCH {
            w.reference(best_off, best_len);
            for k in i..i + best_len {
                insert(&mut head, &mut prev, k);
            }
            i += best_len;
        } else {
            w.literal(data[i]);
            insert(&mut head, &mut prev, i);
            i += 1;
        }
    }
    w.out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorruptInput;

impl std::fmt::Display for CorruptInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("corrupt compressed stream")
    }
}

impl std::error::Error for CorruptInput {}

/// Inverse of [`compress`].
pub fn decompress(data: &[u8]) -> Result<Vec<u8>, CorruptInput> {
    let header: [u8; 4] = data.get(..4).ok_or(CorruptInput)?.try_into().map_err(|_| CorruptInput)?;
    let n = u32::from_le_bytes(header) as usize;
    let mut out = Vec::with_capacity(n);
    let mut p = 4;
    while out.len() < n {
        let flags = *data.get(p).ok_or(CorruptInput)?;
        p += 1;
        for bit in 0..8 {
            if out.len() >= n {
                break;
            }
            if flags & (1 << bit) != 0 {
                out.push(*data.get(p).ok_or(CorruptInput)?);
                p += 1;
            } else {
                let b0 = *data.get(p).ok_or(CorruptInput)? as usize;
                let b1 = *data.get(p + 1).ok_or(CorruptInput)? as usize;
                p += 2;
                let offset = (b0 << 4 | b1 >> 4) + 1;
                let mut len = (b1 & 0xF) + MIN_MATCH;
                if b1 & 0xF == NIBBLE_MAX {
                    loop {
                        let e = *data.get(p).ok_or(CorruptInput)? as usize;
                        p += 1;
                        len += e;
                        if e < 255 {
                            break;
                        }
                    }
                }
                if offset > out.len() || out.len() + len > n {
                    return Err(CorruptInput);
                }
                let start = out.len() - offset;
                for k in 0..len {
                    out.push(out[start + k]);
                }
            }
        }
    }
    if p != data.len() {
        return Err(CorruptInput);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{RngCore, SeedableRng};

    #[test]
    fn empty_is_header_only() {
        assert_eq!(compress(b"").len(), 4);
        assert_eq!(decompress(&compress(b"")).unwrap(), b"");
    }

    #[test]
    fn repeated_line_compresses_well() {
        let line = b"place(b,0,0)\n";
        let data: Vec<u8> = line.iter().copied().cycle().take(1024).collect();
        let c = compress(&data);
        assert!((c.len() as f64) < 0.15 * 1024.0, "{}", c.len());
        assert_eq!(decompress(&c).unwrap(), data);
    }

    #[test]
    fn random_bytes_do_not_shrink() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut data = vec![0u8; 1024];
        rng.fill_bytes(&mut data);
        let c = compress(&data);
        assert!(c.len() as f64 >= 0.95 * 1024.0);
        assert_eq!(decompress(&c).unwrap(), data);
    }

    #[test]
    fn long_match_uses_extension_bytes() {
        let data = vec![b'x'; 5000];
        let c = compress(&data);
        assert!(c.len() < 40, "{}", c.len());
        assert_eq!(decompress(&c).unwrap(), data);
    }

    #[test]
    fn corrupt_streams_are_rejected() {
        assert!(decompress(&[1, 0]).is_err());
        let mut c = compress(b"abcabcabcabc");
        c.push(0);
        assert!(decompress(&c).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(data in proptest::collection::vec(any::<u8>(), 0..3000)) {
            prop_assert_eq!(decompress(&compress(&data)).unwrap(), data);
        }

        #[test]
        fn round_trip_low_entropy(data in proptest::collection::vec(0u8..3, 0..6000)) {
            prop_assert_eq!(decompress(&compress(&data)).unwrap(), data);
        }
    }
}
