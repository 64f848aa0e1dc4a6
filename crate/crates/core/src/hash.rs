//! Stable 64-bit FNV-1a hashing for seeds and content fingerprints.

const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone, Copy)]
pub struct Fnv(u64);

impl Default for Fnv {
    fn default() -> Self {
        Fnv(OFFSET)
    }
}

impl Fnv {
    pub fn bytes(mut self, data: &[u8]) -> Self {
        for b in data {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(PRIME);
        }
        self
    }

    pub fn u64(self, v: u64) -> Self {
        self.bytes(&v.to_le_bytes())
    }

    pub fn str(self, s: &str) -> Self {
        self.bytes(s.as_bytes()).u64(s.len() as u64)
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}

/// Mixes a base seed with a label into a derived seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    Fnv::default().u64(seed).str(label).finish()
}
