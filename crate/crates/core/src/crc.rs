//! Short CRC outer codes for CRC-aided list decoding.
//!
//! Non-reflected, no final xor. The register is shifted bit by bit, which is
//! plenty for the handful of bits a BOSS codeword carries.

use crate::error::{BossError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CrcSpec {
    pub width: u32,
    /// Generator polynomial without the implicit leading `x^width` term.
    pub poly: u32,
    pub init: u32,
}

impl CrcSpec {
    pub fn new(width: u32, poly: u32, init: u32) -> Self {
        assert!((1..=31).contains(&width), "CRC width must be in 1..=31");
        let mask = (1u32 << width) - 1;
        CrcSpec {
            width,
            poly: poly & mask,
            init: init & mask,
        }
    }

    /// `x^3 + x + 1`.
    pub fn crc3() -> Self {
        CrcSpec::new(3, 0b011, 0)
    }

    /// `x^6 + x^5 + 1`, the 5G NR CRC6 generator.
    pub fn crc6() -> Self {
        CrcSpec::new(6, 0b10_0001, 0)
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "crc3" | "crc-3" => Some(Self::crc3()),
            "crc6" | "crc-6" => Some(Self::crc6()),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        if *self == Self::crc3() {
            "crc3".into()
        } else if *self == Self::crc6() {
            "crc6".into()
        } else {
            format!("crc{}:{:#x}:{:#x}", self.width, self.poly, self.init)
        }
    }

    fn mask(&self) -> u32 {
        (1u32 << self.width) - 1
    }

    /// Remainder of `bits · x^width` (plus the initial register) modulo the generator.
    pub fn checksum(&self, bits: &[bool]) -> u32 {
        let top = 1u32 << (self.width - 1);
        let mut reg = self.init;
        for &b in bits {
            let feedback = ((reg & top) != 0) ^ b;
            reg = (reg << 1) & self.mask();
            if feedback {
                reg ^= self.poly;
            }
        }
        reg
    }

    /// Appends the checksum, most significant bit first.
    pub fn append(&self, bits: &[bool]) -> Vec<bool> {
        let crc = self.checksum(bits);
        let mut out = bits.to_vec();
        out.extend((0..self.width).rev().map(|i| (crc >> i) & 1 == 1));
        out
    }

    /// True iff the trailing `width` bits are the checksum of the rest.
    pub fn check(&self, bits: &[bool]) -> Result<bool> {
        let w = self.width as usize;
        if bits.len() <= w {
            return Err(BossError::InputTooShort {
                len: bits.len(),
                width: w,
            });
        }
        let (data, tail) = bits.split_at(bits.len() - w);
        let expect = self.checksum(data);
        let got = tail.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        Ok(expect == got)
    }
}

pub fn crc_append(spec: &CrcSpec, bits: &[bool]) -> Vec<bool> {
    spec.append(bits)
}

pub fn crc_check(spec: &CrcSpec, bits: &[bool]) -> Result<bool> {
    spec.check(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// GF(2) long division of `data · x^w` by the full generator polynomial.
    fn long_division(spec: &CrcSpec, data: &[bool]) -> u32 {
        let w = spec.width as usize;
        let mut dividend: Vec<bool> = data.to_vec();
        dividend.extend(std::iter::repeat_n(false, w));
        let mut gen = vec![true];
        gen.extend((0..w).rev().map(|i| (spec.poly >> i) & 1 == 1));
        for i in 0..data.len() {
            if dividend[i] {
                for (j, &gbit) in gen.iter().enumerate() {
                    dividend[i + j] ^= gbit;
                }
            }
        }
        dividend[data.len()..]
            .iter()
            .fold(0u32, |acc, &b| (acc << 1) | b as u32)
    }

    fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
        (0..n).map(|_| rng.random::<bool>()).collect()
    }

    #[test]
    fn zero_input_zero_checksum() {
        for spec in [CrcSpec::crc3(), CrcSpec::crc6()] {
            assert_eq!(spec.checksum(&[false; 13]), 0);
            let frame = spec.append(&[false; 13]);
            assert!(frame[13..].iter().all(|b| !b));
        }
    }

    #[test]
    fn append_then_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for spec in [CrcSpec::crc3(), CrcSpec::crc6()] {
            for _ in 0..10_000 {
                let n = rng.random_range(1..40);
                let bits = random_bits(&mut rng, n);
                let frame = spec.append(&bits);
                assert_eq!(frame.len(), n + spec.width as usize);
                assert!(spec.check(&frame).unwrap());
            }
        }
    }

    #[test]
    fn matches_long_division() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for spec in [CrcSpec::crc3(), CrcSpec::crc6()] {
            for _ in 0..100 {
                let n = rng.random_range(1..64);
                let bits = random_bits(&mut rng, n);
                assert_eq!(spec.checksum(&bits), long_division(&spec, &bits));
            }
        }
    }

    #[test]
    fn every_single_flip_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in [CrcSpec::crc3(), CrcSpec::crc6()] {
            for _ in 0..50 {
                let frame = spec.append(&random_bits(&mut rng, 13));
                for pos in 0..frame.len() {
                    let mut bad = frame.clone();
                    bad[pos] = !bad[pos];
                    assert!(!spec.check(&bad).unwrap(), "flip at {pos} undetected");
                }
            }
        }
    }

    #[test]
    fn random_frames_pass_at_expected_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let trials = 100_000u32;
        for spec in [CrcSpec::crc3(), CrcSpec::crc6()] {
            let p = 0.5f64.powi(spec.width as i32);
            let hits = (0..trials)
                .filter(|_| spec.check(&random_bits(&mut rng, 16)).unwrap())
                .count() as f64;
            let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
            assert!((hits - trials as f64 * p).abs() < 3.0 * sigma, "{hits}");
        }
    }

    #[test]
    fn linearity_with_zero_init() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = CrcSpec::crc6();
        for _ in 0..1000 {
            let a = random_bits(&mut rng, 20);
            let b = random_bits(&mut rng, 20);
            let x: Vec<bool> = a.iter().zip(&b).map(|(p, q)| p ^ q).collect();
            assert_eq!(spec.checksum(&x), spec.checksum(&a) ^ spec.checksum(&b));
        }
    }

    #[test]
    fn short_input_rejected() {
        assert!(matches!(
            CrcSpec::crc3().check(&[true, false, true]),
            Err(BossError::InputTooShort { .. })
        ));
    }
}
