use crate::{Error, Result};

/// Quadratic permutation `π(i) = k·i(i+1)/2 mod N` for `N` a power of two
/// and odd `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticInterleaver {
    multiplier: u64,
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl QuadraticInterleaver {
    pub fn new(len: usize, multiplier: u64) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::config(
                "fec.interleaver_length",
                format!("interleaver length must be a power of 2, got {len}"),
            ));
        }
        if multiplier.is_multiple_of(2) {
            return Err(Error::config(
                "fec.interleaver_k",
                format!("interleaver multiplier must be odd, got {multiplier}"),
            ));
        }
        let n = len as u128;
        let forward: Vec<usize> = (0..len as u128)
            .map(|i| ((multiplier as u128 * (i * (i + 1) / 2)) % n) as usize)
            .collect();
        let mut inverse = vec![usize::MAX; len];
        for (i, &p) in forward.iter().enumerate() {
            // The quadratic map is a bijection modulo a power of two; anything
            // else is a bug in the formula above.
            assert_eq!(inverse[p], usize::MAX, "quadratic map collided at {p}");
            inverse[p] = i;
        }
        Ok(Self {
            multiplier,
            forward,
            inverse,
        })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn multiplier(&self) -> u64 {
        self.multiplier
    }

    /// `π(i)`.
    pub fn index(&self, i: usize) -> usize {
        self.forward[i]
    }

    /// `π⁻¹(i)`.
    pub fn inverse_index(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn permutation(&self) -> &[usize] {
        &self.forward
    }

    /// Moves element `i` to position `π(i)`.
    pub fn permute<V: Copy>(&self, input: &[V]) -> Result<Vec<V>> {
        self.check_len(input.len())?;
        let mut out = input.to_vec();
        for (i, &v) in input.iter().enumerate() {
            out[self.forward[i]] = v;
        }
        Ok(out)
    }

    /// Undoes [`permute`](Self::permute).
    pub fn inverse_permute<V: Copy>(&self, input: &[V]) -> Result<Vec<V>> {
        self.check_len(input.len())?;
        Ok(self.forward.iter().map(|&p| input[p]).collect())
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::input(format!(
                "sequence length {n} does not match interleaver length {}",
                self.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eight_point_permutation() {
        // i(i+1)/2 mod 8 for i = 0..7: 0 1 3 6 10 15 21 28.
        let oracle: Vec<usize> = (0..8usize).map(|i| (i * (i + 1) / 2) % 8).collect();
        assert_eq!(oracle, vec![0, 1, 3, 6, 2, 7, 5, 4]);
        let il = QuadraticInterleaver::new(8, 1).unwrap();
        assert_eq!(il.permutation(), &oracle[..]);
    }

    #[test]
    fn bijective_for_all_supported_lengths() {
        for bits in 0..=12 {
            let n = 1usize << bits;
            for k in [1u64, 3, 5, 7, 13] {
                let il = QuadraticInterleaver::new(n, k).unwrap();
                let mut seen = vec![false; n];
                for &p in il.permutation() {
                    assert!(!seen[p]);
                    seen[p] = true;
                }
                assert!(seen.iter().all(|&s| s));
                for i in 0..n {
                    assert_eq!(il.index(il.inverse_index(i)), i);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(QuadraticInterleaver::new(12, 1).is_err());
        assert!(QuadraticInterleaver::new(0, 1).is_err());
        match QuadraticInterleaver::new(16, 2) {
            Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, "fec.interleaver_k"),
            other => panic!("{other:?}"),
        }
        let il = QuadraticInterleaver::new(8, 1).unwrap();
        assert!(il.permute(&[1, 2, 3]).is_err());
    }

    proptest! {
        #[test]
        fn permute_roundtrip(bits in 0u32..10, k in (0u64..50).prop_map(|x| 2 * x + 1), seed in any::<u64>()) {
            let n = 1usize << bits;
            let il = QuadraticInterleaver::new(n, k).unwrap();
            let data: Vec<u64> = (0..n as u64).map(|i| i.wrapping_mul(seed | 1)).collect();
            let p = il.permute(&data).unwrap();
            prop_assert_eq!(il.inverse_permute(&p).unwrap(), data.clone());
            for i in 0..n {
                prop_assert_eq!(p[il.index(i)], data[i]);
            }
        }
    }
}
