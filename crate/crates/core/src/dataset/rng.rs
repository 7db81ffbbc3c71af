use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RngError {
    #[error("randint range is empty: {m} > {n}")]
    EmptyRange { m: i64, n: i64 },
    #[error("choice from an empty list")]
    EmptyChoice,
}

/// SplitMix64 stream. Identical seeds give identical streams on every
/// platform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Integer `x` with `m <= x <= n`. Modulo bias is negligible for the
    /// ranges used here.
    pub fn randint(&mut self, m: i64, n: i64) -> Result<i64, RngError> {
        if m > n {
            return Err(RngError::EmptyRange { m, n });
        }
        let span = (n as i128 - m as i128 + 1) as u128;
        let offset = (self.next_u64() as u128 % span) as i128;
        Ok((m as i128 + offset) as i64)
    }

    pub fn choice<'a, T>(&mut self, items: &'a [T]) -> Result<&'a T, RngError> {
        if items.is_empty() {
            return Err(RngError::EmptyChoice);
        }
        let i = self.randint(0, items.len() as i64 - 1)?;
        Ok(&items[i as usize])
    }

    /// Fisher-Yates, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.randint(0, i as i64).expect("non-empty range") as usize;
            items.swap(i, j);
        }
    }

    /// Standard normal deviate (Box-Muller, one value per call).
    pub fn gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use super::Rng;

    #[test]
    fn splitmix_reference_stream() {
        let mut r = Rng::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(r.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn randint_cases() {
        let mut r = Rng::new(42);
        assert_eq!(r.randint(3, 3).unwrap(), 3);
        assert_eq!(r.randint(4, 3), Err(RngError::EmptyRange { m: 4, n: 3 }));
        let mut seen = [0usize; 10];
        for _ in 0..10_000 {
            seen[r.randint(0, 9).unwrap() as usize] += 1;
        }
        assert!(seen.iter().all(|&c| c > 0), "{seen:?}");
        assert!(r.randint(i64::MIN, i64::MAX).is_ok());
    }

    #[test]
    fn choice_cases() {
        let mut r = Rng::new(1);
        assert_eq!(*r.choice(&["only"]).unwrap(), "only");
        assert_eq!(r.choice::<u8>(&[]), Err(RngError::EmptyChoice));
        let animals = ["dog", "cat", "mouse", "lion"];
        let a: Vec<_> = (0..20).map(|_| *Rng::new(9).choice(&animals).unwrap()).collect();
        let mut r1 = Rng::new(9);
        let mut r2 = Rng::new(9);
        let s1: Vec<_> = (0..20).map(|_| *r1.choice(&animals).unwrap()).collect();
        let s2: Vec<_> = (0..20).map(|_| *r2.choice(&animals).unwrap()).collect();
        assert_eq!(s1, s2);
        assert!(a.iter().all(|x| animals.contains(x)));
    }

    proptest! {
        #[test]
        fn randint_in_range(seed: u64, m in -1000i64..1000, span in 0i64..1000) {
            let mut r = Rng::new(seed);
            for _ in 0..20 {
                let x = r.randint(m, m + span).unwrap();
                prop_assert!(m <= x && x <= m + span);
            }
        }

        #[test]
        fn shuffle_is_a_permutation(seed: u64, n in 0usize..50) {
            let mut v: Vec<usize> = (0..n).collect();
            Rng::new(seed).shuffle(&mut v);
            v.sort_unstable();
            prop_assert_eq!(v, (0..n).collect::<Vec<_>>());
        }
    }
}
