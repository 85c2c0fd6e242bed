use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::Parity;

const CHUNK: usize = 512;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityEstimate {
    /// `None` when no position was counted.
    pub empirical: Option<f64>,
    pub reference: f64,
    pub standard_error: Option<f64>,
    pub samples: usize,
    pub positions_per_sample: usize,
}

/// Gauss measure of `(1/(n+1), 1/n]`.
pub fn gauss_reference_density(n: u64) -> f64 {
    let n = n as f64;
    ((n + 1.0) * (n + 1.0) / (n * (n + 2.0))).log2()
}

/// Fraction of digits equal to `digit` among positions of the given parity.
///
/// Each sample is a uniform dyadic rational with `4·depth + 64` bits, expanded
/// exactly. The first `burn_in` positions are skipped: Lebesgue measure only
/// relaxes to the Gauss measure exponentially fast in the position.
pub fn gauss_digit_density(
    samples: usize,
    depth: usize,
    digit: u64,
    parity: Parity,
    seed: u64,
    burn_in: usize,
) -> DensityEstimate {
    let reference = gauss_reference_density(digit);
    let positions: Vec<usize> = (1..=depth)
        .filter(|&k| k > burn_in && (k % 2 == 1) == (parity == Parity::Odd))
        .collect();
    let per = positions.len();
    if samples == 0 || per == 0 {
        return DensityEstimate {
            empirical: None,
            reference,
            standard_error: None,
            samples,
            positions_per_sample: per,
        };
    }
    let bits = 4 * depth as u64 + 64;
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for _ in 0..count {
                let f = sample_fraction(&mut rng, bits, depth, digit, parity, burn_in) / per as f64;
                s1 += f;
                s2 += f * f;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = s1 / n;
    let se = if samples > 1 {
        let var = (s2 - n * mean * mean) / (n - 1.0);
        Some((var.max(0.0) / n).sqrt())
    } else {
        None
    };
    DensityEstimate {
        empirical: Some(mean),
        reference,
        standard_error: se,
        samples,
        positions_per_sample: per,
    }
}

fn sample_fraction(
    rng: &mut ChaCha8Rng,
    bits: u64,
    depth: usize,
    digit: u64,
    parity: Parity,
    burn_in: usize,
) -> f64 {
    let den0 = BigUint::from(1u8) << bits;
    let mut num = rng.gen_biguint(bits);
    while num.is_zero() {
        num = rng.gen_biguint(bits);
    }
    // x = num/den0 ∈ (0, 1): a_0 = 0, then Euclid on (den0, num)
    let mut a = den0;
    let mut b = num;
    let mut hits = 0usize;
    for k in 1..=depth {
        if b.is_zero() {
            break;
        }
        let (q, r) = a.div_rem(&b);
        if k > burn_in
            && (k % 2 == 1) == (parity == Parity::Odd)
            && q.to_u64() == Some(digit)
        {
            hits += 1;
        }
        a = b;
        b = r;
    }
    hits as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((gauss_reference_density(1) - 0.415_037).abs() < 1e-6);
        assert!((gauss_reference_density(2) - 0.169_925).abs() < 1e-6);
        let total: f64 = (1..200_000).map(gauss_reference_density).sum();
        assert!((total - 1.0).abs() < 1e-5);
    }

    #[test]
    fn zero_samples_is_no_data() {
        let d = gauss_digit_density(0, 50, 1, Parity::Odd, 1, 0);
        assert_eq!(d.empirical, None);
    }

    #[test]
    fn deterministic_under_seed() {
        let a = gauss_digit_density(700, 40, 1, Parity::Even, 9, 4);
        let b = gauss_digit_density(700, 40, 1, Parity::Even, 9, 4);
        assert_eq!(a, b);
        let c = gauss_digit_density(700, 40, 1, Parity::Even, 10, 4);
        assert_ne!(a.empirical, c.empirical);
    }

    #[test]
    fn digit_two_is_near_reference() {
        let d = gauss_digit_density(4000, 60, 2, Parity::Even, 3, 16);
        let se = d.standard_error.unwrap();
        assert!((d.empirical.unwrap() - d.reference).abs() < 4.0 * se);
    }
}
