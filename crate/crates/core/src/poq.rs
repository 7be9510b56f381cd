//! Discrete probability-of-quality distributions.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rational::Rational;

/// The first invariant a candidate distribution breaks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PmfViolation {
    #[error("distribution has no support points")]
    Empty,
    #[error("total mass {0} != 1")]
    MassNotOne(Rational),
    #[error("duplicate quality {0}")]
    DuplicateQuality(Rational),
    #[error("negative quality {0}")]
    NegativeQuality(Rational),
    #[error("probability {probability} at quality {quality} is outside [0, 1]")]
    ProbabilityOutOfRange { quality: Rational, probability: Rational },
}

/// A discrete distribution over completion qualities.
///
/// Support points are strictly increasing in quality, every probability is
/// positive, and the probabilities sum to exactly one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pmf {
    support: Vec<(Rational, Rational)>,
}

/// Checks raw `(quality, probability)` points against the distribution
/// invariants without building a [`Pmf`]. Zero-mass points are allowed here;
/// [`Pmf::new`] drops them.
pub fn validate(points: &[(Rational, Rational)]) -> Result<(), PmfViolation> {
    if points.is_empty() {
        return Err(PmfViolation::Empty);
    }
    let mut seen: Vec<Rational> = Vec::with_capacity(points.len());
    for &(quality, probability) in points {
        if quality.is_negative() {
            return Err(PmfViolation::NegativeQuality(quality));
        }
        if probability.is_negative() || probability > Rational::ONE {
            return Err(PmfViolation::ProbabilityOutOfRange { quality, probability });
        }
        if seen.contains(&quality) {
            return Err(PmfViolation::DuplicateQuality(quality));
        }
        seen.push(quality);
    }
    let mass: Rational = points.iter().map(|&(_, p)| p).sum();
    if mass != Rational::ONE {
        return Err(PmfViolation::MassNotOne(mass));
    }
    Ok(())
}

impl Pmf {
    /// Validates and normalizes: sorts by quality and removes zero-mass points.
    pub fn new(points: impl IntoIterator<Item = (Rational, Rational)>) -> Result<Self, PmfViolation> {
        let mut support: Vec<_> = points.into_iter().collect();
        validate(&support)?;
        support.retain(|&(_, p)| !p.is_zero());
        support.sort_by_key(|a| a.0);
        Ok(Pmf { support })
    }

    /// The point mass at `quality`.
    pub fn point(quality: Rational) -> Self {
        assert!(!quality.is_negative(), "quality must be nonnegative");
        Pmf {
            support: vec![(quality, Rational::ONE)],
        }
    }

    pub fn support(&self) -> &[(Rational, Rational)] {
        &self.support
    }

    pub fn qualities(&self) -> impl Iterator<Item = Rational> + '_ {
        self.support.iter().map(|&(q, _)| q)
    }

    /// Probability of `quality`; zero off the support.
    pub fn prob(&self, quality: Rational) -> Rational {
        self.support
            .iter()
            .find(|&&(q, _)| q == quality)
            .map_or(Rational::ZERO, |&(_, p)| p)
    }

    pub fn min_quality(&self) -> Rational {
        self.support[0].0
    }

    pub fn max_quality(&self) -> Rational {
        self.support[self.support.len() - 1].0
    }

    /// `Some(q)` when all mass sits on `q`.
    pub fn as_point(&self) -> Option<Rational> {
        match self.support.as_slice() {
            [(q, _)] => Some(*q),
            _ => None,
        }
    }

    pub fn expectation(&self) -> Rational {
        expectation(self)
    }

    /// Draws a quality by inverse CDF over the ordered support.
    ///
    /// A single 64-bit word `x` is drawn and the first support point whose
    /// cumulative mass exceeds `x / 2^64` is returned. The comparison is
    /// exact, so the only approximation is the 2^-64 resolution of the draw.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Rational {
        let x = u128::from(rng.next_u64());
        let mut cumulative = Rational::ZERO;
        for &(quality, probability) in &self.support {
            cumulative += probability;
            // x / 2^64 < a / b  <=>  x * b < a * 2^64
            let a = cumulative.numer() as u128;
            let b = cumulative.denom() as u128;
            if x * b < a << 64 {
                return quality;
            }
        }
        self.max_quality()
    }

    /// The mixture `weight * self + (1 - weight) * other`.
    pub fn mix(&self, other: &Pmf, weight: Rational) -> Result<Pmf, PmfViolation> {
        let mut points: Vec<(Rational, Rational)> = Vec::new();
        for (pmf, w) in [(self, weight), (other, Rational::ONE - weight)] {
            for &(q, p) in &pmf.support {
                match points.iter_mut().find(|(existing, _)| *existing == q) {
                    Some(entry) => entry.1 += w * p,
                    None => points.push((q, w * p)),
                }
            }
        }
        Pmf::new(points)
    }
}

/// `Σ q · f(q)`, exact.
pub fn expectation(pmf: &Pmf) -> Rational {
    pmf.support.iter().map(|&(q, p)| q * p).sum()
}

/// Expected quality minus cost.
pub fn expected_welfare(pmf: &Pmf, cost: Rational) -> Rational {
    expectation(pmf) - cost
}

/// Samples with a caller-supplied generator.
pub fn sample<R: RngCore + ?Sized>(pmf: &Pmf, rng: &mut R) -> Rational {
    pmf.sample(rng)
}

/// Reproducible random stream for draw `index` under `seed`.
///
/// Streams for different indices are independent ChaCha streams, so results
/// do not depend on the order in which draws are evaluated.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform index in `0..len` from a seeded stream.
pub(crate) fn pick_index(seed: u64, index: u64, len: usize) -> usize {
    stream(seed, index).random_range(0..len)
}

impl fmt::Debug for Pmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (q, p)) in self.support.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{q:?}: {p:?}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Display for Pmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (q, p)) in self.support.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{q}: {p}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Pmf {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.support.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Pmf {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let points = Vec::<(Rational, Rational)>::deserialize(deserializer)?;
        Pmf::new(points).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn pmf(points: &[(i128, i128, i128)]) -> Pmf {
        Pmf::new(points.iter().map(|&(q, n, d)| (rat(q, 1), rat(n, d)))).unwrap()
    }

    #[test]
    fn expectation_matches_hand_sums() {
        let f10 = pmf(&[(4, 1, 2), (5, 3, 10), (6, 1, 5)]);
        assert_eq!(expectation(&f10), rat(47, 10));
        assert_eq!(expected_welfare(&f10, rat(1, 5)), rat(9, 2));
        let f9 = pmf(&[(8, 4, 5), (10, 1, 5)]);
        assert_eq!(expectation(&f9), rat(42, 5));
        assert_eq!(expected_welfare(&f9, rat(1, 1)), rat(37, 5));
        assert_eq!(expectation(&Pmf::point(rat(7, 2))), rat(7, 2));
        assert_eq!(
            expected_welfare(&Pmf::point(Rational::ZERO), Rational::ZERO),
            Rational::ZERO
        );
        assert_eq!(expected_welfare(&Pmf::point(rat(5, 1)), rat(1, 1)), rat(4, 1));
    }

    #[test]
    fn validate_reports_first_violation() {
        let ok = [(rat(3, 1), rat(3, 10)), (rat(4, 1), rat(3, 5)), (rat(7, 1), rat(1, 10))];
        assert_eq!(validate(&ok), Ok(()));
        assert_eq!(
            validate(&[(rat(1, 1), rat(1, 2))]),
            Err(PmfViolation::MassNotOne(rat(1, 2)))
        );
        assert_eq!(
            validate(&[(rat(2, 1), rat(1, 2)), (rat(2, 1), rat(1, 2))]),
            Err(PmfViolation::DuplicateQuality(rat(2, 1)))
        );
        assert_eq!(validate(&[]), Err(PmfViolation::Empty));
        assert!(matches!(
            validate(&[(rat(-1, 1), rat(1, 1))]),
            Err(PmfViolation::NegativeQuality(_))
        ));
        assert!(matches!(
            validate(&[(rat(1, 1), rat(3, 2)), (rat(2, 1), rat(-1, 2))]),
            Err(PmfViolation::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn new_sorts_and_drops_zero_mass() {
        let f = Pmf::new([
            (rat(5, 1), rat(1, 2)),
            (rat(1, 1), Rational::ZERO),
            (rat(2, 1), rat(1, 2)),
        ])
        .unwrap();
        assert_eq!(f.support(), &[(rat(2, 1), rat(1, 2)), (rat(5, 1), rat(1, 2))]);
        assert_eq!(f.prob(rat(1, 1)), Rational::ZERO);
        assert_eq!(f.as_point(), None);
    }

    #[test]
    fn point_mass_always_samples_its_quality() {
        let f = Pmf::point(rat(3, 1));
        let mut rng = stream(11, 0);
        for _ in 0..1000 {
            assert_eq!(f.sample(&mut rng), rat(3, 1));
        }
    }

    #[test]
    fn sampling_is_reproducible_and_unbiased() {
        let f = pmf(&[(0, 1, 2), (1, 1, 2)]);
        let n = 100_000u32;
        let draw = |seed| {
            let mut rng = stream(seed, 0);
            (0..n).map(|_| f.sample(&mut rng)).collect::<Vec<_>>()
        };
        let a = draw(42);
        assert_eq!(a, draw(42));
        let ones = a.iter().filter(|q| **q == Rational::ONE).count() as f64;
        let mean = ones / f64::from(n);
        let band = 4.0 * (0.25 / f64::from(n)).sqrt();
        assert!((mean - 0.5).abs() <= band, "mean {mean} outside ±{band}");
        assert!(a.iter().all(|q| f.prob(*q).is_positive()));
    }

    #[test]
    fn mixture_expectation_is_linear() {
        let f = pmf(&[(2, 1, 2), (3, 1, 2)]);
        let g = pmf(&[(3, 3, 10), (4, 3, 5), (7, 1, 10)]);
        let alpha = rat(1, 3);
        let mixed = f.mix(&g, alpha).unwrap();
        assert_eq!(
            mixed.expectation(),
            alpha * f.expectation() + (Rational::ONE - alpha) * g.expectation()
        );
    }
}
