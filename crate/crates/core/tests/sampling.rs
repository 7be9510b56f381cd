//! Goodness of fit of seeded PoQ sampling.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use taskdiff_core::bundled;
use taskdiff_core::poq::stream;
use taskdiff_core::{rat, Pmf};

const DRAWS: u64 = 100_000;

fn chi_square_p_value(pmf: &Pmf, seed: u64) -> f64 {
    let mut counts = vec![0u64; pmf.support().len()];
    for k in 0..DRAWS {
        let q = pmf.sample(&mut stream(seed, k));
        let slot = pmf.support().iter().position(|&(x, _)| x == q).unwrap();
        counts[slot] += 1;
    }
    let stat: f64 = pmf
        .support()
        .iter()
        .zip(&counts)
        .map(|(&(_, p), &c)| {
            let expected = p.to_f64() * DRAWS as f64;
            (c as f64 - expected).powi(2) / expected
        })
        .sum();
    let df = (pmf.support().len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

#[test]
fn every_table1_distribution_passes_chi_square_at_one_in_a_thousand() {
    for (id, pmf, _) in bundled::example2_table() {
        if pmf.support().len() < 2 {
            continue;
        }
        let p = chi_square_p_value(&pmf, 2024 + u64::from(id.0));
        assert!(p > 1e-3, "agent {id}: p-value {p}");
    }
}

#[test]
fn fair_coin_mean_within_four_standard_errors() {
    let pmf = Pmf::new([(rat(0, 1), rat(1, 2)), (rat(1, 1), rat(1, 2))]).unwrap();
    let ones: u64 = (0..DRAWS)
        .filter(|&k| pmf.sample(&mut stream(99, k)) == rat(1, 1))
        .count() as u64;
    let mean = ones as f64 / DRAWS as f64;
    assert!((mean - 0.5).abs() <= 4.0 * (0.25 / DRAWS as f64).sqrt(), "mean {mean}");
    let again: u64 = (0..DRAWS)
        .filter(|&k| pmf.sample(&mut stream(99, k)) == rat(1, 1))
        .count() as u64;
    assert_eq!(ones, again);
}

#[test]
fn biased_sampler_is_rejected() {
    // Negative control: draws from one distribution tested against another.
    let truth = Pmf::new([(rat(0, 1), rat(1, 2)), (rat(1, 1), rat(1, 2))]).unwrap();
    let claimed = Pmf::new([(rat(0, 1), rat(12, 25)), (rat(1, 1), rat(13, 25))]).unwrap();
    let mut counts = [0f64; 2];
    for k in 0..DRAWS {
        let q = truth.sample(&mut stream(5, k));
        counts[usize::from(q == rat(1, 1))] += 1.0;
    }
    let stat: f64 = claimed
        .support()
        .iter()
        .zip(counts)
        .map(|(&(_, p), c)| (c - p.to_f64() * DRAWS as f64).powi(2) / (p.to_f64() * DRAWS as f64))
        .sum();
    assert!(1.0 - ChiSquared::new(1.0).unwrap().cdf(stat) < 1e-3);
}
