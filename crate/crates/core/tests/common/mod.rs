#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, Normal};
use smoothtsc::dataset::{Instance, LabeledDataset, TimeSeries};
use smoothtsc::seed::rng_from_seed;

pub fn series(v: Vec<f64>) -> TimeSeries {
    TimeSeries::new(v).unwrap()
}

pub fn dataset(name: &str, rows: Vec<(String, Vec<f64>)>) -> LabeledDataset {
    LabeledDataset::new(name, rows.into_iter().map(|(l, v)| Instance::new(series(v), l)).collect()).unwrap()
}

/// Two classes of unit-amplitude sines, one and two cycles per series,
/// buried in i.i.d. Gaussian noise of standard deviation `sigma`.
pub fn noisy_sine(n_train: usize, n_test: usize, m: usize, sigma: f64, seed: u64) -> (LabeledDataset, LabeledDataset) {
    let mut rng = rng_from_seed(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut make = |n: usize| {
        (0..n)
            .map(|i| {
                let cycles = if i % 2 == 0 { 1.0 } else { 2.0 };
                let v = (0..m)
                    .map(|t| {
                        let x = (2.0 * std::f64::consts::PI * cycles * t as f64 / m as f64).sin();
                        x + noise.sample(&mut rng)
                    })
                    .collect();
                (format!("{}", cycles as u32), v)
            })
            .collect::<Vec<_>>()
    };
    let train = make(n_train);
    let test = make(n_test);
    (dataset("NoisySine", train), dataset("NoisySine", test))
}

/// Two classes given by the sign of a one-cycle unit-amplitude sine,
/// labels "+1" and "-1", with i.i.d. Gaussian noise of deviation `sigma`.
pub fn signed_sine(n_train: usize, n_test: usize, m: usize, sigma: f64, seed: u64) -> (LabeledDataset, LabeledDataset) {
    let mut rng = rng_from_seed(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut make = |n: usize| {
        (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let v = (0..m)
                    .map(|t| sign * (2.0 * std::f64::consts::PI * t as f64 / m as f64).sin() + noise.sample(&mut rng))
                    .collect();
                (format!("{sign:+}"), v)
            })
            .collect::<Vec<_>>()
    };
    let train = make(n_train);
    let test = make(n_test);
    (dataset("SignedSine", train), dataset("SignedSine", test))
}

/// Uniform random series with labels drawn from `classes` labels.
pub fn random_dataset(n: usize, m: usize, classes: usize, seed: u64) -> LabeledDataset {
    let mut rng = rng_from_seed(seed);
    let rows = (0..n)
        .map(|i| {
            let label = format!("c{}", i % classes);
            let v = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            (label, v)
        })
        .collect();
    dataset("Random", rows)
}

/// Minimum-cost monotone warping path by exhaustive enumeration, squared
/// pointwise cost, steps confined to |i - j| <= radius.
pub fn dtw_exhaustive(a: &[f64], b: &[f64], radius: usize) -> f64 {
    fn walk(a: &[f64], b: &[f64], r: usize, i: usize, j: usize, acc: f64, best: &mut f64) {
        let d = a[i] - b[j];
        let acc = acc + d * d;
        let m = a.len();
        if i == m - 1 && j == m - 1 {
            *best = best.min(acc);
            return;
        }
        for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
            let (ni, nj) = (i + di, j + dj);
            if ni < m && nj < m && ni.abs_diff(nj) <= r {
                walk(a, b, r, ni, nj, acc, best);
            }
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, radius, 0, 0, 0.0, &mut best);
    best
}
