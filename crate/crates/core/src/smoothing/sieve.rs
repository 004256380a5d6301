//! Recursive median sieve.
//!
//! The series is held as maximal runs of equal values. At scale `s` every
//! interior run of extent at most `s` that is a strict local maximum or
//! minimum is merged into whichever neighbouring run is closer in value
//! (the left one on a tie). Scales are applied in increasing order up to the
//! requested one, so the output has no extremum of extent `<= c`.

use crate::dataset::TimeSeries;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
struct Run {
    value: f64,
    len: usize,
}

fn to_runs(values: &[f64]) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for &v in values {
        match runs.last_mut() {
            Some(r) if r.value == v => r.len += 1,
            _ => runs.push(Run { value: v, len: 1 }),
        }
    }
    runs
}

fn is_extremum(runs: &[Run], i: usize) -> bool {
    if i == 0 || i + 1 >= runs.len() {
        return false;
    }
    let (l, v, r) = (runs[i - 1].value, runs[i].value, runs[i + 1].value);
    (v > l && v > r) || (v < l && v < r)
}

/// Merge run `i + 1` into run `i`.
fn merge_right(runs: &mut Vec<Run>, i: usize) {
    let extra = runs.remove(i + 1).len;
    runs[i].len += extra;
}

fn sieve_scale_pass(runs: &mut Vec<Run>, scale: usize) {
    let mut i = 1;
    while i + 1 < runs.len() {
        if runs[i].len <= scale && is_extremum(runs, i) {
            let v = runs[i].value;
            let (l, r) = (runs[i - 1].value, runs[i + 1].value);
            let target = if (v - l).abs() <= (v - r).abs() { l } else { r };
            runs[i].value = target;
            let mut j = i;
            if runs[j + 1].value == target {
                merge_right(runs, j);
            }
            if runs[j - 1].value == target {
                merge_right(runs, j - 1);
                j -= 1;
            }
            // the merged run and its left neighbour may have become extrema
            i = j.saturating_sub(1).max(1);
        } else {
            i += 1;
        }
    }
}

/// Sieve to scale `c`, removing all extrema of extent up to `c`.
pub fn smooth_sieve(series: &TimeSeries, c: usize) -> Result<TimeSeries> {
    if c < 1 {
        return Err(Error::Parameter("sieve scale must be >= 1".into()));
    }
    let mut runs = to_runs(series.values());
    let longest = series.len();
    for scale in 1..=c.min(longest) {
        sieve_scale_pass(&mut runs, scale);
    }
    let mut out = Vec::with_capacity(series.len());
    for r in runs {
        out.extend(std::iter::repeat_n(r.value, r.len));
    }
    Ok(TimeSeries::from_finite(out))
}

/// Extent of the shortest strict local-extremum run, if any.
pub fn min_extremum_extent(values: &[f64]) -> Option<usize> {
    let runs = to_runs(values);
    (1..runs.len().saturating_sub(1))
        .filter(|&i| is_extremum(&runs, i))
        .map(|i| runs[i].len)
        .min()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sieve(v: &[f64], c: usize) -> Vec<f64> {
        smooth_sieve(&TimeSeries::new(v.to_vec()).unwrap(), c)
            .unwrap()
            .into_values()
    }

    #[test]
    fn single_spike_removed() {
        assert_eq!(sieve(&[0.0, 5.0, 0.0], 1), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn spike_goes_to_closer_neighbour() {
        assert_eq!(sieve(&[0.0, 5.0, 4.0, 4.5], 1), vec![0.0, 4.0, 4.0, 4.5]);
        // peak then trough, each to its closer neighbour
        assert_eq!(sieve(&[1.0, 2.0, 3.0, 0.0, 3.0], 1), vec![1.0, 2.0, 2.0, 2.0, 3.0]);
        assert_eq!(sieve(&[2.0, 5.0, 8.0, 1.0], 1), vec![2.0, 5.0, 5.0, 1.0]);
        assert_eq!(sieve(&[0.0, 1.0, 0.5, 2.0], 1), vec![0.0, 0.5, 0.5, 2.0]);
    }

    #[test]
    fn scale_two_needs_scale_two() {
        let x = [0.0, 5.0, 5.0, 0.0];
        assert_eq!(sieve(&x, 1), x.to_vec());
        assert_eq!(sieve(&x, 2), vec![0.0; 4]);
    }

    #[test]
    fn monotone_unchanged() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sqrt()).collect();
        assert_eq!(sieve(&x, 10), x);
    }

    #[test]
    fn alternating_series_flattens() {
        let x = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let out = sieve(&x, 1);
        assert_eq!(min_extremum_extent(&out), None);
        assert_eq!(sieve(&out, 1), out);
    }

    #[test]
    fn ends_are_not_extrema() {
        assert_eq!(sieve(&[9.0, 0.0, 0.0, -9.0], 3), vec![9.0, 0.0, 0.0, -9.0]);
    }
}
