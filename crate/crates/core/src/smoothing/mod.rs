//! Smoothing filters, their parameter grids, and dataset-level application.
//!
//! A [`SmootherSpec`] names one filter with concrete parameters and has a
//! stable text form (`none`, `ma:w=5`, `exp:w=5`, `gf:w=5`, `sg:w=5,n=2`,
//! `dft:r=0.1`, `siv:k=5`). Sieve specs carry a grid index `k`; the
//! realised scale depends on the series length, see [`sieve_scale`].

mod filters;
mod sieve;

use std::fmt;
use std::str::FromStr;

pub use filters::{
    dft_retained, exp_alpha, smooth_dft, smooth_exp, smooth_exp_literal, smooth_gauss, smooth_ma,
    smooth_sg, ConvolutionKernel,
};
pub use sieve::{min_extremum_extent, smooth_sieve};

use crate::dataset::{znormalize, LabeledDataset, TimeSeries};
use crate::error::{Error, Result};

/// Number of rungs on the sieve scale ladder.
pub const SIEVE_LADDER: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SmootherKind {
    None,
    MovingAverage,
    Exponential,
    Gaussian,
    SavitzkyGolay,
    Fourier,
    Sieve,
}

impl SmootherKind {
    /// The six filter families, in canonical order.
    pub const FAMILIES: [SmootherKind; 6] = [
        SmootherKind::MovingAverage,
        SmootherKind::Exponential,
        SmootherKind::Gaussian,
        SmootherKind::SavitzkyGolay,
        SmootherKind::Fourier,
        SmootherKind::Sieve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SmootherKind::None => "none",
            SmootherKind::MovingAverage => "ma",
            SmootherKind::Exponential => "exp",
            SmootherKind::Gaussian => "gf",
            SmootherKind::SavitzkyGolay => "sg",
            SmootherKind::Fourier => "dft",
            SmootherKind::Sieve => "siv",
        }
    }

    /// The default-parameter spec of this family.
    pub fn default_spec(self) -> SmootherSpec {
        match self {
            SmootherKind::None => SmootherSpec::None,
            SmootherKind::MovingAverage => SmootherSpec::MovingAverage { w: 5 },
            SmootherKind::Exponential => SmootherSpec::Exponential { w: 5 },
            SmootherKind::Gaussian => SmootherSpec::Gaussian { w: 5 },
            SmootherKind::SavitzkyGolay => SmootherSpec::SavitzkyGolay { w: 5, n: 2 },
            SmootherKind::Fourier => SmootherSpec::Fourier { r: 0.1 },
            SmootherKind::Sieve => SmootherSpec::Sieve { k: 5 },
        }
    }
}

impl fmt::Display for SmootherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SmootherKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.trim() {
            "none" => SmootherKind::None,
            "ma" => SmootherKind::MovingAverage,
            "exp" => SmootherKind::Exponential,
            "gf" => SmootherKind::Gaussian,
            "sg" => SmootherKind::SavitzkyGolay,
            "dft" => SmootherKind::Fourier,
            "siv" => SmootherKind::Sieve,
            other => return Err(Error::Config(format!("unknown smoother family {other:?}"))),
        };
        Ok(kind)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SmootherSpec {
    None,
    MovingAverage { w: usize },
    Exponential { w: usize },
    Gaussian { w: usize },
    SavitzkyGolay { w: usize, n: usize },
    Fourier { r: f64 },
    /// Sieve at the `k`-th rung of the scale ladder.
    Sieve { k: usize },
}

impl SmootherSpec {
    pub fn kind(&self) -> SmootherKind {
        match self {
            SmootherSpec::None => SmootherKind::None,
            SmootherSpec::MovingAverage { .. } => SmootherKind::MovingAverage,
            SmootherSpec::Exponential { .. } => SmootherKind::Exponential,
            SmootherSpec::Gaussian { .. } => SmootherKind::Gaussian,
            SmootherSpec::SavitzkyGolay { .. } => SmootherKind::SavitzkyGolay,
            SmootherSpec::Fourier { .. } => SmootherKind::Fourier,
            SmootherSpec::Sieve { .. } => SmootherKind::Sieve,
        }
    }

    /// Check the parameters against a series length without smoothing.
    pub fn validate(&self, m: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(format!("{self}: {msg}")));
        match *self {
            SmootherSpec::None => Ok(()),
            SmootherSpec::MovingAverage { w } if w < 2 || w >= m => {
                bad(format!("window must satisfy 2 <= w < {m}"))
            }
            SmootherSpec::Exponential { w } if w < 1 => bad("window must be >= 1".into()),
            SmootherSpec::Gaussian { w } if w < 2 || w > m => {
                bad(format!("window must satisfy 2 <= w <= {m}"))
            }
            SmootherSpec::SavitzkyGolay { w, n } => {
                filters::check_sg(w, n)?;
                if w > m {
                    bad(format!("window exceeds series length {m}"))
                } else {
                    Ok(())
                }
            }
            SmootherSpec::Fourier { r } if !(r > 0.0 && r <= 1.0) => {
                bad("proportion must lie in (0, 1]".into())
            }
            SmootherSpec::Sieve { k } if k < 1 => bad("ladder index must be >= 1".into()),
            _ => Ok(()),
        }
    }

    /// Smooth one series (no renormalisation).
    pub fn smooth(&self, series: &TimeSeries) -> Result<TimeSeries> {
        match *self {
            SmootherSpec::None => Ok(series.clone()),
            SmootherSpec::MovingAverage { w } => smooth_ma(series, w),
            SmootherSpec::Exponential { w } => {
                if cfg!(feature = "exp-literal") {
                    smooth_exp_literal(series, w)
                } else {
                    smooth_exp(series, w)
                }
            }
            SmootherSpec::Gaussian { w } => smooth_gauss(series, w),
            SmootherSpec::SavitzkyGolay { w, n } => smooth_sg(series, w, n),
            SmootherSpec::Fourier { r } => smooth_dft(series, r),
            SmootherSpec::Sieve { k } => {
                if k < 1 {
                    return Err(Error::Parameter("sieve ladder index must be >= 1".into()));
                }
                smooth_sieve(series, sieve_scale(k, series.len()))
            }
        }
    }
}

impl fmt::Display for SmootherSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmootherSpec::None => write!(f, "none"),
            SmootherSpec::MovingAverage { w } => write!(f, "ma:w={w}"),
            SmootherSpec::Exponential { w } => write!(f, "exp:w={w}"),
            SmootherSpec::Gaussian { w } => write!(f, "gf:w={w}"),
            SmootherSpec::SavitzkyGolay { w, n } => write!(f, "sg:w={w},n={n}"),
            SmootherSpec::Fourier { r } => write!(f, "dft:r={r}"),
            SmootherSpec::Sieve { k } => write!(f, "siv:k={k}"),
        }
    }
}

impl FromStr for SmootherSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, params) = s.split_once(':').unwrap_or((s, ""));
        let kind: SmootherKind = family.parse()?;
        let mut values: Vec<(&str, &str)> = Vec::new();
        for part in params.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed parameter {part:?} in {s:?}")))?;
            values.push((k.trim(), v.trim()));
        }
        let get = |key: &str| -> Result<&str> {
            values
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::Config(format!("{s:?} lacks parameter {key}")))
        };
        let int = |key: &str| -> Result<usize> {
            get(key)?
                .parse()
                .map_err(|_| Error::Config(format!("{s:?}: {key} is not a non-negative integer")))
        };
        let expected: &[&str] = match kind {
            SmootherKind::None => &[],
            SmootherKind::SavitzkyGolay => &["w", "n"],
            SmootherKind::Fourier => &["r"],
            SmootherKind::Sieve => &["k"],
            _ => &["w"],
        };
        if let Some((k, _)) = values.iter().find(|(k, _)| !expected.contains(k)) {
            return Err(Error::Config(format!("{s:?}: unexpected parameter {k}")));
        }
        let spec = match kind {
            SmootherKind::None => SmootherSpec::None,
            SmootherKind::MovingAverage => SmootherSpec::MovingAverage { w: int("w")? },
            SmootherKind::Exponential => SmootherSpec::Exponential { w: int("w")? },
            SmootherKind::Gaussian => SmootherSpec::Gaussian { w: int("w")? },
            SmootherKind::SavitzkyGolay => SmootherSpec::SavitzkyGolay {
                w: int("w")?,
                n: int("n")?,
            },
            SmootherKind::Fourier => SmootherSpec::Fourier {
                r: get("r")?
                    .parse()
                    .map_err(|_| Error::Config(format!("{s:?}: r is not a number")))?,
            },
            SmootherKind::Sieve => SmootherSpec::Sieve { k: int("k")? },
        };
        Ok(spec)
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Realised sieve scale for ladder index `k`: `max(1, round(m^(k/15)))`.
pub fn sieve_scale(k: usize, m: usize) -> usize {
    round_half_up((m as f64).powf(k as f64 / SIEVE_LADDER as f64)).max(1)
}

/// Candidate specs for one family at one series length, with the default
/// flagged.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterGrid {
    pub specs: Vec<SmootherSpec>,
    pub default_index: Option<usize>,
}

impl ParameterGrid {
    pub fn default_spec(&self) -> Option<SmootherSpec> {
        self.default_index.map(|i| self.specs[i])
    }
}

const WINDOW_GRID: [usize; 7] = [2, 3, 5, 10, 25, 50, 100];
const SG_WINDOWS: [usize; 5] = [5, 9, 17, 33, 65];
const SG_ORDERS: [usize; 6] = [2, 3, 4, 8, 16, 32];
const DFT_PROPORTIONS: [f64; 5] = [0.01, 0.05, 0.1, 0.25, 0.5];

fn window_grid(m: usize) -> (Vec<usize>, Option<usize>) {
    if m < 3 {
        return (Vec::new(), None);
    }
    let hi = m - 1;
    let root = round_half_up((m as f64).sqrt());
    let log = round_half_up((m as f64).log2());
    let mut ws: Vec<usize> = WINDOW_GRID
        .iter()
        .copied()
        .chain([root, log])
        .map(|w| w.clamp(2, hi))
        .collect();
    ws.sort_unstable();
    ws.dedup();
    let default = 5usize.clamp(2, hi);
    let idx = ws.iter().position(|&w| w == default);
    (ws, idx)
}

/// The parameter grid for `kind` at series length `m`. `None` yields the
/// single spec `none`.
pub fn default_grid(kind: SmootherKind, m: usize) -> ParameterGrid {
    let (specs, default_index) = match kind {
        SmootherKind::None => (vec![SmootherSpec::None], Some(0)),
        SmootherKind::MovingAverage | SmootherKind::Exponential | SmootherKind::Gaussian => {
            let (ws, idx) = window_grid(m);
            let specs = ws
                .into_iter()
                .map(|w| match kind {
                    SmootherKind::MovingAverage => SmootherSpec::MovingAverage { w },
                    SmootherKind::Exponential => SmootherSpec::Exponential { w },
                    _ => SmootherSpec::Gaussian { w },
                })
                .collect();
            (specs, idx)
        }
        SmootherKind::SavitzkyGolay => {
            let specs: Vec<SmootherSpec> = SG_WINDOWS
                .iter()
                .filter(|&&w| w <= m)
                .flat_map(|&w| {
                    SG_ORDERS
                        .iter()
                        .filter(move |&&n| w > 2 * n)
                        .map(move |&n| SmootherSpec::SavitzkyGolay { w, n })
                })
                .collect();
            let idx = specs
                .iter()
                .position(|s| *s == SmootherSpec::SavitzkyGolay { w: 5, n: 2 });
            (specs, idx)
        }
        SmootherKind::Fourier => {
            let log = round_half_up((m as f64).log2()) as f64 / m as f64;
            let mut rs: Vec<f64> = DFT_PROPORTIONS
                .iter()
                .copied()
                .chain([log])
                .map(|r| r.min(1.0))
                .filter(|&r| r > 0.0)
                .collect();
            rs.sort_by(f64::total_cmp);
            rs.dedup();
            let idx = rs.iter().position(|&r| r == 0.1);
            (rs.into_iter().map(|r| SmootherSpec::Fourier { r }).collect(), idx)
        }
        SmootherKind::Sieve => {
            let mut specs = Vec::new();
            let mut scales = Vec::new();
            for k in 1..=SIEVE_LADDER {
                let c = sieve_scale(k, m);
                if !scales.contains(&c) {
                    scales.push(c);
                    specs.push(SmootherSpec::Sieve { k });
                }
            }
            let default_scale = sieve_scale(5, m);
            let idx = scales.iter().position(|&c| c == default_scale);
            (specs, idx)
        }
    };
    ParameterGrid {
        specs,
        default_index,
    }
}

/// Smooth every series with `spec` and z-normalise the result. `None`
/// returns the dataset unchanged (no renormalisation either).
pub fn apply_smoother(spec: &SmootherSpec, dataset: &LabeledDataset) -> Result<LabeledDataset> {
    if let SmootherSpec::None = spec {
        return Ok(dataset.clone());
    }
    spec.validate(dataset.series_length())?;
    dataset.map_series(|x| Ok(znormalize(&spec.smooth(x)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Instance;

    #[test]
    fn ma_grid_at_100() {
        let g = default_grid(SmootherKind::MovingAverage, 100);
        let ws: Vec<usize> = g
            .specs
            .iter()
            .map(|s| match s {
                SmootherSpec::MovingAverage { w } => *w,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(ws, vec![2, 3, 5, 7, 10, 25, 50, 99]);
        assert_eq!(g.default_spec(), Some(SmootherSpec::MovingAverage { w: 5 }));
    }

    #[test]
    fn sg_grid_has_nineteen_pairs() {
        // enumerate {5,9,17,33,65} x {2,3,4,8,16,32} with w > 2n by hand: 1+3+4+5+6
        let g = default_grid(SmootherKind::SavitzkyGolay, 128);
        assert_eq!(g.specs.len(), 19);
        assert_eq!(g.default_spec(), Some(SmootherSpec::SavitzkyGolay { w: 5, n: 2 }));
        assert!(g.specs.iter().all(|s| matches!(s, SmootherSpec::SavitzkyGolay { w, n } if *w > 2 * n)));
        assert_eq!(default_grid(SmootherKind::SavitzkyGolay, 65).specs.len(), 19);
        assert_eq!(default_grid(SmootherKind::SavitzkyGolay, 20).specs.len(), 8);
    }

    #[test]
    fn dft_grid_at_128() {
        let g = default_grid(SmootherKind::Fourier, 128);
        let rs: Vec<f64> = g
            .specs
            .iter()
            .map(|s| match s {
                SmootherSpec::Fourier { r } => *r,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(rs, vec![0.01, 0.05, 7.0 / 128.0, 0.1, 0.25, 0.5]);
        assert_eq!(g.default_spec(), Some(SmootherSpec::Fourier { r: 0.1 }));
    }

    #[test]
    fn sieve_ladder() {
        assert_eq!(sieve_scale(15, 128), 128);
        assert_eq!(sieve_scale(5, 125), 5);
        assert_eq!(sieve_scale(1, 10), 1);
        let g = default_grid(SmootherKind::Sieve, 1000);
        assert_eq!(g.default_spec(), Some(SmootherSpec::Sieve { k: 5 }));
        let small = default_grid(SmootherKind::Sieve, 24);
        assert!(small.specs.len() < 15);
        let scales: Vec<usize> = small
            .specs
            .iter()
            .map(|s| match s {
                SmootherSpec::Sieve { k } => sieve_scale(*k, 24),
                _ => unreachable!(),
            })
            .collect();
        assert!(scales.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn tiny_lengths() {
        assert!(default_grid(SmootherKind::MovingAverage, 2).specs.is_empty());
        let g = default_grid(SmootherKind::Gaussian, 4);
        assert_eq!(g.specs, vec![SmootherSpec::Gaussian { w: 2 }, SmootherSpec::Gaussian { w: 3 }]);
        assert_eq!(g.default_spec(), Some(SmootherSpec::Gaussian { w: 3 }));
    }

    #[test]
    fn text_form_round_trips() {
        for text in ["none", "ma:w=5", "exp:w=5", "gf:w=5", "sg:w=5,n=2", "dft:r=0.1", "siv:k=5", "dft:r=0.0546875"] {
            let spec: SmootherSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert!("ma".parse::<SmootherSpec>().is_err());
        assert!("ma:w=x".parse::<SmootherSpec>().is_err());
        assert!("ma:w=3,n=2".parse::<SmootherSpec>().is_err());
        assert!("wavelet:w=3".parse::<SmootherSpec>().is_err());
    }

    fn dataset(rows: &[&[f64]]) -> LabeledDataset {
        let instances = rows
            .iter()
            .enumerate()
            .map(|(i, v)| Instance::new(TimeSeries::new(v.to_vec()).unwrap(), (i % 2).to_string()))
            .collect();
        LabeledDataset::new("t", instances).unwrap()
    }

    #[test]
    fn apply_none_is_identity() {
        let d = dataset(&[&[1.0, 2.0, 3.0], &[0.5, 0.1, 0.2]]);
        assert_eq!(apply_smoother(&SmootherSpec::None, &d).unwrap(), d);
    }

    #[test]
    fn apply_ma_shortens_and_normalises() {
        let d = dataset(&[&[0.0, 3.0, 6.0, 9.0], &[1.0, 0.0, 4.0, 2.0]]);
        let out = apply_smoother(&SmootherSpec::MovingAverage { w: 2 }, &d).unwrap();
        assert_eq!(out.series_length(), 2);
        assert_eq!(out.instances()[0].series.values(), &[-1.0, 1.0]);
        for x in out.instances() {
            let v = x.series.values();
            let mean = v.iter().sum::<f64>() / 2.0;
            assert!(mean.abs() < 1e-12);
        }
    }

    #[test]
    fn apply_rejects_long_window() {
        let d = dataset(&[&[0.0, 3.0, 6.0], &[1.0, 0.0, 4.0]]);
        assert!(matches!(
            apply_smoother(&SmootherSpec::MovingAverage { w: 3 }, &d),
            Err(Error::Parameter(_))
        ));
    }
}
