//! Disjoint, sliding and circular-sliding block maxima.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How block maxima are extracted from a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Disjoint,
    Sliding,
    /// Sliding windows over seasons, with the first season appended after
    /// the last so that every observation lies in exactly `r` windows.
    Circular,
}

impl Scheme {
    /// The asymptotic variance regime of the scheme. Circular blocks share
    /// the sliding limit.
    pub fn variance_mode(self) -> Scheme {
        match self {
            Scheme::Disjoint => Scheme::Disjoint,
            Scheme::Sliding | Scheme::Circular => Scheme::Sliding,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Disjoint => "disjoint",
            Scheme::Sliding => "sliding",
            Scheme::Circular => "circular",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disjoint" => Ok(Scheme::Disjoint),
            "sliding" => Ok(Scheme::Sliding),
            "circular" => Ok(Scheme::Circular),
            other => Err(Error::parameter(
                "scheme",
                format!("unknown scheme {other:?}, expected disjoint, sliding or circular"),
            )),
        }
    }
}

/// Block maxima together with the block size, the scheme and the length of
/// the source series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMaximaSample {
    pub values: Vec<f64>,
    pub r: usize,
    pub n: usize,
    pub scheme: Scheme,
}

impl BlockMaximaSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn validate(series: &[f64], r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::parameter("r", "block size must be at least 1"));
    }
    if let Some(i) = series.iter().position(|x| x.is_nan()) {
        return Err(Error::NonFinite(i));
    }
    if r > series.len() {
        return Err(Error::EmptySample {
            n: series.len(),
            r,
        });
    }
    Ok(())
}

/// Maxima of the `⌊n/r⌋` consecutive non-overlapping blocks; a trailing
/// partial block is discarded.
pub fn disjoint_maxima(series: &[f64], r: usize) -> Result<BlockMaximaSample> {
    validate(series, r)?;
    let values = series
        .chunks_exact(r)
        .map(|block| block.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(BlockMaximaSample {
        values,
        r,
        n: series.len(),
        scheme: Scheme::Disjoint,
    })
}

/// Maxima of every window of length `r` by a monotone deque, values
/// decreasing from front to back.
fn window_maxima(series: &[f64], r: usize, windows: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(windows);
    let mut deque: VecDeque<usize> = VecDeque::with_capacity(r);
    for (i, &x) in series.iter().enumerate().take(windows + r - 1) {
        while let Some(&back) = deque.back() {
            if series[back] <= x {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(i);
        if i + 1 >= r {
            let start = i + 1 - r;
            while deque.front().is_some_and(|&f| f < start) {
                deque.pop_front();
            }
            out.push(series[*deque.front().expect("window is nonempty")]);
        }
    }
    out
}

/// Maxima of all `n - r + 1` windows of length `r`.
pub fn sliding_maxima(series: &[f64], r: usize) -> Result<BlockMaximaSample> {
    validate(series, r)?;
    let windows = series.len() - r + 1;
    Ok(BlockMaximaSample {
        values: window_maxima(series, r, windows),
        r,
        n: series.len(),
        scheme: Scheme::Sliding,
    })
}

/// Sliding maxima over a series of seasons of length `r`, after appending
/// the first season to the end. One window starts at every original index,
/// so the output has exactly `n` values.
pub fn circular_sliding_maxima(seasonal_series: &[f64], r: usize) -> Result<BlockMaximaSample> {
    validate(seasonal_series, r)?;
    let n = seasonal_series.len();
    if n % r != 0 {
        return Err(Error::Shape(format!(
            "series length {n} is not a multiple of the season length {r}"
        )));
    }
    let mut extended = Vec::with_capacity(n + r);
    extended.extend_from_slice(seasonal_series);
    extended.extend_from_slice(&seasonal_series[..r]);
    Ok(BlockMaximaSample {
        values: window_maxima(&extended, r, n),
        r,
        n,
        scheme: Scheme::Circular,
    })
}

/// Dispatches on `scheme`.
pub fn block_maxima(series: &[f64], r: usize, scheme: Scheme) -> Result<BlockMaximaSample> {
    match scheme {
        Scheme::Disjoint => disjoint_maxima(series, r),
        Scheme::Sliding => sliding_maxima(series, r),
        Scheme::Circular => circular_sliding_maxima(series, r),
    }
}
