use crate::error::{Error, Result};

/// A finite window of real values indexed by absolute lattice position.
///
/// The window is `[n_lo, n_hi]` with `n_hi = n_lo + values.len() - 1`.
/// Out-of-window access is a hard error, never a silent zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSequence {
    n_lo: i64,
    values: Vec<f64>,
}

impl LatticeSequence {
    pub fn new(n_lo: i64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyWindow {
                lo: n_lo,
                hi: n_lo - 1,
            });
        }
        Ok(Self { n_lo, values })
    }

    /// Builds the window `[lo, hi]` by evaluating `f` at each index.
    pub fn from_fn(lo: i64, hi: i64, mut f: impl FnMut(i64) -> f64) -> Result<Self> {
        if hi < lo {
            return Err(Error::EmptyWindow { lo, hi });
        }
        let values = (lo..=hi).map(|n| f(n)).collect();
        Ok(Self { n_lo: lo, values })
    }

    pub fn n_lo(&self) -> i64 {
        self.n_lo
    }

    pub fn n_hi(&self) -> i64 {
        self.n_lo + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn window(&self) -> (i64, i64) {
        (self.n_lo, self.n_hi())
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.n_lo && n <= self.n_hi()
    }

    /// Value at absolute index `n`.
    pub fn get(&self, n: i64) -> Result<f64> {
        if !self.contains(n) {
            return Err(Error::WindowViolation {
                index: n,
                lo: self.n_lo,
                hi: self.n_hi(),
            });
        }
        Ok(self.values[(n - self.n_lo) as usize])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(absolute index, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.n_lo + k as i64, v))
    }

    /// Pointwise map preserving the window.
    pub fn map(&self, mut f: impl FnMut(i64, f64) -> f64) -> Self {
        Self {
            n_lo: self.n_lo,
            values: self.iter().map(|(n, v)| f(n, v)).collect(),
        }
    }

    /// Restriction to `[lo, hi]`, which must lie inside the window.
    pub fn slice(&self, lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(Error::EmptyWindow { lo, hi });
        }
        for n in [lo, hi] {
            if !self.contains(n) {
                return Err(Error::WindowViolation {
                    index: n,
                    lo: self.n_lo,
                    hi: self.n_hi(),
                });
            }
        }
        let a = (lo - self.n_lo) as usize;
        let b = (hi - self.n_lo) as usize;
        Ok(Self {
            n_lo: lo,
            values: self.values[a..=b].to_vec(),
        })
    }

    pub(crate) fn same_window(&self, other: &LatticeSequence) -> Result<()> {
        if self.window() != other.window() {
            let (a_lo, a_hi) = self.window();
            let (b_lo, b_hi) = other.window();
            return Err(Error::WindowMismatch {
                a_lo,
                a_hi,
                b_lo,
                b_hi,
            });
        }
        Ok(())
    }
}

/// Decomposition of a real value into sign and log magnitude.
///
/// `sign == 0` encodes an exact zero (with `log_mag == -inf`).
pub fn signed_log(v: f64) -> (i8, f64) {
    if v == 0.0 {
        (0, f64::NEG_INFINITY)
    } else if v > 0.0 {
        (1, v.ln())
    } else {
        (-1, (-v).ln())
    }
}

/// A lattice window of reals stored as sign and log magnitude, so that
/// quantities far beyond double-precision range stay representable.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedLogSeq {
    n_lo: i64,
    log_mag: Vec<f64>,
    sign: Vec<i8>,
}

impl SignedLogSeq {
    pub fn new(n_lo: i64, log_mag: Vec<f64>, sign: Vec<i8>) -> Result<Self> {
        if log_mag.is_empty() || log_mag.len() != sign.len() {
            return Err(Error::EmptyWindow {
                lo: n_lo,
                hi: n_lo - 1,
            });
        }
        Ok(Self {
            n_lo,
            log_mag,
            sign,
        })
    }

    /// Builds the window by evaluating `f(n) -> (sign, log magnitude)`.
    pub fn from_fn(lo: i64, hi: i64, mut f: impl FnMut(i64) -> (i8, f64)) -> Result<Self> {
        if hi < lo {
            return Err(Error::EmptyWindow { lo, hi });
        }
        let mut log_mag = Vec::with_capacity((hi - lo + 1) as usize);
        let mut sign = Vec::with_capacity((hi - lo + 1) as usize);
        for n in lo..=hi {
            let (s, l) = f(n);
            sign.push(s);
            log_mag.push(l);
        }
        Ok(Self {
            n_lo: lo,
            log_mag,
            sign,
        })
    }

    /// Takes sign and log magnitude of an ordinary sequence.
    pub fn from_values(seq: &LatticeSequence) -> Self {
        let mut log_mag = Vec::with_capacity(seq.len());
        let mut sign = Vec::with_capacity(seq.len());
        for (_, v) in seq.iter() {
            let (s, l) = signed_log(v);
            sign.push(s);
            log_mag.push(l);
        }
        Self {
            n_lo: seq.n_lo(),
            log_mag,
            sign,
        }
    }

    pub fn n_lo(&self) -> i64 {
        self.n_lo
    }

    pub fn n_hi(&self) -> i64 {
        self.n_lo + self.log_mag.len() as i64 - 1
    }

    pub fn window(&self) -> (i64, i64) {
        (self.n_lo, self.n_hi())
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.n_lo && n <= self.n_hi()
    }

    /// `(sign, log magnitude)` at absolute index `n`.
    pub fn get(&self, n: i64) -> Result<(i8, f64)> {
        if !self.contains(n) {
            return Err(Error::WindowViolation {
                index: n,
                lo: self.n_lo,
                hi: self.n_hi(),
            });
        }
        let k = (n - self.n_lo) as usize;
        Ok((self.sign[k], self.log_mag[k]))
    }

    /// Linear value at `n`; may overflow to ±inf or underflow to zero.
    pub fn value(&self, n: i64) -> Result<f64> {
        let (s, l) = self.get(n)?;
        Ok(s as f64 * l.exp())
    }

    /// Converts to a linear sequence; errors on the first index whose
    /// magnitude does not fit in an `f64`.
    pub fn to_linear(&self) -> Result<LatticeSequence> {
        let mut values = Vec::with_capacity(self.log_mag.len());
        for n in self.n_lo..=self.n_hi() {
            let v = self.value(n)?;
            if !v.is_finite() {
                return Err(Error::NonFinite { index: n });
            }
            values.push(v);
        }
        LatticeSequence::new(self.n_lo, values)
    }
}

/// Running signed accumulator in log space (log-sum-exp with signs).
#[derive(Debug, Clone, Copy)]
pub struct SignedLogAccumulator {
    sign: i8,
    log_mag: f64,
}

impl SignedLogAccumulator {
    pub fn zero() -> Self {
        Self {
            sign: 0,
            log_mag: f64::NEG_INFINITY,
        }
    }

    pub fn state(&self) -> (i8, f64) {
        (self.sign, self.log_mag)
    }

    /// Adds the value `sign * exp(log_mag)`.
    pub fn add(&mut self, sign: i8, log_mag: f64) {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            return;
        }
        if self.sign == 0 {
            self.sign = sign;
            self.log_mag = log_mag;
            return;
        }
        let (a, b) = (self.log_mag, log_mag);
        if self.sign == sign {
            let m = a.max(b);
            self.log_mag = m + ((a - m).exp() + (b - m).exp()).ln();
        } else if a > b {
            self.log_mag = a + (-(b - a).exp()).ln_1p();
        } else if b > a {
            self.sign = sign;
            self.log_mag = b + (-(a - b).exp()).ln_1p();
        } else {
            // Exact cancellation.
            self.sign = 0;
            self.log_mag = f64::NEG_INFINITY;
        }
    }
}
