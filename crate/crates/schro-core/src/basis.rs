use crate::error::{Error, Result};
use crate::potential::decay_root;
use crate::sequence::{LatticeSequence, SignedLogSeq};

/// Relative tolerance for the constancy of the Wronskian across a basis
/// window.
pub const WRONSKIAN_REL_TOL: f64 = 1e-10;

/// A pair of independent solutions `(phi_plus, phi_minus)` of the same
/// three-term recurrence, together with their (constant) Wronskian
/// `W = phi_minus_n * phi_plus_{n+1} - phi_minus_{n+1} * phi_plus_n`.
///
/// `phi_minus` is the subdominant (decaying) member wherever that
/// distinction applies; log-magnitude forms of both members are carried
/// alongside the linear values so that products such as
/// `phi_plus * phi_minus` stay computable when the factors leave the
/// representable range.
#[derive(Debug, Clone)]
pub struct SolutionBasis {
    plus: LatticeSequence,
    minus: LatticeSequence,
    log_plus: SignedLogSeq,
    log_minus: SignedLogSeq,
    wronskian: f64,
}

impl SolutionBasis {
    /// Builds a basis from linear values, computing the Wronskian at the
    /// left edge and checking its constancy across the window.
    pub fn new(plus: LatticeSequence, minus: LatticeSequence) -> Result<Self> {
        plus.same_window(&minus)?;
        if plus.len() < 2 {
            return Err(Error::EmptyWindow {
                lo: plus.n_lo(),
                hi: plus.n_lo(),
            });
        }
        let w = wronskian_of(&minus, &plus, plus.n_lo())?;
        if w == 0.0 || !w.is_finite() {
            return Err(Error::ZeroWronskian);
        }
        for n in plus.n_lo()..plus.n_hi() {
            let wn = wronskian_of(&minus, &plus, n)?;
            if (wn - w).abs() > WRONSKIAN_REL_TOL * w.abs() {
                return Err(Error::WronskianDrift {
                    index: n,
                    value: wn,
                    reference: w,
                });
            }
        }
        let log_plus = SignedLogSeq::from_values(&plus);
        let log_minus = SignedLogSeq::from_values(&minus);
        Ok(Self {
            plus,
            minus,
            log_plus,
            log_minus,
            wronskian: w,
        })
    }

    /// Builds a basis whose log forms come from an analytic construction
    /// rather than from logs of the stored linear values. The caller
    /// guarantees the two representations agree.
    pub(crate) fn from_parts(
        plus: LatticeSequence,
        minus: LatticeSequence,
        log_plus: SignedLogSeq,
        log_minus: SignedLogSeq,
        wronskian: f64,
    ) -> Result<Self> {
        plus.same_window(&minus)?;
        if wronskian == 0.0 || !wronskian.is_finite() {
            return Err(Error::ZeroWronskian);
        }
        Ok(Self {
            plus,
            minus,
            log_plus,
            log_minus,
            wronskian,
        })
    }

    /// The explicit basis `{x^{-n}, x^{n}}` for the constant potential `v`
    /// (`v` outside `[-4, 0]`), on the window `[lo, hi]`. Its Wronskian is
    /// `1/x - x`.
    pub fn constant_potential(v: f64, lo: i64, hi: i64) -> Result<Self> {
        let x = decay_root(v).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "constant potential {v} in [-4, 0] has no subdominant solution"
            ))
        })?;
        let lx = x.abs().ln();
        let xsign = if x < 0.0 { -1i8 } else { 1i8 };
        let sign_at = |n: i64| -> i8 {
            if xsign == 1 || n.rem_euclid(2) == 0 {
                1
            } else {
                -1
            }
        };
        let log_minus = SignedLogSeq::from_fn(lo, hi, |n| (sign_at(n), n as f64 * lx))?;
        let log_plus = SignedLogSeq::from_fn(lo, hi, |n| (sign_at(n), -(n as f64) * lx))?;
        let minus = log_minus.to_linear()?;
        let plus = log_plus.to_linear()?;
        Self::from_parts(plus, minus, log_plus, log_minus, 1.0 / x - x)
    }

    pub fn plus(&self) -> &LatticeSequence {
        &self.plus
    }

    pub fn minus(&self) -> &LatticeSequence {
        &self.minus
    }

    pub fn log_plus(&self) -> &SignedLogSeq {
        &self.log_plus
    }

    pub fn log_minus(&self) -> &SignedLogSeq {
        &self.log_minus
    }

    pub fn wronskian(&self) -> f64 {
        self.wronskian
    }

    pub fn window(&self) -> (i64, i64) {
        self.plus.window()
    }

    /// The Wronskian recomputed from the stored values at `n` (uses `n` and
    /// `n+1`).
    pub fn wronskian_at(&self, n: i64) -> Result<f64> {
        wronskian_of(&self.minus, &self.plus, n)
    }

    /// `phi_plus_n * phi_minus_n`, formed in log space.
    pub fn product_at(&self, n: i64) -> Result<f64> {
        let (sp, lp) = self.log_plus.get(n)?;
        let (sm, lm) = self.log_minus.get(n)?;
        Ok((sp * sm) as f64 * (lp + lm).exp())
    }
}

/// `minus_n * plus_{n+1} - minus_{n+1} * plus_n`.
pub fn wronskian_of(minus: &LatticeSequence, plus: &LatticeSequence, n: i64) -> Result<f64> {
    Ok(minus.get(n)? * plus.get(n + 1)? - minus.get(n + 1)? * plus.get(n)?)
}
