use crate::error::{Error, Result};
use crate::sequence::{signed_log, LatticeSequence};

/// A real-valued potential on the half lattice `n >= origin`.
///
/// Families are closed under the energy shift `V - E` and under the
/// sign-reflection `V -> -4 - V`; evaluation at any index at or above the
/// origin returns a finite real.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `V_n = v` for all n.
    Constant { v: f64 },
    /// `V_n = gamma / n^2 + w_n`, with an optional finite tail table `w`
    /// starting at the origin (zero beyond the table).
    PowerDecay { gamma: f64, tail: Vec<f64> },
    /// The potential whose exact decaying solution is `n^{-alpha}`:
    /// `V_n = -2 + (n/(n+1))^alpha + (n/(n-1))^alpha` for `n >= 2`,
    /// and `V_1 = 2^{-alpha} - 2` (the value forced by a zero boundary
    /// neighbor at n = 0).
    Threshold { alpha: f64 },
    /// A base potential bumped at finitely many sites.
    Sparse {
        base: Box<PotentialSpec>,
        sites: Vec<i64>,
        amplitudes: Vec<f64>,
    },
    /// `V_n = n^a` for odd n, `1` for even n (`a > 2`): unbounded and
    /// fluctuating, yet with an accurate product-form comparison basis.
    Fluctuating { a: f64 },
    /// Explicit table of values starting at `origin`.
    Table { origin: i64, values: Vec<f64> },
    /// `base(n) - e`: the energy absorbed into the potential.
    Shifted { base: Box<PotentialSpec>, e: f64 },
    /// `V_n = v + (-1)^n W x^{2n}` where `x + 1/x = v + 2`, `|x| < 1`, and
    /// `W = 1/x - x` is the Wronskian of the basis `{x^n, x^{-n}}`.
    /// An asymptotically constant potential whose perturbation against
    /// `Constant { v }` is known in closed form.
    AlternatingExp { v: f64 },
    /// `V_n = -4 - base(n)`.
    Reflected { base: Box<PotentialSpec> },
}

/// Root of `x + 1/x = v + 2` with `|x| < 1`, when it exists (`v` outside
/// `[-4, 0]`). This is the decay rate of the subdominant solution for the
/// constant potential `v`.
pub fn decay_root(v: f64) -> Option<f64> {
    let b = v + 2.0;
    if b.abs() <= 2.0 {
        return None;
    }
    let s = b.signum();
    Some((b - s * (b * b - 4.0).sqrt()) / 2.0)
}

impl PotentialSpec {
    pub fn constant(v: f64) -> Self {
        PotentialSpec::Constant { v }
    }

    pub fn power_decay(gamma: f64, tail: Vec<f64>) -> Self {
        PotentialSpec::PowerDecay { gamma, tail }
    }

    pub fn threshold(alpha: f64) -> Result<Self> {
        if alpha <= 0.0 {
            return Err(Error::NonPositiveParam {
                what: "alpha",
                value: alpha,
            });
        }
        Ok(PotentialSpec::Threshold { alpha })
    }

    pub fn sparse(base: PotentialSpec, sites: Vec<i64>, amplitudes: Vec<f64>) -> Result<Self> {
        if sites.len() != amplitudes.len() {
            return Err(Error::InvalidParameter(format!(
                "sparse: {} sites but {} amplitudes",
                sites.len(),
                amplitudes.len()
            )));
        }
        Ok(PotentialSpec::Sparse {
            base: Box::new(base),
            sites,
            amplitudes,
        })
    }

    pub fn fluctuating(a: f64) -> Result<Self> {
        if a <= 2.0 {
            return Err(Error::InvalidParameter(format!(
                "fluctuating exponent must exceed 2, got {a}"
            )));
        }
        Ok(PotentialSpec::Fluctuating { a })
    }

    pub fn table(origin: i64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyWindow {
                lo: origin,
                hi: origin - 1,
            });
        }
        Ok(PotentialSpec::Table { origin, values })
    }

    pub fn shifted(base: PotentialSpec, e: f64) -> Self {
        PotentialSpec::Shifted {
            base: Box::new(base),
            e,
        }
    }

    pub fn alternating_exp(v: f64) -> Result<Self> {
        if decay_root(v).is_none() {
            return Err(Error::InvalidParameter(format!(
                "alternating_exp requires a constant outside [-4, 0], got {v}"
            )));
        }
        Ok(PotentialSpec::AlternatingExp { v })
    }

    /// First lattice index at which the potential is defined.
    pub fn origin(&self) -> i64 {
        match self {
            PotentialSpec::Table { origin, .. } => *origin,
            PotentialSpec::Sparse { base, .. }
            | PotentialSpec::Shifted { base, .. }
            | PotentialSpec::Reflected { base } => base.origin(),
            _ => 1,
        }
    }

    /// `V_n`; errors below the origin and on non-finite results.
    pub fn value(&self, n: i64) -> Result<f64> {
        let origin = self.origin();
        if n < origin {
            return Err(Error::BelowOrigin { index: n, origin });
        }
        let v = match self {
            PotentialSpec::Constant { v } => *v,
            PotentialSpec::PowerDecay { gamma, tail } => {
                let nf = n as f64;
                let w = if n >= 1 && ((n - 1) as usize) < tail.len() {
                    tail[(n - 1) as usize]
                } else {
                    0.0
                };
                gamma / (nf * nf) + w
            }
            PotentialSpec::Threshold { alpha } => {
                if n == 1 {
                    2f64.powf(-alpha) - 2.0
                } else {
                    let nf = n as f64;
                    -2.0 + (nf / (nf + 1.0)).powf(*alpha) + (nf / (nf - 1.0)).powf(*alpha)
                }
            }
            PotentialSpec::Sparse {
                base,
                sites,
                amplitudes,
            } => {
                let mut v = base.value(n)?;
                for (s, a) in sites.iter().zip(amplitudes.iter()) {
                    if *s == n {
                        v += a;
                    }
                }
                v
            }
            PotentialSpec::Fluctuating { a } => {
                if n % 2 != 0 {
                    (n as f64).powf(*a)
                } else {
                    1.0
                }
            }
            PotentialSpec::Table { origin, values } => {
                let k = (n - origin) as usize;
                if k >= values.len() {
                    return Err(Error::WindowViolation {
                        index: n,
                        lo: *origin,
                        hi: origin + values.len() as i64 - 1,
                    });
                }
                values[k]
            }
            PotentialSpec::Shifted { base, e } => base.value(n)? - e,
            PotentialSpec::AlternatingExp { v } => {
                let x = decay_root(*v).expect("validated at construction");
                let w = 1.0 / x - x;
                let parity = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                v + parity * w * (x * x).powi(n.unsigned_abs().min(i32::MAX as u64) as i32)
            }
            PotentialSpec::Reflected { base } => -4.0 - base.value(n)?,
        };
        if !v.is_finite() {
            return Err(Error::NonFinite { index: n });
        }
        Ok(v)
    }

    /// Evaluates the window `[lo, hi]`.
    pub fn values(&self, lo: i64, hi: i64) -> Result<LatticeSequence> {
        if hi < lo {
            return Err(Error::EmptyWindow { lo, hi });
        }
        let mut out = Vec::with_capacity((hi - lo + 1) as usize);
        for n in lo..=hi {
            out.push(self.value(n)?);
        }
        LatticeSequence::new(lo, out)
    }

    /// Evaluation clamped at the origin: `V(max(n, origin))`. Used where a
    /// construction needs one index of lookback below the first site.
    pub(crate) fn value_ext(&self, n: i64) -> Result<f64> {
        self.value(n.max(self.origin()))
    }

    /// The sign-reflection `V -> -4 - V`. Applying it twice gives a
    /// potential with identical values. Constant and table families are
    /// rewritten in place; other families are wrapped (and unwrapped).
    pub fn reflected(&self) -> PotentialSpec {
        match self {
            PotentialSpec::Constant { v } => PotentialSpec::Constant { v: -4.0 - v },
            PotentialSpec::Table { origin, values } => PotentialSpec::Table {
                origin: *origin,
                values: values.iter().map(|v| -4.0 - v).collect(),
            },
            PotentialSpec::Reflected { base } => (**base).clone(),
            other => PotentialSpec::Reflected {
                base: Box::new(other.clone()),
            },
        }
    }

    /// `(sign, log magnitude)` of `V_n - other_n`.
    ///
    /// Structured pairs are handled analytically so that differences far
    /// below one ulp of the values themselves remain exact; the fallback is
    /// plain floating-point subtraction.
    pub fn diff_log(&self, other: &PotentialSpec, n: i64) -> Result<(i8, f64)> {
        match (self, other) {
            (PotentialSpec::AlternatingExp { v }, PotentialSpec::Constant { v: v0 })
                if v == v0 =>
            {
                // V - V0 = (-1)^n W x^{2n}, exact in log form.
                let x = decay_root(*v).expect("validated at construction");
                let w = 1.0 / x - x;
                let (ws, wl) = signed_log(w);
                let sign = if n.rem_euclid(2) == 0 { ws } else { -ws };
                let log = wl + 2.0 * n as f64 * x.abs().ln();
                Ok((sign, log))
            }
            (PotentialSpec::Constant { .. }, PotentialSpec::AlternatingExp { .. }) => {
                let (s, l) = other.diff_log(self, n)?;
                Ok((-s, l))
            }
            (
                PotentialSpec::Sparse {
                    base,
                    sites,
                    amplitudes,
                },
                b,
            ) if **base == *b => {
                let mut bump = 0.0;
                for (s, a) in sites.iter().zip(amplitudes.iter()) {
                    if *s == n {
                        bump += a;
                    }
                }
                Ok(signed_log(bump))
            }
            (a, PotentialSpec::Sparse { base, .. }) if **base == *a => {
                let (s, l) = other.diff_log(self, n)?;
                Ok((-s, l))
            }
            _ => Ok(signed_log(self.value(n)? - other.value(n)?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_shift() {
        let v = PotentialSpec::constant(1.0);
        assert_eq!(v.value(10).unwrap(), 1.0);
        let s = PotentialSpec::shifted(v, 0.25);
        assert_eq!(s.value(10).unwrap(), 0.75);
        assert!(matches!(s.value(0), Err(Error::BelowOrigin { .. })));
    }

    #[test]
    fn threshold_alpha_one_is_rational() {
        // alpha = 1 gives V_n = 2 / (n^2 - 1) for n >= 2, and V_1 = -3/2.
        let v = PotentialSpec::threshold(1.0).unwrap();
        assert!((v.value(1).unwrap() + 1.5).abs() < 1e-15);
        for n in 2..50 {
            let expect = 2.0 / ((n * n - 1) as f64);
            assert!((v.value(n).unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn threshold_solution_is_exact_power() {
        // n^{-alpha} must have zero residual against the recurrence.
        for alpha in [0.5, 1.0, 2.5] {
            let v = PotentialSpec::threshold(alpha).unwrap();
            let psi = |n: i64| (n as f64).powf(-alpha);
            for n in 2..200 {
                let r = -(psi(n + 1) + psi(n - 1) - 2.0 * psi(n)) + v.value(n).unwrap() * psi(n);
                assert!(r.abs() < 1e-12 * psi(n).abs(), "alpha={alpha} n={n} r={r}");
            }
            // And at n = 1 with a zero neighbor below.
            let r1 = -(psi(2) - 2.0 * psi(1)) + v.value(1).unwrap() * psi(1);
            assert!(r1.abs() < 1e-15);
        }
    }

    #[test]
    fn fluctuating_parity() {
        let v = PotentialSpec::fluctuating(3.0).unwrap();
        assert_eq!(v.value(3).unwrap(), 27.0);
        assert_eq!(v.value(4).unwrap(), 1.0);
        assert!(PotentialSpec::fluctuating(2.0).is_err());
    }

    #[test]
    fn reflect_is_involutive_on_values() {
        let v = PotentialSpec::threshold(1.0).unwrap();
        let twice = v.reflected().reflected();
        for n in 1..40 {
            assert!((twice.value(n).unwrap() - v.value(n).unwrap()).abs() < 1e-15);
        }
        let c = PotentialSpec::constant(1.0).reflected();
        assert_eq!(c.value(5).unwrap(), -5.0);
    }

    #[test]
    fn alternating_exp_matches_closed_form() {
        let v = PotentialSpec::alternating_exp(1.0).unwrap();
        let x = decay_root(1.0).unwrap();
        assert!((x - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
        let w = 1.0 / x - x;
        assert!((w - 5f64.sqrt()).abs() < 1e-14);
        for n in 1..20 {
            let expect = 1.0 + (if n % 2 == 0 { 1.0 } else { -1.0 }) * w * (x * x).powi(n);
            assert!((v.value(n as i64).unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn alternating_diff_log_survives_underflow() {
        // Far beyond where V - V0 is representable in f64, the log form
        // still carries the exact magnitude.
        let v = PotentialSpec::alternating_exp(1.0).unwrap();
        let v0 = PotentialSpec::constant(1.0);
        let x = decay_root(1.0).unwrap();
        let (s, l) = v.diff_log(&v0, 401).unwrap();
        assert_eq!(s, -1); // odd index
        let expect = 5f64.sqrt().ln() + 802.0 * x.ln();
        assert!((l - expect).abs() < 1e-9);
        // Linear subtraction would give zero here.
        assert_eq!(v.value(401).unwrap() - v0.value(401).unwrap(), 0.0);
    }

    #[test]
    fn sparse_diff_is_exactly_supported_on_sites() {
        let base = PotentialSpec::threshold(1.0).unwrap();
        let v = PotentialSpec::sparse(base.clone(), vec![4, 16], vec![0.5, 0.25]).unwrap();
        assert_eq!(v.diff_log(&base, 5).unwrap().0, 0);
        let (s, l) = v.diff_log(&base, 4).unwrap();
        assert_eq!(s, 1);
        assert!((l - 0.5f64.ln()).abs() < 1e-15);
    }
}
