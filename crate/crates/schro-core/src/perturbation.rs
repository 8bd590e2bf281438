//! Variation of constants for pairs of equations `(-Delta + V) psi = 0`
//! and `(-Delta + V0) phi = 0` with a known basis for the second:
//! writing `psi_n = a_n^+ phi_n^+ + a_n^- phi_n^-`, the coefficients step
//! by the unimodular transfer matrices `I + M_n` and are solved globally
//! by a contractive Neumann iteration whose fixed point has
//! `a^+ -> 0`, `a^- -> 1`.

use crate::basis::SolutionBasis;
use crate::diagnostics::{decelerating, Diagnostic};
use crate::error::{Error, Result};
use crate::lattice::monotone_envelope;
use crate::potential::PotentialSpec;
use crate::sequence::{LatticeSequence, SignedLogSeq};

/// A perturbation problem: target potential `V`, comparison potential
/// `V0`, a solution basis for `V0`, and the scaled difference
/// `beta_n = (V_n - V0_n) / W`.
///
/// `beta` is kept both linearly and in log form; products such as
/// `beta_n (phi_n^+)^2` are always assembled in log space, where the
/// growth of the basis and the decay of the difference cancel instead of
/// overflowing.
#[derive(Debug, Clone)]
pub struct PerturbationPair {
    v: PotentialSpec,
    v0: PotentialSpec,
    basis: SolutionBasis,
    beta: LatticeSequence,
    log_beta: SignedLogSeq,
}

/// The three distinct entries of `M_n / beta_n` combined with `beta_n`:
/// `M_n = [[beta phi+ phi-, beta (phi-)^2], [-beta (phi+)^2, -beta phi+ phi-]]`.
#[derive(Debug, Clone, Copy)]
pub struct MEntries {
    /// `beta_n (phi_n^+)^2`
    pub beta_pp: f64,
    /// `beta_n phi_n^+ phi_n^-`
    pub beta_pm: f64,
    /// `beta_n (phi_n^-)^2`
    pub beta_mm: f64,
}

impl PerturbationPair {
    pub fn new(v: PotentialSpec, v0: PotentialSpec, basis: SolutionBasis) -> Result<Self> {
        let w = basis.wronskian();
        if w == 0.0 {
            return Err(Error::ZeroWronskian);
        }
        let (lo, hi) = basis.window();
        let lw = w.abs().ln();
        let sw = if w > 0.0 { 1i8 } else { -1i8 };
        let log_beta = SignedLogSeq::from_fn(lo, hi, |n| {
            let (s, l) = v.diff_log(&v0, n).expect("potential evaluation");
            (s * sw, l - lw)
        })?;
        let beta = LatticeSequence::from_fn(lo, hi, |n| {
            log_beta.value(n).expect("window")
        })?;
        Ok(Self {
            v,
            v0,
            basis,
            beta,
            log_beta,
        })
    }

    pub fn v(&self) -> &PotentialSpec {
        &self.v
    }

    pub fn v0(&self) -> &PotentialSpec {
        &self.v0
    }

    pub fn basis(&self) -> &SolutionBasis {
        &self.basis
    }

    /// `beta_n = (V_n - V0_n) / W` as a linear sequence (entries below the
    /// representable range underflow to zero; the log form is exact).
    pub fn beta(&self) -> &LatticeSequence {
        &self.beta
    }

    pub fn log_beta(&self) -> &SignedLogSeq {
        &self.log_beta
    }

    pub fn window(&self) -> (i64, i64) {
        self.basis.window()
    }

    /// The entries of `M_n`, assembled in log space.
    pub fn m_entries(&self, n: i64) -> Result<MEntries> {
        let (sb, lb) = self.log_beta.get(n)?;
        let (sp, lp) = self.basis.log_plus().get(n)?;
        let (sm, lm) = self.basis.log_minus().get(n)?;
        let combine = |s: i8, l: f64| -> f64 { s as f64 * l.exp() };
        Ok(MEntries {
            beta_pp: combine(sb * sp * sp, lb + 2.0 * lp),
            beta_pm: combine(sb * sp * sm, lb + lp + lm),
            beta_mm: combine(sb * sm * sm, lb + 2.0 * lm),
        })
    }

    /// `|beta_n| (1 + |phi_n^+ phi_n^-|^2)`, the contraction term.
    fn contraction_term(&self, n: i64) -> Result<f64> {
        let (_, lb) = self.log_beta.get(n)?;
        let (_, lp) = self.basis.log_plus().get(n)?;
        let (_, lm) = self.basis.log_minus().get(n)?;
        Ok(lb.exp() * (1.0 + (2.0 * (lp + lm)).exp()))
    }

    /// Trench's criterion term `J_n = phi_n^+ phi_n^- (V_n - V0_n)`.
    pub fn trench_j(&self, n: i64) -> Result<f64> {
        let (sd, ld) = self.v.diff_log(&self.v0, n)?;
        let (sp, lp) = self.basis.log_plus().get(n)?;
        let (sm, lm) = self.basis.log_minus().get(n)?;
        Ok((sd * sp * sm) as f64 * (ld + lp + lm).exp())
    }

    /// Deceleration diagnostic for the partial sums of `|J_n|` over
    /// `[lo, hi]`.
    pub fn trench_sum_diagnostic(&self, lo: i64, hi: i64) -> Result<Diagnostic> {
        let mut terms = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        for n in lo..=hi {
            terms.push(self.trench_j(n)?.abs());
        }
        let (ok, total, last) = decelerating(&terms);
        Ok(Diagnostic {
            name: "perturbation summability",
            satisfied: ok,
            detail: format!(
                "partial sums of |phi+ phi- (V - V0)|: total {total:.6e}, last-quarter increment {last:.6e}"
            ),
        })
    }
}

/// One step of the coefficient recurrence: `(I + M_n) a`. The matrix is
/// unimodular (`det(I + M_n) = 1`).
pub fn transfer_step(a: [f64; 2], pair: &PerturbationPair, n: i64) -> Result<[f64; 2]> {
    let m = pair.m_entries(n)?;
    Ok([
        (1.0 + m.beta_pm) * a[0] + m.beta_mm * a[1],
        -m.beta_pp * a[0] + (1.0 - m.beta_pm) * a[1],
    ])
}

/// Smallest `N` in `[lo, hi]` whose tail sum
/// `sum_{k>=N} |beta_k| (1 + |phi_k^+ phi_k^-|^2)` (truncated at `hi`)
/// falls below `target`, together with the achieved sum.
///
/// The term series must decelerate over the range; otherwise any `N`
/// found would be an artifact of the truncation and the search fails.
pub fn contraction_threshold(
    pair: &PerturbationPair,
    lo: i64,
    hi: i64,
    target: f64,
) -> Result<(i64, f64)> {
    if hi < lo {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let len = (hi - lo + 1) as usize;
    let mut terms = Vec::with_capacity(len);
    for n in lo..=hi {
        let t = pair.contraction_term(n)?;
        if !t.is_finite() {
            return Err(Error::NonFinite { index: n });
        }
        terms.push(t);
    }
    let (ok, _, _) = decelerating(&terms);
    if !ok {
        return Err(Error::ContractionNotFound { target });
    }
    let mut suffix = vec![0.0f64; len + 1];
    for k in (0..len).rev() {
        suffix[k] = suffix[k + 1] + terms[k];
    }
    for k in 0..len {
        if suffix[k] < target {
            return Ok((lo + k as i64, suffix[k]));
        }
    }
    Err(Error::ContractionNotFound { target })
}

/// Variable coefficients solved on a window, with the contraction data
/// that produced them.
#[derive(Debug, Clone)]
pub struct CoefficientTrajectory {
    pub a_plus: LatticeSequence,
    pub a_minus: LatticeSequence,
    /// Left edge of the solve window.
    pub start: i64,
    /// Achieved contraction constant at `start`.
    pub kappa: f64,
    /// Iterations to reach the requested tolerance.
    pub iterations: usize,
    /// Successive-iterate distances in the weighted norm, one per
    /// iteration.
    pub iterate_distances: Vec<f64>,
    /// Last-quarter partial sum of the contraction terms: a proxy for the
    /// error induced by truncating the infinite sums at the right edge.
    pub tail_proxy: f64,
}

/// Solves `a = (0, 1)^T - M a` on `[start, hi]` (`hi` = right edge of the
/// pair's window) by Neumann iteration in the weighted norm
/// `sup_n (|(phi_n^+)^2 a_n^+| + |a_n^-|)`.
///
/// Requires the achieved contraction constant `kappa < 1` at `start`; the
/// iteration count is bounded by `ceil(log tol / log kappa) + 1`.
pub fn neumann_solve(
    pair: &PerturbationPair,
    start: i64,
    tol: f64,
) -> Result<CoefficientTrajectory> {
    let (lo, hi) = pair.window();
    if start < lo || start > hi {
        return Err(Error::WindowViolation {
            index: start,
            lo,
            hi,
        });
    }
    if !(tol > 0.0) {
        return Err(Error::NonPositiveParam {
            what: "tol",
            value: tol,
        });
    }
    let len = (hi - start + 1) as usize;
    let mut terms = Vec::with_capacity(len);
    for n in start..=hi {
        terms.push(pair.contraction_term(n)?);
    }
    let kappa: f64 = terms.iter().sum();
    if !(kappa < 1.0) {
        return Err(Error::NotAContraction { kappa, start });
    }
    let (_, _, tail_proxy) = decelerating(&terms);

    let m_entries: Vec<MEntries> = (start..=hi)
        .map(|n| pair.m_entries(n))
        .collect::<Result<_>>()?;
    for (k, m) in m_entries.iter().enumerate() {
        if !(m.beta_pp.is_finite() && m.beta_pm.is_finite() && m.beta_mm.is_finite()) {
            return Err(Error::NonFinite {
                index: start + k as i64,
            });
        }
    }

    // Weighted-norm weight for the plus component, in log form.
    let wplus: Vec<f64> = (start..=hi)
        .map(|n| pair.basis.log_plus().get(n).map(|(_, l)| 2.0 * l))
        .collect::<Result<_>>()?;
    let wnorm = |ap: &[f64], am: &[f64]| -> f64 {
        let mut sup = 0.0f64;
        for k in 0..ap.len() {
            let p = if ap[k] == 0.0 {
                0.0
            } else {
                (wplus[k] + ap[k].abs().ln()).exp()
            };
            sup = sup.max(p + am[k].abs());
        }
        sup
    };

    // a = e - M a, iterated from a = e = (0, 1)^T.
    let mut ap = vec![0.0f64; len];
    let mut am = vec![1.0f64; len];
    let budget = if kappa <= 0.0 {
        2
    } else {
        (tol.ln() / kappa.ln()).ceil() as usize + 1
    };
    let mut distances = Vec::new();
    let mut iterations = 0usize;
    loop {
        // Suffix-accumulated application of M.
        let mut acc = [0.0f64; 2];
        let mut new_ap = vec![0.0f64; len];
        let mut new_am = vec![0.0f64; len];
        for k in (0..len).rev() {
            let m = &m_entries[k];
            acc[0] += m.beta_pm * ap[k] + m.beta_mm * am[k];
            acc[1] += -m.beta_pp * ap[k] - m.beta_pm * am[k];
            new_ap[k] = -acc[0];
            new_am[k] = 1.0 - acc[1];
        }
        let diff_p: Vec<f64> = (0..len).map(|k| new_ap[k] - ap[k]).collect();
        let diff_m: Vec<f64> = (0..len).map(|k| new_am[k] - am[k]).collect();
        let dist = wnorm(&diff_p, &diff_m);
        distances.push(dist);
        ap = new_ap;
        am = new_am;
        iterations += 1;
        if dist <= tol {
            break;
        }
        if iterations >= budget {
            return Err(Error::IterationBudget { tol, budget });
        }
    }

    Ok(CoefficientTrajectory {
        a_plus: LatticeSequence::new(start, ap)?,
        a_minus: LatticeSequence::new(start, am)?,
        start,
        kappa,
        iterations,
        iterate_distances: distances,
        tail_proxy,
    })
}

/// `psi_n = a_n^+ phi_n^+ + a_n^- phi_n^-` over the trajectory window.
/// Each product is formed in log space before the sum.
pub fn synthesize_solution(
    traj: &CoefficientTrajectory,
    basis: &SolutionBasis,
) -> Result<LatticeSequence> {
    let (lo, hi) = traj.a_plus.window();
    let (blo, bhi) = basis.window();
    if lo < blo || hi > bhi {
        return Err(Error::WindowMismatch {
            a_lo: lo,
            a_hi: hi,
            b_lo: blo,
            b_hi: bhi,
        });
    }
    LatticeSequence::from_fn(lo, hi, |n| {
        let term = |coef: f64, log_phi: &SignedLogSeq| -> f64 {
            if coef == 0.0 {
                return 0.0;
            }
            let (s, l) = log_phi.get(n).expect("window checked");
            coef.signum() * s as f64 * (coef.abs().ln() + l).exp()
        };
        term(traj.a_plus.get(n).unwrap(), basis.log_plus())
            + term(traj.a_minus.get(n).unwrap(), basis.log_minus())
    })
}

/// Relative residual of the coefficient constraint
/// `(a_n^+ - a_{n-1}^+) phi_{n-1}^+ + (a_n^- - a_{n-1}^-) phi_{n-1}^- = 0`
/// along a trajectory, scaled by the sizes of the two terms.
pub fn constraint_residual(
    traj: &CoefficientTrajectory,
    basis: &SolutionBasis,
    n: i64,
) -> Result<f64> {
    let tp = (traj.a_plus.get(n)? - traj.a_plus.get(n - 1)?) * basis.plus().get(n - 1)?;
    let tm = (traj.a_minus.get(n)? - traj.a_minus.get(n - 1)?) * basis.minus().get(n - 1)?;
    // Scale by the local solution size: the constraint states that the
    // coefficient variation contributes nothing to nabla psi, so the
    // natural yardstick is |a+ phi+| + |a- phi-| at the same site.
    let local = (traj.a_plus.get(n)? * basis.plus().get(n - 1)?).abs()
        + (traj.a_minus.get(n)? * basis.minus().get(n - 1)?).abs();
    let scale = local.max(tp.abs() + tm.abs());
    if scale == 0.0 {
        Ok(0.0)
    } else {
        Ok((tp + tm) / scale)
    }
}

/// Remainder ratios `r_n = (psi_n - phi_n^-) / env_n` against the suffix
/// envelope `env_n = max_{m >= n} |phi_m^-|`; `r_n -> 0` as the right edge
/// is approached certifies that `psi` tracks the subdominant member.
pub fn error_ratios(psi: &LatticeSequence, basis: &SolutionBasis) -> Result<LatticeSequence> {
    let (lo, hi) = psi.window();
    let minus = basis.minus().slice(lo, hi)?;
    let env = monotone_envelope(&minus);
    LatticeSequence::from_fn(lo, hi, |n| {
        let e = env.get(n).unwrap();
        if e == 0.0 {
            0.0
        } else {
            (psi.get(n).unwrap() - minus.get(n).unwrap()) / e
        }
    })
}
