//! Converse bound assembly.
//!
//! Three modes, one per way of certifying the tail back-off `delta`:
//!
//! * explicit-exact: `delta` from the exact (or certified lattice) CDF of
//!   the n-fold density sum; the assembled bound is rigorous.
//! * explicit-be: `delta` from a Berry-Esseen certificate around the
//!   normal approximation; also rigorous (constant 0.5600).
//! * normal: the second-order expansion `nI - sqrt(nV) Q^{-1}(eps) + (ln n)/2`
//!   with the constant term dropped; an approximation, and labeled as
//!   such in the output.
//!
//! All tail probabilities are taken under the full i.i.d. joint input
//! law, matching the sums the certificates actually control.

use crate::channel::{DmMac, InputPair, TimeSharedInput};
use crate::density::{
    density_table, moments, time_shared_density_table, DensityKind, DensityTable, Moments,
};
use crate::error::{Error, Result};
use crate::gauss::q_inverse;
use crate::numeric::VAR_FLOOR;
use crate::tail::{solve_delta, AtomicDistribution, SolveMode, TailTarget};

/// Berry-Esseen constant for i.i.d. summands.
pub const C_BERRY_ESSEEN: f64 = 0.5600;

/// Lattice fallback resolution: step = spread / 4096.
const LATTICE_DIVISOR: f64 = 4096.0;

/// The slack parameters coupling the code error to the tail targets
/// `eps (1 + 2 beta)`.
#[derive(Debug, Clone, Copy)]
pub struct BetaSchedule {
    pub beta1: f64,
    pub beta2: f64,
    pub beta12: f64,
}

impl BetaSchedule {
    pub fn get(&self, kind: DensityKind) -> f64 {
        match kind {
            DensityKind::Rate1 => self.beta1,
            DensityKind::Rate2 => self.beta2,
            DensityKind::SumRate => self.beta12,
        }
    }
}

fn beta_component(v: f64, eps: f64, n: u32, component: &'static str) -> Result<f64> {
    let base = (-eps.ln() / n as f64).sqrt();
    let beta = if v > VAR_FLOOR { base / v.sqrt() } else { base };
    let target = eps * (1.0 + 2.0 * beta);
    if target > 1.0 {
        return Err(Error::InfeasibleTarget { component, target });
    }
    Ok(beta)
}

/// Per-constraint slack `beta = sqrt(-ln eps / n) / sqrt(V)`, with the
/// dimensionless fallback `sqrt(-ln eps / n)` for zero-variance
/// constraints. Errors when any `eps (1 + 2 beta)` exceeds 1.
pub fn beta_schedule(v1: f64, v2: f64, v12: f64, eps: f64, n: u32) -> Result<BetaSchedule> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0,1), got {eps}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    Ok(BetaSchedule {
        beta1: beta_component(v1, eps, n, "rate-1")?,
        beta2: beta_component(v2, eps, n, "rate-2")?,
        beta12: beta_component(v12, eps, n, "sum-rate")?,
    })
}

/// Berry-Esseen envelope `gamma_n = C T / (V^{3/2} sqrt n)`.
pub fn berry_esseen_gamma(v: f64, t: f64, n: u32) -> Result<f64> {
    if v <= 0.0 {
        return Err(Error::ZeroVariance(v));
    }
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "third absolute moment must be nonnegative, got {t}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    Ok(C_BERRY_ESSEEN * t / (v.powf(1.5) * (n as f64).sqrt()))
}

/// Berry-Esseen-certified back-off
/// `delta = sqrt(V/n) Q^{-1}(eps (1 + 2 beta) + gamma)`.
///
/// A negative result is returned as-is (the bound just loosens).
pub fn delta_normal(v: f64, eps: f64, beta: f64, gamma: f64, n: u32) -> Result<f64> {
    let arg = eps * (1.0 + 2.0 * beta) + gamma;
    if arg >= 1.0 {
        return Err(Error::InfeasibleTarget {
            component: "berry-esseen",
            target: arg,
        });
    }
    Ok((v / n as f64).sqrt() * q_inverse(arg)?)
}

/// How the explicit bound certifies its tail thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExplicitMode {
    /// Exact sum law; falls back to a certified round-up lattice when the
    /// composition guard trips.
    Exact,
    /// Berry-Esseen certificate.
    BerryEsseen,
}

/// Which bound family produced a [`BoundTriple`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    ExplicitExact,
    ExplicitBe,
    NormalApprox,
}

impl BoundMode {
    /// CLI/report label; the normal mode is flagged as an approximation.
    pub fn label(&self) -> &'static str {
        match self {
            BoundMode::ExplicitExact => "explicit-exact",
            BoundMode::ExplicitBe => "explicit-be",
            BoundMode::NormalApprox => "normal (approximation)",
        }
    }
}

impl std::fmt::Display for BoundMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// How one constraint's threshold was actually certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailPath {
    ExactTail,
    LatticeTail,
    BerryEsseen,
    /// Constant density: delta = 0, fallback beta.
    ZeroVariance,
    NormalApprox,
}

/// Per-constraint diagnostics recorded alongside each bound.
#[derive(Debug, Clone, Copy)]
pub struct ConstraintDiag {
    pub delta: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    /// The sum-law atom `t*` behind an explicit delta.
    pub threshold: Option<f64>,
    pub path: TailPath,
    pub moments: Moments,
}

/// The three right-hand sides of a converse bound: upper bounds on
/// `ln M1`, `ln M2`, and `ln M1 M2` in nats. `b12` is recorded
/// independently; no relation to `b1 + b2` is implied.
#[derive(Debug, Clone)]
pub struct BoundTriple {
    pub b1: f64,
    pub b2: f64,
    pub b12: f64,
    pub mode: BoundMode,
    pub diag: [ConstraintDiag; 3],
}

impl BoundTriple {
    pub fn get(&self, kind: DensityKind) -> f64 {
        match kind {
            DensityKind::Rate1 => self.b1,
            DensityKind::Rate2 => self.b2,
            DensityKind::SumRate => self.b12,
        }
    }
}

fn explicit_constraint(
    table: &DensityTable,
    kind: DensityKind,
    n: u32,
    eps: f64,
    beta: f64,
    mode: ExplicitMode,
) -> Result<(f64, ConstraintDiag)> {
    let m = moments(table, kind);
    let target = eps * (1.0 + 2.0 * beta);

    let (delta, threshold, gamma, path) = if m.variance <= VAR_FLOOR {
        // Constant density: the sum equals n * mean almost surely, so the
        // largest feasible back-off is exactly zero.
        (0.0, Some(n as f64 * m.mean), None, TailPath::ZeroVariance)
    } else {
        match mode {
            ExplicitMode::Exact => {
                let marginal = AtomicDistribution::from_table(table, kind)?;
                let tt = TailTarget::new(target, n)?;
                match solve_delta(&marginal, m.mean, tt, SolveMode::Exact) {
                    Ok(sol) => (sol.delta, Some(sol.threshold), None, TailPath::ExactTail),
                    Err(Error::GuardExceeded { .. }) => {
                        let step = marginal.spread() / LATTICE_DIVISOR;
                        let sol = solve_delta(&marginal, m.mean, tt, SolveMode::Lattice { step })?;
                        (sol.delta, Some(sol.threshold), None, TailPath::LatticeTail)
                    }
                    Err(e) => return Err(e),
                }
            }
            ExplicitMode::BerryEsseen => {
                let gamma = berry_esseen_gamma(m.variance, m.third_abs_central, n)?;
                let delta = delta_normal(m.variance, eps, beta, gamma, n)?;
                (delta, None, Some(gamma), TailPath::BerryEsseen)
            }
        }
    };

    let bound = n as f64 * (m.mean - delta) - eps.ln() - 2.0 * beta.ln() + beta.ln_1p();
    Ok((
        bound,
        ConstraintDiag {
            delta,
            beta: Some(beta),
            gamma,
            threshold,
            path,
            moments: m,
        },
    ))
}

/// Explicit converse bound from a prepared density table.
pub fn explicit_triple_from_table(
    table: &DensityTable,
    n: u32,
    eps: f64,
    mode: ExplicitMode,
) -> Result<BoundTriple> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0,1), got {eps}"
        )));
    }
    let v = |kind| moments(table, kind).variance;
    let betas = beta_schedule(
        v(DensityKind::Rate1),
        v(DensityKind::Rate2),
        v(DensityKind::SumRate),
        eps,
        n,
    )?;
    let (b1, d1) = explicit_constraint(table, DensityKind::Rate1, n, eps, betas.beta1, mode)?;
    let (b2, d2) = explicit_constraint(table, DensityKind::Rate2, n, eps, betas.beta2, mode)?;
    let (b12, d12) = explicit_constraint(table, DensityKind::SumRate, n, eps, betas.beta12, mode)?;
    Ok(BoundTriple {
        b1,
        b2,
        b12,
        mode: match mode {
            ExplicitMode::Exact => BoundMode::ExplicitExact,
            ExplicitMode::BerryEsseen => BoundMode::ExplicitBe,
        },
        diag: [d1, d2, d12],
    })
}

/// Explicit converse bound for a product input.
pub fn explicit_bound_triple(
    channel: &DmMac,
    inputs: &InputPair,
    n: u32,
    eps: f64,
    mode: ExplicitMode,
) -> Result<BoundTriple> {
    let table = density_table(channel, inputs)?;
    explicit_triple_from_table(&table, n, eps, mode)
}

/// Normal-approximation triple from a prepared density table:
/// `b = n I - sqrt(n V) Q^{-1}(eps) + (ln n)/2`, constant term dropped.
pub fn normal_triple_from_table(table: &DensityTable, n: u32, eps: f64) -> Result<BoundTriple> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0,1), got {eps}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let qinv = q_inverse(eps)?;
    let nf = n as f64;
    let one = |kind| -> (f64, ConstraintDiag) {
        let m = moments(table, kind);
        let bound = nf * m.mean - (nf * m.variance).sqrt() * qinv + 0.5 * nf.ln();
        (
            bound,
            ConstraintDiag {
                delta: (m.variance / nf).sqrt() * qinv,
                beta: None,
                gamma: None,
                threshold: None,
                path: TailPath::NormalApprox,
                moments: m,
            },
        )
    };
    let (b1, d1) = one(DensityKind::Rate1);
    let (b2, d2) = one(DensityKind::Rate2);
    let (b12, d12) = one(DensityKind::SumRate);
    Ok(BoundTriple {
        b1,
        b2,
        b12,
        mode: BoundMode::NormalApprox,
        diag: [d1, d2, d12],
    })
}

/// Normal-approximation triple for a product input.
pub fn normal_approx_triple(
    channel: &DmMac,
    inputs: &InputPair,
    n: u32,
    eps: f64,
) -> Result<BoundTriple> {
    let table = density_table(channel, inputs)?;
    normal_triple_from_table(&table, n, eps)
}

/// Normal-approximation triple for a time-shared input.
pub fn normal_approx_triple_ts(
    channel: &DmMac,
    ts: &TimeSharedInput,
    n: u32,
    eps: f64,
) -> Result<BoundTriple> {
    let table = time_shared_density_table(channel, ts)?;
    normal_triple_from_table(&table, n, eps)
}

/// Dispatch helper used by the region sweep and the converse checker.
pub fn triple_from_table(table: &DensityTable, n: u32, eps: f64, mode: BoundMode) -> Result<BoundTriple> {
    match mode {
        BoundMode::ExplicitExact => explicit_triple_from_table(table, n, eps, ExplicitMode::Exact),
        BoundMode::ExplicitBe => {
            explicit_triple_from_table(table, n, eps, ExplicitMode::BerryEsseen)
        }
        BoundMode::NormalApprox => normal_triple_from_table(table, n, eps),
    }
}

/// One constraint's bound on its own, with per-component feasibility:
/// useful when a grid point is infeasible for one rate but not another.
pub fn bound_component(
    table: &DensityTable,
    kind: DensityKind,
    n: u32,
    eps: f64,
    mode: BoundMode,
) -> Result<(f64, ConstraintDiag)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0,1), got {eps}"
        )));
    }
    let m = moments(table, kind);
    match mode {
        BoundMode::NormalApprox => {
            let qinv = q_inverse(eps)?;
            let nf = n as f64;
            let bound = nf * m.mean - (nf * m.variance).sqrt() * qinv + 0.5 * nf.ln();
            Ok((
                bound,
                ConstraintDiag {
                    delta: (m.variance / nf).sqrt() * qinv,
                    beta: None,
                    gamma: None,
                    threshold: None,
                    path: TailPath::NormalApprox,
                    moments: m,
                },
            ))
        }
        BoundMode::ExplicitExact | BoundMode::ExplicitBe => {
            let component = match kind {
                DensityKind::Rate1 => "rate-1",
                DensityKind::Rate2 => "rate-2",
                DensityKind::SumRate => "sum-rate",
            };
            let beta = beta_component(m.variance, eps, n, component)?;
            let explicit = match mode {
                BoundMode::ExplicitExact => ExplicitMode::Exact,
                _ => ExplicitMode::BerryEsseen,
            };
            explicit_constraint(table, kind, n, eps, beta, explicit)
        }
    }
}
